#define STR(x) #x
const char *s = STR(a "b" \n);
int x = 0x1fULL + 1.5e-3f + L'c';
