#define MASK(B) (1<<(B))

int flags(int b) { return MASK(b) | MASK(3); }

// expect MASK definition-adapting -
