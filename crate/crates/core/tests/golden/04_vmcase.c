#define vmcase(l) case l:
#define vmbreak break

int run(int op) {
  int r = 0;
  switch (op) {
    vmcase(0) r = 1; vmbreak;
    vmcase(1) r = 2; vmbreak;
  }
  return r;
}

// expect vmcase metaprogramming ControlFlow
// expect vmbreak metaprogramming ControlFlow
