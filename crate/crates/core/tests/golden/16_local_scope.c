#define GETX(p) ((p).x)

void draw(void) {
  struct local_pt { int x, y; } lp = { 1, 2 };
  int total = GETX(lp);
#define LOCAL_ONE 1
  total += LOCAL_ONE;
  (void)total;
}

// expect GETX scope-adapting UnorderedArgumentTypes,LocalArgumentTypes
// expect LOCAL_ONE scope-adapting LocallyDefined
