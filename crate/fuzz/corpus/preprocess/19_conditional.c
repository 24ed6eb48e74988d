#define PICK(c, a, b) ((c) ? (a) : (b))
#define OR_ELSE(a, b) ((a) || (b))

int pick(int *p, int k) {
  return PICK(k, p[0], p[1]) + OR_ELSE(k, *p);
}

// expect PICK callsite-context-altering ConditionalArguments
// expect OR_ELSE callsite-context-altering ConditionalArguments
