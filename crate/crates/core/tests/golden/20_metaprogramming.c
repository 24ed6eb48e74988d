int printf(const char *, ...);

#define SHOW(v) printf("%s=%d\n", #v, v)
#define CONCAT(a, b) a##b
#define CAST_TO(t, v) ((t)(v))
#define BAIL return -1

int meta(int count) {
  int CONCAT(var, 1) = count;
  SHOW(count);
  if (count < 0) BAIL;
  return (int)CAST_TO(long, var1);
}

// expect SHOW metaprogramming StringizingTokenPasting
// expect CONCAT multiple-non-interface-equivalent Unaligned,StringizingTokenPasting
// expect CAST_TO metaprogramming NonExpressionArguments
// expect BAIL metaprogramming ControlFlow
