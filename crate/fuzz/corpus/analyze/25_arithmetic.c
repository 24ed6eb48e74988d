#define SQUARE(x) ((x) * (x))
#define ABS(x) ((x) < 0 ? -(x) : (x))
#define CLAMP(v, lo, hi) ((v) < (lo) ? (lo) : (v) > (hi) ? (hi) : (v))
#define AVG(a, b) (((a) + (b)) / 2)
#define IS_EVEN(n) (((n) & 1) == 0)
#define BIT(n) (1u << (n))
#define SIGN(x) (((x) > 0) - ((x) < 0))
#define SCALE(x) ((x) * 3 + 1)
#define LOW_BYTE(w) ((w) & 0xff)
#define MOD7(x) ((x) % 7)
#define WIDEN(x) ((x) + 1L)

int arith(int a, int b, unsigned u, long l) {
  int r = SQUARE(a) + ABS(b) + CLAMP(a, 0, 255) + AVG(a, b) + IS_EVEN(b);
  r += (int)BIT(u & 7) + SIGN(a) + SCALE(b) + LOW_BYTE(a) + MOD7(b);
  return r + (int)WIDEN(l);
}

// expect SQUARE definition-adapting -
// expect ABS definition-adapting -
// expect CLAMP callsite-context-altering ConditionalArguments
// expect AVG definition-adapting -
// expect IS_EVEN definition-adapting -
// expect BIT definition-adapting -
// expect SIGN definition-adapting -
// expect SCALE definition-adapting -
// expect LOW_BYTE definition-adapting -
// expect MOD7 definition-adapting -
// expect WIDEN definition-adapting -
