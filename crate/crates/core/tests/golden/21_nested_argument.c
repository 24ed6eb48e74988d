#define SQ(x) ((x) * (x))
#define MAX(a, b) ((a) > (b) ? (a) : (b))

int nest(int n) { return MAX(SQ(n), 10); }

// expect SQ nested NestedInArgument
// expect MAX definition-adapting -
