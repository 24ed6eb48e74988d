#define ADD(a, b) a + b

int scaled(void) { return 4 * ADD(5, 6); }

// expect ADD callsite-context-altering Unaligned
