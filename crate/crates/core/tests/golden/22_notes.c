void log_msg(const char *fmt, ...);

#define BUFSZ 512
#define UNUSED_LIMIT 99
#define DOUBLE(x) ((x) * 2)
#define SET_FLAG(f) ((f) = 1)
#define LOG(...) log_msg(__VA_ARGS__)

struct bits { unsigned ready : 1; };

int misc(struct bits *b, int i) {
  char buf[BUFSZ];
  buf[0] = 0;
  SET_FLAG(b->ready);
  LOG("start");
  return DOUBLE(i++) + DOUBLE(3) + buf[0];
}

// expect BUFSZ definition-adapting -
// expect UNUSED_LIMIT unanalyzed -
// expect DOUBLE multiple-non-interface-equivalent SideEffectingArguments
// expect SET_FLAG callsite-context-altering ModifiedArguments
// expect LOG metaprogramming -
