#define FEATURE_LEVEL 2
#if FEATURE_LEVEL > 1
#define HAVE_FAST 1
#endif

int level(void) {
#ifdef HAVE_FAST
  return FEATURE_LEVEL + HAVE_FAST;
#else
  return FEATURE_LEVEL;
#endif
}

// expect FEATURE_LEVEL scope-adapting ConditionMacro
// expect HAVE_FAST scope-adapting ConditionMacro
