#define EVAL(e) ((void)(e))
#define TWICE(x) ((x) + (x))

int next_id(void);

void thunks(int i) {
  EVAL((void)0);
  i = TWICE(next_id());
  (void)i;
}

// expect EVAL thunkizing VoidArguments
// expect TWICE thunkizing SideEffectingArguments
