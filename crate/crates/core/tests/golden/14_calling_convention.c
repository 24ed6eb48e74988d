struct state { int pos; int buf[8]; } state;
int counter;

#define CUR (state.pos)
#define COUNTER (counter)
#define ADDR(v) (&(v))
#define INC(x) ((x)++)
#define SWAP(a, b) do { int t = a; a = b; b = t; } while (0)

void step(void) {
  int i = 0, j = 1;
  int *p;
  CUR = 3;
  p = &COUNTER;
  p = ADDR(i);
  INC(j);
  SWAP(i, j);
  (void)p;
}

// expect CUR calling-convention-adapting ModifiedBody
// expect COUNTER calling-convention-adapting AddressedBody
// expect ADDR calling-convention-adapting AddressedArguments
// expect INC calling-convention-adapting ModifiedArguments
// expect SWAP calling-convention-adapting ModifiedArguments
