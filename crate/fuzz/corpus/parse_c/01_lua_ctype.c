extern const unsigned char luai_ctype_[257];
struct LexState { int current; };

#define ALPHABIT      0
#define MASK(B)       (1<<(B))
#define testprop(c,p) (luai_ctype_[(c)+1]&(p))
#define lislalpha(c) testprop(c,MASK(ALPHABIT))

int is_alpha(struct LexState *ls) {
  if(lislalpha(ls->current))
    return 1;
  return 0;
}

// expect ALPHABIT nested NestedInBody
// expect MASK nested NestedInBody
// expect testprop nested NestedInBody
// expect lislalpha definition-adapting -
