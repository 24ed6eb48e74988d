#define CNT (tally.n)
#define CUR_PT (cur)

void count(void) {
  struct t { int n; } tally = { 0 };
  struct lp { int x; } cur = { 1 };
  int z = CNT;
  struct lp copy = CUR_PT;
  (void)z;
  (void)copy;
}

// expect CNT multiple-interface-equivalent Unhygienic,UnorderedDeclarations,LocallyTypedSubexpressions
// expect CUR_PT multiple-interface-equivalent Unhygienic,UnorderedDeclarations,UnorderedExpansionType,LocallyTypedSubexpressions,LocalType
