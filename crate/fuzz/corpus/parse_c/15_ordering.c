struct { int bits; } opts;

#define GETLIMIT() (limit)
#define AS_SPAN(x) ((span_t)(x))
#define REC_SIZE() sizeof(struct rec)
#define FLAGS_OF(f) ((f).bits)
#define OUTER() INNER_VAL
#define INNER_VAL 42

int limit = 10;
typedef long span_t;
struct rec { int a, b; };

long use_scope(void) {
  long s = AS_SPAN(limit);
  s += GETLIMIT();
  s += REC_SIZE();
  s += FLAGS_OF(opts);
  return s + OUTER();
}

// expect GETLIMIT scope-adapting UnorderedDeclarations
// expect AS_SPAN scope-adapting UnorderedExpansionType,UnorderedTypeDeclarations
// expect REC_SIZE scope-adapting UnorderedTypeDeclarations
// expect FLAGS_OF scope-adapting AnonymousArgumentTypes
// expect OUTER scope-adapting UnorderedMacros
// expect INNER_VAL nested NestedInBody
