typedef struct GCObject { struct GCObject *gclist; } GCObject;
typedef struct Table { GCObject *gclist; int n; } Table;
void linkgclist_(GCObject *o, GCObject **pnext, GCObject **list);

#define obj2gco(v) ((GCObject *)(v))
#define linkgclist(o,p) \
  linkgclist_(obj2gco(o), &(o)->gclist, &(p))

struct global_State { GCObject *gray; };

void mark_table(struct global_State *g, Table *h) {
  linkgclist(h, g->gray);
}

// expect obj2gco nested NestedInBody
// expect linkgclist calling-convention-adapting ModifiedArguments,AddressedArguments
