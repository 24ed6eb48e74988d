typedef struct _fts { int fts_options; } FTS;

#define FTS_LOGICAL 0x0002
#define	ISSET(opt)	(sp->fts_options & (opt))

int walk(void) {
  FTS *sp = 0;
  if (ISSET(FTS_LOGICAL))
    return 1;
  return 0;
}

// expect FTS_LOGICAL nested NestedInArgument
// expect ISSET multiple-interface-equivalent Unhygienic,UnorderedDeclarations
