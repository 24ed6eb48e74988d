#if PROTOTYPES
#define ___P(protos) protos
#else /* no PROTOTYPES */
#define ___P(protos) ()
#endif

extern char *strerror ___P ((int));
extern char *xstrdup ___P ((const char *));

// expect ___P callsite-context-altering Unaligned
