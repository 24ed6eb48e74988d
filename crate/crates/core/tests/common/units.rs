//! Two units sharing a header, plus a unit that includes both.

use std::path::Path;

use macport::analyze::{analyze_file, AnalysisOptions};
use macport::pp::{MemoryFiles, PreprocessOptions};
use macport::report::Report;

const SHARED: &str = "#ifndef SHARED_H\n#define SHARED_H\n\
struct item { int v; struct item *next; };\n\
#define ITEM_V(p) ((p)->v)\n\
#define INC(x) ((x)++)\n\
#define SQ(x) ((x) * (x))\n\
#define LIMIT 100\n\
#define ADD(a, b) a + b\n\
#define ONLY_B(x) ((x) + 1)\n\
#define NEVER(x) (x)\n\
#endif\n";

const UNIT_A: &str = "#include \"shared.h\"\n\
int fa(struct item *p, int k) { INC(k); return ITEM_V(p) + SQ(k) + LIMIT; }\n";

const UNIT_B: &str = "#include \"shared.h\"\n\
int fb(struct item *p) { return 3 * ADD(ITEM_V(p), 1) + ONLY_B(2) + LIMIT; }\n";

pub fn files() -> MemoryFiles {
    MemoryFiles::new()
        .with("proj/shared.h", SHARED)
        .with("proj/a.c", UNIT_A)
        .with("proj/b.c", UNIT_B)
        .with("proj/whole.c", "#include \"a.c\"\n#include \"b.c\"\n")
}

pub fn unit(name: &str) -> Report {
    let path = Path::new("proj").join(name);
    analyze_file(&path, &PreprocessOptions::default(), &files(), &AnalysisOptions::default())
        .unwrap_or_else(|e| panic!("{name}: {e}"))
}
