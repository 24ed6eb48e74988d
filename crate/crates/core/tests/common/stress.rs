//! Seeded generator of directive-heavy preprocessor inputs.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Gen {
    rng: StdRng,
    out: String,
    objects: Vec<String>,
    marker: usize,
}

impl Gen {
    fn pick<'a>(&mut self, xs: &'a [&'a str]) -> &'a str {
        xs[self.rng.gen_range(0..xs.len())]
    }

    fn marker(&mut self) -> String {
        self.marker += 1;
        format!("int m{};\n", self.marker)
    }

    /// A constant expression valid in `#if`; never divides.
    fn cond_expr(&mut self, depth: u32) -> String {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return match self.rng.gen_range(0..6) {
                0 => self.rng.gen_range(0..20).to_string(),
                1 if !self.objects.is_empty() => {
                    let i = self.rng.gen_range(0..self.objects.len());
                    format!("defined({})", self.objects[i])
                }
                2 if !self.objects.is_empty() => {
                    let i = self.rng.gen_range(0..self.objects.len());
                    format!("defined {}", self.objects[i])
                }
                3 => "UNDEFINED_NAME".to_string(),
                4 => format!("'{}'", self.pick(&["a", "0", "\\n", "Z"])),
                _ => format!("{}u", self.rng.gen_range(0..9)),
            };
        }
        let a = self.cond_expr(depth - 1);
        let b = self.cond_expr(depth - 1);
        match self.rng.gen_range(0..5) {
            0 => format!("({a} {} {b})", self.pick(&["+", "-", "*", "&", "|", "^"])),
            1 => format!("({a} {} {b})", self.pick(&["<", ">", "<=", ">=", "==", "!="])),
            2 => format!("({a} {} {b})", self.pick(&["&&", "||"])),
            3 => format!("{}({a})", self.pick(&["!", "~", "-", "+"])),
            _ => {
                let c = self.cond_expr(depth - 1);
                format!("({c} ? {a} : {b})")
            }
        }
    }

    fn conditional(&mut self, depth: u32) {
        let open = match self.rng.gen_range(0..3) {
            0 => format!("#if {}\n", self.cond_expr(3)),
            1 => format!("#ifdef {}\n", self.some_name()),
            _ => format!("#ifndef {}\n", self.some_name()),
        };
        self.out.push_str(&open);
        self.body(depth);
        for _ in 0..self.rng.gen_range(0..3) {
            let e = self.cond_expr(2);
            self.out.push_str(&format!("#elif {e}\n"));
            self.body(depth);
        }
        if self.rng.gen_bool(0.5) {
            self.out.push_str("#else\n");
            self.body(depth);
        }
        self.out.push_str("#endif\n");
    }

    fn some_name(&mut self) -> String {
        if !self.objects.is_empty() && self.rng.gen_bool(0.7) {
            self.objects[self.rng.gen_range(0..self.objects.len())].clone()
        } else {
            format!("NOPE{}", self.rng.gen_range(0..5))
        }
    }

    fn body(&mut self, depth: u32) {
        let m = self.marker();
        self.out.push_str(&m);
        if depth > 0 && self.rng.gen_bool(0.5) {
            self.conditional(depth - 1);
        }
        if self.rng.gen_bool(0.4) {
            self.define_object();
        }
    }

    fn define_object(&mut self) {
        let name = format!("OBJ{}", self.rng.gen_range(0..8));
        let value = self.cond_expr(2);
        if self.objects.contains(&name) {
            self.out.push_str(&format!("#undef {name}\n"));
        } else {
            self.objects.push(name.clone());
        }
        self.out.push_str(&format!("#define {name} {value}\n"));
    }

    fn expansions(&mut self, k: usize) {
        let arg = |g: &mut Gen| -> String {
            match g.rng.gen_range(0..6) {
                0 => String::new(),
                1 => format!("x{}", g.rng.gen_range(0..4)),
                2 => format!(" a   +  b{} ", g.rng.gen_range(0..3)),
                3 => format!("(p, q{})", g.rng.gen_range(0..3)),
                4 if !g.objects.is_empty() => g.objects[g.rng.gen_range(0..g.objects.len())].clone(),
                _ => format!("\"s{}\\n\"", g.rng.gen_range(0..3)),
            }
        };
        let (a, b) = (arg(self), arg(self));
        let line = match self.rng.gen_range(0..9) {
            0 => format!("STR{k}({a})"),
            1 => format!("XSTR{k}({a})"),
            2 => format!("CAT{k}(v, {})", self.rng.gen_range(0..9)),
            3 => format!("XCAT{k}(ID{k}, _t{})", self.rng.gen_range(0..8)),
            4 => format!("VAR{k}(fmt{k}, {a}, {b})"),
            5 => format!("VAR{k}(only)"),
            6 => format!("SELF{k} + REC{k}(1)"),
            7 => format!("APPLY{k}(TWICE{k}, {a})"),
            _ => format!("TWICE{k} (TWICE{k}({a})) TWICE{k}"),
        };
        self.out.push_str(&line);
        self.out.push_str(";\n");
    }
}

/// One stress file; the same seed always gives the same text.
pub fn stress_file(seed: u64) -> String {
    let mut g = Gen {
        rng: StdRng::seed_from_u64(seed),
        out: String::new(),
        objects: Vec::new(),
        marker: 0,
    };
    let k = seed as usize;
    g.out.push_str(&format!(
        "#define STR{k}(x) #x\n\
         #define XSTR{k}(x) STR{k}(x)\n\
         #define CAT{k}(a, b) a ## b\n\
         #define XCAT{k}(a, b) CAT{k}(a, b)\n\
         #define VAR{k}(f, ...) call(f, __VA_ARGS__)\n\
         #define SELF{k} (SELF{k} + 1)\n\
         #define REC{k}(x) REC{k}(x) * SELF{k}\n\
         #define TWICE{k}(x) ((x) + \\\n  (x))\n\
         #define APPLY{k}(f, x) f(x)\n\
         #define ID{k} ident{k}\n"
    ));
    for _ in 0..g.rng.gen_range(2..5) {
        g.define_object();
    }
    for _ in 0..g.rng.gen_range(4..9) {
        if g.rng.gen_bool(0.5) {
            g.conditional(2);
        } else {
            g.expansions(k);
        }
    }
    g.out
}
