#![allow(dead_code)]

pub mod gen;

use ealinfer::lambda::{parse_term, Term};

/// Every closed term with exactly `n` nodes, binders named by depth.
pub fn closed_terms(n: usize) -> Vec<Term> {
    fn go(n: usize, depth: usize) -> Vec<Term> {
        let mut out = Vec::new();
        if n == 1 {
            for i in 0..depth {
                out.push(Term::var(&format!("x{i}")));
            }
            return out;
        }
        for body in go(n - 1, depth + 1) {
            out.push(Term::abs(&format!("x{depth}"), body));
        }
        for a in 1..n - 1 {
            let fs = go(a, depth);
            let xs = go(n - 1 - a, depth);
            for f in &fs {
                for x in &xs {
                    out.push(Term::app(f.clone(), x.clone()));
                }
            }
        }
        out
    }
    go(n, 0).into_iter().map(|t| t.renumber()).collect()
}

pub const TWO: &str = "\\x.\\y.(x (x y))";
pub const SHARED_ID: &str = "(\\n.\\y.((n \\z.z) y) \\x.(x (x \\w.w)))";
pub const UNTYPABLE: &str = "(\\n.(n \\y.(n \\z.y)) \\x.(x (x y)))";

/// Typable terms exercised by the soundness checks.
pub const CORPUS: &[&str] = &[
    "\\x.x",
    "\\f.\\x.x",
    "\\f.\\x.(f x)",
    TWO,
    "\\f.\\x.(f (f (f x)))",
    "\\f.\\g.\\x.(f (g x))",
    SHARED_ID,
    "\\z.\\x.\\w.((x z) ((x z) w))",
    "\\x.\\y.x",
    "\\x.\\y.\\z.((x z) (y z))",
    "\\n.\\f.\\x.(f ((n f) x))",
    "\\m.\\n.\\f.\\x.((m f) ((n f) x))",
    "\\p.((p \\a.\\b.a) \\c.c)",
    "(\\x.x \\y.y)",
    "\\f.(f \\x.x)",
    "\\x.\\f.(f x)",
    "(f (f x))",
    "\\f.\\x.((f x) x)",
];

pub fn term(s: &str) -> Term {
    parse_term(s).unwrap()
}

/// Renames box variables per tag in order of first appearance, so that
/// traces compare independently of the global counter.
pub fn canonicalize(text: &str) -> String {
    use std::collections::HashMap;
    let chars: Vec<char> = text.chars().collect();
    let mut map: HashMap<String, String> = HashMap::new();
    let mut counts: HashMap<char, usize> = HashMap::new();
    let mut out = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let boundary = i == 0 || !(chars[i - 1].is_alphanumeric() || chars[i - 1] == '_' || chars[i - 1] == '\'');
        if boundary && "pbcn".contains(c) && i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            if j == chars.len() || !(chars[j].is_alphanumeric() || chars[j] == '_') {
                let key: String = chars[i..j].iter().collect();
                let name = map
                    .entry(key)
                    .or_insert_with(|| {
                        let k = counts.entry(c).or_insert(0);
                        *k += 1;
                        format!("{c}{k}")
                    })
                    .clone();
                out.push_str(&name);
                i = j;
                continue;
            }
        }
        out.push(c);
        i += 1;
    }
    out
}
