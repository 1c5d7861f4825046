//! Checked-in corpus of buggy programs with golden repairs and truth
//! annotations, plus a generator of random well-formed programs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::cparse::parse_source;
use crate::error::FixtureError;
use crate::eval::TruthAnnotation;
use crate::scopes::{build_scopes, find_undeclared};

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct FixtureMeta {
    pub id: String,
    pub expected_case_id: u8,
    pub variable: String,
    pub expected_tool_type: String,
    pub expected_tool_array_size: Option<u64>,
    pub known_failure: Option<String>,
    /// Listing text that had to be reconstructed, e.g. format strings.
    pub restored: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct FixtureCase {
    pub id: String,
    pub buggy_source: String,
    pub golden_fixed_source: Option<String>,
    pub truth: TruthAnnotation,
    pub meta: FixtureMeta,
}

impl FixtureCase {
    pub fn expected_case_id(&self) -> u8 {
        self.meta.expected_case_id
    }

    pub fn file_name(&self) -> String {
        format!("{}.c", self.id)
    }
}

macro_rules! fixture {
    ($id:literal, golden) => {
        (
            $id,
            include_str!(concat!("../../../fixtures/", $id, "/buggy.c")),
            Some(include_str!(concat!("../../../fixtures/", $id, "/fixed.c"))),
            include_str!(concat!("../../../fixtures/", $id, "/truth.json")),
            include_str!(concat!("../../../fixtures/", $id, "/meta.json")),
        )
    };
    ($id:literal) => {
        (
            $id,
            include_str!(concat!("../../../fixtures/", $id, "/buggy.c")),
            None,
            include_str!(concat!("../../../fixtures/", $id, "/truth.json")),
            include_str!(concat!("../../../fixtures/", $id, "/meta.json")),
        )
    };
}

type RawFixture = (
    &'static str,
    &'static str,
    Option<&'static str>,
    &'static str,
    &'static str,
);

const RAW: [RawFixture; 13] = [
    fixture!("fig-1"),
    fixture!("fig-2"),
    fixture!("fig-7", golden),
    fixture!("fig-8", golden),
    fixture!("fig-9", golden),
    fixture!("fig-10", golden),
    fixture!("fig-11", golden),
    fixture!("fig-12", golden),
    fixture!("fig-13", golden),
    fixture!("fig-14", golden),
    fixture!("fig-15", golden),
    fixture!("fig-16a"),
    fixture!("fig-16b"),
];

fn integrity(id: &str, message: impl Into<String>) -> FixtureError {
    FixtureError::Integrity {
        id: id.to_string(),
        message: message.into(),
    }
}

/// Loads every fixture and checks that buggy and golden sources parse, that
/// goldens have no undeclared uses, and that truth names are unique.
pub fn load_fixtures() -> Result<Vec<FixtureCase>, FixtureError> {
    let mut out = Vec::with_capacity(RAW.len());
    for (id, buggy, golden, truth, meta) in RAW {
        let truth: TruthAnnotation = serde_json::from_str(truth).map_err(|source| FixtureError::Json {
            id: id.to_string(),
            source,
        })?;
        let meta: FixtureMeta = serde_json::from_str(meta).map_err(|source| FixtureError::Json {
            id: id.to_string(),
            source,
        })?;
        if meta.id != id {
            return Err(integrity(id, format!("meta.json names `{}`", meta.id)));
        }
        let mut names: Vec<&str> = truth.expected.iter().map(|e| e.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(integrity(id, "duplicate name in truth"));
        }
        let file = format!("{id}.c");
        parse_source(buggy, &file).map_err(|e| integrity(id, format!("buggy source: {e}")))?;
        if let Some(golden) = golden {
            let root =
                parse_source(golden, &file).map_err(|e| integrity(id, format!("golden source: {e}")))?;
            let scopes = build_scopes(&root).map_err(|e| integrity(id, e.to_string()))?;
            let left = find_undeclared(&root, &scopes);
            if !left.is_empty() {
                return Err(integrity(id, format!("golden leaves '{}' undeclared", left[0].name)));
            }
        }
        out.push(FixtureCase {
            id: id.to_string(),
            buggy_source: buggy.to_string(),
            golden_fixed_source: golden.map(String::from),
            truth,
            meta,
        });
    }
    Ok(out)
}

/// Upper bound on generated statement count.
pub const MAX_STATEMENTS: usize = 200;

struct Gen {
    rng: ChaCha8Rng,
    budget: usize,
    ints: Vec<String>,
    doubles: Vec<String>,
    array: (String, usize),
    depth: usize,
    fresh: usize,
}

impl Gen {
    fn int_atom(&mut self) -> String {
        match self.rng.gen_range(0..4) {
            0 => self.rng.gen_range(0..100).to_string(),
            1 => {
                let idx = self.int_leaf();
                format!("{}[{idx} % {}]", self.array.0, self.array.1)
            }
            _ => self.int_leaf(),
        }
    }

    fn int_leaf(&mut self) -> String {
        self.ints.choose(&mut self.rng).cloned().unwrap_or_else(|| "0".into())
    }

    fn int_expr(&mut self, depth: usize) -> String {
        if depth == 0 || self.rng.gen_bool(0.4) {
            return self.int_atom();
        }
        let op = ["+", "-", "*", "/", "%"][self.rng.gen_range(0..5)];
        let (l, r) = (self.int_expr(depth - 1), self.int_expr(depth - 1));
        match self.rng.gen_range(0..6) {
            0 => format!("-({l} {op} {r})"),
            _ => format!("({l} {op} {r})"),
        }
    }

    fn double_expr(&mut self, depth: usize) -> String {
        if depth == 0 || self.rng.gen_bool(0.4) {
            return match self.rng.gen_range(0..3) {
                0 => format!("{}.{}", self.rng.gen_range(0..50), self.rng.gen_range(0..100)),
                _ => self.doubles.choose(&mut self.rng).cloned().unwrap_or_else(|| "1.0".into()),
            };
        }
        let op = ["+", "-", "*", "/"][self.rng.gen_range(0..4)];
        let (l, r) = (self.double_expr(depth - 1), self.int_expr(depth - 1));
        format!("({l} {op} {r})")
    }

    fn cond(&mut self) -> String {
        let rel = ["<", ">", "<=", ">=", "==", "!="][self.rng.gen_range(0..6)];
        let base = format!("{} {rel} {}", self.int_expr(1), self.int_expr(1));
        match self.rng.gen_range(0..5) {
            0 => format!("{base} && {} < {}", self.int_leaf(), self.int_atom()),
            1 => format!("!({base}) || {} != 0", self.int_leaf()),
            _ => base,
        }
    }

    fn block(&mut self, out: &mut String, indent: usize) {
        let count = self.rng.gen_range(1..=3);
        for _ in 0..count {
            if self.budget == 0 {
                break;
            }
            self.statement(out, indent);
        }
    }

    fn line(out: &mut String, indent: usize, text: &str) {
        for _ in 0..indent {
            out.push_str("  ");
        }
        out.push_str(text);
        out.push('\n');
    }

    fn statement(&mut self, out: &mut String, indent: usize) {
        self.budget = self.budget.saturating_sub(1);
        let nested = self.depth < 3 && self.budget > 2;
        let choice = self.rng.gen_range(0..if nested { 10 } else { 5 });
        match choice {
            0 => {
                let target = self.int_leaf();
                let e = self.int_expr(3);
                Self::line(out, indent, &format!("{target} = {e};"));
            }
            1 => {
                let target = self.doubles.choose(&mut self.rng).cloned().unwrap_or_default();
                let op = ["=", "+=", "-=", "*="][self.rng.gen_range(0..4)];
                let e = self.double_expr(2);
                Self::line(out, indent, &format!("{target} {op} {e};"));
            }
            2 => {
                let idx = self.int_leaf();
                let e = self.int_expr(2);
                Self::line(out, indent, &format!("{}[{idx} % {}] = {e};", self.array.0, self.array.1));
            }
            3 => {
                let v = self.int_leaf();
                let step = ["++", "--"][self.rng.gen_range(0..2)];
                if self.rng.gen_bool(0.5) {
                    Self::line(out, indent, &format!("{v}{step};"));
                } else {
                    Self::line(out, indent, &format!("{step}{v};"));
                }
            }
            4 => {
                let a = self.int_leaf();
                let d = self.doubles.choose(&mut self.rng).cloned().unwrap_or_default();
                Self::line(out, indent, &format!("printf(\"%d %f\\n\", {a}, {d});"));
            }
            5 | 6 => {
                let c = self.cond();
                Self::line(out, indent, &format!("if ({c})"));
                self.nested_block(out, indent);
                if self.rng.gen_bool(0.4) {
                    Self::line(out, indent, "else");
                    self.nested_block(out, indent);
                }
            }
            7 => {
                self.fresh += 1;
                let k = format!("k{}", self.fresh);
                let bound = self.rng.gen_range(1..20);
                Self::line(out, indent, &format!("for (int {k} = 0; {k} < {bound}; {k}++)"));
                self.ints.push(k);
                self.nested_block(out, indent);
                self.ints.pop();
            }
            8 => {
                let v = self.int_leaf();
                let c = self.cond();
                Self::line(out, indent, &format!("while ({c} && {v} < 1000)"));
                Self::line(out, indent, "{");
                Self::line(out, indent + 1, &format!("{v} = {v} + 1;"));
                self.depth += 1;
                self.block(out, indent + 1);
                self.depth -= 1;
                Self::line(out, indent, "}");
            }
            _ => {
                self.fresh += 1;
                let local = format!("t{}", self.fresh);
                Self::line(out, indent, "{");
                let init = self.int_expr(2);
                Self::line(out, indent + 1, &format!("int {local} = {init};"));
                self.ints.push(local.clone());
                self.depth += 1;
                self.block(out, indent + 1);
                self.depth -= 1;
                self.ints.pop();
                Self::line(out, indent + 1, &format!("helper({local}, {}.5);", self.fresh));
                Self::line(out, indent, "}");
            }
        }
    }

    fn nested_block(&mut self, out: &mut String, indent: usize) {
        Self::line(out, indent, "{");
        self.depth += 1;
        self.block(out, indent + 1);
        self.depth -= 1;
        Self::line(out, indent, "}");
    }
}

/// A random program in the supported subset with every variable declared.
/// `size` is clamped to [`MAX_STATEMENTS`].
pub fn generate_program(seed: u64, size: usize) -> String {
    let size = size.min(MAX_STATEMENTS);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_ints = rng.gen_range(1..=5);
    let n_doubles = rng.gen_range(1..=3);
    let array_len = rng.gen_range(2..=64);
    let ints: Vec<String> = (0..n_ints).map(|i| format!("i{i}")).collect();
    let doubles: Vec<String> = (0..n_doubles).map(|i| format!("d{i}")).collect();

    let mut out = String::from("#include <stdio.h>\n");
    out.push_str("int helper(int p, double q)\n{\n  int r = p * 2;\n  if (q > r)\n    r = r + 1;\n  return r;\n}\n");
    out.push_str("int main()\n{\n");
    for v in &ints {
        out.push_str(&format!("  int {v} = {};\n", rng.gen_range(0..10)));
    }
    for v in &doubles {
        out.push_str(&format!("  double {v} = {}.25;\n", rng.gen_range(0..10)));
    }
    out.push_str(&format!("  int arr[{array_len}];\n"));
    let mut gen = Gen {
        rng,
        budget: size,
        ints,
        doubles,
        array: ("arr".into(), array_len),
        depth: 0,
        fresh: 0,
    };
    while gen.budget > 0 {
        gen.statement(&mut out, 1);
    }
    out.push_str("  return 0;\n}\n");
    out
}
