//! Pre-compile-time type binding: infers a declaration type for each
//! undeclared variable from the syntactic context of its uses.
//!
//! Rules, tested in order at each use; the first (use, rule) match wins.
//!
//! | id | context of the use `u`                                          | bound type                  |
//! |----|------------------------------------------------------------------|-----------------------------|
//! | 1  | `u = CONST` or `u = -CONST`                                      | type of the constant        |
//! | 2  | `u = arr[i]` with `arr` a declared array                         | element type of `arr`       |
//! | 3  | `u ⊕ v` inside an `if` condition, `v` declared                   | type of `v`                 |
//! | 4  | `u = v` with `v` a declared scalar                               | type of `v`                 |
//! | 5  | `x = ... u ⊕ v ...`                                              | type of `x`, else of `v`    |
//! | 6  | `u[i] = v` with `v` a declared scalar                            | array of `v`'s type         |
//! | 7  | `u ⊕ v` inside a loop condition, `v` declared                    | type of `v`                 |
//! | 8  | `u ⊕ f(...)` inside any condition                                | return type of `f`          |
//! | 9  | `u = f(...)` or `u = f(...) ⊕ ...`                               | return type of `f`          |
//!
//! Nothing matching yields rule 0 with the fallback type.

use std::fmt;

use serde::Serialize;

use crate::ast::{locate, AstNode, Coord, Located, NodeKind};
use crate::scopes::{library_return_type, subtree_sizes, DeclInfo, ScopeTree, Shape, UndeclaredUse};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CType {
    pub name: String,
    pub qualifiers: Vec<String>,
}

impl CType {
    pub fn named(name: impl Into<String>) -> Self {
        CType {
            name: name.into(),
            qualifiers: Vec::new(),
        }
    }
}

impl fmt::Display for CType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in &self.qualifiers {
            write!(f, "{q} ")?;
        }
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeEvidence {
    pub variable: String,
    pub function: String,
    /// Rule that fired, 1 to 9, or 0 for the fallback.
    pub case_id: u8,
    pub site: Coord,
    pub bound_from: String,
    pub inferred: CType,
    pub array_size: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct BindOptions {
    pub array_size: u64,
    pub fallback_type: String,
    /// Majority vote over all uses instead of first match.
    pub best_evidence: bool,
}

impl Default for BindOptions {
    fn default() -> Self {
        BindOptions {
            array_size: 1000,
            fallback_type: "int".into(),
            best_evidence: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WarningKind {
    Fallback,
    SingleUse,
    LoopRisk,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub kind: WarningKind,
    pub variable: String,
    pub site: Coord,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: warning: {}", self.site, self.message)
    }
}

struct Matched {
    case_id: u8,
    ctype: String,
    bound_from: String,
    array: bool,
}

/// Shared per-tree state for binding every undeclared variable of a file.
pub struct Binder<'a> {
    nodes: Vec<Located<'a>>,
    sizes: Vec<usize>,
    scopes: &'a ScopeTree,
    opts: BindOptions,
}

impl<'a> Binder<'a> {
    pub fn new(root: &'a AstNode, scopes: &'a ScopeTree, opts: BindOptions) -> Self {
        let nodes = locate(root);
        let sizes = subtree_sizes(&nodes);
        Binder {
            nodes,
            sizes,
            scopes,
            opts,
        }
    }

    fn node(&self, i: usize) -> &'a AstNode {
        self.nodes[i].node
    }

    fn parent(&self, i: usize) -> Option<(usize, &'static str)> {
        self.nodes[i].parent.map(|p| (p, self.nodes[i].slot))
    }

    fn children(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut next = i + 1;
        while next < i + self.sizes[i] {
            out.push(next);
            next += self.sizes[next];
        }
        out
    }

    fn child_in(&self, i: usize, slot: &str) -> Option<usize> {
        self.children(i)
            .into_iter()
            .find(|&c| self.nodes[c].slot == slot)
    }

    fn declared(&self, i: usize) -> Option<&'a DeclInfo> {
        let node = self.node(i);
        if !node.is(NodeKind::ID) {
            return None;
        }
        self.scopes
            .lookup_at(node.str_attr("name")?, i)
            .filter(|d| !d.is_function())
    }

    fn id_name(&self, i: usize) -> &'a str {
        self.node(i).str_attr("name").unwrap_or_default()
    }

    /// Declared array behind an `ArrayRef` base.
    fn array_base(&self, arrayref: usize) -> Option<(&'a DeclInfo, usize)> {
        let base = self.child_in(arrayref, "name")?;
        self.declared(base)
            .filter(|d| d.is_array())
            .map(|d| (d, base))
    }

    fn return_type(&self, call: usize) -> (String, String) {
        let callee = self.child_in(call, "name");
        let name = callee.map(|c| self.id_name(c)).unwrap_or_default();
        let ret = callee
            .and_then(|c| self.scopes.lookup_at(name, c))
            .and_then(|d| match &d.shape {
                Shape::Function { ret } => Some(ret.clone()),
                _ => None,
            })
            .or_else(|| library_return_type(name).map(String::from))
            .unwrap_or_else(|| "int".to_string());
        (ret, name.to_string())
    }

    /// First call in preorder within the subtree at `i`.
    fn first_call(&self, i: usize) -> Option<usize> {
        (i..i + self.sizes[i]).find(|&j| self.node(j).is(NodeKind::FuncCall))
    }

    /// Type evidence carried by an operand subtree: the first declared scalar
    /// or declared-array element, not looking inside calls.
    fn operand_evidence(&self, i: usize) -> Option<(String, String)> {
        let node = self.node(i);
        match node.kind {
            NodeKind::FuncCall => None,
            NodeKind::ID => self
                .declared(i)
                .filter(|d| d.is_scalar())
                .map(|d| (d.ctype.clone(), d.name.clone())),
            NodeKind::ArrayRef => self
                .array_base(i)
                .map(|(d, _)| (d.ctype.clone(), format!("{}[]", d.name))),
            _ => self
                .children(i)
                .into_iter()
                .find_map(|c| self.operand_evidence(c)),
        }
    }

    /// Sibling operands of `u` along its chain of enclosing binary
    /// operators, innermost first, and the index of the topmost operand.
    fn chain(&self, u: usize) -> (Vec<usize>, usize) {
        let mut siblings = Vec::new();
        let mut top = u;
        while let Some((p, slot)) = self.parent(top) {
            if !self.node(p).is(NodeKind::BinaryOp) {
                break;
            }
            let other = if slot == "left" { "right" } else { "left" };
            if let Some(s) = self.child_in(p, other) {
                siblings.push(s);
            }
            top = p;
        }
        (siblings, top)
    }

    fn constant_type(node: &AstNode) -> Option<&'static str> {
        let ty = node.str_attr("type")?;
        Some(match ty {
            "string" => return None,
            "char" => "char",
            t if t.contains("double") || t.contains("float") => "double",
            _ => "int",
        })
    }

    fn match_use(&self, u: usize) -> Option<Matched> {
        let parent = self.parent(u);
        let assignment_lvalue = match parent {
            Some((p, "lvalue")) if self.node(p).is(NodeKind::Assignment) => Some(p),
            _ => None,
        };
        let rvalue = assignment_lvalue.and_then(|a| self.child_in(a, "rvalue"));
        let (siblings, top) = self.chain(u);
        let context = self
            .parent(top)
            .map(|(p, slot)| (self.node(p).kind, slot, p));
        let in_cond = |kinds: &[NodeKind]| {
            !siblings.is_empty()
                && matches!(context, Some((k, "cond", _)) if kinds.contains(&k))
        };

        // Case 1
        if let Some(rv) = rvalue {
            let node = self.node(rv);
            let constant = match node.kind {
                NodeKind::Constant => Some(rv),
                NodeKind::UnaryOp if node.str_attr("op") == Some("-") => self
                    .child_in(rv, "expr")
                    .filter(|&c| self.node(c).is(NodeKind::Constant)),
                _ => None,
            };
            if let Some(c) = constant {
                if let Some(ty) = Self::constant_type(self.node(c)) {
                    let value = self.node(c).str_attr("value").unwrap_or_default();
                    return Some(Matched {
                        case_id: 1,
                        ctype: ty.into(),
                        bound_from: format!("rvalue constant {value}"),
                        array: false,
                    });
                }
            }
        }
        // Case 2
        if let Some(rv) = rvalue.filter(|&rv| self.node(rv).is(NodeKind::ArrayRef)) {
            if let Some((decl, _)) = self.array_base(rv) {
                let size = match decl.shape {
                    Shape::Array { size: Some(n) } => n.to_string(),
                    _ => String::new(),
                };
                return Some(Matched {
                    case_id: 2,
                    ctype: decl.ctype.clone(),
                    bound_from: format!("array {}[{size}]", decl.name),
                    array: false,
                });
            }
        }
        // Case 3
        if in_cond(&[NodeKind::If]) {
            if let Some((ty, from)) = siblings.iter().find_map(|&s| self.operand_evidence(s)) {
                return Some(Matched {
                    case_id: 3,
                    ctype: ty,
                    bound_from: format!("condition operand {from}"),
                    array: false,
                });
            }
        }
        // Case 4
        if let Some(decl) = rvalue.and_then(|rv| self.declared(rv)).filter(|d| d.is_scalar()) {
            return Some(Matched {
                case_id: 4,
                ctype: decl.ctype.clone(),
                bound_from: format!("rvalue variable {}", decl.name),
                array: false,
            });
        }
        // Case 5
        if let Some((NodeKind::Assignment, "rvalue", assign)) = context.filter(|_| !siblings.is_empty()) {
            let lvalue = self.child_in(assign, "lvalue");
            let from_lvalue = lvalue.and_then(|lv| match self.node(lv).kind {
                NodeKind::ID => self.declared(lv).map(|d| (d.ctype.clone(), d.name.clone())),
                NodeKind::ArrayRef => self
                    .array_base(lv)
                    .map(|(d, _)| (d.ctype.clone(), format!("{}[]", d.name))),
                _ => None,
            });
            let evidence = from_lvalue
                .map(|(t, n)| (t, format!("assignment target {n}")))
                .or_else(|| {
                    siblings
                        .iter()
                        .find_map(|&s| self.operand_evidence(s))
                        .map(|(t, n)| (t, format!("operand {n}")))
                });
            if let Some((ty, from)) = evidence {
                return Some(Matched {
                    case_id: 5,
                    ctype: ty,
                    bound_from: from,
                    array: false,
                });
            }
        }
        // Case 6
        if let Some((p, "name")) = parent.filter(|(p, _)| self.node(*p).is(NodeKind::ArrayRef)) {
            if let Some((a, "lvalue")) = self.parent(p) {
                if self.node(a).is(NodeKind::Assignment) {
                    let rv = self.child_in(a, "rvalue");
                    if let Some(decl) = rv.and_then(|rv| self.declared(rv)).filter(|d| d.is_scalar()) {
                        return Some(Matched {
                            case_id: 6,
                            ctype: decl.ctype.clone(),
                            bound_from: format!("rvalue variable {}", decl.name),
                            array: true,
                        });
                    }
                }
            }
        }
        // Case 7
        if in_cond(&[NodeKind::For, NodeKind::While, NodeKind::DoWhile]) {
            if let Some((ty, from)) = siblings.iter().find_map(|&s| self.operand_evidence(s)) {
                return Some(Matched {
                    case_id: 7,
                    ctype: ty,
                    bound_from: format!("loop condition operand {from}"),
                    array: false,
                });
            }
        }
        // Case 8
        if in_cond(&[NodeKind::If, NodeKind::For, NodeKind::While, NodeKind::DoWhile]) {
            if let Some(call) = siblings.iter().find_map(|&s| self.first_call(s)) {
                let (ty, name) = self.return_type(call);
                if ty != "void" {
                    return Some(Matched {
                        case_id: 8,
                        ctype: ty,
                        bound_from: format!("function call {name}"),
                        array: false,
                    });
                }
            }
        }
        // Case 9
        if let Some(rv) = rvalue {
            let call = match self.node(rv).kind {
                NodeKind::FuncCall => Some(rv),
                NodeKind::BinaryOp => self.first_call(rv),
                _ => None,
            };
            if let Some(call) = call {
                let (ty, name) = self.return_type(call);
                if ty != "void" {
                    return Some(Matched {
                        case_id: 9,
                        ctype: ty,
                        bound_from: format!("function call {name}"),
                        array: false,
                    });
                }
            }
        }
        None
    }

    fn is_array_base(&self, u: usize) -> bool {
        matches!(self.parent(u), Some((p, "name")) if self.node(p).is(NodeKind::ArrayRef))
    }

    fn coord(&self, i: usize) -> Coord {
        self.node(i).coord.clone().unwrap_or_else(Coord::unknown)
    }

    pub fn infer(&self, u: &UndeclaredUse) -> TypeEvidence {
        let matches: Vec<(usize, Matched)> = u
            .sites
            .iter()
            .filter_map(|&s| self.match_use(s).map(|m| (s, m)))
            .collect();
        let chosen = if self.opts.best_evidence {
            let mut best: Option<(usize, usize)> = None;
            for (i, (_, m)) in matches.iter().enumerate() {
                let votes = matches.iter().filter(|(_, o)| o.ctype == m.ctype).count();
                if best.is_none_or(|(_, v)| votes > v) {
                    best = Some((i, votes));
                }
            }
            best.map(|(i, _)| i)
        } else if matches.is_empty() {
            None
        } else {
            Some(0)
        };
        let any_array_use = u.sites.iter().any(|&s| self.is_array_base(s));
        match chosen {
            Some(i) => {
                let (site, m) = &matches[i];
                TypeEvidence {
                    variable: u.name.clone(),
                    function: u.enclosing_function.clone(),
                    case_id: m.case_id,
                    site: self.coord(*site),
                    bound_from: m.bound_from.clone(),
                    inferred: CType::named(&m.ctype),
                    array_size: (m.array || any_array_use).then_some(self.opts.array_size),
                }
            }
            None => TypeEvidence {
                variable: u.name.clone(),
                function: u.enclosing_function.clone(),
                case_id: 0,
                site: u.first_use.clone(),
                bound_from: "no rule matched".into(),
                inferred: CType::named(&self.opts.fallback_type),
                array_size: any_array_use.then_some(self.opts.array_size),
            },
        }
    }

    fn inside_loop(&self, u: usize) -> bool {
        let mut cur = u;
        while let Some((p, _)) = self.parent(cur) {
            if matches!(
                self.node(p).kind,
                NodeKind::For | NodeKind::While | NodeKind::DoWhile
            ) {
                return true;
            }
            cur = p;
        }
        false
    }

    /// Diagnostics that accompany a repair but do not block it.
    pub fn warnings(&self, u: &UndeclaredUse, evidence: &TypeEvidence) -> Vec<Warning> {
        let mut out = Vec::new();
        if evidence.case_id == 0 {
            out.push(Warning {
                kind: WarningKind::Fallback,
                variable: u.name.clone(),
                site: u.first_use.clone(),
                message: format!(
                    "no binding rule applies to '{}'; declaring it as {}",
                    u.name, evidence.inferred
                ),
            });
        }
        if u.sites.len() == 1 {
            out.push(Warning {
                kind: WarningKind::SingleUse,
                variable: u.name.clone(),
                site: u.first_use.clone(),
                message: format!("'{}' is used only once; it may be a misspelling", u.name),
            });
            if self.inside_loop(u.sites[0]) {
                out.push(Warning {
                    kind: WarningKind::LoopRisk,
                    variable: u.name.clone(),
                    site: u.first_use.clone(),
                    message: format!(
                        "'{}' appears once inside a loop; declaring it may leave the loop without progress",
                        u.name
                    ),
                });
            }
        }
        out
    }
}

/// Evidence for one undeclared variable.
pub fn infer_type(
    root: &AstNode,
    scopes: &ScopeTree,
    u: &UndeclaredUse,
    opts: &BindOptions,
) -> TypeEvidence {
    Binder::new(root, scopes, opts.clone()).infer(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cparse::parse_source;
    use crate::scopes::{build_scopes, find_undeclared};

    fn bind_with(src: &str, opts: BindOptions) -> Vec<TypeEvidence> {
        let root = parse_source(src, "t.c").unwrap();
        let scopes = build_scopes(&root).unwrap();
        let uses = find_undeclared(&root, &scopes);
        let binder = Binder::new(&root, &scopes, opts);
        uses.iter().map(|u| binder.infer(u)).collect()
    }

    fn bind(src: &str) -> Vec<TypeEvidence> {
        bind_with(src, BindOptions::default())
    }

    fn summary(src: &str) -> (u8, String, Option<u64>) {
        let ev = bind(src);
        assert_eq!(ev.len(), 1, "{ev:?}");
        (ev[0].case_id, ev[0].inferred.name.clone(), ev[0].array_size)
    }

    #[test]
    fn rule_one_constants() {
        assert_eq!(summary("int main(){ u = 0; }"), (1, "int".into(), None));
        assert_eq!(summary("int main(){ u = 2.5; }"), (1, "double".into(), None));
        assert_eq!(summary("int main(){ u = 'c'; }"), (1, "char".into(), None));
        assert_eq!(summary("int main(){ u = -1; }"), (1, "int".into(), None));
    }

    #[test]
    fn rule_two_array_element() {
        assert_eq!(
            summary("int main(){ float n[10]; int i; u = n[i]; }"),
            (2, "float".into(), None)
        );
    }

    #[test]
    fn rule_three_if_condition() {
        assert_eq!(
            summary("int main(){ long m; if (u > m) return 1; }"),
            (3, "long".into(), None)
        );
    }

    #[test]
    fn rule_four_variable_copy() {
        assert_eq!(summary("int main(){ char c; u = c; }"), (4, "char".into(), None));
    }

    #[test]
    fn rule_five_prefers_assignment_target() {
        assert_eq!(
            summary("int main(){ double s; int k; s = s + u * k; }"),
            (5, "double".into(), None)
        );
        assert_eq!(
            summary("int main(){ float w[3]; int k; w[0] = u * k; }"),
            (5, "float".into(), None)
        );
    }

    #[test]
    fn rule_six_array_target() {
        assert_eq!(
            summary("int main(){ char c; int i; u[i] = c; }"),
            (6, "char".into(), Some(1000))
        );
        let opts = BindOptions {
            array_size: 64,
            ..BindOptions::default()
        };
        let ev = bind_with("int main(){ int c; int i; u[i] = c; }", opts);
        assert_eq!(ev[0].array_size, Some(64));
    }

    #[test]
    fn rule_seven_loop_condition() {
        assert_eq!(
            summary("int main(){ int key; double E; while (u * key + 1 < E) key++; }"),
            (7, "int".into(), None)
        );
    }

    #[test]
    fn rule_eight_call_in_condition() {
        assert_eq!(
            summary("int main(){ int j; for (j = 0; u >= sqrt(j) - 1; j++) ; }"),
            (8, "double".into(), None)
        );
        assert_eq!(
            summary("double g(int a){ return a; }\nint main(){ if (u < g(1)) return 0; }"),
            (8, "double".into(), None)
        );
    }

    #[test]
    fn rule_nine_call_on_right() {
        assert_eq!(
            summary("int main(){ int j; u = tower(j) - 1; }"),
            (9, "int".into(), None)
        );
        assert_eq!(summary("int main(){ u = fabs(2.0); }"), (9, "double".into(), None));
    }

    #[test]
    fn lone_printf_argument_falls_back() {
        let ev = bind("int main(){ printf(\"%d\", u); }");
        assert_eq!(ev[0].case_id, 0);
        assert_eq!(ev[0].inferred.name, "int");
        let opts = BindOptions {
            fallback_type: "long".into(),
            ..BindOptions::default()
        };
        assert_eq!(bind_with("int main(){ printf(\"%d\", u); }", opts)[0].inferred.name, "long");
    }

    #[test]
    fn earliest_use_wins_and_best_evidence_votes() {
        let src = "int main(){ double k; int n; for (l = 1; l <= n; l++) { p = l * k; q = l * k; } }";
        let ev = bind(src);
        let l = ev.iter().find(|e| e.variable == "l").unwrap();
        assert_eq!((l.case_id, l.inferred.name.as_str()), (1, "int"));
        let opts = BindOptions {
            best_evidence: true,
            ..BindOptions::default()
        };
        let ev = bind_with("int main(){ double k; u = 1; x = u * k; k = k + u; }", opts);
        let u = ev.iter().find(|e| e.variable == "u").unwrap();
        assert_eq!(u.inferred.name, "double");
    }

    #[test]
    fn single_use_in_loop_is_flagged() {
        let src = "int main(){ int j; int n; for (j = 0; j < n; J++) ; }";
        let root = parse_source(src, "t.c").unwrap();
        let scopes = build_scopes(&root).unwrap();
        let uses = find_undeclared(&root, &scopes);
        let binder = Binder::new(&root, &scopes, BindOptions::default());
        let ev = binder.infer(&uses[0]);
        let kinds: Vec<WarningKind> = binder.warnings(&uses[0], &ev).iter().map(|w| w.kind).collect();
        assert_eq!(
            kinds,
            [WarningKind::Fallback, WarningKind::SingleUse, WarningKind::LoopRisk]
        );
    }

    #[test]
    fn evidence_is_deterministic() {
        let src = "int main(){ double s; s = s + t * 2; t = 1; }";
        assert_eq!(bind(src), bind(src));
    }
}
