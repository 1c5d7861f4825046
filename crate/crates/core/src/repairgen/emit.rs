//! C source generation in a normalized layout: one declarator per
//! declaration, 4-space indentation, braces on their own lines and every
//! nested binary expression parenthesized.

use crate::ast::{AstNode, NodeKind};

const INDENT: &str = "    ";

pub fn emit(root: &AstNode) -> String {
    let mut out = String::new();
    match root.kind {
        NodeKind::FileAST => {
            for line in root.list_attr("preamble") {
                out.push_str(line);
                out.push('\n');
            }
            for (i, item) in root.list("ext").iter().enumerate() {
                if i > 0 || !root.list_attr("preamble").is_empty() {
                    out.push('\n');
                }
                external(item, &mut out);
            }
        }
        _ => statement(root, 0, &mut out),
    }
    out
}

fn external(node: &AstNode, out: &mut String) {
    match node.kind {
        NodeKind::FuncDef => {
            if let Some(decl) = node.child("decl") {
                out.push_str(&declaration(decl, true));
            }
            out.push('\n');
            match node.child("body") {
                Some(body) => compound(body, 0, out),
                None => out.push_str("{\n}\n"),
            }
        }
        _ => statement(node, 0, out),
    }
}

fn pad(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str(INDENT);
    }
}

fn compound(node: &AstNode, level: usize, out: &mut String) {
    pad(level, out);
    out.push_str("{\n");
    for item in node.list("block_items") {
        statement(item, level + 1, out);
    }
    pad(level, out);
    out.push_str("}\n");
}

/// A statement that is the body of a control construct.
fn body(node: &AstNode, level: usize, out: &mut String) {
    if node.is(NodeKind::Compound) {
        compound(node, level, out);
    } else {
        statement(node, level + 1, out);
    }
}

fn statement(node: &AstNode, level: usize, out: &mut String) {
    match node.kind {
        NodeKind::Compound => compound(node, level, out),
        NodeKind::Decl => {
            pad(level, out);
            out.push_str(&declaration(node, true));
            out.push_str(";\n");
        }
        NodeKind::DeclList => {
            pad(level, out);
            out.push_str(&decl_list(node));
            out.push_str(";\n");
        }
        NodeKind::If => {
            pad(level, out);
            if_chain(node, level, out);
        }
        NodeKind::For => {
            pad(level, out);
            let init = node.child("init").map(|i| {
                if i.is(NodeKind::DeclList) {
                    decl_list(i)
                } else {
                    expr(i)
                }
            });
            let cond = node.child("cond").map(|c| format!(" {}", expr(c)));
            let next = node.child("next").map(|n| format!(" {}", expr(n)));
            out.push_str(&format!(
                "for ({};{};{})\n",
                init.unwrap_or_default(),
                cond.unwrap_or_default(),
                next.unwrap_or_default()
            ));
            if let Some(stmt) = node.child("stmt") {
                body(stmt, level, out);
            }
        }
        NodeKind::While => {
            pad(level, out);
            out.push_str(&format!("while ({})\n", opt_expr(node.child("cond"))));
            if let Some(stmt) = node.child("stmt") {
                body(stmt, level, out);
            }
        }
        NodeKind::DoWhile => {
            pad(level, out);
            out.push_str("do\n");
            if let Some(stmt) = node.child("stmt") {
                body(stmt, level, out);
            }
            pad(level, out);
            out.push_str(&format!("while ({});\n", opt_expr(node.child("cond"))));
        }
        NodeKind::Return => {
            pad(level, out);
            match node.child("expr") {
                Some(e) => out.push_str(&format!("return {};\n", expr(e))),
                None => out.push_str("return;\n"),
            }
        }
        NodeKind::Break => {
            pad(level, out);
            out.push_str("break;\n");
        }
        NodeKind::Continue => {
            pad(level, out);
            out.push_str("continue;\n");
        }
        NodeKind::EmptyStatement => {
            pad(level, out);
            out.push_str(";\n");
        }
        _ => {
            pad(level, out);
            out.push_str(&expr(node));
            out.push_str(";\n");
        }
    }
}

fn if_chain(node: &AstNode, level: usize, out: &mut String) {
    out.push_str(&format!("if ({})\n", opt_expr(node.child("cond"))));
    if let Some(t) = node.child("iftrue") {
        body(t, level, out);
    }
    if let Some(f) = node.child("iffalse") {
        pad(level, out);
        if f.is(NodeKind::If) {
            out.push_str("else ");
            if_chain(f, level, out);
        } else {
            out.push_str("else\n");
            body(f, level, out);
        }
    }
}

fn opt_expr(node: Option<&AstNode>) -> String {
    node.map(expr).unwrap_or_default()
}

/// Specifier words of a declarator chain: qualifiers then type names.
fn specifiers(decl: &AstNode) -> String {
    let mut ty = decl.child("type");
    while let Some(t) = ty {
        if t.is(NodeKind::TypeDecl) {
            let mut words: Vec<String> = decl.list_attr("quals").to_vec();
            if let Some(names) = t.child("type") {
                words.extend(names.list_attr("names").iter().cloned());
            }
            return words.join(" ");
        }
        ty = t.child("type");
    }
    String::new()
}

/// Declarator text: the name followed by array and parameter suffixes.
fn declarator(decl: &AstNode) -> String {
    let mut text = decl.str_attr("name").unwrap_or_default().to_string();
    let mut ty = decl.child("type");
    while let Some(t) = ty {
        match t.kind {
            NodeKind::ArrayDecl => {
                text.push('[');
                text.push_str(&opt_expr(t.child("dim")));
                text.push(']');
            }
            NodeKind::FuncDecl => {
                text.push('(');
                if let Some(args) = t.child("args") {
                    let params: Vec<String> = args.list("params").iter().map(parameter).collect();
                    text.push_str(&params.join(", "));
                }
                text.push(')');
            }
            _ => break,
        }
        ty = t.child("type");
    }
    text
}

fn parameter(node: &AstNode) -> String {
    match node.kind {
        NodeKind::Decl => declaration(node, true),
        NodeKind::Typename => specifiers(node),
        NodeKind::EllipsisParam => "...".into(),
        _ => expr(node),
    }
}

fn declaration(decl: &AstNode, with_specifiers: bool) -> String {
    let mut text = String::new();
    if with_specifiers {
        text.push_str(&specifiers(decl));
        text.push(' ');
    }
    text.push_str(&declarator(decl));
    if let Some(init) = decl.child("init") {
        text.push_str(" = ");
        text.push_str(&expr(init));
    }
    text
}

fn decl_list(node: &AstNode) -> String {
    node.list("decls")
        .iter()
        .enumerate()
        .map(|(i, d)| declaration(d, i == 0))
        .collect::<Vec<_>>()
        .join(", ")
}

fn wrap_if(node: &AstNode, kinds: &[NodeKind]) -> String {
    let text = expr(node);
    if kinds.contains(&node.kind) {
        format!("({text})")
    } else {
        text
    }
}

fn is_prefix(node: &AstNode) -> bool {
    node.is(NodeKind::UnaryOp) && !node.str_attr("op").is_some_and(|op| op.starts_with('p'))
}

fn simple_operand(node: &AstNode) -> String {
    let text = expr(node);
    match node.kind {
        NodeKind::ID | NodeKind::ArrayRef | NodeKind::FuncCall | NodeKind::Constant => text,
        _ => format!("({text})"),
    }
}

pub(crate) fn expr(node: &AstNode) -> String {
    use NodeKind::*;
    match node.kind {
        ID => node.str_attr("name").unwrap_or_default().into(),
        Constant => node.str_attr("value").unwrap_or_default().into(),
        BinaryOp => {
            let nested = [BinaryOp, Assignment, ExprList, TernaryOp];
            format!(
                "{} {} {}",
                node.child("left").map(|l| wrap_if(l, &nested)).unwrap_or_default(),
                node.str_attr("op").unwrap_or_default(),
                node.child("right").map(|r| wrap_if(r, &nested)).unwrap_or_default()
            )
        }
        Assignment => format!(
            "{} {} {}",
            node.child("lvalue").map(simple_operand).unwrap_or_default(),
            node.str_attr("op").unwrap_or_default(),
            node.child("rvalue").map(|r| wrap_if(r, &[ExprList])).unwrap_or_default()
        ),
        UnaryOp => {
            let op = node.str_attr("op").unwrap_or_default();
            let Some(operand) = node.child("expr") else {
                return op.into();
            };
            if let Some(post) = op.strip_prefix('p') {
                format!("{}{post}", simple_operand(operand))
            } else {
                let text = expr(operand);
                let wrap = matches!(operand.kind, BinaryOp | Assignment | ExprList | TernaryOp)
                    || is_prefix(operand);
                if wrap {
                    format!("{op}({text})")
                } else {
                    format!("{op}{text}")
                }
            }
        }
        ArrayRef => {
            let base = node.child("name").map(|b| match b.kind {
                ID | ArrayRef | FuncCall => expr(b),
                _ => format!("({})", expr(b)),
            });
            format!(
                "{}[{}]",
                base.unwrap_or_default(),
                opt_expr(node.child("subscript"))
            )
        }
        FuncCall => {
            let name = node.child("name").map(simple_operand).unwrap_or_default();
            let args = node
                .child("args")
                .map(|a| {
                    a.list("exprs")
                        .iter()
                        .map(|e| wrap_if(e, &[ExprList]))
                        .collect::<Vec<_>>()
                        .join(", ")
                })
                .unwrap_or_default();
            format!("{name}({args})")
        }
        ExprList => node
            .list("exprs")
            .iter()
            .map(|e| wrap_if(e, &[ExprList]))
            .collect::<Vec<_>>()
            .join(", "),
        InitList => format!(
            "{{{}}}",
            node.list("exprs")
                .iter()
                .map(|e| wrap_if(e, &[ExprList]))
                .collect::<Vec<_>>()
                .join(", ")
        ),
        TernaryOp => format!(
            "{} ? {} : {}",
            node.child("cond").map(|c| wrap_if(c, &[Assignment, ExprList, TernaryOp])).unwrap_or_default(),
            node.child("iftrue").map(|c| wrap_if(c, &[ExprList])).unwrap_or_default(),
            node.child("iffalse").map(|c| wrap_if(c, &[Assignment, ExprList])).unwrap_or_default()
        ),
        Typename => specifiers(node),
        other => format!("/* {other} */"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cparse::parse_source;

    fn round(src: &str) -> String {
        emit(&parse_source(src, "t.c").unwrap())
    }

    #[test]
    fn splits_declarators_and_indents() {
        let text = round("int main(){int k,n,a[100];for(i=0;i<n;i++) scanf(\"%d\",&a[i]);return 0;}");
        assert_eq!(
            text,
            "int main()\n{\n    int k;\n    int n;\n    int a[100];\n    for (i = 0; i < n; i++)\n        scanf(\"%d\", &a[i]);\n    return 0;\n}\n"
        );
    }

    #[test]
    fn nested_binary_operands_are_parenthesized() {
        let text = round("int main(){ s = s + t * d; while (k < n && d * k + 1 < E) k++; }");
        assert!(text.contains("s = s + (t * d);"), "{text}");
        assert!(text.contains("while ((k < n) && (((d * k) + 1) < E))"), "{text}");
    }

    #[test]
    fn unary_and_postfix_forms() {
        let text = round("int main(){ x = -(a + b); y = - -a; z = !f(a); a[i]++; --b; }");
        assert!(text.contains("x = -(a + b);"), "{text}");
        assert!(text.contains("y = -(-a);"), "{text}");
        assert!(text.contains("z = !f(a);"), "{text}");
        assert!(text.contains("a[i]++;"), "{text}");
        assert!(text.contains("--b;"), "{text}");
    }

    #[test]
    fn preamble_comes_first() {
        let text = round("#include <stdio.h>\nint main(){return 0;}");
        assert!(text.starts_with("#include <stdio.h>\n\nint main()\n"));
    }

    #[test]
    fn else_if_chains_and_for_declarations() {
        let src = "int main(void){ if (a) b = 1; else if (c) { b = 2; } else b = 3; for (int i = 0, j = 1; ; ) break; }";
        let text = round(src);
        assert!(text.contains("int main(void)\n"), "{text}");
        assert!(text.contains("    else if (c)\n"), "{text}");
        assert!(text.contains("for (int i = 0, j = 1;;)"), "{text}");
        let again = parse_source(&text, "t.c").unwrap().without_coords();
        assert_eq!(again, parse_source(src, "t.c").unwrap().without_coords());
    }

    #[test]
    fn emission_is_idempotent() {
        let src = "double f(double a[], int n){ int i; double s = 0; for(i=0;i<n;i++) s += a[i]*a[i]; return s; }";
        let once = round(src);
        assert_eq!(round(&once), once);
    }
}
