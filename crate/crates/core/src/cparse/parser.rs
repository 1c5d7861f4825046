//! Recursive-descent parser for the supported C subset.
//!
//! The tree shape follows the conventional C99 front-end layout: one `Decl`
//! per declarator, `TypeDecl`/`ArrayDecl`/`FuncDecl` chains for declarator
//! types, `ExprList` for comma expressions and call arguments.

use crate::ast::{AstNode, Coord, NodeKind};
use crate::cparse::lexer::{Token, TokenKind};
use crate::error::SyntaxError;

const TYPE_NAMES: &[&str] = &[
    "void", "char", "short", "int", "long", "float", "double", "signed", "unsigned", "_Bool",
];

const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%="];

/// Binary operator levels, loosest first.
const BINARY_LEVELS: &[&[&str]] = &[
    &["||"],
    &["&&"],
    &["==", "!="],
    &["<", ">", "<=", ">="],
    &["+", "-"],
    &["*", "/", "%"],
];

pub fn parse(tokens: &[Token]) -> Result<AstNode, SyntaxError> {
    Parser { tokens, pos: 0 }.translation_unit()
}

struct Specifiers {
    quals: Vec<String>,
    names: Vec<String>,
    coord: Coord,
}

enum Suffix {
    Array(Option<AstNode>, Coord),
    Function(Option<AstNode>, Coord),
}

struct Declarator {
    name: String,
    coord: Coord,
    suffixes: Vec<Suffix>,
}

impl Declarator {
    fn is_function(&self) -> bool {
        matches!(self.suffixes.first(), Some(Suffix::Function(..)))
    }
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

type PResult<T> = Result<T, SyntaxError>;

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, ahead: usize) -> Option<&'t Token> {
        self.tokens.get(self.pos + ahead)
    }

    fn advance(&mut self) -> Option<&'t Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> Coord {
        match self.peek().or_else(|| self.tokens.last()) {
            Some(t) => t.coord.clone(),
            None => Coord::new("<input>", 1, 1),
        }
    }

    fn fail<T>(&self, expected: &[&str]) -> PResult<T> {
        let found = match self.peek() {
            Some(t) => format!("'{}'", t.lexeme),
            None => "end of input".to_string(),
        };
        Err(SyntaxError {
            coord: self.here(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        })
    }

    fn at_symbol(&self, lexeme: &str) -> bool {
        self.peek().is_some_and(|t| {
            matches!(t.kind, TokenKind::Operator | TokenKind::Punctuation) && t.lexeme == lexeme
        })
    }

    fn at_keyword(&self, kw: &str) -> bool {
        self.peek().is_some_and(|t| t.is(TokenKind::Keyword, kw))
    }

    fn eat_symbol(&mut self, lexeme: &str) -> bool {
        if self.at_symbol(lexeme) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_symbol(&mut self, lexeme: &str) -> PResult<&'t Token> {
        if self.at_symbol(lexeme) {
            Ok(self.advance().expect("peeked"))
        } else {
            self.fail(&[&format!("'{lexeme}'")])
        }
    }

    fn expect_identifier(&mut self) -> PResult<&'t Token> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => {
                self.pos += 1;
                Ok(t)
            }
            _ => self.fail(&["identifier"]),
        }
    }

    fn starts_declaration(&self) -> bool {
        self.peek().is_some_and(|t| {
            t.kind == TokenKind::Keyword
                && (t.lexeme == "const" || TYPE_NAMES.contains(&t.lexeme.as_str()))
        })
    }

    fn translation_unit(&mut self) -> PResult<AstNode> {
        let mut preamble = Vec::new();
        let mut ext = Vec::new();
        while let Some(tok) = self.peek() {
            if tok.kind == TokenKind::Directive {
                preamble.push(tok.lexeme.clone());
                self.pos += 1;
                continue;
            }
            let specs = self.specifiers()?;
            let first = self.declarator()?;
            if first.is_function() && self.at_symbol("{") {
                ext.push(self.function_definition(specs, first)?);
            } else {
                ext.extend(self.declaration_rest(&specs, first)?);
            }
        }
        Ok(AstNode::new(NodeKind::FileAST)
            .with_list("preamble", preamble)
            .with_children("ext", ext))
    }

    fn specifiers(&mut self) -> PResult<Specifiers> {
        let coord = self.here();
        let mut quals = Vec::new();
        let mut names = Vec::new();
        while let Some(t) = self.peek() {
            if t.kind != TokenKind::Keyword {
                break;
            }
            if t.lexeme == "const" {
                if !quals.contains(&t.lexeme) {
                    quals.push(t.lexeme.clone());
                }
            } else if TYPE_NAMES.contains(&t.lexeme.as_str()) {
                names.push(t.lexeme.clone());
            } else {
                break;
            }
            self.pos += 1;
        }
        if names.is_empty() {
            return self.fail(&["type specifier"]);
        }
        Ok(Specifiers {
            quals,
            names,
            coord,
        })
    }

    fn declarator(&mut self) -> PResult<Declarator> {
        let ident = self.expect_identifier()?;
        let mut suffixes = Vec::new();
        if self.at_symbol("(") {
            let open = self.advance().expect("peeked").coord.clone();
            let params = self.parameters()?;
            self.expect_symbol(")")?;
            suffixes.push(Suffix::Function(params, open));
        }
        while self.at_symbol("[") {
            let open = self.advance().expect("peeked").coord.clone();
            let dim = if self.at_symbol("]") {
                None
            } else {
                Some(self.assignment_expr()?)
            };
            self.expect_symbol("]")?;
            suffixes.push(Suffix::Array(dim, open));
        }
        Ok(Declarator {
            name: ident.lexeme.clone(),
            coord: ident.coord.clone(),
            suffixes,
        })
    }

    fn parameters(&mut self) -> PResult<Option<AstNode>> {
        if self.at_symbol(")") {
            return Ok(None);
        }
        let coord = self.here();
        if self.at_keyword("void") && self.peek_at(1).is_some_and(|t| t.lexeme == ")") {
            let tok = self.advance().expect("peeked");
            let names = AstNode::new(NodeKind::IdentifierType)
                .with_list("names", vec!["void".into()])
                .at(Some(tok.coord.clone()));
            let tdecl = AstNode::new(NodeKind::TypeDecl)
                .with_child("type", names)
                .at(Some(tok.coord.clone()));
            let typename = AstNode::new(NodeKind::Typename)
                .with_child("type", tdecl)
                .at(Some(tok.coord.clone()));
            return Ok(Some(
                AstNode::new(NodeKind::ParamList)
                    .with_children("params", vec![typename])
                    .at(Some(coord)),
            ));
        }
        let mut params = Vec::new();
        loop {
            let specs = self.specifiers()?;
            let decl = self.declarator()?;
            if decl.is_function() {
                return self.fail(&["parameter declarator"]);
            }
            params.push(self.build_decl(&specs, decl, None));
            if !self.eat_symbol(",") {
                break;
            }
        }
        Ok(Some(
            AstNode::new(NodeKind::ParamList)
                .with_children("params", params)
                .at(Some(coord)),
        ))
    }

    fn build_type(&self, specs: &Specifiers, decl: Declarator) -> AstNode {
        let names = AstNode::new(NodeKind::IdentifierType)
            .with_list("names", specs.names.clone())
            .at(Some(specs.coord.clone()));
        let mut ty = AstNode::new(NodeKind::TypeDecl)
            .with_str("declname", decl.name.clone())
            .with_list("quals", specs.quals.clone())
            .with_child("type", names)
            .at(Some(decl.coord.clone()));
        for suffix in decl.suffixes.into_iter().rev() {
            ty = match suffix {
                Suffix::Array(dim, coord) => AstNode::new(NodeKind::ArrayDecl)
                    .with_child("type", ty)
                    .with_opt_child("dim", dim)
                    .at(Some(coord)),
                Suffix::Function(args, coord) => AstNode::new(NodeKind::FuncDecl)
                    .with_opt_child("args", args)
                    .with_child("type", ty)
                    .at(Some(coord)),
            };
        }
        ty
    }

    fn build_decl(&self, specs: &Specifiers, decl: Declarator, init: Option<AstNode>) -> AstNode {
        let name = decl.name.clone();
        let coord = decl.coord.clone();
        AstNode::new(NodeKind::Decl)
            .with_str("name", name)
            .with_list("quals", specs.quals.clone())
            .with_child("type", self.build_type(specs, decl))
            .with_opt_child("init", init)
            .at(Some(coord))
    }

    fn function_definition(&mut self, specs: Specifiers, decl: Declarator) -> PResult<AstNode> {
        let coord = decl.coord.clone();
        let decl = self.build_decl(&specs, decl, None);
        let body = self.compound()?;
        Ok(AstNode::new(NodeKind::FuncDef)
            .with_child("decl", decl)
            .with_child("body", body)
            .at(Some(coord)))
    }

    /// Remaining declarators after the first, through the closing `;`.
    fn declaration_rest(&mut self, specs: &Specifiers, first: Declarator) -> PResult<Vec<AstNode>> {
        let mut decls = Vec::new();
        let mut current = first;
        loop {
            let init = if !current.is_function() && self.eat_symbol("=") {
                Some(self.initializer()?)
            } else {
                None
            };
            decls.push(self.build_decl(specs, current, init));
            if self.eat_symbol(",") {
                current = self.declarator()?;
            } else {
                break;
            }
        }
        self.expect_symbol(";")?;
        Ok(decls)
    }

    fn declaration(&mut self) -> PResult<Vec<AstNode>> {
        let specs = self.specifiers()?;
        let first = self.declarator()?;
        self.declaration_rest(&specs, first)
    }

    fn initializer(&mut self) -> PResult<AstNode> {
        if self.at_symbol("{") {
            let coord = self.advance().expect("peeked").coord.clone();
            let mut exprs = Vec::new();
            while !self.at_symbol("}") {
                exprs.push(self.assignment_expr()?);
                if !self.eat_symbol(",") {
                    break;
                }
            }
            self.expect_symbol("}")?;
            return Ok(AstNode::new(NodeKind::InitList)
                .with_children("exprs", exprs)
                .at(Some(coord)));
        }
        self.assignment_expr()
    }

    fn compound(&mut self) -> PResult<AstNode> {
        let coord = self.expect_symbol("{")?.coord.clone();
        let mut items = Vec::new();
        while !self.at_symbol("}") {
            if self.peek().is_none() {
                return self.fail(&["'}'"]);
            }
            if self.starts_declaration() {
                items.extend(self.declaration()?);
            } else {
                items.push(self.statement()?);
            }
        }
        self.expect_symbol("}")?;
        Ok(AstNode::new(NodeKind::Compound)
            .with_children("block_items", items)
            .at(Some(coord)))
    }

    fn statement(&mut self) -> PResult<AstNode> {
        let Some(tok) = self.peek() else {
            return self.fail(&["statement"]);
        };
        let coord = Some(tok.coord.clone());
        if tok.kind == TokenKind::Keyword {
            match tok.lexeme.as_str() {
                "if" => {
                    self.pos += 1;
                    self.expect_symbol("(")?;
                    let cond = self.expression()?;
                    self.expect_symbol(")")?;
                    let iftrue = self.statement()?;
                    let iffalse = if self.at_keyword("else") {
                        self.pos += 1;
                        Some(self.statement()?)
                    } else {
                        None
                    };
                    return Ok(AstNode::new(NodeKind::If)
                        .with_child("cond", cond)
                        .with_child("iftrue", iftrue)
                        .with_opt_child("iffalse", iffalse)
                        .at(coord));
                }
                "for" => {
                    self.pos += 1;
                    self.expect_symbol("(")?;
                    let init = if self.starts_declaration() {
                        let decls = self.declaration()?;
                        let first = decls[0].coord.clone();
                        Some(
                            AstNode::new(NodeKind::DeclList)
                                .with_children("decls", decls)
                                .at(first),
                        )
                    } else {
                        let e = self.optional_expression(";")?;
                        self.expect_symbol(";")?;
                        e
                    };
                    let cond = self.optional_expression(";")?;
                    self.expect_symbol(";")?;
                    let next = self.optional_expression(")")?;
                    self.expect_symbol(")")?;
                    let stmt = self.statement()?;
                    return Ok(AstNode::new(NodeKind::For)
                        .with_opt_child("init", init)
                        .with_opt_child("cond", cond)
                        .with_opt_child("next", next)
                        .with_child("stmt", stmt)
                        .at(coord));
                }
                "while" => {
                    self.pos += 1;
                    self.expect_symbol("(")?;
                    let cond = self.expression()?;
                    self.expect_symbol(")")?;
                    let stmt = self.statement()?;
                    return Ok(AstNode::new(NodeKind::While)
                        .with_child("cond", cond)
                        .with_child("stmt", stmt)
                        .at(coord));
                }
                "return" => {
                    self.pos += 1;
                    let expr = self.optional_expression(";")?;
                    self.expect_symbol(";")?;
                    return Ok(AstNode::new(NodeKind::Return)
                        .with_opt_child("expr", expr)
                        .at(coord));
                }
                "break" => {
                    self.pos += 1;
                    self.expect_symbol(";")?;
                    return Ok(AstNode::new(NodeKind::Break).at(coord));
                }
                "continue" => {
                    self.pos += 1;
                    self.expect_symbol(";")?;
                    return Ok(AstNode::new(NodeKind::Continue).at(coord));
                }
                _ => {}
            }
        }
        if self.at_symbol("{") {
            return self.compound();
        }
        if self.eat_symbol(";") {
            return Ok(AstNode::new(NodeKind::EmptyStatement).at(coord));
        }
        let expr = self.expression()?;
        self.expect_symbol(";")?;
        Ok(expr)
    }

    fn optional_expression(&mut self, terminator: &str) -> PResult<Option<AstNode>> {
        if self.at_symbol(terminator) {
            Ok(None)
        } else {
            self.expression().map(Some)
        }
    }

    /// Comma expression.
    fn expression(&mut self) -> PResult<AstNode> {
        let first = self.assignment_expr()?;
        if !self.at_symbol(",") {
            return Ok(first);
        }
        let coord = first.coord.clone();
        let mut exprs = vec![first];
        while self.eat_symbol(",") {
            exprs.push(self.assignment_expr()?);
        }
        Ok(AstNode::new(NodeKind::ExprList)
            .with_children("exprs", exprs)
            .at(coord))
    }

    fn assignment_expr(&mut self) -> PResult<AstNode> {
        let lhs = self.binary(0)?;
        let op = match self.peek() {
            Some(t) if t.kind == TokenKind::Operator && ASSIGN_OPS.contains(&t.lexeme.as_str()) => {
                t.lexeme.clone()
            }
            _ => return Ok(lhs),
        };
        if !matches!(lhs.kind, NodeKind::ID | NodeKind::ArrayRef) {
            return self.fail(&["assignable expression before assignment operator"]);
        }
        self.pos += 1;
        let rhs = self.assignment_expr()?;
        let coord = lhs.coord.clone();
        Ok(AstNode::new(NodeKind::Assignment)
            .with_str("op", op)
            .with_child("lvalue", lhs)
            .with_child("rvalue", rhs)
            .at(coord))
    }

    fn binary(&mut self, level: usize) -> PResult<AstNode> {
        if level == BINARY_LEVELS.len() {
            return self.unary();
        }
        let mut left = self.binary(level + 1)?;
        loop {
            let op = match self.peek() {
                Some(t)
                    if t.kind == TokenKind::Operator
                        && BINARY_LEVELS[level].contains(&t.lexeme.as_str()) =>
                {
                    t.lexeme.clone()
                }
                _ => break,
            };
            self.pos += 1;
            let right = self.binary(level + 1)?;
            let coord = left.coord.clone();
            left = AstNode::new(NodeKind::BinaryOp)
                .with_str("op", op)
                .with_child("left", left)
                .with_child("right", right)
                .at(coord);
        }
        Ok(left)
    }

    fn unary(&mut self) -> PResult<AstNode> {
        if let Some(t) = self.peek() {
            if t.kind == TokenKind::Operator && matches!(t.lexeme.as_str(), "++" | "--" | "-" | "!" | "&") {
                self.pos += 1;
                let operand = self.unary()?;
                return Ok(AstNode::new(NodeKind::UnaryOp)
                    .with_str("op", t.lexeme.clone())
                    .with_child("expr", operand)
                    .at(Some(t.coord.clone())));
            }
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<AstNode> {
        let mut expr = self.primary()?;
        loop {
            let coord = expr.coord.clone();
            if self.eat_symbol("[") {
                let subscript = self.expression()?;
                self.expect_symbol("]")?;
                expr = AstNode::new(NodeKind::ArrayRef)
                    .with_child("name", expr)
                    .with_child("subscript", subscript)
                    .at(coord);
            } else if self.at_symbol("(") {
                let open = self.advance().expect("peeked").coord.clone();
                let args = if self.at_symbol(")") {
                    None
                } else {
                    let mut exprs = vec![self.assignment_expr()?];
                    while self.eat_symbol(",") {
                        exprs.push(self.assignment_expr()?);
                    }
                    let first = exprs[0].coord.clone().or(Some(open));
                    Some(
                        AstNode::new(NodeKind::ExprList)
                            .with_children("exprs", exprs)
                            .at(first),
                    )
                };
                self.expect_symbol(")")?;
                expr = AstNode::new(NodeKind::FuncCall)
                    .with_child("name", expr)
                    .with_opt_child("args", args)
                    .at(coord);
            } else if self.at_symbol("++") || self.at_symbol("--") {
                let op = format!("p{}", self.advance().expect("peeked").lexeme);
                expr = AstNode::new(NodeKind::UnaryOp)
                    .with_str("op", op)
                    .with_child("expr", expr)
                    .at(coord);
            } else {
                break;
            }
        }
        Ok(expr)
    }

    fn primary(&mut self) -> PResult<AstNode> {
        let Some(tok) = self.peek() else {
            return self.fail(&["expression"]);
        };
        let coord = Some(tok.coord.clone());
        match tok.kind {
            TokenKind::Identifier => {
                self.pos += 1;
                Ok(AstNode::new(NodeKind::ID)
                    .with_str("name", tok.lexeme.clone())
                    .at(coord))
            }
            TokenKind::IntConst | TokenKind::FloatConst | TokenKind::CharConst => {
                self.pos += 1;
                Ok(AstNode::new(NodeKind::Constant)
                    .with_str("type", constant_type(tok))
                    .with_str("value", tok.lexeme.clone())
                    .at(coord))
            }
            TokenKind::StringLiteral => {
                self.pos += 1;
                let mut value = tok.lexeme.clone();
                while let Some(next) = self.peek().filter(|t| t.kind == TokenKind::StringLiteral) {
                    value.pop();
                    value.push_str(&next.lexeme[1..]);
                    self.pos += 1;
                }
                Ok(AstNode::new(NodeKind::Constant)
                    .with_str("type", "string")
                    .with_str("value", value)
                    .at(coord))
            }
            TokenKind::Punctuation if tok.lexeme == "(" => {
                self.pos += 1;
                let inner = self.expression()?;
                self.expect_symbol(")")?;
                Ok(inner)
            }
            _ => self.fail(&["expression"]),
        }
    }
}

/// C type of a literal token.
fn constant_type(tok: &Token) -> String {
    let lower = tok.lexeme.to_ascii_lowercase();
    match tok.kind {
        TokenKind::CharConst => "char".into(),
        TokenKind::FloatConst => {
            let is_hex = lower.starts_with("0x");
            if !is_hex && lower.ends_with('f') {
                "float".into()
            } else if lower.ends_with('l') {
                "long double".into()
            } else {
                "double".into()
            }
        }
        _ => {
            let suffix: String = lower
                .chars()
                .rev()
                .take_while(|c| matches!(c, 'u' | 'l'))
                .collect();
            let longs = suffix.matches('l').count();
            let base = match longs {
                0 => "int",
                1 => "long",
                _ => "long long",
            };
            if suffix.contains('u') {
                format!("unsigned {base}")
            } else {
                base.into()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::preorder;
    use crate::cparse::parse_source;

    fn kinds(src: &str) -> Vec<NodeKind> {
        let root = parse_source(src, "t.c").unwrap();
        preorder(&root).iter().map(|n| n.kind).collect()
    }

    #[test]
    fn minimal_program() {
        use NodeKind::*;
        assert_eq!(
            kinds("int main(){return 0;}"),
            [FileAST, FuncDef, Decl, FuncDecl, TypeDecl, IdentifierType, Compound, Return, Constant]
        );
    }

    #[test]
    fn local_declaration_is_the_decl_chain() {
        let root = parse_source("int main(){ int j; }", "t.c").unwrap();
        let body = root.list("ext")[0].child("body").unwrap();
        let decl = &body.list("block_items")[0];
        assert_eq!(decl.kind, NodeKind::Decl);
        assert_eq!(decl.str_attr("name"), Some("j"));
        let tdecl = decl.child("type").unwrap();
        assert_eq!(tdecl.kind, NodeKind::TypeDecl);
        let ity = tdecl.child("type").unwrap();
        assert_eq!(ity.kind, NodeKind::IdentifierType);
        assert_eq!(ity.list_attr("names"), ["int"]);
    }

    #[test]
    fn multi_declarators_become_separate_decls() {
        let root = parse_source("int main(){ int k,n,x,a[100]; }", "t.c").unwrap();
        let body = root.list("ext")[0].child("body").unwrap();
        let names: Vec<&str> = body
            .list("block_items")
            .iter()
            .map(|d| d.str_attr("name").unwrap())
            .collect();
        assert_eq!(names, ["k", "n", "x", "a"]);
        let arr = body.list("block_items")[3].child("type").unwrap();
        assert_eq!(arr.kind, NodeKind::ArrayDecl);
        assert_eq!(arr.child("dim").unwrap().str_attr("value"), Some("100"));
    }

    #[test]
    fn precedence_and_associativity() {
        let root = parse_source("int main(){ x = a + b * c - d; }", "t.c").unwrap();
        let body = root.list("ext")[0].child("body").unwrap();
        let assign = &body.list("block_items")[0];
        let rv = assign.child("rvalue").unwrap();
        assert_eq!(rv.str_attr("op"), Some("-"));
        let left = rv.child("left").unwrap();
        assert_eq!(left.str_attr("op"), Some("+"));
        assert_eq!(left.child("right").unwrap().str_attr("op"), Some("*"));
    }

    #[test]
    fn comma_expressions_in_for_header() {
        let root = parse_source("int main(){ for(j=1,z=i;j<=i;j++,k--) ; }", "t.c").unwrap();
        let body = root.list("ext")[0].child("body").unwrap();
        let f = &body.list("block_items")[0];
        assert_eq!(f.child("init").unwrap().kind, NodeKind::ExprList);
        assert_eq!(f.child("next").unwrap().list("exprs").len(), 2);
        assert_eq!(f.child("next").unwrap().list("exprs")[0].str_attr("op"), Some("p++"));
    }

    #[test]
    fn c99_for_declaration() {
        let root = parse_source("int main(){ for(int i=0;i<3;i++) {} }", "t.c").unwrap();
        let body = root.list("ext")[0].child("body").unwrap();
        let init = body.list("block_items")[0].child("init").unwrap();
        assert_eq!(init.kind, NodeKind::DeclList);
    }

    #[test]
    fn constants_are_typed() {
        let root = parse_source("int main(){ a = 1; b = 2.5; c = 'x'; d = 3.0f; e = 4L; }", "t.c").unwrap();
        let body = root.list("ext")[0].child("body").unwrap();
        let types: Vec<&str> = body
            .list("block_items")
            .iter()
            .map(|s| s.child("rvalue").unwrap().str_attr("type").unwrap())
            .collect();
        assert_eq!(types, ["int", "double", "char", "float", "long"]);
    }

    #[test]
    fn void_parameter_list() {
        let root = parse_source("int main(void){ return 0; }", "t.c").unwrap();
        let fdecl = root.list("ext")[0].child("decl").unwrap().child("type").unwrap();
        let params = fdecl.child("args").unwrap().list("params");
        assert_eq!(params[0].kind, NodeKind::Typename);
    }

    #[test]
    fn syntax_errors_carry_coord_and_expectation() {
        let err = parse_source("int main(){ x = ; }", "t.c").unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("t.c:1:17: error:"), "{msg}");
        assert!(parse_source("int main(){ 3 = x; }", "t.c").is_err());
        assert!(parse_source("int main(){ return 0; ", "t.c").is_err());
        assert!(parse_source("main(){}", "t.c").is_err());
    }

    #[test]
    fn undeclared_identifiers_parse_as_ids() {
        let root = parse_source("int main(){ s = 0; }", "t.c").unwrap();
        let ids: Vec<&AstNode> = preorder(&root).into_iter().filter(|n| n.is(NodeKind::ID)).collect();
        assert_eq!(ids.len(), 1);
        assert_eq!(ids[0].coord, Some(Coord::new("t.c", 1, 13)));
    }
}
