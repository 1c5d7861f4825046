//! Block-structured symbol tables and the deterministic undeclared-use oracle.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::{locate, AstNode, Coord, Located, NodeKind};
use crate::error::ScopeError;

pub type ScopeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScopeKind {
    File,
    Function,
    Block,
    /// Parameters of a function prototype that has no body.
    Prototype,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shape {
    Scalar,
    Array { size: Option<u64> },
    Function { ret: String },
    Parameter { array: bool },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeclInfo {
    pub name: String,
    /// Type specifier words joined by single spaces, e.g. `unsigned int`.
    pub ctype: String,
    pub quals: Vec<String>,
    pub shape: Shape,
    pub coord: Option<Coord>,
    /// Preorder index of the declaring node; a binding is visible to nodes
    /// with a larger index.
    pub order: usize,
}

impl DeclInfo {
    pub fn is_array(&self) -> bool {
        matches!(
            self.shape,
            Shape::Array { .. } | Shape::Parameter { array: true }
        )
    }

    pub fn is_function(&self) -> bool {
        matches!(self.shape, Shape::Function { .. })
    }

    pub fn is_scalar(&self) -> bool {
        matches!(
            self.shape,
            Shape::Scalar | Shape::Parameter { array: false }
        )
    }
}

#[derive(Debug, Clone)]
pub struct Scope {
    pub parent: Option<ScopeId>,
    pub kind: ScopeKind,
    /// Enclosing function name; `None` at file scope.
    pub function: Option<String>,
    pub bindings: BTreeMap<String, DeclInfo>,
}

#[derive(Debug, Clone)]
pub struct ScopeTree {
    pub scopes: Vec<Scope>,
    /// Scope in effect at each node, indexed by preorder position.
    pub node_scope: Vec<ScopeId>,
}

impl ScopeTree {
    pub const FILE: ScopeId = 0;

    /// Nearest visible binding of `name` from `scope`, ignoring bindings
    /// made at or after preorder position `at`.
    pub fn lookup(&self, name: &str, scope: ScopeId, at: usize) -> Option<&DeclInfo> {
        let mut cur = Some(scope);
        while let Some(id) = cur {
            let s = &self.scopes[id];
            if let Some(info) = s.bindings.get(name) {
                if info.order < at {
                    return Some(info);
                }
            }
            cur = s.parent;
        }
        None
    }

    /// Lookup as seen from the node at preorder position `index`.
    pub fn lookup_at(&self, name: &str, index: usize) -> Option<&DeclInfo> {
        let scope = *self.node_scope.get(index)?;
        self.lookup(name, scope, index)
    }

    pub fn function_of(&self, scope: ScopeId) -> String {
        self.scopes[scope].function.clone().unwrap_or_default()
    }

    /// Every (function, name) binding of a variable, globals under `""`.
    pub fn declared_pairs(&self) -> BTreeSet<(String, String)> {
        let mut out = BTreeSet::new();
        for scope in &self.scopes {
            if scope.kind == ScopeKind::Prototype {
                continue;
            }
            for info in scope.bindings.values() {
                if !info.is_function() {
                    out.insert((scope.function.clone().unwrap_or_default(), info.name.clone()));
                }
            }
        }
        out
    }
}

/// Type specifier words and qualifiers of a declarator chain.
pub fn declared_type(ty: &AstNode) -> (String, Vec<String>) {
    let mut cur = ty;
    loop {
        match cur.kind {
            NodeKind::TypeDecl => {
                let names = cur
                    .child("type")
                    .map(|t| t.list_attr("names").join(" "))
                    .unwrap_or_default();
                return (names, cur.list_attr("quals").to_vec());
            }
            _ => match cur.child("type") {
                Some(next) => cur = next,
                None => return (String::new(), Vec::new()),
            },
        }
    }
}

fn shape_of(decl: &AstNode, parameter: bool) -> Shape {
    let Some(ty) = decl.child("type") else {
        return Shape::Scalar;
    };
    match ty.kind {
        NodeKind::FuncDecl => Shape::Function {
            ret: declared_type(ty).0,
        },
        NodeKind::ArrayDecl if parameter => Shape::Parameter { array: true },
        NodeKind::ArrayDecl => Shape::Array {
            size: ty
                .child("dim")
                .filter(|d| d.is(NodeKind::Constant))
                .and_then(|d| parse_int_literal(d.str_attr("value")?)),
        },
        _ if parameter => Shape::Parameter { array: false },
        _ => Shape::Scalar,
    }
}

/// Value of a decimal, octal or hex integer literal, ignoring suffixes.
pub fn parse_int_literal(text: &str) -> Option<u64> {
    let digits = text.trim_end_matches(['u', 'U', 'l', 'L']);
    if let Some(hex) = digits.strip_prefix("0x").or_else(|| digits.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16).ok()
    } else if digits.len() > 1 && digits.starts_with('0') {
        u64::from_str_radix(&digits[1..], 8).ok()
    } else {
        digits.parse().ok()
    }
}

struct Builder<'a> {
    nodes: Vec<Located<'a>>,
    sizes: Vec<usize>,
    scopes: Vec<Scope>,
    node_scope: Vec<ScopeId>,
}

impl<'a> Builder<'a> {
    fn push_scope(&mut self, parent: ScopeId, kind: ScopeKind, function: Option<String>) -> ScopeId {
        self.scopes.push(Scope {
            parent: Some(parent),
            kind,
            function,
            bindings: BTreeMap::new(),
        });
        self.scopes.len() - 1
    }

    fn bind(&mut self, scope: ScopeId, info: DeclInfo) -> Result<(), ScopeError> {
        let bindings = &mut self.scopes[scope].bindings;
        if let Some(prev) = bindings.get(&info.name) {
            if prev.is_function() && info.is_function() {
                return Ok(());
            }
            return Err(ScopeError::DuplicateDecl {
                name: info.name,
                coord: info.coord.unwrap_or_else(Coord::unknown),
            });
        }
        bindings.insert(info.name.clone(), info);
        Ok(())
    }

    fn decl_info(&self, index: usize, parameter: bool) -> Option<DeclInfo> {
        let decl = self.nodes[index].node;
        let name = decl.str_attr("name")?.to_string();
        let (ctype, quals) = decl.child("type").map(declared_type).unwrap_or_default();
        Some(DeclInfo {
            name,
            ctype,
            quals,
            shape: shape_of(decl, parameter),
            coord: decl.coord.clone(),
            order: index,
        })
    }

    /// Children of node `index` as preorder indices.
    fn children(&self, index: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut next = index + 1;
        while next < index + self.sizes[index] {
            out.push(next);
            next += self.sizes[next];
        }
        out
    }

    fn visit(&mut self, index: usize, scope: ScopeId) -> Result<(), ScopeError> {
        self.node_scope[index] = scope;
        let node = self.nodes[index].node;
        match node.kind {
            NodeKind::FuncDef => {
                let kids = self.children(index);
                let decl = kids[0];
                let info = self.decl_info(decl, false);
                let name = info.as_ref().map(|i| i.name.clone());
                if let Some(info) = info {
                    self.bind(scope, info)?;
                }
                let fscope = self.push_scope(scope, ScopeKind::Function, name);
                self.mark_subtree(decl, scope);
                self.bind_params(decl, fscope)?;
                for &kid in &kids[1..] {
                    if self.nodes[kid].slot == "body" {
                        self.node_scope[kid] = fscope;
                        for item in self.children(kid) {
                            self.visit(item, fscope)?;
                        }
                    } else {
                        self.visit(kid, fscope)?;
                    }
                }
            }
            NodeKind::Decl => {
                if let Some(info) = self.decl_info(index, false) {
                    let is_proto = info.is_function();
                    self.bind(scope, info)?;
                    if is_proto {
                        self.mark_subtree(index, scope);
                        let pscope = self.push_scope(
                            scope,
                            ScopeKind::Prototype,
                            self.scopes[scope].function.clone(),
                        );
                        self.bind_params(index, pscope)?;
                        return Ok(());
                    }
                }
                for kid in self.children(index) {
                    self.visit(kid, scope)?;
                }
            }
            NodeKind::Compound | NodeKind::For => {
                let inner =
                    self.push_scope(scope, ScopeKind::Block, self.scopes[scope].function.clone());
                for kid in self.children(index) {
                    self.visit(kid, inner)?;
                }
            }
            _ => {
                for kid in self.children(index) {
                    self.visit(kid, scope)?;
                }
            }
        }
        Ok(())
    }

    fn mark_subtree(&mut self, index: usize, scope: ScopeId) {
        let total = self.sizes[index];
        for i in index..index + total {
            self.node_scope[i] = scope;
        }
    }

    /// Binds the parameters of the function declarator under Decl `decl`.
    fn bind_params(&mut self, decl: usize, scope: ScopeId) -> Result<(), ScopeError> {
        let total = self.sizes[decl];
        let params: Vec<usize> = (decl + 1..decl + total)
            .filter(|&i| {
                let entry = self.nodes[i];
                entry.node.is(NodeKind::Decl)
                    && entry
                        .parent
                        .is_some_and(|p| self.nodes[p].node.is(NodeKind::ParamList))
            })
            .collect();
        for p in params {
            if let Some(info) = self.decl_info(p, true) {
                self.bind(scope, info)?;
            }
            let total = self.sizes[p];
            for i in p..p + total {
                self.node_scope[i] = scope;
            }
        }
        Ok(())
    }
}

/// Node count of every subtree, indexed by preorder position.
pub fn subtree_sizes(nodes: &[Located]) -> Vec<usize> {
    let mut sizes = vec![1; nodes.len()];
    for i in (1..nodes.len()).rev() {
        if let Some(p) = nodes[i].parent {
            sizes[p] += sizes[i];
        }
    }
    sizes
}

pub fn build_scopes(root: &AstNode) -> Result<ScopeTree, ScopeError> {
    let nodes = locate(root);
    let count = nodes.len();
    let mut b = Builder {
        sizes: subtree_sizes(&nodes),
        nodes,
        scopes: vec![Scope {
            parent: None,
            kind: ScopeKind::File,
            function: None,
            bindings: BTreeMap::new(),
        }],
        node_scope: vec![ScopeTree::FILE; count],
    };
    b.visit(0, ScopeTree::FILE)?;
    Ok(ScopeTree {
        scopes: b.scopes,
        node_scope: b.node_scope,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndeclaredUse {
    pub name: String,
    pub first_use: Coord,
    /// Function containing the uses; empty for file-scope initializers.
    pub enclosing_function: String,
    /// Coords of every use, in source order.
    pub all_uses: Vec<Coord>,
    /// Preorder indices of the ID nodes, parallel to `all_uses`.
    pub sites: Vec<usize>,
}

/// True when the node at `index` is the callee expression of a call.
pub fn is_callee(nodes: &[Located], index: usize) -> bool {
    let entry = nodes[index];
    entry.slot == "name"
        && entry
            .parent
            .is_some_and(|p| nodes[p].node.is(NodeKind::FuncCall))
}

fn site_key(nodes: &[Located], index: usize) -> (Option<Coord>, usize) {
    (nodes[index].node.coord.clone(), index)
}

pub fn find_undeclared(root: &AstNode, scopes: &ScopeTree) -> Vec<UndeclaredUse> {
    find_undeclared_by(root, scopes, |name| name.to_string())
}

/// Like [`find_undeclared`], but each use of `name` is checked against the
/// declaration of `declared_name(name)`. The neural detector supplies the
/// identifier its predicted `Decl` code names.
pub fn find_undeclared_by(
    root: &AstNode,
    scopes: &ScopeTree,
    mut declared_name: impl FnMut(&str) -> String,
) -> Vec<UndeclaredUse> {
    let nodes = locate(root);
    let mut groups: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    for (i, entry) in nodes.iter().enumerate() {
        if !entry.node.is(NodeKind::ID) || is_callee(&nodes, i) {
            continue;
        }
        let Some(name) = entry.node.str_attr("name") else {
            continue;
        };
        if scopes.lookup_at(&declared_name(name), i).is_some() {
            continue;
        }
        let function = scopes.function_of(scopes.node_scope[i]);
        groups.entry((name.to_string(), function)).or_default().push(i);
    }
    let mut out: Vec<UndeclaredUse> = groups
        .into_iter()
        .map(|((name, function), mut sites)| {
            sites.sort_by_key(|&i| site_key(&nodes, i));
            let all_uses: Vec<Coord> = sites
                .iter()
                .map(|&i| nodes[i].node.coord.clone().unwrap_or_else(Coord::unknown))
                .collect();
            UndeclaredUse {
                name,
                first_use: all_uses[0].clone(),
                enclosing_function: function,
                all_uses,
                sites,
            }
        })
        .collect();
    out.sort_by_key(|u| site_key(&nodes, u.sites[0]));
    out
}

/// Return types of the C library functions the corpus calls without a
/// prototype in view.
pub fn library_return_type(name: &str) -> Option<&'static str> {
    Some(match name {
        "printf" | "scanf" | "puts" | "putchar" | "getchar" | "abs" | "atoi" | "rand"
        | "strlen" => "int",
        "fabs" | "sqrt" | "pow" | "sin" | "cos" | "tan" | "exp" | "log" | "log10" | "floor"
        | "ceil" | "atof" => "double",
        "labs" => "long",
        "srand" | "exit" => "void",
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnresolvedCallee {
    pub name: String,
    pub first_call: Coord,
}

/// Called names with no visible declaration and no library entry. These are
/// reported but never repaired.
pub fn unresolved_callees(root: &AstNode, scopes: &ScopeTree) -> Vec<UnresolvedCallee> {
    let nodes = locate(root);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, entry) in nodes.iter().enumerate() {
        if !entry.node.is(NodeKind::ID) || !is_callee(&nodes, i) {
            continue;
        }
        let Some(name) = entry.node.str_attr("name") else {
            continue;
        };
        if scopes.lookup_at(name, i).is_some() || library_return_type(name).is_some() {
            continue;
        }
        if seen.insert(name.to_string()) {
            out.push(UnresolvedCallee {
                name: name.to_string(),
                first_call: entry.node.coord.clone().unwrap_or_else(Coord::unknown),
            });
        }
    }
    out
}

/// All declared (function, variable) pairs, globals under `""`. Computed
/// directly from the tree; function names and prototype parameters are
/// excluded.
pub fn declared_set(root: &AstNode) -> BTreeSet<(String, String)> {
    fn collect(node: &AstNode, function: &str, out: &mut BTreeSet<(String, String)>) {
        match node.kind {
            NodeKind::FuncDef => {
                let decl = node.child("decl");
                let fname = decl.and_then(|d| d.str_attr("name")).unwrap_or_default();
                if let Some(params) = decl
                    .and_then(|d| d.child("type"))
                    .filter(|t| t.is(NodeKind::FuncDecl))
                    .and_then(|t| t.child("args"))
                {
                    for p in params.list("params") {
                        if let Some(name) = p.str_attr("name") {
                            out.insert((fname.to_string(), name.to_string()));
                        }
                    }
                }
                if let Some(body) = node.child("body") {
                    collect(body, fname, out);
                }
            }
            NodeKind::Decl => {
                let is_proto = node.child("type").is_some_and(|t| t.is(NodeKind::FuncDecl));
                if !is_proto {
                    if let Some(name) = node.str_attr("name") {
                        out.insert((function.to_string(), name.to_string()));
                    }
                }
            }
            _ => {
                for (_, kid) in node.labeled_children() {
                    collect(kid, function, out);
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    collect(root, "", &mut out);
    out
}
