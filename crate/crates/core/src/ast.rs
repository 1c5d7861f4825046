//! AST node model, per-kind schema, traversal, and the JSON form used when a
//! tree is transformed.
//!
//! Every node kind has a fixed schema: a set of scalar attributes and a set of
//! child slots. A slot holds either a single optional node or an ordered list
//! of nodes. Nodes are always created with every schema entry present, which
//! keeps structural equality meaningful across a JSON round trip.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::error::AstError;

/// Source position of a node's first token.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub file: String,
    pub line: u32,
    pub column: u32,
}

impl Coord {
    pub fn new(file: impl Into<String>, line: u32, column: u32) -> Self {
        debug_assert!(line >= 1 && column >= 1);
        Coord {
            file: file.into(),
            line,
            column,
        }
    }

    /// Placeholder used when a node carries no position.
    pub fn unknown() -> Self {
        Coord::new("<unknown>", 1, 1)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

impl FromStr for Coord {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.rsplitn(3, ':');
        let column = parts.next();
        let line = parts.next();
        let file = parts.next();
        match (file, line, column) {
            (Some(file), Some(line), Some(column)) => {
                let line: u32 = line.parse().map_err(|_| format!("bad line in coord `{s}`"))?;
                let column: u32 = column
                    .parse()
                    .map_err(|_| format!("bad column in coord `{s}`"))?;
                if line == 0 || column == 0 {
                    return Err(format!("coord `{s}` must be 1-based"));
                }
                Ok(Coord::new(file, line, column))
            }
            _ => Err(format!("coord `{s}` is not file:line:column")),
        }
    }
}

macro_rules! node_kinds {
    ($($variant:ident = $ord:literal),+ $(,)?) => {
        /// The closed set of AST non-terminals. Ordinals are frozen; the
        /// non-terminal code of a kind is its ordinal.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum NodeKind {
            $($variant = $ord),+
        }

        impl NodeKind {
            /// All kinds in ordinal order.
            pub const ALL: [NodeKind; 47] = [$(NodeKind::$variant),+];

            pub fn name(self) -> &'static str {
                match self {
                    $(NodeKind::$variant => stringify!($variant)),+
                }
            }

            pub fn from_name(name: &str) -> Option<NodeKind> {
                match name {
                    $(stringify!($variant) => Some(NodeKind::$variant),)+
                    _ => None,
                }
            }
        }
    };
}

node_kinds! {
    FileAST = 1,
    FuncDef = 2,
    FuncDecl = 3,
    ParamList = 4,
    Compound = 5,
    Decl = 6,
    DeclList = 7,
    TypeDecl = 8,
    IdentifierType = 9,
    ArrayDecl = 10,
    PtrDecl = 11,
    ID = 12,
    Constant = 13,
    Assignment = 14,
    BinaryOp = 15,
    UnaryOp = 16,
    ArrayRef = 17,
    FuncCall = 18,
    ExprList = 19,
    For = 20,
    While = 21,
    DoWhile = 22,
    If = 23,
    Return = 24,
    Break = 25,
    Continue = 26,
    EmptyStatement = 27,
    InitList = 28,
    Typename = 29,
    EllipsisParam = 30,
    TernaryOp = 31,
    Cast = 32,
    CompoundLiteral = 33,
    Switch = 34,
    Case = 35,
    Default = 36,
    Label = 37,
    Goto = 38,
    Struct = 39,
    StructRef = 40,
    Union = 41,
    Enum = 42,
    Enumerator = 43,
    EnumeratorList = 44,
    Typedef = 45,
    NamedInitializer = 46,
    Pragma = 47,
}

impl NodeKind {
    pub fn ordinal(self) -> u8 {
        self as u8
    }

    pub fn from_ordinal(ordinal: u8) -> Option<NodeKind> {
        NodeKind::ALL.get(usize::from(ordinal).checked_sub(1)?).copied()
    }

    pub fn schema(self) -> &'static Schema {
        schema_of(self)
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttrType {
    /// Always a string.
    Str,
    /// A string or null.
    OptStr,
    /// A list of strings.
    List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotType {
    /// Zero or one node, serialized as an object or null.
    One,
    /// An ordered list of nodes.
    Many,
}

#[derive(Debug)]
pub struct Schema {
    pub attrs: &'static [(&'static str, AttrType)],
    pub slots: &'static [(&'static str, SlotType)],
}

macro_rules! schema {
    ([$($a:literal : $at:ident),*], [$($s:literal : $st:ident),*]) => {
        &Schema {
            attrs: &[$(($a, AttrType::$at)),*],
            slots: &[$(($s, SlotType::$st)),*],
        }
    };
}

fn schema_of(kind: NodeKind) -> &'static Schema {
    use NodeKind::*;
    match kind {
        FileAST => schema!(["preamble": List], ["ext": Many]),
        FuncDef => schema!([], ["decl": One, "param_decls": Many, "body": One]),
        FuncDecl => schema!([], ["args": One, "type": One]),
        ParamList => schema!([], ["params": Many]),
        Compound => schema!([], ["block_items": Many]),
        Decl => schema!(
            ["name": OptStr, "quals": List, "storage": List, "funcspec": List],
            ["type": One, "init": One, "bitsize": One]
        ),
        DeclList => schema!([], ["decls": Many]),
        TypeDecl => schema!(["declname": OptStr, "quals": List], ["type": One]),
        IdentifierType => schema!(["names": List], []),
        ArrayDecl => schema!(["dim_quals": List], ["type": One, "dim": One]),
        PtrDecl => schema!(["quals": List], ["type": One]),
        ID => schema!(["name": Str], []),
        Constant => schema!(["type": Str, "value": Str], []),
        Assignment => schema!(["op": Str], ["lvalue": One, "rvalue": One]),
        BinaryOp => schema!(["op": Str], ["left": One, "right": One]),
        UnaryOp => schema!(["op": Str], ["expr": One]),
        ArrayRef => schema!([], ["name": One, "subscript": One]),
        FuncCall => schema!([], ["name": One, "args": One]),
        ExprList => schema!([], ["exprs": Many]),
        For => schema!([], ["init": One, "cond": One, "next": One, "stmt": One]),
        While => schema!([], ["cond": One, "stmt": One]),
        DoWhile => schema!([], ["cond": One, "stmt": One]),
        If => schema!([], ["cond": One, "iftrue": One, "iffalse": One]),
        Return => schema!([], ["expr": One]),
        Break => schema!([], []),
        Continue => schema!([], []),
        EmptyStatement => schema!([], []),
        InitList => schema!([], ["exprs": Many]),
        Typename => schema!(["name": OptStr, "quals": List], ["type": One]),
        EllipsisParam => schema!([], []),
        TernaryOp => schema!([], ["cond": One, "iftrue": One, "iffalse": One]),
        Cast => schema!([], ["to_type": One, "expr": One]),
        CompoundLiteral => schema!([], ["type": One, "init": One]),
        Switch => schema!([], ["cond": One, "stmt": One]),
        Case => schema!([], ["expr": One, "stmts": Many]),
        Default => schema!([], ["stmts": Many]),
        Label => schema!(["name": Str], ["stmt": One]),
        Goto => schema!(["name": Str], []),
        Struct => schema!(["name": OptStr], ["decls": Many]),
        StructRef => schema!(["type": Str], ["name": One, "field": One]),
        Union => schema!(["name": OptStr], ["decls": Many]),
        Enum => schema!(["name": OptStr], ["values": One]),
        Enumerator => schema!(["name": Str], ["value": One]),
        EnumeratorList => schema!([], ["enumerators": Many]),
        Typedef => schema!(
            ["name": Str, "quals": List, "storage": List],
            ["type": One]
        ),
        NamedInitializer => schema!([], ["name": Many, "expr": One]),
        Pragma => schema!(["string": Str], []),
    }
}

/// Scalar attribute value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttrValue {
    Null,
    Str(String),
    List(Vec<String>),
}

/// Contents of a child slot.
#[derive(Debug, Clone, PartialEq)]
pub enum Child {
    Empty,
    Node(Box<AstNode>),
    Nodes(Vec<AstNode>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstNode {
    pub kind: NodeKind,
    attrs: BTreeMap<&'static str, AttrValue>,
    children: Vec<(&'static str, Child)>,
    pub coord: Option<Coord>,
}

impl AstNode {
    /// A node with every attribute and slot of its kind at its default.
    pub fn new(kind: NodeKind) -> Self {
        let schema = kind.schema();
        let attrs = schema
            .attrs
            .iter()
            .map(|&(name, ty)| {
                let value = match ty {
                    AttrType::Str => AttrValue::Str(String::new()),
                    AttrType::OptStr => AttrValue::Null,
                    AttrType::List => AttrValue::List(Vec::new()),
                };
                (name, value)
            })
            .collect();
        let children = schema
            .slots
            .iter()
            .map(|&(name, ty)| {
                let child = match ty {
                    SlotType::One => Child::Empty,
                    SlotType::Many => Child::Nodes(Vec::new()),
                };
                (name, child)
            })
            .collect();
        AstNode {
            kind,
            attrs,
            children,
            coord: None,
        }
    }

    pub fn at(mut self, coord: Option<Coord>) -> Self {
        self.coord = coord;
        self
    }

    pub fn with_str(mut self, attr: &str, value: impl Into<String>) -> Self {
        self.set_attr(attr, AttrValue::Str(value.into()));
        self
    }

    pub fn with_list(mut self, attr: &str, values: Vec<String>) -> Self {
        self.set_attr(attr, AttrValue::List(values));
        self
    }

    pub fn with_child(mut self, slot: &str, node: AstNode) -> Self {
        self.set_child(slot, Some(node));
        self
    }

    pub fn with_opt_child(mut self, slot: &str, node: Option<AstNode>) -> Self {
        self.set_child(slot, node);
        self
    }

    pub fn with_children(mut self, slot: &str, nodes: Vec<AstNode>) -> Self {
        *self.list_mut(slot) = nodes;
        self
    }

    pub fn is(&self, kind: NodeKind) -> bool {
        self.kind == kind
    }

    pub fn set_attr(&mut self, attr: &str, value: AttrValue) {
        let slot = self
            .attrs
            .iter_mut()
            .find(|(name, _)| **name == attr)
            .unwrap_or_else(|| panic!("{} has no attribute `{attr}`", self.kind));
        *slot.1 = value;
    }

    pub fn attr(&self, attr: &str) -> Option<&AttrValue> {
        self.attrs.get(attr)
    }

    pub fn attrs(&self) -> impl Iterator<Item = (&'static str, &AttrValue)> {
        self.attrs.iter().map(|(k, v)| (*k, v))
    }

    /// String attribute; `None` when absent or null.
    pub fn str_attr(&self, attr: &str) -> Option<&str> {
        match self.attrs.get(attr) {
            Some(AttrValue::Str(s)) => Some(s),
            _ => None,
        }
    }

    pub fn list_attr(&self, attr: &str) -> &[String] {
        match self.attrs.get(attr) {
            Some(AttrValue::List(v)) => v,
            _ => &[],
        }
    }

    pub fn set_child(&mut self, slot: &str, node: Option<AstNode>) {
        let kind = self.kind;
        let entry = self
            .children
            .iter_mut()
            .find(|(name, _)| *name == slot)
            .unwrap_or_else(|| panic!("{kind} has no child slot `{slot}`"));
        assert!(
            !matches!(entry.1, Child::Nodes(_)),
            "{kind}.{slot} is a list slot"
        );
        entry.1 = match node {
            Some(n) => Child::Node(Box::new(n)),
            None => Child::Empty,
        };
    }

    /// Single child in `slot`, if present.
    pub fn child(&self, slot: &str) -> Option<&AstNode> {
        self.children
            .iter()
            .find(|(name, _)| *name == slot)
            .and_then(|(_, c)| match c {
                Child::Node(n) => Some(n.as_ref()),
                _ => None,
            })
    }

    pub fn child_mut(&mut self, slot: &str) -> Option<&mut AstNode> {
        self.children
            .iter_mut()
            .find(|(name, _)| *name == slot)
            .and_then(|(_, c)| match c {
                Child::Node(n) => Some(n.as_mut()),
                _ => None,
            })
    }

    /// Nodes of a list slot; empty for unknown or single slots.
    pub fn list(&self, slot: &str) -> &[AstNode] {
        self.children
            .iter()
            .find(|(name, _)| *name == slot)
            .map(|(_, c)| match c {
                Child::Nodes(v) => v.as_slice(),
                _ => &[],
            })
            .unwrap_or(&[])
    }

    pub fn list_mut(&mut self, slot: &str) -> &mut Vec<AstNode> {
        let kind = self.kind;
        match self.children.iter_mut().find(|(name, _)| *name == slot) {
            Some((_, Child::Nodes(v))) => v,
            _ => panic!("{kind} has no list slot `{slot}`"),
        }
    }

    pub fn slots(&self) -> &[(&'static str, Child)] {
        &self.children
    }

    /// Direct children in stored order, each with its slot label.
    pub fn labeled_children(&self) -> impl Iterator<Item = (&'static str, &AstNode)> {
        self.children.iter().flat_map(|(label, child)| {
            let nodes: Vec<&AstNode> = match child {
                Child::Empty => Vec::new(),
                Child::Node(n) => vec![n.as_ref()],
                Child::Nodes(v) => v.iter().collect(),
            };
            nodes.into_iter().map(move |n| (*label, n))
        })
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .labeled_children()
            .map(|(_, c)| c.node_count())
            .sum::<usize>()
    }

    /// Copy of the tree with every coord removed.
    pub fn without_coords(&self) -> AstNode {
        let mut out = self.clone();
        out.strip_coords();
        out
    }

    fn strip_coords(&mut self) {
        self.coord = None;
        for (_, child) in &mut self.children {
            match child {
                Child::Empty => {}
                Child::Node(n) => n.strip_coords(),
                Child::Nodes(v) => v.iter_mut().for_each(AstNode::strip_coords),
            }
        }
    }
}

/// Depth-first preorder, children in stored order.
pub fn preorder(root: &AstNode) -> Vec<&AstNode> {
    let mut out = Vec::new();
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        out.push(node);
        let kids: Vec<&AstNode> = node.labeled_children().map(|(_, c)| c).collect();
        stack.extend(kids.into_iter().rev());
    }
    out
}

/// A node visited in preorder, with the index of its parent and the slot it
/// hangs from.
#[derive(Debug, Clone, Copy)]
pub struct Located<'a> {
    pub node: &'a AstNode,
    pub parent: Option<usize>,
    pub slot: &'static str,
}

/// Same order as [`preorder`], with parent links.
pub fn locate(root: &AstNode) -> Vec<Located<'_>> {
    let mut out = Vec::new();
    let mut stack = vec![Located {
        node: root,
        parent: None,
        slot: "",
    }];
    while let Some(entry) = stack.pop() {
        let index = out.len();
        out.push(entry);
        let kids: Vec<Located> = entry
            .node
            .labeled_children()
            .map(|(slot, node)| Located {
                node,
                parent: Some(index),
                slot,
            })
            .collect();
        stack.extend(kids.into_iter().rev());
    }
    out
}

pub fn to_json_value(node: &AstNode) -> Value {
    let mut map = Map::new();
    map.insert("_nodetype".into(), Value::String(node.kind.name().into()));
    for (name, value) in &node.attrs {
        let v = match value {
            AttrValue::Null => Value::Null,
            AttrValue::Str(s) => Value::String(s.clone()),
            AttrValue::List(items) => {
                Value::Array(items.iter().cloned().map(Value::String).collect())
            }
        };
        map.insert((*name).into(), v);
    }
    for (name, child) in &node.children {
        let v = match child {
            Child::Empty => Value::Null,
            Child::Node(n) => to_json_value(n),
            Child::Nodes(items) => Value::Array(items.iter().map(to_json_value).collect()),
        };
        map.insert((*name).into(), v);
    }
    if let Some(coord) = &node.coord {
        map.insert("coord".into(), Value::String(coord.to_string()));
    }
    Value::Object(map)
}

/// Renders a JSON value with 4-space indentation, `_nodetype` first and the
/// remaining keys sorted.
pub fn write_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(value: &Value, depth: usize, out: &mut String) {
    match value {
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort_by(|a, b| {
                (a.as_str() != "_nodetype", a.as_str()).cmp(&(b.as_str() != "_nodetype", b.as_str()))
            });
            out.push_str("{\n");
            for (i, key) in keys.iter().enumerate() {
                indent(depth + 1, out);
                out.push_str(&Value::String((*key).clone()).to_string());
                out.push_str(": ");
                write_value(&map[*key], depth + 1, out);
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(depth, out);
            out.push('}');
        }
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                indent(depth + 1, out);
                write_value(item, depth + 1, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(depth, out);
            out.push(']');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

pub fn serialize_ast(root: &AstNode) -> String {
    write_json(&to_json_value(root))
}

pub fn deserialize_ast(doc: &str) -> Result<AstNode, AstError> {
    let value: Value = serde_json::from_str(doc).map_err(|e| AstError::Json(e.to_string()))?;
    from_json_value(&value)
}

pub fn from_json_value(value: &Value) -> Result<AstNode, AstError> {
    node_from_value(value, "$")
}

fn node_from_value(value: &Value, path: &str) -> Result<AstNode, AstError> {
    let map = value.as_object().ok_or_else(|| AstError::Value {
        path: path.to_string(),
        message: "expected a node object".into(),
    })?;
    let kind_name = match map.get("_nodetype") {
        Some(Value::String(s)) => s,
        Some(_) => {
            return Err(AstError::Schema {
                path: path.to_string(),
                message: "`_nodetype` must be a string".into(),
            })
        }
        None => {
            return Err(AstError::Schema {
                path: path.to_string(),
                message: "missing `_nodetype`".into(),
            })
        }
    };
    let kind = NodeKind::from_name(kind_name).ok_or_else(|| AstError::Schema {
        path: path.to_string(),
        message: format!("unknown node type `{kind_name}`"),
    })?;
    let schema = kind.schema();

    for key in map.keys() {
        let known = key == "_nodetype"
            || key == "coord"
            || schema.attrs.iter().any(|(a, _)| a == key)
            || schema.slots.iter().any(|(s, _)| s == key);
        if !known {
            return Err(AstError::Schema {
                path: path.to_string(),
                message: format!("unknown key `{key}` for {kind}"),
            });
        }
    }

    let mut node = AstNode::new(kind);
    for &(name, ty) in schema.attrs {
        let at = format!("{path}.{name}");
        let raw = map.get(name).ok_or_else(|| AstError::Schema {
            path: at.clone(),
            message: format!("missing attribute `{name}` for {kind}"),
        })?;
        let value = match (ty, raw) {
            (AttrType::Str | AttrType::OptStr, Value::String(s)) => AttrValue::Str(s.clone()),
            (AttrType::OptStr, Value::Null) => AttrValue::Null,
            (AttrType::List, Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    match item {
                        Value::String(s) => out.push(s.clone()),
                        other => {
                            return Err(AstError::Value {
                                path: at,
                                message: format!("expected string list entry, got {other}"),
                            })
                        }
                    }
                }
                AttrValue::List(out)
            }
            (ty, other) => {
                return Err(AstError::Value {
                    path: at,
                    message: format!("expected {ty:?}, got {other}"),
                })
            }
        };
        node.set_attr(name, value);
    }

    for &(name, ty) in schema.slots {
        let at = format!("{path}.{name}");
        let raw = map.get(name).ok_or_else(|| AstError::Schema {
            path: at.clone(),
            message: format!("missing child slot `{name}` for {kind}"),
        })?;
        match (ty, raw) {
            (SlotType::One, Value::Null) => {}
            (SlotType::One, Value::Object(_)) => {
                let child = node_from_value(raw, &at)?;
                node.set_child(name, Some(child));
            }
            (SlotType::Many, Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    out.push(node_from_value(item, &format!("{at}[{i}]"))?);
                }
                *node.list_mut(name) = out;
            }
            (ty, other) => {
                return Err(AstError::Value {
                    path: at,
                    message: format!("expected {ty:?} slot, got {other}"),
                })
            }
        }
    }

    match map.get("coord") {
        None | Some(Value::Null) => {}
        Some(Value::String(s)) => {
            let coord = s.parse::<Coord>().map_err(|message| AstError::Value {
                path: format!("{path}.coord"),
                message,
            })?;
            node.coord = Some(coord);
        }
        Some(other) => {
            return Err(AstError::Value {
                path: format!("{path}.coord"),
                message: format!("expected coord string, got {other}"),
            })
        }
    }
    Ok(node)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const FIGURE_SIX: &str = r#"{
    "_nodetype": "Decl",
    "bitsize": null,
    "funcspec": [],
    "init": null,
    "name": "j",
    "quals": [],
    "storage": [],
    "type": {
       "_nodetype": "TypeDecl",
       "declname": "j",
       "quals": [],
       "type": {
          "_nodetype": "IdentifierType",
          "names": [
              "int"
           ]
       }
   }
}"#;

    fn decl_j() -> AstNode {
        let ident = AstNode::new(NodeKind::IdentifierType).with_list("names", vec!["int".into()]);
        let tdecl = AstNode::new(NodeKind::TypeDecl)
            .with_str("declname", "j")
            .with_child("type", ident);
        AstNode::new(NodeKind::Decl)
            .with_str("name", "j")
            .with_child("type", tdecl)
    }

    #[test]
    fn ordinals_are_a_bijection() {
        for (i, kind) in NodeKind::ALL.iter().enumerate() {
            assert_eq!(usize::from(kind.ordinal()), i + 1);
            assert_eq!(NodeKind::from_ordinal(kind.ordinal()), Some(*kind));
            assert_eq!(NodeKind::from_name(kind.name()), Some(*kind));
        }
        assert_eq!(NodeKind::from_ordinal(0), None);
        assert_eq!(NodeKind::from_ordinal(48), None);
        assert_eq!(NodeKind::IdentifierType.ordinal(), 9);
    }

    #[test]
    fn figure_six_deserializes_to_the_decl_chain() {
        let node = deserialize_ast(FIGURE_SIX).unwrap();
        assert_eq!(node, decl_j());
        let kinds: Vec<NodeKind> = preorder(&node).iter().map(|n| n.kind).collect();
        assert_eq!(
            kinds,
            [NodeKind::Decl, NodeKind::TypeDecl, NodeKind::IdentifierType]
        );
    }

    #[test]
    fn figure_six_serializes_with_same_content() {
        let text = serialize_ast(&decl_j());
        let ours: Value = serde_json::from_str(&text).unwrap();
        let theirs: Value = serde_json::from_str(FIGURE_SIX).unwrap();
        assert_eq!(ours, theirs);
        assert!(text.starts_with("{\n    \"_nodetype\": \"Decl\",\n    \"bitsize\": null,"));
    }

    #[test]
    fn leaf_constant_has_no_child_keys() {
        let c = AstNode::new(NodeKind::Constant)
            .with_str("type", "int")
            .with_str("value", "0");
        let v = to_json_value(&c);
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 3);
        assert_eq!(deserialize_ast(&serialize_ast(&c)).unwrap(), c);
    }

    #[test]
    fn empty_object_is_a_schema_error() {
        assert!(matches!(deserialize_ast("{}"), Err(AstError::Schema { .. })));
        assert!(matches!(
            deserialize_ast(r#"{"_nodetype": "Widget"}"#),
            Err(AstError::Schema { .. })
        ));
    }

    #[test]
    fn unknown_keys_and_bad_types_are_rejected() {
        let unknown = r#"{"_nodetype": "ID", "name": "x", "colour": "red"}"#;
        assert!(matches!(deserialize_ast(unknown), Err(AstError::Schema { .. })));
        let mismatch = r#"{"_nodetype": "ID", "name": 3}"#;
        assert!(matches!(deserialize_ast(mismatch), Err(AstError::Value { .. })));
        let bad_list = r#"{"_nodetype": "IdentifierType", "names": "int"}"#;
        assert!(matches!(deserialize_ast(bad_list), Err(AstError::Value { .. })));
        assert!(matches!(deserialize_ast("{"), Err(AstError::Json(_))));
    }

    #[test]
    fn coords_round_trip_as_strings() {
        let id = AstNode::new(NodeKind::ID)
            .with_str("name", "x")
            .at(Some(Coord::new("C:/dir/a.c", 3, 14)));
        let text = serialize_ast(&id);
        assert!(text.contains("\"coord\": \"C:/dir/a.c:3:14\""));
        assert_eq!(deserialize_ast(&text).unwrap(), id);
        assert!("a.c:0:1".parse::<Coord>().is_err());
        assert!("a.c:1".parse::<Coord>().is_err());
    }

    #[test]
    fn serialization_is_deterministic() {
        let t = decl_j();
        assert_eq!(serialize_ast(&t), serialize_ast(&t));
    }

    #[test]
    fn preorder_of_leaf() {
        let leaf = AstNode::new(NodeKind::Break);
        assert_eq!(preorder(&leaf).len(), 1);
    }
}
