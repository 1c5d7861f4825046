//! Declaration synthesis, insertion through the JSON form of the tree, and
//! regeneration of C source.

mod emit;

pub use emit::emit;

use serde_json::Value;

use crate::ast::{deserialize_ast, serialize_ast, to_json_value, write_json, AstNode, NodeKind};
use crate::error::{AstError, RepairError};
use crate::scopes::declared_set;
use crate::typebind::{CType, TypeEvidence};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthesizedDecl {
    pub name: String,
    pub ctype: CType,
    pub array_size: Option<u64>,
    pub target_function: String,
}

impl From<&TypeEvidence> for SynthesizedDecl {
    fn from(ev: &TypeEvidence) -> Self {
        SynthesizedDecl {
            name: ev.variable.clone(),
            ctype: ev.inferred.clone(),
            array_size: ev.array_size,
            target_function: ev.function.clone(),
        }
    }
}

/// `Decl → [ArrayDecl →] TypeDecl → IdentifierType` for one variable.
pub fn synthesize_decl(name: &str, ctype: &CType, array_size: Option<u64>) -> AstNode {
    let names = ctype.name.split_whitespace().map(String::from).collect();
    let ident = AstNode::new(NodeKind::IdentifierType).with_list("names", names);
    let mut ty = AstNode::new(NodeKind::TypeDecl)
        .with_str("declname", name)
        .with_list("quals", ctype.qualifiers.clone())
        .with_child("type", ident);
    if let Some(size) = array_size {
        let dim = AstNode::new(NodeKind::Constant)
            .with_str("type", "int")
            .with_str("value", size.to_string());
        ty = AstNode::new(NodeKind::ArrayDecl)
            .with_child("type", ty)
            .with_child("dim", dim);
    }
    AstNode::new(NodeKind::Decl)
        .with_str("name", name)
        .with_list("quals", ctype.qualifiers.clone())
        .with_child("type", ty)
}

fn function_body<'v>(doc: &'v mut Value, function: &str) -> Option<&'v mut Vec<Value>> {
    let ext = doc.get_mut("ext")?.as_array_mut()?;
    let def = ext.iter_mut().find(|item| {
        item["_nodetype"] == "FuncDef" && item["decl"]["name"].as_str() == Some(function)
    })?;
    def.get_mut("body")?.get_mut("block_items")?.as_array_mut()
}

/// Splices the declarations at the top of their target functions. The tree
/// is serialized, edited as JSON and deserialized back.
pub fn insert_declarations(root: &AstNode, decls: &[SynthesizedDecl]) -> Result<AstNode, RepairError> {
    if decls.is_empty() {
        return Ok(root.clone());
    }
    let mut taken = declared_set(root);
    for d in decls {
        if !taken.insert((d.target_function.clone(), d.name.clone())) {
            return Err(RepairError::Conflict {
                name: d.name.clone(),
                function: d.target_function.clone(),
            });
        }
    }

    let text = serialize_ast(root);
    let mut doc: Value = serde_json::from_str(&text).map_err(|e| AstError::Json(e.to_string()))?;
    let mut next_slot: Vec<(String, usize)> = Vec::new();
    for d in decls {
        let items = function_body(&mut doc, &d.target_function)
            .ok_or_else(|| RepairError::UnknownFunction(d.target_function.clone()))?;
        let slot = match next_slot.iter_mut().find(|(f, _)| *f == d.target_function) {
            Some((_, n)) => n,
            None => {
                next_slot.push((d.target_function.clone(), 0));
                &mut next_slot.last_mut().expect("just pushed").1
            }
        };
        let node = synthesize_decl(&d.name, &d.ctype, d.array_size);
        items.insert(*slot, to_json_value(&node));
        *slot += 1;
    }
    Ok(deserialize_ast(&write_json(&doc))?)
}
