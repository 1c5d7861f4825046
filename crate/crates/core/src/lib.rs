//! Detection and repair of undeclared variables in a C subset: parsing to a
//! pycparser-shaped AST, scope analysis, composite token codes, an LSTM
//! declaration model, rule-based type binding, and source regeneration.

pub mod ast;
pub mod cparse;
pub mod driver;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod neuralnet;
pub mod repairgen;
pub mod scopes;
pub mod tokencode;
pub mod typebind;

pub use ast::{deserialize_ast, serialize_ast, AstNode, Coord, NodeKind};
pub use cparse::parse_source;
pub use driver::{fix_source, run_eval, run_fix, run_train, Detector, FixOptions, FixOutcome, FixReport, Mode, Status};
pub use error::{DriverError, FrontendError, NetError};
pub use eval::{EvalReport, TruthAnnotation};
pub use fixtures::{generate_program, load_fixtures, FixtureCase};
pub use neuralnet::{ModelConfig, TrainedModel};
pub use repairgen::emit;
pub use scopes::{build_scopes, find_undeclared};
pub use tokencode::{build_vocabulary, compose, decompose, Vocabulary};
pub use typebind::{BindOptions, CType};
