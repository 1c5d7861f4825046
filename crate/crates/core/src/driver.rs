//! End-to-end drivers behind the command line: fix, detect, train, eval and
//! fixture export.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use walkdir::WalkDir;

use crate::ast::{serialize_ast, AstNode, NodeKind};
use crate::cparse::parse_source;
use crate::error::{DriverError, NetError};
use crate::eval::{evaluate, EvalReport, FileResult, Flagged, TruthAnnotation};
use crate::fixtures::{load_fixtures, FixtureCase};
use crate::neuralnet::{self, predict_declaration, training_recall, LossHistory, ModelConfig, TrainedModel};
use crate::repairgen::{emit, insert_declarations, SynthesizedDecl};
use crate::scopes::{build_scopes, find_undeclared, find_undeclared_by, unresolved_callees, UndeclaredUse};
use crate::tokencode::{build_vocabulary, decompose, encode_nonterminal, Vocabulary};
use crate::typebind::{BindOptions, Binder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Oracle,
    Neural,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Clean,
    Fixed,
    Unfixable,
    SyntaxError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Clean | Status::Fixed => 0,
            Status::SyntaxError => 1,
            Status::Unfixable => 2,
        }
    }
}

/// Where undeclared variables come from.
#[derive(Debug, Clone, Copy)]
pub enum Detector<'a> {
    /// Scope analysis alone.
    Oracle,
    /// A use is flagged when the `Decl` identifier the model predicts for
    /// its `ID` key is not visible at the use.
    Neural {
        model: &'a TrainedModel,
        vocab: &'a Vocabulary,
    },
}

impl Detector<'_> {
    pub fn mode(&self) -> Mode {
        match self {
            Detector::Oracle => Mode::Oracle,
            Detector::Neural { .. } => Mode::Neural,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct UndeclaredReport {
    pub name: String,
    pub function: String,
    pub uses: Vec<String>,
    pub case_id: u8,
    #[serde(rename = "type")]
    pub ctype: String,
    pub array_size: Option<u64>,
    pub site: String,
    pub bound_from: String,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct CalleeReport {
    pub name: String,
    pub site: String,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct WarningReport {
    pub kind: crate::typebind::WarningKind,
    pub variable: String,
    pub site: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct FixReport {
    pub file: String,
    pub mode: Mode,
    pub status: Status,
    pub undeclared: Vec<UndeclaredReport>,
    pub unresolved_callees: Vec<CalleeReport>,
    pub warnings: Vec<WarningReport>,
    /// Identifiers whose prediction was replaced by the identifier itself
    /// because the model never saw them as a training key.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub backsubstituted: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl FixReport {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

#[derive(Debug, Clone)]
pub struct FixOptions {
    pub fallback_type: String,
    pub array_size: u64,
    pub best_evidence: bool,
}

impl Default for FixOptions {
    fn default() -> Self {
        let b = BindOptions::default();
        FixOptions {
            fallback_type: b.fallback_type,
            array_size: b.array_size,
            best_evidence: b.best_evidence,
        }
    }
}

impl FixOptions {
    fn bind_options(&self) -> BindOptions {
        BindOptions {
            array_size: self.array_size,
            fallback_type: self.fallback_type.clone(),
            best_evidence: self.best_evidence,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FixOutcome {
    pub report: FixReport,
    /// Repaired source, or the input unchanged when clean. Absent on
    /// syntax errors and failed repairs.
    pub repaired: Option<String>,
    pub input_ast: Option<AstNode>,
    pub repaired_ast: Option<AstNode>,
}

pub fn function_count(root: &AstNode) -> usize {
    root.list("ext").iter().filter(|n| n.is(NodeKind::FuncDef)).count()
}

/// Detection step only. Returns the grouped undeclared uses and, in neural
/// mode, the back-substituted identifiers.
pub fn detect(root: &AstNode, detector: Detector<'_>) -> Result<(Vec<UndeclaredUse>, Vec<String>), DriverError> {
    let scopes = build_scopes(root).map_err(|e| DriverError::Invalid(e.to_string()))?;
    match detector {
        Detector::Oracle => Ok((find_undeclared(root, &scopes), Vec::new())),
        Detector::Neural { model, vocab } => {
            let mut resolved: BTreeMap<String, String> = BTreeMap::new();
            let mut backsubstituted = Vec::new();
            let mut failure = None;
            let uses = find_undeclared_by(root, &scopes, |name| {
                if let Some(found) = resolved.get(name) {
                    return found.clone();
                }
                let predicted = match neural_decl_name(model, vocab, name) {
                    Ok(p) => p,
                    Err(e) => {
                        failure.get_or_insert(e);
                        None
                    }
                };
                let decl = predicted.unwrap_or_else(|| {
                    backsubstituted.push(name.to_string());
                    name.to_string()
                });
                resolved.insert(name.to_string(), decl.clone());
                decl
            });
            if let Some(e) = failure {
                return Err(e.into());
            }
            Ok((uses, backsubstituted))
        }
    }
}

/// Identifier named by the predicted `Decl` code, or `None` when the key is
/// unseen or the prediction does not decode to a `Decl` identifier.
fn neural_decl_name(model: &TrainedModel, vocab: &Vocabulary, name: &str) -> Result<Option<String>, NetError> {
    let Some(key) = vocab.id_code(name) else {
        return Ok(None);
    };
    let p = predict_declaration(model, vocab, key)?;
    if p.unseen {
        return Ok(None);
    }
    let Ok((n, t)) = decompose(p.decl) else {
        return Ok(None);
    };
    if n != encode_nonterminal(NodeKind::Decl) {
        return Ok(None);
    }
    Ok(vocab.lexeme(t).map(str::to_string))
}

/// Full pipeline on in-memory source.
pub fn fix_source(source: &str, file: &str, detector: Detector<'_>, opts: &FixOptions) -> Result<FixOutcome, DriverError> {
    let mut report = FixReport {
        file: file.to_string(),
        mode: detector.mode(),
        status: Status::Clean,
        undeclared: Vec::new(),
        unresolved_callees: Vec::new(),
        warnings: Vec::new(),
        backsubstituted: Vec::new(),
        error: None,
    };
    let failed = |mut report: FixReport, status: Status, message: String, input_ast: Option<AstNode>| {
        report.status = status;
        report.error = Some(message);
        FixOutcome {
            report,
            repaired: None,
            input_ast,
            repaired_ast: None,
        }
    };
    let root = match parse_source(source, file) {
        Ok(r) => r,
        Err(e) => return Ok(failed(report, Status::SyntaxError, e.to_string(), None)),
    };
    let scopes = match build_scopes(&root) {
        Ok(s) => s,
        Err(e) => return Ok(failed(report, Status::SyntaxError, e.to_string(), Some(root))),
    };
    report.unresolved_callees = unresolved_callees(&root, &scopes)
        .into_iter()
        .map(|c| CalleeReport {
            name: c.name,
            site: c.first_call.to_string(),
        })
        .collect();
    let (uses, backsubstituted) = detect(&root, detector)?;
    report.backsubstituted = backsubstituted;
    if uses.is_empty() {
        return Ok(FixOutcome {
            report,
            repaired: Some(source.to_string()),
            repaired_ast: Some(root.clone()),
            input_ast: Some(root),
        });
    }

    let binder = Binder::new(&root, &scopes, opts.bind_options());
    let mut decls = Vec::new();
    for u in &uses {
        let ev = binder.infer(u);
        report.warnings.extend(binder.warnings(u, &ev).into_iter().map(|w| WarningReport {
            kind: w.kind,
            variable: w.variable,
            site: w.site.to_string(),
            message: w.message,
        }));
        report.undeclared.push(UndeclaredReport {
            name: u.name.clone(),
            function: u.enclosing_function.clone(),
            uses: u.all_uses.iter().map(|c| c.to_string()).collect(),
            case_id: ev.case_id,
            ctype: ev.inferred.to_string(),
            array_size: ev.array_size,
            site: ev.site.to_string(),
            bound_from: ev.bound_from.clone(),
        });
        decls.push(SynthesizedDecl::from(&ev));
    }
    drop(binder);

    let repaired_ast = match insert_declarations(&root, &decls) {
        Ok(r) => r,
        Err(e) => return Ok(failed(report, Status::Unfixable, e.to_string(), Some(root))),
    };
    let text = emit(&repaired_ast);
    let verified = parse_source(&text, file)
        .ok()
        .and_then(|r| build_scopes(&r).ok().map(|s| find_undeclared(&r, &s).is_empty()))
        .unwrap_or(false);
    if !verified {
        return Ok(failed(
            report,
            Status::Unfixable,
            "repaired source still has undeclared identifiers".into(),
            Some(root),
        ));
    }
    report.status = Status::Fixed;
    Ok(FixOutcome {
        report,
        repaired: Some(text),
        input_ast: Some(root),
        repaired_ast: Some(repaired_ast),
    })
}

fn read(path: &Path) -> Result<String, DriverError> {
    fs::read_to_string(path).map_err(|e| DriverError::io(path, e))
}

fn display_name(path: &Path) -> String {
    path.to_string_lossy().into_owned()
}

pub fn run_fix(path: &Path, detector: Detector<'_>, opts: &FixOptions) -> Result<FixOutcome, DriverError> {
    let source = read(path)?;
    fix_source(&source, &display_name(path), detector, opts)
}

/// Writes `<stem>.ast.json` and, when repaired, `<stem>.fixed.ast.json`.
pub fn write_ast_json(dir: &Path, path: &Path, outcome: &FixOutcome) -> Result<(), DriverError> {
    fs::create_dir_all(dir).map_err(|e| DriverError::io(dir, e))?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "input".into());
    let items = [("ast", &outcome.input_ast), ("fixed.ast", &outcome.repaired_ast)];
    for (suffix, tree) in items {
        if let Some(tree) = tree {
            let target = dir.join(format!("{stem}.{suffix}.json"));
            fs::write(&target, serialize_ast(tree)).map_err(|e| DriverError::io(&target, e))?;
        }
    }
    Ok(())
}

/// `.c` files under `dir`, sorted by path.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, DriverError> {
    let mut out = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().map(Path::to_path_buf).unwrap_or_else(|| dir.to_path_buf());
            DriverError::io(path, e.into())
        })?;
        if entry.file_type().is_file() && entry.path().extension().is_some_and(|x| x == "c") {
            out.push(entry.into_path());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainSummary {
    pub files: usize,
    pub vocab_size: usize,
    pub pairs: usize,
    pub train_keys: usize,
    pub heldout_keys: usize,
    pub epochs: usize,
    pub final_loss: f64,
    pub training_recall: f64,
    pub history: LossHistory,
}

pub fn build_corpus_vocabulary(corpus: &Path) -> Result<(Vec<PathBuf>, Vocabulary), DriverError> {
    let files = corpus_files(corpus)?;
    let mut roots = Vec::with_capacity(files.len());
    for f in &files {
        roots.push(parse_source(&read(f)?, &display_name(f))?);
    }
    Ok((files, build_vocabulary(&roots)?))
}

/// Builds the corpus vocabulary, trains, and writes the model with its
/// vocabulary sidecar.
pub fn run_train(corpus: &Path, config: &ModelConfig, out: &Path) -> Result<TrainSummary, DriverError> {
    let (files, vocab) = build_corpus_vocabulary(corpus)?;
    let outcome = neuralnet::train(config, &vocab)?;
    neuralnet::format::save(out, &outcome.trained, &vocab)?;
    Ok(TrainSummary {
        files: files.len(),
        vocab_size: vocab.len(),
        pairs: vocab.pairs.len(),
        train_keys: outcome.trained.train_keys.len(),
        heldout_keys: outcome.heldout_keys.len(),
        epochs: config.epochs,
        final_loss: outcome.history.train.last().copied().unwrap_or(f64::NAN),
        training_recall: training_recall(&outcome.trained, &vocab)?,
        history: outcome.history,
    })
}

/// Runs the pipeline over every corpus file and scores it against
/// `<stem>.truth.json` in `truth_dir`.
pub fn run_eval(corpus: &Path, truth_dir: &Path, detector: Detector<'_>, opts: &FixOptions) -> Result<EvalReport, DriverError> {
    let mut items = Vec::new();
    for path in corpus_files(corpus)? {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let truth_path = truth_dir.join(format!("{stem}.truth.json"));
        if !truth_path.is_file() {
            return Err(DriverError::MissingTruth(display_name(&path)));
        }
        let truth: TruthAnnotation = serde_json::from_str(&read(&truth_path)?).map_err(|source| DriverError::Json {
            path: truth_path.clone(),
            source,
        })?;
        let outcome = run_fix(&path, detector, opts)?;
        let functions = outcome.input_ast.as_ref().map(function_count).unwrap_or(0);
        let flagged = outcome
            .report
            .undeclared
            .iter()
            .map(|u| Flagged {
                name: u.name.clone(),
                ctype: u.ctype.clone(),
                array_size: u.array_size,
            })
            .collect();
        items.push((
            truth,
            FileResult {
                file: display_name(&path),
                flagged,
                functions,
            },
        ));
    }
    let mode = match detector.mode() {
        Mode::Oracle => "oracle",
        Mode::Neural => "neural",
    };
    Ok(evaluate(mode, &items))
}

/// Writes `corpus/<id>.c` and `truth/<id>.truth.json` for the fixtures that
/// have a golden repair, or for all of them.
pub fn export_fixtures(out: &Path, all: bool) -> Result<Vec<FixtureCase>, DriverError> {
    let cases: Vec<FixtureCase> = load_fixtures()
        .map_err(|e| DriverError::Invalid(e.to_string()))?
        .into_iter()
        .filter(|c| all || c.golden_fixed_source.is_some())
        .collect();
    let corpus = out.join("corpus");
    let truth = out.join("truth");
    for dir in [&corpus, &truth] {
        fs::create_dir_all(dir).map_err(|e| DriverError::io(dir, e))?;
    }
    for c in &cases {
        let src = corpus.join(c.file_name());
        fs::write(&src, &c.buggy_source).map_err(|e| DriverError::io(&src, e))?;
        let t = truth.join(format!("{}.truth.json", c.id));
        let mut text = serde_json::to_string_pretty(&c.truth).expect("truth serializes");
        text.push('\n');
        fs::write(&t, text).map_err(|e| DriverError::io(&t, e))?;
    }
    Ok(cases)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_program_is_returned_unchanged() {
        let src = "int main(){return 0;}";
        let out = fix_source(src, "c.c", Detector::Oracle, &FixOptions::default()).unwrap();
        assert_eq!(out.report.status, Status::Clean);
        assert_eq!(out.repaired.as_deref(), Some(src));
        assert_eq!(out.report.status.exit_code(), 0);
    }

    #[test]
    fn first_figure_is_fixed_with_rule_one() {
        let case = load_fixtures().unwrap().into_iter().find(|c| c.id == "fig-1").unwrap();
        let out = fix_source(&case.buggy_source, "fig-1.c", Detector::Oracle, &FixOptions::default()).unwrap();
        assert_eq!(out.report.status, Status::Fixed);
        let u = &out.report.undeclared;
        assert_eq!(u.len(), 1);
        assert_eq!((u[0].name.as_str(), u[0].case_id, u[0].ctype.as_str()), ("s", 1, "int"));
        assert!(out.repaired.unwrap().contains("int s;"));
    }

    #[test]
    fn syntax_errors_exit_with_one() {
        let out = fix_source("int main( {", "bad.c", Detector::Oracle, &FixOptions::default()).unwrap();
        assert_eq!(out.report.status, Status::SyntaxError);
        assert_eq!(out.report.status.exit_code(), 1);
        assert!(out.report.error.unwrap().starts_with("bad.c:1:"));
    }

    #[test]
    fn report_json_field_names() {
        let out = fix_source("int main(){ x = 2.5; return 0; }", "x.c", Detector::Oracle, &FixOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.report.to_json()).unwrap();
        assert_eq!(v["status"], "fixed");
        assert_eq!(v["mode"], "oracle");
        assert_eq!(v["undeclared"][0]["type"], "double");
        assert_eq!(v["undeclared"][0]["case_id"], 1);
        assert_eq!(v["undeclared"][0]["uses"][0], "x.c:1:13");
    }

    #[test]
    fn eval_requires_truth() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("c");
        fs::create_dir_all(&corpus).unwrap();
        fs::write(corpus.join("a.c"), "int main(){return 0;}").unwrap();
        let err = run_eval(&corpus, dir.path(), Detector::Oracle, &FixOptions::default()).unwrap_err();
        assert!(matches!(err, DriverError::MissingTruth(_)));
    }

    #[test]
    fn empty_corpus_cannot_train() {
        let dir = tempfile::tempdir().unwrap();
        let err = run_train(dir.path(), &ModelConfig::desk(), &dir.path().join("m")).unwrap_err();
        assert!(matches!(err, DriverError::Net(NetError::EmptyDataset)));
    }
}
