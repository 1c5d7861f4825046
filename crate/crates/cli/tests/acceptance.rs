//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any fails.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use declfix_core::ast::NodeKind;
use declfix_core::cparse::tokenize;
use declfix_core::eval::{ExpectedDecl, TruthAnnotation};
use declfix_core::fixtures::{generate_program, load_fixtures, FixtureCase, MAX_STATEMENTS};
use declfix_core::neuralnet::{lstm_step, softmax, step_cached, Example, LstmLayerParams, LstmState, Model, ModelConfig, Nonlinearity};
use declfix_core::tokencode::{compose, decompose, encode_nonterminal, DATATYPE_CODE};
use declfix_core::{build_scopes, deserialize_ast, emit, find_undeclared, parse_source, serialize_ast};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

fn declfix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_declfix"))
        .args(args)
        .output()
        .expect("declfix runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn check(cond: bool, message: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message.into())
    }
}

fn lexemes(src: &str) -> Result<Vec<String>, String> {
    tokenize(src)
        .map(|ts| ts.into_iter().map(|t| t.lexeme).collect())
        .map_err(|e| e.to_string())
}

fn read_json(path: &Path) -> Result<Value, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_case(dir: &Path, case: &FixtureCase) -> PathBuf {
    let path = dir.join(case.file_name());
    fs::write(&path, &case.buggy_source).unwrap();
    path
}

fn nine_case_goldens(work: &Path) -> Outcome {
    let start = Instant::now();
    let mut passed = 0;
    for case in load_fixtures().map_err(|e| e.to_string())? {
        let Some(golden) = &case.golden_fixed_source else {
            continue;
        };
        let input = write_case(work, &case);
        let out = work.join(format!("{}.fixed.c", case.id));
        let report = work.join(format!("{}.report.json", case.id));
        let run = declfix(&["fix", "--oracle", path_str(&input), "-o", path_str(&out), "--report", path_str(&report)]);
        check(run.status.code() == Some(0), format!("{}: exit {:?}", case.id, run.status.code()))?;
        let repaired = fs::read_to_string(&out).map_err(|e| e.to_string())?;
        check(lexemes(&repaired)? == lexemes(golden)?, format!("{}: repaired source differs from golden", case.id))?;
        let r = read_json(&report)?;
        let u = r["undeclared"]
            .as_array()
            .and_then(|a| a.iter().find(|u| u["name"] == case.meta.variable.as_str()))
            .ok_or_else(|| format!("{}: {} not reported", case.id, case.meta.variable))?;
        check(
            u["case_id"] == case.expected_case_id() && u["type"] == case.meta.expected_tool_type.as_str(),
            format!("{}: got case {} type {}", case.id, u["case_id"], u["type"]),
        )?;
        passed += 1;
    }
    let elapsed = start.elapsed();
    check(passed == 9, format!("{passed}/9 goldens"))?;
    check(elapsed < Duration::from_secs(5), format!("took {elapsed:?}"))?;
    Ok(format!("9/9 token-identical with correct case and type in {elapsed:.2?}"))
}

fn counts(report: &Value) -> Result<[u64; 7], String> {
    let keys = [
        "identified",
        "not_identified",
        "correctly_identified",
        "wrongly_identified",
        "fixed",
        "not_fixed",
        "total",
    ];
    let mut out = [0; 7];
    for (slot, k) in out.iter_mut().zip(keys) {
        *slot = report[k].as_u64().ok_or_else(|| format!("report lacks {k}"))?;
    }
    Ok(out)
}

fn arithmetic_holds(c: [u64; 7]) -> bool {
    let [id, not_id, correct, wrong, fixed, not_fixed, total] = c;
    id + not_id == total && fixed + not_fixed == total && correct + wrong == total && fixed <= correct && correct <= id
}

fn write_truth(dir: &Path, stem: &str, expected: Vec<ExpectedDecl>) {
    let truth = TruthAnnotation {
        file: format!("{stem}.c"),
        expected,
    };
    fs::write(dir.join(format!("{stem}.truth.json")), serde_json::to_string(&truth).unwrap()).unwrap();
}

fn run_eval(corpus: &Path, truth: &Path, report: &Path) -> Result<(Value, String), String> {
    let run = declfix(&["eval", "--corpus", path_str(corpus), "--truth", path_str(truth), "--oracle", "--report", path_str(report)]);
    check(run.status.success(), String::from_utf8_lossy(&run.stderr).into_owned())?;
    Ok((read_json(report)?, String::from_utf8_lossy(&run.stdout).into_owned()))
}

fn detection_metrics(work: &Path) -> Outcome {
    let export = declfix(&["fixtures", "export", "--out", path_str(work)]);
    check(export.status.success(), "fixture export failed")?;
    let (report, table) = run_eval(&work.join("corpus"), &work.join("truth"), &work.join("fixtures.json"))?;
    let c = counts(&report)?;
    check(c[0] == 9 && c[2] == 9 && c[4] == 9 && c[6] == 9, format!("fixture counts {c:?}"))?;
    for header in ["Identified", "Not identified", "Correct (TP)", "Wrong (FP)", "Fixed", "Not fixed", "Total", "9 (100.0%)"] {
        check(table.contains(header), format!("table lacks {header:?}"))?;
    }

    let clean = work.join("clean");
    let clean_truth = work.join("clean-truth");
    fs::create_dir_all(&clean).unwrap();
    fs::create_dir_all(&clean_truth).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..1000u64 {
        let stem = format!("gen{i:04}");
        fs::write(clean.join(format!("{stem}.c")), generate_program(i, rng.gen_range(1..=60))).unwrap();
        write_truth(&clean_truth, &stem, Vec::new());
    }
    let (report, _) = run_eval(&clean, &clean_truth, &work.join("clean.json"))?;
    let c = counts(&report)?;
    check(c[0] == 0 && c[6] == 1000 && arithmetic_holds(c), format!("clean corpus counts {c:?}"))?;

    // Mixed corpus: a random subset loses one scalar declaration.
    let mixed = work.join("mixed");
    let mixed_truth = work.join("mixed-truth");
    fs::create_dir_all(&mixed).unwrap();
    fs::create_dir_all(&mixed_truth).unwrap();
    for i in 0..200u64 {
        let stem = format!("mix{i:03}");
        let src = generate_program(10_000 + i, rng.gen_range(5..=80));
        let mut expected = Vec::new();
        let mut lines: Vec<&str> = src.lines().collect();
        if rng.gen_bool(0.5) {
            let decls: Vec<usize> = (0..lines.len())
                .filter(|&k| lines[k].starts_with("  int i") || lines[k].starts_with("  double d"))
                .collect();
            let k = decls[rng.gen_range(0..decls.len())];
            let mut words = lines[k].split_whitespace();
            let ty = words.next().unwrap().to_string();
            let name = words.next().unwrap().to_string();
            lines.remove(k);
            expected.push(ExpectedDecl {
                name,
                expected_type: ty,
                expected_array_size: None,
            });
        }
        fs::write(mixed.join(format!("{stem}.c")), lines.join("\n") + "\n").unwrap();
        write_truth(&mixed_truth, &stem, expected);
    }
    let (report, _) = run_eval(&mixed, &mixed_truth, &work.join("mixed.json"))?;
    let m = counts(&report)?;
    check(arithmetic_holds(m), format!("mixed corpus counts {m:?}"))?;
    for row in report["categories"].as_array().ok_or("no categories")? {
        check(arithmetic_holds(counts(row)?), format!("category row {row}"))?;
    }
    Ok(format!(
        "fixtures 9/9/9 of 9; 1000 clean programs identified=0; mixed corpus counts {m:?} consistent"
    ))
}

fn known_failures(work: &Path) -> Outcome {
    let cases = load_fixtures().map_err(|e| e.to_string())?;
    let find = |id: &str| cases.iter().find(|c| c.id == id).ok_or(format!("{id} missing"));

    let a = find("fig-16a")?;
    let input = write_case(work, a);
    let out = work.join("fig-16a.fixed.c");
    let run = declfix(&["fix", "--oracle", path_str(&input), "-o", path_str(&out), "--json"]);
    let report: Value = serde_json::from_slice(&run.stdout).map_err(|e| e.to_string())?;
    let repaired = fs::read_to_string(&out).map_err(|e| e.to_string())?;
    check(parse_source(&repaired, "fig-16a.c").is_ok(), "fig-16a repair does not parse")?;
    let loop_risk = report["warnings"]
        .as_array()
        .is_some_and(|ws| ws.iter().any(|w| w["variable"] == "J" && w["kind"] == "loop-risk"));
    check(loop_risk, "fig-16a: no loop-risk warning for J")?;

    let b = find("fig-16b")?;
    let input = write_case(work, b);
    let run = declfix(&["fix", "--oracle", path_str(&input), "--json"]);
    let report: Value = serde_json::from_slice(&run.stdout).map_err(|e| e.to_string())?;
    let l = report["undeclared"]
        .as_array()
        .and_then(|a| a.iter().find(|u| u["name"] == "l"))
        .ok_or("fig-16b: l not reported")?;
    let truth = b.truth.expected.iter().find(|e| e.name == "l").ok_or("fig-16b truth lacks l")?;
    check(l["type"] == "int", format!("fig-16b: bound {}", l["type"]))?;
    check(truth.expected_type == "double", "fig-16b truth is not double")?;
    Ok("fig-16a parses with loop-risk warning on J; fig-16b binds int for l against truth double".into())
}

fn round_trips() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut statements = 0;
    for seed in 0..1000u64 {
        let size = rng.gen_range(1..=MAX_STATEMENTS);
        statements += size;
        let src = generate_program(seed, size);
        let root = parse_source(&src, "gen.c").map_err(|e| format!("seed {seed}: {e}"))?;
        let back = deserialize_ast(&serialize_ast(&root)).map_err(|e| format!("seed {seed}: {e}"))?;
        check(back == root, format!("seed {seed}: serialize/deserialize differs"))?;
        let reparsed = parse_source(&emit(&root), "gen.c").map_err(|e| format!("seed {seed}: {e}"))?;
        check(reparsed.without_coords() == root.without_coords(), format!("seed {seed}: emit/parse differs"))?;
        let scopes = build_scopes(&root).map_err(|e| e.to_string())?;
        check(find_undeclared(&root, &scopes).is_empty(), format!("seed {seed}: generator left an undeclared use"))?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(60), format!("took {elapsed:?}"))?;
    Ok(format!("1000 programs ({statements} statements budgeted), 0 failures in {elapsed:.2?}"))
}

/// `loss(θ+) − loss(θ−)` from the logits, avoiding cancellation between
/// two large totals.
fn loss_difference(up: &Model, down: &Model, batch: &[Example]) -> f64 {
    let mut total = 0.0;
    for ex in batch {
        let zu = up.logits(&ex.input).unwrap();
        let zd = down.logits(&ex.input).unwrap();
        for ((zu, zd), &t) in zu.iter().zip(&zd).zip(&ex.targets) {
            let m = zd.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let base: f64 = zd.iter().map(|z| (z - m).exp()).sum();
            let delta: f64 = zu.iter().zip(zd).map(|(u, d)| (d - m).exp() * (u - d).exp_m1()).sum();
            total += (delta / base).ln_1p() - (zu[t] - zd[t]);
        }
    }
    total
}

fn gradient_check() -> Outcome {
    const EPS: f64 = 1e-5;
    let config = ModelConfig {
        embedding_dim: 8,
        hidden_units: 8,
        dropout: 0.0,
        seq_len: 2,
        ..ModelConfig::default()
    };
    let vocab = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut components = 0;
    for _ in 0..20 {
        let model = Model::new(config.clone(), vocab, &mut rng).map_err(|e| e.to_string())?;
        let batch: Vec<Example> = (0..config.batch_size)
            .map(|_| Example {
                input: (0..config.seq_len).map(|_| rng.gen_range(0..vocab)).collect(),
                targets: (0..config.heads()).map(|_| rng.gen_range(0..vocab)).collect(),
            })
            .collect();
        let (_, grads) = model.gradients(&batch).map_err(|e| e.to_string())?;
        let grads: Vec<Vec<f64>> = grads.named().into_iter().map(|(_, t)| t.data.clone()).collect();
        let (mut up, mut down) = (model.clone(), model.clone());
        for (ti, g) in grads.iter().enumerate() {
            for (i, &a) in g.iter().enumerate() {
                let orig = model.params.named()[ti].1.data[i];
                up.params.tensors_mut()[ti].data[i] = orig + EPS;
                down.params.tensors_mut()[ti].data[i] = orig - EPS;
                let numeric = loss_difference(&up, &down, &batch) / (2.0 * EPS);
                up.params.tensors_mut()[ti].data[i] = orig;
                down.params.tensors_mut()[ti].data[i] = orig;
                worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6));
                components += 1;
            }
        }
    }
    check(worst < 1e-4, format!("max relative error {worst:e}"))?;
    Ok(format!("20 batches, {components} components, max relative error {worst:.2e}"))
}

fn lstm_analytic() -> Outcome {
    let p = LstmLayerParams::zeros(6, 5, Nonlinearity::Sigmoid);
    let c = step_cached(&p, &LstmState::zeros(5), &[0.0; 6]).map_err(|e| e.to_string())?;
    let h = 0.25f64.tanh() * 0.5;
    for i in 0..5 {
        check(
            (c.f[i] - 0.5).abs() < 1e-12 && (c.g[i] - 0.5).abs() < 1e-12 && (c.q[i] - 0.5).abs() < 1e-12,
            "gates are not 0.5",
        )?;
        check((c.state.h[i] - h).abs() < 1e-12, format!("h' = {}", c.state.h[i]))?;
    }
    check(lstm_step(&p, &LstmState::zeros(5), &[0.0; 6]).map_err(|e| e.to_string())?.h == c.state.h, "step disagrees")?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=64);
        let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let p = softmax(&z);
        check(p.iter().all(|v| (0.0..=1.0).contains(v)), "softmax output outside [0, 1]")?;
        worst = worst.max((p.iter().sum::<f64>() - 1.0).abs());
    }
    check(worst <= 1e-9, format!("softmax sum off by {worst:e}"))?;
    Ok(format!("f=g=q=0.5, h'=tanh(0.25)*0.5 exact to 1e-12; 10^4 softmax sums within {worst:.1e}"))
}

fn detect_lines(file: &Path, model: Option<&Path>) -> Result<Vec<String>, String> {
    let mut args = vec!["detect", path_str(file)];
    match model {
        Some(m) => args.extend(["--model", path_str(m)]),
        None => args.push("--oracle"),
    }
    let run = declfix(&args);
    check(run.status.success(), String::from_utf8_lossy(&run.stderr).into_owned())?;
    Ok(String::from_utf8_lossy(&run.stdout).lines().map(String::from).collect())
}

const TRAIN_EPOCHS: &str = "2000";
const TRAIN_SEED: &str = "17";

fn train(work: &Path, name: &str) -> Result<(PathBuf, PathBuf, String, Duration), String> {
    let model = work.join(format!("{name}.dfix"));
    let history = work.join(format!("{name}.history.json"));
    let start = Instant::now();
    let run = declfix(&[
        "train",
        "--corpus",
        path_str(&work.join("corpus")),
        "--epochs",
        TRAIN_EPOCHS,
        "--seed",
        TRAIN_SEED,
        "--out",
        path_str(&model),
        "--history",
        path_str(&history),
    ]);
    let elapsed = start.elapsed();
    check(run.status.success(), String::from_utf8_lossy(&run.stderr).into_owned())?;
    Ok((model, history, String::from_utf8_lossy(&run.stdout).into_owned(), elapsed))
}

fn memorization(work: &Path) -> Outcome {
    check(declfix(&["fixtures", "export", "--out", path_str(work)]).status.success(), "export failed")?;
    let (model, _, stdout, elapsed) = train(work, "first")?;
    check(elapsed < Duration::from_secs(180), format!("training took {elapsed:?}"))?;
    check(stdout.contains("training-key recall: 100.0%"), format!("recall below 100%:\n{stdout}"))?;
    let all = work.join("all");
    fs::create_dir_all(&all).unwrap();
    let cases = load_fixtures().map_err(|e| e.to_string())?;
    for case in &cases {
        let file = write_case(&all, case);
        let oracle = detect_lines(&file, None)?;
        let neural = detect_lines(&file, Some(&model))?;
        check(oracle == neural, format!("{}: oracle {oracle:?} vs neural {neural:?}", case.id))?;
    }
    Ok(format!(
        "K=hidden=64, {TRAIN_EPOCHS} epochs in {elapsed:.1?}; recall 100%; neural equals oracle on {} fixture files",
        cases.len()
    ))
}

fn determinism(work: &Path) -> Outcome {
    let (m1, h1, _, _) = train(work, "first")?;
    let (m2, h2, _, _) = train(work, "second")?;
    let read = |p: &Path| fs::read(p).map_err(|e| format!("{}: {e}", p.display()));
    check(read(&m1)? == read(&m2)?, "model files differ")?;
    check(read(&h1)? == read(&h2)?, "loss histories differ")?;
    let bytes = read(&m1)?.len();
    Ok(format!("two seeded runs gave byte-identical model files ({bytes} bytes) and loss histories"))
}

fn encoding() -> Outcome {
    check(compose(9, DATATYPE_CODE) == 9_111_111, "compose(9, 111111)")?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=47);
        let t = rng.gen_range(100_000..=999_999);
        check(decompose(compose(n, t)) == Ok((n, t)), format!("decompose(compose({n}, {t}))"))?;
    }
    let codes: BTreeSet<u64> = NodeKind::ALL.iter().map(|&k| encode_nonterminal(k)).collect();
    check(codes.len() == 47, format!("{} distinct non-terminal codes", codes.len()))?;
    Ok("compose(9, 111111) = 9111111; 10^4 random pairs decompose exactly; 47 distinct non-terminal codes".into())
}

fn main() {
    let root = tempfile::tempdir().expect("temp dir");
    let dir = |name: &str| {
        let d = root.path().join(name);
        fs::create_dir_all(&d).unwrap();
        d
    };
    let train_dir = dir("train");
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        ("nine-case repair goldens", Box::new(|| nine_case_goldens(&dir("goldens")))),
        ("detection metrics shape", Box::new(|| detection_metrics(&dir("eval")))),
        ("known-failure regressions", Box::new(|| known_failures(&dir("known")))),
        ("round-trip properties", Box::new(round_trips)),
        ("gradient correctness", Box::new(gradient_check)),
        ("LSTM analytic cases", Box::new(lstm_analytic)),
        ("memorization and oracle equivalence", Box::new({
            let d = train_dir.clone();
            move || memorization(&d)
        })),
        ("determinism", Box::new(move || determinism(&train_dir))),
        ("encoding fidelity", Box::new(encoding)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
