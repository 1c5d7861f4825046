use declfix_core::neuralnet::{Example, Model, ModelConfig, Nonlinearity, OutputMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-5;

/// `loss(θ+) − loss(θ−)` summed term by term from the logits, so the
/// difference is not lost to cancellation between two large loss values.
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

/// Largest relative error between analytic and central-difference
/// gradients over every parameter component, with magnitudes floored at
/// 1e-6.
fn max_relative_error(model: &Model, batch: &[Example]) -> f64 {
    let (_, analytic) = model.gradients(batch).unwrap();
    let analytic: Vec<Vec<f64>> = analytic.named().into_iter().map(|(_, t)| t.data.clone()).collect();
    let mut up = model.clone();
    let mut down = model.clone();
    let mut worst: f64 = 0.0;
    for (ti, grads) in analytic.iter().enumerate() {
        for (i, &a) in grads.iter().enumerate() {
            let orig = model.params.named()[ti].1.data[i];
            up.params.tensors_mut()[ti].data[i] = orig + EPS;
            down.params.tensors_mut()[ti].data[i] = orig - EPS;
            let numeric = loss_difference(&up, &down, batch) / (2.0 * EPS);
            up.params.tensors_mut()[ti].data[i] = orig;
            down.params.tensors_mut()[ti].data[i] = orig;
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
        }
    }
    worst
}

fn random_batch(rng: &mut ChaCha8Rng, config: &ModelConfig, vocab: usize) -> Vec<Example> {
    (0..config.batch_size)
        .map(|_| Example {
            input: (0..config.seq_len).map(|_| rng.gen_range(0..vocab)).collect(),
            targets: (0..config.heads()).map(|_| rng.gen_range(0..vocab)).collect(),
        })
        .collect()
}

fn check(config: ModelConfig, vocab: usize, batches: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..batches {
        let model = Model::new(config.clone(), vocab, &mut rng).unwrap();
        let batch = random_batch(&mut rng, &config, vocab);
        worst = worst.max(max_relative_error(&model, &batch));
    }
    worst
}

fn tiny() -> ModelConfig {
    ModelConfig {
        embedding_dim: 8,
        hidden_units: 8,
        dropout: 0.0,
        seq_len: 3,
        ..ModelConfig::default()
    }
}

#[test]
fn three_head_sigmoid_candidate() {
    let worst = check(tiny(), 20, 5, 1);
    assert!(worst < 1e-4, "max relative error {worst:e}");
}

#[test]
fn tanh_candidate_and_chained_head() {
    let config = ModelConfig {
        candidate_nonlinearity: Nonlinearity::Tanh,
        output_mode: OutputMode::Chained,
        num_lstm_layers: 3,
        ..tiny()
    };
    let worst = check(config, 20, 3, 2);
    assert!(worst < 1e-4, "max relative error {worst:e}");
}

#[test]
fn larger_model_single_step() {
    let config = ModelConfig {
        embedding_dim: 16,
        hidden_units: 16,
        seq_len: 1,
        ..tiny()
    };
    let worst = check(config, 32, 1, 3);
    assert!(worst < 1e-4, "max relative error {worst:e}");
}
