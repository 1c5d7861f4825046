use criterion::{criterion_group, criterion_main, Criterion};
use declfix_core::neuralnet::{Example, Model, ModelConfig, Params, RmsProp};
use declfix_core::{fix_source, generate_program, load_fixtures, parse_source, Detector, FixOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn parse(c: &mut Criterion) {
    let src = generate_program(1, 200);
    c.bench_function("parse 200 statements", |b| b.iter(|| parse_source(&src, "gen.c").unwrap()));
}

fn fix(c: &mut Criterion) {
    let cases = load_fixtures().unwrap();
    let options = FixOptions::default();
    c.bench_function("oracle fix 13 fixtures", |b| {
        b.iter(|| {
            for case in &cases {
                fix_source(&case.buggy_source, &case.file_name(), Detector::Oracle, &options).unwrap();
            }
        })
    });
}

fn train_step(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let vocab = 67;
    for units in [64, 512] {
        let config = ModelConfig {
            embedding_dim: units,
            hidden_units: units,
            ..ModelConfig::default()
        };
        let mut model = Model::new(config.clone(), vocab, &mut rng).unwrap();
        let batch: Vec<Example> = (0..config.batch_size)
            .map(|_| Example {
                input: vec![rng.gen_range(0..vocab)],
                targets: (0..3).map(|_| rng.gen_range(0..vocab)).collect(),
            })
            .collect();
        let mut opt = RmsProp::new(&model.params, config.learning_rate);
        let mut grads = Params::zeros(&config, vocab);
        c.bench_function(&format!("train step K={units}"), |b| {
            b.iter(|| {
                let (_, g) = model.gradients(&batch).unwrap();
                grads = g;
                opt.step(&mut model.params, &grads);
            })
        });
    }
}

criterion_group!(benches, parse, fix, train_step);
criterion_main!(benches);
