use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ModelConfig, OutputMode};
use super::model::{Example, Model, Params};
use super::optim::RmsProp;
use crate::error::NetError;
use crate::tokencode::{TrainingPair, Vocabulary};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LossHistory {
    /// Mean per-example training loss of each epoch, dropout active.
    pub train: Vec<f64>,
    /// Mean loss on the held-out pairs after each epoch; empty when nothing
    /// is held out.
    pub validation: Vec<f64>,
}

/// A model plus what it needs to interpret a vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub model: Model,
    /// `ID` codes the model was fitted on, in split order.
    pub train_keys: Vec<u64>,
    pub vocab_digest: [u8; 32],
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub trained: TrainedModel,
    pub history: LossHistory,
    pub heldout_keys: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DeclPrediction {
    pub decl: u64,
    pub typedecl: u64,
    pub identifiertype: u64,
    /// The key was not among the training keys.
    pub unseen: bool,
}

fn index(vocab: &Vocabulary, code: u64) -> Result<usize, NetError> {
    vocab.index_of(code).ok_or(NetError::UnknownToken(code))
}

pub fn examples(pair: &TrainingPair, vocab: &Vocabulary, mode: OutputMode) -> Result<Vec<Example>, NetError> {
    let [d, t, i] = pair.targets();
    let (key, d, t, i) = (index(vocab, pair.input)?, index(vocab, d)?, index(vocab, t)?, index(vocab, i)?);
    Ok(match mode {
        OutputMode::ThreeHead => vec![Example {
            input: vec![key],
            targets: vec![d, t, i],
        }],
        OutputMode::Chained => vec![
            Example {
                input: vec![key],
                targets: vec![d],
            },
            Example {
                input: vec![d],
                targets: vec![t],
            },
            Example {
                input: vec![t],
                targets: vec![i],
            },
        ],
    })
}

/// Seeded shuffle, then the first `fraction` of the pairs (at least one)
/// train and the rest are held out.
pub fn split_pairs(pairs: &[TrainingPair], fraction: f64, rng: &mut ChaCha8Rng) -> (Vec<TrainingPair>, Vec<TrainingPair>) {
    let mut shuffled = pairs.to_vec();
    shuffled.shuffle(rng);
    let n = shuffled.len();
    let n_train = ((n as f64 * fraction).round() as usize).clamp(1.min(n), n);
    let heldout = shuffled.split_off(n_train);
    (shuffled, heldout)
}

fn mean_loss(model: &Model, examples: &[Example]) -> Result<f64, NetError> {
    Ok(model.batch_loss(examples)? / examples.len() as f64)
}

pub fn train(config: &ModelConfig, vocab: &Vocabulary) -> Result<TrainOutcome, NetError> {
    config.validate()?;
    if vocab.pairs.is_empty() {
        return Err(NetError::EmptyDataset);
    }
    if config.seq_len != 1 {
        return Err(NetError::Config("training pairs are single tokens; seq_len must be 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let (train_pairs, heldout) = split_pairs(&vocab.pairs, config.split_fraction, &mut rng);
    let mut model = Model::new(config.clone(), vocab.len(), &mut rng)?;
    let mut train_set = Vec::new();
    for p in &train_pairs {
        train_set.extend(examples(p, vocab, config.output_mode)?);
    }
    let mut valid_set = Vec::new();
    for p in &heldout {
        valid_set.extend(examples(p, vocab, config.output_mode)?);
    }
    let mut optimizer = RmsProp::new(&model.params, config.learning_rate);
    let mut grads = Params::zeros(config, vocab.len());
    let mut history = LossHistory::default();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<Example> = chunk.iter().map(|&i| train_set[i].clone()).collect();
            grads.zero();
            total += model.accumulate(&batch, &mut grads, Some(&mut rng))?;
            optimizer.step(&mut model.params, &grads);
        }
        history.train.push(total / train_set.len() as f64);
        if !valid_set.is_empty() {
            history.validation.push(mean_loss(&model, &valid_set)?);
        }
    }
    Ok(TrainOutcome {
        trained: TrainedModel {
            model,
            train_keys: train_pairs.iter().map(|p| p.input).collect(),
            vocab_digest: vocab.digest(),
        },
        history,
        heldout_keys: heldout.iter().map(|p| p.input).collect(),
    })
}

/// Predicts `(Decl, TypeDecl, IdentifierType)` codes for an `ID` key. Keys
/// outside the vocabulary are fed as a zero embedding.
pub fn predict_declaration(trained: &TrainedModel, vocab: &Vocabulary, id_code: u64) -> Result<DeclPrediction, NetError> {
    let model = &trained.model;
    let unseen = !trained.train_keys.contains(&id_code);
    let first = match vocab.index_of(id_code) {
        Some(i) => model.forward_indices(&[i])?,
        None => model.forward_unknown()?,
    };
    let codes = match model.config.output_mode {
        OutputMode::ThreeHead => {
            let mut out = [0u64; 3];
            for (slot, y_hat) in out.iter_mut().zip(first) {
                *slot = model.decode(vocab, y_hat)?.decoded;
            }
            out
        }
        OutputMode::Chained => {
            let decl = model.decode(vocab, first.into_iter().next().unwrap_or_default())?;
            let next = |prev: usize| -> Result<_, NetError> {
                let y = model.forward_indices(&[prev])?.into_iter().next().unwrap_or_default();
                model.decode(vocab, y)
            };
            let typedecl = next(decl.argmax_index)?;
            let identifiertype = next(typedecl.argmax_index)?;
            [decl.decoded, typedecl.decoded, identifiertype.decoded]
        }
    };
    Ok(DeclPrediction {
        decl: codes[0],
        typedecl: codes[1],
        identifiertype: codes[2],
        unseen,
    })
}

/// Fraction of training keys whose predicted triple equals the stored one.
pub fn training_recall(trained: &TrainedModel, vocab: &Vocabulary) -> Result<f64, NetError> {
    if trained.train_keys.is_empty() {
        return Ok(0.0);
    }
    let mut hits = 0;
    for &key in &trained.train_keys {
        let Some(pair) = vocab.pairs.iter().find(|p| p.input == key) else {
            continue;
        };
        let p = predict_declaration(trained, vocab, key)?;
        if [p.decl, p.typedecl, p.identifiertype] == pair.targets() {
            hits += 1;
        }
    }
    Ok(hits as f64 / trained.train_keys.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cparse::parse_source;
    use crate::tokencode::{build_vocabulary, decompose};

    fn corpus_vocab() -> Vocabulary {
        let a = parse_source("int main(){int j,k; j=1; k=j+2; return 0;}", "a.c").unwrap();
        let b = parse_source("int f(int x){int y; y=x*2; return y;}", "b.c").unwrap();
        build_vocabulary(&[a, b]).unwrap()
    }

    fn small(epochs: usize) -> ModelConfig {
        ModelConfig {
            embedding_dim: 8,
            hidden_units: 8,
            dropout: 0.0,
            split_fraction: 1.0,
            epochs,
            rng_seed: 11,
            ..ModelConfig::default()
        }
    }

    #[test]
    fn empty_vocabulary_is_rejected() {
        assert!(matches!(train(&small(1), &Vocabulary::default()), Err(NetError::EmptyDataset)));
    }

    #[test]
    fn memorizes_the_declaration_triples() {
        let vocab = corpus_vocab();
        for mode in [OutputMode::ThreeHead, OutputMode::Chained] {
            let config = ModelConfig {
                output_mode: mode,
                ..small(300)
            };
            let out = train(&config, &vocab).unwrap();
            assert_eq!(training_recall(&out.trained, &vocab).unwrap(), 1.0, "{mode:?}");
            let j = vocab.id_code("j").unwrap();
            let p = predict_declaration(&out.trained, &vocab, j).unwrap();
            let pair = vocab.pairs.iter().find(|p| p.input == j).unwrap();
            assert_eq!([p.decl, p.typedecl, p.identifiertype], pair.targets());
            assert!(!p.unseen);
        }
    }

    #[test]
    fn seeded_training_is_reproducible() {
        let vocab = corpus_vocab();
        let config = ModelConfig {
            dropout: 0.5,
            split_fraction: 0.8,
            ..small(20)
        };
        let a = train(&config, &vocab).unwrap();
        let b = train(&config, &vocab).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.trained, b.trained);
        assert_eq!(a.heldout_keys.len() + a.trained.train_keys.len(), vocab.pairs.len());
        assert_eq!(a.history.validation.len(), 20);
    }

    #[test]
    fn windowed_loss_does_not_increase_while_memorizing() {
        let vocab = corpus_vocab();
        let out = train(&small(200), &vocab).unwrap();
        let means: Vec<f64> = out.history.train.chunks(10).map(|w| w.iter().sum::<f64>() / w.len() as f64).collect();
        for pair in means.windows(2) {
            assert!(pair[1] <= pair[0], "{means:?}");
        }
    }

    #[test]
    fn one_pair_converges() {
        let src = parse_source("int main(){q=1; return 0;}", "q.c").unwrap();
        let vocab = build_vocabulary(&[src]).unwrap();
        let out = train(&small(500), &vocab).unwrap();
        assert!(*out.history.train.last().unwrap() < 0.01);
    }

    #[test]
    fn unseen_keys_still_decode() {
        let vocab = corpus_vocab();
        let out = train(&small(5), &vocab).unwrap();
        let p = predict_declaration(&out.trained, &vocab, 12_999_999).unwrap();
        assert!(p.unseen);
        for code in [p.decl, p.typedecl, p.identifiertype] {
            assert!(decompose(code).is_ok());
        }
    }
}
