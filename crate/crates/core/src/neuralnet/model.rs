use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::config::ModelConfig;
use super::lstm::{step_backward, step_cached, LstmLayerParams, LstmState, StepCache, LAYER_TENSORS};
use super::tensor::Tensor;
use crate::error::NetError;
use crate::tokencode::Vocabulary;

pub const LOG_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxLayer {
    /// `V × hidden`
    pub m: Tensor,
    pub b: Tensor,
}

/// Every trainable tensor. Gradients and optimizer state share the shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// `K × V`; column `i` embeds vocabulary entry `i`.
    pub embedding: Tensor,
    pub layers: Vec<LstmLayerParams>,
    pub heads: Vec<SoftmaxLayer>,
}

impl Params {
    pub fn zeros(config: &ModelConfig, vocab_size: usize) -> Self {
        let (k, n) = (config.embedding_dim, config.hidden_units);
        Params {
            embedding: Tensor::zeros(k, vocab_size),
            layers: (0..config.num_lstm_layers)
                .map(|l| LstmLayerParams::zeros(if l == 0 { k } else { n }, n, config.candidate_nonlinearity))
                .collect(),
            heads: (0..config.heads())
                .map(|_| SoftmaxLayer {
                    m: Tensor::zeros(vocab_size, n),
                    b: Tensor::zeros(vocab_size, 1),
                })
                .collect(),
        }
    }

    pub fn random(config: &ModelConfig, vocab_size: usize, rng: &mut impl Rng) -> Self {
        let (k, n) = (config.embedding_dim, config.hidden_units);
        let embedding = Tensor::uniform(k, vocab_size, 0.05, rng);
        let layers = (0..config.num_lstm_layers)
            .map(|l| LstmLayerParams::random(if l == 0 { k } else { n }, n, config.candidate_nonlinearity, rng))
            .collect();
        let limit = (6.0 / (vocab_size + n) as f64).sqrt();
        let heads = (0..config.heads())
            .map(|_| SoftmaxLayer {
                m: Tensor::uniform(vocab_size, n, limit, rng),
                b: Tensor::zeros(vocab_size, 1),
            })
            .collect();
        Params {
            embedding,
            layers,
            heads,
        }
    }

    /// Named tensors in storage order.
    pub fn named(&self) -> Vec<(String, &Tensor)> {
        let mut out = vec![("embedding".to_string(), &self.embedding)];
        for (l, layer) in self.layers.iter().enumerate() {
            for (name, t) in LAYER_TENSORS.iter().zip(layer.tensors()) {
                out.push((format!("lstm.{l}.{name}"), t));
            }
        }
        for (h, head) in self.heads.iter().enumerate() {
            out.push((format!("head.{h}.M"), &head.m));
            out.push((format!("head.{h}.b"), &head.b));
        }
        out
    }

    /// Same order as [`Params::named`].
    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = vec![&mut self.embedding];
        for layer in &mut self.layers {
            out.extend(layer.tensors_mut());
        }
        for head in &mut self.heads {
            out.push(&mut head.m);
            out.push(&mut head.b);
        }
        out
    }

    pub fn zero(&mut self) {
        for t in self.tensors_mut() {
            t.fill(0.0);
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.named().iter().map(|(_, t)| t.data.len()).sum()
    }
}

/// Training or inference example over vocabulary indices. `targets` has one
/// entry per softmax head.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub input: Vec<usize>,
    pub targets: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub y_hat: Vec<f64>,
    pub argmax_index: usize,
    pub decoded: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub vocab_size: usize,
    pub params: Params,
}

struct Trace {
    tokens: Vec<usize>,
    /// `[t][layer]`
    steps: Vec<Vec<StepCache>>,
    /// `[t][layer]` inverted-dropout multipliers, when training.
    masks: Option<Vec<Vec<Vec<f64>>>>,
    top: Vec<f64>,
    probs: Vec<Vec<f64>>,
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = e.iter().sum();
    e.into_iter().map(|v| v / sum).collect()
}

/// Categorical cross-entropy with the logarithm clamped at [`LOG_CLAMP`].
pub fn loss(y_hat: &[f64], target: &[f64]) -> f64 {
    y_hat
        .iter()
        .zip(target)
        .filter(|(_, &t)| t != 0.0)
        .map(|(&p, &t)| -t * p.max(LOG_CLAMP).ln())
        .sum()
}

/// `A · token`; a one-hot token selects a column.
pub fn embed(a: &Tensor, token: &[f64]) -> Result<Vec<f64>, NetError> {
    if token.len() != a.cols {
        return Err(NetError::Dim(format!(
            "token has {} components, embedding has {} columns",
            token.len(),
            a.cols
        )));
    }
    Ok(a.matvec(token))
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

impl Model {
    pub fn new(config: ModelConfig, vocab_size: usize, rng: &mut impl Rng) -> Result<Self, NetError> {
        config.validate()?;
        if vocab_size == 0 {
            return Err(NetError::EmptyDataset);
        }
        let params = Params::random(&config, vocab_size, rng);
        Ok(Model {
            config,
            vocab_size,
            params,
        })
    }

    pub fn zeros(config: ModelConfig, vocab_size: usize) -> Result<Self, NetError> {
        config.validate()?;
        let params = Params::zeros(&config, vocab_size);
        Ok(Model {
            config,
            vocab_size,
            params,
        })
    }

    fn check_tokens(&self, tokens: &[usize]) -> Result<(), NetError> {
        if tokens.len() != self.config.seq_len {
            return Err(NetError::Dim(format!(
                "sequence length {} but the model expects {}",
                tokens.len(),
                self.config.seq_len
            )));
        }
        if let Some(&bad) = tokens.iter().find(|&&t| t >= self.vocab_size) {
            return Err(NetError::Dim(format!("token index {bad} outside vocabulary of {}", self.vocab_size)));
        }
        Ok(())
    }

    fn run(&self, tokens: &[usize], inputs: Vec<Vec<f64>>, mut dropout: Option<&mut ChaCha8Rng>) -> Result<Trace, NetError> {
        let n = self.config.hidden_units;
        let layers = self.params.layers.len();
        let p_drop = self.config.dropout;
        let mut states = vec![LstmState::zeros(n); layers];
        let mut steps = Vec::with_capacity(inputs.len());
        let mut masks = dropout.as_ref().map(|_| Vec::with_capacity(inputs.len()));
        let mut top = Vec::new();
        for x in inputs {
            let mut x = x;
            let mut row = Vec::with_capacity(layers);
            let mut mask_row = Vec::with_capacity(layers);
            for (l, layer) in self.params.layers.iter().enumerate() {
                let cache = step_cached(layer, &states[l], &x)?;
                states[l] = cache.state.clone();
                x = cache.state.h.clone();
                if let Some(rng) = dropout.as_deref_mut() {
                    let keep = 1.0 - p_drop;
                    let mask: Vec<f64> = (0..n)
                        .map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
                        .collect();
                    x.iter_mut().zip(&mask).for_each(|(v, m)| *v *= m);
                    mask_row.push(mask);
                }
                row.push(cache);
            }
            if let Some(m) = masks.as_mut() {
                m.push(mask_row);
            }
            steps.push(row);
            top = x;
        }
        let probs = self
            .params
            .heads
            .iter()
            .map(|head| {
                let mut z = head.b.data.clone();
                head.m.matvec_acc(&top, &mut z);
                softmax(&z)
            })
            .collect();
        Ok(Trace {
            tokens: tokens.to_vec(),
            steps,
            masks,
            top,
            probs,
        })
    }

    fn run_tokens(&self, tokens: &[usize], dropout: Option<&mut ChaCha8Rng>) -> Result<Trace, NetError> {
        self.check_tokens(tokens)?;
        let inputs = tokens.iter().map(|&t| self.params.embedding.column(t)).collect();
        self.run(tokens, inputs, dropout)
    }

    /// Pre-softmax scores of each head; dropout is inactive.
    pub fn logits(&self, tokens: &[usize]) -> Result<Vec<Vec<f64>>, NetError> {
        let top = self.run_tokens(tokens, None)?.top;
        Ok(self
            .params
            .heads
            .iter()
            .map(|head| {
                let mut z = head.b.data.clone();
                head.m.matvec_acc(&top, &mut z);
                z
            })
            .collect())
    }

    /// Output distribution of each head; dropout is inactive.
    pub fn forward_indices(&self, tokens: &[usize]) -> Result<Vec<Vec<f64>>, NetError> {
        Ok(self.run_tokens(tokens, None)?.probs)
    }

    /// Output distributions for an input with no vocabulary entry, fed as a
    /// zero embedding.
    pub fn forward_unknown(&self) -> Result<Vec<Vec<f64>>, NetError> {
        let inputs = vec![vec![0.0; self.config.embedding_dim]; self.config.seq_len];
        Ok(self.run(&[], inputs, None)?.probs)
    }

    /// One prediction per head for a sequence of composite codes.
    pub fn forward(&self, vocab: &Vocabulary, input: &[u64]) -> Result<Vec<Prediction>, NetError> {
        let tokens = input
            .iter()
            .map(|&c| vocab.index_of(c).ok_or(NetError::UnknownToken(c)))
            .collect::<Result<Vec<_>, _>>()?;
        self.forward_indices(&tokens)?
            .into_iter()
            .map(|y_hat| self.decode(vocab, y_hat))
            .collect()
    }

    pub(crate) fn decode(&self, vocab: &Vocabulary, y_hat: Vec<f64>) -> Result<Prediction, NetError> {
        let argmax_index = argmax(&y_hat);
        let decoded = vocab
            .code_at(argmax_index)
            .ok_or_else(|| NetError::Dim(format!("vocabulary has no entry {argmax_index}")))?;
        Ok(Prediction {
            y_hat,
            argmax_index,
            decoded,
        })
    }

    fn check_example(&self, ex: &Example) -> Result<(), NetError> {
        if ex.targets.len() != self.params.heads.len() {
            return Err(NetError::Dim(format!(
                "{} targets for {} heads",
                ex.targets.len(),
                self.params.heads.len()
            )));
        }
        if let Some(&bad) = ex.targets.iter().find(|&&t| t >= self.vocab_size) {
            return Err(NetError::Dim(format!("target index {bad} outside vocabulary")));
        }
        Ok(())
    }

    fn trace_loss(trace: &Trace, targets: &[usize]) -> f64 {
        trace
            .probs
            .iter()
            .zip(targets)
            .map(|(p, &t)| -p[t].max(LOG_CLAMP).ln())
            .sum()
    }

    /// Summed loss of a batch with dropout inactive.
    pub fn batch_loss(&self, batch: &[Example]) -> Result<f64, NetError> {
        let mut total = 0.0;
        for ex in batch {
            self.check_example(ex)?;
            total += Self::trace_loss(&self.run_tokens(&ex.input, None)?, &ex.targets);
        }
        Ok(total)
    }

    /// Backpropagation through time; returns the example loss.
    fn backprop(&self, trace: &Trace, targets: &[usize], grads: &mut Params) -> f64 {
        let n = self.config.hidden_units;
        let layers = self.params.layers.len();
        let mut dtop = vec![0.0; n];
        for ((head, g), (p, &t)) in self.params.heads.iter().zip(&mut grads.heads).zip(trace.probs.iter().zip(targets)) {
            if p[t] < LOG_CLAMP {
                continue;
            }
            let mut dz = p.clone();
            dz[t] -= 1.0;
            g.m.add_outer(&dz, &trace.top);
            g.b.add_assign(&dz);
            head.m.tmatvec_acc(&dz, &mut dtop);
        }
        let mut dh_next = vec![vec![0.0; n]; layers];
        let mut ds_next = vec![vec![0.0; n]; layers];
        let last = trace.steps.len() - 1;
        for t in (0..trace.steps.len()).rev() {
            // Gradient on the output of the layer above, before its mask.
            let mut dout = if t == last { dtop.clone() } else { vec![0.0; n] };
            for l in (0..layers).rev() {
                if let Some(masks) = &trace.masks {
                    dout.iter_mut().zip(&masks[t][l]).for_each(|(d, m)| *d *= m);
                }
                let dh: Vec<f64> = dout.iter().zip(&dh_next[l]).map(|(a, b)| a + b).collect();
                let sg = step_backward(&self.params.layers[l], &trace.steps[t][l], &dh, &ds_next[l], &mut grads.layers[l]);
                dh_next[l] = sg.dh_prev;
                ds_next[l] = sg.ds_prev;
                dout = sg.dx;
            }
            if let Some(&tok) = trace.tokens.get(t) {
                let e = &mut grads.embedding;
                for (k, d) in dout.iter().enumerate() {
                    e.data[k * e.cols + tok] += d;
                }
            }
        }
        Self::trace_loss(trace, targets)
    }

    /// Analytic gradients of the summed batch loss, dropout inactive.
    pub fn gradients(&self, batch: &[Example]) -> Result<(f64, Params), NetError> {
        let mut grads = Params::zeros(&self.config, self.vocab_size);
        let loss = self.accumulate(batch, &mut grads, None)?;
        Ok((loss, grads))
    }

    /// Adds the batch gradient into `grads`, applying dropout when `rng` is
    /// given. Returns the summed loss.
    pub(crate) fn accumulate(&self, batch: &[Example], grads: &mut Params, mut rng: Option<&mut ChaCha8Rng>) -> Result<f64, NetError> {
        let mut total = 0.0;
        for ex in batch {
            self.check_example(ex)?;
            let trace = self.run_tokens(&ex.input, rng.as_deref_mut())?;
            total += self.backprop(&trace, &ex.targets, grads);
        }
        Ok(total)
    }
}
