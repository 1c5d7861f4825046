use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use crate::error::NetError;

/// Squashing function applied to the candidate cell input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Nonlinearity {
    #[default]
    Sigmoid,
    Tanh,
}

impl Nonlinearity {
    fn apply(self, x: f64) -> f64 {
        match self {
            Nonlinearity::Sigmoid => sigmoid(x),
            Nonlinearity::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the activation value `y`.
    fn slope(self, y: f64) -> f64 {
        match self {
            Nonlinearity::Sigmoid => y * (1.0 - y),
            Nonlinearity::Tanh => 1.0 - y * y,
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// One LSTM layer. `u_*` act on the layer input, `w_*` on the previous
/// hidden state, `b_*` are biases. Gate suffixes: `f` forget, `g` input,
/// `o` output; the unsuffixed triple feeds the candidate cell input.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayerParams {
    pub u_f: Tensor,
    pub u_g: Tensor,
    pub u_o: Tensor,
    pub u: Tensor,
    pub w_f: Tensor,
    pub w_g: Tensor,
    pub w_o: Tensor,
    pub w: Tensor,
    pub b_f: Tensor,
    pub b_g: Tensor,
    pub b_o: Tensor,
    pub b: Tensor,
    pub candidate: Nonlinearity,
}

pub(crate) const LAYER_TENSORS: [&str; 12] = [
    "U_f", "U_g", "U_o", "U", "W_f", "W_g", "W_o", "W", "b_f", "b_g", "b_o", "b",
];

impl LstmLayerParams {
    pub fn zeros(input: usize, hidden: usize, candidate: Nonlinearity) -> Self {
        let u = || Tensor::zeros(hidden, input);
        let w = || Tensor::zeros(hidden, hidden);
        let b = || Tensor::zeros(hidden, 1);
        LstmLayerParams {
            u_f: u(),
            u_g: u(),
            u_o: u(),
            u: u(),
            w_f: w(),
            w_g: w(),
            w_o: w(),
            w: w(),
            b_f: b(),
            b_g: b(),
            b_o: b(),
            b: b(),
            candidate,
        }
    }

    /// Glorot-uniform weights, zero biases except a forget bias of 1.
    pub fn random(input: usize, hidden: usize, candidate: Nonlinearity, rng: &mut impl Rng) -> Self {
        let lu = (6.0 / (input + hidden) as f64).sqrt();
        let lw = (6.0 / (2 * hidden) as f64).sqrt();
        let mut p = Self::zeros(input, hidden, candidate);
        for t in [&mut p.u_f, &mut p.u_g, &mut p.u_o, &mut p.u] {
            *t = Tensor::uniform(hidden, input, lu, rng);
        }
        for t in [&mut p.w_f, &mut p.w_g, &mut p.w_o, &mut p.w] {
            *t = Tensor::uniform(hidden, hidden, lw, rng);
        }
        p.b_f.fill(1.0);
        p
    }

    pub fn input_size(&self) -> usize {
        self.u.cols
    }

    pub fn hidden_size(&self) -> usize {
        self.u.rows
    }

    /// Tensors in [`LAYER_TENSORS`] order.
    pub fn tensors(&self) -> [&Tensor; 12] {
        [
            &self.u_f, &self.u_g, &self.u_o, &self.u, &self.w_f, &self.w_g, &self.w_o, &self.w,
            &self.b_f, &self.b_g, &self.b_o, &self.b,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor; 12] {
        [
            &mut self.u_f,
            &mut self.u_g,
            &mut self.u_o,
            &mut self.u,
            &mut self.w_f,
            &mut self.w_g,
            &mut self.w_o,
            &mut self.w,
            &mut self.b_f,
            &mut self.b_g,
            &mut self.b_o,
            &mut self.b,
        ]
    }

    fn preactivation(&self, u: &Tensor, w: &Tensor, b: &Tensor, x: &[f64], h: &[f64]) -> Vec<f64> {
        let mut a = b.data.clone();
        u.matvec_acc(x, &mut a);
        w.matvec_acc(h, &mut a);
        a
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub s: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        LstmState {
            h: vec![0.0; hidden],
            s: vec![0.0; hidden],
        }
    }
}

/// Everything one step computes, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct StepCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub s_prev: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub q: Vec<f64>,
    /// Candidate cell input.
    pub c: Vec<f64>,
    pub tanh_s: Vec<f64>,
    pub state: LstmState,
}

fn check_dims(p: &LstmLayerParams, st: &LstmState, x: &[f64]) -> Result<(), NetError> {
    let (n, k) = (p.hidden_size(), p.input_size());
    if x.len() != k || st.h.len() != n || st.s.len() != n {
        return Err(NetError::Dim(format!(
            "layer expects input {k} and state {n}, got input {} and state {}/{}",
            x.len(),
            st.h.len(),
            st.s.len()
        )));
    }
    Ok(())
}

pub fn step_cached(p: &LstmLayerParams, st: &LstmState, x: &[f64]) -> Result<StepCache, NetError> {
    check_dims(p, st, x)?;
    let h = &st.h;
    let f: Vec<f64> = p.preactivation(&p.u_f, &p.w_f, &p.b_f, x, h).into_iter().map(sigmoid).collect();
    let g: Vec<f64> = p.preactivation(&p.u_g, &p.w_g, &p.b_g, x, h).into_iter().map(sigmoid).collect();
    let q: Vec<f64> = p.preactivation(&p.u_o, &p.w_o, &p.b_o, x, h).into_iter().map(sigmoid).collect();
    let c: Vec<f64> = p
        .preactivation(&p.u, &p.w, &p.b, x, h)
        .into_iter()
        .map(|a| p.candidate.apply(a))
        .collect();
    let s: Vec<f64> = (0..f.len()).map(|i| f[i] * st.s[i] + g[i] * c[i]).collect();
    let tanh_s: Vec<f64> = s.iter().map(|v| v.tanh()).collect();
    let h_new: Vec<f64> = tanh_s.iter().zip(&q).map(|(t, q)| t * q).collect();
    Ok(StepCache {
        x: x.to_vec(),
        h_prev: st.h.clone(),
        s_prev: st.s.clone(),
        f,
        g,
        q,
        c,
        tanh_s,
        state: LstmState { h: h_new, s },
    })
}

/// One time step of the cell:
/// `f = σ(b_f + U_f x + W_f h)`, `g = σ(b_g + U_g x + W_g h)`,
/// `s' = f ⊙ s + g ⊙ σ(b + U x + W h)`, `q = σ(b_o + U_o x + W_o h)`,
/// `h' = tanh(s') ⊙ q`.
pub fn lstm_step(p: &LstmLayerParams, st: &LstmState, x: &[f64]) -> Result<LstmState, NetError> {
    step_cached(p, st, x).map(|c| c.state)
}

/// Gradients flowing out of one step.
pub struct StepGrads {
    pub dx: Vec<f64>,
    pub dh_prev: Vec<f64>,
    pub ds_prev: Vec<f64>,
}

/// Backward pass of one step given the gradients on `h'` and `s'`.
/// Parameter gradients accumulate into `grads`.
pub fn step_backward(
    p: &LstmLayerParams,
    cache: &StepCache,
    dh: &[f64],
    ds_next: &[f64],
    grads: &mut LstmLayerParams,
) -> StepGrads {
    let n = dh.len();
    let mut da_f = vec![0.0; n];
    let mut da_g = vec![0.0; n];
    let mut da_o = vec![0.0; n];
    let mut da_c = vec![0.0; n];
    let mut ds_prev = vec![0.0; n];
    for i in 0..n {
        let (f, g, q, c, t) = (cache.f[i], cache.g[i], cache.q[i], cache.c[i], cache.tanh_s[i]);
        let dq = dh[i] * t;
        let ds = ds_next[i] + dh[i] * q * (1.0 - t * t);
        da_f[i] = ds * cache.s_prev[i] * f * (1.0 - f);
        da_g[i] = ds * c * g * (1.0 - g);
        da_c[i] = ds * g * p.candidate.slope(c);
        da_o[i] = dq * q * (1.0 - q);
        ds_prev[i] = ds * f;
    }
    let mut dx = vec![0.0; cache.x.len()];
    let mut dh_prev = vec![0.0; n];
    let gates = [
        (&da_f, &p.u_f, &p.w_f),
        (&da_g, &p.u_g, &p.w_g),
        (&da_o, &p.u_o, &p.w_o),
        (&da_c, &p.u, &p.w),
    ];
    for (da, u, w) in gates {
        u.tmatvec_acc(da, &mut dx);
        w.tmatvec_acc(da, &mut dh_prev);
    }
    grads.u_f.add_outer(&da_f, &cache.x);
    grads.u_g.add_outer(&da_g, &cache.x);
    grads.u_o.add_outer(&da_o, &cache.x);
    grads.u.add_outer(&da_c, &cache.x);
    grads.w_f.add_outer(&da_f, &cache.h_prev);
    grads.w_g.add_outer(&da_g, &cache.h_prev);
    grads.w_o.add_outer(&da_o, &cache.h_prev);
    grads.w.add_outer(&da_c, &cache.h_prev);
    grads.b_f.add_assign(&da_f);
    grads.b_g.add_assign(&da_g);
    grads.b_o.add_assign(&da_o);
    grads.b.add_assign(&da_c);
    StepGrads { dx, dh_prev, ds_prev }
}
