use super::config::{RMSPROP_EPS, RMSPROP_RHO};
use super::model::Params;

/// Elementwise RMSprop: `v ← ρv + (1−ρ)g²`, `θ ← θ − lr·g/√(v+eps)`.
pub fn rmsprop_update(theta: &mut [f64], grad: &[f64], acc: &mut [f64], lr: f64, rho: f64, eps: f64) {
    for ((t, &g), v) in theta.iter_mut().zip(grad).zip(acc.iter_mut()) {
        *v = rho * *v + (1.0 - rho) * g * g;
        *t -= lr * g / (*v + eps).sqrt();
    }
}

#[derive(Debug, Clone)]
pub struct RmsProp {
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
    acc: Params,
}

impl RmsProp {
    pub fn new(shape: &Params, lr: f64) -> Self {
        let mut acc = shape.clone();
        acc.zero();
        RmsProp {
            lr,
            rho: RMSPROP_RHO,
            eps: RMSPROP_EPS,
            acc,
        }
    }

    pub fn step(&mut self, params: &mut Params, grads: &Params) {
        let grads = grads.named();
        for ((theta, acc), (_, g)) in params.tensors_mut().into_iter().zip(self.acc.tensors_mut()).zip(grads) {
            rmsprop_update(&mut theta.data, &g.data, &mut acc.data, self.lr, self.rho, self.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut theta = [0.3, -1.0];
        let mut acc = [0.0; 2];
        rmsprop_update(&mut theta, &[0.0, 0.0], &mut acc, 0.01, 0.9, 1e-8);
        assert_eq!(theta, [0.3, -1.0]);
    }

    #[test]
    fn first_step_by_hand() {
        let mut theta = [0.0];
        let mut acc = [0.0];
        rmsprop_update(&mut theta, &[1.0], &mut acc, 0.01, 0.9, 1e-8);
        assert!((theta[0] + 0.01 / (0.1f64 + 1e-8).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn constant_gradient_step_approaches_lr() {
        let mut theta = [0.0];
        let mut acc = [0.0];
        let mut last = 0.0;
        for _ in 0..500 {
            let before = theta[0];
            rmsprop_update(&mut theta, &[2.5], &mut acc, 0.01, 0.9, 1e-8);
            last = (theta[0] - before).abs();
        }
        assert!((last - 0.01).abs() < 1e-9);
    }
}
