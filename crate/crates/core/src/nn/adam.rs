use serde::{Deserialize, Serialize};

use super::tensor::{Real, Tensor};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// L2 coefficient added to the gradient before the moment updates.
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub config: AdamConfig,
    pub m: Vec<Tensor<T>>,
    pub v: Vec<Tensor<T>>,
    pub t: u64,
}

impl<T: Real> AdamState<T> {
    pub fn new(params: &[Tensor<T>], config: AdamConfig) -> Self {
        let zeros = || params.iter().map(|p| Tensor::zeros(p.shape())).collect();
        Self {
            config,
            m: zeros(),
            v: zeros(),
            t: 0,
        }
    }

    /// One update. Parameters are untouched if any gradient is non-finite.
    pub fn step(&mut self, params: &mut [Tensor<T>], grads: &[Tensor<T>]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != params.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} parameters, {} gradients, {} moment tensors",
                params.len(),
                grads.len(),
                self.m.len()
            )));
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.shape() != g.shape() || p.shape() != self.m[i].shape() {
                return Err(Error::ShapeMismatch(format!(
                    "parameter {i}: {:?} vs gradient {:?}",
                    p.shape(),
                    g.shape()
                )));
            }
            if !g.is_finite() {
                return Err(Error::NonFiniteGradient(i));
            }
        }
        self.t += 1;
        let c = self.config;
        let t = self.t as i32;
        let b1 = T::from_f64(c.beta1);
        let b2 = T::from_f64(c.beta2);
        let one_b1 = T::from_f64(1.0 - c.beta1);
        let one_b2 = T::from_f64(1.0 - c.beta2);
        let decay = T::from_f64(c.weight_decay);
        let correct1 = T::from_f64(1.0 / (1.0 - c.beta1.powi(t)));
        let correct2 = T::from_f64(1.0 / (1.0 - c.beta2.powi(t)));
        let lr = T::from_f64(c.learning_rate);
        let eps = T::from_f64(c.epsilon);
        for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let m = self.m[i].data_mut();
            let v = self.v[i].data_mut();
            for (((theta, &grad), m), v) in p.data_mut().iter_mut().zip(g.data()).zip(m).zip(v) {
                let g = grad + decay * *theta;
                *m = b1 * *m + one_b1 * g;
                *v = b2 * *v + one_b2 * g * g;
                let m_hat = *m * correct1;
                let v_hat = *v * correct2;
                *theta -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Vec<Tensor<f64>> {
        vec![Tensor::from_vec(&[1], vec![v]).unwrap()]
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = scalar(0.3);
        let mut s = AdamState::new(&p, AdamConfig::default());
        s.step(&mut p, &scalar(0.5)).unwrap();
        // m_hat = 0.5, v_hat = 0.25: step = lr * 0.5 / (0.5 + 1e-8).
        let want = 0.3 - 0.001 * 0.5 / (0.5 + 1e-8);
        assert!((p[0].data()[0] - want).abs() < 1e-15);
        assert!((p[0].data()[0] - 0.3 + 0.001).abs() < 1e-10);
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut p = scalar(1.5);
        let mut s = AdamState::new(&p, AdamConfig::default());
        s.step(&mut p, &scalar(0.0)).unwrap();
        assert_eq!(p[0].data()[0], 1.5);
    }

    #[test]
    fn weight_decay_enters_the_gradient() {
        let cfg = AdamConfig {
            weight_decay: 0.1,
            ..AdamConfig::default()
        };
        let mut p = scalar(2.0);
        let mut s = AdamState::new(&p, cfg);
        s.step(&mut p, &scalar(0.0)).unwrap();
        assert!(p[0].data()[0] < 2.0);
        assert!(s.v[0].data()[0] > 0.0);
    }

    #[test]
    fn non_finite_gradient_is_an_error() {
        let mut p = scalar(1.0);
        let mut s = AdamState::new(&p, AdamConfig::default());
        assert!(matches!(s.step(&mut p, &scalar(f64::NAN)), Err(Error::NonFiniteGradient(0))));
        assert_eq!(p[0].data()[0], 1.0);
        assert_eq!(s.t, 0);
    }

    #[test]
    fn identical_inputs_give_identical_updates() {
        let mut a = scalar(0.7);
        let mut b = scalar(0.7);
        let mut sa = AdamState::new(&a, AdamConfig::default());
        let mut sb = sa.clone();
        for g in [0.1, -0.4, 2.0] {
            sa.step(&mut a, &scalar(g)).unwrap();
            sb.step(&mut b, &scalar(g)).unwrap();
        }
        assert_eq!(a, b);
        assert_eq!(sa, sb);
    }
}
