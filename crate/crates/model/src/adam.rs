//! Adam with bias correction; the learning rate is supplied per step so the
//! trainer owns the warm-up schedule.

use crate::config::ModelConfig;
use crate::scalar::{sc, Scalar};
use crate::transformer::{Gradients, ParamSet, Transformer};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

pub struct Adam<F> {
    pub(crate) m: ParamSet<F>,
    pub(crate) v: ParamSet<F>,
    pub(crate) step: u64,
}

impl<F: Scalar> Adam<F> {
    pub fn new(cfg: &ModelConfig) -> Self {
        Self {
            m: ParamSet::zeros(cfg),
            v: ParamSet::zeros(cfg),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One update over every parameter tensor.
    pub fn step(&mut self, model: &mut Transformer<F>, grads: &Gradients<F>, lr: f64) {
        self.step += 1;
        let b1: F = sc(BETA1);
        let b2: F = sc(BETA2);
        let one = F::one();
        let eps: F = sc(ADAM_EPS);
        let corr1: F = sc(1.0 - BETA1.powi(self.step as i32));
        let corr2: F = sc(1.0 - BETA2.powi(self.step as i32));
        let lr_f: F = sc(lr);

        let params = model.params.tensors_mut();
        let gs = grads.0.tensors();
        let ms = self.m.tensors_mut();
        let vs = self.v.tensors_mut();
        for (((p, g), m), v) in params.into_iter().zip(gs).zip(ms).zip(vs) {
            debug_assert_eq!(p.0, g.0);
            let (p, g, m, v) = (p.1, g.1, m.1, v.1);
            ndarray::Zip::from(p)
                .and(g)
                .and(m)
                .and(v)
                .for_each(|p, &g, m, v| {
                    *m = b1 * *m + (one - b1) * g;
                    *v = b2 * *v + (one - b2) * g * g;
                    let m_hat = *m / corr1;
                    let v_hat = *v / corr2;
                    *p -= lr_f * m_hat / (v_hat.sqrt() + eps);
                });
        }
    }
}

/// Linear warm-up from zero to the configured rate, then constant.
pub fn warmup_lr(base: f64, warmup_steps: usize, step: u64) -> f64 {
    if warmup_steps == 0 {
        return base;
    }
    let frac = (step as f64 / warmup_steps as f64).min(1.0);
    base * frac
}
