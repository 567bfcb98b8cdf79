//! Trainable tensors: value, accumulated gradient, and Adam moments
//! live together so the optimizer, the checkpointer, and the gradient
//! checker can all walk the model through one visitor.

use super::Real;
use ndarray::Array2;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct Param<A> {
    pub value: Array2<A>,
    pub grad: Array2<A>,
    pub m: Array2<A>,
    pub v: Array2<A>,
}

impl<A: Real> Param<A> {
    pub fn new(value: Array2<A>) -> Self {
        let shape = value.raw_dim();
        Param {
            value,
            grad: Array2::zeros(shape),
            m: Array2::zeros(shape),
            v: Array2::zeros(shape),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(Array2::zeros((rows, cols)))
    }

    /// Glorot-uniform init over `[-a, a]`, `a = sqrt(6 / (fan_in + fan_out))`.
    pub fn glorot(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Self {
        let a = (6.0 / (rows + cols) as f64).sqrt();
        let mut value = Array2::zeros((rows, cols));
        for x in value.iter_mut() {
            *x = A::fr((uniform01(rng) * 2.0 - 1.0) * a);
        }
        Self::new(value)
    }

    /// Unit-Gaussian init, the usual choice for token embeddings: keeps
    /// token identity comparable in magnitude to the position signal.
    pub fn unit_normal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut value = Array2::zeros((rows, cols));
        for x in value.iter_mut() {
            *x = A::fr(normal01(rng));
        }
        Self::new(value)
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(A::zero());
    }

    pub fn grad_sq_sum(&self) -> f64 {
        self.grad.iter().map(|g| g.as_f64() * g.as_f64()).sum()
    }

    pub fn scale_grad(&mut self, factor: f64) {
        let f = A::fr(factor);
        self.grad.mapv_inplace(|g| g * f);
    }

    /// One Adam update with bias correction; `t` is the 1-based global
    /// step count.
    pub fn adam_step(&mut self, lr: f64, beta1: f64, beta2: f64, eps: f64, t: u64) {
        let b1 = A::fr(beta1);
        let b2 = A::fr(beta2);
        let one = A::one();
        let corr1 = A::fr(1.0 - beta1.powi(t as i32));
        let corr2 = A::fr(1.0 - beta2.powi(t as i32));
        let lr = A::fr(lr);
        let eps = A::fr(eps);
        for ((w, g), (m, v)) in self
            .value
            .iter_mut()
            .zip(self.grad.iter())
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = b1 * *m + (one - b1) * *g;
            *v = b2 * *v + (one - b2) * *g * *g;
            let mhat = *m / corr1;
            let vhat = *v / corr2;
            *w = *w - lr * mhat / (vhat.sqrt() + eps);
        }
    }
}

/// Uniform in `[0, 1)` from the top 53 bits, so the stream is identical
/// for f32 and f64 models with the same seed.
pub fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    use rand::RngCore;
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Standard normal via Box-Muller.
pub fn normal01(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = uniform01(rng).max(f64::MIN_POSITIVE);
    let u2 = uniform01(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn glorot_respects_the_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p: Param<f64> = Param::glorot(16, 48, &mut rng);
        let a = (6.0 / 64.0f64).sqrt();
        assert!(p.value.iter().all(|&x| x.abs() <= a));
        assert!(p.value.iter().any(|&x| x.abs() > a / 10.0));
        assert!(p.grad.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn adam_moves_against_the_gradient() {
        let mut p: Param<f64> = Param::zeros(1, 2);
        p.grad[[0, 0]] = 1.0;
        p.grad[[0, 1]] = -1.0;
        p.adam_step(1e-2, 0.9, 0.999, 1e-8, 1);
        assert!(p.value[[0, 0]] < 0.0);
        assert!(p.value[[0, 1]] > 0.0);
        // step magnitude is ~lr after bias correction
        assert!((p.value[[0, 0]].abs() - 1e-2).abs() < 1e-5);
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut p: Param<f64> = Param::glorot(4, 4, &mut rng);
        let before = p.value.clone();
        p.adam_step(1e-2, 0.9, 0.999, 1e-8, 1);
        assert_eq!(p.value, before);
    }
}
