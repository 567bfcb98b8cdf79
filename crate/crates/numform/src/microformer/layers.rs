//! Layers with explicit forward caches and hand-derived backward
//! passes. Tensors are row-major `(batch * seq, width)`; attention is
//! the only place that needs the `(batch, seq)` structure back, via the
//! mask descriptor.

use super::param::Param;
use super::Real;
use ndarray::{s, Array2, Axis};
use rand_chacha::ChaCha8Rng;

pub struct Linear<A> {
    pub w: Param<A>,
    pub b: Param<A>,
}

impl<A: Real> Linear<A> {
    pub fn new(d_in: usize, d_out: usize, rng: &mut ChaCha8Rng) -> Self {
        Linear { w: Param::glorot(d_in, d_out, rng), b: Param::zeros(1, d_out) }
    }

    pub fn forward(&self, x: &Array2<A>) -> Array2<A> {
        x.dot(&self.w.value) + &self.b.value
    }

    /// Accumulates weight/bias gradients and returns the input gradient.
    /// `x` must be the forward input.
    pub fn backward(&mut self, x: &Array2<A>, dy: &Array2<A>) -> Array2<A> {
        self.w.grad = &self.w.grad + &x.t().dot(dy);
        self.b.grad = &self.b.grad + &dy.sum_axis(Axis(0)).insert_axis(Axis(0));
        dy.dot(&self.w.value.t())
    }
}

pub struct LayerNorm<A> {
    pub gamma: Param<A>,
    pub beta: Param<A>,
    eps: A,
}

pub struct LnCache<A> {
    xhat: Array2<A>,
    inv_std: Vec<A>,
}

impl<A: Real> LayerNorm<A> {
    pub fn new(d: usize) -> Self {
        let mut gamma = Param::zeros(1, d);
        gamma.value.fill(A::one());
        LayerNorm { gamma, beta: Param::zeros(1, d), eps: A::fr(1e-5) }
    }

    pub fn forward(&self, x: &Array2<A>) -> (Array2<A>, LnCache<A>) {
        let d = x.ncols();
        let inv_d = A::one() / A::fr(d as f64);
        let mut xhat = x.clone();
        let mut inv_std = Vec::with_capacity(x.nrows());
        for mut row in xhat.rows_mut() {
            let mean = row.iter().fold(A::zero(), |a, &v| a + v) * inv_d;
            let var = row.iter().fold(A::zero(), |a, &v| a + (v - mean) * (v - mean)) * inv_d;
            let istd = A::one() / (var + self.eps).sqrt();
            inv_std.push(istd);
            for v in row.iter_mut() {
                *v = (*v - mean) * istd;
            }
        }
        let y = &xhat * &self.gamma.value + &self.beta.value;
        (y, LnCache { xhat, inv_std })
    }

    pub fn backward(&mut self, cache: &LnCache<A>, dy: &Array2<A>) -> Array2<A> {
        let d = dy.ncols();
        let inv_d = A::one() / A::fr(d as f64);
        self.gamma.grad = &self.gamma.grad
            + &(dy * &cache.xhat).sum_axis(Axis(0)).insert_axis(Axis(0));
        self.beta.grad = &self.beta.grad + &dy.sum_axis(Axis(0)).insert_axis(Axis(0));

        let mut dx = Array2::zeros(dy.raw_dim());
        for (r, mut dx_row) in dx.rows_mut().into_iter().enumerate() {
            let dy_row = dy.row(r);
            let xhat_row = cache.xhat.row(r);
            let mut m1 = A::zero(); // mean of dxhat
            let mut m2 = A::zero(); // mean of dxhat * xhat
            for j in 0..d {
                let dxh = dy_row[j] * self.gamma.value[[0, j]];
                m1 = m1 + dxh;
                m2 = m2 + dxh * xhat_row[j];
            }
            m1 = m1 * inv_d;
            m2 = m2 * inv_d;
            let istd = cache.inv_std[r];
            for j in 0..d {
                let dxh = dy_row[j] * self.gamma.value[[0, j]];
                dx_row[j] = istd * (dxh - m1 - xhat_row[j] * m2);
            }
        }
        dx
    }
}

pub struct FeedForward<A> {
    pub lin1: Linear<A>,
    pub lin2: Linear<A>,
}

pub struct FfCache<A> {
    x: Array2<A>,
    h: Array2<A>, // post-ReLU
}

impl<A: Real> FeedForward<A> {
    pub fn new(d: usize, hidden: usize, rng: &mut ChaCha8Rng) -> Self {
        FeedForward { lin1: Linear::new(d, hidden, rng), lin2: Linear::new(hidden, d, rng) }
    }

    pub fn forward(&self, x: &Array2<A>) -> (Array2<A>, FfCache<A>) {
        let mut h = self.lin1.forward(x);
        h.mapv_inplace(|v| if v > A::zero() { v } else { A::zero() });
        let y = self.lin2.forward(&h);
        (y, FfCache { x: x.clone(), h })
    }

    pub fn backward(&mut self, cache: &FfCache<A>, dy: &Array2<A>) -> Array2<A> {
        let mut dh = self.lin2.backward(&cache.h, dy);
        // ReLU gate: post-activation is zero exactly where the unit was off
        ndarray::Zip::from(&mut dh).and(&cache.h).for_each(|g, &h| {
            if h == A::zero() {
                *g = A::zero();
            }
        });
        self.lin1.backward(&cache.x, &dh)
    }
}

/// Which key positions each query may attend to. Queries beyond the
/// true length produce garbage rows that downstream masking ignores;
/// keys beyond `k_len` are never visible to anyone.
pub struct AttnMask<'a> {
    pub batch: usize,
    pub lq: usize,
    pub lk: usize,
    pub k_len: &'a [usize],
    pub causal: bool,
}

impl AttnMask<'_> {
    fn allowed(&self, b: usize, i: usize, j: usize) -> bool {
        j < self.k_len[b] && (!self.causal || j <= i)
    }
}

pub struct Attention<A> {
    pub wq: Linear<A>,
    pub wk: Linear<A>,
    pub wv: Linear<A>,
    pub wo: Linear<A>,
    heads: usize,
}

pub struct AttnCache<A> {
    q_in: Array2<A>,
    kv_in: Array2<A>,
    q: Array2<A>,
    k: Array2<A>,
    v: Array2<A>,
    /// Post-softmax weights per (batch, head), `(lq, lk)` each.
    attn: Vec<Array2<A>>,
    ctx: Array2<A>,
}

impl<A: Real> Attention<A> {
    pub fn new(d: usize, heads: usize, rng: &mut ChaCha8Rng) -> Self {
        Attention {
            wq: Linear::new(d, d, rng),
            wk: Linear::new(d, d, rng),
            wv: Linear::new(d, d, rng),
            wo: Linear::new(d, d, rng),
            heads,
        }
    }

    pub fn forward(
        &self,
        q_in: &Array2<A>,
        kv_in: &Array2<A>,
        mask: &AttnMask,
    ) -> (Array2<A>, AttnCache<A>) {
        let d = q_in.ncols();
        let dk = d / self.heads;
        let scale = A::fr(1.0 / (dk as f64).sqrt());

        let q = self.wq.forward(q_in);
        let k = self.wk.forward(kv_in);
        let v = self.wv.forward(kv_in);

        let mut ctx: Array2<A> = Array2::zeros(q.raw_dim());
        let mut attn = Vec::with_capacity(mask.batch * self.heads);
        for b in 0..mask.batch {
            let q_rows = s![b * mask.lq..(b + 1) * mask.lq, ..];
            let k_rows = s![b * mask.lk..(b + 1) * mask.lk, ..];
            for h in 0..self.heads {
                let cols = s![.., h * dk..(h + 1) * dk];
                let qs = q.slice(q_rows).slice_move(cols);
                let ks = k.slice(k_rows).slice_move(cols);
                let vs = v.slice(k_rows).slice_move(cols);

                let mut scores = qs.dot(&ks.t());
                scores.mapv_inplace(|x| x * scale);
                for ((i, j), x) in scores.indexed_iter_mut() {
                    if !mask.allowed(b, i, j) {
                        *x = A::neg_infinity();
                    }
                }
                softmax_rows(&mut scores);
                let c = scores.dot(&vs);
                ctx.slice_mut(q_rows).slice_move(cols).assign(&c);
                attn.push(scores);
            }
        }

        let out = self.wo.forward(&ctx);
        let cache = AttnCache {
            q_in: q_in.clone(),
            kv_in: kv_in.clone(),
            q,
            k,
            v,
            attn,
            ctx,
        };
        (out, cache)
    }

    /// Returns `(d_q_in, d_kv_in)`; for self-attention the caller adds
    /// them together.
    pub fn backward(
        &mut self,
        cache: &AttnCache<A>,
        mask: &AttnMask,
        dout: &Array2<A>,
    ) -> (Array2<A>, Array2<A>) {
        let d = cache.q.ncols();
        let dk = d / self.heads;
        let scale = A::fr(1.0 / (dk as f64).sqrt());

        let dctx = self.wo.backward(&cache.ctx, dout);
        let mut dq: Array2<A> = Array2::zeros(cache.q.raw_dim());
        let mut dkm: Array2<A> = Array2::zeros(cache.k.raw_dim());
        let mut dvm: Array2<A> = Array2::zeros(cache.v.raw_dim());

        for b in 0..mask.batch {
            let q_rows = s![b * mask.lq..(b + 1) * mask.lq, ..];
            let k_rows = s![b * mask.lk..(b + 1) * mask.lk, ..];
            for h in 0..self.heads {
                let cols = s![.., h * dk..(h + 1) * dk];
                let a = &cache.attn[b * self.heads + h];
                let dctx_s = dctx.slice(q_rows).slice_move(cols);
                let vs = cache.v.slice(k_rows).slice_move(cols);
                let qs = cache.q.slice(q_rows).slice_move(cols);
                let ks = cache.k.slice(k_rows).slice_move(cols);

                let da = dctx_s.dot(&vs.t());
                let mut ds = softmax_backward(a, &da);
                ds.mapv_inplace(|x| x * scale);

                let mut dv_s = dvm.slice_mut(k_rows).slice_move(cols);
                dv_s += &a.t().dot(&dctx_s);
                let mut dq_s = dq.slice_mut(q_rows).slice_move(cols);
                dq_s += &ds.dot(&ks);
                let mut dk_s = dkm.slice_mut(k_rows).slice_move(cols);
                dk_s += &ds.t().dot(&qs);
            }
        }

        let d_q_in = self.wq.backward(&cache.q_in, &dq);
        let d_kv_in =
            self.wk.backward(&cache.kv_in, &dkm) + self.wv.backward(&cache.kv_in, &dvm);
        (d_q_in, d_kv_in)
    }
}

fn softmax_rows<A: Real>(scores: &mut Array2<A>) {
    for mut row in scores.rows_mut() {
        let max = row.iter().fold(A::neg_infinity(), |a, &v| if v > a { v } else { a });
        let mut sum = A::zero();
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum = sum + *v;
        }
        for v in row.iter_mut() {
            *v = *v / sum;
        }
    }
}

/// Rowwise: `ds = a ⊙ (da − <da, a>)`. Masked entries have `a = 0`, so
/// their gradient vanishes without special casing.
fn softmax_backward<A: Real>(a: &Array2<A>, da: &Array2<A>) -> Array2<A> {
    let mut ds = da.clone();
    for (r, mut ds_row) in ds.rows_mut().into_iter().enumerate() {
        let a_row = a.row(r);
        let dot = ds_row
            .iter()
            .zip(a_row.iter())
            .fold(A::zero(), |acc, (&g, &p)| acc + g * p);
        for (g, &p) in ds_row.iter_mut().zip(a_row.iter()) {
            *g = p * (*g - dot);
        }
    }
    ds
}

/// Mean cross-entropy over non-pad targets plus the logits gradient.
/// Returns `(loss, dlogits, counted_tokens)`.
pub fn softmax_cross_entropy<A: Real>(
    logits: &Array2<A>,
    targets: &[usize],
    pad_id: usize,
) -> (f64, Array2<A>, usize) {
    assert_eq!(logits.nrows(), targets.len());
    let counted = targets.iter().filter(|&&t| t != pad_id).count();
    let mut dlogits: Array2<A> = Array2::zeros(logits.raw_dim());
    if counted == 0 {
        return (0.0, dlogits, 0);
    }
    let inv_n = A::fr(1.0 / counted as f64);
    let mut loss = 0.0f64;
    for (r, &t) in targets.iter().enumerate() {
        if t == pad_id {
            continue;
        }
        let row = logits.row(r);
        let max = row.iter().fold(A::neg_infinity(), |a, &v| if v > a { v } else { a });
        let mut sum = A::zero();
        for &v in row.iter() {
            sum = sum + (v - max).exp();
        }
        let log_z = sum.ln() + max;
        loss += (log_z - row[t]).as_f64();
        let mut drow = dlogits.row_mut(r);
        for (j, &v) in row.iter().enumerate() {
            let p = (v - log_z).exp();
            drow[j] = p * inv_n;
        }
        drow[t] = drow[t] - inv_n;
    }
    (loss / counted as f64, dlogits, counted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn linear_forward_matches_manual_product() {
        let mut r = rng();
        let lin: Linear<f64> = Linear::new(3, 2, &mut r);
        let x = ndarray::array![[1.0, 2.0, 3.0]];
        let y = lin.forward(&x);
        let w = &lin.w.value;
        let want0 = w[[0, 0]] + 2.0 * w[[1, 0]] + 3.0 * w[[2, 0]];
        assert!((y[[0, 0]] - want0).abs() < 1e-12);
    }

    #[test]
    fn layer_norm_rows_are_standardized() {
        let ln: LayerNorm<f64> = LayerNorm::new(4);
        let x = ndarray::array![[1.0, 2.0, 3.0, 4.0], [-5.0, 0.0, 5.0, 10.0]];
        let (y, _) = ln.forward(&x);
        for row in y.rows() {
            let mean: f64 = row.iter().sum::<f64>() / 4.0;
            let var: f64 = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 4.0;
            assert!(mean.abs() < 1e-9);
            assert!((var - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn attention_rows_sum_to_one_within_the_mask() {
        let mut r = rng();
        let attn: Attention<f64> = Attention::new(8, 2, &mut r);
        let x = Array2::from_shape_fn((6, 8), |(i, j)| ((i * 7 + j) as f64).sin());
        let mask = AttnMask { batch: 2, lq: 3, lk: 3, k_len: &[3, 2], causal: false };
        let (_, cache) = attn.forward(&x, &x, &mask);
        for (bh, a) in cache.attn.iter().enumerate() {
            let b = bh / 2;
            for row in a.rows() {
                let sum: f64 = row.iter().sum();
                assert!((sum - 1.0).abs() < 1e-9);
                // masked keys carry no weight
                for j in mask.k_len[b]..3 {
                    assert_eq!(row[j], 0.0);
                }
            }
        }
    }

    #[test]
    fn causal_mask_hides_the_future() {
        let mut r = rng();
        let attn: Attention<f64> = Attention::new(8, 2, &mut r);
        let x = Array2::from_shape_fn((4, 8), |(i, j)| ((i + j) as f64).cos());
        let mask = AttnMask { batch: 1, lq: 4, lk: 4, k_len: &[4], causal: true };
        let (_, cache) = attn.forward(&x, &x, &mask);
        for a in &cache.attn {
            for (i, row) in a.rows().into_iter().enumerate() {
                for j in i + 1..4 {
                    assert_eq!(row[j], 0.0);
                }
            }
        }
    }

    #[test]
    fn cross_entropy_ignores_pad_and_sums_gradient_to_zero() {
        let logits = ndarray::array![[2.0, 0.5, -1.0], [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]];
        let (loss, dlogits, counted) = softmax_cross_entropy::<f64>(&logits, &[0, 2, 9], 9);
        assert_eq!(counted, 2);
        assert!(loss > 0.0);
        // pad row gets zero gradient
        assert!(dlogits.row(2).iter().all(|&g| g == 0.0));
        // each counted row's gradient sums to zero
        for r in 0..2 {
            let s: f64 = dlogits.row(r).iter().sum();
            assert!(s.abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_logits_give_log_vocab_loss() {
        let logits: Array2<f64> = Array2::zeros((4, 10));
        let (loss, _, _) = softmax_cross_entropy(&logits, &[1, 2, 3, 4], 0);
        assert!((loss - 10f64.ln()).abs() < 1e-12);
    }
}
