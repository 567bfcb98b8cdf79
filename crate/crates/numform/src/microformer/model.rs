//! The encoder-decoder transformer: embedding, stacked attention/FF
//! layers with post-layer-norm residuals, and a vocabulary projection.
//! Forward passes return caches; `backward` consumes them and
//! accumulates parameter gradients in place.

use super::data::{Batch, Vocabulary};
use super::layers::{
    softmax_cross_entropy, AttnCache, AttnMask, Attention, FeedForward, FfCache, LayerNorm,
    Linear, LnCache,
};
use super::param::Param;
use super::{ModelConfig, ModelError, Real};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct EncoderLayer<A> {
    attn: Attention<A>,
    ln1: LayerNorm<A>,
    ff: FeedForward<A>,
    ln2: LayerNorm<A>,
}

struct EncoderLayerCache<A> {
    attn: AttnCache<A>,
    ln1: LnCache<A>,
    ff: FfCache<A>,
    ln2: LnCache<A>,
}

impl<A: Real> EncoderLayer<A> {
    fn new(d: usize, heads: usize, ff: usize, rng: &mut ChaCha8Rng) -> Self {
        EncoderLayer {
            attn: Attention::new(d, heads, rng),
            ln1: LayerNorm::new(d),
            ff: FeedForward::new(d, ff, rng),
            ln2: LayerNorm::new(d),
        }
    }

    fn forward(&self, x: &Array2<A>, mask: &AttnMask) -> (Array2<A>, EncoderLayerCache<A>) {
        let (h1, ln1) = self.ln1.forward(x);
        let (a, attn) = self.attn.forward(&h1, &h1, mask);
        let s1 = x + &a;
        let (h2, ln2) = self.ln2.forward(&s1);
        let (f, ff) = self.ff.forward(&h2);
        (&s1 + &f, EncoderLayerCache { attn, ln1, ff, ln2 })
    }

    fn backward(
        &mut self,
        cache: &EncoderLayerCache<A>,
        mask: &AttnMask,
        dy: &Array2<A>,
    ) -> Array2<A> {
        let dh2 = self.ff.backward(&cache.ff, dy);
        let ds1 = dy + &self.ln2.backward(&cache.ln2, &dh2);
        let (dq, dkv) = self.attn.backward(&cache.attn, mask, &ds1);
        let dh1 = &dq + &dkv;
        &ds1 + &self.ln1.backward(&cache.ln1, &dh1)
    }
}

struct DecoderLayer<A> {
    self_attn: Attention<A>,
    ln1: LayerNorm<A>,
    cross_attn: Attention<A>,
    ln2: LayerNorm<A>,
    ff: FeedForward<A>,
    ln3: LayerNorm<A>,
}

struct DecoderLayerCache<A> {
    self_attn: AttnCache<A>,
    ln1: LnCache<A>,
    cross_attn: AttnCache<A>,
    ln2: LnCache<A>,
    ff: FfCache<A>,
    ln3: LnCache<A>,
}

impl<A: Real> DecoderLayer<A> {
    fn new(d: usize, heads: usize, ff: usize, rng: &mut ChaCha8Rng) -> Self {
        DecoderLayer {
            self_attn: Attention::new(d, heads, rng),
            ln1: LayerNorm::new(d),
            cross_attn: Attention::new(d, heads, rng),
            ln2: LayerNorm::new(d),
            ff: FeedForward::new(d, ff, rng),
            ln3: LayerNorm::new(d),
        }
    }

    fn forward(
        &self,
        y: &Array2<A>,
        enc_out: &Array2<A>,
        self_mask: &AttnMask,
        cross_mask: &AttnMask,
    ) -> (Array2<A>, DecoderLayerCache<A>) {
        let (h1, ln1) = self.ln1.forward(y);
        let (a1, self_attn) = self.self_attn.forward(&h1, &h1, self_mask);
        let s1 = y + &a1;
        let (h2, ln2) = self.ln2.forward(&s1);
        let (a2, cross_attn) = self.cross_attn.forward(&h2, enc_out, cross_mask);
        let s2 = &s1 + &a2;
        let (h3, ln3) = self.ln3.forward(&s2);
        let (f, ff) = self.ff.forward(&h3);
        (&s2 + &f, DecoderLayerCache { self_attn, ln1, cross_attn, ln2, ff, ln3 })
    }

    /// Returns `(dy, d_enc_out)`.
    fn backward(
        &mut self,
        cache: &DecoderLayerCache<A>,
        self_mask: &AttnMask,
        cross_mask: &AttnMask,
        dout: &Array2<A>,
    ) -> (Array2<A>, Array2<A>) {
        let dh3 = self.ff.backward(&cache.ff, dout);
        let ds2 = dout + &self.ln3.backward(&cache.ln3, &dh3);
        let (dq2, denc) = self.cross_attn.backward(&cache.cross_attn, cross_mask, &ds2);
        let ds1 = &ds2 + &self.ln2.backward(&cache.ln2, &dq2);
        let (dq1, dkv1) = self.self_attn.backward(&cache.self_attn, self_mask, &ds1);
        let dh1 = &dq1 + &dkv1;
        (&ds1 + &self.ln1.backward(&cache.ln1, &dh1), denc)
    }
}

pub struct ForwardCache<A> {
    enc_layers: Vec<EncoderLayerCache<A>>,
    enc_final_ln: LnCache<A>,
    pub enc_out: Array2<A>,
    dec_layers: Vec<DecoderLayerCache<A>>,
    dec_final_ln: LnCache<A>,
    dec_out: Array2<A>,
}

pub struct Microformer<A: Real> {
    pub config: ModelConfig,
    emb: Param<A>,
    enc: Vec<EncoderLayer<A>>,
    enc_ln: LayerNorm<A>,
    dec: Vec<DecoderLayer<A>>,
    dec_ln: LayerNorm<A>,
    out: Linear<A>,
}

impl<A: Real> Microformer<A> {
    /// Fresh model with ChaCha8-seeded Glorot init. The same seed and
    /// config always produce bit-identical parameters.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self, ModelError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = config.model_width;
        let emb_std: f64 = std::env::var("NUMFORM_EMB_STD")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(1.0);
        let mut emb = Param::unit_normal(config.vocabulary.len(), d, &mut rng);
        emb.value.mapv_inplace(|x| x * A::fr(emb_std));
        let enc = (0..config.layers_encoder)
            .map(|_| EncoderLayer::new(d, config.heads, config.feedforward_width, &mut rng))
            .collect();
        let dec = (0..config.layers_decoder)
            .map(|_| DecoderLayer::new(d, config.heads, config.feedforward_width, &mut rng))
            .collect();
        let out = Linear::new(d, config.vocabulary.len(), &mut rng);
        let enc_ln = LayerNorm::new(d);
        let dec_ln = LayerNorm::new(d);
        Ok(Microformer { config, emb, enc, enc_ln, dec, dec_ln, out })
    }

    fn embed(&self, ids: &[usize], pos: &Array2<A>) -> Array2<A> {
        let mut x = Array2::zeros((ids.len(), self.config.model_width));
        for (r, &id) in ids.iter().enumerate() {
            x.row_mut(r).assign(&self.emb.value.row(id));
        }
        x + pos
    }

    fn scatter_embedding_grad(&mut self, ids: &[usize], dx: &Array2<A>) {
        for (r, &id) in ids.iter().enumerate() {
            let mut g = self.emb.grad.row_mut(id);
            g += &dx.row(r);
        }
    }

    fn masks<'a>(batch: &'a Batch<A>) -> (AttnMask<'a>, AttnMask<'a>, AttnMask<'a>) {
        let enc_mask = AttnMask {
            batch: batch.b,
            lq: batch.ls,
            lk: batch.ls,
            k_len: &batch.src_len,
            causal: false,
        };
        let self_mask = AttnMask {
            batch: batch.b,
            lq: batch.lt,
            lk: batch.lt,
            k_len: &batch.tgt_len,
            causal: true,
        };
        let cross_mask = AttnMask {
            batch: batch.b,
            lq: batch.lt,
            lk: batch.ls,
            k_len: &batch.src_len,
            causal: false,
        };
        (enc_mask, self_mask, cross_mask)
    }

    /// Full teacher-forced pass: logits are `(batch * lt, vocab)`.
    pub fn forward(&self, batch: &Batch<A>) -> (Array2<A>, ForwardCache<A>) {
        let (enc_mask, self_mask, cross_mask) = Self::masks(batch);

        let mut x = self.embed(&batch.src_ids, &batch.src_pos);
        let mut enc_layers = Vec::with_capacity(self.enc.len());
        for layer in &self.enc {
            let (nx, cache) = layer.forward(&x, &enc_mask);
            enc_layers.push(cache);
            x = nx;
        }
        let (enc_out, enc_final_ln) = self.enc_ln.forward(&x);

        let mut y = self.embed(&batch.tgt_in, &batch.tgt_pos);
        let mut dec_layers = Vec::with_capacity(self.dec.len());
        for layer in &self.dec {
            let (ny, cache) = layer.forward(&y, &enc_out, &self_mask, &cross_mask);
            dec_layers.push(cache);
            y = ny;
        }
        let (dec_out, dec_final_ln) = self.dec_ln.forward(&y);

        let logits = self.out.forward(&dec_out);
        (logits, ForwardCache { enc_layers, enc_final_ln, enc_out, dec_layers, dec_final_ln, dec_out })
    }

    /// Backpropagates `dlogits`, accumulating parameter gradients.
    pub fn backward(&mut self, batch: &Batch<A>, cache: &ForwardCache<A>, dlogits: &Array2<A>) {
        let (enc_mask, self_mask, cross_mask) = Self::masks(batch);

        let d_dec_out = self.out.backward(&cache.dec_out, dlogits);
        let mut dy = self.dec_ln.backward(&cache.dec_final_ln, &d_dec_out);
        let mut denc: Array2<A> = Array2::zeros(cache.enc_out.raw_dim());
        for (layer, lc) in self.dec.iter_mut().zip(&cache.dec_layers).rev() {
            let (ndy, de) = layer.backward(lc, &self_mask, &cross_mask, &dy);
            dy = ndy;
            denc = denc + de;
        }
        self.scatter_embedding_grad(&batch.tgt_in, &dy);

        let mut dx = self.enc_ln.backward(&cache.enc_final_ln, &denc);
        for (layer, lc) in self.enc.iter_mut().zip(&cache.enc_layers).rev() {
            dx = layer.backward(lc, &enc_mask, &dx);
        }
        self.scatter_embedding_grad(&batch.src_ids, &dx);
    }

    /// Mean cross-entropy over the batch's non-pad targets.
    pub fn loss(&self, batch: &Batch<A>) -> f64 {
        let (logits, _) = self.forward(batch);
        let (loss, _, _) = softmax_cross_entropy(&logits, &batch.tgt_out, Vocabulary::PAD);
        loss
    }

    /// Forward + backward; returns the loss.
    pub fn loss_and_grads(&mut self, batch: &Batch<A>) -> f64 {
        let (logits, cache) = self.forward(batch);
        let (loss, dlogits, _) = softmax_cross_entropy(&logits, &batch.tgt_out, Vocabulary::PAD);
        self.backward(batch, &cache, &dlogits);
        loss
    }

    /// Encoder output for a source-only batch (targets ignored).
    pub fn encode_source(&self, batch: &Batch<A>) -> Array2<A> {
        let enc_mask = AttnMask {
            batch: batch.b,
            lq: batch.ls,
            lk: batch.ls,
            k_len: &batch.src_len,
            causal: false,
        };
        let mut x = self.embed(&batch.src_ids, &batch.src_pos);
        for layer in &self.enc {
            let (nx, _) = layer.forward(&x, &enc_mask);
            x = nx;
        }
        let (enc_out, _) = self.enc_ln.forward(&x);
        enc_out
    }

    /// Decoder logits for explicit target prefixes against a cached
    /// encoder output. `tgt_pos` must already follow the inference
    /// rule: zero vectors in masked mode, sinusoidal otherwise.
    #[allow(clippy::too_many_arguments)]
    pub fn decode_prefix(
        &self,
        enc_out: &Array2<A>,
        src_len: &[usize],
        ls: usize,
        tgt_in: &[usize],
        tgt_pos: &Array2<A>,
        tgt_len: &[usize],
        lt: usize,
    ) -> Array2<A> {
        let b = src_len.len();
        let self_mask =
            AttnMask { batch: b, lq: lt, lk: lt, k_len: tgt_len, causal: true };
        let cross_mask =
            AttnMask { batch: b, lq: lt, lk: ls, k_len: src_len, causal: false };
        let mut y = self.embed(tgt_in, tgt_pos);
        for layer in &self.dec {
            let (ny, _) = layer.forward(&y, enc_out, &self_mask, &cross_mask);
            y = ny;
        }
        let (dec_out, _) = self.dec_ln.forward(&y);
        self.out.forward(&dec_out)
    }

    /// Visits every parameter tensor in a fixed order with a stable
    /// name; the order defines the checkpoint layout.
    pub fn for_each_param(&mut self, f: &mut dyn FnMut(&str, &mut Param<A>)) {
        f("embedding", &mut self.emb);
        for (i, l) in self.enc.iter_mut().enumerate() {
            visit_attention(&format!("encoder.{i}.self_attn"), &mut l.attn, f);
            visit_ln(&format!("encoder.{i}.ln1"), &mut l.ln1, f);
            visit_ff(&format!("encoder.{i}.ff"), &mut l.ff, f);
            visit_ln(&format!("encoder.{i}.ln2"), &mut l.ln2, f);
        }
        for (i, l) in self.dec.iter_mut().enumerate() {
            visit_attention(&format!("decoder.{i}.self_attn"), &mut l.self_attn, f);
            visit_ln(&format!("decoder.{i}.ln1"), &mut l.ln1, f);
            visit_attention(&format!("decoder.{i}.cross_attn"), &mut l.cross_attn, f);
            visit_ln(&format!("decoder.{i}.ln2"), &mut l.ln2, f);
            visit_ff(&format!("decoder.{i}.ff"), &mut l.ff, f);
            visit_ln(&format!("decoder.{i}.ln3"), &mut l.ln3, f);
        }
        visit_ln("encoder.final_ln", &mut self.enc_ln, f);
        visit_ln("decoder.final_ln", &mut self.dec_ln, f);
        f("output.weight", &mut self.out.w);
        f("output.bias", &mut self.out.b);
    }

    pub fn zero_grads(&mut self) {
        self.for_each_param(&mut |_, p| p.zero_grad());
    }

    pub fn parameter_count(&mut self) -> usize {
        let mut n = 0;
        self.for_each_param(&mut |_, p| n += p.value.len());
        n
    }
}

fn visit_attention<A: Real>(
    prefix: &str,
    attn: &mut Attention<A>,
    f: &mut dyn FnMut(&str, &mut Param<A>),
) {
    for (tag, lin) in [
        ("wq", &mut attn.wq),
        ("wk", &mut attn.wk),
        ("wv", &mut attn.wv),
        ("wo", &mut attn.wo),
    ] {
        f(&format!("{prefix}.{tag}.weight"), &mut lin.w);
        f(&format!("{prefix}.{tag}.bias"), &mut lin.b);
    }
}

fn visit_ff<A: Real>(
    prefix: &str,
    ff: &mut FeedForward<A>,
    f: &mut dyn FnMut(&str, &mut Param<A>),
) {
    f(&format!("{prefix}.lin1.weight"), &mut ff.lin1.w);
    f(&format!("{prefix}.lin1.bias"), &mut ff.lin1.b);
    f(&format!("{prefix}.lin2.weight"), &mut ff.lin2.w);
    f(&format!("{prefix}.lin2.bias"), &mut ff.lin2.b);
}

fn visit_ln<A: Real>(
    prefix: &str,
    ln: &mut LayerNorm<A>,
    f: &mut dyn FnMut(&str, &mut Param<A>),
) {
    f(&format!("{prefix}.gamma"), &mut ln.gamma);
    f(&format!("{prefix}.beta"), &mut ln.beta);
}
