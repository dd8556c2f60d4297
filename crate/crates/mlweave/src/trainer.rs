//! Bit-serial mini-batch SGD with the accelerator's update semantics.
//!
//! One batch proceeds in lock-step groups of 8 samples. Every dot product
//! in the batch reads the *architectural* model `x` — the state committed by
//! the previous batch — so results are exact synchronous mini-batch SGD
//! regardless of how the hardware overlaps batches in time. A *working*
//! copy `x_w` absorbs the running gradient after every group of 8, and the
//! batch commit
//!
//! ```text
//! x  <-  x - (sum over batch of scale_t * Q_s(a_t)) >> log2(B)
//! ```
//!
//! is a single arithmetic shift of the exact integer gradient total, so the
//! committed model is identical to a single-step evaluation no matter how
//! the partial averages were staged.
//!
//! Per sample, `scale = df >> j` implements the power-of-two learning rate
//! `2^-j`, with `df = a.x - b` for least squares and `sigma(a.x) - b` for
//! logistic regression (`sigma` via a 256-segment piecewise-linear
//! fixed-point table over [-8, 8], max error below 1e-3). The gradient
//! contribution `scale * Q_s(a)` reuses the same shift-and-add scheme as the
//! forward dot product, consuming the weaved planes directly.
//!
//! Batches whose tail would run past the dataset are padded with inert
//! slots: a padding slot contributes no gradient (its `df` input is pinned
//! to zero by skipping it), but still occupies a lane, which keeps every
//! batch exactly `B` wide as the hardware requires.

use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bitserial::bitserial_dot;
use crate::cost::{check_batch, predict, MemoryProfile};
use crate::error::{Error, Result};
use crate::fixed::{Fixed, FRAC_BITS};
use crate::pipeline::{simulate_epoch, SimConfig};
use crate::quantize::{truncate_code, FixedPointTable};
use crate::schedule::{precision_for_epoch, PrecisionPolicy};
use crate::weaving::{memory_traffic_bits, WeavingStore};

/// Which generalized linear model is being trained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    /// Least squares: `df = a.x - b`, loss `0.5 (a.x - b)^2`.
    LinReg,
    /// Logistic regression: `df = sigma(a.x) - b`, log loss.
    LogReg,
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LossKind::LinReg => write!(f, "linreg"),
            LossKind::LogReg => write!(f, "logreg"),
        }
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linreg" => Ok(LossKind::LinReg),
            "logreg" => Ok(LossKind::LogReg),
            other => Err(Error::Config(format!(
                "unknown loss `{other}` (expected `linreg` or `logreg`)"
            ))),
        }
    }
}

/// Training hyperparameters.
#[derive(Clone, Copy, Debug)]
pub struct TrainConfig {
    pub loss: LossKind,
    /// Batch size `B`: a power of two and a multiple of 8.
    pub batch: u32,
    /// Learning-rate shift `j`: the step size is `2^-j`.
    pub lr_shift: u32,
    /// Epoch threshold after which the learning rate halves (shift `j+1`).
    pub decay_epoch: u32,
    pub epochs: u32,
    pub policy: PrecisionPolicy,
    /// Seeded epoch-level shuffle; `None` scans samples in order.
    pub shuffle_seed: Option<u64>,
}

impl TrainConfig {
    /// Checks the configuration against a store's maximum precision.
    pub fn validate(&self, s_max: u8) -> Result<()> {
        check_batch(self.batch)?;
        if self.lr_shift > 31 {
            return Err(Error::LrShiftRange { got: self.lr_shift });
        }
        // Surfaces a fixed precision exceeding the store's S immediately.
        precision_for_epoch(1, self.policy, s_max)?;
        Ok(())
    }
}

/// The model vector in its two hardware roles: the architectural copy `x`
/// committed between batches, and the working copy `x_w` that tracks
/// partial batch averages group by group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedModel {
    arch: Vec<Fixed>,
    working: Vec<Fixed>,
    dims: usize,
}

impl FixedModel {
    /// A zero model over `dims` true features, padded to `padded` entries
    /// (the store's chunk boundary).
    pub fn zeros(dims: usize, padded: usize) -> Self {
        assert!(padded >= dims);
        FixedModel {
            arch: vec![Fixed::ZERO; padded],
            working: vec![Fixed::ZERO; padded],
            dims,
        }
    }

    /// True feature count (excludes padding).
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn padded_len(&self) -> usize {
        self.arch.len()
    }

    /// The committed model, padding included (what dot products read).
    pub fn architectural(&self) -> &[Fixed] {
        &self.arch
    }

    /// The working copy `x_w` (equals the architectural model outside an
    /// active batch).
    pub fn working(&self) -> &[Fixed] {
        &self.working
    }

    /// The committed weights for the true features only.
    pub fn weights(&self) -> &[Fixed] {
        &self.arch[..self.dims]
    }

    /// Refreshes `x_w = x - (g >> log2b)` after a group of 8 samples.
    fn refresh_working(&mut self, gradient: &[i64], log2b: u32) {
        for (w, (&x, &g)) in self.working.iter_mut().zip(self.arch.iter().zip(gradient)) {
            *w = Fixed::from_raw(x.raw() - (g >> log2b));
        }
    }

    /// Commits the batch: `x <- x - (g >> log2b)`, then re-syncs `x_w`.
    /// The committed entries must fit the 32-bit model storage.
    fn commit(&mut self, gradient: &[i64], log2b: u32) -> Result<()> {
        for (idx, (x, &g)) in self.arch.iter_mut().zip(gradient).enumerate() {
            let next = Fixed::from_raw(x.raw() - (g >> log2b));
            if !next.fits_i32() {
                return Err(Error::ModelOverflow { index: idx });
            }
            *x = next;
        }
        self.working.copy_from_slice(&self.arch);
        Ok(())
    }
}

/// Per-epoch training record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochMetrics {
    /// 1-based epoch index.
    pub epoch: u32,
    /// Precision the epoch ran at.
    pub precision: u8,
    /// Mean training loss over the true samples, evaluated in double
    /// precision on the dequantized `s_e`-bit data after the epoch.
    pub loss: f64,
    /// Total bits read this epoch: `N * memory_traffic_bits(M, s_e)`.
    pub traffic_bits: u64,
    /// Simulated accelerator wall time for the epoch in milliseconds
    /// (cycle-level pipeline simulation at 400 MHz, chaining enabled).
    /// Simulated — not host time — so runs are byte-reproducible.
    pub wall_ms: f64,
    /// Analytic cost-model prediction for the epoch in milliseconds.
    pub predicted_ms: f64,
}

/// `df` of the chosen loss at one sample: the scalar the gradient scales by.
pub fn df(loss: LossKind, a_dot_x: Fixed, b: Fixed) -> Fixed {
    match loss {
        LossKind::LinReg => a_dot_x - b,
        LossKind::LogReg => sigmoid_fixed(a_dot_x) - b,
    }
}

/// The per-sample step `scale = df >> j`: a power-of-two learning rate
/// applied as an arithmetic shift.
pub fn compute_scale(d: Fixed, j: u32) -> Fixed {
    debug_assert!(j < 64);
    d.shr(j)
}

/// Learning-rate shift for epoch `e` (1-based): `j` through the decay
/// threshold, `j + 1` (halved step) afterwards.
pub fn lr_shift_for_epoch(e: u32, j: u32, decay_epoch: u32) -> u32 {
    if e <= decay_epoch {
        j
    } else {
        j + 1
    }
}

const SIGMOID_SEGMENTS: usize = 256;
const SIGMOID_MIN: f64 = -8.0;
const SIGMOID_MAX: f64 = 8.0;
// Segment width is (8 - -8)/256 = 1/16, i.e. 2^(FRAC_BITS - 4) raw units.
const SIGMOID_STEP_BITS: u32 = FRAC_BITS - 4;

fn sigmoid_nodes() -> &'static [Fixed; SIGMOID_SEGMENTS + 1] {
    static NODES: OnceLock<[Fixed; SIGMOID_SEGMENTS + 1]> = OnceLock::new();
    NODES.get_or_init(|| {
        let mut nodes = [Fixed::ZERO; SIGMOID_SEGMENTS + 1];
        for (i, node) in nodes.iter_mut().enumerate() {
            let x = SIGMOID_MIN
                + (SIGMOID_MAX - SIGMOID_MIN) * i as f64 / SIGMOID_SEGMENTS as f64;
            *node = Fixed::from_f64(1.0 / (1.0 + (-x).exp()));
        }
        nodes
    })
}

/// Piecewise-linear fixed-point sigmoid over 256 segments of [-8, 8],
/// clamped outside. Maximum absolute error below 1e-3 (the linear
/// interpolation error is under 5e-5; the clamp tails contribute the rest).
pub fn sigmoid_fixed(x: Fixed) -> Fixed {
    let nodes = sigmoid_nodes();
    let lo = Fixed::from_f64(SIGMOID_MIN).raw();
    let hi = Fixed::from_f64(SIGMOID_MAX).raw();
    let off = (x.raw().clamp(lo, hi) - lo) as u64;
    let segment = (off >> SIGMOID_STEP_BITS) as usize;
    if segment >= SIGMOID_SEGMENTS {
        return nodes[SIGMOID_SEGMENTS];
    }
    let frac = (off & ((1u64 << SIGMOID_STEP_BITS) - 1)) as i64;
    let delta = nodes[segment + 1].raw() - nodes[segment].raw();
    Fixed::from_raw(nodes[segment].raw() + ((delta * frac) >> SIGMOID_STEP_BITS))
}

/// Runs one batch of `slots.len()` lanes over the store.
///
/// `slots` lists the sample index per lane; its length must be a valid
/// batch size. Lanes pointing past `store.rows()` are padding and
/// contribute nothing. Every dot product reads the architectural model;
/// the working copy is refreshed after each group of 8 lanes; the commit
/// applies the batch average with a single shift of the exact gradient
/// total.
pub fn train_batch(
    store: &WeavingStore,
    model: &mut FixedModel,
    s: u8,
    j: u32,
    loss: LossKind,
    slots: &[usize],
) -> Result<()> {
    let batch = u32::try_from(slots.len()).map_err(|_| Error::BatchSize { got: u32::MAX })?;
    check_batch(batch)?;
    if s < 1 || s > store.max_precision() {
        return Err(Error::PrecisionRange {
            s: s as u32,
            max: store.max_precision() as u32,
        });
    }
    if model.padded_len() != store.padded_cols() {
        return Err(Error::DimensionMismatch {
            got: model.padded_len(),
            expected: store.padded_cols(),
        });
    }
    let log2b = batch.trailing_zeros();
    let mut gradient = vec![0i64; model.padded_len()];

    for (lane, &sample) in slots.iter().enumerate() {
        if sample < store.rows() {
            let a_dot_x = bitserial_dot(
                store.sample_slices(sample, s)?,
                model.architectural(),
                s,
            )?;
            let d = df(loss, a_dot_x, store.label(sample));
            let scale = compute_scale(d, j);
            if scale != Fixed::ZERO {
                // g_m += scale * Q_s(a_m), plane by plane: every set bit of
                // plane w adds scale >> (w+1), exactly bitserial_mul.
                for (c, slice) in store.sample_slices(sample, s)?.enumerate() {
                    for w in 0..s as usize {
                        let shifted = scale.raw() >> (w as u32 + 1);
                        let mut word = slice.plane(w);
                        while word != 0 {
                            let t = word.trailing_zeros() as usize;
                            word &= word - 1;
                            gradient[c * 64 + t] += shifted;
                        }
                    }
                }
            }
        }
        if lane % 8 == 7 {
            model.refresh_working(&gradient, log2b);
        }
    }
    model.commit(&gradient, log2b)
}

/// Runs the full training loop over a weaved store.
///
/// Per epoch: pick the precision `s_e` from the policy and the
/// learning-rate shift from the decay rule, scan the samples (optionally
/// shuffled with the seeded generator) in batches of `B`, then evaluate the
/// mean loss on the dequantized `s_e`-bit data. Returns the final model and
/// one metrics row per epoch. Fully deterministic for a given store,
/// config, and seed.
pub fn train(store: &WeavingStore, cfg: &TrainConfig) -> Result<(FixedModel, Vec<EpochMetrics>)> {
    train_with_profile(store, cfg, &MemoryProfile::default())
}

/// [`train`] with an explicit memory profile for the predicted epoch times.
pub fn train_with_profile(
    store: &WeavingStore,
    cfg: &TrainConfig,
    profile: &MemoryProfile,
) -> Result<(FixedModel, Vec<EpochMetrics>)> {
    cfg.validate(store.max_precision())?;
    let mut model = FixedModel::zeros(store.cols(), store.padded_cols());
    let mut metrics = Vec::with_capacity(cfg.epochs as usize);
    let mut rng = cfg.shuffle_seed.map(ChaCha8Rng::seed_from_u64);
    let batch = cfg.batch as usize;
    let slots = store.rows().div_ceil(batch) * batch;

    for epoch in 1..=cfg.epochs {
        let s_e = precision_for_epoch(epoch, cfg.policy, store.max_precision())?;
        let j_e = lr_shift_for_epoch(epoch, cfg.lr_shift, cfg.decay_epoch);
        let mut order: Vec<usize> = (0..store.rows()).collect();
        if let Some(rng) = rng.as_mut() {
            order.shuffle(rng);
        }
        order.resize(slots, usize::MAX); // padding lanes
        for lanes in order.chunks(batch) {
            train_batch(store, &mut model, s_e, j_e, cfg.loss, lanes)?;
        }

        let loss = evaluate_loss(store, model.weights(), cfg.loss, s_e)?;
        let report = simulate_epoch(&SimConfig {
            samples: store.rows() as u64,
            features: store.cols() as u64,
            precision: s_e,
            batch: cfg.batch,
            chaining: true,
            latency_override: None,
        })?;
        let estimate = predict(
            cfg.batch,
            store.cols() as u64,
            s_e,
            store.rows() as u64,
            true,
            profile,
        )?;
        metrics.push(EpochMetrics {
            epoch,
            precision: s_e,
            loss,
            traffic_bits: store.rows() as u64 * memory_traffic_bits(store.cols() as u64, s_e)?,
            wall_ms: report.wall_ms(),
            predicted_ms: estimate.epoch_seconds * 1e3,
        });
    }
    Ok((model, metrics))
}

/// Anything the loss evaluator can read quantized samples from.
pub trait SampleSource {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn max_precision(&self) -> u8;
    fn label(&self, row: usize) -> Fixed;
    /// Fills `out` with the row's codes truncated to `s` bits.
    fn codes_into(&self, row: usize, s: u8, out: &mut Vec<u32>) -> Result<()>;
}

impl SampleSource for FixedPointTable {
    fn rows(&self) -> usize {
        self.rows()
    }
    fn cols(&self) -> usize {
        self.cols()
    }
    fn max_precision(&self) -> u8 {
        self.max_precision()
    }
    fn label(&self, row: usize) -> Fixed {
        self.label(row)
    }
    fn codes_into(&self, row: usize, s: u8, out: &mut Vec<u32>) -> Result<()> {
        out.clear();
        for &code in self.row_codes(row) {
            out.push(truncate_code(code, self.max_precision(), s)?);
        }
        Ok(())
    }
}

impl SampleSource for WeavingStore {
    fn rows(&self) -> usize {
        self.rows()
    }
    fn cols(&self) -> usize {
        self.cols()
    }
    fn max_precision(&self) -> u8 {
        self.max_precision()
    }
    fn label(&self, row: usize) -> Fixed {
        self.label(row)
    }
    fn codes_into(&self, row: usize, s: u8, out: &mut Vec<u32>) -> Result<()> {
        *out = self.read_sample(row, s)?;
        Ok(())
    }
}

/// Mean loss over the true samples at precision `s`, computed in double
/// precision on dequantized codes. Least squares uses `0.5 (a.x - b)^2`;
/// logistic uses the log loss with the true sigmoid (the fixed-point table
/// is a training-path device, not a reporting device). Reduction order is
/// fixed (by sample index), so the result is reproducible bit for bit.
pub fn evaluate_loss<D: SampleSource>(
    data: &D,
    weights: &[Fixed],
    loss: LossKind,
    s: u8,
) -> Result<f64> {
    if s < 1 || s > data.max_precision() {
        return Err(Error::PrecisionRange {
            s: s as u32,
            max: data.max_precision() as u32,
        });
    }
    if weights.len() < data.cols() {
        return Err(Error::DimensionMismatch {
            got: weights.len(),
            expected: data.cols(),
        });
    }
    let scale = (1u64 << s) as f64;
    let w: Vec<f64> = weights.iter().map(|x| x.to_f64()).collect();
    let mut codes = Vec::new();
    let mut total = 0.0;
    for row in 0..data.rows() {
        data.codes_into(row, s, &mut codes)?;
        let mut dot = 0.0;
        for (m, &code) in codes.iter().enumerate() {
            dot += code as f64 / scale * w[m];
        }
        let b = data.label(row).to_f64();
        total += match loss {
            LossKind::LinReg => 0.5 * (dot - b) * (dot - b),
            LossKind::LogReg => {
                let p = (1.0 / (1.0 + (-dot).exp())).clamp(1e-12, 1.0 - 1e-12);
                -(b * p.ln() + (1.0 - b) * (1.0 - p).ln())
            }
        };
    }
    Ok(total / data.rows() as f64)
}
