//! Shared test fixtures: the double-precision SGD reference and the
//! standard synthetic regression problem.

use mlweave::fixed::Fixed;
use mlweave::quantize::{normalize_dataset, quantize_full, FixedPointTable};
use mlweave::synth::{linear_problem, SynthConfig};
use mlweave::trainer::{lr_shift_for_epoch, LossKind};
use mlweave::weaving::WeavingStore;

/// The dataset used by the trainer-equivalence and precision-trend checks:
/// 256 samples, 16 features, a planted linear model, and mild label noise.
pub const SYNTH_ROWS: usize = 256;
pub const SYNTH_COLS: usize = 16;
pub const SYNTH_NOISE: f64 = 0.2;
pub const SYNTH_SEED: u64 = 20_240_817;

pub fn synth_table(s_max: u8) -> FixedPointTable {
    let (raw, _) = linear_problem(&SynthConfig {
        rows: SYNTH_ROWS,
        cols: SYNTH_COLS,
        noise_std: SYNTH_NOISE,
        seed: SYNTH_SEED,
    })
    .expect("synthetic dataset");
    let norm = normalize_dataset(&raw).expect("normalize");
    quantize_full(&norm, s_max).expect("quantize")
}

pub fn synth_store(s_max: u8) -> WeavingStore {
    WeavingStore::build(&synth_table(s_max))
}

/// Double-precision mini-batch SGD over the same dequantized inputs the
/// bit-serial trainer consumes: features `truncate(code, s) / 2^s`, labels
/// from their fixed-point representation, learning rate `2^-j`, batch
/// average by `1/B`, sequential sample order, zero-padded tail batches.
/// Returns the model after `epochs` epochs and the per-epoch mean loss.
pub struct FloatSgd {
    pub weights: Vec<f64>,
    pub epoch_losses: Vec<f64>,
}

pub fn float_sgd_reference(
    store: &WeavingStore,
    loss: LossKind,
    s: u8,
    batch: usize,
    lr_shift: u32,
    decay_epoch: u32,
    epochs: u32,
) -> FloatSgd {
    let rows = store.rows();
    let cols = store.cols();
    let scale = (1u64 << s) as f64;
    let features: Vec<Vec<f64>> = (0..rows)
        .map(|i| {
            store
                .read_sample(i, s)
                .expect("read sample")
                .into_iter()
                .map(|code| code as f64 / scale)
                .collect()
        })
        .collect();
    let labels: Vec<f64> = (0..rows).map(|i| store.label(i).to_f64()).collect();

    let mut weights = vec![0.0f64; cols];
    let mut epoch_losses = Vec::with_capacity(epochs as usize);
    let slots = rows.div_ceil(batch) * batch;
    for epoch in 1..=epochs {
        let lr = 0.5f64.powi(lr_shift_for_epoch(epoch, lr_shift, decay_epoch) as i32);
        for start in (0..slots).step_by(batch) {
            let mut gradient = vec![0.0f64; cols];
            for lane in start..start + batch {
                if lane >= rows {
                    continue;
                }
                let a = &features[lane];
                let dot: f64 = a.iter().zip(&weights).map(|(x, w)| x * w).sum();
                let d = match loss {
                    LossKind::LinReg => dot - labels[lane],
                    LossKind::LogReg => 1.0 / (1.0 + (-dot).exp()) - labels[lane],
                };
                let step = d * lr;
                for (g, x) in gradient.iter_mut().zip(a) {
                    *g += step * x;
                }
            }
            for (w, g) in weights.iter_mut().zip(&gradient) {
                *w -= g / batch as f64;
            }
        }
        let mut total = 0.0;
        for i in 0..rows {
            let dot: f64 = features[i].iter().zip(&weights).map(|(x, w)| x * w).sum();
            total += match loss {
                LossKind::LinReg => 0.5 * (dot - labels[i]) * (dot - labels[i]),
                LossKind::LogReg => {
                    let p = (1.0 / (1.0 + (-dot).exp())).clamp(1e-12, 1.0 - 1e-12);
                    -(labels[i] * p.ln() + (1.0 - labels[i]) * (1.0 - p).ln())
                }
            };
        }
        epoch_losses.push(total / rows as f64);
    }
    FloatSgd {
        weights,
        epoch_losses,
    }
}

/// Root-mean-square distance between a fixed-point model's true weights
/// and a float reference model.
pub fn rms_distance(fixed: &[Fixed], float: &[f64]) -> f64 {
    assert_eq!(fixed.len(), float.len());
    let sum: f64 = fixed
        .iter()
        .zip(float)
        .map(|(a, b)| {
            let d = a.to_f64() - b;
            d * d
        })
        .sum();
    (sum / fixed.len() as f64).sqrt()
}
