//! Seeded synthetic problem generators with known planted models.
//!
//! Features are uniform in `[0, 1)` (already in the normalized range), the
//! planted weights uniform in `[-1, 1)`. Labels are `a.w*` plus Gaussian
//! noise for least squares, or Bernoulli draws around a centered logistic
//! margin for classification. Everything derives from one seed, so datasets
//! are reproducible across runs and platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::quantize::RawMatrix;

/// Shape and randomness of a generated problem.
#[derive(Clone, Copy, Debug)]
pub struct SynthConfig {
    pub rows: usize,
    pub cols: usize,
    /// Standard deviation of the label noise (least squares only).
    pub noise_std: f64,
    pub seed: u64,
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; the lower bound keeps ln() finite.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn planted_parts(cfg: &SynthConfig) -> (ChaCha8Rng, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let weights: Vec<f64> = (0..cfg.cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let values: Vec<f64> = (0..cfg.rows * cfg.cols).map(|_| rng.gen::<f64>()).collect();
    (rng, weights, values)
}

/// A least-squares problem: `label = a . w* + noise`.
/// Returns the dataset and the planted weights.
pub fn linear_problem(cfg: &SynthConfig) -> Result<(RawMatrix, Vec<f64>)> {
    let (mut rng, weights, values) = planted_parts(cfg);
    let labels: Vec<f64> = (0..cfg.rows)
        .map(|i| {
            let row = &values[i * cfg.cols..(i + 1) * cfg.cols];
            let signal: f64 = row.iter().zip(&weights).map(|(a, w)| a * w).sum();
            signal + cfg.noise_std * gaussian(&mut rng)
        })
        .collect();
    Ok((RawMatrix::new(cfg.rows, cfg.cols, values, labels)?, weights))
}

/// A binary classification problem: labels in {0, 1} drawn with probability
/// `sigma(4 * (a . w* - mean margin))`, so classes are balanced and
/// moderately separable. Returns the dataset and the planted weights.
pub fn logistic_problem(cfg: &SynthConfig) -> Result<(RawMatrix, Vec<f64>)> {
    let (mut rng, weights, values) = planted_parts(cfg);
    let margins: Vec<f64> = (0..cfg.rows)
        .map(|i| {
            let row = &values[i * cfg.cols..(i + 1) * cfg.cols];
            row.iter().zip(&weights).map(|(a, w)| a * w).sum()
        })
        .collect();
    let center = margins.iter().sum::<f64>() / cfg.rows.max(1) as f64;
    let labels: Vec<f64> = margins
        .iter()
        .map(|m| {
            let p = 1.0 / (1.0 + (-4.0 * (m - center)).exp());
            if rng.gen::<f64>() < p {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok((RawMatrix::new(cfg.rows, cfg.cols, values, labels)?, weights))
}
