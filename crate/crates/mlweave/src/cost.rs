//! Analytic throughput and epoch-time prediction.
//!
//! The accelerator consumes one 512-bit line per cycle at 400 MHz when the
//! dot-product stage is busy, for a peak of 25.6 GB/s (decimal GB). Actual
//! throughput is the minimum of two ceilings:
//!
//! * **Compute** ([`th_comp`]): each batch keeps the dot stage busy for
//!   `(B/8) * K * s` cycles (`K = ceil(M/64)` chunks), then pays for the
//!   model update. With chaining, the next batch's reads hide all but the
//!   pipeline latency `L = 40 + 2s`; without chaining they also wait out the
//!   `K * s`-cycle update stream.
//! * **Memory** ([`th_mem`]): an empirical platform profile. Skipping
//!   planes hurts DRAM row-buffer locality, so low precisions read below
//!   the peak; the default table is 10.2 / 13.3 / 13.8 GB/s for s = 1/2/3
//!   and 14.8 GB/s from s = 4 up.
//!
//! Predicted epoch time is the per-epoch traffic (`N` samples times
//! [`memory_traffic_bits`]) divided by the achieved throughput.

use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};
use crate::weaving::memory_traffic_bits;

/// Peak line-scan throughput: 400 MHz x 64 bytes per cycle, decimal GB.
pub const PEAK_GBPS: f64 = 25.6;

/// Accelerator clock rate.
pub const CLOCK_HZ: f64 = 400.0e6;

/// Pipeline latency from read start to the first model write: `40 + 2s`
/// cycles (an empirical constant of the design).
pub fn pipeline_latency(s: u8) -> u64 {
    40 + 2 * s as u64
}

pub(crate) fn check_batch(batch: u32) -> Result<()> {
    if batch < 8 || !batch.is_power_of_two() {
        return Err(Error::BatchSize { got: batch });
    }
    Ok(())
}

pub(crate) fn check_precision(s: u8) -> Result<()> {
    if !(1..=32).contains(&s) {
        return Err(Error::PrecisionRange { s: s as u32, max: 32 });
    }
    Ok(())
}

/// Compute-side throughput ceiling in GB/s.
///
/// `busy = (B/8) * K * s` cycles of useful line reads per batch;
/// the batch period adds `L` (chaining) or `K*s + L` (no chaining) cycles.
pub fn th_comp(batch: u32, features: u64, s: u8, chaining: bool) -> Result<f64> {
    check_batch(batch)?;
    check_precision(s)?;
    if features == 0 {
        return Err(Error::EmptyDataset { rows: 0, cols: 0 });
    }
    let k = features.div_ceil(64) as f64;
    let s_f = s as f64;
    let busy = (batch as f64 / 8.0) * k * s_f;
    let l = pipeline_latency(s) as f64;
    let period = if chaining {
        busy + l
    } else {
        busy + k * s_f + l
    };
    Ok(busy / period * PEAK_GBPS)
}

/// Empirical memory-side throughput profile: GB/s per precision, as a step
/// function (the entry with the largest `s` not exceeding the query wins).
#[derive(Clone, Debug, PartialEq)]
pub struct MemoryProfile {
    entries: Vec<(u8, f64)>,
}

impl Default for MemoryProfile {
    /// The measured platform defaults: 10.2 / 13.3 / 13.8 GB/s for
    /// s = 1/2/3 and 14.8 GB/s for s >= 4.
    fn default() -> Self {
        MemoryProfile {
            entries: vec![(1, 10.2), (2, 13.3), (3, 13.8), (4, 14.8)],
        }
    }
}

impl MemoryProfile {
    /// Builds a profile from `(s, GB/s)` pairs. Entries are sorted; the
    /// table must cover `s = 1` and every throughput must be positive.
    pub fn new(mut entries: Vec<(u8, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Config("memory profile has no entries".into()));
        }
        entries.sort_by_key(|&(s, _)| s);
        for window in entries.windows(2) {
            if window[0].0 == window[1].0 {
                return Err(Error::Config(format!(
                    "memory profile lists s = {} twice",
                    window[0].0
                )));
            }
        }
        for &(s, gbps) in &entries {
            check_precision(s)?;
            if !(gbps.is_finite() && gbps > 0.0) {
                return Err(Error::Config(format!(
                    "memory profile throughput {gbps} for s = {s} is not positive"
                )));
            }
        }
        if entries[0].0 != 1 {
            return Err(Error::Config("memory profile must cover s = 1".into()));
        }
        Ok(MemoryProfile { entries })
    }

    /// Parses the `s gbps` key-value text format (whitespace-separated,
    /// `#` starts a comment).
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse = |field: &str, what: &str| {
                field.parse::<f64>().map_err(|_| Error::Parse {
                    source_name: "memory profile".into(),
                    line: idx + 1,
                    msg: format!("{what} `{field}` is not a number"),
                })
            };
            let mut fields = line.split_whitespace();
            let (s, gbps) = match (fields.next(), fields.next(), fields.next()) {
                (Some(s), Some(gbps), None) => (parse(s, "precision")?, parse(gbps, "throughput")?),
                _ => {
                    return Err(Error::Parse {
                        source_name: "memory profile".into(),
                        line: idx + 1,
                        msg: format!("expected `s gbps`, got `{line}`"),
                    })
                }
            };
            if s.fract() != 0.0 || !(1.0..=32.0).contains(&s) {
                return Err(Error::Parse {
                    source_name: "memory profile".into(),
                    line: idx + 1,
                    msg: format!("precision `{s}` must be an integer in 1..=32"),
                });
            }
            entries.push((s as u8, gbps));
        }
        Self::new(entries)
    }

    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    /// Throughput in GB/s for precision `s`.
    pub fn lookup(&self, s: u8) -> f64 {
        debug_assert!(s >= 1);
        self.entries
            .iter()
            .take_while(|&&(level, _)| level <= s)
            .last()
            .expect("profile covers s = 1")
            .1
    }

    pub fn entries(&self) -> &[(u8, f64)] {
        &self.entries
    }
}

/// Memory-side throughput ceiling in GB/s for precision `s`.
pub fn th_mem(s: u8, profile: &MemoryProfile) -> Result<f64> {
    check_precision(s)?;
    Ok(profile.lookup(s))
}

/// A full prediction for one configuration and mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThroughputEstimate {
    pub chaining: bool,
    pub th_comp_gbps: f64,
    pub th_mem_gbps: f64,
    /// Achieved throughput: `min(th_comp, th_mem)`.
    pub th_gbps: f64,
    /// Per-sample traffic in bits at this precision.
    pub traffic_bits_per_sample: u64,
    /// Predicted wall time for one epoch over `samples` rows, in seconds.
    pub epoch_seconds: f64,
}

/// Predicts throughput and epoch time for one configuration.
pub fn predict(
    batch: u32,
    features: u64,
    s: u8,
    samples: u64,
    chaining: bool,
    profile: &MemoryProfile,
) -> Result<ThroughputEstimate> {
    if samples == 0 {
        return Err(Error::EmptyDataset { rows: 0, cols: 0 });
    }
    let comp = th_comp(batch, features, s, chaining)?;
    let mem = th_mem(s, profile)?;
    let th = comp.min(mem);
    let traffic = memory_traffic_bits(features, s)?;
    // 1 GB/s = 8e9 bits/s (decimal GB).
    let epoch_seconds = (samples as f64 * traffic as f64) / (th * 8.0e9);
    Ok(ThroughputEstimate {
        chaining,
        th_comp_gbps: comp,
        th_mem_gbps: mem,
        th_gbps: th,
        traffic_bits_per_sample: traffic,
        epoch_seconds,
    })
}

/// One (features, precision) cell of a chaining-vs-no-chaining sweep.
#[derive(Clone, Copy, Debug)]
pub struct SpeedupCell {
    pub features: u64,
    pub precision: u8,
    pub chain: ThroughputEstimate,
    pub no_chain: ThroughputEstimate,
    /// Epoch-time ratio no-chaining / chaining (>= 1).
    pub speedup: f64,
}

/// The sweep over a (features x precision) grid at one batch size.
#[derive(Clone, Debug)]
pub struct SpeedupSurface {
    pub batch: u32,
    pub cells: Vec<SpeedupCell>,
}

impl SpeedupSurface {
    /// The cell with the largest chaining speedup.
    pub fn max_cell(&self) -> &SpeedupCell {
        self.cells
            .iter()
            .max_by(|a, b| a.speedup.total_cmp(&b.speedup))
            .expect("surface is never empty")
    }

    /// The precision with the best speedup for one feature count.
    pub fn peak_precision_for(&self, features: u64) -> Option<u8> {
        self.cells
            .iter()
            .filter(|cell| cell.features == features)
            .max_by(|a, b| a.speedup.total_cmp(&b.speedup))
            .map(|cell| cell.precision)
    }
}

/// Evaluates both modes over a grid and reports per-cell speedups.
pub fn speedup_surface(
    batch: u32,
    features: &[u64],
    precisions: &[u8],
    profile: &MemoryProfile,
) -> Result<SpeedupSurface> {
    if features.is_empty() || precisions.is_empty() {
        return Err(Error::Config("speedup grid is empty".into()));
    }
    let mut cells = Vec::with_capacity(features.len() * precisions.len());
    for &m in features {
        for &s in precisions {
            // Epoch time is linear in N, so the ratio is N-independent.
            let chain = predict(batch, m, s, 1, true, profile)?;
            let no_chain = predict(batch, m, s, 1, false, profile)?;
            cells.push(SpeedupCell {
                features: m,
                precision: s,
                chain,
                no_chain,
                speedup: no_chain.epoch_seconds / chain.epoch_seconds,
            });
        }
    }
    Ok(SpeedupSurface { batch, cells })
}
