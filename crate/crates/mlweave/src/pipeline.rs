//! Event-level timing simulation of the read → dot-product → update
//! pipeline, with read-after-write hazard tracking and optional chaining.
//!
//! Correctness of training values never depends on this module: the trainer
//! always computes synchronous mini-batch SGD. The simulator answers the
//! timing question — how many cycles an epoch takes once model-update
//! latency and the hazard interlock are accounted for.
//!
//! The interlock is a pair of credit counters. `wr_counter` starts at one
//! batch worth of credits (`B`) and grows by `B` when a batch's update
//! commits; `rd_counter` grows by 8 whenever a group of 8 samples is granted
//! a read, and a grant requires `rd_counter != wr_counter`. A batch may
//! therefore read only as far as its predecessor has committed, which is the
//! read-after-write guarantee.
//!
//! Per batch of `B` samples the dot stage is busy `(B/8) * K * s` cycles
//! (`K = ceil(M/64)` line reads per group, `s` planes each). The first model
//! write trails the batch's reads by the pipeline latency `L = 40 + 2s`, and
//! the update stream itself lasts `K * s` cycles. Without chaining the next
//! batch waits for the full update; with chaining it starts `s` cycles after
//! the update stream begins, just far enough behind to always read fresh
//! values.

use std::collections::VecDeque;

use crate::cost::{check_batch, check_precision, pipeline_latency, CLOCK_HZ, PEAK_GBPS};
use crate::error::{Error, Result};

/// The read-after-write credit counters guarding model reads.
#[derive(Clone, Debug)]
pub struct HazardState {
    batch: u32,
    wr_counter: u64,
    rd_counter: u64,
}

impl HazardState {
    /// Fresh counters for batch size `B`: writes start with one batch of
    /// credit, reads at zero.
    pub fn new(batch: u32) -> Result<Self> {
        check_batch(batch)?;
        Ok(HazardState {
            batch,
            wr_counter: batch as u64,
            rd_counter: 0,
        })
    }

    /// Requests a read grant for one 8-sample group: granted (and counted)
    /// when `rd_counter != wr_counter`, denied otherwise.
    pub fn try_read(&mut self) -> bool {
        if self.rd_counter != self.wr_counter {
            self.rd_counter += 8;
            debug_assert!(self.rd_counter <= self.wr_counter);
            true
        } else {
            false
        }
    }

    /// Commits one batch's model update: always succeeds, adds `B` credits.
    pub fn commit(&mut self) {
        self.wr_counter += self.batch as u64;
    }

    pub fn rd_counter(&self) -> u64 {
        self.rd_counter
    }

    pub fn wr_counter(&self) -> u64 {
        self.wr_counter
    }

    /// The safety invariant: reads never outrun write credits.
    pub fn invariant_holds(&self) -> bool {
        self.rd_counter <= self.wr_counter
    }
}

/// Parameters for one simulated epoch.
#[derive(Clone, Copy, Debug)]
pub struct SimConfig {
    pub samples: u64,
    pub features: u64,
    pub precision: u8,
    pub batch: u32,
    pub chaining: bool,
    /// Overrides the `40 + 2s` pipeline latency; must be at least `s`.
    pub latency_override: Option<u64>,
}

/// Cycle accounting for one simulated epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleReport {
    pub total_cycles: u64,
    /// Cycles the dot stage spent consuming lines.
    pub busy_cycles: u64,
    /// `total - busy`: latency and hazard stalls.
    pub stall_cycles: u64,
    /// `busy / total`.
    pub utilization: f64,
    /// `utilization * 25.6 GB/s`: achieved line-scan throughput.
    pub throughput_gbps: f64,
    pub batches: u64,
}

impl CycleReport {
    /// Simulated wall time of the epoch at the 400 MHz clock, in
    /// milliseconds.
    pub fn wall_ms(&self) -> f64 {
        self.total_cycles as f64 / CLOCK_HZ * 1e3
    }
}

/// Simulates one epoch at batch granularity and reports cycle counts.
///
/// Samples are padded to whole batches, exactly as the trainer pads them.
/// Every group read passes through [`HazardState`], so a schedule that
/// violated read-after-write ordering would panic rather than report.
pub fn simulate_epoch(cfg: &SimConfig) -> Result<CycleReport> {
    check_batch(cfg.batch)?;
    check_precision(cfg.precision)?;
    if cfg.samples == 0 || cfg.features == 0 {
        return Err(Error::EmptyDataset {
            rows: cfg.samples as usize,
            cols: cfg.features as usize,
        });
    }
    let s = cfg.precision as u64;
    let latency = cfg.latency_override.unwrap_or(pipeline_latency(cfg.precision));
    if latency < s {
        return Err(Error::Config(format!(
            "latency override {latency} is shorter than the {s}-cycle update lead"
        )));
    }
    let k = cfg.features.div_ceil(64);
    let groups_per_batch = (cfg.batch / 8) as u64;
    let batches = cfg.samples.div_ceil(cfg.batch as u64);
    let group_busy = k * s;

    let mut hazard = HazardState::new(cfg.batch)?;
    // Commit times of batches whose credits the hazard unit has not
    // consumed yet (applied lazily, in order, when reads run dry).
    let mut pending_commits: VecDeque<u64> = VecDeque::new();
    let mut dot_free = 0u64;
    let mut total_end = 0u64;

    for _ in 0..batches {
        let mut compute_done = 0u64;
        for _ in 0..groups_per_batch {
            let mut now = dot_free;
            while !hazard.try_read() {
                let commit_at = pending_commits
                    .pop_front()
                    .expect("a commit is always pending when reads are blocked");
                now = now.max(commit_at);
                hazard.commit();
            }
            assert!(hazard.invariant_holds(), "read outran write credits");
            compute_done = now + group_busy;
            dot_free = compute_done;
        }
        let update_start = compute_done + (latency - s);
        let update_done = update_start + k * s;
        pending_commits.push_back(if cfg.chaining {
            // The reader may trail the update stream by s cycles.
            update_start + s
        } else {
            update_done
        });
        total_end = update_done;
    }

    let busy_cycles = batches * groups_per_batch * group_busy;
    let utilization = busy_cycles as f64 / total_end as f64;
    Ok(CycleReport {
        total_cycles: total_end,
        busy_cycles,
        stall_cycles: total_end - busy_cycles,
        utilization,
        throughput_gbps: utilization * PEAK_GBPS,
        batches,
    })
}
