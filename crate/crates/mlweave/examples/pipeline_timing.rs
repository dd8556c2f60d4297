//! Cycle-level pipeline behavior: hazard credits, stalls, and chaining.
//!
//! Run with: `cargo run --example pipeline_timing`

use mlweave::cost::{pipeline_latency, th_comp, PEAK_GBPS};
use mlweave::pipeline::{simulate_epoch, HazardState, SimConfig};

fn main() -> mlweave::Result<()> {
    // The read guard is a pair of counters: a reader may start a group of 8
    // samples only while rd_counter != wr_counter; each committed batch
    // adds B read credits.
    let mut hazard = HazardState::new(8)?;
    println!("hazard walk, B=8 (one group per batch):");
    println!("  fresh:        rd={} wr={} read allowed: {}", hazard.rd_counter(), hazard.wr_counter(), hazard.rd_counter() != hazard.wr_counter());
    assert!(hazard.try_read());
    println!("  after read:   rd={} wr={} read allowed: {}", hazard.rd_counter(), hazard.wr_counter(), hazard.try_read());
    hazard.commit();
    println!("  after commit: rd={} wr={} read allowed: {}", hazard.rd_counter(), hazard.wr_counter(), hazard.rd_counter() != hazard.wr_counter());

    // One batch at M=2048, s=8, B=8 occupies the dot stage for 32 chunks x
    // 8 planes = 256 cycles, and its model update streams out over another
    // 256. With chaining the next batch starts reading as soon as the first
    // updated chunk is out; without it the reader waits for the whole
    // update to finish.
    let base = SimConfig {
        samples: 80_000,
        features: 2048,
        precision: 8,
        batch: 8,
        chaining: true,
        latency_override: None,
    };
    let chain = simulate_epoch(&base)?;
    let no_chain = simulate_epoch(&SimConfig { chaining: false, ..base })?;
    println!(
        "\nM=2048, s=8, B=8, latency L = {} cycles:",
        pipeline_latency(8)
    );
    for (name, report) in [("chaining", &chain), ("no-chaining", &no_chain)] {
        println!(
            "  {name:<12} total={:>9} cycles  busy={:>8}  stalls={:>8}  utilization={:.4}  throughput={:.2} GB/s",
            report.total_cycles, report.busy_cycles, report.stall_cycles, report.utilization, report.throughput_gbps
        );
    }
    println!(
        "  chaining speeds this epoch up by {:.3}x",
        no_chain.total_cycles as f64 / chain.total_cycles as f64
    );

    // With a single 64-feature chunk there is nothing to overlap: the model
    // finishes updating exactly when its first (and only) chunk does, so
    // both modes take the same number of cycles.
    let narrow = SimConfig { features: 64, precision: 32, ..base };
    let narrow_chain = simulate_epoch(&narrow)?;
    let narrow_no_chain = simulate_epoch(&SimConfig { chaining: false, ..narrow })?;
    println!(
        "\nM=64, s=32 (one chunk per sample): chaining {} cycles, no-chaining {} cycles",
        narrow_chain.total_cycles, narrow_no_chain.total_cycles
    );

    // The simulator converges on the closed-form compute ceiling.
    let cfg = SimConfig {
        samples: 80_000,
        features: 2048,
        precision: 8,
        batch: 8,
        chaining: true,
        latency_override: None,
    };
    let report = simulate_epoch(&cfg)?;
    let model = th_comp(cfg.batch, cfg.features, cfg.precision, cfg.chaining)?;
    println!(
        "\nM=2048, s=8: simulated {:.3} GB/s vs analytic ceiling {:.3} GB/s (peak {PEAK_GBPS}), ratio {:.4}",
        report.throughput_gbps,
        model,
        report.throughput_gbps / model
    );
    println!(
        "simulated wall time for the epoch at 400 MHz: {:.3} ms",
        report.wall_ms()
    );
    Ok(())
}
