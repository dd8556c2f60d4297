//! The analytic throughput model: compute ceiling vs memory ceiling, and
//! where chaining pays off the most.
//!
//! Run with: `cargo run --example cost_surface`

use mlweave::cost::{predict, speedup_surface, th_comp, th_mem, MemoryProfile, PEAK_GBPS};

fn main() -> mlweave::Result<()> {
    let profile = MemoryProfile::default();

    // The memory ceiling is an empirical per-precision table: single-plane
    // scans use the row buffer poorly, wider scans approach the peak.
    println!("memory ceiling by precision (default profile, peak {PEAK_GBPS} GB/s):");
    for s in [1u8, 2, 3, 4, 8, 16, 32] {
        println!("  s={s:>2}: {:.1} GB/s", th_mem(s, &profile)?);
    }

    // The compute ceiling depends on how much work each batch carries
    // relative to the fixed pipeline latency.
    println!("\ncompute ceiling at B=8 (chaining / no-chaining), GB/s:");
    println!("  {:>8} {:>10} {:>12}", "M", "s=2", "s=8");
    for m in [500u64, 2048, 5000] {
        let row: Vec<String> = [2u8, 8]
            .iter()
            .map(|&s| {
                Ok(format!(
                    "{:.2}/{:.2}",
                    th_comp(8, m, s, true)?,
                    th_comp(8, m, s, false)?
                ))
            })
            .collect::<mlweave::Result<_>>()?;
        println!("  {m:>8} {:>10} {:>12}", row[0], row[1]);
    }

    // The achieved throughput is the lower ceiling; epoch time follows.
    let est = predict(8, 2048, 8, 100_000, true, &profile)?;
    println!(
        "\nM=2048, s=8, B=8, chaining: min({:.2}, {:.2}) = {:.2} GB/s -> {:.2} ms per 100k-sample epoch",
        est.th_comp_gbps,
        est.th_mem_gbps,
        est.th_gbps,
        est.epoch_seconds * 1e3
    );

    // Chaining speedup across the (features, precision) plane. Narrow
    // models peak at higher precision: with little work per batch, the
    // pipeline latency dominates unless extra bit planes fill it.
    let features = [500u64, 1000, 2000, 3000, 4000, 5000];
    let precisions = [1u8, 2, 3, 4, 5, 6, 7, 8];
    let surface = speedup_surface(8, &features, &precisions, &profile)?;

    println!("\nchaining speedup surface (epoch-time ratio no-chaining / chaining):");
    print!("  {:>6}", "M\\s");
    for s in precisions {
        print!(" {s:>6}");
    }
    println!();
    for &m in &features {
        print!("  {m:>6}");
        for cell in surface.cells.iter().filter(|c| c.features == m) {
            print!(" {:>6.3}", cell.speedup);
        }
        println!();
    }

    let best = surface.max_cell();
    println!(
        "\nlargest speedup: {:.3}x at M={}, s={}",
        best.speedup, best.features, best.precision
    );
    for &m in &[500u64, 5000] {
        println!(
            "peak-speedup precision for M={m}: s={}",
            surface.peak_precision_for(m).unwrap()
        );
    }
    Ok(())
}
