//! End-to-end training on a synthetic regression problem at several
//! precisions.
//!
//! Run with: `cargo run --example train_synthetic`
//!
//! The same 32-bit store serves every run: an s-bit run simply stops
//! reading after the top s bit planes. Low precision converges to a worse
//! loss; the dynamic schedule matches high precision while reading far
//! fewer bits in total.

use mlweave::quantize::{normalize_dataset, quantize_full};
use mlweave::schedule::PrecisionPolicy;
use mlweave::synth::{linear_problem, SynthConfig};
use mlweave::trainer::{train, LossKind, TrainConfig};
use mlweave::weaving::WeavingStore;

fn main() -> mlweave::Result<()> {
    let (raw, planted) = linear_problem(&SynthConfig {
        rows: 256,
        cols: 16,
        noise_std: 0.2,
        seed: 20_240_817,
    })?;
    println!(
        "synthetic linear problem: {} samples x {} features, planted weights like {:.3?} ...",
        raw.rows(),
        raw.cols(),
        &planted[..4.min(planted.len())]
    );

    let norm = normalize_dataset(&raw)?;
    let store = WeavingStore::build(&quantize_full(&norm, 32)?);

    let base = TrainConfig {
        loss: LossKind::LinReg,
        batch: 8,
        lr_shift: 7,
        decay_epoch: u32::MAX,
        epochs: 30,
        policy: PrecisionPolicy::Fixed(32),
        shuffle_seed: None,
    };

    let policies = [
        ("s=32 (full)", PrecisionPolicy::Fixed(32)),
        ("s=8", PrecisionPolicy::Fixed(8)),
        ("s=2", PrecisionPolicy::Fixed(2)),
        ("schedule", PrecisionPolicy::Dynamic),
    ];

    println!(
        "\n{:<12} {:>12} {:>12} {:>16} {:>12}",
        "run", "loss@10", "loss@30", "total Mbit read", "sim ms"
    );
    for (name, policy) in policies {
        let cfg = TrainConfig { policy, ..base };
        let (_, metrics) = train(&store, &cfg)?;
        let total_bits: u64 = metrics.iter().map(|m| m.traffic_bits).sum();
        let total_ms: f64 = metrics.iter().map(|m| m.wall_ms).sum();
        println!(
            "{:<12} {:>12.6} {:>12.6} {:>16.2} {:>12.3}",
            name,
            metrics[9].loss,
            metrics[29].loss,
            total_bits as f64 / 1e6,
            total_ms
        );
    }

    // The per-epoch metrics carry everything needed for loss-vs-time and
    // loss-vs-traffic curves.
    let cfg = TrainConfig { policy: PrecisionPolicy::Dynamic, epochs: 12, ..base };
    let (model, metrics) = train(&store, &cfg)?;
    println!("\ndynamic-schedule run, epoch by epoch:");
    for m in &metrics {
        println!(
            "  epoch {:>2}  s={}  loss={:.6}  traffic_bits={}  wall_ms={:.4}",
            m.epoch, m.precision, m.loss, m.traffic_bits, m.wall_ms
        );
    }
    println!(
        "\nfirst learned weights: {:.4?}",
        model.weights()[..4].iter().map(|w| w.to_f64()).collect::<Vec<_>>()
    );
    Ok(())
}
