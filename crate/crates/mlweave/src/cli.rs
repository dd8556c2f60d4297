//! Command-line surface: `quantize`, `weave`, `train`, `bench`, `predict`.
//!
//! The binary target is a thin wrapper around [`run`]; everything here is
//! library code so integration tests can drive command plumbing directly.
//! Commands print human-readable summaries to stdout and persist artifacts
//! (model JSON, metrics CSV, `.mlwv` stores, benchmark CSVs) to the paths
//! given by flags. All training output is deterministic for a given input
//! and seed, so metrics files are byte-identical across runs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::cost::{predict, speedup_surface, th_comp, MemoryProfile, PEAK_GBPS};
use crate::dataset::{ingest, DatasetFormat};
use crate::error::{Error, Result};
use crate::fixed::FRAC_BITS;
use crate::pipeline::{simulate_epoch, SimConfig};
use crate::quantize::{normalize_dataset, quantize_full, FixedPointTable};
use crate::schedule::PrecisionPolicy;
use crate::trainer::{train_with_profile, EpochMetrics, LossKind, TrainConfig};
use crate::weaving::WeavingStore;

/// Environment variable naming a default memory-throughput profile file,
/// consulted when a command has no `--mem-profile` flag.
pub const MEM_PROFILE_ENV: &str = "MLWEAVE_MEM_PROFILE";

/// Fixed header of the training metrics CSV.
pub const METRICS_HEADER: &str = "epoch,s,loss,traffic_bits,wall_ms,predicted_ms";

/// Bit-serial training on bit-plane-woven data, with cycle-level timing
/// simulation and an analytic throughput model.
#[derive(Debug, Parser)]
#[command(name = "mlweave", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize a dataset and report its fixed-point quantization.
    Quantize(QuantizeArgs),
    /// Quantize a dataset and write the bit-plane store (.mlwv).
    Weave(WeaveArgs),
    /// Train a linear model with bit-serial mini-batch SGD.
    Train(TrainArgs),
    /// Sweep the simulator and cost model over a parameter grid.
    Bench(BenchArgs),
    /// Predict throughput and epoch time for one configuration.
    Predict(PredictArgs),
}

/// Flags shared by every command that reads a raw dataset file.
#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Input dataset file.
    #[arg(long)]
    pub dataset: PathBuf,

    /// Input format: `libsvm` (sparse, 1-indexed `label idx:val`) or `csv`
    /// (label-first numeric rows).
    #[arg(long, default_value = "libsvm")]
    pub format: DatasetFormat,

    /// Feature count for sparse input; defaults to the largest index seen.
    #[arg(long)]
    pub cols: Option<usize>,
}

impl DatasetArgs {
    fn load(&self) -> Result<crate::quantize::RawMatrix> {
        ingest(&self.dataset, self.format, self.cols)
    }
}

#[derive(Debug, Args)]
pub struct QuantizeArgs {
    #[command(flatten)]
    pub input: DatasetArgs,

    /// Quantization depth S in bits (1-32).
    #[arg(long, default_value_t = 8)]
    pub bits: u8,

    /// Optional JSON report (per-column ranges and geometry).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WeaveArgs {
    #[command(flatten)]
    pub input: DatasetArgs,

    /// Quantization depth S in bits (1-32).
    #[arg(long, default_value_t = 32)]
    pub bits: u8,

    /// Output store path (.mlwv).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Raw dataset file (mutually exclusive with --store).
    #[arg(long, conflicts_with = "store")]
    pub dataset: Option<PathBuf>,

    /// Input format for --dataset.
    #[arg(long, default_value = "libsvm")]
    pub format: DatasetFormat,

    /// Feature count for sparse input; defaults to the largest index seen.
    #[arg(long)]
    pub cols: Option<usize>,

    /// Pre-woven store file (.mlwv) to train from directly.
    #[arg(long)]
    pub store: Option<PathBuf>,

    /// Quantization depth S when ingesting a raw dataset.
    #[arg(long, default_value_t = 32)]
    pub bits: u8,

    /// Loss: `linreg` (least squares) or `logreg` (logistic).
    #[arg(long, default_value = "linreg")]
    pub loss: LossKind,

    /// Per-epoch precision: a bit count (e.g. `8`) or `schedule` for the
    /// growing 2,2,2,2,3,3,3,3,4,... schedule.
    #[arg(long, default_value = "schedule")]
    pub precision: PrecisionPolicy,

    /// Mini-batch size B (a power of two, multiple of 8).
    #[arg(long, default_value_t = 8)]
    pub batch: u32,

    /// Learning-rate shift j: the step size is 2^-j.
    #[arg(long, default_value_t = 7)]
    pub lr_shift: u32,

    /// Epoch after which the learning rate halves; omit to never decay.
    #[arg(long)]
    pub decay_epoch: Option<u32>,

    /// Number of training epochs.
    #[arg(long, default_value_t = 10)]
    pub epochs: u32,

    /// Seed for the per-epoch sample shuffle; omit to scan in order.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Write the final model as JSON.
    #[arg(long)]
    pub model_out: Option<PathBuf>,

    /// Write per-epoch metrics CSV (`epoch,s,loss,traffic_bits,wall_ms,predicted_ms`).
    #[arg(long)]
    pub metrics_out: Option<PathBuf>,

    /// Also save the woven store produced from a raw dataset.
    #[arg(long)]
    pub save_store: Option<PathBuf>,

    /// Memory-throughput profile file (`s gbps` lines). Falls back to the
    /// MLWEAVE_MEM_PROFILE environment variable, then to built-in defaults.
    #[arg(long)]
    pub mem_profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Batch size B for every grid cell.
    #[arg(long, default_value_t = 8)]
    pub batch: u32,

    /// Feature counts for the simulator-vs-model agreement grid.
    #[arg(long, value_delimiter = ',', default_value = "2048,2560,3072,4096,5120")]
    pub features: Vec<u64>,

    /// Precisions for the simulator-vs-model agreement grid.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    pub precisions: Vec<u8>,

    /// Batches per simulated epoch (samples = batches * B).
    #[arg(long, default_value_t = 10_000)]
    pub batches: u64,

    /// Feature counts for the chaining speedup surface.
    #[arg(long, value_delimiter = ',', default_value = "500,1000,2000,3000,4000,5000")]
    pub surface_features: Vec<u64>,

    /// Precisions for the chaining speedup surface.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8")]
    pub surface_precisions: Vec<u8>,

    /// Output CSV for the agreement grid.
    #[arg(long, default_value = "bench-agreement.csv")]
    pub agreement_out: PathBuf,

    /// Output CSV for the speedup surface.
    #[arg(long, default_value = "bench-surface.csv")]
    pub surface_out: PathBuf,

    /// Memory-throughput profile file; see `train --mem-profile`.
    #[arg(long)]
    pub mem_profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Feature count M.
    #[arg(long)]
    pub features: u64,

    /// Precision s in bits.
    #[arg(long)]
    pub precision: u8,

    /// Batch size B.
    #[arg(long, default_value_t = 8)]
    pub batch: u32,

    /// Samples per epoch N.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,

    /// Memory-throughput profile file; see `train --mem-profile`.
    #[arg(long)]
    pub mem_profile: Option<PathBuf>,
}

/// Serialized form of a trained model (`--model-out`).
///
/// `weights_raw` is exact: raw two's-complement values of the Q.24
/// fixed-point weights. `weights` is the same data as `f64` for
/// convenience; the conversion is lossless for this range.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub loss: String,
    pub dims: usize,
    pub fractional_bits: u32,
    pub weights_raw: Vec<i64>,
    pub weights: Vec<f64>,
}

/// Executes one parsed command.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Quantize(args) => run_quantize(&args),
        Command::Weave(args) => run_weave(&args),
        Command::Train(args) => run_train(&args),
        Command::Bench(args) => run_bench(&args),
        Command::Predict(args) => run_predict(&args),
    }
}

fn resolve_profile(flag: Option<&Path>) -> Result<MemoryProfile> {
    match flag {
        Some(path) => MemoryProfile::from_path(path),
        None => match std::env::var_os(MEM_PROFILE_ENV) {
            Some(path) => MemoryProfile::from_path(path),
            None => Ok(MemoryProfile::default()),
        },
    }
}

fn quantize_input(input: &DatasetArgs, bits: u8) -> Result<FixedPointTable> {
    let raw = input.load()?;
    let norm = normalize_dataset(&raw)?;
    quantize_full(&norm, bits)
}

fn run_quantize(args: &QuantizeArgs) -> Result<()> {
    let raw = args.input.load()?;
    let norm = normalize_dataset(&raw)?;
    let table = quantize_full(&norm, args.bits)?;

    println!(
        "quantized {} rows x {} cols at S={} bits",
        table.rows(),
        table.cols(),
        table.max_precision()
    );
    let constant = norm
        .ranges()
        .iter()
        .filter(|r| r.max == r.min)
        .count();
    println!(
        "column ranges: {} scaled, {} constant (mapped to 0)",
        norm.ranges().len() - constant,
        constant
    );

    if let Some(path) = &args.report {
        #[derive(Serialize)]
        struct Report<'a> {
            rows: usize,
            cols: usize,
            bits: u8,
            ranges: &'a [crate::quantize::ColumnRange],
        }
        let report = Report {
            rows: table.rows(),
            cols: table.cols(),
            bits: table.max_precision(),
            ranges: norm.ranges(),
        };
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut out, &report)
            .map_err(|e| Error::Config(format!("cannot encode report: {e}")))?;
        out.write_all(b"\n")?;
        out.flush()?;
        println!("report written to {}", path.display());
    }
    Ok(())
}

fn run_weave(args: &WeaveArgs) -> Result<()> {
    let table = quantize_input(&args.input, args.bits)?;
    let store = WeavingStore::build(&table);
    store.save_to_path(&args.out)?;

    let bytes = std::fs::metadata(&args.out)?.len();
    println!(
        "wove {} rows x {} cols at S={} bits: {} groups x {} chunks, {} lines",
        store.rows(),
        store.cols(),
        store.max_precision(),
        store.sample_groups(),
        store.chunks(),
        store.line_count()
    );
    println!("store written to {} ({bytes} bytes)", args.out.display());
    Ok(())
}

fn load_or_build_store(args: &TrainArgs) -> Result<WeavingStore> {
    match (&args.dataset, &args.store) {
        (Some(path), None) => {
            let input = DatasetArgs {
                dataset: path.clone(),
                format: args.format,
                cols: args.cols,
            };
            let table = quantize_input(&input, args.bits)?;
            Ok(WeavingStore::build(&table))
        }
        (None, Some(path)) => WeavingStore::load_from_path(path),
        _ => Err(Error::Config(
            "pass exactly one of --dataset or --store".into(),
        )),
    }
}

/// Writes the metrics rows with the fixed header. Floats use Rust's
/// shortest round-trip formatting, which is platform-independent, so equal
/// runs produce byte-identical files.
pub fn write_metrics<W: Write>(out: &mut W, rows: &[EpochMetrics]) -> Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    for m in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            m.epoch, m.precision, m.loss, m.traffic_bits, m.wall_ms, m.predicted_ms
        )?;
    }
    Ok(())
}

fn run_train(args: &TrainArgs) -> Result<()> {
    let store = load_or_build_store(args)?;
    if let Some(path) = &args.save_store {
        store.save_to_path(path)?;
        println!("store written to {}", path.display());
    }
    let profile = resolve_profile(args.mem_profile.as_deref())?;

    let cfg = TrainConfig {
        loss: args.loss,
        batch: args.batch,
        lr_shift: args.lr_shift,
        decay_epoch: args.decay_epoch.unwrap_or(u32::MAX),
        epochs: args.epochs,
        policy: args.precision,
        shuffle_seed: args.seed,
    };
    cfg.validate(store.max_precision())?;
    println!(
        "training {} on {} rows x {} cols (S={}): B={}, j={}, {} epochs, {}",
        cfg.loss,
        store.rows(),
        store.cols(),
        store.max_precision(),
        cfg.batch,
        cfg.lr_shift,
        cfg.epochs,
        cfg.policy
    );

    let (model, metrics) = train_with_profile(&store, &cfg, &profile)?;
    for m in &metrics {
        println!(
            "epoch {:>3}  s={:>2}  loss={:.6}  traffic_bits={}  wall_ms={:.3}  predicted_ms={:.3}",
            m.epoch, m.precision, m.loss, m.traffic_bits, m.wall_ms, m.predicted_ms
        );
    }

    if let Some(path) = &args.metrics_out {
        let mut out = BufWriter::new(File::create(path)?);
        write_metrics(&mut out, &metrics)?;
        out.flush()?;
        println!("metrics written to {}", path.display());
    }
    if let Some(path) = &args.model_out {
        let weights = model.weights();
        let artifact = ModelArtifact {
            loss: cfg.loss.to_string(),
            dims: model.dims(),
            fractional_bits: FRAC_BITS,
            weights_raw: weights.iter().map(|w| w.raw()).collect(),
            weights: weights.iter().map(|w| w.to_f64()).collect(),
        };
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut out, &artifact)
            .map_err(|e| Error::Config(format!("cannot encode model: {e}")))?;
        out.write_all(b"\n")?;
        out.flush()?;
        println!("model written to {}", path.display());
    }
    Ok(())
}

fn run_bench(args: &BenchArgs) -> Result<()> {
    if args.features.is_empty() || args.precisions.is_empty() {
        return Err(Error::Config("agreement grid is empty".into()));
    }
    if args.batches == 0 {
        return Err(Error::Config("need at least one batch per epoch".into()));
    }
    let profile = resolve_profile(args.mem_profile.as_deref())?;

    // Grid 1: simulated steady-state throughput against the analytic
    // compute ceiling, plus the overall (memory-capped) model throughput.
    let mut out = BufWriter::new(File::create(&args.agreement_out)?);
    writeln!(
        out,
        "features,s,batch,chaining_gbps,no_chaining_gbps,sim_chaining_gbps,sim_no_chaining_gbps,chaining_ratio,no_chaining_ratio"
    )?;
    let samples = args.batches * args.batch as u64;
    let mut worst_ratio_gap = 0.0f64;
    for &m in &args.features {
        for &s in &args.precisions {
            let chain = predict(args.batch, m, s, samples, true, &profile)?;
            let no_chain = predict(args.batch, m, s, samples, false, &profile)?;
            let mut sim = [0.0f64; 2];
            let mut ratio = [0.0f64; 2];
            for (slot, chaining) in [(0, true), (1, false)] {
                let report = simulate_epoch(&SimConfig {
                    samples,
                    features: m,
                    precision: s,
                    batch: args.batch,
                    chaining,
                    latency_override: None,
                })?;
                sim[slot] = report.throughput_gbps;
                // The simulator models the compute pipeline only, so it is
                // compared against the compute ceiling, not min(comp, mem).
                ratio[slot] = report.throughput_gbps / th_comp(args.batch, m, s, chaining)?;
                worst_ratio_gap = worst_ratio_gap.max((ratio[slot] - 1.0).abs());
            }
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                m, s, args.batch, chain.th_gbps, no_chain.th_gbps, sim[0], sim[1], ratio[0], ratio[1]
            )?;
        }
    }
    out.flush()?;
    println!(
        "agreement grid ({} cells) written to {}; worst |sim/model - 1| = {:.4}",
        args.features.len() * args.precisions.len(),
        args.agreement_out.display(),
        worst_ratio_gap
    );

    // Grid 2: chaining speedup surface from the analytic model alone.
    let surface = speedup_surface(args.batch, &args.surface_features, &args.surface_precisions, &profile)?;
    let mut out = BufWriter::new(File::create(&args.surface_out)?);
    writeln!(out, "features,s,chaining_gbps,no_chaining_gbps,speedup")?;
    for cell in &surface.cells {
        writeln!(
            out,
            "{},{},{},{},{}",
            cell.features, cell.precision, cell.chain.th_gbps, cell.no_chain.th_gbps, cell.speedup
        )?;
    }
    out.flush()?;
    let best = surface.max_cell();
    println!(
        "speedup surface ({} cells) written to {}; max speedup {:.3} at M={}, s={}",
        surface.cells.len(),
        args.surface_out.display(),
        best.speedup,
        best.features,
        best.precision
    );
    Ok(())
}

fn run_predict(args: &PredictArgs) -> Result<()> {
    let profile = resolve_profile(args.mem_profile.as_deref())?;
    let chain = predict(args.batch, args.features, args.precision, args.samples, true, &profile)?;
    let no_chain = predict(args.batch, args.features, args.precision, args.samples, false, &profile)?;

    println!(
        "config: M={}, s={}, B={}, N={} (peak {PEAK_GBPS} GB/s)",
        args.features, args.precision, args.batch, args.samples
    );
    println!(
        "traffic per sample: {} bits ({} per epoch)",
        chain.traffic_bits_per_sample,
        chain.traffic_bits_per_sample * args.samples
    );
    for est in [&chain, &no_chain] {
        println!(
            "{:>12}: th_comp={:.3} GB/s  th_mem={:.3} GB/s  th={:.3} GB/s  epoch={:.3} ms",
            if est.chaining { "chaining" } else { "no-chaining" },
            est.th_comp_gbps,
            est.th_mem_gbps,
            est.th_gbps,
            est.epoch_seconds * 1e3
        );
    }
    println!(
        "chaining speedup (epoch-time ratio): {:.3}",
        no_chain.epoch_seconds / chain.epoch_seconds
    );
    Ok(())
}
