//! Deterministic any-precision training for generalized linear models.
//!
//! This crate implements an end-to-end software model of a bit-serial
//! training accelerator:
//!
//! * [`quantize`] — min/max normalization and fixed-point quantization of a
//!   dense feature matrix, plus bit-level precision truncation.
//! * [`weaving`] — the bit-plane ("weaved") memory layouts that store each
//!   bit position of every quantized feature contiguously, so a reader can
//!   fetch exactly `s` bit planes to retrieve an `s`-bit version of the data.
//! * [`bitserial`] — shift-and-add arithmetic over those bit planes; products
//!   and dot products are exact integer decompositions, never floats.
//! * [`trainer`] — mini-batch SGD for least-squares and logistic models that
//!   consumes weaved data bit-serially and mirrors the accelerator's update
//!   semantics (power-of-two learning rates, shift-based batch averaging,
//!   per-group working models).
//! * [`schedule`] — static and dynamic per-epoch precision selection.
//! * [`pipeline`] — a cycle-level simulator of the read→dot→update pipeline
//!   with read-after-write hazard tracking and optional chaining (overlapping
//!   the next batch's reads with the tail of the current update).
//! * [`cost`] — the closed-form throughput/epoch-time model the simulator is
//!   validated against, including memory-bound vs compute-bound analysis.
//! * [`dataset`] / [`synth`] — LibSVM/CSV ingestion and seeded synthetic
//!   problem generators.
//! * [`cli`] — the engine behind the `mlweave` binary's subcommands.
//!
//! Everything is deterministic: given the same inputs, seeds, and
//! configuration, training metrics are byte-identical across runs.
//!
//! # Examples
//!
//! The `examples/` directory is the best starting point; each file is a
//! runnable walkthrough of one capability:
//!
//! * `quantize_basics` — normalization, quantization, truncation round trips.
//! * `weave_layout` — how lines are laid out and read back.
//! * `bitserial_math` — shift-and-add products vs. plain integer products.
//! * `train_synthetic` — full training runs at several precisions.
//! * `precision_schedule` — the dynamic precision ramp.
//! * `pipeline_timing` — cycle counts, stalls, and chaining.
//! * `cost_surface` — the analytic speedup surface over (features, bits).
//! * `store_roundtrip` — saving/loading the on-disk store format.

pub mod bitserial;
pub mod cli;
pub mod cost;
pub mod dataset;
pub mod error;
pub mod fixed;
pub mod pipeline;
pub mod quantize;
pub mod schedule;
pub mod synth;
pub mod trainer;
pub mod weaving;

pub use error::{Error, Result};
