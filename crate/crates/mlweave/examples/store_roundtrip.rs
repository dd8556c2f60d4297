//! Saving and loading the on-disk store (.mlwv), including how corruption
//! is detected.
//!
//! Run with: `cargo run --example store_roundtrip`

use mlweave::quantize::{normalize_dataset, quantize_full, RawMatrix};
use mlweave::weaving::WeavingStore;

fn main() -> mlweave::Result<()> {
    // Build a small store from synthetic values.
    let rows = 20;
    let cols = 100;
    let values: Vec<f64> = (0..rows * cols).map(|i| (i % 101) as f64 / 100.0).collect();
    let labels: Vec<f64> = (0..rows).map(|i| i as f64 / 10.0 - 1.0).collect();
    let raw = RawMatrix::new(rows, cols, values, labels)?;
    let store = WeavingStore::build(&quantize_full(&normalize_dataset(&raw)?, 8)?);

    // Serialize to an in-memory buffer (files work the same via
    // save_to_path / load_from_path).
    let mut bytes = Vec::new();
    store.save(&mut bytes)?;
    println!(
        "serialized {} samples x {} features at S={} into {} bytes",
        store.rows(),
        store.cols(),
        store.max_precision(),
        bytes.len()
    );
    println!(
        "  36-byte header (with payload checksum) + {} label bytes + {} line bytes",
        store.rows() * 4,
        store.line_count() * 64
    );
    println!("  header starts with magic {:?}", &bytes[..4]);

    // Loading restores an identical store.
    let back = WeavingStore::load(&mut bytes.as_slice())?;
    assert_eq!(back.rows(), store.rows());
    assert_eq!(back.cols(), store.cols());
    for row in 0..rows {
        assert_eq!(back.read_sample(row, 8)?, store.read_sample(row, 8)?);
        assert_eq!(back.label(row), store.label(row));
    }
    println!("\nloaded back: every sample, label, and line identical");

    // Any flipped payload bit fails the checksum.
    let mut corrupt = bytes.clone();
    let middle = corrupt.len() / 2;
    corrupt[middle] ^= 0x10;
    match WeavingStore::load(&mut corrupt.as_slice()) {
        Err(err) => println!("flipping one bit at offset {middle}: {err}"),
        Ok(_) => unreachable!(),
    }

    // Truncated files and foreign files are rejected before any parsing.
    match WeavingStore::load(&mut &bytes[..bytes.len() / 2]) {
        Err(err) => println!("cutting the file in half: {err}"),
        Ok(_) => unreachable!(),
    }
    match WeavingStore::load(&mut &b"PNG\x0d not a store"[..]) {
        Err(err) => println!("wrong magic: {err}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
