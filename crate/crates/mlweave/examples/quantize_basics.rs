//! Normalization, fixed-point quantization, and precision truncation.
//!
//! Run with: `cargo run --example quantize_basics`

use mlweave::quantize::{dequantize, normalize_dataset, quantize_full, truncate_code, RawMatrix};

fn main() -> mlweave::Result<()> {
    // A tiny dataset: three samples, two features, plus labels.
    let raw = RawMatrix::new(
        3,
        2,
        vec![
            2.0, 10.0, //
            4.0, 30.0, //
            6.0, 50.0,
        ],
        vec![1.0, -1.0, 1.0],
    )?;

    // Min/max scaling maps each column onto [0, 1].
    let norm = normalize_dataset(&raw)?;
    println!("normalized values (per-column min/max scaling):");
    for row in 0..norm.rows() {
        let values: Vec<String> = (0..norm.cols())
            .map(|col| format!("{:.3}", norm.value(row, col)))
            .collect();
        println!("  sample {row}: [{}]", values.join(", "));
    }
    for (col, range) in norm.ranges().iter().enumerate() {
        println!("  column {col} was [{}, {}]", range.min, range.max);
    }

    // Quantize once at the full depth S. Lower precisions never require a
    // second pass: they are bit-level truncations of these codes.
    let s_full = 4;
    let table = quantize_full(&norm, s_full)?;
    println!("\n{s_full}-bit codes (code = round_half_up(value * (2^S - 1))):");
    for row in 0..table.rows() {
        let codes: Vec<String> = table.row_codes(row).iter().map(|c| format!("{c:04b}")).collect();
        println!("  sample {row}: [{}]", codes.join(", "));
    }

    // Keeping the top s bits of a code is exactly the s-bit quantization.
    let code = table.code(1, 1); // 0.5 at 4 bits
    println!("\ncode {code:04b} read back at every precision:");
    for s in (1..=s_full).rev() {
        let truncated = truncate_code(code, s_full, s)?;
        let value = dequantize(truncated, s)?;
        println!("  s={s}: bits {truncated:0width$b} -> {value}", width = s as usize);
    }

    // The dequantization error shrinks by half per extra bit.
    println!("\nworst-case |value - dequantized| over the table:");
    for s in 1..=s_full {
        let mut worst = 0.0f64;
        for row in 0..table.rows() {
            for col in 0..table.cols() {
                let code = truncate_code(table.code(row, col), s_full, s)?;
                let err = (norm.value(row, col) - dequantize(code, s)?).abs();
                worst = worst.max(err);
            }
        }
        println!("  s={s}: {worst:.4}");
    }
    Ok(())
}
