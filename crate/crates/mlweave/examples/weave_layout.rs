//! How the bit-plane store arranges quantized samples in memory.
//!
//! Run with: `cargo run --example weave_layout`
//!
//! The store packs 8 samples x 64 features per 512-bit line. Within a
//! sample group the layout walks feature chunks, then bit planes (most
//! significant first): reading an s-bit view of the data touches exactly
//! the first s planes of every chunk and skips the rest.

use mlweave::quantize::{normalize_dataset, quantize_full, RawMatrix};
use mlweave::weaving::{memory_traffic_bits, PlaneCursor, WeavingStore};

fn build_store(rows: usize, cols: usize, s_max: u8) -> mlweave::Result<WeavingStore> {
    // Deterministic filler values in [0, 1).
    let values: Vec<f64> = (0..rows * cols)
        .map(|i| ((i * 2_654_435_761usize) % 997) as f64 / 997.0)
        .collect();
    let labels = vec![0.0; rows];
    let raw = RawMatrix::new(rows, cols, values, labels)?;
    let norm = normalize_dataset(&raw)?;
    Ok(WeavingStore::build(&quantize_full(&norm, s_max)?))
}

fn main() -> mlweave::Result<()> {
    // A large store: 16 samples x 2048 features at 32-bit depth.
    let store = build_store(16, 2048, 32)?;
    println!(
        "store geometry: {} samples x {} features -> {} groups x {} chunks x {} planes = {} lines",
        store.rows(),
        store.cols(),
        store.sample_groups(),
        store.chunks(),
        store.max_precision(),
        store.line_count()
    );

    // Line addresses follow (group, chunk, plane) nesting.
    println!("\nline indices for landmark cursors:");
    for (group, chunk, plane) in [(0, 0, 0), (0, 0, 2), (0, 1, 0), (1, 0, 0)] {
        let cursor = PlaneCursor {
            group,
            chunk,
            plane,
            precision: store.max_precision(),
        };
        println!(
            "  group={group} chunk={chunk} plane={plane} -> line {}",
            store.line_index(&cursor)
        );
    }

    // An s-bit scan visits s planes per chunk and skips the remaining
    // S - s planes, which is where the traffic savings come from.
    let s = 3;
    let visited = store.plane_iter(s)?.count();
    println!(
        "\nscanning at s={s} visits {} of {} lines ({} bits per sample: s*ceil(M/64)*64 + 32 label bits = {})",
        visited,
        store.line_count(),
        s,
        memory_traffic_bits(store.cols() as u64, s)?
    );

    // Bits land in banks by sample, in word bits by feature position.
    let store = build_store(9, 70, 4)?;
    println!(
        "\nsmall store: {} samples x {} features pad to {} groups x {} chunks",
        store.rows(),
        store.cols(),
        store.sample_groups(),
        store.chunks()
    );
    let cursor = PlaneCursor { group: 0, chunk: 1, plane: 0, precision: 4 };
    let line = store.line(store.line_index(&cursor));
    println!("top plane of chunk 1 (features 64..70), one 64-bit word per sample:");
    for (bank, word) in line.iter().enumerate() {
        println!("  bank {bank} (sample {bank}): {word:064b}");
    }

    // Reading a sample back is exact at every precision.
    let full = store.read_sample(3, 4)?;
    let coarse = store.read_sample(3, 1)?;
    println!(
        "\nsample 3, feature 65: 4-bit code {:04b}, 1-bit code {:b} (its top bit)",
        full[65], coarse[65]
    );
    Ok(())
}
