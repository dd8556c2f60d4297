//! The dynamic precision ramp: few bits early, more bits as training
//! converges.
//!
//! Run with: `cargo run --example precision_schedule`

use mlweave::schedule::{precision_for_epoch, PrecisionPolicy};

fn main() -> mlweave::Result<()> {
    // Each precision level holds for twice as many epochs as the previous
    // one: 2 bits for epochs 1-4, 3 for 5-8, 4 for 9-16, 5 for 17-32, ...
    println!("epoch -> s under the dynamic schedule:");
    let mut row = String::new();
    for e in 1..=40 {
        let s = precision_for_epoch(e, PrecisionPolicy::Dynamic, 32)?;
        row.push_str(&format!("{s} "));
        if e % 8 == 0 {
            println!("  epochs {:>2}-{:>2}: {}", e - 7, e, row.trim_end());
            row.clear();
        }
    }

    // The level doubles its interval each step, so precision grows like
    // log2(epoch): cheap early epochs dominate the traffic budget.
    println!("\nlast epoch of each level (intervals double):");
    for e in [4u32, 8, 16, 32, 64, 128, 256] {
        let s = precision_for_epoch(e, PrecisionPolicy::Dynamic, 32)?;
        println!("  epoch {e:>3}: s={s}");
    }

    // A store quantized at depth S simply caps the ramp.
    println!("\nsame schedule on a 4-bit store:");
    let capped: Vec<u8> = (1..=20)
        .map(|e| precision_for_epoch(e, PrecisionPolicy::Dynamic, 4))
        .collect::<mlweave::Result<_>>()?;
    println!("  {capped:?}");

    // Fixed policies are validated against the cap instead of clamped.
    match precision_for_epoch(1, PrecisionPolicy::Fixed(8), 4) {
        Err(err) => println!("\nfixed 8-bit policy on a 4-bit store: {err}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
