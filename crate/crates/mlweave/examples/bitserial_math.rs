//! Shift-and-add arithmetic: multiplying by one bit of the code per step.
//!
//! Run with: `cargo run --example bitserial_math`
//!
//! A quantized code `a = 0.b1 b2 ... bs` (a binary fraction) times a
//! fixed-point weight `x` decomposes exactly into `sum over set bits i of
//! (x >> i)`. Feeding bits most-significant-first means every prefix of the
//! stream is itself the product at a coarser precision.

use mlweave::bitserial::{bitserial_dot, bitserial_mul, BitPlaneSlice};
use mlweave::fixed::Fixed;

fn main() -> mlweave::Result<()> {
    let x = Fixed::from_f64(0.625);
    let code = 0b101u32; // the 3-bit code for 0.625
    let s = 3;

    // Step through the shift-add: bit i (1-based from the MSB) contributes
    // x >> i when set.
    println!("code 0.101 x {x}:");
    let mut acc = Fixed::ZERO;
    for i in 1..=s {
        let bit = (code >> (s - i)) & 1;
        if bit == 1 {
            acc += x.shr(i);
        }
        println!(
            "  after bit {i} ({bit}): acc = {acc}  (this is the s={i} product)"
        );
    }
    assert_eq!(acc, bitserial_mul(code, x, s as u8));
    println!("  exact: 0.625 * 0.625 = {}", 0.625 * 0.625);

    // The decomposition is exact in integer arithmetic: compare against the
    // widening integer product for a sweep of random-ish inputs.
    let mut worst_ulp = 0i64;
    for k in 0..1000u32 {
        let code = k.wrapping_mul(2_654_435_761) >> 24; // 8-bit code
        let x = Fixed::from_raw(((k as i64 * 40_503) % (1 << 26)) - (1 << 25));
        let got = bitserial_mul(code, x, 8);
        // Oracle: (code * x_raw) / 2^8, rounded toward zero per shift step.
        let direct: i64 = (1..=8)
            .filter(|i| (code >> (8 - i)) & 1 == 1)
            .map(|i| x.raw() >> i)
            .sum();
        worst_ulp = worst_ulp.max((got.raw() - direct).abs());
    }
    println!("\n1000 random 8-bit products vs direct shift-sum: max difference {worst_ulp} ulp");

    // Dot products consume one 64-feature slice at a time; each slice
    // carries the top s bit planes of those features for one sample.
    let model: Vec<Fixed> = (0..128).map(|i| Fixed::from_f64(i as f64 / 128.0)).collect();
    let codes: Vec<u32> = (0..128).map(|i| (i * 37 % 16) as u32).collect();
    let s = 4u8;

    // Pack the codes into two 64-bit plane slices (MSB plane first).
    let slices: Vec<BitPlaneSlice> = (0..2)
        .map(|chunk| {
            let planes: Vec<u64> = (0..s)
                .map(|plane| {
                    let mut word = 0u64;
                    for t in 0..64 {
                        let code = codes[chunk * 64 + t];
                        let bit = (code >> (s - 1 - plane)) & 1;
                        word |= (bit as u64) << t;
                    }
                    word
                })
                .collect();
            BitPlaneSlice::new(&planes)
        })
        .collect::<mlweave::Result<_>>()?;

    let dot = bitserial_dot(slices.iter().copied(), &model, s)?;
    let brute: Fixed = codes
        .iter()
        .zip(&model)
        .map(|(&code, &w)| bitserial_mul(code, w, s))
        .sum();
    println!("\n128-feature dot product: streamed {dot}, per-element sum {brute}");
    assert_eq!(dot, brute);

    // Truncating the codes to s' < s bits equals truncating the stream.
    let coarse = bitserial_dot(
        slices.iter().map(|slice| BitPlaneSlice::new(&slice.planes()[..2]).unwrap()),
        &model,
        2,
    )?;
    println!("same stream read at s=2: {coarse} (coarser, but from the same bytes)");
    Ok(())
}
