//! Bit-serial fixed-point arithmetic: shift-and-add multiplication and
//! plane-accumulating dot products.
//!
//! A quantized operand `code` with bits `a[1] a[2] .. a[s]` (MSB first)
//! represents `sum a[i] * 2^-i`, so multiplying it by a fixed-point weight
//! `x` needs no multiplier at all:
//!
//! ```text
//! code * x = sum over set bits i of (x >> i)      (arithmetic shift)
//! ```
//!
//! Each shift truncates toward negative infinity exactly as the hardware
//! does, and every sum is an exact 64-bit integer addition, so results are
//! identical regardless of accumulation order. Dot products consume the
//! weaved layout directly: one [`BitPlaneSlice`] per 64-feature chunk, one
//! plane word per precision level.

use crate::error::{Error, Result};
use crate::fixed::Fixed;

/// Maximum number of planes a slice can carry (one per precision level).
pub const MAX_PLANES: usize = 32;

/// The bit planes of one (sample, 64-feature chunk) pair: word `w` holds
/// bit-plane `w` (plane 0 = most significant bit), and bit `t` of a word
/// belongs to feature `chunk*64 + t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BitPlaneSlice {
    words: [u64; MAX_PLANES],
    len: u8,
}

impl BitPlaneSlice {
    /// Builds a slice from up to [`MAX_PLANES`] plane words, most
    /// significant plane first.
    pub fn new(planes: &[u64]) -> Result<Self> {
        if planes.is_empty() || planes.len() > MAX_PLANES {
            return Err(Error::SliceDepth {
                got: planes.len(),
                need: 1,
            });
        }
        let mut words = [0u64; MAX_PLANES];
        words[..planes.len()].copy_from_slice(planes);
        Ok(BitPlaneSlice {
            words,
            len: planes.len() as u8,
        })
    }

    /// Number of planes carried.
    pub fn depth(&self) -> usize {
        self.len as usize
    }

    /// Plane word `w` (0 = most significant bit of every feature).
    pub fn plane(&self, w: usize) -> u64 {
        debug_assert!(w < self.depth());
        self.words[w]
    }

    pub fn planes(&self) -> &[u64] {
        &self.words[..self.len as usize]
    }
}

/// `x >> i` with arithmetic shift — the per-plane weight of Eq. `code * x`,
/// where plane ordinal `i` counts from 1 at the most significant bit.
pub fn shift_weight(x: Fixed, i: u32) -> Fixed {
    debug_assert!((1..=32).contains(&i));
    x.shr(i)
}

/// Multiplies an `s`-bit code by a fixed-point weight with shift-and-add:
/// the sum of `x >> i` over the set bits of the code (MSB = bit 1).
pub fn bitserial_mul(code: u32, x: Fixed, s: u8) -> Fixed {
    debug_assert!((1..=32).contains(&s));
    debug_assert!(s == 32 || code < (1u32 << s));
    let mut acc = 0i64;
    for i in 1..=s as u32 {
        if (code >> (s as u32 - i)) & 1 == 1 {
            acc += x.raw() >> i;
        }
    }
    Fixed::from_raw(acc)
}

/// Double-precision reference for [`bitserial_mul`]; a test oracle,
/// never used on the training path.
pub fn reference_product(code: u32, x: Fixed, s: u8) -> Result<f64> {
    Ok(crate::quantize::dequantize(code, s)? * x.to_f64())
}

/// Dot product of one sample against the model, consuming bit-plane slices
/// chunk by chunk (64 features per slice, `s` planes each).
///
/// The result equals the sum of [`bitserial_mul`] over all features,
/// exactly: plane-order accumulation only regroups exact integer additions.
/// The stream must yield `ceil(model.len() / 64)` slices of depth >= `s`.
pub fn bitserial_dot<I>(stream: I, model: &[Fixed], s: u8) -> Result<Fixed>
where
    I: IntoIterator<Item = BitPlaneSlice>,
{
    if !(1..=32).contains(&s) {
        return Err(Error::PrecisionRange { s: s as u32, max: 32 });
    }
    let chunks = model.len().div_ceil(64);
    let mut acc = 0i64;
    let mut seen = 0usize;
    for (c, slice) in stream.into_iter().take(chunks).enumerate() {
        if slice.depth() < s as usize {
            return Err(Error::SliceDepth {
                got: slice.depth(),
                need: s as usize,
            });
        }
        for w in 0..s as usize {
            let mut word = slice.plane(w);
            while word != 0 {
                let t = word.trailing_zeros() as usize;
                word &= word - 1;
                let idx = c * 64 + t;
                match model.get(idx) {
                    Some(x) => acc += x.raw() >> (w as u32 + 1),
                    None => {
                        return Err(Error::DimensionMismatch {
                            got: model.len(),
                            expected: idx + 1,
                        })
                    }
                }
            }
        }
        seen += 1;
    }
    if seen < chunks {
        return Err(Error::StreamTooShort {
            got: seen,
            need: chunks,
        });
    }
    Ok(Fixed::from_raw(acc))
}
