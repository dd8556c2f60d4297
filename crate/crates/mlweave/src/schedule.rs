//! Per-epoch precision selection: fixed precision or a growing schedule.
//!
//! The dynamic schedule spends few bits early, when coarse gradients are
//! enough to make progress, and raises precision as the model closes in on
//! the optimum: 2 bits for epochs 1-4, 3 for 5-8, 4 for 9-16, 5 for 17-32,
//! and one more bit each time the epoch count doubles after that. Each
//! level's interval is twice the previous one, so the quantization bias
//! halves level over level while most of the traffic savings land in the
//! earliest (cheapest) epochs.

use crate::error::{Error, Result};

/// How the trainer picks the per-epoch precision `s_e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecisionPolicy {
    /// The same precision every epoch.
    Fixed(u8),
    /// The growing schedule described at module level, clamped to the
    /// store's maximum precision.
    Dynamic,
}

impl std::fmt::Display for PrecisionPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PrecisionPolicy::Fixed(s) => write!(f, "fixed {s}-bit"),
            PrecisionPolicy::Dynamic => write!(f, "dynamic schedule"),
        }
    }
}

impl std::str::FromStr for PrecisionPolicy {
    type Err = Error;

    /// Accepts a bit count (`"8"`) or `"schedule"`/`"dynamic"`.
    fn from_str(text: &str) -> Result<Self> {
        match text {
            "schedule" | "dynamic" => Ok(PrecisionPolicy::Dynamic),
            other => other.parse::<u8>().map(PrecisionPolicy::Fixed).map_err(|_| {
                Error::Config(format!(
                    "precision `{other}`: expected a bit count or `schedule`"
                ))
            }),
        }
    }
}

/// Precision for epoch `e` (1-based) under `policy`, clamped to `cap`
/// (the store's maximum precision `S`).
pub fn precision_for_epoch(e: u32, policy: PrecisionPolicy, cap: u8) -> Result<u8> {
    if e < 1 {
        return Err(Error::EpochRange);
    }
    if !(1..=32).contains(&cap) {
        return Err(Error::PrecisionRange {
            s: cap as u32,
            max: 32,
        });
    }
    match policy {
        PrecisionPolicy::Fixed(s) => {
            if s < 1 || s > cap {
                return Err(Error::PrecisionRange {
                    s: s as u32,
                    max: cap as u32,
                });
            }
            Ok(s)
        }
        PrecisionPolicy::Dynamic => {
            // 2,2,2,2 then 3 + floor(log2((e-1)/4)): 3 for 5..=8,
            // 4 for 9..=16, 5 for 17..=32, 6 for 33..=64, ...
            let s = if e <= 4 {
                2
            } else {
                3 + ((e - 1) / 4).ilog2()
            };
            Ok((s.min(cap as u32)) as u8)
        }
    }
}
