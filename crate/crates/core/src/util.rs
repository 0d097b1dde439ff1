use alloc::format;
use alloc::string::String;

use crate::error::{Error, Result};

/// Product of cardinalities, failing once it exceeds `cap`.
pub(crate) fn checked_cardinality<I: IntoIterator<Item = usize>>(cards: I, cap: u128) -> Result<usize> {
    let mut total: u128 = 1;
    for c in cards {
        total = total.saturating_mul(c as u128);
        if total > cap {
            return Err(Error::CardinalityCap {
                cardinality: total,
                cap,
            });
        }
    }
    Ok(total as usize)
}

/// 64-bit FNV-1a, used for short stable digests in `no_std`.
pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub(crate) fn hex64(v: u64) -> String {
    format!("{v:016x}")
}

/// Decomposes a mixed-radix index (first digit most significant).
pub(crate) fn unravel(mut idx: usize, cards: &[usize], out: &mut [usize]) {
    for (slot, &c) in out.iter_mut().zip(cards).rev() {
        *slot = idx % c;
        idx /= c;
    }
}

pub(crate) fn ravel(digits: &[usize], cards: &[usize]) -> usize {
    digits.iter().zip(cards).fold(0usize, |acc, (&d, &c)| acc * c + d)
}

/// Formats a bin edge without trailing zeros.
pub(crate) fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return String::from("0");
    }
    format!("{v}")
}

/// Nearest whole count of a non-negative weight (`f64::round` needs std).
pub(crate) fn count(w: f64) -> usize {
    (w + 0.5) as usize
}
