//! Packed symbol blocks.
//!
//! A block of up to 64 symbols from an alphabet of at most four letters is
//! packed two bits per symbol into a `u128`, symbol `i` at bits `2i..2i+2`.
//! Past blocks are stored oldest first, so index `n-1` of the past is `X_0`
//! and index `0` of the future is `X_1`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const MAX_BLOCK_LEN: usize = 64;

pub type Code = u128;

pub fn check_len(n: usize) -> Result<()> {
    if n == 0 || n > MAX_BLOCK_LEN {
        Err(Error::InvalidBlockLength(n))
    } else {
        Ok(())
    }
}

#[inline]
pub fn pack(symbols: &[u8]) -> Code {
    debug_assert!(symbols.len() <= MAX_BLOCK_LEN);
    symbols
        .iter()
        .enumerate()
        .fold(0u128, |acc, (i, &s)| acc | ((s as u128 & 3) << (2 * i)))
}

#[inline]
pub fn symbol_at(code: Code, i: usize) -> u8 {
    ((code >> (2 * i)) & 3) as u8
}

pub fn unpack(code: Code, n: usize) -> Vec<u8> {
    (0..n).map(|i| symbol_at(code, i)).collect()
}

pub fn unpack_into(code: Code, n: usize, buf: &mut Vec<u8>) {
    buf.clear();
    buf.extend((0..n).map(|i| symbol_at(code, i)));
}

/// Symbols rendered as digits, e.g. `"0102"`.
pub fn render(code: Code, n: usize) -> String {
    (0..n).map(|i| char::from(b'0' + symbol_at(code, i))).collect()
}

pub fn parse(text: &str) -> Result<Code> {
    let syms: Vec<u8> = text
        .bytes()
        .map(|b| match b {
            b'0'..=b'3' => Ok(b - b'0'),
            _ => Err(Error::InvalidParameter(format!("bad block symbol '{}'", b as char))),
        })
        .collect::<Result<_>>()?;
    check_len(syms.len())?;
    Ok(pack(&syms))
}

/// Splits a packed window of `2n` symbols into its past and future halves.
#[inline]
pub fn split_window(window: Code, n: usize) -> BlockPair {
    if n == 64 {
        // A 128-symbol window does not fit; callers build halves directly.
        unreachable!("split_window requires n < 64");
    }
    let mask = (1u128 << (2 * n)) - 1;
    BlockPair {
        past: window & mask,
        future: (window >> (2 * n)) & mask,
    }
}

/// The (past, future) pair of adjacent blocks of equal length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockPair {
    pub past: Code,
    pub future: Code,
}

impl BlockPair {
    pub fn new(past: Code, future: Code) -> Self {
        BlockPair { past, future }
    }

    pub fn from_symbols(past: &[u8], future: &[u8]) -> Self {
        BlockPair {
            past: pack(past),
            future: pack(future),
        }
    }

    pub fn past_symbols(&self, n: usize) -> Vec<u8> {
        unpack(self.past, n)
    }

    pub fn future_symbols(&self, n: usize) -> Vec<u8> {
        unpack(self.future, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn render_and_parse() {
        let c = parse("0102").unwrap();
        assert_eq!(render(c, 4), "0102");
        assert_eq!(unpack(c, 4), vec![0, 1, 0, 2]);
        assert!(parse("014").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn split_halves() {
        let w = pack(&[0, 1, 2, 3, 3, 2]);
        let p = split_window(w, 3);
        assert_eq!(unpack(p.past, 3), vec![0, 1, 2]);
        assert_eq!(unpack(p.future, 3), vec![3, 3, 2]);
    }

    proptest! {
        #[test]
        fn pack_roundtrip(v in proptest::collection::vec(0u8..4, 1..=64)) {
            prop_assert_eq!(unpack(pack(&v), v.len()), v);
        }
    }
}
