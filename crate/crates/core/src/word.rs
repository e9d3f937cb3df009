use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Maximum word length; indices are held in a `u64`.
pub const MAX_BITS: usize = 63;

/// A Boolean measurement outcome `x = (x_1, ..., x_m)`.
///
/// Its index is `⌊x⌋ = Σ x_i 2^{m-i} + 1` (1-based, `x_1` most significant)
/// and its one-hot form is the unit vector with a single 1 at `⌊x⌋`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BooleanWord {
    len: usize,
    value: u64,
}

impl BooleanWord {
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.is_empty() || bits.len() > MAX_BITS {
            return Err(Error::InvalidWord(format!(
                "length {} outside [1, {MAX_BITS}]",
                bits.len()
            )));
        }
        let mut value = 0u64;
        for &b in bits {
            if b > 1 {
                return Err(Error::InvalidWord(format!("bit value {b}")));
            }
            value = (value << 1) | u64::from(b);
        }
        Ok(Self {
            len: bits.len(),
            value,
        })
    }

    /// Word of length `len` with 1-based index `index`.
    pub fn from_index(len: usize, index: usize) -> Result<Self> {
        if len == 0 || len > MAX_BITS {
            return Err(Error::InvalidWord(format!("length {len}")));
        }
        let max = 1usize << len;
        if index < 1 || index > max {
            return Err(Error::IndexOutOfRange { index, max });
        }
        Ok(Self {
            len,
            value: (index - 1) as u64,
        })
    }

    /// Word of length `len` at 0-based basis position `pos`.
    pub fn from_position(len: usize, pos: usize) -> Result<Self> {
        Self::from_index(len, pos + 1)
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::from_index(len, 1)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.bit(i + 1)).collect()
    }

    /// Bit `x_i`, 1-based.
    pub fn bit(&self, i: usize) -> u8 {
        debug_assert!(i >= 1 && i <= self.len);
        ((self.value >> (self.len - i)) & 1) as u8
    }

    /// 1-based index `⌊x⌋`.
    pub fn index(&self) -> usize {
        self.value as usize + 1
    }

    /// 0-based position in the sorted basis, `⌊x⌋ - 1`.
    pub fn position(&self) -> usize {
        self.value as usize
    }

    /// One-hot vector of length `2^m` with its 1 at `⌊x⌋`.
    pub fn one_hot(&self) -> Vec<f64> {
        let mut v = vec![0.0; 1usize << self.len];
        v[self.position()] = 1.0;
        v
    }

    /// Inverse of [`one_hot`](Self::one_hot).
    pub fn from_one_hot(v: &[f64]) -> Result<Self> {
        if v.is_empty() || !v.len().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(v.len()));
        }
        let ones: Vec<usize> = v
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0.0)
            .map(|(i, _)| i)
            .collect();
        match ones.as_slice() {
            [pos] if v[*pos] == 1.0 => {
                Self::from_position(v.len().trailing_zeros() as usize, *pos)
            }
            _ => Err(Error::InvalidWord("not a one-hot vector".into())),
        }
    }

    /// All `2^len` words in ascending index order.
    pub fn all(len: usize) -> impl Iterator<Item = BooleanWord> {
        (0..(1usize << len)).map(move |pos| BooleanWord {
            len,
            value: pos as u64,
        })
    }
}

impl fmt::Display for BooleanWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 1..=self.len {
            write!(f, "{}", self.bit(i))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BooleanWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BooleanWord({self})")
    }
}

impl FromStr for BooleanWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits: Result<Vec<u8>> = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidWord(format!("character {other:?} in {s:?}"))),
            })
            .collect();
        Self::from_bits(&bits?)
    }
}
