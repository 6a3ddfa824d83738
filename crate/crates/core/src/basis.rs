//! Computational basis strings.
//!
//! Qubit `q` is stored in bit `q` of the packed integer. The textual form
//! lists qubits left to right, so `"10"` means qubit 0 is set and qubit 1 is
//! clear.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported register width.
pub const MAX_QUBITS: usize = 24;

/// An `n`-bit computational basis string.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex {
    bits: u32,
    width: u8,
}

impl BasisIndex {
    pub fn new(bits: u32, width: usize) -> Result<Self> {
        if width > MAX_QUBITS {
            return Err(Error::Argument(format!(
                "register width {width} exceeds the {MAX_QUBITS}-qubit cap"
            )));
        }
        if (bits as u64) >> width != 0 {
            return Err(Error::Argument(format!(
                "bits {bits:#x} do not fit in {width} qubits"
            )));
        }
        Ok(Self {
            bits,
            width: width as u8,
        })
    }

    /// All-zeros string of the given width.
    pub fn zero(width: usize) -> Result<Self> {
        Self::new(0, width)
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn width(self) -> usize {
        self.width as usize
    }

    #[inline]
    pub fn bit(self, qubit: usize) -> bool {
        (self.bits >> qubit) & 1 == 1
    }

    #[inline]
    pub fn flip(self, qubit: usize) -> Self {
        debug_assert!(qubit < self.width());
        Self {
            bits: self.bits ^ (1 << qubit),
            width: self.width,
        }
    }

    #[inline]
    pub fn with_bit(self, qubit: usize, value: bool) -> Self {
        debug_assert!(qubit < self.width());
        let bits = if value {
            self.bits | (1 << qubit)
        } else {
            self.bits & !(1 << qubit)
        };
        Self {
            bits,
            width: self.width,
        }
    }

    /// Appends one qubit (as the new highest index) holding `value`.
    pub fn extend(self, value: bool) -> Result<Self> {
        let width = self.width() + 1;
        Self::new(self.bits | (u32::from(value) << self.width()), width)
    }

    /// Drops the highest qubit, returning the shorter string and the dropped bit.
    pub fn split_last(self) -> (Self, bool) {
        assert!(self.width > 0, "cannot split an empty basis string");
        let w = self.width() - 1;
        (
            Self {
                bits: self.bits & ((1u32 << w) - 1),
                width: w as u8,
            },
            self.bit(w),
        )
    }

    /// Iterates over all `2^width` strings in ascending order.
    pub fn all(width: usize) -> Result<impl Iterator<Item = BasisIndex>> {
        Self::new(0, width)?;
        Ok((0..(1u32 << width)).map(move |bits| BasisIndex {
            bits,
            width: width as u8,
        }))
    }

    pub fn check_width(self, width: usize) -> Result<()> {
        if self.width() != width {
            return Err(Error::WidthMismatch {
                expected: width,
                found: self.width(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.width() {
            f.write_str(if self.bit(q) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{self}⟩")
    }
}

impl FromStr for BasisIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = 0u32;
        for (q, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => {
                    if q >= MAX_QUBITS {
                        break;
                    }
                    bits |= 1 << q;
                }
                _ => {
                    return Err(Error::Argument(format!(
                        "invalid character {c:?} in basis string {s:?}"
                    )))
                }
            }
        }
        Self::new(bits, s.chars().count())
    }
}

impl Serialize for BasisIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BasisIndex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
