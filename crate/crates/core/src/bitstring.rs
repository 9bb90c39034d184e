use crate::error::{Error, Result};

/// A fixed-width string of bits encoding a question or input value.
///
/// Bit 1 is the most significant: the string `x1 x2 … xw` maps to the integer
/// `Σ x_i · 2^(w−i)`. This is the canonical question encoding used by every
/// game builder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitString {
    value: usize,
    width: u32,
}

impl BitString {
    pub fn new(value: usize, width: u32) -> Result<Self> {
        if width as usize >= usize::BITS as usize {
            return Err(Error::Size(format!("width {width} too large")));
        }
        if value >= (1usize << width) {
            return Err(Error::Domain(format!(
                "value {value} does not fit in {width} bits"
            )));
        }
        Ok(Self { value, width })
    }

    /// Builds from bits listed most-significant first.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut value = 0usize;
        for &b in bits {
            if b > 1 {
                return Err(Error::Domain(format!("bit value {b} is not 0 or 1")));
            }
            value = (value << 1) | b as usize;
        }
        Self::new(value, bits.len() as u32)
    }

    pub fn value(&self) -> usize {
        self.value
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Bit `i` for `i` in `1..=width`, with bit 1 most significant.
    pub fn bit(&self, i: u32) -> u8 {
        assert!(i >= 1 && i <= self.width, "bit index out of range");
        ((self.value >> (self.width - i)) & 1) as u8
    }

    /// Bits listed most-significant first.
    pub fn bits(&self) -> Vec<u8> {
        (1..=self.width).map(|i| self.bit(i)).collect()
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        if self.width != other.width {
            return Err(Error::Dimension(format!(
                "cannot xor widths {} and {}",
                self.width, other.width
            )));
        }
        Ok(BitString {
            value: self.value ^ other.value,
            width: self.width,
        })
    }
}

impl std::fmt::Display for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 1..=self.width {
            write!(f, "{}", self.bit(i))?;
        }
        Ok(())
    }
}
