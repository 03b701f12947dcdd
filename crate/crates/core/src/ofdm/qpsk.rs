//! Gray-coded QPSK.
//!
//! | bits | symbol         |
//! |------|----------------|
//! | 00   | (+1 + i) / √2  |
//! | 01   | (-1 + i) / √2  |
//! | 11   | (-1 - i) / √2  |
//! | 10   | (+1 - i) / √2  |
//!
//! The first bit of a pair selects the sign of the imaginary part and the
//! second the sign of the real part.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::num::Real;

pub fn qpsk_point<T: Real>(b0: u8, b1: u8) -> Complex<T> {
    let a = T::FRAC_1_SQRT_2();
    let re = if b1 == 0 { a } else { -a };
    let im = if b0 == 0 { a } else { -a };
    Complex::new(re, im)
}

/// Maps an even-length bit slice (values 0/1) to unit-energy QPSK symbols.
pub fn qpsk_map<T: Real>(bits: &[u8]) -> Result<Vec<Complex<T>>> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "QPSK needs an even number of bits, got {}",
            bits.len()
        )));
    }
    Ok(bits.chunks_exact(2).map(|p| qpsk_point(p[0], p[1])).collect())
}

/// Quadrant decision; points on an axis go to the positive side.
pub fn qpsk_demap<T: Real>(symbols: &[Complex<T>]) -> Vec<u8> {
    let mut bits = Vec::with_capacity(symbols.len() * 2);
    for s in symbols {
        bits.push(u8::from(s.im < T::zero()));
        bits.push(u8::from(s.re < T::zero()));
    }
    bits
}
