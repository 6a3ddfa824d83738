//! Exact rational evaluation for small instances.
//!
//! Every finite `f64` is a dyadic rational, so converting inputs loses
//! nothing; sums and ratios are then carried out without rounding.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::basis::BasisIndex;
use crate::error::{Error, Result};
use crate::hamiltonian::LocalHamiltonian;

pub fn to_rational(v: f64) -> Option<BigRational> {
    BigRational::from_float(v)
}

/// `true` iff numerator and denominator each fit in `bits` bits.
pub fn fits_bits(r: &BigRational, bits: u32) -> bool {
    bit_len(r.numer()) <= u64::from(bits) && bit_len(r.denom()) <= u64::from(bits)
}

fn bit_len(n: &BigInt) -> u64 {
    n.abs().bits()
}

/// Exact row of a real Hamiltonian: contributions converted individually and
/// summed as rationals. Exact zeros are dropped.
pub fn row_nonzeros_exact(
    h: &LocalHamiltonian,
    x: BasisIndex,
) -> Result<Vec<(BasisIndex, BigRational)>> {
    x.check_width(h.qubits())?;
    let mut raw: Vec<(BasisIndex, BigRational)> = Vec::new();
    for t in h.terms() {
        let lx = t.local_index(x);
        for j in 0..t.dim() {
            let v = t.get(lx, j);
            if v.im != 0.0 {
                return Err(Error::NotReal(format!(
                    "term entry ({lx}, {j}) carries an imaginary part"
                )));
            }
            if v.re != 0.0 {
                let r = to_rational(v.re).expect("term entries are finite");
                raw.push((t.embed(x, j), r));
            }
        }
    }
    raw.sort_by_key(|(y, _)| *y);
    let mut out: Vec<(BasisIndex, BigRational)> = Vec::with_capacity(raw.len());
    for (y, v) in raw {
        match out.last_mut() {
            Some((last, acc)) if *last == y => *acc += v,
            _ => out.push((y, v)),
        }
    }
    out.retain(|(_, v)| !v.is_zero());
    Ok(out)
}
