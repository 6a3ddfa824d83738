//! Amplitude oracles `C_φ(x)` for succinct states.
//!
//! Oracles describe a state only up to a common nonzero factor, so every
//! consumer works with ratios `C_φ(z) / C_φ(x)` or with the support.

use std::sync::Arc;

use num_complex::Complex64;

use crate::basis::BasisIndex;
use crate::error::Result;
use crate::numeric::{Scalar, TAU_ZERO};

/// A deterministic, re-entrant amplitude function on `qubits()`-bit strings.
pub trait AmplitudeOracle: Send + Sync {
    fn qubits(&self) -> usize;

    fn amplitude(&self, x: BasisIndex) -> Scalar;

    fn in_support(&self, x: BasisIndex) -> bool {
        self.amplitude(x).norm() > TAU_ZERO
    }
}

impl<O: AmplitudeOracle + ?Sized> AmplitudeOracle for &O {
    fn qubits(&self) -> usize {
        (**self).qubits()
    }
    fn amplitude(&self, x: BasisIndex) -> Scalar {
        (**self).amplitude(x)
    }
}

impl<O: AmplitudeOracle + ?Sized> AmplitudeOracle for Arc<O> {
    fn qubits(&self) -> usize {
        (**self).qubits()
    }
    fn amplitude(&self, x: BasisIndex) -> Scalar {
        (**self).amplitude(x)
    }
}

impl<O: AmplitudeOracle + ?Sized> AmplitudeOracle for Box<O> {
    fn qubits(&self) -> usize {
        (**self).qubits()
    }
    fn amplitude(&self, x: BasisIndex) -> Scalar {
        (**self).amplitude(x)
    }
}

/// Oracle backed by a closure.
pub struct FnOracle<F> {
    qubits: usize,
    f: F,
}

impl<F> FnOracle<F>
where
    F: Fn(BasisIndex) -> Scalar + Send + Sync,
{
    pub fn new(qubits: usize, f: F) -> Self {
        Self { qubits, f }
    }
}

impl<F> AmplitudeOracle for FnOracle<F>
where
    F: Fn(BasisIndex) -> Scalar + Send + Sync,
{
    fn qubits(&self) -> usize {
        self.qubits
    }
    fn amplitude(&self, x: BasisIndex) -> Scalar {
        (self.f)(x)
    }
}

/// Oracle over an explicit vector indexed by packed basis bits.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorOracle {
    qubits: usize,
    values: Vec<Scalar>,
}

impl VectorOracle {
    pub fn new(qubits: usize, values: Vec<Scalar>) -> Result<Self> {
        BasisIndex::zero(qubits)?;
        if values.len() != 1 << qubits {
            return Err(crate::Error::Argument(format!(
                "expected {} amplitudes, got {}",
                1usize << qubits,
                values.len()
            )));
        }
        Ok(Self { qubits, values })
    }

    pub fn from_real(qubits: usize, values: &[f64]) -> Result<Self> {
        Self::new(
            qubits,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn values(&self) -> &[Scalar] {
        &self.values
    }
}

impl AmplitudeOracle for VectorOracle {
    fn qubits(&self) -> usize {
        self.qubits
    }
    fn amplitude(&self, x: BasisIndex) -> Scalar {
        self.values[x.bits() as usize]
    }
}

/// `|φ'⟩ = |φ_R⟩|0⟩ + |φ_I⟩|1⟩` on one extra (highest-index) qubit.
pub struct Realified<O> {
    inner: O,
}

impl<O: AmplitudeOracle> AmplitudeOracle for Realified<O> {
    fn qubits(&self) -> usize {
        self.inner.qubits() + 1
    }

    fn amplitude(&self, x: BasisIndex) -> Scalar {
        let (base, ancilla) = x.split_last();
        let c = self.inner.amplitude(base);
        Complex64::new(if ancilla { c.im } else { c.re }, 0.0)
    }
}

/// Real-valued oracle on `n + 1` qubits describing an eigenstate of
/// [`realify`](crate::realify::realify) applied to the source Hamiltonian.
pub fn realify_state<O: AmplitudeOracle>(oracle: O) -> Realified<O> {
    Realified { inner: oracle }
}

/// All support strings, by exhaustive enumeration.
pub fn support_of(oracle: &dyn AmplitudeOracle) -> Result<Vec<BasisIndex>> {
    Ok(BasisIndex::all(oracle.qubits())?
        .filter(|&x| oracle.in_support(x))
        .collect())
}

/// The support string with the largest `|C_φ(x)|` (smallest index on ties).
pub fn argmax_amplitude(oracle: &dyn AmplitudeOracle) -> Result<Option<BasisIndex>> {
    let mut best: Option<(BasisIndex, f64)> = None;
    for x in BasisIndex::all(oracle.qubits())? {
        let a = oracle.amplitude(x).norm();
        if a > TAU_ZERO && best.is_none_or(|(_, b)| a > b) {
            best = Some((x, a));
        }
    }
    Ok(best.map(|(x, _)| x))
}
