//! Numeric policy: scalar type, tolerances and the optional exact mode.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Matrix entries, amplitudes and energies.
pub type Scalar = Complex64;

/// Threshold below which an entry or amplitude counts as zero.
pub const TAU_ZERO: f64 = 1e-12;
/// Hermiticity tolerance for local terms and dense operators.
pub const TAU_HERM: f64 = 1e-10;
/// Support cutoff applied to dense eigenvectors turned into oracles.
pub const TAU_SUPP: f64 = 1e-10;
/// Relative factor of the column-sum tolerance `1e-9 * (1 + |G_xx|)`.
pub const TAU_COL_REL: f64 = 1e-9;
/// Ratios of amplitudes larger than this are reported as a range error.
pub const RATIO_LIMIT: f64 = 1e300;

/// Largest register on which exact rational checks are offered.
pub const EXACT_MAX_QUBITS: usize = 6;

/// How the verifier evaluates its legality and format checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NumericMode {
    /// Double precision with the tolerances above.
    #[default]
    Float,
    /// Exact rationals; every value must fit numerator and denominator in
    /// `bits` bits.
    Exact { bits: u32 },
}

#[inline]
pub fn is_zero(v: f64) -> bool {
    v.abs() <= TAU_ZERO
}

/// Column-sum tolerance for a generator column with diagonal `diag`.
#[inline]
pub fn column_tolerance(diag: f64) -> f64 {
    TAU_COL_REL * (1.0 + diag.abs())
}

/// Sum with terms taken in ascending magnitude.
pub fn sum_ascending(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    values.iter().sum()
}
