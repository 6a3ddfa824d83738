//! Brute-force ground truth for small registers.
//!
//! Dense copies of `H`, `H_S`, `F` and the generators, exact
//! diagonalization, matrix exponentials, and a checker for the structural
//! properties the fixed-node construction is supposed to have.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplitude::{support_of, AmplitudeOracle, VectorOracle};
use crate::basis::BasisIndex;
use crate::error::{Error, Result};
use crate::fixed_node::{FixedNodeView, GeneratorView};
use crate::hamiltonian::LocalHamiltonian;
use crate::numeric::{TAU_HERM, TAU_SUPP};

/// Largest dimension any dense operator may have.
pub const DENSE_CAP: usize = 4096;
/// Largest dimension accepted by [`matrix_exponential`].
pub const EXP_CAP: usize = 256;

/// A dense real operator on the strings `labels` (row/column `i` ↔
/// `labels[i]`).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    pub labels: Vec<BasisIndex>,
    pub matrix: DMatrix<f64>,
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn position(&self, x: BasisIndex) -> Option<usize> {
        self.labels.iter().position(|&l| l == x)
    }

    /// Largest `|D_ij - D_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let m = &self.matrix;
        (&(m - m.transpose())).amax()
    }

    /// Column `x` as a vector over the labels.
    pub fn column_of(&self, x: BasisIndex) -> Option<DVector<f64>> {
        self.position(x).map(|i| self.matrix.column(i).into_owned())
    }
}

fn check_cap(dim: usize, cap: usize) -> Result<()> {
    if dim > cap {
        return Err(Error::SizeCap { dim, cap });
    }
    Ok(())
}

fn label_set(qubits: usize, support: Option<&[BasisIndex]>) -> Result<Vec<BasisIndex>> {
    match support {
        Some(s) => {
            check_cap(s.len(), DENSE_CAP)?;
            for x in s {
                x.check_width(qubits)?;
            }
            Ok(s.to_vec())
        }
        None => {
            check_cap(1usize.checked_shl(qubits as u32).unwrap_or(usize::MAX), DENSE_CAP)?;
            Ok(BasisIndex::all(qubits)?.collect())
        }
    }
}

fn positions(labels: &[BasisIndex]) -> HashMap<BasisIndex, usize> {
    labels.iter().enumerate().map(|(i, &x)| (x, i)).collect()
}

/// Dense real copy of `H`, or of the principal submatrix `H_S` when
/// `support` is given.
pub fn materialize_hamiltonian(
    h: &LocalHamiltonian,
    support: Option<&[BasisIndex]>,
) -> Result<DenseOperator> {
    if !h.is_real() {
        return Err(Error::NotReal("use materialize_complex for complex Hamiltonians".into()));
    }
    let labels = label_set(h.qubits(), support)?;
    let pos = positions(&labels);
    let mut m = DMatrix::zeros(labels.len(), labels.len());
    for (i, &x) in labels.iter().enumerate() {
        for (y, v) in h.real_row_nonzeros(x)? {
            if let Some(&j) = pos.get(&y) {
                m[(i, j)] = v;
            }
        }
    }
    Ok(DenseOperator { labels, matrix: m })
}

/// Dense complex copy of `H` on all `2^n` strings.
pub fn materialize_complex(h: &LocalHamiltonian) -> Result<DMatrix<Complex64>> {
    let dim = 1usize << h.qubits();
    check_cap(dim, DENSE_CAP)?;
    let mut m = DMatrix::zeros(dim, dim);
    for x in BasisIndex::all(h.qubits())? {
        for (y, v) in h.row_nonzeros(x)? {
            m[(x.bits() as usize, y.bits() as usize)] = v;
        }
    }
    Ok(m)
}

/// Ascending eigenvalues of a Hermitian complex matrix.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let dev = (m - m.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if dev > TAU_HERM {
        return Err(Error::NotHermitian(dev));
    }
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Dense `F` on `S = supp(φ)` (or the given subset of it).
pub fn materialize_fixed_node(
    view: &FixedNodeView<'_>,
    support: Option<&[BasisIndex]>,
) -> Result<DenseOperator> {
    let labels = match support {
        Some(s) => label_set(view.qubits(), Some(s))?,
        None => support_of(view.oracle())?,
    };
    check_cap(labels.len(), DENSE_CAP)?;
    let pos = positions(&labels);
    let mut m = DMatrix::zeros(labels.len(), labels.len());
    for (i, &x) in labels.iter().enumerate() {
        for (y, v) in view.fn_row(x)? {
            if let Some(&j) = pos.get(&y) {
                m[(i, j)] = v;
            }
        }
    }
    Ok(DenseOperator { labels, matrix: m })
}

/// Dense generator with `D[(y, x)] = ⟨y|G|x⟩` on `S = supp(φ)`.
pub fn materialize_generator(
    view: &GeneratorView<'_>,
    support: Option<&[BasisIndex]>,
) -> Result<DenseOperator> {
    let labels = match support {
        Some(s) => label_set(view.qubits(), Some(s))?,
        None => support_of(view.fixed_node().oracle())?,
    };
    check_cap(labels.len(), DENSE_CAP)?;
    let pos = positions(&labels);
    let mut m = DMatrix::zeros(labels.len(), labels.len());
    for (j, &x) in labels.iter().enumerate() {
        let col = view.column(x)?;
        m[(j, j)] = col.diagonal;
        for (y, r) in col.rates {
            if let Some(&i) = pos.get(&y) {
                m[(i, j)] = r;
            }
        }
    }
    Ok(DenseOperator { labels, matrix: m })
}

fn check_symmetric(d: &DenseOperator) -> Result<()> {
    let dev = d.asymmetry();
    if dev > TAU_HERM {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Ascending spectrum of a symmetric operator.
pub fn eigenvalues(d: &DenseOperator) -> Result<Vec<f64>> {
    check_symmetric(d)?;
    let mut ev: Vec<f64> = d.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Smallest eigenvalue and a unit eigenvector. The sign is fixed so that the
/// largest-magnitude component is positive.
pub fn ground_energy(d: &DenseOperator) -> Result<(f64, DVector<f64>)> {
    check_symmetric(d)?;
    if d.dim() == 0 {
        return Err(Error::Argument("empty operator".into()));
    }
    let eig = d.matrix.clone().symmetric_eigen();
    let (k, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty spectrum");
    let mut psi = eig.eigenvectors.column(k).into_owned();
    let lead = psi.iter().copied().fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
    if lead < 0.0 {
        psi.neg_mut();
    }
    psi.normalize_mut();
    Ok((lambda, psi))
}

/// `‖Dψ − λψ‖`.
pub fn eigen_residual(d: &DenseOperator, lambda: f64, psi: &DVector<f64>) -> f64 {
    (&d.matrix * psi - psi * lambda).norm()
}

/// Spectral norm of a symmetric operator.
pub fn spectral_norm(d: &DenseOperator) -> Result<f64> {
    let ev = eigenvalues(d)?;
    Ok(ev.iter().fold(0.0f64, |a, v| a.max(v.abs())))
}

/// `exp(sD)` by scaling and squaring with a Padé approximant.
pub fn matrix_exponential(d: &DenseOperator, s: f64) -> Result<DenseOperator> {
    check_cap(d.dim(), EXP_CAP)?;
    Ok(DenseOperator {
        labels: d.labels.clone(),
        matrix: (&d.matrix * s).exp(),
    })
}

/// Largest column-sum deviation from one and the most negative entry.
pub fn stochasticity(d: &DenseOperator) -> (f64, f64) {
    let sum_dev = d
        .matrix
        .column_iter()
        .map(|c| (c.sum() - 1.0).abs())
        .fold(0.0, f64::max);
    (sum_dev, d.matrix.min())
}

/// Ground state of a real `H` as a lookup-table oracle: the dense
/// eigenvector with components `|ψ_x| ≤ τ_supp` set to zero.
pub fn ground_state_oracle(h: &LocalHamiltonian) -> Result<(f64, VectorOracle)> {
    let d = materialize_hamiltonian(h, None)?;
    let (lambda, psi) = ground_energy(&d)?;
    let values: Vec<f64> = psi.iter().map(|&v| if v.abs() > TAU_SUPP { v } else { 0.0 }).collect();
    Ok((lambda, VectorOracle::from_real(h.qubits(), &values)?))
}

/// One line of a [`LemmaReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub name: String,
    pub passed: bool,
    /// Measured deviation (or margin) the check was decided on.
    pub residual: f64,
    pub tolerance: f64,
    pub skipped: bool,
}

/// Outcome of [`check_lemma_suite`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub support_size: usize,
    pub lambda_h: Option<f64>,
    pub lambda_h_support: f64,
    pub lambda_f: f64,
    pub phi_is_ground: bool,
    pub checks: Vec<LemmaCheck>,
}

impl LemmaReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.skipped)
    }

    pub fn check(&self, name: &str) -> Option<&LemmaCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Tolerances of the lemma suite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaTolerances {
    pub symmetry: f64,
    pub sign: f64,
    /// Relative to `‖H_S‖·‖φ‖`.
    pub fixed_point: f64,
    pub energy: f64,
    pub column_sum: f64,
    pub rate: f64,
    pub stationarity: f64,
    pub spectrum: f64,
}

impl Default for LemmaTolerances {
    fn default() -> Self {
        Self {
            symmetry: 1e-12,
            sign: 1e-12,
            fixed_point: 1e-9,
            energy: 1e-9,
            column_sum: 1e-9,
            rate: 1e-12,
            stationarity: 1e-9,
            spectrum: 1e-7,
        }
    }
}

/// Registers up to this size also get the full-space comparison
/// `λ(H) ≤ λ(H_S) ≤ λ_max(H)`.
const FULL_SPECTRUM_MAX_QUBITS: usize = 10;

fn push(checks: &mut Vec<LemmaCheck>, name: &str, residual: f64, tolerance: f64) {
    checks.push(LemmaCheck {
        name: name.into(),
        passed: residual <= tolerance,
        residual,
        tolerance,
        skipped: false,
    });
}

fn skip(checks: &mut Vec<LemmaCheck>, name: &str, tolerance: f64) {
    checks.push(LemmaCheck {
        name: name.into(),
        passed: false,
        residual: f64::NAN,
        tolerance,
        skipped: true,
    });
}

/// Checks the structural properties of `F^{H,φ}` and, when `φ` is a ground
/// state of `H_S`, of the shifted generator `G̃`.
pub fn check_lemma_suite(h: &LocalHamiltonian, phi: &dyn AmplitudeOracle) -> Result<LemmaReport> {
    check_lemma_suite_with(h, phi, &LemmaTolerances::default())
}

pub fn check_lemma_suite_with(
    h: &LocalHamiltonian,
    phi: &dyn AmplitudeOracle,
    tol: &LemmaTolerances,
) -> Result<LemmaReport> {
    let view = FixedNodeView::new(h, phi)?;
    let support = support_of(phi)?;
    if support.is_empty() {
        return Err(Error::Argument("oracle has empty support".into()));
    }
    check_cap(support.len(), DENSE_CAP)?;
    let hs = materialize_hamiltonian(h, Some(&support))?;
    let f = materialize_fixed_node(&view, Some(&support))?;
    let phi_vec = DVector::from_iterator(
        support.len(),
        support.iter().map(|&x| view.amplitude(x)).collect::<Result<Vec<_>>>()?,
    );
    let mut checks = Vec::new();

    push(&mut checks, "f_symmetric", f.asymmetry(), tol.symmetry);

    let mut worst_sign = f64::NEG_INFINITY;
    for i in 0..f.dim() {
        for j in 0..f.dim() {
            if i != j {
                let s = phi_vec[i].signum() * phi_vec[j].signum() * f.matrix[(i, j)];
                worst_sign = worst_sign.max(s);
            }
        }
    }
    push(&mut checks, "f_sign_conjugated_stoquastic", worst_sign.max(0.0), tol.sign);

    let hs_norm = spectral_norm(&hs)?;
    let fp = (&f.matrix * &phi_vec - &hs.matrix * &phi_vec).norm();
    push(
        &mut checks,
        "f_phi_equals_h_phi",
        fp,
        tol.fixed_point * hs_norm.max(1.0) * phi_vec.norm(),
    );

    let hs_spec = eigenvalues(&hs)?;
    let f_spec = eigenvalues(&f)?;
    let lambda_hs = hs_spec[0];
    let lambda_f = f_spec[0];
    push(&mut checks, "lambda_f_at_least_lambda_h_support", (lambda_hs - lambda_f).max(0.0), tol.energy);

    let lambda_h = if h.qubits() <= FULL_SPECTRUM_MAX_QUBITS {
        let full = eigenvalues(&materialize_hamiltonian(h, None)?)?;
        let (lo, hi) = (full[0], *full.last().unwrap());
        let margin = (lo - lambda_hs).max(lambda_hs - hi).max(0.0);
        push(&mut checks, "submatrix_interlacing", margin, tol.energy);
        Some(lo)
    } else {
        skip(&mut checks, "submatrix_interlacing", tol.energy);
        None
    };

    let unit = &phi_vec / phi_vec.norm();
    let phi_is_ground = (&hs.matrix * &unit - &unit * lambda_hs).norm() <= tol.fixed_point * hs_norm.max(1.0);
    let ground_checks = [
        ("lambda_f_equals_lambda_h_support", tol.energy),
        ("shifted_generator_column_sums", tol.column_sum),
        ("shifted_generator_rates_nonnegative", tol.rate),
        ("shifted_generator_stationary", tol.stationarity),
        ("shifted_generator_spectrum", tol.spectrum),
    ];
    if phi_is_ground {
        push(&mut checks, ground_checks[0].0, (lambda_f - lambda_hs).abs(), tol.energy);
        let g = materialize_generator(&GeneratorView::shifted(view, lambda_f), Some(&support))?;
        let col = g.matrix.column_iter().map(|c| c.sum().abs()).fold(0.0, f64::max);
        push(&mut checks, ground_checks[1].0, col, tol.column_sum);
        let mut worst_rate = 0.0f64;
        for i in 0..g.dim() {
            for j in 0..g.dim() {
                if i != j {
                    worst_rate = worst_rate.max(-g.matrix[(i, j)]);
                }
            }
        }
        push(&mut checks, ground_checks[2].0, worst_rate, tol.rate);
        let pi = phi_vec.map(|v| v * v) / phi_vec.norm_squared();
        push(&mut checks, ground_checks[3].0, (&g.matrix * &pi).norm(), tol.stationarity);
        let mut g_spec: Vec<Complex64> = g.matrix.complex_eigenvalues().iter().copied().collect();
        g_spec.sort_by(|a, b| a.re.total_cmp(&b.re));
        let mut target: Vec<f64> = f_spec.iter().map(|v| lambda_f - v).collect();
        target.sort_by(f64::total_cmp);
        let dev = g_spec
            .iter()
            .zip(&target)
            .map(|(a, &b)| (a - Complex64::new(b, 0.0)).norm())
            .fold(0.0, f64::max);
        push(&mut checks, ground_checks[4].0, dev, tol.spectrum);
    } else {
        for (name, t) in ground_checks {
            skip(&mut checks, name, t);
        }
    }

    Ok(LemmaReport {
        support_size: support.len(),
        lambda_h,
        lambda_h_support: lambda_hs,
        lambda_f,
        phi_is_ground,
        checks,
    })
}
