//! k-local Hamiltonians with sparse row and column queries.
//!
//! A term's dense block is indexed big-endian over its support: `support[0]`
//! is the most significant bit of the local row index, matching the usual
//! `A ⊗ B` reading when `A` acts on `support[0]`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisIndex, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::numeric::{Scalar, TAU_HERM, TAU_ZERO};

/// Single-qubit Pauli operators for the convenience constructor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

/// One Hermitian term acting on a few qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTerm {
    support: Vec<usize>,
    dim: usize,
    matrix: Vec<Scalar>,
}

impl LocalTerm {
    /// Builds a term from row-major complex entries.
    pub fn new(support: Vec<usize>, matrix: Vec<Vec<Scalar>>) -> Result<Self> {
        let dim = 1usize
            .checked_shl(support.len() as u32)
            .filter(|_| support.len() <= MAX_QUBITS)
            .ok_or_else(|| Error::Argument("term support too large".into()))?;
        for (i, q) in support.iter().enumerate() {
            if support[..i].contains(q) {
                return Err(Error::Argument(format!("qubit {q} repeated in term support")));
            }
        }
        if matrix.len() != dim || matrix.iter().any(|row| row.len() != dim) {
            return Err(Error::Argument(format!(
                "term on {} qubits needs a {dim}x{dim} matrix",
                support.len()
            )));
        }
        let flat: Vec<Scalar> = matrix.into_iter().flatten().collect();
        if flat.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Argument("term matrix has non-finite entries".into()));
        }
        let term = Self {
            support,
            dim,
            matrix: flat,
        };
        let dev = term.hermiticity_defect();
        if dev > TAU_HERM {
            return Err(Error::NotHermitian(dev));
        }
        Ok(term)
    }

    pub fn real(support: Vec<usize>, matrix: Vec<Vec<f64>>) -> Result<Self> {
        let m = matrix
            .into_iter()
            .map(|row| row.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
            .collect();
        Self::new(support, m)
    }

    /// `coeff * I` acting on no qubits.
    pub fn identity(coeff: f64) -> Self {
        Self {
            support: Vec::new(),
            dim: 1,
            matrix: vec![Complex64::new(coeff, 0.0)],
        }
    }

    /// `coeff * P_1 ⊗ P_2 ⊗ ...` with each Pauli on its listed qubit.
    pub fn pauli(coeff: f64, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut m = vec![vec![Complex64::new(coeff, 0.0)]];
        for &(_, p) in ops {
            let pm = p.matrix();
            let d = m.len();
            let mut next = vec![vec![Complex64::new(0.0, 0.0); 2 * d]; 2 * d];
            for i in 0..d {
                for j in 0..d {
                    for a in 0..2 {
                        for b in 0..2 {
                            next[2 * i + a][2 * j + b] = m[i][j] * pm[a][b];
                        }
                    }
                }
            }
            m = next;
        }
        Self::new(ops.iter().map(|&(q, _)| q).collect(), m)
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Scalar {
        self.matrix[row * self.dim + col]
    }

    /// Row-major view of the dense block.
    pub fn rows(&self) -> impl Iterator<Item = &[Scalar]> {
        self.matrix.chunks(self.dim)
    }

    /// Local index of `x` restricted to the support.
    #[inline]
    pub fn local_index(&self, x: BasisIndex) -> usize {
        self.support
            .iter()
            .fold(0, |acc, &q| (acc << 1) | usize::from(x.bit(q)))
    }

    /// Overwrites the support bits of `x` with local index `local`.
    #[inline]
    pub fn embed(&self, x: BasisIndex, local: usize) -> BasisIndex {
        let len = self.support.len();
        self.support.iter().enumerate().fold(x, |acc, (j, &q)| {
            acc.with_bit(q, (local >> (len - 1 - j)) & 1 == 1)
        })
    }

    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|v| v.im.abs() <= TAU_ZERO)
    }

    fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..=i {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn spectral_norm(&self) -> f64 {
        let m = DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j));
        m.symmetric_eigenvalues()
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub(crate) fn from_parts(support: Vec<usize>, matrix: Vec<Scalar>) -> Self {
        let dim = 1 << support.len();
        debug_assert_eq!(matrix.len(), dim * dim);
        Self {
            support,
            dim,
            matrix,
        }
    }
}

/// `H = Σ_j H_j` over `qubits` qubits, each term acting on at most
/// `locality` of them.
#[derive(Clone, Debug)]
pub struct LocalHamiltonian {
    qubits: usize,
    locality: usize,
    terms: Vec<LocalTerm>,
    norm_bound: f64,
}

impl LocalHamiltonian {
    pub fn new(qubits: usize, locality: usize, terms: Vec<LocalTerm>) -> Result<Self> {
        if qubits > MAX_QUBITS {
            return Err(Error::Argument(format!(
                "{qubits} qubits exceeds the {MAX_QUBITS}-qubit cap"
            )));
        }
        for t in &terms {
            if t.support.len() > locality {
                return Err(Error::Argument(format!(
                    "term on {} qubits exceeds locality {locality}",
                    t.support.len()
                )));
            }
            if let Some(&q) = t.support.iter().find(|&&q| q >= qubits) {
                return Err(Error::Argument(format!(
                    "term touches qubit {q} outside [0, {qubits})"
                )));
            }
        }
        let norm_bound = terms.iter().map(LocalTerm::spectral_norm).sum();
        Ok(Self {
            qubits,
            locality,
            terms,
            norm_bound,
        })
    }

    /// Uses the largest term support as the locality.
    pub fn from_terms(qubits: usize, terms: Vec<LocalTerm>) -> Result<Self> {
        let k = terms.iter().map(|t| t.support.len()).max().unwrap_or(0);
        Self::new(qubits, k, terms)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn locality(&self) -> usize {
        self.locality
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Upper bound on `‖H‖`: the sum of term spectral norms.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// Row/column sparsity bound `d = 2^k · m`.
    pub fn sparsity(&self) -> usize {
        (1usize << self.locality) * self.terms.len()
    }

    pub fn is_real(&self) -> bool {
        self.terms.iter().all(LocalTerm::is_real)
    }

    /// `H + c·I`, appended as an identity term.
    pub fn shifted(&self, c: f64) -> Self {
        let mut terms = self.terms.clone();
        terms.push(LocalTerm::identity(c));
        Self {
            qubits: self.qubits,
            locality: self.locality,
            norm_bound: self.norm_bound + c.abs(),
            terms,
        }
    }

    /// `⟨x|H|y⟩`.
    pub fn entry(&self, x: BasisIndex, y: BasisIndex) -> Result<Scalar> {
        x.check_width(self.qubits)?;
        y.check_width(self.qubits)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let mask = t.support.iter().fold(0u32, |m, &q| m | (1 << q));
            if (x.bits() ^ y.bits()) & !mask != 0 {
                continue;
            }
            acc += t.get(t.local_index(x), t.local_index(y));
        }
        Ok(acc)
    }

    /// Every `y` with `⟨x|H|y⟩ ≠ 0`, ascending, with contributions of
    /// overlapping terms summed. Entries with `|value| ≤ τ_zero` are dropped.
    pub fn row_nonzeros(&self, x: BasisIndex) -> Result<Vec<(BasisIndex, Scalar)>> {
        x.check_width(self.qubits)?;
        let mut raw: Vec<(BasisIndex, Scalar)> = Vec::new();
        for t in &self.terms {
            let lx = t.local_index(x);
            for (j, &v) in t.matrix[lx * t.dim..(lx + 1) * t.dim].iter().enumerate() {
                if v.re != 0.0 || v.im != 0.0 {
                    raw.push((t.embed(x, j), v));
                }
            }
        }
        // stable sort keeps term order within each y, so sums are reproducible
        raw.sort_by_key(|(y, _)| *y);
        let mut out: Vec<(BasisIndex, Scalar)> = Vec::with_capacity(raw.len());
        for (y, v) in raw {
            match out.last_mut() {
                Some((last, acc)) if *last == y => *acc += v,
                _ => out.push((y, v)),
            }
        }
        out.retain(|(_, v)| v.norm() > TAU_ZERO);
        Ok(out)
    }

    /// Every `x` with `⟨x|H|y⟩ ≠ 0`, obtained from row `y` by Hermiticity.
    pub fn column_nonzeros(&self, y: BasisIndex) -> Result<Vec<(BasisIndex, Scalar)>> {
        Ok(self
            .row_nonzeros(y)?
            .into_iter()
            .map(|(x, v)| (x, v.conj()))
            .collect())
    }

    /// Real parts of [`row_nonzeros`](Self::row_nonzeros); errors if the
    /// Hamiltonian carries imaginary parts.
    pub fn real_row_nonzeros(&self, x: BasisIndex) -> Result<Vec<(BasisIndex, f64)>> {
        let row = self.row_nonzeros(x)?;
        if let Some((y, v)) = row.iter().find(|(_, v)| v.im.abs() > TAU_ZERO) {
            return Err(Error::NotReal(format!(
                "entry ⟨{x}|H|{y}⟩ = {v} has an imaginary part"
            )));
        }
        Ok(row.into_iter().map(|(y, v)| (y, v.re)).collect())
    }
}

/// Instance-file form of one term.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermRecord {
    pub support: Vec<usize>,
    pub matrix_re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_im: Option<Vec<Vec<f64>>>,
}

/// Instance-file form of a Hamiltonian.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HamiltonianRecord {
    pub qubits: usize,
    pub locality: usize,
    pub terms: Vec<TermRecord>,
}

impl From<&LocalHamiltonian> for HamiltonianRecord {
    fn from(h: &LocalHamiltonian) -> Self {
        let terms = h
            .terms
            .iter()
            .map(|t| {
                let matrix_re = t.rows().map(|r| r.iter().map(|v| v.re).collect()).collect();
                let matrix_im = (!t.is_real())
                    .then(|| t.rows().map(|r| r.iter().map(|v| v.im).collect()).collect());
                TermRecord {
                    support: t.support.clone(),
                    matrix_re,
                    matrix_im,
                }
            })
            .collect();
        Self {
            qubits: h.qubits,
            locality: h.locality,
            terms,
        }
    }
}

impl TryFrom<HamiltonianRecord> for LocalHamiltonian {
    type Error = Error;

    fn try_from(rec: HamiltonianRecord) -> Result<Self> {
        let mut terms = Vec::with_capacity(rec.terms.len());
        for t in rec.terms {
            let m = match t.matrix_im {
                None => t
                    .matrix_re
                    .into_iter()
                    .map(|r| r.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
                    .collect(),
                Some(im) => {
                    if im.len() != t.matrix_re.len() {
                        return Err(Error::Argument(
                            "matrix_re and matrix_im shapes differ".into(),
                        ));
                    }
                    t.matrix_re
                        .into_iter()
                        .zip(im)
                        .map(|(re, im)| {
                            if re.len() != im.len() {
                                return Err(Error::Argument(
                                    "matrix_re and matrix_im shapes differ".into(),
                                ));
                            }
                            Ok(re
                                .into_iter()
                                .zip(im)
                                .map(|(a, b)| Complex64::new(a, b))
                                .collect())
                        })
                        .collect::<Result<Vec<Vec<_>>>>()?
                }
            };
            terms.push(LocalTerm::new(t.support, m)?);
        }
        LocalHamiltonian::new(rec.qubits, rec.locality, terms)
    }
}
