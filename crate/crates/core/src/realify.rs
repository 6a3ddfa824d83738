//! Reduction of complex Hamiltonians to real symmetric ones on one extra qubit.
//!
//! `H' = H_R ⊗ I + H_I ⊗ [[0, -1], [1, 0]]`, with the ancilla appended as the
//! highest-index qubit. Every eigenvalue of `H` appears twice in `H'`.

use num_complex::Complex64;

use crate::hamiltonian::{LocalHamiltonian, LocalTerm};

pub use crate::amplitude::realify_state;

pub fn realify(h: &LocalHamiltonian) -> LocalHamiltonian {
    let ancilla = h.qubits();
    let zero = Complex64::new(0.0, 0.0);
    let terms = h
        .terms()
        .iter()
        .map(|t| {
            if t.is_real() {
                // H_R ⊗ I: the ancilla is untouched
                let m = t
                    .rows()
                    .flat_map(|r| r.iter().map(|v| Complex64::new(v.re, 0.0)))
                    .collect();
                return LocalTerm::from_parts(t.support().to_vec(), m);
            }
            let d = t.dim();
            let mut m = vec![zero; 4 * d * d];
            let w = 2 * d;
            for i in 0..d {
                for j in 0..d {
                    let v = t.get(i, j);
                    // kron(R, I)
                    m[(2 * i) * w + 2 * j] += v.re;
                    m[(2 * i + 1) * w + 2 * j + 1] += v.re;
                    // kron(I_part, [[0,-1],[1,0]])
                    m[(2 * i) * w + 2 * j + 1] -= v.im;
                    m[(2 * i + 1) * w + 2 * j] += v.im;
                }
            }
            let mut support = t.support().to_vec();
            support.push(ancilla);
            LocalTerm::from_parts(support, m)
        })
        .collect();
    LocalHamiltonian::new(h.qubits() + 1, h.locality() + 1, terms)
        .expect("realified terms stay within the enlarged register")
}
