//! Instance and witness generators.
//!
//! * product-state Yes instances: frustration-free parents of a product state;
//! * history-state Yes instances: the unary-clock Hamiltonian of a classical
//!   reversible circuit, whose ground state is the circuit's history state;
//! * No instances: random Hamiltonians shifted to a certified ground energy;
//! * adversarial witnesses for soundness experiments.
//!
//! Oracles are described by serializable [`OracleDescriptor`]s.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplitude::{argmax_amplitude, realify_state, AmplitudeOracle, VectorOracle};
use crate::basis::{BasisIndex, MAX_QUBITS};
use crate::dense::{
    eigenvalues, ground_energy, hermitian_eigenvalues, materialize_complex, materialize_hamiltonian,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{HamiltonianRecord, LocalHamiltonian, LocalTerm};
use crate::numeric::{Scalar, TAU_SUPP, TAU_ZERO};
use crate::realify::realify;
use crate::sampling::RngStream;
use crate::verifier::{Instance, Witness, DEFAULT_GAP_FLOOR};

/// Registers up to this size get their promise edge `b` from the dense
/// spectrum.
pub const CERTIFY_MAX_QUBITS: usize = 10;
/// Largest register accepted by [`make_no_instance`].
pub const NO_INSTANCE_MAX_QUBITS: usize = 10;

const C0: Complex64 = Complex64::new(0.0, 0.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Serializable description of an amplitude oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OracleDescriptor {
    /// `⊗_i (s_i[0]|0⟩ + s_i[1]|1⟩)`, qubit `i` ↔ `states[i]`.
    Product { states: Vec<[Scalar; 2]> },
    /// Explicit sparse list of basis strings and amplitudes.
    BasisSuperposition {
        qubits: usize,
        terms: Vec<(BasisIndex, Scalar)>,
    },
    /// History state of a reversible circuit.
    HistoryState(HistoryState),
    /// Dense table indexed by packed basis bits.
    LookupTable { qubits: usize, values: Vec<f64> },
    /// Real encoding `φ_R|0⟩ + φ_I|1⟩` of a complex oracle on one more qubit.
    Realified { inner: Box<OracleDescriptor> },
}

impl OracleDescriptor {
    pub fn qubits(&self) -> usize {
        match self {
            Self::Product { states } => states.len(),
            Self::BasisSuperposition { qubits, .. } | Self::LookupTable { qubits, .. } => *qubits,
            Self::HistoryState(h) => h.qubits(),
            Self::Realified { inner } => inner.qubits() + 1,
        }
    }

    pub fn build(&self) -> Result<Arc<dyn AmplitudeOracle>> {
        Ok(match self {
            Self::Product { states } => {
                BasisIndex::zero(states.len())?;
                Arc::new(ProductOracle {
                    states: states.clone(),
                })
            }
            Self::BasisSuperposition { qubits, terms } => {
                BasisIndex::zero(*qubits)?;
                let mut table = HashMap::new();
                for (x, v) in terms {
                    x.check_width(*qubits)?;
                    if table.insert(*x, *v).is_some() {
                        return Err(Error::Argument(format!("basis string {x} listed twice")));
                    }
                }
                Arc::new(SuperpositionOracle {
                    qubits: *qubits,
                    table,
                })
            }
            Self::HistoryState(h) => {
                h.validate()?;
                Arc::new(h.clone())
            }
            Self::LookupTable { qubits, values } => Arc::new(VectorOracle::from_real(*qubits, values)?),
            Self::Realified { inner } => Arc::new(realify_state(inner.build()?)),
        })
    }
}

struct ProductOracle {
    states: Vec<[Scalar; 2]>,
}

impl AmplitudeOracle for ProductOracle {
    fn qubits(&self) -> usize {
        self.states.len()
    }
    fn amplitude(&self, x: BasisIndex) -> Scalar {
        self.states
            .iter()
            .enumerate()
            .fold(c(1.0), |acc, (q, s)| acc * s[x.bit(q) as usize])
    }
}

struct SuperpositionOracle {
    qubits: usize,
    table: HashMap<BasisIndex, Scalar>,
}

impl AmplitudeOracle for SuperpositionOracle {
    fn qubits(&self) -> usize {
        self.qubits
    }
    fn amplitude(&self, x: BasisIndex) -> Scalar {
        self.table.get(&x).copied().unwrap_or(C0)
    }
}

/// Classical reversible gate. Every gate is its own inverse.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Gate {
    Identity { wire: usize },
    Not { target: usize },
    Cnot { control: usize, target: usize },
    Toffoli { controls: [usize; 2], target: usize },
}

impl Gate {
    /// Wires in local order: controls first, target last.
    pub fn wires(&self) -> Vec<usize> {
        match *self {
            Gate::Identity { wire } => vec![wire],
            Gate::Not { target } => vec![target],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Toffoli { controls, target } => vec![controls[0], controls[1], target],
        }
    }

    pub fn apply(&self, bits: u32) -> u32 {
        let on = |w: usize| bits >> w & 1 == 1;
        match *self {
            Gate::Identity { .. } => bits,
            Gate::Not { target } => bits ^ 1 << target,
            Gate::Cnot { control, target } => {
                if on(control) {
                    bits ^ 1 << target
                } else {
                    bits
                }
            }
            Gate::Toffoli { controls, target } => {
                if on(controls[0]) && on(controls[1]) {
                    bits ^ 1 << target
                } else {
                    bits
                }
            }
        }
    }
}

/// Ordered list of reversible gates on `wires` classical bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReversibleCircuit {
    pub wires: usize,
    pub gates: Vec<Gate>,
}

impl ReversibleCircuit {
    pub fn new(wires: usize, gates: Vec<Gate>) -> Result<Self> {
        let c = Self { wires, gates };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.wires > MAX_QUBITS {
            return Err(Error::Argument(format!("{} wires exceed the register limit", self.wires)));
        }
        for (i, g) in self.gates.iter().enumerate() {
            let w = g.wires();
            if w.iter().any(|&q| q >= self.wires) {
                return Err(Error::Argument(format!("gate {i} touches a wire outside 0..{}", self.wires)));
            }
            for a in 0..w.len() {
                if w[a + 1..].contains(&w[a]) {
                    return Err(Error::Argument(format!("gate {i} repeats a wire")));
                }
            }
        }
        Ok(())
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Runs the first `steps` gates.
    pub fn run_prefix(&self, bits: u32, steps: usize) -> u32 {
        self.gates[..steps].iter().fold(bits, |z, g| g.apply(z))
    }

    /// Undoes the first `steps` gates.
    pub fn undo_prefix(&self, bits: u32, steps: usize) -> u32 {
        self.gates[..steps].iter().rev().fold(bits, |z, g| g.apply(z))
    }

    pub fn run(&self, bits: u32) -> u32 {
        self.run_prefix(bits, self.gates.len())
    }

    /// `n_gates` random NOT/CNOT/Toffoli gates.
    pub fn random(wires: usize, n_gates: usize, rng: &mut RngStream) -> Result<Self> {
        if wires == 0 {
            return Err(Error::Argument("a circuit needs at least one wire".into()));
        }
        let mut gates = Vec::with_capacity(n_gates);
        for _ in 0..n_gates {
            let kinds = wires.min(3) as u64;
            let mut picks: Vec<usize> = Vec::new();
            let arity = 1 + rng.below(kinds) as usize;
            while picks.len() < arity {
                let w = rng.below(wires as u64) as usize;
                if !picks.contains(&w) {
                    picks.push(w);
                }
            }
            gates.push(match arity {
                1 => Gate::Not { target: picks[0] },
                2 => Gate::Cnot {
                    control: picks[0],
                    target: picks[1],
                },
                _ => Gate::Toffoli {
                    controls: [picks[0], picks[1]],
                    target: picks[2],
                },
            });
        }
        Self::new(wires, gates)
    }
}

/// History state of a circuit whose data wires are, in order, ancillas
/// (start in `0`), coins (start in `|+⟩`) and witness wires (start in
/// `witness_bits`). Clock qubit `j` (`1 ≤ j ≤ T`) is qubit `wires + j − 1`;
/// time `t` is encoded as `1^t 0^{T−t}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryState {
    pub circuit: ReversibleCircuit,
    pub coins: usize,
    /// Witness wire `i` ↔ character `i`.
    pub witness_bits: String,
}

impl HistoryState {
    pub fn ancillas(&self) -> usize {
        self.circuit.wires - self.coins - self.witness_bits.len()
    }

    pub fn clock_len(&self) -> usize {
        self.circuit.gate_count()
    }

    pub fn qubits(&self) -> usize {
        self.circuit.wires + self.clock_len()
    }

    pub fn clock_qubit(&self, j: usize) -> usize {
        self.circuit.wires + j - 1
    }

    fn witness_value(&self) -> u32 {
        self.witness_bits
            .chars()
            .enumerate()
            .fold(0u32, |acc, (i, ch)| acc | ((ch == '1') as u32) << i)
    }

    pub fn validate(&self) -> Result<()> {
        self.circuit.validate()?;
        if self.coins % 2 != 0 {
            return Err(Error::Argument(format!("coin count must be even, got {}", self.coins)));
        }
        if self.coins + self.witness_bits.len() > self.circuit.wires {
            return Err(Error::Argument("coins and witness exceed the circuit wires".into()));
        }
        if self.witness_bits.chars().any(|ch| ch != '0' && ch != '1') {
            return Err(Error::Argument("witness bits must be 0/1".into()));
        }
        if self.clock_len() == 0 {
            return Err(Error::Argument("the circuit needs at least one gate".into()));
        }
        if self.qubits() > MAX_QUBITS {
            return Err(Error::Argument(format!("{} qubits exceed the register limit", self.qubits())));
        }
        Ok(())
    }

    /// Input configuration at time zero with all coins `0`.
    pub fn initial_string(&self) -> BasisIndex {
        let a = self.ancillas();
        let bits = self.witness_value() << (a + self.coins);
        BasisIndex::new(bits, self.qubits()).expect("validated width")
    }
}

impl AmplitudeOracle for HistoryState {
    fn qubits(&self) -> usize {
        HistoryState::qubits(self)
    }

    /// `1` on `|R_t…R_1 z⟩|t⟩` for every admissible input `z`, else `0`. The
    /// common factor `2^{−r/2}/√(T+1)` is dropped.
    fn amplitude(&self, x: BasisIndex) -> Scalar {
        let p = self.circuit.wires;
        let data = x.bits() & ((1u32 << p) - 1);
        let clock = x.bits() >> p;
        let t = clock.trailing_ones() as usize;
        if clock != (1u32 << t) - 1 || t > self.clock_len() {
            return C0;
        }
        let z = self.circuit.undo_prefix(data, t);
        let a = self.ancillas();
        let ancilla_ok = z & ((1u32 << a) - 1) == 0;
        let witness_ok = z >> (a + self.coins) == self.witness_value();
        if ancilla_ok && witness_ok {
            c(1.0)
        } else {
            C0
        }
    }
}

/// Instance-file form of an [`Instance`]; `a` and `b` are optional so bare
/// Hamiltonians can be stored too.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceRecord {
    #[serde(flatten)]
    pub hamiltonian: HamiltonianRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

impl InstanceRecord {
    pub fn from_instance(inst: &Instance) -> Self {
        Self {
            hamiltonian: HamiltonianRecord::from(&inst.hamiltonian),
            a: Some(inst.a),
            b: Some(inst.b),
        }
    }

    pub fn hamiltonian(&self) -> Result<LocalHamiltonian> {
        LocalHamiltonian::try_from(self.hamiltonian.clone())
    }

    pub fn to_instance(&self) -> Result<Instance> {
        let (Some(a), Some(b)) = (self.a, self.b) else {
            return Err(Error::Argument("instance file lacks the thresholds a and b".into()));
        };
        Instance::new(self.hamiltonian()?, a, b)
    }
}

/// Witness-file form of a [`Witness`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub lambda_hat: f64,
    pub oracle: OracleDescriptor,
    pub x_in: BasisIndex,
}

impl WitnessRecord {
    pub fn to_witness(&self) -> Result<Witness> {
        let oracle = self.oracle.build()?;
        self.x_in.check_width(oracle.qubits())?;
        Ok(Witness {
            lambda_hat: self.lambda_hat,
            oracle,
            x_in: self.x_in,
        })
    }
}

/// Instance plus optional witness in one document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Bundle {
    pub instance: InstanceRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessRecord>,
}

/// A generated instance with its honest witness.
#[derive(Clone, Debug)]
pub struct Generated {
    pub instance: Instance,
    pub witness: WitnessRecord,
}

impl Generated {
    pub fn bundle(&self) -> Bundle {
        Bundle {
            instance: InstanceRecord::from_instance(&self.instance),
            witness: Some(self.witness.clone()),
        }
    }
}

fn normalize(s: [Scalar; 2]) -> Result<[Scalar; 2]> {
    let norm = (s[0].norm_sqr() + s[1].norm_sqr()).sqrt();
    if !(norm > TAU_ZERO) || !norm.is_finite() {
        return Err(Error::Argument("local state has zero amplitude pair".into()));
    }
    Ok([s[0] / norm, s[1] / norm])
}

/// Random single-qubit states with both amplitudes of magnitude ≥ 0.2
/// (signed reals, or with random phases when `complex`).
pub fn random_product_states(n: usize, complex: bool, rng: &mut RngStream) -> Vec<[Scalar; 2]> {
    (0..n)
        .map(|_| {
            let mut amp = || {
                let mag = 0.2 + 0.8 * rng.uniform();
                if complex {
                    Complex64::from_polar(mag, 2.0 * std::f64::consts::PI * rng.uniform())
                } else if rng.uniform() < 0.5 {
                    c(-mag)
                } else {
                    c(mag)
                }
            };
            [amp(), amp()]
        })
        .collect()
}

/// Smallest eigenvalue of `h` above `λ + 1e-9`, if it exists.
fn first_excited_level(h: &LocalHamiltonian) -> Result<Option<f64>> {
    let ev = if h.is_real() {
        eigenvalues(&materialize_hamiltonian(h, None)?)?
    } else {
        hermitian_eigenvalues(&materialize_complex(h)?)?
    };
    Ok(ev.iter().copied().find(|&v| v > ev[0] + 1e-9))
}

fn promise_edge(h: &LocalHamiltonian) -> Result<f64> {
    let gap = if h.qubits() <= CERTIFY_MAX_QUBITS {
        first_excited_level(h)?.unwrap_or(0.5)
    } else {
        0.5
    };
    Ok(gap.max(DEFAULT_GAP_FLOOR))
}

/// Frustration-free Yes instance with ground state `⊗_i ψ_i`:
/// `H = Σ_i (I − |ψ_i⟩⟨ψ_i|)` plus `extra_projectors` random 2-local rank-one
/// projectors orthogonal to `ψ_i ⊗ ψ_j`. Complex states are routed through
/// realification.
pub fn make_product_yes(
    local_states: &[[Scalar; 2]],
    extra_projectors: usize,
    rng: &mut RngStream,
) -> Result<Generated> {
    let n = local_states.len();
    BasisIndex::zero(n)?;
    if n == 0 {
        return Err(Error::Argument("need at least one qubit".into()));
    }
    let states: Vec<[Scalar; 2]> = local_states.iter().map(|&s| normalize(s)).collect::<Result<_>>()?;
    let complex = states.iter().flatten().any(|v| v.im != 0.0);
    let mut terms = Vec::new();
    for (q, s) in states.iter().enumerate() {
        let m: Vec<Vec<Scalar>> = (0..2)
            .map(|r| {
                (0..2)
                    .map(|col| if r == col { c(1.0) } else { C0 } - s[r] * s[col].conj())
                    .collect()
            })
            .collect();
        terms.push(LocalTerm::new(vec![q], m)?);
    }
    if n >= 2 {
        for _ in 0..extra_projectors {
            let i = rng.below(n as u64) as usize;
            let mut j = rng.below(n as u64 - 1) as usize;
            if j >= i {
                j += 1;
            }
            let pair: Vec<Scalar> = (0..4).map(|k| states[i][k >> 1] * states[j][k & 1]).collect();
            let mut v: Vec<Scalar> = (0..4)
                .map(|_| {
                    let re = 2.0 * rng.uniform() - 1.0;
                    let im = if complex { 2.0 * rng.uniform() - 1.0 } else { 0.0 };
                    Complex64::new(re, im)
                })
                .collect();
            let overlap: Scalar = pair.iter().zip(&v).map(|(p, x)| p.conj() * x).sum();
            for (x, p) in v.iter_mut().zip(&pair) {
                *x -= overlap * p;
            }
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                continue;
            }
            let weight = 0.5 + rng.uniform();
            let m: Vec<Vec<Scalar>> = (0..4)
                .map(|r| (0..4).map(|col| v[r] * v[col].conj() * (weight / (norm * norm))).collect())
                .collect();
            terms.push(LocalTerm::new(vec![i, j], m)?);
        }
    }
    let h = LocalHamiltonian::from_terms(n, terms)?;
    let b = promise_edge(&h)?;
    let product = OracleDescriptor::Product {
        states: states.clone(),
    };
    let (hamiltonian, oracle) = if complex {
        (
            realify(&h),
            OracleDescriptor::Realified {
                inner: Box::new(product),
            },
        )
    } else {
        (h, product)
    };
    let built = oracle.build()?;
    let x_in = argmax_amplitude(built.as_ref())?.expect("product states have full support");
    Ok(Generated {
        instance: Instance::new(hamiltonian, 0.0, b)?,
        witness: WitnessRecord {
            lambda_hat: 0.0,
            oracle,
            x_in,
        },
    })
}

/// Local matrix on `support` whose `(row, col)` entry is `f(row_bits,
/// col_bits)`; bit `i` of the argument slices belongs to `support[i]`.
fn term_from_fn(support: Vec<usize>, f: impl Fn(&[bool], &[bool]) -> f64) -> Result<LocalTerm> {
    let k = support.len();
    let bits = |idx: usize| -> Vec<bool> { (0..k).map(|i| idx >> (k - 1 - i) & 1 == 1).collect() };
    let dim = 1 << k;
    let m: Vec<Vec<f64>> = (0..dim)
        .map(|r| {
            let rb = bits(r);
            (0..dim).map(|col| f(&rb, &bits(col))).collect()
        })
        .collect();
    LocalTerm::real(support, m)
}

/// Applies `gate` to its own wires given as local bits (controls first).
fn gate_local(gate: &Gate, bits: &[bool]) -> Vec<bool> {
    let mut out = bits.to_vec();
    match gate {
        Gate::Identity { .. } => {}
        Gate::Not { .. } => out[0] = !out[0],
        Gate::Cnot { .. } => out[1] ^= out[0],
        Gate::Toffoli { .. } => out[2] ^= out[0] && out[1],
    }
    out
}

/// Unary-clock Hamiltonian of `circuit` with its history state as witness.
///
/// Terms, all with weight one: propagation
/// `½ P_t (I − X_{c_t} ⊗ R_t)` where `P_t` fixes `c_{t−1} = 1` and
/// `c_{t+1} = 0`; ancilla input penalties `|1⟩⟨1|_a ⊗ |0⟩⟨0|_{c_1}`; coin
/// penalties `|−⟩⟨−| ⊗ |0⟩⟨0|_{c_1}`; clock validity
/// `|0⟩⟨0|_{c_j} ⊗ |1⟩⟨1|_{c_{j+1}}`; and, when `output` is given, the
/// acceptance term `|0⟩⟨0|_{out} ⊗ |1⟩⟨1|_{c_T}`.
pub fn circuit_to_hamiltonian(
    circuit: &ReversibleCircuit,
    coins: usize,
    witness_bits: &str,
    output: Option<usize>,
) -> Result<Generated> {
    let state = HistoryState {
        circuit: circuit.clone(),
        coins,
        witness_bits: witness_bits.to_string(),
    };
    state.validate()?;
    let big_t = state.clock_len();
    let clock = |j: usize| state.clock_qubit(j);
    let mut terms = Vec::new();

    for (idx, gate) in circuit.gates.iter().enumerate() {
        let t = idx + 1;
        let gw = gate.wires();
        let g = gw.len();
        let mut support = gw.clone();
        let has_prev = t > 1;
        let has_next = t < big_t;
        if has_prev {
            support.push(clock(t - 1));
        }
        support.push(clock(t));
        if has_next {
            support.push(clock(t + 1));
        }
        let cur = g + has_prev as usize;
        terms.push(term_from_fn(support, |r, col| {
            if has_prev && !(r[g] && col[g]) {
                return 0.0;
            }
            if has_next && (r[cur + 1] || col[cur + 1]) {
                return 0.0;
            }
            let same_data = r[..g] == col[..g];
            if r[cur] == col[cur] {
                if same_data {
                    0.5
                } else {
                    0.0
                }
            } else if gate_local(gate, &col[..g]) == r[..g] {
                -0.5
            } else {
                0.0
            }
        })?);
    }

    let first = clock(1);
    for a in 0..state.ancillas() {
        terms.push(term_from_fn(vec![a, first], |r, col| {
            if r == col && r[0] && !r[1] {
                1.0
            } else {
                0.0
            }
        })?);
    }
    let a0 = state.ancillas();
    for coin in a0..a0 + coins {
        terms.push(term_from_fn(vec![coin, first], |r, col| {
            if r[1] || col[1] {
                0.0
            } else if r[0] == col[0] {
                0.5
            } else {
                -0.5
            }
        })?);
    }
    for j in 1..big_t {
        terms.push(term_from_fn(vec![clock(j), clock(j + 1)], |r, col| {
            if r == col && !r[0] && r[1] {
                1.0
            } else {
                0.0
            }
        })?);
    }
    if let Some(out) = output {
        if out >= circuit.wires {
            return Err(Error::Argument(format!("output wire {out} outside the circuit")));
        }
        let start = state.initial_string().bits();
        for coin_bits in 0u32..(1 << coins) {
            let z = state.circuit.run(start | coin_bits << a0);
            if z >> out & 1 == 0 {
                return Err(Error::Argument(
                    "circuit rejects the witness on some coin string".into(),
                ));
            }
        }
        terms.push(term_from_fn(vec![out, clock(big_t)], |r, col| {
            if r == col && !r[0] && r[1] {
                1.0
            } else {
                0.0
            }
        })?);
    }

    let h = LocalHamiltonian::from_terms(state.qubits(), terms)?;
    let b = promise_edge(&h)?;
    let x_in = state.initial_string();
    Ok(Generated {
        instance: Instance::new(h, 0.0, b)?,
        witness: WitnessRecord {
            lambda_hat: 0.0,
            oracle: OracleDescriptor::HistoryState(state),
            x_in,
        },
    })
}

/// Random real 2-local Hamiltonian: a random symmetric term on each
/// neighbouring pair plus random single-qubit fields.
pub fn random_two_local(n: usize, rng: &mut RngStream) -> Result<LocalHamiltonian> {
    let mut sym = |k: usize| -> Vec<Vec<f64>> {
        let dim = 1 << k;
        let mut m = vec![vec![0.0; dim]; dim];
        for r in 0..dim {
            for col in r..dim {
                let v = 2.0 * rng.uniform() - 1.0;
                m[r][col] = v;
                m[col][r] = v;
            }
        }
        m
    };
    let mut terms = Vec::new();
    for q in 0..n {
        terms.push(LocalTerm::real(vec![q], sym(1))?);
    }
    for q in 0..n.saturating_sub(1) {
        terms.push(LocalTerm::real(vec![q, q + 1], sym(2))?);
    }
    LocalHamiltonian::from_terms(n, terms)
}

/// `H − λ(H)·I + ε·I` with `a = 0`, `b = ε`.
pub fn no_instance_from(h: &LocalHamiltonian, epsilon: f64) -> Result<Instance> {
    if !(epsilon >= DEFAULT_GAP_FLOOR) {
        return Err(Error::Argument(format!(
            "epsilon {epsilon} is below the promise-gap floor {DEFAULT_GAP_FLOOR}"
        )));
    }
    if h.qubits() > NO_INSTANCE_MAX_QUBITS {
        return Err(Error::SizeCap {
            dim: 1 << h.qubits(),
            cap: 1 << NO_INSTANCE_MAX_QUBITS,
        });
    }
    let (lambda, _) = ground_energy(&materialize_hamiltonian(h, None)?)?;
    Instance::new(h.shifted(epsilon - lambda), 0.0, epsilon)
}

/// Random real No instance on `n` qubits with ground energy `epsilon`.
pub fn make_no_instance(n: usize, epsilon: f64, rng: &mut RngStream) -> Result<Instance> {
    if n == 0 {
        return Err(Error::Argument("need at least one qubit".into()));
    }
    no_instance_from(&random_two_local(n, rng)?, epsilon)
}

/// Families of dishonest witnesses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryFamily {
    /// Ground state of the instance plus a random perturbation.
    PerturbedGround,
    /// Random signed product state.
    RandomProduct,
    /// Ground state with the signs of a random subset of amplitudes flipped.
    SignFlippedGround,
    /// The instance's own ground state.
    HonestGround,
}

impl AdversaryFamily {
    pub const ALL: [AdversaryFamily; 4] = [
        AdversaryFamily::PerturbedGround,
        AdversaryFamily::RandomProduct,
        AdversaryFamily::SignFlippedGround,
        AdversaryFamily::HonestGround,
    ];
}

fn table_oracle(qubits: usize, psi: &[f64]) -> OracleDescriptor {
    OracleDescriptor::LookupTable {
        qubits,
        values: psi.iter().map(|&v| if v.abs() > TAU_SUPP { v } else { 0.0 }).collect(),
    }
}

/// One witness of `family` claiming `λ̂ = a`, started at the largest
/// amplitude.
pub fn adversarial_witness(
    inst: &Instance,
    family: AdversaryFamily,
    rng: &mut RngStream,
) -> Result<WitnessRecord> {
    let h = &inst.hamiltonian;
    let n = h.qubits();
    let ground = |h: &LocalHamiltonian| -> Result<Vec<f64>> {
        let (_, psi) = ground_energy(&materialize_hamiltonian(h, None)?)?;
        Ok(psi.iter().copied().collect())
    };
    let oracle = match family {
        AdversaryFamily::PerturbedGround => {
            let noise = random_two_local(n, rng)?;
            let scale = 0.3;
            let terms: Vec<LocalTerm> = h
                .terms()
                .iter()
                .cloned()
                .chain(noise.terms().iter().map(|t| {
                    let m: Vec<Vec<f64>> = t.rows().map(|r| r.iter().map(|v| v.re * scale).collect()).collect();
                    LocalTerm::real(t.support().to_vec(), m).expect("scaled symmetric term")
                }))
                .collect();
            table_oracle(n, &ground(&LocalHamiltonian::from_terms(n, terms)?)?)
        }
        AdversaryFamily::RandomProduct => OracleDescriptor::Product {
            states: random_product_states(n, false, rng),
        },
        AdversaryFamily::SignFlippedGround => {
            let mut psi = ground(h)?;
            let mut flipped = false;
            for v in psi.iter_mut() {
                if rng.uniform() < 0.5 {
                    *v = -*v;
                    flipped = true;
                }
            }
            if !flipped {
                psi[0] = -psi[0];
            }
            table_oracle(n, &psi)
        }
        AdversaryFamily::HonestGround => table_oracle(n, &ground(h)?),
    };
    let built = oracle.build()?;
    let x_in = argmax_amplitude(built.as_ref())?.unwrap_or(BasisIndex::zero(n)?);
    Ok(WitnessRecord {
        lambda_hat: inst.a,
        oracle,
        x_in,
    })
}

/// `count` witnesses cycling through every [`AdversaryFamily`].
pub fn adversarial_witnesses(inst: &Instance, rng: &mut RngStream, count: usize) -> Result<Vec<WitnessRecord>> {
    (0..count)
        .map(|i| adversarial_witness(inst, AdversaryFamily::ALL[i % AdversaryFamily::ALL.len()], rng))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{eigen_residual, materialize_hamiltonian};
    use crate::hamiltonian::Pauli;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    fn b(s: &str) -> BasisIndex {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_signed_yes() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let g = make_product_yes(&[[c(s), c(-s)]], 0, &mut RngStream::new(0, 0)).unwrap();
        let h = &g.instance.hamiltonian;
        for (x, y, v) in [("0", "0", 0.5), ("0", "1", 0.5), ("1", "1", 0.5)] {
            assert_abs_diff_eq!(h.entry(b(x), b(y)).unwrap().re, v, epsilon = 1e-15);
        }
        assert_eq!(g.instance.a, 0.0);
        assert_abs_diff_eq!(g.instance.b, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn computational_product_is_diagonal() {
        let g = make_product_yes(&vec![[c(1.0), C0]; 3], 0, &mut RngStream::new(0, 0)).unwrap();
        let d = materialize_hamiltonian(&g.instance.hamiltonian, None).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                if i != j {
                    assert_eq!(d.matrix[(i, j)], 0.0);
                }
            }
            assert_eq!(d.matrix[(i, i)], (i as u32).count_ones() as f64);
        }
        assert_eq!(g.witness.x_in, b("000"));
    }

    #[test]
    fn zero_local_state_is_rejected() {
        assert!(make_product_yes(&[[C0, C0]], 0, &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn gates_are_involutions() {
        let mut rng = RngStream::new(4, 0);
        let circ = ReversibleCircuit::random(4, 10, &mut rng).unwrap();
        for x in 0..16u32 {
            assert_eq!(circ.undo_prefix(circ.run(x), circ.gate_count()), x);
        }
        assert!(ReversibleCircuit::new(2, vec![Gate::Cnot { control: 1, target: 1 }]).is_err());
        assert!(ReversibleCircuit::new(2, vec![Gate::Not { target: 2 }]).is_err());
    }

    #[test]
    fn odd_coin_count_is_rejected() {
        let circ = ReversibleCircuit::new(2, vec![Gate::Not { target: 0 }]).unwrap();
        assert!(circuit_to_hamiltonian(&circ, 1, "", None).is_err());
    }

    #[test]
    fn identity_history_state() {
        let circ = ReversibleCircuit::new(1, vec![Gate::Identity { wire: 0 }]).unwrap();
        let g = circuit_to_hamiltonian(&circ, 0, "", None).unwrap();
        let oracle = g.witness.to_witness().unwrap().oracle;
        assert_eq!(oracle.qubits(), 2);
        let amps: Vec<f64> = BasisIndex::all(2).unwrap().map(|x| oracle.amplitude(x).re).collect();
        // data bit is qubit 0, clock bit is qubit 1
        assert_eq!(amps, vec![1.0, 0.0, 1.0, 0.0]);
        let d = materialize_hamiltonian(&g.instance.hamiltonian, None).unwrap();
        let psi = DVector::from_vec(amps);
        assert!((&d.matrix * &psi).norm() <= 1e-12);
        let (l, _) = ground_energy(&d).unwrap();
        assert_abs_diff_eq!(l, 0.0, epsilon = 1e-12);
        assert!(eigen_residual(&d, 0.0, &psi) <= 1e-12);
    }

    #[test]
    fn descriptor_round_trip() {
        let mut rng = RngStream::new(5, 0);
        let circ = ReversibleCircuit::random(4, 3, &mut rng).unwrap();
        let descriptors = vec![
            OracleDescriptor::Product {
                states: random_product_states(3, true, &mut rng),
            },
            OracleDescriptor::BasisSuperposition {
                qubits: 3,
                terms: vec![(b("101"), Complex64::new(0.5, -1.0)), (b("000"), c(2.0))],
            },
            OracleDescriptor::HistoryState(HistoryState {
                circuit: circ,
                coins: 2,
                witness_bits: "1".into(),
            }),
            OracleDescriptor::LookupTable {
                qubits: 2,
                values: vec![0.1, -0.2, 0.0, 3.0],
            },
            OracleDescriptor::Realified {
                inner: Box::new(OracleDescriptor::Product {
                    states: vec![[Complex64::new(0.3, 0.4), c(1.0)]],
                }),
            },
        ];
        for d in descriptors {
            let text = serde_json::to_string(&d).unwrap();
            let back: OracleDescriptor = serde_json::from_str(&text).unwrap();
            assert_eq!(back, d);
            let (o1, o2) = (d.build().unwrap(), back.build().unwrap());
            for x in BasisIndex::all(d.qubits()).unwrap() {
                assert_eq!(o1.amplitude(x), o2.amplitude(x));
            }
        }
    }

    #[test]
    fn descriptor_json_shape() {
        let d = OracleDescriptor::LookupTable {
            qubits: 1,
            values: vec![1.0, -1.0],
        };
        assert_eq!(
            serde_json::to_string(&d).unwrap(),
            r#"{"kind":"LOOKUP_TABLE","qubits":1,"values":[1.0,-1.0]}"#
        );
    }

    #[test]
    fn no_instance_from_minus_x() {
        let h = LocalHamiltonian::from_terms(1, vec![LocalTerm::pauli(-1.0, &[(0, Pauli::X)]).unwrap()]).unwrap();
        let inst = no_instance_from(&h, 0.5).unwrap();
        assert_eq!((inst.a, inst.b), (0.0, 0.5));
        assert_abs_diff_eq!(inst.hamiltonian.entry(b("0"), b("0")).unwrap().re, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(inst.hamiltonian.entry(b("0"), b("1")).unwrap().re, -1.0, epsilon = 1e-15);
        assert!(no_instance_from(&h, 0.0).is_err());
    }

    #[test]
    fn random_no_instance_is_certified() {
        let inst = make_no_instance(3, 0.25, &mut RngStream::new(6, 0)).unwrap();
        let (l, _) = ground_energy(&materialize_hamiltonian(&inst.hamiltonian, None).unwrap()).unwrap();
        assert_abs_diff_eq!(l, 0.25, epsilon = 1e-9);
    }

    #[test]
    fn adversaries_claim_a() {
        let inst = make_no_instance(3, 0.25, &mut RngStream::new(6, 0)).unwrap();
        let ws = adversarial_witnesses(&inst, &mut RngStream::new(7, 0), 8).unwrap();
        assert_eq!(ws.len(), 8);
        for w in ws {
            assert_eq!(w.lambda_hat, 0.0);
            let built = w.to_witness().unwrap();
            assert!(built.oracle.in_support(built.x_in));
        }
    }
}
