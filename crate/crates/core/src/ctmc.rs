//! Gillespie simulation of legal CTMC generators.
//!
//! Both runners follow the same loop: at state `x` with exit rate
//! `r = |⟨x|G|x⟩|` wait a random time, then jump to `y ≠ x` with probability
//! `⟨y|G|x⟩ / r`. The continuous runner draws `Exp(r)` waiting times, the
//! discrete one draws from `D_{K,δ,r}` and keeps time as an integer number
//! of grid steps.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::BasisIndex;
use crate::error::{Error, Result};
use crate::fixed_node::{GeneratorColumn, GeneratorView};
use crate::numeric::TAU_ZERO;
use crate::sampling::{
    sample_disc_exp_index, waiting_time_from_uniform, DiscretePolicy, RngStream,
};

/// Default guard on the number of jumps of a single trajectory.
pub const DEFAULT_MAX_TRANSITIONS: u64 = 10_000_000;

/// Column access to a CTMC generator.
pub trait Generator: Sync {
    fn qubits(&self) -> usize;
    fn column(&self, x: BasisIndex) -> Result<GeneratorColumn>;
}

impl Generator for GeneratorView<'_> {
    fn qubits(&self) -> usize {
        GeneratorView::qubits(self)
    }
    fn column(&self, x: BasisIndex) -> Result<GeneratorColumn> {
        GeneratorView::column(self, x)
    }
}

/// Explicit generator over all `2^n` strings; `rates[y][x] = ⟨y|G|x⟩`.
#[derive(Clone, Debug)]
pub struct DenseGenerator {
    qubits: usize,
    matrix: Vec<Vec<f64>>,
}

impl DenseGenerator {
    pub fn new(qubits: usize, matrix: Vec<Vec<f64>>) -> Result<Self> {
        let dim = 1usize << qubits;
        if matrix.len() != dim || matrix.iter().any(|r| r.len() != dim) {
            return Err(Error::Argument(format!("generator must be {dim}x{dim}")));
        }
        Ok(Self { qubits, matrix })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            qubits: self.qubits,
            matrix: self
                .matrix
                .iter()
                .map(|r| r.iter().map(|v| v * c).collect())
                .collect(),
        }
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }
}

impl Generator for DenseGenerator {
    fn qubits(&self) -> usize {
        self.qubits
    }

    fn column(&self, x: BasisIndex) -> Result<GeneratorColumn> {
        x.check_width(self.qubits)?;
        let xi = x.bits() as usize;
        let rates = (0..self.matrix.len())
            .filter(|&y| y != xi && self.matrix[y][xi] != 0.0)
            .map(|y| (BasisIndex::new(y as u32, self.qubits).unwrap(), self.matrix[y][xi]))
            .collect();
        Ok(GeneratorColumn {
            state: x,
            diagonal: self.matrix[xi][xi],
            rates,
        })
    }
}

/// Why a trajectory stopped before its horizon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EarlyStop {
    TransitionCap,
}

/// One recorded state change.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub state: BasisIndex,
}

/// A simulated path `ξ(s)`, `s ∈ [0, horizon]`.
///
/// Event times are strictly increasing for continuous runs. Discrete runs
/// may record several jumps at the same grid time when a zero waiting time
/// is drawn, so there they are only non-decreasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub events: Vec<Event>,
    pub horizon: f64,
    pub transitions: u64,
    pub terminated_early: Option<EarlyStop>,
}

impl Trajectory {
    pub fn initial_state(&self) -> BasisIndex {
        self.events[0].state
    }

    pub fn final_state(&self) -> BasisIndex {
        self.events.last().expect("trajectory has an initial event").state
    }

    /// `ξ(s)`: the state of the rightmost event with time `≤ s`.
    pub fn state_at(&self, s: f64) -> BasisIndex {
        let idx = self.events.partition_point(|e| e.t <= s);
        self.events[idx.saturating_sub(1)].state
    }

    /// One JSON object per event, newline separated.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("events serialize"));
            out.push('\n');
        }
        out
    }
}

/// How waiting times are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WaitingTimes {
    Continuous,
    Discrete(DiscretePolicy),
}

/// Simulation clock: float time, or integer grid steps of width `δ`.
pub(crate) enum Clock {
    Continuous(f64),
    Discrete { ticks: u64, policy: DiscretePolicy },
}

impl Clock {
    pub(crate) fn new(mode: WaitingTimes) -> Self {
        match mode {
            WaitingTimes::Continuous => Clock::Continuous(0.0),
            WaitingTimes::Discrete(policy) => Clock::Discrete { ticks: 0, policy },
        }
    }

    pub(crate) fn now(&self) -> f64 {
        match self {
            Clock::Continuous(t) => *t,
            Clock::Discrete { ticks, policy } => *ticks as f64 * policy.delta,
        }
    }

    /// Draws one waiting time at exit rate `rate > 0` and advances.
    pub(crate) fn advance(&mut self, rng: &mut RngStream, rate: f64) -> Result<()> {
        match self {
            Clock::Continuous(t) => *t += waiting_time_from_uniform(rng.uniform_open(), rate),
            Clock::Discrete { ticks, policy } => {
                *ticks += sample_disc_exp_index(rng, &policy.params(rate)?)
            }
        }
        Ok(())
    }
}

fn run<G: Generator + ?Sized>(
    generator: &G,
    x_in: BasisIndex,
    horizon: f64,
    rng: &mut RngStream,
    mode: WaitingTimes,
    max_transitions: u64,
) -> Result<Trajectory> {
    x_in.check_width(generator.qubits())?;
    if !(horizon > 0.0) {
        return Err(Error::Argument(format!("horizon must be positive, got {horizon}")));
    }
    let mut clock = Clock::new(mode);
    let mut x = x_in;
    let mut events = vec![Event { t: 0.0, state: x_in }];
    let mut transitions = 0u64;
    let mut terminated_early = None;
    while clock.now() < horizon {
        let column = generator.column(x)?;
        let check = column.legality();
        if !check.legal {
            return Err(Error::ContractViolation {
                state: x,
                detail: format!("{:?} (column sum {:e})", check.reason, check.column_sum),
            });
        }
        let rate = column.exit_rate();
        if rate <= TAU_ZERO {
            break;
        }
        if transitions >= max_transitions {
            terminated_early = Some(EarlyStop::TransitionCap);
            break;
        }
        clock.advance(rng, rate)?;
        if clock.now() >= horizon {
            break;
        }
        let y = column.select(rng.uniform()).ok_or_else(|| Error::ContractViolation {
            state: x,
            detail: "positive exit rate without a target".into(),
        })?;
        x = y;
        transitions += 1;
        events.push(Event {
            t: clock.now(),
            state: y,
        });
    }
    Ok(Trajectory {
        events,
        horizon,
        transitions,
        terminated_early,
    })
}

/// Gillespie's algorithm with exponential waiting times.
pub fn gillespie_run<G: Generator + ?Sized>(
    generator: &G,
    x_in: BasisIndex,
    horizon: f64,
    rng: &mut RngStream,
    max_transitions: u64,
) -> Result<Trajectory> {
    run(generator, x_in, horizon, rng, WaitingTimes::Continuous, max_transitions)
}

/// Gillespie's algorithm with waiting times from `D_{K,δ,rate}`.
pub fn gillespie_run_discrete<G: Generator + ?Sized>(
    generator: &G,
    x_in: BasisIndex,
    horizon: f64,
    rng: &mut RngStream,
    policy: DiscretePolicy,
    max_transitions: u64,
) -> Result<Trajectory> {
    run(generator, x_in, horizon, rng, WaitingTimes::Discrete(policy), max_transitions)
}

/// Runs `count` independent trajectories; trajectory `i` uses stream
/// `(master_seed, i)`, so the result does not depend on scheduling.
pub fn simulate_many<G: Generator + ?Sized>(
    generator: &G,
    x_in: BasisIndex,
    horizon: f64,
    master_seed: u64,
    count: u64,
    mode: WaitingTimes,
    max_transitions: u64,
) -> Result<Vec<Trajectory>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(master_seed, i);
            run(generator, x_in, horizon, &mut rng, mode, max_transitions)
        })
        .collect()
}

/// Fraction of trajectories in each state at time `s`, over the runs that
/// reached their horizon.
pub fn empirical_marginal(
    trajectories: &[Trajectory],
    s: f64,
) -> Result<BTreeMap<BasisIndex, f64>> {
    if s < 0.0 || trajectories.iter().any(|t| s > t.horizon) {
        return Err(Error::Argument(format!("time {s} outside the simulated horizon")));
    }
    let mut counts: BTreeMap<BasisIndex, u64> = BTreeMap::new();
    let mut total = 0u64;
    for t in trajectories.iter().filter(|t| t.terminated_early.is_none()) {
        *counts.entry(t.state_at(s)).or_default() += 1;
        total += 1;
    }
    Ok(counts
        .into_iter()
        .map(|(x, c)| (x, c as f64 / total as f64))
        .collect())
}

/// Total variation distance between two distributions given as maps.
pub fn total_variation(p: &BTreeMap<BasisIndex, f64>, q: &BTreeMap<BasisIndex, f64>) -> f64 {
    let mut keys: Vec<&BasisIndex> = p.keys().chain(q.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| (p.get(k).unwrap_or(&0.0) - q.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}
