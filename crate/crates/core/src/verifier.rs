//! The checked random-walk verifier.
//!
//! Given a claimed ground energy `λ̂`, an amplitude oracle and a start string,
//! the verifier walks the CTMC of the unshifted generator `G^{H_S,φ}` with
//! `H = Ĥ − λ̂I`, and rejects as soon as a visited column is not a legal
//! generator column. Honest witnesses for Yes instances produce legal
//! columns everywhere; for No instances every witness produces illegal
//! columns that the walk runs into with high probability.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplitude::AmplitudeOracle;
use crate::basis::BasisIndex;
use crate::ctmc::{Clock, Event, Trajectory, WaitingTimes};
use crate::error::{Error, Result};
use crate::exact::{fits_bits, to_rational};
use crate::fixed_node::{ColumnCheck, FixedNodeView, GeneratorView};
use crate::hamiltonian::LocalHamiltonian;
use crate::numeric::{NumericMode, TAU_ZERO};
use crate::sampling::{DiscretePolicy, RngStream};

/// Smallest accepted promise gap `b − a`.
pub const DEFAULT_GAP_FLOOR: f64 = 1e-3;
/// Float-mode format window: amplitudes must satisfy `2^-p ≤ |C| ≤ 2^p`.
pub const DEFAULT_FORMAT_BITS: i32 = 60;
/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "FNV_THREADS";

/// A real-valued Hamiltonian with promise thresholds `a < b`.
#[derive(Clone, Debug)]
pub struct Instance {
    pub hamiltonian: LocalHamiltonian,
    pub a: f64,
    pub b: f64,
}

impl Instance {
    pub fn new(hamiltonian: LocalHamiltonian, a: f64, b: f64) -> Result<Self> {
        Self::with_gap_floor(hamiltonian, a, b, DEFAULT_GAP_FLOOR)
    }

    pub fn with_gap_floor(hamiltonian: LocalHamiltonian, a: f64, b: f64, floor: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b - a < floor {
            return Err(Error::Argument(format!(
                "promise gap b - a = {} is below the floor {floor}",
                b - a
            )));
        }
        if !hamiltonian.norm_bound().is_finite() {
            return Err(Error::Argument("Hamiltonian norm bound is not finite".into()));
        }
        Ok(Self { hamiltonian, a, b })
    }

    pub fn epsilon(&self) -> f64 {
        self.b - self.a
    }
}

/// The prover's message: claimed energy, claimed ground state, start string.
#[derive(Clone)]
pub struct Witness {
    pub lambda_hat: f64,
    pub oracle: Arc<dyn AmplitudeOracle>,
    pub x_in: BasisIndex,
}

impl std::fmt::Debug for Witness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Witness")
            .field("lambda_hat", &self.lambda_hat)
            .field("qubits", &self.oracle.qubits())
            .field("x_in", &self.x_in)
            .finish()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkMode {
    #[default]
    Continuous,
    Discrete,
}

/// Parameters of one verification run and of repeated trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifierConfig {
    /// Horizon `t`.
    pub t: f64,
    /// Transition cap `M`.
    pub max_transitions: u64,
    pub mode: WalkMode,
    /// Grid step for discrete mode; `None` means `1e-6·t`.
    pub delta: Option<f64>,
    pub numeric: NumericMode,
    pub format_bits: i32,
    pub trials: u64,
    pub seed: u64,
    /// Keep the visited path in each [`VerdictTrace`].
    #[serde(default)]
    pub record_trajectory: bool,
}

impl VerifierConfig {
    /// `t = ⌈10n/ε⌉` and `M = 2^k·m·n³·t·‖Ĥ‖`.
    pub fn for_instance(inst: &Instance) -> Self {
        let h = &inst.hamiltonian;
        let t = (10.0 * h.qubits().max(1) as f64 / inst.epsilon()).ceil();
        Self {
            t,
            max_transitions: default_transition_cap(h, t),
            mode: WalkMode::Continuous,
            delta: None,
            numeric: NumericMode::Float,
            format_bits: DEFAULT_FORMAT_BITS,
            trials: 400,
            seed: 0,
            record_trajectory: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::Argument(format!("horizon must be positive, got {}", self.t)));
        }
        if self.max_transitions < 1 {
            return Err(Error::Argument("transition cap must be at least 1".into()));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::Argument(format!("grid step must be positive, got {d}")));
            }
        }
        if self.format_bits < 1 {
            return Err(Error::Argument("format window needs at least one bit".into()));
        }
        Ok(())
    }

    fn waiting_times(&self) -> WaitingTimes {
        match self.mode {
            WalkMode::Continuous => WaitingTimes::Continuous,
            WalkMode::Discrete => WaitingTimes::Discrete(match self.delta {
                Some(d) => DiscretePolicy::with_delta(self.t, d),
                None => DiscretePolicy::for_horizon(self.t),
            }),
        }
    }
}

/// `2^k·m·n³·t·‖H‖` with `‖H‖` the term-wise norm bound, saturating.
pub fn default_transition_cap(h: &LocalHamiltonian, t: f64) -> u64 {
    let n = h.qubits() as f64;
    let cap = h.sparsity() as f64 * n.powi(3) * t * h.norm_bound();
    if cap >= u64::MAX as f64 {
        u64::MAX
    } else {
        (cap.ceil() as u64).max(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Accept,
    Reject,
}

/// Which check ended a run, listed in the order the checks are made.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RejectReason {
    Ok,
    LambdaTooHigh,
    OutOfSupport,
    FormatBad,
    IllegalColumn,
    TransitionCap,
    ContractError,
}

/// Outcome of one run of the verifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictTrace {
    pub verdict: Verdict,
    pub reason: RejectReason,
    pub transitions: u64,
    pub elapsed_sim_time: f64,
    /// Some accepted column had a sum close to the tolerance.
    pub near_boundary: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Trajectory>,
}

impl VerdictTrace {
    fn reject(reason: RejectReason, detail: Option<String>) -> Self {
        Self {
            verdict: Verdict::Reject,
            reason,
            transitions: 0,
            elapsed_sim_time: 0.0,
            near_boundary: false,
            detail,
            trajectory: None,
        }
    }

    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accept
    }
}

/// Result of [`preprocess`].
#[derive(Clone, Debug)]
pub enum Preprocessed {
    Ready {
        hamiltonian: LocalHamiltonian,
        epsilon: f64,
    },
    Rejected(VerdictTrace),
}

/// Shifts `Ĥ` by the claimed energy, or rejects a claim above `a`.
pub fn preprocess(inst: &Instance, w: &Witness) -> Result<Preprocessed> {
    let h = &inst.hamiltonian;
    if !h.is_real() {
        return Err(Error::NotReal("realify the instance before verification".into()));
    }
    if w.oracle.qubits() != h.qubits() {
        return Err(Error::WidthMismatch {
            expected: h.qubits(),
            found: w.oracle.qubits(),
        });
    }
    w.x_in.check_width(h.qubits())?;
    if !w.lambda_hat.is_finite() {
        return Err(Error::Argument("claimed energy is not finite".into()));
    }
    if w.lambda_hat > inst.a {
        return Ok(Preprocessed::Rejected(VerdictTrace::reject(
            RejectReason::LambdaTooHigh,
            Some(format!("claimed {} > a = {}", w.lambda_hat, inst.a)),
        )));
    }
    Ok(Preprocessed::Ready {
        hamiltonian: h.shifted(-w.lambda_hat),
        epsilon: inst.epsilon(),
    })
}

fn format_ok(value: crate::Scalar, mode: NumericMode, bits: i32) -> bool {
    if !value.re.is_finite() || !value.im.is_finite() || value.im.abs() > TAU_ZERO {
        return false;
    }
    match mode {
        NumericMode::Float => {
            let a = value.re.abs();
            a >= 2f64.powi(-bits) && a <= 2f64.powi(bits)
        }
        NumericMode::Exact { bits } => {
            value.im == 0.0
                && value.re != 0.0
                && to_rational(value.re).is_some_and(|r| fits_bits(&r, bits))
        }
    }
}

/// One run of the checked walk on the shifted Hamiltonian `h_s`.
pub fn verify_run(
    h_s: &LocalHamiltonian,
    phi: &dyn AmplitudeOracle,
    x_in: BasisIndex,
    cfg: &VerifierConfig,
    rng: &mut RngStream,
) -> Result<VerdictTrace> {
    cfg.validate()?;
    let view = FixedNodeView::new(h_s, phi)?;
    x_in.check_width(h_s.qubits())?;
    let generator = GeneratorView::unshifted(view);
    Ok(walk(&generator, phi, x_in, cfg, rng))
}

fn walk(
    generator: &GeneratorView<'_>,
    phi: &dyn AmplitudeOracle,
    x_in: BasisIndex,
    cfg: &VerifierConfig,
    rng: &mut RngStream,
) -> VerdictTrace {
    if !phi.in_support(x_in) {
        return VerdictTrace::reject(RejectReason::OutOfSupport, None);
    }
    let mut clock = Clock::new(cfg.waiting_times());
    let mut x = x_in;
    let mut m = 0u64;
    let mut near_boundary = false;
    let mut events = cfg.record_trajectory.then(|| vec![Event { t: 0.0, state: x_in }]);
    let finish = |reason: RejectReason, detail: Option<String>, m: u64, now: f64, nb: bool, events: Option<Vec<Event>>| {
        VerdictTrace {
            verdict: if reason == RejectReason::Ok {
                Verdict::Accept
            } else {
                Verdict::Reject
            },
            reason,
            transitions: m,
            elapsed_sim_time: now,
            near_boundary: nb,
            detail,
            trajectory: events.map(|events| Trajectory {
                events,
                horizon: cfg.t,
                transitions: m,
                terminated_early: None,
            }),
        }
    };
    while clock.now() < cfg.t {
        if !format_ok(phi.amplitude(x), cfg.numeric, cfg.format_bits) {
            return finish(RejectReason::FormatBad, Some(format!("amplitude at {x}")), m, clock.now(), near_boundary, events);
        }
        let column = match generator.column(x) {
            Ok(c) => c,
            Err(e) => return finish(RejectReason::ContractError, Some(e.to_string()), m, clock.now(), near_boundary, events),
        };
        let check: Result<ColumnCheck> = match cfg.numeric {
            NumericMode::Float => Ok(column.legality()),
            NumericMode::Exact { .. } => generator.column_legal_exact(x),
        };
        let check = match check {
            Ok(c) => c,
            Err(e) => return finish(RejectReason::ContractError, Some(e.to_string()), m, clock.now(), near_boundary, events),
        };
        if !check.legal {
            let detail = format!("{:?} at {x}, column sum {:e}", check.reason, check.column_sum);
            return finish(RejectReason::IllegalColumn, Some(detail), m, clock.now(), near_boundary, events);
        }
        near_boundary |= check.near_boundary;
        if m >= cfg.max_transitions {
            return finish(RejectReason::TransitionCap, None, m, clock.now(), near_boundary, events);
        }
        let rate = column.exit_rate();
        if rate <= TAU_ZERO {
            return finish(RejectReason::Ok, None, m, cfg.t, near_boundary, events);
        }
        if let Err(e) = clock.advance(rng, rate) {
            return finish(RejectReason::ContractError, Some(e.to_string()), m, clock.now(), near_boundary, events);
        }
        let Some(y) = column.select(rng.uniform()) else {
            return finish(
                RejectReason::ContractError,
                Some(format!("no jump target at {x}")),
                m,
                clock.now(),
                near_boundary,
                events,
            );
        };
        x = y;
        m += 1;
        if let Some(ev) = events.as_mut() {
            if clock.now() < cfg.t {
                ev.push(Event { t: clock.now(), state: y });
            }
        }
    }
    finish(RejectReason::Ok, None, m, clock.now(), near_boundary, events)
}

/// Statistics of repeated independent runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub trials: u64,
    pub accepted: u64,
    pub p_hat: f64,
    pub ci_half_width: f64,
    pub reject_histogram: BTreeMap<RejectReason, u64>,
    pub mean_transitions: f64,
    pub near_boundary_runs: u64,
    /// Transition count of every run, in trial order.
    pub transitions: Vec<u64>,
}

impl Estimate {
    fn from_traces(traces: &[VerdictTrace]) -> Self {
        let trials = traces.len() as u64;
        let accepted = traces.iter().filter(|t| t.accepted()).count() as u64;
        let p_hat = accepted as f64 / trials as f64;
        let mut hist = BTreeMap::new();
        for t in traces.iter().filter(|t| !t.accepted()) {
            *hist.entry(t.reason).or_insert(0u64) += 1;
        }
        let transitions: Vec<u64> = traces.iter().map(|t| t.transitions).collect();
        Self {
            trials,
            accepted,
            p_hat,
            ci_half_width: 1.96 * (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
            reject_histogram: hist,
            mean_transitions: transitions.iter().map(|&m| m as f64).sum::<f64>() / trials as f64,
            near_boundary_runs: traces.iter().filter(|t| t.near_boundary).count() as u64,
            transitions,
        }
    }

    pub fn rejections(&self, reason: RejectReason) -> u64 {
        self.reject_histogram.get(&reason).copied().unwrap_or(0)
    }
}

/// Worker pool honoring `FNV_THREADS`.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        builder = builder.num_threads(n.max(1));
    }
    builder
        .build()
        .map_err(|e| Error::Argument(format!("cannot start worker pool: {e}")))
}

/// Runs `cfg.trials` independent verifications; trial `i` uses stream
/// `(cfg.seed, i)`.
pub fn run_trials(inst: &Instance, w: &Witness, cfg: &VerifierConfig) -> Result<Vec<VerdictTrace>> {
    cfg.validate()?;
    if cfg.trials < 1 {
        return Err(Error::Argument("at least one trial is needed".into()));
    }
    let hamiltonian = match preprocess(inst, w)? {
        Preprocessed::Rejected(trace) => return Ok(vec![trace; cfg.trials as usize]),
        Preprocessed::Ready { hamiltonian, .. } => hamiltonian,
    };
    let view = FixedNodeView::new(&hamiltonian, w.oracle.as_ref())?;
    let generator = GeneratorView::unshifted(view);
    let pool = worker_pool()?;
    Ok(pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = RngStream::new(cfg.seed, i);
                walk(&generator, w.oracle.as_ref(), w.x_in, cfg, &mut rng)
            })
            .collect()
    }))
}

/// Acceptance frequency with a normal-approximation 95% interval.
pub fn estimate_acceptance(inst: &Instance, w: &Witness, cfg: &VerifierConfig) -> Result<Estimate> {
    Ok(Estimate::from_traces(&run_trials(inst, w, cfg)?))
}

/// Knobs of [`search_x_in`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub burn_in: u64,
    /// Metropolis steps between recorded candidates.
    pub thinning: u64,
    pub pilot_trials: u64,
    /// Random strings probed to find a starting point in the support.
    pub probes: u64,
    pub start: Option<BasisIndex>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            burn_in: 200,
            thinning: 10,
            pilot_trials: 20,
            probes: 256,
            start: None,
        }
    }
}

/// Proposal probability of moving `x → y`: half a uniform single-bit flip,
/// half a uniform step to a neighbour of `x` in `H`.
fn proposal(n: usize, flip: bool, neighbours_x: &[BasisIndex], y: BasisIndex) -> f64 {
    let mut q = 0.0;
    if flip {
        q += 0.5 / n as f64;
    }
    if !neighbours_x.is_empty() && neighbours_x.contains(&y) {
        q += 0.5 / neighbours_x.len() as f64;
    }
    q
}

fn neighbours(h: &LocalHamiltonian, x: BasisIndex) -> Result<Vec<BasisIndex>> {
    Ok(h.real_row_nonzeros(x)?
        .into_iter()
        .map(|(y, _)| y)
        .filter(|&y| y != x)
        .collect())
}

/// Honest-prover helper: picks a start string by sampling `|C_φ|²` and
/// keeping the candidate with the best pilot acceptance.
pub fn search_x_in(
    h_s: &LocalHamiltonian,
    phi: &dyn AmplitudeOracle,
    cfg: &VerifierConfig,
    rng: &mut RngStream,
    candidates: usize,
) -> Result<BasisIndex> {
    search_x_in_with(h_s, phi, cfg, rng, candidates, &SearchOptions::default())
}

pub fn search_x_in_with(
    h_s: &LocalHamiltonian,
    phi: &dyn AmplitudeOracle,
    cfg: &VerifierConfig,
    rng: &mut RngStream,
    candidates: usize,
    opts: &SearchOptions,
) -> Result<BasisIndex> {
    cfg.validate()?;
    let n = h_s.qubits();
    let weight = |x: BasisIndex| phi.amplitude(x).norm_sqr();
    let width_ok = |x: BasisIndex| x.check_width(n);

    let mut x = match opts.start {
        Some(s) => {
            width_ok(s)?;
            s
        }
        None => {
            let mut best = BasisIndex::zero(n)?;
            let mut best_w = weight(best);
            for _ in 0..opts.probes {
                let bits = if n == 0 { 0 } else { rng.below(1u64 << n) as u32 };
                let c = BasisIndex::new(bits, n)?;
                let w = weight(c);
                if w > best_w {
                    best = c;
                    best_w = w;
                }
            }
            best
        }
    };
    if !phi.in_support(x) {
        return Err(Error::SearchFailure("no support string found to start the chain".into()));
    }

    let steps = opts.burn_in + opts.thinning.max(1) * candidates as u64;
    let mut nb_x = neighbours(h_s, x)?;
    let mut pool: Vec<BasisIndex> = Vec::new();
    for step in 1..=steps {
        let use_flip = n > 0 && (nb_x.is_empty() || rng.uniform() < 0.5);
        let y = if use_flip {
            x.flip(rng.below(n as u64) as usize)
        } else if !nb_x.is_empty() {
            nb_x[rng.below(nb_x.len() as u64) as usize]
        } else {
            x
        };
        if y != x {
            let wy = weight(y);
            if wy > 0.0 && phi.in_support(y) {
                let nb_y = neighbours(h_s, y)?;
                let flip_move = (x.bits() ^ y.bits()).count_ones() == 1;
                // Either move type may be forced when the other is
                // unavailable; mirror that in the proposal densities.
                let q_xy = if nb_x.is_empty() {
                    if flip_move { 1.0 / n as f64 } else { 0.0 }
                } else {
                    proposal(n, flip_move && n > 0, &nb_x, y)
                };
                let q_yx = if nb_y.is_empty() {
                    if flip_move { 1.0 / n as f64 } else { 0.0 }
                } else {
                    proposal(n, flip_move && n > 0, &nb_y, x)
                };
                let ratio = wy * q_yx / (weight(x) * q_xy);
                if q_xy > 0.0 && rng.uniform() < ratio {
                    x = y;
                    nb_x = nb_y;
                }
            }
        }
        if step > opts.burn_in && (step - opts.burn_in) % opts.thinning.max(1) == 0 {
            pool.push(x);
        }
    }
    pool.push(x);
    pool.sort();
    pool.dedup();
    pool.retain(|&c| phi.in_support(c));
    if pool.is_empty() {
        return Err(Error::SearchFailure("all candidates lie outside the support".into()));
    }
    if pool.len() == 1 || opts.pilot_trials == 0 {
        return Ok(pool[0]);
    }

    let pilot_seed = rng.next_u64();
    let view = FixedNodeView::new(h_s, phi)?;
    let generator = GeneratorView::unshifted(view);
    let pilot_cfg = VerifierConfig {
        record_trajectory: false,
        ..cfg.clone()
    };
    let scores: Vec<u64> = pool
        .par_iter()
        .map(|&c| {
            (0..opts.pilot_trials)
                .filter(|&i| walk(&generator, phi, c, &pilot_cfg, &mut RngStream::new(pilot_seed, i)).accepted())
                .count() as u64
        })
        .collect();
    let best = scores.iter().copied().max().unwrap_or(0);
    Ok(pool[scores.iter().position(|&s| s == best).unwrap()])
}
