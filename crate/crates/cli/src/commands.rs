use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use fnv_core::ctmc::{gillespie_run, gillespie_run_discrete, DEFAULT_MAX_TRANSITIONS};
use fnv_core::dense::check_lemma_suite;
use fnv_core::sampling::{DiscretePolicy, GENERATOR_NAME};
use fnv_core::verifier::{
    default_transition_cap, estimate_acceptance, run_trials, Instance, VerifierConfig, WalkMode, THREADS_ENV,
};
use fnv_core::zoo::{
    adversarial_witness, circuit_to_hamiltonian, make_no_instance, make_product_yes, random_product_states,
    AdversaryFamily, Generated, ReversibleCircuit,
};
use fnv_core::{BasisIndex, FixedNodeView, GeneratorView, RngStream};

use crate::args::{Cli, Command, Common, Family, Format, Matrix, Mode, SweepParam};
use crate::input::{load, Loaded};
use crate::Failure;

/// Largest register for which `inspect-generator` prints a column.
const INSPECT_MAX_QUBITS: usize = 16;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn metadata(started: Instant) -> Value {
    json!({
        "tool": "fnv",
        "version": env!("CARGO_PKG_VERSION"),
        "rng": GENERATOR_NAME,
        "threads_env": std::env::var(THREADS_ENV).ok(),
        "wall_time_s": started.elapsed().as_secs_f64(),
    })
}

fn document(command: &str, config: Value, result: impl Serialize, started: Instant) -> Result<Vec<u8>, Failure> {
    let doc = json!({
        "command": command,
        "config": config,
        "result": result,
        "metadata": metadata(started),
    });
    let mut body = serde_json::to_vec_pretty(&doc)?;
    body.push(b'\n');
    Ok(body)
}

fn require_json(common: &Common) -> Result<(), Failure> {
    match common.format {
        None | Some(Format::Json) => Ok(()),
        Some(f) => Err(usage(format!("this command only writes json, not {f:?}"))),
    }
}

fn inputs(common: &Common, need_witness: bool) -> Result<Loaded, Failure> {
    let path = common.instance.as_deref().ok_or_else(|| usage("--instance is required"))?;
    load(path, common.witness.as_deref(), need_witness)
}

/// Verifier parameters from the flags, defaulting `t` and `M` from the
/// instance. `M` follows `t` unless given explicitly.
fn verifier_config(common: &Common, inst: &Instance) -> Result<VerifierConfig, Failure> {
    let mut cfg = VerifierConfig::for_instance(inst);
    if let Some(t) = common.t {
        cfg.t = t;
        cfg.max_transitions = default_transition_cap(&inst.hamiltonian, t);
    }
    if let Some(m) = common.max_transitions {
        cfg.max_transitions = m;
    }
    cfg.mode = match common.mode {
        Mode::Continuous => WalkMode::Continuous,
        Mode::Discrete => WalkMode::Discrete,
    };
    cfg.delta = common.delta;
    cfg.trials = common.trials;
    cfg.seed = common.seed;
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    if cfg.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    Ok(cfg)
}

fn echo(common: &Common, cfg: Option<&VerifierConfig>, loaded: Option<&Loaded>) -> Value {
    json!({
        "instance": common.instance,
        "witness": common.witness,
        "verifier": cfg,
        "realified": loaded.map(|l| l.realified),
    })
}

pub fn run(cli: &Cli) -> Result<Vec<u8>, Failure> {
    let started = Instant::now();
    match &cli.command {
        Command::Verify {
            common,
            record_trajectory,
        } => {
            require_json(common)?;
            let loaded = inputs(common, true)?;
            let (_, w) = loaded.witness.as_ref().expect("witness required");
            let mut cfg = verifier_config(common, &loaded.instance)?;
            cfg.trials = 1;
            cfg.record_trajectory = *record_trajectory;
            let trace = run_trials(&loaded.instance, w, &cfg)?.remove(0);
            document("verify", echo(common, Some(&cfg), Some(&loaded)), trace, started)
        }
        Command::Estimate { common } => {
            require_json(common)?;
            let loaded = inputs(common, true)?;
            let (_, w) = loaded.witness.as_ref().expect("witness required");
            let cfg = verifier_config(common, &loaded.instance)?;
            let est = estimate_acceptance(&loaded.instance, w, &cfg)?;
            document("estimate", echo(common, Some(&cfg), Some(&loaded)), est, started)
        }
        Command::OracleCheck { common } => {
            require_json(common)?;
            let loaded = inputs(common, true)?;
            let (_, w) = loaded.witness.as_ref().expect("witness required");
            let shifted = loaded.instance.hamiltonian.shifted(-w.lambda_hat);
            let report = check_lemma_suite(&shifted, w.oracle.as_ref())?;
            let result = json!({
                "lambda_hat": w.lambda_hat,
                "all_passed": report.all_passed(),
                "report": report,
            });
            document("oracle-check", echo(common, None, Some(&loaded)), result, started)
        }
        Command::MakeInstance {
            common,
            family,
            n,
            epsilon,
            extra,
            complex,
        } => {
            require_json(common)?;
            let generated = make_instance(*family, *n, *epsilon, *extra, *complex, common.seed)?;
            let config = json!({
                "family": family,
                "n": n,
                "epsilon": epsilon,
                "extra": extra,
                "complex": complex,
                "seed": common.seed,
            });
            let bundle = generated.bundle();
            let mut doc = serde_json::to_value(&bundle)?;
            let map = doc.as_object_mut().expect("bundle is an object");
            map.insert("command".into(), json!("make-instance"));
            map.insert("config".into(), config);
            map.insert("metadata".into(), metadata(started));
            let mut body = serde_json::to_vec_pretty(&doc)?;
            body.push(b'\n');
            Ok(body)
        }
        Command::SampleTrajectory { common } => sample_trajectory(common, started),
        Command::InspectGenerator { common, state, matrix } => {
            require_json(common)?;
            inspect(common, state.as_deref(), *matrix, started)
        }
        Command::Sweep { common, param, values } => sweep(common, *param, values, started),
    }
}

fn make_instance(
    family: Family,
    n: usize,
    epsilon: f64,
    extra: Option<usize>,
    complex: bool,
    seed: u64,
) -> Result<Generated, Failure> {
    let mut rng = RngStream::new(seed, 0);
    if n == 0 {
        return Err(usage("--n must be positive"));
    }
    Ok(match family {
        Family::Product => {
            let states = random_product_states(n, complex, &mut rng);
            make_product_yes(&states, extra.unwrap_or(n - 1), &mut rng)?
        }
        Family::History => {
            if n < 2 {
                return Err(usage("a history instance needs at least two wires"));
            }
            let circuit = ReversibleCircuit::random(n, n, &mut rng)?;
            let coins = if n >= 3 { 2 } else { 0 };
            circuit_to_hamiltonian(&circuit, coins, "1", None)?
        }
        Family::No => {
            let instance = make_no_instance(n, epsilon, &mut rng)?;
            let witness = adversarial_witness(&instance, AdversaryFamily::SignFlippedGround, &mut rng)?;
            Generated { instance, witness }
        }
    })
}

fn sample_trajectory(common: &Common, started: Instant) -> Result<Vec<u8>, Failure> {
    let format = common.format.unwrap_or(Format::Jsonl);
    if format == Format::Csv {
        return Err(usage("trajectories are written as jsonl or json"));
    }
    let loaded = inputs(common, true)?;
    let (_, w) = loaded.witness.as_ref().expect("witness required");
    let horizon = match common.t {
        Some(t) => t,
        None => VerifierConfig::for_instance(&loaded.instance).t,
    };
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(usage("--t must be positive"));
    }
    let cap = common.max_transitions.unwrap_or(DEFAULT_MAX_TRANSITIONS);
    let h = loaded.instance.hamiltonian.shifted(-w.lambda_hat);
    let view = FixedNodeView::new(&h, w.oracle.as_ref())?;
    if !w.oracle.in_support(w.x_in) {
        return Err(usage(format!("x_in {} lies outside the witness support", w.x_in)));
    }
    let generator = GeneratorView::unshifted(view);
    let mut rng = RngStream::new(common.seed, 0);
    let run = match common.mode {
        Mode::Continuous => gillespie_run(&generator, w.x_in, horizon, &mut rng, cap),
        Mode::Discrete => {
            let policy = match common.delta {
                Some(d) => DiscretePolicy::with_delta(horizon, d),
                None => DiscretePolicy::for_horizon(horizon),
            };
            gillespie_run_discrete(&generator, w.x_in, horizon, &mut rng, policy, cap)
        }
    };
    let trajectory = run.map_err(|e| match e {
        fnv_core::Error::ContractViolation { .. } => usage(format!("{e}; the witness generator is not legal, use verify instead")),
        other => other.into(),
    })?;
    match format {
        Format::Jsonl => Ok(trajectory.to_json_lines().into_bytes()),
        _ => {
            let config = json!({
                "instance": common.instance,
                "witness": common.witness,
                "t": horizon,
                "max_transitions": cap,
                "mode": common.mode,
                "delta": common.delta,
                "seed": common.seed,
            });
            document("sample-trajectory", config, trajectory, started)
        }
    }
}

#[derive(Serialize)]
struct Entry {
    index: BasisIndex,
    value: f64,
}

fn inspect(common: &Common, state: Option<&str>, matrix: Matrix, started: Instant) -> Result<Vec<u8>, Failure> {
    let loaded = inputs(common, true)?;
    let (_, w) = loaded.witness.as_ref().expect("witness required");
    let n = loaded.instance.hamiltonian.qubits();
    if n > INSPECT_MAX_QUBITS {
        return Err(usage(format!("inspect-generator is limited to {INSPECT_MAX_QUBITS} qubits")));
    }
    let x: BasisIndex = match state {
        Some(s) => s.parse()?,
        None => w.x_in,
    };
    x.check_width(n)?;
    let h = loaded.instance.hamiltonian.shifted(-w.lambda_hat);
    let view = FixedNodeView::new(&h, w.oracle.as_ref())?;
    let result = match matrix {
        Matrix::FixedNode => {
            let entries: Vec<Entry> = view
                .fn_row(x)?
                .into_iter()
                .map(|(index, value)| Entry { index, value })
                .collect();
            json!({ "matrix": matrix, "state": x, "entries": entries })
        }
        Matrix::Generator => {
            let generator = GeneratorView::unshifted(view);
            let column = generator.column(x)?;
            let mut entries = vec![Entry {
                index: x,
                value: column.diagonal,
            }];
            entries.extend(column.rates.iter().map(|&(index, value)| Entry { index, value }));
            entries.sort_by_key(|e| e.index);
            json!({
                "matrix": matrix,
                "state": x,
                "entries": entries,
                "legality": generator.column_legal(x)?,
            })
        }
    };
    let config = json!({
        "instance": common.instance,
        "witness": common.witness,
        "lambda_hat": w.lambda_hat,
        "realified": loaded.realified,
    });
    document("inspect-generator", config, result, started)
}

#[derive(Serialize)]
struct SweepRow {
    value: f64,
    p_hat: f64,
    ci: f64,
    mean_transitions: f64,
    wall_time: f64,
}

fn sweep(common: &Common, param: SweepParam, values: &[f64], started: Instant) -> Result<Vec<u8>, Failure> {
    let format = common.format.unwrap_or(Format::Csv);
    if format == Format::Jsonl {
        return Err(usage("sweeps are written as csv or json"));
    }
    if values.len() < 2 {
        return Err(usage("a sweep needs at least two values"));
    }
    let loaded = inputs(common, true)?;
    let (_, w) = loaded.witness.as_ref().expect("witness required");
    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let row_started = Instant::now();
        let (instance, cfg) = match param {
            SweepParam::T => {
                let mut c = common.clone();
                c.t = Some(v);
                (loaded.instance.clone(), verifier_config(&c, &loaded.instance)?)
            }
            SweepParam::Trials => {
                if !(v >= 1.0 && v.fract() == 0.0) {
                    return Err(usage(format!("trial count {v} is not a positive integer")));
                }
                let mut c = common.clone();
                c.trials = v as u64;
                (loaded.instance.clone(), verifier_config(&c, &loaded.instance)?)
            }
            SweepParam::Epsilon => {
                let inst = Instance::new(loaded.instance.hamiltonian.clone(), loaded.instance.a, loaded.instance.a + v)
                    .map_err(|e| usage(e.to_string()))?;
                let cfg = verifier_config(common, &inst)?;
                (inst, cfg)
            }
        };
        let est = estimate_acceptance(&instance, w, &cfg)?;
        rows.push(SweepRow {
            value: v,
            p_hat: est.p_hat,
            ci: est.ci_half_width,
            mean_transitions: est.mean_transitions,
            wall_time: row_started.elapsed().as_secs_f64(),
        });
    }
    match format {
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            for row in &rows {
                writer
                    .serialize(row)
                    .map_err(|e| Failure::Internal(format!("cannot write csv: {e}")))?;
            }
            writer
                .into_inner()
                .map_err(|e| Failure::Internal(format!("cannot write csv: {e}")))
        }
        _ => {
            let mut config = echo(common, None, Some(&loaded));
            config["param"] = json!(param);
            config["values"] = json!(values);
            document("sweep", config, rows, started)
        }
    }
}
