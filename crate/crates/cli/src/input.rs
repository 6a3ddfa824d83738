use std::path::Path;

use serde_json::Value;

use fnv_core::realify::realify;
use fnv_core::verifier::{Instance, Witness};
use fnv_core::zoo::{InstanceRecord, OracleDescriptor, WitnessRecord};

use crate::Failure;

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: invalid JSON: {e}", path.display())))
}

fn schema_error(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

/// Loaded inputs, realified when the Hamiltonian is complex.
pub struct Loaded {
    pub instance: Instance,
    pub witness: Option<(WitnessRecord, Witness)>,
    pub realified: bool,
}

/// Reads an instance file (bare or bundle) and the witness, which comes from
/// `witness_path` when given and otherwise from the bundle.
pub fn load(instance_path: &Path, witness_path: Option<&Path>, need_witness: bool) -> Result<Loaded, Failure> {
    let doc = read_json(instance_path)?;
    let (inst_value, bundled) = match doc.get("instance") {
        Some(inner) => (inner.clone(), doc.get("witness").cloned()),
        None => (doc, None),
    };
    let record: InstanceRecord = serde_json::from_value(inst_value).map_err(|e| schema_error(instance_path, e))?;
    let mut instance = record.to_instance().map_err(|e| schema_error(instance_path, e))?;

    let witness_value = match witness_path {
        Some(p) => {
            let doc = read_json(p)?;
            Some((doc.get("witness").cloned().unwrap_or(doc), p))
        }
        None => bundled.map(|w| (w, instance_path)),
    };
    let mut record = match witness_value {
        Some((v, p)) => Some(serde_json::from_value::<WitnessRecord>(v).map_err(|e| schema_error(p, e))?),
        None if need_witness => {
            return Err(Failure::Usage("no witness: pass --witness or use a bundle with one".into()))
        }
        None => None,
    };

    let n = instance.hamiltonian.qubits();
    let realified = !instance.hamiltonian.is_real();
    if realified {
        instance = Instance::new(realify(&instance.hamiltonian), instance.a, instance.b)?;
        if let Some(w) = record.as_mut() {
            if w.oracle.qubits() == n {
                w.oracle = OracleDescriptor::Realified {
                    inner: Box::new(w.oracle.clone()),
                };
                w.x_in = w.x_in.extend(false)?;
            }
        }
    }
    let witness = match record {
        Some(r) => {
            if r.oracle.qubits() != instance.hamiltonian.qubits() {
                return Err(Failure::Usage(format!(
                    "witness acts on {} qubits, instance on {}",
                    r.oracle.qubits(),
                    instance.hamiltonian.qubits()
                )));
            }
            let w = r.to_witness()?;
            Some((r, w))
        }
        None => None,
    };
    Ok(Loaded {
        instance,
        witness,
        realified,
    })
}
