use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::baseline::DenseBaselineModel;
use super::set_model::SetModel;
use crate::dataio::{ActivitySpace, NormStats};
use crate::interp::InterpKind;
use crate::nncore::{Activation, DenseLayer, Matrix, Mlp};
use crate::report::write_atomic;
use crate::{Error, Result};

pub const FORMAT_VERSION: u64 = 1;
const DIGEST_FIELD: &str = "digest";
const VERSION_FIELD: &str = "format_version";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerRecord {
    inputs: usize,
    outputs: usize,
    activation: Activation,
    /// Row-major `outputs × inputs`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetRecord {
    widths: Vec<usize>,
    layers: Vec<LayerRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum Body {
    SetModel {
        activity_space: ActivitySpace,
        d: usize,
        z: usize,
        norm: NormStats,
        phi: NetRecord,
        rho: NetRecord,
    },
    DenseBaseline {
        activity_space: ActivitySpace,
        d: usize,
        interp: InterpKind,
        target_rate_hz: f64,
        window_len: f64,
        norm: NormStats,
        net: NetRecord,
    },
}

/// Either kind of saved model.
#[derive(Debug, Clone)]
pub enum AnyModel {
    Set(SetModel),
    Baseline(DenseBaselineModel),
}

impl AnyModel {
    pub fn activity_space(&self) -> &ActivitySpace {
        match self {
            AnyModel::Set(m) => m.activity_space(),
            AnyModel::Baseline(m) => m.activity_space(),
        }
    }
}

fn net_record(net: &Mlp) -> NetRecord {
    NetRecord {
        widths: net.widths(),
        layers: net
            .layers()
            .iter()
            .map(|l| LayerRecord {
                inputs: l.inputs(),
                outputs: l.outputs(),
                activation: l.activation(),
                weights: l.weights().as_slice().to_vec(),
                bias: l.bias().to_vec(),
            })
            .collect(),
    }
}

fn net_from_record(rec: NetRecord, what: &str) -> Result<Mlp> {
    let layers = rec
        .layers
        .into_iter()
        .map(|l| {
            let w = Matrix::from_vec(l.outputs, l.inputs, l.weights)?;
            DenseLayer::new(w, l.bias, l.activation)
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::ModelFile(format!("{what}: {e}")))?;
    let net = Mlp::new(layers).map_err(|e| Error::ModelFile(format!("{what}: {e}")))?;
    if net.widths() != rec.widths {
        return Err(Error::ModelFile(format!(
            "{what}: declared widths disagree with layers"
        )));
    }
    Ok(net)
}

/// Hex SHA-256 of the compact JSON of `doc` without its digest field. Object
/// keys serialize in sorted order, so the digest ignores file key order.
fn content_digest(doc: &Value) -> Result<String> {
    let mut doc = doc.clone();
    if let Value::Object(map) = &mut doc {
        map.remove(DIGEST_FIELD);
    }
    let bytes = serde_json::to_vec(&doc).map_err(|e| Error::ModelFile(e.to_string()))?;
    Ok(Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

fn encode(body: &Body) -> Result<String> {
    let mut doc = serde_json::to_value(body).map_err(|e| Error::ModelFile(e.to_string()))?;
    let Value::Object(map) = &mut doc else {
        unreachable!("model body serializes to an object");
    };
    map.insert(VERSION_FIELD.into(), Value::from(FORMAT_VERSION));
    let digest = content_digest(&doc)?;
    if let Value::Object(map) = &mut doc {
        map.insert(DIGEST_FIELD.into(), Value::String(digest));
    }
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::ModelFile(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

fn decode(text: &str) -> Result<Body> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| Error::ModelFile(format!("not valid JSON: {e}")))?;
    let Value::Object(map) = &doc else {
        return Err(Error::ModelFile("top level is not an object".into()));
    };
    let version = map
        .get(VERSION_FIELD)
        .ok_or_else(|| Error::ModelFile(format!("missing field `{VERSION_FIELD}`")))?;
    if version.as_u64() != Some(FORMAT_VERSION) {
        return Err(Error::ModelFile(format!(
            "unsupported {VERSION_FIELD} {version}, expected {FORMAT_VERSION}"
        )));
    }
    let stored = map
        .get(DIGEST_FIELD)
        .and_then(Value::as_str)
        .ok_or_else(|| Error::ModelFile(format!("missing field `{DIGEST_FIELD}`")))?;
    let actual = content_digest(&doc)?;
    if stored != actual {
        return Err(Error::ModelFile(format!(
            "digest mismatch: file says {stored}, content hashes to {actual}"
        )));
    }
    let mut body = doc.clone();
    if let Value::Object(map) = &mut body {
        map.remove(DIGEST_FIELD);
        map.remove(VERSION_FIELD);
    }
    serde_json::from_value(body).map_err(|e| Error::ModelFile(e.to_string()))
}

pub fn model_to_json(model: &SetModel) -> Result<String> {
    encode(&Body::SetModel {
        activity_space: model.activity_space().clone(),
        d: model.dim(),
        z: model.z(),
        norm: model.norm().clone(),
        phi: net_record(model.phi()),
        rho: net_record(model.rho()),
    })
}

pub fn baseline_to_json(model: &DenseBaselineModel) -> Result<String> {
    encode(&Body::DenseBaseline {
        activity_space: model.activity_space().clone(),
        d: model.dim(),
        interp: model.interp(),
        target_rate_hz: model.target_rate(),
        window_len: model.window_len(),
        norm: model.norm().clone(),
        net: net_record(model.mlp()),
    })
}

pub fn any_from_json(text: &str) -> Result<AnyModel> {
    match decode(text)? {
        Body::SetModel {
            activity_space,
            d,
            z,
            norm,
            phi,
            rho,
        } => {
            let phi = net_from_record(phi, "phi")?;
            let rho = net_from_record(rho, "rho")?;
            let m = SetModel::from_parts(phi, rho, activity_space, norm)
                .map_err(|e| Error::ModelFile(e.to_string()))?;
            if m.dim() != d || m.z() != z {
                return Err(Error::ModelFile(
                    "declared d or z disagree with the networks".into(),
                ));
            }
            Ok(AnyModel::Set(m))
        }
        Body::DenseBaseline {
            activity_space,
            d,
            interp,
            target_rate_hz,
            window_len,
            norm,
            net,
        } => {
            let net = net_from_record(net, "baseline")?;
            let m =
                DenseBaselineModel::from_parts(net, interp, target_rate_hz, window_len, activity_space, norm)
                    .map_err(|e| Error::ModelFile(e.to_string()))?;
            if m.dim() != d {
                return Err(Error::ModelFile("declared d disagrees with the network".into()));
            }
            Ok(AnyModel::Baseline(m))
        }
    }
}

pub fn save_model(model: &SetModel, path: &Path) -> Result<()> {
    write_atomic(path, model_to_json(model)?.as_bytes())
}

pub fn save_baseline(model: &DenseBaselineModel, path: &Path) -> Result<()> {
    write_atomic(path, baseline_to_json(model)?.as_bytes())
}

pub fn load_any(path: &Path) -> Result<AnyModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    any_from_json(&text).map_err(|e| match e {
        Error::ModelFile(msg) => Error::ModelFile(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn load_model(path: &Path) -> Result<SetModel> {
    match load_any(path)? {
        AnyModel::Set(m) => Ok(m),
        AnyModel::Baseline(_) => Err(Error::ModelFile(format!(
            "{}: holds a dense baseline, not a set model",
            path.display()
        ))),
    }
}

pub fn load_baseline(path: &Path) -> Result<DenseBaselineModel> {
    match load_any(path)? {
        AnyModel::Baseline(m) => Ok(m),
        AnyModel::Set(_) => Err(Error::ModelFile(format!(
            "{}: holds a set model, not a dense baseline",
            path.display()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SetArchitecture;

    fn model() -> SetModel {
        let arch = SetArchitecture {
            phi: vec![5, 6],
            rho: vec![4],
        };
        let norm = NormStats {
            min: vec![-1.0, 0.0],
            max: vec![1.0, 3.0],
        };
        SetModel::new(2, &arch, ActivitySpace::new(["x", "y", "z"]).unwrap(), norm, 9).unwrap()
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = model();
        let text = model_to_json(&m).unwrap();
        let AnyModel::Set(back) = any_from_json(&text).unwrap() else {
            panic!("wrong kind");
        };
        assert_eq!(back.phi(), m.phi());
        assert_eq!(back.rho(), m.rho());
        assert_eq!(back.norm(), m.norm());
        assert_eq!(model_to_json(&back).unwrap(), text);
    }

    #[test]
    fn missing_version_names_field() {
        let text = model_to_json(&model()).unwrap();
        let mut v: Value = serde_json::from_str(&text).unwrap();
        v.as_object_mut().unwrap().remove("format_version");
        let err = any_from_json(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("format_version"), "{err}");
    }

    #[test]
    fn future_version_rejected() {
        let text = model_to_json(&model()).unwrap();
        let mut v: Value = serde_json::from_str(&text).unwrap();
        v["format_version"] = Value::from(2);
        let err = any_from_json(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("unsupported"), "{err}");
    }

    #[test]
    fn wrong_kind_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        save_model(&model(), &p).unwrap();
        assert!(load_model(&p).is_ok());
        assert!(matches!(load_baseline(&p), Err(Error::ModelFile(_))));
    }
}
