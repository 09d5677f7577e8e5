//! File formats: network JSON, dataset CSV, and the common report envelope.
//!
//! Network JSON:
//!
//! ```json
//! {
//!   "input_dim": 2, "hidden": 3, "output_dim": 1,
//!   "activation": "sigmoid",
//!   "w_in": [[..], [..]],
//!   "b_hidden": [..],
//!   "w_out": [[..], [..], [..]],
//!   "b_out": [..]
//! }
//! ```
//!
//! `w_in` has one row per input (length `hidden`); entry `w_in[i][j]`
//! connects input `i` to hidden neuron `j`. `w_out` has one row per hidden
//! neuron (length `output_dim`); entry `w_out[j][l]` connects neuron `j` to
//! output `l`. Ragged rows are rejected with the offending field named.
//!
//! Dataset CSV: header `x_1,...,x_d,y` with an optional trailing `weight`
//! column; weights default to uniform and are normalized to sum to one.
//! Floats are written with 17 significant digits so values round-trip.

use crate::cost::{EmpiricalMeasure, TargetFunction};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::net::{Activation, Network, ParameterVector};
use serde::{Deserialize, Serialize};

/// Format version stamped into every JSON artifact.
pub const SPEC_VERSION: &str = "1";

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    input_dim: usize,
    hidden: usize,
    output_dim: usize,
    activation: String,
    w_in: Vec<Vec<f64>>,
    b_hidden: Vec<f64>,
    w_out: Vec<Vec<f64>>,
    b_out: Vec<f64>,
}

fn rows_to_mat(rows: &[Vec<f64>], expect_rows: usize, expect_cols: usize, field: &'static str) -> Result<Mat> {
    if rows.len() != expect_rows {
        return Err(Error::MalformedNetwork {
            field,
            message: format!("expected {expect_rows} rows, found {}", rows.len()),
        });
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != expect_cols {
            return Err(Error::MalformedNetwork {
                field,
                message: format!("row {i} has {} entries, expected {expect_cols}", row.len()),
            });
        }
    }
    Mat::from_rows(rows)
        .map_err(|e| Error::MalformedNetwork { field, message: e.to_string() })
}

pub fn network_from_json(json: &str) -> Result<Network> {
    let file: NetworkFile = serde_json::from_str(json)?;
    let activation = Activation::parse(&file.activation)?;
    let w_in = rows_to_mat(&file.w_in, file.input_dim, file.hidden, "w_in")?;
    let w_out = rows_to_mat(&file.w_out, file.hidden, file.output_dim, "w_out")?;
    if file.b_hidden.len() != file.hidden {
        return Err(Error::MalformedNetwork {
            field: "b_hidden",
            message: format!("expected {} entries, found {}", file.hidden, file.b_hidden.len()),
        });
    }
    if file.b_out.len() != file.output_dim {
        return Err(Error::MalformedNetwork {
            field: "b_out",
            message: format!("expected {} entries, found {}", file.output_dim, file.b_out.len()),
        });
    }
    let params = ParameterVector::new(w_in, file.b_hidden, w_out, file.b_out)?;
    Ok(Network::new(activation, params))
}

pub fn network_to_json(net: &Network) -> Result<String> {
    if matches!(net.activation, Activation::Custom(_)) {
        return Err(Error::InvalidArgument(
            "custom activations have no JSON representation".into(),
        ));
    }
    let topo = net.topology();
    let file = NetworkFile {
        input_dim: topo.input_dim,
        hidden: topo.hidden,
        output_dim: topo.output_dim,
        activation: net.activation.name().to_string(),
        w_in: net.params.w_in().to_nested(),
        b_hidden: net.params.b_hidden().to_vec(),
        w_out: net.params.w_out().to_nested(),
        b_out: net.params.b_out().to_vec(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

/// A parsed dataset: the weighted atoms and the target values at them.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub measure: EmpiricalMeasure,
    pub targets: TargetFunction,
}

/// Parses `x_1,...,x_d,y[,weight]` CSV text. Weights, when present, must be
/// strictly positive; they are normalized to sum to one.
pub fn dataset_from_csv(text: &str, file_name: &str) -> Result<Dataset> {
    let parse_err = |line: usize, message: String| Error::Parse {
        file: file_name.to_string(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file".into()))?;
    let columns: Vec<&str> = header.split(',').map(|c| c.trim()).collect();
    let mut d = 0;
    while d < columns.len() && columns[d] == format!("x_{}", d + 1) {
        d += 1;
    }
    if d == 0 {
        return Err(parse_err(1, format!("header must start with x_1, found `{header}`")));
    }
    let has_weight = match &columns[d..] {
        ["y"] => false,
        ["y", "weight"] => true,
        rest => {
            return Err(parse_err(
                1,
                format!("after x_1..x_{d} expected `y[,weight]`, found {rest:?}"),
            ))
        }
    };

    let mut atoms_rows: Vec<Vec<f64>> = Vec::new();
    let mut values = Vec::new();
    let mut weights = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split(',').map(|c| c.trim()).collect();
        if fields.len() != columns.len() {
            return Err(parse_err(
                line_no,
                format!("expected {} fields, found {}", columns.len(), fields.len()),
            ));
        }
        let parse_f64 = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| parse_err(line_no, format!("`{s}`: {e}")))
        };
        let mut row = Vec::with_capacity(d);
        for field in &fields[..d] {
            row.push(parse_f64(field)?);
        }
        atoms_rows.push(row);
        values.push(parse_f64(fields[d])?);
        if has_weight {
            let w = parse_f64(fields[d + 1])?;
            if !(w.is_finite() && w > 0.0) {
                return Err(parse_err(line_no, format!("weight must be positive, found {w}")));
            }
            weights.push(w);
        }
    }
    if atoms_rows.is_empty() {
        return Err(parse_err(1, "no data rows".into()));
    }
    let atoms = Mat::from_rows(&atoms_rows)?;
    let measure = if has_weight {
        let total: f64 = weights.iter().sum();
        EmpiricalMeasure::new(atoms, weights.iter().map(|w| w / total).collect())?
    } else {
        EmpiricalMeasure::uniform(atoms)?
    };
    Ok(Dataset {
        measure,
        targets: TargetFunction::from_scalar_values(values)?,
    })
}

/// Renders a float with 17 significant digits so parsing recovers it exactly.
pub fn csv_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn dataset_to_csv(mu: &EmpiricalMeasure, f: &TargetFunction) -> Result<String> {
    if f.len() != mu.len() {
        return Err(Error::DimensionMismatch {
            context: "dataset rows",
            expected: mu.len(),
            got: f.len(),
        });
    }
    let d = mu.input_dim();
    let mut out = String::new();
    for i in 1..=d {
        out.push_str(&format!("x_{i},"));
    }
    out.push_str("y,weight\n");
    for n in 0..mu.len() {
        for v in mu.atom(n) {
            out.push_str(&csv_float(*v));
            out.push(',');
        }
        out.push_str(&csv_float(f.scalar(n)));
        out.push(',');
        out.push_str(&csv_float(mu.weight(n)));
        out.push('\n');
    }
    Ok(out)
}

/// Envelope wrapping every CLI JSON artifact with the format version and the
/// subcommand that produced it.
#[derive(Serialize, Deserialize)]
pub struct ReportEnvelope<T> {
    pub spec_version: String,
    pub command: String,
    /// Seconds since the Unix epoch at generation time; excluded from
    /// golden-file comparisons.
    pub timestamp: u64,
    pub report: T,
}

impl<T: Serialize> ReportEnvelope<T> {
    pub fn new(command: &str, report: T) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        ReportEnvelope {
            spec_version: SPEC_VERSION.to_string(),
            command: command.to_string(),
            timestamp,
            report,
        }
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::Topology;
    use crate::rng::Rng;

    #[test]
    fn network_json_round_trip() {
        let mut rng = Rng::seed_from(31);
        let topo = Topology::new(2, 3, 1).unwrap();
        let flat = rng.normal_vec(topo.param_dim());
        let net = Network::new(
            Activation::Softplus,
            ParameterVector::from_flat(&topo, &flat).unwrap(),
        );
        let json = network_to_json(&net).unwrap();
        let back = network_from_json(&json).unwrap();
        assert_eq!(back.params, net.params);
        assert_eq!(back.activation.name(), "softplus");
    }

    #[test]
    fn network_json_rejects_ragged_and_unknown() {
        let ragged = r#"{
            "input_dim": 2, "hidden": 2, "output_dim": 1,
            "activation": "sigmoid",
            "w_in": [[1.0, 2.0], [3.0]],
            "b_hidden": [0.0, 0.0],
            "w_out": [[1.0], [1.0]],
            "b_out": [0.0]
        }"#;
        assert!(matches!(
            network_from_json(ragged),
            Err(Error::MalformedNetwork { field: "w_in", .. })
        ));
        let unknown = ragged.replace("sigmoid", "relu");
        assert!(matches!(
            network_from_json(&unknown),
            Err(Error::UnknownActivation(_))
        ));
    }

    #[test]
    fn dataset_csv_round_trip() {
        let mut rng = Rng::seed_from(32);
        let atoms = Mat::from_fn(5, 2, |_, _| rng.next_normal());
        let raw: Vec<f64> = (0..5).map(|_| 0.5 + rng.next_f64()).collect();
        let total: f64 = raw.iter().sum();
        let mu = EmpiricalMeasure::new(atoms, raw.iter().map(|w| w / total).collect()).unwrap();
        let f = TargetFunction::from_scalar_values(rng.normal_vec(5)).unwrap();
        let csv = dataset_to_csv(&mu, &f).unwrap();
        let parsed = dataset_from_csv(&csv, "test.csv").unwrap();
        assert_eq!(parsed.measure.len(), 5);
        for n in 0..5 {
            assert_eq!(parsed.measure.atom(n), mu.atom(n), "atom {n}");
            assert_eq!(parsed.targets.scalar(n), f.scalar(n), "target {n}");
            assert!((parsed.measure.weight(n) - mu.weight(n)).abs() <= 1e-16);
        }
    }

    #[test]
    fn dataset_csv_without_weights_is_uniform() {
        let csv = "x_1,y\n0.5,1.0\n-0.5,2.0\n";
        let parsed = dataset_from_csv(csv, "inline").unwrap();
        assert_eq!(parsed.measure.weight(0), 0.5);
        assert_eq!(parsed.targets.scalar(1), 2.0);
    }

    #[test]
    fn dataset_csv_errors_name_line_and_field() {
        let bad_header = "a,b\n1,2\n";
        match dataset_from_csv(bad_header, "data.csv") {
            Err(Error::Parse { file, line, .. }) => {
                assert_eq!(file, "data.csv");
                assert_eq!(line, 1);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let bad_value = "x_1,y\n1.0,2.0\noops,3.0\n";
        match dataset_from_csv(bad_value, "data.csv") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        let bad_weight = "x_1,y,weight\n1.0,2.0,-1.0\n";
        assert!(dataset_from_csv(bad_weight, "data.csv").is_err());
    }

    #[test]
    fn envelope_carries_version() {
        let env = ReportEnvelope::new("classify", serde_json::json!({"ok": true}));
        let text = env.to_json_pretty().unwrap();
        assert!(text.contains("\"spec_version\": \"1\""));
        assert!(text.contains("\"command\": \"classify\""));
    }
}
