//! On-disk formats: JSON weight files and CSV tables, written atomically.
//!
//! Phases in weight files are in radians; angles in CSV files are in degrees.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::{WeightArrayPair, WeightPair};
use crate::patterns::{linear_to_db, ArrayWeights, PatternGrid};
use crate::sequences::{ComplexArray2d, ComplexSequence};

pub const SCHEMA_VERSION: u32 = 1;

/// Lowest level written to pattern CSVs, so every cell stays finite.
pub const DB_FLOOR: f64 = -300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrayKind {
    Ula,
    Ura,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub m: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub generator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub timestamp: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invocation: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, serde_json::Value>,
}

impl Metadata {
    pub fn new(generator: &str) -> Self {
        Self {
            generator: generator.to_string(),
            seed: None,
            epsilon: None,
            timestamp: chrono::Utc::now().to_rfc3339(),
            invocation: None,
            params: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

fn default_phase_unit() -> String {
    "rad".to_string()
}

/// A dual-polarized weight set. URA entries are row-major over `n × m`.
/// Amplitudes are present only for non-unimodular weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightFile {
    pub schema_version: u32,
    pub kind: ArrayKind,
    pub dims: Dims,
    #[serde(default = "default_phase_unit")]
    pub phase_unit: String,
    pub phases_a: Vec<f64>,
    pub phases_b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes_a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes_b: Option<Vec<f64>>,
    pub metadata: Metadata,
}

/// Weights loaded from a file.
#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    Ula(WeightPair),
    Ura(WeightArrayPair),
}

impl Weights {
    pub fn as_dyn(&self) -> &dyn ArrayWeights {
        match self {
            Weights::Ula(w) => w,
            Weights::Ura(w) => w,
        }
    }

    /// `(n, m)`.
    pub fn dims(&self) -> (usize, usize) {
        self.as_dyn().dims()
    }

    pub fn max_sidelobe(&self) -> f64 {
        match self {
            Weights::Ula(w) => w.max_sidelobe(),
            Weights::Ura(w) => w.max_sidelobe(),
        }
    }

    /// The 2D view; a ULA becomes a single row.
    pub fn to_array(&self) -> WeightArrayPair {
        match self {
            Weights::Ula(w) => WeightArrayPair::from_row(w),
            Weights::Ura(w) => w.clone(),
        }
    }

    pub fn to_ula(&self) -> Result<WeightPair> {
        match self {
            Weights::Ula(w) => Ok(w.clone()),
            Weights::Ura(w) if w.shape().0 == 1 => {
                WeightPair::new(w.a().as_slice().to_vec().into(), w.b().as_slice().to_vec().into())
            }
            Weights::Ura(w) => Err(Error::shape("a ULA weight set", format!("{:?} URA", w.shape()))),
        }
    }
}

const UNIT_TOL: f64 = 1e-12;

fn split(entries: &[Complex64]) -> (Vec<f64>, Option<Vec<f64>>) {
    let phases = entries.iter().map(|z| z.arg()).collect();
    let unit = entries.iter().all(|z| (z.norm() - 1.0).abs() <= UNIT_TOL);
    let amps = (!unit).then(|| entries.iter().map(|z| z.norm()).collect());
    (phases, amps)
}

fn join(phases: &[f64], amps: Option<&Vec<f64>>) -> Vec<Complex64> {
    match amps {
        Some(a) => phases.iter().zip(a).map(|(&p, &r)| Complex64::from_polar(r, p)).collect(),
        None => phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect(),
    }
}

impl WeightFile {
    /// Unimodular ULA weights stored exactly as the given phases.
    pub fn from_phases(phases_a: Vec<f64>, phases_b: Vec<f64>, dims: Dims, metadata: Metadata) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: if dims.n == 1 { ArrayKind::Ula } else { ArrayKind::Ura },
            dims,
            phase_unit: default_phase_unit(),
            phases_a,
            phases_b,
            amplitudes_a: None,
            amplitudes_b: None,
            metadata,
        }
    }

    pub fn from_weights(weights: &Weights, metadata: Metadata) -> Self {
        let (n, m) = weights.dims();
        let (a, b): (Vec<Complex64>, Vec<Complex64>) = match weights {
            Weights::Ula(w) => (w.a().as_slice().to_vec(), w.b().as_slice().to_vec()),
            Weights::Ura(w) => (w.a().as_slice().to_vec(), w.b().as_slice().to_vec()),
        };
        let (phases_a, amps_a) = split(&a);
        let (phases_b, amps_b) = split(&b);
        let any_amps = amps_a.is_some() || amps_b.is_some();
        let amp = |e: &[Complex64]| any_amps.then(|| e.iter().map(|z| z.norm()).collect());
        Self {
            schema_version: SCHEMA_VERSION,
            kind: match weights {
                Weights::Ula(_) => ArrayKind::Ula,
                Weights::Ura(_) => ArrayKind::Ura,
            },
            dims: Dims { m, n },
            phase_unit: default_phase_unit(),
            phases_a,
            phases_b,
            amplitudes_a: amp(&a),
            amplitudes_b: amp(&b),
            metadata,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.phase_unit != "rad" {
            return Err(Error::invalid("phase_unit must be \"rad\""));
        }
        let Dims { m, n } = self.dims;
        if m == 0 || n == 0 {
            return Err(Error::invalid("dims must be >= 1"));
        }
        if self.kind == ArrayKind::Ula && n != 1 {
            return Err(Error::invalid("a ULA file must have n = 1"));
        }
        let k = m * n;
        for (name, v) in [("phases_a", &self.phases_a), ("phases_b", &self.phases_b)] {
            if v.len() != k {
                return Err(Error::shape(format!("{name} of length {k}"), v.len()));
            }
            if v.iter().any(|p| !p.is_finite()) {
                return Err(Error::invalid(format!("{name} has non-finite entries")));
            }
        }
        match (&self.amplitudes_a, &self.amplitudes_b) {
            (None, None) => {}
            (Some(a), Some(b)) => {
                for (name, v) in [("amplitudes_a", a), ("amplitudes_b", b)] {
                    if v.len() != k {
                        return Err(Error::shape(format!("{name} of length {k}"), v.len()));
                    }
                    if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                        return Err(Error::invalid(format!("{name} must be finite and >= 0")));
                    }
                }
            }
            _ => return Err(Error::invalid("amplitudes_a and amplitudes_b must appear together")),
        }
        Ok(())
    }

    pub fn weights(&self) -> Result<Weights> {
        self.validate()?;
        let a = join(&self.phases_a, self.amplitudes_a.as_ref());
        let b = join(&self.phases_b, self.amplitudes_b.as_ref());
        let Dims { m, n } = self.dims;
        Ok(match self.kind {
            ArrayKind::Ula => Weights::Ula(WeightPair::new(ComplexSequence::new(a), ComplexSequence::new(b))?),
            ArrayKind::Ura => Weights::Ura(WeightArrayPair::new(
                ComplexArray2d::new(n, m, a)?,
                ComplexArray2d::new(n, m, b)?,
            )?),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: Self =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("malformed weight file: {e}")))?;
        f.validate()?;
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("weight files serialize")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::InvalidInput(msg) => Error::InvalidInput(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        write_atomic(path, text.as_bytes())
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::invalid(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn db(x: f64) -> f64 {
    if x > 0.0 {
        linear_to_db(x).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// Pattern CSV: `phi_deg,theta_deg,af_power_db,total_db[,eirp_dbw]`.
pub fn pattern_csv(af: &PatternGrid, total: &PatternGrid, eirp: Option<&PatternGrid>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::invalid(format!("csv: {e}"));
    let mut header = vec!["phi_deg", "theta_deg", "af_power_db", "total_db"];
    if eirp.is_some() {
        header.push("eirp_dbw");
    }
    w.write_record(&header).map_err(csv_err)?;
    for (i, (phi, theta, a)) in af.samples().enumerate() {
        let mut row = vec![
            format!("{:.6}", phi.to_degrees()),
            format!("{:.6}", theta.to_degrees()),
            format!("{:.9}", db(a)),
            format!("{:.9}", db(total.values()[i])),
        ];
        if let Some(e) = eirp {
            row.push(format!("{:.9}", db(e.values()[i])));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::invalid(format!("csv: {e}")))
}
