//! Run configuration, (δ21, r) sweeps and result persistence.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::atomsys::{linspace, MediumConstants, SystemConfig};
use crate::error::{Error, Result};
use crate::index::{refractive_index, Branch};
use crate::response::{phase_averaged_response, ResponseCoefficients};
use crate::steady::SolverSettings;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Pump rates r₁…r₆ of the reference parameter set, units γ.
pub const REFERENCE_PUMP_RATES: [f64; 6] = [0.0, 0.2512e-2, 1e-2, 1.679e-2, 1.698e-2, 1.799e-2];

/// Pump rate of the reference lossless operating point, units γ.
pub const LOSSLESS_PUMP_RATE: f64 = 1.718e-2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetuningSweep {
    /// Lower end of δ21, units γ.
    pub min: f64,
    /// Upper end of δ21, units γ.
    pub max: f64,
    pub count: usize,
}

impl Default for DetuningSweep {
    fn default() -> Self {
        Self {
            min: -100.0,
            max: 100.0,
            count: 201,
        }
    }
}

impl DetuningSweep {
    /// Grid points; a single-point sweep sits at `min`.
    pub fn values(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.count)
    }
}

/// Everything needed to reproduce a sweep. Every field has a documented
/// default so an empty file is a valid configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub detuning: DetuningSweep,
    /// Incoherent pump rates r, units γ, strictly ascending.
    pub pump_rates: Vec<f64>,
    pub solver: SolverSettings,
    /// Number K of loop-phase samples.
    pub phases: usize,
    pub output: Option<PathBuf>,
    /// Reserved; no part of the computation is random.
    pub seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            detuning: DetuningSweep::default(),
            pump_rates: vec![0.0],
            solver: SolverSettings::default(),
            phases: 16,
            output: None,
            seed: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.solver.validate()?;
        let d = &self.detuning;
        if d.count == 0 {
            return Err(Error::validation("detuning.count", "must be at least 1"));
        }
        if !d.min.is_finite() || !d.max.is_finite() {
            return Err(Error::validation("detuning", "bounds must be finite"));
        }
        if d.count > 1 && !(d.min < d.max) {
            return Err(Error::validation("detuning.min", "must be below detuning.max"));
        }
        if d.count == 1 && d.min > d.max {
            return Err(Error::validation("detuning.min", "must not exceed detuning.max"));
        }
        if self.pump_rates.is_empty() {
            return Err(Error::validation("pump_rates", "must contain at least one rate"));
        }
        if self.pump_rates.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(Error::validation("pump_rates", "rates must be non-negative"));
        }
        if self.pump_rates.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("pump_rates", "must be strictly ascending"));
        }
        if self.phases == 0 {
            return Err(Error::validation("phases", "must be at least 1"));
        }
        Ok(())
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("RunConfig is always serializable")
    }
}

/// Parses a JSON run configuration (empty text means all defaults) and
/// validates it.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = if text.trim().is_empty() {
        RunConfig::default()
    } else {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub tool_version: String,
    pub timestamp: String,
    pub config: RunConfig,
    pub medium: MediumConstants,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub delta21: f64,
    pub pump: f64,
    pub eps: Option<C64>,
    pub mu: Option<C64>,
    pub xi_eh: Option<C64>,
    pub xi_he: Option<C64>,
    pub n: Option<C64>,
    pub fom: Option<f64>,
    pub branch: Option<Branch>,
    pub r2_e: Option<f64>,
    pub r2_m: Option<f64>,
    pub converged: bool,
    pub nonlinear_regime: bool,
    pub branch_point: bool,
    pub suspicious_jump: bool,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn is_flagged(&self) -> bool {
        !self.converged || self.nonlinear_regime || self.branch_point || self.suspicious_jump
    }

    /// Coefficients stored in the row (χ recomputed from ε and μ).
    pub fn coefficients(&self) -> Option<ResponseCoefficients> {
        Some(ResponseCoefficients::from_eps_mu(self.eps?, self.mu?, self.xi_eh?, self.xi_he?))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub metadata: SweepMetadata,
    /// Sorted by (r, δ21).
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn flagged_count(&self) -> usize {
        self.rows.iter().filter(|r| r.is_flagged()).count()
    }

    pub fn rows_at_pump(&self, pump: f64) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.pump == pump)
    }
}

fn failed_row(delta21: f64, pump: f64, err: &Error) -> SweepRow {
    SweepRow {
        delta21,
        pump,
        eps: None,
        mu: None,
        xi_eh: None,
        xi_he: None,
        n: None,
        fom: None,
        branch: None,
        r2_e: None,
        r2_m: None,
        converged: false,
        nonlinear_regime: false,
        branch_point: false,
        suspicious_jump: false,
        error: Some(err.to_string()),
    }
}

/// One δ21 column: phase-averaged response at every pump rate with the
/// index branch threaded along ascending r.
fn run_column(cfg: &RunConfig, delta21: f64) -> Vec<SweepRow> {
    let pol = cfg.system.drives.polarization;
    let mut prev: Option<(C64, C64)> = None;
    cfg.pump_rates
        .iter()
        .map(|&pump| {
            let sys = cfg.system.clone().with_detuning(delta21).with_pump(pump);
            let rc = match phase_averaged_response(&sys, &cfg.solver, cfg.phases) {
                Ok(rc) => rc,
                Err(e) => return failed_row(delta21, pump, &e),
            };
            let point = match refractive_index(&rc, pol, prev.map(|p| p.0)) {
                Ok(p) => p,
                Err(e) => return failed_row(delta21, pump, &e),
            };
            let suspicious = match prev {
                Some((n_prev, s_prev)) => {
                    (point.n - n_prev).norm() > 10.0 * (point.n_squared - s_prev).norm().sqrt()
                }
                None => false,
            };
            prev = Some((point.n, point.n_squared));
            SweepRow {
                delta21,
                pump,
                eps: Some(rc.eps),
                mu: Some(rc.mu),
                xi_eh: Some(rc.xi_eh),
                xi_he: Some(rc.xi_he),
                n: Some(point.n),
                fom: Some(point.fom),
                branch: Some(point.branch),
                r2_e: Some(rc.diagnostics.r2_e),
                r2_m: Some(rc.diagnostics.r2_m),
                converged: true,
                nonlinear_regime: rc.diagnostics.nonlinear_regime,
                branch_point: point.branch_point,
                suspicious_jump: suspicious,
                error: None,
            }
        })
        .collect()
}

/// Runs the full (δ21 × r) sweep on the global rayon pool.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let deltas = cfg.detuning.values();
    let columns: Vec<Vec<SweepRow>> = deltas.par_iter().map(|&d| run_column(cfg, d)).collect();
    let mut rows = Vec::with_capacity(deltas.len() * cfg.pump_rates.len());
    for k in 0..cfg.pump_rates.len() {
        for col in &columns {
            rows.push(col[k].clone());
        }
    }
    Ok(SweepResult {
        metadata: SweepMetadata {
            tool_version: TOOL_VERSION.to_owned(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            config: cfg.clone(),
            medium: cfg.system.medium_constants()?,
        },
        rows,
    })
}

/// Runs the sweep on a dedicated pool of `workers` threads.
pub fn run_sweep_with_workers(cfg: &RunConfig, workers: usize) -> Result<SweepResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot build worker pool: {e}")))?;
    pool.install(|| run_sweep(cfg))
}

// ---------------------------------------------------------------------------
// Persistence

/// Figure of merit with infinity written as `inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Fom(f64);

impl Serialize for Fom {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str("inf")
        }
    }
}

impl<'de> Deserialize<'de> for Fom {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Fom;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Fom, E> {
                Ok(Fom(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Fom, E> {
                Ok(Fom(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Fom, E> {
                Ok(Fom(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Fom, E> {
                v.parse::<f64>().map(Fom).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// Flat row layout shared by CSV and JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct RowRecord {
    delta21: f64,
    r: f64,
    eps_re: Option<f64>,
    eps_im: Option<f64>,
    mu_re: Option<f64>,
    mu_im: Option<f64>,
    #[serde(rename = "xiEH_re")]
    xi_eh_re: Option<f64>,
    #[serde(rename = "xiEH_im")]
    xi_eh_im: Option<f64>,
    #[serde(rename = "xiHE_re")]
    xi_he_re: Option<f64>,
    #[serde(rename = "xiHE_im")]
    xi_he_im: Option<f64>,
    n_re: Option<f64>,
    n_im: Option<f64>,
    fom: Option<Fom>,
    branch: Option<Branch>,
    r2_e: Option<f64>,
    r2_m: Option<f64>,
    converged: bool,
}

/// CSV column order.
pub const CSV_COLUMNS: [&str; 17] = [
    "delta21", "r", "eps_re", "eps_im", "mu_re", "mu_im", "xiEH_re", "xiEH_im", "xiHE_re",
    "xiHE_im", "n_re", "n_im", "fom", "branch", "r2_e", "r2_m", "converged",
];

fn split(z: Option<C64>) -> (Option<f64>, Option<f64>) {
    (z.map(|z| z.re), z.map(|z| z.im))
}

fn join(re: Option<f64>, im: Option<f64>) -> Option<C64> {
    Some(C64::new(re?, im?))
}

impl From<&SweepRow> for RowRecord {
    fn from(r: &SweepRow) -> Self {
        let (eps_re, eps_im) = split(r.eps);
        let (mu_re, mu_im) = split(r.mu);
        let (xi_eh_re, xi_eh_im) = split(r.xi_eh);
        let (xi_he_re, xi_he_im) = split(r.xi_he);
        let (n_re, n_im) = split(r.n);
        Self {
            delta21: r.delta21,
            r: r.pump,
            eps_re,
            eps_im,
            mu_re,
            mu_im,
            xi_eh_re,
            xi_eh_im,
            xi_he_re,
            xi_he_im,
            n_re,
            n_im,
            fom: r.fom.map(Fom),
            branch: r.branch,
            r2_e: r.r2_e,
            r2_m: r.r2_m,
            converged: r.converged,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct JsonRow {
    #[serde(flatten)]
    record: RowRecord,
    nonlinear_regime: bool,
    branch_point: bool,
    suspicious_jump: bool,
    error: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct JsonResult {
    metadata: SweepMetadata,
    rows: Vec<JsonRow>,
}

fn row_from_parts(rec: RowRecord, flags: Option<(bool, bool, bool, Option<String>)>) -> SweepRow {
    let (nonlinear_regime, branch_point, suspicious_jump, error) =
        flags.unwrap_or((false, false, false, None));
    SweepRow {
        delta21: rec.delta21,
        pump: rec.r,
        eps: join(rec.eps_re, rec.eps_im),
        mu: join(rec.mu_re, rec.mu_im),
        xi_eh: join(rec.xi_eh_re, rec.xi_eh_im),
        xi_he: join(rec.xi_he_re, rec.xi_he_im),
        n: join(rec.n_re, rec.n_im),
        fom: rec.fom.map(|f| f.0),
        branch: rec.branch,
        r2_e: rec.r2_e,
        r2_m: rec.r2_m,
        converged: rec.converged,
        nonlinear_regime,
        branch_point,
        suspicious_jump,
        error,
    }
}

const META_PREFIX: &str = "# metadata: ";

/// CSV with `#`-prefixed metadata lines followed by the header and rows.
pub fn export_csv(res: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    write_csv(res, BufWriter::new(File::create(path)?))
}

pub fn write_csv<W: Write>(res: &SweepResult, mut out: W) -> Result<()> {
    writeln!(out, "# nirgas {} sweep", res.metadata.tool_version)?;
    writeln!(out, "# timestamp: {}", res.metadata.timestamp)?;
    writeln!(
        out,
        "# units: delta21 and r in gamma; eps, mu, xi dimensionless (Gaussian); fom = |Re n / Im n|"
    )?;
    writeln!(out, "{META_PREFIX}{}", serde_json::to_string(&res.metadata)?)?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        for row in &res.rows {
            w.serialize(RowRecord::from(row))?;
        }
        if res.rows.is_empty() {
            w.write_record(CSV_COLUMNS)?;
        }
        w.flush()?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a file written by [`export_csv`]. The per-row diagnostic flags that
/// have no CSV column come back as `false`.
pub fn read_csv(path: impl AsRef<Path>) -> Result<SweepResult> {
    let file = File::open(path)?;
    let mut metadata = None;
    let mut body = String::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if let Some(json) = line.strip_prefix(META_PREFIX) {
            metadata = Some(serde_json::from_str::<SweepMetadata>(json)?);
        } else if !line.starts_with('#') {
            body.push_str(&line);
            body.push('\n');
        }
    }
    let metadata = metadata.ok_or_else(|| Error::InvalidInput("CSV has no metadata line".into()))?;
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(Error::InvalidInput(format!("unexpected CSV header {headers:?}")));
    }
    let rows = rdr
        .deserialize::<RowRecord>()
        .map(|r| r.map(|rec| row_from_parts(rec, None)).map_err(Error::from))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { metadata, rows })
}

pub fn export_json(res: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    write_json(res, BufWriter::new(File::create(path)?))
}

pub fn write_json<W: Write>(res: &SweepResult, mut out: W) -> Result<()> {
    let doc = JsonResult {
        metadata: res.metadata.clone(),
        rows: res
            .rows
            .iter()
            .map(|r| JsonRow {
                record: RowRecord::from(r),
                nonlinear_regime: r.nonlinear_regime,
                branch_point: r.branch_point,
                suspicious_jump: r.suspicious_jump,
                error: r.error.clone(),
            })
            .collect(),
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    out.flush()?;
    Ok(())
}

pub fn read_json(path: impl AsRef<Path>) -> Result<SweepResult> {
    let doc: JsonResult = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    Ok(SweepResult {
        metadata: doc.metadata,
        rows: doc
            .rows
            .into_iter()
            .map(|r| {
                row_from_parts(
                    r.record,
                    Some((r.nonlinear_regime, r.branch_point, r.suspicious_jump, r.error)),
                )
            })
            .collect(),
    })
}
