//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or format error,
//! 3 best-effort result (search or amplitude taper did not reach its
//! target; the output file is still written).

pub mod files;
pub mod recipe;

use std::ffi::OsString;
use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;

use crate::baselines::{
    amplitude_taper_weights, dft_weights, phase_taper_weights, AmplitudeTaperParams, PhaseTaperParams,
};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_method, SectorConfig};
use crate::expansion::{expand_ula, expand_ula_to_ura, expand_ura, Orientation, RippleBound};
use crate::mgda::{search2d_with_restarts, tolerance_from_percent, MgdaConfig};
use crate::patterns::{
    array_factor_power, eirp_pattern, hpbw, power_utilization, ripple, total_pattern, AngleGrid, ArrayGeometry,
    ElementModel, Region,
};
use crate::sequences::{ComplexArray2d, ComplexSequence};
use files::{Dims, Metadata, WeightFile, Weights};
use recipe::{resolve, Recipe, Step};

pub const SEED_ENV: &str = "BROADBEAM_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerifyFailed,
    BestEffort,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::VerifyFailed => 1,
            Outcome::BestEffort => 3,
        }
    }

    fn worst(self, other: Self) -> Self {
        if other.code() > self.code() {
            other
        } else {
            self
        }
    }
}

pub const USAGE_EXIT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "broadbeam", version, about = "Broad-beam weight design for dual-polarized arrays")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for an ε-complementary pair (ULA) or array pair (URA).
    Search(SearchArgs),
    /// Check the sum-AACF sidelobe of a weight file.
    Verify(VerifyArgs),
    /// Expand a weight file with a pair of expanders.
    Expand(ExpandArgs),
    /// Evaluate array factor, total and EIRP patterns on an angle grid.
    Pattern(PatternArgs),
    /// Monte-Carlo sector spectral efficiency for one or more weight files.
    Evaluate(EvaluateArgs),
    /// Write DFT, phase-taper or amplitude-taper baseline weights.
    Baseline(BaselineArgs),
    /// Run a TOML recipe of search and expand steps.
    Recipe(RecipeArgs),
}

fn one() -> usize {
    1
}
fn one_percent() -> f64 {
    1.0
}
fn ten() -> u32 {
    10
}

/// Search parameters shared by the command line and recipes.
#[derive(Debug, Clone, Args, Deserialize)]
pub struct SearchParams {
    /// Columns (elements along y).
    #[arg(long)]
    pub m: usize,
    /// Rows (elements along z); 1 for a ULA.
    #[arg(long, default_value_t = 1)]
    #[serde(default = "one")]
    pub n: usize,
    /// Target sidelobe as a percentage of the sum-AACF mainlobe 2NM.
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one_percent")]
    pub eps_percent: f64,
    /// Absolute target sidelobe; overrides --eps-percent.
    #[arg(long)]
    #[serde(default)]
    pub eps: Option<f64>,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
    /// Independent runs with seeds seed, seed+1, ….
    #[arg(long, default_value_t = 10)]
    #[serde(default = "ten")]
    pub restarts: u32,
    /// Rain intensity V (default 0.002·NM).
    #[arg(long)]
    #[serde(default)]
    pub rain: Option<f64>,
    /// Step scale factor α (default 0.95).
    #[arg(long)]
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Unsuccessful sweeps before a global jump (default 50).
    #[arg(long)]
    #[serde(default)]
    pub d_max: Option<u32>,
    /// Utility evaluations per run (default 1e6).
    #[arg(long)]
    #[serde(default)]
    pub max_iterations: Option<u64>,
    /// Step size below which a coordinate is frozen (default 1e-7).
    #[arg(long)]
    #[serde(default)]
    pub step_floor: Option<f64>,
    /// Hold the first phase of the A port at zero.
    #[arg(long)]
    #[serde(default)]
    pub pin_first: bool,
}

impl SearchParams {
    fn tolerance(&self) -> f64 {
        self.eps
            .unwrap_or_else(|| tolerance_from_percent(self.n, self.m, self.eps_percent))
    }

    fn config(&self) -> MgdaConfig {
        let mut c = MgdaConfig::new(self.n, self.m, self.tolerance()).with_seed(self.seed);
        if let Some(v) = self.rain {
            c.rain_intensity = v;
        }
        if let Some(a) = self.alpha {
            c.scale_factor = a;
        }
        if let Some(d) = self.d_max {
            c.d_max = d;
        }
        if let Some(k) = self.max_iterations {
            c.max_iterations = k;
        }
        if let Some(s) = self.step_floor {
            c.step_floor = s;
        }
        c.pin_first = self.pin_first;
        c
    }
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub params: SearchParams,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub file: PathBuf,
    /// Sidelobe tolerance; defaults to the epsilon stored in the file.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
pub enum ExpandMode {
    /// ULA to a 2NM-element ULA.
    #[value(name = "ula")]
    #[serde(rename = "ula")]
    Ula,
    /// ULA to a 2N×M URA.
    #[value(name = "ula2ura-v")]
    #[serde(rename = "ula2ura-v")]
    Ula2UraV,
    /// ULA to an N×2M URA.
    #[value(name = "ula2ura-h")]
    #[serde(rename = "ula2ura-h")]
    Ula2UraH,
    /// URA with the companion block stacked below.
    #[value(name = "ura-v")]
    #[serde(rename = "ura-v")]
    UraV,
    /// URA with the companion block stacked to the right.
    #[value(name = "ura-h")]
    #[serde(rename = "ura-h")]
    UraH,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    pub proto: PathBuf,
    /// Expander u: entries separated by ',', rows by ';' (e.g. "j,1" or "1;1").
    #[arg(long, short = 'u', allow_hyphen_values = true)]
    pub expander_u: String,
    /// Expander v, same syntax as u.
    #[arg(long, short = 'v', allow_hyphen_values = true)]
    pub expander_v: String,
    #[arg(long, value_enum)]
    pub mode: ExpandMode,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ElementKind {
    /// Parabolic-in-dB sector element.
    #[value(name = "3gpp")]
    Sector,
    Isotropic,
}

#[derive(Debug, Clone, Args)]
pub struct ElementArgs {
    #[arg(long, value_enum, default_value = "3gpp")]
    pub element: ElementKind,
    #[arg(long, default_value_t = 8.0, allow_hyphen_values = true)]
    pub element_peak_db: f64,
    #[arg(long, default_value_t = 90.0)]
    pub element_hpbw_deg: f64,
    #[arg(long, default_value_t = 30.0)]
    pub element_floor_db: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub element_phi0_deg: f64,
}

impl ElementArgs {
    fn model(&self) -> Result<ElementModel> {
        let m = match self.element {
            ElementKind::Isotropic => ElementModel::isotropic(),
            ElementKind::Sector => ElementModel {
                peak_db: self.element_peak_db,
                phi0: self.element_phi0_deg.to_radians(),
                hpbw: self.element_hpbw_deg.to_radians(),
                floor_db: self.element_floor_db,
                elevation: None,
            },
        };
        m.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, Args)]
pub struct GeometryArgs {
    /// Horizontal element spacing in wavelengths.
    #[arg(long, default_value_t = 0.5)]
    pub dy: f64,
    /// Vertical element spacing in wavelengths.
    #[arg(long, default_value_t = 0.5)]
    pub dz: f64,
}

impl GeometryArgs {
    fn geometry(&self, dims: (usize, usize)) -> Result<ArrayGeometry> {
        ArrayGeometry::new(dims.1, dims.0, self.dy, self.dz)
    }
}

#[derive(Debug, Args)]
pub struct PatternArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub element: ElementArgs,
    /// Grid step in degrees (default 0.25 for a ULA cut, 1 for a URA hemisphere).
    #[arg(long)]
    pub step_deg: Option<f64>,
    /// Sector half-width in degrees for the ripple summary.
    #[arg(long, default_value_t = 60.0)]
    pub sector_deg: f64,
    /// Add an EIRP column (weights normalized to 1 W conducted minus taper loss).
    #[arg(long)]
    pub eirp: bool,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Method labels, one per file (default: file stem).
    #[arg(long)]
    pub label: Vec<String>,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub element: ElementArgs,
    #[arg(long, default_value_t = 10_000)]
    pub drops: usize,
    #[arg(long, default_value_t = 60.0)]
    pub half_width_deg: f64,
    #[arg(long, default_value_t = 25.0)]
    pub r_min: f64,
    #[arg(long, default_value_t = 300.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 2.2)]
    pub pathloss_exponent: f64,
    #[arg(long, default_value_t = 57.0, allow_hyphen_values = true)]
    pub gamma_db: f64,
    /// Comma-separated SNR points in dB.
    #[arg(long, default_value = "-10,0,10,20,30", allow_hyphen_values = true)]
    pub snr_grid: String,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// CSV output; stdout when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineMethod {
    Dft,
    PhaseTaper,
    AmpTaper,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long, value_enum)]
    pub method: BaselineMethod,
    #[arg(long)]
    pub m: usize,
    /// Steering azimuth in degrees.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi0_deg: f64,
    #[arg(long, default_value_t = 3)]
    pub p: u32,
    #[arg(long, default_value_t = 24.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0.01)]
    pub zeta: f64,
    #[arg(long, default_value_t = 0.05)]
    pub slack: f64,
    #[arg(long, default_value_t = 0.5)]
    pub dy: f64,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RecipeArgs {
    pub recipe: PathBuf,
    /// Directory for relative step paths.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// Parses and runs a command line, returning the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let invocation = args
        .iter()
        .map(|a| {
            let s = a.to_string_lossy();
            if s.contains(char::is_whitespace) {
                format!("'{s}'")
            } else {
                s.into_owned()
            }
        })
        .collect::<Vec<_>>()
        .join(" ");
    match run(cli.command, &invocation) {
        Ok(o) => o.code(),
        Err(e) => {
            eprintln!("error: {e}");
            USAGE_EXIT
        }
    }
}

pub fn run(command: Command, invocation: &str) -> Result<Outcome> {
    match command {
        Command::Search(a) => cmd_search(&a.params, &a.out, invocation),
        Command::Verify(a) => cmd_verify(&a),
        Command::Expand(a) => {
            let proto = WeightFile::read(&a.proto)?;
            cmd_expand(&proto, &a.proto, &a.expander_u, &a.expander_v, a.mode, &a.out, invocation)
        }
        Command::Pattern(a) => cmd_pattern(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Baseline(a) => cmd_baseline(&a, invocation),
        Command::Recipe(a) => cmd_recipe(&a),
    }
}

fn cmd_search(p: &SearchParams, out: &Path, invocation: &str) -> Result<Outcome> {
    if p.m == 0 || p.n == 0 {
        return Err(Error::invalid("--m and --n must be >= 1"));
    }
    if p.eps.is_none() && !(p.eps_percent > 0.0 && p.eps_percent.is_finite()) {
        return Err(Error::invalid("--eps-percent must be > 0"));
    }
    let cfg = p.config();
    let res = search2d_with_restarts(p.n, p.m, &cfg, p.restarts)?;
    let mut meta = Metadata::new("search")
        .param("restarts", p.restarts)
        .param("rain_intensity", cfg.rain_intensity)
        .param("scale_factor", cfg.scale_factor)
        .param("d_max", cfg.d_max)
        .param("max_iterations", cfg.max_iterations)
        .param("step_floor", cfg.step_floor)
        .param("pin_first", cfg.pin_first)
        .param("converged", res.converged)
        .param("achieved_sidelobe", res.achieved_sidelobe)
        .param("run_seed", p.seed.wrapping_add(res.restarts as u64));
    meta.seed = Some(p.seed);
    meta.epsilon = Some(cfg.tolerance);
    meta.invocation = Some(invocation.to_string());
    let file = WeightFile::from_phases(res.phases_a(), res.phases_b(), Dims { m: p.m, n: p.n }, meta);
    file.write(out)?;
    let mainlobe = 2.0 * (p.n * p.m) as f64;
    println!("dims: {}x{}", p.n, p.m);
    println!("target_sidelobe: {:.6e} ({:.4}%)", cfg.tolerance, 100.0 * cfg.tolerance / mainlobe);
    println!(
        "achieved_sidelobe: {:.6e} ({:.4}%)",
        res.achieved_sidelobe,
        100.0 * res.achieved_sidelobe / mainlobe
    );
    println!("evaluations: {}", res.iterations);
    println!("restarts_used: {}", res.restarts + 1);
    println!("converged: {}", res.converged);
    println!("wrote: {}", out.display());
    Ok(if res.converged {
        Outcome::Success
    } else {
        eprintln!("warning: target not reached; best-effort result written");
        Outcome::BestEffort
    })
}

fn cmd_verify(a: &VerifyArgs) -> Result<Outcome> {
    let file = WeightFile::read(&a.file)?;
    let eps = match a.eps.or(file.metadata.epsilon) {
        Some(e) if e >= 0.0 && e.is_finite() => e,
        Some(_) => return Err(Error::invalid("--eps must be finite and >= 0")),
        None => return Err(Error::invalid("no --eps given and the file stores no epsilon")),
    };
    let w = file.weights()?;
    let (n, m) = w.dims();
    let sidelobe = w.max_sidelobe();
    let bound = if n == 1 {
        RippleBound::from_sidelobe_1d(m, eps)
    } else {
        RippleBound::from_sidelobe_2d(n, m, eps)
    };
    let pass = sidelobe <= eps;
    println!("dims: {n}x{m}");
    println!("max_sidelobe: {sidelobe:.6e} ({:.4}%)", 100.0 * sidelobe / bound.level);
    println!("eps: {eps:.6e}");
    println!("ripple_bound: {} +/- {:.6e} ({:.4} dB)", bound.level, bound.deviation, bound.ripple_db());
    println!("result: {}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass {
        Outcome::Success
    } else {
        Outcome::VerifyFailed
    })
}

/// Parses expander text: entries separated by ',', rows by ';'.
pub fn parse_expander(text: &str) -> Result<ComplexArray2d> {
    let rows = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|e| {
                    e.trim()
                        .parse::<Complex64>()
                        .map_err(|_| Error::invalid(format!("bad expander entry {e:?} in {text:?}")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ComplexArray2d::from_rows(&rows)
}

fn as_vector(x: &ComplexArray2d) -> Result<ComplexSequence> {
    if x.rows() != 1 && x.cols() != 1 {
        return Err(Error::shape("a vector expander", format!("{:?}", x.shape())));
    }
    Ok(x.as_slice().to_vec().into())
}

pub fn expand(proto: &Weights, u: &str, v: &str, mode: ExpandMode) -> Result<Weights> {
    let (u, v) = (parse_expander(u)?, parse_expander(v)?);
    Ok(match mode {
        ExpandMode::Ula => Weights::Ula(expand_ula(&proto.to_ula()?, &as_vector(&u)?, &as_vector(&v)?)?),
        ExpandMode::Ula2UraV | ExpandMode::Ula2UraH => {
            let o = if mode == ExpandMode::Ula2UraV {
                Orientation::Vertical
            } else {
                Orientation::Horizontal
            };
            Weights::Ura(expand_ula_to_ura(&proto.to_ula()?, &as_vector(&u)?, &as_vector(&v)?, o)?)
        }
        ExpandMode::UraV => Weights::Ura(expand_ura(&proto.to_array(), &u, &v, Orientation::Vertical)?),
        ExpandMode::UraH => Weights::Ura(expand_ura(&proto.to_array(), &u, &v, Orientation::Horizontal)?),
    })
}

fn mode_name(mode: ExpandMode) -> String {
    mode.to_possible_value().expect("named").get_name().to_string()
}

fn cmd_expand(
    proto: &WeightFile,
    proto_path: &Path,
    u: &str,
    v: &str,
    mode: ExpandMode,
    out: &Path,
    invocation: &str,
) -> Result<Outcome> {
    let w = expand(&proto.weights()?, u, v, mode)?;
    let mut meta = Metadata::new("expand")
        .param("input", proto_path.display().to_string())
        .param("mode", mode_name(mode))
        .param("u", u)
        .param("v", v);
    meta.seed = proto.metadata.seed;
    meta.invocation = Some(invocation.to_string());
    if let Some(e) = proto.metadata.epsilon {
        meta = meta.param("proto_epsilon", e);
    }
    WeightFile::from_weights(&w, meta).write(out)?;
    let (n, m) = w.dims();
    let sidelobe = w.max_sidelobe();
    println!("dims: {n}x{m}");
    println!("max_sidelobe: {sidelobe:.6e} ({:.4}%)", 100.0 * sidelobe / (2 * n * m) as f64);
    println!("wrote: {}", out.display());
    Ok(Outcome::Success)
}

fn cmd_pattern(a: &PatternArgs) -> Result<Outcome> {
    let w = WeightFile::read(&a.file)?.weights()?;
    let geom = a.geometry.geometry(w.dims())?;
    let model = a.element.model()?;
    let grid = match (&w, a.step_deg) {
        (Weights::Ula(_), None) => AngleGrid::ula_default(),
        (Weights::Ula(_), Some(s)) => AngleGrid::azimuth_cut(s, FRAC_PI_2)?,
        (Weights::Ura(_), None) => AngleGrid::ura_default(),
        (Weights::Ura(_), Some(s)) => AngleGrid::hemisphere(s)?,
    };
    let af = array_factor_power(w.as_dyn(), &geom, &grid)?;
    let total = total_pattern(w.as_dyn(), &geom, &model, &grid)?;
    let eirp = if a.eirp {
        Some(eirp_pattern(w.as_dyn(), &geom, &model, &grid)?)
    } else {
        None
    };
    files::write_atomic(&a.out, &files::pattern_csv(&af, &total, eirp.as_ref())?)?;

    let i_horizon = grid
        .theta()
        .iter()
        .enumerate()
        .min_by(|x, y| (x.1 - FRAC_PI_2).abs().total_cmp(&(y.1 - FRAC_PI_2).abs()))
        .map(|(i, _)| i)
        .expect("nonempty grid");
    match hpbw(&total, i_horizon) {
        Ok(h) => println!("hpbw_deg: {h:.4}"),
        Err(e) => println!("hpbw_deg: n/a ({e})"),
    }
    let region = Region::azimuth_deg(-a.sector_deg, a.sector_deg);
    println!("af_ripple_db: {:.6}", ripple(&af, &region)?);
    println!("total_ripple_db: {:.6}", ripple(&total, &region)?);
    println!("power_utilization: {:.6}", power_utilization(w.as_dyn())?);
    println!("wrote: {}", a.out.display());
    Ok(Outcome::Success)
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad number {s:?} in {text:?}")))
        })
        .collect()
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<Outcome> {
    if !a.label.is_empty() && a.label.len() != a.files.len() {
        return Err(Error::invalid("give one --label per file or none"));
    }
    let config = SectorConfig {
        half_width_deg: a.half_width_deg,
        r_min: a.r_min,
        r_max: a.r_max,
        drops: a.drops,
        pathloss_exponent: a.pathloss_exponent,
        gamma_db: a.gamma_db,
        snr_db: parse_list(&a.snr_grid)?,
        seed: a.seed,
    };
    config.validate()?;
    let model = a.element.model()?;
    let mut out = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::invalid(format!("csv: {e}"));
    out.write_record(["method", "snr_db", "mean_se_bps_hz", "drops", "seed"])
        .map_err(csv_err)?;
    for (i, path) in a.files.iter().enumerate() {
        let label = a.label.get(i).cloned().unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| format!("method{i}"))
        });
        let w = WeightFile::read(path)?.weights()?;
        let geom = a.geometry.geometry(w.dims())?;
        let rep = evaluate_method(&label, w.as_dyn(), &geom, &model, &config)?;
        for (snr, se) in rep.snr_db.iter().zip(&rep.mean_se) {
            out.write_record([
                rep.label.clone(),
                snr.to_string(),
                format!("{se:.9}"),
                config.drops.to_string(),
                config.seed.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    let bytes = out.into_inner().map_err(|e| Error::invalid(format!("csv: {e}")))?;
    match &a.out {
        Some(p) => {
            files::write_atomic(p, &bytes)?;
            println!("wrote: {}", p.display());
        }
        None => print!("{}", String::from_utf8_lossy(&bytes)),
    }
    Ok(Outcome::Success)
}

fn cmd_baseline(a: &BaselineArgs, invocation: &str) -> Result<Outcome> {
    let geom = ArrayGeometry::new(a.m, 1, a.dy, 0.5)?;
    let phi0 = a.phi0_deg.to_radians();
    let mut outcome = Outcome::Success;
    let (weights, meta) = match a.method {
        BaselineMethod::Dft => (
            dft_weights(a.m, phi0, &geom)?,
            Metadata::new("baseline-dft").param("phi0_deg", a.phi0_deg),
        ),
        BaselineMethod::PhaseTaper => (
            phase_taper_weights(a.m, phi0, &PhaseTaperParams { p: a.p, c: a.c }, &geom)?,
            Metadata::new("baseline-phase-taper")
                .param("phi0_deg", a.phi0_deg)
                .param("p", a.p)
                .param("c", a.c),
        ),
        BaselineMethod::AmpTaper => {
            let params = AmplitudeTaperParams {
                zeta: a.zeta,
                slack: a.slack,
                seed: a.seed,
                ..Default::default()
            };
            let r = amplitude_taper_weights(a.m, &params, &geom)?;
            println!("in_band: {}", r.in_band);
            println!("max_violation: {:.6e}", r.max_violation);
            println!("papr: {:.6}", r.papr);
            if !r.in_band {
                eprintln!("warning: amplitude taper left the ripple band; best-effort result written");
                outcome = Outcome::BestEffort;
            }
            let mut meta = Metadata::new("baseline-amp-taper")
                .param("zeta", a.zeta)
                .param("slack", a.slack)
                .param("in_band", r.in_band)
                .param("papr", r.papr);
            meta.seed = Some(a.seed);
            (r.weights, meta)
        }
    };
    let mut meta = meta.param("m", a.m).param("dy", a.dy);
    meta.invocation = Some(invocation.to_string());
    let w = Weights::Ula(weights);
    WeightFile::from_weights(&w, meta).write(&a.out)?;
    println!("power_utilization: {:.6}", power_utilization(w.as_dyn())?);
    println!("wrote: {}", a.out.display());
    Ok(outcome)
}

fn cmd_recipe(a: &RecipeArgs) -> Result<Outcome> {
    let recipe = Recipe::read(&a.recipe)?;
    if let Some(d) = &recipe.description {
        println!("recipe: {d}");
    }
    let mut outcome = Outcome::Success;
    for (i, step) in recipe.steps.iter().enumerate() {
        let invocation = format!("broadbeam recipe {} (step {})", a.recipe.display(), i + 1);
        println!("[step {}]", i + 1);
        let o = match step {
            Step::Search { params, out } => cmd_search(params, &resolve(&a.out_dir, out), &invocation)?,
            Step::Expand {
                input,
                mode,
                u,
                v,
                out,
            } => {
                let path = resolve(&a.out_dir, input);
                let proto = WeightFile::read(&path)?;
                cmd_expand(&proto, &path, u, v, *mode, &resolve(&a.out_dir, out), &invocation)?
            }
        };
        outcome = outcome.worst(o);
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expander_syntax() {
        let x = parse_expander("j, 1").unwrap();
        assert_eq!(x.shape(), (1, 2));
        assert_eq!(x.get(0, 0), Complex64::new(0.0, 1.0));
        let y = parse_expander("-1;-j").unwrap();
        assert_eq!(y.shape(), (2, 1));
        assert_eq!(y.get(1, 0), Complex64::new(0.0, -1.0));
        assert!(parse_expander("1,x").is_err());
        assert!(parse_expander("1,1;1").is_err());
    }

    #[test]
    fn expand_modes_shapes() {
        let proto = Weights::Ula(
            crate::expansion::WeightPair::from_phases(&crate::sequences::EPS_PAIR_M7_A, &crate::sequences::EPS_PAIR_M7_B)
                .unwrap(),
        );
        let cases = [
            (ExpandMode::Ula, (1, 28)),
            (ExpandMode::Ula2UraV, (4, 7)),
            (ExpandMode::Ula2UraH, (2, 14)),
            (ExpandMode::UraV, (2, 14)),
            (ExpandMode::UraH, (1, 28)),
        ];
        for (mode, dims) in cases {
            assert_eq!(expand(&proto, "j,1", "-1,-j", mode).unwrap().dims(), dims, "{mode:?}");
        }
        assert!(expand(&proto, "1,1", "1", ExpandMode::Ula).is_err());
    }

    #[test]
    fn outcome_codes() {
        assert_eq!(Outcome::Success.code(), 0);
        assert_eq!(Outcome::VerifyFailed.code(), 1);
        assert_eq!(Outcome::BestEffort.code(), 3);
        assert_eq!(Outcome::Success.worst(Outcome::BestEffort), Outcome::BestEffort);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
