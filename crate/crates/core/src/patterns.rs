//! Steering vectors, power-domain array factors, the element model, total
//! and EIRP patterns, and beam metrics.
//!
//! Angles are radians internally: azimuth `φ` in the xy-plane from the
//! array broadside, elevation `θ` from the z-axis. Horizontal elements are
//! spaced `d_y` wavelengths along y and vertical ones `d_z` along z, giving
//! the phase progressions `ψ_y = 2π d_y sinθ sinφ` and `ψ_z = 2π d_z cosθ`.
//! The array factor of a dual-polarized array is the power sum over both
//! polarizations, which is what a two-port receiver collects.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expansion::{WeightArrayPair, WeightPair};
use crate::sequences::{ComplexArray2d, ComplexSequence};

/// Element counts and spacings (in wavelengths).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    /// Columns, along y.
    pub m: usize,
    /// Rows, along z; 1 for a ULA.
    pub n: usize,
    pub dy: f64,
    pub dz: f64,
}

impl ArrayGeometry {
    pub fn new(m: usize, n: usize, dy: f64, dz: f64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::invalid("array must have at least one element"));
        }
        if !(dy.is_finite() && dy > 0.0 && dz.is_finite() && dz > 0.0) {
            return Err(Error::invalid("element spacings must be > 0"));
        }
        Ok(Self { m, n, dy, dz })
    }

    /// Horizontal ULA with half-wavelength spacing.
    pub fn ula(m: usize) -> Result<Self> {
        Self::new(m, 1, 0.5, 0.5)
    }

    /// URA with half-wavelength spacing in both directions.
    pub fn ura(n: usize, m: usize) -> Result<Self> {
        Self::new(m, n, 0.5, 0.5)
    }

    pub fn psi_y(&self, phi: f64, theta: f64) -> f64 {
        TAU * self.dy * theta.sin() * phi.sin()
    }

    pub fn psi_z(&self, theta: f64) -> f64 {
        TAU * self.dz * theta.cos()
    }
}

fn vandermonde(len: usize, psi: f64) -> Vec<Complex64> {
    (0..len)
        .map(|i| Complex64::from_polar(1.0, i as f64 * psi))
        .collect()
}

/// `a_m = e^{j(m−1)ψ_y}` for the horizontal dimension.
pub fn steering_vector(geometry: &ArrayGeometry, phi: f64, theta: f64) -> ComplexSequence {
    ComplexSequence::new(vandermonde(geometry.m, geometry.psi_y(phi, theta)))
}

/// `A[n, m] = a_z[n] · a_y[m]`, an `N × M` matrix.
pub fn steering_matrix(geometry: &ArrayGeometry, phi: f64, theta: f64) -> ComplexArray2d {
    let ay = vandermonde(geometry.m, geometry.psi_y(phi, theta));
    let az = vandermonde(geometry.n, geometry.psi_z(theta));
    ComplexArray2d::from_fn(geometry.n, geometry.m, |n, m| az[n] * ay[m])
}

/// Sampling directions, stored as strictly increasing azimuth and elevation
/// lists; samples are the Cartesian product.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid {
    phi: Vec<f64>,
    theta: Vec<f64>,
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

/// `lo, lo + step, …` up to `hi` inclusive, without accumulating error.
fn linspace_step(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| lo + i as f64 * step).collect()
}

impl AngleGrid {
    pub fn new(phi: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        if phi.is_empty() || theta.is_empty() {
            return Err(Error::invalid("angle grid must not be empty"));
        }
        if !strictly_increasing(&phi) || !strictly_increasing(&theta) {
            return Err(Error::invalid("angle samples must be strictly increasing"));
        }
        let tol = 1e-12;
        if phi.iter().any(|p| !(p.abs() <= PI + tol)) {
            return Err(Error::invalid("azimuth must lie in [-π, π]"));
        }
        if theta.iter().any(|t| !(-tol..=PI + tol).contains(t)) {
            return Err(Error::invalid("elevation must lie in [0, π]"));
        }
        Ok(Self { phi, theta })
    }

    /// Azimuth cut over `[-90°, 90°]` at `theta`, spaced `step_deg` degrees.
    pub fn azimuth_cut(step_deg: f64, theta: f64) -> Result<Self> {
        if !(step_deg > 0.0) {
            return Err(Error::invalid("grid step must be > 0"));
        }
        let phi = linspace_step(-90.0, 90.0, step_deg)
            .into_iter()
            .map(f64::to_radians)
            .collect();
        Self::new(phi, vec![theta])
    }

    /// Default ULA grid: 0.25° azimuth steps in the horizontal plane.
    pub fn ula_default() -> Self {
        Self::azimuth_cut(0.25, FRAC_PI_2).expect("valid default grid")
    }

    /// The front hemisphere `φ ∈ [-90°, 90°]`, `θ ∈ [0°, 180°]`.
    pub fn hemisphere(step_deg: f64) -> Result<Self> {
        if !(step_deg > 0.0) {
            return Err(Error::invalid("grid step must be > 0"));
        }
        let deg = |lo, hi| -> Vec<f64> {
            linspace_step(lo, hi, step_deg)
                .into_iter()
                .map(f64::to_radians)
                .collect()
        };
        Self::new(deg(-90.0, 90.0), deg(0.0, 180.0))
    }

    /// Default URA grid: 1° × 1° over the hemisphere.
    pub fn ura_default() -> Self {
        Self::hemisphere(1.0).expect("valid default grid")
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn len(&self) -> usize {
        self.phi.len() * self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    /// `|A(φ, θ)|²` only.
    ArrayFactor,
    /// Array factor times element gain.
    Total,
    /// Total pattern of EIRP-normalized weights, in watts.
    Eirp,
}

/// Linear power samples over an [`AngleGrid`], stored `θ`-major:
/// `values[iθ · nφ + iφ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternGrid {
    grid: AngleGrid,
    values: Vec<f64>,
    kind: PatternKind,
}

impl PatternGrid {
    pub fn grid(&self) -> &AngleGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    pub fn get(&self, i_theta: usize, i_phi: usize) -> f64 {
        self.values[i_theta * self.grid.phi.len() + i_phi]
    }

    /// Azimuth cut at the `i_theta`-th elevation sample.
    pub fn cut(&self, i_theta: usize) -> &[f64] {
        let n = self.grid.phi.len();
        &self.values[i_theta * n..(i_theta + 1) * n]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `(φ, θ, value)` for every sample in storage order.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let n = self.grid.phi.len();
        self.values.iter().enumerate().map(move |(i, &v)| {
            (self.grid.phi[i % n], self.grid.theta[i / n], v)
        })
    }

    fn from_fn(grid: &AngleGrid, kind: PatternKind, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for &theta in &grid.theta {
            for &phi in &grid.phi {
                values.push(f(phi, theta));
            }
        }
        Self {
            grid: grid.clone(),
            values,
            kind,
        }
    }
}

/// Weights that can be evaluated on an array of a given shape.
pub trait ArrayWeights {
    /// `(N, M)`: rows along z, columns along y.
    fn dims(&self) -> (usize, usize);

    /// `Σ_pol |Σ_{n,m} W[n, m] · e^{j(nψ_z + mψ_y)}|²`.
    fn af_power(&self, psi_y: f64, psi_z: f64) -> f64;

    /// All entries of both polarizations.
    fn all_entries(&self) -> Vec<Complex64>;
}

fn response(w: &[Complex64], rows: usize, cols: usize, ay: &[Complex64], az: &[Complex64]) -> Complex64 {
    (0..rows)
        .map(|n| {
            let row: Complex64 = w[n * cols..(n + 1) * cols]
                .iter()
                .zip(ay)
                .map(|(x, a)| x * a)
                .sum();
            row * az[n]
        })
        .sum()
}

impl ArrayWeights for WeightPair {
    fn dims(&self) -> (usize, usize) {
        (1, self.len())
    }

    fn af_power(&self, psi_y: f64, _psi_z: f64) -> f64 {
        let ay = vandermonde(self.len(), psi_y);
        let one = [Complex64::new(1.0, 0.0)];
        response(self.a().as_slice(), 1, self.len(), &ay, &one).norm_sqr()
            + response(self.b().as_slice(), 1, self.len(), &ay, &one).norm_sqr()
    }

    fn all_entries(&self) -> Vec<Complex64> {
        self.entries().copied().collect()
    }
}

impl ArrayWeights for WeightArrayPair {
    fn dims(&self) -> (usize, usize) {
        self.shape()
    }

    fn af_power(&self, psi_y: f64, psi_z: f64) -> f64 {
        let (n, m) = self.shape();
        let ay = vandermonde(m, psi_y);
        let az = vandermonde(n, psi_z);
        response(self.a().as_slice(), n, m, &ay, &az).norm_sqr()
            + response(self.b().as_slice(), n, m, &ay, &az).norm_sqr()
    }

    fn all_entries(&self) -> Vec<Complex64> {
        self.entries().copied().collect()
    }
}

fn check_geometry(weights: &dyn ArrayWeights, geometry: &ArrayGeometry) -> Result<()> {
    if weights.dims() != (geometry.n, geometry.m) {
        return Err(Error::shape(
            format!("weights for a {}x{} array", geometry.n, geometry.m),
            format!("{:?}", weights.dims()),
        ));
    }
    Ok(())
}

/// Power-domain array factor over `grid`.
pub fn array_factor_power(
    weights: &dyn ArrayWeights,
    geometry: &ArrayGeometry,
    grid: &AngleGrid,
) -> Result<PatternGrid> {
    check_geometry(weights, geometry)?;
    Ok(PatternGrid::from_fn(grid, PatternKind::ArrayFactor, |phi, theta| {
        weights.af_power(geometry.psi_y(phi, theta), geometry.psi_z(theta))
    }))
}

/// Parabolic-in-dB element pattern with a floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementModel {
    pub peak_db: f64,
    /// Azimuth pointing direction.
    pub phi0: f64,
    /// Azimuth half-power beamwidth.
    pub hpbw: f64,
    /// Maximum attenuation below the peak, in dB.
    pub floor_db: f64,
    /// Optional separable elevation term `(θ₀, Δθ)` of the same form.
    pub elevation: Option<(f64, f64)>,
}

impl Default for ElementModel {
    fn default() -> Self {
        Self {
            peak_db: 8.0,
            phi0: 0.0,
            hpbw: 90f64.to_radians(),
            floor_db: 30.0,
            elevation: None,
        }
    }
}

impl ElementModel {
    /// A flat 0 dB element.
    pub fn isotropic() -> Self {
        Self {
            peak_db: 0.0,
            floor_db: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hpbw > 0.0) {
            return Err(Error::invalid("element HPBW must be > 0"));
        }
        if !(self.floor_db >= 0.0) || !self.peak_db.is_finite() {
            return Err(Error::invalid("element floor must be >= 0 dB"));
        }
        if let Some((_, dt)) = self.elevation {
            if !(dt > 0.0) {
                return Err(Error::invalid("elevation HPBW must be > 0"));
            }
        }
        Ok(())
    }
}

/// Wraps an angle difference into `[-π, π)`.
fn wrap(x: f64) -> f64 {
    (x + PI).rem_euclid(TAU) - PI
}

/// Azimuth element gain in dB.
pub fn element_gain(model: &ElementModel, phi: f64) -> f64 {
    let x = wrap(phi - model.phi0) / model.hpbw;
    model.peak_db - (12.0 * x * x).min(model.floor_db)
}

/// Element gain in dB including the elevation term when configured.
pub fn element_gain_at(model: &ElementModel, phi: f64, theta: f64) -> f64 {
    let Some((theta0, dt)) = model.elevation else {
        return element_gain(model, phi);
    };
    let x = wrap(phi - model.phi0) / model.hpbw;
    let y = (theta - theta0) / dt;
    model.peak_db - (12.0 * (x * x + y * y)).min(model.floor_db)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Array-factor power times linear element gain.
pub fn total_pattern(
    weights: &dyn ArrayWeights,
    geometry: &ArrayGeometry,
    model: &ElementModel,
    grid: &AngleGrid,
) -> Result<PatternGrid> {
    check_geometry(weights, geometry)?;
    model.validate()?;
    Ok(PatternGrid::from_fn(grid, PatternKind::Total, |phi, theta| {
        weights.af_power(geometry.psi_y(phi, theta), geometry.psi_z(theta))
            * db_to_linear(element_gain_at(model, phi, theta))
    }))
}

/// `1 / (√K · max|w|)` over all `K` entries of both polarizations.
pub fn eirp_scale(weights: &dyn ArrayWeights) -> Result<f64> {
    let entries = weights.all_entries();
    let peak = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::invalid("weights are all zero"));
    }
    Ok(1.0 / ((entries.len() as f64).sqrt() * peak))
}

/// Scales a ULA pair so that the strongest port radiates `1/(2M)` W; total
/// conducted power is 1 W minus the taper loss.
pub fn eirp_normalize(weights: &WeightPair) -> Result<WeightPair> {
    Ok(weights.scaled(eirp_scale(weights)?))
}

pub fn eirp_normalize_array(weights: &WeightArrayPair) -> Result<WeightArrayPair> {
    Ok(weights.scaled(eirp_scale(weights)?))
}

/// Total pattern of the EIRP-normalized weights, in watts.
pub fn eirp_pattern(
    weights: &dyn ArrayWeights,
    geometry: &ArrayGeometry,
    model: &ElementModel,
    grid: &AngleGrid,
) -> Result<PatternGrid> {
    let s = eirp_scale(weights)?;
    let mut p = total_pattern(weights, geometry, model, grid)?;
    for v in &mut p.values {
        *v *= s * s;
    }
    p.kind = PatternKind::Eirp;
    Ok(p)
}

/// `‖w‖² / (K · max|w|²)`; 1 for unit-modulus weights.
pub fn power_utilization(weights: &dyn ArrayWeights) -> Result<f64> {
    let entries = weights.all_entries();
    let peak = entries.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::invalid("weights are all zero"));
    }
    let total: f64 = entries.iter().map(|z| z.norm_sqr()).sum();
    Ok(total / (entries.len() as f64 * peak))
}

/// Width in degrees between the two −3 dB crossings around the peak of the
/// `i_theta`-th azimuth cut, interpolating linearly in dB.
pub fn hpbw(pattern: &PatternGrid, i_theta: usize) -> Result<f64> {
    if i_theta >= pattern.grid.theta.len() {
        return Err(Error::invalid("elevation index out of range"));
    }
    let cut = pattern.cut(i_theta);
    let phi = &pattern.grid.phi;
    let (peak_i, &peak) = cut
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty grid");
    if !(peak > 0.0) {
        return Err(Error::NotMeasurable("pattern has no positive peak".into()));
    }
    let threshold = linear_to_db(peak) - 3.0;
    let level = |i: usize| linear_to_db(cut[i].max(f64::MIN_POSITIVE));
    let crossing = |from: usize, to: usize| -> f64 {
        let (a, b) = (level(from), level(to));
        let t = (a - threshold) / (a - b);
        phi[from] + t * (phi[to] - phi[from])
    };
    let left = (0..peak_i)
        .rev()
        .find(|&i| level(i) < threshold)
        .map(|i| crossing(i + 1, i));
    let right = (peak_i + 1..cut.len())
        .find(|&i| level(i) < threshold)
        .map(|i| crossing(i - 1, i));
    match (left, right) {
        (Some(l), Some(r)) => Ok((r - l).to_degrees()),
        _ => Err(Error::NotMeasurable(
            "no -3 dB crossing on both sides of the peak within the cut".into(),
        )),
    }
}

/// Angular region, inclusive, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub phi: (f64, f64),
    pub theta: (f64, f64),
}

impl Region {
    pub fn everywhere() -> Self {
        Self {
            phi: (-PI, PI),
            theta: (0.0, PI),
        }
    }

    /// An azimuth span in degrees at any elevation.
    pub fn azimuth_deg(lo: f64, hi: f64) -> Self {
        Self {
            phi: (lo.to_radians(), hi.to_radians()),
            theta: (0.0, PI),
        }
    }

    fn contains(&self, phi: f64, theta: f64) -> bool {
        let tol = 1e-9;
        phi >= self.phi.0 - tol
            && phi <= self.phi.1 + tol
            && theta >= self.theta.0 - tol
            && theta <= self.theta.1 + tol
    }
}

/// `10·log10(max/min)` over the samples inside `region`.
pub fn ripple(pattern: &PatternGrid, region: &Region) -> Result<f64> {
    let (lo, hi) = pattern
        .samples()
        .filter(|&(p, t, _)| region.contains(p, t))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, _, v)| {
            (lo.min(v), hi.max(v))
        });
    if lo > hi {
        return Err(Error::invalid("region contains no grid samples"));
    }
    if lo <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(linear_to_db(hi / lo))
}
