//! Single-sector Monte-Carlo spectral-efficiency evaluation.
//!
//! UEs are dropped uniformly over an annular sector in the horizontal plane
//! and served by the EIRP-normalized total pattern at `θ = 90°`. Per-drop
//! capacity is `log₂(1 + ρ γ G(φ) d^{−α})` and each SNR point reports the
//! mean over drops. Shadow fading is ignored.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::patterns::{db_to_linear, eirp_scale, element_gain, ArrayGeometry, ArrayWeights, ElementModel};

#[derive(Debug, Clone, PartialEq)]
pub struct SectorConfig {
    pub half_width_deg: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub drops: usize,
    pub pathloss_exponent: f64,
    pub gamma_db: f64,
    pub snr_db: Vec<f64>,
    pub seed: u64,
}

impl Default for SectorConfig {
    fn default() -> Self {
        Self {
            half_width_deg: 60.0,
            r_min: 25.0,
            r_max: 300.0,
            drops: 10_000,
            pathloss_exponent: 2.2,
            gamma_db: 57.0,
            snr_db: vec![-10.0, 0.0, 10.0, 20.0, 30.0],
            seed: 0,
        }
    }
}

impl SectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.drops == 0 {
            return Err(Error::invalid("K must be >= 1"));
        }
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max.is_finite()) {
            return Err(Error::invalid("radii must satisfy 0 < r_min < r_max"));
        }
        if !(self.pathloss_exponent > 0.0) {
            return Err(Error::invalid("pathloss exponent must be > 0"));
        }
        if !(self.half_width_deg >= 0.0 && self.half_width_deg <= 180.0) {
            return Err(Error::invalid("sector half-width must lie in [0, 180] degrees"));
        }
        if !self.gamma_db.is_finite() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("link offset and SNR grid must be finite"));
        }
        Ok(())
    }
}

/// A UE position: azimuth in radians and distance in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drop {
    pub phi: f64,
    pub distance: f64,
}

/// `K` drops with uniform azimuth and area-uniform radius over the annulus.
pub fn drop_ues(config: &SectorConfig) -> Result<Vec<Drop>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let hw = config.half_width_deg.to_radians();
    let (r2min, r2max) = (config.r_min * config.r_min, config.r_max * config.r_max);
    Ok((0..config.drops)
        .map(|_| {
            let phi = if hw > 0.0 { rng.gen_range(-hw..=hw) } else { 0.0 };
            let distance = rng.gen_range(r2min..=r2max).sqrt();
            Drop { phi, distance }
        })
        .collect())
}

/// `log₂(1 + ρ γ G d^{−α})`.
pub fn spectral_efficiency(gain: f64, distance: f64, rho: f64, gamma: f64, alpha: f64) -> f64 {
    (1.0 + rho * gamma * gain * distance.powf(-alpha)).log2()
}

/// Sum with pairwise splitting, so the result does not depend on how drops
/// are partitioned.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 8 {
        return x.iter().sum();
    }
    let (l, r) = x.split_at(x.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeReport {
    pub label: String,
    pub snr_db: Vec<f64>,
    /// Mean spectral efficiency in bits/s/Hz, one per SNR point.
    pub mean_se: Vec<f64>,
    /// Per-SNR, per-drop capacities when requested.
    pub samples: Option<Vec<Vec<f64>>>,
}

/// Mean capacity per SNR point for a given per-drop linear gain.
pub fn evaluate_gains(
    label: &str,
    gains: &[f64],
    drops: &[Drop],
    config: &SectorConfig,
    keep_samples: bool,
) -> Result<SeReport> {
    config.validate()?;
    if gains.len() != drops.len() {
        return Err(Error::shape(format!("{} gains", drops.len()), gains.len().to_string()));
    }
    let gamma = db_to_linear(config.gamma_db);
    let mut mean_se = Vec::with_capacity(config.snr_db.len());
    let mut samples = Vec::new();
    for &snr in &config.snr_db {
        let rho = db_to_linear(snr);
        let c: Vec<f64> = gains
            .iter()
            .zip(drops)
            .map(|(&g, d)| spectral_efficiency(g, d.distance, rho, gamma, config.pathloss_exponent))
            .collect();
        mean_se.push(pairwise_sum(&c) / c.len() as f64);
        if keep_samples {
            samples.push(c);
        }
    }
    Ok(SeReport {
        label: label.to_string(),
        snr_db: config.snr_db.clone(),
        mean_se,
        samples: keep_samples.then_some(samples),
    })
}

/// Linear EIRP gain of `weights` toward each drop in the horizontal plane.
pub fn drop_gains(
    weights: &dyn ArrayWeights,
    geometry: &ArrayGeometry,
    model: &ElementModel,
    drops: &[Drop],
) -> Result<Vec<f64>> {
    if weights.dims() != (geometry.n, geometry.m) {
        return Err(Error::shape(
            format!("weights for a {}x{} array", geometry.n, geometry.m),
            format!("{:?}", weights.dims()),
        ));
    }
    model.validate()?;
    let s2 = eirp_scale(weights)?.powi(2);
    let psi_z = geometry.psi_z(FRAC_PI_2);
    Ok(drops
        .iter()
        .map(|d| {
            let af = weights.af_power(geometry.psi_y(d.phi, FRAC_PI_2), psi_z);
            s2 * af * db_to_linear(element_gain(model, d.phi))
        })
        .collect())
}

/// Drops UEs per `config` and reports mean spectral efficiency for `weights`.
pub fn evaluate_method(
    label: &str,
    weights: &dyn ArrayWeights,
    geometry: &ArrayGeometry,
    model: &ElementModel,
    config: &SectorConfig,
) -> Result<SeReport> {
    let drops = drop_ues(config)?;
    let gains = drop_gains(weights, geometry, model, &drops)?;
    evaluate_gains(label, &gains, &drops, config, false)
}
