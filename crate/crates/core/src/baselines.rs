//! Reference beamformers: DFT, phase taper and a simplified amplitude taper.
//!
//! All baselines apply the same weights on both polarizations.
//!
//! The amplitude taper is found by alternating projections. The array
//! response is sampled on a uniform `ψ` grid covering one period. Each
//! iteration clamps its magnitude into the admissible band and then keeps
//! the first `M` Fourier coefficients, which is the least-squares return to
//! `M`-tap weights on a uniform grid. Several seeded starts are run, and the
//! in-band result with the lowest peak-to-average power ratio wins.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expansion::WeightPair;
use crate::patterns::ArrayGeometry;
use crate::sequences::ComplexSequence;

/// `w_m = e^{−j(m−1)ψ(φ₀, 90°)}` on both polarizations.
pub fn dft_weights(m: usize, phi0: f64, geometry: &ArrayGeometry) -> Result<WeightPair> {
    if m == 0 {
        return Err(Error::invalid("M must be >= 1"));
    }
    let psi0 = geometry.psi_y(phi0, FRAC_PI_2);
    let w: Vec<f64> = (0..m).map(|i| -(i as f64) * psi0).collect();
    WeightPair::from_phases(&w, &w)
}

/// Dirichlet kernel of an `m`-element DFT beam steered to `phi0`, observed
/// at `(phi, theta)`; its square is the single-polarization array factor.
pub fn dirichlet_kernel(m: usize, dy: f64, phi: f64, phi0: f64, theta: f64) -> f64 {
    let x = PI * dy * (theta.sin() * phi.sin() - phi0.sin());
    let den = x.sin();
    if den.abs() < 1e-12 {
        // limit at multiples of π: ±M, sign of cos(Mx)/cos(x)
        let sign = ((m as f64 * x).cos() / x.cos()).signum();
        return sign * m as f64;
    }
    (m as f64 * x).sin() / den
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTaperParams {
    pub p: u32,
    pub c: f64,
}

/// Broadener phase `f_m = |4πc((2m − M − 1)/(2(M − 1)))^p|` for `m = 1..=M`.
pub fn broadener(m_index: usize, m: usize, params: &PhaseTaperParams) -> f64 {
    let x = (2.0 * m_index as f64 - m as f64 - 1.0) / (2.0 * (m as f64 - 1.0));
    (4.0 * PI * params.c * x.powi(params.p as i32)).abs()
}

/// DFT weights with the broadener phase applied element-wise.
pub fn phase_taper_weights(
    m: usize,
    phi0: f64,
    params: &PhaseTaperParams,
    geometry: &ArrayGeometry,
) -> Result<WeightPair> {
    if m < 2 {
        return Err(Error::invalid("phase taper needs M >= 2"));
    }
    if params.p == 0 || !(params.c >= 0.0) || !params.c.is_finite() {
        return Err(Error::invalid("phase taper needs p >= 1 and c >= 0"));
    }
    let psi0 = geometry.psi_y(phi0, FRAC_PI_2);
    let w: Vec<f64> = (1..=m)
        .map(|i| -((i - 1) as f64) * psi0 + broadener(i, m, params))
        .collect();
    WeightPair::from_phases(&w, &w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeTaperParams {
    /// Ripple tolerance `ζ` of the target `M(1 + ζ cos 2φ)`.
    pub zeta: f64,
    /// Admissible deviation from the target, relative to `M`.
    pub slack: f64,
    /// Projection iterations per start.
    pub max_iterations: usize,
    /// Random starts.
    pub restarts: usize,
    /// `ψ` samples per period, as a multiple of `M`.
    pub oversampling: usize,
    pub seed: u64,
}

impl Default for AmplitudeTaperParams {
    fn default() -> Self {
        Self {
            zeta: 0.01,
            slack: 0.05,
            max_iterations: 500,
            restarts: 50,
            oversampling: 16,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTaperResult {
    pub weights: WeightPair,
    /// Whether every constraint sample lies inside the band.
    pub in_band: bool,
    /// Largest band violation over the constraint grid, relative to `M`.
    pub max_violation: f64,
    /// `M · max|w|² / ‖w‖²` of one polarization.
    pub papr: f64,
}

struct Band {
    /// `e^{jkψ_i}` for every sample `i` and tap `k`, sample-major.
    basis: Vec<Complex64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Projection bounds, pulled inside the band by a margin.
    inner_lo: Vec<f64>,
    inner_hi: Vec<f64>,
    /// Samples outside the visible region carry no constraint.
    active: Vec<bool>,
}

impl Band {
    fn new(m: usize, dy: f64, p: &AmplitudeTaperParams) -> Self {
        let k = p.oversampling * m;
        let mut basis = Vec::with_capacity(k * m);
        let (mut lo, mut hi, mut active) = (vec![0.0; k], vec![f64::INFINITY; k], vec![false; k]);
        for i in 0..k {
            let psi = -PI + TAU * i as f64 / k as f64;
            basis.extend((0..m).map(|t| Complex64::from_polar(1.0, t as f64 * psi)));
            let s = psi / (TAU * dy);
            if s.abs() <= 1.0 {
                let phi = s.asin();
                let target = m as f64 * (1.0 + p.zeta * (2.0 * phi).cos());
                lo[i] = (target - p.slack * m as f64).max(0.0);
                hi[i] = target + p.slack * m as f64;
                active[i] = true;
            }
        }
        let margin = 0.1 * p.slack * m as f64;
        let inner_lo = lo.iter().map(|&l| if l > 0.0 { l + margin } else { l }).collect();
        let inner_hi = hi.iter().map(|&h| h - margin).collect();
        Self {
            basis,
            lo,
            hi,
            inner_lo,
            inner_hi,
            active,
        }
    }

    fn response(&self, w: &[Complex64], i: usize) -> Complex64 {
        let m = w.len();
        self.basis[i * m..(i + 1) * m].iter().zip(w).map(|(b, x)| b * x).sum()
    }

    fn violation(&self, w: &[Complex64]) -> f64 {
        (0..self.lo.len())
            .filter(|&i| self.active[i])
            .map(|i| {
                let p = self.response(w, i).norm_sqr();
                (self.lo[i] - p).max(p - self.hi[i]).max(0.0)
            })
            .fold(0.0, f64::max)
            / (w.len() as f64)
    }

    /// One magnitude projection followed by the return to `M` taps.
    fn project(&self, w: &mut [Complex64]) {
        let m = w.len();
        let k = self.lo.len();
        let mut acc = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..k {
            let mut f = self.response(w, i);
            if self.active[i] {
                let mag = f.norm();
                let clamped = mag.clamp(self.inner_lo[i].sqrt(), self.inner_hi[i].sqrt());
                f = if mag > 0.0 {
                    f * (clamped / mag)
                } else {
                    Complex64::new(clamped, 0.0)
                };
            }
            for (a, b) in acc.iter_mut().zip(&self.basis[i * m..(i + 1) * m]) {
                *a += f * b.conj();
            }
        }
        for (x, a) in w.iter_mut().zip(acc) {
            *x = a / k as f64;
        }
    }
}

fn papr(w: &[Complex64]) -> f64 {
    let peak = w.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let total: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    w.len() as f64 * peak / total
}

/// Simplified amplitude-taper baseline for a horizontal ULA with
/// `d_y ≤ 0.5`, so that the visible region fits in one `ψ` period.
pub fn amplitude_taper_weights(
    m: usize,
    params: &AmplitudeTaperParams,
    geometry: &ArrayGeometry,
) -> Result<AmplitudeTaperResult> {
    if m == 0 {
        return Err(Error::invalid("M must be >= 1"));
    }
    if !(0.0..1.0).contains(&params.zeta) {
        return Err(Error::invalid("zeta must lie in [0, 1)"));
    }
    if !(0.0..=0.05).contains(&params.slack) {
        return Err(Error::invalid("slack must lie in [0, 0.05]"));
    }
    if params.max_iterations == 0 || params.restarts == 0 || params.oversampling < 2 {
        return Err(Error::invalid(
            "amplitude taper needs iterations, restarts >= 1 and oversampling >= 2",
        ));
    }
    if geometry.dy > 0.5 {
        return Err(Error::invalid("amplitude taper supports d_y <= 0.5"));
    }
    let band = Band::new(m, geometry.dy, params);
    let finish = |w: Vec<Complex64>| -> Result<AmplitudeTaperResult> {
        let max_violation = band.violation(&w);
        let papr = papr(&w);
        let seq = ComplexSequence::new(w);
        Ok(AmplitudeTaperResult {
            weights: WeightPair::new(seq.clone(), seq)?,
            in_band: max_violation == 0.0,
            max_violation,
            papr,
        })
    };
    if m == 1 {
        return finish(vec![Complex64::new(1.0, 0.0)]);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    // (violation, papr, weights); in-band candidates compare by PAPR
    let mut best: Option<(f64, f64, Vec<Complex64>)> = None;
    for _ in 0..params.restarts {
        let mut w: Vec<Complex64> = (0..m)
            .map(|_| Complex64::from_polar(1.0, rng.gen::<f64>() * TAU))
            .collect();
        let mut viol = band.violation(&w);
        for _ in 0..params.max_iterations {
            if viol == 0.0 {
                break;
            }
            band.project(&mut w);
            viol = band.violation(&w);
        }
        let cand = (viol, papr(&w), w);
        let better = match &best {
            None => true,
            Some((bv, bp, _)) => (cand.0, cand.1) < (*bv, *bp),
        };
        if better {
            best = Some(cand);
        }
    }
    finish(best.expect("at least one start").2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{array_factor_power, power_utilization, AngleGrid};

    fn ula(m: usize) -> ArrayGeometry {
        ArrayGeometry::ula(m).unwrap()
    }

    #[test]
    fn dft_examples() {
        let w = dft_weights(2, 0.0, &ula(2)).unwrap();
        for z in w.entries() {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
        let g = ula(6);
        let phi0 = 0.3;
        let w = dft_weights(6, phi0, &g).unwrap();
        let grid = AngleGrid::new(vec![phi0], vec![FRAC_PI_2]).unwrap();
        let p = array_factor_power(&w, &g, &grid).unwrap();
        assert!((p.values()[0] - 72.0).abs() < 1e-9);
        assert_eq!(power_utilization(&w).unwrap(), 1.0);
    }

    #[test]
    fn dirichlet_examples() {
        assert!((dirichlet_kernel(5, 0.5, 0.2, 0.2, FRAC_PI_2) - 5.0).abs() < 1e-12);
        assert!(dirichlet_kernel(2, 0.5, FRAC_PI_2, 0.0, FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_matches_single_pol_af() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let m = rng.gen_range(1..12);
            let g = ula(m);
            let phi0 = rng.gen_range(-1.2..1.2);
            let (phi, theta) = (rng.gen_range(-1.5..1.5), rng.gen_range(0.1..3.0));
            let w = dft_weights(m, phi0, &g).unwrap();
            let a = crate::patterns::steering_vector(&g, phi, theta);
            let resp: Complex64 = w.a().iter().zip(a.iter()).map(|(x, y)| x * y).sum();
            let d = dirichlet_kernel(m, 0.5, phi, phi0, theta);
            assert!((d * d - resp.norm_sqr()).abs() < 1e-9);
        }
    }

    #[test]
    fn broadener_examples() {
        let p = PhaseTaperParams { p: 3, c: 24.0 };
        assert!((broadener(1, 8, &p) - 12.0 * PI).abs() < 1e-12);
        for m in 2..12 {
            for i in 1..=m {
                assert!((broadener(i, m, &p) - broadener(m + 1 - i, m, &p)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn phase_taper() {
        let g = ula(7);
        let zero = PhaseTaperParams { p: 3, c: 0.0 };
        let a = phase_taper_weights(7, 0.1, &zero, &g).unwrap();
        let b = dft_weights(7, 0.1, &g).unwrap();
        for (x, y) in a.entries().zip(b.entries()) {
            assert!((x - y).norm() < 1e-12);
        }
        let w = phase_taper_weights(7, 0.0, &PhaseTaperParams { p: 3, c: 24.0 }, &g).unwrap();
        assert_eq!(power_utilization(&w).unwrap(), 1.0);
        assert!(phase_taper_weights(1, 0.0, &zero, &ula(1)).is_err());
        assert!(phase_taper_weights(3, 0.0, &PhaseTaperParams { p: 0, c: 1.0 }, &ula(3)).is_err());
    }

    #[test]
    fn amplitude_taper_single_element() {
        let r = amplitude_taper_weights(1, &AmplitudeTaperParams::default(), &ula(1)).unwrap();
        assert_eq!(r.weights.a().as_slice(), &[Complex64::new(1.0, 0.0)]);
        assert!(r.in_band);
    }

    #[test]
    fn amplitude_taper_m7() {
        let g = ula(7);
        let r = amplitude_taper_weights(7, &AmplitudeTaperParams::default(), &g).unwrap();
        assert!(r.in_band, "violation {}", r.max_violation);
        let u = power_utilization(&r.weights).unwrap();
        assert!(u < 1.0);
        assert!((1.0 / r.papr - u).abs() < 1e-12);
        // the uniform φ cut stays close to the band too
        let p = array_factor_power(&r.weights, &g, &AngleGrid::ula_default()).unwrap();
        for (phi, _, v) in p.samples() {
            // both polarizations carry the same weights
            let target = 2.0 * 7.0 * (1.0 + 0.01 * (2.0 * phi).cos());
            assert!((v - target).abs() <= 2.0 * 7.0 * 0.08, "{phi} {v}");
        }
    }

    #[test]
    fn amplitude_taper_is_deterministic_and_validates() {
        let g = ula(5);
        let p = AmplitudeTaperParams::default();
        assert_eq!(
            amplitude_taper_weights(5, &p, &g).unwrap(),
            amplitude_taper_weights(5, &p, &g).unwrap()
        );
        let bad = AmplitudeTaperParams { zeta: 1.0, ..p };
        assert!(amplitude_taper_weights(5, &bad, &g).is_err());
        let wide = ArrayGeometry::new(5, 1, 0.7, 0.5).unwrap();
        assert!(amplitude_taper_weights(5, &p, &wide).is_err());
    }
}
