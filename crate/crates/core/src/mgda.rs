//! Modified Great Deluge search for ε-complementary sequence and array pairs.
//!
//! The state is the stacked phase vector `φ = [vec(φ_U); vec(φ_V)]` where
//! `vec` stacks columns, so a length-`M` sequence pair is the `N = 1` case.
//! The utility is `U(φ) = -max |R_U(τ) + R_V(τ)|` over nonzero lags; the
//! search stops once `-U(φ) <= ε`.
//!
//! Each sweep visits every coordinate once. A coordinate tries a forward and
//! a backward step of its own size `Δφ_i`; a step is accepted when the new
//! utility is at or above the water level `λ`, otherwise the step shrinks by
//! `α` for the next sweep. After the sweep `λ` rises by `V`, but never above
//! the current utility, so the search can keep zooming in below the rain
//! intensity. A sweep whose final utility falls short of the raised level is
//! unsuccessful; after `d_max` of them in a row the state jumps to a fresh
//! random neighborhood and `λ` is reset.
//!
//! Candidate utilities are evaluated incrementally: changing one entry moves
//! every lag of the sum-AACF by at most two terms, so a trial costs one pass
//! over the lag set instead of a full autocorrelation. The running sum is
//! recomputed from scratch at the start of every sweep and before any result
//! is declared converged.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sequences::{
    canonical_phase, max_sidelobe2d, ComplexArray2d, ComplexSequence,
};

/// Search parameters. `tolerance` is in absolute sum-AACF units.
#[derive(Debug, Clone, PartialEq)]
pub struct MgdaConfig {
    /// Rain intensity `V`: water-level increase per sweep.
    pub rain_intensity: f64,
    /// Step scaling factor `α` in `(0, 1]`.
    pub scale_factor: f64,
    /// Target maximum sidelobe `ε`.
    pub tolerance: f64,
    /// Consecutive sweeps that end below the raised water level before a
    /// global jump.
    pub d_max: u32,
    pub seed: u64,
    /// Budget of utility evaluations for one run.
    pub max_iterations: u64,
    /// Coordinates whose step falls below this are frozen until the next jump.
    pub step_floor: f64,
    /// Hold the first phase of `U` at zero (global phase gauge).
    pub pin_first: bool,
}

impl MgdaConfig {
    /// Defaults for an `n × m` pair: `V = 0.002·nm`, `α = 0.95`,
    /// `d_max = 50`, `δ_min = 1e-7`, `10⁶` evaluations.
    pub fn new(n: usize, m: usize, tolerance: f64) -> Self {
        Self {
            rain_intensity: 0.002 * (n * m) as f64,
            scale_factor: 0.95,
            tolerance,
            d_max: 50,
            seed: 0,
            max_iterations: 1_000_000,
            step_floor: 1e-7,
            pin_first: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.rain_intensity) {
            return Err(Error::invalid("rain intensity must be > 0"));
        }
        if !(self.scale_factor > 0.0 && self.scale_factor <= 1.0) {
            return Err(Error::invalid("scale factor must lie in (0, 1]"));
        }
        if !positive(self.tolerance) {
            return Err(Error::invalid("tolerance must be > 0"));
        }
        if self.d_max == 0 {
            return Err(Error::invalid("d_max must be >= 1"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be >= 1"));
        }
        if !positive(self.step_floor) {
            return Err(Error::invalid("step floor must be > 0"));
        }
        Ok(())
    }
}

/// `pct` percent of the sum-AACF mainlobe `2nm`.
pub fn tolerance_from_percent(n: usize, m: usize, pct: f64) -> f64 {
    pct / 100.0 * 2.0 * (n * m) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct MgdaResult {
    /// Stacked phases `[vec(φ_U); vec(φ_V)]`, columns stacked.
    pub phases: Vec<f64>,
    /// Array shape `(N, M)`; `N = 1` for sequences.
    pub shape: (usize, usize),
    /// Max sum-AACF sidelobe of the returned pair, recomputed directly.
    pub achieved_sidelobe: f64,
    /// Utility evaluations spent, summed over restarts.
    pub iterations: u64,
    /// Number of restarts before the returned run.
    pub restarts: u32,
    pub converged: bool,
}

impl MgdaResult {
    fn half(&self, which: usize) -> Vec<f64> {
        let (n, m) = self.shape;
        let k = n * m;
        let col_major = &self.phases[which * k..(which + 1) * k];
        let mut out = vec![0.0; k];
        for c in 0..m {
            for r in 0..n {
                out[r * m + c] = col_major[c * n + r];
            }
        }
        out
    }

    /// Phases of `U`, row-major.
    pub fn phases_a(&self) -> Vec<f64> {
        self.half(0)
    }

    /// Phases of `V`, row-major.
    pub fn phases_b(&self) -> Vec<f64> {
        self.half(1)
    }

    pub fn sequence_pair(&self) -> (ComplexSequence, ComplexSequence) {
        (
            ComplexSequence::from_phases(&self.phases_a()),
            ComplexSequence::from_phases(&self.phases_b()),
        )
    }

    pub fn array_pair(&self) -> (ComplexArray2d, ComplexArray2d) {
        let (n, m) = self.shape;
        (
            ComplexArray2d::from_phases(n, m, &self.phases_a()).expect("shape"),
            ComplexArray2d::from_phases(n, m, &self.phases_b()).expect("shape"),
        )
    }
}

/// Observable steps of a run, for diagnostics and tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MgdaEvent {
    Accepted { utility: f64, water_level: f64 },
    Flood { water_level: f64 },
    Jump { utility: f64 },
}

fn decode(n: usize, m: usize, phases: &[f64]) -> Result<(ComplexArray2d, ComplexArray2d)> {
    let k = n * m;
    if n == 0 || m == 0 {
        return Err(Error::invalid("array dimensions must be >= 1"));
    }
    if phases.len() != 2 * k {
        return Err(Error::shape(
            format!("{} stacked phases for {n}x{m}", 2 * k),
            phases.len(),
        ));
    }
    let to_array = |p: &[f64]| {
        let z: Vec<Complex64> = p.iter().map(|&x| Complex64::from_polar(1.0, x)).collect();
        ComplexArray2d::from_col_major(n, m, &z)
    };
    Ok((to_array(&phases[..k])?, to_array(&phases[k..])?))
}

/// `U(φ)` for a stacked phase vector of an `n × m` pair.
pub fn utility(phases: &[f64], shape: (usize, usize)) -> Result<f64> {
    let (u, v) = decode(shape.0, shape.1, phases)?;
    Ok(-max_sidelobe2d(&u, &v)?)
}

/// `U(φ)` for a stacked `[φ_u; φ_v]` sequence pair.
pub fn utility_1d(phases: &[f64]) -> Result<f64> {
    if phases.len() % 2 != 0 {
        return Err(Error::invalid("stacked phase vector must have even length"));
    }
    utility(phases, (1, phases.len() / 2))
}

struct Engine {
    n: usize,
    m: usize,
    k: usize,
    /// Half-plane of nonzero lags; the other half is conjugate-symmetric.
    lags: Vec<(isize, isize)>,
    /// Row-major entries of `U` and `V`.
    x: [Vec<Complex64>; 2],
    /// Stacked phases, columns stacked.
    phases: Vec<f64>,
    sum: Vec<Complex64>,
    delta: Vec<Complex64>,
    evals: u64,
}

impl Engine {
    fn new(n: usize, m: usize, phases: Vec<f64>) -> Self {
        let (nr, nc) = (n as isize, m as isize);
        let mut lags: Vec<(isize, isize)> = (1..nc).map(|b| (0, b)).collect();
        for a in 1..nr {
            for b in -(nc - 1)..nc {
                lags.push((a, b));
            }
        }
        let k = n * m;
        let len = lags.len();
        let mut e = Self {
            n,
            m,
            k,
            lags,
            x: [vec![Complex64::new(0.0, 0.0); k], vec![Complex64::new(0.0, 0.0); k]],
            phases,
            sum: vec![Complex64::new(0.0, 0.0); len],
            delta: vec![Complex64::new(0.0, 0.0); len],
            evals: 0,
        };
        e.reload();
        e
    }

    /// (array, row, col) of stacked coordinate `i`.
    fn locate(&self, i: usize) -> (usize, usize, usize) {
        let j = i % self.k;
        (i / self.k, j % self.n, j / self.n)
    }

    fn reload(&mut self) {
        for i in 0..2 * self.k {
            let (p, r, c) = self.locate(i);
            self.x[p][r * self.m + c] = Complex64::from_polar(1.0, self.phases[i]);
        }
        self.recompute();
    }

    /// Exact sum-AACF over the lag set.
    fn recompute(&mut self) {
        let (n, m) = (self.n as isize, self.m as isize);
        for (s, &(tn, tm)) in self.sum.iter_mut().zip(&self.lags) {
            let mut acc = Complex64::new(0.0, 0.0);
            for x in &self.x {
                for r in 0..n - tn {
                    for c in (-tm).max(0)..(m - tm).min(m) {
                        acc += x[(r * m + c) as usize] * x[((r + tn) * m + c + tm) as usize].conj();
                    }
                }
            }
            *s = acc;
        }
        self.evals += 1;
    }

    fn max_sidelobe(&self) -> f64 {
        self.sum.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max).sqrt()
    }

    /// Utility after setting coordinate `i` to `phase`, or `None` as soon as
    /// some lag exceeds `limit` in magnitude. Fills `delta` for `commit`.
    fn trial(&mut self, i: usize, phase: f64, limit: f64) -> Option<f64> {
        self.evals += 1;
        if limit < 0.0 {
            return None;
        }
        let (p, a, b) = self.locate(i);
        let (n, m) = (self.n as isize, self.m as isize);
        let (a, b) = (a as isize, b as isize);
        let x = &self.x[p];
        let d = Complex64::from_polar(1.0, phase) - x[(a * m + b) as usize];
        let dc = d.conj();
        let limit_sq = limit * limit;
        let mut worst = 0.0f64;
        for ((&(tn, tm), s), out) in self.lags.iter().zip(&self.sum).zip(self.delta.iter_mut()) {
            let mut dr = Complex64::new(0.0, 0.0);
            let (r, c) = (a + tn, b + tm);
            if r < n && (0..m).contains(&c) {
                dr += d * x[(r * m + c) as usize].conj();
            }
            let (r, c) = (a - tn, b - tm);
            if r >= 0 && (0..m).contains(&c) {
                dr += x[(r * m + c) as usize] * dc;
            }
            *out = dr;
            let mag = (s + dr).norm_sqr();
            if mag > limit_sq {
                return None;
            }
            worst = worst.max(mag);
        }
        Some(-worst.sqrt())
    }

    fn commit(&mut self, i: usize, phase: f64) {
        for (s, d) in self.sum.iter_mut().zip(&self.delta) {
            *s += d;
        }
        let (p, r, c) = self.locate(i);
        self.phases[i] = canonical_phase(phase);
        self.x[p][r * self.m + c] = Complex64::from_polar(1.0, self.phases[i]);
    }
}

/// Searches for an ε-complementary sequence pair of length `m`.
pub fn search(m: usize, config: &MgdaConfig) -> Result<MgdaResult> {
    search2d(1, m, config)
}

/// Searches for an ε-complementary `n × m` array pair.
pub fn search2d(n: usize, m: usize, config: &MgdaConfig) -> Result<MgdaResult> {
    search2d_observed(n, m, config, &mut |_| {})
}

/// [`search2d`] reporting every acceptance, flood and jump to `observer`.
pub fn search2d_observed(
    n: usize,
    m: usize,
    config: &MgdaConfig,
    observer: &mut dyn FnMut(MgdaEvent),
) -> Result<MgdaResult> {
    config.validate()?;
    if n == 0 || m == 0 {
        return Err(Error::invalid("array dimensions must be >= 1"));
    }
    let k = n * m;
    let dim = 2 * k;
    let eps = config.tolerance;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let first = usize::from(config.pin_first);

    let mut phases: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() * TAU).collect();
    let mut steps: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() * TAU).collect();
    if config.pin_first {
        phases[0] = 0.0;
    }
    let mut engine = Engine::new(n, m, phases);
    let mut current = -engine.max_sidelobe();
    let mut level = current;
    let mut unsuccessful = 0u32;
    let mut best = (current, engine.phases.clone());
    let mut converged = -current <= eps;

    'outer: while !converged && engine.evals < config.max_iterations {
        engine.recompute();
        current = -engine.max_sidelobe();
        for i in first..dim {
            if steps[i] < config.step_floor {
                continue;
            }
            if engine.evals >= config.max_iterations {
                break;
            }
            let here = engine.phases[i];
            let accepted = [here + steps[i], here - steps[i]]
                .into_iter()
                .find_map(|p| engine.trial(i, p, -level).map(|u| (p, u)));
            if accepted.is_none() {
                steps[i] *= config.scale_factor;
            }
            let Some((phase, u)) = accepted else {
                continue;
            };
            engine.commit(i, phase);
            current = u;
            observer(MgdaEvent::Accepted {
                utility: u,
                water_level: level,
            });
            if current > best.0 {
                best = (current, engine.phases.clone());
            }
            if -current <= eps {
                engine.recompute();
                current = -engine.max_sidelobe();
                if -current <= eps {
                    best = (current, engine.phases.clone());
                    break 'outer;
                }
            }
        }

        let raised = level + config.rain_intensity;
        let kept_up = current >= raised;
        level = raised.min(current);
        observer(MgdaEvent::Flood { water_level: level });
        if kept_up {
            unsuccessful = 0;
        } else {
            unsuccessful += 1;
        }
        if unsuccessful >= config.d_max {
            for i in 0..dim {
                steps[i] = rng.gen::<f64>() * TAU;
                if i >= first {
                    engine.phases[i] = canonical_phase(engine.phases[i] + steps[i]);
                }
            }
            engine.reload();
            current = -engine.max_sidelobe();
            level = current;
            unsuccessful = 0;
            observer(MgdaEvent::Jump { utility: current });
            if current > best.0 {
                best = (current, engine.phases.clone());
            }
            converged = -current <= eps;
        }
    }

    let phases = best.1;
    let achieved_sidelobe = -utility(&phases, (n, m))?;
    Ok(MgdaResult {
        converged: achieved_sidelobe <= eps,
        phases,
        shape: (n, m),
        achieved_sidelobe,
        iterations: engine.evals,
        restarts: 0,
    })
}

/// Runs [`search`] with seeds `seed, seed+1, …` and returns the first
/// converged run, or the best one.
pub fn search_with_restarts(m: usize, config: &MgdaConfig, max_restarts: u32) -> Result<MgdaResult> {
    search2d_with_restarts(1, m, config, max_restarts)
}

pub fn search2d_with_restarts(
    n: usize,
    m: usize,
    config: &MgdaConfig,
    max_restarts: u32,
) -> Result<MgdaResult> {
    if max_restarts == 0 {
        return Err(Error::invalid("max_restarts must be >= 1"));
    }
    let mut total = 0u64;
    let mut best: Option<MgdaResult> = None;
    for r in 0..max_restarts {
        let cfg = config.clone().with_seed(config.seed.wrapping_add(r as u64));
        let mut res = search2d(n, m, &cfg)?;
        total += res.iterations;
        res.iterations = total;
        res.restarts = r;
        if res.converged {
            return Ok(res);
        }
        if best
            .as_ref()
            .map_or(true, |b| res.achieved_sidelobe < b.achieved_sidelobe)
        {
            best = Some(res);
        }
    }
    let mut best = best.expect("at least one run");
    best.iterations = total;
    Ok(best)
}
