//! Sequence and array types, aperiodic autocorrelation in one and two
//! dimensions, and complementarity predicates.
//!
//! Lags are signed. A length-`M` sequence has lags `-(M-1)..=(M-1)` and
//! `R(τ) = Σ_m u[m] · conj(u[m+τ])` over every index where both factors
//! exist. The 2D function uses the same convention on both axes.
//!
//! Everything here is computed by direct summation. The sizes of interest
//! (a few thousand elements at most) do not justify an FFT path, and the
//! direct sum is bit-for-bit reproducible.

use std::f64::consts::TAU;
use std::ops::Index;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default tolerance for "exact" complementarity checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Tolerance for unimodularity checks.
pub const UNIMODULAR_TOLERANCE: f64 = 1e-12;

/// Phases (radians) of an ε-complementary pair of length 7 found at a
/// sidelobe tolerance of 1 % of the sum-AACF mainlobe, rounded to two
/// decimals. Polarization A.
pub const EPS_PAIR_M7_A: [f64; 7] = [0.0, 0.97, 1.83, 4.98, 0.16, 3.34, 1.20];
/// Polarization B of [`EPS_PAIR_M7_A`].
pub const EPS_PAIR_M7_B: [f64; 7] = [0.0, 1.75, 0.86, 2.21, 1.12, 5.75, 4.41];

/// Maps any finite angle into `[0, 2π)`.
pub fn canonical_phase(phase: f64) -> f64 {
    let p = phase.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if p >= TAU {
        0.0
    } else {
        p
    }
}

/// Excitation phases in radians, canonicalized into `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    phases: Vec<f64>,
}

impl PhaseVector {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::invalid("phase vector must not be empty"));
        }
        if let Some(i) = phases.iter().position(|p| !p.is_finite()) {
            return Err(Error::invalid(format!("phase {i} is not finite")));
        }
        Ok(Self {
            phases: phases.into_iter().map(canonical_phase).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.phases
    }

    /// The unimodular weights `exp(j·phase)`.
    pub fn to_sequence(&self) -> ComplexSequence {
        ComplexSequence::from_phases(&self.phases)
    }
}

/// A finite complex sequence, e.g. the per-polarization weights of a ULA.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSequence(Vec<Complex64>);

impl ComplexSequence {
    pub fn new(entries: Vec<Complex64>) -> Self {
        Self(entries)
    }

    pub fn from_phases(phases: &[f64]) -> Self {
        Self(phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect())
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    /// Canonical phases of the entries.
    pub fn phases(&self) -> Vec<f64> {
        self.0.iter().map(|z| canonical_phase(z.arg())).collect()
    }

    pub fn is_unimodular(&self, tol: f64) -> bool {
        self.0.iter().all(|z| (z.norm() - 1.0).abs() <= tol)
    }

    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(|z| z.conj()).collect())
    }

    /// Index reversal, i.e. multiplication by the exchange matrix.
    pub fn reversed(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self(self.0.iter().map(|z| z * c).collect())
    }

    pub fn concat(&self, other: &Self) -> Self {
        Self(self.0.iter().chain(other.0.iter()).copied().collect())
    }
}

impl Index<usize> for ComplexSequence {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl From<Vec<Complex64>> for ComplexSequence {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

/// An `N × M` complex matrix stored row-major. Row index `n` runs along the
/// vertical (z) axis, column index `m` along the horizontal (y) axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexArray2d {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexArray2d {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::shape(
                format!("{} entries for {rows}x{cols}", rows * cols),
                data.len(),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for n in 0..rows {
            for m in 0..cols {
                data.push(f(n, m));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged rows"));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Row-major phases to unimodular entries.
    pub fn from_phases(rows: usize, cols: usize, phases: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect(),
        )
    }

    /// A `1 × M` array holding `seq` as its only row.
    pub fn row_vector(seq: &ComplexSequence) -> Self {
        Self {
            rows: 1,
            cols: seq.len(),
            data: seq.as_slice().to_vec(),
        }
    }

    /// An `N × 1` array holding `seq` as its only column.
    pub fn column_vector(seq: &ComplexSequence) -> Self {
        Self {
            rows: seq.len(),
            cols: 1,
            data: seq.as_slice().to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.data[n * self.cols + m]
    }

    pub fn row(&self, n: usize) -> &[Complex64] {
        &self.data[n * self.cols..(n + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Canonical phases, row-major.
    pub fn phases(&self) -> Vec<f64> {
        self.data.iter().map(|z| canonical_phase(z.arg())).collect()
    }

    /// Column-stacking vectorization.
    pub fn vec_col_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.data.len());
        for m in 0..self.cols {
            for n in 0..self.rows {
                out.push(self.get(n, m));
            }
        }
        out
    }

    /// Inverse of [`vec_col_major`](Self::vec_col_major).
    pub fn from_col_major(rows: usize, cols: usize, v: &[Complex64]) -> Result<Self> {
        if rows * cols != v.len() {
            return Err(Error::shape(rows * cols, v.len()));
        }
        Ok(Self::from_fn(rows, cols, |n, m| v[m * rows + n]))
    }

    pub fn is_unimodular(&self, tol: f64) -> bool {
        self.data.iter().all(|z| (z.norm() - 1.0).abs() <= tol)
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    /// `E_N · X · E_M`: reverses both axes.
    pub fn rotated_180(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |n, m| {
            self.get(self.rows - 1 - n, self.cols - 1 - m)
        })
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |n, m| self.get(m, n))
    }

    /// Stacks `self` above `below`.
    pub fn vstack(&self, below: &Self) -> Result<Self> {
        if self.cols != below.cols {
            return Err(Error::shape(
                format!("{} columns", self.cols),
                format!("{} columns", below.cols),
            ));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&below.data);
        Self::new(self.rows + below.rows, self.cols, data)
    }

    /// Places `right` to the right of `self`.
    pub fn hstack(&self, right: &Self) -> Result<Self> {
        if self.rows != right.rows {
            return Err(Error::shape(
                format!("{} rows", self.rows),
                format!("{} rows", right.rows),
            ));
        }
        Ok(Self::from_fn(self.rows, self.cols + right.cols, |n, m| {
            if m < self.cols {
                self.get(n, m)
            } else {
                right.get(n, m - self.cols)
            }
        }))
    }

    /// Kronecker product with `self` as the outer factor:
    /// `out[(l·N + n, k·M + m)] = self[l, k] · inner[n, m]`.
    pub fn kron(&self, inner: &Self) -> Self {
        let (nr, nc) = inner.shape();
        Self::from_fn(self.rows * nr, self.cols * nc, |r, c| {
            self.get(r / nr, c / nc) * inner.get(r % nr, c % nc)
        })
    }
}

/// Aperiodic autocorrelation of a length-`M` sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Aacf {
    len: usize,
    values: Vec<Complex64>,
}

impl Aacf {
    /// Sequence length `M`; lags run over `-(M-1)..=(M-1)`.
    pub fn sequence_len(&self) -> usize {
        self.len
    }

    pub fn max_lag(&self) -> isize {
        self.len as isize - 1
    }

    /// Value at `lag`; zero outside `(-M, M)`.
    pub fn at(&self, lag: isize) -> Complex64 {
        if lag.unsigned_abs() >= self.len {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[(lag + self.max_lag()) as usize]
        }
    }

    /// All values in lag order, starting at `-(M-1)`.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn lags(&self) -> impl Iterator<Item = isize> {
        -self.max_lag()..=self.max_lag()
    }

    /// Largest magnitude over nonzero lags; zero for `M = 1`.
    pub fn max_sidelobe(&self) -> f64 {
        self.lags()
            .filter(|&t| t != 0)
            .map(|t| self.at(t).norm())
            .fold(0.0, f64::max)
    }
}

/// Two-dimensional aperiodic autocorrelation of an `N × M` array, indexed by
/// `(τ_n, τ_m)` with `τ_n ∈ (-N, N)` and `τ_m ∈ (-M, M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Aacf2d {
    rows: usize,
    cols: usize,
    values: Vec<Complex64>,
}

impl Aacf2d {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn at(&self, tn: isize, tm: isize) -> Complex64 {
        if tn.unsigned_abs() >= self.rows || tm.unsigned_abs() >= self.cols {
            return Complex64::new(0.0, 0.0);
        }
        let width = 2 * self.cols - 1;
        let i = (tn + self.rows as isize - 1) as usize;
        let j = (tm + self.cols as isize - 1) as usize;
        self.values[i * width + j]
    }

    pub fn lags(&self) -> impl Iterator<Item = (isize, isize)> {
        let (n, m) = (self.rows as isize, self.cols as isize);
        (-(n - 1)..n).flat_map(move |a| (-(m - 1)..m).map(move |b| (a, b)))
    }

    /// Largest magnitude over `(τ_n, τ_m) ≠ (0, 0)`.
    pub fn max_sidelobe(&self) -> f64 {
        self.lags()
            .filter(|&l| l != (0, 0))
            .map(|(a, b)| self.at(a, b).norm())
            .fold(0.0, f64::max)
    }
}

pub fn aacf(u: &ComplexSequence) -> Result<Aacf> {
    let m = u.len();
    if m == 0 {
        return Err(Error::invalid("AACF of an empty sequence"));
    }
    let x = u.as_slice();
    let max_lag = m as isize - 1;
    let values = (-max_lag..=max_lag)
        .map(|tau| {
            let shift = tau.unsigned_abs();
            if tau >= 0 {
                (0..m - shift).map(|i| x[i] * x[i + shift].conj()).sum()
            } else {
                (0..m - shift).map(|i| x[i + shift] * x[i].conj()).sum()
            }
        })
        .collect();
    Ok(Aacf { len: m, values })
}

pub fn aacf2d(u: &ComplexArray2d) -> Result<Aacf2d> {
    let (rows, cols) = u.shape();
    if u.is_empty() {
        return Err(Error::invalid("AACF of an empty array"));
    }
    let (nr, nc) = (rows as isize, cols as isize);
    let mut values = Vec::with_capacity((2 * rows - 1) * (2 * cols - 1));
    for tn in -(nr - 1)..nr {
        for tm in -(nc - 1)..nc {
            let mut acc = Complex64::new(0.0, 0.0);
            // rows n with 0 <= n, n + tn < N
            let n_lo = (-tn).max(0);
            let n_hi = (nr - tn).min(nr);
            let m_lo = (-tm).max(0);
            let m_hi = (nc - tm).min(nc);
            for n in n_lo..n_hi {
                for m in m_lo..m_hi {
                    acc += u.get(n as usize, m as usize)
                        * u.get((n + tn) as usize, (m + tm) as usize).conj();
                }
            }
            values.push(acc);
        }
    }
    Ok(Aacf2d { rows, cols, values })
}

fn check_same_len(u: &ComplexSequence, v: &ComplexSequence) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::shape(
            format!("length {}", u.len()),
            format!("length {}", v.len()),
        ));
    }
    Ok(())
}

fn check_same_shape(u: &ComplexArray2d, v: &ComplexArray2d) -> Result<()> {
    if u.shape() != v.shape() {
        return Err(Error::shape(
            format!("{:?}", u.shape()),
            format!("{:?}", v.shape()),
        ));
    }
    Ok(())
}

/// `R_u + R_v`, lag by lag.
pub fn sum_aacf(u: &ComplexSequence, v: &ComplexSequence) -> Result<Aacf> {
    check_same_len(u, v)?;
    let ru = aacf(u)?;
    let rv = aacf(v)?;
    Ok(Aacf {
        len: ru.len,
        values: ru.values.iter().zip(&rv.values).map(|(a, b)| a + b).collect(),
    })
}

pub fn sum_aacf2d(u: &ComplexArray2d, v: &ComplexArray2d) -> Result<Aacf2d> {
    check_same_shape(u, v)?;
    let ru = aacf2d(u)?;
    let rv = aacf2d(v)?;
    Ok(Aacf2d {
        rows: ru.rows,
        cols: ru.cols,
        values: ru.values.iter().zip(&rv.values).map(|(a, b)| a + b).collect(),
    })
}

/// Largest sum-AACF magnitude over nonzero lags.
pub fn max_sidelobe(u: &ComplexSequence, v: &ComplexSequence) -> Result<f64> {
    Ok(sum_aacf(u, v)?.max_sidelobe())
}

pub fn max_sidelobe2d(u: &ComplexArray2d, v: &ComplexArray2d) -> Result<f64> {
    Ok(sum_aacf2d(u, v)?.max_sidelobe())
}

/// Golay complementarity up to a numerical tolerance `tol`.
pub fn is_golay_pair(u: &ComplexSequence, v: &ComplexSequence, tol: f64) -> Result<bool> {
    check_tolerance(tol)?;
    Ok(max_sidelobe(u, v)? <= tol)
}

pub fn is_golay_array_pair(u: &ComplexArray2d, v: &ComplexArray2d, tol: f64) -> Result<bool> {
    check_tolerance(tol)?;
    Ok(max_sidelobe2d(u, v)? <= tol)
}

/// Every nonzero-lag sum-AACF magnitude is at most `eps`.
pub fn is_eps_complementary(u: &ComplexSequence, v: &ComplexSequence, eps: f64) -> Result<bool> {
    check_tolerance(eps)?;
    Ok(max_sidelobe(u, v)? <= eps)
}

pub fn is_eps_complementary_array(
    u: &ComplexArray2d,
    v: &ComplexArray2d,
    eps: f64,
) -> Result<bool> {
    check_tolerance(eps)?;
    Ok(max_sidelobe2d(u, v)? <= eps)
}

fn check_tolerance(tol: f64) -> Result<()> {
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::invalid(format!("tolerance must be >= 0, got {tol}")));
    }
    Ok(())
}

/// Bound on `max_ψ |S_u(ψ) + S_v(ψ) − 2M|` for a pair of length `m` whose
/// sum-AACF sidelobes are at most `sidelobe`: one term per nonzero lag.
pub fn ripple_bound(m: usize, sidelobe: f64) -> f64 {
    2.0 * (m.saturating_sub(1)) as f64 * sidelobe
}

/// 2D analogue of [`ripple_bound`] for an `n × m` array pair.
pub fn ripple_bound2d(n: usize, m: usize, sidelobe: f64) -> f64 {
    ((2 * n - 1) * (2 * m - 1) - 1) as f64 * sidelobe
}

/// `|Σ_m u[m] e^{jmψ}|²`, the power spectrum of `u` at normalized frequency ψ.
pub fn power_spectrum(u: &ComplexSequence, psi: f64) -> f64 {
    u.iter()
        .enumerate()
        .map(|(m, z)| z * Complex64::from_polar(1.0, m as f64 * psi))
        .sum::<Complex64>()
        .norm_sqr()
}

const KERNEL_10_A: [f64; 10] = [1., 1., -1., 1., -1., 1., -1., -1., 1., 1.];
const KERNEL_10_B: [f64; 10] = [1., 1., -1., 1., 1., 1., 1., 1., -1., -1.];
const KERNEL_26_A: [f64; 26] = [
    1., 1., 1., 1., -1., 1., 1., -1., -1., 1., -1., 1., -1., 1., -1., -1., 1., -1., 1., 1., 1.,
    -1., -1., 1., 1., 1.,
];
const KERNEL_26_B: [f64; 26] = [
    1., 1., 1., 1., -1., 1., 1., -1., -1., 1., -1., 1., 1., 1., 1., 1., -1., 1., -1., -1., -1.,
    1., 1., -1., -1., -1.,
];

/// Lengths served by [`golay_kernel`].
pub const KERNEL_LENGTHS: [usize; 4] = [1, 2, 10, 26];

/// A binary Golay pair of the given kernel length.
pub fn golay_kernel(length: usize) -> Result<(ComplexSequence, ComplexSequence)> {
    let (a, b): (&[f64], &[f64]) = match length {
        1 => (&[1.0], &[1.0]),
        2 => (&[1.0, 1.0], &[1.0, -1.0]),
        10 => (&KERNEL_10_A, &KERNEL_10_B),
        26 => (&KERNEL_26_A, &KERNEL_26_B),
        _ => {
            return Err(Error::NotAvailable {
                what: format!("binary Golay kernel of length {length}"),
                supported: "1, 2, 10, 26".into(),
            })
        }
    };
    Ok((ComplexSequence::from_real(a), ComplexSequence::from_real(b)))
}

/// Whether a quaternary Golay pair of length `m` is known, i.e. whether
/// `m = 2^(a+f) 3^b 5^c 11^d 13^e` with `f <= c+e` and
/// `b+c+d+e <= a+2f+1` for nonnegative integers.
pub fn is_known_golay_length(m: usize) -> bool {
    if m == 0 {
        return false;
    }
    let mut rest = m;
    let mut exps = [0u32; 5];
    for (slot, p) in exps.iter_mut().zip([2usize, 3, 5, 11, 13]) {
        while rest % p == 0 {
            rest /= p;
            *slot += 1;
        }
    }
    if rest != 1 {
        return false;
    }
    let [twos, b, c, d, e] = exps;
    // Taking f as large as allowed only loosens the second constraint.
    let f = twos.min(c + e);
    b + c + d + e <= twos + f + 1
}
