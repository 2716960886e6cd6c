//! Pattern-preserving array enlargement.
//!
//! Every construction here pairs a block built from the prototype weights
//! with a block built from their conjugated, index-reversed counterparts.
//! The two blocks radiate orthogonal fields, so their power patterns add:
//! the expanded power pattern is the prototype pattern scaled by the
//! expanders' power spectrum, which is flat for Golay expanders.
//!
//! Kronecker products use `out[(l·N + n, k·M + m)] = U[l, k] · W[n, m]`; for
//! sequences `(u ⊗ w)[i·M + m] = u[i] · w[m]`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sequences::{max_sidelobe, max_sidelobe2d, ComplexArray2d, ComplexSequence};

/// Tolerance for accepting expander entries as unit-modulus.
pub const EXPANDER_TOLERANCE: f64 = 1e-9;

/// Dual-polarized weights of a ULA.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightPair {
    a: ComplexSequence,
    b: ComplexSequence,
}

impl WeightPair {
    pub fn new(a: ComplexSequence, b: ComplexSequence) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::shape(
                format!("two nonempty sequences of equal length ({})", a.len()),
                b.len(),
            ));
        }
        Ok(Self { a, b })
    }

    pub fn from_phases(a: &[f64], b: &[f64]) -> Result<Self> {
        Self::new(ComplexSequence::from_phases(a), ComplexSequence::from_phases(b))
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn a(&self) -> &ComplexSequence {
        &self.a
    }

    pub fn b(&self) -> &ComplexSequence {
        &self.b
    }

    pub fn is_unimodular(&self, tol: f64) -> bool {
        self.a.is_unimodular(tol) && self.b.is_unimodular(tol)
    }

    pub fn max_sidelobe(&self) -> f64 {
        max_sidelobe(&self.a, &self.b).expect("equal lengths by construction")
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let c = Complex64::new(factor, 0.0);
        Self {
            a: self.a.scaled(c),
            b: self.b.scaled(c),
        }
    }

    /// All entries of both polarizations, A first.
    pub fn entries(&self) -> impl Iterator<Item = &Complex64> {
        self.a.iter().chain(self.b.iter())
    }
}

/// Dual-polarized weights of a URA.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightArrayPair {
    a: ComplexArray2d,
    b: ComplexArray2d,
}

impl WeightArrayPair {
    pub fn new(a: ComplexArray2d, b: ComplexArray2d) -> Result<Self> {
        if a.is_empty() || a.shape() != b.shape() {
            return Err(Error::shape(
                format!("two nonempty arrays of equal shape {:?}", a.shape()),
                format!("{:?}", b.shape()),
            ));
        }
        Ok(Self { a, b })
    }

    /// A ULA as a `1 × M` (horizontal) array.
    pub fn from_row(pair: &WeightPair) -> Self {
        Self {
            a: ComplexArray2d::row_vector(pair.a()),
            b: ComplexArray2d::row_vector(pair.b()),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.a.shape()
    }

    pub fn a(&self) -> &ComplexArray2d {
        &self.a
    }

    pub fn b(&self) -> &ComplexArray2d {
        &self.b
    }

    pub fn is_unimodular(&self, tol: f64) -> bool {
        self.a.is_unimodular(tol) && self.b.is_unimodular(tol)
    }

    pub fn max_sidelobe(&self) -> f64 {
        max_sidelobe2d(&self.a, &self.b).expect("equal shapes by construction")
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            a: self.a.map(|z| z * factor),
            b: self.b.map(|z| z * factor),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = &Complex64> {
        self.a.as_slice().iter().chain(self.b.as_slice().iter())
    }
}

/// The exchange matrix `E_M` applied to a sequence (index reversal).
pub fn exchange(x: &ComplexSequence) -> ComplexSequence {
    x.reversed()
}

/// Companion weights `(−E w_B*, E w_A*)` of a prototype.
pub fn companion(proto: &WeightPair) -> WeightPair {
    WeightPair {
        a: exchange(&proto.b.conj()).scaled(Complex64::new(-1.0, 0.0)),
        b: exchange(&proto.a.conj()),
    }
}

/// Array-size-invariant doubling: the companion array followed by the
/// prototype, length `2M`.
pub fn asi_double(proto: &WeightPair) -> WeightPair {
    let c = companion(proto);
    WeightPair {
        a: c.a.concat(&proto.a),
        b: c.b.concat(&proto.b),
    }
}

fn check_expanders(u: &ComplexSequence, v: &ComplexSequence) -> Result<()> {
    if u.is_empty() || u.len() != v.len() {
        return Err(Error::shape(
            format!("expanders of equal nonzero length ({})", u.len()),
            v.len(),
        ));
    }
    if !u.is_unimodular(EXPANDER_TOLERANCE) || !v.is_unimodular(EXPANDER_TOLERANCE) {
        return Err(Error::invalid("expander entries must be unit-modulus"));
    }
    Ok(())
}

fn kron(u: &ComplexSequence, w: &ComplexSequence) -> ComplexSequence {
    u.iter()
        .flat_map(|&ui| w.iter().map(move |&wm| ui * wm))
        .collect::<Vec<_>>()
        .into()
}

/// ULA expansion to length `2NM`:
/// `w_A = [u ⊗ w_PA; −v ⊗ E w_PB*]`, `w_B = [u ⊗ w_PB; v ⊗ E w_PA*]`.
pub fn expand_ula(
    proto: &WeightPair,
    u: &ComplexSequence,
    v: &ComplexSequence,
) -> Result<WeightPair> {
    check_expanders(u, v)?;
    let c = companion(proto);
    Ok(WeightPair {
        a: kron(u, &proto.a).concat(&kron(v, &c.a)),
        b: kron(u, &proto.b).concat(&kron(v, &c.b)),
    })
}

/// Stacking direction of the companion block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Companion block below: the row count doubles.
    Vertical,
    /// Companion block to the right: the column count doubles.
    Horizontal,
}

fn join(top: &ComplexArray2d, other: &ComplexArray2d, o: Orientation) -> ComplexArray2d {
    match o {
        Orientation::Vertical => top.vstack(other),
        Orientation::Horizontal => top.hstack(other),
    }
    .expect("blocks share the joined dimension")
}

/// ULA to URA: outer products of the expanders (along z) with the prototype
/// (along y). `Vertical` yields `2N × M`, `Horizontal` yields `N × 2M`.
pub fn expand_ula_to_ura(
    proto: &WeightPair,
    u: &ComplexSequence,
    v: &ComplexSequence,
    orientation: Orientation,
) -> Result<WeightArrayPair> {
    check_expanders(u, v)?;
    let c = companion(proto);
    let outer = |x: &ComplexSequence, w: &ComplexSequence| {
        ComplexArray2d::from_fn(x.len(), w.len(), |n, m| x[n] * w[m])
    };
    Ok(WeightArrayPair {
        a: join(&outer(u, &proto.a), &outer(v, &c.a), orientation),
        b: join(&outer(u, &proto.b), &outer(v, &c.b), orientation),
    })
}

/// URA expansion with `L × K` expanders:
/// `W_A = [U ⊗ W_PA; −V ⊗ E W_PB* E]`, `W_B = [U ⊗ W_PB; V ⊗ E W_PA* E]`,
/// `2LN × KM` when vertical, `LN × 2KM` when horizontal.
pub fn expand_ura(
    proto: &WeightArrayPair,
    u: &ComplexArray2d,
    v: &ComplexArray2d,
    orientation: Orientation,
) -> Result<WeightArrayPair> {
    if u.is_empty() || u.shape() != v.shape() {
        return Err(Error::shape(
            format!("expanders of equal nonempty shape {:?}", u.shape()),
            format!("{:?}", v.shape()),
        ));
    }
    if !u.is_unimodular(EXPANDER_TOLERANCE) || !v.is_unimodular(EXPANDER_TOLERANCE) {
        return Err(Error::invalid("expander entries must be unit-modulus"));
    }
    let ca = proto.b.conj().rotated_180().map(|z| -z);
    let cb = proto.a.conj().rotated_180();
    Ok(WeightArrayPair {
        a: join(&u.kron(&proto.a), &v.kron(&ca), orientation),
        b: join(&u.kron(&proto.b), &v.kron(&cb), orientation),
    })
}

/// A band `level ± deviation` containing every sample of a power pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RippleBound {
    pub level: f64,
    pub deviation: f64,
}

impl RippleBound {
    /// Band of `S_u + S_v` for a length-`m` pair with sum-AACF sidelobes at
    /// most `sidelobe`.
    pub fn from_sidelobe_1d(m: usize, sidelobe: f64) -> Self {
        Self {
            level: 2.0 * m as f64,
            deviation: 2.0 * m.saturating_sub(1) as f64 * sidelobe,
        }
    }

    /// Band of the 2D power spectrum sum of an `n × m` array pair.
    pub fn from_sidelobe_2d(n: usize, m: usize, sidelobe: f64) -> Self {
        Self {
            level: 2.0 * (n * m) as f64,
            deviation: ((2 * n - 1) * (2 * m - 1) - 1) as f64 * sidelobe,
        }
    }

    /// Band of the product of two independent factors.
    pub fn times(&self, other: &Self) -> Self {
        Self {
            level: self.level * other.level,
            deviation: self.level * other.deviation
                + other.level * self.deviation
                + self.deviation * other.deviation,
        }
    }

    /// Upper bound on `10·log10(max/min)` of any pattern inside the band.
    pub fn ripple_db(&self) -> f64 {
        if self.deviation >= self.level {
            f64::INFINITY
        } else {
            10.0 * ((self.level + self.deviation) / (self.level - self.deviation)).log10()
        }
    }
}

/// Deviation bound of an expanded pattern from its nominal level
/// `2N · 2M`, given the prototype's deviation `proto_ripple` around `2M`
/// and length-`n` expanders with sum-AACF sidelobes at most
/// `expander_sidelobe`.
pub fn sidelobe_bound_after_expansion(
    proto_ripple: f64,
    proto_len: usize,
    expander_sidelobe: f64,
    n: usize,
) -> f64 {
    let proto = RippleBound {
        level: 2.0 * proto_len as f64,
        deviation: proto_ripple,
    };
    RippleBound::from_sidelobe_1d(n, expander_sidelobe)
        .times(&proto)
        .deviation
}
