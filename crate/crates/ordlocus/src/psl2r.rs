//! Arithmetic in PSL(2,R), SU(1,1), and their common universal cover.
//!
//! The cover is coordinatized by pairs (γ, ω) with |γ| < 1 and ω real and
//! unbounded. Projection to SU(1,1) sends (γ, ω) to the matrix with
//! α = e^{iω}/√(1−|γ|²) and β = −γ̄ᾱ; the fixed Cayley conjugator
//! C = (1/√2)·[[1, −i], [1, i]] identifies SL(2,R) with SU(1,1). The center
//! of the cover is {(0, kπ)} and translation numbers are normalized so that
//! trans((0, kπ)) = k.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::Error;

/// |det − 1| bound for accepting a matrix as an SL(2,R) element.
pub const DET_TOL: f64 = 1e-12;
/// Tolerance on |trace| − 2 separating elliptic, parabolic, hyperbolic.
pub const CLASSIFY_TOL: f64 = 1e-8;

/// A real 2×2 matrix of unit determinant, considered up to sign.
///
/// All operations here are insensitive to replacing the matrix by its
/// negative, so a value of this type stands for a PSL(2,R) class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl RealMatrix {
    /// Builds a matrix, rejecting input whose determinant is off unity by
    /// more than `DET_TOL`.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, Error> {
        let det = a * d - b * c;
        if !(det - 1.0).abs().is_finite() || (det - 1.0).abs() > DET_TOL {
            return Err(Error::InvalidInput(format!(
                "matrix determinant {det} is not 1 within {DET_TOL:e}"
            )));
        }
        Ok(RealMatrix { a, b, c, d })
    }

    /// Builds a matrix from a product chain, rescaling away the small
    /// determinant drift that accumulates in long words. Drift beyond 1e-6
    /// signals a genuine non-unimodular input and is rejected.
    pub fn new_normalized(a: f64, b: f64, c: f64, d: f64) -> Result<Self, Error> {
        let det = a * d - b * c;
        if !det.is_finite() || (det - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidInput(format!(
                "matrix determinant {det} is too far from 1 to renormalize"
            )));
        }
        let s = det.sqrt();
        Ok(RealMatrix { a: a / s, b: b / s, c: c / s, d: d / s })
    }

    pub fn identity() -> Self {
        RealMatrix { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Matrix product, renormalized to unit determinant.
    pub fn mul(&self, o: &RealMatrix) -> RealMatrix {
        RealMatrix::new_normalized(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
        .expect("product of unimodular matrices stays unimodular")
    }

    /// Inverse; exact for unit determinant.
    pub fn inverse(&self) -> RealMatrix {
        RealMatrix { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Frobenius distance to another matrix.
    pub fn dist(&self, o: &RealMatrix) -> f64 {
        ((self.a - o.a).powi(2)
            + (self.b - o.b).powi(2)
            + (self.c - o.c).powi(2)
            + (self.d - o.d).powi(2))
        .sqrt()
    }

    /// Frobenius distance to ±identity, minimized over the sign.
    pub fn dist_projective_identity(&self) -> f64 {
        let id = RealMatrix::identity();
        let neg = RealMatrix { a: -1.0, b: 0.0, c: 0.0, d: -1.0 };
        self.dist(&id).min(self.dist(&neg))
    }

    /// Applies the Möbius action to a point of the projective line.
    pub fn moebius(&self, v: ProjPoint) -> ProjPoint {
        match v {
            ProjPoint::Infinity => {
                if self.c.abs() < 1e-300 {
                    ProjPoint::Infinity
                } else {
                    ProjPoint::Finite(Complex64::new(self.a / self.c, 0.0))
                }
            }
            ProjPoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den.norm() < 1e-300 {
                    ProjPoint::Infinity
                } else {
                    ProjPoint::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }
}

/// An SU(1,1) matrix [[α, β], [β̄, ᾱ]] with |α|² − |β|² = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskMatrix {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl DiskMatrix {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self, Error> {
        let det = alpha.norm_sqr() - beta.norm_sqr();
        if !det.is_finite() || (det - 1.0).abs() > DET_TOL {
            return Err(Error::InvalidInput(format!(
                "|α|² − |β|² = {det} is not 1 within {DET_TOL:e}"
            )));
        }
        Ok(DiskMatrix { alpha, beta })
    }

    pub fn identity() -> Self {
        DiskMatrix { alpha: Complex64::new(1.0, 0.0), beta: Complex64::new(0.0, 0.0) }
    }

    pub fn mul(&self, o: &DiskMatrix) -> DiskMatrix {
        // block multiplication of [[α, β], [β̄, ᾱ]] forms
        DiskMatrix {
            alpha: self.alpha * o.alpha + self.beta * o.beta.conj(),
            beta: self.alpha * o.beta + self.beta * o.alpha.conj(),
        }
    }

    pub fn dist(&self, o: &DiskMatrix) -> f64 {
        (2.0 * ((self.alpha - o.alpha).norm_sqr() + (self.beta - o.beta).norm_sqr())).sqrt()
    }
}

/// An element of the universal cover in (γ, ω) coordinates, |γ| < 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftedElement {
    pub gamma: Complex64,
    pub omega: f64,
}

/// A point of the complex projective line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProjPoint {
    Finite(Complex64),
    Infinity,
}

impl ProjPoint {
    /// Distance in the chordal metric on the projective line (bounded by 2).
    pub fn chordal_dist(&self, o: &ProjPoint) -> f64 {
        let lift = |p: &ProjPoint| -> (Complex64, Complex64) {
            match p {
                ProjPoint::Infinity => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
                ProjPoint::Finite(z) => {
                    let n = (z.norm_sqr() + 1.0).sqrt();
                    (*z / n, Complex64::new(1.0 / n, 0.0))
                }
            }
        };
        let (z1, w1) = lift(self);
        let (z2, w2) = lift(o);
        2.0 * (z1 * w2 - z2 * w1).norm()
    }
}

/// A fixed point of a Möbius action together with the derivative there.
///
/// `logmag` is the natural log of the positive square root of |deriv|, i.e.
/// −ln|cv + d| in the finite chart and −ln|a| at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointDatum {
    pub v: ProjPoint,
    pub deriv: Complex64,
    pub logmag: f64,
}

/// Conjugacy type of a matrix (or of its lifts).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementClass {
    Elliptic,
    Parabolic,
    Hyperbolic,
    /// ±identity; the level records ω/π for lifts (0 or 1 for bare matrices).
    Central(i64),
}

/// Principal argument on the branch [−π, π).
fn arg_pm(z: Complex64) -> f64 {
    let t = z.arg(); // (−π, π]
    if t >= PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// Conjugates an SL(2,R) matrix into SU(1,1) by the fixed Cayley conjugator
/// C = (1/√2)·[[1, −i], [1, i]].
///
/// In entries: α = ((a + d) + i(b − c))/2, β = ((a − d) − i(b + c))/2.
/// The convention sends the rotation [[cos θ, sin θ], [−sin θ, cos θ]] to
/// α = e^{iθ}, β = 0.
pub fn cayley_to_disk(m: &RealMatrix) -> Result<DiskMatrix, Error> {
    if (m.det() - 1.0).abs() > DET_TOL {
        return Err(Error::InvalidInput(format!(
            "determinant {} is not 1 within {DET_TOL:e}",
            m.det()
        )));
    }
    let alpha = Complex64::new((m.a + m.d) / 2.0, (m.b - m.c) / 2.0);
    let beta = Complex64::new((m.a - m.d) / 2.0, -(m.b + m.c) / 2.0);
    Ok(DiskMatrix { alpha, beta })
}

/// Inverse of `cayley_to_disk`; recovers the real matrix of an SU(1,1)
/// element whose conjugate is real (always, for images of real matrices).
pub fn disk_to_real(m: &DiskMatrix) -> RealMatrix {
    let a = m.alpha.re + m.beta.re;
    let d = m.alpha.re - m.beta.re;
    let b = m.alpha.im - m.beta.im;
    let c = -(m.alpha.im + m.beta.im);
    RealMatrix { a, b, c, d }
}

/// Lifts an SU(1,1) matrix to the cover. Sheet k adds 2πk to ω; sheet 0 is
/// the canonical lift with ω = Arg α on the branch [−π, π).
pub fn lift(m: &DiskMatrix, sheet: i64) -> LiftedElement {
    let gamma = -m.beta.conj() / m.alpha;
    let omega = arg_pm(m.alpha) + 2.0 * PI * sheet as f64;
    LiftedElement { gamma, omega }
}

/// Projects a lifted element back to its SU(1,1) matrix.
pub fn project(g: &LiftedElement) -> DiskMatrix {
    let scale = 1.0 / (1.0 - g.gamma.norm_sqr()).sqrt();
    let alpha = Complex64::from_polar(scale, g.omega);
    let beta = -g.gamma.conj() * alpha.conj();
    DiskMatrix { alpha, beta }
}

/// Group law of the cover:
/// γ'' = (γ + γ′e^{−2iω}) / (1 + γ̄γ′e^{−2iω}),
/// ω'' = ω + ω′ + Arg(1 + γ̄γ′e^{−2iω}).
///
/// The Arg term is the principal value of (1/2i)·log(z/z̄) for
/// z = 1 + γ̄γ′e^{−2iω}; since |γ̄γ′| < 1, Re z > 0 and the branch is
/// unambiguous.
pub fn compose(g: &LiftedElement, h: &LiftedElement) -> LiftedElement {
    let twist = Complex64::from_polar(1.0, -2.0 * g.omega);
    let z = Complex64::new(1.0, 0.0) + g.gamma.conj() * h.gamma * twist;
    let gamma = (g.gamma + h.gamma * twist) / z;
    let omega = g.omega + h.omega + z.arg();
    LiftedElement { gamma, omega }
}

/// Group inverse: (γ, ω)⁻¹ = (−γe^{2iω}, −ω).
pub fn invert(g: &LiftedElement) -> LiftedElement {
    LiftedElement {
        gamma: -g.gamma * Complex64::from_polar(1.0, 2.0 * g.omega),
        omega: -g.omega,
    }
}

/// Identity of the cover.
pub fn lifted_identity() -> LiftedElement {
    LiftedElement { gamma: Complex64::new(0.0, 0.0), omega: 0.0 }
}

/// The central element (0, kπ).
pub fn central(k: i64) -> LiftedElement {
    LiftedElement { gamma: Complex64::new(0.0, 0.0), omega: k as f64 * PI }
}

/// Trichotomy by |trace| with tolerance `CLASSIFY_TOL`; matrices within
/// tolerance of ±identity are central.
pub fn classify(m: &RealMatrix) -> ElementClass {
    let t = m.trace().abs();
    if t < 2.0 - CLASSIFY_TOL {
        ElementClass::Elliptic
    } else if t > 2.0 + CLASSIFY_TOL {
        ElementClass::Hyperbolic
    } else if m.dist_projective_identity() < CLASSIFY_TOL {
        ElementClass::Central(if m.a > 0.0 { 0 } else { 1 })
    } else {
        ElementClass::Parabolic
    }
}

/// Classifies a lifted element; central levels record round(ω/π).
pub fn classify_lifted(g: &LiftedElement) -> ElementClass {
    let scale = 1.0 / (1.0 - g.gamma.norm_sqr()).sqrt();
    let trace = 2.0 * g.omega.cos() * scale;
    let t = trace.abs();
    if t < 2.0 - CLASSIFY_TOL {
        ElementClass::Elliptic
    } else if t > 2.0 + CLASSIFY_TOL {
        ElementClass::Hyperbolic
    } else if g.gamma.norm() < CLASSIFY_TOL {
        ElementClass::Central((g.omega / PI).round() as i64)
    } else {
        ElementClass::Parabolic
    }
}

/// The lifted action on the line: F(θ) = θ + 2ω + 2·Arg(1 − γ̄e^{−i(θ+2ω)}).
///
/// Since |γ| < 1 the Arg lands in (−π/2, π/2), so F is a continuous lift of
/// the boundary Möbius action and satisfies F(θ + 2π) = F(θ) + 2π exactly.
pub fn lifted_circle_map(g: &LiftedElement, theta: f64) -> f64 {
    let phase = theta + 2.0 * g.omega;
    let z = Complex64::new(1.0, 0.0) - g.gamma.conj() * Complex64::from_polar(1.0, -phase);
    theta + 2.0 * g.omega + 2.0 * z.arg()
}

fn iterate_circle_map(g: &LiftedElement, n: u32) -> f64 {
    let mut theta = 0.0;
    for _ in 0..n {
        theta = lifted_circle_map(g, theta);
    }
    theta / (2.0 * PI * n as f64)
}

/// Translation number of a lifted element, normalized so trans((0, kπ)) = k.
///
/// Rotations (γ = 0) are exact: trans = ω/π. Hyperbolic and parabolic
/// elements have integer translation number, estimated by iterating the
/// lifted circle action and rounded; the iteration count escalates from 64
/// to 4096 before declaring a near-parabolic convergence failure. Elliptic
/// elements are snapped to the closed form ±arccos(tr/2)/π + 2m consistent
/// with the iteration estimate.
pub fn trans(g: &LiftedElement) -> Result<f64, Error> {
    if g.gamma.norm() < 1e-14 {
        return Ok(g.omega / PI);
    }
    match classify_lifted(g) {
        ElementClass::Elliptic => {
            let est = iterate_circle_map(g, 256);
            let scale = 1.0 / (1.0 - g.gamma.norm_sqr()).sqrt();
            let tr = 2.0 * g.omega.cos() * scale;
            let theta0 = (tr / 2.0).clamp(-1.0, 1.0).acos(); // in (0, π)
            let mut best = f64::INFINITY;
            let mut snap = est;
            for sign in [-1.0, 1.0] {
                let base = sign * theta0 / PI;
                let m = ((est - base) / 2.0).round();
                let cand = base + 2.0 * m;
                if (est - cand).abs() < best {
                    best = (est - cand).abs();
                    snap = cand;
                }
            }
            if best > 0.3 {
                return Err(Error::Convergence(format!(
                    "elliptic translation estimate {est} is {best} from nearest closed form"
                )));
            }
            Ok(snap)
        }
        _ => {
            let mut n = 64u32;
            loop {
                let est = iterate_circle_map(g, n);
                let k = est.round();
                if (est - k).abs() < 0.1 {
                    return Ok(k);
                }
                if n >= 4096 {
                    return Err(Error::Convergence(format!(
                        "translation number did not settle near an integer (estimate {est} after {n} iterations)"
                    )));
                }
                n *= 4;
            }
        }
    }
}

/// Fixed points of the Möbius action of a non-central matrix, with the
/// derivative 1/(cv + d)² at each (1/a² at infinity, by the chart swap
/// w = 1/v). Hyperbolic input yields two real points, parabolic one point,
/// elliptic a conjugate pair. Data are sorted by descending logmag with
/// finite points first on ties.
pub fn fixed_data(m: &RealMatrix) -> Result<Vec<FixedPointDatum>, Error> {
    if let ElementClass::Central(_) = classify(m) {
        return Err(Error::InvalidInput(
            "fixed points of a central matrix are the whole line".into(),
        ));
    }
    // fixed points solve c v² + (d − a) v − b = 0; c = 0 drops degree and
    // puts one point at infinity
    let mut data: Vec<FixedPointDatum> = Vec::new();
    let mut push_finite = |v: Complex64| {
        let den = m.c * v + m.d;
        let deriv = Complex64::new(1.0, 0.0) / (den * den);
        data.push(FixedPointDatum { v: ProjPoint::Finite(v), deriv, logmag: -den.norm().ln() });
    };
    if m.c.abs() < 1e-14 {
        // infinity is fixed; derivative there is 1/a²
        let deriv = Complex64::new(1.0 / (m.a * m.a), 0.0);
        let datum_inf =
            FixedPointDatum { v: ProjPoint::Infinity, deriv, logmag: -m.a.abs().ln() };
        if (m.d - m.a).abs() > 1e-14 {
            push_finite(Complex64::new(m.b / (m.d - m.a), 0.0));
        }
        data.push(datum_inf);
    } else {
        let disc = Complex64::new((m.d - m.a) * (m.d - m.a) + 4.0 * m.b * m.c, 0.0);
        let sq = disc.sqrt();
        let r1 = (Complex64::new(m.a - m.d, 0.0) + sq) / (2.0 * m.c);
        let r2 = (Complex64::new(m.a - m.d, 0.0) - sq) / (2.0 * m.c);
        push_finite(r1);
        if (r1 - r2).norm() > 1e-14 * (1.0 + r1.norm()) {
            push_finite(r2);
        }
    }
    data.sort_by(|x, y| {
        y.logmag
            .partial_cmp(&x.logmag)
            .unwrap()
            .then_with(|| {
                let key = |p: &FixedPointDatum| match p.v {
                    ProjPoint::Finite(_) => 0,
                    ProjPoint::Infinity => 1,
                };
                key(x).cmp(&key(y))
            })
            .then_with(|| {
                let key = |p: &FixedPointDatum| match p.v {
                    ProjPoint::Finite(z) => (z.re, z.im),
                    ProjPoint::Infinity => (f64::INFINITY, 0.0),
                };
                key(x).partial_cmp(&key(y)).unwrap()
            })
    });
    Ok(data)
}

/// Verifies that `v` is fixed by `m` within the chordal tolerance.
pub fn is_fixed_by(m: &RealMatrix, v: &ProjPoint, tol: f64) -> bool {
    m.moebius(*v).chordal_dist(v) < tol
}

/// The log-eigenvalue datum of `m` at a prescribed fixed point `v`, used
/// when two commuting matrices must be evaluated at a shared point. At a
/// fixed point (cv + d)(a − cv) = 1, so whichever factor is larger in
/// magnitude carries the smaller relative error; the datum is built from
/// that one to dodge the cancellation in the contracting direction.
pub fn datum_at(m: &RealMatrix, v: &ProjPoint) -> FixedPointDatum {
    let (den, co) = match v {
        ProjPoint::Infinity => (Complex64::new(m.a, 0.0), Complex64::new(m.d, 0.0)),
        ProjPoint::Finite(z) => (m.c * z + m.d, Complex64::new(m.a, 0.0) - m.c * z),
    };
    if co.norm() > den.norm() {
        FixedPointDatum { v: *v, deriv: co * co, logmag: co.norm().ln() }
    } else {
        FixedPointDatum {
            v: *v,
            deriv: Complex64::new(1.0, 0.0) / (den * den),
            logmag: -den.norm().ln(),
        }
    }
}

/// The pair (log eigenvalue magnitude, translation number) of a lifted
/// element at a fixed point of its projection. Defined for hyperbolic,
/// parabolic, and central elements only; the second component is an
/// integer for all of them.
pub fn ev(g: &LiftedElement, datum: &FixedPointDatum) -> Result<(f64, f64), Error> {
    let class = classify_lifted(g);
    let t = match class {
        ElementClass::Elliptic => {
            return Err(Error::InvalidInput(
                "the eigenvalue pairing is undefined on elliptic elements".into(),
            ))
        }
        _ => trans(g)?,
    };
    debug_assert!((t - t.round()).abs() < 0.05);
    let t = t.round();
    match class {
        ElementClass::Hyperbolic => Ok((datum.logmag, t)),
        _ => Ok((0.0, t)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(s: f64) -> RealMatrix {
        RealMatrix::new(s, 0.0, 0.0, 1.0 / s).unwrap()
    }

    fn rotation(theta: f64) -> RealMatrix {
        RealMatrix::new(theta.cos(), theta.sin(), -theta.sin(), theta.cos()).unwrap()
    }

    /// Random element of the cover with |γ| ≤ 0.99 and |ω| ≤ 20.
    fn random_lifted(rng: &mut ChaCha8Rng) -> LiftedElement {
        let r: f64 = rng.gen_range(0.0..0.99);
        let phi: f64 = rng.gen_range(-PI..PI);
        let omega: f64 = rng.gen_range(-20.0..20.0);
        LiftedElement { gamma: Complex64::from_polar(r, phi), omega }
    }

    #[test]
    fn cayley_identity_and_diag() {
        let id = cayley_to_disk(&RealMatrix::identity()).unwrap();
        assert!((id.alpha - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(id.beta.norm() < 1e-15);

        let d = cayley_to_disk(&diag(2.0)).unwrap();
        assert!((d.alpha - Complex64::new(1.25, 0.0)).norm() < 1e-15);
        assert!((d.beta - Complex64::new(0.75, 0.0)).norm() < 1e-15);
        // γ = −β̄/α = −3/5
        let g = lift(&d, 0);
        assert!((g.gamma - Complex64::new(-0.6, 0.0)).norm() < 1e-15);
        assert!(g.omega.abs() < 1e-15);
    }

    #[test]
    fn cayley_rotation_convention() {
        // the rotation by θ maps to α = e^{+iθ}, β = 0
        for theta in [0.3, -1.1, 2.9] {
            let d = cayley_to_disk(&rotation(theta)).unwrap();
            assert!((d.alpha - Complex64::from_polar(1.0, theta)).norm() < 1e-14);
            assert!(d.beta.norm() < 1e-14);
        }
    }

    #[test]
    fn cayley_rejects_bad_determinant() {
        let m = RealMatrix { a: 2.0, b: 0.0, c: 0.0, d: 2.0 };
        assert!(cayley_to_disk(&m).is_err());
        assert!(RealMatrix::new(2.0, 0.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn cayley_is_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let a: f64 = rng.gen_range(-2.0..2.0);
            let b: f64 = rng.gen_range(-2.0..2.0);
            let c: f64 = rng.gen_range(-2.0..2.0);
            // solve d from det = 1, avoiding tiny pivots
            if a.abs() < 0.1 {
                continue;
            }
            let d = (1.0 + b * c) / a;
            let m1 = RealMatrix::new_normalized(a, b, c, d).unwrap();
            let m2 = rotation(rng.gen_range(-3.0..3.0)).mul(&diag(rng.gen_range(0.5..2.0)));
            let lhs = cayley_to_disk(&m1.mul(&m2)).unwrap();
            let rhs = cayley_to_disk(&m1).unwrap().mul(&cayley_to_disk(&m2).unwrap());
            assert!(lhs.dist(&rhs) < 1e-9, "not a homomorphism at {m1:?} {m2:?}");
        }
    }

    #[test]
    fn disk_to_real_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let theta = rng.gen_range(-3.0..3.0);
            let m = rotation(theta).mul(&diag(rng.gen_range(0.4..2.5)));
            let back = disk_to_real(&cayley_to_disk(&m).unwrap());
            assert!(m.dist(&back) < 1e-12);
        }
    }

    #[test]
    fn lift_branch_and_sheets() {
        let id = DiskMatrix::identity();
        let g = lift(&id, 0);
        assert_eq!((g.gamma.norm(), g.omega), (0.0, 0.0));
        let g1 = lift(&id, 1);
        assert!((g1.omega - 2.0 * PI).abs() < 1e-15);

        // −identity lands at ω = −π on the branch [−π, π)
        let neg = DiskMatrix::new(Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.0)).unwrap();
        let gn = lift(&neg, 0);
        assert!((gn.omega + PI).abs() < 1e-15);
    }

    #[test]
    fn project_inverts_lift() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let g = random_lifted(&mut rng);
            let m = project(&g);
            let det = m.alpha.norm_sqr() - m.beta.norm_sqr();
            assert!((det - 1.0).abs() < 1e-10);
            let h = lift(&m, 0);
            assert!((g.gamma - h.gamma).norm() < 1e-10);
            // ω agrees modulo 2π
            let dw = (g.omega - h.omega) / (2.0 * PI);
            assert!((dw - dw.round()).abs() < 1e-10);
        }
    }

    #[test]
    fn compose_matches_matrix_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..1000 {
            let g = random_lifted(&mut rng);
            let h = random_lifted(&mut rng);
            let lhs = project(&compose(&g, &h));
            let rhs = project(&g).mul(&project(&h));
            assert!(lhs.dist(&rhs) < 1e-9, "projection does not commute at {g:?} {h:?}");
        }
    }

    #[test]
    fn compose_unit_and_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let e = lifted_identity();
        for _ in 0..200 {
            let g = random_lifted(&mut rng);
            let ge = compose(&g, &e);
            assert!((ge.gamma - g.gamma).norm() < 1e-15 && (ge.omega - g.omega).abs() < 1e-12);

            // central elements commute and add ω
            let z = central(1);
            let gz = compose(&g, &z);
            let zg = compose(&z, &g);
            assert!((gz.gamma - zg.gamma).norm() < 1e-12);
            assert!((gz.omega - zg.omega).abs() < 1e-12);
            assert!((gz.omega - (g.omega + PI)).abs() < 1e-12);
        }
        let two = compose(&central(1), &central(1));
        assert!(two.gamma.norm() < 1e-15 && (two.omega - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn compose_associative_and_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let g = random_lifted(&mut rng);
            let h = random_lifted(&mut rng);
            let k = random_lifted(&mut rng);
            let l = compose(&compose(&g, &h), &k);
            let r = compose(&g, &compose(&h, &k));
            assert!((l.gamma - r.gamma).norm() < 1e-8, "associativity γ");
            assert!((l.omega - r.omega).abs() < 1e-8, "associativity ω");

            let gi = compose(&g, &invert(&g));
            assert!(gi.gamma.norm() < 1e-9 && gi.omega.abs() < 1e-9);
        }
    }

    #[test]
    fn invert_examples() {
        assert_eq!(invert(&lifted_identity()), lifted_identity());
        let r = LiftedElement { gamma: Complex64::new(0.0, 0.0), omega: 0.7 };
        let ri = invert(&r);
        assert!(ri.gamma.norm() < 1e-15 && (ri.omega + 0.7).abs() < 1e-15);

        // the lift of diag(2, 1/2) inverts to the lift of diag(1/2, 2)
        let g = lift(&cayley_to_disk(&diag(2.0)).unwrap(), 0);
        let gi = invert(&g);
        let m = disk_to_real(&project(&gi));
        assert!(m.dist(&diag(0.5)) < 1e-12);
    }

    #[test]
    fn classify_trichotomy() {
        assert_eq!(classify(&diag(2.0)), ElementClass::Hyperbolic);
        assert_eq!(
            classify(&RealMatrix::new(1.0, 1.0, 0.0, 1.0).unwrap()),
            ElementClass::Parabolic
        );
        assert_eq!(classify(&RealMatrix::identity()), ElementClass::Central(0));
        let neg = RealMatrix { a: -1.0, b: 0.0, c: 0.0, d: -1.0 };
        assert_eq!(classify(&neg), ElementClass::Central(1));
        assert_eq!(classify(&rotation(0.4)), ElementClass::Elliptic);
    }

    #[test]
    fn circle_map_examples_and_equivariance() {
        let e = lifted_identity();
        assert_eq!(lifted_circle_map(&e, 0.35), 0.35);

        let z = central(1);
        assert!((lifted_circle_map(&z, 0.2) - (0.2 + 2.0 * PI)).abs() < 1e-15);

        // the projection of diag(2, 1/2) fixes θ = 0
        let g = LiftedElement { gamma: Complex64::new(0.6, 0.0), omega: 0.0 };
        assert!(lifted_circle_map(&g, 0.0).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..300 {
            let g = random_lifted(&mut rng);
            let th: f64 = rng.gen_range(-10.0..10.0);
            let lhs = lifted_circle_map(&g, th + 2.0 * PI);
            let rhs = lifted_circle_map(&g, th) + 2.0 * PI;
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_map_is_action() {
        // F_{gh} = F_g ∘ F_h, since the map is the lifted left action
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..300 {
            let g = random_lifted(&mut rng);
            let h = random_lifted(&mut rng);
            let th: f64 = rng.gen_range(-10.0..10.0);
            let lhs = lifted_circle_map(&compose(&g, &h), th);
            let rhs = lifted_circle_map(&g, lifted_circle_map(&h, th));
            assert!((lhs - rhs).abs() < 1e-9, "action property failed at {g:?} {h:?}");
        }
    }

    #[test]
    fn trans_center_and_rotations() {
        for k in -8i64..=8 {
            assert_eq!(trans(&central(k)).unwrap(), k as f64);
        }
        // elliptic rotation (0, α) has trans α/π
        let r = LiftedElement { gamma: Complex64::new(0.0, 0.0), omega: 0.9 };
        assert!((trans(&r).unwrap() - 0.9 / PI).abs() < 1e-15);
    }

    #[test]
    fn trans_hyperbolic_levels() {
        let base = lift(&cayley_to_disk(&diag(2.0)).unwrap(), 0);
        assert_eq!(trans(&base).unwrap(), 0.0);
        for k in [-3i64, -1, 1, 2] {
            let shifted = compose(&base, &central(k));
            assert_eq!(trans(&shifted).unwrap(), k as f64);
        }
    }

    #[test]
    fn trans_elliptic_snap() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..100 {
            // conjugate a rotation, then shift by the center
            let alpha: f64 = rng.gen_range(0.2..2.9);
            let k: i64 = rng.gen_range(-3..4);
            let h = random_lifted(&mut rng);
            let rot = LiftedElement { gamma: Complex64::new(0.0, 0.0), omega: alpha };
            let g = compose(&compose(&h, &compose(&rot, &central(2 * k))), &invert(&h));
            let t = trans(&g).unwrap();
            assert!(
                (t - (alpha / PI + 2.0 * k as f64)).abs() < 1e-9,
                "conjugated rotation trans {t} vs {}",
                alpha / PI + 2.0 * k as f64
            );
        }
    }

    #[test]
    fn trans_conjugacy_invariance_and_homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let samples: Vec<LiftedElement> = vec![
            lift(&cayley_to_disk(&diag(1.7)).unwrap(), 0),
            compose(&lift(&cayley_to_disk(&diag(1.7)).unwrap(), 0), &central(2)),
            lift(&cayley_to_disk(&RealMatrix::new(1.0, 1.3, 0.0, 1.0).unwrap()).unwrap(), 0),
            LiftedElement { gamma: Complex64::new(0.0, 0.0), omega: 1.1 },
        ];
        for g in samples {
            let tg = trans(&g).unwrap();
            for _ in 0..50 {
                let h = random_lifted(&mut rng);
                let conj = compose(&compose(&h, &g), &invert(&h));
                let tc = trans(&conj).unwrap();
                assert!((tc - tg).abs() < 1e-6, "conjugacy invariance: {tc} vs {tg}");
            }
            let mut p = lifted_identity();
            for n in 1..=8i32 {
                p = compose(&p, &g);
                let tp = trans(&p).unwrap();
                assert!((tp - n as f64 * tg).abs() < 1e-6, "homogeneity at n = {n}");
            }
        }
    }

    #[test]
    fn trans_parity_on_projective_identity() {
        // elements projecting to +identity in SL(2,R) have even trans
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let h = random_lifted(&mut rng);
            let k: i64 = rng.gen_range(-4..5);
            let g = compose(&compose(&h, &central(2 * k)), &invert(&h));
            let m = disk_to_real(&project(&g));
            assert!(m.dist(&RealMatrix::identity()) < 1e-9);
            let t = trans(&g).unwrap();
            assert!((t / 2.0 - (t / 2.0).round()).abs() < 1e-9, "odd trans {t}");
        }
    }

    #[test]
    fn fixed_data_examples() {
        let data = fixed_data(&diag(2.0)).unwrap();
        assert_eq!(data.len(), 2);
        // sorted by descending logmag: v = 0 (logmag ln 2) first
        match data[0].v {
            ProjPoint::Finite(z) => assert!(z.norm() < 1e-15),
            _ => panic!("expected finite fixed point first"),
        }
        assert!((data[0].logmag - 2.0f64.ln()).abs() < 1e-15);
        assert!((data[0].deriv - Complex64::new(4.0, 0.0)).norm() < 1e-15);
        assert_eq!(data[1].v, ProjPoint::Infinity);
        assert!((data[1].logmag + 2.0f64.ln()).abs() < 1e-15);
        assert!((data[1].deriv - Complex64::new(0.25, 0.0)).norm() < 1e-15);

        let par = fixed_data(&RealMatrix::new(1.0, 1.0, 0.0, 1.0).unwrap()).unwrap();
        assert_eq!(par.len(), 1);
        assert_eq!(par[0].v, ProjPoint::Infinity);
        assert!((par[0].deriv - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(par[0].logmag.abs() < 1e-15);

        let ell = fixed_data(&RealMatrix::new(0.0, 1.0, -1.0, 0.0).unwrap()).unwrap();
        assert_eq!(ell.len(), 2);
        let vs: Vec<Complex64> = ell
            .iter()
            .map(|d| match d.v {
                ProjPoint::Finite(z) => z,
                _ => panic!("elliptic fixed points are finite"),
            })
            .collect();
        assert!(vs.iter().any(|z| (z - Complex64::new(0.0, 1.0)).norm() < 1e-12));
        assert!(vs.iter().any(|z| (z - Complex64::new(0.0, -1.0)).norm() < 1e-12));

        assert!(fixed_data(&RealMatrix::identity()).is_err());
    }

    #[test]
    fn fixed_data_points_are_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..300 {
            let a: f64 = rng.gen_range(-2.0..2.0);
            if a.abs() < 0.1 {
                continue;
            }
            let b: f64 = rng.gen_range(-2.0..2.0);
            let c: f64 = rng.gen_range(-2.0..2.0);
            let d = (1.0 + b * c) / a;
            let m = RealMatrix::new_normalized(a, b, c, d).unwrap();
            if let ElementClass::Central(_) = classify(&m) {
                continue;
            }
            for datum in fixed_data(&m).unwrap() {
                assert!(is_fixed_by(&m, &datum.v, 1e-8), "unfixed point for {m:?}");
            }
        }
    }

    #[test]
    fn ev_examples() {
        let g = lift(&cayley_to_disk(&diag(2.0)).unwrap(), 0);
        let data = fixed_data(&diag(2.0)).unwrap();
        let (x0, t0) = ev(&g, &data[0]).unwrap();
        assert!((x0 - 2.0f64.ln()).abs() < 1e-12 && t0 == 0.0);
        let (x1, t1) = ev(&g, &data[1]).unwrap();
        assert!((x1 + 2.0f64.ln()).abs() < 1e-12 && t1 == 0.0);

        // central (0, π) evaluates to (0, 1) at any datum
        let (xc, tc) = ev(&central(1), &data[0]).unwrap();
        assert!(xc == 0.0 && tc == 1.0);

        // elliptic input is rejected
        let r = lift(&cayley_to_disk(&rotation(0.5)).unwrap(), 0);
        assert!(ev(&r, &data[0]).is_err());
    }

    #[test]
    fn ev_additive_on_commuting_hyperbolics() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..200 {
            // commuting hyperbolics: conjugates of diagonals by a shared frame
            let p = {
                let a: f64 = rng.gen_range(0.5..2.0);
                let b: f64 = rng.gen_range(-1.0..1.0);
                let c: f64 = rng.gen_range(-1.0..1.0);
                let d = (1.0 + b * c) / a;
                RealMatrix::new_normalized(a, b, c, d).unwrap()
            };
            let s: f64 = rng.gen_range(1.2..2.5);
            let t: f64 = rng.gen_range(1.2..2.5);
            let m1 = p.mul(&diag(s)).mul(&p.inverse());
            let m2 = p.mul(&diag(t)).mul(&p.inverse());
            let g1 = lift(&cayley_to_disk(&m1).unwrap(), 0);
            let g2 = lift(&cayley_to_disk(&m2).unwrap(), 0);
            let shared = fixed_data(&m1).unwrap();
            let d0 = &shared[0];
            let (e1, t1) = ev(&g1, d0).unwrap();
            let (e2, t2) = ev(&g2, &datum_at(&m2, &d0.v)).unwrap();
            let g12 = compose(&g1, &g2);
            let m12 = m1.mul(&m2);
            let (e12, t12) = ev(&g12, &datum_at(&m12, &d0.v)).unwrap();
            assert!((e12 - (e1 + e2)).abs() < 1e-7, "log eigenvalue additivity");
            assert!((t12 - (t1 + t2)).abs() < 1e-7, "translation additivity");
        }
    }

    #[test]
    fn ev_zero_forces_identity() {
        // within the family diag(e^x) shifted by the center, the pairing
        // vanishes only at the identity
        for x in [-0.4f64, -0.1, 0.0, 0.1, 0.4] {
            for k in -2i64..=2 {
                let m = diag(x.exp());
                let g = if x == 0.0 {
                    central(k)
                } else {
                    compose(&lift(&cayley_to_disk(&m).unwrap(), 0), &central(k))
                };
                let datum = if x == 0.0 {
                    fixed_data(&diag(2.0)).unwrap()[0]
                } else {
                    fixed_data(&m).unwrap()[0]
                };
                let (e, t) = ev(&g, &datum).unwrap();
                if e.abs() < 1e-10 && t.abs() < 1e-10 {
                    assert!(g.gamma.norm() < 1e-8 && g.omega.abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn trans_center_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..100 {
            let g = random_lifted(&mut rng);
            let t = match trans(&g) {
                Ok(t) => t,
                Err(_) => continue,
            };
            for k in [-2i64, 1, 3] {
                let shifted = compose(&g, &central(k));
                let ts = trans(&shifted).unwrap();
                assert!((ts - (t + k as f64)).abs() < 1e-6);
            }
        }
    }
}
