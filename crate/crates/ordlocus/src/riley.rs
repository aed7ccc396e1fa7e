//! Riley charts on the representation variety of a two-generator knot
//! group, with Newton correction and per-slice seeding.
//!
//! Both generators map to matrices of trace s + s⁻¹, so meridional
//! conjugacy is built into the chart and the relator cuts out a real curve
//! in the two unknowns (s, u). The real chart s ∈ ℝ∖{±1} carries
//! boundary-hyperbolic representations; the unit chart s = e^{iθ} carries
//! boundary-elliptic ones, which become SU(1,1) points after conjugation.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::presentation::{Presentation, Word};
use crate::psl2r::RealMatrix;
use crate::Error;

/// Margin around |s| = 1 excluded from the real chart, and around
/// θ ∈ {0, π} excluded from the unit chart.
pub const CHART_MARGIN: f64 = 1e-6;
/// Residual threshold for accepting a corrected point.
pub const NEWTON_TOL: f64 = 1e-10;
/// Reducibility threshold on κ = tr[A,B] − 2.
pub const KAPPA_TOL: f64 = 1e-9;

type M2 = Matrix2<f64>;
type M2c = Matrix2<Complex64>;

/// A point of a Riley chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Chart {
    /// s real with |s| bounded away from 1; boundary-hyperbolic side.
    RealRiley { s: f64, u: f64 },
    /// s = e^{iθ} with θ bounded away from 0 and π; boundary-elliptic side.
    UnitRiley { theta: f64, u: f64 },
}

impl Chart {
    pub fn validate(&self) -> Result<(), Error> {
        match *self {
            Chart::RealRiley { s, u } => {
                if !s.is_finite() || !u.is_finite() {
                    return Err(Error::InvalidInput("non-finite chart point".into()));
                }
                if (s.abs() - 1.0).abs() <= CHART_MARGIN {
                    return Err(Error::InvalidInput(format!(
                        "|s| = {} is within {CHART_MARGIN:e} of 1",
                        s.abs()
                    )));
                }
                if s == 0.0 {
                    return Err(Error::InvalidInput("s must be nonzero".into()));
                }
                Ok(())
            }
            Chart::UnitRiley { theta, u } => {
                if !theta.is_finite() || !u.is_finite() {
                    return Err(Error::InvalidInput("non-finite chart point".into()));
                }
                let t = theta.rem_euclid(std::f64::consts::PI);
                if t <= CHART_MARGIN || t >= std::f64::consts::PI - CHART_MARGIN {
                    return Err(Error::InvalidInput(format!(
                        "θ = {theta} is within {CHART_MARGIN:e} of a parabolic angle"
                    )));
                }
                Ok(())
            }
        }
    }

    /// The two chart coordinates, (s, u) or (θ, u).
    pub fn params(&self) -> (f64, f64) {
        match *self {
            Chart::RealRiley { s, u } => (s, u),
            Chart::UnitRiley { theta, u } => (theta, u),
        }
    }

    /// Same chart kind at new coordinates.
    pub fn with_params(&self, p: f64, q: f64) -> Chart {
        match self {
            Chart::RealRiley { .. } => Chart::RealRiley { s: p, u: q },
            Chart::UnitRiley { .. } => Chart::UnitRiley { theta: p, u: q },
        }
    }
}

/// Generator images of a chart point.
pub enum RepMatrices {
    Real(RealMatrix, RealMatrix),
    Unit(M2c, M2c),
}

/// The Riley pair A = [[s, 1], [0, s⁻¹]], B = [[s, 0], [u, s⁻¹]], with
/// s = e^{iθ} in the unit chart. Both have unit determinant and equal trace.
pub fn riley_rep(chart: &Chart) -> RepMatrices {
    match *chart {
        Chart::RealRiley { s, u } => RepMatrices::Real(
            RealMatrix { a: s, b: 1.0, c: 0.0, d: 1.0 / s },
            RealMatrix { a: s, b: 0.0, c: u, d: 1.0 / s },
        ),
        Chart::UnitRiley { theta, u } => {
            let s = Complex64::from_polar(1.0, theta);
            let si = s.conj();
            let zero = Complex64::new(0.0, 0.0);
            let one = Complex64::new(1.0, 0.0);
            RepMatrices::Unit(
                M2c::new(s, one, zero, si),
                M2c::new(s, zero, Complex64::new(u, 0.0), si),
            )
        }
    }
}

/// Evaluates a two-generator word on given matrices, inverses by adjugate.
///
/// The product accumulates without intermediate renormalization: word
/// images return to moderate entry size even when partial products grow
/// large, and renormalizing mid-chain injects the cancellation error of
/// the large-scale determinant into every entry. One rescale at the end
/// suffices.
pub fn eval_word(word: &Word, a: &RealMatrix, b: &RealMatrix) -> RealMatrix {
    let to4 = |m: &RealMatrix| [m.a, m.b, m.c, m.d];
    let inv4 = |m: &RealMatrix| [m.d, -m.b, -m.c, m.a];
    let mut acc = [1.0, 0.0, 0.0, 1.0];
    for &(g, e) in word.letters() {
        let m = match (g, e > 0) {
            (0, true) => to4(a),
            (0, false) => inv4(a),
            (1, true) => to4(b),
            (1, false) => inv4(b),
            _ => unreachable!("two-generator words only"),
        };
        acc = [
            acc[0] * m[0] + acc[1] * m[2],
            acc[0] * m[1] + acc[1] * m[3],
            acc[2] * m[0] + acc[3] * m[2],
            acc[2] * m[1] + acc[3] * m[3],
        ];
    }
    RealMatrix::new_normalized(acc[0], acc[1], acc[2], acc[3])
        .expect("word image of unimodular matrices renormalizes")
}

fn eval_word_c(word: &Word, a: &M2c, b: &M2c) -> M2c {
    let inv = |m: &M2c| M2c::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]);
    let mut acc = M2c::identity();
    for &(g, e) in word.letters() {
        let m = match (g, e > 0) {
            (0, true) => *a,
            (0, false) => inv(a),
            (1, true) => *b,
            (1, false) => inv(b),
            _ => unreachable!("two-generator words only"),
        };
        acc *= m;
    }
    acc
}

/// Frobenius distance of the relator image from ±identity, minimized over
/// the sign (the projective quotient).
pub fn relator_residual(p: &Presentation, a: &RealMatrix, b: &RealMatrix) -> f64 {
    let m = eval_word(&p.relators[0], a, b);
    m.dist_projective_identity()
}

/// Like `relator_residual` but with the sign fixed, as tracing requires.
pub fn relator_residual_signed(p: &Presentation, chart: &Chart, sign: f64) -> f64 {
    match riley_rep(chart) {
        RepMatrices::Real(a, b) => {
            let m = eval_word(&p.relators[0], &a, &b);
            let id = RealMatrix { a: sign, b: 0.0, c: 0.0, d: sign };
            m.dist(&id)
        }
        RepMatrices::Unit(a, b) => {
            let m = eval_word_c(&p.relators[0], &a, &b);
            let d = m - M2c::identity() * Complex64::new(sign, 0.0);
            d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
        }
    }
}

/// Character class of a real trace triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharacterClass {
    Sl2r,
    Su2,
    Reducible,
}

/// Classifies by κ = x² + y² + z² − xyz − 4 = tr[A,B] − 2: positive means
/// an irreducible SL(2,R) character, negative SU(2), zero reducible. The
/// dichotomy between the signs separates the two real forms only where all
/// three traces lie in [−2, 2] or κ vanishes; the real Riley chart never
/// feeds the SU(2) branch because its points are real matrices already.
pub fn classify_real_character(x: f64, y: f64, z: f64) -> CharacterClass {
    let kappa = x * x + y * y + z * z - x * y * z - 4.0;
    if kappa > KAPPA_TOL {
        CharacterClass::Sl2r
    } else if kappa < -KAPPA_TOL {
        CharacterClass::Su2
    } else {
        CharacterClass::Reducible
    }
}

/// The trace triple (tr A, tr B, tr AB) of a chart point; real in both
/// charts since tr AB = s² + s⁻² + u.
pub fn character(chart: &Chart) -> (f64, f64, f64) {
    match *chart {
        Chart::RealRiley { s, u } => {
            let t = s + 1.0 / s;
            (t, t, s * s + 1.0 / (s * s) + u)
        }
        Chart::UnitRiley { theta, u } => {
            let t = 2.0 * theta.cos();
            (t, t, 2.0 * (2.0 * theta).cos() + u)
        }
    }
}

/// κ of a chart point. Equals u·(u + (s − s⁻¹)²) on the real chart and
/// u·(u − 4 sin²θ) on the unit chart; vanishing κ is the reducible locus.
pub fn kappa(chart: &Chart) -> f64 {
    let (x, y, z) = character(chart);
    x * x + y * y + z * z - x * y * z - 4.0
}

/// Value and chart-derivatives of a word image: m, ∂m/∂p, ∂m/∂u where p is
/// s or θ. The generator jets are exact; products follow Leibniz.
struct Jet {
    m: M2,
    dp: M2,
    du: M2,
}

struct JetC {
    m: M2c,
    dp: M2c,
    du: M2c,
}

fn generator_jets(chart: &Chart) -> ([Jet; 2], [Jet; 2]) {
    // returns jets for (a, b) and their inverses; real chart only
    let Chart::RealRiley { s, u } = *chart else {
        unreachable!("real jets on the real chart only")
    };
    let a = Jet {
        m: M2::new(s, 1.0, 0.0, 1.0 / s),
        dp: M2::new(1.0, 0.0, 0.0, -1.0 / (s * s)),
        du: M2::zeros(),
    };
    let b = Jet {
        m: M2::new(s, 0.0, u, 1.0 / s),
        dp: M2::new(1.0, 0.0, 0.0, -1.0 / (s * s)),
        du: M2::new(0.0, 0.0, 1.0, 0.0),
    };
    let ai = Jet {
        m: M2::new(1.0 / s, -1.0, 0.0, s),
        dp: M2::new(-1.0 / (s * s), 0.0, 0.0, 1.0),
        du: M2::zeros(),
    };
    let bi = Jet {
        m: M2::new(1.0 / s, 0.0, -u, s),
        dp: M2::new(-1.0 / (s * s), 0.0, 0.0, 1.0),
        du: M2::new(0.0, 0.0, -1.0, 0.0),
    };
    ([a, b], [ai, bi])
}

fn generator_jets_c(chart: &Chart) -> ([JetC; 2], [JetC; 2]) {
    let Chart::UnitRiley { theta, u } = *chart else {
        unreachable!("complex jets on the unit chart only")
    };
    let s = Complex64::from_polar(1.0, theta);
    let si = s.conj();
    let i = Complex64::new(0.0, 1.0);
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let uu = Complex64::new(u, 0.0);
    let a = JetC {
        m: M2c::new(s, one, zero, si),
        dp: M2c::new(i * s, zero, zero, -i * si),
        du: M2c::zeros(),
    };
    let b = JetC {
        m: M2c::new(s, zero, uu, si),
        dp: M2c::new(i * s, zero, zero, -i * si),
        du: M2c::new(zero, zero, one, zero),
    };
    let ai = JetC {
        m: M2c::new(si, -one, zero, s),
        dp: M2c::new(-i * si, zero, zero, i * s),
        du: M2c::zeros(),
    };
    let bi = JetC {
        m: M2c::new(si, zero, -uu, s),
        dp: M2c::new(-i * si, zero, zero, i * s),
        du: M2c::new(zero, zero, -one, zero),
    };
    ([a, b], [ai, bi])
}

/// Relator image with chart derivatives in the real chart.
fn relator_jet(word: &Word, chart: &Chart) -> Jet {
    let (pos, neg) = generator_jets(chart);
    let mut acc = Jet { m: M2::identity(), dp: M2::zeros(), du: M2::zeros() };
    for &(g, e) in word.letters() {
        let l = if e > 0 { &pos[g] } else { &neg[g] };
        acc = Jet {
            m: acc.m * l.m,
            dp: acc.dp * l.m + acc.m * l.dp,
            du: acc.du * l.m + acc.m * l.du,
        };
    }
    acc
}

fn relator_jet_c(word: &Word, chart: &Chart) -> JetC {
    let (pos, neg) = generator_jets_c(chart);
    let mut acc = JetC { m: M2c::identity(), dp: M2c::zeros(), du: M2c::zeros() };
    for &(g, e) in word.letters() {
        let l = if e > 0 { &pos[g] } else { &neg[g] };
        acc = JetC {
            m: acc.m * l.m,
            dp: acc.dp * l.m + acc.m * l.dp,
            du: acc.du * l.m + acc.m * l.du,
        };
    }
    acc
}

/// Stacked residual F = vec(ρ(r) − sign·I) and its Jacobian in the two
/// chart unknowns: 4×2 real on the real chart, 8×2 on the unit chart.
pub fn residual_system(p: &Presentation, chart: &Chart, sign: f64) -> (DVector<f64>, DMatrix<f64>) {
    match chart {
        Chart::RealRiley { .. } => {
            let jet = relator_jet(&p.relators[0], chart);
            let target = M2::identity() * sign;
            let mut f = DVector::zeros(4);
            let mut j = DMatrix::zeros(4, 2);
            for (k, (row, col)) in [(0, 0), (0, 1), (1, 0), (1, 1)].iter().enumerate() {
                f[k] = jet.m[(*row, *col)] - target[(*row, *col)];
                j[(k, 0)] = jet.dp[(*row, *col)];
                j[(k, 1)] = jet.du[(*row, *col)];
            }
            (f, j)
        }
        Chart::UnitRiley { .. } => {
            let jet = relator_jet_c(&p.relators[0], chart);
            let target = M2c::identity() * Complex64::new(sign, 0.0);
            let mut f = DVector::zeros(8);
            let mut j = DMatrix::zeros(8, 2);
            for (k, (row, col)) in [(0, 0), (0, 1), (1, 0), (1, 1)].iter().enumerate() {
                let d = jet.m[(*row, *col)] - target[(*row, *col)];
                f[2 * k] = d.re;
                f[2 * k + 1] = d.im;
                j[(2 * k, 0)] = jet.dp[(*row, *col)].re;
                j[(2 * k + 1, 0)] = jet.dp[(*row, *col)].im;
                j[(2 * k, 1)] = jet.du[(*row, *col)].re;
                j[(2 * k + 1, 1)] = jet.du[(*row, *col)].im;
            }
            (f, j)
        }
    }
}

/// One transversality constraint closing the Gauss–Newton system.
#[derive(Debug, Clone, Copy)]
pub enum Constraint {
    /// Hold chart coordinate 0 or 1 fixed at its starting value.
    Freeze(usize),
    /// Pseudo-arclength hyperplane n·(p, u) = c.
    Hyperplane { n: [f64; 2], c: f64 },
}

/// Gauss–Newton correction of a chart point onto the relator variety, with
/// the relator sign fixed. Converges to `NEWTON_TOL` within 25 iterations
/// or reports failure; a Jacobian whose singular values all collapse near a
/// converged point signals a branch point.
pub fn newton_correct(
    p: &Presentation,
    start: &Chart,
    sign: f64,
    constraint: &Constraint,
) -> Result<Chart, Error> {
    let mut point = *start;
    let (crow, cval) = match *constraint {
        Constraint::Freeze(idx) => {
            let mut n = [0.0; 2];
            n[idx] = 1.0;
            let (a, b) = start.params();
            (n, if idx == 0 { a } else { b })
        }
        Constraint::Hyperplane { n, c } => (n, c),
    };
    for _ in 0..25 {
        let (f, j) = residual_system(p, &point, sign);
        let (a, b) = point.params();
        let res = f.norm();
        let cres = crow[0] * a + crow[1] * b - cval;
        if res < NEWTON_TOL && cres.abs() < 1e-12 {
            // converged; a rank-deficient Jacobian here is a branch point
            let svals = j.clone().svd(false, false).singular_values;
            let smax = svals.max();
            if smax < 1e-8 {
                return Err(Error::BranchPoint(format!(
                    "relator Jacobian rank collapsed at ({a}, {b})"
                )));
            }
            return Ok(point);
        }
        // augmented system: residual rows plus the constraint row
        let rows = f.len() + 1;
        let mut aug = DMatrix::zeros(rows, 2);
        let mut rhs = DVector::zeros(rows);
        for r in 0..f.len() {
            aug[(r, 0)] = j[(r, 0)];
            aug[(r, 1)] = j[(r, 1)];
            rhs[r] = -f[r];
        }
        aug[(rows - 1, 0)] = crow[0];
        aug[(rows - 1, 1)] = crow[1];
        rhs[rows - 1] = -cres;
        let svd = aug.svd(true, true);
        let step = svd
            .solve(&rhs, 1e-13)
            .map_err(|e| Error::Convergence(format!("linear solve failed: {e}")))?;
        if !step[0].is_finite() || !step[1].is_finite() {
            return Err(Error::Convergence("non-finite Newton step".into()));
        }
        point = point.with_params(a + step[0], b + step[1]);
        if point.validate().is_err() {
            return Err(Error::Convergence(
                "Newton step left the chart's valid region".into(),
            ));
        }
    }
    Err(Error::Convergence(format!(
        "no convergence after 25 iterations from ({}, {})",
        start.params().0,
        start.params().1
    )))
}

/// The unit tangent to the solution curve at a converged point: the right
/// singular vector of the relator Jacobian for its smallest singular value.
pub fn curve_tangent(p: &Presentation, chart: &Chart, sign: f64) -> Result<[f64; 2], Error> {
    let (_, j) = residual_system(p, chart, sign);
    let svd = j.svd(false, true);
    let vt = svd.v_t.as_ref().expect("requested right vectors");
    let sv = &svd.singular_values;
    if sv[0] < 1e-8 {
        return Err(Error::Convergence("rank collapse: no well-defined tangent".into()));
    }
    // singular values are sorted descending; the last row of Vᵀ spans the
    // numerical null space
    let t = [vt[(1, 0)], vt[(1, 1)]];
    let n = (t[0] * t[0] + t[1] * t[1]).sqrt();
    Ok([t[0] / n, t[1] / n])
}

/// Polynomials in u over a fixed s: dense f64 coefficients, low degree.
fn upoly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn upoly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

/// 2×2 matrix with u-polynomial entries.
type UMat = [[Vec<f64>; 2]; 2];

fn umat_mul(a: &UMat, b: &UMat) -> UMat {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            upoly_add(&upoly_mul(&a[i][0], &b[0][j]), &upoly_mul(&a[i][1], &b[1][j]))
        })
    })
}

/// Entries of ρ(word) at fixed s as polynomials in u.
fn word_upoly(word: &Word, s: f64) -> UMat {
    let c = |v: f64| vec![v];
    let gen: [UMat; 2] = [
        [[c(s), c(1.0)], [c(0.0), c(1.0 / s)]],
        [[c(s), c(0.0)], [vec![0.0, 1.0], c(1.0 / s)]],
    ];
    let inv: [UMat; 2] = [
        [[c(1.0 / s), c(-1.0)], [c(0.0), c(s)]],
        [[c(1.0 / s), c(0.0)], [vec![0.0, -1.0], c(s)]],
    ];
    let mut acc: UMat = [[c(1.0), c(0.0)], [c(0.0), c(1.0)]];
    for &(g, e) in word.letters() {
        let m = if e > 0 { &gen[g] } else { &inv[g] };
        acc = umat_mul(&acc, m);
    }
    acc
}

/// Real roots of a dense f64 polynomial via companion-matrix eigenvalues,
/// keeping eigenvalues whose imaginary part is negligible.
fn real_poly_roots(coeffs: &[f64]) -> Vec<f64> {
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let mut c: Vec<f64> = coeffs.to_vec();
    while c.last().map_or(false, |&x| x.abs() < 1e-12 * scale) {
        c.pop();
    }
    if c.len() <= 1 {
        return Vec::new();
    }
    let n = c.len() - 1;
    let lead = c[n];
    let mut comp = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        comp[(k, n - 1)] = -c[k] / lead;
        if k + 1 < n {
            comp[(k + 1, k)] = 1.0;
        }
    }
    let eig = comp.complex_eigenvalues();
    let mut out: Vec<f64> = eig
        .iter()
        .filter(|z| z.im.abs() < 1e-8 * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Candidate u-values at a fixed slice of the real chart: real roots of the
/// lower-left entry of ρ(r) as a polynomial in u. The entry vanishes at
/// every solution of ρ(r) = ±I, so the root set is a superset of the slice
/// of the representation curve; each root is Newton-polished and kept only
/// if the full projective residual confirms it.
pub fn seed_u_roots(p: &Presentation, s: f64) -> Vec<(f64, f64)> {
    let entry = &word_upoly(&p.relators[0], s)[1][0];
    let mut seeds = Vec::new();
    for u0 in real_poly_roots(entry) {
        let chart = Chart::RealRiley { s, u: u0 };
        if chart.validate().is_err() {
            continue;
        }
        // pick the relator sign the candidate is closest to
        let RepMatrices::Real(a, b) = riley_rep(&chart) else { unreachable!() };
        let m = eval_word(&p.relators[0], &a, &b);
        let sign = if m.trace() >= 0.0 { 1.0 } else { -1.0 };
        let polished = match newton_correct(p, &chart, sign, &Constraint::Freeze(0)) {
            Ok(c) => c,
            Err(_) => continue,
        };
        let (_, u) = polished.params();
        if relator_residual_signed(p, &polished, sign) < 1e-9
            && seeds
                .iter()
                .all(|&(us, _): &(f64, f64)| (us - u).abs() > 1e-9 * (1.0 + u.abs()))
        {
            seeds.push((u, sign));
        }
    }
    seeds.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    seeds
}

/// Unit-chart analog of `seed_u_roots` at a fixed angle θ.
pub fn seed_u_roots_unit(p: &Presentation, theta: f64) -> Vec<(f64, f64)> {
    // the lower-left entry is again a polynomial in u, now with complex
    // coefficients; real roots of its real and imaginary parts must agree,
    // so root candidates come from the real part and are filtered
    let s = Complex64::from_polar(1.0, theta);
    let c = |v: Complex64| vec![v];
    let r = |v: f64| Complex64::new(v, 0.0);
    type UMatC = [[Vec<Complex64>; 2]; 2];
    let gen: [UMatC; 2] = [
        [[c(s), c(r(1.0))], [c(r(0.0)), c(s.conj())]],
        [[c(s), c(r(0.0))], [vec![r(0.0), r(1.0)], c(s.conj())]],
    ];
    let inv: [UMatC; 2] = [
        [[c(s.conj()), c(r(-1.0))], [c(r(0.0)), c(s)]],
        [[c(s.conj()), c(r(0.0))], [vec![r(0.0), r(-1.0)], c(s)]],
    ];
    let mul = |a: &[Complex64], b: &[Complex64]| -> Vec<Complex64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![r(0.0); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    let add = |a: &[Complex64], b: &[Complex64]| -> Vec<Complex64> {
        let mut out = vec![r(0.0); a.len().max(b.len())];
        for (i, x) in a.iter().enumerate() {
            out[i] += x;
        }
        for (i, y) in b.iter().enumerate() {
            out[i] += y;
        }
        out
    };
    let mut acc: UMatC = [[c(r(1.0)), c(r(0.0))], [c(r(0.0)), c(r(1.0))]];
    for &(g, e) in p.relators[0].letters() {
        let m = if e > 0 { &gen[g] } else { &inv[g] };
        acc = std::array::from_fn(|i| {
            std::array::from_fn(|j| add(&mul(&acc[i][0], &m[0][j]), &mul(&acc[i][1], &m[1][j])))
        });
    }
    let entry = &acc[1][0];
    let re: Vec<f64> = entry.iter().map(|z| z.re).collect();
    let im: Vec<f64> = entry.iter().map(|z| z.im).collect();
    let mut candidates = real_poly_roots(&re);
    candidates.extend(real_poly_roots(&im));
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut seeds: Vec<(f64, f64)> = Vec::new();
    for u0 in candidates {
        let chart = Chart::UnitRiley { theta, u: u0 };
        if chart.validate().is_err() {
            continue;
        }
        let RepMatrices::Unit(a, b) = riley_rep(&chart) else { unreachable!() };
        let m = eval_word_c(&p.relators[0], &a, &b);
        let sign = if m.trace().re >= 0.0 { 1.0 } else { -1.0 };
        let polished = match newton_correct(p, &chart, sign, &Constraint::Freeze(0)) {
            Ok(c) => c,
            Err(_) => continue,
        };
        let (_, u) = polished.params();
        if relator_residual_signed(p, &polished, sign) < 1e-9
            && seeds
                .iter()
                .all(|&(us, _): &(f64, f64)| (us - u).abs() > 1e-9 * (1.0 + u.abs()))
        {
            seeds.push((u, sign));
        }
    }
    seeds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::two_bridge;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn riley_rep_examples() {
        let RepMatrices::Real(a, b) = riley_rep(&Chart::RealRiley { s: 2.0, u: 0.0 }) else {
            panic!()
        };
        assert_eq!((a.a, a.b, a.c, a.d), (2.0, 1.0, 0.0, 0.5));
        assert_eq!((b.a, b.b, b.c, b.d), (2.0, 0.0, 0.0, 0.5));
        assert!((a.det() - 1.0).abs() < 1e-15 && (b.det() - 1.0).abs() < 1e-15);
        assert_eq!(a.trace(), b.trace());
        // u = 0 is the reducible diagonal-ish pair: commutator is trivial
        let comm = a.mul(&b).mul(&a.inverse()).mul(&b.inverse());
        assert!((comm.trace() - 2.0).abs() < 1e-12);

        let RepMatrices::Real(a, b) = riley_rep(&Chart::RealRiley { s: 2.0, u: 1.0 }) else {
            panic!()
        };
        assert!((a.mul(&b).trace() - 5.25).abs() < 1e-15);

        let RepMatrices::Unit(a, _) =
            riley_rep(&Chart::UnitRiley { theta: std::f64::consts::PI / 3.0, u: 1.0 })
        else {
            panic!()
        };
        let tr = a.trace();
        assert!((tr.re - 1.0).abs() < 1e-14 && tr.im.abs() < 1e-14);
    }

    #[test]
    fn chart_validation() {
        assert!(Chart::RealRiley { s: 2.0, u: 0.3 }.validate().is_ok());
        assert!(Chart::RealRiley { s: 1.0 + 1e-9, u: 0.0 }.validate().is_err());
        assert!(Chart::RealRiley { s: -1.0, u: 0.0 }.validate().is_err());
        assert!(Chart::UnitRiley { theta: 0.5, u: 1.0 }.validate().is_ok());
        assert!(Chart::UnitRiley { theta: 1e-9, u: 1.0 }.validate().is_err());
        assert!(Chart::UnitRiley { theta: std::f64::consts::PI, u: 1.0 }.validate().is_err());
    }

    #[test]
    fn character_class_examples() {
        assert_eq!(classify_real_character(3.0, 3.0, 7.0), CharacterClass::Reducible);
        assert_eq!(classify_real_character(0.0, 0.0, 0.0), CharacterClass::Su2);
        // κ(3, 3, 8) = 9 + 9 + 64 − 72 − 4 = 6 > 0
        assert_eq!(classify_real_character(3.0, 3.0, 8.0), CharacterClass::Sl2r);
    }

    #[test]
    fn kappa_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..300 {
            let s: f64 = rng.gen_range(1.1..3.0);
            let u: f64 = rng.gen_range(-4.0..4.0);
            let k = kappa(&Chart::RealRiley { s, u });
            let d = s - 1.0 / s;
            assert!((k - u * (u + d * d)).abs() < 1e-10 * (1.0 + k.abs()));

            let theta: f64 = rng.gen_range(0.1..3.0);
            let k = kappa(&Chart::UnitRiley { theta, u });
            let sn = theta.sin();
            assert!((k - u * (u - 4.0 * sn * sn)).abs() < 1e-10 * (1.0 + k.abs()));
        }
    }

    #[test]
    fn residual_vanishes_at_bifurcation_only_on_reducible_slice() {
        // at u = 0 the pair is reducible but not abelian, and the relator
        // image is parabolic; it degenerates to the identity exactly when
        // s² is a root of the Alexander polynomial
        let pres = two_bridge(5, 3).unwrap();
        let s_bif = (0.5 * (3.0 + 5f64.sqrt())).sqrt();
        let RepMatrices::Real(a, b) = riley_rep(&Chart::RealRiley { s: s_bif, u: 0.0 }) else {
            panic!()
        };
        assert!(relator_residual(&pres, &a, &b) < 1e-12);

        for s in [1.2, 1.5, 1.7, 2.0] {
            let RepMatrices::Real(a, b) = riley_rep(&Chart::RealRiley { s, u: 0.0 }) else {
                panic!()
            };
            assert!(relator_residual(&pres, &a, &b) > 1e-1, "s = {s}");
        }

        let RepMatrices::Real(a, b) = riley_rep(&Chart::RealRiley { s: 1.7, u: 0.37 }) else {
            panic!()
        };
        assert!(relator_residual(&pres, &a, &b) > 1e-3);
    }

    #[test]
    fn upoly_matches_direct_evaluation() {
        let pres = two_bridge(7, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..50 {
            let s: f64 = rng.gen_range(1.1..2.5);
            let u: f64 = rng.gen_range(-3.0..3.0);
            let entry = &word_upoly(&pres.relators[0], s)[1][0];
            let val: f64 =
                entry.iter().enumerate().map(|(k, c)| c * u.powi(k as i32)).sum();
            // compare against a plain product with no renormalization, the
            // arithmetic the expanded polynomial mirrors exactly
            let mut m = [[1.0f64, 0.0], [0.0, 1.0]];
            for &(g, e) in pres.relators[0].letters() {
                let gm = match (g, e > 0) {
                    (0, true) => [[s, 1.0], [0.0, 1.0 / s]],
                    (0, false) => [[1.0 / s, -1.0], [0.0, s]],
                    (1, true) => [[s, 0.0], [u, 1.0 / s]],
                    (1, false) => [[1.0 / s, 0.0], [-u, s]],
                    _ => unreachable!(),
                };
                m = [
                    [m[0][0] * gm[0][0] + m[0][1] * gm[1][0], m[0][0] * gm[0][1] + m[0][1] * gm[1][1]],
                    [m[1][0] * gm[0][0] + m[1][1] * gm[1][0], m[1][0] * gm[0][1] + m[1][1] * gm[1][1]],
                ];
            }
            let direct = m[1][0];
            assert!(
                (val - direct).abs() < 1e-8 * (1.0 + direct.abs()),
                "upoly {val} vs direct {direct} at s={s}, u={u}"
            );
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let pres = two_bridge(5, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        for _ in 0..40 {
            let s: f64 = rng.gen_range(1.2..2.0);
            let u: f64 = rng.gen_range(-1.0..1.0);
            let chart = Chart::RealRiley { s, u };
            let (f0, j) = residual_system(&pres, &chart, 1.0);
            let h = 1e-7;
            for (col, dchart) in [
                Chart::RealRiley { s: s + h, u },
                Chart::RealRiley { s, u: u + h },
            ]
            .iter()
            .enumerate()
            {
                let (f1, _) = residual_system(&pres, dchart, 1.0);
                for row in 0..4 {
                    let fd = (f1[row] - f0[row]) / h;
                    assert!(
                        (fd - j[(row, col)]).abs() < 1e-5 * (1.0 + fd.abs()),
                        "row {row} col {col}: fd {fd} vs jet {}",
                        j[(row, col)]
                    );
                }
            }

            let chart = Chart::UnitRiley { theta: rng.gen_range(0.3..2.8), u: rng.gen_range(-1.0..3.0) };
            let (th, uu) = chart.params();
            let (f0, j) = residual_system(&pres, &chart, 1.0);
            for (col, dchart) in [
                Chart::UnitRiley { theta: th + h, u: uu },
                Chart::UnitRiley { theta: th, u: uu + h },
            ]
            .iter()
            .enumerate()
            {
                let (f1, _) = residual_system(&pres, dchart, 1.0);
                for row in 0..8 {
                    let fd = (f1[row] - f0[row]) / h;
                    assert!(
                        (fd - j[(row, col)]).abs() < 1e-5 * (1.0 + fd.abs()),
                        "unit row {row} col {col}: fd {fd} vs jet {}",
                        j[(row, col)]
                    );
                }
            }
        }
    }

    #[test]
    fn newton_converges_on_figure_eight_slice() {
        let pres = two_bridge(5, 3).unwrap();
        // the real arc bifurcates at s ≈ 1.618 and persists for larger s,
        // with two roots per slice; below the bifurcation the slice is empty
        assert!(seed_u_roots(&pres, 1.2).is_empty());
        assert!(seed_u_roots(&pres, 1.5).is_empty());
        let seeds = seed_u_roots(&pres, 1.7);
        assert_eq!(seeds.len(), 2, "expected both branches at s = 1.7: {seeds:?}");
        for &(u, sign) in &seeds {
            assert!(u.abs() > 1e-6, "reducible root u = {u} should have been rejected");
            let chart = Chart::RealRiley { s: 1.7, u };
            assert!(relator_residual_signed(&pres, &chart, sign) < 1e-9);
            // perturb and recover with the frozen-s constraint
            let off = Chart::RealRiley { s: 1.7, u: u + 1e-3 };
            let back = newton_correct(&pres, &off, sign, &Constraint::Freeze(0)).unwrap();
            assert!((back.params().1 - u).abs() < 1e-8);
        }

        // an exactly converged point moves by at most the solver tolerance
        let (u, sign) = seeds[0];
        let chart = Chart::RealRiley { s: 1.7, u };
        let again = newton_correct(&pres, &chart, sign, &Constraint::Freeze(0)).unwrap();
        assert!((again.params().1 - u).abs() < 1e-10);

        // a far point fails
        let far = Chart::RealRiley { s: 1.7, u: 50.0 };
        assert!(newton_correct(&pres, &far, 1.0, &Constraint::Freeze(0)).is_err());
    }

    #[test]
    fn tangent_is_orthogonal_to_gradient_rows() {
        let pres = two_bridge(5, 3).unwrap();
        let seeds = seed_u_roots(&pres, 1.7);
        let (u, sign) = *seeds.iter().find(|(u, _)| u.abs() > 1e-6).unwrap();
        let chart = Chart::RealRiley { s: 1.7, u };
        let t = curve_tangent(&pres, &chart, sign).unwrap();
        let (_, j) = residual_system(&pres, &chart, sign);
        for row in 0..4 {
            let dot = j[(row, 0)] * t[0] + j[(row, 1)] * t[1];
            assert!(dot.abs() < 1e-6, "tangent not in null space: row {row} dot {dot}");
        }
    }

    #[test]
    fn unit_chart_seeds_on_figure_eight() {
        let pres = two_bridge(5, 3).unwrap();
        // elliptic representations exist for angles in the open interval
        // where the trace field allows them; θ = 1.2 is such a slice
        let seeds = seed_u_roots_unit(&pres, 1.2);
        assert!(!seeds.is_empty());
        for &(u, sign) in &seeds {
            let chart = Chart::UnitRiley { theta: 1.2, u };
            assert!(relator_residual_signed(&pres, &chart, sign) < 1e-9, "u = {u}");
        }
    }
}
