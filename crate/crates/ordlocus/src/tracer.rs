//! Arc continuation on the representation curve, with lifted boundary
//! invariants evaluated at every accepted point.
//!
//! A converged chart point gives matrices ρ(μ), ρ(λ) that commute and fix
//! a common boundary point v. Lifting the generators to the universal
//! cover and normalizing the lifted relator to the exact identity makes
//! the pair (ev(μ̃), ev(λ̃)) well defined up to a single integer gauge,
//! the choice of homomorphism π₁ → center added to the lift; the gauge is
//! pinned by reducing the meridian translation number. Continuation runs
//! a predictor along the curve tangent and a Gauss–Newton corrector on a
//! pseudo-arclength hyperplane, and classifies how each direction ends.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::presentation::{Presentation, Word};
use crate::psl2r::{
    cayley_to_disk, central, classify, compose, datum_at, ev, fixed_data, invert, is_fixed_by,
    lift, lifted_identity, trans, DiskMatrix, ElementClass, LiftedElement, RealMatrix,
};
use crate::riley::{
    character, classify_real_character, curve_tangent, eval_word, kappa, newton_correct,
    relator_residual_signed, riley_rep, Chart, CharacterClass, Constraint, RepMatrices,
};
use crate::Error;

type M2c = Matrix2<Complex64>;

/// Largest relator residual accepted at an emitted point.
pub const REP_RESIDUAL_TOL: f64 = 1e-9;
/// Tolerance on the lifted relator landing on the exact identity.
pub const LIFT_TOL: f64 = 1e-8;
/// Chordal tolerance for the peripheral pair sharing its fixed points.
pub const COMMUTE_TOL: f64 = 1e-6;
/// Coarse chordal bound on the non-anchor shared fixed points, sized to
/// reject unrelated axes while riding out cancellation noise in long
/// word products.
const SHARED_AXIS_TOL: f64 = 1e-2;
/// |κ| below which continuation declares a reducible junction.
pub const KAPPA_STOP: f64 = 1e-7;
/// Proximity to s = 1 treated as running into the parabolic wall. The
/// chart is only valid down to 1e-6, and adaptive steps bottom out well
/// before that, so the operational wall sits at the step-resolution scale.
pub const PARABOLIC_WALL: f64 = 1e-3;

/// Boundary type of a traced point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointKind {
    Hyperbolic,
    Parabolic,
    Central,
    /// Unit-chart point reported in elliptic translation coordinates.
    EllipticEl,
}

/// One sample of a locus arc: extension coordinates, integer labels, and
/// the chart point it came from. Points emitted analytically (the abelian
/// axis, appended parabolic limits) carry no chart.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ArcPoint {
    pub x: f64,
    pub y: f64,
    pub i: i64,
    pub j: i64,
    pub chart: Option<Chart>,
    pub kind: PointKind,
    pub near_ideal: bool,
    pub near_reducible: bool,
}

/// A fully checked representation point.
#[derive(Debug, Clone)]
pub struct RepPoint {
    pub point: ArcPoint,
    pub sign: f64,
    pub character: (f64, f64, f64),
    pub residual: f64,
}

/// How a traced direction stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndKind {
    /// Ran into s = 1; the exact origin is appended as the limit point.
    ParabolicOrigin,
    /// κ reached zero: the arc meets the reducible locus.
    ReducibleJunction,
    /// Left the plot window; the exiting point is kept and flagged.
    WindowExit,
    /// The relator Jacobian lost rank on the curve.
    BranchPoint,
    /// Point budget exhausted.
    Budget,
    /// The corrector failed for no identifiable geometric reason.
    CorrectionFailure,
    /// The integer labels jumped; the arc was split here.
    SheetSplit,
    /// Unit-chart angle ran into θ ∈ {0, π}.
    ChartBoundary,
    /// The trace returned to its seed: a closed component.
    Closed,
}

/// One traced arc: an ordered polyline with an end classification per side.
#[derive(Debug, Clone)]
pub struct TracedArc {
    pub points: Vec<ArcPoint>,
    pub end_neg: EndKind,
    pub end_pos: EndKind,
    pub sign: f64,
    pub diagnostics: Vec<String>,
}

/// Continuation controls; the window is shared with the locus builder.
#[derive(Debug, Clone, Copy)]
pub struct TraceParams {
    pub x_max: f64,
    pub y_max: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub max_points: usize,
}

impl Default for TraceParams {
    fn default() -> Self {
        TraceParams { x_max: 1.5, y_max: 8.0, min_step: 1e-4, max_step: 0.05, max_points: 8000 }
    }
}

/// Evaluates a word in the universal cover by composing generator lifts.
pub fn eval_word_lifted(word: &Word, la: &LiftedElement, lb: &LiftedElement) -> LiftedElement {
    let gens = [*la, *lb];
    let invs = [invert(la), invert(lb)];
    let mut acc = lifted_identity();
    for &(g, e) in word.letters() {
        acc = compose(&acc, if e > 0 { &gens[g] } else { &invs[g] });
    }
    acc
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    // returns (g, x, y) with a·x + b·y = g ≥ 0
    if b == 0 {
        return if a < 0 { (-a, -1, 0) } else { (a, 1, 0) };
    }
    let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
    (g, y, x - a.div_euclid(b) * y)
}

/// Adjusts generator lifts by central elements so the lifted relator is
/// the exact identity of the cover, not merely central. The correction
/// solves e_a·Δp + e_b·Δq = −m over the relator's exponent sums.
pub fn normalize_lifts(
    pres: &Presentation,
    la: &LiftedElement,
    lb: &LiftedElement,
) -> Result<(LiftedElement, LiftedElement), Error> {
    let rel = eval_word_lifted(&pres.relators[0], la, lb);
    if rel.gamma.norm() > LIFT_TOL {
        return Err(Error::Sheet(format!(
            "lifted relator is not central: |γ| = {:.3e}",
            rel.gamma.norm()
        )));
    }
    let m = (rel.omega / PI).round();
    if (rel.omega - m * PI).abs() > LIFT_TOL {
        return Err(Error::Sheet(format!(
            "lifted relator ω = {} is not a multiple of π",
            rel.omega
        )));
    }
    let m = m as i64;
    let exps = pres.relators[0].exponent_vector(pres.generators);
    let (ea, eb) = (exps[0], exps[1]);
    if ea == 0 && eb == 0 && m != 0 {
        return Err(Error::Sheet(
            "relator has zero exponent sums but a central obstruction".into(),
        ));
    }
    let (dp, dq) = if m == 0 {
        (0, 0)
    } else {
        let (g, x, y) = ext_gcd(ea, eb);
        if g == 0 || m % g != 0 {
            return Err(Error::Sheet(format!(
                "{ea}·Δp + {eb}·Δq = {} has no integer solution",
                -m
            )));
        }
        (x * (-m / g), y * (-m / g))
    };
    let la2 = compose(la, &central(dp));
    let lb2 = compose(lb, &central(dq));
    let check = eval_word_lifted(&pres.relators[0], &la2, &lb2);
    if check.gamma.norm() > LIFT_TOL || check.omega.abs() > LIFT_TOL {
        return Err(Error::Sheet(format!(
            "lifted relator residual ({:.3e}, {:.3e}) after normalization",
            check.gamma.norm(),
            check.omega.abs()
        )));
    }
    Ok((la2, lb2))
}

/// Direction spanning the gauge freedom left by `normalize_lifts`: adding
/// central(t·wa) to the first lift and central(t·wb) to the second keeps
/// the lifted relator trivial for every integer t.
fn gauge_kernel(pres: &Presentation) -> (i64, i64) {
    let exps = pres.relators[0].exponent_vector(pres.generators);
    let (ea, eb) = (exps[0], exps[1]);
    if ea == 0 && eb == 0 {
        return (0, 0);
    }
    let (g, _, _) = ext_gcd(ea, eb);
    (eb / g, -ea / g)
}

/// How much a word's lifted translation number shifts per unit of gauge.
fn gauge_weight(word: &Word, gens: usize, kernel: (i64, i64)) -> i64 {
    let e = word.exponent_vector(gens);
    kernel.0 * e[0] + kernel.1 * e[1]
}

/// Gauge weights (k_mu, k_la) of the peripheral pair: how many central
/// units each lift shifts per unit of the residual gauge direction.
pub fn peripheral_gauge(pres: &Presentation) -> (i64, i64) {
    let kernel = gauge_kernel(pres);
    (
        gauge_weight(&pres.meridian, pres.generators, kernel),
        gauge_weight(&pres.longitude, pres.generators, kernel),
    )
}

/// Reduces raw integer labels into the pinned gauge, meridian label in
/// [0, |k_mu|). Identity when the meridian carries no gauge weight.
pub fn reduce_labels(i_raw: i64, j_raw: i64, kmu: i64, kla: i64) -> (i64, i64) {
    if kmu == 0 {
        return (i_raw, j_raw);
    }
    let t = -(i_raw.div_euclid(kmu.abs())) * kmu.signum();
    (i_raw + t * kmu, j_raw + t * kla)
}

/// Float counterpart of `reduce_labels` for elliptic translation pairs,
/// reducing the meridian translation into [0, |k_mu|).
pub fn reduce_translations(tmu: f64, tla: f64, kmu: i64, kla: i64) -> (f64, f64) {
    if kmu == 0 {
        return (tmu, tla);
    }
    let t = tmu.div_euclid(kmu.abs() as f64);
    (
        tmu - t * kmu.abs() as f64,
        tla - t * kmu.signum() as f64 * kla as f64,
    )
}

/// `ev` with the hyperbolic/boundary call taken from the matrix trace
/// rather than the lifted coordinates. The lifted classifier loses the
/// distinction in both fringe regimes: right at the parabolic boundary,
/// where rounding can tip it into the elliptic bucket, and far up an
/// arm, where |γ| rounds onto the unit circle once the log eigenvalue
/// passes about 17 and the fallthrough would zero out a real magnitude.
fn ev_lenient(
    g: &LiftedElement,
    datum: &crate::psl2r::FixedPointDatum,
    m: &RealMatrix,
) -> Result<(f64, f64), Error> {
    if m.trace().abs() < 2.0 - 1e-6 {
        return Err(Error::InvalidInput(format!(
            "peripheral image is elliptic (trace {})",
            m.trace()
        )));
    }
    let t = match ev(g, datum) {
        Ok((_, t)) => t,
        Err(_) => trans(g)?.round(),
    };
    if m.trace().abs() > 2.0 + 1e-9 {
        Ok((datum.logmag, t))
    } else {
        Ok((0.0, t))
    }
}

/// The invariants of a converged chart point. Checks the relator residual,
/// the commutation of the peripheral images at a shared fixed point, and
/// the lifted relator, then evaluates (x, y, i, j).
pub fn rep_point(pres: &Presentation, chart: &Chart, sign: f64) -> Result<RepPoint, Error> {
    chart.validate()?;
    let residual = relator_residual_signed(pres, chart, sign);
    if residual > REP_RESIDUAL_TOL {
        return Err(Error::InvalidInput(format!(
            "relator residual {residual:.3e} exceeds {REP_RESIDUAL_TOL:e}"
        )));
    }
    match riley_rep(chart) {
        RepMatrices::Real(ma, mb) => rep_point_real(pres, chart, sign, residual, &ma, &mb),
        RepMatrices::Unit(ma, mb) => rep_point_unit(pres, chart, sign, residual, &ma, &mb),
    }
}

fn rep_point_real(
    pres: &Presentation,
    chart: &Chart,
    sign: f64,
    residual: f64,
    ma: &RealMatrix,
    mb: &RealMatrix,
) -> Result<RepPoint, Error> {
    let mmu = eval_word(&pres.meridian, ma, mb);
    let mla = eval_word(&pres.longitude, ma, mb);
    let mu_class = classify(&mmu);
    if mu_class == ElementClass::Elliptic && mmu.trace().abs() < 2.0 - 1e-6 {
        return Err(Error::InvalidInput(
            "boundary-elliptic meridian in the real chart: internal inconsistency".into(),
        ));
    }
    // Commuting peripherals share their boundary fixed points, so check
    // those instead of comparing AB to BA entrywise: the chordal defect
    // stays meaningful when the matrix entries grow large. Applying the
    // partner at its own repelling point amplifies roundoff by the square
    // of the derivative, so probe with the inverse as well and score the
    // contracting direction. The leading point feeds the evaluation and is
    // held to the strict tolerance; the others only screen for swapped or
    // foreign axes, and their defect floats on the cancellation noise of
    // the word products, so they get a coarse bound.
    let (anchor, partner) = match mu_class {
        ElementClass::Central(_) => (&mla, &mmu),
        _ => (&mmu, &mla),
    };
    let partner_inv = partner.inverse();
    let fixed = fixed_data(anchor)?;
    for (k, datum) in fixed.iter().enumerate() {
        let tol = if k == 0 { COMMUTE_TOL } else { SHARED_AXIS_TOL };
        let fwd = is_fixed_by(partner, &datum.v, tol);
        let bwd = is_fixed_by(&partner_inv, &datum.v, tol);
        if !fwd && !bwd {
            return Err(Error::InvalidInput(
                "peripheral images do not share their fixed points".into(),
            ));
        }
    }
    let v = fixed[0].v;

    let la0 = lift(&cayley_to_disk(ma)?, 0);
    let lb0 = lift(&cayley_to_disk(mb)?, 0);
    let (la, lb) = normalize_lifts(pres, &la0, &lb0)?;
    let lmu = eval_word_lifted(&pres.meridian, &la, &lb);
    let lla = eval_word_lifted(&pres.longitude, &la, &lb);
    let (x, i_raw) = ev_lenient(&lmu, &datum_at(&mmu, &v), &mmu)?;
    let (y, j_raw) = ev_lenient(&lla, &datum_at(&mla, &v), &mla)?;
    let (i_raw, j_raw) = (i_raw as i64, j_raw as i64);

    // pin the gauge by reducing the meridian label to [0, |weight|)
    let (kmu, kla) = peripheral_gauge(pres);
    let (i, j) = reduce_labels(i_raw, j_raw, kmu, kla);

    let kind = match mu_class {
        ElementClass::Hyperbolic => PointKind::Hyperbolic,
        ElementClass::Parabolic => PointKind::Parabolic,
        ElementClass::Central(_) => PointKind::Central,
        ElementClass::Elliptic => unreachable!("rejected above"),
    };
    Ok(RepPoint {
        point: ArcPoint {
            x,
            y,
            i,
            j,
            chart: Some(*chart),
            kind,
            near_ideal: false,
            near_reducible: false,
        },
        sign,
        character: character(chart),
        residual,
    })
}

/// Solves M*JM = J for a Hermitian J shared by both generator images; the
/// one-dimensional solution space is the numerical null space of a stacked
/// real system over the four real parameters of J.
fn invariant_form(ma: &M2c, mb: &M2c) -> Result<M2c, Error> {
    let i = Complex64::new(0.0, 1.0);
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let basis = [
        M2c::new(one, zero, zero, zero),
        M2c::new(zero, one, one, zero),
        M2c::new(zero, i, -i, zero),
        M2c::new(zero, zero, zero, one),
    ];
    let mut sys = DMatrix::<f64>::zeros(16, 4);
    for (gi, m) in [ma, mb].into_iter().enumerate() {
        let mstar = m.adjoint();
        for (k, e) in basis.iter().enumerate() {
            let d = mstar * e * m - e;
            for (idx, (r, c)) in [(0, 0), (0, 1), (1, 0), (1, 1)].iter().enumerate() {
                sys[(gi * 8 + 2 * idx, k)] = d[(*r, *c)].re;
                sys[(gi * 8 + 2 * idx + 1, k)] = d[(*r, *c)].im;
            }
        }
    }
    let svd = sys.svd(false, true);
    let sv = &svd.singular_values;
    let scale = 1.0 + sv[0];
    if sv[3] > 1e-7 * scale {
        return Err(Error::Convergence(format!(
            "no invariant Hermitian form (smallest singular value {:.3e})",
            sv[3]
        )));
    }
    if sv[2] < 1e-6 * scale {
        return Err(Error::InvalidInput(
            "invariant form is not unique: the pair is reducible".into(),
        ));
    }
    let vt = svd.v_t.as_ref().expect("requested right vectors");
    let (p, q, r, w) = (vt[(3, 0)], vt[(3, 1)], vt[(3, 2)], vt[(3, 3)]);
    // orientation: pin the lower-right entry positive so conjugation into
    // the disk model picks a consistent rotation sense along an arc
    let flip = if w < 0.0 { -1.0 } else { 1.0 };
    if w.abs() < 1e-10 {
        return Err(Error::Convergence(
            "invariant form orientation is indeterminate (J₂₂ ≈ 0)".into(),
        ));
    }
    let (p, q, r, w) = (flip * p, flip * q, flip * r, flip * w);
    let j = M2c::new(
        Complex64::new(p, 0.0),
        Complex64::new(q, r),
        Complex64::new(q, -r),
        Complex64::new(w, 0.0),
    );
    let det = p * w - (q * q + r * r);
    if det >= 0.0 {
        return Err(Error::InvalidInput(format!(
            "invariant form is definite (det = {det:.3e}): SU(2) side, not SU(1,1)"
        )));
    }
    Ok(j)
}

/// A matrix P with P*·diag(1,−1)·P = J, so that conjugation M ↦ PMP⁻¹
/// carries the J-unitary group onto SU(1,1).
fn su11_conjugator(j: &M2c) -> Result<M2c, Error> {
    let p = j[(0, 0)].re;
    let w = j[(1, 1)].re;
    let z = j[(0, 1)];
    let tr = p + w;
    let det = p * w - z.norm_sqr();
    let disc = (tr * tr / 4.0 - det).sqrt();
    let lp = tr / 2.0 + disc;
    let lm = tr / 2.0 - disc;
    if !(lp > 0.0 && lm < 0.0) {
        return Err(Error::InvalidInput(format!(
            "form eigenvalues ({lp}, {lm}) do not have signature (1,1)"
        )));
    }
    // unit eigenvector for the positive eigenvalue
    let (a, b) = if z.norm() > 1e-14 {
        let v = (z, Complex64::new(lp - p, 0.0));
        let n = (v.0.norm_sqr() + v.1.norm_sqr()).sqrt();
        (v.0 / n, v.1 / n)
    } else if p >= w {
        (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    } else {
        (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    };
    // orthonormal complement, eigenvector for the negative eigenvalue
    let (c, d) = (-b.conj(), a.conj());
    let u = M2c::new(a, c, b, d);
    let dm = M2c::new(
        Complex64::new(lp.sqrt(), 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new((-lm).sqrt(), 0.0),
    );
    Ok(dm * u.adjoint())
}

/// Reads an SU(1,1)-shaped complex matrix into disk coordinates, checking
/// the shape and renormalizing the determinant.
fn to_disk(m: &M2c) -> Result<DiskMatrix, Error> {
    let alpha = m[(0, 0)];
    let beta = m[(0, 1)];
    let scale = 1.0 + alpha.norm();
    let shape =
        (m[(1, 0)] - beta.conj()).norm() + (m[(1, 1)] - alpha.conj()).norm();
    if shape > 1e-6 * scale {
        return Err(Error::Convergence(format!(
            "conjugated matrix is not in SU(1,1) form (defect {shape:.3e})"
        )));
    }
    let n = alpha.norm_sqr() - beta.norm_sqr();
    if n <= 0.0 || (n - 1.0).abs() > 1e-6 {
        return Err(Error::Convergence(format!(
            "conjugated matrix has |α|² − |β|² = {n}, expected 1"
        )));
    }
    let s = n.sqrt();
    DiskMatrix::new(alpha / s, beta / s)
}

fn rep_point_unit(
    pres: &Presentation,
    chart: &Chart,
    sign: f64,
    residual: f64,
    ma: &M2c,
    mb: &M2c,
) -> Result<RepPoint, Error> {
    let (cx, cy, cz) = character(chart);
    if classify_real_character(cx, cy, cz) != CharacterClass::Sl2r {
        return Err(Error::InvalidInput(format!(
            "character ({cx:.4}, {cy:.4}, {cz:.4}) is not on the SL(2,R) side"
        )));
    }
    let form = invariant_form(ma, mb)?;
    let p = su11_conjugator(&form)?;
    let pinv = p
        .try_inverse()
        .ok_or_else(|| Error::Convergence("conjugator is singular".into()))?;
    let da = to_disk(&(p * ma * pinv))?;
    let db = to_disk(&(p * mb * pinv))?;
    let (la, lb) = normalize_lifts(pres, &lift(&da, 0), &lift(&db, 0))?;
    let lmu = eval_word_lifted(&pres.meridian, &la, &lb);
    let lla = eval_word_lifted(&pres.longitude, &la, &lb);
    let tmu_raw = trans(&lmu)?;
    let tla = trans(&lla)?;
    // gauge: reduce the meridian translation into [0, weight)
    let (kmu, kla) = peripheral_gauge(pres);
    let (tmu, tla) = reduce_translations(tmu_raw, tla, kmu, kla);
    Ok(RepPoint {
        point: ArcPoint {
            x: tmu,
            y: tla,
            i: 0,
            j: 0,
            chart: Some(*chart),
            kind: PointKind::EllipticEl,
            near_ideal: false,
            near_reducible: false,
        },
        sign,
        character: (cx, cy, cz),
        residual,
    })
}

fn orient(t: [f64; 2], prev: [f64; 2]) -> [f64; 2] {
    if t[0] * prev[0] + t[1] * prev[1] < 0.0 {
        [-t[0], -t[1]]
    } else {
        t
    }
}

fn chart_dist(a: &Chart, b: &Chart) -> f64 {
    let (a0, a1) = a.params();
    let (b0, b1) = b.params();
    ((a0 - b0).powi(2) + (a1 - b1).powi(2)).sqrt()
}

fn near_parabolic_wall(chart: &Chart) -> bool {
    match *chart {
        Chart::RealRiley { s, .. } => (s.abs() - 1.0).abs() < PARABOLIC_WALL,
        Chart::UnitRiley { .. } => false,
    }
}

/// Whether a step jumped over s = 1. Past the wall the chart describes a
/// conjugate copy of the curve already traced, so the step must not be
/// accepted even though the corrector converges happily.
fn wall_crossed(a: &Chart, b: &Chart) -> bool {
    match (*a, *b) {
        (Chart::RealRiley { s: s0, .. }, Chart::RealRiley { s: s1, .. }) => {
            (s0.abs() - 1.0) * (s1.abs() - 1.0) <= 0.0
        }
        _ => false,
    }
}

/// Whether a step left the open angle interval of the unit chart.
fn angle_crossed(b: &Chart) -> bool {
    match *b {
        Chart::UnitRiley { theta, .. } => theta <= 0.0 || theta >= PI,
        _ => false,
    }
}

/// Shrinks the step until it lands between the wall and s = 1, as close
/// to the wall strip as the bisection reaches. None when every trial
/// fails, in which case the caller stops at the previous point.
fn land_on_wall(
    pres: &Presentation,
    from: &Chart,
    dir: [f64; 2],
    h0: f64,
    sign: f64,
) -> Option<ArcPoint> {
    let (mut lo, mut hi) = (0.0f64, h0);
    let mut landed: Option<Chart> = None;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let Ok(next) = corrected_step(pres, from, dir, mid, sign) else {
            hi = mid;
            continue;
        };
        let s = match next {
            Chart::RealRiley { s, .. } => s.abs(),
            Chart::UnitRiley { .. } => return None,
        };
        if s <= 1.0 {
            hi = mid;
        } else {
            landed = Some(next);
            if s < 1.0 + PARABOLIC_WALL {
                break;
            }
            lo = mid;
        }
    }
    let chart = landed?;
    rep_point(pres, &chart, sign).ok().map(|rp| rp.point)
}

fn near_angle_wall(chart: &Chart) -> bool {
    match *chart {
        Chart::RealRiley { .. } => false,
        Chart::UnitRiley { theta, .. } => {
            let t = theta.rem_euclid(PI);
            t < 1e-3 || t > PI - 1e-3
        }
    }
}

/// One corrected continuation step of size `h` from `from` along `dir`.
fn corrected_step(
    pres: &Presentation,
    from: &Chart,
    dir: [f64; 2],
    h: f64,
    sign: f64,
) -> Result<Chart, Error> {
    let (a, b) = from.params();
    let target = (a + h * dir[0], b + h * dir[1]);
    let pred = from.with_params(target.0, target.1);
    let constraint =
        Constraint::Hyperplane { n: dir, c: dir[0] * target.0 + dir[1] * target.1 };
    newton_correct(pres, &pred, sign, &constraint)
}

/// Lands on the reducible junction between `from` (|κ| above threshold)
/// and a point `h_hi` ahead where κ crossed or collapsed, by bisecting the
/// step length.
fn land_on_junction(
    pres: &Presentation,
    from: &Chart,
    dir: [f64; 2],
    h_hi: f64,
    sign: f64,
) -> Result<Chart, Error> {
    let mut lo = 0.0f64;
    let mut hi = h_hi;
    let k_from = kappa(from);
    let mut best = *from;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let cand = corrected_step(pres, from, dir, mid, sign)?;
        let k = kappa(&cand);
        if k.abs() < KAPPA_STOP {
            return Ok(cand);
        }
        if k * k_from > 0.0 {
            lo = mid;
            best = cand;
        } else {
            hi = mid;
        }
    }
    // the bracket collapsed without |κ| dipping under the threshold; the
    // nearest same-side point is still a faithful junction endpoint
    let k = kappa(&best);
    if k.abs() < 1e-3 {
        Ok(best)
    } else {
        Err(Error::Convergence(format!(
            "junction bisection stalled at κ = {k:.3e}"
        )))
    }
}

struct DirectionTrace {
    segments: Vec<(Vec<ArcPoint>, EndKind)>,
    diagnostics: Vec<String>,
}

fn trace_direction(
    pres: &Presentation,
    seed_chart: &Chart,
    seed_point: &ArcPoint,
    dir0: [f64; 2],
    sign: f64,
    params: &TraceParams,
) -> DirectionTrace {
    let mut segments: Vec<(Vec<ArcPoint>, EndKind)> = Vec::new();
    let mut diagnostics: Vec<String> = Vec::new();
    let mut pts: Vec<ArcPoint> = Vec::new();
    let mut cur = *seed_chart;
    let mut anchor = (seed_point.i, seed_point.j);
    let mut last_xy = (seed_point.x, seed_point.y);
    let mut prev_dir = dir0;
    let mut h = (params.max_step / 5.0).clamp(params.min_step, params.max_step);
    let mut total = 0usize;

    let end = loop {
        if total >= params.max_points {
            break EndKind::Budget;
        }
        let tangent = match curve_tangent(pres, &cur, sign) {
            Ok(t) => orient(t, prev_dir),
            Err(Error::BranchPoint(m)) | Err(Error::Convergence(m)) => {
                diagnostics.push(format!("tangent lost at {cur:?}: {m}"));
                break EndKind::BranchPoint;
            }
            Err(e) => {
                diagnostics.push(format!("tangent failed at {cur:?}: {e}"));
                break EndKind::CorrectionFailure;
            }
        };

        // take the largest admissible step, halving on any rejection
        let mut accepted: Option<(Chart, RepPoint)> = None;
        let mut junction: Option<Result<Chart, Error>> = None;
        let mut branch = false;
        loop {
            match corrected_step(pres, &cur, tangent, h, sign) {
                Ok(next) => {
                    let k_next = kappa(&next);
                    if k_next.abs() < KAPPA_STOP || k_next * kappa(&cur) < 0.0 {
                        junction = Some(land_on_junction(pres, &cur, tangent, h, sign));
                        break;
                    }
                    match rep_point(pres, &next, sign) {
                        Ok(rp) => {
                            let d = ((rp.point.x - last_xy.0).powi(2)
                                + (rp.point.y - last_xy.1).powi(2))
                            .sqrt();
                            if d > 2.0 * params.max_step && h > params.min_step {
                                h *= 0.5;
                                continue;
                            }
                            accepted = Some((next, rp));
                            break;
                        }
                        Err(e) => {
                            if h > params.min_step {
                                h *= 0.5;
                                continue;
                            }
                            diagnostics
                                .push(format!("point rejected at floor step: {e}"));
                            break;
                        }
                    }
                }
                Err(Error::BranchPoint(m)) => {
                    diagnostics.push(format!("branch point: {m}"));
                    branch = true;
                    break;
                }
                Err(_) if h > params.min_step => {
                    h *= 0.5;
                }
                Err(e) => {
                    diagnostics.push(format!("corrector failed at floor step: {e}"));
                    break;
                }
            }
        }

        if branch {
            break EndKind::BranchPoint;
        }
        if let Some(junction_result) = junction {
            match junction_result {
                Ok(landed) => {
                    if let Ok(rp) = rep_point(pres, &landed, sign) {
                        let mut pt = rp.point;
                        pt.near_reducible = true;
                        pts.push(pt);
                    }
                    break EndKind::ReducibleJunction;
                }
                Err(e) => {
                    diagnostics.push(format!("junction landing failed: {e}"));
                    break EndKind::ReducibleJunction;
                }
            }
        }
        let Some((next, rp)) = accepted else {
            // stalled at the floor; classify by where the trace sits
            if near_parabolic_wall(&cur) {
                break EndKind::ParabolicOrigin;
            }
            if near_angle_wall(&cur) {
                break EndKind::ChartBoundary;
            }
            break EndKind::CorrectionFailure;
        };

        // a step over s = 1 would continue onto a conjugate copy of the
        // curve; land at the wall instead and finish there
        if wall_crossed(&cur, &next) {
            if let Some(pt) = land_on_wall(pres, &cur, tangent, h, sign) {
                if (pt.i, pt.j) != anchor {
                    segments.push((std::mem::take(&mut pts), EndKind::SheetSplit));
                    anchor = (pt.i, pt.j);
                }
                pts.push(pt);
            }
            break EndKind::ParabolicOrigin;
        }
        if angle_crossed(&next) {
            break EndKind::ChartBoundary;
        }

        // closure: returned to the seed after leaving it
        if total > 5 && chart_dist(&next, seed_chart) < 0.75 * h {
            break EndKind::Closed;
        }

        let mut pt = rp.point;
        pt.near_reducible = kappa(&next).abs() < 1e-4;
        if (pt.i, pt.j) != anchor {
            diagnostics.push(format!(
                "sheet labels jumped from {anchor:?} to ({}, {}) at {next:?}",
                pt.i, pt.j
            ));
            segments.push((std::mem::take(&mut pts), EndKind::SheetSplit));
            anchor = (pt.i, pt.j);
        }
        if pt.x.abs() > params.x_max || pt.y.abs() > params.y_max {
            pt.near_ideal = true;
            pts.push(pt);
            break EndKind::WindowExit;
        }
        if near_parabolic_wall(&next) {
            pts.push(pt);
            break EndKind::ParabolicOrigin;
        }
        if near_angle_wall(&next) {
            pts.push(pt);
            break EndKind::ChartBoundary;
        }
        pts.push(pt);
        total += 1;
        prev_dir = tangent;
        last_xy = (pt.x, pt.y);
        cur = next;
        h = (h * 1.3).min(params.max_step);
    };

    if end == EndKind::ParabolicOrigin {
        // the limit representation has the whole boundary parabolic, so the
        // extension coordinates degenerate to the origin with the labels of
        // the arc
        pts.push(ArcPoint {
            x: 0.0,
            y: 0.0,
            i: anchor.0,
            j: anchor.1,
            chart: None,
            kind: PointKind::Parabolic,
            near_ideal: false,
            near_reducible: false,
        });
    }
    segments.push((pts, end));
    DirectionTrace { segments, diagnostics }
}

/// Traces the representation curve through a seed in both directions and
/// assembles ordered arcs. Extra arcs appear only when the integer labels
/// jump mid-trace (a sheet split) — each split piece is returned separately.
pub fn continue_arc(
    pres: &Presentation,
    seed: &Chart,
    sign: f64,
    params: &TraceParams,
) -> Result<Vec<TracedArc>, Error> {
    let seed = newton_correct(pres, seed, sign, &Constraint::Freeze(0))?;
    let rp0 = rep_point(pres, &seed, sign)?;
    let t0 = curve_tangent(pres, &seed, sign)?;

    let pos = trace_direction(pres, &seed, &rp0.point, t0, sign, params);
    let mut diagnostics = pos.diagnostics.clone();
    let pos_closed = pos
        .segments
        .last()
        .map(|(_, e)| *e == EndKind::Closed)
        .unwrap_or(false);

    let mut arcs: Vec<TracedArc> = Vec::new();
    if pos_closed && pos.segments.len() == 1 {
        let (mut points, _) = pos.segments.into_iter().next().unwrap();
        let mut all = vec![rp0.point];
        all.append(&mut points);
        all.push(rp0.point);
        arcs.push(TracedArc {
            points: all,
            end_neg: EndKind::Closed,
            end_pos: EndKind::Closed,
            sign,
            diagnostics,
        });
        return Ok(arcs);
    }

    let neg = trace_direction(pres, &seed, &rp0.point, [-t0[0], -t0[1]], sign, params);
    diagnostics.extend(neg.diagnostics.clone());

    // first segments of the two directions join through the seed
    let mut pos_iter = pos.segments.into_iter();
    let mut neg_iter = neg.segments.into_iter();
    let (pos_first, pos_first_end) = pos_iter.next().unwrap_or((Vec::new(), EndKind::Budget));
    let (neg_first, neg_first_end) = neg_iter.next().unwrap_or((Vec::new(), EndKind::Budget));
    let mut points: Vec<ArcPoint> = neg_first.into_iter().rev().collect();
    points.push(rp0.point);
    points.extend(pos_first);
    arcs.push(TracedArc {
        points,
        end_neg: neg_first_end,
        end_pos: pos_first_end,
        sign,
        diagnostics,
    });
    for (seg, end) in pos_iter {
        if !seg.is_empty() {
            arcs.push(TracedArc {
                points: seg,
                end_neg: EndKind::SheetSplit,
                end_pos: end,
                sign,
                diagnostics: Vec::new(),
            });
        }
    }
    for (seg, end) in neg_iter {
        if !seg.is_empty() {
            arcs.push(TracedArc {
                points: seg.into_iter().rev().collect(),
                end_neg: end,
                end_pos: EndKind::SheetSplit,
                sign,
                diagnostics: Vec::new(),
            });
        }
    }
    Ok(arcs)
}
