//! Assembly of the full extension locus from traced arcs.
//!
//! The tracer follows one curve of representations at a time. This module
//! decides where to start it (Alexander bifurcations, the parabolic wall,
//! a geometric grid in the meridian eigenvalue), collects the traced arcs
//! into components labelled by their integer pair, closes the picture
//! under the reflection (x, y) ↦ (−x, −y), attaches the abelian axis and
//! the distinguished point sets, and checks the structural invariants the
//! finished locus must satisfy.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alexander::{alexander_points_detailed, AlexanderPoint};
use crate::presentation::Presentation;
use crate::riley::{kappa, seed_u_roots, seed_u_roots_unit, Chart};
use crate::tracer::{
    continue_arc, peripheral_gauge, reduce_labels, reduce_translations, rep_point, ArcPoint,
    EndKind, PointKind, TraceParams, TracedArc,
};
use crate::Error;

/// Offset of the wall seed above s = 1, matching the wall the tracer
/// stops at so the strip between them stays covered.
const SEED_WALL_OFFSET: f64 = 1e-3;
/// Relative offset of the bracketing seeds around an Alexander root.
const SEED_BIFURCATION_OFFSET: f64 = 1e-3;
/// Chart-space distance below which a seed counts as already traced.
const COVERAGE_TOL: f64 = 2.5e-3;
/// Hausdorff distance below which two same-label arcs are duplicates.
const DEDUPE_TOL: f64 = 1e-5;
/// Angular margin kept from θ = 0 and θ = π when seeding the unit chart.
const EL_WALL: f64 = 2e-3;
/// Minimal κ for a unit-chart seed to count as lying on the SL(2, R) side.
const KAPPA_SEED_MIN: f64 = 1e-9;
/// Number of sampled reflection checks in the validation report.
const SYMMETRY_SAMPLES: usize = 200;
/// Reflection mismatch allowed before the symmetry check fails.
const SYMMETRY_TOL: f64 = 1e-4;
/// Distance to the abelian axis allowed in the coverage check.
const AXIS_CHECK_TOL: f64 = 1e-6;

/// One arc of the locus: a polyline in extension coordinates with constant
/// integer labels and a classification of both ends.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Arc {
    pub id: usize,
    pub i: i64,
    pub j: i64,
    pub points: Vec<ArcPoint>,
    pub end_neg: EndKind,
    pub end_pos: EndKind,
    /// Least-squares slopes of the window-exiting tails, sorted.
    pub asymptotes: Vec<f64>,
}

/// A point of the locus where the meridian image is parabolic; all of them
/// sit at the origin of their component.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ParabolicPoint {
    pub x: f64,
    pub y: f64,
    pub i: i64,
    pub j: i64,
}

/// Outcome of one structural check, with a witness when it fails or when
/// pass context is worth recording.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub witness: String,
}

/// The validation checks run on a finished locus.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// The computed locus of a knot exterior over a plot window.
#[derive(Debug, Clone)]
pub struct Locus {
    pub name: String,
    pub x_max: f64,
    pub y_max: f64,
    pub longitude_order: u32,
    pub genus: Option<u32>,
    /// Gauge weights (k_mu, k_la) of the peripheral pair, kept so the
    /// reflection can re-reduce labels without the presentation at hand.
    pub gauge: (i64, i64),
    pub components: BTreeMap<(i64, i64), Vec<Arc>>,
    pub alexander_points: Vec<AlexanderPoint>,
    pub parabolic_points: Vec<ParabolicPoint>,
    /// Boundary-elliptic arcs in translation coordinates, when requested.
    pub el_arcs: Vec<Arc>,
    pub diagnostics: Vec<String>,
    pub validation: ValidationReport,
}

impl Locus {
    /// All arcs of the holonomy-extension part, in component order.
    pub fn arcs(&self) -> impl Iterator<Item = &Arc> {
        self.components.values().flatten()
    }
}

/// Build controls. The defaults match the plot window the regression
/// figures use.
#[derive(Debug, Clone, Copy)]
pub struct LocusOptions {
    pub x_max: f64,
    pub y_max: f64,
    /// Seed count of the geometric grid in the meridian eigenvalue.
    pub s_grid: usize,
    /// Also trace the boundary-elliptic stream on the unit chart.
    pub el: bool,
    /// Seed count of the uniform angle grid for the elliptic stream.
    pub el_grid: usize,
}

impl Default for LocusOptions {
    fn default() -> Self {
        LocusOptions { x_max: 1.5, y_max: 8.0, s_grid: 200, el: false, el_grid: 160 }
    }
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Distance from a point to a segment, all in the plane.
fn segment_dist(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let l2 = dx * dx + dy * dy;
    if l2 <= 0.0 {
        return dist2(p, a);
    }
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / l2).clamp(0.0, 1.0);
    dist2(p, (a.0 + t * dx, a.1 + t * dy))
}

/// Distance from a point to a polyline given by extension coordinates.
fn polyline_dist(p: (f64, f64), pts: &[ArcPoint]) -> f64 {
    let mut best = f64::INFINITY;
    if pts.len() == 1 {
        return dist2(p, (pts[0].x, pts[0].y));
    }
    for w in pts.windows(2) {
        best = best.min(segment_dist(p, (w[0].x, w[0].y), (w[1].x, w[1].y)));
    }
    best
}

fn arclength(pts: &[ArcPoint]) -> f64 {
    pts.windows(2).map(|w| dist2((w[0].x, w[0].y), (w[1].x, w[1].y))).sum()
}

/// Symmetric Hausdorff distance between two polylines, point to segment.
fn hausdorff(a: &[ArcPoint], b: &[ArcPoint]) -> f64 {
    let one = |from: &[ArcPoint], to: &[ArcPoint]| {
        from.iter().map(|p| polyline_dist((p.x, p.y), to)).fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

/// Whether a chart seed lies on a stretch of curve some arc already
/// sampled. Distances are measured in chart coordinates, against polyline
/// pieces of the matching chart family.
fn covered(seed: (f64, f64), unit: bool, arcs: &[Arc]) -> bool {
    for arc in arcs {
        let mut prev: Option<(f64, f64)> = None;
        for p in &arc.points {
            let c = match p.chart {
                Some(Chart::RealRiley { s, u }) if !unit => Some((s, u)),
                Some(Chart::UnitRiley { theta, u }) if unit => Some((theta, u)),
                _ => None,
            };
            match (c, prev) {
                (Some(c), Some(q)) => {
                    if segment_dist(seed, q, c) < COVERAGE_TOL {
                        return true;
                    }
                }
                (Some(c), None) => {
                    if dist2(seed, c) < COVERAGE_TOL {
                        return true;
                    }
                }
                _ => {}
            }
            prev = c;
        }
    }
    false
}

/// Appends an arc unless a same-label duplicate is already kept; of two
/// duplicates the longer polyline survives.
fn push_arc(arcs: &mut Vec<Arc>, arc: Arc) {
    for kept in arcs.iter_mut() {
        if (kept.i, kept.j) == (arc.i, arc.j) && hausdorff(&kept.points, &arc.points) < DEDUPE_TOL
        {
            if arclength(&arc.points) > arclength(&kept.points) {
                *kept = arc;
            }
            return;
        }
    }
    arcs.push(arc);
}

fn arc_from_traced(t: TracedArc) -> Arc {
    let (i, j) = t.points.first().map(|p| (p.i, p.j)).unwrap_or((0, 0));
    Arc {
        id: 0,
        i,
        j,
        points: t.points,
        end_neg: t.end_neg,
        end_pos: t.end_pos,
        asymptotes: Vec::new(),
    }
}

/// The image of an arc under (x, y) ↦ (−x, −y), with the integer labels
/// re-reduced into the pinned gauge. Slopes are reflection-invariant, so
/// the asymptote list carries over.
fn mirror_arc(arc: &Arc, kmu: i64, kla: i64) -> Arc {
    let points = arc
        .points
        .iter()
        .map(|p| {
            let (i, j) = reduce_labels(-p.i, -p.j, kmu, kla);
            ArcPoint { x: -p.x, y: -p.y, i, j, chart: None, ..*p }
        })
        .collect();
    let (i, j) = reduce_labels(-arc.i, -arc.j, kmu, kla);
    Arc {
        id: 0,
        i,
        j,
        points,
        end_neg: arc.end_neg,
        end_pos: arc.end_pos,
        asymptotes: arc.asymptotes.clone(),
    }
}

/// Reflection of a boundary-elliptic arc: translation numbers negate and
/// re-reduce, landing back in the fundamental strip.
fn mirror_el_arc(arc: &Arc, kmu: i64, kla: i64) -> Arc {
    let points = arc
        .points
        .iter()
        .map(|p| {
            let (x, y) = reduce_translations(-p.x, -p.y, kmu, kla);
            ArcPoint { x, y, chart: None, ..*p }
        })
        .collect();
    Arc { id: 0, points, asymptotes: arc.asymptotes.clone(), ..*arc }
}

/// Clips an arc to the reported window after the tails have served their
/// purpose, keeping one outside point at each trimmed end as the boundary
/// marker. Returns false when nothing of the arc lies inside.
fn clip_arc(arc: &mut Arc, x_max: f64, y_max: f64) -> bool {
    let inside = |p: &ArcPoint| p.x.abs() <= x_max && p.y.abs() <= y_max;
    let Some(first) = arc.points.iter().position(inside) else {
        return false;
    };
    let last = arc.points.iter().rposition(inside).expect("inside point exists");
    let lo = first.saturating_sub(1);
    let hi = (last + 1).min(arc.points.len() - 1);
    if hi + 1 < arc.points.len() {
        arc.points.truncate(hi + 1);
        arc.points[hi].near_ideal = true;
        arc.end_pos = EndKind::WindowExit;
    }
    if lo > 0 {
        arc.points.drain(..lo);
        arc.points[0].near_ideal = true;
        arc.end_neg = EndKind::WindowExit;
    }
    true
}

/// The abelian representations: the line y = 0, every integer label zero.
/// Emitted analytically since the chart parametrization degenerates there.
fn axis_arc(x_max: f64) -> Arc {
    let spacing = 0.05;
    let steps = (2.0 * x_max / spacing).ceil() as usize;
    let steps = steps + steps % 2;
    let points = (0..=steps)
        .map(|k| {
            let x = -x_max + 2.0 * x_max * k as f64 / steps as f64;
            ArcPoint {
                x,
                y: 0.0,
                i: 0,
                j: 0,
                chart: None,
                kind: if x.abs() < 1e-12 { PointKind::Central } else { PointKind::Hyperbolic },
                near_ideal: k == 0 || k == steps,
                near_reducible: true,
            }
        })
        .collect();
    Arc {
        id: 0,
        i: 0,
        j: 0,
        points,
        end_neg: EndKind::WindowExit,
        end_pos: EndKind::WindowExit,
        asymptotes: vec![0.0, 0.0],
    }
}

/// Whether an arc is the abelian axis (labels zero, y identically zero).
pub fn is_axis(arc: &Arc) -> bool {
    arc.i == 0
        && arc.j == 0
        && arc.points.len() >= 2
        && arc.points.iter().all(|p| p.y.abs() < 1e-12 && p.chart.is_none())
}

/// Least-squares slope through the origin of the last tenth of the
/// polyline by arclength, walked from the chosen end. None when the tail
/// is degenerate.
fn window_tail_slope(points: &[ArcPoint], from_front: bool) -> Option<f64> {
    if points.len() < 3 {
        return None;
    }
    let ordered: Vec<(f64, f64)> = if from_front {
        points.iter().map(|p| (p.x, p.y)).collect()
    } else {
        points.iter().rev().map(|p| (p.x, p.y)).collect()
    };
    let total: f64 = ordered.windows(2).map(|w| dist2(w[0], w[1])).sum();
    if total <= 0.0 {
        return None;
    }
    // Cap the tail so the fit stays in the straightened stretch next to the
    // exit; a fixed fraction alone reaches back into the bend on long arcs.
    let budget = (0.1 * total).min(0.15);
    let mut acc = 0.0;
    let mut tail = vec![ordered[0]];
    for w in ordered.windows(2) {
        acc += dist2(w[0], w[1]);
        tail.push(w[1]);
        if acc >= budget && tail.len() >= 3 {
            break;
        }
    }
    let sxx: f64 = tail.iter().map(|(x, _)| x * x).sum();
    if sxx < 1e-12 {
        return None;
    }
    let sxy: f64 = tail.iter().map(|(x, y)| x * y).sum();
    Some(sxy / sxx)
}

/// Slopes of the ideal tails of an arc, one per window-exiting end.
pub fn asymptote_slopes(arc: &Arc) -> Vec<f64> {
    let mut out = Vec::new();
    if arc.end_neg == EndKind::WindowExit {
        if let Some(m) = window_tail_slope(&arc.points, true) {
            out.push(m);
        }
    }
    if arc.end_pos == EndKind::WindowExit {
        if let Some(m) = window_tail_slope(&arc.points, false) {
            out.push(m);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Matches slope estimates against a candidate list, reporting each
/// estimate with the nearest candidate and the gap.
pub fn nearest_candidates(slopes: &[f64], candidates: &[f64]) -> Vec<(f64, f64, f64)> {
    slopes
        .iter()
        .filter_map(|&m| {
            candidates
                .iter()
                .map(|&c| (m, c, (m - c).abs()))
                .min_by(|a, b| a.2.total_cmp(&b.2))
        })
        .collect()
}

/// Computes the locus of a two-generator one-relator knot presentation
/// over the window of `options`: traces the real-chart curves from every
/// seed family, closes under the reflection, attaches the abelian axis,
/// the Alexander and parabolic points, optionally the boundary-elliptic
/// stream, and validates the result.
pub fn build_locus(pres: &Presentation, options: &LocusOptions) -> Result<Locus, Error> {
    if pres.generators != 2 || pres.relators.len() != 1 {
        return Err(Error::InvalidInput(format!(
            "locus construction needs a two-generator one-relator presentation, got {} generators and {} relators",
            pres.generators,
            pres.relators.len()
        )));
    }
    if !(options.x_max > 0.0 && options.y_max > 0.0 && options.s_grid >= 2) {
        return Err(Error::InvalidInput(
            "locus window must be positive and the seed grid needs at least two points".into(),
        ));
    }
    // Trace well past the reported window in y: asymptote slopes are read
    // off the far tails, which only straighten out once the curve has run
    // a few window heights up its arm. The output is clipped back down to
    // the requested window after the estimates are taken. The extension is
    // capped near |y| = 15: matrix entries grow like e^|y|, so beyond that
    // the corrector's residuals sit at roundoff scale and a trace can slide
    // off the curve without noticing (folds get flattened into fake tails).
    let y_trace = options.y_max.max((16.0 * options.x_max).min(15.0));
    let params = TraceParams {
        x_max: options.x_max,
        y_max: y_trace,
        ..TraceParams::default()
    };
    let (kmu, kla) = peripheral_gauge(pres);
    let mut diagnostics = Vec::new();

    let (alexander_points, warnings) = alexander_points_detailed(pres)?;
    diagnostics.extend(warnings);

    // Seeds in s: the wall strip, brackets around each bifurcation value
    // √ξ for an Alexander root ξ > 1, and a geometric sweep up to the
    // window edge e^{x_max}.
    let s_max = options.x_max.exp();
    let s_floor = 1.0 + SEED_WALL_OFFSET;
    let mut s_values = vec![s_floor];
    for ap in &alexander_points {
        if ap.root > 1.0 {
            let sb = ap.root.sqrt();
            s_values.push((sb * (1.0 - SEED_BIFURCATION_OFFSET)).max(s_floor));
            s_values.push((sb * (1.0 + SEED_BIFURCATION_OFFSET)).min(s_max));
        }
    }
    let n = options.s_grid;
    let ratio = (s_max / s_floor).powf(1.0 / (n as f64 - 1.0));
    let mut s = s_floor;
    for _ in 0..n {
        s_values.push(s.min(s_max));
        s *= ratio;
    }
    s_values.sort_by(f64::total_cmp);
    s_values.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut arcs: Vec<Arc> = Vec::new();
    for &s in &s_values {
        for (u, sign) in seed_u_roots(pres, s) {
            if covered((s, u), false, &arcs) {
                continue;
            }
            let chart = Chart::RealRiley { s, u };
            // seeds already outside the trace window would only produce
            // stubs; the in-window stretch of their curve has its own seeds
            let Ok(rp) = rep_point(pres, &chart, sign) else { continue };
            if rp.point.x.abs() > params.x_max || rp.point.y.abs() > params.y_max {
                continue;
            }
            match continue_arc(pres, &chart, sign, &params) {
                Ok(traced) => {
                    for t in traced {
                        diagnostics.extend(t.diagnostics.iter().cloned());
                        push_arc(&mut arcs, arc_from_traced(t));
                    }
                }
                Err(e) => {
                    diagnostics
                        .push(format!("seed (s = {s:.6}, u = {u:.6}) dropped: {e}"));
                }
            }
        }
    }

    // Asymptote slopes come off the long traced tails; only then are the
    // arcs clipped back to the reported window.
    for arc in &mut arcs {
        arc.asymptotes = asymptote_slopes(arc);
    }
    arcs.retain_mut(|arc| clip_arc(arc, options.x_max, options.y_max));

    // Reflection closure. Traced arcs live at x > 0, so mirrors are always
    // geometrically new; the dedupe guard is belt and braces.
    for arc in arcs.clone() {
        push_arc(&mut arcs, mirror_arc(&arc, kmu, kla));
    }
    arcs.push(axis_arc(options.x_max));

    // Distinguished parabolic limits, one entry per label pair reached.
    let mut parabolic_points: Vec<ParabolicPoint> = Vec::new();
    for arc in &arcs {
        for (end, point) in
            [(arc.end_neg, arc.points.first()), (arc.end_pos, arc.points.last())]
        {
            if end != EndKind::ParabolicOrigin {
                continue;
            }
            let Some(p) = point else { continue };
            if !parabolic_points.iter().any(|q| {
                (q.i, q.j) == (p.i, p.j) && dist2((q.x, q.y), (p.x, p.y)) < 1e-9
            }) {
                parabolic_points.push(ParabolicPoint { x: p.x, y: p.y, i: p.i, j: p.j });
            }
        }
    }
    parabolic_points.sort_by(|a, b| (a.i, a.j).cmp(&(b.i, b.j)));

    // The boundary-elliptic stream, seeded on a uniform angle grid and
    // kept separate from the holonomy components.
    let mut el_arcs: Vec<Arc> = Vec::new();
    if options.el {
        let m = options.el_grid.max(2);
        for k in 0..m {
            let theta = EL_WALL + (PI - 2.0 * EL_WALL) * k as f64 / (m as f64 - 1.0);
            for (u, sign) in seed_u_roots_unit(pres, theta) {
                let chart = Chart::UnitRiley { theta, u };
                if kappa(&chart) <= KAPPA_SEED_MIN {
                    continue;
                }
                if covered((theta, u), true, &el_arcs) {
                    continue;
                }
                let Ok(rp) = rep_point(pres, &chart, sign) else { continue };
                if rp.point.x.abs() > params.x_max || rp.point.y.abs() > params.y_max {
                    continue;
                }
                match continue_arc(pres, &chart, sign, &params) {
                    Ok(traced) => {
                        for t in traced {
                            diagnostics.extend(t.diagnostics.iter().cloned());
                            push_arc(&mut el_arcs, arc_from_traced(t));
                        }
                    }
                    Err(e) => {
                        diagnostics.push(format!(
                            "elliptic seed (θ = {theta:.6}, u = {u:.6}) dropped: {e}"
                        ));
                    }
                }
            }
        }
        for arc in &mut el_arcs {
            arc.asymptotes = asymptote_slopes(arc);
        }
        el_arcs.retain_mut(|arc| clip_arc(arc, options.x_max, options.y_max));
        for arc in el_arcs.clone() {
            push_arc(&mut el_arcs, mirror_el_arc(&arc, kmu, kla));
        }
    }

    // Component assembly with stable ids: keys in label order, arcs within
    // a component ordered by their starting point.
    let mut components: BTreeMap<(i64, i64), Vec<Arc>> = BTreeMap::new();
    for arc in arcs {
        components.entry((arc.i, arc.j)).or_default().push(arc);
    }
    let sort_key = |a: &Arc| {
        let p = a.points.first().map(|p| (p.x, p.y)).unwrap_or((0.0, 0.0));
        (p.0, p.1, arclength(&a.points))
    };
    let mut id = 0;
    for arcs in components.values_mut() {
        arcs.sort_by(|a, b| {
            let (ax, ay, al) = sort_key(a);
            let (bx, by, bl) = sort_key(b);
            ax.total_cmp(&bx).then(ay.total_cmp(&by)).then(al.total_cmp(&bl))
        });
        for arc in arcs {
            arc.id = id;
            id += 1;
        }
    }
    for arc in &mut el_arcs {
        arc.id = id;
        id += 1;
    }

    let mut locus = Locus {
        name: pres.name.clone(),
        x_max: options.x_max,
        y_max: options.y_max,
        longitude_order: pres.longitude_order,
        genus: pres.genus,
        gauge: (kmu, kla),
        components,
        alexander_points,
        parabolic_points,
        el_arcs,
        diagnostics,
        validation: ValidationReport::default(),
    };
    locus.validation = validate_locus(&locus, pres);
    Ok(locus)
}

/// Folds the locus into a fundamental domain of the dihedral symmetry:
/// of each mirror pair of arcs one representative is kept, the abelian
/// axis is truncated to x ≥ 0, and the point sets are reduced the same
/// way. The validation report of the unreduced locus is carried along.
pub fn dinfty_reduce(locus: &Locus) -> Locus {
    let (kmu, kla) = locus.gauge;
    let mut kept: Vec<Arc> = Vec::new();
    for arc in locus.arcs() {
        if is_axis(arc) {
            let mut half = arc.clone();
            half.points.retain(|p| p.x >= -1e-12);
            // the fold point x = 0 is the central representation
            half.end_neg = EndKind::ReducibleJunction;
            half.asymptotes = asymptote_slopes(&half);
            kept.push(half);
            continue;
        }
        let mirror = mirror_arc(arc, kmu, kla);
        let dup = kept.iter().any(|k| {
            (k.i, k.j) == (mirror.i, mirror.j) && hausdorff(&k.points, &mirror.points) < DEDUPE_TOL
        });
        if !dup {
            kept.push(arc.clone());
        }
    }

    let mut el_kept: Vec<Arc> = Vec::new();
    for arc in &locus.el_arcs {
        let mirror = mirror_el_arc(arc, kmu, kla);
        let dup = el_kept
            .iter()
            .any(|k| hausdorff(&k.points, &mirror.points) < DEDUPE_TOL);
        if !dup {
            el_kept.push(arc.clone());
        }
    }

    let alexander_points: Vec<AlexanderPoint> =
        locus.alexander_points.iter().filter(|ap| ap.x >= 0.0).cloned().collect();

    let mut parabolic_points: Vec<ParabolicPoint> = Vec::new();
    for p in &locus.parabolic_points {
        let m = reduce_labels(-p.i, -p.j, kmu, kla);
        let canonical = std::cmp::min((p.i, p.j), m);
        if !parabolic_points.iter().any(|q| (q.i, q.j) == canonical) {
            parabolic_points.push(ParabolicPoint { x: p.x, y: p.y, i: canonical.0, j: canonical.1 });
        }
    }

    let mut components: BTreeMap<(i64, i64), Vec<Arc>> = BTreeMap::new();
    for arc in kept {
        components.entry((arc.i, arc.j)).or_default().push(arc);
    }
    let mut id = 0;
    for arcs in components.values_mut() {
        for arc in arcs {
            arc.id = id;
            id += 1;
        }
    }
    let mut el_arcs = el_kept;
    for arc in &mut el_arcs {
        arc.id = id;
        id += 1;
    }

    let mut diagnostics = locus.diagnostics.clone();
    diagnostics.push("dihedral quotient: validation report inherited from the full locus".into());
    Locus {
        name: locus.name.clone(),
        components,
        alexander_points,
        parabolic_points,
        el_arcs,
        diagnostics,
        validation: locus.validation.clone(),
        ..*locus
    }
}

/// Structural checks of a finished locus: dihedral symmetry of sampled
/// points, the Euler-number bound on the longitude label, parabolic points
/// pinned to component origins, full coverage by the abelian axis, at most
/// one parabolic point per component, and polyline sanity.
pub fn validate_locus(locus: &Locus, pres: &Presentation) -> ValidationReport {
    let (kmu, kla) = locus.gauge;
    let mut checks = Vec::new();
    let all: Vec<&Arc> = locus.arcs().collect();

    // Reflection symmetry on a fixed random sample of arc points.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut failure = String::new();
        let mut checked = 0usize;
        if !all.is_empty() {
            for _ in 0..SYMMETRY_SAMPLES {
                let arc = all[rng.gen_range(0..all.len())];
                if arc.points.is_empty() {
                    continue;
                }
                let p = arc.points[rng.gen_range(0..arc.points.len())];
                let target = (-p.x, -p.y);
                let labels = reduce_labels(-p.i, -p.j, kmu, kla);
                let d = all
                    .iter()
                    .filter(|a| (a.i, a.j) == labels)
                    .map(|a| polyline_dist(target, &a.points))
                    .fold(f64::INFINITY, f64::min);
                checked += 1;
                if d > SYMMETRY_TOL {
                    failure = format!(
                        "point ({:.6}, {:.6}) of arc {} reflects to labels {:?} but the nearest arc there is {:.2e} away",
                        p.x, p.y, arc.id, labels, d
                    );
                    break;
                }
            }
        }
        checks.push(CheckResult {
            name: "dihedral-symmetry".into(),
            pass: failure.is_empty(),
            witness: if failure.is_empty() {
                format!("{checked} sampled points reflect onto the locus")
            } else {
                failure
            },
        });
    }

    // Euler-number bound: the longitude label of a nonempty component obeys
    // |j|·(longitude order) ≤ 2·genus − 1.
    {
        let (pass, witness) = match pres.genus {
            None => (true, "genus unknown, bound not applicable".to_string()),
            Some(g) => {
                let bound = 2 * g as i64 - 1;
                let violation = locus
                    .components
                    .iter()
                    .find(|((_, j), arcs)| {
                        !arcs.is_empty() && j.abs() * locus.longitude_order as i64 > bound
                    })
                    .map(|(k, _)| *k);
                match violation {
                    Some((i, j)) => (
                        false,
                        format!("component ({i}, {j}) violates |j|·n = {} > {bound}",
                            j.abs() * locus.longitude_order as i64),
                    ),
                    None => (true, format!("all longitude labels within |j|·n ≤ {bound}")),
                }
            }
        };
        checks.push(CheckResult { name: "euler-bound".into(), pass, witness });
    }

    // Parabolic points sit at the origin, and so does every arc point whose
    // meridian image is parabolic.
    {
        let mut failure = String::new();
        for p in &locus.parabolic_points {
            if p.x.abs() > 1e-9 || p.y.abs() > 1e-9 {
                failure =
                    format!("parabolic point ({:.3e}, {:.3e}, {}, {}) off the origin", p.x, p.y, p.i, p.j);
                break;
            }
        }
        if failure.is_empty() {
            'outer: for arc in &all {
                for p in &arc.points {
                    if p.kind == PointKind::Parabolic && (p.x.abs() > 1e-3 || p.y.abs() > 1e-3) {
                        failure = format!(
                            "arc {} holds a parabolic-kind point at ({:.3e}, {:.3e})",
                            arc.id, p.x, p.y
                        );
                        break 'outer;
                    }
                }
            }
        }
        checks.push(CheckResult {
            name: "parabolic-at-origin".into(),
            pass: failure.is_empty(),
            witness: if failure.is_empty() {
                format!("{} parabolic points, all at component origins", locus.parabolic_points.len())
            } else {
                failure
            },
        });
    }

    // The abelian axis spans the window.
    {
        let h00: Vec<&Arc> = locus
            .components
            .get(&(0, 0))
            .map(|v| v.iter().collect())
            .unwrap_or_default();
        let mut failure = String::new();
        for k in 0..=40 {
            let x = -locus.x_max + 2.0 * locus.x_max * k as f64 / 40.0;
            let d = h00
                .iter()
                .map(|a| polyline_dist((x, 0.0), &a.points))
                .fold(f64::INFINITY, f64::min);
            if d > AXIS_CHECK_TOL {
                failure = format!("axis point ({x:.4}, 0) missing from the (0, 0) component");
                break;
            }
        }
        checks.push(CheckResult {
            name: "axis-coverage".into(),
            pass: failure.is_empty(),
            witness: if failure.is_empty() {
                "the line y = 0 is covered across the window".into()
            } else {
                failure
            },
        });
    }

    // At most one parabolic point per component.
    {
        let mut counts: BTreeMap<(i64, i64), usize> = BTreeMap::new();
        for p in &locus.parabolic_points {
            *counts.entry((p.i, p.j)).or_default() += 1;
        }
        let bad = counts.iter().find(|(_, &c)| c > 1);
        checks.push(CheckResult {
            name: "parabolic-count".into(),
            pass: bad.is_none(),
            witness: match bad {
                Some(((i, j), c)) => format!("component ({i}, {j}) holds {c} parabolic points"),
                None => "at most one parabolic point per component".into(),
            },
        });
    }

    // Polyline sanity: two or more points, uniform labels, and spacing
    // bounded by twice the maximal continuation step.
    {
        let bound = 2.0 * TraceParams::default().max_step + 1e-9;
        let mut failure = String::new();
        'outer: for arc in all.iter().copied().chain(locus.el_arcs.iter()) {
            if arc.points.len() < 2 {
                failure = format!("arc {} has fewer than two points", arc.id);
                break;
            }
            for p in &arc.points {
                if (p.i, p.j) != (arc.i, arc.j) {
                    failure = format!(
                        "arc {} mixes labels ({}, {}) and ({}, {})",
                        arc.id, arc.i, arc.j, p.i, p.j
                    );
                    break 'outer;
                }
            }
            for w in arc.points.windows(2) {
                let d = dist2((w[0].x, w[0].y), (w[1].x, w[1].y));
                if d > bound {
                    failure = format!(
                        "arc {} has a gap of {:.4} near ({:.4}, {:.4})",
                        arc.id, d, w[0].x, w[0].y
                    );
                    break 'outer;
                }
            }
        }
        checks.push(CheckResult {
            name: "polyline-sanity".into(),
            pass: failure.is_empty(),
            witness: if failure.is_empty() {
                "all arcs are dense, label-uniform polylines".into()
            } else {
                failure
            },
        });
    }

    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::two_bridge;

    fn small_options() -> LocusOptions {
        LocusOptions { s_grid: 60, ..LocusOptions::default() }
    }

    #[test]
    fn figure_eight_locus_has_the_known_shape() {
        let pres = two_bridge(5, 3).unwrap();
        let locus = build_locus(&pres, &small_options()).unwrap();

        assert_eq!(
            locus.components.keys().copied().collect::<Vec<_>>(),
            vec![(0, 0)],
            "the figure-eight locus lives entirely in the zero component"
        );
        let arcs = &locus.components[&(0, 0)];
        let axis_count = arcs.iter().filter(|a| is_axis(a)).count();
        assert_eq!(axis_count, 1);
        let non_axis: Vec<&Arc> = arcs.iter().filter(|a| !is_axis(a)).collect();
        assert!(
            non_axis.len() >= 4,
            "two branches and their mirrors expected, got {}",
            non_axis.len()
        );

        // Each non-axis arc runs from the reducible junction to the window,
        // and the junction sits over the Alexander root: x = ln φ with
        // φ the golden ratio, since the roots are φ² and φ⁻².
        assert_eq!(locus.alexander_points.len(), 2);
        let golden = 0.5 * (1.0 + 5.0f64.sqrt());
        let ax = locus.alexander_points.iter().map(|a| a.x).fold(0.0, f64::max);
        assert!((ax - golden.ln()).abs() < 1e-9);
        for arc in &non_axis {
            let ends = [arc.end_neg, arc.end_pos];
            assert!(
                ends.contains(&EndKind::ReducibleJunction),
                "arc {} ends: {:?}",
                arc.id,
                ends
            );
            assert!(ends.contains(&EndKind::WindowExit));
            let junction = if arc.end_neg == EndKind::ReducibleJunction {
                arc.points.first().unwrap()
            } else {
                arc.points.last().unwrap()
            };
            assert!(
                (junction.x.abs() - ax).abs() < 1e-3 && junction.y.abs() < 1e-3,
                "junction of arc {} at ({:.5}, {:.5})",
                arc.id,
                junction.x,
                junction.y
            );
        }

        // Ideal tails approach the slope ±4 lines, both signs realized.
        let slopes: Vec<f64> = non_axis.iter().flat_map(|a| a.asymptotes.clone()).collect();
        assert!(!slopes.is_empty());
        for m in &slopes {
            assert!((m.abs() - 4.0).abs() < 0.1, "asymptote slope {m}");
        }
        assert!(slopes.iter().any(|m| *m > 0.0) && slopes.iter().any(|m| *m < 0.0));

        assert!(locus.parabolic_points.is_empty());
        assert!(locus.validation.passed(), "{:?}", locus.validation);
    }

    #[test]
    fn five_two_locus_reaches_the_nonzero_components() {
        let pres = two_bridge(7, 3).unwrap();
        let locus = build_locus(&pres, &small_options()).unwrap();

        let keys: Vec<(i64, i64)> = locus.components.keys().copied().collect();
        assert_eq!(keys, vec![(0, -1), (0, 0), (0, 1)]);
        assert!(locus.alexander_points.is_empty());

        // the parabolic representation starts one arc in each of (0, ±1)
        let labels: Vec<(i64, i64)> =
            locus.parabolic_points.iter().map(|p| (p.i, p.j)).collect();
        assert_eq!(labels, vec![(0, -1), (0, 1)]);

        // zero component: slopes 0 and −4 beside the axis
        let h00: Vec<&Arc> = locus.components[&(0, 0)].iter().filter(|a| !is_axis(a)).collect();
        let slopes: Vec<f64> = h00.iter().flat_map(|a| a.asymptotes.clone()).collect();
        assert!(slopes.iter().any(|m| m.abs() < 0.1), "slope 0 tail missing: {slopes:?}");
        assert!(
            slopes.iter().any(|m| (m + 4.0).abs() < 0.1),
            "slope −4 tail missing: {slopes:?}"
        );

        // the (0, ±1) arcs run from the origin out along slope −10
        for key in [(0, 1), (0, -1)] {
            let arcs = &locus.components[&key];
            assert!(!arcs.is_empty());
            let slopes: Vec<f64> = arcs.iter().flat_map(|a| a.asymptotes.clone()).collect();
            assert!(
                slopes.iter().any(|m| (m + 10.0).abs() < 0.2),
                "component {key:?} slopes {slopes:?}"
            );
        }
        assert!(locus.validation.passed(), "{:?}", locus.validation);
    }

    #[test]
    fn quotient_keeps_one_arc_per_mirror_pair() {
        let pres = two_bridge(7, 3).unwrap();
        let locus = build_locus(&pres, &small_options()).unwrap();
        let reduced = dinfty_reduce(&locus);

        // axis truncated to the half line
        let axis: Vec<&Arc> = reduced
            .components
            .get(&(0, 0))
            .map(|v| v.iter().filter(|a| a.points.iter().all(|p| p.chart.is_none())).collect())
            .unwrap_or_default();
        assert!(axis.iter().any(|a| {
            a.points.iter().all(|p| p.x >= -1e-12)
                && a.points.iter().any(|p| p.x > reduced.x_max - 0.1)
        }));

        // mirror pairs collapse: of (0, 1) and (0, −1) one label survives
        let has_pos = reduced.components.get(&(0, 1)).map_or(false, |v| !v.is_empty());
        let has_neg = reduced.components.get(&(0, -1)).map_or(false, |v| !v.is_empty());
        assert!(has_pos ^ has_neg, "exactly one of the mirror components survives");

        // arcs at x > 0 no longer have their reflections
        let full_count: usize = locus.components.values().map(Vec::len).sum();
        let reduced_count: usize = reduced.components.values().map(Vec::len).sum();
        assert!(reduced_count < full_count);

        assert_eq!(reduced.alexander_points.len(), 0);
        assert_eq!(reduced.parabolic_points.len(), 1);
    }

    #[test]
    fn validation_detects_injected_faults() {
        let pres = two_bridge(5, 3).unwrap();
        let locus = build_locus(&pres, &small_options()).unwrap();
        assert!(locus.validation.passed());

        // shift the longitude labels of one component beyond the bound
        let mut shifted = locus.clone();
        let arcs = shifted.components.remove(&(0, 0)).unwrap();
        let arcs = arcs
            .into_iter()
            .map(|mut a| {
                a.j += 2;
                for p in &mut a.points {
                    p.j += 2;
                }
                a
            })
            .collect();
        shifted.components.insert((0, 2), arcs);
        let report = validate_locus(&shifted, &pres);
        assert!(report.checks.iter().any(|c| c.name == "euler-bound" && !c.pass));

        // drop one mirror arc, breaking the reflection symmetry
        let mut torn = locus.clone();
        let arcs = torn.components.get_mut(&(0, 0)).unwrap();
        let victim = arcs
            .iter()
            .position(|a| !is_axis(a) && a.points.first().map_or(false, |p| p.x < 0.0))
            .expect("a mirror arc exists");
        arcs.remove(victim);
        let report = validate_locus(&torn, &pres);
        assert!(report.checks.iter().any(|c| c.name == "dihedral-symmetry" && !c.pass));
    }

    #[test]
    fn elliptic_stream_stays_in_the_translation_strip() {
        let pres = two_bridge(7, 3).unwrap();
        let options = LocusOptions { s_grid: 30, el: true, el_grid: 60, ..LocusOptions::default() };
        let locus = build_locus(&pres, &options).unwrap();
        assert!(!locus.el_arcs.is_empty(), "{:?}", locus.diagnostics);
        for arc in &locus.el_arcs {
            for p in &arc.points {
                assert!(
                    (-1e-9..1.0 + 1e-9).contains(&p.x),
                    "meridian translation {} outside the strip",
                    p.x
                );
                assert_eq!(p.kind, PointKind::EllipticEl);
            }
        }
        assert!(locus.validation.passed(), "{:?}", locus.validation);
    }
}
