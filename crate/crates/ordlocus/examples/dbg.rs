//! Scratch: exact-arithmetic oracle for asymptote slopes of ends that leave
//! the window through the x wall. Follows a branch of the real Riley variety
//! to very large s with bigint matrices (s and u rational make every letter
//! an integer matrix over a known denominator), so there is no determinant
//! drift and no precision cliff. Not part of the library.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use ordlocus::{two_bridge, Presentation, Word};

#[derive(Clone)]
struct Mat {
    e: [[BigInt; 2]; 2],
}

fn mmul(a: &Mat, b: &Mat) -> Mat {
    let p = |i: usize, j: usize| &a.e[i][0] * &b.e[0][j] + &a.e[i][1] * &b.e[1][j];
    Mat {
        e: [[p(0, 0), p(0, 1)], [p(1, 0), p(1, 1)]],
    }
}

/// s = p/q with p > q > 0, u = un / 2^uk.
struct Params {
    p: BigInt,
    q: BigInt,
    un: BigInt,
    uk: u32,
}

impl Params {
    fn letter(&self, g: usize, pos: bool) -> Mat {
        let pp = &self.p * &self.p;
        let qq = &self.q * &self.q;
        let pq = &self.p * &self.q;
        let two_uk = BigInt::from(1) << self.uk;
        let z = BigInt::from(0);
        let e = match (g, pos) {
            (0, true) => [[pp, pq], [z, qq]],
            (0, false) => [[qq, -pq], [z, pp]],
            (1, true) => [[pp * &two_uk, z], [&self.un * pq, qq * &two_uk]],
            (1, false) => [[qq * &two_uk, z], [-&self.un * pq, pp * &two_uk]],
            _ => panic!("two generators only"),
        };
        Mat { e }
    }

    /// ln of the implicit positive denominator of `eval`'s product.
    fn ln_den(&self, w: &Word) -> f64 {
        let lpq = ln_big(&(&self.p * &self.q));
        let lb = lpq + self.uk as f64 * std::f64::consts::LN_2;
        let mut t = 0.0;
        for &(g, e) in w.letters() {
            t += e.unsigned_abs() as f64 * if g == 0 { lpq } else { lb };
        }
        t
    }

    fn eval(&self, w: &Word) -> Mat {
        let mut m = Mat {
            e: [
                [BigInt::from(1), BigInt::from(0)],
                [BigInt::from(0), BigInt::from(1)],
            ],
        };
        for &(g, e) in w.letters() {
            let l = self.letter(g, e > 0);
            for _ in 0..e.unsigned_abs() {
                m = mmul(&m, &l);
            }
        }
        m
    }
}

fn ln_big(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    let sh = bits.saturating_sub(64);
    let mant = (n.abs() >> sh).to_f64().unwrap();
    mant.ln() + sh as f64 * std::f64::consts::LN_2
}

fn rel_c_sign(pres: &Presentation, params: &Params) -> i8 {
    let m = params.eval(&pres.relators[0]);
    match m.e[1][0].sign() {
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => 0,
        num_bigint::Sign::Plus => 1,
    }
}

/// ln of the relative size of the off-identity part of the relator image.
/// Near -90 after a full bisection at a true curve point; near 0 at a root
/// of the c-entry that is not a representation.
fn rel_defect(pres: &Presentation, params: &Params) -> f64 {
    let m = params.eval(&pres.relators[0]);
    let dia = ln_big(&m.e[0][0]).max(ln_big(&m.e[1][1]));
    let off = ln_big(&m.e[0][1])
        .max(ln_big(&m.e[1][0]))
        .max(ln_big(&(&m.e[0][0] - &m.e[1][1])));
    off - dia
}

/// |logmag| of the longitude image at the meridian's non-infinite fixed
/// point v = -pq/(p^2-q^2), read from whichever of the two exact factors
/// (a - cv) and (cv + d) is larger.
fn y_abs(pres: &Presentation, params: &Params) -> f64 {
    let m = params.eval(&pres.longitude);
    let d2 = &params.p * &params.p - &params.q * &params.q;
    let pq = &params.p * &params.q;
    let num_co = &m.e[0][0] * &d2 + &m.e[1][0] * &pq;
    let num_dn = &m.e[1][1] * &d2 - &m.e[1][0] * &pq;
    let scale = params.ln_den(&pres.longitude) + ln_big(&d2);
    (ln_big(&num_co).max(ln_big(&num_dn)) - scale).abs()
}

/// Bisect the sign change of the relator's lower-left entry in u at fixed s.
/// Returns the midpoint parameters, or None if the bracket has no change.
fn bisect_u(pres: &Presentation, p: &BigInt, q: &BigInt, center: f64, width: f64) -> Option<Params> {
    bisect_u_capped(pres, p, q, center, width, 7)
}

fn bisect_u_capped(
    pres: &Presentation,
    p: &BigInt,
    q: &BigInt,
    center: f64,
    width: f64,
    doublings: usize,
) -> Option<Params> {
    let mut w = width;
    for _ in 0..doublings {
        let uk = 60u32;
        let to_dyadic = |x: f64| BigInt::from((x * (1u64 << uk) as f64) as i128);
        let lo = to_dyadic(center - w);
        let hi = to_dyadic(center + w);
        let at = |un: &BigInt| Params {
            p: p.clone(),
            q: q.clone(),
            un: un.clone(),
            uk,
        };
        let slo = rel_c_sign(pres, &at(&lo));
        let shi = rel_c_sign(pres, &at(&hi));
        if slo == 0 {
            return Some(at(&lo));
        }
        if shi == 0 {
            return Some(at(&hi));
        }
        if slo != shi {
            return Some(bisect_core(pres, p, q, lo, hi, uk, slo));
        }
        w *= 2.0;
    }
    None
}

fn bisect_core(
    pres: &Presentation,
    p: &BigInt,
    q: &BigInt,
    mut lo: BigInt,
    mut hi: BigInt,
    mut kk: u32,
    slo: i8,
) -> Params {
    let at = |un: &BigInt, kk: u32| Params {
        p: p.clone(),
        q: q.clone(),
        un: un.clone(),
        uk: kk,
    };
    for _ in 0..110 {
        lo <<= 1u32;
        hi <<= 1u32;
        kk += 1;
        let mid = (&lo + &hi) / 2;
        let sm = rel_c_sign(pres, &at(&mid, kk));
        if sm == 0 {
            return at(&mid, kk);
        }
        if sm == slo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = (&lo + &hi) / 2;
    at(&mid, kk)
}

/// Subdivide [center-width, center+width] into cells, bisect every sign
/// crossing of the relator c-entry, and keep the true representation
/// points. Survives spurious c-roots sitting next to the branch.
fn scan_bracket(
    pres: &Presentation,
    p: &BigInt,
    q: &BigInt,
    center: f64,
    width: f64,
    cells: usize,
) -> Vec<Params> {
    let uk = 60u32;
    let to_dyadic = |x: f64| BigInt::from((x * (1u64 << uk) as f64) as i128);
    let mut out = Vec::new();
    let mut prev: Option<(BigInt, i8)> = None;
    for k in 0..=cells {
        let u = center - width + 2.0 * width * k as f64 / cells as f64;
        let un = to_dyadic(u);
        let sg = rel_c_sign(
            pres,
            &Params {
                p: p.clone(),
                q: q.clone(),
                un: un.clone(),
                uk,
            },
        );
        if let Some((up, sp)) = prev.take() {
            if sg != 0 && sp != 0 && sg != sp {
                let cand = bisect_core(pres, p, q, up.clone(), un.clone(), uk, sp);
                if rel_defect(pres, &cand) < -20.0 {
                    out.push(cand);
                }
            }
        }
        prev = Some((un, sg));
    }
    out
}

fn dyadic_to_f64(un: &BigInt, uk: u32) -> f64 {
    if uk > 53 {
        (un >> (uk - 53)).to_f64().unwrap() * 2f64.powi(-53)
    } else {
        un.to_f64().unwrap() * 2f64.powi(-(uk as i32))
    }
}

fn survey(pres: &Presentation, p0: &BigInt, q0: &BigInt) -> Vec<(f64, f64)> {
    // every sign crossing of the relator c-entry on a u grid at s0 = p0/q0,
    // found in exact arithmetic so no residual gate can drop a branch. The
    // c-entry vanishes identically at u = 0, so that sample is replaced by
    // two just off zero. Roots of the c-entry that fail the full relator
    // check are reported as spurious and skipped.
    let uk = 60u32;
    let mut out = Vec::new();
    let mut prev: Option<(f64, i8)> = None;
    // dense where roots cluster, coarse on the tails
    let mut us: Vec<f64> = Vec::new();
    let mut u = -60.0;
    while u <= 60.0 {
        us.push(u);
        u += if u.abs() <= 8.0 { 1.0 / 64.0 } else { 0.125 };
    }
    let eps = 2f64.powi(-20);
    if let Some(pos) = us.iter().position(|&u| u == 0.0) {
        us.splice(pos..=pos, [-eps, eps]);
    }
    for u in us {
        let un = BigInt::from((u * (1u64 << uk) as f64) as i128);
        let s = rel_c_sign(
            pres,
            &Params {
                p: p0.clone(),
                q: q0.clone(),
                un,
                uk,
            },
        );
        if let Some((up, sp)) = prev {
            if s != 0 && sp != 0 && s != sp {
                if let Some(params) =
                    bisect_u(pres, p0, q0, (u + up) / 2.0, (u - up) / 2.0 + 1e-9)
                {
                    let x = ln_big(&params.p) - ln_big(&params.q);
                    let r = y_abs(pres, &params) / x;
                    let ur = dyadic_to_f64(&params.un, params.uk);
                    let defect = rel_defect(pres, &params);
                    if defect > -20.0 {
                        println!("  c-root u={ur:+10.5} is not a rep (ln defect {defect:+7.1})");
                    } else {
                        println!("  root u={ur:+10.5}  |y|/x={r:8.4}  (ln defect {defect:+7.1})");
                        out.push((ur, r));
                    }
                }
            }
        }
        prev = Some((u, s));
    }
    out
}

/// Follow one branch from (s0 = p0/q0, u0) as s grows, until x = ln s
/// passes 5. The s step is adaptive: near folds (where u moves steeply
/// with s) the ratio backs down a ladder of smaller rationals, so the
/// root prediction stays inside its own branch. Returns the last |y|/x.
fn follow(pres: &Presentation, p0: &BigInt, q0: &BigInt, u0: f64) -> Option<f64> {
    const LADDER: [(u32, u32); 8] = [
        (21, 20),
        (41, 40),
        (81, 80),
        (161, 160),
        (321, 320),
        (641, 640),
        (1281, 1280),
        (2561, 2560),
    ];
    // seed point at s0 itself
    let Some(seed) = bisect_u_capped(pres, p0, q0, u0, 1e-6 * u0.abs().max(1.0), 2) else {
        println!("    seed root did not re-bracket");
        return None;
    };
    let x0 = ln_big(p0) - ln_big(q0);
    let y0 = y_abs(pres, &seed);
    let mut hist: Vec<(f64, f64, f64, f64)> = Vec::new(); // (x, y, r, u)
    println!(
        "    x={x0:8.4}  |y|={y0:10.4}  |y|/x={:9.5}  u={:.8}",
        y0 / x0,
        dyadic_to_f64(&seed.un, seed.uk)
    );
    hist.push((x0, y0, y0 / x0, dyadic_to_f64(&seed.un, seed.uk)));
    let mut p = p0.clone();
    let mut q = q0.clone();
    let mut rung = 0usize;
    let mut streak = 0usize;
    let mut since_print = 0usize;
    for _ in 0..900 {
        let (rn, rd) = LADDER[rung];
        let mut pn = &p * rn;
        let mut qn = &q * rd;
        let g = gcd(&pn, &qn);
        pn /= &g;
        qn /= &g;
        let xn = ln_big(&pn) - ln_big(&qn);
        let x2 = hist[hist.len() - 1].0;
        let u2 = hist[hist.len() - 1].3;
        let cands: Vec<(f64, f64)> = if hist.len() == 1 {
            let w = ((xn - x2) / 0.05 * 0.04 * u2.abs()).max(0.005);
            vec![
                (u2, w),
                (u2 * (1.0 + 2.0 * (xn - x2)), w),
                (u2 / (1.0 + 2.0 * (xn - x2)), w),
                (u2, 6.0 * w),
            ]
        } else {
            let (x1, u1) = (hist[hist.len() - 2].0, hist[hist.len() - 2].3);
            let du = (u2 - u1) / (x2 - x1) * (xn - x2);
            let w = (0.6 * du.abs()).max(0.003 * (xn - x2) / 0.05);
            vec![
                (u2 + du, w),
                (u2 + du, 3.0 * w),
                (u2 + du * (1.0 + du / u2.abs().max(1e-12)), w),
                (u2, 2.0 * w),
            ]
        };
        let thr = if hist.len() == 1 {
            2.0 * (xn - x2) / 0.05
        } else {
            let (r1, r2) = (hist[hist.len() - 2].2, hist[hist.len() - 1].2);
            let scale = (xn - x2) / (x2 - hist[hist.len() - 2].0).max(1e-12);
            0.3 + 4.0 * ((r2 - r1) * scale).abs()
        };
        let rp = hist[hist.len() - 1].2;
        let mut found = None;
        for &(c, wd) in &cands {
            if let Some(params) = bisect_u_capped(pres, &pn, &qn, c, wd, 2) {
                let y = y_abs(pres, &params);
                let r = y / xn;
                if (r - rp).abs() < thr && rel_defect(pres, &params) < -20.0 {
                    found = Some((params, y, r));
                    break;
                }
            }
        }
        if found.is_none() {
            // wide scan fallback: spurious c-roots near the branch defeat a
            // plain bracket, so subdivide and test every crossing
            let wide = (20.0 * cands[0].1).max(0.08 * u2.abs()).max(0.02);
            for params in scan_bracket(pres, &pn, &qn, cands[0].0, wide, 96) {
                let y = y_abs(pres, &params);
                let r = y / xn;
                let better = found
                    .as_ref()
                    .map_or(true, |&(_, _, rf): &(Params, f64, f64)| {
                        (r - rp).abs() < (rf - rp).abs()
                    });
                if (r - rp).abs() < thr && better {
                    found = Some((params, y, r));
                }
            }
        }
        let Some((params, y, r)) = found else {
            if rung + 1 < LADDER.len() {
                rung += 1;
                streak = 0;
                continue;
            }
            println!(
                "    branch lost near s with ln s = {:.3} at the smallest step",
                ln_big(&p) - ln_big(&q)
            );
            post_mortem(pres, &p, &q, u2);
            return hist.last().map(|&(_, _, r, _)| r);
        };
        let u = dyadic_to_f64(&params.un, params.uk);
        p = pn;
        q = qn;
        since_print += 1;
        if since_print >= 16 || xn > 5.0 {
            println!("    x={xn:8.4}  |y|={y:10.4}  |y|/x={r:9.5}  u={u:.8}");
            since_print = 0;
        }
        hist.push((xn, y, r, u));
        if xn > 5.0 {
            return Some(r);
        }
        streak += 1;
        if streak >= 3 && rung > 0 {
            rung -= 1;
            streak = 0;
        }
    }
    hist.last().map(|&(_, _, r, _)| r)
}

/// On a lost branch: scan a window of u around the last root and report
/// every crossing with its ratio and defect, to see where the branch went.
fn post_mortem(pres: &Presentation, p: &BigInt, q: &BigInt, u_last: f64) {
    let uk = 60u32;
    let span = 1.0 + 0.6 * u_last.abs();
    let step = span / 256.0;
    let mut prev: Option<(f64, i8)> = None;
    let x = ln_big(p) - ln_big(q);
    let mut k = -256i64;
    while k <= 256 {
        let u = u_last + k as f64 * step;
        k += 1;
        if u == 0.0 {
            continue;
        }
        let un = BigInt::from((u * (1u64 << uk) as f64) as i128);
        let s = rel_c_sign(
            pres,
            &Params {
                p: p.clone(),
                q: q.clone(),
                un,
                uk,
            },
        );
        if let Some((up, sp)) = prev {
            if s != 0 && sp != 0 && s != sp {
                if let Some(params) = bisect_u(pres, p, q, (u + up) / 2.0, step / 2.0 + 1e-12) {
                    let r = y_abs(pres, &params) / x;
                    let ur = dyadic_to_f64(&params.un, params.uk);
                    let defect = rel_defect(pres, &params);
                    println!(
                        "      post-mortem root u={ur:+10.5}  |y|/x={r:8.4}  (ln defect {defect:+7.1})"
                    );
                }
            }
        }
        prev = Some((u, s));
    }
}

fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut a, mut b) = (a.abs(), b.abs());
    while !num_traits::Zero::is_zero(&b) {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

fn main() {
    let knots = [
        ("4_1 = b(5,3)", two_bridge(5, 3).unwrap()),
        ("5_2 = b(7,3)", two_bridge(7, 3).unwrap()),
        ("7_3 = b(13,4)", two_bridge(13, 4).unwrap()),
    ];
    let p0 = BigInt::from(33);
    let q0 = BigInt::from(20);
    for (name, pres) in &knots {
        println!("-- {name}: survey at s = 33/20 (x = {:.4}) --", (33f64 / 20.0).ln());
        let roots = survey(pres, &p0, &q0);
        let mut limits = Vec::new();
        for &(u0, r0) in &roots {
            println!("  following u0={u0:+.5} (|y|/x = {r0:.4} at x = 0.5):");
            if let Some(rf) = follow(pres, &p0, &q0, u0) {
                limits.push((u0, rf));
            }
        }
        println!("== {name} asymptote ratios: ==");
        for (u0, rf) in limits {
            println!("    u0 = {u0:+10.5}  ->  |y|/x = {rf:.5}");
        }
    }

    // fold check: every real branch of b(13,4) at s = 18/5 (x = 1.2809),
    // over a wide u range; a slope-14 branch would need |y| near 18 here
    println!("-- 7_3 fold check: all roots at s = 18/5 in [-200, 200] --");
    let p1 = BigInt::from(18);
    let q1 = BigInt::from(5);
    let pres = &knots[2].1;
    let x1 = ln_big(&p1) - ln_big(&q1);
    let uk = 60u32;
    let mut prev: Option<(f64, i8)> = None;
    let mut u = -200.0;
    while u <= 200.0 {
        if u != 0.0 {
            let un = BigInt::from((u * (1u64 << uk) as f64) as i128);
            let sg = rel_c_sign(
                pres,
                &Params {
                    p: p1.clone(),
                    q: q1.clone(),
                    un,
                    uk,
                },
            );
            if let Some((up, sp)) = prev {
                if sg != 0 && sp != 0 && sg != sp {
                    if let Some(params) =
                        bisect_u(pres, &p1, &q1, (u + up) / 2.0, (u - up) / 2.0 + 1e-12)
                    {
                        let r = y_abs(pres, &params) / x1;
                        let ur = dyadic_to_f64(&params.un, params.uk);
                        let defect = rel_defect(pres, &params);
                        if defect < -20.0 {
                            println!("    root u={ur:+10.5}  |y|={:8.4}  |y|/x={r:8.4}", r * x1);
                        } else {
                            println!("    c-root u={ur:+10.5} (not a rep)");
                        }
                    }
                }
            }
            prev = Some((u, sg));
        } else {
            prev = None;
        }
        u += 0.125;
    }
}
