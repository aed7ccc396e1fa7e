//! Exact isolation of the positive real roots of integer polynomials.
//!
//! Multiplicities come from Yun's square-free decomposition over the
//! integers (primitive-part gcds keep every division exact), isolation uses
//! Sturm chains evaluated at dyadic rationals, and only the last refinement
//! step leaves exact arithmetic. Simplicity verdicts therefore never hinge
//! on floating-point gcds.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::alexander::LaurentPoly;

/// Dense integer polynomial, index = exponent, trimmed leading zeros.
type IPoly = Vec<BigInt>;

fn trim(p: &mut IPoly) {
    while p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
}

fn deg(p: &IPoly) -> usize {
    debug_assert!(!p.is_empty());
    p.len() - 1
}

fn derivative(p: &IPoly) -> IPoly {
    if p.len() <= 1 {
        return Vec::new();
    }
    p.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect()
}

fn content(p: &IPoly) -> BigInt {
    let mut g = BigInt::zero();
    for c in p {
        g = gcd_bigint(&g, c);
        if g == BigInt::from(1) {
            break;
        }
    }
    g
}

fn gcd_bigint(a: &BigInt, b: &BigInt) -> BigInt {
    let mut a = a.abs();
    let mut b = b.abs();
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

/// Divides by the positive content, preserving sign.
fn primitive(p: &IPoly) -> IPoly {
    if p.is_empty() {
        return Vec::new();
    }
    let c = content(p);
    p.iter().map(|x| x / &c).collect()
}

/// Exact polynomial division; the divisions performed here are theorems of
/// Gauss's lemma, so non-exactness is an internal error.
fn exact_div(num: &IPoly, den: &IPoly) -> IPoly {
    debug_assert!(!den.is_empty());
    if num.is_empty() {
        return Vec::new();
    }
    assert!(num.len() >= den.len(), "non-exact division: degree deficit");
    let mut rem = num.clone();
    let dd = deg(den);
    let lead = den[dd].clone();
    let mut quot = vec![BigInt::zero(); num.len() - den.len() + 1];
    while !rem.is_empty() && deg(&rem) >= dd {
        let k = deg(&rem) - dd;
        let q = &rem[deg(&rem)] / &lead;
        debug_assert_eq!(&q * &lead, rem[deg(&rem)].clone(), "non-exact division");
        for i in 0..=dd {
            let t = &den[i] * &q;
            rem[k + i] -= t;
        }
        quot[k] = q;
        trim(&mut rem);
    }
    debug_assert!(rem.is_empty(), "non-exact division: remainder {rem:?}");
    trim(&mut quot);
    quot
}

/// Pseudo-remainder: the remainder of lc(den)^{δ+1}·num by den, exact over
/// the integers. Returns (remainder, sign of the multiplier).
fn pseudo_rem(num: &IPoly, den: &IPoly) -> (IPoly, i8) {
    let dd = deg(den);
    let lead = den[dd].clone();
    let delta = deg(num) - dd;
    let mult_sign = if lead.is_negative() && (delta + 1) % 2 == 1 { -1 } else { 1 };
    let mut rem: IPoly = num.clone();
    for _ in 0..=delta {
        if rem.is_empty() || deg(&rem) < dd {
            // degree dropped early; scale the rest to keep the multiplier uniform
            rem = rem.iter().map(|c| c * &lead).collect();
            continue;
        }
        let k = deg(&rem) - dd;
        let top = rem[deg(&rem)].clone();
        rem = rem.iter().map(|c| c * &lead).collect();
        for i in 0..=dd {
            let t = &den[i] * &top;
            rem[k + i] -= t;
        }
        trim(&mut rem);
    }
    (rem, mult_sign)
}

/// Primitive-PRS gcd, returned primitive with positive leading coefficient.
fn poly_gcd(p: &IPoly, q: &IPoly) -> IPoly {
    let mut a = primitive(p);
    let mut b = primitive(q);
    if a.is_empty() {
        return normalize_sign(b);
    }
    while !b.is_empty() {
        if deg(&b) == 0 {
            return vec![BigInt::from(1)];
        }
        if deg(&a) < deg(&b) {
            std::mem::swap(&mut a, &mut b);
            continue;
        }
        let (r, _) = pseudo_rem(&a, &b);
        a = b;
        b = primitive(&r);
    }
    normalize_sign(a)
}

fn normalize_sign(mut p: IPoly) -> IPoly {
    if p.last().map_or(false, |c| c.is_negative()) {
        p = p.iter().map(|c| -c).collect();
    }
    p
}

/// Yun's square-free decomposition of a primitive polynomial: the returned
/// pairs (a_i, i) satisfy f = Π a_iⁱ up to sign, each a_i square-free.
fn yun(f: &IPoly) -> Vec<(IPoly, u32)> {
    if f.len() <= 1 {
        return Vec::new();
    }
    if f.len() == 2 {
        return vec![(normalize_sign(primitive(f)), 1)];
    }
    let fp = derivative(f);
    let a0 = poly_gcd(f, &fp);
    let mut b = exact_div(&primitive(f), &a0);
    let c = exact_div(&fp, &a0);
    let mut d = sub(&c, &derivative(&b));
    let mut out = Vec::new();
    let mut i = 1u32;
    loop {
        let a = poly_gcd(&b, &d);
        if deg(&a) > 0 {
            out.push((a.clone(), i));
        }
        b = exact_div(&b, &a);
        let cc = exact_div(&d, &a);
        if b.len() <= 1 {
            break;
        }
        d = sub(&cc, &derivative(&b));
        i += 1;
    }
    out
}

fn sub(p: &IPoly, q: &IPoly) -> IPoly {
    let mut out = vec![BigInt::zero(); p.len().max(q.len())];
    for (i, c) in p.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in q.iter().enumerate() {
        out[i] -= c;
    }
    trim(&mut out);
    out
}

/// A dyadic rational num/2^k.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Dyadic {
    num: BigInt,
    k: u32,
}

impl Dyadic {
    fn from_int(n: i64) -> Dyadic {
        Dyadic { num: BigInt::from(n), k: 0 }
    }

    fn midpoint(&self, o: &Dyadic) -> Dyadic {
        let k = self.k.max(o.k);
        let a = &self.num << (k - self.k);
        let b = &o.num << (k - o.k);
        let mut m = Dyadic { num: a + b, k: k + 1 };
        m.normalize();
        m
    }

    fn normalize(&mut self) {
        while self.k > 0 && !self.num.bit(0) {
            self.num /= 2;
            self.k -= 1;
        }
    }

    fn shift_down(&self, j: u32) -> Dyadic {
        // self − 2^{−j}
        let k = self.k.max(j);
        let mut d = Dyadic { num: (&self.num << (k - self.k)) - (BigInt::from(1) << (k - j)), k };
        d.normalize();
        d
    }

    fn shift_up(&self, j: u32) -> Dyadic {
        let k = self.k.max(j);
        let mut d = Dyadic { num: (&self.num << (k - self.k)) + (BigInt::from(1) << (k - j)), k };
        d.normalize();
        d
    }

    fn to_f64(&self) -> f64 {
        // num may be huge after long bisections; scale via float exponent
        let n = self.num.to_f64().unwrap_or(f64::INFINITY);
        n / 2f64.powi(self.k as i32)
    }
}

/// Exact sign of p at a dyadic point.
fn sign_at(p: &IPoly, x: &Dyadic) -> i8 {
    if p.is_empty() {
        return 0;
    }
    let d = deg(p);
    // Σ c_i num^i 2^{k(d−i)}, the value scaled by the positive 2^{kd}
    let mut acc = BigInt::zero();
    let mut num_pow = BigInt::from(1);
    for (i, c) in p.iter().enumerate() {
        let shift = (x.k as u64) * ((d - i) as u64);
        acc += c * &num_pow << shift;
        if i < d {
            num_pow *= &x.num;
        }
    }
    match acc.sign() {
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => 0,
        num_bigint::Sign::Plus => 1,
    }
}

/// Number of sign changes of the chain at a point, zeros skipped.
fn sign_changes(chain: &[IPoly], x: &Dyadic) -> u32 {
    let mut count = 0;
    let mut prev = 0i8;
    for p in chain {
        let s = sign_at(p, x);
        if s != 0 {
            if prev != 0 && s != prev {
                count += 1;
            }
            prev = s;
        }
    }
    count
}

fn sturm_chain(f: &IPoly) -> Vec<IPoly> {
    let mut chain = vec![primitive(f)];
    let fp = derivative(f);
    if fp.is_empty() {
        return chain;
    }
    chain.push(primitive(&fp));
    loop {
        let n = chain.len();
        let (a, b) = (&chain[n - 2], &chain[n - 1]);
        if b.is_empty() || deg(b) == 0 {
            break;
        }
        if deg(a) < deg(b) {
            break;
        }
        let (r, ms) = pseudo_rem(a, b);
        if r.is_empty() {
            break;
        }
        // Sturm needs the negated true remainder up to a positive factor
        let next = if ms > 0 { primitive(&r).iter().map(|c| -c).collect() } else { primitive(&r) };
        chain.push(next);
    }
    chain
}

enum Isolated {
    Interval(Dyadic, Dyadic),
    Exact(Dyadic),
}

/// Isolates all roots of a square-free polynomial in (0, ∞).
fn isolate_positive(f: &IPoly) -> Vec<Isolated> {
    debug_assert!(!f.is_empty() && !f[0].is_zero(), "no root at zero expected");
    let chain = sturm_chain(f);
    // power-of-two Cauchy bound, strict for every root
    let lead = f.last().unwrap().to_f64().unwrap().abs();
    let maxc = f.iter().map(|c| c.to_f64().unwrap().abs()).fold(0.0, f64::max);
    let bound = 1.0 + maxc / lead;
    let m = bound.log2().ceil() as u32 + 1;
    let lo = Dyadic::from_int(0);
    let hi = Dyadic { num: BigInt::from(1) << m, k: 0 };
    debug_assert!(sign_at(f, &hi) != 0);

    let mut out = Vec::new();
    let v_lo = sign_changes(&chain, &lo);
    let v_hi = sign_changes(&chain, &hi);
    split(f, &chain, lo, v_lo, hi, v_hi, &mut out);
    out
}

/// Recursive bisection on (lo, hi] with Sturm counts at the endpoints.
fn split(
    f: &IPoly,
    chain: &[IPoly],
    lo: Dyadic,
    v_lo: u32,
    hi: Dyadic,
    v_hi: u32,
    out: &mut Vec<Isolated>,
) {
    let count = v_lo - v_hi;
    if count == 0 {
        return;
    }
    if count == 1 && sign_at(f, &lo) * sign_at(f, &hi) < 0 {
        out.push(Isolated::Interval(lo, hi));
        return;
    }
    let mid = lo.midpoint(&hi);
    if sign_at(f, &mid) == 0 {
        // the midpoint is an exact root; carve out a punctured neighborhood
        // that provably contains no other root, then recurse on both sides
        let mut j = mid.k + 1;
        loop {
            let a = mid.shift_down(j);
            let b = mid.shift_up(j);
            if sign_at(f, &a) != 0
                && sign_at(f, &b) != 0
                && sign_changes(chain, &a) - sign_changes(chain, &b) == 1
            {
                let va = sign_changes(chain, &a);
                let vb = sign_changes(chain, &b);
                out.push(Isolated::Exact(mid.clone()));
                split(f, chain, lo, v_lo, a, va, out);
                split(f, chain, b, vb, hi, v_hi, out);
                return;
            }
            j += 1;
            assert!(j < 300, "failed to puncture around an exact root");
        }
    }
    let v_mid = sign_changes(chain, &mid);
    split(f, chain, lo, v_lo, mid.clone(), v_mid, out);
    split(f, chain, mid, v_mid, hi, v_hi, out);
}

/// Bisection refinement of an isolating interval to 1e-13 relative width,
/// staying in exact arithmetic for every sign decision.
fn refine(f: &IPoly, mut lo: Dyadic, mut hi: Dyadic) -> f64 {
    let mut s_lo = sign_at(f, &lo);
    debug_assert!(s_lo * sign_at(f, &hi) < 0);
    for _ in 0..300 {
        let lo_f = lo.to_f64();
        let hi_f = hi.to_f64();
        if hi_f - lo_f <= 1e-13 * lo_f.max(1e-300) {
            break;
        }
        let mid = lo.midpoint(&hi);
        let s_mid = sign_at(f, &mid);
        if s_mid == 0 {
            return mid.to_f64();
        }
        if s_mid == s_lo {
            lo = mid;
            s_lo = s_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo.to_f64() + hi.to_f64())
}

/// All roots ξ > 0 of a nonzero integer Laurent polynomial, with
/// multiplicities, sorted ascending. Roots are accurate to 1e-12 relative.
pub fn positive_real_roots(delta: &LaurentPoly) -> Vec<(f64, u32)> {
    if delta.is_zero() {
        return Vec::new();
    }
    // the unit t^lo does not move roots away from (0, ∞)
    let f: IPoly = primitive(&delta.coeffs().to_vec());
    let mut out: Vec<(f64, u32)> = Vec::new();
    for (factor, mult) in yun(&f) {
        for iso in isolate_positive(&factor) {
            let root = match iso {
                Isolated::Exact(d) => d.to_f64(),
                Isolated::Interval(lo, hi) => refine(&factor, lo, hi),
            };
            out.push((root, mult));
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}
