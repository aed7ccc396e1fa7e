//! Fox calculus and Alexander polynomials of deficiency-1 presentations.
//!
//! The abelianization in play sends every generator to t: the built-in
//! presentations have meridional generators, all conjugate in the group, so
//! this is the knot-exterior abelianization onto the free homology. The
//! Alexander polynomial of a two-generator presentation ⟨a, b | r⟩ is the
//! image of the free derivative ∂r/∂a, normalized to lowest exponent 0 and
//! positive leading coefficient. The fundamental identity of free calculus,
//! ∂r/∂a·(t − 1) + ∂r/∂b·(t − 1) = t^{E(r)} − 1, forces the two derivative
//! images to be negatives of one another for nullhomologous relators, so
//! the choice of generator is immaterial.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::presentation::{Presentation, Word};
use crate::roots;
use crate::Error;

/// Roots this close to 1 are excluded from Alexander points.
pub const ROOT_AT_ONE_TOL: f64 = 1e-9;

/// An integer Laurent polynomial. Coefficients are exact integers indexed
/// by exponents lo, lo+1, …; the first and last stored coefficients are
/// nonzero, and the zero polynomial stores nothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentPoly {
    lo: i64,
    coeffs: Vec<BigInt>,
}

impl LaurentPoly {
    pub fn zero() -> LaurentPoly {
        LaurentPoly { lo: 0, coeffs: Vec::new() }
    }

    pub fn one() -> LaurentPoly {
        LaurentPoly::monomial(0, 1)
    }

    /// The monomial c·t^k.
    pub fn monomial(k: i64, c: i64) -> LaurentPoly {
        if c == 0 {
            LaurentPoly::zero()
        } else {
            LaurentPoly { lo: k, coeffs: vec![BigInt::from(c)] }
        }
    }

    /// Builds from coefficients for t^lo, t^{lo+1}, …, trimming zeros.
    pub fn from_coeffs(lo: i64, coeffs: Vec<BigInt>) -> LaurentPoly {
        let mut p = LaurentPoly { lo, coeffs };
        p.trim();
        p
    }

    pub fn from_i64(lo: i64, coeffs: &[i64]) -> LaurentPoly {
        LaurentPoly::from_coeffs(lo, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    fn trim(&mut self) {
        while self.coeffs.last().map_or(false, |c| c.is_zero()) {
            self.coeffs.pop();
        }
        let lead_zeros = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead_zeros > 0 {
            self.coeffs.drain(..lead_zeros);
            self.lo += lead_zeros as i64;
        }
        if self.coeffs.is_empty() {
            self.lo = 0;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest exponent with nonzero coefficient; 0 for the zero polynomial.
    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// Highest exponent with nonzero coefficient; 0 for the zero polynomial.
    pub fn hi(&self) -> i64 {
        if self.coeffs.is_empty() {
            0
        } else {
            self.lo + self.coeffs.len() as i64 - 1
        }
    }

    /// Coefficient of t^k.
    pub fn coeff(&self, k: i64) -> BigInt {
        if k < self.lo || k >= self.lo + self.coeffs.len() as i64 {
            BigInt::zero()
        } else {
            self.coeffs[(k - self.lo) as usize].clone()
        }
    }

    /// Dense coefficient slice, lowest exponent first.
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn add(&self, o: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let lo = self.lo.min(o.lo);
        let hi = self.hi().max(o.hi());
        let mut coeffs = vec![BigInt::zero(); (hi - lo + 1) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[(self.lo - lo) as usize + i] += c;
        }
        for (i, c) in o.coeffs.iter().enumerate() {
            coeffs[(o.lo - lo) as usize + i] += c;
        }
        LaurentPoly::from_coeffs(lo, coeffs)
    }

    pub fn neg(&self) -> LaurentPoly {
        LaurentPoly { lo: self.lo, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, o: &LaurentPoly) -> LaurentPoly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() || o.is_zero() {
            return LaurentPoly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        LaurentPoly::from_coeffs(self.lo + o.lo, coeffs)
    }

    /// Multiplies by t^k.
    pub fn shift(&self, k: i64) -> LaurentPoly {
        if self.is_zero() {
            LaurentPoly::zero()
        } else {
            LaurentPoly { lo: self.lo + k, coeffs: self.coeffs.clone() }
        }
    }

    /// Evaluation at a positive real (negative exponents are fine).
    pub fn eval_f64(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * t + bigint_to_f64(c);
        }
        acc * t.powi(self.lo as i32)
    }

    /// Exact value at t = 1: the coefficient sum.
    pub fn eval_at_one(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    /// The reversed polynomial t^{lo+hi}·p(1/t), sharing the exponent span.
    pub fn reciprocal(&self) -> LaurentPoly {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        LaurentPoly::from_coeffs(self.lo, coeffs)
    }

    /// Equality up to the units ±t^k of the Laurent ring.
    pub fn eq_up_to_units(&self, o: &LaurentPoly) -> bool {
        if self.is_zero() || o.is_zero() {
            return self.is_zero() && o.is_zero();
        }
        self.coeffs == o.coeffs || self.coeffs.iter().map(|c| -c).eq(o.coeffs.iter().cloned())
    }

    /// Largest absolute coefficient, as a float, for residual scaling.
    pub fn max_coeff_f64(&self) -> f64 {
        self.coeffs.iter().map(|c| bigint_to_f64(&c.abs())).fold(0.0, f64::max)
    }
}

fn bigint_to_f64(c: &BigInt) -> f64 {
    // TryFrom is not implemented; string round-trip is exact enough for the
    // coefficient sizes in play and only feeds float refinement
    use num_traits::ToPrimitive;
    c.to_f64().expect("finite coefficient")
}

impl std::fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let k = self.lo + i as i64;
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let show_coeff = mag != BigInt::from(1) || k == 0;
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match k {
                0 => {}
                1 => write!(f, "t")?,
                _ => write!(f, "t^{k}")?,
            }
        }
        Ok(())
    }
}

/// The image of the free derivative ∂word/∂gen under the abelianization
/// sending every generator to t.
///
/// Satisfies the product rule ∂(uv) = ∂u + φ(u)·∂v with φ(u) = t^{E(u)},
/// where E is the total exponent sum.
pub fn fox_derivative(word: &Word, gen: usize) -> LaurentPoly {
    let mut acc = LaurentPoly::zero();
    let mut prefix: i64 = 0;
    for &(g, e) in word.letters() {
        if g == gen {
            // ∂x = 1 and ∂(x⁻¹) = −x⁻¹ before abelianizing
            let term = if e > 0 {
                LaurentPoly::monomial(prefix, 1)
            } else {
                LaurentPoly::monomial(prefix - 1, -1)
            };
            acc = acc.add(&term);
        }
        prefix += e as i64;
    }
    acc
}

/// The Alexander polynomial of a two-generator deficiency-1 presentation,
/// normalized to lowest exponent 0 and positive leading coefficient.
pub fn alexander_polynomial(p: &Presentation) -> Result<LaurentPoly, Error> {
    if p.generators != 2 || p.relators.len() != 1 {
        return Err(Error::InvalidInput(format!(
            "Alexander polynomial needs a two-generator one-relator presentation, got {} generators and {} relators",
            p.generators,
            p.relators.len()
        )));
    }
    let r = &p.relators[0];
    if r.total_exponent() != 0 {
        return Err(Error::InvalidInput(format!(
            "relator has exponent sum {}, so it does not present a knot exterior over meridional generators",
            r.total_exponent()
        )));
    }
    let da = fox_derivative(r, 0);
    let db = fox_derivative(r, 1);
    // for a nullhomologous relator the fundamental identity of free
    // calculus forces ∂r/∂a = −∂r/∂b after abelianizing; a failure here
    // means the relator does not define a knot-like presentation
    if !da.add(&db).is_zero() {
        return Err(Error::InvalidInput(
            "derivative images do not cancel; the relator is not consistent with the meridional abelianization".into(),
        ));
    }
    if da.is_zero() {
        return Err(Error::InvalidInput("relator has vanishing Alexander image".into()));
    }
    let mut delta = da.shift(-da.lo());
    if delta.coeffs.last().unwrap().is_negative() {
        delta = delta.neg();
    }
    Ok(delta)
}

/// A positive real root ξ ≠ 1 of the Alexander polynomial, carried with
/// the abscissa x = ln(ξ)/2 it marks on the translation axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlexanderPoint {
    pub x: f64,
    pub root: f64,
    pub multiplicity: u32,
    pub simple: bool,
}

/// Alexander points of a presentation: one per positive real root ξ ≠ 1 of
/// the Alexander polynomial, at x = ln(ξ)/2. Reciprocal roots give points
/// symmetric about 0 and both are kept.
pub fn alexander_points(p: &Presentation) -> Result<Vec<AlexanderPoint>, Error> {
    Ok(alexander_points_detailed(p)?.0)
}

/// As `alexander_points`, also returning human-readable warnings (roots
/// discarded for lying within `ROOT_AT_ONE_TOL` of 1).
pub fn alexander_points_detailed(
    p: &Presentation,
) -> Result<(Vec<AlexanderPoint>, Vec<String>), Error> {
    let delta = alexander_polynomial(p)?;
    let mut points = Vec::new();
    let mut warnings = Vec::new();
    for (root, multiplicity) in roots::positive_real_roots(&delta) {
        if (root - 1.0).abs() < ROOT_AT_ONE_TOL {
            warnings.push(format!(
                "Alexander root {root} within {ROOT_AT_ONE_TOL:e} of 1 excluded"
            ));
            continue;
        }
        points.push(AlexanderPoint {
            x: root.ln() / 2.0,
            root,
            multiplicity,
            simple: multiplicity == 1,
        });
    }
    points.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap());
    Ok((points, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::two_bridge_words;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn word(s: &str) -> Word {
        Word::parse(s, &['a', 'b']).unwrap()
    }

    #[test]
    fn fox_basics() {
        assert_eq!(fox_derivative(&word("a"), 0), LaurentPoly::one());
        assert_eq!(fox_derivative(&word("A"), 0), LaurentPoly::monomial(-1, -1));
        assert_eq!(fox_derivative(&word("b"), 0), LaurentPoly::zero());
        // the commutator: ∂(a b A B)/∂a = 1 − t
        assert_eq!(fox_derivative(&word("a b A B"), 0), LaurentPoly::from_i64(0, &[1, -1]));
    }

    #[test]
    fn fox_product_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let names = ['a', 'b'];
        let mut random_word = |rng: &mut ChaCha8Rng| -> Word {
            let len = rng.gen_range(0..12);
            Word::from_letters((0..len).map(|_| {
                (rng.gen_range(0..2usize), if rng.gen_bool(0.5) { 1i8 } else { -1 })
            }))
        };
        for _ in 0..1000 {
            let u = random_word(&mut rng);
            let v = random_word(&mut rng);
            let uv = u.concat(&v);
            for gen in 0..2 {
                let lhs = fox_derivative(&uv, gen);
                let rhs = fox_derivative(&u, gen)
                    .add(&LaurentPoly::monomial(u.total_exponent(), 1).mul(&fox_derivative(&v, gen)));
                assert_eq!(
                    lhs,
                    rhs,
                    "product rule failed on {} · {}",
                    u.render(&names),
                    v.render(&names)
                );
            }
        }
    }

    #[test]
    fn alexander_small_knots() {
        let trefoil = alexander_polynomial(&two_bridge_words(3, 1).unwrap()).unwrap();
        assert_eq!(trefoil, LaurentPoly::from_i64(0, &[1, -1, 1]));

        let fig8 = alexander_polynomial(&two_bridge_words(5, 3).unwrap()).unwrap();
        assert_eq!(fig8, LaurentPoly::from_i64(0, &[1, -3, 1]));

        let k52 = alexander_polynomial(&two_bridge_words(7, 3).unwrap()).unwrap();
        assert!(k52.eq_up_to_units(&LaurentPoly::from_i64(0, &[2, -3, 2])), "got {k52}");

        let k134 = alexander_polynomial(&two_bridge_words(13, 4).unwrap()).unwrap();
        assert!(
            k134.eq_up_to_units(&LaurentPoly::from_i64(0, &[2, -3, 3, -3, 2])),
            "got {k134}"
        );
    }

    #[test]
    fn alexander_normalization_and_symmetry() {
        for (p, q) in [(3, 1), (5, 3), (7, 3), (9, 5), (11, 4), (13, 4), (15, 7)] {
            let d = alexander_polynomial(&two_bridge_words(p, q).unwrap()).unwrap();
            assert_eq!(d.lo(), 0, "b({p},{q}) lowest exponent");
            assert!(d.coeffs().last().unwrap().is_positive(), "b({p},{q}) leading sign");
            // knot polynomials are reciprocal up to sign and |Δ(1)| = 1
            assert!(
                d.eq_up_to_units(&d.reciprocal()),
                "b({p},{q}) asymmetric: {d}"
            );
            assert_eq!(d.eval_at_one().abs(), BigInt::from(1), "b({p},{q}) Δ(1)");
        }
    }

    #[test]
    fn alexander_invariance_under_inverse_parameter() {
        // b(p, q) and b(p, q') with q·q' ≡ 1 mod p present the same knot
        for (p, q, q2) in [(5u64, 2u64, 3u64), (7, 3, 5), (11, 3, 4), (13, 4, 10)] {
            assert_eq!((q * q2) % p, 1);
            let d1 = alexander_polynomial(&two_bridge_words(p, q).unwrap()).unwrap();
            let d2 = alexander_polynomial(&two_bridge_words(p, q2).unwrap()).unwrap();
            assert!(d1.eq_up_to_units(&d2), "b({p},{q}) vs b({p},{q2}): {d1} vs {d2}");
        }
    }

    #[test]
    fn alexander_rejects_non_knot_presentations() {
        let mut p = two_bridge_words(5, 3).unwrap();
        p.relators[0] = word("a b a");
        assert!(alexander_polynomial(&p).is_err());

        let mut p3 = two_bridge_words(5, 3).unwrap();
        p3.generators = 3;
        p3.names.push('c');
        assert!(alexander_polynomial(&p3).is_err());
    }

    #[test]
    fn alexander_points_of_small_knots() {
        // the figure eight: roots (3 ± √5)/2 give x = ±0.481212…
        let (points, warnings) =
            alexander_points_detailed(&two_bridge_words(5, 3).unwrap()).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(points.len(), 2);
        let x = 0.5 * ((3.0 + 5.0f64.sqrt()) / 2.0).ln();
        assert!((points[0].x + x).abs() < 1e-12);
        assert!((points[1].x - x).abs() < 1e-12);
        assert!(points.iter().all(|p| p.simple && p.multiplicity == 1));
        assert!((points[1].x - 0.481212).abs() < 1e-6);
        // x = ln(root)/2 exactly as computed
        for p in &points {
            assert_eq!(p.x, p.root.ln() / 2.0);
        }

        // Δ of b(7,3) is 2t² − 3t + 2 with no positive real roots
        let points = alexander_points(&two_bridge_words(7, 3).unwrap()).unwrap();
        assert!(points.is_empty());

        // trefoil Δ = t² − t + 1 likewise
        let points = alexander_points(&two_bridge_words(3, 1).unwrap()).unwrap();
        assert!(points.is_empty());
    }

    #[test]
    fn alexander_points_exclude_roots_at_one() {
        // ⟨a, b | abAB⟩ has Δ ≐ t − 1; the root at 1 is excluded, with a warning
        let text = "generators: a b\nrelator: a b A B\nmeridian: a\nlongitude: a B\nname: torus\n";
        let pres = crate::presentation::parse_presentation(text).unwrap();
        let (points, warnings) = alexander_points_detailed(&pres).unwrap();
        assert!(points.is_empty());
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("excluded"));
    }

    #[test]
    fn laurent_display_and_eval() {
        let p = LaurentPoly::from_i64(0, &[6, -13, 6]);
        assert_eq!(p.to_string(), "6t^2 - 13t + 6");
        assert_eq!(p.eval_at_one(), BigInt::from(-1));
        assert!((p.eval_f64(1.5) - 0.0).abs() < 1e-12);
        assert!((p.eval_f64(2.0) - 4.0).abs() < 1e-12);

        let q = LaurentPoly::from_i64(-1, &[1, 0, 1]);
        assert_eq!(q.to_string(), "t + t^-1");
        assert!((q.eval_f64(2.0) - 2.5).abs() < 1e-12);

        assert_eq!(LaurentPoly::zero().to_string(), "0");
        assert_eq!(LaurentPoly::from_i64(0, &[1, -3, 1]).to_string(), "t^2 - 3t + 1");
    }

    #[test]
    fn laurent_ring_ops() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..200 {
            let rand_poly = |rng: &mut ChaCha8Rng| {
                let lo = rng.gen_range(-3i64..3);
                let coeffs: Vec<i64> = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(-4..5)).collect();
                LaurentPoly::from_i64(lo, &coeffs)
            };
            let a = rand_poly(&mut rng);
            let b = rand_poly(&mut rng);
            let c = rand_poly(&mut rng);
            // distributivity and commutativity spot checks
            assert_eq!(a.mul(&b), b.mul(&a));
            assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            assert_eq!(a.sub(&a), LaurentPoly::zero());
            // evaluation is a homomorphism
            let t = rng.gen_range(0.3..2.0);
            let lhs = a.mul(&b).eval_f64(t);
            let rhs = a.eval_f64(t) * b.eval_f64(t);
            assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
        }
    }
}
