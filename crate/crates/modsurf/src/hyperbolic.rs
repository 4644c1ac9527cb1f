//! Exact upper half-plane geometry: points with rational coordinates,
//! integer Möbius transformations, reduction to the standard fundamental
//! domain with a recorded word, orbit heights, and cusp neighborhoods.
//!
//! The fundamental domain convention is
//! `F = { re in [-1/2, 1/2), |z| > 1 }  union  { |z| = 1, re in [-1/2, 0] }`,
//! which contains exactly one point of every orbit, so two points lie in the
//! same orbit if and only if they reduce to the same exact point.

use crate::numth::{self, int_string, rational_string, Int, Rational};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HyperbolicError {
    #[error("imaginary part must be positive, got {0}")]
    NonPositiveImaginary(String),
    #[error("Möbius action requires positive determinant, got {0}")]
    NonPositiveDeterminant(String),
    #[error("matrix is not unimodular (determinant {0})")]
    NotUnimodular(String),
    #[error("cusp neighborhood height must be at least 1, got {0}")]
    HeightBelowOne(String),
    #[error("cannot parse {0:?} as a point (expected `re+imi`, e.g. `1/3+1/100i`)")]
    ParsePoint(String),
}

/// A point of the upper half-plane with exact rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExactPoint {
    #[serde(with = "rational_string")]
    re: Rational,
    #[serde(with = "rational_string")]
    im: Rational,
}

impl ExactPoint {
    pub fn new(re: Rational, im: Rational) -> Result<Self, HyperbolicError> {
        if !im.is_positive() {
            return Err(HyperbolicError::NonPositiveImaginary(numth::format_rational(&im)));
        }
        Ok(Self { re, im })
    }

    pub fn re(&self) -> &Rational {
        &self.re
    }

    pub fn im(&self) -> &Rational {
        &self.im
    }

    /// `|z|^2` as an exact rational.
    pub fn norm_sq(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (numth::rational_to_f64(&self.re), numth::rational_to_f64(&self.im))
    }

    /// Parse `re+imi` with rational components, e.g. `1/3+1/100i` or `0+2i`.
    pub fn parse(s: &str) -> Result<Self, HyperbolicError> {
        let t = s.trim();
        let body = t
            .strip_suffix('i')
            .ok_or_else(|| HyperbolicError::ParsePoint(s.to_string()))?;
        // Split at the sign that separates the two components: the last
        // '+'/'-' that is not the leading sign and not part of `/-`.
        let bytes = body.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'/' {
                split = Some(i);
                break;
            }
        }
        let i = split.ok_or_else(|| HyperbolicError::ParsePoint(s.to_string()))?;
        let re = numth::parse_rational(&body[..i])
            .map_err(|_| HyperbolicError::ParsePoint(s.to_string()))?;
        let im_str = if bytes[i] == b'+' { &body[i + 1..] } else { &body[i..] };
        let im = numth::parse_rational(im_str)
            .map_err(|_| HyperbolicError::ParsePoint(s.to_string()))?;
        ExactPoint::new(re, im)
    }
}

impl fmt::Display for ExactPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}+{}i",
            numth::format_rational(&self.re),
            numth::format_rational(&self.im)
        )
    }
}

/// A 2x2 integer matrix acting on the upper half-plane when its determinant
/// is positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMatrix2 {
    #[serde(with = "int_string")]
    pub a: Int,
    #[serde(with = "int_string")]
    pub b: Int,
    #[serde(with = "int_string")]
    pub c: Int,
    #[serde(with = "int_string")]
    pub d: Int,
}

impl IntMatrix2 {
    pub fn new(a: Int, b: Int, c: Int, d: Int) -> Self {
        Self { a, b, c, d }
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self::new(Int::from(a), Int::from(b), Int::from(c), Int::from(d))
    }

    pub fn identity() -> Self {
        Self::from_i64(1, 0, 0, 1)
    }

    /// Horizontal translation `z -> z + t`.
    pub fn translation(t: Int) -> Self {
        Self::new(Int::one(), t, Int::zero(), Int::one())
    }

    /// Inversion `z -> -1/z`.
    pub fn inversion() -> Self {
        Self::from_i64(0, -1, 1, 0)
    }

    pub fn det(&self) -> Int {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs().is_one()
    }

    pub fn mul(&self, o: &IntMatrix2) -> IntMatrix2 {
        IntMatrix2::new(
            &self.a * &o.a + &self.b * &o.c,
            &self.a * &o.b + &self.b * &o.d,
            &self.c * &o.a + &self.d * &o.c,
            &self.c * &o.b + &self.d * &o.d,
        )
    }

    pub fn neg(&self) -> IntMatrix2 {
        IntMatrix2::new(-&self.a, -&self.b, -&self.c, -&self.d)
    }

    /// Inverse of a matrix with determinant ±1.
    pub fn inverse(&self) -> Result<IntMatrix2, HyperbolicError> {
        let det = self.det();
        if det.is_one() {
            Ok(IntMatrix2::new(self.d.clone(), -&self.b, -&self.c, self.a.clone()))
        } else if (-&det).is_one() {
            Ok(IntMatrix2::new(-&self.d, self.b.clone(), self.c.clone(), -&self.a))
        } else {
            Err(HyperbolicError::NotUnimodular(det.to_string()))
        }
    }

    /// Möbius action on the boundary: `x` rational or `None` for infinity.
    /// Returns `None` when the image is infinity.
    pub fn act_boundary(&self, x: Option<&Rational>) -> Option<Rational> {
        let (p, q) = match x {
            None => (Int::one(), Int::zero()),
            Some(r) => (r.numer().clone(), r.denom().clone()),
        };
        let np = &self.a * &p + &self.b * &q;
        let nq = &self.c * &p + &self.d * &q;
        if nq.is_zero() {
            None
        } else {
            Some(Rational::new(np, nq))
        }
    }
}

impl fmt::Display for IntMatrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {}; {} {}]", self.a, self.b, self.c, self.d)
    }
}

/// Möbius action `z -> (az+b)/(cz+d)`, exact, for any positive determinant.
pub fn mobius(g: &IntMatrix2, z: &ExactPoint) -> Result<ExactPoint, HyperbolicError> {
    let det = g.det();
    if !det.is_positive() {
        return Err(HyperbolicError::NonPositiveDeterminant(det.to_string()));
    }
    let a = Rational::from_integer(g.a.clone());
    let b = Rational::from_integer(g.b.clone());
    let c = Rational::from_integer(g.c.clone());
    let d = Rational::from_integer(g.d.clone());
    let u = &c * &z.re + &d; // Re(cz + d)
    let v = &c * &z.im; // Im(cz + d)
    let denom = &u * &u + &v * &v;
    let re = ((&a * &z.re + &b) * &u + &a * &z.im * &v) / &denom;
    let im = Rational::from_integer(det) * &z.im / denom;
    ExactPoint::new(re, im)
}

/// One step of a reduction word, in the order applied to the input point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    /// `z -> z + k` (k nonzero)
    T(Int),
    /// `z -> -1/z`
    S,
}

impl Step {
    pub fn matrix(&self) -> IntMatrix2 {
        match self {
            Step::T(k) => IntMatrix2::translation(k.clone()),
            Step::S => IntMatrix2::inversion(),
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::T(k) => write!(f, "T^{}", k),
            Step::S => write!(f, "S"),
        }
    }
}

impl Serialize for Step {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Step {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "S" {
            return Ok(Step::S);
        }
        if let Some(k) = s.strip_prefix("T^") {
            if let Ok(v) = k.parse::<Int>() {
                return Ok(Step::T(v));
            }
        }
        Err(serde::de::Error::custom(format!("bad word step {s:?}")))
    }
}

/// Render a word as `T^3 S T^-1 ...` (empty word renders as `e`).
pub fn format_word(word: &[Step]) -> String {
    if word.is_empty() {
        "e".to_string()
    } else {
        word.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
    }
}

/// The matrix carrying the input point to the reduced point (the product of
/// the step matrices in application order).
pub fn word_matrix(word: &[Step]) -> IntMatrix2 {
    let mut m = IntMatrix2::identity();
    for s in word {
        m = s.matrix().mul(&m);
    }
    m
}

/// A reduced representative together with a word mapping the input to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedPoint {
    pub point: ExactPoint,
    pub word: Vec<Step>,
}

impl ReducedPoint {
    pub fn matrix(&self) -> IntMatrix2 {
        word_matrix(&self.word)
    }
}

/// Whether `z` lies in the fundamental domain (with the boundary convention
/// fixed in the module docs).
pub fn in_fundamental_domain(z: &ExactPoint) -> bool {
    let half = numth::rat(1, 2);
    if z.re < -half.clone() || z.re >= half {
        return false;
    }
    let n = z.norm_sq();
    if n > Rational::one() {
        return true;
    }
    n == Rational::one() && !z.re.is_positive()
}

/// Reduce a point to the fundamental domain, recording the word of
/// generator steps applied. Exact; terminates for every rational point.
pub fn reduce(z: &ExactPoint) -> ReducedPoint {
    let mut cur = z.clone();
    let mut word: Vec<Step> = Vec::new();
    let half = numth::rat(1, 2);
    loop {
        // translate so that re lands in [-1/2, 1/2)
        let t = -(&cur.re + &half).floor().to_integer();
        if !t.is_zero() {
            cur.re += Rational::from_integer(t.clone());
            word.push(Step::T(t));
        }
        let n = cur.norm_sq();
        if n < Rational::one() || (n == Rational::one() && cur.re.is_positive()) {
            // z -> -1/z, exactly
            let re = -&cur.re / &n;
            let im = &cur.im / &n;
            cur = ExactPoint { re, im };
            word.push(Step::S);
            continue;
        }
        break;
    }
    debug_assert!(in_fundamental_domain(&cur));
    ReducedPoint { point: cur, word }
}

/// The height of the orbit of `z`: the imaginary part of its reduced
/// representative (equivalently, the maximum of `Im` over the orbit).
pub fn orbit_height(z: &ExactPoint) -> Rational {
    reduce(z).point.im
}

/// Reference implementation of the orbit height by direct sweep over
/// bottom rows `(c, d)` with `|c|, |d| <= range`: the orbit of `z` attains
/// heights `im(z)/|cz+d|^2` over coprime `(c, d)`. Agrees with
/// [`orbit_height`] whenever the sweep range covers the reducing matrix.
pub fn orbit_height_sweep(z: &ExactPoint, range: i64) -> Rational {
    let mut best = Rational::zero();
    for c in -range..=range {
        for d in -range..=range {
            if (c, d) == (0, 0) || Int::from(c).gcd(&Int::from(d)) != Int::one() {
                continue;
            }
            let u = numth::rat_i(c) * &z.re + numth::rat_i(d);
            let v = numth::rat_i(c) * &z.im;
            let denom = &u * &u + &v * &v;
            let h = &z.im / denom;
            if h > best {
                best = h;
            }
        }
    }
    best
}

/// Whether the orbit of `z` enters the cusp neighborhood at height `y0`,
/// i.e. whether the orbit height strictly exceeds `y0`. Requires `y0 >= 1`
/// (below that the neighborhoods overlap themselves and the question loses
/// its geometric meaning).
pub fn in_cusp_neighborhood(z: &ExactPoint, y0: &Rational) -> Result<bool, HyperbolicError> {
    if y0 < &Rational::one() {
        return Err(HyperbolicError::HeightBelowOne(numth::format_rational(y0)));
    }
    Ok(&orbit_height(z) > y0)
}

/// Hyperbolic distance between two exact points, as f64. The argument of
/// `acosh` is computed exactly before the final conversion.
pub fn hyperbolic_distance(z: &ExactPoint, w: &ExactPoint) -> f64 {
    let dr = &z.re - &w.re;
    let di = &z.im - &w.im;
    let num = &dr * &dr + &di * &di;
    let arg = Rational::one() + num / (numth::rat_i(2) * &z.im * &w.im);
    numth::rational_to_f64(&arg).acosh()
}

/// Fast approximate fundamental-domain reduction in f64, for Monte-Carlo
/// inner loops. Boundary ties are resolved by floating-point comparison;
/// exact suites use [`reduce`] instead.
pub fn reduce_f64(mut x: f64, mut y: f64) -> (f64, f64) {
    for _ in 0..256 {
        x -= x.round();
        let n = x * x + y * y;
        if n < 1.0 {
            x = -x / n;
            y /= n;
        } else {
            break;
        }
    }
    (x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numth::{rat, rat_i};
    use num_traits::ToPrimitive;

    fn pt(re: Rational, im: Rational) -> ExactPoint {
        ExactPoint::new(re, im).unwrap()
    }

    #[test]
    fn point_parse_and_display() {
        let z = ExactPoint::parse("1/3+1/100i").unwrap();
        assert_eq!(z.re(), &rat(1, 3));
        assert_eq!(z.im(), &rat(1, 100));
        assert_eq!(z.to_string(), "1/3+1/100i");
        let w = ExactPoint::parse("-1/2+2i").unwrap();
        assert_eq!(w.re(), &rat(-1, 2));
        assert!(ExactPoint::parse("1/3").is_err());
        assert!(ExactPoint::parse("1/3-2i").is_err()); // negative imaginary part
        assert!(ExactPoint::parse("0+0i").is_err());
        let z2 = ExactPoint::parse(&z.to_string()).unwrap();
        assert_eq!(z, z2);
    }

    #[test]
    fn mobius_matches_float_arithmetic() {
        let g = IntMatrix2::from_i64(2, 1, 3, 2);
        let z = pt(rat(1, 3), rat(1, 5));
        let w = mobius(&g, &z).unwrap();
        // compare against complex arithmetic in f64
        let (x, y) = z.to_f64();
        let den = (3.0 * x + 2.0) * (3.0 * x + 2.0) + (3.0 * y) * (3.0 * y);
        let ex = ((2.0 * x + 1.0) * (3.0 * x + 2.0) + 2.0 * y * 3.0 * y) / den;
        let ey = (g.det().to_f64().unwrap()) * y / den;
        let (wx, wy) = w.to_f64();
        assert!((wx - ex).abs() < 1e-12 && (wy - ey).abs() < 1e-12);
        // determinant sign is enforced
        let bad = IntMatrix2::from_i64(1, 0, 0, -1);
        assert!(mobius(&bad, &z).is_err());
    }

    #[test]
    fn det_n_action_scales_height() {
        // diag(n, 1) sends iy to n*iy
        let g = IntMatrix2::from_i64(2, 0, 0, 1);
        let z = pt(Rational::zero(), rat_i(1));
        let w = mobius(&g, &z).unwrap();
        assert_eq!(w.im(), &rat_i(2));
    }

    #[test]
    fn reduce_examples() {
        // i/2 -> 2i by a single inversion
        let r = reduce(&pt(Rational::zero(), rat(1, 2)));
        assert_eq!(r.point, pt(Rational::zero(), rat_i(2)));
        assert_eq!(format_word(&r.word), "S");
        // 1+i -> i by a single translation
        let r = reduce(&pt(rat_i(1), rat_i(1)));
        assert_eq!(r.point, pt(Rational::zero(), rat_i(1)));
        assert_eq!(format_word(&r.word), "T^-1");
        // a point already reduced keeps an empty word
        let r = reduce(&pt(rat(1, 4), rat_i(3)));
        assert!(r.word.is_empty());
        assert_eq!(format_word(&r.word), "e");
    }

    #[test]
    fn reduce_word_matrix_carries_input_to_output() {
        let zs = [
            pt(rat(3, 7), rat(1, 9)),
            pt(rat(-13, 5), rat(2, 11)),
            pt(rat(355, 113), rat(1, 1000)),
            pt(rat(1, 2), rat(1, 2)),
        ];
        for z in zs {
            let r = reduce(&z);
            assert!(in_fundamental_domain(&r.point));
            let m = r.matrix();
            assert!(m.is_unimodular());
            assert_eq!(mobius(&m, &z).unwrap(), r.point);
        }
    }

    #[test]
    fn reduce_boundary_conventions() {
        // |z| = 1 with positive real part flips to the non-positive side
        let z = pt(rat(3, 5), rat(4, 5));
        let r = reduce(&z);
        assert!(in_fundamental_domain(&r.point));
        // re = +1/2 is translated to -1/2
        let z = pt(rat(1, 2), rat_i(2));
        let r = reduce(&z);
        assert_eq!(r.point.re(), &rat(-1, 2));
        // the corner: (1+i*sqrt(3))/2 is not rational, but its rational
        // neighbors on re = 1/2 reduce into the domain; spot-check one
        let z = pt(rat(1, 2), rat(9, 10));
        let r = reduce(&z);
        assert!(in_fundamental_domain(&r.point));
    }

    #[test]
    fn reduction_is_orbit_invariant() {
        let z = pt(rat(2, 7), rat(3, 5));
        let gammas = [
            IntMatrix2::from_i64(1, 3, 0, 1),
            IntMatrix2::from_i64(0, -1, 1, 0),
            IntMatrix2::from_i64(2, 1, 1, 1),
            IntMatrix2::from_i64(-5, 2, -3, 1),
            IntMatrix2::from_i64(-1, 0, 0, -1),
        ];
        let base = reduce(&z).point;
        for g in gammas {
            assert!(g.is_unimodular());
            let r = reduce(&mobius(&g, &z).unwrap());
            assert_eq!(r.point, base);
        }
    }

    #[test]
    fn orbit_height_examples() {
        // x + i reduces to height exactly 1 for every rational x
        for x in [rat(0, 1), rat(1, 3), rat(7, 2), rat(-22, 7)] {
            assert_eq!(orbit_height(&pt(x, rat_i(1))), rat_i(1));
        }
        // near the cusp 1/3: height = (1/100) / |3z-1|^2 = 100/9
        let z = pt(rat(1, 3), rat(1, 100));
        assert_eq!(orbit_height(&z), rat(100, 9));
        assert!(in_cusp_neighborhood(&z, &rat_i(10)).unwrap());
        assert!(!in_cusp_neighborhood(&z, &rat_i(12)).unwrap());
        assert!(in_cusp_neighborhood(&z, &rat(1, 2)).is_err());
    }

    #[test]
    fn orbit_height_matches_sweep() {
        let zs = [
            pt(rat(1, 3), rat(1, 2)),
            pt(rat(2, 5), rat(3, 7)),
            pt(rat(-1, 4), rat(5, 8)),
            pt(rat(1, 2), rat(1, 3)),
        ];
        for z in zs {
            assert_eq!(orbit_height(&z), orbit_height_sweep(&z, 4), "z={z}");
        }
    }

    #[test]
    fn distance_basics() {
        let i = pt(Rational::zero(), rat_i(1));
        let two_i = pt(Rational::zero(), rat_i(2));
        assert!((hyperbolic_distance(&i, &two_i) - 2f64.ln()).abs() < 1e-14);
        assert_eq!(hyperbolic_distance(&i, &i), 0.0);
        let z = pt(rat(1, 3), rat(4, 7));
        assert!(
            (hyperbolic_distance(&z, &i) - hyperbolic_distance(&i, &z)).abs() < 1e-14
        );
    }

    #[test]
    fn float_reduction_tracks_exact() {
        let zs = [
            pt(rat(3, 7), rat(1, 9)),
            pt(rat(-13, 5), rat(2, 11)),
            pt(rat(9, 20), rat(1, 50)),
        ];
        for z in zs {
            let r = reduce(&z);
            let (ex, ey) = r.point.to_f64();
            let (fx, fy) = reduce_f64(
                numth::rational_to_f64(z.re()),
                numth::rational_to_f64(z.im()),
            );
            assert!((fx - ex).abs() < 1e-9 && (fy - ey).abs() < 1e-9);
        }
    }

    #[test]
    fn word_serde_round_trip() {
        let r = reduce(&pt(rat(3, 7), rat(1, 9)));
        let json = serde_json::to_string(&r).unwrap();
        let back: ReducedPoint = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
