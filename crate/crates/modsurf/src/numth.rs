//! Number-theoretic groundwork: arbitrary-precision rationals, continued
//! fractions, multiplicative functions, and witness searches for
//! psi-approximability.
//!
//! Everything downstream leans on two conventions fixed here:
//!
//! * rationals are `num_rational::BigRational` and are always exact — any
//!   f64 that enters the exact world does so through [`f64_to_rational`],
//!   which is bit-exact;
//! * continued fractions of rationals are canonical (last partial quotient
//!   at least 2 when there is more than one term), so equality of expansions
//!   is equality of numbers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub type Int = BigInt;
pub type Rational = BigRational;

#[derive(Debug, Error, PartialEq)]
pub enum NumthError {
    #[error("cannot parse {0:?} as a rational (expected `p` or `p/q`)")]
    ParseRational(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("invalid continued fraction config: {0}")]
    InvalidCf(String),
    #[error("psi schedule evaluated at n={n} below its domain start {min_n}")]
    PsiDomain { n: u64, min_n: u64 },
    #[error("psi schedule value at n={n} is outside (0, 1/2)")]
    PsiRange { n: u64 },
    #[error("custom psi schedule has no value at n={n} (covers up to {max_n})")]
    PsiExhausted { n: u64, max_n: u64 },
    #[error("cannot convert non-finite float {0} to a rational")]
    NonFinite(f64),
}

// ---------------------------------------------------------------------------
// Small constructors and conversions
// ---------------------------------------------------------------------------

pub fn int(v: i64) -> Int {
    Int::from(v)
}

/// Rational from a machine integer.
pub fn rat_i(v: i64) -> Rational {
    Rational::from_integer(Int::from(v))
}

/// Rational `n/d`. Panics on `d == 0` (programmer error, not input error).
pub fn rat(n: i64, d: i64) -> Rational {
    assert!(d != 0, "rat() with zero denominator");
    Rational::new(Int::from(n), Int::from(d))
}

/// Parse `p` or `p/q` (optionally signed) into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Rational, NumthError> {
    let s = s.trim();
    let mk_err = || NumthError::ParseRational(s.to_string());
    match s.split_once('/') {
        None => {
            let p: Int = s.parse().map_err(|_| mk_err())?;
            Ok(Rational::from_integer(p))
        }
        Some((ps, qs)) => {
            let p: Int = ps.trim().parse().map_err(|_| mk_err())?;
            let q: Int = qs.trim().parse().map_err(|_| mk_err())?;
            if q.is_zero() {
                return Err(NumthError::ZeroDenominator);
            }
            Ok(Rational::new(p, q))
        }
    }
}

/// Parse `p`, `p/q`, or a decimal like `1.2` (taken exactly: `1.2 = 6/5`).
pub fn parse_rational_or_decimal(s: &str) -> Result<Rational, NumthError> {
    let t = s.trim();
    if let Some((int_part, frac_part)) = t.split_once('.') {
        let mk_err = || NumthError::ParseRational(s.to_string());
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(mk_err());
        }
        let negative = int_part.starts_with('-');
        let whole: Int = if int_part.is_empty() || int_part == "-" || int_part == "+" {
            Int::zero()
        } else {
            int_part.parse().map_err(|_| mk_err())?
        };
        let frac_digits: Int = frac_part.parse().map_err(|_| mk_err())?;
        let scale = Int::from(10u32).pow(frac_part.len() as u32);
        let frac = Rational::new(frac_digits, scale);
        let whole = Rational::from_integer(whole);
        Ok(if negative { whole - frac } else { whole + frac })
    } else {
        parse_rational(t)
    }
}

/// Format as `p/q`, or just `p` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Convert to f64 with relative error at most a couple of ulps, for any
/// magnitude of numerator and denominator (overflow saturates to ±inf,
/// underflow to ±0).
pub fn rational_to_f64(r: &Rational) -> f64 {
    if r.numer().is_zero() {
        return 0.0;
    }
    let neg = r.numer().is_negative();
    let num = r.numer().abs();
    let den = r.denom().clone();
    // Scale so the integer quotient keeps ~80 significant bits, then divide.
    let shift: i64 = 80 - (num.bits() as i64 - den.bits() as i64);
    let q = if shift >= 0 {
        (num << (shift as u64)) / den
    } else {
        num / (den << ((-shift) as u64))
    };
    let mut v = q.to_f64().unwrap_or(f64::INFINITY);
    let mut e = -shift;
    while e > 0 {
        let s = e.min(1000) as i32;
        v *= 2f64.powi(s);
        e -= s as i64;
    }
    while e < 0 {
        let s = (-e).min(1000) as i32;
        v /= 2f64.powi(s);
        e += s as i64;
    }
    if neg {
        -v
    } else {
        v
    }
}

/// Bit-exact conversion of a finite f64 to the rational it denotes.
pub fn f64_to_rational(x: f64) -> Result<Rational, NumthError> {
    Rational::from_float(x).ok_or(NumthError::NonFinite(x))
}

/// Nearest integer to `r`, rounding half up (i.e. `floor(r + 1/2)`).
pub fn nearest_integer(r: &Rational) -> Int {
    (r + rat(1, 2)).floor().to_integer()
}

// ---------------------------------------------------------------------------
// Serde helpers: rationals as "p/q" strings, big integers as decimal strings
// ---------------------------------------------------------------------------

pub mod rational_string {
    use super::*;
    use serde::{de, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(de::Error::custom)
    }
}

pub mod int_string {
    use super::*;
    use serde::{de, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Int, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Int, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}

pub mod rational_vec_string {
    use super::*;
    use serde::{de, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let strings: Vec<String> = v.iter().map(format_rational).collect();
        serde::Serialize::serialize(&strings, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let strings = Vec::<String>::deserialize(d)?;
        strings
            .iter()
            .map(|s| parse_rational(s).map_err(de::Error::custom))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Bezout / modular inverses
// ---------------------------------------------------------------------------

/// Extended gcd: returns `(g, s, t)` with `g = s*a + t*b` and `g >= 0`.
pub fn bezout(a: &Int, b: &Int) -> (Int, Int, Int) {
    let e = a.extended_gcd(b);
    debug_assert!(!e.gcd.is_negative());
    debug_assert_eq!(&e.gcd, &(&e.x * a + &e.y * b));
    (e.gcd, e.x, e.y)
}

/// Inverse of `a` modulo `m >= 1`, represented in `[0, m)`.
/// Returns `None` unless `gcd(a, m) == 1`. For `m == 1` the inverse is 0.
pub fn mod_inverse(a: &Int, m: &Int) -> Option<Int> {
    assert!(m.is_positive(), "mod_inverse with non-positive modulus");
    if m.is_one() {
        return Some(Int::zero());
    }
    let (g, s, _) = bezout(a, m);
    if !g.is_one() {
        return None;
    }
    Some(s.mod_floor(m))
}

// ---------------------------------------------------------------------------
// Multiplicative functions (machine-word sized arguments)
// ---------------------------------------------------------------------------

/// Prime factorization by trial division, as `(p, multiplicity)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1, "factorize(0)");
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    assert!(n >= 1, "euler_phi(0)");
    let mut phi = n;
    for (p, _) in factorize(n) {
        phi = phi / p * (p - 1);
    }
    phi
}

/// All positive divisors of `n`, sorted increasingly.
pub fn divisors(n: u64) -> Vec<u64> {
    assert!(n >= 1, "divisors(0)");
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let prev = out.clone();
        let mut pe = 1u64;
        for _ in 0..e {
            pe *= p;
            out.extend(prev.iter().map(|d| d * pe));
        }
    }
    out.sort_unstable();
    out
}

/// Möbius function.
pub fn moebius(n: u64) -> i64 {
    assert!(n >= 1, "moebius(0)");
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Sum of divisors.
pub fn sigma1(n: u64) -> u64 {
    divisors(n).into_iter().sum()
}

// ---------------------------------------------------------------------------
// Continued fractions
// ---------------------------------------------------------------------------

/// Continued fraction expansion `[a0; a1, a2, ...]` of a rational, in the
/// canonical form whose last partial quotient is at least 2 whenever the
/// expansion has more than one term. (The floor algorithm produces this form
/// directly; the final fractional part `1/a_k` forces `a_k >= 2`.)
pub fn continued_fraction(x: &Rational) -> Vec<Int> {
    let mut out = Vec::new();
    let mut cur = x.clone();
    loop {
        let a = cur.floor().to_integer();
        let frac = &cur - Rational::from_integer(a.clone());
        out.push(a);
        if frac.is_zero() {
            break;
        }
        cur = frac.recip();
    }
    debug_assert!(out.len() < 2 || out.last().unwrap() >= &Int::from(2));
    out
}

/// Convergents `p_k/q_k` of a (finite) partial-quotient sequence.
pub fn convergents(cf: &[Int]) -> Vec<(Int, Int)> {
    let mut out = Vec::with_capacity(cf.len());
    // seeds: (p_{-2}, q_{-2}) = (0, 1), (p_{-1}, q_{-1}) = (1, 0)
    let (mut p_prev, mut q_prev) = (Int::zero(), Int::one());
    let (mut p, mut q) = (Int::one(), Int::zero());
    for a in cf {
        let np = a * &p + &p_prev;
        let nq = a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, np);
        q_prev = std::mem::replace(&mut q, nq);
        out.push((p.clone(), q.clone()));
    }
    out
}

/// A closed interval `[lo, hi]` with rational endpoints, used to bracket
/// irrational quantities so that comparisons can be made rigorously.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatInterval {
    lo: Rational,
    hi: Rational,
}

impl RatInterval {
    pub fn new(a: Rational, b: Rational) -> Self {
        if a <= b {
            Self { lo: a, hi: b }
        } else {
            Self { lo: b, hi: a }
        }
    }

    pub fn point(a: Rational) -> Self {
        Self { lo: a.clone(), hi: a }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / rat_i(2)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// Entirely below `t` (strictly).
    pub fn strictly_below(&self, t: &Rational) -> bool {
        &self.hi < t
    }

    /// Entirely above `t` (strictly).
    pub fn strictly_above(&self, t: &Rational) -> bool {
        &self.lo > t
    }

    pub fn shift(&self, d: &Rational) -> Self {
        Self { lo: &self.lo + d, hi: &self.hi + d }
    }

    /// Multiply by a scalar (either sign).
    pub fn scale(&self, s: &Rational) -> Self {
        Self::new(&self.lo * s, &self.hi * s)
    }

    /// Interval of `|x - r|` as `x` ranges over `self`.
    pub fn abs_sub(&self, r: &Rational) -> Self {
        if r <= &self.lo {
            Self { lo: &self.lo - r, hi: &self.hi - r }
        } else if r >= &self.hi {
            Self { lo: r - &self.hi, hi: r - &self.lo }
        } else {
            let a = &self.hi - r;
            let b = r - &self.lo;
            Self { lo: Rational::zero(), hi: a.max(b) }
        }
    }
}

/// Specification of an irrational number by its continued fraction
/// `[a0; prefix..., period repeated forever]`. All partial quotients in
/// `prefix` and `period` must be positive and `period` must be non-empty,
/// so the number is a well-defined irrational.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfConfig {
    pub a0: i64,
    #[serde(default)]
    pub prefix: Vec<u64>,
    pub period: Vec<u64>,
}

impl CfConfig {
    pub fn validate(&self) -> Result<(), NumthError> {
        if self.period.is_empty() {
            return Err(NumthError::InvalidCf("empty period".into()));
        }
        if self.prefix.iter().chain(&self.period).any(|&a| a == 0) {
            return Err(NumthError::InvalidCf(
                "partial quotients after a0 must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// An irrational target number given by an eventually periodic continued
/// fraction, supporting rigorous rational bracketing to any precision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfReal {
    config: CfConfig,
}

impl CfReal {
    pub fn new(config: CfConfig) -> Result<Self, NumthError> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn config(&self) -> &CfConfig {
        &self.config
    }

    /// Partial quotient `a_k` (k = 0 is the integer part).
    pub fn partial(&self, k: usize) -> Int {
        if k == 0 {
            return Int::from(self.config.a0);
        }
        let i = k - 1;
        if i < self.config.prefix.len() {
            Int::from(self.config.prefix[i])
        } else {
            let j = (i - self.config.prefix.len()) % self.config.period.len();
            Int::from(self.config.period[j])
        }
    }

    /// Convergents `p_0/q_0, ..., p_k/q_k`.
    pub fn convergents_upto(&self, k: usize) -> Vec<(Int, Int)> {
        let cf: Vec<Int> = (0..=k).map(|i| self.partial(i)).collect();
        convergents(&cf)
    }

    /// All convergents with denominator at most `n_max`, in order.
    pub fn convergents_with_denominator_upto(&self, n_max: &Int) -> Vec<(Int, Int)> {
        let mut out = Vec::new();
        let (mut p_prev, mut q_prev) = (Int::zero(), Int::one());
        let (mut p, mut q) = (Int::one(), Int::zero());
        let mut k = 0usize;
        loop {
            let a = self.partial(k);
            let np = &a * &p + &p_prev;
            let nq = &a * &q + &q_prev;
            if &nq > n_max {
                break;
            }
            out.push((np.clone(), nq.clone()));
            p_prev = std::mem::replace(&mut p, np);
            q_prev = std::mem::replace(&mut q, nq);
            k += 1;
            if k > 200_000 {
                break; // unreachable: denominators grow at least like Fibonacci
            }
        }
        out
    }

    /// Interval between convergents `k` and `k+1`; the target lies strictly
    /// inside it.
    pub fn bracket_depth(&self, k: usize) -> RatInterval {
        let cs = self.convergents_upto(k + 1);
        let (p0, q0) = &cs[k];
        let (p1, q1) = &cs[k + 1];
        RatInterval::new(
            Rational::new(p0.clone(), q0.clone()),
            Rational::new(p1.clone(), q1.clone()),
        )
    }

    /// A bracketing interval of width less than `min_width`.
    pub fn bracket(&self, min_width: &Rational) -> RatInterval {
        assert!(min_width.is_positive());
        let mut k = 1usize;
        loop {
            let iv = self.bracket_depth(k);
            if &iv.width() < min_width {
                return iv;
            }
            k += k.max(4); // denominators grow at least like Fibonacci
        }
    }

    pub fn approx_f64(&self) -> f64 {
        rational_to_f64(&self.bracket(&rat(1, 1_000_000_000)).midpoint())
    }
}

/// A real number given either exactly or by a continued fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RealInput {
    #[serde(with = "rational_string")]
    Rational(Rational),
    ContinuedFraction(CfReal),
}

impl RealInput {
    pub fn approx_f64(&self) -> f64 {
        match self {
            RealInput::Rational(r) => rational_to_f64(r),
            RealInput::ContinuedFraction(c) => c.approx_f64(),
        }
    }
}

// ---------------------------------------------------------------------------
// Psi schedules and approximability witnesses
// ---------------------------------------------------------------------------

/// A non-increasing approximation speed `psi` with values in `(0, 1/2)` on
/// its domain `n >= min_n()`. Named families carry their natural domain
/// start (the first `n` where the value drops below 1/2); custom schedules
/// declare theirs explicitly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum PsiSchedule {
    /// `psi(n) = c / n^kappa`. For integer `kappa` the values are exact
    /// rationals (`c` is the exact dyadic value of the given float);
    /// otherwise the f64 value is used, made exact bit-for-bit.
    Power {
        #[serde(with = "rational_string")]
        c: Rational,
        kappa: f64,
    },
    /// `psi(n) = 1 / (n ln n)`, with domain start 3.
    LogReciprocal,
    /// Explicit values for `n = start, start+1, ...`.
    Custom {
        start: u64,
        #[serde(with = "rational_vec_string")]
        values: Vec<Rational>,
    },
}

impl PsiSchedule {
    pub fn power(c: f64, kappa: f64) -> Result<Self, NumthError> {
        if !(c.is_finite() && c > 0.0 && kappa.is_finite() && kappa > 0.0) {
            return Err(NumthError::NonFinite(if c.is_finite() { kappa } else { c }));
        }
        // Domain start is roughly (2c)^(1/kappa); refuse schedules whose
        // values only drop below 1/2 at astronomically large n.
        if (2.0 * c).powf(1.0 / kappa) > 1e12 {
            return Err(NumthError::PsiRange { n: u64::MAX });
        }
        Ok(PsiSchedule::Power { c: f64_to_rational(c)?, kappa })
    }

    pub fn log_reciprocal() -> Self {
        PsiSchedule::LogReciprocal
    }

    pub fn custom(start: u64, values: Vec<Rational>) -> Self {
        PsiSchedule::Custom { start, values }
    }

    /// First `n` in the schedule's domain.
    pub fn min_n(&self) -> u64 {
        match self {
            PsiSchedule::Power { c, kappa } => {
                // Values are decreasing in n; locate the first n with
                // psi(n) < 1/2, starting from the float estimate (2c)^(1/kappa).
                let half = rat(1, 2);
                let guess = (2.0 * rational_to_f64(c)).powf(1.0 / *kappa);
                let mut n = (guess as u64).saturating_sub(3).max(1);
                let below = |n: u64| {
                    power_value(c, *kappa, n).map(|v| v < half).unwrap_or(false)
                };
                while !below(n) {
                    n += 1;
                    assert!(n < (1 << 50), "power schedule never drops below 1/2");
                }
                while n > 1 && below(n - 1) {
                    n -= 1;
                }
                n
            }
            PsiSchedule::LogReciprocal => 3,
            PsiSchedule::Custom { start, .. } => *start,
        }
    }

    /// Largest representable `n`, if the schedule is finite.
    pub fn max_n(&self) -> Option<u64> {
        match self {
            PsiSchedule::Custom { start, values } => {
                Some(start + values.len() as u64 - 1)
            }
            _ => None,
        }
    }

    /// Exact value at `n`; errors below the domain start, past the end of a
    /// custom schedule, or if the value is outside `(0, 1/2)`.
    pub fn eval(&self, n: u64) -> Result<Rational, NumthError> {
        let min_n = self.min_n();
        if n < min_n {
            return Err(NumthError::PsiDomain { n, min_n });
        }
        let v = match self {
            PsiSchedule::Power { c, kappa } => {
                power_value(c, *kappa, n).ok_or(NumthError::NonFinite(*kappa))?
            }
            PsiSchedule::LogReciprocal => {
                let x = 1.0 / (n as f64 * (n as f64).ln());
                f64_to_rational(x)?
            }
            PsiSchedule::Custom { start, values } => {
                let idx = (n - start) as usize;
                match values.get(idx) {
                    Some(v) => v.clone(),
                    None => {
                        return Err(NumthError::PsiExhausted {
                            n,
                            max_n: start + values.len() as u64 - 1,
                        })
                    }
                }
            }
        };
        if v <= Rational::zero() || v >= rat(1, 2) {
            return Err(NumthError::PsiRange { n });
        }
        Ok(v)
    }
}

fn power_value(c: &Rational, kappa: f64, n: u64) -> Option<Rational> {
    if kappa.fract() == 0.0 && (1.0..=64.0).contains(&kappa) {
        let e = kappa as i32;
        Some(c / Rational::from_integer(Int::from(n)).pow(e))
    } else {
        let v = rational_to_f64(c) * (n as f64).powf(-kappa);
        f64_to_rational(v).ok()
    }
}

/// One certified solution of `|x - m/n| < psi(n)/n` with `gcd(m, n) = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsiWitness {
    pub n: u64,
    #[serde(with = "int_string")]
    pub m: Int,
}

/// Result of a witness search up to `n_max`. For continued-fraction targets
/// a denominator lands in `indeterminate` if the bracketing precision cap
/// was reached before the strict inequality could be decided (this does not
/// happen for the schedules shipped here, whose thresholds are rational).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ApproxWitnessReport {
    pub witnesses: Vec<PsiWitness>,
    pub indeterminate: Vec<u64>,
}

/// Search for all `n <= n_max` in the schedule's domain admitting a
/// primitive solution of `|x - m/n| < psi(n)/n`.
///
/// The search is exact. For `n` with `psi(n) < 1/(2n)` any solution
/// satisfies `|x - m/n| < 1/(2n^2)`, so `m/n` must be a convergent of `x`
/// and only convergent denominators are examined; for the finitely many
/// remaining `n` the unique candidate `m = round(nx)` is tested directly
/// (`psi < 1/2` makes the nearest integer the only possibility).
pub fn is_primitive_psi_approximable_upto(
    x: &RealInput,
    psi: &PsiSchedule,
    n_max: u64,
) -> Result<ApproxWitnessReport, NumthError> {
    if let Some(max_n) = psi.max_n() {
        if n_max > max_n {
            return Err(NumthError::PsiExhausted { n: n_max, max_n });
        }
    }
    let min_n = psi.min_n();
    let mut found: BTreeMap<u64, Int> = BTreeMap::new();
    let mut indeterminate: Vec<u64> = Vec::new();

    // Direct regime: n with psi(n) >= 1/(2n).
    for n in min_n..=n_max {
        let psi_n = psi.eval(n)?;
        let threshold = &psi_n / rat_i(n as i64); // psi(n)/n
        if psi_n < Rational::new(Int::one(), Int::from(2 * n)) {
            continue; // convergent regime handles it
        }
        match direct_candidate(x, n, &threshold) {
            DirectOutcome::Witness(m) => {
                found.insert(n, m);
            }
            DirectOutcome::None => {}
            DirectOutcome::Indeterminate => indeterminate.push(n),
        }
    }

    // Convergent regime.
    let n_max_int = Int::from(n_max);
    match x {
        RealInput::Rational(xr) => {
            let cf = continued_fraction(xr);
            for (p, q) in convergents(&cf) {
                let qn = match q.to_u64() {
                    Some(v) => v,
                    None => break,
                };
                if q > n_max_int {
                    break;
                }
                if qn < min_n {
                    continue;
                }
                let psi_q = psi.eval(qn)?;
                if psi_q >= Rational::new(Int::one(), Int::from(2 * qn)) {
                    continue; // already handled directly
                }
                let dist = (xr - Rational::new(p.clone(), q.clone())).abs();
                if dist < &psi_q / rat_i(qn as i64) {
                    found.insert(qn, p.clone());
                }
            }
        }
        RealInput::ContinuedFraction(cx) => {
            for (p, q) in cx.convergents_with_denominator_upto(&n_max_int) {
                let qn = match q.to_u64() {
                    Some(v) => v,
                    None => break,
                };
                if q > n_max_int || q.is_zero() {
                    continue;
                }
                if qn < min_n {
                    continue;
                }
                let psi_q = psi.eval(qn)?;
                if psi_q >= Rational::new(Int::one(), Int::from(2 * qn)) {
                    continue;
                }
                let target = Rational::new(p.clone(), q.clone());
                let threshold = &psi_q / rat_i(qn as i64);
                match decide_distance(cx, &target, &threshold) {
                    Some(true) => {
                        found.insert(qn, p.clone());
                    }
                    Some(false) => {}
                    None => indeterminate.push(qn),
                }
            }
        }
    }

    indeterminate.sort_unstable();
    indeterminate.dedup();
    Ok(ApproxWitnessReport {
        witnesses: found.into_iter().map(|(n, m)| PsiWitness { n, m }).collect(),
        indeterminate,
    })
}

enum DirectOutcome {
    Witness(Int),
    None,
    Indeterminate,
}

/// Test the unique candidate `m = round(nx)` against a strict threshold.
fn direct_candidate(x: &RealInput, n: u64, threshold: &Rational) -> DirectOutcome {
    let n_rat = rat_i(n as i64);
    match x {
        RealInput::Rational(xr) => {
            let m = nearest_integer(&(xr * &n_rat));
            if m.gcd(&Int::from(n)).is_one() {
                let dist = (xr - Rational::new(m.clone(), Int::from(n))).abs();
                if &dist < threshold {
                    return DirectOutcome::Witness(m);
                }
            }
            DirectOutcome::None
        }
        RealInput::ContinuedFraction(cx) => {
            // Determine round(nx) by refining the bracket until the floor of
            // n*x + 1/2 is unambiguous, then decide the strict inequality.
            for depth in [16usize, 32, 64, 128, 256] {
                let iv = cx.bracket_depth(depth).scale(&n_rat).shift(&rat(1, 2));
                let flo = iv.lo().floor();
                let fhi = iv.hi().floor();
                if flo != fhi {
                    continue;
                }
                let m = flo.to_integer();
                if !m.gcd(&Int::from(n)).is_one() {
                    return DirectOutcome::None;
                }
                let target = Rational::new(m.clone(), Int::from(n));
                return match decide_distance(cx, &target, threshold) {
                    Some(true) => DirectOutcome::Witness(m),
                    Some(false) => DirectOutcome::None,
                    None => DirectOutcome::Indeterminate,
                };
            }
            DirectOutcome::Indeterminate
        }
    }
}

/// Decide `|x - target| < threshold` for a continued-fraction `x`,
/// strictly, by interval refinement. Returns `None` only if the precision
/// cap is reached (possible only when the threshold exactly equals the
/// irrational distance, i.e. never for rational thresholds).
fn decide_distance(cx: &CfReal, target: &Rational, threshold: &Rational) -> Option<bool> {
    for depth in [16usize, 32, 64, 128, 256] {
        let iv = cx.bracket_depth(depth).abs_sub(target);
        if iv.strictly_below(threshold) {
            return Some(true);
        }
        if iv.lo() >= threshold {
            return Some(false);
        }
    }
    None
}

/// Slow reference search: scan every `n` in the domain and every candidate
/// numerator within distance 1 of `n*x` (any witness has `|nx - m| < 1/2`).
/// Used to cross-validate the convergent-based search on small ranges.
pub fn psi_witnesses_brute(
    x: &Rational,
    psi: &PsiSchedule,
    n_max: u64,
) -> Result<Vec<PsiWitness>, NumthError> {
    let mut out = Vec::new();
    for n in psi.min_n()..=n_max {
        let psi_n = psi.eval(n)?;
        let threshold = &psi_n / rat_i(n as i64);
        let center = (x * rat_i(n as i64)).floor().to_integer();
        for dm in -2i64..=2 {
            let m = &center + Int::from(dm);
            if !m.gcd(&Int::from(n)).is_one() {
                continue;
            }
            let dist = (x - Rational::new(m.clone(), Int::from(n))).abs();
            if dist < threshold {
                out.push(PsiWitness { n, m });
                break;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parse_and_format_round_trip() {
        for s in ["3/4", "-7/2", "5", "0", "-12", "22/7"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(format_rational(&r), s);
        }
        // reduction and sign normalization
        assert_eq!(format_rational(&parse_rational("4/8").unwrap()), "1/2");
        assert_eq!(format_rational(&parse_rational("3/-6").unwrap()), "-1/2");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/b").is_err());
        assert!(parse_rational("1.5").is_err());
    }

    #[test]
    fn rational_to_f64_is_accurate() {
        let cases = [rat(1, 3), rat(-355, 113), rat(1, 1_000_000_007)];
        for r in cases {
            let expect = r.numer().to_f64().unwrap() / r.denom().to_f64().unwrap();
            let got = rational_to_f64(&r);
            assert!((got - expect).abs() <= expect.abs() * 1e-15);
        }
        // magnitudes far outside f64 exponent range
        let huge = Rational::new(Int::from(1) << 3000, Int::one());
        assert_eq!(rational_to_f64(&huge), f64::INFINITY);
        let tiny = Rational::new(Int::one(), Int::from(1) << 3000);
        assert_eq!(rational_to_f64(&tiny), 0.0);
        // round trip through the exact dyadic conversion
        let x = 0.1f64;
        assert_eq!(rational_to_f64(&f64_to_rational(x).unwrap()), x);
    }

    #[test]
    fn nearest_integer_rounds_half_up() {
        assert_eq!(nearest_integer(&rat(5, 2)), int(3));
        assert_eq!(nearest_integer(&rat(-5, 2)), int(-2));
        assert_eq!(nearest_integer(&rat(7, 3)), int(2));
    }

    #[test]
    fn bezout_and_inverse() {
        let (g, s, t) = bezout(&int(240), &int(46));
        assert_eq!(g, int(2));
        assert_eq!(s * 240 + t * 46, int(2));
        assert_eq!(mod_inverse(&int(3), &int(7)), Some(int(5)));
        assert_eq!(mod_inverse(&int(-3), &int(7)), Some(int(2)));
        assert_eq!(mod_inverse(&int(2), &int(4)), None);
        assert_eq!(mod_inverse(&int(5), &int(1)), Some(int(0)));
    }

    #[test]
    fn multiplicative_functions() {
        assert_eq!(
            (1..=12).map(euler_phi).collect::<Vec<_>>(),
            vec![1, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4]
        );
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(
            (1..=10).map(moebius).collect::<Vec<_>>(),
            vec![1, -1, -1, 0, -1, 1, -1, 0, 0, 1]
        );
        assert_eq!(sigma1(16), 31);
        // phi * 1 = id as a divisor sum, small smoke (full range in the
        // property suite)
        for n in 1..=60u64 {
            let s: u64 = divisors(n).into_iter().map(euler_phi).sum();
            assert_eq!(s, n);
        }
    }

    #[test]
    fn continued_fraction_canonical() {
        let cf = continued_fraction(&rat(355, 113));
        assert_eq!(cf, vec![int(3), int(7), int(16)]);
        assert_eq!(continued_fraction(&rat(1, 2)), vec![int(0), int(2)]);
        assert_eq!(continued_fraction(&rat_i(4)), vec![int(4)]);
        assert_eq!(continued_fraction(&rat(-1, 2)), vec![int(-1), int(2)]);
        // convergents reconstruct the number
        let cv = convergents(&cf);
        assert_eq!(cv.last().unwrap(), &(int(355), int(113)));
        assert_eq!(cv[0], (int(3), int(1)));
        assert_eq!(cv[1], (int(22), int(7)));
    }

    #[test]
    fn cf_real_brackets_golden_ratio() {
        let phi = CfReal::new(CfConfig { a0: 1, prefix: vec![], period: vec![1] }).unwrap();
        let iv = phi.bracket(&rat(1, 1_000_000));
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(rational_to_f64(iv.lo()) < golden && golden < rational_to_f64(iv.hi()));
        assert!(iv.width() < rat(1, 1_000_000));
        // denominators are Fibonacci numbers
        let cs = phi.convergents_upto(6);
        let dens: Vec<Int> = cs.iter().map(|(_, q)| q.clone()).collect();
        assert_eq!(dens, vec![int(1), int(1), int(2), int(3), int(5), int(8), int(13)]);
    }

    #[test]
    fn psi_schedule_domains_and_values() {
        let p = PsiSchedule::power(0.25, 1.0).unwrap();
        assert_eq!(p.min_n(), 1);
        assert_eq!(p.eval(4).unwrap(), rat(1, 16));
        let lr = PsiSchedule::log_reciprocal();
        assert_eq!(lr.min_n(), 3);
        assert!(lr.eval(2).is_err());
        let v3 = lr.eval(3).unwrap();
        assert!((rational_to_f64(&v3) - 1.0 / (3.0 * 3f64.ln())).abs() < 1e-15);
        // c/n: domain starts where the value drops below 1/2
        let half = PsiSchedule::power(1.0, 1.0).unwrap();
        assert_eq!(half.min_n(), 3); // 1/1, 1/2 are not < 1/2; 1/3 is
        let c = PsiSchedule::custom(5, vec![rat(1, 3), rat(1, 4)]);
        assert_eq!(c.min_n(), 5);
        assert_eq!(c.max_n(), Some(6));
        assert!(c.eval(7).is_err());
        assert!(PsiSchedule::custom(2, vec![rat(2, 3)]).eval(2).is_err());
    }

    #[test]
    fn witnesses_for_one_half() {
        // x = 1/2, psi(n) = 1/(4n): the only witness up to 10 is (2, 1).
        let x = RealInput::Rational(rat(1, 2));
        let psi = PsiSchedule::power(0.25, 1.0).unwrap();
        let rep = is_primitive_psi_approximable_upto(&x, &psi, 10).unwrap();
        assert!(rep.indeterminate.is_empty());
        assert_eq!(rep.witnesses, vec![PsiWitness { n: 2, m: int(1) }]);
    }

    #[test]
    fn witnesses_for_golden_ratio_are_fibonacci() {
        let phi = CfReal::new(CfConfig { a0: 1, prefix: vec![], period: vec![1] }).unwrap();
        let x = RealInput::ContinuedFraction(phi);
        let psi = PsiSchedule::power(0.5, 1.0).unwrap();
        let rep = is_primitive_psi_approximable_upto(&x, &psi, 100).unwrap();
        assert!(rep.indeterminate.is_empty());
        let ns: Vec<u64> = rep.witnesses.iter().map(|w| w.n).collect();
        assert_eq!(ns, vec![2, 3, 5, 8, 13, 21, 34, 55, 89]);
        // numerators are the next Fibonacci numbers
        assert_eq!(rep.witnesses[0].m, int(3));
        assert_eq!(rep.witnesses[1].m, int(5));
    }

    #[test]
    fn hybrid_search_matches_brute_force() {
        let xs = [rat(1, 3), rat(2, 7), rat(355, 113), rat(-3, 8)];
        let psis = [
            PsiSchedule::power(0.25, 1.0).unwrap(),
            PsiSchedule::power(1.0, 2.0).unwrap(),
            PsiSchedule::log_reciprocal(),
        ];
        for x in &xs {
            for psi in &psis {
                let fast = is_primitive_psi_approximable_upto(
                    &RealInput::Rational(x.clone()),
                    psi,
                    120,
                )
                .unwrap();
                let brute = psi_witnesses_brute(x, psi, 120).unwrap();
                assert!(fast.indeterminate.is_empty());
                assert_eq!(fast.witnesses, brute, "x={x} psi={psi:?}");
            }
        }
    }

    #[test]
    fn serde_round_trips() {
        let w = PsiWitness { n: 9, m: int(-4) };
        let json = serde_json::to_string(&w).unwrap();
        assert_eq!(json, r#"{"n":9,"m":"-4"}"#);
        let back: PsiWitness = serde_json::from_str(&json).unwrap();
        assert_eq!(back, w);
        let cf = CfConfig { a0: 0, prefix: vec![9, 30], period: vec![2, 2] };
        let json = serde_json::to_string(&cf).unwrap();
        let back: CfConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cf);
    }
}
