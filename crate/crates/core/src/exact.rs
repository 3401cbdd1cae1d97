//! Exact arithmetic for quantities of the form `c·√r` with `c, r` rational.
//!
//! Coupling coefficients are square roots of rationals times rational sums,
//! so a single signed radical ([`SqrtRational`]) is closed under product and
//! ratio. Operator-identity checks additionally need exact *sums* of
//! distinct radicals; [`SqrtLinear`] holds a rational combination of square
//! roots of squarefree integers, which is closed under ring operations, and
//! [`ExactComplex`] pairs two of them as real and imaginary parts.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A signed square root of a rational: the value `sign·√(p/q)`.
///
/// Internally stores the *signed square* `sign·p/q`, so products and ratios
/// are single rational operations and equality is exact. The type is closed
/// under `*` and `/` but **not** under `+`; use [`SqrtLinear`] for sums.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SqrtRational {
    /// `sign · radicand`; the represented value is `sign·√|signed_sq|`.
    signed_sq: BigRational,
}

impl SqrtRational {
    /// The value `coeff·√radicand`. The radicand must be non-negative.
    pub fn new(coeff: BigRational, radicand: BigRational) -> Self {
        assert!(
            !radicand.is_negative(),
            "radicand must be non-negative, got {radicand}"
        );
        let sq = &coeff * &coeff * radicand;
        let signed_sq = if coeff.is_negative() { -sq } else { sq };
        SqrtRational { signed_sq }
    }

    /// The exact rational value `r` (radicand `r²`).
    pub fn from_rational(r: BigRational) -> Self {
        let sq = &r * &r;
        let signed_sq = if r.is_negative() { -sq } else { sq };
        SqrtRational { signed_sq }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `√(p/q)` for non-negative integers `p, q`.
    pub fn sqrt_of(p: i64, q: i64) -> Self {
        Self::new(
            BigRational::one(),
            BigRational::new(BigInt::from(p), BigInt::from(q)),
        )
    }

    pub fn zero() -> Self {
        SqrtRational {
            signed_sq: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        SqrtRational {
            signed_sq: BigRational::one(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.signed_sq.is_zero()
    }

    /// -1, 0, or +1.
    pub fn sign(&self) -> i32 {
        if self.signed_sq.is_zero() {
            0
        } else if self.signed_sq.is_negative() {
            -1
        } else {
            1
        }
    }

    /// The signed square `sign·(value)²`; exact and canonical.
    pub fn signed_square(&self) -> &BigRational {
        &self.signed_sq
    }

    /// The radicand `(value)² ≥ 0` in lowest terms.
    pub fn square(&self) -> BigRational {
        self.signed_sq.abs()
    }

    pub fn abs(&self) -> Self {
        SqrtRational {
            signed_sq: self.signed_sq.abs(),
        }
    }

    /// Exact reciprocal; panics on zero.
    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "division by zero SqrtRational");
        SqrtRational {
            signed_sq: self.signed_sq.recip(),
        }
    }

    /// Adds a value with the *same* radicand class; returns `None` when the
    /// two radicals are incommensurable (their ratio is not rational).
    pub fn try_add(&self, other: &Self) -> Option<Self> {
        if self.is_zero() {
            return Some(other.clone());
        }
        if other.is_zero() {
            return Some(self.clone());
        }
        // self = s1·c1·√r, other = s2·c2·√r  ⟺  |sq1|/|sq2| = (c1/c2)².
        let ratio = self.signed_sq.abs() / other.signed_sq.abs();
        let c = rational_sqrt(&ratio)?;
        // self + other = (s1·c + s2)·other_abs, with other_abs = c2√r > 0.
        let s1 = BigRational::from_integer(BigInt::from(self.sign()));
        let s2 = BigRational::from_integer(BigInt::from(other.sign()));
        let coeff = s1 * c + s2;
        Some(SqrtRational::new(coeff, other.signed_sq.abs()))
    }

    pub fn to_f64(&self) -> f64 {
        let num = self.signed_sq.numer().abs().to_f64().unwrap_or(f64::MAX);
        let den = self.signed_sq.denom().abs().to_f64().unwrap_or(f64::MAX);
        let mag = (num / den).sqrt();
        match self.sign() {
            0 => 0.0,
            1 => mag,
            _ => -mag,
        }
    }
}

impl Mul for &SqrtRational {
    type Output = SqrtRational;
    fn mul(self, rhs: &SqrtRational) -> SqrtRational {
        let mag = self.signed_sq.abs() * rhs.signed_sq.abs();
        let signed_sq = if self.sign() * rhs.sign() < 0 { -mag } else { mag };
        SqrtRational { signed_sq }
    }
}

impl Mul for SqrtRational {
    type Output = SqrtRational;
    fn mul(self, rhs: SqrtRational) -> SqrtRational {
        (&self) * (&rhs)
    }
}

impl Div for &SqrtRational {
    type Output = SqrtRational;
    fn div(self, rhs: &SqrtRational) -> SqrtRational {
        self * &rhs.recip()
    }
}

impl Neg for SqrtRational {
    type Output = SqrtRational;
    fn neg(self) -> SqrtRational {
        SqrtRational {
            signed_sq: -self.signed_sq,
        }
    }
}

impl fmt::Display for SqrtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let sgn = if self.sign() < 0 { "-" } else { "" };
        let sq = self.signed_sq.abs();
        if let Some(r) = rational_sqrt(&sq) {
            write!(f, "{sgn}{r}")
        } else {
            write!(f, "{sgn}sqrt({sq})")
        }
    }
}

impl fmt::Debug for SqrtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Exact square root of a non-negative rational, if it is rational.
pub fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let num = exact_uint_sqrt(&r.numer().magnitude().clone())?;
    let den = exact_uint_sqrt(&r.denom().magnitude().clone())?;
    Some(BigRational::new(BigInt::from(num), BigInt::from(den)))
}

fn exact_uint_sqrt(n: &BigUint) -> Option<BigUint> {
    let s = n.sqrt();
    if &(&s * &s) == n {
        Some(s)
    } else {
        None
    }
}

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        const BOUND: usize = 100_000;
        let mut sieve = vec![true; BOUND + 1];
        let mut primes = Vec::new();
        for p in 2..=BOUND {
            if sieve[p] {
                primes.push(p as u64);
                let mut q = p * p;
                while q <= BOUND {
                    sieve[q] = false;
                    q += p;
                }
            }
        }
        primes
    })
}

/// Splits `n = f²·s` with `s` squarefree (up to the trial-division bound;
/// large cofactors are checked for being perfect squares and otherwise kept
/// whole, which is exact for all magnitudes arising from the coupling
/// tables used here).
fn squarefree_split(n: &BigUint) -> (BigUint, BigUint) {
    let mut f = BigUint::one();
    let mut s = BigUint::one();
    let mut rest = n.clone();
    if rest.is_zero() {
        return (BigUint::zero(), BigUint::zero());
    }
    for &p in small_primes() {
        let pb = BigUint::from(p);
        if &(&pb * &pb) > &rest {
            break;
        }
        let mut count = 0u32;
        while (&rest % &pb).is_zero() {
            rest /= &pb;
            count += 1;
        }
        if count > 0 {
            f *= pb.pow(count / 2);
            if count % 2 == 1 {
                s *= BigUint::from(p);
            }
        }
    }
    if !rest.is_one() {
        if let Some(r) = exact_uint_sqrt(&rest) {
            f *= r;
        } else {
            s *= rest;
        }
    }
    (f, s)
}

/// An exact rational linear combination of square roots of distinct
/// squarefree positive integers: `Σ cᵢ·√sᵢ`.
///
/// Keys are the squarefree parts (key 1 is the rational part). Closed under
/// `+`, `-`, `*`; equality and zero tests are exact. Products of canonical
/// keys never need factorisation: for squarefree `s₁, s₂`,
/// `s₁s₂ = g²·(s₁/g)(s₂/g)` with `g = gcd(s₁,s₂)` and the cofactor product
/// squarefree.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct SqrtLinear {
    terms: BTreeMap<BigUint, BigRational>,
}

impl SqrtLinear {
    pub fn zero() -> Self {
        SqrtLinear::default()
    }

    pub fn one() -> Self {
        SqrtLinear::from_rational(BigRational::one())
    }

    pub fn from_rational(c: BigRational) -> Self {
        let mut t = SqrtLinear::zero();
        t.push(BigUint::one(), c);
        t
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// The term `c·√s` for a non-negative integer `s` (not necessarily
    /// squarefree; the square part is folded into the coefficient).
    pub fn radical(c: BigRational, s: u64) -> Self {
        let (f, sf) = squarefree_split(&BigUint::from(s));
        let mut t = SqrtLinear::zero();
        t.push(sf, c * BigRational::from_integer(BigInt::from(f)));
        t
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exact rational value, if the combination is purely rational.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (s, c) = self.terms.iter().next().unwrap();
                if s.is_one() {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(s, c)| {
                let root = s.to_f64().unwrap_or(f64::MAX).sqrt();
                let num = c.numer().to_f64().unwrap_or(0.0);
                let den = c.denom().to_f64().unwrap_or(1.0);
                (num / den) * root
            })
            .sum()
    }

    fn push(&mut self, key: BigUint, coeff: BigRational) {
        if coeff.is_zero() || key.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + coeff;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return SqrtLinear::zero();
        }
        let mut out = SqrtLinear::zero();
        for (s, coeff) in &self.terms {
            out.push(s.clone(), coeff * c);
        }
        out
    }
}

impl From<&SqrtRational> for SqrtLinear {
    fn from(v: &SqrtRational) -> Self {
        if v.is_zero() {
            return SqrtLinear::zero();
        }
        // sign·√(p/q) = sign·√(p·q)/q
        let sq = v.square();
        let p = sq.numer().magnitude().clone();
        let q = sq.denom().magnitude().clone();
        let (f, s) = squarefree_split(&(&p * &q));
        let mut coeff = BigRational::new(BigInt::from(f), BigInt::from(q));
        if v.sign() < 0 {
            coeff = -coeff;
        }
        let mut t = SqrtLinear::zero();
        t.push(s, coeff);
        t
    }
}

impl From<SqrtRational> for SqrtLinear {
    fn from(v: SqrtRational) -> Self {
        SqrtLinear::from(&v)
    }
}

impl Add for &SqrtLinear {
    type Output = SqrtLinear;
    fn add(self, rhs: &SqrtLinear) -> SqrtLinear {
        let mut out = self.clone();
        for (s, c) in &rhs.terms {
            out.push(s.clone(), c.clone());
        }
        out
    }
}

impl Sub for &SqrtLinear {
    type Output = SqrtLinear;
    fn sub(self, rhs: &SqrtLinear) -> SqrtLinear {
        let mut out = self.clone();
        for (s, c) in &rhs.terms {
            out.push(s.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &SqrtLinear {
    type Output = SqrtLinear;
    fn neg(self) -> SqrtLinear {
        let mut out = SqrtLinear::zero();
        for (s, c) in &self.terms {
            out.push(s.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &SqrtLinear {
    type Output = SqrtLinear;
    fn mul(self, rhs: &SqrtLinear) -> SqrtLinear {
        let mut out = SqrtLinear::zero();
        for (s1, c1) in &self.terms {
            for (s2, c2) in &rhs.terms {
                let g = s1.gcd(s2);
                let key = (s1 / &g) * (s2 / &g);
                let coeff = c1 * c2 * BigRational::from_integer(BigInt::from(g));
                out.push(key, coeff);
            }
        }
        out
    }
}

impl AddAssign<&SqrtLinear> for SqrtLinear {
    fn add_assign(&mut self, rhs: &SqrtLinear) {
        for (s, c) in &rhs.terms {
            self.push(s.clone(), c.clone());
        }
    }
}

impl fmt::Display for SqrtLinear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (s, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if s.is_one() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}*sqrt({s})")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for SqrtLinear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A complex number with exact [`SqrtLinear`] real and imaginary parts.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct ExactComplex {
    pub re: SqrtLinear,
    pub im: SqrtLinear,
}

impl ExactComplex {
    pub fn zero() -> Self {
        ExactComplex::default()
    }

    pub fn real(re: SqrtLinear) -> Self {
        ExactComplex {
            re,
            im: SqrtLinear::zero(),
        }
    }

    pub fn imaginary(im: SqrtLinear) -> Self {
        ExactComplex {
            re: SqrtLinear::zero(),
            im,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        ExactComplex {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl Add for &ExactComplex {
    type Output = ExactComplex;
    fn add(self, rhs: &ExactComplex) -> ExactComplex {
        ExactComplex {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for &ExactComplex {
    type Output = ExactComplex;
    fn sub(self, rhs: &ExactComplex) -> ExactComplex {
        ExactComplex {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul for &ExactComplex {
    type Output = ExactComplex;
    fn mul(self, rhs: &ExactComplex) -> ExactComplex {
        ExactComplex {
            re: &(&self.re * &rhs.re) - &(&self.im * &rhs.im),
            im: &(&self.re * &rhs.im) + &(&self.im * &rhs.re),
        }
    }
}

impl Neg for &ExactComplex {
    type Output = ExactComplex;
    fn neg(self) -> ExactComplex {
        ExactComplex {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

impl fmt::Debug for ExactComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}) + i({:?})", self.re, self.im)
    }
}
