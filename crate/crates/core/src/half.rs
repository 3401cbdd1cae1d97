//! Half-integer arithmetic stored as doubled integers.
//!
//! Angular-momentum labels live on the lattice 0, 1/2, 1, 3/2, ... with
//! projections stepping in integers. Storing `2j` as an `i32` keeps every
//! label exact and makes parity checks (`j + m` integral, etc.) cheap.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

/// A half-integer `j`, stored as the exact integer `2j`.
///
/// Construct with [`HalfInt::from_twice`] (doubled value) or
/// [`HalfInt::from_int`] (whole value). Display and parsing use the
/// conventional `3/2` form for odd doubles.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const HALF: HalfInt = HalfInt { twice: 1 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };

    /// Builds `j` from the doubled value `2j`.
    pub const fn from_twice(twice: i32) -> Self {
        HalfInt { twice }
    }

    /// Builds a whole integer `n` (i.e. `2j = 2n`).
    pub const fn from_int(n: i32) -> Self {
        HalfInt { twice: 2 * n }
    }

    /// The doubled value `2j`.
    pub const fn twice(self) -> i32 {
        self.twice
    }

    /// True when `j` is a whole integer.
    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// True when `j` is an odd multiple of 1/2.
    pub const fn is_half_odd(self) -> bool {
        self.twice % 2 != 0
    }

    /// The whole integer value, if `j` is integral.
    pub const fn as_int(self) -> Option<i32> {
        if self.twice % 2 == 0 {
            Some(self.twice / 2)
        } else {
            None
        }
    }

    /// `j` as a float (exact: doubles are small).
    pub fn as_f64(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    pub const fn abs(self) -> Self {
        HalfInt {
            twice: self.twice.abs(),
        }
    }

    pub const fn is_negative(self) -> bool {
        self.twice < 0
    }

    /// True when `m` is a valid projection of `j`: `|m| <= j` and `j - m`
    /// integral.
    pub fn is_projection_of(self, j: HalfInt) -> bool {
        self.abs() <= j && (j.twice - self.twice) % 2 == 0
    }

    /// `(-1)^(j+k)` for half-integers whose sum is integral.
    ///
    /// Panics if `j + k` is not a whole integer (the phase would be
    /// imaginary, which never occurs for the signs used here).
    pub fn phase_with(self, other: HalfInt) -> i32 {
        let s = self.twice + other.twice;
        assert!(
            s % 2 == 0,
            "phase exponent {}/2 + {}/2 is not an integer",
            self.twice,
            other.twice
        );
        if (s / 2) % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// `(-1)^j` for integral `j`; panics on half-odd input.
    pub fn phase(self) -> i32 {
        self.phase_with(HalfInt::ZERO)
    }

    /// Iterates `-j, -j+1, ..., +j` (ascending).
    pub fn projections(self) -> impl DoubleEndedIterator<Item = HalfInt> {
        let twice = self.twice;
        let count = (twice + 1).max(0); // 2j+1 projections
        (0..count).map(move |k| HalfInt::from_twice(2 * k - twice))
    }

    /// Iterates the triangle range `|a-b| ..= a+b` in unit steps.
    pub fn couplings(a: HalfInt, b: HalfInt) -> impl DoubleEndedIterator<Item = HalfInt> {
        let lo = (a.twice - b.twice).abs();
        let hi = a.twice + b.twice;
        let count = ((hi - lo) / 2 + 1).max(0);
        (0..count).map(move |k| HalfInt::from_twice(lo + 2 * k))
    }
}

/// Triangle condition: `|a-b| <= c <= a+b` with `a+b+c` integral.
pub fn triangle_ok(a: HalfInt, b: HalfInt, c: HalfInt) -> bool {
    let (ta, tb, tc) = (a.twice(), b.twice(), c.twice());
    ta >= 0
        && tb >= 0
        && tc >= 0
        && tc >= (ta - tb).abs()
        && tc <= ta + tb
        && (ta + tb + tc) % 2 == 0
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice + rhs.twice)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice - rhs.twice)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt::from_twice(-self.twice)
    }
}

impl AddAssign for HalfInt {
    fn add_assign(&mut self, rhs: HalfInt) {
        self.twice += rhs.twice;
    }
}

impl SubAssign for HalfInt {
    fn sub_assign(&mut self, rhs: HalfInt) {
        self.twice -= rhs.twice;
    }
}

impl Mul<i32> for HalfInt {
    type Output = HalfInt;
    fn mul(self, rhs: i32) -> HalfInt {
        HalfInt::from_twice(self.twice * rhs)
    }
}

impl From<i32> for HalfInt {
    fn from(n: i32) -> Self {
        HalfInt::from_int(n)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl fmt::Debug for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parses `"2"`, `"-1"`, or `"3/2"` (only denominator 2 is accepted).
impl FromStr for HalfInt {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            if den.trim() != "2" {
                return Err(format!("half-integer denominator must be 2, got `{s}`"));
            }
            let n: i32 = num
                .trim()
                .parse()
                .map_err(|e| format!("bad half-integer `{s}`: {e}"))?;
            Ok(HalfInt::from_twice(n))
        } else {
            let n: i32 = s.parse().map_err(|e| format!("bad integer `{s}`: {e}"))?;
            Ok(HalfInt::from_int(n))
        }
    }
}
