//! Exact coupling coefficients: 3j and 6j symbols, Clebsch–Gordan
//! coefficients, spherical generator matrices, and the index-raising phase.
//!
//! All values are [`SqrtRational`]: a sign times the square root of a
//! rational, computed from single-sum factorial formulas in arbitrary
//! precision. Results are memoised behind a mutex, so concurrent callers
//! share one table transparently.

use std::collections::HashMap;
use std::sync::Mutex;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::exact::SqrtRational;
use crate::half::{triangle_ok, HalfInt};

fn factorial_table() -> &'static Mutex<Vec<BigUint>> {
    static TABLE: OnceLock<Mutex<Vec<BigUint>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(vec![BigUint::one()]))
}

/// `n!` as an arbitrary-precision integer, cached for all smaller `n`.
pub fn factorial(n: i64) -> BigUint {
    assert!(n >= 0, "factorial of negative integer {n}");
    let mut table = factorial_table().lock().unwrap();
    while (table.len() as i64) <= n {
        let next = table.last().unwrap() * BigUint::from(table.len());
        table.push(next);
    }
    table[n as usize].clone()
}

type SymbolKey = [i32; 6];

fn cache_3j() -> &'static Mutex<HashMap<SymbolKey, SqrtRational>> {
    static CACHE: OnceLock<Mutex<HashMap<SymbolKey, SqrtRational>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cache_6j() -> &'static Mutex<HashMap<SymbolKey, SqrtRational>> {
    static CACHE: OnceLock<Mutex<HashMap<SymbolKey, SqrtRational>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The Wigner 3j symbol
///
/// ```text
/// ⎛ j1 j2 j3 ⎞
/// ⎝ m1 m2 m3 ⎠
/// ```
///
/// in the standard (Condon–Shortley) convention. Returns exact zero when any
/// selection rule fails: triangle violation, `m1+m2+m3 ≠ 0`, `|mᵢ| > jᵢ`, or
/// a projection off the parity lattice of its `jᵢ`.
pub fn wigner_3j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    m1: HalfInt,
    m2: HalfInt,
    m3: HalfInt,
) -> SqrtRational {
    if !triangle_ok(j1, j2, j3)
        || (m1 + m2 + m3) != HalfInt::ZERO
        || !m1.is_projection_of(j1)
        || !m2.is_projection_of(j2)
        || !m3.is_projection_of(j3)
    {
        return SqrtRational::zero();
    }
    let key = [
        j1.twice(),
        j2.twice(),
        j3.twice(),
        m1.twice(),
        m2.twice(),
        m3.twice(),
    ];
    if let Some(v) = cache_3j().lock().unwrap().get(&key) {
        return v.clone();
    }
    let v = compute_3j(j1, j2, j3, m1, m2, m3);
    cache_3j().lock().unwrap().insert(key, v.clone());
    v
}

fn compute_3j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    m1: HalfInt,
    m2: HalfInt,
    m3: HalfInt,
) -> SqrtRational {
    // All of the following combinations are whole integers once the
    // selection rules hold.
    let a1 = ((j1 + j2 - j3).twice() / 2) as i64;
    let a2 = ((j1 - j2 + j3).twice() / 2) as i64;
    let a3 = (((-j1) + j2 + j3).twice() / 2) as i64;
    let per = ((j1 + j2 + j3).twice() / 2) as i64;
    let b1p = ((j1 + m1).twice() / 2) as i64;
    let b1m = ((j1 - m1).twice() / 2) as i64;
    let b2p = ((j2 + m2).twice() / 2) as i64;
    let b2m = ((j2 - m2).twice() / 2) as i64;
    let b3p = ((j3 + m3).twice() / 2) as i64;
    let b3m = ((j3 - m3).twice() / 2) as i64;

    let radicand_num = factorial(a1) * factorial(a2) * factorial(a3)
        * factorial(b1p)
        * factorial(b1m)
        * factorial(b2p)
        * factorial(b2m)
        * factorial(b3p)
        * factorial(b3m);
    let radicand = BigRational::new(
        BigInt::from(radicand_num),
        BigInt::from(factorial(per + 1)),
    );

    let c1 = ((j2 - j3 - m1).twice() / 2) as i64;
    let c2 = ((j1 - j3 + m2).twice() / 2) as i64;
    let k_min = 0.max(c1).max(c2);
    let k_max = a1.min(b1m).min(b2p);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let den = factorial(k)
            * factorial(a1 - k)
            * factorial(b1m - k)
            * factorial(b2p - k)
            * factorial(k - c1)
            * factorial(k - c2);
        let term = BigRational::new(BigInt::one(), BigInt::from(den));
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }

    // Phase (-1)^(j1 - j2 - m3); the exponent is a whole integer here.
    let phase_exp = (j1 - j2 - m3).twice() / 2;
    if phase_exp.rem_euclid(2) == 1 {
        sum = -sum;
    }
    SqrtRational::new(sum, radicand)
}

/// The Wigner 6j symbol
///
/// ```text
/// ⎧ j1 j2 j3 ⎫
/// ⎩ j4 j5 j6 ⎭
/// ```
///
/// Exact zero when any of the four triads `(j1,j2,j3)`, `(j1,j5,j6)`,
/// `(j4,j2,j6)`, `(j4,j5,j3)` violates the triangle rule.
pub fn wigner_6j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    j4: HalfInt,
    j5: HalfInt,
    j6: HalfInt,
) -> SqrtRational {
    if !triangle_ok(j1, j2, j3)
        || !triangle_ok(j1, j5, j6)
        || !triangle_ok(j4, j2, j6)
        || !triangle_ok(j4, j5, j3)
    {
        return SqrtRational::zero();
    }
    let key = [
        j1.twice(),
        j2.twice(),
        j3.twice(),
        j4.twice(),
        j5.twice(),
        j6.twice(),
    ];
    if let Some(v) = cache_6j().lock().unwrap().get(&key) {
        return v.clone();
    }
    let v = compute_6j(j1, j2, j3, j4, j5, j6);
    cache_6j().lock().unwrap().insert(key, v.clone());
    v
}

/// `Δ(abc) = (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!` — the triangle weight.
fn triangle_weight(a: HalfInt, b: HalfInt, c: HalfInt) -> BigRational {
    let p1 = ((a + b - c).twice() / 2) as i64;
    let p2 = ((a - b + c).twice() / 2) as i64;
    let p3 = (((-a) + b + c).twice() / 2) as i64;
    let q = ((a + b + c).twice() / 2) as i64;
    BigRational::new(
        BigInt::from(factorial(p1) * factorial(p2) * factorial(p3)),
        BigInt::from(factorial(q + 1)),
    )
}

fn compute_6j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    j4: HalfInt,
    j5: HalfInt,
    j6: HalfInt,
) -> SqrtRational {
    let radicand = triangle_weight(j1, j2, j3)
        * triangle_weight(j1, j5, j6)
        * triangle_weight(j4, j2, j6)
        * triangle_weight(j4, j5, j3);

    let t1 = ((j1 + j2 + j3).twice() / 2) as i64;
    let t2 = ((j1 + j5 + j6).twice() / 2) as i64;
    let t3 = ((j4 + j2 + j6).twice() / 2) as i64;
    let t4 = ((j4 + j5 + j3).twice() / 2) as i64;
    let q1 = ((j1 + j2 + j4 + j5).twice() / 2) as i64;
    let q2 = ((j2 + j3 + j5 + j6).twice() / 2) as i64;
    let q3 = ((j3 + j1 + j6 + j4).twice() / 2) as i64;

    let k_min = t1.max(t2).max(t3).max(t4);
    let k_max = q1.min(q2).min(q3);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let den = factorial(k - t1)
            * factorial(k - t2)
            * factorial(k - t3)
            * factorial(k - t4)
            * factorial(q1 - k)
            * factorial(q2 - k)
            * factorial(q3 - k);
        let term = BigRational::new(
            BigInt::from(factorial(k + 1)),
            BigInt::from(den),
        );
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    SqrtRational::new(sum, radicand)
}

/// The Clebsch–Gordan coefficient `⟨j1 m1, j2 m2 | j m⟩` in the
/// Condon–Shortley convention (all coefficients real, highest-weight
/// cross coefficients positive).
pub fn clebsch_gordan(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> SqrtRational {
    if m1 + m2 != m {
        return SqrtRational::zero();
    }
    let three = wigner_3j(j1, j2, j, m1, m2, -m);
    if three.is_zero() {
        return three;
    }
    let scale = SqrtRational::sqrt_of(i64::from(j.twice()) + 1, 1);
    let phase_exp = (j1 - j2 + m).twice() / 2;
    let v = &three * &scale;
    if phase_exp.rem_euclid(2) == 1 {
        -v
    } else {
        v
    }
}

/// Raises/lowers a spherical index: maps `(j, m)` to `(j, -m)` with the
/// metric phase `(-1)^(j-m)`. Applying it twice gives `(-1)^(2j)`.
pub fn metric_raise(j: HalfInt, m: HalfInt) -> (HalfInt, i32) {
    (-m, j.phase_with(-m))
}

fn cache_cg_f64() -> &'static std::sync::RwLock<HashMap<SymbolKey, f64>> {
    static CACHE: OnceLock<std::sync::RwLock<HashMap<SymbolKey, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| std::sync::RwLock::new(HashMap::new()))
}

/// Float value of `⟨j1 m1, j2 m2 | j m⟩`, memoised separately from the
/// exact table so hot evaluation loops avoid big-integer conversions.
pub fn clebsch_gordan_f64(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> f64 {
    let key = [
        j1.twice(),
        m1.twice(),
        j2.twice(),
        m2.twice(),
        j.twice(),
        m.twice(),
    ];
    if let Some(v) = cache_cg_f64().read().unwrap().get(&key) {
        return *v;
    }
    let v = clebsch_gordan(j1, m1, j2, m2, j, m).to_f64();
    cache_cg_f64().write().unwrap().insert(key, v);
    v
}

/// A spherical angular-momentum generator on the `2l+1`-dimensional carrier
/// space, with exact entries.
///
/// Components are labelled `a ∈ {+1, 0, -1}`:
/// `J₀ = J_z`, `J_{+1} = -(J_x + iJ_y)/√2`, `J_{-1} = (J_x - iJ_y)/√2`.
/// With this labelling all matrix entries are *real* exact radicals, the
/// adjoint is `J_a† = (-1)^a J_{-a}`, and the commutators close as
/// `[J_a, J_b] = -√2·⟨1a,1b|1,a+b⟩·J_{a+b}`.
///
/// Rows and columns are ordered by descending projection `m = l, l-1, …, -l`.
#[derive(Clone, Debug)]
pub struct GeneratorMatrix {
    l: HalfInt,
    comp: i32,
    dim: usize,
    entries: Vec<SqrtRational>,
}

impl GeneratorMatrix {
    pub fn l(&self) -> HalfInt {
        self.l
    }

    /// The spherical component label: +1, 0, or -1.
    pub fn component(&self) -> i32 {
        self.comp
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn slot(&self, m: HalfInt) -> usize {
        debug_assert!(m.is_projection_of(self.l));
        ((self.l - m).twice() / 2) as usize
    }

    /// Entry `⟨l m_row| J_comp |l m_col⟩`.
    pub fn entry(&self, m_row: HalfInt, m_col: HalfInt) -> &SqrtRational {
        &self.entries[self.slot(m_row) * self.dim + self.slot(m_col)]
    }

    /// Entry by storage position (row-major, descending projections).
    pub fn entry_at(&self, row: usize, col: usize) -> &SqrtRational {
        &self.entries[row * self.dim + col]
    }

    /// The projection labelling storage position `i`: `m = l - i`.
    pub fn projection_at(&self, i: usize) -> HalfInt {
        self.l - HalfInt::from_int(i as i32)
    }
}

/// Builds the spherical generator `J_comp` on spin `l`, `comp ∈ {+1,0,-1}`.
///
/// Nonzero entries:
/// - `⟨m|J₀|m⟩ = m`
/// - `⟨m+1|J_{+1}|m⟩ = -√((l-m)(l+m+1)/2)`
/// - `⟨m-1|J_{-1}|m⟩ = +√((l+m)(l-m+1)/2)`
pub fn generator_matrix(l: HalfInt, comp: i32) -> GeneratorMatrix {
    assert!(
        (-1..=1).contains(&comp),
        "spherical component must be -1, 0, or +1"
    );
    assert!(!l.is_negative(), "spin must be non-negative");
    let dim = (l.twice() + 1) as usize;
    let mut entries = vec![SqrtRational::zero(); dim * dim];
    let mut set = |m_row: HalfInt, m_col: HalfInt, v: SqrtRational| {
        let r = ((l - m_row).twice() / 2) as usize;
        let c = ((l - m_col).twice() / 2) as usize;
        entries[r * dim + c] = v;
    };
    for m in l.projections() {
        match comp {
            0 => {
                let tm = i64::from(m.twice());
                set(
                    m,
                    m,
                    SqrtRational::from_rational(BigRational::new(
                        BigInt::from(tm),
                        BigInt::from(2),
                    )),
                );
            }
            1 => {
                if m != l {
                    // (l-m)(l+m+1)/2 in doubled coordinates:
                    let num = i64::from((l - m).twice()) * i64::from((l + m).twice() + 2);
                    set(m + HalfInt::ONE, m, -SqrtRational::sqrt_of(num, 8));
                }
            }
            _ => {
                if m != -l {
                    let num = i64::from((l + m).twice()) * i64::from((l - m).twice() + 2);
                    set(m - HalfInt::ONE, m, SqrtRational::sqrt_of(num, 8));
                }
            }
        }
    }
    GeneratorMatrix {
        l,
        comp,
        dim,
        entries,
    }
}
