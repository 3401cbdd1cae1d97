//! First-principles reference constructions used to validate the coupling
//! kernel, plus small exact-matrix helpers shared by integration tests.
//!
//! The Clebsch–Gordan table here is built directly from the defining
//! representation theory — highest-weight vectors fixed by raising-operator
//! annihilation and the Condon–Shortley sign, then filled in by exact
//! lowering — with no closed-form coupling formula involved. It is the
//! reference the production kernel is compared against.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use s3curl_core::{HalfInt, SqrtLinear, SqrtRational};

/// Raising/lowering ladder factor `√((j∓m)(j±m+1))` as an exact radical.
/// `delta = +1` for raising, `-1` for lowering.
fn ladder_factor(j: HalfInt, m: HalfInt, delta: i32) -> SqrtRational {
    let tj = i64::from(j.twice());
    let tm = i64::from(m.twice());
    let num = if delta > 0 {
        (tj - tm) * (tj + tm + 2)
    } else {
        (tj + tm) * (tj - tm + 2)
    };
    if num <= 0 {
        return SqrtRational::zero();
    }
    SqrtRational::sqrt_of(num, 4)
}

/// Key: `(2j, 2m, 2m1, 2m2)`; value: exact `⟨j1 m1, j2 m2 | j m⟩`.
pub type CgTable = BTreeMap<(i32, i32, i32, i32), SqrtLinear>;

/// Builds the complete coupling table for `j1 ⊗ j2` from first principles.
pub fn ladder_cg_table(j1: HalfInt, j2: HalfInt) -> CgTable {
    let mut table = CgTable::new();
    let mut j = j1 + j2;
    let j_min = (j1 - j2).abs();
    while j >= j_min {
        // Highest-weight vector: v = Σ_{m1} c_{m1} |m1, j - m1⟩ with
        // J₊ v = 0, i.e.
        //   c_{m1}·f₊(j1,m1) + c_{m1+1}·f₊(j2, j-m1-1) = 0.
        // The Condon–Shortley convention pins c at m1 = j1 positive.
        let m1_top = j1;
        let m1_bot = if (j - j2) > -j1 { j - j2 } else { -j1 };
        let mut coeffs: BTreeMap<i32, SqrtRational> = BTreeMap::new();
        coeffs.insert(m1_top.twice(), SqrtRational::one());
        let mut m1 = m1_top - HalfInt::ONE;
        while m1 >= m1_bot {
            let up = coeffs[&(m1 + HalfInt::ONE).twice()].clone();
            let num = &up * &ladder_factor(j2, j - m1 - HalfInt::ONE, 1);
            let den = ladder_factor(j1, m1, 1);
            coeffs.insert(m1.twice(), -(&num / &den));
            m1 = m1 - HalfInt::ONE;
        }
        // Normalise: divide by √(Σ c²); the top coefficient stays positive.
        let mut norm_sq = BigRational::new(BigInt::from(0), BigInt::one());
        for c in coeffs.values() {
            norm_sq += c.square();
        }
        let norm = SqrtRational::new(BigRational::one(), norm_sq);
        let mut column: BTreeMap<(i32, i32), SqrtLinear> = BTreeMap::new();
        for (tm1, c) in &coeffs {
            let m2 = j - HalfInt::from_twice(*tm1);
            column.insert(
                (*tm1, m2.twice()),
                SqrtLinear::from(&(c / &norm)),
            );
        }
        record_column(&mut table, j, j, &column);

        // Lower through the multiplet:
        // |j, m-1⟩ = J₋|j, m⟩ / f₋(j, m), applied componentwise.
        let mut m = j;
        while m > -j {
            let scale = SqrtLinear::from(&ladder_factor(j, m, -1).recip());
            let mut next: BTreeMap<(i32, i32), SqrtLinear> = BTreeMap::new();
            for ((tm1, tm2), c) in &column {
                let m1 = HalfInt::from_twice(*tm1);
                let m2 = HalfInt::from_twice(*tm2);
                // J₋ acts on each tensor slot:
                let f1 = ladder_factor(j1, m1, -1);
                if !f1.is_zero() {
                    let entry = next
                        .entry((tm1 - 2, *tm2))
                        .or_insert_with(SqrtLinear::zero);
                    let sum = &*entry + &(&SqrtLinear::from(&f1) * c);
                    *entry = sum;
                }
                let f2 = ladder_factor(j2, m2, -1);
                if !f2.is_zero() {
                    let entry = next
                        .entry((*tm1, tm2 - 2))
                        .or_insert_with(SqrtLinear::zero);
                    let sum = &*entry + &(&SqrtLinear::from(&f2) * c);
                    *entry = sum;
                }
            }
            let mut scaled: BTreeMap<(i32, i32), SqrtLinear> = BTreeMap::new();
            for (k, v) in next {
                let sv = &v * &scale;
                if !sv.is_zero() {
                    scaled.insert(k, sv);
                }
            }
            column = scaled;
            m = m - HalfInt::ONE;
            record_column(&mut table, j, m, &column);
        }
        if j == j_min {
            break;
        }
        j = j - HalfInt::ONE;
    }
    table
}

fn record_column(
    table: &mut CgTable,
    j: HalfInt,
    m: HalfInt,
    column: &BTreeMap<(i32, i32), SqrtLinear>,
) {
    for ((tm1, tm2), v) in column {
        table.insert((j.twice(), m.twice(), *tm1, *tm2), v.clone());
    }
}
