//! Randomized invariants: coupling-symbol symmetries and orthogonality in
//! exact arithmetic, label arithmetic, serialization round trips, linearity
//! and unitarity of the evaluation/evolution maps, and the structure of
//! recoupled products.

use num_complex::Complex64;
use proptest::prelude::*;

use s3curl_core::contact::{antipodal_parity, k_range, recouple_pair, AntipodalParity};
use s3curl_core::exact::SqrtLinear;
use s3curl_core::group::{GroupPoint, HaarSampler};
use s3curl_core::half::{triangle_ok, HalfInt};
use s3curl_core::modes::{enumerate_modes, ModeExpansion};
use s3curl_core::operators::evolve;
use s3curl_core::wigner::{clebsch_gordan, wigner_3j};

fn h(t: i32) -> HalfInt {
    HalfInt::from_twice(t)
}

/// A strategy over half-integers with `0 ≤ 2x ≤ max_twice`.
fn half(max_twice: i32) -> impl Strategy<Value = HalfInt> {
    (0..=max_twice).prop_map(HalfInt::from_twice)
}

/// A strategy over signed half-integers with `|2x| ≤ max_twice`.
fn signed_half(max_twice: i32) -> impl Strategy<Value = HalfInt> {
    (-max_twice..=max_twice).prop_map(HalfInt::from_twice)
}

/// Coefficients across the full dynamic range the JSON schema must survive,
/// including signed zero, subnormals, and the largest finite double.
fn coefficient() -> impl Strategy<Value = f64> {
    prop_oneof![
        5 => -1e6..1e6f64,
        1 => Just(0.0),
        1 => Just(-0.0),
        1 => Just(5e-324),
        1 => Just(-1e-300),
        1 => Just(f64::MAX),
        1 => Just(std::f64::consts::PI),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // ------------------------------------------------------------------
    // Exact coupling-symbol invariants
    // ------------------------------------------------------------------

    /// A symbol with a violated selection rule is exactly zero.
    #[test]
    fn three_j_vanishes_outside_the_selection_rules(
        j1 in half(4), j2 in half(4), j3 in half(4),
        m1 in signed_half(4), m2 in signed_half(4), m3 in signed_half(4),
    ) {
        let violated = !triangle_ok(j1, j2, j3)
            || !m1.is_projection_of(j1)
            || !m2.is_projection_of(j2)
            || !m3.is_projection_of(j3)
            || (m1 + m2 + m3).twice() != 0;
        if violated {
            prop_assert!(wigner_3j(j1, j2, j3, m1, m2, m3).is_zero());
        }
    }

    /// Cyclic column rotations leave the symbol unchanged; swapping two
    /// columns or negating all projections multiplies by (−1)^(j1+j2+j3).
    #[test]
    fn three_j_symmetries_hold(
        j1 in half(3), j2 in half(3),
        picks in (0usize..16, 0usize..16, 0usize..16),
    ) {
        for j3 in HalfInt::couplings(j1, j2) {
            // Draw one valid projection per column from the pick seeds.
            let m1 = j1.projections().nth(picks.0 % (j1.twice() as usize + 1)).unwrap();
            let m2 = j2.projections().nth(picks.1 % (j2.twice() as usize + 1)).unwrap();
            let m3 = -(m1 + m2);
            if !m3.is_projection_of(j3) {
                continue;
            }
            let base = wigner_3j(j1, j2, j3, m1, m2, m3);
            let cycled = wigner_3j(j2, j3, j1, m2, m3, m1);
            prop_assert_eq!(&base, &cycled, "cyclic rotation changed the symbol");
            let swapped = wigner_3j(j2, j1, j3, m2, m1, m3);
            let mirrored = wigner_3j(j1, j2, j3, -m1, -m2, -m3);
            let signed = if (j1 + j2 + j3).phase() < 0 { -base.clone() } else { base.clone() };
            prop_assert_eq!(&swapped, &signed, "column swap phase is wrong");
            prop_assert_eq!(&mirrored, &signed, "projection mirror phase is wrong");
        }
    }

    /// Rows of the Clebsch–Gordan table are orthonormal, exactly.
    #[test]
    fn clebsch_gordan_rows_are_orthonormal(
        j1 in half(3), j2 in half(3),
        pick_j in (0usize..8, 0usize..8), pick_m in (0usize..16, 0usize..16),
    ) {
        let couplings: Vec<HalfInt> = HalfInt::couplings(j1, j2).collect();
        let ja = couplings[pick_j.0 % couplings.len()];
        let jb = couplings[pick_j.1 % couplings.len()];
        let ma = ja.projections().nth(pick_m.0 % (ja.twice() as usize + 1)).unwrap();
        let mb = jb.projections().nth(pick_m.1 % (jb.twice() as usize + 1)).unwrap();
        let mut acc = SqrtLinear::zero();
        for m1 in j1.projections() {
            let m2 = ma - m1;
            if !m2.is_projection_of(j2) {
                continue;
            }
            let left = clebsch_gordan(j1, m1, j2, m2, ja, ma);
            let right = clebsch_gordan(j1, m1, j2, m2, jb, mb);
            acc += &SqrtLinear::from(&(&left * &right));
        }
        let expected = if ja == jb && ma == mb {
            SqrtLinear::one()
        } else {
            SqrtLinear::zero()
        };
        prop_assert!((&acc - &expected).is_zero(), "row pairing ({ja},{ma})·({jb},{mb}) = {acc:?}");
    }

    // ------------------------------------------------------------------
    // Label arithmetic
    // ------------------------------------------------------------------

    /// Display and parsing are inverse on every label.
    #[test]
    fn half_integer_strings_round_trip(twice in -200i32..=200) {
        let x = HalfInt::from_twice(twice);
        let text = x.to_string();
        prop_assert_eq!(text.parse::<HalfInt>().unwrap(), x);
    }

    /// The doubled-integer representation is a faithful ordered embedding.
    #[test]
    fn half_integer_arithmetic_matches_doubled_integers(
        a in -100i32..=100, b in -100i32..=100,
    ) {
        let (x, y) = (HalfInt::from_twice(a), HalfInt::from_twice(b));
        prop_assert_eq!((x + y).twice(), a + b);
        prop_assert_eq!((x - y).twice(), a - b);
        prop_assert_eq!((-x).twice(), -a);
        prop_assert_eq!(x < y, a < b);
        prop_assert_eq!(x.abs().twice(), a.abs());
        prop_assert_eq!(x.as_f64(), f64::from(a) / 2.0);
    }

    /// The triangle predicate is symmetric in its three labels.
    #[test]
    fn triangle_condition_is_symmetric(a in half(6), b in half(6), c in half(6)) {
        let base = triangle_ok(a, b, c);
        prop_assert_eq!(base, triangle_ok(b, c, a));
        prop_assert_eq!(base, triangle_ok(b, a, c));
        prop_assert_eq!(base, triangle_ok(c, b, a));
    }

    /// The coupling iterator enumerates exactly the triangle-compatible
    /// labels of matching parity.
    #[test]
    fn couplings_enumerate_the_triangle_window(a in half(6), b in half(6)) {
        let listed: Vec<HalfInt> = HalfInt::couplings(a, b).collect();
        for c in &listed {
            prop_assert!(triangle_ok(a, b, *c));
        }
        let lo = (a - b).abs().twice();
        let hi = (a + b).twice();
        prop_assert_eq!(listed.len() as i32, (hi - lo) / 2 + 1);
        for tc in (lo..=hi).step_by(2) {
            prop_assert!(listed.contains(&HalfInt::from_twice(tc)));
        }
    }

    // ------------------------------------------------------------------
    // Expansions: serialization, linearity, evolution
    // ------------------------------------------------------------------

    /// JSON serialization round-trips expansions bit-exactly, across the
    /// whole coefficient range.
    #[test]
    fn expansion_json_round_trips_bit_exactly(
        tspin in 0i32..=2,
        picks in prop::collection::vec((0usize..64, coefficient(), coefficient()), 1..8),
        radius in prop_oneof![3 => Just(2.0), 2 => 0.05..50.0f64],
    ) {
        let spin = h(tspin);
        let modes = enumerate_modes(spin, h(3));
        let mut x = ModeExpansion::new(spin, radius);
        for (pick, re, im) in picks {
            x.add_term(modes[pick % modes.len()], Complex64::new(re, im)).unwrap();
        }
        let decoded = ModeExpansion::from_json(&x.to_json()).unwrap();
        prop_assert_eq!(decoded, x);
    }

    /// Evaluation is linear in the coefficients.
    #[test]
    fn evaluation_is_linear(
        seed in 0u64..1000,
        a_re in -2.0..2.0f64, a_im in -2.0..2.0f64,
        b_re in -2.0..2.0f64, b_im in -2.0..2.0f64,
    ) {
        let a = Complex64::new(a_re, a_im);
        let b = Complex64::new(b_re, b_im);
        let modes = enumerate_modes(HalfInt::ONE, h(2));
        let mut u = ModeExpansion::new(HalfInt::ONE, 2.0);
        let mut v = ModeExpansion::new(HalfInt::ONE, 2.0);
        let mut combined = ModeExpansion::new(HalfInt::ONE, 2.0);
        for (i, idx) in modes.iter().enumerate() {
            let cu = Complex64::new(((seed + i as u64) % 17) as f64 / 7.0 - 1.0, 0.3);
            let cv = Complex64::new(0.2, ((seed + 3 * i as u64) % 13) as f64 / 5.0 - 1.0);
            u.add_term(*idx, cu).unwrap();
            v.add_term(*idx, cv).unwrap();
            combined.add_term(*idx, a * cu + b * cv).unwrap();
        }
        let q = HaarSampler::new(seed).sample();
        let direct = combined.eval(&q);
        let split = u.eval(&q);
        let split_v = v.eval(&q);
        for ((d, x), y) in direct.components().iter().zip(split.components()).zip(split_v.components()) {
            prop_assert!((d - (a * x + b * y)).norm() <= 1e-13 * (1.0 + d.norm()));
        }
    }

    /// Time evolution is unitary on the coefficients, composes additively,
    /// and does nothing at t = 0.
    #[test]
    fn evolution_is_unitary_and_additive(
        seed in 0u64..1000, t1 in -10.0..10.0f64, t2 in -10.0..10.0f64,
    ) {
        // Physical (transverse, positive-branch) modes only.
        let mut x = ModeExpansion::new(HalfInt::ONE, 2.0);
        for (i, idx) in enumerate_modes(HalfInt::ONE, h(3))
            .into_iter()
            .filter(|idx| idx.j == idx.l + HalfInt::ONE)
            .enumerate()
        {
            let c = Complex64::new((i as f64 * 0.37 + seed as f64 * 0.01).sin(), 0.41 - i as f64 * 0.05);
            x.add_term(idx, c).unwrap();
        }
        let frozen = evolve(&x, 0.0).unwrap();
        prop_assert_eq!(&frozen, &x);
        let once = evolve(&x, t1).unwrap();
        for (idx, c) in once.iter() {
            let original = x.coeff(idx).norm();
            prop_assert!((c.norm() - original).abs() <= 1e-13 * (1.0 + original));
        }
        let twice_over = evolve(&once, t2).unwrap();
        let direct = evolve(&x, t1 + t2).unwrap();
        for (idx, c) in twice_over.iter() {
            prop_assert!((c - direct.coeff(idx)).norm() <= 1e-12 * (1.0 + c.norm()));
        }
    }

    // ------------------------------------------------------------------
    // Products and parity
    // ------------------------------------------------------------------

    /// Every surviving term of a recoupled product sits inside the label
    /// window, on the fixed row and column projections.
    #[test]
    fn recoupled_terms_live_in_the_k_window(pick1 in 0usize..90, pick2 in 0usize..90) {
        let modes = enumerate_modes(HalfInt::ONE, h(3));
        let idx1 = modes[pick1 % modes.len()];
        let idx2 = modes[pick2 % modes.len()];
        let product = recouple_pair(&idx1, &idx2, 2.0).unwrap();
        let window = k_range(idx1.l, idx2.l, idx1.j, idx2.j);
        match window {
            Some((lo, hi)) => {
                prop_assert_eq!(product.k_min, lo);
                prop_assert_eq!(product.k_max, hi);
            }
            None => prop_assert!(product.terms.is_empty()),
        }
        for term in &product.terms {
            prop_assert!(term.k >= product.k_min && term.k <= product.k_max);
            prop_assert_eq!(term.row, idx1.n + idx2.n);
            prop_assert_eq!(term.col, idx1.m + idx2.m);
            prop_assert!(term.row.is_projection_of(term.k));
            prop_assert!(term.col.is_projection_of(term.k));
            prop_assert!(term.weight.norm() > 0.0 && term.weight.is_finite());
        }
    }

    /// A single-parity expansion obeys its antipodal sign at every point.
    #[test]
    fn antipodal_parity_matches_evaluation(
        seed in 0u64..1000, odd_labels in proptest::bool::ANY,
    ) {
        let mut x = ModeExpansion::new(HalfInt::ONE, 2.0);
        for (i, idx) in enumerate_modes(HalfInt::ONE, h(3))
            .into_iter()
            .filter(|idx| idx.l.is_half_odd() == odd_labels)
            .enumerate()
        {
            x.add_term(idx, Complex64::new(0.3 + 0.1 * i as f64, -0.2)).unwrap();
        }
        let expected = if odd_labels { AntipodalParity::Odd } else { AntipodalParity::Even };
        prop_assert_eq!(antipodal_parity(&x), expected);
        let sign = if odd_labels { -1.0 } else { 1.0 };
        let mut sampler = HaarSampler::new(seed);
        for _ in 0..3 {
            let q = sampler.sample();
            let here = x.eval(&q);
            let there = x.eval(&q.antipodal());
            for (a, b) in here.components().iter().zip(there.components()) {
                prop_assert!((a * sign - b).norm() <= 1e-12);
            }
        }
    }

    /// Group multiplication stays on the unit sphere and the conjugate is a
    /// two-sided inverse.
    #[test]
    fn group_points_invert_and_normalise(seed in 0u64..10_000) {
        let mut sampler = HaarSampler::new(seed);
        let p = sampler.sample();
        let r = sampler.sample();
        prop_assert!((p.mul(&r).norm() - 1.0).abs() <= 1e-12);
        let id = p.mul(&p.conjugate());
        prop_assert!((id.w - 1.0).abs() <= 1e-12);
        prop_assert!(id.x.abs() <= 1e-12 && id.y.abs() <= 1e-12 && id.z.abs() <= 1e-12);
        // The Euler chart is a bijection onto the double cover.
        let back = GroupPoint::from_euler(p.to_euler());
        prop_assert!(p.dot(&back) >= 1.0 - 1e-12);
    }
}
