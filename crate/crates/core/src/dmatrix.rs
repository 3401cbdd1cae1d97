//! Rotation matrices `D^J(q)` for any half-integer spin `J`, evaluated on
//! group points through the extended `zyz` Euler chart.
//!
//! Matrix elements follow the convention
//! `D^J_{m'm} = e^{-i m' alpha}·d^J_{m'm}(beta)·e^{-i m gamma}`, with rows
//! and columns ordered by descending projection. Because the chart carries
//! `gamma ∈ [0, 4π)` and the branch is pinned to the spin-1/2 matrix,
//! `D^{1/2}(q)` reproduces [`GroupPoint::su2`] exactly and every spin obeys
//! `D^J(-q) = (-1)^(2J)·D^J(q)` as a function of the point, not the chart.

use num_complex::Complex64;

use crate::group::{EulerAngles, GroupPoint};
use crate::half::HalfInt;

/// `n!` as f64, for the small arguments arising in d-matrix sums.
fn fact_f64(n: i64) -> f64 {
    debug_assert!((0..=170).contains(&n), "factorial argument out of range");
    let mut acc = 1.0;
    for k in 2..=n {
        acc *= k as f64;
    }
    acc
}

/// The little-d element `d^j_{m'm}(beta)` (real).
pub fn d_little(j: HalfInt, m_row: HalfInt, m_col: HalfInt, beta: f64) -> f64 {
    if !m_row.is_projection_of(j) || !m_col.is_projection_of(j) {
        return 0.0;
    }
    let jp = i64::from((j + m_col).twice()) / 2; // j + m
    let jm = i64::from((j - m_col).twice()) / 2; // j - m
    let jpp = i64::from((j + m_row).twice()) / 2; // j + m'
    let jmp = i64::from((j - m_row).twice()) / 2; // j - m'
    let diff = i64::from((m_row - m_col).twice()) / 2; // m' - m
    let prefactor = (fact_f64(jpp) * fact_f64(jmp) * fact_f64(jp) * fact_f64(jm)).sqrt();
    let (sin_half, cos_half) = (beta / 2.0).sin_cos();
    let k_min = 0.max(-diff);
    let k_max = jp.min(jmp);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let cos_pow = jp + jmp - 2 * k; // 2j + m - m' - 2k
        let sin_pow = diff + 2 * k;
        let den = fact_f64(jp - k) * fact_f64(k) * fact_f64(jmp - k) * fact_f64(diff + k);
        let mut term = cos_half.powi(cos_pow as i32) * sin_half.powi(sin_pow as i32) / den;
        if (diff + k) % 2 != 0 {
            term = -term;
        }
        sum += term;
    }
    prefactor * sum
}

/// A dense rotation matrix for one spin at one point. Rows and columns are
/// ordered by descending projection `m = j, j-1, …, -j`.
#[derive(Clone, Debug)]
pub struct DMatrix {
    j: HalfInt,
    dim: usize,
    data: Vec<Complex64>,
}

impl DMatrix {
    pub fn j(&self) -> HalfInt {
        self.j
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn slot(&self, m: HalfInt) -> usize {
        debug_assert!(m.is_projection_of(self.j));
        ((self.j - m).twice() / 2) as usize
    }

    /// Element `D^j_{m_row, m_col}`.
    pub fn entry(&self, m_row: HalfInt, m_col: HalfInt) -> Complex64 {
        self.data[self.slot(m_row) * self.dim + self.slot(m_col)]
    }

    pub fn entry_at(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn projection_at(&self, i: usize) -> HalfInt {
        self.j - HalfInt::from_int(i as i32)
    }
}

/// Single element `D^j_{m'm}(q)` through the extended Euler chart.
pub fn d_element(j: HalfInt, m_row: HalfInt, m_col: HalfInt, angles: &EulerAngles) -> Complex64 {
    let little = d_little(j, m_row, m_col, angles.beta);
    if little == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let phase = -(m_row.as_f64() * angles.alpha + m_col.as_f64() * angles.gamma);
    Complex64::from_polar(little, phase)
}

/// The full matrix `D^j(q)`.
pub fn d_matrix(j: HalfInt, q: &GroupPoint) -> DMatrix {
    let angles = q.to_euler();
    d_matrix_from_angles(j, &angles)
}

/// The full matrix from precomputed chart angles (callers evaluating many
/// spins at one point should invert the chart once).
pub fn d_matrix_from_angles(j: HalfInt, angles: &EulerAngles) -> DMatrix {
    let dim = (j.twice() + 1) as usize;
    let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (r, m_row) in j.projections().rev().enumerate() {
        for (c, m_col) in j.projections().rev().enumerate() {
            data[r * dim + c] = d_element(j, m_row, m_col, angles);
        }
    }
    DMatrix { j, dim, data }
}

/// The sheet sign `(-1)^(2j)`: the factor picked up by `D^j` under the
/// antipodal map `q ↦ -q`.
pub fn antipodal_sign(j: HalfInt) -> i32 {
    if j.twice().rem_euclid(2) == 1 {
        -1
    } else {
        1
    }
}
