//! Spin-weighted mode functions on the group manifold and finite
//! expansions over them.
//!
//! A mode of field spin `j` is labelled by `(j; L, J, N, M)`: `L` is the
//! left rotation label with spectator projection `N`, and the frame index
//! of the field couples with the right action of `L` to total spin `J`
//! with projection `M`. Componentwise,
//!
//! ```text
//! Φ^{jLJM}_{N,m}(q) = √((2L+1)/(2π²R³)) · D^L_{N, M-m}(q) · ⟨j m, L M-m | J M⟩
//! ```
//!
//! These are exactly orthonormal in the Haar inner product, transform
//! irreducibly with total spin `J` under right translation, and change by
//! the sheet sign `(-1)^(2L)` under the antipodal map.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dmatrix::d_element;
use crate::error::{Error, Result};
use crate::group::{killing_frame, Chirality, GroupPoint};
use crate::half::{triangle_ok, HalfInt};
use crate::wigner::clebsch_gordan_f64;

/// Full label of one basis mode: field spin and the four lattice labels.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ModeIndex {
    /// Field spin `j` (the number of frame components is `2j+1`).
    pub spin: HalfInt,
    /// Left rotation label `L`.
    pub l: HalfInt,
    /// Total right spin `J` out of `j ⊗ L`.
    pub j: HalfInt,
    /// Left spectator projection `N`, `|N| ≤ L`.
    pub n: HalfInt,
    /// Total projection `M`, `|M| ≤ J`.
    pub m: HalfInt,
}

impl ModeIndex {
    pub fn new(spin: HalfInt, l: HalfInt, j: HalfInt, n: HalfInt, m: HalfInt) -> Result<Self> {
        let idx = ModeIndex { spin, l, j, n, m };
        idx.validate()?;
        Ok(idx)
    }

    pub fn validate(&self) -> Result<()> {
        if !triangle_ok(self.spin, self.l, self.j) {
            return Err(Error::InvalidMode(format!(
                "{self}: total spin must couple the field spin with the left label"
            )));
        }
        if !self.n.is_projection_of(self.l) {
            return Err(Error::InvalidMode(format!(
                "{self}: N must be a projection of L"
            )));
        }
        if !self.m.is_projection_of(self.j) {
            return Err(Error::InvalidMode(format!(
                "{self}: M must be a projection of J"
            )));
        }
        Ok(())
    }

    /// Scalar modes have spin 0, hence `J = L`.
    pub fn is_scalar(&self) -> bool {
        self.spin == HalfInt::ZERO
    }

    /// The sheet sign `(-1)^(2L)` under `q ↦ -q`.
    pub fn antipodal_parity(&self) -> i32 {
        if self.l.twice().rem_euclid(2) == 1 {
            -1
        } else {
            1
        }
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(spin={}, L={}, J={}, N={}, M={})",
            self.spin, self.l, self.j, self.n, self.m
        )
    }
}

/// The value of a spin-`j` field at one point: `2j+1` frame components
/// ordered by descending label `m = j, j-1, …, -j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorValue {
    spin: HalfInt,
    components: Vec<Complex64>,
}

impl SpinorValue {
    pub fn zeros(spin: HalfInt) -> Self {
        SpinorValue {
            spin,
            components: vec![Complex64::new(0.0, 0.0); (spin.twice() + 1) as usize],
        }
    }

    pub fn spin(&self) -> HalfInt {
        self.spin
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    fn slot(&self, m: HalfInt) -> usize {
        debug_assert!(m.is_projection_of(self.spin));
        ((self.spin - m).twice() / 2) as usize
    }

    /// Component with frame label `m`.
    pub fn component(&self, m: HalfInt) -> Complex64 {
        self.components[self.slot(m)]
    }

    pub fn set_component(&mut self, m: HalfInt, v: Complex64) {
        let i = self.slot(m);
        self.components[i] = v;
    }

    pub fn add_component(&mut self, m: HalfInt, v: Complex64) {
        let i = self.slot(m);
        self.components[i] += v;
    }

    /// Components in storage order (descending `m`).
    pub fn components(&self) -> &[Complex64] {
        &self.components
    }

    /// The pointwise squared magnitude `Σ_m |v_m|²` (the metric-conjugate
    /// pairing of the value with itself; non-negative).
    pub fn norm_sq(&self) -> f64 {
        self.components.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Normalisation constant `√((2L+1)/(2π²R³))` of the spin-weighted family.
pub fn mode_norm_constant(l: HalfInt, radius: f64) -> f64 {
    ((f64::from(l.twice()) + 1.0) / (2.0 * PI * PI * radius.powi(3))).sqrt()
}

/// Evaluates one basis mode at one point on the manifold of radius `R`.
pub fn eval_harmonic(idx: &ModeIndex, q: &GroupPoint, radius: f64) -> SpinorValue {
    let angles = q.to_euler();
    let c = mode_norm_constant(idx.l, radius);
    let mut out = SpinorValue::zeros(idx.spin);
    for m in idx.spin.projections() {
        let n_col = idx.m - m;
        if !n_col.is_projection_of(idx.l) {
            continue;
        }
        let cg = clebsch_gordan_f64(idx.spin, m, idx.l, n_col, idx.j, idx.m);
        if cg == 0.0 {
            continue;
        }
        let d = d_element(idx.l, idx.n, n_col, &angles);
        out.add_component(m, d * (c * cg));
    }
    out
}

/// A finite expansion `Σ coeff·Φ_idx` of fixed field spin on a manifold of
/// fixed radius. Exactly one coefficient per index (inserting into an
/// occupied slot accumulates).
#[derive(Clone, Debug, PartialEq)]
pub struct ModeExpansion {
    spin: HalfInt,
    radius: f64,
    terms: BTreeMap<ModeIndex, Complex64>,
}

impl ModeExpansion {
    pub fn new(spin: HalfInt, radius: f64) -> Self {
        ModeExpansion {
            spin,
            radius,
            terms: BTreeMap::new(),
        }
    }

    pub fn spin(&self) -> HalfInt {
        self.spin
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn set_radius(&mut self, radius: f64) {
        self.radius = radius;
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coeff·Φ_idx`, accumulating into an existing term if present.
    pub fn add_term(&mut self, idx: ModeIndex, coeff: Complex64) -> Result<()> {
        idx.validate()?;
        if idx.spin != self.spin {
            return Err(Error::SpinMismatch {
                expected: self.spin,
                got: idx.spin,
            });
        }
        *self.terms.entry(idx).or_insert(Complex64::new(0.0, 0.0)) += coeff;
        Ok(())
    }

    /// One basis mode as an expansion.
    pub fn basis(idx: ModeIndex, radius: f64) -> Result<Self> {
        let mut x = ModeExpansion::new(idx.spin, radius);
        x.add_term(idx, Complex64::new(1.0, 0.0))?;
        Ok(x)
    }

    pub fn coeff(&self, idx: &ModeIndex) -> Complex64 {
        self.terms
            .get(idx)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ModeIndex, &Complex64)> {
        self.terms.iter()
    }

    /// Drops terms with |coeff| below `tol` (exact zeros included).
    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.norm() > tol);
    }

    /// Sum of |coeff|² — the exact squared Haar norm, by orthonormality.
    pub fn coeff_norm_sq(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum()
    }

    /// Evaluates the expansion at one point. The Euler chart is inverted
    /// once; every term reuses it.
    pub fn eval(&self, q: &GroupPoint) -> SpinorValue {
        let angles = q.to_euler();
        let mut out = SpinorValue::zeros(self.spin);
        for (idx, coeff) in &self.terms {
            let c = mode_norm_constant(idx.l, self.radius);
            for m in self.spin.projections() {
                let n_col = idx.m - m;
                if !n_col.is_projection_of(idx.l) {
                    continue;
                }
                let cg = clebsch_gordan_f64(self.spin, m, idx.l, n_col, idx.j, idx.m);
                if cg == 0.0 {
                    continue;
                }
                let d = d_element(idx.l, idx.n, n_col, &angles);
                out.add_component(m, coeff * d * (c * cg));
            }
        }
        out
    }

    /// The largest left label appearing in the expansion.
    pub fn max_l(&self) -> HalfInt {
        self.terms
            .keys()
            .map(|i| i.l)
            .max()
            .unwrap_or(HalfInt::ZERO)
    }
}

/// Pushes a spin-1 value at `q` into embedded 4-space coordinates using the
/// metric-raised left-invariant frame: `V = Σ_m v_m·(-1)^(1-m)·A_{-m}(q)`.
/// The result is tangent at `R·q`, and at `R = 2` its Hermitian 4-norm
/// equals the component norm: `Σ_k |V_k|² = (R/2)²·Σ_m |v_m|²`.
pub fn project_to_coords(value: &SpinorValue, q: &GroupPoint, radius: f64) -> [Complex64; 4] {
    assert_eq!(
        value.spin(),
        HalfInt::ONE,
        "coordinate projection is defined for spin-1 values"
    );
    let frame = killing_frame(q, radius, Chirality::Left);
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for (mi, tm) in [(0usize, 1i32), (1, 0), (2, -1)] {
        let m = HalfInt::from_twice(2 * tm);
        let v = value.component(m);
        if v == Complex64::new(0.0, 0.0) {
            continue;
        }
        let sign = if (1 - tm).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let a = frame.component(-tm);
        for k in 0..4 {
            out[k] += v * a[k] * sign;
        }
        let _ = mi;
    }
    out
}

const fn default_radius() -> f64 {
    2.0
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    #[serde(rename = "L")]
    l: String,
    #[serde(rename = "J")]
    j: String,
    #[serde(rename = "N")]
    n: String,
    #[serde(rename = "M")]
    m: String,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct ExpansionRecord {
    /// Doubled spin as a string, e.g. `"2"` for spin 1, `"1"` for spin 1/2.
    spin: String,
    #[serde(default = "default_radius")]
    radius: f64,
    terms: Vec<TermRecord>,
}

fn parse_twice(field: &str, s: &str) -> Result<HalfInt> {
    s.trim()
        .parse::<i32>()
        .map(HalfInt::from_twice)
        .map_err(|e| Error::Parse(format!("field {field}: bad doubled integer `{s}`: {e}")))
}

impl ModeExpansion {
    /// Serialises to the documented JSON shape: doubled integers as strings
    /// (`"spin": "2j"`, `"L": "2L"`, …), coefficients split into `re`/`im`,
    /// and an optional top-level `radius` (absent input defaults to 2).
    pub fn to_json(&self) -> String {
        let rec = ExpansionRecord {
            spin: self.spin.twice().to_string(),
            radius: self.radius,
            terms: self
                .terms
                .iter()
                .map(|(idx, c)| TermRecord {
                    l: idx.l.twice().to_string(),
                    j: idx.j.twice().to_string(),
                    n: idx.n.twice().to_string(),
                    m: idx.m.twice().to_string(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&rec).expect("expansion serialisation cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: ExpansionRecord =
            serde_json::from_str(text).map_err(|e| Error::Serde(e.to_string()))?;
        let spin = parse_twice("spin", &rec.spin)?;
        if rec.radius <= 0.0 || !rec.radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "radius must be positive and finite, got {}",
                rec.radius
            )));
        }
        let mut out = ModeExpansion::new(spin, rec.radius);
        for t in &rec.terms {
            let idx = ModeIndex::new(
                spin,
                parse_twice("L", &t.l)?,
                parse_twice("J", &t.j)?,
                parse_twice("N", &t.n)?,
                parse_twice("M", &t.m)?,
            )?;
            out.add_term(idx, Complex64::new(t.re, t.im))?;
        }
        Ok(out)
    }
}

/// Enumerates every valid mode index of field spin `spin` with `L ≤ l_max`
/// (ascending lexicographic order).
pub fn enumerate_modes(spin: HalfInt, l_max: HalfInt) -> Vec<ModeIndex> {
    let mut out = Vec::new();
    let mut tl = 0;
    while tl <= l_max.twice() {
        let l = HalfInt::from_twice(tl);
        for j in HalfInt::couplings(spin, l) {
            for n in l.projections() {
                for m in j.projections() {
                    out.push(ModeIndex { spin, l, j, n, m });
                }
            }
        }
        tl += 1;
    }
    out
}
