//! Points, charts, frames, and quadrature on the unit-quaternion group.
//!
//! A point is a unit quaternion `q = w + xi + yj + zk`; the manifold of
//! radius `R` is embedded as `R·q` in 4-space. The Euler chart is the
//! `zyz` convention with the third angle running over `[0, 4π)` so that
//! every spin representation, including half-odd ones, is single-valued.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// A unit quaternion `w + xi + yj + zk` — one point of the group manifold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupPoint {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Euler angles in the `zyz` chart: `alpha ∈ [0,2π)`, `beta ∈ [0,π]`,
/// `gamma ∈ [0,4π)`. The extended `gamma` range labels the double cover.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl GroupPoint {
    pub const IDENTITY: GroupPoint = GroupPoint {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        GroupPoint { w, x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalise the zero quaternion");
        GroupPoint::new(self.w / n, self.x / n, self.y / n, self.z / n)
    }

    /// Quaternion product `self ∘ rhs` (Hamilton convention).
    pub fn mul(&self, rhs: &GroupPoint) -> GroupPoint {
        GroupPoint::new(
            self.w * rhs.w - self.x * rhs.x - self.y * rhs.y - self.z * rhs.z,
            self.w * rhs.x + self.x * rhs.w + self.y * rhs.z - self.z * rhs.y,
            self.w * rhs.y - self.x * rhs.z + self.y * rhs.w + self.z * rhs.x,
            self.w * rhs.z + self.x * rhs.y - self.y * rhs.x + self.z * rhs.w,
        )
    }

    /// Conjugate; equals the group inverse for unit quaternions.
    pub fn conjugate(&self) -> GroupPoint {
        GroupPoint::new(self.w, -self.x, -self.y, -self.z)
    }

    /// The antipodal point `-q` (same rotation, other sheet of the cover).
    pub fn antipodal(&self) -> GroupPoint {
        GroupPoint::new(-self.w, -self.x, -self.y, -self.z)
    }

    /// Euclidean 4-space inner product.
    pub fn dot(&self, rhs: &GroupPoint) -> f64 {
        self.w * rhs.w + self.x * rhs.x + self.y * rhs.y + self.z * rhs.z
    }

    /// The rotation `exp(angle·ê_axis/2)`: `cos(angle/2) + sin(angle/2)·ê`.
    /// `axis` is 0, 1, 2 for i, j, k.
    pub fn axis_rotation(axis: usize, angle: f64) -> GroupPoint {
        let (s, c) = (angle / 2.0).sin_cos();
        match axis {
            0 => GroupPoint::new(c, s, 0.0, 0.0),
            1 => GroupPoint::new(c, 0.0, s, 0.0),
            2 => GroupPoint::new(c, 0.0, 0.0, s),
            _ => panic!("axis must be 0, 1, or 2"),
        }
    }

    /// Right-translates along the invariant flow of Cartesian direction
    /// `axis`: `q ↦ q·exp(-t·ê_axis/2)`. These are the integral curves of
    /// the left-invariant frame returned by [`killing_frame`].
    pub fn killing_flow(&self, axis: usize, t: f64) -> GroupPoint {
        self.mul(&GroupPoint::axis_rotation(axis, -t))
    }

    /// The defining 2×2 unitary image `[[w-iz, -y-ix], [y-ix, w+iz]]`.
    pub fn su2(&self) -> [[Complex64; 2]; 2] {
        [
            [
                Complex64::new(self.w, -self.z),
                Complex64::new(-self.y, -self.x),
            ],
            [
                Complex64::new(self.y, -self.x),
                Complex64::new(self.w, self.z),
            ],
        ]
    }

    /// Builds the point with Euler angles `(alpha, beta, gamma)` in the
    /// `zyz` chart: `q = exp(alpha·k/2)·exp(beta·j/2)·exp(gamma·k/2)`.
    pub fn from_euler(angles: EulerAngles) -> GroupPoint {
        let qa = GroupPoint::axis_rotation(2, angles.alpha);
        let qb = GroupPoint::axis_rotation(1, angles.beta);
        let qg = GroupPoint::axis_rotation(2, angles.gamma);
        qa.mul(&qb).mul(&qg)
    }

    /// Inverts the `zyz` chart. `beta ∈ [0, π]`, `alpha ∈ [0, 2π)`, and
    /// `gamma ∈ [0, 4π)`; the extended third angle distinguishes `q` from
    /// `-q`, so every half-odd representation evaluated through this chart
    /// is single-valued on the group.
    pub fn to_euler(&self) -> EulerAngles {
        let u = self.su2();
        let a = u[0][0];
        let b = u[0][1];
        let ca = a.norm(); // cos(beta/2)
        let sb = b.norm(); // sin(beta/2)
        let beta = 2.0 * sb.atan2(ca);
        const DEGENERATE: f64 = 1e-300;
        let (mut alpha, mut gamma);
        if ca <= DEGENERATE {
            // beta = π: only alpha - gamma is defined; put it all in alpha.
            let phi_b = (-b).arg();
            alpha = -2.0 * phi_b;
            gamma = 0.0;
        } else if sb <= DEGENERATE {
            // beta = 0: only alpha + gamma is defined.
            let phi_a = a.arg();
            alpha = -2.0 * phi_a;
            gamma = 0.0;
        } else {
            let phi_a = a.arg(); // -(alpha+gamma)/2
            let phi_b = (-b).arg(); // -(alpha-gamma)/2
            alpha = -(phi_a + phi_b);
            gamma = phi_b - phi_a;
        }
        alpha = alpha.rem_euclid(2.0 * PI);
        gamma = gamma.rem_euclid(4.0 * PI);
        // Branch fix: the chart must reproduce the spin-1/2 matrix itself,
        // not its negative. Compare on the largest entry and shift gamma by
        // 2π (flipping the sheet) when the signs disagree.
        let half = EulerAngles {
            alpha,
            beta,
            gamma,
        };
        let rebuilt = GroupPoint::from_euler(half);
        let dot = self.dot(&rebuilt);
        if dot < 0.0 {
            gamma = (gamma + 2.0 * PI).rem_euclid(4.0 * PI);
        }
        EulerAngles {
            alpha,
            beta,
            gamma,
        }
    }

    /// The 3×3 rotation matrix of `v ↦ q v q̄` on pure-imaginary quaternions
    /// (rows/columns ordered x, y, z).
    pub fn rotation_matrix(&self) -> [[f64; 3]; 3] {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        [
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ]
    }
}

/// Which invariance the frame has: `Left`-invariant fields generate *right*
/// translations `q·exp(-t ê/2)`, `Right`-invariant fields generate left
/// translations `exp(-t ê/2)·q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chirality {
    Left,
    Right,
}

/// An orthogonal tangent frame at one point, in spherical components.
///
/// `vectors[i]` is the embedded 4-vector of the component labelled
/// `a = +1, 0, -1` for `i = 0, 1, 2`. Each Cartesian member has length
/// `R/2`; the spherical members satisfy `⟨conj(A_a), A_b⟩ = (R/2)²·δ_ab`
/// and the bilinear pairing `⟨A_a, A_b⟩ = (R/2)²·(-1)^a·δ_{a,-b}`.
#[derive(Clone, Debug)]
pub struct KillingFrame {
    pub vectors: [[Complex64; 4]; 3],
    pub radius: f64,
    pub chirality: Chirality,
}

impl KillingFrame {
    /// The component 4-vector for spherical label `a ∈ {+1, 0, -1}`.
    pub fn component(&self, a: i32) -> &[Complex64; 4] {
        match a {
            1 => &self.vectors[0],
            0 => &self.vectors[1],
            -1 => &self.vectors[2],
            _ => panic!("spherical label must be -1, 0, or +1"),
        }
    }
}

/// The invariant orthogonal frame at `q` on the manifold of radius `R`.
///
/// Cartesian members are `A_c = -(R/2)·(q ∘ ê_c)` for the left-invariant
/// frame and `Ã_c = -(R/2)·(ê_c ∘ q)` for the right-invariant one; both are
/// tangent at `R·q` and proportional to the generators of the translation
/// flows in [`GroupPoint::killing_flow`]. Spherical components follow the
/// usual combination `A_{±1} = ∓(A_x ± iA_y)/√2`, `A_0 = A_z`.
pub fn killing_frame(q: &GroupPoint, radius: f64, chirality: Chirality) -> KillingFrame {
    let half_r = -(radius / 2.0);
    let mut cart = [[0.0f64; 4]; 3];
    for (c, slot) in cart.iter_mut().enumerate() {
        let e = match c {
            0 => GroupPoint::new(0.0, 1.0, 0.0, 0.0),
            1 => GroupPoint::new(0.0, 0.0, 1.0, 0.0),
            _ => GroupPoint::new(0.0, 0.0, 0.0, 1.0),
        };
        let v = match chirality {
            Chirality::Left => q.mul(&e),
            Chirality::Right => e.mul(q),
        };
        *slot = [half_r * v.w, half_r * v.x, half_r * v.y, half_r * v.z];
    }
    let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
    let mut vectors = [[Complex64::new(0.0, 0.0); 4]; 3];
    for k in 0..4 {
        let (ax, ay, az) = (cart[0][k], cart[1][k], cart[2][k]);
        vectors[0][k] = Complex64::new(-ax * inv_sqrt2, -ay * inv_sqrt2);
        vectors[1][k] = Complex64::new(az, 0.0);
        vectors[2][k] = Complex64::new(ax * inv_sqrt2, -ay * inv_sqrt2);
    }
    KillingFrame {
        vectors,
        radius,
        chirality,
    }
}

/// The 3×3 complex matrix relating the two invariant frames at one point:
/// contracting its *row* index against the right-invariant frame yields the
/// left-invariant one,
///
/// ```text
/// A_b(q) = Σ_a W(q)_ab · Ã_a(q)     (spherical labels a, b ∈ {+1,0,-1})
/// ```
///
/// Computed purely from quaternion conjugation, `W` coincides entrywise
/// with the spin-1 rotation matrix `D^1(q)` of the `dmatrix` module — the
/// statement that frame-component fields transform between the translation
/// actions by the spin-1 representation.
pub fn adjoint_rotation(q: &GroupPoint) -> [[Complex64; 3]; 3] {
    // Cartesian relation: A_c = Σ_b Rot(q)ᵀ_cb·Ã_b, conjugated into the
    // spherical basis by the unitary T (rows a = +1, 0, -1); the result is
    // then transposed so that the returned matrix is D^1 itself.
    let rot = q.rotation_matrix();
    let s = 1.0 / 2.0f64.sqrt();
    let t: [[Complex64; 3]; 3] = [
        [
            Complex64::new(-s, 0.0),
            Complex64::new(0.0, -s),
            Complex64::new(0.0, 0.0),
        ],
        [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ],
        [
            Complex64::new(s, 0.0),
            Complex64::new(0.0, -s),
            Complex64::new(0.0, 0.0),
        ],
    ];
    // M = T·Rotᵀ·T†, then W = Mᵀ.
    let mut rt_td = [[Complex64::new(0.0, 0.0); 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..3 {
                // (Rotᵀ)_rk · (T†)_kc = Rot_kr · conj(T_ck)
                acc += Complex64::new(rot[k][r], 0.0) * t[c][k].conj();
            }
            rt_td[r][c] = acc;
        }
    }
    let mut w = [[Complex64::new(0.0, 0.0); 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..3 {
                acc += t[r][k] * rt_td[k][c];
            }
            // transpose: W_cr = M_rc
            w[c][r] = acc;
        }
    }
    w
}

/// A product quadrature over the group: trapezoid in both circle angles,
/// Gauss–Legendre in `cos(beta)`, with the bi-invariant weight
/// `(R³/8)·sin(beta)·dalpha·dbeta·dgamma`. Weights are positive and sum to
/// the group volume `2π²R³`.
#[derive(Clone, Debug)]
pub struct HaarGrid {
    pub nodes: Vec<GroupPoint>,
    pub weights: Vec<f64>,
    pub dims: (usize, usize, usize),
    pub radius: f64,
}

impl HaarGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// The largest doubled spin `2J` such that products of two matrix
    /// elements of spins up to `J` integrate exactly: the alpha rule needs
    /// `2·(2J) ≤ 2(na-1)`, the gamma rule `2·(2J) < ng`, and the beta rule
    /// `2J ≤ 2nb-1` polynomial degrees.
    pub fn design_twice_spin(&self) -> i32 {
        let (na, nb, ng) = self.dims;
        let a = (na as i32) - 1;
        let g = ((ng as i32) - 1) / 2;
        let b = 2 * (nb as i32) - 1;
        a.min(g).min(b)
    }
}

/// Builds the product Haar grid with `na × nb × ng` nodes; see [`HaarGrid`].
pub fn haar_grid(na: usize, nb: usize, ng: usize, radius: f64) -> HaarGrid {
    assert!(na > 0 && nb > 0 && ng > 0, "grid dimensions must be positive");
    let (nodes_b, weights_b) = gauss_legendre(nb);
    let vol_factor = radius.powi(3) / 8.0;
    let wa = 2.0 * PI / (na as f64);
    let wg = 4.0 * PI / (ng as f64);
    let mut nodes = Vec::with_capacity(na * nb * ng);
    let mut weights = Vec::with_capacity(na * nb * ng);
    for ia in 0..na {
        let alpha = wa * (ia as f64);
        for ib in 0..nb {
            let beta = nodes_b[ib].acos();
            for ig in 0..ng {
                let gamma = wg * (ig as f64);
                nodes.push(GroupPoint::from_euler(EulerAngles {
                    alpha,
                    beta,
                    gamma,
                }));
                weights.push(vol_factor * wa * wg * weights_b[ib]);
            }
        }
    }
    HaarGrid {
        nodes,
        weights,
        dims: (na, nb, ng),
        radius,
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[n - 1 - k] = x;
        weights[n - 1 - k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// A deterministic Haar-distributed sampler (ChaCha-seeded, platform
/// stable): four standard normals normalised to the unit 3-sphere.
pub struct HaarSampler {
    rng: ChaCha8Rng,
}

impl HaarSampler {
    pub fn new(seed: u64) -> Self {
        HaarSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn normal_pair(&mut self) -> (f64, f64) {
        // Box–Muller; u is kept away from zero to avoid log(0).
        loop {
            let u: f64 = self.rng.gen::<f64>();
            if u > 1e-300 {
                let v: f64 = self.rng.gen::<f64>();
                let r = (-2.0 * u.ln()).sqrt();
                let (s, c) = (2.0 * PI * v).sin_cos();
                return (r * c, r * s);
            }
        }
    }

    pub fn sample(&mut self) -> GroupPoint {
        loop {
            let (w, x) = self.normal_pair();
            let (y, z) = self.normal_pair();
            let q = GroupPoint::new(w, x, y, z);
            if q.norm() > 1e-6 {
                return q.normalized();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
        assert!((a - b).abs() <= tol, "{what}: {a} vs {b}");
    }

    fn points() -> Vec<GroupPoint> {
        let mut sampler = HaarSampler::new(7);
        let mut pts = vec![
            GroupPoint::IDENTITY,
            GroupPoint::IDENTITY.antipodal(),
            GroupPoint::axis_rotation(0, 1.1),
            GroupPoint::axis_rotation(1, 2.5),
            GroupPoint::axis_rotation(2, -0.7),
            GroupPoint::new(0.0, 0.0, 1.0, 0.0), // beta = π seam
            GroupPoint::new(0.0, 0.0, 0.0, 1.0),
        ];
        for _ in 0..40 {
            pts.push(sampler.sample());
        }
        pts
    }

    #[test]
    fn quaternion_algebra() {
        // i·j = k, j·k = i, k·i = j, i² = -1
        let i = GroupPoint::new(0.0, 1.0, 0.0, 0.0);
        let j = GroupPoint::new(0.0, 0.0, 1.0, 0.0);
        let k = GroupPoint::new(0.0, 0.0, 0.0, 1.0);
        assert_eq!(i.mul(&j), k);
        assert_eq!(j.mul(&k), i);
        assert_eq!(k.mul(&i), j);
        assert_eq!(i.mul(&i), GroupPoint::IDENTITY.antipodal());
        // associativity spot check with inverse
        for q in points() {
            let p = q.mul(&q.conjugate());
            assert_close(p.w, 1.0, 1e-12, "q·q̄ = 1");
            assert_close(p.x.abs() + p.y.abs() + p.z.abs(), 0.0, 1e-12, "q·q̄ pure");
        }
    }

    #[test]
    fn su2_is_a_homomorphism() {
        for q1 in points().iter().take(8) {
            for q2 in points().iter().skip(3).take(8) {
                let u1 = q1.su2();
                let u2 = q2.su2();
                let u12 = q1.mul(q2).su2();
                for r in 0..2 {
                    for c in 0..2 {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for k in 0..2 {
                            acc += u1[r][k] * u2[k][c];
                        }
                        assert!(
                            (acc - u12[r][c]).norm() < 1e-12,
                            "SU(2) product mismatch at ({r},{c})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn euler_round_trip_covers_both_sheets() {
        for q in points() {
            let ang = q.to_euler();
            assert!(ang.alpha >= 0.0 && ang.alpha < 2.0 * PI);
            assert!(ang.beta >= 0.0 && ang.beta <= PI);
            assert!(ang.gamma >= 0.0 && ang.gamma < 4.0 * PI);
            let back = GroupPoint::from_euler(ang);
            assert_close(q.dot(&back), 1.0, 1e-10, "round trip is the same sheet");
        }
    }

    #[test]
    fn rotation_matrix_matches_conjugation() {
        for q in points() {
            let rot = q.rotation_matrix();
            for (c, e) in [
                GroupPoint::new(0.0, 1.0, 0.0, 0.0),
                GroupPoint::new(0.0, 0.0, 1.0, 0.0),
                GroupPoint::new(0.0, 0.0, 0.0, 1.0),
            ]
            .iter()
            .enumerate()
            {
                let conj = q.mul(e).mul(&q.conjugate());
                let col = [rot[0][c], rot[1][c], rot[2][c]];
                assert_close(conj.x, col[0], 1e-12, "rot x");
                assert_close(conj.y, col[1], 1e-12, "rot y");
                assert_close(conj.z, col[2], 1e-12, "rot z");
                assert_close(conj.w, 0.0, 1e-12, "rot stays imaginary");
            }
        }
    }

    #[test]
    fn killing_frame_geometry() {
        let radius = 2.0;
        for q in points() {
            for chir in [Chirality::Left, Chirality::Right] {
                let f = killing_frame(&q, radius, chir);
                // tangency: ⟨A_a, q⟩ = 0
                for a in [-1, 0, 1] {
                    let v = f.component(a);
                    let dot = v[0] * q.w + v[1] * q.x + v[2] * q.y + v[3] * q.z;
                    assert!(dot.norm() < 1e-12, "frame must be tangent");
                }
                // hermitian orthogonality: ⟨conj A_a, A_b⟩ = (R/2)² δ_ab
                for a in [-1, 0, 1] {
                    for b in [-1, 0, 1] {
                        let va = f.component(a);
                        let vb = f.component(b);
                        let mut acc = Complex64::new(0.0, 0.0);
                        for k in 0..4 {
                            acc += va[k].conj() * vb[k];
                        }
                        let expect = if a == b { radius * radius / 4.0 } else { 0.0 };
                        assert!(
                            (acc - expect).norm() < 1e-12,
                            "frame orthogonality ({a},{b})"
                        );
                    }
                }
                // bilinear pairing: ⟨A_a, A_b⟩ = (R/2)²(-1)^a δ_{a,-b}
                for a in [-1i32, 0, 1] {
                    for b in [-1i32, 0, 1] {
                        let va = f.component(a);
                        let vb = f.component(b);
                        let mut acc = Complex64::new(0.0, 0.0);
                        for k in 0..4 {
                            acc += va[k] * vb[k];
                        }
                        let expect = if a == -b {
                            let sign = if a.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                            sign * radius * radius / 4.0
                        } else {
                            0.0
                        };
                        assert!(
                            (acc - expect).norm() < 1e-12,
                            "frame pairing ({a},{b}): {acc}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn killing_flow_velocity_matches_frame() {
        // d/dt q·exp(-t ê_c/2) at t=0, embedded at radius R, equals the
        // Cartesian frame member. Central differences at h = 1e-6 give
        // ~1e-12 accuracy.
        let radius = 2.0;
        let h = 1e-6;
        for q in points().into_iter().take(12) {
            let f = killing_frame(&q, radius, Chirality::Left);
            // reconstruct Cartesian members from spherical: A_x = (A_{-1} - A_{+1})/√2
            let s = 1.0 / 2.0f64.sqrt();
            for c in 0..3 {
                let plus = q.killing_flow(c, h);
                let minus = q.killing_flow(c, -h);
                let vel = [
                    radius * (plus.w - minus.w) / (2.0 * h),
                    radius * (plus.x - minus.x) / (2.0 * h),
                    radius * (plus.y - minus.y) / (2.0 * h),
                    radius * (plus.z - minus.z) / (2.0 * h),
                ];
                for k in 0..4 {
                    let cart = match c {
                        0 => (f.component(-1)[k] - f.component(1)[k]) * s,
                        1 => (f.component(1)[k] + f.component(-1)[k])
                            * Complex64::new(0.0, s),
                        _ => f.component(0)[k],
                    };
                    assert!(
                        (cart - vel[k]).norm() < 1e-8,
                        "flow velocity mismatch axis {c} slot {k}: {cart} vs {}",
                        vel[k]
                    );
                }
            }
        }
    }

    #[test]
    fn adjoint_rotation_relates_the_frames() {
        let radius = 2.0;
        for q in points() {
            let left = killing_frame(&q, radius, Chirality::Left);
            let right = killing_frame(&q, radius, Chirality::Right);
            let m = adjoint_rotation(&q);
            // A_b = Σ_a W_ab·Ã_a: the row index contracts the right frame.
            for (bi, b) in [1i32, 0, -1].iter().enumerate() {
                for k in 0..4 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (ai, a) in [1i32, 0, -1].iter().enumerate() {
                        acc += m[ai][bi] * right.component(*a)[k];
                    }
                    let lhs = left.component(*b)[k];
                    assert!(
                        (lhs - acc).norm() < 1e-12,
                        "adjoint relation failed at b={b} slot {k}"
                    );
                }
            }
            // unitarity of M
            for r in 0..3 {
                for c in 0..3 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..3 {
                        acc += m[r][k] * m[c][k].conj();
                    }
                    let expect = if r == c { 1.0 } else { 0.0 };
                    assert!((acc - expect).norm() < 1e-12, "M unitarity");
                }
            }
        }
    }

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        let (x, w) = gauss_legendre(8);
        // degree-15 exactness: ∫ x^k on [-1,1]
        for k in 0..=15usize {
            let acc: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k as i32)).sum();
            let expect = if k % 2 == 0 {
                2.0 / ((k as f64) + 1.0)
            } else {
                0.0
            };
            assert_close(acc, expect, 1e-13, "GL moment");
        }
        let total: f64 = w.iter().sum();
        assert_close(total, 2.0, 1e-13, "GL weights sum to 2");
    }

    #[test]
    fn haar_grid_measures_the_group() {
        let g = haar_grid(6, 5, 12, 2.0);
        assert_eq!(g.len(), 6 * 5 * 12);
        let vol = 2.0 * PI * PI * 8.0; // 2π²R³ at R=2
        assert_close(g.total_weight(), vol, 1e-10, "grid volume");
        assert!(g.weights.iter().all(|&w| w > 0.0));
        assert_eq!(g.design_twice_spin(), 5);
        // R-scaling
        let g1 = haar_grid(4, 3, 8, 1.0);
        assert_close(g1.total_weight(), 2.0 * PI * PI, 1e-11, "unit volume");
    }

    #[test]
    fn sampler_is_deterministic_and_unit() {
        let mut s1 = HaarSampler::new(42);
        let mut s2 = HaarSampler::new(42);
        for _ in 0..10 {
            let a = s1.sample();
            let b = s2.sample();
            assert_eq!(a, b);
            assert_close(a.norm(), 1.0, 1e-12, "unit norm");
        }
        let mut s3 = HaarSampler::new(43);
        assert_ne!(s1.sample(), s3.sample());
    }
}
