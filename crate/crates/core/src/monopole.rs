//! Monopole-like form of the coset phase contribution.
//!
//! Two-parameter spherical-cap charts U(ϑ, φ) through an embedded su(2)
//! carry the parameter-space connection C^A_μ defined by
//! i U⁻¹ ∂_μ U = C^A_μ T_A, equivalently i U ∂_μ U⁻¹ = −C^A_μ u_A with
//! u_A = U T_A U⁻¹. On such single-valued charts the field strength
//! F^A_μν(C) vanishes, so Φ_q(U) of the boundary loop equals the flux
//! −(1/2d)∬ H^q_{12} dP₁dP₂ with H^q_μν = f_qBC C^B_μ C^C_ν, and the
//! weighted coset phase becomes a flux of the topological density
//! ⟨P_β, ∂₁P_β ∧ ∂₂P_β⟩ built from the Cartan frame fields alone.
//!
//! Orientation is (P₁, P₂) = (ϑ, φ) right-handed with the boundary
//! traversed in +φ; the overall sign of the density form is pinned by the
//! d = 2 benchmark (σ₁² − σ₂²)·Ω/2, under which the pointwise identity
//! reads ⟨P_β, ∂₁P_β ∧ ∂₂P_β⟩ = +β|_q H^q_{12} in these conventions.
//!
//! The chart is closed-form, so the stored grid carries three virtual rows
//! past the pole and the rim; field derivatives (U, P_β, n̂) use 4th-order
//! central stencils while the flatness residual differentiates C with
//! 2nd-order stencils, keeping its quadratic convergence contract visible.

use rayon::prelude::*;

use crate::algebra::AlgebraData;
use crate::error::{Error, Result};
use crate::evolution::{EvolutionPath, Profile, Side};
use crate::linalg::{cr, frobenius_dist, identity_c, CMat, RVec, I_C};
use crate::states::TwoQuditState;

/// Rows stored beyond each ϑ edge for central stencils.
const EXT: i64 = 3;

/// A spherical-cap chart (ϑ, φ) ∈ [0, θ_max]×[0, 2π) mapped into SU(d)
/// through the embedded su(2) of one positive root. Grid nodes at
/// ϑ_a = a·Δϑ (a = 0..n1) and φ_b = b·Δφ (b = 0..n2−1, periodic).
#[derive(Debug, Clone)]
pub struct CosetSurface {
    d: usize,
    i: usize,
    k: usize,
    theta_max: f64,
    n1: usize,
    n2: usize,
    /// rows a = −EXT ..= n1+EXT, row-major.
    u_ext: Vec<CMat>,
    boundary: EvolutionPath,
}

/// Per-node, per-direction connection coefficients C^A_μ, μ ∈ {ϑ, φ},
/// carried on rows −1..=n1+1 so the flatness stencils stay central.
#[derive(Debug, Clone)]
pub struct SurfaceConnection {
    n1: usize,
    n2: usize,
    c_theta: Vec<RVec>,
    c_phi: Vec<RVec>,
}

impl SurfaceConnection {
    fn idx(&self, a: i64, b: usize) -> usize {
        debug_assert!(a >= -1 && a <= self.n1 as i64 + 1);
        ((a + 1) as usize) * self.n2 + b
    }

    fn c_ext(&self, mu: usize, a: i64, b: usize) -> &RVec {
        let idx = self.idx(a, b);
        match mu {
            0 => &self.c_theta[idx],
            _ => &self.c_phi[idx],
        }
    }

    /// C^A_μ at a main grid node, μ = 0 for ϑ, 1 for φ.
    pub fn c(&self, mu: usize, a: usize, b: usize) -> &RVec {
        self.c_ext(mu, a as i64, b)
    }

    pub fn grid(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }
}

/// Build the cap chart. Grid must be at least 16×16 and θ_max in (0, π).
pub fn build_surface(
    algebra: &AlgebraData,
    root_index: usize,
    theta_max: f64,
    grid: (usize, usize),
) -> Result<CosetSurface> {
    let (n1, n2) = grid;
    if n1 < 16 || n2 < 16 {
        return Err(Error::DegenerateGrid { min: 16, n1, n2 });
    }
    if !(theta_max > 0.0 && theta_max < std::f64::consts::PI) {
        return Err(Error::InvalidInput(format!(
            "theta_max {theta_max} outside (0, pi)"
        )));
    }
    let root = algebra.root(root_index)?;
    let (i, k) = (root.i, root.k);
    let d = algebra.d();

    let h_t = theta_max / n1 as f64;
    let mut u_ext = Vec::with_capacity((n1 + 1 + 2 * EXT as usize) * n2);
    for a in -EXT..=(n1 as i64 + EXT) {
        let theta = h_t * a as f64;
        for b in 0..n2 {
            let phi = std::f64::consts::TAU * b as f64 / n2 as f64;
            u_ext.push(chart_value(d, i, k, theta, phi));
        }
    }

    let boundary = EvolutionPath::coset_loop_with_profile(
        algebra,
        root_index,
        theta_max,
        1.0,
        Profile::Linear,
        Side::First,
    )?;

    Ok(CosetSurface {
        d,
        i,
        k,
        theta_max,
        n1,
        n2,
        u_ext,
        boundary,
    })
}

fn chart_value(d: usize, i: usize, k: usize, theta: f64, phi: f64) -> CMat {
    let mut m = identity_c(d);
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    m[(i, i)] = cr(c);
    m[(k, k)] = cr(c);
    m[(i, k)] = num_complex::Complex64::from_polar(s, phi);
    m[(k, i)] = -num_complex::Complex64::from_polar(s, -phi);
    m
}

/// 4th-order central difference over five equally spaced values.
fn central4<T>(m2: T, m1: T, p1: T, p2: T, h: f64) -> T
where
    T: std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    (m2 - p2 + (p1 - m1) * 8.0) * (1.0 / (12.0 * h))
}

fn central4_mat(m2: &CMat, m1: &CMat, p1: &CMat, p2: &CMat, h: f64) -> CMat {
    (m2 - p2 + (p1 - m1) * cr(8.0)) * cr(1.0 / (12.0 * h))
}

impl CosetSurface {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    pub fn grid(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    /// Root pair (i, k) of the embedded su(2), 0-based.
    pub fn root_pair(&self) -> (usize, usize) {
        (self.i, self.k)
    }

    fn node_ext(&self, a: i64, b: usize) -> &CMat {
        let row = (a + EXT) as usize;
        &self.u_ext[row * self.n2 + (b % self.n2)]
    }

    /// U at a main grid node, a = 0..n1, b = 0..n2−1.
    pub fn node(&self, a: usize, b: usize) -> &CMat {
        self.node_ext(a as i64, b)
    }

    /// The induced boundary loop along ϑ = θ_max, azimuth linear in t.
    pub fn boundary_loop(&self) -> &EvolutionPath {
        &self.boundary
    }

    /// Chart value at arbitrary coordinates (closed form).
    pub fn value(&self, theta: f64, phi: f64) -> CMat {
        chart_value(self.d, self.i, self.k, theta, phi)
    }

    /// Analytic ∂U/∂ϑ.
    pub fn dtheta(&self, theta: f64, phi: f64) -> CMat {
        let mut m = CMat::zeros(self.d, self.d);
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        m[(self.i, self.i)] = cr(-s / 2.0);
        m[(self.k, self.k)] = cr(-s / 2.0);
        m[(self.i, self.k)] = num_complex::Complex64::from_polar(c / 2.0, phi);
        m[(self.k, self.i)] = -num_complex::Complex64::from_polar(c / 2.0, -phi);
        m
    }

    /// Analytic ∂U/∂φ.
    pub fn dphi(&self, theta: f64, phi: f64) -> CMat {
        let mut m = CMat::zeros(self.d, self.d);
        let s = (theta / 2.0).sin();
        m[(self.i, self.k)] = I_C * num_complex::Complex64::from_polar(s, phi);
        m[(self.k, self.i)] = I_C * num_complex::Complex64::from_polar(s, -phi);
        m
    }

    /// Worst Frobenius distance between neighboring main-grid nodes
    /// (single-valuedness diagnostic; must stay well under 0.2).
    pub fn continuity_gap(&self) -> f64 {
        let mut worst = 0.0_f64;
        for a in 0..=self.n1 {
            for b in 0..self.n2 {
                let here = self.node(a, b);
                if a < self.n1 {
                    worst = worst.max(frobenius_dist(here, self.node(a + 1, b)));
                }
                worst = worst.max(frobenius_dist(here, self.node(a, (b + 1) % self.n2)));
            }
        }
        worst
    }

    /// Check that a path's coset loop runs along this surface's rim:
    /// each path sample must match the chart at the azimuth read off the
    /// (i, k) entry. Mismatch → inconsistent-surface error.
    pub fn check_boundary(&self, path: &EvolutionPath) -> Result<()> {
        let curve = path
            .curve(Side::First)
            .or_else(|| path.curve(Side::Second))
            .ok_or_else(|| Error::InvalidInput("path drives no side".into()))?;
        let mut worst = 0.0_f64;
        for m in 0..=32 {
            let s = curve.value(m as f64 / 32.0);
            let phi = s[(self.i, self.k)].arg();
            let want = self.value(self.theta_max, phi);
            worst = worst.max(frobenius_dist(&s, &want));
        }
        if worst > 1e-8 {
            return Err(Error::InconsistentSurface { mismatch: worst });
        }
        Ok(())
    }

    fn h_theta(&self) -> f64 {
        self.theta_max / self.n1 as f64
    }

    fn h_phi(&self) -> f64 {
        std::f64::consts::TAU / self.n2 as f64
    }

    /// Grid derivative of U, 4th-order central; valid for a ∈ −1..=n1+1.
    fn du(&self, mu: usize, a: i64, b: usize) -> CMat {
        match mu {
            0 => central4_mat(
                self.node_ext(a - 2, b),
                self.node_ext(a - 1, b),
                self.node_ext(a + 1, b),
                self.node_ext(a + 2, b),
                self.h_theta(),
            ),
            _ => central4_mat(
                self.node_ext(a, b + self.n2 - 2),
                self.node_ext(a, b + self.n2 - 1),
                self.node_ext(a, b + 1),
                self.node_ext(a, b + 2),
                self.h_phi(),
            ),
        }
    }

    /// The grid connection C^A_μ from i U⁻¹ ∂_μ U = C^A_μ T_A with grid
    /// derivatives, on rows −1..=n1+1.
    pub fn connection(&self, algebra: &AlgebraData) -> SurfaceConnection {
        let rows: Vec<(Vec<RVec>, Vec<RVec>)> = (-1..=(self.n1 as i64 + 1))
            .into_par_iter()
            .map(|a| {
                let mut row_t = Vec::with_capacity(self.n2);
                let mut row_p = Vec::with_capacity(self.n2);
                for b in 0..self.n2 {
                    let u = self.node_ext(a, b);
                    for (mu, out) in [(0, &mut row_t), (1, &mut row_p)] {
                        let x = u.adjoint() * self.du(mu, a, b) * I_C;
                        let herm = (&x + x.adjoint()) * cr(0.5);
                        out.push(algebra.expand(&herm));
                    }
                }
                (row_t, row_p)
            })
            .collect();

        let mut c_theta = Vec::with_capacity((self.n1 + 3) * self.n2);
        let mut c_phi = Vec::with_capacity((self.n1 + 3) * self.n2);
        for (t, p) in rows {
            c_theta.extend(t);
            c_phi.extend(p);
        }
        SurfaceConnection {
            n1: self.n1,
            n2: self.n2,
            c_theta,
            c_phi,
        }
    }

    /// Composite Simpson (even n1; trapezoid otherwise) in ϑ × periodic sum
    /// in φ of a per-node integrand on the main grid; deterministic
    /// summation order.
    fn integrate(&self, f: impl Fn(usize, usize) -> f64 + Sync) -> f64 {
        let simpson = self.n1 % 2 == 0;
        let rows: Vec<f64> = (0..=self.n1)
            .into_par_iter()
            .map(|a| {
                let row: f64 = (0..self.n2).map(|b| f(a, b)).sum();
                let w = if simpson {
                    if a == 0 || a == self.n1 {
                        1.0 / 3.0
                    } else if a % 2 == 1 {
                        4.0 / 3.0
                    } else {
                        2.0 / 3.0
                    }
                } else if a == 0 || a == self.n1 {
                    0.5
                } else {
                    1.0
                };
                w * row
            })
            .collect();
        rows.iter().sum::<f64>() * self.h_theta() * self.h_phi()
    }
}

/// Max over nodes and A of |∂_ϑ C^A_φ − ∂_φ C^A_ϑ + f_ABC C^B_ϑ C^C_φ|.
/// The C derivatives use 2nd-order central stencils, so the residual decays
/// quadratically under grid refinement (F(C) = 0 in the continuum).
pub fn flatness_residual(surface: &CosetSurface, algebra: &AlgebraData) -> f64 {
    let conn = surface.connection(algebra);
    let (n1, n2) = (surface.n1, surface.n2);
    let h_t = surface.h_theta();
    let h_p = surface.h_phi();
    let f = algebra.structure_constants();
    let n = algebra.dim();

    (0..=n1 as i64)
        .into_par_iter()
        .map(|a| {
            let mut worst = 0.0_f64;
            for b in 0..n2 {
                let d_t_cphi: RVec =
                    (conn.c_ext(1, a + 1, b) - conn.c_ext(1, a - 1, b)) / (2.0 * h_t);
                let prev = (b + n2 - 1) % n2;
                let next = (b + 1) % n2;
                let d_p_ctheta: RVec =
                    (conn.c_ext(0, a, next) - conn.c_ext(0, a, prev)) / (2.0 * h_p);

                let ct = conn.c_ext(0, a, b);
                let cp = conn.c_ext(1, a, b);
                for aa in 0..n {
                    let fc = f.contract_bilinear(aa, ct, cp);
                    let val = (d_t_cphi[aa] - d_p_ctheta[aa] + fc).abs();
                    worst = worst.max(val);
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// Φ_q(U) as a flux: −(1/2d) ∬ H^q_{12} dϑ dφ with H^q_{12} = f_qBC C^B_ϑ C^C_φ.
/// q is the 1-based Cartan label.
pub fn coset_flux(surface: &CosetSurface, algebra: &AlgebraData, q: usize) -> Result<f64> {
    if q == 0 || q >= surface.d {
        return Err(Error::IndexOutOfRange {
            index: q,
            max: surface.d - 1,
        });
    }
    let conn = surface.connection(algebra);
    let f = algebra.structure_constants();
    let total = surface.integrate(|a, b| {
        f.contract_bilinear(q - 1, conn.c(0, a, b), conn.c(1, a, b))
    });
    Ok(-total / (2.0 * surface.d as f64))
}

/// All Φ_q(U) fluxes at once (shares one connection pass).
pub fn coset_fluxes(surface: &CosetSurface, algebra: &AlgebraData) -> Vec<f64> {
    let conn = surface.connection(algebra);
    let f = algebra.structure_constants();
    (0..surface.d - 1)
        .map(|q| {
            let total = surface.integrate(|a, b| {
                f.contract_bilinear(q, conn.c(0, a, b), conn.c(1, a, b))
            });
            -total / (2.0 * surface.d as f64)
        })
        .collect()
}

/// ∬ ⟨P_β, ∂₁P_β ∧ ∂₂P_β⟩ dϑ dφ computed directly from the Cartan frame
/// fields P_β = U (β·T) U⁻¹, with X ∧ Y = −i[X, Y] and the metric evaluated
/// by component expansion. Equals −β|_q · 2d · coset_flux_q summed over q.
pub fn topological_density_flux(
    surface: &CosetSurface,
    algebra: &AlgebraData,
    beta: &RVec,
) -> f64 {
    let (n1, n2) = (surface.n1 as i64, surface.n2);
    let bt = algebra.cartan_contract(beta);
    // P on rows −2..=n1+2 for the 4th-order ϑ stencils
    let bt_ref = &bt;
    let p: Vec<CMat> = (-2..=(n1 + 2))
        .into_par_iter()
        .flat_map_iter(|a| {
            (0..n2).map(move |b| {
                let u = surface.node_ext(a, b);
                u * bt_ref * u.adjoint()
            })
        })
        .collect();
    let node = |a: i64, b: usize| -> &CMat { &p[((a + 2) as usize) * n2 + (b % n2)] };
    let h_t = surface.h_theta();
    let h_p = surface.h_phi();

    surface.integrate(|a, b| {
        let a = a as i64;
        let dp_t = central4_mat(node(a - 2, b), node(a - 1, b), node(a + 1, b), node(a + 2, b), h_t);
        let dp_p = central4_mat(
            node(a, b + n2 - 2),
            node(a, b + n2 - 1),
            node(a, b + 1),
            node(a, b + 2),
            h_p,
        );
        let wedge = crate::linalg::commutator(&dp_t, &dp_p) * (-I_C);
        algebra.expand(node(a, b)).dot(&algebra.expand(&wedge))
    })
}

/// The monopole-like form of the coset phase contribution
/// Σ_j σ_j² β_j|_q Φ_q(U), evaluated as a weighted flux of the topological
/// densities; the overall sign is the orientation pinned by the d = 2
/// benchmark (σ₁² − σ₂²)·Ω/2. `evolution`, when given, must run along the
/// surface's rim (inconsistent-surface error otherwise).
pub fn coset_phase_via_monopole(
    state: &TwoQuditState,
    surface: &CosetSurface,
    algebra: &AlgebraData,
    evolution: Option<&EvolutionPath>,
) -> Result<f64> {
    if state.d() != surface.d {
        return Err(Error::DimensionMismatch {
            expected: surface.d,
            got: state.d(),
        });
    }
    if let Some(path) = evolution {
        surface.check_boundary(path)?;
    }
    let sigma = state.schmidt()?.sigma;
    let d = surface.d;
    let mut total = 0.0;
    for j in 1..=d {
        let beta = algebra.magnetic_weight(j)?;
        let flux = topological_density_flux(surface, algebra, &beta);
        total += sigma[j - 1] * sigma[j - 1] * flux;
    }
    Ok(-total / (2.0 * d as f64))
}

/// Line-integral oracle Φ_q(U) = i ∮ Tr(T_q U⁻¹ ∂φU) dφ along the rim,
/// using the chart's analytic azimuthal derivative.
pub fn boundary_phi_q(surface: &CosetSurface, algebra: &AlgebraData) -> Vec<f64> {
    let d = surface.d;
    let n = 4096;
    let h = std::f64::consts::TAU / n as f64;
    let mut sums = vec![0.0; d - 1];
    for m in 0..n {
        let phi = m as f64 * h;
        let u = surface.value(surface.theta_max, phi);
        let du = surface.dphi(surface.theta_max, phi);
        let x = u.adjoint() * du;
        for q in 0..d - 1 {
            let tq = algebra.cartan(q + 1).expect("q in range");
            // i Tr(T_q U⁻¹ ∂φU): real part of i·tr = −Im tr
            sums[q] += -(tq * &x).diagonal().iter().map(|z| z.im).sum::<f64>();
        }
    }
    sums.iter_mut().for_each(|s| *s *= h);
    sums
}

/// Half the flux of the pullback density n̂·(∂ϑ n̂ × ∂φ n̂) for a d = 2 cap,
/// with n̂ read off U σ₃ U⁻¹ = n̂·σ. This chart's n̂ image is mirror-oriented
/// (n̂ = (−sinϑ cosφ, +sinϑ sinφ, cosϑ)), so the flux form carries the
/// compensating sign fixed by the d = 2 line-integral benchmark; the result
/// is π(1 − cos θ_max).
pub fn qubit_solid_angle(surface: &CosetSurface) -> Result<f64> {
    if surface.d != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: surface.d,
        });
    }
    let n2 = surface.n2;
    let n1 = surface.n1 as i64;
    let sigma3 = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![cr(1.0), cr(-1.0)]));
    let bloch = |u: &CMat| -> Vec3 {
        let m = u * &sigma3 * u.adjoint();
        Vec3([
            (m[(0, 1)].re + m[(1, 0)].re) / 2.0,
            (m[(1, 0)].im - m[(0, 1)].im) / 2.0,
            (m[(0, 0)].re - m[(1, 1)].re) / 2.0,
        ])
    };
    let ns: Vec<Vec3> = (-2..=(n1 + 2))
        .flat_map(|a| (0..n2).map(move |b| (a, b)))
        .map(|(a, b)| bloch(surface.node_ext(a, b)))
        .collect();
    let node = move |a: i64, b: usize| ns[((a + 2) as usize) * n2 + (b % n2)];
    let h_t = surface.h_theta();
    let h_p = surface.h_phi();

    let total = surface.integrate(|a, b| {
        let a = a as i64;
        let dn_t = central4(
            node(a - 2, b),
            node(a - 1, b),
            node(a + 1, b),
            node(a + 2, b),
            h_t,
        );
        let dn_p = central4(
            node(a, b + n2 - 2),
            node(a, b + n2 - 1),
            node(a, b + 1),
            node(a, b + 2),
            h_p,
        );
        node(a, b).dot(&dn_t.cross(&dn_p))
    });
    Ok(-total / 2.0)
}

#[derive(Debug, Clone, Copy)]
struct Vec3([f64; 3]);

impl Vec3 {
    fn dot(&self, o: &Vec3) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    fn cross(&self, o: &Vec3) -> Vec3 {
        Vec3([
            self.0[1] * o.0[2] - self.0[2] * o.0[1],
            self.0[2] * o.0[0] - self.0[0] * o.0[2],
            self.0[0] * o.0[1] - self.0[1] * o.0[0],
        ])
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl std::ops::Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}
