//! Computable topological witnesses: center-element classes, the adjoint
//! image R(S), projective equivalence of states, and verification of the
//! deformation retract onto the maximally entangled set.

use num_complex::Complex64;

use crate::algebra::AlgebraData;
use crate::error::{Error, Result};
use crate::linalg::{frobenius_dist, frobenius_norm, unitarity_deviation, CMat, RMat};
use crate::states::TwoQuditState;

/// A center element e^{2πiz/d} I of SU(d).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CenterClass {
    pub d: usize,
    /// Canonical label in 0..d−1.
    pub z: i64,
}

impl CenterClass {
    pub fn new(d: usize, z: i64) -> Self {
        Self {
            d,
            z: z.rem_euclid(d as i64),
        }
    }

    /// e^{2πiz/d}.
    pub fn phase(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.angle())
    }

    /// 2πz/d for the canonical label.
    pub fn angle(&self) -> f64 {
        std::f64::consts::TAU * self.z as f64 / self.d as f64
    }

    /// Signed representative in (−d/2, d/2], matching angles in (−π, π].
    pub fn signed(&self) -> i64 {
        crate::phase::signed_center_label(self.z, self.d)
    }
}

/// Are two states the same ray, b = e^{if} a? Returns the recovered phase
/// f (from the largest-magnitude coefficient of a) when they are.
pub fn projective_equivalent(
    a: &TwoQuditState,
    b: &TwoQuditState,
) -> Result<(bool, Option<f64>)> {
    if a.d() != b.d() {
        return Err(Error::DimensionMismatch {
            expected: a.d(),
            got: b.d(),
        });
    }
    let ca = a.coeffs();
    let cb = b.coeffs();
    let mut pivot = (0, 0);
    let mut best = 0.0;
    for i in 0..a.d() {
        for j in 0..a.d() {
            let m = ca[(i, j)].norm();
            if m > best {
                best = m;
                pivot = (i, j);
            }
        }
    }
    let f = (cb[pivot] / ca[pivot]).arg();
    let residual = frobenius_dist(cb, &(ca * Complex64::from_polar(1.0, f)));
    if residual < 1e-8 {
        Ok((true, Some(f)))
    } else {
        Ok((false, None))
    }
}

/// The adjoint image R(S) with R_AB = 2d·Tr(T_A S T_B S⁻¹): a real
/// orthogonal (d²−1)×(d²−1) matrix, invariant under S → e^{2πiz/d} S.
pub fn adjoint_image(algebra: &AlgebraData, s: &CMat) -> Result<RMat> {
    let d = algebra.d();
    if s.nrows() != d || s.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: s.nrows(),
        });
    }
    let udev = unitarity_deviation(s);
    if udev > 1e-8 {
        return Err(Error::NonUnitary { deviation: udev });
    }
    let det_dev = (s.determinant() - Complex64::new(1.0, 0.0)).norm();
    if det_dev > 1e-8 {
        return Err(Error::NonUnimodular { deviation: det_dev });
    }
    let n = algebra.dim();
    let sdag = s.adjoint();
    let mut r = RMat::zeros(n, n);
    for b in 0..n {
        let rotated = s * algebra.generator(b) * &sdag;
        let col = algebra.expand(&rotated);
        r.set_column(b, &col);
    }
    Ok(r)
}

/// Outcome of the deformation-retract verification on one state.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RetractionReport {
    /// |1 − |⟨y|F(y,0)⟩||: F(y,0) reproduces the input ray.
    pub start_residual: f64,
    /// max_i |σ_i(F(y,1)) − d^{−1/2}|: F(y,1) is maximally entangled.
    pub end_mes_residual: f64,
    /// max_s ‖F(a,s) − a‖ for the MES obtained at s = 1 re-fed as input.
    pub mes_fixed_point_residual: f64,
    /// max_s ray-distance between F(y,s) and F(e^{if}y, s).
    pub equivalence_residual: f64,
    pub grid: Vec<f64>,
}

impl RetractionReport {
    pub fn worst(&self) -> f64 {
        self.start_residual
            .max(self.end_mes_residual)
            .max(self.mes_fixed_point_residual)
            .max(self.equivalence_residual)
    }
}

/// Check F(y,0) ~ y, F(y,1) ∈ MES, F(a,s) = a for MES a, and that
/// equivalent inputs stay equivalent at every s of the grid.
pub fn verify_retraction(state: &TwoQuditState, grid_s: &[f64]) -> Result<RetractionReport> {
    let d = state.d();
    let root_d = 1.0 / (d as f64).sqrt();

    let back = state.retract(0.0)?;
    let start_residual = (1.0 - state.overlap(&back).norm()).abs();

    let flat = state.retract(1.0)?;
    let flat_sigma = flat.schmidt()?.sigma;
    let end_mes_residual = flat_sigma
        .iter()
        .map(|s| (s - root_d).abs())
        .fold(0.0, f64::max);

    let mut mes_fixed_point_residual = 0.0_f64;
    let mut equivalence_residual = 0.0_f64;
    let phase = Complex64::from_polar(1.0, std::f64::consts::TAU / d as f64);
    let shifted = TwoQuditState::new(state.coeffs() * phase)?;
    // rays are compared after aligning the recovered relative phase
    let ray_dist = |a: &TwoQuditState, b: &TwoQuditState| -> f64 {
        let ov = a.overlap(b);
        frobenius_norm(&(b.coeffs() - a.coeffs() * (ov / ov.norm().max(1e-300))))
    };
    for &s in grid_s {
        let fixed = flat.retract(s)?;
        mes_fixed_point_residual = mes_fixed_point_residual.max(ray_dist(&flat, &fixed));

        let a = state.retract(s)?;
        let b = shifted.retract(s)?;
        equivalence_residual = equivalence_residual.max(ray_dist(&a, &b));
    }

    Ok(RetractionReport {
        start_residual,
        end_mes_residual,
        mes_fixed_point_residual,
        equivalence_residual,
        grid: grid_s.to_vec(),
    })
}
