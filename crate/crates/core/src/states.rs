//! Two-qudit pure states as d×d coefficient matrices.
//!
//! A state |ψ⟩ = Σ α_ij |ij⟩ is stored through its coefficient matrix α
//! with Tr(α†α) = 1. Local-unitary invariants I_p = Tr[(α†α)^p], the
//! I-concurrence, the SU(d)-constrained singular value decomposition
//! α = e^{iφ} S₁ Σ S₂ᵀ, the polar form α = e^{iφ} Q S_m, and the
//! deformation retract F(y, s) onto maximally entangled states live here.

use crate::algebra::AlgebraData;
use crate::error::{Error, Result};
use crate::linalg::{cr, eigh, frobenius_norm, svd_desc, CMat, RVec};
use num_complex::Complex64;

/// Relative threshold on σ_min/σ_max below which a state is treated as
/// rank-deficient for operations that need log Q.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// A normalized two-qudit pure state.
#[derive(Debug, Clone)]
pub struct TwoQuditState {
    d: usize,
    coeffs: CMat,
    normalization: f64,
}

/// The SU(d)-constrained singular value decomposition
/// α = e^{iφ} S₁ diag(σ) S₂ᵀ with det S₁ = det S₂ = 1 and σ descending,
/// together with the polar factors Q = S₁ Σ S₁† and S_m = S₁ S₂ᵀ.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub phi: f64,
    pub s1: CMat,
    pub s2: CMat,
    pub sigma: RVec,
    pub q: CMat,
    pub sm: CMat,
}

impl TwoQuditState {
    /// Normalize a coefficient matrix into a state. The applied
    /// normalization factor (the Frobenius norm of the input) is recorded.
    pub fn new(coeffs: CMat) -> Result<Self> {
        if coeffs.nrows() != coeffs.ncols() {
            return Err(Error::NotSquare {
                rows: coeffs.nrows(),
                cols: coeffs.ncols(),
            });
        }
        let d = coeffs.nrows();
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        let norm = frobenius_norm(&coeffs);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::DegenerateState);
        }
        Ok(Self {
            d,
            coeffs: coeffs / cr(norm),
            normalization: norm,
        })
    }

    /// Maximally entangled state α = S_m/√d; `None` picks S_m = I.
    pub fn maximally_entangled(d: usize, sm: Option<&CMat>) -> Result<Self> {
        let m = match sm {
            Some(s) => s.clone(),
            None => CMat::identity(d, d),
        };
        Self::new(m)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coeffs(&self) -> &CMat {
        &self.coeffs
    }

    /// Frobenius norm of the matrix the state was built from.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// ⟨self|other⟩ = Tr(α† β).
    pub fn overlap(&self, other: &Self) -> Complex64 {
        crate::linalg::hs_inner(&self.coeffs, &other.coeffs)
    }

    /// I_p = Tr[(α†α)^p].
    pub fn invariant(&self, p: usize) -> f64 {
        let b = self.coeffs.adjoint() * &self.coeffs;
        let mut acc = b.clone();
        for _ in 1..p {
            acc *= &b;
        }
        acc.diagonal().iter().map(|z| z.re).sum()
    }

    /// I-concurrence 𝒞 = √(2(1 − I₂)), clamped against roundoff.
    pub fn concurrence(&self) -> f64 {
        (2.0 * (1.0 - self.invariant(2))).max(0.0).sqrt()
    }

    /// Maximal concurrence 𝒞_m = √(2(d−1)/d) at this dimension.
    pub fn max_concurrence(&self) -> f64 {
        max_concurrence(self.d)
    }

    /// b_q = 2d · Tr(T_q Σ²), the Cartan components of Σ² − I/d.
    pub fn b_vector(&self, algebra: &AlgebraData) -> Result<RVec> {
        if algebra.d() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: algebra.d(),
            });
        }
        let sigma = self.schmidt()?.sigma;
        let two_d = 2.0 * self.d as f64;
        Ok(RVec::from_iterator(
            self.d - 1,
            (1..self.d).map(|q| {
                let t = algebra.cartan(q).expect("q in range");
                two_d
                    * (0..self.d)
                        .map(|i| t[(i, i)].re * sigma[i] * sigma[i])
                        .sum::<f64>()
            }),
        ))
    }

    /// The SU(d)-constrained SVD. Column phases are first fixed by making
    /// the largest-magnitude entry of each left singular vector real
    /// positive; the residual U(1) determinants are then split off through
    /// principal d-th roots, which defines φ.
    pub fn schmidt(&self) -> Result<SchmidtDecomposition> {
        let d = self.d;
        let (mut u, sigma, mut v) = svd_desc(&self.coeffs);

        for j in 0..d {
            let col = u.column(j);
            let pivot = (0..d)
                .max_by(|&a, &b| col[a].norm().partial_cmp(&col[b].norm()).unwrap())
                .unwrap();
            let z = col[pivot];
            if z.norm() > 0.0 {
                let phase = (z / z.norm()).conj();
                for i in 0..d {
                    u[(i, j)] *= phase;
                    v[(i, j)] *= phase;
                }
            }
        }

        let arg_u = u.determinant().arg();
        let arg_v = v.determinant().arg();
        let s1 = &u * Complex64::from_polar(1.0, -arg_u / d as f64);
        // S₂ᵀ = e^{iw/d} V† with e^{iw} = det V, so S₂ = e^{iw/d} conj(V)
        let s2 = v.conjugate() * Complex64::from_polar(1.0, arg_v / d as f64);
        let phi = (arg_u - arg_v) / d as f64;

        let diag = CMat::from_diagonal(&sigma.map(cr));
        let q = &s1 * &diag * s1.adjoint();
        let sm = &s1 * s2.transpose();

        Ok(SchmidtDecomposition {
            phi,
            s1,
            s2,
            sigma,
            q,
            sm,
        })
    }

    /// The deformation retract F(y, s): interpolates the polar factor
    /// Q(s) = (det Q)^{(1−s)/d} d^{−s/2} e^{(1−s)M} with Q = (det Q)^{1/d} e^M,
    /// normalized. Needs a rank-d state; s ∈ [0, 1].
    pub fn retract(&self, s: f64) -> Result<TwoQuditState> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidInput(format!("s = {s} outside [0, 1]")));
        }
        let d = self.d;
        let dec = self.schmidt()?;
        let sig = &dec.sigma;
        if sig[d - 1] <= RANK_TOLERANCE * sig[0] {
            return Err(Error::RankDeficient {
                ratio: sig[d - 1] / sig[0],
            });
        }
        let m = crate::linalg::log_hpd_traceless(&dec.q, RANK_TOLERANCE)?;
        let log_det_q: f64 = sig.iter().map(|x| x.ln()).sum();

        let (vals, vecs) = eigh(&m);
        let scale = ((1.0 - s) / d as f64) * log_det_q - (s / 2.0) * (d as f64).ln();
        let qs = &vecs
            * CMat::from_diagonal(&vals.map(|l| cr(((1.0 - s) * l + scale).exp())))
            * vecs.adjoint();
        TwoQuditState::new(qs * &dec.sm)
    }
}

/// 𝒞_m = √(2(d−1)/d).
pub fn max_concurrence(d: usize) -> f64 {
    (2.0 * (d as f64 - 1.0) / d as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::build_algebra;
    use crate::linalg::{frobenius_dist, identity_c, unitarity_deviation};
    use crate::sample;
    use rand::Rng;

    fn state_from(rows: &[&[(f64, f64)]]) -> TwoQuditState {
        let d = rows.len();
        let m = CMat::from_fn(d, d, |i, j| Complex64::new(rows[i][j].0, rows[i][j].1));
        TwoQuditState::new(m).unwrap()
    }

    #[test]
    fn make_state_normalizes_and_records_factor() {
        let st = TwoQuditState::new(identity_c(2)).unwrap();
        assert!((st.normalization() - 2.0_f64.sqrt()).abs() < 1e-15);
        assert!((st.coeffs()[(0, 0)].re - 1.0 / 2.0_f64.sqrt()).abs() < 1e-15);
        assert!((st.invariant(1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn make_state_rejects_bad_input() {
        assert!(matches!(
            TwoQuditState::new(CMat::zeros(2, 2)),
            Err(Error::DegenerateState)
        ));
        assert!(matches!(
            TwoQuditState::new(CMat::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
        assert!(matches!(
            TwoQuditState::new(CMat::from_element(1, 1, cr(1.0))),
            Err(Error::InvalidDimension(1))
        ));
    }

    #[test]
    fn separable_corner_state() {
        let mut m = CMat::zeros(3, 3);
        m[(0, 0)] = cr(1.0);
        let st = TwoQuditState::new(m).unwrap();
        assert!((st.invariant(2) - 1.0).abs() < 1e-14);
        assert!(st.concurrence() < 1e-9);
        for p in 1..=4 {
            assert!((st.invariant(p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mes_invariants() {
        for d in 2..=5 {
            let st = TwoQuditState::maximally_entangled(d, None).unwrap();
            for p in 1..=d {
                let want = 1.0 / (d as f64).powi(p as i32 - 1);
                assert!((st.invariant(p) - want).abs() < 1e-12, "d={d} p={p}");
            }
            assert!((st.concurrence() - max_concurrence(d)).abs() < 1e-12);
        }
        // d=3 MES concurrence = √(4/3)
        let st = TwoQuditState::maximally_entangled(3, None).unwrap();
        assert!((st.concurrence() - (4.0_f64 / 3.0).sqrt()).abs() < 1e-12);
        // d=2 MES concurrence = 1 = C_m
        let st2 = TwoQuditState::maximally_entangled(2, None).unwrap();
        assert!((st2.concurrence() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_21_state() {
        let st = state_from(&[&[(2.0, 0.0), (0.0, 0.0)], &[(0.0, 0.0), (1.0, 0.0)]]);
        let dec = st.schmidt().unwrap();
        let r5 = 5.0_f64.sqrt();
        assert!((dec.sigma[0] - 2.0 / r5).abs() < 1e-14);
        assert!((dec.sigma[1] - 1.0 / r5).abs() < 1e-14);
        // I₂ = 16/25 + 1/25 = 17/25
        assert!((st.invariant(2) - 17.0 / 25.0).abs() < 1e-14);
        // already in canonical form: φ = 0, S₁ = S₂ = I admissible
        assert!(dec.phi.abs() < 1e-12);
        assert!(frobenius_dist(&dec.s1, &identity_c(2)) < 1e-12);
        assert!(frobenius_dist(&dec.s2, &identity_c(2)) < 1e-12);
    }

    #[test]
    fn invariant_two_routes_agree() {
        let mut rng = sample::rng_from_seed(11);
        for d in 2..=4 {
            for _ in 0..20 {
                let st = sample::random_state(d, &mut rng);
                let sigma = st.schmidt().unwrap().sigma;
                for p in 1..=d {
                    let via_sigma: f64 =
                        sigma.iter().map(|s| (s * s).powi(p as i32)).sum();
                    assert!((st.invariant(p) - via_sigma).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn schmidt_reconstruction_property() {
        let mut rng = sample::rng_from_seed(12);
        for d in 2..=5 {
            for _ in 0..250 {
                let st = sample::random_state(d, &mut rng);
                let dec = st.schmidt().unwrap();
                let diag = CMat::from_diagonal(&dec.sigma.map(cr));
                let rec = &dec.s1 * &diag * dec.s2.transpose()
                    * Complex64::from_polar(1.0, dec.phi);
                assert!(frobenius_dist(&rec, st.coeffs()) < 1e-9);

                assert!((dec.s1.determinant() - cr(1.0)).norm() < 1e-10);
                assert!((dec.s2.determinant() - cr(1.0)).norm() < 1e-10);
                assert!(unitarity_deviation(&dec.s1) < 1e-10);
                assert!(unitarity_deviation(&dec.s2) < 1e-10);
                for i in 1..d {
                    assert!(dec.sigma[i] <= dec.sigma[i - 1] + 1e-14);
                }
                let sum_sq: f64 = dec.sigma.iter().map(|s| s * s).sum();
                assert!((sum_sq - 1.0).abs() < 1e-10);

                // polar route: e^{iφ} Q S_m = α
                let polar = &dec.q * &dec.sm * Complex64::from_polar(1.0, dec.phi);
                assert!(frobenius_dist(&polar, st.coeffs()) < 1e-9);
                assert!(frobenius_dist(&dec.q.adjoint(), &dec.q) < 1e-10);
            }
        }
    }

    #[test]
    fn mes_schmidt_is_flat() {
        let st = TwoQuditState::maximally_entangled(3, None).unwrap();
        let dec = st.schmidt().unwrap();
        for i in 0..3 {
            assert!((dec.sigma[i] - 1.0 / 3.0_f64.sqrt()).abs() < 1e-12);
        }
        assert!(frobenius_dist(&dec.q, &(identity_c(3) * cr(1.0 / 3.0_f64.sqrt()))) < 1e-10);
    }

    #[test]
    fn b_vector_routes() {
        let alg2 = build_algebra(2).unwrap();
        // separable σ = (1, 0): b₁ = β₁|₁ = √2, ‖b‖ = √(d(C_m² − C²)) = √2
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = cr(1.0);
        let sep = TwoQuditState::new(m).unwrap();
        let b = sep.b_vector(&alg2).unwrap();
        assert!((b[0] - 2.0_f64.sqrt()).abs() < 1e-12);
        assert!((b.norm() - 2.0_f64.sqrt()).abs() < 1e-8);

        // MES → b = 0
        let mes = TwoQuditState::maximally_entangled(4, None).unwrap();
        let alg4 = build_algebra(4).unwrap();
        assert!(mes.b_vector(&alg4).unwrap().norm() < 1e-10);

        // d=3, σ² = (1/2, 1/2, 0): b = (β₁ + β₂)/2 = −β₃/2
        let alg3 = build_algebra(3).unwrap();
        let mut m3 = CMat::zeros(3, 3);
        m3[(0, 0)] = cr(1.0);
        m3[(1, 1)] = cr(1.0);
        let st3 = TwoQuditState::new(m3).unwrap();
        let b3 = st3.b_vector(&alg3).unwrap();
        let want = alg3.magnetic_weight(3).unwrap() * -0.5;
        assert!((b3 - want).norm() < 1e-12);

        // dimension mismatch
        assert!(matches!(
            sep.b_vector(&alg3),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn b_vector_weight_route_and_norm_identity() {
        let mut rng = sample::rng_from_seed(13);
        for d in 2..=4 {
            let alg = build_algebra(d).unwrap();
            let betas = alg.magnetic_weights();
            for _ in 0..10 {
                let st = sample::random_state(d, &mut rng);
                let b = st.b_vector(&alg).unwrap();
                let sigma = st.schmidt().unwrap().sigma;
                let mut via_weights = RVec::zeros(d - 1);
                for i in 0..d {
                    via_weights += &betas[i] * (sigma[i] * sigma[i]);
                }
                assert!((&b - &via_weights).norm() < 1e-9);

                let c = st.concurrence();
                let cm = max_concurrence(d);
                let want = (d as f64 * (cm * cm - c * c)).max(0.0).sqrt();
                assert!((b.norm() - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn local_unitary_invariance() {
        let mut rng = sample::rng_from_seed(14);
        for d in 2..=4 {
            for _ in 0..10 {
                let st = sample::random_state(d, &mut rng);
                let s1 = sample::random_su(d, &mut rng);
                let s2 = sample::random_su(d, &mut rng);
                let phase = Complex64::from_polar(1.0, rng.random::<f64>());
                let moved =
                    TwoQuditState::new(&s1 * st.coeffs() * s2.transpose() * phase).unwrap();
                for p in 1..=d {
                    assert!((st.invariant(p) - moved.invariant(p)).abs() < 1e-9);
                }
                assert!((st.concurrence() - moved.concurrence()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn newton_identity_closure() {
        // I_{d+1} from I₁..I_d via Newton's identities on x_i = σ_i²
        let mut rng = sample::rng_from_seed(15);
        for d in 2..=3 {
            for _ in 0..20 {
                let st = sample::random_state(d, &mut rng);
                let p: Vec<f64> = (1..=d + 1).map(|k| st.invariant(k)).collect();
                let direct = p[d];
                let predicted = match d {
                    2 => {
                        let e1 = p[0];
                        let e2 = (e1 * p[0] - p[1]) / 2.0;
                        e1 * p[1] - e2 * p[0]
                    }
                    3 => {
                        let e1 = p[0];
                        let e2 = (e1 * p[0] - p[1]) / 2.0;
                        let e3 = (e2 * p[0] - e1 * p[1] + p[2]) / 3.0;
                        e1 * p[2] - e2 * p[1] + e3 * p[0]
                    }
                    _ => unreachable!(),
                };
                assert!((direct - predicted).abs() < 1e-8, "d={d}");
            }
        }
    }

    #[test]
    fn retract_endpoints() {
        let mut rng = sample::rng_from_seed(16);
        for d in 2..=3 {
            for _ in 0..10 {
                let st = sample::random_rank_d_state(d, 0.05, &mut rng);
                // s = 0: same ray
                let back = st.retract(0.0).unwrap();
                assert!((st.overlap(&back).norm() - 1.0).abs() < 1e-9);
                // s = 1: maximally entangled
                let flat = st.retract(1.0).unwrap();
                assert!((flat.concurrence() - max_concurrence(d)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn retract_fixes_mes() {
        let mut rng = sample::rng_from_seed(17);
        let sm = sample::random_su(3, &mut rng);
        let mes = TwoQuditState::maximally_entangled(3, Some(&sm)).unwrap();
        for s in [0.0, 0.25, 0.5, 1.0] {
            let out = mes.retract(s).unwrap();
            // fixed point as a ray: F(a, s) = d^{−1/2} S_m = a
            assert!((mes.overlap(&out).norm() - 1.0).abs() < 1e-10, "s={s}");
        }
        // a positive diagonal MES is fixed exactly (φ = 0 in its SVD)
        let flat = TwoQuditState::maximally_entangled(3, None).unwrap();
        let out = flat.retract(0.5).unwrap();
        assert!(frobenius_dist(out.coeffs(), flat.coeffs()) < 1e-10);
    }

    #[test]
    fn retract_rejects_rank_deficient_and_bad_s() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = cr(1.0);
        let sep = TwoQuditState::new(m).unwrap();
        assert!(matches!(sep.retract(0.5), Err(Error::RankDeficient { .. })));
        let mes = TwoQuditState::maximally_entangled(2, None).unwrap();
        assert!(mes.retract(1.5).is_err());
    }

    #[test]
    fn concurrence_monotone_under_retraction() {
        let mut rng = sample::rng_from_seed(18);
        for d in 2..=3 {
            for _ in 0..5 {
                let st = sample::random_rank_d_state(d, 0.05, &mut rng);
                let mut last = -1.0;
                for j in 0..10 {
                    let s = j as f64 / 9.0;
                    let c = st.retract(s).unwrap().concurrence();
                    assert!(c >= last - 1e-9, "non-decreasing, d={d} s={s}");
                    last = c;
                }
            }
        }
    }
}
