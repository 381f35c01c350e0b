//! Seeded random states, unitaries and spectra for the verification suites.
//!
//! Everything here is deterministic for a fixed seed, so randomized test
//! sweeps and the CLI `verify-all` command are reproducible.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::algebra::AlgebraData;
use crate::evolution::{Amplitude, EvolutionPath, ExpFactor, Profile, Side};
use crate::linalg::{cr, CMat, RVec};
use crate::states::TwoQuditState;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; good enough for Ginibre sampling
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn random_complex_matrix(d: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(d, d, |_, _| {
        Complex64::new(standard_normal(rng), standard_normal(rng))
    })
}

pub fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = random_complex_matrix(d, rng);
    (&g + g.adjoint()) * cr(0.5)
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the phase
/// convention fixed by the R diagonal.
pub fn random_unitary(d: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = random_complex_matrix(d, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        if rjj.norm() > 0.0 {
            let phase = rjj / rjj.norm();
            for i in 0..d {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Haar-ish SU(d) element: random unitary with the determinant phase
/// divided out through the principal d-th root.
pub fn random_su(d: usize, rng: &mut ChaCha8Rng) -> CMat {
    let u = random_unitary(d, rng);
    let det = u.determinant();
    let corr = Complex64::from_polar(1.0, -det.arg() / d as f64);
    u * corr
}

/// Normalized random two-qudit state with Ginibre coefficients.
pub fn random_state(d: usize, rng: &mut ChaCha8Rng) -> TwoQuditState {
    TwoQuditState::new(random_complex_matrix(d, rng)).expect("ginibre matrix is nonzero")
}

/// Random Schmidt spectrum σ₁ ≥ … ≥ σ_d with Σσ² = 1, every σ ≥ floor.
pub fn random_spectrum(d: usize, floor: f64, rng: &mut ChaCha8Rng) -> RVec {
    loop {
        let mut s: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 1e-3).collect();
        let norm: f64 = s.iter().map(|x| x * x).sum::<f64>();
        for x in &mut s {
            *x /= norm.sqrt();
        }
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        if s[d - 1] >= floor {
            return DVector::from_vec(s);
        }
    }
}

/// Diagonal state with the given Schmidt spectrum (descending σ).
pub fn diagonal_state(sigma: &RVec) -> TwoQuditState {
    let d = sigma.len();
    let mut m = CMat::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = cr(sigma[i]);
    }
    TwoQuditState::new(m).expect("spectrum is nonzero")
}

/// Random full-rank state: random spectrum conjugated by random SU(d)
/// factors, so the Schmidt spectrum is controlled.
pub fn random_rank_d_state(d: usize, floor: f64, rng: &mut ChaCha8Rng) -> TwoQuditState {
    let sigma = random_spectrum(d, floor, rng);
    let s1 = random_su(d, rng);
    let s2 = random_su(d, rng);
    let mut diag = CMat::zeros(d, d);
    for i in 0..d {
        diag[(i, i)] = cr(sigma[i]);
    }
    TwoQuditState::new(&s1 * diag * s2.transpose()).expect("nonzero")
}

fn random_traceless_hermitian(d: usize, rng: &mut ChaCha8Rng) -> CMat {
    let h = random_hermitian(d, rng);
    let tr = h.diagonal().sum() / cr(d as f64);
    let h = h - CMat::identity(d, d) * tr;
    let norm = crate::linalg::frobenius_norm(&h).max(1e-12);
    h / cr(norm)
}

/// Random smooth cyclic path on the first qudit: an optional Cartan loop
/// along the i-th fundamental magnetic weight followed (as a factor) by two
/// small bump excursions that return to zero. S(0) = I and S(τ) lands on
/// the declared center element.
pub fn random_cyclic_path(
    algebra: &AlgebraData,
    weight_index: Option<usize>,
    duration: f64,
    rng: &mut ChaCha8Rng,
) -> EvolutionPath {
    let d = algebra.d();
    let mut factors = Vec::new();
    let mut z = 0i64;
    if let Some(i) = weight_index {
        let beta = algebra.magnetic_weight(i).expect("weight index in 1..=d");
        z = algebra.center_element(&beta).0;
        factors.push(ExpFactor::new(
            algebra.cartan_contract(&beta),
            Amplitude::Ramp {
                scale: std::f64::consts::TAU,
                profile: Profile::Smoother,
            },
        ));
    }
    for _ in 0..2 {
        let h = random_traceless_hermitian(d, rng);
        factors.push(ExpFactor::new(
            h,
            Amplitude::Bump {
                scale: 0.2 + 0.3 * rng.random::<f64>(),
            },
        ));
    }
    EvolutionPath::from_factors(d, duration, factors, Side::First).with_closure_class(z)
}

/// Random closed excursion in coset directions only (bump amplitudes along
/// off-diagonal generators of random embedded su(2)s); starts and ends at I.
pub fn random_coset_wiggle(
    algebra: &AlgebraData,
    duration: f64,
    rng: &mut ChaCha8Rng,
) -> EvolutionPath {
    let mut factors = Vec::new();
    for _ in 0..2 {
        let r = rng.random_range(0..algebra.roots().len());
        let [_x, y, zgen] = algebra.su2_triplet(r).expect("root index in range");
        let gen = if rng.random::<bool>() { y } else { zgen };
        factors.push(ExpFactor::new(
            gen,
            Amplitude::Bump {
                scale: 0.2 + 0.5 * rng.random::<f64>(),
            },
        ));
    }
    EvolutionPath::from_factors(algebra.d(), duration, factors, Side::First)
        .with_closure_class(0)
}
