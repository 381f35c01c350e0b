//! Dense complex linear algebra helpers shared by all modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub const I_C: Complex64 = Complex64::new(0.0, 1.0);

pub fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity_c(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn frobenius_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius_dist(a: &CMat, b: &CMat) -> f64 {
    frobenius_norm(&(a - b))
}

pub fn trace(m: &CMat) -> Complex64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// Tr(a† b), the Hilbert-Schmidt inner product.
pub fn hs_inner(a: &CMat, b: &CMat) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Deviation of `m` from unitarity, ‖m† m − I‖_F.
pub fn unitarity_deviation(m: &CMat) -> f64 {
    let d = m.nrows();
    frobenius_dist(&(m.adjoint() * m), &identity_c(d))
}

/// Eigendecomposition of a Hermitian matrix: `(values, vectors)` with the
/// values sorted ascending and `m = vectors · diag(values) · vectors†`.
pub fn eigh(m: &CMat) -> (RVec, CMat) {
    let se = m.clone().symmetric_eigen();
    let n = se.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let values = RVec::from_iterator(n, order.iter().map(|&j| se.eigenvalues[j]));
    let mut vectors = CMat::zeros(n, n);
    for (col, &j) in order.iter().enumerate() {
        vectors.set_column(col, &se.eigenvectors.column(j));
    }
    (values, vectors)
}

/// exp(i·t·H) for Hermitian H, via eigendecomposition.
pub fn exp_i_hermitian(h: &CMat, t: f64) -> CMat {
    let (vals, vecs) = eigh(h);
    let n = vals.len();
    let phases = CMat::from_diagonal(&DVector::from_iterator(
        n,
        vals.iter().map(|&l| Complex64::from_polar(1.0, t * l)),
    ));
    &vecs * phases * vecs.adjoint()
}

/// log(Q / (det Q)^{1/d}) for Hermitian positive-definite Q: the traceless
/// Hermitian M with Q = (det Q)^{1/d} e^M. Eigenvalues below `floor` are an
/// error (rank-deficient input).
pub fn log_hpd_traceless(q: &CMat, floor: f64) -> Result<CMat> {
    let (vals, vecs) = eigh(q);
    let n = vals.len();
    let max = vals.iter().cloned().fold(f64::MIN, f64::max);
    let min = vals.iter().cloned().fold(f64::MAX, f64::min);
    if min <= floor * max {
        return Err(Error::RankDeficient { ratio: min / max });
    }
    let logs: Vec<f64> = vals.iter().map(|&l| l.ln()).collect();
    let mean = logs.iter().sum::<f64>() / n as f64;
    let diag = CMat::from_diagonal(&DVector::from_iterator(
        n,
        logs.iter().map(|&l| cr(l - mean)),
    ));
    Ok(&vecs * diag * vecs.adjoint())
}

/// SVD `a = u · diag(sigma) · v†` with singular values sorted descending and
/// u, v unitary (columns matched to the sorted values).
pub fn svd_desc(a: &CMat) -> (CMat, RVec, CMat) {
    let svd = a.clone().svd(true, true);
    let u0 = svd.u.expect("svd requested u");
    let vt0 = svd.v_t.expect("svd requested v_t");
    let s0 = svd.singular_values;
    let n = s0.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s0[j].partial_cmp(&s0[i]).unwrap());
    let sigma = RVec::from_iterator(n, order.iter().map(|&j| s0[j]));
    let mut u = CMat::zeros(u0.nrows(), n);
    let mut v = CMat::zeros(vt0.ncols(), n);
    for (col, &j) in order.iter().enumerate() {
        u.set_column(col, &u0.column(j));
        v.set_column(col, &vt0.row(j).adjoint());
    }
    (u, sigma, v)
}

/// Wrap an angle to (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut y = x % two_pi;
    if y <= -std::f64::consts::PI {
        y += two_pi;
    } else if y > std::f64::consts::PI {
        y -= two_pi;
    }
    y
}

/// Distance between two angles modulo 2π.
pub fn angle_dist(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_cmat(d: usize, rng: &mut ChaCha8Rng) -> CMat {
        CMat::from_fn(d, d, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    #[test]
    fn eigh_reconstructs_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 2..=6 {
            let g = random_cmat(d, &mut rng);
            let h = (&g + g.adjoint()) * cr(0.5);
            let (vals, vecs) = eigh(&h);
            let rec = &vecs * CMat::from_diagonal(&vals.map(cr)) * vecs.adjoint();
            assert!(frobenius_dist(&rec, &h) < 1e-12);
            assert!(unitarity_deviation(&vecs) < 1e-12);
            for i in 1..d {
                assert!(vals[i] >= vals[i - 1]);
            }
        }
    }

    #[test]
    fn svd_reconstructs_complex() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in 2..=6 {
            let a = random_cmat(d, &mut rng);
            let (u, s, v) = svd_desc(&a);
            let rec = &u * CMat::from_diagonal(&s.map(cr)) * v.adjoint();
            assert!(frobenius_dist(&rec, &a) < 1e-12, "d={d}");
            assert!(unitarity_deviation(&u) < 1e-12);
            assert!(unitarity_deviation(&v) < 1e-12);
            for i in 1..d {
                assert!(s[i] <= s[i - 1]);
            }
        }
    }

    #[test]
    fn exp_log_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_cmat(4, &mut rng);
        let h = (&g + g.adjoint()) * cr(0.5);
        let u = exp_i_hermitian(&h, 0.7);
        assert!(unitarity_deviation(&u) < 1e-12);

        // log of a positive matrix built from exp
        let q = exp_i_hermitian(&(h.clone() * I_C * cr(-1.0)), 1.0); // e^{H}
        let m = log_hpd_traceless(&q, 1e-12).unwrap();
        assert!(trace(&m).norm() < 1e-10);
    }

    #[test]
    fn wrap_angle_branch() {
        assert!((wrap_angle(std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-15);
        assert!((wrap_angle(-std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!(wrap_angle(0.1).abs() - 0.1 < 1e-15);
    }
}
