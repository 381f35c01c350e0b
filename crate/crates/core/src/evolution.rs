//! Local unitary evolution paths t ↦ (S₁(t), S₂(t)) in SU(d)×SU(d).
//!
//! Closed-form paths are products of generator exponentials
//! Π_j exp(i g_j(t) H_j) with cached eigendecompositions, so values and
//! time derivatives are analytic. Dense sample tables are supported for
//! externally supplied paths, with 4th-order finite-difference derivatives.
//!
//! The coset/Cartan split S = UV extracts a canonical coset representative
//! U ∈ SU(d)/U(1)^{d−1} by simultaneous diagonalization of the rotated
//! Cartan frame n_q = S T_q S⁻¹ and tracks the Cartan angles h_q(t)
//! continuously (no 2π jumps).

use nalgebra::DVector;
use num_complex::Complex64;

use crate::algebra::AlgebraData;
use crate::error::{Error, Result};
use crate::linalg::{cr, eigh, frobenius_dist, identity_c, CMat, RVec};

/// Default sample count for split and quadrature grids; refinement doubles
/// from here until the controlled quantity moves less than its tolerance.
pub const DEFAULT_SAMPLES: usize = 2048;

/// Maximum Frobenius jump between consecutive samples tolerated by the
/// branch-tracking split.
pub const CONTINUITY_JUMP: f64 = 0.1;

/// Which qudit a single curve drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

/// Which qudit(s) a path drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathSide {
    First,
    Second,
    Both,
}

/// Monotone ramp r with r(0) = 0, r(1) = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Profile {
    Linear,
    /// cubic smoothstep x²(3 − 2x)
    Smooth,
    /// quintic smoothstep x³(10 − 15x + 6x²); zero first and second
    /// derivatives at both ends, so concatenated segments join smoothly
    #[default]
    Smoother,
}

impl Profile {
    pub fn value(self, x: f64) -> f64 {
        match self {
            Profile::Linear => x,
            Profile::Smooth => x * x * (3.0 - 2.0 * x),
            Profile::Smoother => x * x * x * (10.0 + x * (-15.0 + 6.0 * x)),
        }
    }

    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Profile::Linear => 1.0,
            Profile::Smooth => 6.0 * x * (1.0 - x),
            Profile::Smoother => 30.0 * x * x * (1.0 - x) * (1.0 - x),
        }
    }
}

/// Scalar amplitude g(u) driving one exponential factor, u ∈ [0, 1].
#[derive(Debug, Clone, Copy)]
pub enum Amplitude {
    /// g = scale · r(u)
    Ramp { scale: f64, profile: Profile },
    /// g = scale (frozen factor)
    Constant(f64),
    /// g = scale · sin²(π u); returns to zero at both ends
    Bump { scale: f64 },
}

impl Amplitude {
    fn value(&self, u: f64) -> f64 {
        match *self {
            Amplitude::Ramp { scale, profile } => scale * profile.value(u),
            Amplitude::Constant(c) => c,
            Amplitude::Bump { scale } => {
                let s = (std::f64::consts::PI * u).sin();
                scale * s * s
            }
        }
    }

    fn derivative(&self, u: f64) -> f64 {
        match *self {
            Amplitude::Ramp { scale, profile } => scale * profile.derivative(u),
            Amplitude::Constant(_) => 0.0,
            Amplitude::Bump { scale } => {
                scale * std::f64::consts::PI * (2.0 * std::f64::consts::PI * u).sin()
            }
        }
    }
}

/// One factor exp(i g(u) H) with H Hermitian traceless, eigendecomposed once.
#[derive(Debug, Clone)]
pub struct ExpFactor {
    h: CMat,
    eig_vals: RVec,
    eig_vecs: CMat,
    amplitude: Amplitude,
}

impl ExpFactor {
    pub fn new(h: CMat, amplitude: Amplitude) -> Self {
        let (eig_vals, eig_vecs) = eigh(&h);
        Self {
            h,
            eig_vals,
            eig_vecs,
            amplitude,
        }
    }

    fn value(&self, u: f64) -> CMat {
        let g = self.amplitude.value(u);
        let d = self.eig_vals.len();
        let phases = CMat::from_diagonal(&DVector::from_iterator(
            d,
            self.eig_vals.iter().map(|&l| Complex64::from_polar(1.0, g * l)),
        ));
        &self.eig_vecs * phases * self.eig_vecs.adjoint()
    }
}

#[derive(Debug, Clone)]
enum CurveKind {
    /// Π_j exp(i g_j(u) H_j), left to right.
    Product(Vec<ExpFactor>),
    /// Segments in time; each segment's curve left-multiplies the
    /// accumulated endpoint of the previous ones.
    Concat {
        fractions: Vec<f64>,
        segments: Vec<Curve>,
        prefixes: Vec<CMat>,
    },
    /// Uniform samples on [0, 1]; evaluation snaps to the nearest node.
    Samples { table: Vec<CMat> },
    /// u ↦ inner(u^exponent)
    Warped { inner: Box<Curve>, exponent: f64 },
}

/// A curve [0, 1] → SU(d) with analytic or finite-difference derivatives.
#[derive(Debug, Clone)]
pub struct Curve {
    d: usize,
    kind: CurveKind,
}

impl Curve {
    pub fn product(d: usize, factors: Vec<ExpFactor>) -> Self {
        Self {
            d,
            kind: CurveKind::Product(factors),
        }
    }

    pub fn from_samples(d: usize, table: Vec<CMat>) -> Result<Self> {
        if table.len() < 5 {
            return Err(Error::InvalidInput(
                "sample table needs at least 5 points".into(),
            ));
        }
        for s in &table {
            let udev = crate::linalg::unitarity_deviation(s);
            if udev > 1e-9 {
                return Err(Error::NonUnitary { deviation: udev });
            }
            let ddev = (s.determinant() - cr(1.0)).norm();
            if ddev > 1e-9 {
                return Err(Error::NonUnimodular { deviation: ddev });
            }
        }
        Ok(Self {
            d,
            kind: CurveKind::Samples { table },
        })
    }

    pub fn constant(d: usize) -> Self {
        Self::product(d, Vec::new())
    }

    /// S(u).
    pub fn value(&self, u: f64) -> CMat {
        match &self.kind {
            CurveKind::Product(factors) => {
                let mut m = identity_c(self.d);
                for f in factors {
                    m *= f.value(u);
                }
                m
            }
            CurveKind::Concat {
                fractions,
                segments,
                prefixes,
            } => {
                let (i, local) = locate_segment(fractions, u);
                segments[i].value(local) * &prefixes[i]
            }
            CurveKind::Samples { table } => {
                let n = table.len() - 1;
                let m = (u * n as f64).round().clamp(0.0, n as f64) as usize;
                table[m].clone()
            }
            CurveKind::Warped { inner, exponent } => inner.value(u.powf(*exponent)),
        }
    }

    /// dS/du.
    pub fn derivative(&self, u: f64) -> CMat {
        match &self.kind {
            CurveKind::Product(factors) => {
                if factors.is_empty() {
                    return CMat::zeros(self.d, self.d);
                }
                let values: Vec<CMat> = factors.iter().map(|f| f.value(u)).collect();
                let mut total = CMat::zeros(self.d, self.d);
                for j in 0..factors.len() {
                    let gdot = factors[j].amplitude.derivative(u);
                    if gdot == 0.0 {
                        continue;
                    }
                    let mut term = identity_c(self.d);
                    for v in values.iter().take(j) {
                        term *= v;
                    }
                    term *= &factors[j].h * (crate::linalg::I_C * cr(gdot));
                    for v in values.iter().skip(j) {
                        term *= v;
                    }
                    total += term;
                }
                total
            }
            CurveKind::Concat {
                fractions,
                segments,
                prefixes,
            } => {
                let (i, local) = locate_segment(fractions, u);
                segments[i].derivative(local) * &prefixes[i] / cr(fractions[i])
            }
            CurveKind::Samples { table } => {
                let n = table.len() - 1;
                let m = (u * n as f64).round().clamp(0.0, n as f64) as usize;
                let h = 1.0 / n as f64;
                let t = |j: usize| &table[j];
                if m >= 2 && m + 2 <= n {
                    (t(m - 2) - t(m - 1) * cr(8.0) + t(m + 1) * cr(8.0) - t(m + 2))
                        / cr(12.0 * h)
                } else if m < 2 {
                    // 4th-order forward stencil
                    (t(m) * cr(-25.0) + t(m + 1) * cr(48.0) - t(m + 2) * cr(36.0)
                        + t(m + 3) * cr(16.0)
                        - t(m + 4) * cr(3.0))
                        / cr(12.0 * h)
                } else {
                    (t(m) * cr(25.0) - t(m - 1) * cr(48.0) + t(m - 2) * cr(36.0)
                        - t(m - 3) * cr(16.0)
                        + t(m - 4) * cr(3.0))
                        / cr(12.0 * h)
                }
            }
            CurveKind::Warped { inner, exponent } => {
                let k = *exponent;
                let w = u.powf(k);
                let dw = if u == 0.0 && k < 1.0 {
                    // avoid the infinite chain-rule factor; curves are used
                    // with k > 1 warps where dw(0) = 0
                    0.0
                } else {
                    k * u.powf(k - 1.0)
                };
                inner.derivative(w) * cr(dw)
            }
        }
    }

    /// Finest uniform grid on which the curve is exactly represented
    /// (sample tables only).
    pub fn grid_limit(&self) -> Option<usize> {
        match &self.kind {
            CurveKind::Samples { table } => Some(table.len() - 1),
            CurveKind::Concat { segments, .. } => segments
                .iter()
                .filter_map(|s| s.grid_limit())
                .min(),
            CurveKind::Warped { inner, .. } => inner.grid_limit(),
            CurveKind::Product(_) => None,
        }
    }
}

fn locate_segment(fractions: &[f64], u: f64) -> (usize, f64) {
    let mut acc = 0.0;
    for (i, &f) in fractions.iter().enumerate() {
        if u <= acc + f || i == fractions.len() - 1 {
            return (i, ((u - acc) / f).clamp(0.0, 1.0));
        }
        acc += f;
    }
    (0, 0.0)
}

/// A sampled or closed-form curve pair in SU(d)×SU(d) over t ∈ [0, τ].
#[derive(Debug, Clone)]
pub struct EvolutionPath {
    d: usize,
    duration: f64,
    first: Option<Curve>,
    second: Option<Curve>,
    closure_class: Option<i64>,
    solid_angle: Option<f64>,
    base_samples: usize,
}

impl EvolutionPath {
    fn single(d: usize, duration: f64, curve: Curve, side: Side) -> Self {
        let (first, second) = match side {
            Side::First => (Some(curve), None),
            Side::Second => (None, Some(curve)),
        };
        Self {
            d,
            duration,
            first,
            second,
            closure_class: None,
            solid_angle: None,
            base_samples: DEFAULT_SAMPLES,
        }
    }

    /// Constant identity path on the first qudit.
    pub fn constant(d: usize, duration: f64) -> Self {
        let mut p = Self::single(d, duration, Curve::constant(d), Side::First);
        p.closure_class = Some(0);
        p
    }

    /// Cartan loop V(t) = exp(i r(t/τ) 2π β·T). β must sit on the magnetic
    /// weight lattice (center residual ≤ 1e−6), which fixes the declared
    /// closure class.
    pub fn cartan_loop(
        algebra: &AlgebraData,
        beta: &RVec,
        duration: f64,
        profile: Profile,
        side: Side,
    ) -> Result<Self> {
        let (z, residual) = algebra.center_element(beta);
        if residual > 1e-6 {
            return Err(Error::NonCyclicPath { residual });
        }
        let h = algebra.cartan_contract(beta);
        let factor = ExpFactor::new(
            h,
            Amplitude::Ramp {
                scale: std::f64::consts::TAU,
                profile,
            },
        );
        let mut p = Self::single(
            algebra.d(),
            duration,
            Curve::product(algebra.d(), vec![factor]),
            side,
        );
        p.closure_class = Some(z);
        Ok(p)
    }

    /// Closed coset loop tracing the circle of constant polar angle θ
    /// (azimuth 0 → 2π) on the S² of the embedded su(2) of a positive root:
    /// U(θ, φ(t)) = exp(iφ J₃) exp(iθ J₂) exp(−iφ J₃). Strictly closed,
    /// S(τ) = S(0); the subtended solid angle Ω = 2π(1 − cos θ) is recorded.
    pub fn coset_loop(
        algebra: &AlgebraData,
        root_index: usize,
        theta: f64,
        duration: f64,
        side: Side,
    ) -> Result<Self> {
        Self::coset_loop_with_profile(algebra, root_index, theta, duration, Profile::Smoother, side)
    }

    /// `coset_loop` with an explicit azimuth ramp profile. A linear profile
    /// puts the loop samples at uniform azimuth, matching surface grids.
    pub fn coset_loop_with_profile(
        algebra: &AlgebraData,
        root_index: usize,
        theta: f64,
        duration: f64,
        profile: Profile,
        side: Side,
    ) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::InvalidInput(format!(
                "polar angle {theta} outside [0, pi]"
            )));
        }
        let [j3, _j1, j2] = algebra.su2_triplet(root_index)?;
        let factors = vec![
            ExpFactor::new(
                j3.clone(),
                Amplitude::Ramp {
                    scale: std::f64::consts::TAU,
                    profile,
                },
            ),
            ExpFactor::new(j2, Amplitude::Constant(theta)),
            ExpFactor::new(
                j3,
                Amplitude::Ramp {
                    scale: -std::f64::consts::TAU,
                    profile,
                },
            ),
        ];
        let mut p = Self::single(
            algebra.d(),
            duration,
            Curve::product(algebra.d(), factors),
            side,
        );
        p.closure_class = Some(0);
        p.solid_angle = Some(std::f64::consts::TAU * (1.0 - theta.cos()));
        Ok(p)
    }

    /// General closed-form path from exponential factors.
    pub fn from_factors(
        d: usize,
        duration: f64,
        factors: Vec<ExpFactor>,
        side: Side,
    ) -> Self {
        Self::single(d, duration, Curve::product(d, factors), side)
    }

    /// Dense uniform sample table over [0, τ]. Every sample must be in
    /// SU(d) within 1e−9.
    pub fn from_samples(
        d: usize,
        duration: f64,
        table: Vec<CMat>,
        side: Side,
    ) -> Result<Self> {
        let curve = Curve::from_samples(d, table)?;
        Ok(Self::single(d, duration, curve, side))
    }

    /// Concatenate in time: `self` then `other` on the same side(s).
    /// `other`'s curves are based at the endpoint of `self`.
    pub fn concat(self, other: EvolutionPath) -> Result<EvolutionPath> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: other.d,
            });
        }
        if self.side() != other.side() {
            return Err(Error::InvalidInput(
                "can only concatenate paths driving the same side(s)".into(),
            ));
        }
        let total = self.duration + other.duration;
        let fractions = vec![self.duration / total, other.duration / total];
        let join = |a: Option<Curve>, b: Option<Curve>| -> Option<Curve> {
            match (a, b) {
                (Some(ca), Some(cb)) => {
                    let d = ca.d;
                    let prefixes = vec![identity_c(d), ca.value(1.0)];
                    Some(Curve {
                        d,
                        kind: CurveKind::Concat {
                            fractions: fractions.clone(),
                            segments: vec![ca, cb],
                            prefixes,
                        },
                    })
                }
                (None, None) => None,
                _ => unreachable!("sides checked equal"),
            }
        };
        let za = self.closure_class;
        let zb = other.closure_class;
        let d = self.d;
        Ok(EvolutionPath {
            d,
            duration: total,
            first: join(self.first, other.first),
            second: join(self.second, other.second),
            closure_class: match (za, zb) {
                (Some(a), Some(b)) => Some((a + b).rem_euclid(d as i64)),
                _ => None,
            },
            solid_angle: None,
            base_samples: DEFAULT_SAMPLES,
        })
    }

    /// Merge two single-sided paths of equal duration into a two-sided one.
    pub fn combine(first: EvolutionPath, second: EvolutionPath) -> Result<EvolutionPath> {
        if first.d != second.d {
            return Err(Error::DimensionMismatch {
                expected: first.d,
                got: second.d,
            });
        }
        if (first.duration - second.duration).abs() > 1e-12 {
            return Err(Error::InvalidInput("durations differ".into()));
        }
        let (Some(c1), None) = (first.first, first.second) else {
            return Err(Error::InvalidInput("first argument must drive qudit 1".into()));
        };
        let (None, Some(c2)) = (second.first, second.second) else {
            return Err(Error::InvalidInput("second argument must drive qudit 2".into()));
        };
        Ok(EvolutionPath {
            d: first.d,
            duration: first.duration,
            first: Some(c1),
            second: Some(c2),
            closure_class: None,
            solid_angle: None,
            base_samples: first.base_samples.max(second.base_samples),
        })
    }

    /// Move a single-sided path's curve onto the given side.
    pub fn on_side(self, side: Side) -> Result<EvolutionPath> {
        let curve = match (self.first, self.second) {
            (Some(c), None) | (None, Some(c)) => c,
            _ => {
                return Err(Error::InvalidInput(
                    "on_side needs a single-sided path".into(),
                ))
            }
        };
        let (first, second) = match side {
            Side::First => (Some(curve), None),
            Side::Second => (None, Some(curve)),
        };
        Ok(EvolutionPath {
            first,
            second,
            ..self
        })
    }

    /// Monotone power-law reparametrization t ↦ τ (t/τ)^k, k > 0.
    pub fn reparametrized(self, exponent: f64) -> EvolutionPath {
        let warp = |c: Option<Curve>| {
            c.map(|inner| Curve {
                d: inner.d,
                kind: CurveKind::Warped {
                    inner: Box::new(inner),
                    exponent,
                },
            })
        };
        EvolutionPath {
            first: warp(self.first),
            second: warp(self.second),
            ..self
        }
    }

    pub fn with_base_samples(mut self, n: usize) -> Self {
        self.base_samples = n.max(8);
        self
    }

    /// Declare the expected center class for cyclic paths.
    pub fn with_closure_class(mut self, z: i64) -> Self {
        self.closure_class = Some(z.rem_euclid(self.d as i64));
        self
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn closure_class(&self) -> Option<i64> {
        self.closure_class
    }

    /// Solid angle recorded by `coset_loop`.
    pub fn solid_angle(&self) -> Option<f64> {
        self.solid_angle
    }

    pub fn base_samples(&self) -> usize {
        self.base_samples
    }

    pub fn side(&self) -> PathSide {
        match (&self.first, &self.second) {
            (Some(_), None) => PathSide::First,
            (None, Some(_)) => PathSide::Second,
            (Some(_), Some(_)) => PathSide::Both,
            (None, None) => unreachable!("path always drives at least one side"),
        }
    }

    pub fn curve(&self, side: Side) -> Option<&Curve> {
        match side {
            Side::First => self.first.as_ref(),
            Side::Second => self.second.as_ref(),
        }
    }

    /// The only driven curve of a single-sided path.
    pub fn sole_curve(&self) -> Result<&Curve> {
        match (&self.first, &self.second) {
            (Some(c), None) | (None, Some(c)) => Ok(c),
            _ => Err(Error::InvalidInput(
                "operation needs a single-sided path".into(),
            )),
        }
    }

    /// S(t) on a side; identity for the undriven side.
    pub fn sample(&self, side: Side, t: f64) -> Result<CMat> {
        self.check_time(t)?;
        Ok(match self.curve(side) {
            Some(c) => c.value(t / self.duration),
            None => identity_c(self.d),
        })
    }

    /// dS/dt on a side; zero for the undriven side.
    pub fn time_derivative(&self, side: Side, t: f64) -> Result<CMat> {
        self.check_time(t)?;
        Ok(match self.curve(side) {
            Some(c) => c.derivative(t / self.duration) / cr(self.duration),
            None => CMat::zeros(self.d, self.d),
        })
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t < -1e-12 || t > self.duration * (1.0 + 1e-12) {
            return Err(Error::TimeOutOfDomain {
                t,
                duration: self.duration,
            });
        }
        Ok(())
    }

    /// ‖S(τ) − e^{2πiz/d} S(0)‖_F for the declared class, per driven side,
    /// maximized over sides.
    pub fn closure_residual(&self) -> Option<f64> {
        let z = self.closure_class?;
        let phase = Complex64::from_polar(1.0, std::f64::consts::TAU * z as f64 / self.d as f64);
        let mut worst: f64 = 0.0;
        for side in [Side::First, Side::Second] {
            if let Some(c) = self.curve(side) {
                let r = frobenius_dist(&c.value(1.0), &(c.value(0.0) * phase));
                worst = worst.max(r);
            }
        }
        Some(worst)
    }
}

/// The connection A(t) = i S d(S⁻¹)/dt = −i Ṡ S⁻¹ of a single-sided path:
/// Hermitian and traceless (enforced within 1e−7).
pub fn connection(path: &EvolutionPath, t: f64) -> Result<CMat> {
    path.check_time(t)?;
    let curve = path.sole_curve()?;
    let u = t / path.duration();
    connection_of(&curve.value(u), &(curve.derivative(u) / cr(path.duration())))
}

fn connection_of(s: &CMat, sdot: &CMat) -> Result<CMat> {
    let d = s.nrows();
    let raw = -(sdot * s.adjoint()) * crate::linalg::I_C;
    let herm = (&raw + raw.adjoint()) * cr(0.5);
    let tr = herm.diagonal().sum() / cr(d as f64);
    let fixed = &herm - identity_c(d) * tr;
    let enforcement = frobenius_dist(&fixed, &raw);
    if enforcement > 1e-7 {
        return Err(Error::InvalidInput(format!(
            "connection not Hermitian traceless within 1e-7 (deviation {enforcement:.3e})"
        )));
    }
    Ok(fixed)
}

/// Frame coefficients C_A(t) = −f_ABC ⟨n_B, ṅ_C⟩ with n_A = S T_A S⁻¹,
/// satisfying i S d(S⁻¹)/dt = −C_A n_A.
pub fn frame_coefficients(
    path: &EvolutionPath,
    algebra: &AlgebraData,
    t: f64,
) -> Result<RVec> {
    path.check_time(t)?;
    if algebra.d() != path.d() {
        return Err(Error::DimensionMismatch {
            expected: path.d(),
            got: algebra.d(),
        });
    }
    let curve = path.sole_curve()?;
    let u = t / path.duration();
    let s = curve.value(u);
    let sdot = curve.derivative(u) / cr(path.duration());
    let n = algebra.dim();

    let sdag = s.adjoint();
    let x = &sdot * &sdag; // Ṡ S⁻¹
    let frames: Vec<CMat> = (0..n).map(|a| &s * algebra.generator(a) * &sdag).collect();
    let frame_dots: Vec<CMat> = frames
        .iter()
        .map(|na| &x * na - na * &x)
        .collect();

    // Gram matrix ⟨n_B, ṅ_C⟩ via component expansion
    let comp: Vec<RVec> = frames.iter().map(|m| algebra.expand(m)).collect();
    let comp_dot: Vec<RVec> = frame_dots.iter().map(|m| algebra.expand(m)).collect();

    let f = algebra.structure_constants();
    let mut c = RVec::zeros(n);
    for a in 0..n {
        let mut sum = 0.0;
        for &(b, cc, fval) in f.row(a) {
            sum += fval * comp[b].dot(&comp_dot[cc]);
        }
        c[a] = -sum;
    }
    Ok(c)
}

/// The moving frame n_A(t) = S T_A S⁻¹ and coefficients C_A(t) on a uniform
/// grid of `n_samples` + 1 points.
#[derive(Debug, Clone)]
pub struct MovingFrame {
    pub times: Vec<f64>,
    pub frames: Vec<Vec<CMat>>,
    pub coeffs: Vec<RVec>,
}

pub fn moving_frame(
    path: &EvolutionPath,
    algebra: &AlgebraData,
    n_samples: usize,
) -> Result<MovingFrame> {
    let tau = path.duration();
    let n = algebra.dim();
    let mut times = Vec::with_capacity(n_samples + 1);
    let mut frames = Vec::with_capacity(n_samples + 1);
    let mut coeffs = Vec::with_capacity(n_samples + 1);
    let curve = path.sole_curve()?;
    for m in 0..=n_samples {
        let t = tau * m as f64 / n_samples as f64;
        let s = curve.value(t / tau);
        let sdag = s.adjoint();
        let fr: Vec<CMat> = (0..n).map(|a| &s * algebra.generator(a) * &sdag).collect();
        times.push(t);
        frames.push(fr);
        coeffs.push(frame_coefficients(path, algebra, t)?);
    }
    Ok(MovingFrame {
        times,
        frames,
        coeffs,
    })
}

/// The tracked coset/Cartan factorization S(t) = U(t) V(t),
/// V = exp(i h_q(t) T_q), with U on the canonical section (diagonal pivots
/// of the first d−1 columns real positive, det = 1) and h continuous.
#[derive(Debug, Clone)]
pub struct CosetCartanSplit {
    pub times: Vec<f64>,
    pub u_path: Vec<CMat>,
    /// h_q(t) per sample, branch-tracked without 2π jumps.
    pub h: Vec<RVec>,
    /// Worst reconstruction residual ‖S − UV‖_F over the samples.
    pub reconstruction_error: f64,
}

impl CosetCartanSplit {
    /// h(τ) − h(0).
    pub fn delta_h(&self) -> RVec {
        self.h.last().unwrap() - self.h.first().unwrap()
    }

    /// β with h_q(τ) − h_q(0) = 2π β|_q.
    pub fn target_weight(&self) -> RVec {
        self.delta_h() / std::f64::consts::TAU
    }
}

/// Split the single driven curve of `path` at its base sampling density.
pub fn split_coset_cartan(
    path: &EvolutionPath,
    algebra: &AlgebraData,
) -> Result<CosetCartanSplit> {
    let curve = path.sole_curve()?;
    let n = path
        .base_samples()
        .min(curve.grid_limit().unwrap_or(usize::MAX));
    let tau = path.duration();
    let samples: Vec<CMat> = (0..=n)
        .map(|m| curve.value(m as f64 / n as f64))
        .collect();
    let times: Vec<f64> = (0..=n).map(|m| tau * m as f64 / n as f64).collect();
    split_samples(&samples, times, algebra)
}

pub(crate) fn split_samples(
    samples: &[CMat],
    times: Vec<f64>,
    algebra: &AlgebraData,
) -> Result<CosetCartanSplit> {
    let d = algebra.d();
    for w in samples.windows(2) {
        let jump = frobenius_dist(&w[1], &w[0]);
        if jump > CONTINUITY_JUMP {
            return Err(Error::UndersampledPath { jump });
        }
    }

    // generic diagonal traceless probe with unit eigenvalue spacing
    let probe = CMat::from_fn(d, d, |i, j| {
        if i == j {
            cr(i as f64 - (d as f64 - 1.0) / 2.0)
        } else {
            cr(0.0)
        }
    });

    let mut u_path = Vec::with_capacity(samples.len());
    let mut h = Vec::with_capacity(samples.len());
    let mut theta_prev: Option<Vec<f64>> = None;
    let mut worst = 0.0_f64;

    for s in samples {
        let rotated = s * &probe * s.adjoint();
        let (_vals, vecs) = eigh(&rotated);
        // ascending eigenvalues i − (d−1)/2 ↔ basis index i
        let mut w = vecs;
        for j in 0..d - 1 {
            let pivot = w[(j, j)];
            if pivot.norm() < 1e-12 {
                return Err(Error::InvalidInput(
                    "coset representative pivot degenerate; path leaves the chart".into(),
                ));
            }
            let phase = (pivot / pivot.norm()).conj();
            for i in 0..d {
                w[(i, j)] *= phase;
            }
        }
        let det_arg = w.determinant().arg();
        let corr = Complex64::from_polar(1.0, -det_arg);
        for i in 0..d {
            w[(i, d - 1)] *= corr;
        }

        let v = w.adjoint() * s;
        // V must be diagonal; the residual also absorbs eigen roundoff
        let mut theta: Vec<f64> = (0..d).map(|j| v[(j, j)].arg()).collect();
        let mut vdiag = CMat::zeros(d, d);
        for j in 0..d {
            let m = v[(j, j)].norm();
            vdiag[(j, j)] = v[(j, j)] / cr(m.max(1e-300));
        }
        worst = worst.max(frobenius_dist(&(&w * &vdiag), s));

        match &theta_prev {
            None => {
                // fix the initial branch so Σθ = 0 exactly (det V = 1)
                let total: f64 = theta.iter().sum();
                let k = (total / std::f64::consts::TAU).round() as i64;
                if k != 0 {
                    let mut order: Vec<usize> = (0..d).collect();
                    if k > 0 {
                        order.sort_by(|&a, &b| theta[b].partial_cmp(&theta[a]).unwrap());
                        for &j in order.iter().take(k as usize) {
                            theta[j] -= std::f64::consts::TAU;
                        }
                    } else {
                        order.sort_by(|&a, &b| theta[a].partial_cmp(&theta[b]).unwrap());
                        for &j in order.iter().take((-k) as usize) {
                            theta[j] += std::f64::consts::TAU;
                        }
                    }
                }
            }
            Some(prev) => {
                for j in 0..d {
                    let jumps = ((prev[j] - theta[j]) / std::f64::consts::TAU).round();
                    theta[j] += std::f64::consts::TAU * jumps;
                }
            }
        }

        // h_q = 2d Σ_j w_j|q θ_j (exact inverse of θ_j = h·w_j on Σθ = 0)
        let mut hq = RVec::zeros(d - 1);
        for q in 0..d - 1 {
            let mut acc = 0.0;
            for (j, th) in theta.iter().enumerate() {
                acc += algebra.fundamental_weights()[j][q] * th;
            }
            hq[q] = 2.0 * d as f64 * acc;
        }

        u_path.push(w);
        h.push(hq);
        theta_prev = Some(theta);
    }

    Ok(CosetCartanSplit {
        times,
        u_path,
        h,
        reconstruction_error: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::build_algebra;
    use crate::linalg::{frobenius_norm, unitarity_deviation};
    use crate::sample;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn paths_stay_in_su_d() {
        let mut rng = sample::rng_from_seed(21);
        for d in 2..=4 {
            let alg = build_algebra(d).unwrap();
            let beta = alg.magnetic_weight(1).unwrap();
            let paths = vec![
                EvolutionPath::cartan_loop(&alg, &beta, 1.0, Profile::Smoother, Side::First)
                    .unwrap(),
                EvolutionPath::coset_loop(&alg, 0, 1.1, 1.0, Side::First).unwrap(),
                sample::random_cyclic_path(&alg, None, 1.0, &mut rng),
            ];
            for p in paths {
                for m in 0..=40 {
                    let t = m as f64 / 40.0;
                    let s = p.sample(Side::First, t).unwrap();
                    assert!(unitarity_deviation(&s) < 1e-9);
                    assert!((s.determinant() - cr(1.0)).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn cartan_loop_closure_classes() {
        for d in 2..=5 {
            let alg = build_algebra(d).unwrap();
            for i in 1..=d {
                // fundamental: z = −1 ≡ d−1
                let beta = alg.magnetic_weight(i).unwrap();
                let p = EvolutionPath::cartan_loop(&alg, &beta, 1.0, Profile::Smooth, Side::First)
                    .unwrap();
                assert_eq!(p.closure_class(), Some(d as i64 - 1), "d={d} i={i}");
                assert!(p.closure_residual().unwrap() < 1e-7);

                // antifundamental: z = +1
                let anti = EvolutionPath::cartan_loop(
                    &alg,
                    &(-&beta),
                    1.0,
                    Profile::Smooth,
                    Side::First,
                )
                .unwrap();
                assert_eq!(anti.closure_class(), Some(1));
                assert!(anti.closure_residual().unwrap() < 1e-7);
            }
        }
    }

    #[test]
    fn cartan_loop_d2_ends_at_minus_identity() {
        let alg = build_algebra(2).unwrap();
        let beta = alg.magnetic_weight(1).unwrap();
        let p =
            EvolutionPath::cartan_loop(&alg, &beta, 1.0, Profile::Linear, Side::First).unwrap();
        let end = p.sample(Side::First, 1.0).unwrap();
        assert!(frobenius_dist(&end, &(identity_c(2) * cr(-1.0))) < 1e-10);
        assert_eq!(p.closure_class(), Some(1));
    }

    #[test]
    fn zero_weight_gives_constant_path() {
        let alg = build_algebra(3).unwrap();
        let p = EvolutionPath::cartan_loop(
            &alg,
            &RVec::zeros(2),
            1.0,
            Profile::Smoother,
            Side::First,
        )
        .unwrap();
        assert_eq!(p.closure_class(), Some(0));
        for m in 0..=10 {
            let s = p.sample(Side::First, m as f64 / 10.0).unwrap();
            assert!(frobenius_dist(&s, &identity_c(3)) < 1e-14);
        }
    }

    #[test]
    fn off_lattice_weight_is_rejected() {
        let alg = build_algebra(3).unwrap();
        let beta = alg.magnetic_weight(1).unwrap() * 0.5;
        assert!(matches!(
            EvolutionPath::cartan_loop(&alg, &beta, 1.0, Profile::Linear, Side::First),
            Err(Error::NonCyclicPath { .. })
        ));
    }

    #[test]
    fn coset_loop_matches_qubit_parametrization() {
        // d=2: U(θ, φ) = [[cos(θ/2), sin(θ/2) e^{iφ}], [−sin(θ/2) e^{−iφ}, cos(θ/2)]]
        let alg = build_algebra(2).unwrap();
        let theta = 0.9_f64;
        let p = EvolutionPath::coset_loop(&alg, 0, theta, 1.0, Side::First).unwrap();
        for m in 0..=16 {
            let t = m as f64 / 16.0;
            let s = p.sample(Side::First, t).unwrap();
            let phi = TAU * Profile::Smoother.value(t);
            let (c, sn) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            let want = CMat::from_row_slice(
                2,
                2,
                &[
                    cr(c),
                    Complex64::from_polar(sn, phi),
                    -Complex64::from_polar(sn, -phi),
                    cr(c),
                ],
            );
            assert!(frobenius_dist(&s, &want) < 1e-12, "t={t}");
        }
        assert!((p.solid_angle().unwrap() - TAU * (1.0 - theta.cos())).abs() < 1e-14);
    }

    #[test]
    fn coset_loop_edge_cases() {
        let alg = build_algebra(3).unwrap();
        // θ = 0: constant identity path, Ω = 0
        let p0 = EvolutionPath::coset_loop(&alg, 0, 0.0, 1.0, Side::First).unwrap();
        for m in 0..=8 {
            let s = p0.sample(Side::First, m as f64 / 8.0).unwrap();
            assert!(frobenius_dist(&s, &identity_c(3)) < 1e-12);
        }
        assert!(p0.solid_angle().unwrap().abs() < 1e-14);

        // θ = π/2: hemisphere, Ω = 2π
        let p1 = EvolutionPath::coset_loop(&alg, 0, PI / 2.0, 1.0, Side::First).unwrap();
        assert!((p1.solid_angle().unwrap() - TAU).abs() < 1e-12);

        // closed loop: S(τ) = S(0)
        let start = p1.sample(Side::First, 0.0).unwrap();
        let end = p1.sample(Side::First, 1.0).unwrap();
        assert!(frobenius_dist(&start, &end) < 1e-12);

        assert!(EvolutionPath::coset_loop(&alg, 0, 4.0, 1.0, Side::First).is_err());
    }

    #[test]
    fn analytic_derivative_matches_finite_difference() {
        let mut rng = sample::rng_from_seed(22);
        let alg = build_algebra(3).unwrap();
        let p = sample::random_cyclic_path(&alg, Some(1), 1.3, &mut rng);
        let eps = 1e-6;
        for &t in &[0.2, 0.5, 0.77] {
            let a = p.sample(Side::First, t - eps).unwrap();
            let b = p.sample(Side::First, t + eps).unwrap();
            let fd = (b - a) / cr(2.0 * eps);
            let an = p.time_derivative(Side::First, t).unwrap();
            assert!(frobenius_dist(&fd, &an) < 1e-7, "t={t}");
        }
    }

    #[test]
    fn connection_examples() {
        let alg = build_algebra(3).unwrap();
        // constant path → A = 0
        let c = EvolutionPath::constant(3, 1.0);
        assert!(frobenius_norm(&connection(&c, 0.3).unwrap()) < 1e-12);

        // V(t) = exp(i t ω β·T) → A = −ω β·T constant
        let beta = alg.magnetic_weight(2).unwrap();
        let p = EvolutionPath::cartan_loop(&alg, &beta, 1.0, Profile::Linear, Side::First)
            .unwrap();
        let want = alg.cartan_contract(&beta) * cr(TAU); // ω = 2π/τ, τ = 1; A = +ω β·T
        for &t in &[0.1, 0.5, 0.9] {
            let a = connection(&p, t).unwrap();
            assert!(frobenius_dist(&a, &want) < 1e-9, "t={t}");
        }
    }

    #[test]
    fn covariant_derivative_annihilates_frame() {
        // D n_A = ṅ_A − i[A, n_A] = 0
        let mut rng = sample::rng_from_seed(23);
        let alg = build_algebra(2).unwrap();
        let p = sample::random_cyclic_path(&alg, None, 1.0, &mut rng);
        let eps = 1e-5;
        let t = 0.4;
        let a = connection(&p, t).unwrap();
        for g in 0..alg.dim() {
            let frame_at = |tt: f64| {
                let s = p.sample(Side::First, tt).unwrap();
                &s * alg.generator(g) * s.adjoint()
            };
            let ndot = (frame_at(t + eps) - frame_at(t - eps)) / cr(2.0 * eps);
            let comm = crate::linalg::commutator(&a, &frame_at(t));
            let dn = ndot - comm * crate::linalg::I_C;
            assert!(frobenius_norm(&dn) < 1e-6, "g={g}");
        }
    }

    #[test]
    fn frame_orthonormal_and_closes_algebra() {
        let mut rng = sample::rng_from_seed(24);
        for d in 2..=4 {
            let alg = build_algebra(d).unwrap();
            for _ in 0..5 {
                let p = sample::random_cyclic_path(&alg, None, 1.0, &mut rng);
                let t = 0.37;
                let s = p.sample(Side::First, t).unwrap();
                let frames: Vec<CMat> = (0..alg.dim())
                    .map(|a| &s * alg.generator(a) * s.adjoint())
                    .collect();
                for (a, na) in frames.iter().enumerate() {
                    for (b, nb) in frames.iter().enumerate() {
                        let want = if a == b { 1.0 } else { 0.0 };
                        assert!((alg.metric(na, nb) - want).abs() < 1e-9);
                    }
                }
                // [n_A, n_B] = i f_ABC n_C on a few pairs
                for a in 0..alg.dim().min(4) {
                    for b in 0..alg.dim().min(4) {
                        let comm = crate::linalg::commutator(&frames[a], &frames[b]);
                        let mut rec = CMat::zeros(d, d);
                        for &(bb, cc, f) in alg.structure_constants().row(a) {
                            if bb == b {
                                rec += &frames[cc] * (crate::linalg::I_C * cr(f));
                            }
                        }
                        assert!(frobenius_dist(&comm, &rec) < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn frame_coefficients_reconstruct_connection() {
        let mut rng = sample::rng_from_seed(25);
        for d in 2..=3 {
            let alg = build_algebra(d).unwrap();
            for trial in 0..4 {
                let p = sample::random_cyclic_path(&alg, None, 1.0, &mut rng);
                let t = 0.3 + 0.1 * trial as f64;
                let c = frame_coefficients(&p, &alg, t).unwrap();
                let s = p.sample(Side::First, t).unwrap();
                let mut rec = CMat::zeros(d, d);
                for a in 0..alg.dim() {
                    rec += &s * alg.generator(a) * s.adjoint() * cr(-c[a]);
                }
                let a_direct = connection(&p, t).unwrap();
                assert!(frobenius_dist(&a_direct, &rec) < 1e-6, "d={d}");
            }
        }
    }

    #[test]
    fn frame_coefficients_constant_and_cartan() {
        let alg = build_algebra(3).unwrap();
        let con = EvolutionPath::constant(3, 1.0);
        assert!(frame_coefficients(&con, &alg, 0.5).unwrap().norm() < 1e-12);

        let beta = alg.magnetic_weight(1).unwrap();
        let p = EvolutionPath::cartan_loop(&alg, &beta, 1.0, Profile::Linear, Side::First)
            .unwrap();
        let c = frame_coefficients(&p, &alg, 0.5).unwrap();
        let s = p.sample(Side::First, 0.5).unwrap();
        let mut rec = CMat::zeros(3, 3);
        for a in 0..alg.dim() {
            rec += &s * alg.generator(a) * s.adjoint() * cr(-c[a]);
        }
        let want = alg.cartan_contract(&beta) * cr(TAU);
        assert!(frobenius_dist(&rec, &want) < 1e-8);
    }

    #[test]
    fn split_pure_cartan_loop() {
        for d in 2..=4 {
            let alg = build_algebra(d).unwrap();
            let beta = alg.magnetic_weight(1).unwrap();
            let p = EvolutionPath::cartan_loop(&alg, &beta, 1.0, Profile::Smooth, Side::First)
                .unwrap()
                .with_base_samples(512);
            let split = split_coset_cartan(&p, &alg).unwrap();
            assert!(split.reconstruction_error < 1e-8);
            for u in &split.u_path {
                assert!(frobenius_dist(u, &identity_c(d)) < 1e-8);
            }
            // h(0) = 0, h(τ) = 2πβ
            assert!(split.h[0].norm() < 1e-10);
            let dh = split.delta_h();
            assert!((&dh - &(&beta * TAU)).norm() < 1e-7, "d={d}");
            assert!((split.target_weight() - beta).norm() < 1e-8);
        }
    }

    #[test]
    fn split_pure_coset_loop_has_no_cartan_winding() {
        let alg = build_algebra(2).unwrap();
        let p = EvolutionPath::coset_loop(&alg, 0, 1.0, 1.0, Side::First)
            .unwrap()
            .with_base_samples(512);
        let split = split_coset_cartan(&p, &alg).unwrap();
        assert!(split.reconstruction_error < 1e-8);
        assert!(split.delta_h().norm() < 1e-8);
        // the latitude loop is its own coset representative
        for (m, u) in split.u_path.iter().enumerate() {
            let t = m as f64 / (split.u_path.len() - 1) as f64;
            let s = p.sample(Side::First, t).unwrap();
            assert!(frobenius_dist(u, &s) < 1e-8);
        }
    }

    #[test]
    fn split_tilted_axis_loop_recovers_azimuthal_winding() {
        // S(t) = exp(iφ(t)(sinθ J₁ + cosθ J₃)) winds the Cartan angle by
        // the azimuthal closure h(τ) = 2πβ₁ at d=2 while staying cyclic.
        let alg = build_algebra(2).unwrap();
        let theta = 0.8_f64;
        let [j3, j1, _j2] = alg.su2_triplet(0).unwrap();
        let axis = j1 * cr(theta.sin()) + j3 * cr(theta.cos());
        let p = EvolutionPath::from_factors(
            2,
            1.0,
            vec![ExpFactor::new(
                axis,
                Amplitude::Ramp {
                    scale: TAU,
                    profile: Profile::Smoother,
                },
            )],
            Side::First,
        )
        .with_base_samples(1024);
        let split = split_coset_cartan(&p, &alg).unwrap();
        let beta = alg.magnetic_weight(1).unwrap();
        assert!(split.reconstruction_error < 1e-7);
        assert!((split.delta_h() - &beta * TAU).norm() < 1e-6);
        // endpoint is the center element −I, i.e. U(τ) = I
        assert!(frobenius_dist(split.u_path.last().unwrap(), &identity_c(2)) < 1e-7);
    }

    #[test]
    fn split_round_trips_product_paths() {
        // V-then-U product: recover both factors
        let mut rng = sample::rng_from_seed(26);
        for d in 2..=3 {
            let alg = build_algebra(d).unwrap();
            for _ in 0..3 {
                let beta = alg.magnetic_weight(1).unwrap();
                let v_loop =
                    EvolutionPath::cartan_loop(&alg, &beta, 0.5, Profile::Smoother, Side::First)
                        .unwrap();
                let u_wiggle = sample::random_coset_wiggle(&alg, 0.5, &mut rng);
                let p = v_loop.concat(u_wiggle).unwrap().with_base_samples(2048);
                let split = split_coset_cartan(&p, &alg).unwrap();
                assert!(split.reconstruction_error < 1e-7, "d={d}");
                assert!((split.delta_h() - &beta * TAU).norm() < 1e-6);
                assert!(
                    frobenius_dist(split.u_path.first().unwrap(), &identity_c(d)) < 1e-8
                );
                assert!(
                    frobenius_dist(split.u_path.last().unwrap(), &identity_c(d)) < 1e-6
                );
            }
        }
    }

    #[test]
    fn coset_section_kills_torus_action() {
        // representatives of S and of S·V' coincide, and the
        // T_q-invariant frame maps to U = I
        let mut rng = sample::rng_from_seed(27);
        let alg = build_algebra(3).unwrap();
        let wiggle = sample::random_coset_wiggle(&alg, 1.0, &mut rng);
        let s = wiggle.sample(Side::First, 0.6).unwrap();
        let beta = alg.magnetic_weight(2).unwrap() * 0.37;
        let v_extra = crate::linalg::exp_i_hermitian(&alg.cartan_contract(&beta), 1.0);
        let samples_a = vec![s.clone(); 8];
        let samples_b: Vec<CMat> = samples_a.iter().map(|m| m * &v_extra).collect();
        let times: Vec<f64> = (0..8).map(|m| m as f64).collect();
        let split_a = split_samples(&samples_a, times.clone(), &alg).unwrap();
        let split_b = split_samples(&samples_b, times, &alg).unwrap();
        assert!(frobenius_dist(&split_a.u_path[0], &split_b.u_path[0]) < 1e-9);

        let ident = vec![identity_c(3); 8];
        let split_i =
            split_samples(&ident, (0..8).map(|m| m as f64).collect(), &alg).unwrap();
        assert!(frobenius_dist(&split_i.u_path[0], &identity_c(3)) < 1e-12);
    }

    #[test]
    fn undersampled_path_is_rejected() {
        let alg = build_algebra(2).unwrap();
        let beta = alg.magnetic_weight(1).unwrap();
        let p = EvolutionPath::cartan_loop(&alg, &beta, 1.0, Profile::Linear, Side::First)
            .unwrap()
            .with_base_samples(8);
        assert!(matches!(
            split_coset_cartan(&p, &alg),
            Err(Error::UndersampledPath { .. })
        ));
    }

    #[test]
    fn concat_adds_closure_classes() {
        let alg = build_algebra(3).unwrap();
        let b1 = alg.magnetic_weight(1).unwrap();
        let loop1 =
            EvolutionPath::cartan_loop(&alg, &b1, 1.0, Profile::Smoother, Side::First).unwrap();
        let loop2 = loop1.clone();
        let both = loop1.concat(loop2).unwrap();
        // z = (−1) + (−1) ≡ 1 (mod 3)
        assert_eq!(both.closure_class(), Some(1));
        assert!(both.closure_residual().unwrap() < 1e-7);
    }

    #[test]
    fn sampled_paths_validate_and_differentiate() {
        let alg = build_algebra(2).unwrap();
        let beta = alg.magnetic_weight(1).unwrap();
        let p = EvolutionPath::cartan_loop(&alg, &beta, 1.0, Profile::Smooth, Side::First)
            .unwrap();
        let n = 256;
        let table: Vec<CMat> = (0..=n)
            .map(|m| p.sample(Side::First, m as f64 / n as f64).unwrap())
            .collect();
        let sp = EvolutionPath::from_samples(2, 1.0, table, Side::First).unwrap();
        for &t in &[0.25, 0.5, 0.75] {
            let want = p.time_derivative(Side::First, t).unwrap();
            let got = sp.time_derivative(Side::First, t).unwrap();
            assert!(frobenius_dist(&want, &got) < 1e-6, "t={t}");
        }

        let bad = vec![identity_c(2) * cr(1.1); 8];
        assert!(EvolutionPath::from_samples(2, 1.0, bad, Side::First).is_err());
    }

    #[test]
    fn time_domain_checked() {
        let p = EvolutionPath::constant(2, 1.0);
        assert!(matches!(
            p.sample(Side::First, 1.5),
            Err(Error::TimeOutOfDomain { .. })
        ));
    }
}
