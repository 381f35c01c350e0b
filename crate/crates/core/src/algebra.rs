//! The su(d) Lie algebra in the trace normalization Tr(T_A T_B) = δ_AB/(2d).
//!
//! The basis is ordered Cartan-first: T_q, q = 1..d−1, with diagonal
//! 1/√(2q(q+1)d) · (1, …, 1, −q, 0, …, 0), followed by the off-diagonal
//! pairs for each upper-triangular position (i, k), i < k, in lexicographic
//! order, symmetric combination before antisymmetric:
//!
//!   T_α = (E_α + E_{−α})/√2 ,  T_ᾱ = (E_α − E_{−α})/(√2 i) ,
//!
//! with ladder operators E_α = e_i e_k† /√(2d). In this normalization the
//! structure constants satisfy f_ABC f_DBC = δ_AD and the adjoint matrices
//! M_A|_BC = −i f_ABC satisfy Tr(M_A M_B) = δ_AB.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{cr, frobenius_norm, identity_c, CMat, RVec, I_C};

/// Practical dimension cap: adjoint-representation matrices are
/// (d²−1)×(d²−1), which keeps memory and runtime desk-scale up to here.
pub const MAX_DIMENSION: usize = 32;

/// Threshold below which a numerically computed structure constant is
/// treated as an exact zero.
const F_ZERO_TOL: f64 = 1e-13;

/// What a basis element is: a Cartan generator or one of the two
/// off-diagonal combinations supported on an upper-triangular pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    /// Diagonal T_q, q = 1..d−1 (1-based label).
    Cartan { q: usize },
    /// (e_ik + e_ki)/(2√d) on the 0-based pair (i, k), i < k.
    Symmetric { i: usize, k: usize },
    /// (−i e_ik + i e_ki)/(2√d) on the 0-based pair (i, k), i < k.
    Antisymmetric { i: usize, k: usize },
}

/// A positive root α = w_i − w_k (0-based i < k), with the indices of the
/// two off-diagonal generators supported on that pair.
#[derive(Debug, Clone)]
pub struct Root {
    /// 0-based row index of the ladder operator's upper-triangular support.
    pub i: usize,
    /// 0-based column index, i < k.
    pub k: usize,
    /// The (d−1)-component root vector.
    pub vector: RVec,
    /// Basis index of T_α (symmetric combination).
    pub sym_index: usize,
    /// Basis index of T_ᾱ (antisymmetric combination).
    pub asym_index: usize,
}

/// Sparse totally antisymmetric structure constants f_ABC.
#[derive(Debug, Clone)]
pub struct StructureConstants {
    n: usize,
    /// rows[a] holds (b, c, f_abc) sorted by (b, c), covering all nonzeros
    /// with first index a.
    rows: Vec<Vec<(usize, usize, f64)>>,
    /// Canonical nonzero triples a < b < c.
    canonical: Vec<(usize, usize, usize, f64)>,
}

impl StructureConstants {
    /// f_abc for arbitrary index order.
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        let row = &self.rows[a];
        match row.binary_search_by(|&(rb, rc, _)| (rb, rc).cmp(&(b, c))) {
            Ok(pos) => row[pos].2,
            Err(_) => 0.0,
        }
    }

    /// All nonzeros (b, c, f_abc) with first index `a`.
    pub fn row(&self, a: usize) -> &[(usize, usize, f64)] {
        &self.rows[a]
    }

    /// Canonical nonzero triples (a, b, c, f_abc) with a < b < c.
    pub fn nonzeros(&self) -> &[(usize, usize, usize, f64)] {
        &self.canonical
    }

    /// Number of basis elements d²−1.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Σ_BC f_aBC x_B y_C.
    pub fn contract_bilinear(&self, a: usize, x: &RVec, y: &RVec) -> f64 {
        self.rows[a]
            .iter()
            .map(|&(b, c, f)| f * x[b] * y[c])
            .sum()
    }
}

/// The full su(d) structure: generators, structure constants, roots,
/// fundamental and magnetic weights, ladder components. Immutable after
/// construction.
#[derive(Debug, Clone)]
pub struct AlgebraData {
    d: usize,
    generators: Vec<CMat>,
    kinds: Vec<GeneratorKind>,
    structure_constants: StructureConstants,
    roots: Vec<Root>,
    fundamental_weights: Vec<RVec>,
    ladder_components: Vec<DVector<Complex64>>,
}

/// Construct the full su(d) data. Errors for d < 2 or d > 32.
pub fn build_algebra(d: usize) -> Result<AlgebraData> {
    AlgebraData::new(d)
}

impl AlgebraData {
    pub fn new(d: usize) -> Result<Self> {
        if !(2..=MAX_DIMENSION).contains(&d) {
            return Err(Error::InvalidDimension(d));
        }
        let (generators, kinds) = build_generators(d);
        let structure_constants = compute_structure_constants(d, &generators, &kinds);

        let fundamental_weights: Vec<RVec> = (0..d)
            .map(|i| RVec::from_iterator(d - 1, (0..d - 1).map(|q| generators[q][(i, i)].re)))
            .collect();

        let mut roots = Vec::new();
        let mut idx = d - 1;
        for i in 0..d {
            for k in (i + 1)..d {
                roots.push(Root {
                    i,
                    k,
                    vector: &fundamental_weights[i] - &fundamental_weights[k],
                    sym_index: idx,
                    asym_index: idx + 1,
                });
                idx += 2;
            }
        }

        let scale = 1.0 / (2.0 * d as f64).sqrt();
        let ladder_components = roots
            .iter()
            .map(|r| {
                let mut e = CMat::zeros(d, d);
                e[(r.i, r.k)] = cr(scale);
                expand_complex_in(&generators, d, &e)
            })
            .collect();

        Ok(Self {
            d,
            generators,
            kinds,
            structure_constants,
            roots,
            fundamental_weights,
            ladder_components,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of generators, d²−1.
    pub fn dim(&self) -> usize {
        self.d * self.d - 1
    }

    pub fn generators(&self) -> &[CMat] {
        &self.generators
    }

    pub fn generator(&self, a: usize) -> &CMat {
        &self.generators[a]
    }

    pub fn kind(&self, a: usize) -> GeneratorKind {
        self.kinds[a]
    }

    /// Cartan generator T_q, q = 1..d−1 (1-based).
    pub fn cartan(&self, q: usize) -> Result<&CMat> {
        if q == 0 || q >= self.d {
            return Err(Error::IndexOutOfRange {
                index: q,
                max: self.d - 1,
            });
        }
        Ok(&self.generators[q - 1])
    }

    pub fn structure_constants(&self) -> &StructureConstants {
        &self.structure_constants
    }

    /// Positive roots in (i, k) lexicographic order.
    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn root(&self, index: usize) -> Result<&Root> {
        self.roots
            .get(index)
            .ok_or(Error::IndexOutOfRange {
                index,
                max: self.roots.len() - 1,
            })
    }

    /// Root index for the 0-based pair (i, k), i < k.
    pub fn root_index(&self, i: usize, k: usize) -> Result<usize> {
        self.roots
            .iter()
            .position(|r| r.i == i && r.k == k)
            .ok_or(Error::InvalidInput(format!(
                "no positive root for pair ({i}, {k})"
            )))
    }

    /// Column of E_α components in the T_A basis, matching `roots()` order.
    pub fn ladder_components(&self, root_index: usize) -> Result<&DVector<Complex64>> {
        self.ladder_components
            .get(root_index)
            .ok_or(Error::IndexOutOfRange {
                index: root_index,
                max: self.roots.len() - 1,
            })
    }

    /// Fundamental weight w_i = (T_1|_ii, …, T_{d−1}|_ii), i = 1..d (1-based).
    pub fn fundamental_weight(&self, i: usize) -> Result<&RVec> {
        if i == 0 || i > self.d {
            return Err(Error::IndexOutOfRange {
                index: i,
                max: self.d,
            });
        }
        Ok(&self.fundamental_weights[i - 1])
    }

    pub fn fundamental_weights(&self) -> &[RVec] {
        &self.fundamental_weights
    }

    /// Magnetic weight β_i = 2d·w_i, i = 1..d (1-based).
    pub fn magnetic_weight(&self, i: usize) -> Result<RVec> {
        Ok(self.fundamental_weight(i)? * (2.0 * self.d as f64))
    }

    /// All magnetic weights β_1..β_d.
    pub fn magnetic_weights(&self) -> Vec<RVec> {
        (1..=self.d).map(|i| self.magnetic_weight(i).unwrap()).collect()
    }

    /// Adjoint-representation matrix M_A with M_A|_BC = −i f_ABC.
    /// Built on demand; one matrix is (d²−1)², so callers that need all of
    /// them at large d should iterate rather than collect.
    pub fn adjoint_generator(&self, a: usize) -> CMat {
        let n = self.dim();
        let mut m = CMat::zeros(n, n);
        for &(b, c, f) in self.structure_constants.row(a) {
            m[(b, c)] = -I_C * cr(f);
        }
        m
    }

    /// All adjoint matrices M_1..M_{d²−1}.
    pub fn adjoint_generators(&self) -> Vec<CMat> {
        (0..self.dim()).map(|a| self.adjoint_generator(a)).collect()
    }

    /// β·M = Σ_q β_q M_q over the Cartan block (β has d−1 components).
    pub fn cartan_adjoint_contract(&self, beta: &RVec) -> CMat {
        let n = self.dim();
        let mut m = CMat::zeros(n, n);
        for q in 0..self.d - 1 {
            if beta[q] == 0.0 {
                continue;
            }
            for &(b, c, f) in self.structure_constants.row(q) {
                m[(b, c)] += -I_C * cr(beta[q] * f);
            }
        }
        m
    }

    /// Σ_q β_q T_q for a (d−1)-component Cartan vector.
    pub fn cartan_contract(&self, beta: &RVec) -> CMat {
        let mut m = CMat::zeros(self.d, self.d);
        for q in 0..self.d - 1 {
            m += &self.generators[q] * cr(beta[q]);
        }
        m
    }

    /// Components X^A = 2d·Tr(T_A X) of a Hermitian traceless X.
    pub fn expand(&self, x: &CMat) -> RVec {
        let two_d = 2.0 * self.d as f64;
        RVec::from_iterator(
            self.dim(),
            self.generators
                .iter()
                .map(|t| two_d * (t * x).diagonal().iter().map(|z| z.re).sum::<f64>()),
        )
    }

    /// Complex components for arbitrary traceless X (ladder operators).
    pub fn expand_complex(&self, x: &CMat) -> DVector<Complex64> {
        expand_complex_in(&self.generators, self.d, x)
    }

    /// Σ_A x_A T_A.
    pub fn contract(&self, x: &RVec) -> CMat {
        let mut m = CMat::zeros(self.d, self.d);
        for (a, t) in self.generators.iter().enumerate() {
            if x[a] != 0.0 {
                m += t * cr(x[a]);
            }
        }
        m
    }

    /// The algebra metric ⟨X, Y⟩ = Tr(Ad(X) Ad(Y)) = X^A Y^A, evaluated by
    /// component expansion.
    pub fn metric(&self, x: &CMat, y: &CMat) -> f64 {
        self.expand(x).dot(&self.expand(y))
    }

    /// Best center label for exp(i2π β·T): the z ∈ 0..d−1 minimizing
    /// ‖exp(i2π β·T) − e^{2πiz/d} I‖_F, together with that residual.
    pub fn center_element(&self, beta: &RVec) -> (i64, f64) {
        let h = self.cartan_contract(beta);
        let e = crate::linalg::exp_i_hermitian(&h, std::f64::consts::TAU);
        let eye = identity_c(self.d);
        let mut best = (0i64, f64::MAX);
        for z in 0..self.d {
            let phase = Complex64::from_polar(1.0, std::f64::consts::TAU * z as f64 / self.d as f64);
            let res = frobenius_norm(&(&e - &eye * phase));
            if res < best.1 {
                best = (z as i64, res);
            }
        }
        best
    }

    /// Embedded su(2) triplet for a positive root:
    /// ( α·T/α², T_α/√α², T_ᾱ/√α² ), closing [X, Y] = iZ cyclically.
    pub fn su2_triplet(&self, root_index: usize) -> Result<[CMat; 3]> {
        let root = self.root(root_index)?;
        let alpha_sq = root.vector.dot(&root.vector);
        let x = self.cartan_contract(&root.vector) / cr(alpha_sq);
        let y = &self.generators[root.sym_index] / cr(alpha_sq.sqrt());
        let z = &self.generators[root.asym_index] / cr(alpha_sq.sqrt());
        Ok([x, y, z])
    }
}

fn expand_complex_in(generators: &[CMat], d: usize, x: &CMat) -> DVector<Complex64> {
    let two_d = cr(2.0 * d as f64);
    DVector::from_iterator(
        generators.len(),
        generators
            .iter()
            .map(|t| two_d * (t * x).diagonal().sum()),
    )
}

fn build_generators(d: usize) -> (Vec<CMat>, Vec<GeneratorKind>) {
    let mut gens = Vec::with_capacity(d * d - 1);
    let mut kinds = Vec::with_capacity(d * d - 1);

    for q in 1..d {
        let norm = 1.0 / (2.0 * q as f64 * (q as f64 + 1.0) * d as f64).sqrt();
        let mut t = CMat::zeros(d, d);
        for j in 0..q {
            t[(j, j)] = cr(norm);
        }
        t[(q, q)] = cr(-(q as f64) * norm);
        gens.push(t);
        kinds.push(GeneratorKind::Cartan { q });
    }

    let off = 1.0 / (2.0 * (d as f64).sqrt());
    for i in 0..d {
        for k in (i + 1)..d {
            let mut sym = CMat::zeros(d, d);
            sym[(i, k)] = cr(off);
            sym[(k, i)] = cr(off);
            gens.push(sym);
            kinds.push(GeneratorKind::Symmetric { i, k });

            let mut asym = CMat::zeros(d, d);
            asym[(i, k)] = -I_C * cr(off);
            asym[(k, i)] = I_C * cr(off);
            gens.push(asym);
            kinds.push(GeneratorKind::Antisymmetric { i, k });
        }
    }
    (gens, kinds)
}

/// f_ABC = −2d·i·Tr([T_A, T_B] T_C), computed numerically and pruned below
/// 1e−13. Sparsity of the generators keeps this cheap up to d = 32: each
/// commutator touches few matrix positions, and only generators supported
/// on those positions can project nontrivially.
fn compute_structure_constants(
    d: usize,
    generators: &[CMat],
    kinds: &[GeneratorKind],
) -> StructureConstants {
    let n = generators.len();

    // position (r, c) -> generators with support there
    let mut support: std::collections::HashMap<(usize, usize), Vec<usize>> =
        std::collections::HashMap::new();
    for (a, kind) in kinds.iter().enumerate() {
        match kind {
            GeneratorKind::Cartan { q } => {
                for j in 0..=*q {
                    support.entry((j, j)).or_default().push(a);
                }
            }
            GeneratorKind::Symmetric { i, k } | GeneratorKind::Antisymmetric { i, k } => {
                support.entry((*i, *k)).or_default().push(a);
                support.entry((*k, *i)).or_default().push(a);
            }
        }
    }

    let two_d = 2.0 * d as f64;
    let mut canonical = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let comm = sparse_commutator(kinds, a, b, generators);
            if comm.is_empty() {
                continue;
            }
            let mut candidates: Vec<usize> = comm
                .keys()
                .filter_map(|pos| support.get(pos))
                .flatten()
                .copied()
                .filter(|&c| c > b)
                .collect();
            candidates.sort_unstable();
            candidates.dedup();
            for c in candidates {
                // Tr(comm · T_c) over T_c's support
                let mut tr = Complex64::new(0.0, 0.0);
                for ((r, col), v) in &comm {
                    let t = generators[c][(*col, *r)];
                    if t != Complex64::new(0.0, 0.0) {
                        tr += v * t;
                    }
                }
                let f = (-I_C * cr(two_d) * tr).re;
                if f.abs() > F_ZERO_TOL {
                    canonical.push((a, b, c, f));
                }
            }
        }
    }

    let mut rows: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n];
    for &(a, b, c, f) in &canonical {
        rows[a].push((b, c, f));
        rows[a].push((c, b, -f));
        rows[b].push((c, a, f));
        rows[b].push((a, c, -f));
        rows[c].push((a, b, f));
        rows[c].push((b, a, -f));
    }
    for row in &mut rows {
        row.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    }

    StructureConstants { n, rows, canonical }
}

fn sparse_commutator(
    kinds: &[GeneratorKind],
    a: usize,
    b: usize,
    generators: &[CMat],
) -> std::collections::HashMap<(usize, usize), Complex64> {
    let entries = |g: usize| -> Vec<(usize, usize, Complex64)> {
        match kinds[g] {
            GeneratorKind::Cartan { q } => {
                let mut v: Vec<(usize, usize, Complex64)> =
                    (0..=q).map(|j| (j, j, generators[g][(j, j)])).collect();
                v.retain(|&(_, _, z)| z != Complex64::new(0.0, 0.0));
                v
            }
            GeneratorKind::Symmetric { i, k } | GeneratorKind::Antisymmetric { i, k } => vec![
                (i, k, generators[g][(i, k)]),
                (k, i, generators[g][(k, i)]),
            ],
        }
    };
    let ea = entries(a);
    let eb = entries(b);
    let mut out: std::collections::HashMap<(usize, usize), Complex64> =
        std::collections::HashMap::new();
    for &(r1, c1, v1) in &ea {
        for &(r2, c2, v2) in &eb {
            if c1 == r2 {
                *out.entry((r1, c2)).or_insert(Complex64::new(0.0, 0.0)) += v1 * v2;
            }
            if c2 == r1 {
                *out.entry((r2, c1)).or_insert(Complex64::new(0.0, 0.0)) -= v2 * v1;
            }
        }
    }
    out.retain(|_, v| v.norm() > 1e-300);
    out
}
