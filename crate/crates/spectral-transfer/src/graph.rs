//! Weighted graphs, Laplacians, custom inner products and eigendecomposition
//! of diagonalizable operators.
//!
//! A non-symmetric matrix is normal under the inner product ⟨u, v⟩ = vᴴBu with
//! B = Γ^{-H}Γ^{-1}, where Γ holds its eigenvectors as columns. Spectral
//! projections are algebraic objects, so [`eigendecompose`] computes them
//! without reference to B; B only enters norms and adjoints.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, condition_number, frobenius, to_complex, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    /// Undirected graphs keep each edge once with u <= v.
    edges: Vec<(usize, usize, f64)>,
    directed: bool,
}

impl WeightedGraph {
    /// Builds a graph, merging nothing: duplicate edges are an error.
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>, directed: bool) -> Result<Self> {
        let mut canon = Vec::with_capacity(edges.len());
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::Topology(format!("edge ({u}, {v}) out of range for {n} vertices")));
            }
            if !w.is_finite() {
                return Err(Error::Topology(format!("edge ({u}, {v}) has non-finite weight {w}")));
            }
            let (a, b) = if directed || u <= v { (u, v) } else { (v, u) };
            canon.push((a, b, w));
        }
        canon.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        for pair in canon.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(Error::Topology(format!("duplicate edge ({}, {})", pair[0].0, pair[0].1)));
            }
        }
        Ok(Self { n, edges: canon, directed })
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let key = if self.directed || u <= v { (u, v) } else { (v, u) };
        self.edges.binary_search_by(|e| (e.0, e.1).cmp(&key)).is_ok()
    }

    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(self.n, self.n);
        for &(u, v, x) in &self.edges {
            w[(u, v)] = x;
            if !self.directed {
                w[(v, u)] = x;
            }
        }
        w
    }

    /// Weighted (out-)degrees, the row sums of W.
    pub fn degrees(&self) -> Vec<f64> {
        let w = self.adjacency();
        (0..self.n).map(|i| w.row(i).sum()).collect()
    }

    /// Neighbor lists with weights (out-neighbors for directed graphs).
    pub fn neighbors(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v, w) in &self.edges {
            adj[u].push((v, w));
            if !self.directed && u != v {
                adj[v].push((u, w));
            }
        }
        adj
    }

    /// Induced subgraph on `keep` (sorted, distinct), reindexed in that order.
    pub fn induced_subgraph(&self, keep: &[usize]) -> Result<Self> {
        let mut index = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            index[old] = new;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v, _)| index[u] != usize::MAX && index[v] != usize::MAX)
            .map(|&(u, v, w)| (index[u], index[v], w))
            .collect();
        Self::new(keep.len(), edges, self.directed)
    }
}

/// Path graph 0 - 1 - … - (n-1) with unit weights.
pub fn path(n: usize) -> WeightedGraph {
    let edges = (1..n).map(|i| (i - 1, i, 1.0)).collect();
    WeightedGraph::new(n, edges, false).expect("path edges are valid")
}

pub fn cycle(n: usize) -> WeightedGraph {
    let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
    if n > 2 {
        edges.push((n - 1, 0, 1.0));
    }
    WeightedGraph::new(n, edges, false).expect("cycle edges are valid")
}

/// r × c grid graph, vertex (i, j) has index i·c + j.
pub fn grid(rows: usize, cols: usize) -> WeightedGraph {
    let mut edges = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let v = i * cols + j;
            if j + 1 < cols {
                edges.push((v, v + 1, 1.0));
            }
            if i + 1 < rows {
                edges.push((v, v + cols, 1.0));
            }
        }
    }
    WeightedGraph::new(rows * cols, edges, false).expect("grid edges are valid")
}

/// Points uniform in the unit square, unit-weight edges for pairs closer than `radius`.
pub fn random_geometric(n: usize, radius: f64, seed: u64) -> (WeightedGraph, Vec<[f64; 2]>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let dx = pts[i][0] - pts[j][0];
            let dy = pts[i][1] - pts[j][1];
            if dx * dx + dy * dy < radius * radius {
                edges.push((i, j, 1.0));
            }
        }
    }
    (WeightedGraph::new(n, edges, false).expect("geometric edges are valid"), pts)
}

/// Hermitian positive-definite B defining ⟨u, v⟩ = vᴴBu.
#[derive(Debug, Clone, PartialEq)]
pub enum InnerProduct {
    Identity,
    Diagonal(DVector<f64>),
    Dense(DMatrix<C64>),
}

impl InnerProduct {
    pub fn diagonal(d: DVector<f64>) -> Result<Self> {
        if let Some((i, x)) = d.iter().enumerate().find(|(_, x)| !(**x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidInnerProduct(format!("diagonal entry {i} is {x}")));
        }
        Ok(InnerProduct::Diagonal(d))
    }

    /// Validates B = Bᴴ and positive definiteness.
    pub fn dense(b: DMatrix<C64>) -> Result<Self> {
        if !b.is_square() {
            return Err(Error::InvalidInnerProduct("B is not square".into()));
        }
        let scale = frobenius(&b).max(1e-300);
        if frobenius(&(&b - b.adjoint())) > 1e-10 * scale {
            return Err(Error::InvalidInnerProduct("B is not Hermitian".into()));
        }
        if b.clone().cholesky().is_none() {
            return Err(Error::InvalidInnerProduct("B is not positive definite".into()));
        }
        Ok(InnerProduct::Dense(b))
    }

    pub fn matrix(&self, n: usize) -> DMatrix<C64> {
        match self {
            InnerProduct::Identity => DMatrix::identity(n, n),
            InnerProduct::Diagonal(d) => DMatrix::from_diagonal(&d.map(c)),
            InnerProduct::Dense(b) => b.clone(),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            InnerProduct::Identity => None,
            InnerProduct::Diagonal(d) => Some(d.len()),
            InnerProduct::Dense(b) => Some(b.nrows()),
        }
    }

    /// F with Bᴴ = B = FᴴF, so that ‖v‖_B = ‖Fv‖₂.
    pub fn half(&self, n: usize) -> DMatrix<C64> {
        match self {
            InnerProduct::Identity => DMatrix::identity(n, n),
            InnerProduct::Diagonal(d) => DMatrix::from_diagonal(&d.map(|x| c(x.sqrt()))),
            InnerProduct::Dense(b) => b.clone().cholesky().expect("validated at construction").l().adjoint(),
        }
    }

    /// F^{-1}, for operator norms with domain L²(B).
    pub fn half_inverse(&self, n: usize) -> DMatrix<C64> {
        match self {
            InnerProduct::Identity => DMatrix::identity(n, n),
            InnerProduct::Diagonal(d) => DMatrix::from_diagonal(&d.map(|x| c(1.0 / x.sqrt()))),
            InnerProduct::Dense(_) => self.half(n).try_inverse().expect("Cholesky factor is invertible"),
        }
    }

    pub fn inner(&self, u: &DVector<C64>, v: &DVector<C64>) -> C64 {
        match self {
            InnerProduct::Identity => v.dotc(u),
            InnerProduct::Diagonal(d) => u.iter().zip(v.iter()).zip(d.iter()).map(|((a, b), w)| b.conj() * a * *w).sum(),
            InnerProduct::Dense(b) => v.dotc(&(b * u)),
        }
    }

    pub fn norm(&self, v: &DVector<C64>) -> f64 {
        self.inner(v, v).re.max(0.0).sqrt()
    }

    pub fn norm_real(&self, v: &DVector<f64>) -> f64 {
        match self {
            InnerProduct::Identity => v.norm(),
            InnerProduct::Diagonal(d) => v.iter().zip(d.iter()).map(|(x, w)| x * x * w).sum::<f64>().sqrt(),
            InnerProduct::Dense(_) => self.norm(&v.map(c)),
        }
    }
}

/// A square operator together with the inner product under which it is normal.
#[derive(Debug, Clone)]
pub struct OperatorWithInnerProduct {
    pub matrix: DMatrix<f64>,
    pub inner: InnerProduct,
}

impl OperatorWithInnerProduct {
    pub fn new(matrix: DMatrix<f64>, inner: InnerProduct) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!("operator is {}×{}", matrix.nrows(), matrix.ncols())));
        }
        if let Some(d) = inner.dim() {
            if d != matrix.nrows() {
                return Err(Error::Dimension(format!("operator is {0}×{0} but B is {d}×{d}", matrix.nrows())));
            }
        }
        Ok(Self { matrix, inner })
    }

    pub fn symmetric(matrix: DMatrix<f64>) -> Result<Self> {
        Self::new(matrix, InnerProduct::Identity)
    }

    /// Pairs a diagonalizable matrix with B = Γ^{-H}Γ^{-1}, making it normal.
    pub fn with_eigenvector_inner_product(matrix: DMatrix<f64>) -> Result<Self> {
        let op = Self::new(matrix, InnerProduct::Identity)?;
        let gamma = general_eigenvectors(&op.matrix, None)?.1;
        let gi = gamma.try_inverse().ok_or_else(|| Error::Decomposition("eigenvector matrix is singular".into()))?;
        let b = gi.adjoint() * &gi;
        // symmetrize away round-off before validation
        let b = (&b + b.adjoint()) * c(0.5);
        Ok(Self { matrix: op.matrix, inner: InnerProduct::dense(b)? })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Result<DMatrix<C64>> {
        adjoint_wrt(&to_complex(&self.matrix), &self.inner)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LaplacianKind {
    Unnormalized,
    Normalized,
    Adjacency,
}

/// D − W, I − D^{-1/2}WD^{-1/2} or W.
///
/// Symmetric results carry B = I. Directed graphs get the eigenvector inner
/// product so that the operator is normal.
pub fn build_laplacian(graph: &WeightedGraph, kind: LaplacianKind) -> Result<OperatorWithInnerProduct> {
    let n = graph.n_vertices();
    if n == 0 {
        return Err(Error::Topology("graph has no vertices".into()));
    }
    let w = graph.adjacency();
    let deg = graph.degrees();
    let m = match kind {
        LaplacianKind::Adjacency => w,
        LaplacianKind::Unnormalized => DMatrix::from_diagonal(&DVector::from_vec(deg)) - w,
        LaplacianKind::Normalized => {
            if let Some(v) = deg.iter().position(|d| *d <= 0.0) {
                return Err(Error::DegenerateDegree { vertex: v });
            }
            let s: Vec<f64> = deg.iter().map(|d| 1.0 / d.sqrt()).collect();
            let mut l = DMatrix::identity(n, n);
            for i in 0..n {
                for j in 0..n {
                    l[(i, j)] -= s[i] * w[(i, j)] * s[j];
                }
            }
            l
        }
    };
    if graph.is_directed() && !is_symmetric(&m) {
        OperatorWithInnerProduct::with_eigenvector_inner_product(m)
    } else {
        OperatorWithInnerProduct::symmetric(m)
    }
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    let scale = m.norm().max(1e-300);
    (m - m.transpose()).norm() <= 1e-12 * scale
}

/// B^{-1}AᴴB.
pub fn adjoint_wrt(a: &DMatrix<C64>, inner: &InnerProduct) -> Result<DMatrix<C64>> {
    if !a.is_square() {
        return Err(Error::Dimension("adjoint of a non-square matrix".into()));
    }
    let n = a.nrows();
    match inner {
        InnerProduct::Identity => Ok(a.adjoint()),
        InnerProduct::Diagonal(d) => {
            if d.len() != n {
                return Err(Error::Dimension(format!("B has size {} for a {n}×{n} operator", d.len())));
            }
            if d.iter().any(|x| *x == 0.0) {
                return Err(Error::InvalidInnerProduct("B is singular".into()));
            }
            let ah = a.adjoint();
            Ok(DMatrix::from_fn(n, n, |i, j| ah[(i, j)] * (d[j] / d[i])))
        }
        InnerProduct::Dense(b) => {
            if b.nrows() != n {
                return Err(Error::Dimension(format!("B has size {} for a {n}×{n} operator", b.nrows())));
            }
            let lu = b.clone().lu();
            let rhs = a.adjoint() * b;
            lu.solve(&rhs).ok_or_else(|| Error::InvalidInnerProduct("B is singular".into()))
        }
    }
}

/// ‖AA* − A*A‖_F with the B-adjoint; zero for normal operators.
pub fn normality_defect(op: &OperatorWithInnerProduct) -> Result<f64> {
    let a = to_complex(&op.matrix);
    let s = op.adjoint()?;
    Ok(frobenius(&(&a * &s - &s * &a)))
}

/// One eigenspace: P_j = V_j D_jᴴ.
#[derive(Debug, Clone)]
pub struct EigenGroup {
    pub value: C64,
    pub vectors: DMatrix<C64>,
    pub duals: DMatrix<C64>,
}

impl EigenGroup {
    pub fn multiplicity(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn projection(&self) -> DMatrix<C64> {
        &self.vectors * self.duals.adjoint()
    }
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    groups: Vec<EigenGroup>,
    dim: usize,
    real: bool,
    group_tol: f64,
    merged: bool,
}

impl EigenDecomposition {
    pub fn groups(&self) -> &[EigenGroup] {
        &self.groups
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when eigenvalues and eigenvectors are real (symmetrizable input).
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn group_tol(&self) -> f64 {
        self.group_tol
    }

    /// Whether the tolerance merged numerically distinct eigenvalues.
    pub fn merged_eigenvalues(&self) -> bool {
        self.merged
    }

    /// Eigenvalues repeated by multiplicity, in group order.
    pub fn eigenvalues(&self) -> Vec<C64> {
        self.groups.iter().flat_map(|g| std::iter::repeat(g.value).take(g.multiplicity())).collect()
    }

    pub fn real_eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues().iter().map(|z| z.re).collect()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.groups.iter().map(|g| g.value.norm()).fold(0.0, f64::max)
    }

    /// Σ_j g(λ_j) P_j.
    pub fn function_matrix<F>(&self, mut g: F) -> Result<DMatrix<C64>>
    where
        F: FnMut(C64) -> Result<C64>,
    {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for grp in &self.groups {
            let gv = g(grp.value)?;
            if gv != C64::new(0.0, 0.0) {
                out += (&grp.vectors * grp.duals.adjoint()) * gv;
            }
        }
        Ok(out)
    }

    pub fn apply<F>(&self, mut g: F, s: &DVector<C64>) -> Result<DVector<C64>>
    where
        F: FnMut(C64) -> Result<C64>,
    {
        if s.len() != self.dim {
            return Err(Error::Dimension(format!("signal has length {} for dimension {}", s.len(), self.dim)));
        }
        let mut out = DVector::zeros(self.dim);
        for grp in &self.groups {
            let gv = g(grp.value)?;
            if gv != C64::new(0.0, 0.0) {
                out += &grp.vectors * (grp.duals.adjoint() * s) * gv;
            }
        }
        Ok(out)
    }

    /// Σ_j λ_j P_j.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        self.function_matrix(Ok).expect("identity function never fails")
    }

    /// Real eigenvalues and real eigenvectors (column per eigenvalue, with multiplicity).
    pub fn real_modes(&self) -> Option<(Vec<f64>, DMatrix<f64>)> {
        if !self.real {
            return None;
        }
        let vals = self.real_eigenvalues();
        let mut v = DMatrix::zeros(self.dim, vals.len());
        let mut col = 0;
        for grp in &self.groups {
            for k in 0..grp.multiplicity() {
                for i in 0..self.dim {
                    v[(i, col)] = grp.vectors[(i, k)].re;
                }
                col += 1;
            }
        }
        Some((vals, v))
    }
}

/// Default grouping tolerance: 1e-8 × spectral radius.
pub fn default_group_tol(radius: f64) -> f64 {
    (1e-8 * radius).max(1e-14)
}

/// Eigendecomposition with eigenvalues within `group_tol` merged into one eigenspace.
pub fn eigendecompose(op: &OperatorWithInnerProduct, group_tol: Option<f64>) -> Result<EigenDecomposition> {
    let n = op.dim();
    let a = &op.matrix;
    if n == 0 {
        return Err(Error::Decomposition("empty operator".into()));
    }
    let symmetric_route = match &op.inner {
        InnerProduct::Identity => is_symmetric(a).then(|| None),
        InnerProduct::Diagonal(d) => {
            let ba = DMatrix::from_fn(n, n, |i, j| d[i] * a[(i, j)]);
            is_symmetric(&ba).then(|| Some(d.clone()))
        }
        InnerProduct::Dense(_) => None,
    };
    match symmetric_route {
        Some(diag) => symmetric_decomposition(a, diag.as_ref(), group_tol),
        None => general_decomposition(a, group_tol),
    }
}

fn symmetric_decomposition(a: &DMatrix<f64>, diag: Option<&DVector<f64>>, group_tol: Option<f64>) -> Result<EigenDecomposition> {
    let n = a.nrows();
    let (sq, isq): (Vec<f64>, Vec<f64>) = match diag {
        Some(d) => (d.iter().map(|x| x.sqrt()).collect(), d.iter().map(|x| 1.0 / x.sqrt()).collect()),
        None => (vec![1.0; n], vec![1.0; n]),
    };
    // M = B^{1/2} A B^{-1/2}, symmetric by the route check
    let mut m = DMatrix::from_fn(n, n, |i, j| sq[i] * a[(i, j)] * isq[j]);
    m = (&m + m.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let radius = eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let tol = group_tol.unwrap_or_else(|| default_group_tol(radius));

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match clusters.last_mut() {
            Some(cl) if eig.eigenvalues[i] - eig.eigenvalues[*cl.last().unwrap()] <= tol => cl.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    let mut merged = false;
    let mut groups = Vec::with_capacity(clusters.len());
    for cl in clusters {
        let vals: Vec<f64> = cl.iter().map(|&i| eig.eigenvalues[i]).collect();
        if vals.len() > 1 && vals[vals.len() - 1] - vals[0] > 0.0 {
            merged = true;
        }
        let value = vals.iter().sum::<f64>() / vals.len() as f64;
        let u = DMatrix::from_fn(n, cl.len(), |r, k| eig.eigenvectors[(r, cl[k])]);
        let vectors = DMatrix::from_fn(n, cl.len(), |r, k| c(isq[r] * u[(r, k)]));
        let duals = DMatrix::from_fn(n, cl.len(), |r, k| c(sq[r] * u[(r, k)]));
        groups.push(EigenGroup { value: c(value), vectors, duals });
    }
    sort_groups(&mut groups);
    Ok(EigenDecomposition { groups, dim: n, real: true, group_tol: tol, merged })
}

fn sort_groups(groups: &mut [EigenGroup]) {
    groups.sort_by(|x, y| {
        x.value
            .norm()
            .total_cmp(&y.value.norm())
            .then(x.value.re.total_cmp(&y.value.re))
            .then(x.value.im.total_cmp(&y.value.im))
    });
}

/// Eigenvalue clusters and eigenvector matrix Γ of a general real matrix.
fn general_eigenvectors(a: &DMatrix<f64>, group_tol: Option<f64>) -> Result<(Vec<(C64, usize, usize)>, DMatrix<C64>, f64, bool)> {
    let n = a.nrows();
    let lambdas: Vec<C64> = a.clone().complex_eigenvalues().iter().cloned().collect();
    let radius = lambdas.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tol = group_tol.unwrap_or_else(|| default_group_tol(radius));

    // single-linkage clustering
    let mut label: Vec<usize> = (0..n).collect();
    fn find(l: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while l[r] != r {
            r = l[r];
        }
        l[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (lambdas[i] - lambdas[j]).norm() <= tol {
                let (ri, rj) = (find(&mut label, i), find(&mut label, j));
                label[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut label, i);
        match root_of[r] {
            Some(k) => clusters[k].push(i),
            None => {
                root_of[r] = Some(clusters.len());
                clusters.push(vec![i]);
            }
        }
    }

    let ac = to_complex(a);
    let scale = ac.iter().map(|z| z.norm()).fold(0.0, f64::max).max(radius).max(1e-300);
    let mut gamma = DMatrix::zeros(n, n);
    let mut spans = Vec::new();
    let mut col = 0;
    let mut merged = false;
    for cl in &clusters {
        let vals: Vec<C64> = cl.iter().map(|&i| lambdas[i]).collect();
        if vals.iter().any(|v| (*v - vals[0]).norm() > 0.0) {
            merged = true;
        }
        let value = vals.iter().sum::<C64>() / c(vals.len() as f64);
        let m = cl.len();
        let shifted = &ac - DMatrix::<C64>::identity(n, n) * value;
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.expect("requested V");
        let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
        idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
        let worst = svd.singular_values[idx[m - 1]];
        if worst > 1e-6 * scale {
            return Err(Error::Decomposition(format!(
                "eigenvalue {value} has algebraic multiplicity {m} but a smaller eigenspace (σ = {worst:e}); matrix is defective"
            )));
        }
        for (k, &r) in idx.iter().take(m).enumerate() {
            for i in 0..n {
                gamma[(i, col + k)] = vt[(r, i)].conj();
            }
        }
        spans.push((value, col, m));
        col += m;
    }
    let cond = condition_number(&gamma);
    if !(cond <= 1e8) {
        return Err(Error::Decomposition(format!("eigenvector matrix condition number {cond:e} exceeds 1e8")));
    }
    Ok((spans, gamma, tol, merged))
}

fn general_decomposition(a: &DMatrix<f64>, group_tol: Option<f64>) -> Result<EigenDecomposition> {
    let n = a.nrows();
    let (spans, gamma, tol, merged) = general_eigenvectors(a, group_tol)?;
    let gi = gamma.clone().try_inverse().ok_or_else(|| Error::Decomposition("eigenvector matrix is singular".into()))?;
    let mut groups = Vec::with_capacity(spans.len());
    for (value, start, m) in spans {
        let vectors = gamma.columns(start, m).into_owned();
        let duals = gi.rows(start, m).adjoint();
        groups.push(EigenGroup { value, vectors, duals });
    }
    sort_groups(&mut groups);
    Ok(EigenDecomposition { groups, dim: n, real: false, group_tol: tol, merged })
}
