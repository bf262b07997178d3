//! Sampling and interpolation operators between M and G: point evaluation on
//! the circle, heavy-edge coarsening, random sampled Laplacians and graph
//! perturbations.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::graph::{InnerProduct, OperatorWithInnerProduct, WeightedGraph};
use crate::space::{circle_basis, circle_dim, project_composed, BandlimitedKernel, WeightFunction};

/// Sample points x_k on the circle [0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub points: Vec<f64>,
    pub seed: Option<u64>,
}

impl SampleSet {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Parameter("a sample set needs at least one point".into()));
        }
        if let Some(x) = points.iter().find(|x| !(**x >= 0.0 && **x < 1.0)) {
            return Err(Error::Domain(format!("sample point {x} is outside [0, 1)")));
        }
        Ok(Self { points, seed: None })
    }

    pub fn equispaced(n: usize) -> Self {
        Self { points: (0..n).map(|k| k as f64 / n as f64).collect(), seed: None }
    }

    /// n i.i.d. draws from μ_w.
    pub fn random(n: usize, weight: &WeightFunction, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(n, weight, &mut rng, Some(seed))
    }

    pub fn random_with<R: Rng>(n: usize, weight: &WeightFunction, rng: &mut R, seed: Option<u64>) -> Self {
        Self { points: (0..n).map(|_| weight.sample(rng)).collect(), seed }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// h_n = N / μ(M).
    pub fn density(&self) -> f64 {
        self.points.len() as f64
    }

    /// B_n = diag(1/w(x_k)); the identity for uniform sampling.
    pub fn inner_product(&self, weight: &WeightFunction) -> Result<InnerProduct> {
        if *weight == WeightFunction::Uniform {
            return Ok(InnerProduct::Identity);
        }
        let mut d = DVector::zeros(self.len());
        for (k, &x) in self.points.iter().enumerate() {
            let w = weight.eval(x);
            if !(w > 0.0) {
                return Err(Error::Weight { index: k, value: w });
            }
            d[k] = 1.0 / w;
        }
        InnerProduct::diagonal(d)
    }
}

/// S = Φ/√h_n and R = ΦᵀB_n for the circle modes of PW(band).
#[derive(Debug, Clone)]
pub struct SamplingPair {
    pub s_matrix: DMatrix<f64>,
    pub r_matrix: DMatrix<f64>,
    pub band: f64,
    pub target_inner: InnerProduct,
}

impl SamplingPair {
    pub fn n_samples(&self) -> usize {
        self.s_matrix.nrows()
    }

    pub fn dim(&self) -> usize {
        self.s_matrix.ncols()
    }

    /// The pair at a lower band: leading columns only.
    pub fn restrict(&self, band: f64) -> Result<Self> {
        if band > self.band {
            return Err(Error::Band(format!("cannot raise band {} to {band}", self.band)));
        }
        let m = circle_dim(band);
        Ok(Self {
            s_matrix: self.s_matrix.columns(0, m).into_owned(),
            r_matrix: self.r_matrix.rows(0, m).into_owned(),
            band,
            target_inner: self.target_inner.clone(),
        })
    }
}

pub fn evaluation_operator(samples: &SampleSet, band: f64, weight: &WeightFunction) -> Result<SamplingPair> {
    let m = circle_dim(band);
    let n = samples.len();
    let scale = 1.0 / samples.density().sqrt();
    let s = DMatrix::from_fn(n, m, |k, j| circle_basis(j, samples.points[k]) * scale);
    let inner = samples.inner_product(weight)?;
    let r = match &inner {
        InnerProduct::Diagonal(d) => {
            let mut r = s.transpose();
            for (k, w) in d.iter().enumerate() {
                r.column_mut(k).scale_mut(*w);
            }
            r
        }
        _ => s.transpose(),
    };
    Ok(SamplingPair { s_matrix: s, r_matrix: r, band, target_inner: inner })
}

/// ⟨Φ, Φ⟩ = ΦᵀB_nΦ = RS in the Fourier basis.
pub fn gram(pair: &SamplingPair) -> DMatrix<f64> {
    &pair.r_matrix * &pair.s_matrix
}

/// Matched pairs and singletons; coarse nodes ordered by their smallest member.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseningMap {
    pub fine_n: usize,
    pub groups: Vec<Vec<usize>>,
}

impl CoarseningMap {
    pub fn coarse_n(&self) -> usize {
        self.groups.len()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.groups.iter().filter(|g| g.len() == 2).map(|g| (g[0], g[1])).collect()
    }

    pub fn singletons(&self) -> Vec<usize> {
        self.groups.iter().filter(|g| g.len() == 1).map(|g| g[0]).collect()
    }

    /// Rows (1/√2, 1/√2) for pairs and 1 for singletons.
    pub fn s_matrix(&self) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(self.coarse_n(), self.fine_n);
        for (i, g) in self.groups.iter().enumerate() {
            let w = 1.0 / (g.len() as f64).sqrt();
            for &v in g {
                s[(i, v)] = w;
            }
        }
        s
    }

    /// Coarse graph: summed inter-group weights, self-loops dropped.
    pub fn coarse_graph(&self, fine: &WeightedGraph) -> Result<WeightedGraph> {
        let mut owner = vec![0; self.fine_n];
        for (i, g) in self.groups.iter().enumerate() {
            for &v in g {
                owner[v] = i;
            }
        }
        let mut acc = std::collections::BTreeMap::new();
        for &(u, v, w) in fine.edges() {
            let (a, b) = (owner[u], owner[v]);
            if a != b {
                *acc.entry((a.min(b), a.max(b))).or_insert(0.0) += w;
            }
        }
        WeightedGraph::new(self.coarse_n(), acc.into_iter().map(|((a, b), w)| (a, b, w)).collect(), false)
    }
}

/// Heavy-edge matching: visit by ascending weighted degree, pair with the unmatched
/// neighbour maximising w(1/d_u + 1/d_v). A seed shuffles vertices of equal degree.
pub fn coarsen_matching(graph: &WeightedGraph, seed: Option<u64>) -> Result<CoarseningMap> {
    if graph.is_directed() {
        return Err(Error::Topology("coarsening needs an undirected graph".into()));
    }
    let n = graph.n_vertices();
    let deg = graph.degrees();
    let nbrs = graph.neighbors();
    let keys: Vec<u64> = match seed {
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            (0..n).map(|_| rng.gen()).collect()
        }
        None => vec![0; n],
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| deg[a].total_cmp(&deg[b]).then(keys[a].cmp(&keys[b])).then(a.cmp(&b)));
    let mut mate: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    for &u in &order {
        if done[u] {
            continue;
        }
        done[u] = true;
        let mut best: Option<(f64, usize)> = None;
        for &(v, w) in &nbrs[u] {
            if v == u || done[v] {
                continue;
            }
            let score = w * (1.0 / deg[u] + 1.0 / deg[v]);
            let better = match best {
                None => true,
                Some((bs, bv)) => score > bs || (score == bs && v < bv),
            };
            if better {
                best = Some((score, v));
            }
        }
        if let Some((_, v)) = best {
            done[v] = true;
            mate[u] = Some(v);
            mate[v] = Some(u);
        }
    }
    let mut groups = Vec::new();
    for v in 0..n {
        match mate[v] {
            Some(u) if u < v => {}
            Some(u) => groups.push(vec![v, u]),
            None => groups.push(vec![v]),
        }
    }
    Ok(CoarseningMap { fine_n: n, groups })
}

/// R = S* from (C^n, B_fine) to (C^N, I): B_fine^{-1} Sᵀ.
pub fn coarsening_r(map: &CoarseningMap, fine_inner: &InnerProduct) -> Result<DMatrix<f64>> {
    let st = map.s_matrix().transpose();
    Ok(match fine_inner {
        InnerProduct::Identity => st,
        InnerProduct::Diagonal(d) => {
            let mut r = st;
            for (i, b) in d.iter().enumerate() {
                r.row_mut(i).scale_mut(1.0 / b);
            }
            r
        }
        InnerProduct::Dense(b) => {
            let br = b.map(|z| z.re);
            br.lu().solve(&st).ok_or_else(|| Error::InvalidInnerProduct("B is singular".into()))?
        }
    })
}

/// Δ = S L R with R = S*.
pub fn coarsened_laplacian(map: &CoarseningMap, fine: &OperatorWithInnerProduct) -> Result<OperatorWithInnerProduct> {
    if fine.dim() != map.fine_n {
        return Err(Error::Dimension(format!("map covers {} vertices, operator has {}", map.fine_n, fine.dim())));
    }
    let s = map.s_matrix();
    let r = coarsening_r(map, &fine.inner)?;
    let delta = &s * &fine.matrix * r;
    let sym = (&delta - delta.transpose()).amax() <= 1e-12 * delta.amax().max(1.0);
    if sym {
        OperatorWithInnerProduct::symmetric((&delta + delta.transpose()) * 0.5)
    } else {
        OperatorWithInnerProduct::with_eigenvector_inner_product(delta)
    }
}

/// [Δ_n q]_k = N^{-1} Σ_k' H(x_k, x_k') q_k' / w(x_k'), self-adjoint under B_n = diag(1/w).
pub fn random_sampled_laplacian(
    kernel: &BandlimitedKernel,
    samples: &SampleSet,
    weight: &WeightFunction,
) -> Result<OperatorWithInnerProduct> {
    let inner = samples.inner_product(weight)?;
    let n = samples.len();
    let inv_w: Vec<f64> = samples.points.iter().map(|&x| 1.0 / weight.eval(x)).collect();
    let m = DMatrix::from_fn(n, n, |k, j| kernel.eval(samples.points[k], samples.points[j]) * inv_w[j] / n as f64);
    OperatorWithInnerProduct::new(m, inner)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationMode {
    RemoveEdges,
    AddEdges,
    RemoveVertices,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub mode: PerturbationMode,
    pub fraction: f64,
    pub seed: u64,
}

/// The perturbed graph and, for vertex deletion, the surviving fine vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedGraph {
    pub graph: WeightedGraph,
    pub kept: Vec<usize>,
}

impl PerturbedGraph {
    /// Restriction rows e_kᵀ for the surviving vertices.
    pub fn restriction(&self, fine_n: usize) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(self.kept.len(), fine_n);
        for (i, &v) in self.kept.iter().enumerate() {
            s[(i, v)] = 1.0;
        }
        s
    }

    pub fn is_vertex_subset(&self, fine_n: usize) -> bool {
        self.kept.len() != fine_n
    }
}

pub fn perturb_graph(graph: &WeightedGraph, spec: &PerturbationSpec) -> Result<PerturbedGraph> {
    if !(0.0..=1.0).contains(&spec.fraction) {
        return Err(Error::Parameter(format!("perturbation fraction {} is outside [0, 1]", spec.fraction)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = graph.n_vertices();
    let all: Vec<usize> = (0..n).collect();
    match spec.mode {
        PerturbationMode::RemoveEdges => {
            let e = graph.n_edges();
            let k = (spec.fraction * e as f64).floor() as usize;
            if k == e && e > 0 {
                return Err(Error::DegeneratePerturbation("removing every edge".into()));
            }
            let mut idx: Vec<usize> = (0..e).collect();
            idx.shuffle(&mut rng);
            let mut drop = vec![false; e];
            for &i in &idx[..k] {
                drop[i] = true;
            }
            let edges = graph.edges().iter().zip(&drop).filter(|(_, d)| !**d).map(|(e, _)| *e).collect();
            Ok(PerturbedGraph { graph: WeightedGraph::new(n, edges, graph.is_directed())?, kept: all })
        }
        PerturbationMode::AddEdges => {
            let mut non_edges = Vec::new();
            for u in 0..n {
                let start = if graph.is_directed() { 0 } else { u + 1 };
                for v in start..n {
                    if u != v && !graph.has_edge(u, v) {
                        non_edges.push((u, v));
                    }
                }
            }
            let k = ((spec.fraction * graph.n_edges() as f64).floor() as usize).min(non_edges.len());
            non_edges.shuffle(&mut rng);
            let mut edges = graph.edges().to_vec();
            edges.extend(non_edges[..k].iter().map(|&(u, v)| (u, v, 1.0)));
            Ok(PerturbedGraph { graph: WeightedGraph::new(n, edges, graph.is_directed())?, kept: all })
        }
        PerturbationMode::RemoveVertices => {
            let k = (spec.fraction * n as f64).floor() as usize;
            if k >= n {
                return Err(Error::DegeneratePerturbation("removing every vertex".into()));
            }
            let mut idx = all;
            idx.shuffle(&mut rng);
            let mut kept = idx[k..].to_vec();
            kept.sort_unstable();
            Ok(PerturbedGraph { graph: graph.induced_subgraph(&kept)?, kept })
        }
    }
}

/// max over probes of ‖ρ(S^λ f) − S^{λ'} P(λ') ρ(f)‖_{B_n} / ‖f‖ for f ∈ PW(λ) (circle coefficients).
pub fn activation_commutation_error(
    pair: &SamplingPair,
    pair_hi: &SamplingPair,
    activation: Activation,
    probes: &[DVector<f64>],
) -> Result<f64> {
    if pair_hi.band < pair.band {
        return Err(Error::Band(format!("λ' = {} is below λ = {}", pair_hi.band, pair.band)));
    }
    if pair.n_samples() != pair_hi.n_samples() {
        return Err(Error::Dimension("both pairs must share the sample set".into()));
    }
    let mut worst = 0.0f64;
    for f in probes {
        if f.len() != pair.dim() {
            return Err(Error::Dimension(format!("probe has {} coefficients, PW has {}", f.len(), pair.dim())));
        }
        let nf = f.norm();
        if nf == 0.0 {
            return Err(Error::Parameter("probe signals must be nonzero".into()));
        }
        let sampled = (&pair.s_matrix * f).map(|y| activation.apply(y));
        let rho_coeffs = match activation {
            Activation::Identity => {
                let mut v = DVector::zeros(pair_hi.dim());
                v.rows_mut(0, f.len()).copy_from(f);
                v
            }
            a => project_composed(f, |y| a.apply(y), pair_hi.dim()),
        };
        let diff = sampled - &pair_hi.s_matrix * rho_coeffs;
        worst = worst.max(pair.target_inner.norm_real(&diff) / nf);
    }
    Ok(worst)
}
