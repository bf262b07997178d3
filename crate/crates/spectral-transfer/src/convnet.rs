//! Fixed-weight spectral ConvNets on graphs and on the continuous space, with
//! pooling, the four hypothesis terms of the ConvNet transferability theorem,
//! and its end-to-end certificate.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::filter::{apply_exact_real, empirical_lipschitz, sup_norm_on_spectrum, Filter, FilterKind};
use crate::graph::{eigendecompose, EigenDecomposition, OperatorWithInnerProduct};
use crate::linalg::{c, spectral_norm, spectral_norm_real, to_complex};
use crate::sampling::{coarsened_laplacian, CoarseningMap};
use crate::space::{
    circle_dim, circle_eigenvalue, circle_frequency, derivative_energy, max_frequency, project_composed,
    random_unit_coefficients, GraphSpace,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    #[default]
    None,
    /// max over parents / √K (nonnegative signals only).
    Max,
    /// √(Σ s² / K).
    L2avg,
}

/// Pool a signal over the groups of a coarsening map.
pub fn pool(signal: &DVector<f64>, map: &CoarseningMap, kind: Pooling) -> Result<DVector<f64>> {
    if signal.len() != map.fine_n {
        return Err(Error::Dimension(format!("signal has length {} for a map from {} vertices", signal.len(), map.fine_n)));
    }
    match kind {
        Pooling::None => Err(Error::Parameter("pooling kind `none` has no coarsening action".into())),
        Pooling::Max => {
            if let Some(k) = signal.iter().position(|v| *v < 0.0) {
                return Err(Error::Domain(format!("max pooling needs a nonnegative signal; entry {k} is {}", signal[k])));
            }
            Ok(pool_unchecked(signal, map, kind))
        }
        Pooling::L2avg => Ok(pool_unchecked(signal, map, kind)),
    }
}

/// The pooling formulas without the sign check. The max formula on signed input
/// is what the pooling-consistency hypothesis measures on sampled PW signals.
fn pool_unchecked(signal: &DVector<f64>, map: &CoarseningMap, kind: Pooling) -> DVector<f64> {
    DVector::from_iterator(
        map.coarse_n(),
        map.groups.iter().map(|g| {
            let k = g.len() as f64;
            match kind {
                Pooling::Max => g.iter().map(|&v| signal[v]).fold(f64::NEG_INFINITY, f64::max) / k.sqrt(),
                _ => (g.iter().map(|&v| signal[v] * signal[v]).sum::<f64>() / k).sqrt(),
            }
        }),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    /// K_l × K_{l−1}, indexed [k'][k].
    pub filters: Vec<Vec<Filter>>,
    pub mix: DMatrix<f64>,
    pub bias: Vec<f64>,
    pub pooling: Pooling,
}

impl ConvLayer {
    pub fn inputs(&self) -> usize {
        self.mix.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.mix.nrows()
    }

    /// ‖A‖_∞, the largest absolute row sum.
    pub fn mix_norm(&self) -> f64 {
        self.mix.row_iter().map(|r| r.iter().map(|a| a.abs()).sum::<f64>()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvNetSpec {
    pub layers: Vec<ConvLayer>,
    pub activation: Activation,
    /// ψ_0 ≤ ψ_1 ≤ … ≤ ψ_L.
    pub bands: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDoc {
    filters: Vec<Vec<FilterKind>>,
    mix: Vec<Vec<f64>>,
    #[serde(default)]
    bias: Vec<f64>,
    #[serde(default)]
    pooling: Pooling,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDoc {
    activation: Activation,
    bands: Vec<f64>,
    layers: Vec<LayerDoc>,
}

impl ConvNetSpec {
    pub fn new(layers: Vec<ConvLayer>, activation: Activation, bands: Vec<f64>) -> Result<Self> {
        let spec = Self { layers, activation, bands };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Config("a ConvNet needs at least one layer".into()));
        }
        if self.bands.len() != self.layers.len() + 1 {
            return Err(Error::Config(format!("{} layers need {} bands, got {}", self.layers.len(), self.layers.len() + 1, self.bands.len())));
        }
        if self.bands.iter().any(|b| !b.is_finite() || *b < 0.0) || self.bands.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Band(format!("bands {:?} must be finite, nonnegative and nondecreasing", self.bands)));
        }
        for (l, layer) in self.layers.iter().enumerate() {
            let (ko, ki) = (layer.outputs(), layer.inputs());
            if ko == 0 || ki == 0 {
                return Err(Error::Topology(format!("layer {} has no channels", l + 1)));
            }
            if layer.filters.len() != ko || layer.filters.iter().any(|r| r.len() != ki) {
                return Err(Error::Topology(format!("layer {} filter grid does not match its {ko}×{ki} mix", l + 1)));
            }
            if layer.bias.len() != ko {
                return Err(Error::Topology(format!("layer {} has {} biases for {ko} channels", l + 1, layer.bias.len())));
            }
            if l > 0 && self.layers[l - 1].outputs() != ki {
                return Err(Error::Topology(format!("layer {} expects {ki} channels, layer {l} gives {}", l + 1, self.layers[l - 1].outputs())));
            }
            if layer.pooling == Pooling::Max && !self.activation.is_nonnegative() {
                return Err(Error::Config(format!("layer {} max-pools after a sign-changing activation", l + 1)));
            }
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let doc: SpecDoc = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut layers = Vec::with_capacity(doc.layers.len());
        for (l, d) in doc.layers.into_iter().enumerate() {
            let ko = d.mix.len();
            let ki = d.mix.first().map_or(0, |r| r.len());
            if d.mix.iter().any(|r| r.len() != ki) {
                return Err(Error::Config(format!("layer {} mix rows have unequal lengths", l + 1)));
            }
            let filters = d
                .filters
                .into_iter()
                .map(|row| row.into_iter().map(Filter::new).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            let bias = if d.bias.is_empty() { vec![0.0; ko] } else { d.bias };
            let mix = DMatrix::from_fn(ko, ki, |i, j| d.mix[i][j]);
            layers.push(ConvLayer { filters, mix, bias, pooling: d.pooling });
        }
        Self::new(layers, doc.activation, doc.bands)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_channels(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_channels(&self) -> usize {
        self.layers[self.depth() - 1].outputs()
    }

    /// A = max_l ‖A^l‖_∞.
    pub fn a_bound(&self) -> f64 {
        self.layers.iter().map(ConvLayer::mix_norm).fold(0.0, f64::max)
    }

    pub fn max_bias(&self) -> f64 {
        self.layers.iter().flat_map(|l| l.bias.iter()).map(|b| b.abs()).fold(0.0, f64::max)
    }

    pub fn is_bias_free(&self) -> bool {
        self.max_bias() == 0.0
    }

    /// max over filters and layers of sup |g| on the given real spectrum.
    pub fn max_filter_sup(&self, spectrum: &[f64]) -> Result<f64> {
        let pts: Vec<_> = spectrum.iter().map(|&x| c(x)).collect();
        let mut best = 0.0f64;
        for layer in &self.layers {
            for g in layer.filters.iter().flatten() {
                best = best.max(sup_norm_on_spectrum(g, &pts)?);
            }
        }
        Ok(best)
    }

    /// Largest filter Lipschitz constant: the analytic D when known, else the
    /// largest difference quotient over `spectrum`.
    pub fn lipschitz(&self, spectrum: &[f64]) -> Result<f64> {
        let mut best = 0.0f64;
        for layer in &self.layers {
            for g in layer.filters.iter().flatten() {
                let d = match g.lipschitz() {
                    Some(d) => d,
                    None => empirical_lipschitz(g, spectrum)?,
                };
                best = best.max(d);
            }
        }
        Ok(best)
    }

    /// Divide each filter by its sup over `spectrum` and fold the factor into A^l.
    /// Returns the spec and the per-layer factor grids.
    pub fn normalized(&self, spectrum: &[f64]) -> Result<(Self, Vec<DMatrix<f64>>)> {
        let pts: Vec<_> = spectrum.iter().map(|&x| c(x)).collect();
        let mut out = self.clone();
        let mut factors = Vec::new();
        for layer in &mut out.layers {
            let mut fac = DMatrix::from_element(layer.outputs(), layer.inputs(), 1.0);
            for i in 0..layer.outputs() {
                for j in 0..layer.inputs() {
                    let s = sup_norm_on_spectrum(&layer.filters[i][j], &pts)?;
                    if s > 0.0 {
                        layer.filters[i][j] = layer.filters[i][j].scaled(1.0 / s);
                        layer.mix[(i, j)] *= s;
                        fac[(i, j)] = s;
                    }
                }
            }
            factors.push(fac);
        }
        Ok((out, factors))
    }
}

/// The continuous space a ConvNet runs on: a graph treated as M, or the circle.
#[derive(Debug, Clone, Copy)]
pub enum ConvSpace<'a> {
    Graph(&'a GraphSpace),
    Circle,
}

impl ConvSpace<'_> {
    pub fn pw_dim(&self, band: f64) -> usize {
        match self {
            ConvSpace::Graph(g) => g.pw_dim(band),
            ConvSpace::Circle => circle_dim(band),
        }
    }

    pub fn eigenvalue(&self, m: usize) -> f64 {
        match self {
            ConvSpace::Graph(g) => g.eigenvalues()[m],
            ConvSpace::Circle => circle_eigenvalue(m),
        }
    }

    pub fn eigenvalues(&self, band: f64) -> Vec<f64> {
        (0..self.pw_dim(band)).map(|m| self.eigenvalue(m)).collect()
    }

    /// P ρ(f) onto the first `out_dim` modes.
    pub fn activate(&self, f: &DVector<f64>, rho: Activation, out_dim: usize) -> Result<DVector<f64>> {
        match self {
            ConvSpace::Graph(g) => {
                let v = g.synthesize(f).map(|y| rho.apply(y));
                g.coefficients_dim(out_dim, &v)
            }
            ConvSpace::Circle => Ok(match rho {
                Activation::Identity => {
                    let mut v = DVector::zeros(out_dim);
                    let k = out_dim.min(f.len());
                    v.rows_mut(0, k).copy_from(&f.rows(0, k));
                    v
                }
                a => project_composed(f, |y| a.apply(y), out_dim),
            }),
        }
    }

    /// P of the constant signal b onto the first `dim` modes.
    pub fn constant(&self, b: f64, dim: usize) -> Result<DVector<f64>> {
        match self {
            ConvSpace::Graph(g) => g.coefficients_dim(dim, &DVector::from_element(g.dim(), b)),
            ConvSpace::Circle => {
                let mut v = DVector::zeros(dim);
                if dim > 0 {
                    v[0] = b;
                }
                Ok(v)
            }
        }
    }

    /// ‖1‖ in L²(M).
    pub fn constant_norm(&self) -> f64 {
        match self {
            ConvSpace::Graph(g) => g.laplacian.inner.norm_real(&DVector::from_element(g.dim(), 1.0)),
            ConvSpace::Circle => 1.0,
        }
    }
}

/// Channel coefficient stacks per layer; entry 0 is the input.
pub type LayerSignals = Vec<Vec<DVector<f64>>>;

pub fn forward_continuous(spec: &ConvNetSpec, space: ConvSpace<'_>, inputs: &[DVector<f64>]) -> Result<LayerSignals> {
    if inputs.len() != spec.input_channels() {
        return Err(Error::Topology(format!("{} input channels for a net expecting {}", inputs.len(), spec.input_channels())));
    }
    let d0 = space.pw_dim(spec.bands[0]);
    if let Some(f) = inputs.iter().find(|f| f.len() != d0) {
        return Err(Error::Band(format!("input has {} coefficients, PW(ψ_0) has {d0}", f.len())));
    }
    let mut out = vec![inputs.to_vec()];
    for (l, layer) in spec.layers.iter().enumerate() {
        let d_in = space.pw_dim(spec.bands[l]);
        let d_out = space.pw_dim(spec.bands[l + 1]);
        let lambdas: Vec<f64> = (0..d_in).map(|m| space.eigenvalue(m)).collect();
        let prev = &out[l];
        let mut next = Vec::with_capacity(layer.outputs());
        for (i, row) in layer.filters.iter().enumerate() {
            let mut z = space.constant(layer.bias[i], d_in)?;
            for (j, g) in row.iter().enumerate() {
                let a = layer.mix[(i, j)];
                if a == 0.0 {
                    continue;
                }
                for m in 0..d_in {
                    z[m] += a * g.eval_real(lambdas[m])? * prev[j][m];
                }
            }
            next.push(space.activate(&z, spec.activation, d_out)?);
        }
        out.push(next);
    }
    Ok(out)
}

/// One graph at one layer level.
#[derive(Debug, Clone)]
pub struct GraphLevel {
    pub operator: OperatorWithInnerProduct,
    pub eig: EigenDecomposition,
    /// S_{j,l}: n_l × (modes of M), when the graph is tied to a continuous space.
    pub sampling: Option<DMatrix<f64>>,
}

impl GraphLevel {
    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    fn sampling_cols(&self, k: usize) -> Result<DMatrix<f64>> {
        let s = self.sampling.as_ref().ok_or_else(|| Error::Parameter("graph level has no sampling operator".into()))?;
        if k > s.ncols() {
            return Err(Error::Band(format!("sampling covers {} modes, {k} requested", s.ncols())));
        }
        Ok(s.columns(0, k).into_owned())
    }

    fn norm(&self, v: &DVector<f64>) -> f64 {
        self.operator.inner.norm_real(v)
    }

    /// Operator norm of X: PW → L²(G) in the level's inner product.
    fn op_norm(&self, x: &DMatrix<f64>) -> f64 {
        spectral_norm(&(self.operator.inner.half(x.nrows()) * to_complex(x)))
    }
}

/// The layer-by-layer graph chain of one ConvNet instance: level l feeds layer l + 1.
#[derive(Debug, Clone)]
pub struct GraphPipeline {
    pub name: String,
    pub levels: Vec<GraphLevel>,
    pub maps: Vec<Option<CoarseningMap>>,
}

impl GraphPipeline {
    /// Level l + 1 is level l coarsened by maps[l] (Δ = SΔR, S chained by the map), or unchanged.
    pub fn new(name: impl Into<String>, base: OperatorWithInnerProduct, sampling: Option<DMatrix<f64>>, maps: Vec<Option<CoarseningMap>>) -> Result<Self> {
        if let Some(s) = &sampling {
            if s.nrows() != base.dim() {
                return Err(Error::Dimension(format!("sampling has {} rows for a {}-vertex graph", s.nrows(), base.dim())));
            }
        }
        let eig = eigendecompose(&base, None)?;
        let mut levels = vec![GraphLevel { operator: base, eig, sampling }];
        for (l, map) in maps.iter().enumerate() {
            let prev = &levels[l];
            let next = match map {
                None => prev.clone(),
                Some(map) => {
                    if map.fine_n != prev.dim() {
                        return Err(Error::Topology(format!("layer {} map expects {} vertices, level has {}", l + 1, map.fine_n, prev.dim())));
                    }
                    let op = coarsened_laplacian(map, &prev.operator)?;
                    let eig = eigendecompose(&op, None)?;
                    let sampling = prev.sampling.as_ref().map(|s| map.s_matrix() * s);
                    GraphLevel { operator: op, eig, sampling }
                }
            };
            levels.push(next);
        }
        Ok(Self { name: name.into(), levels, maps })
    }

    pub fn depth(&self) -> usize {
        self.maps.len()
    }

    /// R^{ψ} = (S^{ψ})*: first `dim` rows of Sᵀ B, the M coefficients being orthonormal.
    pub fn interpolation(&self, dim: usize) -> Result<DMatrix<f64>> {
        let top = &self.levels[self.depth()];
        let s = top.sampling_cols(dim)?;
        let b = top.operator.inner.matrix(top.dim()).map(|z| z.re);
        Ok(s.transpose() * b)
    }

    fn check(&self, spec: &ConvNetSpec) -> Result<()> {
        if self.depth() != spec.depth() {
            return Err(Error::Topology(format!("{} has {} levels for a {}-layer net", self.name, self.depth(), spec.depth())));
        }
        for (l, (layer, map)) in spec.layers.iter().zip(&self.maps).enumerate() {
            if (layer.pooling == Pooling::None) != map.is_none() {
                return Err(Error::Topology(format!("layer {} pooling {:?} does not match its coarsening map", l + 1, layer.pooling)));
            }
        }
        Ok(())
    }

    /// Sampled input S^{ψ_0}_{j,0} f per channel.
    pub fn sample_inputs(&self, inputs: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
        inputs.iter().map(|f| Ok(self.levels[0].sampling_cols(f.len())? * f)).collect()
    }
}

pub fn forward_graph(spec: &ConvNetSpec, net: &GraphPipeline, inputs: &[DVector<f64>]) -> Result<LayerSignals> {
    net.check(spec)?;
    if inputs.len() != spec.input_channels() {
        return Err(Error::Topology(format!("{} input channels for a net expecting {}", inputs.len(), spec.input_channels())));
    }
    let n0 = net.levels[0].dim();
    if let Some(f) = inputs.iter().find(|f| f.len() != n0) {
        return Err(Error::Topology(format!("input has length {} on a {n0}-vertex graph", f.len())));
    }
    let mut out = vec![inputs.to_vec()];
    for (l, layer) in spec.layers.iter().enumerate() {
        let level = &net.levels[l];
        let n = level.dim();
        let mut next = Vec::with_capacity(layer.outputs());
        for (i, row) in layer.filters.iter().enumerate() {
            let mut z = DVector::from_element(n, layer.bias[i]);
            for (j, g) in row.iter().enumerate() {
                let a = layer.mix[(i, j)];
                if a != 0.0 {
                    z += apply_exact_real(g, &level.eig, &out[l][j])? * a;
                }
            }
            let z = z.map(|y| spec.activation.apply(y));
            next.push(match &net.maps[l] {
                Some(map) => pool(&z, map, layer.pooling)?,
                None => z,
            });
        }
        out.push(next);
    }
    Ok(out)
}

/// sup over the unit sphere of a degree-1 homogeneous functional: signed basis
/// vectors, random probes, then a shrinking random local search from the best.
fn sphere_sup(dim: usize, probes: usize, rng: &mut ChaCha8Rng, f: impl Fn(&DVector<f64>) -> Result<f64>) -> Result<f64> {
    if dim == 0 {
        return Ok(0.0);
    }
    let mut best = (f64::NEG_INFINITY, DVector::zeros(dim));
    let consider = |v: DVector<f64>, best: &mut (f64, DVector<f64>)| -> Result<()> {
        let val = f(&v)?;
        if val > best.0 {
            *best = (val, v);
        }
        Ok(())
    };
    for m in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = DVector::zeros(dim);
            e[m] = s;
            consider(e, &mut best)?;
        }
    }
    for _ in 0..probes {
        consider(random_unit_coefficients(dim, rng), &mut best)?;
    }
    let mut step = 0.25;
    for _ in 0..probes.max(20) {
        let dir = random_unit_coefficients(dim, rng);
        let cand = &best.1 + dir * step;
        let nrm = cand.norm();
        if nrm > 0.0 {
            let before = best.0;
            consider(cand / nrm, &mut best)?;
            if best.0 <= before {
                step *= 0.95;
            }
        }
    }
    Ok(best.0.max(0.0))
}

/// The four hypothesis norms for one graph, and the operator norms of S and R.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisErrors {
    pub graph: String,
    /// ‖S L P(ψ_l) − Δ S P(ψ_l)‖ for l = 0..L−1.
    pub laplacian: Vec<f64>,
    /// ‖P(ψ_L) − R S P(ψ_L)‖.
    pub consistency: f64,
    /// sup ‖ρ(S^{ψ_{l−1}} f) − S^{ψ_l} P(ψ_l) ρ(f)‖ / ‖f‖ for l = 1..L.
    pub activation: Vec<f64>,
    /// sup ‖Y S^{ψ_l}_{l−1} f − S^{ψ_l}_l f‖ / ‖f‖ for l = 1..L.
    pub pooling: Vec<f64>,
    pub sampling_norms: Vec<f64>,
    pub interpolation_norm: f64,
    pub max: f64,
}

pub fn hypothesis_errors(spec: &ConvNetSpec, space: ConvSpace<'_>, net: &GraphPipeline, probes: usize, seed: u64) -> Result<HypothesisErrors> {
    net.check(spec)?;
    let depth = spec.depth();
    let dims: Vec<usize> = spec.bands.iter().map(|&b| space.pw_dim(b)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut laplacian = Vec::new();
    let mut sampling_norms = Vec::new();
    for l in 0..=depth {
        let level = &net.levels[l];
        let s = level.sampling_cols(dims[l])?;
        sampling_norms.push(level.op_norm(&s));
        if l < depth {
            let mut x = s.clone();
            for m in 0..dims[l] {
                x.column_mut(m).scale_mut(space.eigenvalue(m));
            }
            x -= level.operator.matrix.clone() * &s;
            laplacian.push(level.op_norm(&x));
        }
    }
    let top = &net.levels[depth];
    let r = net.interpolation(dims[depth])?;
    let rs = &r * top.sampling_cols(dims[depth])?;
    let consistency = spectral_norm_real(&(DMatrix::identity(dims[depth], dims[depth]) - rs));
    let interpolation_norm = spectral_norm(&(to_complex(&r) * top.operator.inner.half_inverse(top.dim())));

    let rho = spec.activation;
    let mut activation = Vec::new();
    let mut pooling = Vec::new();
    for l in 1..=depth {
        let prev = &net.levels[l - 1];
        let s_in = prev.sampling_cols(dims[l - 1])?;
        let s_out = prev.sampling_cols(dims[l])?;
        activation.push(sphere_sup(dims[l - 1], probes, &mut rng, |f| {
            let lhs = (&s_in * f).map(|y| rho.apply(y));
            let rhs = &s_out * space.activate(f, rho, dims[l])?;
            Ok(prev.norm(&(lhs - rhs)))
        })?);
        pooling.push(match &net.maps[l - 1] {
            None => 0.0,
            Some(map) => {
                let kind = spec.layers[l - 1].pooling;
                let s_next = net.levels[l].sampling_cols(dims[l])?;
                let next = &net.levels[l];
                sphere_sup(dims[l], probes, &mut rng, |f| {
                    let pooled = pool_unchecked(&(&s_out * f), map, kind);
                    Ok(next.norm(&(pooled - &s_next * f)))
                })?
            }
        });
    }
    let max = laplacian
        .iter()
        .chain(&activation)
        .chain(&pooling)
        .copied()
        .fold(consistency, f64::max);
    Ok(HypothesisErrors {
        graph: net.name.clone(),
        laplacian,
        consistency,
        activation,
        pooling,
        sampling_norms,
        interpolation_norm,
        max,
    })
}

/// (L D √# + 2L + 2) times (A^L‖f‖ + B(A^L − 1)/(A − 1)) δ, or (‖f‖ + LB) δ when A = 1.
#[allow(clippy::too_many_arguments)]
pub fn convnet_transfer_bound(layers: usize, d: f64, a: f64, b: f64, delta: f64, count: usize, f_norm: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Parameter(format!("δ = {delta} is outside [0, 1)")));
    }
    if !(a > 0.0) || b < 0.0 || d < 0.0 || f_norm < 0.0 {
        return Err(Error::Parameter("need A > 0 and B, D, ‖f‖ ≥ 0".into()));
    }
    let l = layers as f64;
    let factor = l * d * (count as f64).sqrt() + 2.0 * l + 2.0;
    Ok(factor * growth(layers, a, b, f_norm) * delta)
}

/// The single-graph bound from the proof: (L D √# + 2L + 1)(…) δ.
pub fn convnet_single_graph_bound(layers: usize, d: f64, a: f64, b: f64, delta: f64, count: usize, f_norm: f64) -> Result<f64> {
    let full = convnet_transfer_bound(layers, d, a, b, delta, count, f_norm)?;
    Ok(full - growth(layers, a, b, f_norm) * delta)
}

/// A^L‖f‖ + B(A^L − 1)/(A − 1), with the A = 1 limit ‖f‖ + LB.
fn growth(layers: usize, a: f64, b: f64, f_norm: f64) -> f64 {
    let l = layers as f64;
    if (a - 1.0).abs() < 1e-12 {
        f_norm + l * b
    } else {
        let al = a.powi(layers as i32);
        al * f_norm + b * (al - 1.0) / (a - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvNetCertificate {
    pub hypotheses: Vec<HypothesisErrors>,
    pub delta: f64,
    pub hypotheses_hold: bool,
    pub lipschitz: f64,
    pub count: usize,
    pub a_bound: f64,
    pub b_bound: f64,
    pub filter_sup: f64,
    /// Per input: (‖f‖, bound, single-graph bound).
    pub bounds: Vec<(f64, f64, f64)>,
    /// Per input and graph: max_k ‖N f − R Ñ S f‖.
    pub single_errors: Vec<Vec<f64>>,
    /// Per input: max_k ‖R₁Ñ₁S₁f − R₂Ñ₂S₂f‖, with two graphs.
    pub two_graph_errors: Vec<f64>,
    pub worst_single_ratio: f64,
    pub worst_two_graph_ratio: f64,
    pub pass: bool,
}

/// Measure every hypothesis, run all nets on `inputs` and compare against the bound.
pub fn certify_convnet(
    spec: &ConvNetSpec,
    space: ConvSpace<'_>,
    nets: &[GraphPipeline],
    inputs: &[Vec<DVector<f64>>],
    probes: usize,
    seed: u64,
) -> Result<ConvNetCertificate> {
    if nets.is_empty() || nets.len() > 2 {
        return Err(Error::Parameter("certification takes one or two graphs".into()));
    }
    let depth = spec.depth();
    let top_band = spec.bands[depth];
    let mut spectrum = space.eigenvalues(top_band);
    for net in nets {
        for level in &net.levels {
            spectrum.extend(level.eig.eigenvalues().iter().map(|z| z.re));
        }
    }
    let filter_sup = spec.max_filter_sup(&spectrum)?;
    if filter_sup > 1.0 + 1e-12 {
        return Err(Error::Parameter(format!("filters are not normalized: sup |g| = {filter_sup}")));
    }
    let lipschitz = spec.lipschitz(&spectrum)?;
    let count = space.pw_dim(top_band);
    let a_bound = spec.a_bound();
    let mut const_norm = space.constant_norm();
    for net in nets {
        for level in &net.levels {
            const_norm = const_norm.max(level.norm(&DVector::from_element(level.dim(), 1.0)));
        }
    }
    let b_bound = spec.max_bias() * const_norm;
    let hypotheses = nets
        .iter()
        .enumerate()
        .map(|(j, net)| hypothesis_errors(spec, space, net, probes, seed.wrapping_add(j as u64)))
        .collect::<Result<Vec<_>>>()?;
    let delta = hypotheses.iter().map(|h| h.max).fold(0.0, f64::max);
    let hypotheses_hold = delta < 1.0;
    let interps = nets.iter().map(|n| n.interpolation(count)).collect::<Result<Vec<_>>>()?;

    let mut bounds = Vec::new();
    let mut single_errors = Vec::new();
    let mut two_graph_errors = Vec::new();
    let mut worst_single_ratio = 0.0f64;
    let mut worst_two_graph_ratio = 0.0f64;
    let mut pass = hypotheses_hold;
    for input in inputs {
        let f_norm = input.iter().map(|f| f.norm()).fold(0.0, f64::max);
        let d = delta.min(1.0 - f64::EPSILON);
        let bound = convnet_transfer_bound(depth, lipschitz, a_bound, b_bound, d, count, f_norm)?;
        let single = convnet_single_graph_bound(depth, lipschitz, a_bound, b_bound, d, count, f_norm)?;
        bounds.push((f_norm, bound, single));
        let cont = forward_continuous(spec, space, input)?;
        let cont_out = &cont[depth];
        let mut lifted = Vec::new();
        let mut errs = Vec::new();
        for (net, r) in nets.iter().zip(&interps) {
            let g = forward_graph(spec, net, &net.sample_inputs(input)?)?;
            let back: Vec<DVector<f64>> = g[depth].iter().map(|s| r * s).collect();
            let e = back.iter().zip(cont_out).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            errs.push(e);
            if !crate::transfer::certified(e, bound) {
                pass = false;
            }
            if bound > 0.0 {
                worst_single_ratio = worst_single_ratio.max(e / bound);
            }
            lifted.push(back);
        }
        if lifted.len() == 2 {
            let e = lifted[0].iter().zip(&lifted[1]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            if !crate::transfer::certified(e, bound) {
                pass = false;
            }
            if bound > 0.0 {
                worst_two_graph_ratio = worst_two_graph_ratio.max(e / bound);
            }
            two_graph_errors.push(e);
        }
        single_errors.push(errs);
    }
    Ok(ConvNetCertificate {
        hypotheses,
        delta,
        hypotheses_hold,
        lipschitz,
        count,
        a_bound,
        b_bound,
        filter_sup,
        bounds,
        single_errors,
        two_graph_errors,
        worst_single_ratio,
        worst_two_graph_ratio,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub band: f64,
    pub probes: usize,
    pub max_frequency: usize,
    /// max over probes of Σ n²|⟨ρ(f), φ_n⟩|² / (M²‖f‖²), summed over all n.
    pub worst_ratio: f64,
    /// The same ratio with the sum truncated at |n| ≤ N_max.
    pub worst_partial_ratio: f64,
    /// Largest relative change of the full sum between two quadrature refinements.
    pub max_refinement_change: f64,
    pub pass: bool,
}

/// Weighted Fourier energy of ρ(f) against M²‖f‖² for random f ∈ PW(band) on the circle.
pub fn spectral_decay_check(activation: Activation, band: f64, probes: usize, truncation: usize, seed: u64) -> Result<DecayReport> {
    let m = max_frequency(band);
    let dim = circle_dim(band);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut worst_partial, mut change) = (0.0f64, 0.0f64, 0.0f64);
    if m == 0 {
        return Ok(DecayReport { band, probes, max_frequency: 0, worst_ratio: 0.0, worst_partial_ratio: 0.0, max_refinement_change: 0.0, pass: true });
    }
    let out_dim = 2 * truncation + 1;
    let mut probe_set: Vec<DVector<f64>> = Vec::with_capacity(probes);
    for _ in 0..probes {
        let mut f = random_unit_coefficients(dim, &mut rng);
        f *= rng.gen_range(0.2..5.0);
        probe_set.push(f);
    }
    for f in &probe_set {
        let e1 = derivative_energy(f, |y| activation.derivative(y), 4);
        let e2 = derivative_energy(f, |y| activation.derivative(y), 8);
        let rel = (e1 - e2).abs() / e2.abs().max(1e-300);
        change = change.max(if e2 == 0.0 { 0.0 } else { rel });
        if rel > 1e-8 && e2 != 0.0 {
            return Err(Error::Truncation(format!("quadrature refinement changed the energy by {rel:e}")));
        }
        let denom = (m * m) as f64 * f.norm_squared();
        worst = worst.max(e2 / denom);
        let p = project_composed(f, |y| activation.apply(y), out_dim);
        let partial: f64 = p.iter().enumerate().map(|(k, v)| (circle_frequency(k) as f64).powi(2) * v * v).sum();
        worst_partial = worst_partial.max(partial / denom);
    }
    Ok(DecayReport {
        band,
        probes,
        max_frequency: m,
        worst_ratio: worst,
        worst_partial_ratio: worst_partial,
        max_refinement_change: change,
        pass: worst <= 1.0 + 1e-6 && change < 1e-8,
    })
}
