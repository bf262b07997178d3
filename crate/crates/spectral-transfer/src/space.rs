//! Models of the "continuous" space (M, μ, L): the unit circle with
//! L = −(2π)^{-2} d²/dx², band-limited kernel operators on it, and fine graphs
//! playing the role of M.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_laplacian, eigendecompose, EigenDecomposition, LaplacianKind, OperatorWithInnerProduct, WeightedGraph};
use crate::linalg::{c, gauss_legendre};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Largest n with n² ≤ band.
pub fn max_frequency(band: f64) -> usize {
    if band < 1.0 {
        return 0;
    }
    assert!(band.is_finite(), "circle band must be finite");
    let mut n = band.sqrt().floor() as usize;
    while ((n + 1) * (n + 1)) as f64 <= band {
        n += 1;
    }
    while n > 0 && (n * n) as f64 > band {
        n -= 1;
    }
    n
}

/// Number of circle modes with eigenvalue ≤ band.
pub fn circle_dim(band: f64) -> usize {
    if band < 0.0 {
        0
    } else {
        1 + 2 * max_frequency(band)
    }
}

/// Frequency n of circle mode m: 0, 1, 1, 2, 2, …
pub fn circle_frequency(m: usize) -> usize {
    m.div_ceil(2)
}

pub fn circle_eigenvalue(m: usize) -> f64 {
    let n = circle_frequency(m) as f64;
    n * n
}

/// φ_0 = 1, φ_{2n−1} = √2cos(2πnx), φ_{2n} = √2sin(2πnx).
pub fn circle_basis(m: usize, x: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let arg = TWO_PI * circle_frequency(m) as f64 * x;
    if m % 2 == 1 {
        std::f64::consts::SQRT_2 * arg.cos()
    } else {
        std::f64::consts::SQRT_2 * arg.sin()
    }
}

fn circle_basis_derivative(m: usize, x: f64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let w = TWO_PI * circle_frequency(m) as f64;
    if m % 2 == 1 {
        -std::f64::consts::SQRT_2 * w * (w * x).sin()
    } else {
        std::f64::consts::SQRT_2 * w * (w * x).cos()
    }
}

/// Σ_m c_m φ_m(x).
pub fn circle_eval(coeffs: &DVector<f64>, x: f64) -> f64 {
    coeffs.iter().enumerate().map(|(m, &cm)| cm * circle_basis(m, x)).sum()
}

pub fn circle_eval_derivative(coeffs: &DVector<f64>, x: f64) -> f64 {
    coeffs.iter().enumerate().map(|(m, &cm)| cm * circle_basis_derivative(m, x)).sum()
}

/// sup_x |φ_m(x)| over the circle basis up to `band`.
pub fn circle_max_sup_norm(band: f64) -> f64 {
    if band >= 1.0 {
        std::f64::consts::SQRT_2
    } else {
        1.0
    }
}

/// A continuous space ordered by nondecreasing |λ|.
#[derive(Debug, Clone)]
pub enum ContinuousSpace {
    Circle,
    /// The circle carrying the band-limited operator L P(λ̄) with sampling weight w.
    Kernel { kernel: BandlimitedKernel, weight: WeightFunction },
    Graph(Box<GraphSpace>),
}

/// A graph used as M: real modes, orthonormal under the operator's inner product.
#[derive(Debug, Clone)]
pub struct GraphSpace {
    pub graph: WeightedGraph,
    pub laplacian: OperatorWithInnerProduct,
    pub eig: EigenDecomposition,
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl GraphSpace {
    pub fn new(graph: WeightedGraph, kind: LaplacianKind) -> Result<Self> {
        let laplacian = build_laplacian(&graph, kind)?;
        Self::from_operator(graph, laplacian)
    }

    pub fn from_operator(graph: WeightedGraph, laplacian: OperatorWithInnerProduct) -> Result<Self> {
        let eig = eigendecompose(&laplacian, None)?;
        let (values, vectors) = eig
            .real_modes()
            .ok_or_else(|| Error::Domain("graph space needs a real spectrum with real eigenvectors".into()))?;
        Ok(Self { graph, laplacian, eig, values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn modes(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// Number of leading modes with |λ| ≤ band.
    pub fn pw_dim(&self, band: f64) -> usize {
        self.values.iter().take_while(|v| v.abs() <= band + band_slack(band)).count()
    }

    /// A band holding exactly the first k modes, placed mid-gap when the spectrum allows.
    pub fn band_for_modes(&self, k: usize) -> Result<f64> {
        let n = self.dim();
        if k == 0 || k > n {
            return Err(Error::Band(format!("cannot select {k} of {n} modes")));
        }
        let lo = self.values[k - 1].abs();
        if k == n {
            return Ok(lo);
        }
        let hi = self.values[k].abs();
        if hi - lo <= band_slack(hi) * 10.0 {
            return Err(Error::Band(format!("modes {} and {} share an eigenvalue", k - 1, k)));
        }
        Ok(0.5 * (lo + hi))
    }

    /// PW(band) basis as columns.
    pub fn pw_basis(&self, band: f64) -> DMatrix<f64> {
        self.vectors.columns(0, self.pw_dim(band)).into_owned()
    }

    /// Coefficients ⟨s, φ_m⟩_B for the modes in PW(band).
    pub fn coefficients(&self, band: f64, s: &DVector<f64>) -> Result<DVector<f64>> {
        self.coefficients_dim(self.pw_dim(band), s)
    }

    /// Coefficients ⟨s, φ_m⟩_B for the first `dim` modes.
    pub fn coefficients_dim(&self, dim: usize, s: &DVector<f64>) -> Result<DVector<f64>> {
        if s.len() != self.dim() || dim > self.dim() {
            return Err(Error::Dimension(format!("signal has length {} for dimension {}", s.len(), self.dim())));
        }
        let bs = weighted(&self.laplacian, s);
        Ok(self.vectors.columns(0, dim).transpose() * bs)
    }

    pub fn synthesize(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        self.vectors.columns(0, coeffs.len()) * coeffs
    }

    /// P(band)s in vertex coordinates.
    pub fn project(&self, band: f64, s: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.synthesize(&self.coefficients(band, s)?))
    }
}

fn weighted(op: &OperatorWithInnerProduct, s: &DVector<f64>) -> DVector<f64> {
    match &op.inner {
        crate::graph::InnerProduct::Identity => s.clone(),
        crate::graph::InnerProduct::Diagonal(d) => s.component_mul(d),
        crate::graph::InnerProduct::Dense(b) => (b * s.map(c)).map(|z| z.re),
    }
}

/// Eigenvalues computed numerically are treated as inside a band up to this slack.
fn band_slack(band: f64) -> f64 {
    1e-9 * band.abs().max(1.0)
}

/// One eigenfunction: a circle mode index or a graph vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    Circle(usize),
    Vector(DVector<f64>),
}

/// A signal handed to `project_pw`.
pub enum Signal<'a> {
    Vector(&'a DVector<f64>),
    Coefficients(&'a DVector<f64>),
    Function(&'a dyn Fn(f64) -> f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaleyWiener {
    pub band: f64,
    pub dim: usize,
    pub eigenvalues: Vec<f64>,
}

impl ContinuousSpace {
    pub fn graph(graph: WeightedGraph, kind: LaplacianKind) -> Result<Self> {
        Ok(ContinuousSpace::Graph(Box::new(GraphSpace::new(graph, kind)?)))
    }

    /// Band cap imposed by the variant (λ̄ for kernel spaces).
    fn cap(&self, band: f64) -> f64 {
        match self {
            ContinuousSpace::Kernel { kernel, .. } => band.min(kernel.band),
            _ => band,
        }
    }

    pub fn eigenpairs_up_to(&self, band: f64) -> Vec<(f64, Mode)> {
        match self {
            ContinuousSpace::Graph(g) => {
                let k = g.pw_dim(band);
                (0..k).map(|m| (g.values[m], Mode::Vector(g.vectors.column(m).into_owned()))).collect()
            }
            _ => (0..circle_dim(self.cap(band))).map(|m| (circle_eigenvalue(m), Mode::Circle(m))).collect(),
        }
    }

    pub fn eigenvalues_up_to(&self, band: f64) -> Vec<f64> {
        match self {
            ContinuousSpace::Graph(g) => g.values[..g.pw_dim(band)].to_vec(),
            _ => (0..circle_dim(self.cap(band))).map(circle_eigenvalue).collect(),
        }
    }

    pub fn pw_dim(&self, band: f64) -> usize {
        match self {
            ContinuousSpace::Graph(g) => g.pw_dim(band),
            _ => circle_dim(self.cap(band)),
        }
    }

    pub fn paley_wiener(&self, band: f64) -> PaleyWiener {
        let eigenvalues = self.eigenvalues_up_to(band);
        PaleyWiener { band, dim: eigenvalues.len(), eigenvalues }
    }

    /// #{λ_j ≤ band} with multiplicity.
    pub fn count_eig_leq(&self, band: f64) -> usize {
        match self {
            ContinuousSpace::Graph(g) => g.values.iter().filter(|&&v| v <= band + band_slack(band)).count(),
            _ => circle_dim(self.cap(band)),
        }
    }

    /// ⟨s, φ_m⟩ for the modes in PW(band).
    pub fn project_pw(&self, band: f64, signal: Signal<'_>) -> Result<DVector<f64>> {
        let dim = self.pw_dim(band);
        match (self, signal) {
            (_, Signal::Coefficients(cf)) => {
                let mut out = DVector::zeros(dim);
                for m in 0..dim.min(cf.len()) {
                    out[m] = cf[m];
                }
                Ok(out)
            }
            (ContinuousSpace::Graph(g), Signal::Vector(v)) => g.coefficients(band, v),
            (ContinuousSpace::Graph(_), Signal::Function(_)) => {
                Err(Error::Domain("graph spaces take vector signals".into()))
            }
            (_, Signal::Vector(_)) => Err(Error::Domain("circle spaces take coefficient or function signals".into())),
            (_, Signal::Function(f)) => project_function(f, dim),
        }
    }

    /// Diagonal action of L on PW coefficients.
    pub fn apply_continuous_laplacian(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(coeffs.len(), coeffs.iter().enumerate().map(|(m, &cm)| {
            let l = match self {
                ContinuousSpace::Graph(g) => g.values[m],
                _ => circle_eigenvalue(m),
            };
            cm * l
        }))
    }

    /// sup‖φ_m‖_∞ over PW(band).
    pub fn max_sup_norm(&self, band: f64) -> f64 {
        match self {
            ContinuousSpace::Graph(g) => {
                let b = g.pw_basis(band);
                b.iter().fold(0.0, |a, x| a.max(x.abs()))
            }
            _ => circle_max_sup_norm(self.cap(band)),
        }
    }
}

/// ⟨f, φ_m⟩ on the circle by trapezoid, doubled until successive estimates agree to 1e−10.
pub fn project_function(f: &dyn Fn(f64) -> f64, dim: usize) -> Result<DVector<f64>> {
    let nmax = circle_frequency(dim.saturating_sub(1));
    let mut n = 64 * (nmax + 1);
    let mut prev = trapezoid_coefficients(f, dim, n);
    while n < (1 << 22) {
        n *= 2;
        let next = trapezoid_coefficients(f, dim, n);
        if (&next - &prev).amax() < 1e-10 {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Integration(format!("trapezoid projection did not settle at {n} points")))
}

fn trapezoid_coefficients(f: &dyn Fn(f64) -> f64, dim: usize, n: usize) -> DVector<f64> {
    let mut out = DVector::zeros(dim);
    for k in 0..n {
        let x = k as f64 / n as f64;
        let fx = f(x);
        for m in 0..dim {
            out[m] += fx * circle_basis(m, x);
        }
    }
    out / n as f64
}

/// Nodes and weights of a composite rule on [0, 1).
#[derive(Debug, Clone)]
pub struct CircleQuadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CircleQuadrature {
    pub fn trapezoid(n: usize) -> Self {
        Self { nodes: (0..n).map(|k| k as f64 / n as f64).collect(), weights: vec![1.0 / n as f64; n] }
    }

    /// 16-point Gauss–Legendre on every cell between consecutive breakpoints.
    pub fn from_breakpoints(mut breaks: Vec<f64>) -> Self {
        breaks.push(0.0);
        breaks.push(1.0);
        breaks.sort_by(|a, b| a.total_cmp(b));
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        let (gx, gw) = gauss_legendre(16);
        let mut nodes = Vec::with_capacity(16 * breaks.len());
        let mut weights = Vec::with_capacity(16 * breaks.len());
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let h = 0.5 * (b - a);
            for (x, wt) in gx.iter().zip(&gw) {
                nodes.push(a + h * (x + 1.0));
                weights.push(h * wt);
            }
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// ⟨g, φ_m⟩ for m < dim, given g at the nodes.
    pub fn project_values(&self, values: &[f64], dim: usize) -> DVector<f64> {
        let mut out = DVector::zeros(dim);
        for ((&x, &w), &v) in self.nodes.iter().zip(&self.weights).zip(values) {
            if v == 0.0 {
                continue;
            }
            for m in 0..dim {
                out[m] += w * v * circle_basis(m, x);
            }
        }
        out
    }
}

/// Sign changes of the trigonometric polynomial with coefficients `coeffs`, refined by bisection.
pub fn circle_roots(coeffs: &DVector<f64>) -> Vec<f64> {
    let nf = circle_frequency(coeffs.len().saturating_sub(1));
    let n = 64 * (nf + 1);
    let mut roots = Vec::new();
    let mut x0 = 0.0;
    let mut f0 = circle_eval(coeffs, x0);
    for k in 1..=n {
        let x1 = k as f64 / n as f64;
        let f1 = circle_eval(coeffs, x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            let (mut a, mut b, mut fa) = (x0, x1, f0);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                let fm = circle_eval(coeffs, m);
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

/// Quadrature that resolves ρ∘f for ρ with a kink at 0: cell breaks at the roots of f.
pub fn kink_quadrature(coeffs: &DVector<f64>, out_dim: usize) -> CircleQuadrature {
    kink_quadrature_refined(coeffs, out_dim, 1)
}

pub fn kink_quadrature_refined(coeffs: &DVector<f64>, out_dim: usize, refine: usize) -> CircleQuadrature {
    let nf = circle_frequency(coeffs.len().saturating_sub(1));
    let no = circle_frequency(out_dim.saturating_sub(1));
    let cells = 8 * (nf + no + 1) * refine.max(1);
    let mut breaks: Vec<f64> = (1..cells).map(|k| k as f64 / cells as f64).collect();
    breaks.extend(circle_roots(coeffs));
    CircleQuadrature::from_breakpoints(breaks)
}

/// ⟨ρ(f), φ_m⟩ for m < out_dim, integrating exactly across the kinks of ρ at f = 0.
pub fn project_composed(coeffs: &DVector<f64>, rho: impl Fn(f64) -> f64, out_dim: usize) -> DVector<f64> {
    let q = kink_quadrature(coeffs, out_dim);
    let values: Vec<f64> = q.nodes.iter().map(|&x| rho(circle_eval(coeffs, x))).collect();
    q.project_values(&values, out_dim)
}

/// Σ_m n_m²|⟨ρ(f), φ_m⟩|² over all modes, via Parseval: ‖(ρ∘f)'‖² / (4π²).
pub fn derivative_energy(coeffs: &DVector<f64>, rho_prime: impl Fn(f64) -> f64, refine: usize) -> f64 {
    let q = kink_quadrature_refined(coeffs, coeffs.len(), refine);
    q.integrate(|x| {
        let d = rho_prime(circle_eval(coeffs, x)) * circle_eval_derivative(coeffs, x);
        d * d
    }) / (TWO_PI * TWO_PI)
}

/// Sampling density w on the circle, normalized to ∫w = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightFunction {
    Uniform,
    /// 1 + a·cos(2πx), |a| < 1.
    Cosine { amplitude: f64 },
}

impl Default for WeightFunction {
    fn default() -> Self {
        WeightFunction::Uniform
    }
}

impl WeightFunction {
    pub fn cosine_default() -> Self {
        WeightFunction::Cosine { amplitude: 0.5 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            WeightFunction::Uniform => 1.0,
            WeightFunction::Cosine { amplitude } => 1.0 + amplitude * (TWO_PI * x).cos(),
        }
    }

    pub fn min(&self) -> f64 {
        match self {
            WeightFunction::Uniform => 1.0,
            WeightFunction::Cosine { amplitude } => 1.0 - amplitude.abs(),
        }
    }

    pub fn max(&self) -> f64 {
        match self {
            WeightFunction::Uniform => 1.0,
            WeightFunction::Cosine { amplitude } => 1.0 + amplitude.abs(),
        }
    }

    /// One draw from μ_w by rejection.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        loop {
            let x: f64 = rng.gen();
            if *self == WeightFunction::Uniform || rng.gen::<f64>() * self.max() <= self.eval(x) {
                return x;
            }
        }
    }
}

/// H(x₀, x) = Σ_{m ≤ M̄} λ_m φ_m(x₀)φ_m(x) on the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct BandlimitedKernel {
    pub band: f64,
}

impl BandlimitedKernel {
    pub fn new(band: f64) -> Result<Self> {
        if !(band >= 0.0 && band.is_finite()) {
            return Err(Error::Parameter(format!("kernel band must be nonnegative, got {band}")));
        }
        Ok(Self { band })
    }

    pub fn dim(&self) -> usize {
        circle_dim(self.band)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..self.dim()).map(circle_eigenvalue).collect()
    }

    /// Closed form Σ_n 2n² cos(2πn(x₀ − x)).
    pub fn eval(&self, x0: f64, x: f64) -> f64 {
        let d = TWO_PI * (x0 - x);
        (1..=max_frequency(self.band)).map(|n| 2.0 * (n * n) as f64 * (n as f64 * d).cos()).sum()
    }

    /// ‖λ^{M̄}‖₁.
    pub fn lambda_l1(&self) -> f64 {
        self.eigenvalues().iter().map(|l| l.abs()).sum()
    }

    /// ‖H‖_{L²(M²)} = (Σλ_m²)^{1/2} by orthonormality.
    pub fn l2_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|l| l * l).sum::<f64>().sqrt()
    }

    /// ‖H‖_{L²(M²)} by an n×n trapezoid rule, exact once n exceeds 2·max frequency.
    pub fn l2_norm_quadrature(&self, n: usize) -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let h = self.eval(i as f64 / n as f64, j as f64 / n as f64);
                s += h * h;
            }
        }
        (s / (n * n) as f64).sqrt()
    }

    /// ∫H(x₀, x) f(x) dx for f given by circle coefficients, by n-point trapezoid.
    pub fn apply_quadrature(&self, coeffs: &DVector<f64>, x0: f64, n: usize) -> f64 {
        (0..n)
            .map(|k| {
                let x = k as f64 / n as f64;
                self.eval(x0, x) * circle_eval(coeffs, x)
            })
            .sum::<f64>()
            / n as f64
    }
}

/// Band-limited kernel on the circle; only the circle (or a kernel space) carries one.
pub fn bandlimited_kernel(space: &ContinuousSpace, band: f64) -> Result<BandlimitedKernel> {
    match space {
        ContinuousSpace::Graph(_) => Err(Error::Domain("band-limited kernels are defined on the circle".into())),
        _ => BandlimitedKernel::new(band),
    }
}

/// Random coefficients of a unit-norm signal in PW(band).
pub fn random_unit_coefficients<R: Rng>(dim: usize, rng: &mut R) -> DVector<f64> {
    let v = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let n = v.norm();
    if n == 0.0 {
        let mut e = DVector::zeros(dim);
        e[0] = 1.0;
        e
    } else {
        v / n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::path;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn circle_eigenpairs() {
        let s = ContinuousSpace::Circle;
        assert_eq!(s.eigenpairs_up_to(0.0), vec![(0.0, Mode::Circle(0))]);
        assert_eq!(s.eigenvalues_up_to(1.0), vec![0.0, 1.0, 1.0]);
        assert_eq!(s.count_eig_leq(4.5), 5);
        assert_eq!(s.count_eig_leq(0.0), 1);
    }

    #[test]
    fn circle_eigenvalue_matches_second_difference() {
        // L = −(2π)^{-2} d²/dx² applied through a centered second difference
        let h = 1e-4;
        for m in 0..7 {
            let x = 0.137;
            let d2 = (circle_basis(m, x + h) - 2.0 * circle_basis(m, x) + circle_basis(m, x - h)) / (h * h);
            let lf = -d2 / (TWO_PI * TWO_PI);
            assert!((lf - circle_eigenvalue(m) * circle_basis(m, x)).abs() < 1e-5, "mode {m}");
        }
    }

    #[test]
    fn graph_space_p2() {
        let s = ContinuousSpace::graph(path(2), LaplacianKind::Unnormalized).unwrap();
        let pairs = s.eigenpairs_up_to(3.0);
        assert_eq!(pairs.len(), 2);
        assert_abs_diff_eq!(pairs[0].0, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(pairs[1].0, 2.0, epsilon = 1e-14);
        let Mode::Vector(v) = &pairs[1].1 else { panic!() };
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(v[0].abs(), r, epsilon = 1e-14);
        assert_abs_diff_eq!(v[0], -v[1], epsilon = 1e-14);
        assert_eq!(s.count_eig_leq(10.0), 2);
    }

    #[test]
    fn projection_examples() {
        let s = ContinuousSpace::Circle;
        let mut e3 = DVector::zeros(7);
        e3[3] = 1.0;
        let p = s.project_pw(9.0, Signal::Coefficients(&e3)).unwrap();
        assert_eq!(p[3], 1.0);
        assert_eq!(p.iter().filter(|x| **x != 0.0).count(), 1);
        // λ_3 = 4 > band 1
        let p = s.project_pw(1.0, Signal::Coefficients(&e3)).unwrap();
        assert!(p.iter().all(|x| *x == 0.0));
        let f = |x: f64| (TWO_PI * x).cos() + (2.0 * TWO_PI * x).cos();
        let p = s.project_pw(1.0, Signal::Function(&f)).unwrap();
        assert_abs_diff_eq!(p, DVector::from_vec(vec![0.0, 1.0 / 2f64.sqrt(), 0.0]), epsilon = 1e-12);
    }

    #[test]
    fn laplacian_action() {
        let s = ContinuousSpace::Circle;
        let coeffs = DVector::from_vec(vec![5.0, 0.0, 0.0, 1.0, 2.0]);
        assert_eq!(s.apply_continuous_laplacian(&coeffs), DVector::from_vec(vec![0.0, 0.0, 0.0, 4.0, 8.0]));
        let g = ContinuousSpace::graph(path(4), LaplacianKind::Unnormalized).unwrap();
        let ContinuousSpace::Graph(gs) = &g else { unreachable!() };
        let v = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let coeffs = gs.coefficients(f64::INFINITY, &v).unwrap();
        let via = gs.synthesize(&g.apply_continuous_laplacian(&coeffs));
        assert_abs_diff_eq!(via, &gs.laplacian.matrix * &v, epsilon = 1e-12);
    }

    #[test]
    fn orthonormality_under_trapezoid() {
        let dim = circle_dim(25.0);
        let q = CircleQuadrature::trapezoid(4096);
        let mut gram = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                gram[(i, j)] = q.integrate(|x| circle_basis(i, x) * circle_basis(j, x));
            }
        }
        assert!((gram - DMatrix::identity(dim, dim)).amax() < 1e-10);
    }

    #[test]
    fn weyl_count() {
        let s = ContinuousSpace::Circle;
        for l in [1.0f64, 4.0, 9.0, 16.0, 25.0] {
            let n = s.count_eig_leq(l) as f64;
            assert!(n >= 2.0 * l.sqrt() - 1.0 && n <= 2.0 * l.sqrt() + 1.0);
        }
    }

    #[test]
    fn kernel_examples() {
        let k0 = BandlimitedKernel::new(0.0).unwrap();
        assert_eq!(k0.eval(0.3, 0.1), 0.0);
        let k1 = BandlimitedKernel::new(1.0).unwrap();
        for (x0, x) in [(0.1, 0.7), (0.25, 0.0), (0.9, 0.33)] {
            let direct = 2.0 * (TWO_PI * x0).cos() * (TWO_PI * x).cos() + 2.0 * (TWO_PI * x0).sin() * (TWO_PI * x).sin();
            assert_abs_diff_eq!(k1.eval(x0, x), direct, epsilon = 1e-14);
            // definition as a mode sum
            let modes: f64 = (0..3).map(|m| circle_eigenvalue(m) * circle_basis(m, x0) * circle_basis(m, x)).sum();
            assert_abs_diff_eq!(k1.eval(x0, x), modes, epsilon = 1e-14);
        }
        assert_eq!(BandlimitedKernel::new(4.0).unwrap().lambda_l1(), 10.0);
    }

    #[test]
    fn kernel_norm_chain() {
        for band in [1.0, 4.0, 9.0] {
            let k = BandlimitedKernel::new(band).unwrap();
            assert_abs_diff_eq!(k.l2_norm_quadrature(64), k.l2_norm(), epsilon = 1e-10);
            assert!(k.l2_norm() <= k.lambda_l1() + 1e-8);
        }
    }

    #[test]
    fn kernel_operator_is_diagonal_on_lower_band() {
        let k = BandlimitedKernel::new(9.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_unit_coefficients(circle_dim(4.0), &mut rng);
        let lf = ContinuousSpace::Circle.apply_continuous_laplacian(&f);
        for x0 in [0.0, 0.21, 0.5, 0.77] {
            assert_abs_diff_eq!(k.apply_quadrature(&f, x0, 256), circle_eval(&lf, x0), epsilon = 1e-8);
        }
    }

    #[test]
    fn relu_projection_matches_analytic_series() {
        // relu(cos θ) = 1/π + cos θ/2 + (2/π)Σ (−1)^{k+1} cos(2kθ)/(4k² − 1)
        let f = DVector::from_vec(vec![0.0, 1.0 / 2f64.sqrt(), 0.0]);
        let p = project_composed(&f, |y| y.max(0.0), circle_dim(36.0));
        let pi = std::f64::consts::PI;
        assert_abs_diff_eq!(p[0], 1.0 / pi, epsilon = 1e-13);
        assert_abs_diff_eq!(p[1], 0.5 / 2f64.sqrt(), epsilon = 1e-13);
        for k in 1..=3usize {
            let a = 2.0 / pi * if k % 2 == 1 { 1.0 } else { -1.0 } / (4.0 * (k * k) as f64 - 1.0);
            assert_abs_diff_eq!(p[2 * (2 * k) - 1], a / 2f64.sqrt(), epsilon = 1e-13);
        }
        assert!(p.iter().skip(2).step_by(2).all(|s| s.abs() < 1e-13));
    }

    #[test]
    fn derivative_energy_matches_series() {
        let f = DVector::from_vec(vec![0.2, 0.9, -0.4]);
        let dim = circle_dim(40000.0);
        let p = project_composed(&f, |y| y.max(0.0), dim);
        let partial: f64 = (0..dim).map(|m| circle_eigenvalue(m) * p[m] * p[m]).sum();
        let total = derivative_energy(&f, |y| if y > 0.0 { 1.0 } else { 0.0 }, 1);
        assert!(partial <= total * (1.0 + 1e-12));
        assert!((total - partial) / total < 1e-2);
        // a smooth signal: exact identity
        let smooth = derivative_energy(&f, |_| 1.0, 1);
        assert_abs_diff_eq!(smooth, 0.81 + 0.16, epsilon = 1e-12);
    }

    #[test]
    fn weight_sampling_is_deterministic() {
        let w = WeightFunction::cosine_default();
        let a: Vec<f64> = (0..5).map({
            let mut r = ChaCha8Rng::seed_from_u64(1);
            move |_| w.sample(&mut r)
        }).collect();
        let b: Vec<f64> = (0..5).map({
            let mut r = ChaCha8Rng::seed_from_u64(1);
            move |_| w.sample(&mut r)
        }).collect();
        assert_eq!(a, b);
        assert_eq!(w.min(), 0.5);
    }
}
