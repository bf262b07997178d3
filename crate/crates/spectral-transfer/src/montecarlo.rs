//! Randomized checks of the quadrature lemmas for random sampled Laplacians on
//! the circle: Laplacian error, Gram error and activation error, their
//! Markov-type bounds, failure rates and convergence slopes.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::linalg::{median, ols_slope};
use crate::space::{
    circle_basis, circle_dim, circle_eigenvalue, circle_eval, circle_max_sup_norm, kink_quadrature,
    project_composed, random_unit_coefficients, BandlimitedKernel, WeightFunction,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SamplingScheme {
    #[default]
    Random,
    /// Deterministic equispaced points; every trial is identical.
    Equispaced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialConfig {
    #[serde(default)]
    pub weight: WeightFunction,
    pub band: f64,
    pub kernel_band: f64,
    /// λ' of the activation term; defaults to the kernel band.
    #[serde(default)]
    pub activation_band: Option<f64>,
    pub sizes: Vec<usize>,
    pub trials: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Replaced by the experiment's master seed when read from a config file.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    /// Probe signals on the unit sphere of PW(band) for the activation maximum.
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default)]
    pub scheme: SamplingScheme,
}

fn default_activation() -> Activation {
    Activation::Relu
}

fn default_probes() -> usize {
    64
}

fn default_delta() -> f64 {
    0.25
}

impl TrialConfig {
    pub fn new(band: f64, kernel_band: f64, sizes: Vec<usize>, trials: usize, delta: f64, seed: u64) -> Self {
        Self {
            weight: WeightFunction::Uniform,
            band,
            kernel_band,
            activation_band: None,
            sizes,
            trials,
            delta,
            seed,
            activation: Activation::Relu,
            probes: default_probes(),
            scheme: SamplingScheme::Random,
        }
    }

    pub fn lambda_prime(&self) -> f64 {
        self.activation_band.unwrap_or(self.kernel_band)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.band < self.kernel_band) && !(self.band == 0.0 && self.kernel_band == 0.0) {
            return Err(Error::Parameter(format!("need λ = {} < λ̄ = {}", self.band, self.kernel_band)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Parameter(format!("δ = {} is outside (0, 1)", self.delta)));
        }
        let dim = circle_dim(self.band);
        if let Some(n) = self.sizes.iter().find(|&&n| n < dim) {
            return Err(Error::Parameter(format!("sample size {n} is below dim PW = {dim}")));
        }
        if self.lambda_prime() < self.band {
            return Err(Error::Band(format!("λ' = {} is below λ = {}", self.lambda_prime(), self.band)));
        }
        if self.weight.min() <= 0.0 {
            return Err(Error::Weight { index: 0, value: self.weight.min() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCBoundConstants {
    /// ‖H‖_{L²}·C_λ / w_min.
    pub c_quad1: f64,
    /// min(exact sup ratio, max‖φ‖_∞·√M_λ).
    pub c_lambda: f64,
    pub c_lambda_exact: f64,
    pub c_lambda_cap: f64,
    /// M_λ·max‖φ‖_∞² / √w_min.
    pub c_quad2: f64,
    /// Inflated estimate of C_{λ'}.
    pub c_quad3: f64,
    pub c_quad3_raw: f64,
    pub c_quad3_inflation: f64,
    pub c_quad3_probes: usize,
    pub lambda_l1: f64,
    pub h_l2: f64,
    pub w_min: f64,
    pub max_phi_inf: f64,
    pub m_lambda: usize,
}

const C3_INFLATION: f64 = 1.5;
const C3_PROBES: usize = 500;

/// sup_x |g(x)| for a kinked composite, on a fine grid plus the kink quadrature nodes.
fn sup_abs(g: impl Fn(f64) -> f64, extra: &[f64]) -> f64 {
    let n = 4096;
    let grid = (0..n).map(|k| g(k as f64 / n as f64).abs()).fold(0.0, f64::max);
    extra.iter().map(|&x| g(x).abs()).fold(grid, f64::max)
}

pub fn mc_constants(config: &TrialConfig) -> Result<MCBoundConstants> {
    config.validate()?;
    let kernel = BandlimitedKernel::new(config.kernel_band)?;
    let m_lambda = circle_dim(config.band);
    let w_min = config.weight.min();
    let max_phi_inf = circle_max_sup_norm(config.band);
    // max_x Σ_m φ_m(x)² = 1 + 2n_max on the trigonometric basis
    let c_lambda_exact = (m_lambda as f64).sqrt();
    let c_lambda_cap = max_phi_inf * (m_lambda as f64).sqrt();
    let c_lambda = c_lambda_exact.min(c_lambda_cap);
    let h_l2 = kernel.l2_norm();
    let lp = circle_dim(config.lambda_prime());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0xC3C3_C3C3);
    let mut raw = 0.0f64;
    for _ in 0..C3_PROBES {
        let f = random_unit_coefficients(m_lambda, &mut rng);
        let p = project_composed(&f, |y| config.activation.apply(y), lp);
        let q = kink_quadrature(&f, lp);
        let a = config.activation;
        let tail = |x: f64| a.apply(circle_eval(&f, x)) - circle_eval(&p, x);
        raw = raw.max(sup_abs(tail, &q.nodes));
    }
    Ok(MCBoundConstants {
        c_quad1: h_l2 * c_lambda / w_min,
        c_lambda,
        c_lambda_exact,
        c_lambda_cap,
        c_quad2: m_lambda as f64 * max_phi_inf * max_phi_inf / w_min.sqrt(),
        c_quad3: C3_INFLATION * raw,
        c_quad3_raw: raw,
        c_quad3_inflation: C3_INFLATION,
        c_quad3_probes: C3_PROBES,
        lambda_l1: kernel.lambda_l1(),
        h_l2,
        w_min,
        max_phi_inf,
        m_lambda,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub n: usize,
    pub size_index: usize,
    pub trial: usize,
    /// ChaCha8 stream id: (size index << 32) | trial.
    pub stream: u64,
    pub laplacian_err: f64,
    pub gram_err: f64,
    pub activation_err: f64,
    pub bound_laplacian: f64,
    pub bound_gram: f64,
    pub bound_activation: f64,
    pub violates_laplacian: bool,
    pub violates_gram: bool,
    pub violates_activation: bool,
}

/// Probe set for the activation maximum: basis vectors, their negatives, and random unit vectors.
fn activation_probes(dim: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut probes = Vec::new();
    for m in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = DVector::zeros(dim);
            e[m] = s;
            probes.push(e);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA11C_E5ED);
    while probes.len() < count.max(2 * dim) {
        probes.push(random_unit_coefficients(dim, &mut rng));
    }
    probes
}

/// Precomputed per-probe data shared by all trials: ρ(f) projections and ‖(I − P(λ'))ρ(f)‖₂.
struct ProbeData {
    f: DVector<f64>,
    p_rho: DVector<f64>,
    tail_l2: f64,
}

fn probe_data(config: &TrialConfig) -> Vec<ProbeData> {
    let dim = circle_dim(config.band);
    let lp = circle_dim(config.lambda_prime());
    let a = config.activation;
    activation_probes(dim, config.probes, config.seed)
        .into_iter()
        .map(|f| {
            let p_rho = project_composed(&f, |y| a.apply(y), lp);
            let q = kink_quadrature(&f, lp);
            let tail_l2 = q
                .integrate(|x| {
                    let t = a.apply(circle_eval(&f, x)) - circle_eval(&p_rho, x);
                    t * t
                })
                .max(0.0)
                .sqrt();
            ProbeData { f, p_rho, tail_l2 }
        })
        .collect()
}

fn draw_points(config: &TrialConfig, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match config.scheme {
        SamplingScheme::Random => (0..n).map(|_| config.weight.sample(rng)).collect(),
        SamplingScheme::Equispaced => (0..n).map(|k| k as f64 / n as f64).collect(),
    }
}

/// Generator for one (size, trial) cell: the master seed on its own ChaCha8 stream.
pub fn trial_rng(master: u64, size_index: usize, trial: usize) -> (ChaCha8Rng, u64) {
    let stream = ((size_index as u64) << 32) | trial as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    (rng, stream)
}

/// One trial at sample size n from the given generator.
fn run_trial(
    config: &TrialConfig,
    probes: &[ProbeData],
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64, f64)> {
    let points = draw_points(config, n, rng);
    let dim = circle_dim(config.band);
    let kdim = circle_dim(config.kernel_band);
    let lp = circle_dim(config.lambda_prime());
    let mut inv_w = Vec::with_capacity(n);
    for (k, &x) in points.iter().enumerate() {
        let w = config.weight.eval(x);
        if !(w > 0.0) {
            return Err(Error::Weight { index: k, value: w });
        }
        inv_w.push(1.0 / w);
    }
    let nf = n as f64;
    let width = kdim.max(lp);
    // Φ̄[k, m] = φ_m(x_k) for m < max(M̄, dim PW(λ'))
    let phi = DMatrix::from_fn(n, width, |k, m| circle_basis(m, points[k]));
    let sqrt_n = nf.sqrt();
    let s = phi.columns(0, dim) / sqrt_n;
    // Δ_n S = N^{-1} Φ̄ Λ Φ̄ᵀ W^{-1} S (low rank, exact)
    let mut wphi = phi.columns(0, kdim).into_owned();
    for (k, iw) in inv_w.iter().enumerate() {
        wphi.row_mut(k).scale_mut(*iw);
    }
    let mut inner = wphi.transpose() * &s;
    for m in 0..kdim {
        inner.row_mut(m).scale_mut(circle_eigenvalue(m));
    }
    let delta_s = phi.columns(0, kdim) * inner / nf;
    let mut lap = s.clone();
    for m in 0..dim {
        lap.column_mut(m).scale_mut(circle_eigenvalue(m));
    }
    lap -= delta_s;
    let sqrt_iw: Vec<f64> = inv_w.iter().map(|x| x.sqrt()).collect();
    for (k, f) in sqrt_iw.iter().enumerate() {
        lap.row_mut(k).scale_mut(*f);
    }
    let laplacian_err = crate::linalg::spectral_norm_real(&lap);

    let mut ws = s.clone();
    for (k, iw) in inv_w.iter().enumerate() {
        ws.row_mut(k).scale_mut(*iw);
    }
    let gram = s.transpose() * ws;
    let gram_err = (gram - DMatrix::identity(dim, dim)).norm();

    let a = config.activation;
    let s_hi = phi.columns(0, lp) / sqrt_n;
    let mut activation_err = f64::NEG_INFINITY;
    for p in probes {
        let sampled = (&s * &p.f).map(|y| a.apply(y));
        let mut diff = sampled - &s_hi * &p.p_rho;
        for (k, f) in sqrt_iw.iter().enumerate() {
            diff[k] *= f;
        }
        activation_err = activation_err.max((diff.norm() - p.tail_l2) / p.f.norm());
    }
    Ok((laplacian_err, gram_err, activation_err))
}

fn bounds_at(constants: &MCBoundConstants, n: usize, delta: f64) -> (f64, f64, f64) {
    let nf = n as f64;
    (
        constants.c_quad1 * delta.powf(-0.5) * nf.powf(-0.5),
        constants.c_quad2 * delta.powf(-0.5) * nf.powf(-0.5),
        constants.c_quad3 * constants.w_min.powf(-0.25) * nf.powf(-0.25) * delta.powf(-0.25),
    )
}

fn finish(constants: &MCBoundConstants, delta: f64, n: usize, size_index: usize, trial: usize, stream: u64, e: (f64, f64, f64)) -> TrialResult {
    let (b1, b2, b3) = bounds_at(constants, n, delta);
    TrialResult {
        n,
        size_index,
        trial,
        stream,
        laplacian_err: e.0,
        gram_err: e.1,
        activation_err: e.2,
        bound_laplacian: b1,
        bound_gram: b2,
        bound_activation: b3,
        violates_laplacian: e.0 > b1,
        violates_gram: e.1 > b2,
        violates_activation: e.2 > b3,
    }
}

/// A single trial with its own seed.
pub fn mc_trial(config: &TrialConfig, constants: &MCBoundConstants, n: usize, seed: u64) -> Result<TrialResult> {
    config.validate()?;
    if n < circle_dim(config.band) {
        return Err(Error::Parameter(format!("N = {n} is below dim PW")));
    }
    let probes = probe_data(config);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = run_trial(config, &probes, n, &mut rng)?;
    Ok(finish(constants, config.delta, n, 0, 0, 0, e))
}

/// Every (size, trial) of the config, in parallel, returned in (size, trial) order.
pub fn run_trials(config: &TrialConfig, constants: &MCBoundConstants) -> Result<Vec<TrialResult>> {
    config.validate()?;
    let probes = probe_data(config);
    let jobs: Vec<(usize, usize, usize)> = config
        .sizes
        .iter()
        .enumerate()
        .flat_map(|(si, &n)| (0..config.trials).map(move |t| (si, n, t)))
        .collect();
    jobs.par_iter()
        .map(|&(si, n, t)| {
            let (mut rng, stream) = trial_rng(config.seed, si, t);
            let e = run_trial(config, &probes, n, &mut rng)?;
            Ok(finish(constants, config.delta, n, si, t, stream, e))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureRates {
    pub n: usize,
    pub trials: usize,
    pub laplacian: f64,
    pub gram: f64,
    pub activation: f64,
    pub delta: f64,
}

impl FailureRates {
    pub fn within_delta(&self) -> bool {
        self.laplacian <= self.delta && self.gram <= self.delta && self.activation <= self.delta
    }
}

/// Per sample size, the fraction of trials violating each bound.
pub fn failure_rate(config: &TrialConfig, trials: &[TrialResult]) -> Vec<FailureRates> {
    config
        .sizes
        .iter()
        .enumerate()
        .map(|(si, &n)| {
            let rows: Vec<&TrialResult> = trials.iter().filter(|t| t.size_index == si).collect();
            let k = rows.len().max(1) as f64;
            let frac = |f: &dyn Fn(&TrialResult) -> bool| rows.iter().filter(|t| f(t)).count() as f64 / k;
            FailureRates {
                n,
                trials: rows.len(),
                laplacian: frac(&|t| t.violates_laplacian),
                gram: frac(&|t| t.violates_gram),
                activation: frac(&|t| t.violates_activation),
                delta: config.delta,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slopes {
    pub laplacian: f64,
    pub gram: f64,
    pub activation: Option<f64>,
    pub medians: Vec<(usize, f64, f64, f64)>,
}

/// Medians below this are exact-quadrature zeros up to rounding.
pub const ZERO_MEDIAN: f64 = 1e-12;

/// Least-squares slope of log median error against log N.
pub fn slope_fit(config: &TrialConfig, trials: &[TrialResult]) -> Result<Slopes> {
    if config.sizes.len() < 3 {
        return Err(Error::Parameter("slope fits need at least 3 sample sizes".into()));
    }
    let mut medians = Vec::new();
    for (si, &n) in config.sizes.iter().enumerate() {
        let rows: Vec<&TrialResult> = trials.iter().filter(|t| t.size_index == si).collect();
        let med = |f: &dyn Fn(&TrialResult) -> f64| median(&rows.iter().map(|t| f(t)).collect::<Vec<_>>());
        medians.push((n, med(&|t| t.laplacian_err), med(&|t| t.gram_err), med(&|t| t.activation_err)));
    }
    let logn: Vec<f64> = medians.iter().map(|m| (m.0 as f64).ln()).collect();
    let fit = |vals: Vec<f64>, what: &str| -> Result<f64> {
        if vals.iter().any(|v| !(*v > ZERO_MEDIAN)) {
            return Err(Error::SlopeUndefined(format!("median {what} error is zero")));
        }
        Ok(ols_slope(&logn, &vals.iter().map(|v| v.ln()).collect::<Vec<_>>()))
    };
    let laplacian = fit(medians.iter().map(|m| m.1).collect(), "laplacian")?;
    let gram = fit(medians.iter().map(|m| m.2).collect(), "gram")?;
    // the activation term is a difference of norms and may be ≤ 0
    let activation = fit(medians.iter().map(|m| m.3).collect(), "activation").ok();
    Ok(Slopes { laplacian, gram, activation, medians })
}

/// M_λ(2DB w_min^{-1} max‖φ‖_∞ N^{-α} + ‖g‖ w_min^{-1/2} max‖φ‖_∞² N^{-1/2}) δ^{-1/2}.
#[allow(clippy::too_many_arguments)]
pub fn nonasymptotic_filter_bound(
    d: f64,
    g_norm: f64,
    m_lambda: usize,
    w_min: f64,
    max_phi_inf: f64,
    n: usize,
    alpha: f64,
    b_const: f64,
    delta: f64,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::Parameter(format!("α = {alpha} is outside (0, 1/2]")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!("δ = {delta} is outside (0, 1)")));
    }
    if !(w_min > 0.0) || n == 0 {
        return Err(Error::Parameter("need w_min > 0 and N ≥ 1".into()));
    }
    let nf = n as f64;
    let t1 = 2.0 * d * b_const / w_min * max_phi_inf * nf.powf(-alpha);
    let t2 = g_norm / w_min.sqrt() * max_phi_inf * max_phi_inf * nf.powf(-0.5);
    Ok(m_lambda as f64 * (t1 + t2) / delta.sqrt())
}

/// One Monte-Carlo estimate of [Δ f](x0) from n weighted samples.
pub fn laplacian_sample_at<R: Rng>(kernel: &BandlimitedKernel, weight: &WeightFunction, coeffs: &DVector<f64>, x0: f64, n: usize, rng: &mut R) -> f64 {
    // mean of H(x0, x) f(x) / w(x) with x ~ w
    (0..n)
        .map(|_| {
            let x = weight.sample(rng);
            kernel.eval(x0, x) * circle_eval(coeffs, x) / weight.eval(x)
        })
        .sum::<f64>()
        / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constants_uniform_circle() {
        let cfg = TrialConfig::new(1.0, 4.0, vec![64], 1, 0.25, 1);
        let c = mc_constants(&cfg).unwrap();
        assert_eq!(c.w_min, 1.0);
        assert_abs_diff_eq!(c.c_quad2, 2.0 * 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.c_lambda, 3f64.sqrt(), epsilon = 1e-14);
        assert_eq!(c.lambda_l1, 10.0);
        assert!(c.h_l2 <= c.lambda_l1);
        assert!(c.c_quad3 > 0.0);
    }

    #[test]
    fn c_lambda_certificate() {
        let c = (3f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let f = random_unit_coefficients(3, &mut rng);
            let sup = (0..2048).map(|k| circle_eval(&f, k as f64 / 2048.0).abs()).fold(0.0, f64::max);
            assert!(sup <= c * f.norm() + 1e-12);
        }
    }

    #[test]
    fn equispaced_trials_are_exact() {
        let mut cfg = TrialConfig::new(1.0, 4.0, vec![16], 3, 0.25, 1);
        cfg.scheme = SamplingScheme::Equispaced;
        let c = mc_constants(&cfg).unwrap();
        let t = run_trials(&cfg, &c).unwrap();
        for r in &t {
            assert!(r.laplacian_err < 1e-12 && r.gram_err < 1e-12);
        }
        let rates = failure_rate(&cfg, &t);
        assert_eq!(rates[0].laplacian, 0.0);
        assert_eq!(rates[0].gram, 0.0);
        assert!(matches!(slope_fit(&TrialConfig { sizes: vec![16, 32, 64], ..cfg.clone() }, &run_trials(&TrialConfig { sizes: vec![16, 32, 64], ..cfg.clone() }, &c).unwrap()), Err(Error::SlopeUndefined(_))));
    }

    #[test]
    fn trials_are_reproducible() {
        let cfg = TrialConfig::new(1.0, 4.0, vec![32, 64], 4, 0.25, 11);
        let c = mc_constants(&cfg).unwrap();
        assert_eq!(run_trials(&cfg, &c).unwrap(), run_trials(&cfg, &c).unwrap());
    }

    #[test]
    fn nonasymptotic_examples() {
        assert_eq!(nonasymptotic_filter_bound(0.0, 0.0, 3, 1.0, 2f64.sqrt(), 1024, 0.5, 1.0, 0.1).unwrap(), 0.0);
        let v = nonasymptotic_filter_bound(1.0, 1.0, 3, 1.0, 2f64.sqrt(), 1024, 0.5, 1.0, 0.1).unwrap();
        let oracle = 3.0 * (2.0 * 2f64.sqrt() / 32.0 + 2.0 / 32.0) / 0.1f64.sqrt();
        assert_abs_diff_eq!(v, oracle, epsilon = 1e-13);
        let v4 = nonasymptotic_filter_bound(1.0, 1.0, 3, 1.0, 2f64.sqrt(), 4096, 0.5, 1.0, 0.1).unwrap();
        assert_abs_diff_eq!(v4, v / 2.0, epsilon = 1e-13);
        assert!(nonasymptotic_filter_bound(1.0, 1.0, 3, 1.0, 1.0, 10, 0.7, 1.0, 0.1).is_err());
    }

    #[test]
    fn markov_rate_holds_at_quarter() {
        for weight in [WeightFunction::Uniform, WeightFunction::cosine_default()] {
            let mut cfg = TrialConfig::new(1.0, 4.0, vec![256], 400, 0.25, 5);
            cfg.weight = weight;
            cfg.probes = 16;
            let c = mc_constants(&cfg).unwrap();
            let r = failure_rate(&cfg, &run_trials(&cfg, &c).unwrap());
            assert!(r[0].within_delta(), "{:?}", r[0]);
        }
    }

    #[test]
    fn zero_kernel_band_is_exact() {
        let cfg = TrialConfig::new(0.0, 0.0, vec![8], 1, 0.5, 1);
        let c = mc_constants(&cfg).unwrap();
        let r = mc_trial(&cfg, &c, 8, 3).unwrap();
        assert!(r.laplacian_err < 1e-13);
    }

    #[test]
    fn sampled_laplacian_is_unbiased() {
        let kernel = BandlimitedKernel::new(4.0).unwrap();
        let w = WeightFunction::cosine_default();
        let f = DVector::from_vec(vec![0.3, 0.8, -0.5]);
        let x0 = 0.17;
        // L f on the modes λ = 0, 1, 1
        let exact = circle_eval(&DVector::from_vec(vec![0.0, 0.8, -0.5]), x0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let draws: Vec<f64> = (0..400).map(|_| laplacian_sample_at(&kernel, &w, &f, x0, 64, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
        let se = (var / draws.len() as f64).sqrt();
        assert!((mean - exact).abs() < 3.0 * se, "mean {mean} exact {exact} se {se}");
    }

    #[test]
    fn loose_delta_never_fails() {
        let cfg = TrialConfig::new(1.0, 4.0, vec![64], 100, 0.99, 3);
        let c = mc_constants(&cfg).unwrap();
        let r = failure_rate(&cfg, &run_trials(&cfg, &c).unwrap());
        assert!(r[0].within_delta());
    }
}
