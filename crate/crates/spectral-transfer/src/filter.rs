//! Scalar filters g and three ways to form g(T): exact spectral synthesis,
//! rational algebra (products and linear solves), and Chebyshev interpolation
//! evaluated by the three-term recurrence.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EigenDecomposition, OperatorWithInnerProduct};
use crate::linalg::{c, condition_number_real, real_part, C64};

/// Filter family. lowpass/highpass/midpass/table are defined on the real line only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FilterKind {
    Identity,
    Heat { t: f64 },
    Lowpass { c: f64 },
    Highpass { c: f64 },
    Midpass { c: f64, sigma: f64 },
    Table { knots: Vec<(f64, f64)> },
    Polynomial { coeffs: Vec<f64> },
    Rational { num: Vec<f64>, den: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    kind: FilterKind,
    scale: f64,
    lipschitz: Option<f64>,
}

impl Filter {
    pub fn new(kind: FilterKind) -> Result<Self> {
        let ok = match &kind {
            FilterKind::Heat { t } => t.is_finite(),
            FilterKind::Lowpass { c } | FilterKind::Highpass { c } => *c > 0.0 && c.is_finite(),
            FilterKind::Midpass { c, sigma } => c.is_finite() && *sigma > 0.0,
            FilterKind::Table { knots } => !knots.is_empty() && knots.windows(2).all(|w| w[0].0 < w[1].0),
            FilterKind::Polynomial { coeffs } => !coeffs.is_empty(),
            FilterKind::Rational { num, den } => !num.is_empty() && den.iter().any(|d| *d != 0.0),
            FilterKind::Identity => true,
        };
        if !ok {
            return Err(Error::Parameter(format!("invalid filter parameters {kind:?}")));
        }
        let lipschitz = analytic_lipschitz(&kind);
        Ok(Self { kind, scale: 1.0, lipschitz })
    }

    pub fn identity() -> Self {
        Self::new(FilterKind::Identity).unwrap()
    }

    pub fn heat(t: f64) -> Self {
        Self::new(FilterKind::Heat { t }).expect("finite t")
    }

    pub fn lowpass(c: f64) -> Self {
        Self::new(FilterKind::Lowpass { c }).expect("c > 0")
    }

    pub fn highpass(c: f64) -> Self {
        Self::new(FilterKind::Highpass { c }).expect("c > 0")
    }

    pub fn midpass(c: f64, sigma: f64) -> Self {
        Self::new(FilterKind::Midpass { c, sigma }).expect("sigma > 0")
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        Self::new(FilterKind::Polynomial { coeffs }).expect("nonempty coefficients")
    }

    pub fn rational(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        Self::new(FilterKind::Rational { num, den })
    }

    pub fn table(knots: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(FilterKind::Table { knots })
    }

    pub fn kind(&self) -> &FilterKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Lipschitz constant D, analytic or user supplied.
    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz.map(|d| d * self.scale.abs())
    }

    pub fn with_lipschitz(mut self, d: f64) -> Self {
        self.lipschitz = Some(d / self.scale.abs());
        self
    }

    /// α·g, keeping D consistent.
    pub fn scaled(&self, alpha: f64) -> Self {
        let mut f = self.clone();
        f.scale *= alpha;
        f
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, FilterKind::Identity) && self.scale == 1.0
    }

    pub fn name(&self) -> String {
        let base = match &self.kind {
            FilterKind::Identity => "identity".to_string(),
            FilterKind::Heat { t } => format!("heat(t={t})"),
            FilterKind::Lowpass { c } => format!("lowpass(c={c})"),
            FilterKind::Highpass { c } => format!("highpass(c={c})"),
            FilterKind::Midpass { c, sigma } => format!("midpass(c={c},sigma={sigma})"),
            FilterKind::Table { knots } => format!("table({} knots)", knots.len()),
            FilterKind::Polynomial { coeffs } => format!("polynomial(deg={})", coeffs.len() - 1),
            FilterKind::Rational { num, den } => format!("rational({}/{})", num.len() - 1, den.len() - 1),
        };
        if self.scale == 1.0 {
            base
        } else {
            format!("{}*{base}", self.scale)
        }
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        let v = match &self.kind {
            FilterKind::Identity => c(1.0),
            FilterKind::Heat { t } => (-z * *t).exp(),
            FilterKind::Polynomial { coeffs } => horner(coeffs, z),
            FilterKind::Rational { num, den } => {
                let d = horner(den, z);
                if d.norm() == 0.0 {
                    return Err(Error::Evaluation { filter: self.name(), value: z });
                }
                horner(num, z) / d
            }
            _ => {
                if z.im.abs() > 1e-12 * (1.0 + z.norm()) {
                    return Err(Error::Evaluation { filter: self.name(), value: z });
                }
                c(self.eval_real_kind(z.re))
            }
        };
        Ok(v * self.scale)
    }

    pub fn eval_real(&self, x: f64) -> Result<f64> {
        match &self.kind {
            FilterKind::Rational { .. } | FilterKind::Polynomial { .. } | FilterKind::Heat { .. } | FilterKind::Identity => {
                Ok(self.eval(c(x))?.re)
            }
            _ => Ok(self.scale * self.eval_real_kind(x)),
        }
    }

    fn eval_real_kind(&self, x: f64) -> f64 {
        match &self.kind {
            FilterKind::Lowpass { c } => (1.0 - x / c).max(0.0),
            FilterKind::Highpass { c } => (x / c).min(1.0),
            FilterKind::Midpass { c, sigma } => (-(x - c) * (x - c) / (2.0 * sigma * sigma)).exp(),
            FilterKind::Table { knots } => table_eval(knots, x),
            _ => unreachable!("handled in eval"),
        }
    }
}

fn horner(coeffs: &[f64], z: C64) -> C64 {
    coeffs.iter().rev().fold(c(0.0), |acc, &k| acc * z + k)
}

fn table_eval(knots: &[(f64, f64)], x: f64) -> f64 {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = knots.partition_point(|k| k.0 <= x) - 1;
    let (x0, y0) = knots[i];
    let (x1, y1) = knots[i + 1];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

fn analytic_lipschitz(kind: &FilterKind) -> Option<f64> {
    match kind {
        FilterKind::Identity => Some(0.0),
        // valid on the nonnegative half-line, where Laplacian spectra live
        FilterKind::Heat { t } => Some(t.abs()),
        FilterKind::Lowpass { c } | FilterKind::Highpass { c } => Some(1.0 / c),
        FilterKind::Midpass { sigma, .. } => Some(1.0 / (sigma * std::f64::consts::E.sqrt())),
        FilterKind::Table { knots } => Some(
            knots
                .windows(2)
                .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
                .fold(0.0, f64::max),
        ),
        FilterKind::Polynomial { .. } | FilterKind::Rational { .. } => None,
    }
}

/// Reads a two-column `λ g(λ)` table; `#` starts a comment.
pub fn parse_table_file(path: impl AsRef<Path>) -> Result<Filter> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table_str(&text, &path.display().to_string())
}

pub fn parse_table_str(text: &str, origin: &str) -> Result<Filter> {
    let mut knots = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse { path: origin.to_string(), line: i + 1, msg };
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 2 {
            return Err(parse_err(format!("expected 2 columns, found {}", cols.len())));
        }
        let x: f64 = cols[0].parse().map_err(|_| parse_err(format!("bad number `{}`", cols[0])))?;
        let y: f64 = cols[1].parse().map_err(|_| parse_err(format!("bad number `{}`", cols[1])))?;
        if !x.is_finite() || !y.is_finite() {
            return Err(parse_err("non-finite value".into()));
        }
        if let Some(&(px, _)) = knots.last() {
            if x <= px {
                return Err(parse_err("knots must be strictly increasing".into()));
            }
        }
        knots.push((x, y));
    }
    Filter::table(knots)
}

/// g(T) as a dense matrix; g ≡ 1 maps to the exact identity.
pub fn filter_matrix(filter: &Filter, eig: &EigenDecomposition) -> Result<DMatrix<C64>> {
    if filter.is_identity() {
        return Ok(DMatrix::identity(eig.dim(), eig.dim()));
    }
    eig.function_matrix(|z| filter.eval(z))
}

/// Σ_j g(λ_j) P_j s.
pub fn apply_exact(filter: &Filter, eig: &EigenDecomposition, signal: &DVector<f64>) -> Result<DVector<C64>> {
    if signal.len() != eig.dim() {
        return Err(Error::Dimension(format!("signal has length {} for dimension {}", signal.len(), eig.dim())));
    }
    let s = signal.map(c);
    if filter.is_identity() {
        return Ok(s);
    }
    eig.apply(|z| filter.eval(z), &s)
}

/// [`apply_exact`] for real-valued outputs (real spectra, or conjugate-symmetric g).
pub fn apply_exact_real(filter: &Filter, eig: &EigenDecomposition, signal: &DVector<f64>) -> Result<DVector<f64>> {
    let out = apply_exact(filter, eig, signal)?;
    real_part(&out, 1e-9).ok_or_else(|| Error::Domain(format!("{} produced a complex output", filter.name())))
}

fn poly_of(coeffs: &[f64], t: &DMatrix<f64>) -> DMatrix<f64> {
    let n = t.nrows();
    let mut acc = DMatrix::zeros(n, n);
    for &k in coeffs.iter().rev() {
        acc = &acc * t + DMatrix::identity(n, n) * k;
    }
    acc
}

fn poly_apply(coeffs: &[f64], t: &DMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
    let mut acc = DVector::zeros(x.len());
    for &k in coeffs.iter().rev() {
        acc = t * acc + x * k;
    }
    acc
}

/// (Σ c_l T^l)(Σ d_l T^l)^{-1} s, with no spectral information used.
pub fn apply_rational(filter: &Filter, op: &OperatorWithInnerProduct, signal: &DVector<f64>) -> Result<DVector<f64>> {
    let (num, den): (&[f64], &[f64]) = match filter.kind() {
        FilterKind::Rational { num, den } => (num, den),
        FilterKind::Polynomial { coeffs } => (coeffs, &[1.0]),
        FilterKind::Identity => (&[1.0], &[1.0]),
        _ => return Err(Error::Parameter(format!("{} is not a rational filter", filter.name()))),
    };
    if signal.len() != op.dim() {
        return Err(Error::Dimension(format!("signal has length {} for dimension {}", signal.len(), op.dim())));
    }
    let t = &op.matrix;
    let d = poly_of(den, t);
    let cond = condition_number_real(&d);
    if !(cond <= 1e10) {
        return Err(Error::SingularFilter { cond });
    }
    let x = d.lu().solve(signal).ok_or(Error::SingularFilter { cond: f64::INFINITY })?;
    Ok(poly_apply(num, t, &x) * filter.scale())
}

/// Chebyshev coefficients of the degree-k interpolant at first-kind nodes on [a, b].
pub fn chebyshev_coefficients(filter: &Filter, degree: usize, a: f64, b: f64) -> Result<Vec<f64>> {
    let m = degree + 1;
    let mut vals = Vec::with_capacity(m);
    for i in 0..m {
        let theta = std::f64::consts::PI * (i as f64 + 0.5) / m as f64;
        let x = 0.5 * (b - a) * theta.cos() + 0.5 * (b + a);
        vals.push(filter.eval_real(x)?);
    }
    let mut coeffs = Vec::with_capacity(m);
    for j in 0..m {
        let s: f64 = (0..m)
            .map(|i| vals[i] * (j as f64 * std::f64::consts::PI * (i as f64 + 0.5) / m as f64).cos())
            .sum();
        let cj = 2.0 * s / m as f64;
        coeffs.push(if j == 0 { 0.5 * cj } else { cj });
    }
    Ok(coeffs)
}

/// Clenshaw evaluation of Σ c_j T_j at x ∈ [a, b].
pub fn chebyshev_eval(coeffs: &[f64], a: f64, b: f64, x: f64) -> f64 {
    let y = (2.0 * x - a - b) / (b - a);
    let (mut b1, mut b2) = (0.0, 0.0);
    for &k in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * y * b1 - b2 + k;
        b2 = b1;
        b1 = b0;
    }
    y * b1 - b2 + coeffs[0]
}

/// Real spectrum of an operator, or an interval error if it is not real.
fn real_spectrum(op: &OperatorWithInnerProduct) -> Result<Vec<f64>> {
    let m = &op.matrix;
    let sym = (m - m.transpose()).norm() <= 1e-12 * m.norm().max(1e-300);
    if sym && op.inner == crate::graph::InnerProduct::Identity {
        return Ok(nalgebra::SymmetricEigen::new(m.clone()).eigenvalues.iter().cloned().collect());
    }
    let eig = crate::graph::eigendecompose(op, None)?;
    let vals = eig.eigenvalues();
    if vals.iter().any(|z| z.im.abs() > 1e-9) {
        return Err(Error::Interval { lo: f64::NAN, hi: f64::NAN, a: f64::NAN, b: f64::NAN });
    }
    Ok(vals.iter().map(|z| z.re).collect())
}

/// Default interval: [0, 2] for normalized Laplacians, else [min(0, λ_min), λ_max(1 + 1e-6)].
pub fn default_chebyshev_interval(op: &OperatorWithInnerProduct, normalized: bool) -> Result<(f64, f64)> {
    if normalized {
        return Ok((0.0, 2.0));
    }
    let spec = real_spectrum(op)?;
    let lo = spec.iter().cloned().fold(0.0, f64::min);
    let hi = spec.iter().cloned().fold(0.0, f64::max);
    Ok((lo, (hi * (1.0 + 1e-6)).max(lo + 1e-12)))
}

/// p_k(T)s for the degree-k Chebyshev interpolant p_k of g on [a, b].
pub fn apply_chebyshev(
    filter: &Filter,
    op: &OperatorWithInnerProduct,
    degree: usize,
    interval: (f64, f64),
    signal: &DVector<f64>,
) -> Result<DVector<f64>> {
    let (a, b) = interval;
    if !(b > a) {
        return Err(Error::Parameter(format!("empty interval [{a}, {b}]")));
    }
    if signal.len() != op.dim() {
        return Err(Error::Dimension(format!("signal has length {} for dimension {}", signal.len(), op.dim())));
    }
    let spec = real_spectrum(op)?;
    let lo = spec.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = spec.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo < a - 1e-9 || hi > b + 1e-9 {
        return Err(Error::Interval { lo, hi, a, b });
    }
    let coeffs = chebyshev_coefficients(filter, degree, a, b)?;
    // X = (2T − (a+b)I)/(b − a)
    let scale = 2.0 / (b - a);
    let shift = (a + b) / (b - a);
    let x_apply = |v: &DVector<f64>| -> DVector<f64> { &op.matrix * v * scale - v * shift };
    let mut t_prev = signal.clone();
    let mut out = &t_prev * coeffs[0];
    if degree == 0 {
        return Ok(out);
    }
    let mut t_cur = x_apply(&t_prev);
    out += &t_cur * coeffs[1];
    for &k in coeffs.iter().skip(2) {
        let t_next = x_apply(&t_cur) * 2.0 - &t_prev;
        out += &t_next * k;
        t_prev = t_cur;
        t_cur = t_next;
    }
    Ok(out)
}

/// sup_{[a,b]} |g − p_k|, estimated on a dense grid plus `extra` points, then refined locally.
pub fn chebyshev_sup_error(filter: &Filter, degree: usize, a: f64, b: f64, extra: &[f64]) -> Result<f64> {
    let coeffs = chebyshev_coefficients(filter, degree, a, b)?;
    let err = |x: f64| -> Result<f64> { Ok((filter.eval_real(x)? - chebyshev_eval(&coeffs, a, b, x)).abs()) };
    let n = 8192;
    let h = (b - a) / n as f64;
    let mut best = 0.0f64;
    let mut best_x = a;
    for i in 0..=n {
        let x = a + h * i as f64;
        let e = err(x)?;
        if e > best {
            best = e;
            best_x = x;
        }
    }
    for &x in extra {
        if x >= a && x <= b {
            best = best.max(err(x)?);
        }
    }
    // golden-section refinement around the grid maximum
    let (mut lo, mut hi) = ((best_x - h).max(a), (best_x + h).min(b));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if err(x1)? > err(x2)? {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    Ok(best.max(err(0.5 * (lo + hi))?))
}

/// V_g(λ_m) = max over κ with |κ − λ_m| > tol of |g(κ) − g(λ_m)| / |κ − λ_m|.
pub fn vg(filter: &Filter, lambda_m: C64, target_spectrum: &[C64], exclusion_tol: f64) -> Result<f64> {
    let g0 = filter.eval(lambda_m)?;
    let mut best = 0.0f64;
    for &k in target_spectrum {
        let d = (k - lambda_m).norm();
        if d > exclusion_tol {
            best = best.max((filter.eval(k)? - g0).norm() / d);
        }
    }
    Ok(best)
}

/// max_m |g(λ_m)|.
pub fn sup_norm_on_spectrum(filter: &Filter, eigenvalues: &[C64]) -> Result<f64> {
    eigenvalues.iter().try_fold(0.0f64, |acc, &z| Ok(acc.max(filter.eval(z)?.norm())))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterConstants {
    pub vg_per_eig: Vec<f64>,
    pub sup_norm: f64,
}

pub fn filter_constants(filter: &Filter, lambdas: &[C64], target_spectrum: &[C64]) -> Result<FilterConstants> {
    let vg_per_eig = lambdas.iter().map(|&l| vg(filter, l, target_spectrum, 1e-12)).collect::<Result<Vec<_>>>()?;
    Ok(FilterConstants { vg_per_eig, sup_norm: sup_norm_on_spectrum(filter, lambdas)? })
}

/// Largest difference quotient over all pairs of `points`.
pub fn empirical_lipschitz(filter: &Filter, points: &[f64]) -> Result<f64> {
    let vals = points.iter().map(|&x| filter.eval_real(x)).collect::<Result<Vec<_>>>()?;
    let mut best = 0.0f64;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = (points[i] - points[j]).abs();
            if d > 1e-12 {
                best = best.max((vals[i] - vals[j]).abs() / d);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_laplacian, eigendecompose, path, LaplacianKind};
    use approx::assert_abs_diff_eq;

    fn p2() -> (OperatorWithInnerProduct, EigenDecomposition) {
        let op = build_laplacian(&path(2), LaplacianKind::Unnormalized).unwrap();
        let eig = eigendecompose(&op, None).unwrap();
        (op, eig)
    }

    #[test]
    fn exact_examples() {
        let (op, eig) = p2();
        let s = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(apply_exact_real(&Filter::identity(), &eig, &s).unwrap(), s);
        let lin = Filter::polynomial(vec![0.0, 1.0]);
        assert_abs_diff_eq!(apply_exact_real(&lin, &eig, &s).unwrap(), DVector::from_vec(vec![1.0, -1.0]), epsilon = 1e-14);
        let sq = Filter::polynomial(vec![0.0, 0.0, 1.0]);
        let oracle = &op.matrix * &op.matrix * &s;
        assert_abs_diff_eq!(apply_exact_real(&sq, &eig, &s).unwrap(), oracle, epsilon = 1e-14);
        assert_abs_diff_eq!(oracle, DVector::from_vec(vec![2.0, -2.0]), epsilon = 1e-15);
    }

    #[test]
    fn rational_examples() {
        let (op, _) = p2();
        let s = DVector::from_vec(vec![1.0, 0.0]);
        let lin = Filter::rational(vec![0.0, 1.0], vec![1.0]).unwrap();
        assert_abs_diff_eq!(apply_rational(&lin, &op, &s).unwrap(), &op.matrix * &s, epsilon = 1e-14);
        let res = Filter::rational(vec![1.0], vec![1.0, 1.0]).unwrap();
        let ones = DVector::from_vec(vec![1.0, 1.0]);
        // oracle: solve (I + Δ)x = (1,1) by hand — Δ(1,1) = 0 so x = (1,1)
        assert_abs_diff_eq!(apply_rational(&res, &op, &ones).unwrap(), ones, epsilon = 1e-14);
        let cancel = Filter::rational(vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(apply_rational(&cancel, &op, &s).unwrap(), s, epsilon = 1e-12);
    }

    #[test]
    fn singular_denominator_rejected() {
        let (op, _) = p2();
        // d(λ) = λ vanishes on the zero eigenvalue
        let f = Filter::rational(vec![1.0], vec![0.0, 1.0]).unwrap();
        let s = DVector::from_vec(vec![1.0, 0.0]);
        assert!(matches!(apply_rational(&f, &op, &s), Err(Error::SingularFilter { .. })));
    }

    #[test]
    fn chebyshev_examples() {
        let (op, _) = p2();
        let s = DVector::from_vec(vec![0.3, -1.1]);
        let k = Filter::polynomial(vec![2.5]);
        assert_abs_diff_eq!(apply_chebyshev(&k, &op, 0, (0.0, 2.0), &s).unwrap(), &s * 2.5, epsilon = 1e-15);
        let lin = Filter::polynomial(vec![0.0, 1.0]);
        assert_abs_diff_eq!(apply_chebyshev(&lin, &op, 1, (0.0, 2.0), &s).unwrap(), &op.matrix * &s, epsilon = 1e-12);
        assert!(matches!(apply_chebyshev(&lin, &op, 1, (0.0, 1.5), &s), Err(Error::Interval { .. })));
    }

    #[test]
    fn vg_examples() {
        let lin = Filter::polynomial(vec![0.0, 1.0]);
        let spec: Vec<C64> = [0.0, 1.5, 3.0].iter().map(|&x| c(x)).collect();
        assert_abs_diff_eq!(vg(&lin, c(0.7), &spec, 1e-12).unwrap(), 1.0, epsilon = 1e-14);
        let sq = Filter::polynomial(vec![0.0, 0.0, 1.0]);
        assert_abs_diff_eq!(vg(&sq, c(0.0), &[c(2.0)], 1e-12).unwrap(), 2.0, epsilon = 1e-14);
        // κ = λ_m is excluded
        assert_eq!(vg(&sq, c(2.0), &[c(2.0)], 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn sup_norm_examples() {
        let spec: Vec<C64> = [0.0, 1.0, 4.0].iter().map(|&x| c(x)).collect();
        assert_eq!(sup_norm_on_spectrum(&Filter::identity(), &spec).unwrap(), 1.0);
        assert_eq!(sup_norm_on_spectrum(&Filter::polynomial(vec![0.0, 1.0]), &spec).unwrap(), 4.0);
        assert_abs_diff_eq!(sup_norm_on_spectrum(&Filter::heat(1.0), &spec).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn analytic_lipschitz_constants_bound_quotients() {
        let pts: Vec<f64> = (0..400).map(|i| i as f64 * 0.01).collect();
        for f in [Filter::lowpass(1.0), Filter::highpass(2.0), Filter::heat(1.0), Filter::midpass(1.0, 0.3)] {
            let d = f.lipschitz().unwrap();
            assert!(empirical_lipschitz(&f, &pts).unwrap() <= d * (1.0 + 1e-9), "{}", f.name());
        }
    }

    #[test]
    fn real_only_families_reject_complex_arguments() {
        assert!(Filter::lowpass(1.0).eval(C64::new(1.0, 0.5)).is_err());
        assert!(Filter::heat(1.0).eval(C64::new(1.0, 0.5)).is_ok());
    }

    #[test]
    fn table_interpolates_and_extrapolates() {
        let f = parse_table_str("# lambda g\n0 1\n1 0.5\n2 0  # tail\n", "t").unwrap();
        assert_eq!(f.eval_real(-1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(f.eval_real(0.5).unwrap(), 0.75, epsilon = 1e-15);
        assert_eq!(f.eval_real(5.0).unwrap(), 0.0);
        assert_eq!(f.lipschitz(), Some(0.5));
        match parse_table_str("0 1\n0 x\n", "t") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_table_str("1 1\n0 1\n", "t").is_err());
    }

    #[test]
    fn scaling_keeps_lipschitz_consistent() {
        let f = Filter::lowpass(2.0).scaled(4.0);
        assert_eq!(f.lipschitz(), Some(2.0));
        assert_eq!(f.eval_real(0.0).unwrap(), 4.0);
    }

    #[test]
    fn chebyshev_sup_error_decreases() {
        let f = Filter::heat(1.0);
        let e2 = chebyshev_sup_error(&f, 2, 0.0, 2.0, &[]).unwrap();
        let e8 = chebyshev_sup_error(&f, 8, 0.0, 2.0, &[]).unwrap();
        assert!(e8 < e2 && e8 < 1e-6);
    }
}
