//! Transferability errors and the five bounds relating filter error to
//! Laplacian error and consistency error, plus the two-graph comparison.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filter::{filter_matrix, vg, Filter};
use crate::graph::{build_laplacian, eigendecompose, EigenDecomposition, InnerProduct, LaplacianKind, OperatorWithInnerProduct};
use crate::linalg::{c, spectral_norm, to_complex, C64};
use crate::sampling::{
    coarsened_laplacian, coarsening_r, evaluation_operator, random_sampled_laplacian, CoarseningMap, PerturbedGraph,
    SampleSet,
};
use crate::space::{circle_dim, circle_eigenvalue, BandlimitedKernel, GraphSpace, WeightFunction};

/// lhs ≤ rhs·(1 + 1e−9) + 1e−12.
pub fn certified(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + 1e-9) + 1e-12
}

/// M and G in coordinates: PW(band) modes of M, their images under S, R, and Δ.
#[derive(Debug, Clone)]
pub struct TransferSetting {
    pub name: String,
    pub band: f64,
    pub lambdas: Vec<f64>,
    /// d_M × M, orthonormal columns under B_M.
    pub basis: DMatrix<f64>,
    pub m_inner: InnerProduct,
    /// N × M, columns Sφ_m.
    pub s_basis: DMatrix<f64>,
    /// d_M × N.
    pub r: DMatrix<f64>,
    pub delta: OperatorWithInnerProduct,
    pub delta_eig: EigenDecomposition,
}

/// R = S* = B_M^{-1} Sᵀ B_n.
fn adjoint_real(s: &DMatrix<f64>, m_inner: &InnerProduct, n_inner: &InnerProduct) -> Result<DMatrix<f64>> {
    let bn = n_inner.matrix(s.nrows()).map(|z| z.re);
    let bm = m_inner.matrix(s.ncols()).map(|z| z.re);
    let rhs = s.transpose() * bn;
    match m_inner {
        InnerProduct::Identity => Ok(rhs),
        _ => bm.lu().solve(&rhs).ok_or_else(|| Error::InvalidInnerProduct("B_M is singular".into())),
    }
}

impl TransferSetting {
    fn assemble(
        name: String,
        band: f64,
        lambdas: Vec<f64>,
        basis: DMatrix<f64>,
        m_inner: InnerProduct,
        s_basis: DMatrix<f64>,
        r: DMatrix<f64>,
        delta: OperatorWithInnerProduct,
    ) -> Result<Self> {
        if s_basis.nrows() != delta.dim() || r.ncols() != delta.dim() || r.nrows() != basis.nrows() {
            return Err(Error::Dimension("S, R and Δ do not chain".into()));
        }
        let delta_eig = eigendecompose(&delta, None)?;
        Ok(Self { name, band, lambdas, basis, m_inner, s_basis, r, delta, delta_eig })
    }

    /// S the coarsening, Δ = S L R, R = S*.
    pub fn coarsening(space: &GraphSpace, map: &CoarseningMap, band: f64) -> Result<Self> {
        let s = map.s_matrix();
        let delta = coarsened_laplacian(map, &space.laplacian)?;
        let r = coarsening_r(map, &space.laplacian.inner)?;
        let basis = space.pw_basis(band);
        let lambdas = space.eigenvalues()[..basis.ncols()].to_vec();
        let name = format!("coarsening {}→{}", map.fine_n, map.coarse_n());
        Self::assemble(name, band, lambdas, basis.clone(), space.laplacian.inner.clone(), &s * &basis, r, delta)
    }

    /// S = R = I on the perturbed graph, or the surviving-vertex restriction after deletions.
    pub fn perturbation(space: &GraphSpace, perturbed: &PerturbedGraph, kind: LaplacianKind, band: f64) -> Result<Self> {
        let n = space.dim();
        let delta = build_laplacian(&perturbed.graph, kind)?;
        let s = if perturbed.is_vertex_subset(n) { perturbed.restriction(n) } else { DMatrix::identity(n, n) };
        let r = adjoint_real(&s, &space.laplacian.inner, &delta.inner)?;
        let basis = space.pw_basis(band);
        let lambdas = space.eigenvalues()[..basis.ncols()].to_vec();
        let name = if perturbed.is_vertex_subset(n) {
            format!("vertex deletion {}→{}", n, perturbed.kept.len())
        } else {
            format!("perturbation |E| {}→{}", space.graph.n_edges(), perturbed.graph.n_edges())
        };
        Self::assemble(name, band, lambdas, basis.clone(), space.laplacian.inner.clone(), &s * &basis, r, delta)
    }

    /// S = R = I and Δ = L.
    pub fn identity(space: &GraphSpace, band: f64) -> Result<Self> {
        let n = space.dim();
        let basis = space.pw_basis(band);
        let lambdas = space.eigenvalues()[..basis.ncols()].to_vec();
        let r = DMatrix::identity(n, n);
        Self::assemble("identity".into(), band, lambdas, basis.clone(), space.laplacian.inner.clone(), basis, r, space.laplacian.clone())
    }

    /// Circle PW(band) in coefficient coordinates, sampled at `samples` with Δ_n from the kernel at λ̄.
    pub fn circle_sampling(samples: &SampleSet, weight: &WeightFunction, band: f64, kernel_band: f64) -> Result<Self> {
        if kernel_band < band {
            return Err(Error::Band(format!("kernel band {kernel_band} is below the signal band {band}")));
        }
        let pair = evaluation_operator(samples, band, weight)?;
        let delta = random_sampled_laplacian(&BandlimitedKernel::new(kernel_band)?, samples, weight)?;
        let m = circle_dim(band);
        let lambdas = (0..m).map(circle_eigenvalue).collect();
        let name = format!("circle sampling N={}", samples.len());
        Self::assemble(name, band, lambdas, DMatrix::identity(m, m), InnerProduct::Identity, pair.s_matrix, pair.r_matrix, delta)
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    fn f_m(&self) -> DMatrix<C64> {
        self.m_inner.half(self.basis.nrows())
    }

    fn f_n(&self) -> DMatrix<C64> {
        self.delta.inner.half(self.delta.dim())
    }

    /// ‖R‖ from (C^N, B_n) to (M, B_M).
    pub fn norm_r(&self) -> f64 {
        let finv = self.delta.inner.half_inverse(self.delta.dim());
        spectral_norm(&(self.f_m() * to_complex(&self.r) * finv))
    }

    /// max_m |g(λ_m)|.
    pub fn sup_g(&self, filter: &Filter) -> Result<f64> {
        self.lambdas.iter().try_fold(0.0f64, |a, &l| Ok(a.max(filter.eval(c(l))?.norm())))
    }

    /// ‖SLP − ΔSP‖ over PW(band).
    pub fn laplacian_operator_error(&self) -> f64 {
        spectral_norm(&(self.f_n() * to_complex(&self.lap_residual())))
    }

    /// ‖P − RSP‖ over PW(band).
    pub fn consistency_operator_error(&self) -> f64 {
        spectral_norm(&(self.f_m() * to_complex(&(&self.basis - &self.r * &self.s_basis))))
    }

    /// ‖LP − RΔSP‖ over PW(band).
    pub fn laplacian_m_operator_error(&self) -> f64 {
        let lb = &self.basis * DMatrix::from_diagonal(&DVector::from_vec(self.lambdas.clone()));
        spectral_norm(&(self.f_m() * to_complex(&(lb - &self.r * &self.delta.matrix * &self.s_basis))))
    }

    /// Columns SLφ_m − ΔSφ_m.
    fn lap_residual(&self) -> DMatrix<f64> {
        let mut x = self.s_basis.clone();
        for (j, &l) in self.lambdas.iter().enumerate() {
            x.column_mut(j).scale_mut(l);
        }
        x - &self.delta.matrix * &self.s_basis
    }
}

/// Measured (filter, Laplacian, consistency) errors for q = Σ c_m φ_m, with g applied exactly on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferErrors {
    pub filter_error: f64,
    pub laplacian_error: f64,
    pub consistency_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeRow {
    pub index: usize,
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub vg: f64,
    pub laplacian_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub item: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl BoundCheck {
    pub fn new(item: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { item: item.into(), lhs, rhs, pass: certified(lhs, rhs) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferReport {
    pub setting: String,
    pub filter: String,
    pub band: f64,
    pub count: usize,
    pub norm_r: f64,
    pub sup_g: f64,
    pub lipschitz: f64,
    pub lipschitz_is_analytic: bool,
    pub laplacian_operator_error: f64,
    pub consistency_operator_error: f64,
    pub per_mode: Vec<ModeRow>,
    pub bounds: Vec<BoundCheck>,
    pub signal_errors: Vec<TransferErrors>,
    /// C·Σ V|c|e + ‖g‖·‖(I − RS)P‖·‖q‖ per signal: a valid bound for the M-side pointwise error.
    pub pointwise_m_rigorous: Vec<f64>,
}

impl TransferReport {
    pub fn all_pass(&self) -> bool {
        self.per_mode.iter().all(|r| r.pass) && self.bounds.iter().all(|b| b.pass)
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .per_mode
            .iter()
            .filter(|r| !r.pass)
            .map(|r| format!("item1[mode {}]: {:e} > {:e}", r.index, r.lhs, r.rhs))
            .collect();
        out.extend(self.bounds.iter().filter(|b| !b.pass).map(|b| format!("{}: {:e} > {:e}", b.item, b.lhs, b.rhs)));
        out
    }
}

/// Everything the bounds need, computed once per (setting, filter).
struct Measured {
    g_l: Vec<C64>,
    /// N × M, columns g(Δ)Sφ_m.
    g_s: DMatrix<C64>,
    f_n: DMatrix<C64>,
    f_m: DMatrix<C64>,
    vg: Vec<f64>,
    e: Vec<f64>,
}

fn measure(setting: &TransferSetting, filter: &Filter) -> Result<Measured> {
    let g_delta = filter_matrix(filter, &setting.delta_eig)?;
    let g_s = &g_delta * to_complex(&setting.s_basis);
    let g_l = setting.lambdas.iter().map(|&l| filter.eval(c(l))).collect::<Result<Vec<_>>>()?;
    let spectrum = setting.delta_eig.eigenvalues();
    let tol = 1e-12 * setting.delta_eig.spectral_radius().max(1.0);
    let vgs = setting.lambdas.iter().map(|&l| vg(filter, c(l), &spectrum, tol)).collect::<Result<Vec<_>>>()?;
    let f_n = setting.f_n();
    let res = f_n.clone() * to_complex(&setting.lap_residual());
    let e = (0..setting.dim()).map(|j| res.column(j).norm()).collect();
    Ok(Measured { g_l, g_s, f_n, f_m: setting.f_m(), vg: vgs, e })
}

impl Measured {
    /// N × M, columns g(λ_m)Sφ_m − g(Δ)Sφ_m.
    fn g_residual(&self, setting: &TransferSetting) -> DMatrix<C64> {
        let mut x = to_complex(&setting.s_basis);
        for (j, g) in self.g_l.iter().enumerate() {
            { let mut col = x.column_mut(j); col *= *g; }
        }
        x - &self.g_s
    }

    /// d_M × M, columns g(λ_m)φ_m − Rg(Δ)Sφ_m.
    fn g_m_residual(&self, setting: &TransferSetting) -> DMatrix<C64> {
        let mut x = to_complex(&setting.basis);
        for (j, g) in self.g_l.iter().enumerate() {
            { let mut col = x.column_mut(j); col *= *g; }
        }
        x - to_complex(&setting.r) * &self.g_s
    }
}

/// (‖g(L)q − Rg(Δ)Sq‖, ‖Lq − RΔSq‖, ‖q − RSq‖).
pub fn transfer_errors(setting: &TransferSetting, filter: &Filter, coeffs: &DVector<f64>) -> Result<TransferErrors> {
    if coeffs.len() != setting.dim() {
        return Err(Error::Band(format!("signal has {} PW coefficients, the band holds {}", coeffs.len(), setting.dim())));
    }
    let m = measure(setting, filter)?;
    Ok(signal_errors(setting, &m, coeffs))
}

fn signal_errors(setting: &TransferSetting, m: &Measured, coeffs: &DVector<f64>) -> TransferErrors {
    let cc = coeffs.map(c);
    let filter_error = (&m.f_m * (m.g_m_residual(setting) * &cc)).norm();
    let lb = &setting.basis * DMatrix::from_diagonal(&DVector::from_vec(setting.lambdas.clone()));
    let lap = to_complex(&(lb - &setting.r * &setting.delta.matrix * &setting.s_basis));
    let laplacian_error = (&m.f_m * (lap * &cc)).norm();
    let cons = to_complex(&(&setting.basis - &setting.r * &setting.s_basis));
    let consistency_error = (&m.f_m * (cons * &cc)).norm();
    TransferErrors { filter_error, laplacian_error, consistency_error }
}

/// Per-mode item: (‖Sg(L)φ_m − g(Δ)Sφ_m‖, V_g(λ_m)·‖ΔSφ_m − λ_mSφ_m‖).
pub fn bound_fourier_mode(setting: &TransferSetting, filter: &Filter, m: usize) -> Result<(f64, f64)> {
    if m >= setting.dim() {
        return Err(Error::Band(format!("mode {m} is outside PW({})", setting.band)));
    }
    let meas = measure(setting, filter)?;
    let lhs = (&meas.f_n * meas.g_residual(setting).column(m)).norm();
    Ok((lhs, meas.vg[m] * meas.e[m]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    InG,
    InM,
}

/// Σ V_m|c_m|e_m, plus C·(that) + ‖g‖·consistency on the M side.
pub fn bound_pointwise(vgs: &[f64], coeffs: &[f64], mode_errors: &[f64], side: Side, norm_r: f64, sup_g: f64, consistency: f64) -> f64 {
    let s: f64 = vgs.iter().zip(coeffs).zip(mode_errors).map(|((v, c), e)| v * c.abs() * e).sum();
    match side {
        Side::InG => s,
        Side::InM => norm_r * s + sup_g * consistency,
    }
}

/// D√#·‖SLP − ΔSP‖, plus C·(that) + ‖g‖·‖P − RSP‖ on the M side.
pub fn bound_worstcase(d: f64, count: usize, laplacian_norm: f64, side: Side, norm_r: f64, sup_g: f64, consistency_norm: f64) -> f64 {
    let s = d * (count as f64).sqrt() * laplacian_norm;
    match side {
        Side::InG => s,
        Side::InM => norm_r * s + sup_g * consistency_norm,
    }
}

/// All five items for one filter, using every PW mode and each of `signals` (PW coefficients).
pub fn evaluate(setting: &TransferSetting, filter: &Filter, signals: &[DVector<f64>]) -> Result<TransferReport> {
    let meas = measure(setting, filter)?;
    let count = setting.dim();
    let g_res = &meas.f_n * meas.g_residual(setting);
    let per_mode: Vec<ModeRow> = (0..count)
        .map(|j| {
            let lhs = g_res.column(j).norm();
            let rhs = meas.vg[j] * meas.e[j];
            ModeRow { index: j, lambda: setting.lambdas[j], lhs, rhs, vg: meas.vg[j], laplacian_error: meas.e[j], pass: certified(lhs, rhs) }
        })
        .collect();
    let norm_r = setting.norm_r();
    let sup_g = setting.sup_g(filter)?;
    let max_vg = meas.vg.iter().cloned().fold(0.0, f64::max);
    let (d, analytic) = match filter.lipschitz() {
        Some(d) => (d, true),
        None => (max_vg, false),
    };
    let lap_norm = spectral_norm(&(&meas.f_n * to_complex(&setting.lap_residual())));
    let cons_mat = to_complex(&(&setting.basis - &setting.r * &setting.s_basis));
    let cons_norm = spectral_norm(&(&meas.f_m * &cons_mat));
    let g_m_res = meas.g_m_residual(setting);

    let mut bounds = Vec::new();
    let mut signal_out = Vec::new();
    let mut rigorous = Vec::new();
    for (k, coeffs) in signals.iter().enumerate() {
        if coeffs.len() != count {
            return Err(Error::Band(format!("signal {k} has {} coefficients, the band holds {count}", coeffs.len())));
        }
        let cc = coeffs.map(c);
        let lhs2 = (&g_res * &cc).norm();
        let rhs2 = bound_pointwise(&meas.vg, coeffs.as_slice(), &meas.e, Side::InG, norm_r, sup_g, 0.0);
        bounds.push(BoundCheck::new(format!("item2[signal {k}]"), lhs2, rhs2));
        let errs = signal_errors(setting, &meas, coeffs);
        let lhs4 = (&meas.f_m * (&g_m_res * &cc)).norm();
        let rhs4 = bound_pointwise(&meas.vg, coeffs.as_slice(), &meas.e, Side::InM, norm_r, sup_g, errs.consistency_error);
        bounds.push(BoundCheck::new(format!("item4[signal {k}]"), lhs4, rhs4));
        rigorous.push(norm_r * rhs2 + sup_g * cons_norm * coeffs.norm());
        signal_out.push(errs);
    }
    let lhs3 = spectral_norm(&g_res);
    bounds.push(BoundCheck::new("item3", lhs3, bound_worstcase(d, count, lap_norm, Side::InG, norm_r, sup_g, cons_norm)));
    let lhs5 = spectral_norm(&(&meas.f_m * &g_m_res));
    bounds.push(BoundCheck::new("item5", lhs5, bound_worstcase(d, count, lap_norm, Side::InM, norm_r, sup_g, cons_norm)));

    Ok(TransferReport {
        setting: setting.name.clone(),
        filter: filter.name(),
        band: setting.band,
        count,
        norm_r,
        sup_g,
        lipschitz: d,
        lipschitz_is_analytic: analytic,
        laplacian_operator_error: lap_norm,
        consistency_operator_error: cons_norm,
        per_mode,
        bounds,
        signal_errors: signal_out,
        pointwise_m_rigorous: rigorous,
    })
}

/// σ_max of the d_M × M matrix with columns Rg(Δ)Sφ_m, weighted by B_M.
fn rgs(setting: &TransferSetting, filter: &Filter) -> Result<DMatrix<C64>> {
    let g = filter_matrix(filter, &setting.delta_eig)?;
    Ok(to_complex(&setting.r) * g * to_complex(&setting.s_basis))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoGraphReport {
    pub error: f64,
    pub triangle_bound: f64,
    pub pass: bool,
}

/// ‖R₁g(Δ₁)S₁P − R₂g(Δ₂)S₂P‖ against the sum of both M-side worst-case bounds.
pub fn two_graph_error(s1: &TransferSetting, s2: &TransferSetting, filter: &Filter) -> Result<TwoGraphReport> {
    if s1.basis != s2.basis || s1.lambdas != s2.lambdas {
        return Err(Error::Band("both settings must share the space and band".into()));
    }
    let diff = rgs(s1, filter)? - rgs(s2, filter)?;
    let error = spectral_norm(&(s1.f_m() * diff));
    let b = |s: &TransferSetting| -> Result<f64> {
        let r = evaluate(s, filter, &[])?;
        Ok(r.bounds.iter().find(|b| b.item == "item5").map(|b| b.rhs).unwrap_or(f64::NAN))
    };
    let triangle_bound = b(s1)? + b(s2)?;
    Ok(TwoGraphReport { error, triangle_bound, pass: certified(error, triangle_bound) })
}

/// Frobenius errors over the whole PW basis, divided by √M so that y ≤ D·x stays a valid reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrobeniusPoint {
    pub laplacian: f64,
    pub filter: f64,
    pub laplacian_raw: f64,
    pub filter_raw: f64,
    pub count: usize,
}

pub fn frobenius_errors(setting: &TransferSetting, filter: &Filter) -> Result<FrobeniusPoint> {
    let meas = measure(setting, filter)?;
    let g = (&meas.f_n * meas.g_residual(setting)).norm();
    let l = (&meas.f_n * to_complex(&setting.lap_residual())).norm();
    let k = (setting.dim() as f64).sqrt();
    Ok(FrobeniusPoint { laplacian: l / k, filter: g / k, laplacian_raw: l, filter_raw: g, count: setting.dim() })
}
