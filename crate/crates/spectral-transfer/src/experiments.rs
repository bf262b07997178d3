//! The five batch experiments. Each returns a [`ReportBundle`] whose verdicts
//! are exactly the certified inequalities checked along the way.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Experiment, ExperimentConfig};
use crate::convnet::{certify_convnet, forward_graph, ConvNetSpec, ConvSpace, GraphPipeline, Pooling};
use crate::error::{Error, Result};
use crate::filter::Filter;
use crate::graph::{build_laplacian, WeightedGraph};
use crate::montecarlo::{failure_rate, mc_constants, run_trials, slope_fit, trial_rng, SamplingScheme};
use crate::report::{num, ReportBundle, Scatter, ScatterPoint, Table};
use crate::sampling::{coarsen_matching, perturb_graph, CoarseningMap, SampleSet};
use crate::space::{random_unit_coefficients, GraphSpace};
use crate::transfer::{evaluate, frobenius_errors, TransferSetting};

/// Absolute slack of the contraction check.
pub const CONTRACTION_TOL: f64 = 1e-10;

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ReportBundle> {
    cfg.validate()?;
    let run = match cfg.experiment {
        Experiment::CoarsenTransfer => coarsen_transfer(cfg),
        Experiment::PerturbStability => perturb_stability(cfg),
        Experiment::CircleSampling => circle_sampling(cfg),
        Experiment::ConvnetTransfer => convnet_transfer(cfg),
        Experiment::McVerify => mc_verify(cfg),
    };
    run.map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", cfg.experiment.name())),
        other => other,
    })
}

fn random_signals(dim: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5167_4A15);
    (0..count).map(|_| random_unit_coefficients(dim, &mut rng)).collect()
}

fn bool_str(b: bool) -> String {
    b.to_string()
}

/// modes.csv and bounds.csv rows, verdicts and scatter points for every (setting, filter).
fn transfer_tables(bundle: &mut ReportBundle, settings: &[TransferSetting], filters: &[Filter], signals: usize, seed: u64) -> Result<Vec<serde_json::Value>> {
    let mut modes = Table::new("modes.csv", &["setting", "filter", "index", "lambda", "lhs", "rhs", "vg", "laplacian_error", "pass"]);
    let mut bounds = Table::new("bounds.csv", &["setting", "filter", "item", "lhs", "rhs", "pass"]);
    let mut points = Vec::new();
    let mut summaries = Vec::new();
    for setting in settings {
        let signals = random_signals(setting.dim(), signals, seed);
        for filter in filters {
            let rep = evaluate(setting, filter, &signals)?;
            for r in &rep.per_mode {
                modes.push(vec![
                    rep.setting.clone(),
                    rep.filter.clone(),
                    r.index.to_string(),
                    num(r.lambda),
                    num(r.lhs),
                    num(r.rhs),
                    num(r.vg),
                    num(r.laplacian_error),
                    bool_str(r.pass),
                ]);
                points.push(ScatterPoint { x: r.laplacian_error, y: r.lhs, slope: r.vg });
            }
            for b in &rep.bounds {
                bounds.push(vec![rep.setting.clone(), rep.filter.clone(), b.item.clone(), num(b.lhs), num(b.rhs), bool_str(b.pass)]);
            }
            bundle.verdict(format!("{} / {} / per-mode", rep.setting, rep.filter), rep.per_mode.iter().all(|r| r.pass));
            bundle.verdict(format!("{} / {} / aggregate", rep.setting, rep.filter), rep.bounds.iter().all(|b| b.pass));
            summaries.push(json!({
                "setting": rep.setting,
                "filter": rep.filter,
                "modes": rep.count,
                "lipschitz": rep.lipschitz,
                "lipschitz_is_analytic": rep.lipschitz_is_analytic,
                "norm_r": rep.norm_r,
                "laplacian_operator_error": rep.laplacian_operator_error,
                "consistency_operator_error": rep.consistency_operator_error,
                "failures": rep.failures(),
            }));
        }
    }
    let line_slope = points.iter().map(|p| p.slope).fold(0.0, f64::max);
    bundle.scatter = Some(Scatter {
        title: "per-mode filter error against V_g times Laplacian error".into(),
        x_label: "‖ΔSφ_m − λ_m Sφ_m‖".into(),
        y_label: "‖Sg(L)φ_m − g(Δ)Sφ_m‖".into(),
        points,
        line_slope,
    });
    bundle.tables.push(modes);
    bundle.tables.push(bounds);
    Ok(summaries)
}

fn coarsen_transfer(cfg: &ExperimentConfig) -> Result<ReportBundle> {
    let seed = cfg.master_seed()?;
    let space = GraphSpace::new(cfg.build_graph()?, cfg.laplacian)?;
    let band = cfg.resolve_band(&space)?;
    let map = coarsen_matching(&space.graph, None)?;
    let setting = TransferSetting::coarsening(&space, &map, band)?;
    let filters = cfg.build_filters()?;
    let mut bundle = ReportBundle::new(Experiment::CoarsenTransfer.name());
    let rows = transfer_tables(&mut bundle, &[setting], &filters, cfg.signals, seed)?;
    bundle.summary = json!({
        "vertices": space.dim(),
        "coarse_vertices": map.coarse_n(),
        "band": band,
        "filters": rows,
    });
    Ok(bundle)
}

fn perturb_stability(cfg: &ExperimentConfig) -> Result<ReportBundle> {
    let seed = cfg.master_seed()?;
    let space = GraphSpace::new(cfg.build_graph()?, cfg.laplacian)?;
    let band = cfg.resolve_band(&space)?;
    let filters = cfg.build_filters()?;
    let mut settings = Vec::new();
    let mut labels = Vec::new();
    for i in 0..cfg.perturbations.len() {
        let p = cfg.perturbation(i)?;
        let perturbed = perturb_graph(&space.graph, &p)?;
        let mut s = TransferSetting::perturbation(&space, &perturbed, cfg.laplacian, band)?;
        s.name = format!("{:?} {} ({})", p.mode, p.fraction, s.name);
        labels.push(s.name.clone());
        settings.push(s);
    }
    let mut bundle = ReportBundle::new(Experiment::PerturbStability.name());
    let rows = transfer_tables(&mut bundle, &settings, &filters, cfg.signals, seed)?;

    let mut frob = Table::new("frobenius.csv", &["setting", "filter", "lipschitz", "laplacian_error", "filter_error", "reference", "pass"]);
    let mut points = Vec::new();
    for s in &settings {
        for f in &filters {
            let p = frobenius_errors(s, f)?;
            let d = match f.lipschitz() {
                Some(d) => d,
                None => evaluate(s, f, &[])?.lipschitz,
            };
            let pass = crate::transfer::certified(p.filter, d * p.laplacian);
            frob.push(vec![s.name.clone(), f.name(), num(d), num(p.laplacian), num(p.filter), num(d * p.laplacian), bool_str(pass)]);
            bundle.verdict(format!("{} / {} / frobenius", s.name, f.name()), pass);
            points.push(ScatterPoint { x: p.laplacian, y: p.filter, slope: d });
        }
    }
    bundle.tables.push(frob);
    let line_slope = points.iter().map(|p| p.slope).fold(0.0, f64::max);
    bundle.scatter = Some(Scatter {
        title: "Frobenius filter error against D times Laplacian error".into(),
        x_label: "‖SLP − ΔSP‖_F / √#".into(),
        y_label: "‖Sg(L)P − g(Δ)SP‖_F / √#".into(),
        points,
        line_slope,
    });
    bundle.summary = json!({ "vertices": space.dim(), "band": band, "settings": labels, "filters": rows });
    Ok(bundle)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn circle_sampling(cfg: &ExperimentConfig) -> Result<ReportBundle> {
    let tc = cfg.trial_config()?;
    let filters = cfg.build_filters()?;
    let jobs: Vec<(usize, usize, usize)> =
        tc.sizes.iter().enumerate().flat_map(|(si, &n)| (0..tc.trials).map(move |t| (si, n, t))).collect();
    let dim = crate::space::circle_dim(tc.band);
    let signals = random_signals(dim, cfg.signals, tc.seed);
    let results: Vec<Vec<Vec<String>>> = jobs
        .par_iter()
        .map(|&(si, n, t)| {
            let (mut rng, stream) = trial_rng(tc.seed, si, t);
            let samples = match tc.scheme {
                SamplingScheme::Random => SampleSet::random_with(n, &tc.weight, &mut rng, Some(tc.seed)),
                SamplingScheme::Equispaced => SampleSet::equispaced(n),
            };
            let setting = TransferSetting::circle_sampling(&samples, &tc.weight, tc.band, tc.kernel_band)?;
            let lap = setting.laplacian_operator_error();
            let cons = setting.consistency_operator_error();
            filters
                .iter()
                .map(|f| {
                    let rep = evaluate(&setting, f, &signals)?;
                    let item = |name: &str| rep.bounds.iter().find(|b| b.item == name).cloned();
                    let (i3, i5) = (item("item3").expect("item3"), item("item5").expect("item5"));
                    Ok(vec![
                        n.to_string(),
                        t.to_string(),
                        stream.to_string(),
                        rep.filter.clone(),
                        num(lap),
                        num(cons),
                        num(i3.lhs),
                        num(i3.rhs),
                        num(i5.lhs),
                        num(i5.rhs),
                        bool_str(rep.all_pass()),
                    ])
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(
        "trials.csv",
        &["n", "trial", "stream", "filter", "laplacian_error", "consistency_error", "item3_lhs", "item3_rhs", "item5_lhs", "item5_rhs", "pass"],
    );
    let mut bundle = ReportBundle::new(Experiment::CircleSampling.name());
    for (si, &n) in tc.sizes.iter().enumerate() {
        for f in &filters {
            let name = f.name();
            let ok = jobs
                .iter()
                .zip(&results)
                .filter(|(j, _)| j.0 == si)
                .flat_map(|(_, rows)| rows.iter())
                .filter(|r| r[3] == name)
                .all(|r| r[10] == "true");
            bundle.verdict(format!("N={n} / {name} / all items"), ok);
        }
    }
    let mut medians = Vec::new();
    for (si, &n) in tc.sizes.iter().enumerate() {
        let mut errs: Vec<f64> = jobs
            .iter()
            .zip(&results)
            .filter(|(j, _)| j.0 == si)
            .filter_map(|(_, rows)| rows.first().map(|r| r[4].parse::<f64>().expect("own number format")))
            .collect();
        medians.push((n, median(&mut errs)));
    }
    for rows in results {
        for r in rows {
            table.push(r);
        }
    }
    bundle.tables.push(table);
    let nonincreasing = medians.windows(2).all(|w| w[1].1 <= w[0].1);
    bundle.summary = json!({
        "band": tc.band,
        "kernel_band": tc.kernel_band,
        "weight": tc.weight,
        "scheme": tc.scheme,
        "median_laplacian_error": medians,
        "median_nonincreasing": nonincreasing,
    });
    Ok(bundle)
}

fn mc_verify(cfg: &ExperimentConfig) -> Result<ReportBundle> {
    let tc = cfg.trial_config()?;
    let constants = mc_constants(&tc)?;
    let trials = run_trials(&tc, &constants)?;
    let rates = failure_rate(&tc, &trials);
    let slopes = if tc.sizes.len() >= 3 {
        match slope_fit(&tc, &trials) {
            Ok(s) => json!(s),
            Err(Error::SlopeUndefined(m)) => json!({ "undefined": m }),
            Err(e) => return Err(e),
        }
    } else {
        json!(null)
    };
    let mut bundle = ReportBundle::new(Experiment::McVerify.name());
    let mut table = Table::new(
        "trials.csv",
        &[
            "n",
            "trial",
            "stream",
            "laplacian_error",
            "gram_error",
            "activation_error",
            "laplacian_bound",
            "gram_bound",
            "activation_bound",
            "laplacian_violated",
            "gram_violated",
            "activation_violated",
        ],
    );
    for t in &trials {
        table.push(vec![
            t.n.to_string(),
            t.trial.to_string(),
            t.stream.to_string(),
            num(t.laplacian_err),
            num(t.gram_err),
            num(t.activation_err),
            num(t.bound_laplacian),
            num(t.bound_gram),
            num(t.bound_activation),
            bool_str(t.violates_laplacian),
            bool_str(t.violates_gram),
            bool_str(t.violates_activation),
        ]);
    }
    let mut rt = Table::new("rates.csv", &["n", "trials", "delta", "laplacian", "gram", "activation", "pass"]);
    for r in &rates {
        let ok = r.within_delta();
        rt.push(vec![r.n.to_string(), r.trials.to_string(), num(r.delta), num(r.laplacian), num(r.gram), num(r.activation), bool_str(ok)]);
        bundle.verdict(format!("N={} / failure rates ≤ δ", r.n), ok);
    }
    bundle.tables.push(table);
    bundle.tables.push(rt);
    bundle.summary = json!({
        "weight": tc.weight,
        "band": tc.band,
        "kernel_band": tc.kernel_band,
        "delta": tc.delta,
        "constants": constants,
        "slopes": slopes,
    });
    Ok(bundle)
}

/// Coarsening maps for every pooling layer, each matched on the previous coarse graph.
fn pooling_maps(spec: &ConvNetSpec, graph: &WeightedGraph) -> Result<Vec<Option<CoarseningMap>>> {
    let mut current = graph.clone();
    let mut maps = Vec::new();
    for layer in &spec.layers {
        if layer.pooling == Pooling::None {
            maps.push(None);
        } else {
            let map = coarsen_matching(&current, None)?;
            current = map.coarse_graph(&current)?;
            maps.push(Some(map));
        }
    }
    Ok(maps)
}

/// ‖Φf − Φg‖ ≤ A^L max_j ‖f_j − g_j‖ on each graph, per random pair.
///
/// Holds for normalized filters and contractive activation and pooling.
pub fn contraction_rows(spec: &ConvNetSpec, nets: &[GraphPipeline], dim: usize, pairs: usize, seed: u64) -> Result<Vec<(usize, String, f64, f64, bool)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC0_47AC);
    let factor = spec.a_bound().powi(spec.depth() as i32);
    let mut rows = Vec::new();
    for p in 0..pairs {
        let draw = |rng: &mut ChaCha8Rng| -> Vec<DVector<f64>> {
            (0..spec.input_channels()).map(|_| random_unit_coefficients(dim, rng) * rng.gen_range(0.25..4.0)).collect()
        };
        let (f, g) = (draw(&mut rng), draw(&mut rng));
        for net in nets {
            let (sf, sg) = (net.sample_inputs(&f)?, net.sample_inputs(&g)?);
            let inner = &net.levels[0].operator.inner;
            let din = sf.iter().zip(&sg).map(|(a, b)| inner.norm_real(&(a - b))).fold(0.0, f64::max);
            let (of, og) = (forward_graph(spec, net, &sf)?, forward_graph(spec, net, &sg)?);
            let top = &net.levels[spec.depth()].operator.inner;
            let dout = of[spec.depth()].iter().zip(&og[spec.depth()]).map(|(a, b)| top.norm_real(&(a - b))).fold(0.0, f64::max);
            let rhs = factor * din;
            rows.push((p, net.name.clone(), dout, rhs, dout <= rhs + CONTRACTION_TOL));
        }
    }
    Ok(rows)
}

fn convnet_transfer(cfg: &ExperimentConfig) -> Result<ReportBundle> {
    let seed = cfg.master_seed()?;
    let section = cfg.convnet.as_ref().ok_or_else(|| Error::Config("missing [convnet]".into()))?;
    let raw = ConvNetSpec::from_file(&section.spec)?;
    let m = GraphSpace::new(cfg.build_graph()?, cfg.laplacian)?;
    let maps = pooling_maps(&raw, &m.graph)?;
    let mut nets = vec![GraphPipeline::new("M", m.laplacian.clone(), Some(m.modes().clone()), maps.clone())?];
    if section.reweight > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = section.reweight;
        let edges = m.graph.edges().iter().map(|&(u, v, w)| (u, v, w * (1.0 + a * rng.gen_range(-1.0..1.0)))).collect();
        let g2 = WeightedGraph::new(m.dim(), edges, m.graph.is_directed())?;
        nets.push(GraphPipeline::new("reweighted", build_laplacian(&g2, cfg.laplacian)?, Some(m.modes().clone()), maps)?);
    }
    let space = ConvSpace::Graph(&m);
    let mut spectrum = space.eigenvalues(raw.bands[raw.depth()]);
    for net in &nets {
        for level in &net.levels {
            spectrum.extend(level.eig.eigenvalues().iter().map(|z| z.re));
        }
    }
    let (spec, _) = raw.normalized(&spectrum)?;
    let d0 = space.pw_dim(spec.bands[0]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1_4B07);
    let inputs: Vec<Vec<DVector<f64>>> =
        (0..section.inputs).map(|_| (0..spec.input_channels()).map(|_| random_unit_coefficients(d0, &mut rng)).collect()).collect();
    let cert = certify_convnet(&spec, space, &nets, &inputs, section.probes, seed)?;

    let mut bundle = ReportBundle::new(Experiment::ConvnetTransfer.name());
    let mut hyp = Table::new("hypotheses.csv", &["graph", "term", "layer", "value"]);
    for h in &cert.hypotheses {
        for (l, v) in h.laplacian.iter().enumerate() {
            hyp.push(vec![h.graph.clone(), "laplacian".into(), l.to_string(), num(*v)]);
        }
        hyp.push(vec![h.graph.clone(), "consistency".into(), spec.depth().to_string(), num(h.consistency)]);
        for (l, v) in h.activation.iter().enumerate() {
            hyp.push(vec![h.graph.clone(), "activation".into(), (l + 1).to_string(), num(*v)]);
        }
        for (l, v) in h.pooling.iter().enumerate() {
            hyp.push(vec![h.graph.clone(), "pooling".into(), (l + 1).to_string(), num(*v)]);
        }
    }
    let mut errs = Table::new("inputs.csv", &["input", "f_norm", "bound", "single_graph_bound", "graph", "error", "pass"]);
    for (k, (b, e)) in cert.bounds.iter().zip(&cert.single_errors).enumerate() {
        for (net, err) in nets.iter().zip(e) {
            errs.push(vec![k.to_string(), num(b.0), num(b.1), num(b.2), net.name.clone(), num(*err), bool_str(crate::transfer::certified(*err, b.1))]);
        }
        if let Some(t) = cert.two_graph_errors.get(k) {
            errs.push(vec![k.to_string(), num(b.0), num(b.1), num(b.2), "two-graph".into(), num(*t), bool_str(crate::transfer::certified(*t, b.1))]);
        }
    }
    let rows = contraction_rows(&spec, &nets, d0, section.contraction_pairs, seed)?;
    let mut ct = Table::new("contraction.csv", &["pair", "graph", "output_distance", "reference", "pass"]);
    for (p, g, lhs, rhs, ok) in &rows {
        ct.push(vec![p.to_string(), g.clone(), num(*lhs), num(*rhs), bool_str(*ok)]);
    }
    bundle.verdict(format!("hypotheses: δ = {:.4} < 1", cert.delta), cert.hypotheses_hold);
    bundle.verdict("transfer bound on every input", cert.pass);
    bundle.verdict("contraction", rows.iter().all(|r| r.4));
    bundle.tables.extend([hyp, errs, ct]);
    bundle.summary = json!({
        "vertices": m.dim(),
        "graphs": nets.iter().map(|n| n.name.clone()).collect::<Vec<_>>(),
        "delta": cert.delta,
        "lipschitz": cert.lipschitz,
        "count": cert.count,
        "a_bound": cert.a_bound,
        "b_bound": cert.b_bound,
        "filter_sup": cert.filter_sup,
        "worst_single_ratio": cert.worst_single_ratio,
        "worst_two_graph_ratio": cert.worst_two_graph_ratio,
    });
    Ok(bundle)
}
