//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_transfer::activation::Activation;
use spectral_transfer::config::ExperimentConfig;
use spectral_transfer::convnet::{convnet_transfer_bound, spectral_decay_check};
use spectral_transfer::experiments::run_experiment;
use spectral_transfer::filter::{
    apply_chebyshev, apply_exact_real, apply_rational, chebyshev_sup_error, filter_matrix, Filter,
};
use spectral_transfer::graph::{build_laplacian, eigendecompose, grid, path, random_geometric, InnerProduct, LaplacianKind, WeightedGraph};
use spectral_transfer::linalg::spectral_norm;
use spectral_transfer::montecarlo::{failure_rate, mc_constants, run_trials, TrialConfig};
use spectral_transfer::report::{emit_reports, ReportBundle};
use spectral_transfer::sampling::{coarsen_matching, coarsening_r, evaluation_operator, perturb_graph, SampleSet};
use spectral_transfer::space::{random_unit_coefficients, GraphSpace, WeightFunction};
use spectral_transfer::transfer::{certified, transfer_errors, TransferSetting};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn load(name: &str) -> ExperimentConfig {
    ExperimentConfig::from_file(&configs().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn out_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("spectral-transfer-acceptance-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

const THEOREM_CONFIGS: [&str; 3] = ["coarsen_path20.toml", "coarsen_grid5.toml", "perturb_rg100.toml"];

/// Every per-mode and aggregate item on the coarsening and perturbation settings.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut verdicts = 0;
    for name in THEOREM_CONFIGS {
        let b = run_experiment(&load(name)).unwrap();
        verdicts += b.verdicts.len();
        failures.extend(b.verdicts.iter().filter(|v| !v.1).map(|v| format!("{name}: {}", v.0)));
        for t in ["modes.csv", "bounds.csv"] {
            let table = b.table(t).unwrap();
            let p = table.column("pass").unwrap();
            let bad = table.rows.iter().filter(|r| r[p] != "true").count();
            if bad > 0 {
                failures.push(format!("{name}: {bad} failing rows in {t}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(failures.is_empty(), format!("{verdicts} verdicts, {} failures, {secs:.2}s (target < 5s) {failures:?}", failures.len()))
}

fn theorem_settings() -> Vec<TransferSetting> {
    let mut out = Vec::new();
    for g in [path(20), grid(5, 5)] {
        let space = GraphSpace::new(g, LaplacianKind::Unnormalized).unwrap();
        let map = coarsen_matching(&space.graph, None).unwrap();
        out.push(TransferSetting::coarsening(&space, &map, space.band_for_modes(8).unwrap()).unwrap());
    }
    let cfg = load("perturb_rg100.toml");
    let space = GraphSpace::new(cfg.build_graph().unwrap(), cfg.laplacian).unwrap();
    let band = cfg.resolve_band(&space).unwrap();
    for i in 0..cfg.perturbations.len() {
        let p = perturb_graph(&space.graph, &cfg.perturbation(i).unwrap()).unwrap();
        out.push(TransferSetting::perturbation(&space, &p, cfg.laplacian, band).unwrap());
    }
    out
}

/// g ≡ 1: the filter error is the consistency error.
fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let settings = theorem_settings();
    for s in &settings {
        for _ in 0..10 {
            let q = random_unit_coefficients(s.dim(), &mut rng);
            let e = transfer_errors(s, &Filter::identity(), &q).unwrap();
            worst = worst.max((e.filter_error - e.consistency_error).abs());
        }
    }
    outcome(worst <= 1e-12, format!("{} settings, max |filter − consistency| = {worst:e}", settings.len()))
}

/// ⟨Xu, v⟩ − ⟨u, X*v⟩ relative to ‖u‖‖v‖-scaled magnitudes.
fn bilinear_gap(x: &DMatrix<f64>, x_star: &DMatrix<f64>, b_in: &DMatrix<f64>, b_out: &DMatrix<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let lhs = (v.transpose() * b_out * (x * u))[0];
    let rhs = ((x_star * v).transpose() * b_in * u)[0];
    (lhs - rhs).abs()
}

fn real_b(inner: &InnerProduct, n: usize) -> DMatrix<f64> {
    inner.matrix(n).map(|z| z.re)
}

/// R = S* on coarsening, circle sampling and a directed Laplacian; equispaced Gram = I.
fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut pairs = 0;
    // coarsening of grid(5×5) under the normalized Laplacian's identity inner product
    let g = grid(5, 5);
    let fine = build_laplacian(&g, LaplacianKind::Normalized).unwrap();
    let map = coarsen_matching(&g, None).unwrap();
    let s = map.s_matrix();
    let r = coarsening_r(&map, &fine.inner).unwrap();
    let b_m = real_b(&fine.inner, 25);
    let b_g = DMatrix::identity(s.nrows(), s.nrows());
    // circle sampling with the cosine weight
    let w = WeightFunction::cosine_default();
    let samples = SampleSet::random(40, &w, 3);
    let pair = evaluation_operator(&samples, 4.0, &w).unwrap();
    let b_n = real_b(&samples.inner_product(&w).unwrap(), 40);
    let dm = pair.s_matrix.ncols();
    // directed cycle with a chord: A* = B^{-1}AᵀB in the eigenvector inner product
    let dg = WeightedGraph::new(5, vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 0, 1.0), (0, 2, 0.5)], true).unwrap();
    let dl = build_laplacian(&dg, LaplacianKind::Unnormalized).unwrap();
    let adj = dl.adjoint().unwrap();
    let b_d = dl.inner.matrix(5);
    for _ in 0..100 {
        let u: DVector<f64> = DVector::from_fn(25, |_, _| rng.gen_range(-1.0..1.0));
        let v: DVector<f64> = DVector::from_fn(s.nrows(), |_, _| rng.gen_range(-1.0..1.0));
        worst = worst.max(bilinear_gap(&s, &r, &b_m, &b_g, &u, &v));
        let u: DVector<f64> = DVector::from_fn(dm, |_, _| rng.gen_range(-1.0..1.0));
        let v: DVector<f64> = DVector::from_fn(40, |_, _| rng.gen_range(-1.0..1.0));
        worst = worst.max(bilinear_gap(&pair.s_matrix, &pair.r_matrix, &DMatrix::identity(dm, dm), &b_n, &u, &v));
        let u = DVector::from_fn(5, |_, _| nalgebra::Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let v = DVector::from_fn(5, |_, _| nalgebra::Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let a = dl.matrix.map(|x| nalgebra::Complex::new(x, 0.0));
        let lhs = (v.adjoint() * &b_d * (&a * &u))[0];
        let rhs = ((&adj * &v).adjoint() * &b_d * &u)[0];
        worst = worst.max((lhs - rhs).norm());
        pairs += 3;
    }
    let eq = evaluation_operator(&SampleSet::equispaced(4), 1.0, &WeightFunction::Uniform).unwrap();
    let gram = spectral_transfer::sampling::gram(&eq);
    let gram_err = (&gram - DMatrix::identity(3, 3)).amax();
    let pass = worst <= 1e-12 && gram.nrows() == 3 && gram_err <= 1e-12;
    outcome(pass, format!("{pairs} pairs, max bilinear gap {worst:e}; 4-point Gram ‖G − I₃‖_max = {gram_err:e}"))
}

fn random_graph(n: usize, rng: &mut ChaCha8Rng) -> WeightedGraph {
    // spanning path plus random chords keeps every degree positive
    let mut edges: Vec<(usize, usize, f64)> = (0..n - 1).map(|i| (i, i + 1, rng.gen_range(0.5..2.0))).collect();
    for u in 0..n {
        for v in u + 2..n {
            if rng.gen_bool(0.3) {
                edges.push((u, v, rng.gen_range(0.1..2.0)));
            }
        }
    }
    WeightedGraph::new(n, edges, false).unwrap()
}

/// Rational algebra agrees with spectral synthesis; Chebyshev error is controlled by the scalar error.
fn criterion_4() -> Outcome {
    let filters = [
        Filter::rational(vec![1.0], vec![1.0, 1.0]).unwrap(),
        Filter::rational(vec![0.0, 1.0], vec![2.0, 0.0, 1.0]).unwrap(),
        Filter::rational(vec![1.0, -0.5, 0.1], vec![1.0, 0.5]).unwrap(),
        Filter::rational(vec![2.0, 1.0], vec![3.0, 1.0, 0.25]).unwrap(),
        Filter::rational(vec![1.0, 0.0, 0.0, 0.05], vec![1.5, 0.2, 0.3]).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_rel = 0.0f64;
    for k in 0..10 {
        let g = random_graph(10, &mut rng);
        let kind = if k % 2 == 0 { LaplacianKind::Unnormalized } else { LaplacianKind::Normalized };
        let op = build_laplacian(&g, kind).unwrap();
        let eig = eigendecompose(&op, None).unwrap();
        for f in &filters {
            for _ in 0..3 {
                let s = DVector::from_fn(10, |_, _| rng.gen_range(-1.0..1.0));
                let exact = apply_exact_real(f, &eig, &s).unwrap();
                let rational = apply_rational(f, &op, &s).unwrap();
                worst_rel = worst_rel.max((&exact - &rational).norm() / exact.norm().max(1e-300));
            }
        }
    }
    let rational_ok = worst_rel <= 1e-10;

    let heat = Filter::heat(1.0);
    let g = random_geometric(40, 0.35, 4).0;
    let op = build_laplacian(&g, LaplacianKind::Normalized).unwrap();
    let eig = eigendecompose(&op, None).unwrap();
    let exact = filter_matrix(&heat, &eig).unwrap().map(|z| z.re);
    let n = op.dim();
    let mut rows = Vec::new();
    let mut cheb_ok = true;
    for degree in [2usize, 8, 32] {
        let mut p = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            p.set_column(j, &apply_chebyshev(&heat, &op, degree, (0.0, 2.0), &e).unwrap());
        }
        let op_err = spectral_norm(&(p - &exact).map(|x| nalgebra::Complex::new(x, 0.0)));
        let sup = chebyshev_sup_error(&heat, degree, 0.0, 2.0, &eig.real_eigenvalues()).unwrap();
        cheb_ok &= op_err <= sup + 1e-12;
        rows.push((degree, op_err, sup));
    }
    let monotone = rows.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-15 && w[1].2 <= w[0].2 + 1e-15);
    let detail = rows.iter().map(|r| format!("k={} op {:.2e} ≤ sup {:.2e}", r.0, r.1, r.2)).collect::<Vec<_>>().join(", ");
    outcome(
        rational_ok && cheb_ok && monotone,
        format!("rational max rel. error {worst_rel:.2e} (5 filters × 10 graphs); Chebyshev {detail}; nonincreasing {monotone}"),
    )
}

fn summary_details(b: &ReportBundle) -> &serde_json::Value {
    &b.summary
}

/// log-log slopes of the median Laplacian and Gram errors, both weights.
fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["mc_uniform.toml", "mc_cosine.toml"] {
        let b = run_experiment(&load(name)).unwrap();
        let s = &summary_details(&b)["slopes"];
        let (l, g) = (s["laplacian"].as_f64().unwrap_or(f64::NAN), s["gram"].as_f64().unwrap_or(f64::NAN));
        let ok = (-0.65..=-0.35).contains(&l) && (-0.65..=-0.35).contains(&g);
        pass &= ok;
        parts.push(format!("{name}: laplacian {l:.3} gram {g:.3}"));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(pass, format!("{} in [−0.65, −0.35]; {secs:.2}s (target < 30s)", parts.join("; ")))
}

/// Markov violation fractions at δ = 0.25, 400 trials, N = 256.
fn criterion_6() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, w) in [("uniform", WeightFunction::Uniform), ("cosine", WeightFunction::cosine_default())] {
        let mut cfg = TrialConfig::new(1.0, 4.0, vec![256], 400, 0.25, 66);
        cfg.weight = w;
        cfg.probes = 16;
        let constants = mc_constants(&cfg).unwrap();
        let trials = run_trials(&cfg, &constants).unwrap();
        let r = &failure_rate(&cfg, &trials)[0];
        pass &= r.trials == 400 && r.within_delta();
        parts.push(format!("{label}: {:.4} {:.4} {:.4}", r.laplacian, r.gram, r.activation));
    }
    outcome(pass, format!("violation fractions (laplacian gram activation) {} ≤ 0.25", parts.join("; ")))
}

/// ConvNet on path(16): hypotheses, transfer bound per input, and contraction.
fn criterion_7() -> Outcome {
    let cfg = load("convnet_path16.toml");
    let b = run_experiment(&cfg).unwrap();
    let s = &b.summary;
    let delta = s["delta"].as_f64().unwrap();
    let a = s["a_bound"].as_f64().unwrap();
    let d = s["lipschitz"].as_f64().unwrap();
    let count = s["count"].as_u64().unwrap() as usize;
    let bias_free = s["b_bound"].as_f64().unwrap() == 0.0;
    let inputs = b.table("inputs.csv").unwrap();
    let (fi, ei) = (inputs.column("f_norm").unwrap(), inputs.column("error").unwrap());
    let mut worst = 0.0f64;
    let mut bound_ok = delta < 1.0;
    for r in &inputs.rows {
        let f_norm: f64 = r[fi].parse().unwrap();
        let e: f64 = r[ei].parse().unwrap();
        let bound = convnet_transfer_bound(2, d, a, 0.0, delta, count, f_norm).unwrap();
        bound_ok &= certified(e, bound);
        worst = worst.max(e / bound);
    }
    let ct = b.table("contraction.csv").unwrap();
    let pairs = ct.rows.len() / 2;
    let contraction_ok = ct.rows.iter().all(|r| r[ct.column("pass").unwrap()] == "true");
    let shape_ok = bias_free && (a - 1.0).abs() <= 1e-12 && s["filter_sup"].as_f64().unwrap() <= 1.0 + 1e-12;
    outcome(
        bound_ok && contraction_ok && shape_ok && b.certified(),
        format!("δ = {delta:.4}, worst error/bound {worst:.4}, A = {a}, contraction on {pairs} pairs × 2 graphs: {contraction_ok}"),
    )
}

fn criterion_8() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for band in [1.0, 4.0] {
        let r = spectral_decay_check(Activation::Relu, band, 100, 64, 8).unwrap();
        let ok = r.pass && r.worst_ratio <= 1.0 + 1e-6 && r.max_refinement_change < 1e-8;
        pass &= ok;
        parts.push(format!("λ={band}: ratio {:.4}, quadrature change {:.1e}", r.worst_ratio, r.max_refinement_change));
    }
    outcome(pass, parts.join("; "))
}

/// No emitted point above its reference line, read back from the CSV files.
fn criterion_9() -> Outcome {
    let mut above = 0;
    let mut total = 0;
    for name in THEOREM_CONFIGS {
        let dir = out_dir(&format!("c9-{name}"));
        emit_reports(&run_experiment(&load(name)).unwrap(), &dir, true).unwrap();
        let (h, rows) = read_csv(&dir.join("modes.csv"));
        let (l, v, x) = (col(&h, "lhs"), col(&h, "vg"), col(&h, "laplacian_error"));
        for r in &rows {
            let (lhs, vg, e): (f64, f64, f64) = (r[l].parse().unwrap(), r[v].parse().unwrap(), r[x].parse().unwrap());
            total += 1;
            above += usize::from(!certified(lhs, vg * e));
        }
        if name.starts_with("perturb") {
            let (h, rows) = read_csv(&dir.join("frobenius.csv"));
            let (d, x, y) = (col(&h, "lipschitz"), col(&h, "laplacian_error"), col(&h, "filter_error"));
            for r in &rows {
                let (d, x, y): (f64, f64, f64) = (r[d].parse().unwrap(), r[x].parse().unwrap(), r[y].parse().unwrap());
                total += 1;
                above += usize::from(!certified(y, d * x));
            }
        }
        let _ = std::fs::remove_dir_all(&dir);
    }
    outcome(above == 0 && total > 0, format!("{above} of {total} scatter points above y = V_g·x / y = D·x"))
}

/// Two runs per experiment with the same seed; every CSV byte-identical.
fn criterion_10() -> Outcome {
    let names = ["coarsen_path20.toml", "coarsen_grid5.toml", "perturb_rg100.toml", "circle_sampling.toml", "convnet_path16.toml", "mc_uniform.toml"];
    let mut differing = Vec::new();
    let mut files = 0;
    for name in names {
        let cfg = load(name);
        let (a, b) = (out_dir(&format!("c10a-{name}")), out_dir(&format!("c10b-{name}")));
        let fa = emit_reports(&run_experiment(&cfg).unwrap(), &a, true).unwrap();
        emit_reports(&run_experiment(&cfg).unwrap(), &b, true).unwrap();
        for f in fa {
            let other = b.join(f.file_name().unwrap());
            files += 1;
            if std::fs::read(&f).unwrap() != std::fs::read(&other).unwrap() {
                differing.push(format!("{name}:{}", f.file_name().unwrap().to_string_lossy()));
            }
        }
        let _ = std::fs::remove_dir_all(&a);
        let _ = std::fs::remove_dir_all(&b);
    }
    outcome(differing.is_empty(), format!("{files} files compared across 6 experiment configs, differing: {differing:?}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("transferability inequalities (coarsening, perturbation)", criterion_1),
        ("identity-filter degeneracy", criterion_2),
        ("adjoint and Gram identities", criterion_3),
        ("functional-calculus canonicity", criterion_4),
        ("Monte-Carlo rates", criterion_5),
        ("Markov failure rates", criterion_6),
        ("ConvNet certification and contraction", criterion_7),
        ("spectral decay of ReLU", criterion_8),
        ("scatter dominance", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("criterion {:>2} {}: {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
