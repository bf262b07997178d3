//! Randomized invariants of the library, over seeded random graphs and signals.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_transfer::activation::Activation;
use spectral_transfer::convnet::{forward_graph, pool, ConvLayer, ConvNetSpec, GraphPipeline, Pooling};
use spectral_transfer::filter::{apply_exact_real, apply_rational, Filter};
use spectral_transfer::graph::{adjoint_wrt, build_laplacian, eigendecompose, InnerProduct, LaplacianKind, WeightedGraph};
use spectral_transfer::linalg::C64;
use spectral_transfer::sampling::{coarsen_matching, perturb_graph, CoarseningMap, PerturbationMode, PerturbationSpec};
use spectral_transfer::space::GraphSpace;
use spectral_transfer::transfer::{certified, evaluate, TransferSetting};

/// Connected weighted graph: a random spanning path plus random chords.
fn random_graph(n: usize, density: f64, seed: u64) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut has = std::collections::BTreeSet::new();
    for w in order.windows(2) {
        let (u, v) = (w[0].min(w[1]), w[0].max(w[1]));
        has.insert((u, v));
        edges.push((u, v, rng.gen_range(0.5..2.0)));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !has.contains(&(u, v)) && rng.gen_bool(density) {
                edges.push((u, v, rng.gen_range(0.1..2.0)));
            }
        }
    }
    WeightedGraph::new(n, edges, false).unwrap()
}

fn coarsened_random(n: usize, density: f64, seed: u64, normalized: bool, modes: usize) -> (TransferSetting, Vec<DVector<f64>>) {
    let space = GraphSpace::new(random_graph(n, density, seed), kind_of(normalized)).unwrap();
    let map = coarsen_matching(&space.graph, Some(seed)).unwrap();
    let band = space.band_for_modes(modes.min(n)).unwrap();
    let setting = TransferSetting::coarsening(&space, &map, band).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signals = (0..3).map(|_| random_vec(setting.dim(), &mut rng)).collect();
    (setting, signals)
}

fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

fn kind_of(normalized: bool) -> LaplacianKind {
    if normalized {
        LaplacianKind::Normalized
    } else {
        LaplacianKind::Unnormalized
    }
}

fn permute_graph(g: &WeightedGraph, perm: &[usize]) -> WeightedGraph {
    let edges = g.edges().iter().map(|&(u, v, w)| (perm[u], perm[v], w)).collect();
    WeightedGraph::new(g.n_vertices(), edges, g.is_directed()).unwrap()
}

fn permute_vec(s: &DVector<f64>, perm: &[usize]) -> DVector<f64> {
    let mut out = DVector::zeros(s.len());
    for (i, &p) in perm.iter().enumerate() {
        out[p] = s[i];
    }
    out
}

fn random_perm(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.gen_range(0..=i));
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn eigendecomposition_reconstructs(n in 3usize..16, density in 0.0f64..0.6, seed in 0u64..10_000, normalized: bool) {
        let op = build_laplacian(&random_graph(n, density, seed), kind_of(normalized)).unwrap();
        let eig = eigendecompose(&op, None).unwrap();
        let a = op.matrix.map(|x| C64::new(x, 0.0));
        prop_assert!((eig.reconstruct() - &a).norm() <= 1e-9 * a.norm().max(1.0));
        let sum = eig.groups().iter().fold(DMatrix::<C64>::zeros(n, n), |acc, g| acc + g.projection());
        prop_assert!((sum - DMatrix::<C64>::identity(n, n)).norm() <= 1e-9);
    }

    #[test]
    fn unnormalized_laplacian_kernel_is_constant(n in 2usize..16, density in 0.0f64..0.6, seed in 0u64..10_000) {
        let op = build_laplacian(&random_graph(n, density, seed), LaplacianKind::Unnormalized).unwrap();
        for i in 0..n {
            let row: f64 = op.matrix.row(i).iter().sum();
            prop_assert!(row.abs() <= 1e-12);
        }
        let space = GraphSpace::from_operator(random_graph(n, density, seed), op).unwrap();
        prop_assert!(space.eigenvalues()[0].abs() <= 1e-10);
        let v0 = space.modes().column(0);
        let c = v0[0];
        prop_assert!(v0.iter().all(|x| (x - c).abs() <= 1e-9));
    }

    #[test]
    fn adjoint_is_an_involution(n in 1usize..8, seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let d = DVector::from_fn(n, |_, _| rng.gen_range(0.2..3.0));
        let m = DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let dense = InnerProduct::dense(&m * m.adjoint() + DMatrix::identity(n, n)).unwrap();
        for b in [InnerProduct::diagonal(d).unwrap(), dense] {
            let twice = adjoint_wrt(&adjoint_wrt(&a, &b).unwrap(), &b).unwrap();
            let gap = (twice - &a).norm();
            prop_assert!(gap <= 1e-12 * a.norm().max(1.0), "{gap}");
        }
    }

    #[test]
    fn rational_matches_exact(n in 5usize..16, density in 0.0f64..0.6, seed in 0u64..10_000, normalized: bool) {
        let op = build_laplacian(&random_graph(n, density, seed), kind_of(normalized)).unwrap();
        let eig = eigendecompose(&op, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
        let s = random_vec(n, &mut rng);
        for f in [
            Filter::rational(vec![1.0], vec![1.0, 1.0]).unwrap(),
            Filter::rational(vec![0.5, -1.0, 0.2], vec![2.0, 0.0, 1.0]).unwrap(),
            Filter::polynomial(vec![1.0, -0.3, 0.05]),
        ] {
            let exact = apply_exact_real(&f, &eig, &s).unwrap();
            let rat = apply_rational(&f, &op, &s).unwrap();
            prop_assert!((&exact - &rat).norm() <= 1e-10 * exact.norm().max(1e-300));
        }
    }

    #[test]
    fn filters_are_permutation_equivariant(n in 3usize..14, density in 0.0f64..0.6, seed in 0u64..10_000, normalized: bool) {
        let g = random_graph(n, density, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 11);
        let perm = random_perm(n, &mut rng);
        let s = random_vec(n, &mut rng);
        let op = build_laplacian(&g, kind_of(normalized)).unwrap();
        let pop = build_laplacian(&permute_graph(&g, &perm), kind_of(normalized)).unwrap();
        let (e, pe) = (eigendecompose(&op, None).unwrap(), eigendecompose(&pop, None).unwrap());
        for f in [Filter::heat(0.7), Filter::lowpass(1.5), Filter::midpass(1.0, 0.5)] {
            let lhs = apply_exact_real(&f, &pe, &permute_vec(&s, &perm)).unwrap();
            let rhs = permute_vec(&apply_exact_real(&f, &e, &s).unwrap(), &perm);
            prop_assert!((lhs - rhs).amax() <= 1e-10);
        }
    }

    #[test]
    fn filter_vanishing_on_spectrum_gives_zero(n in 3usize..12, density in 0.0f64..0.6, seed in 0u64..10_000) {
        let op = build_laplacian(&random_graph(n, density, seed), LaplacianKind::Normalized).unwrap();
        let eig = eigendecompose(&op, None).unwrap();
        let mut vals = eig.real_eigenvalues();
        vals.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        // zero at every eigenvalue, one halfway between neighbours
        let mut knots = Vec::new();
        for (i, &v) in vals.iter().enumerate() {
            knots.push((v, 0.0));
            if let Some(&w) = vals.get(i + 1) {
                knots.push((0.5 * (v + w), 1.0));
            }
        }
        let f = Filter::table(knots).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert!(apply_exact_real(&f, &eig, &random_vec(n, &mut rng)).unwrap().amax() <= 1e-12);
    }

    /// Items 1, 2, 3, 5 always; the pointwise M-side item only through its rigorous
    /// form, since the literal one has counterexamples (see below).
    #[test]
    fn coarsening_bounds_certify_on_random_graphs(n in 4usize..18, density in 0.0f64..0.5, seed in 0u64..10_000, normalized: bool, modes in 1usize..5) {
        let (setting, signals) = coarsened_random(n, density, seed, normalized, modes);
        for f in [Filter::lowpass(1.0), Filter::highpass(0.5), Filter::heat(2.0), Filter::identity(), Filter::rational(vec![1.0], vec![1.0, 2.0]).unwrap()] {
            let rep = evaluate(&setting, &f, &signals).unwrap();
            prop_assert!(rep.per_mode.iter().all(|r| r.pass));
            let literal: Vec<_> = rep.bounds.iter().filter(|b| b.item.starts_with("item4")).collect();
            prop_assert!(rep.bounds.iter().filter(|b| !b.item.starts_with("item4")).all(|b| b.pass), "{:?}", rep.failures());
            for (b, r) in literal.iter().zip(&rep.pointwise_m_rigorous) {
                prop_assert!(certified(b.lhs, *r), "{} > {}", b.lhs, r);
            }
        }
    }

    #[test]
    fn perturbation_is_deterministic(seed in 0u64..10_000, fraction in 0.0f64..0.5) {
        let g = random_graph(20, 0.3, seed);
        for mode in [PerturbationMode::RemoveEdges, PerturbationMode::AddEdges, PerturbationMode::RemoveVertices] {
            let spec = PerturbationSpec { mode, fraction, seed };
            prop_assert_eq!(perturb_graph(&g, &spec).unwrap(), perturb_graph(&g, &spec).unwrap());
        }
    }

    #[test]
    fn pooling_reduces_norm(n in 2usize..30, seed in 0u64..10_000) {
        let g = random_graph(n, 0.2, seed);
        let map = coarsen_matching(&g, Some(seed)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = DVector::from_fn(n, |_, _| rng.gen_range(0.0..2.0));
        for kind in [Pooling::Max, Pooling::L2avg] {
            prop_assert!(pool(&s, &map, kind).unwrap().norm() <= s.norm() * (1.0 + 1e-12));
        }
    }
}

/// The pointwise M-side bound taken literally, ‖Σ c_m(g(λ_m)φ_m − Rg(Δ)Sφ_m)‖ ≤
/// C·Σ V|c|e + ‖g‖·‖q − RSq‖, fails here: reweighting the modes by g undoes a
/// cancellation inside (I − RS)q. The rigorous form with ‖(I − RS)P‖‖q‖ holds.
#[test]
fn literal_pointwise_m_bound_has_a_counterexample() {
    let (setting, signals) = coarsened_random(5, 0.4819538331384962, 3881, true, 3);
    let mut found = false;
    for f in [Filter::lowpass(1.0), Filter::highpass(0.5), Filter::heat(2.0), Filter::identity(), Filter::rational(vec![1.0], vec![1.0, 2.0]).unwrap()] {
        let rep = evaluate(&setting, &f, &signals).unwrap();
        for (b, r) in rep.bounds.iter().filter(|b| b.item.starts_with("item4")).zip(&rep.pointwise_m_rigorous) {
            found |= !b.pass;
            assert!(certified(b.lhs, *r));
        }
    }
    assert!(found);
}

/// Two layers, 1 → 2 → 2 channels, pooling after the second, filters normalized on `spectrum`.
fn small_net(bias: f64, spectrum: &[f64]) -> ConvNetSpec {
    let layers = vec![
        ConvLayer {
            filters: vec![vec![Filter::lowpass(1.0)], vec![Filter::heat(1.0)]],
            mix: DMatrix::from_column_slice(2, 1, &[1.0, -1.0]),
            bias: vec![bias, -bias],
            pooling: Pooling::None,
        },
        ConvLayer {
            filters: vec![vec![Filter::heat(0.5), Filter::lowpass(2.0)], vec![Filter::midpass(1.0, 0.5), Filter::heat(2.0)]],
            mix: DMatrix::from_row_slice(2, 2, &[0.6, -0.4, 0.25, 0.75]),
            bias: vec![bias, 0.5 * bias],
            pooling: Pooling::Max,
        },
    ];
    let spec = ConvNetSpec::new(layers, Activation::Relu, vec![1.0, 1.0, 1.0]).unwrap();
    spec.normalized(spectrum).unwrap().0
}

fn pipeline(g: &WeightedGraph, map: CoarseningMap) -> GraphPipeline {
    GraphPipeline::new("g", build_laplacian(g, LaplacianKind::Unnormalized).unwrap(), None, vec![None, Some(map)]).unwrap()
}

fn spectrum_of(net: &GraphPipeline) -> Vec<f64> {
    net.levels.iter().flat_map(|l| l.eig.eigenvalues().into_iter().map(|z| z.re)).collect()
}

fn max_norm(v: &[DVector<f64>]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn convnet_contracts_and_respects_norm_growth(n in 4usize..20, seed in 0u64..10_000, bias in 0.0f64..0.5) {
        let g = random_graph(n, 0.2, seed);
        let net = pipeline(&g, coarsen_matching(&g, None).unwrap());
        let spec = small_net(bias, &spectrum_of(&net));
        let a = spec.a_bound();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = vec![random_vec(n, &mut rng) * 3.0];
        let h = vec![random_vec(n, &mut rng)];
        let (of, oh) = (forward_graph(&spec, &net, &f).unwrap(), forward_graph(&spec, &net, &h).unwrap());
        // bias cancels in differences: each layer scales distances by at most A
        let mut dist = max_norm(&[&f[0] - &h[0]]);
        let mut norm = max_norm(&f);
        for l in 1..=2 {
            dist *= a;
            let b = spec.layers[l - 1].bias.iter().map(|x| x.abs()).fold(0.0, f64::max) * (net.levels[l - 1].dim() as f64).sqrt();
            norm = a * norm + b;
            let d: Vec<DVector<f64>> = of[l].iter().zip(&oh[l]).map(|(x, y)| x - y).collect();
            prop_assert!(max_norm(&d) <= dist + 1e-10);
            prop_assert!(max_norm(&of[l]) <= norm + 1e-10);
        }
    }

    #[test]
    fn convnet_is_permutation_equivariant(n in 4usize..16, seed in 0u64..10_000) {
        let g = random_graph(n, 0.25, seed);
        let map = coarsen_matching(&g, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let perm = random_perm(n, &mut rng);
        let pmap = CoarseningMap { fine_n: n, groups: map.groups.iter().map(|gr| gr.iter().map(|&v| perm[v]).collect()).collect() };
        let net = pipeline(&g, map);
        let pnet = pipeline(&permute_graph(&g, &perm), pmap);
        let spec = small_net(0.2, &spectrum_of(&net));
        let f = random_vec(n, &mut rng);
        let out = forward_graph(&spec, &net, &[f.clone()]).unwrap();
        let pout = forward_graph(&spec, &pnet, &[permute_vec(&f, &perm)]).unwrap();
        // same group order on the coarse level, so the outputs agree entrywise
        for (x, y) in out[2].iter().zip(&pout[2]) {
            prop_assert!((x - y).amax() <= 1e-10);
        }
        for (x, y) in out[1].iter().zip(&pout[1]) {
            prop_assert!((permute_vec(x, &perm) - y).amax() <= 1e-10);
        }
    }
}
