//! Two-layer spectral ConvNet on path(16) and a reweighted copy, with max pooling
//! after the second layer, certified against the ConvNet transferability bound.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_transfer::activation::Activation;
use spectral_transfer::convnet::{certify_convnet, ConvLayer, ConvNetSpec, ConvSpace, GraphPipeline, Pooling};
use spectral_transfer::filter::Filter;
use spectral_transfer::graph::{build_laplacian, path, LaplacianKind, WeightedGraph};
use spectral_transfer::sampling::coarsen_matching;
use spectral_transfer::space::{random_unit_coefficients, GraphSpace};

fn main() -> spectral_transfer::Result<()> {
    let m = GraphSpace::new(path(16), LaplacianKind::Unnormalized)?;
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let edges = m.graph.edges().iter().map(|&(u, v, w)| (u, v, w * (1.0 + 0.02 * rng.gen_range(-1.0..1.0)))).collect();
    let g2 = WeightedGraph::new(16, edges, false)?;
    let map = coarsen_matching(&m.graph, None)?;

    let bands = vec![m.band_for_modes(2)?, m.band_for_modes(3)?, m.band_for_modes(3)?];
    let lp = |c| Filter::lowpass(c);
    let layers = vec![
        ConvLayer { filters: vec![vec![lp(1.0)], vec![Filter::heat(1.0)]], mix: DMatrix::from_column_slice(2, 1, &[1.0, 1.0]), bias: vec![0.0; 2], pooling: Pooling::None },
        ConvLayer {
            filters: vec![vec![lp(1.0), Filter::heat(0.5)], vec![Filter::heat(1.0), lp(2.0)]],
            mix: DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.3, 0.7]),
            bias: vec![0.0; 2],
            pooling: Pooling::Max,
        },
    ];
    let spec = ConvNetSpec::new(layers, Activation::Relu, bands)?;

    let nets = vec![
        GraphPipeline::new("path16", m.laplacian.clone(), Some(m.modes().clone()), vec![None, Some(map.clone())])?,
        GraphPipeline::new("reweighted", build_laplacian(&g2, LaplacianKind::Unnormalized)?, Some(m.modes().clone()), vec![None, Some(map)])?,
    ];
    let d0 = m.pw_dim(spec.bands[0]);
    let inputs: Vec<Vec<DVector<f64>>> = (0..20).map(|_| vec![random_unit_coefficients(d0, &mut rng)]).collect();
    let cert = certify_convnet(&spec, ConvSpace::Graph(&m), &nets, &inputs, 200, 7)?;
    for h in &cert.hypotheses {
        println!("{}: laplacian {:?} consistency {:.4} activation {:?} pooling {:?}", h.graph, h.laplacian, h.consistency, h.activation, h.pooling);
        println!("    ‖S‖ {:?} ‖R‖ {:.4}", h.sampling_norms, h.interpolation_norm);
    }
    println!("δ = {:.4}  D = {}  # = {}  A = {}", cert.delta, cert.lipschitz, cert.count, cert.a_bound);
    println!("bound (unit input) {:.4}", cert.bounds[0].1);
    println!("worst single-graph error / bound {:.4}", cert.worst_single_ratio);
    println!("worst two-graph error / bound {:.4}", cert.worst_two_graph_ratio);
    println!("certified: {}", cert.pass);
    Ok(())
}
