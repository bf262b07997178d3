//! Stability of filters under edge removal, edge addition and vertex deletion on
//! a random geometric graph, in Frobenius norm over the band.

use spectral_transfer::filter::Filter;
use spectral_transfer::graph::{random_geometric, LaplacianKind};
use spectral_transfer::sampling::{perturb_graph, PerturbationMode, PerturbationSpec};
use spectral_transfer::space::GraphSpace;
use spectral_transfer::transfer::{evaluate, frobenius_errors, TransferSetting};

fn main() -> spectral_transfer::Result<()> {
    let (g, _) = random_geometric(100, 0.2, 100);
    let space = GraphSpace::new(g, LaplacianKind::Unnormalized)?;
    let band = space.band_for_modes(10)?;
    let filters = [Filter::lowpass(1.0), Filter::midpass(1.0, 0.5), Filter::highpass(1.0)];
    let perturbations = [
        (PerturbationMode::RemoveEdges, 0.05),
        (PerturbationMode::RemoveEdges, 0.10),
        (PerturbationMode::AddEdges, 0.05),
        (PerturbationMode::RemoveVertices, 0.05),
    ];
    println!("{:<34} {:<22} {:>12} {:>12} {:>8}", "setting", "filter", "lap err", "filter err", "≤ D·x");
    for (i, (mode, fraction)) in perturbations.into_iter().enumerate() {
        let p = perturb_graph(&space.graph, &PerturbationSpec { mode, fraction, seed: 7 + i as u64 })?;
        let setting = TransferSetting::perturbation(&space, &p, LaplacianKind::Unnormalized, band)?;
        for f in &filters {
            let pt = frobenius_errors(&setting, f)?;
            let d = evaluate(&setting, f, &[])?.lipschitz;
            println!("{:<34} {:<22} {:>12.4e} {:>12.4e} {:>8}", setting.name, f.name(), pt.laplacian, pt.filter, pt.filter <= d * pt.laplacian + 1e-12);
        }
    }
    Ok(())
}
