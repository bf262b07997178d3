//! Coarsen path(20) by heavy-edge matching, set Δ = SLR, and compare the
//! per-mode filter error with V_g(λ_m) times the per-mode Laplacian error.

use nalgebra::DVector;
use spectral_transfer::filter::Filter;
use spectral_transfer::graph::{path, LaplacianKind};
use spectral_transfer::sampling::coarsen_matching;
use spectral_transfer::space::GraphSpace;
use spectral_transfer::transfer::{evaluate, TransferSetting};

fn main() -> spectral_transfer::Result<()> {
    let space = GraphSpace::new(path(20), LaplacianKind::Unnormalized)?;
    let map = coarsen_matching(&space.graph, None)?;
    let band = space.band_for_modes(8)?;
    let setting = TransferSetting::coarsening(&space, &map, band)?;
    println!("{}: {} PW modes, ‖R‖ = {:.4}", setting.name, setting.dim(), setting.norm_r());

    // a smooth test signal: equal weight on the first three modes
    let q = DVector::from_fn(setting.dim(), |m, _| if m < 3 { 1.0 / 3f64.sqrt() } else { 0.0 });
    for f in [Filter::lowpass(1.0), Filter::highpass(1.0), Filter::heat(1.0)] {
        let rep = evaluate(&setting, &f, &[q.clone()])?;
        println!("\n{} (D = {})", rep.filter, rep.lipschitz);
        println!("  m   λ_m       filter err   V_g·lap err");
        for r in &rep.per_mode {
            println!("  {:<3} {:<9.5} {:<12.4e} {:.4e}", r.index, r.lambda, r.lhs, r.rhs);
        }
        for b in &rep.bounds {
            println!("  {:<18} {:.4e} ≤ {:.4e}  {}", b.item, b.lhs, b.rhs, if b.pass { "ok" } else { "VIOLATED" });
        }
    }
    Ok(())
}
