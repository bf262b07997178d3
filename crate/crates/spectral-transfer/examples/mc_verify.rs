//! Monte-Carlo check of the sampled-Laplacian quadrature rates on the circle.

use spectral_transfer::montecarlo::{failure_rate, mc_constants, run_trials, slope_fit, TrialConfig};
use spectral_transfer::space::WeightFunction;

fn main() -> spectral_transfer::Result<()> {
    for weight in [WeightFunction::Uniform, WeightFunction::cosine_default()] {
        let mut cfg = TrialConfig::new(1.0, 4.0, vec![64, 256, 1024], 50, 0.25, 2024);
        cfg.weight = weight.clone();
        let constants = mc_constants(&cfg)?;
        let trials = run_trials(&cfg, &constants)?;
        let slopes = slope_fit(&cfg, &trials)?;
        println!("weight {weight:?}");
        println!("  C_quad1 {:.3}  C_quad2 {:.3}  C_quad3 {:.3} (x{} of {} probes)", constants.c_quad1, constants.c_quad2, constants.c_quad3, constants.c_quad3_inflation, constants.c_quad3_probes);
        for (n, l, g, a) in &slopes.medians {
            println!("  N {n:5}  median laplacian {l:.4e}  gram {g:.4e}  activation {a:.4e}");
        }
        println!("  slopes: laplacian {:.3}  gram {:.3}  activation {:?}", slopes.laplacian, slopes.gram, slopes.activation);
        for r in failure_rate(&cfg, &trials) {
            println!("  N {:5}  failure rates {:.3} {:.3} {:.3} (δ = {})", r.n, r.laplacian, r.gram, r.activation, r.delta);
        }
    }
    Ok(())
}
