//! ReLU of a band-limited circle signal keeps its weighted Fourier energy
//! Σ n²|⟨ρ(f), φ_n⟩|² below M²‖f‖².

use spectral_transfer::activation::Activation;
use spectral_transfer::convnet::spectral_decay_check;

fn main() -> spectral_transfer::Result<()> {
    for band in [1.0, 4.0, 9.0] {
        let r = spectral_decay_check(Activation::Relu, band, 100, 64, 8)?;
        println!(
            "band {band}: M = {}, worst ratio {:.4} (|n| ≤ 64: {:.4}), quadrature change {:.1e}, pass {}",
            r.max_frequency, r.worst_ratio, r.worst_partial_ratio, r.max_refinement_change, r.pass
        );
    }
    Ok(())
}
