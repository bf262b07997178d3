//! Random samples of the unit circle as graphs: S evaluates band-limited signals,
//! Δ_n is the sampled kernel operator, and the errors shrink as N grows.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectral_transfer::filter::Filter;
use spectral_transfer::sampling::{evaluation_operator, gram, SampleSet};
use spectral_transfer::space::WeightFunction;
use spectral_transfer::transfer::{evaluate, TransferSetting};

fn main() -> spectral_transfer::Result<()> {
    let weight = WeightFunction::cosine_default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let heat = Filter::heat(0.5);
    println!("{:>6} {:>14} {:>14} {:>14} {:>14}", "N", "‖Gram − I‖_F", "‖SLP − ΔSP‖", "filter err", "bound");
    for n in [16, 64, 256, 1024] {
        let samples = SampleSet::random_with(n, &weight, &mut rng, Some(5));
        let pair = evaluation_operator(&samples, 1.0, &weight)?;
        let g = gram(&pair);
        let gram_err = (&g - nalgebra::DMatrix::identity(g.nrows(), g.ncols())).norm();
        let setting = TransferSetting::circle_sampling(&samples, &weight, 1.0, 4.0)?;
        let rep = evaluate(&setting, &heat, &[])?;
        let item3 = rep.bounds.iter().find(|b| b.item == "item3").expect("worst-case item");
        println!("{n:>6} {gram_err:>14.4e} {:>14.4e} {:>14.4e} {:>14.4e}", setting.laplacian_operator_error(), item3.lhs, item3.rhs);
    }
    // equispaced points integrate the band exactly
    let eq = evaluation_operator(&SampleSet::equispaced(4), 1.0, &WeightFunction::Uniform)?;
    let dev = (gram(&eq) - nalgebra::DMatrix::identity(3, 3)).amax();
    println!("\n4 equispaced points, band 1: max |Gram − I| = {dev:.1e}");
    Ok(())
}
