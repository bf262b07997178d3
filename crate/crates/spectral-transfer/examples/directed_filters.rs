//! A directed graph whose Laplacian is normal under the inner product defined by
//! its eigenvectors, so complex filters g(L) = Σ g(λ_j)P_j are well defined.

use nalgebra::DVector;
use spectral_transfer::filter::{apply_exact, Filter};
use spectral_transfer::graph::{build_laplacian, eigendecompose, normality_defect, LaplacianKind, OperatorWithInnerProduct, WeightedGraph};

fn main() -> spectral_transfer::Result<()> {
    // directed 5-cycle with one chord
    let g = WeightedGraph::new(5, vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 0, 1.0), (0, 2, 0.5)], true)?;
    let lap = build_laplacian(&g, LaplacianKind::Unnormalized)?;
    let plain = OperatorWithInnerProduct::new(lap.matrix.clone(), spectral_transfer::graph::InnerProduct::Identity)?;
    println!("normality defect under the dot product:      {:.3e}", normality_defect(&plain)?);
    println!("normality defect under the eigenvector B:    {:.3e}", normality_defect(&lap)?);

    let eig = eigendecompose(&lap, None)?;
    println!("\neigenvalues:");
    for z in eig.eigenvalues() {
        println!("  {:+.5} {:+.5}i", z.re, z.im);
    }
    let s = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    for f in [Filter::heat(1.0), Filter::rational(vec![1.0], vec![1.0, 1.0])?] {
        let out = apply_exact(&f, &eig, &s)?;
        println!("\n{} applied to e_0:", f.name());
        for z in out.iter() {
            println!("  {:+.5} {:+.5}i", z.re, z.im);
        }
    }
    Ok(())
}
