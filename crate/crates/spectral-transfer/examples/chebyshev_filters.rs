//! Three ways to form g(L)s: spectral synthesis, rational algebra, and Chebyshev
//! interpolation run by the three-term recurrence.

use nalgebra::DVector;
use spectral_transfer::filter::{apply_chebyshev, apply_exact_real, apply_rational, chebyshev_sup_error, Filter};
use spectral_transfer::graph::{build_laplacian, eigendecompose, random_geometric, LaplacianKind};

fn main() -> spectral_transfer::Result<()> {
    let (g, _) = random_geometric(60, 0.3, 3);
    let op = build_laplacian(&g, LaplacianKind::Normalized)?;
    let eig = eigendecompose(&op, None)?;
    let s = DVector::from_fn(op.dim(), |i, _| ((i * 7919) % 13) as f64 / 13.0 - 0.5);

    let heat = Filter::heat(1.0);
    let exact = apply_exact_real(&heat, &eig, &s)?;
    println!("e^(-λ) on the normalized Laplacian, interval [0, 2]");
    println!("{:>7} {:>14} {:>14}", "degree", "‖p(L)s − g(L)s‖", "sup |g − p|");
    for degree in [2, 4, 8, 16, 32] {
        let approx = apply_chebyshev(&heat, &op, degree, (0.0, 2.0), &s)?;
        let sup = chebyshev_sup_error(&heat, degree, 0.0, 2.0, &eig.real_eigenvalues())?;
        println!("{degree:>7} {:>14.4e} {:>14.4e}", (&approx - &exact).norm() / s.norm(), sup);
    }

    let resolvent = Filter::rational(vec![1.0], vec![1.0, 1.0])?;
    let a = apply_exact_real(&resolvent, &eig, &s)?;
    let b = apply_rational(&resolvent, &op, &s)?;
    println!("\n(1 + λ)^(-1): spectral vs linear solve, relative difference {:.2e}", (&a - &b).norm() / a.norm());
    Ok(())
}
