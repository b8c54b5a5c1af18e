//! Scratch probe: ETDRK4 error vs tolerance mapping.

use spinamp::chain::{ChainSpec, Dimension};
use spinamp::dephasing::{lindblad_evolve, DephasingSpec};

fn worst_diag_diff(
    a: &[spinamp::dephasing::DensityMatrix],
    b: &[spinamp::dephasing::DensityMatrix],
) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| {
            x.diagonal()
                .into_iter()
                .zip(y.diagonal())
                .map(|(u, v)| (u - v).abs())
                .collect::<Vec<_>>()
        })
        .fold(0.0f64, f64::max)
}

fn main() {
    // moderate-Γ config (matches the adaptive-reference test)
    let spec = DephasingSpec::new(ChainSpec::new(Dimension::D2, 8, 1.0).unwrap(), 2.0).unwrap();
    let grid = [0.0, 0.5, 1.3, 2.2, 3.0];
    let truth = lindblad_evolve(&spec, &grid, 1e-12).unwrap();
    for tol in [1e-7, 1e-8, 1e-9, 1e-10, 1e-11] {
        let run = lindblad_evolve(&spec, &grid, tol).unwrap();
        println!("moderate tol={tol:.0e}: diag err {:.3e}", worst_diag_diff(&run, &truth));
    }

    // heavy-Γ config (matches the convergence test)
    let spec = DephasingSpec::new(ChainSpec::new(Dimension::D1, 16, 1.0).unwrap(), 50.0).unwrap();
    let grid = [0.0, 10.0, 30.0, 50.0];
    let truth = lindblad_evolve(&spec, &grid, 1e-12).unwrap();
    for tol in [1e-7, 1e-8, 1e-9, 1e-10, 1e-11] {
        let run = lindblad_evolve(&spec, &grid, tol).unwrap();
        println!("heavy    tol={tol:.0e}: diag err {:.3e}", worst_diag_diff(&run, &truth));
    }
}
