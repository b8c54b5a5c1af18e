use std::time::Instant;

use spinamp::fit::linspace;
use spinamp::lattice::{reachable_states, LatticeConfig};
use spinamp::oracle::{
    mean_leakage, rwa_validate_1d, tridiagonalize_from_seed, two_tone_up_population,
    two_tone_validate_2d, RuleHamiltonian,
};

fn main() {
    // criterion 2: 12x12 staircase basis, Lanczos ladder
    let t0 = Instant::now();
    let basis = reachable_states(12, 12, 11).unwrap();
    let h = RuleHamiltonian::from_staircase_basis(&basis, 1.0).unwrap();
    let seed = LatticeConfig::with_corner_up(12, 12).unwrap();
    let tri = tridiagonalize_from_seed(&h, &seed).unwrap();
    let worst_alpha = tri.alphas.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let worst_beta = tri
        .betas
        .iter()
        .enumerate()
        .map(|(k, b)| (b - ((k + 2) as f64).sqrt()).abs())
        .fold(0.0f64, f64::max);
    println!(
        "lanczos 12x12 max_n=11: {} states, {} alphas, {} betas, worst alpha {:.2e}, worst beta err {:.2e} [{:.2?}]",
        basis.len(),
        tri.alphas.len(),
        tri.betas.len(),
        worst_alpha,
        worst_beta,
        t0.elapsed()
    );

    // criterion 7: n=8 chain, omega/j = 0.02 and 0.01
    for omega in [0.02, 0.01] {
        let t0 = Instant::now();
        let grid = linspace(0.0, 20.0 / omega, 401);
        let series = rwa_validate_1d(8, 1.0, omega, &grid).unwrap();
        let max_leak = series.leakage.iter().cloned().fold(0.0, f64::max);
        println!(
            "rwa n=8 omega={omega}: max leak {:.5}, mean leak {:.6} [{:.2?}]",
            max_leak,
            mean_leakage(&series),
            t0.elapsed()
        );
    }

    // two-tone tracking: gap scaling with drive strength and window size
    for (w, hh, om) in [(3usize, 2usize, 0.05f64), (3, 3, 0.05), (3, 3, 0.025)] {
        let t0 = Instant::now();
        let grid = linspace(0.0, 10.0 / om, 81);
        let report = two_tone_validate_2d(w, hh, 1.0, om, &grid).unwrap();
        let max_gap = report.population_gap.iter().cloned().fold(0.0, f64::max);
        let max_leak = report.leakage.iter().cloned().fold(0.0, f64::max);
        println!(
            "two-tone {w}x{hh} omega/j={om}: max gap {:.4}, max leak {:.4} [{:.2?}]",
            max_gap,
            max_leak,
            t0.elapsed()
        );
    }
    let omega = 0.05;
    let grid = linspace(0.0, 10.0 / omega, 81);

    // criterion 8: corner-down inertness, 3x3 and 3x4
    for (w, hh) in [(3usize, 3usize), (4, 3)] {
        let t0 = Instant::now();
        let series = two_tone_up_population(w, hh, 1.0, omega, &grid).unwrap();
        let max_up = series.mean_up.iter().cloned().fold(0.0, f64::max);
        println!(
            "inert {w}x{hh} omega/j=0.05: max mean-up {:.5} [{:.2?}]",
            max_up,
            t0.elapsed()
        );
    }
}
