//! Scratch probe: dephased scaling exponents and Lindblad↔Markov distances.

use spinamp::chain::{ChainSpec, Dimension};
use spinamp::dephasing::{
    compare_lindblad_markov, lindblad_series, markov_rates, markov_series, DephasingSpec,
};
use spinamp::fit::{fit_exponent, linspace};
use std::time::Instant;

fn main() {
    // criterion-5 candidates: Markov exponents
    let t0 = Instant::now();
    let spec = DephasingSpec::new(ChainSpec::new(Dimension::D1, 512, 1.0).unwrap(), 2.0).unwrap();
    let grid = linspace(0.0, 1000.0, 241);
    let series = markov_series(&markov_rates(&spec), &grid, 8).unwrap();
    let fit = fit_exponent(&series, (200.0, 1000.0)).unwrap();
    println!(
        "markov D1 N=512 w=1 T=1000 win[200,1000]: exp {:.4} ± {:.4} ({} pts, leak_end {:.1e}) [{:.2?}]",
        fit.exponent, fit.std_error, fit.points_used, series.leakage.last().unwrap(), t0.elapsed()
    );

    for (n, t_max, lo) in [(1600usize, 50.0f64, 25.0f64), (2000, 65.0, 30.0), (2400, 80.0, 35.0)] {
        let t0 = Instant::now();
        let spec = DephasingSpec::new(ChainSpec::new(Dimension::D2, n, 1.0).unwrap(), 1.0).unwrap();
        let grid = linspace(0.0, t_max, 241);
        let series = markov_series(&markov_rates(&spec), &grid, 8).unwrap();
        let fit = fit_exponent(&series, (lo, t_max)).unwrap();
        println!(
            "markov D2 N={n} T={t_max} win[{lo},{t_max}]: exp {:.4} ± {:.4} ({} pts, leak_end {:.1e}) [{:.2?}]",
            fit.exponent, fit.std_error, fit.points_used, series.leakage.last().unwrap(), t0.elapsed()
        );
    }

    // criterion-6 candidates: matched-window comparison
    let t0 = Instant::now();
    let spec = DephasingSpec::new(ChainSpec::new(Dimension::D1, 32, 1.0).unwrap(), 100.0).unwrap();
    let d100 = compare_lindblad_markov(&spec, &linspace(0.0, 500.0, 101)).unwrap();
    let e100 = t0.elapsed();
    let t0 = Instant::now();
    let spec = DephasingSpec::new(ChainSpec::new(Dimension::D1, 32, 1.0).unwrap(), 20.0).unwrap();
    let d20 = compare_lindblad_markov(&spec, &linspace(0.0, 100.0, 101)).unwrap();
    println!(
        "compare: L1(Γ=100,T=500)={d100:.4} [{e100:.2?}]  L1(Γ=20,T=100)={d20:.4} [{:.2?}]  ratio {:.2}",
        t0.elapsed(),
        d20 / d100
    );

    // Lindblad diffusive exponent example band
    let t0 = Instant::now();
    let spec = DephasingSpec::new(ChainSpec::new(Dimension::D1, 128, 1.0).unwrap(), 1.0).unwrap();
    let grid = linspace(0.0, 150.0, 121);
    let out = lindblad_series(&spec, &grid, 1e-8, 8).unwrap();
    let fit = fit_exponent(&out.series, (30.0, 150.0)).unwrap();
    println!(
        "lindblad D1 Γ=1 N=128 T=150 win[30,150]: exp {:.4} ± {:.4} (leak_end {:.1e}, max trace_err {:.1e}) [{:.2?}]",
        fit.exponent,
        fit.std_error,
        out.series.leakage.last().unwrap(),
        out.trace_err.iter().cloned().fold(0.0f64, f64::max),
        t0.elapsed()
    );
}
