//! Scratch probe: coherent scaling exponents at candidate acceptance sizes.

use spinamp::chain::{polarisation_series, ChainSpec, Dimension, DEFAULT_GUARD};
use spinamp::fit::{default_window, fit_exponent, linspace};
use std::time::Instant;

fn main() {
    let cases: &[(Dimension, usize, f64, f64, f64)] = &[
        // dim, N, t_max, tol, window_lo_frac
        (Dimension::D2, 2048, 42.0, 1e-8, 0.36),
        (Dimension::D2, 4096, 60.0, 1e-8, 0.33),
        (Dimension::D3, 16384, 35.0, 1e-6, 0.74),
        (Dimension::D3, 20000, 38.0, 1e-6, 0.71),
    ];
    for &(dim, n, t_max, tol, lo_frac) in cases {
        let t0 = Instant::now();
        let spec = ChainSpec::new(dim, n, 1.0).unwrap();
        let grid = linspace(0.0, t_max, 241);
        let series = polarisation_series(&spec, &grid, tol, DEFAULT_GUARD).unwrap();
        let elapsed = t0.elapsed();
        let dw = default_window(&series);
        let t_guard = dw.map(|w| w.1).unwrap_or(f64::NAN);
        let window = (lo_frac * t_max, t_guard);
        let max_mean = series.mean_n.iter().cloned().fold(0.0f64, f64::max);
        match fit_exponent(&series, window) {
            Ok(fit) => println!(
                "{dim:?} N={n} t_max={t_max} tol={tol:.0e}: exp {:.4} ± {:.4} ({} pts, win [{:.1},{:.1}]) max_mean={max_mean:.0} [{elapsed:.2?}]",
                fit.exponent, fit.std_error, fit.points_used, window.0, window.1
            ),
            Err(e) => println!(
                "{dim:?} N={n} t_max={t_max}: fit failed: {e} (t_guard={t_guard:.2}, max_mean={max_mean:.0}) [{elapsed:.2?}]"
            ),
        }
    }
}
