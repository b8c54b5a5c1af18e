//! Scratch probe: acceptance-geometry false-positive sweep via the library.

use spinamp::thermal::{false_positive_sweep, threshold_crossing, ThermalSpec};

fn main() {
    let spec = ThermalSpec {
        rng_seed: 77,
        ..ThermalSpec::new(50, 50, 0.0, false).unwrap()
    };
    let p_values: Vec<f64> = vec![0.01, 0.02, 0.031, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10];
    let start = std::time::Instant::now();
    let sweep = false_positive_sweep(&spec, &p_values, 2000).unwrap();
    println!("elapsed: {:?}", start.elapsed());
    for i in 0..p_values.len() {
        println!(
            "p={:.3} rate={:.4} ci=[{:.4},{:.4}] triggered={} truncated={} effective={}",
            sweep.p_values[i],
            sweep.rates[i],
            sweep.ci_low[i],
            sweep.ci_high[i],
            sweep.triggered[i],
            sweep.truncated[i],
            sweep.effective_trials[i],
        );
    }
    println!("crossing(0.5) = {:?}", threshold_crossing(&sweep, 0.5));
}
