//! Adaptive Dormand-Prince 5(4) integrator over flat `f64` state vectors.
//!
//! One integrator serves every continuous-time propagation in the crate:
//! Schrödinger dynamics on chains, density-matrix master equations, and the
//! classical rate equations. The controller uses the standard embedded error
//! estimate with an RMS norm scaled by `atol + rtol·|y|`, first-same-as-last
//! stage reuse, and step clipping so that requested grid times are hit
//! exactly (no dense output). An optional projection hook runs after every
//! accepted step so callers can re-impose conserved structure (norm, trace)
//! before errors accumulate; the first stage is re-evaluated after a
//! projection since the cached last stage no longer matches the state.

use crate::error::{Error, Result};

/// Tolerances and limits for one integration.
#[derive(Clone, Debug)]
pub struct OdeOptions {
    /// Relative tolerance on each component.
    pub rtol: f64,
    /// Absolute tolerance floor on each component.
    pub atol: f64,
    /// Initial step; estimated from the first derivative when absent.
    pub h_init: Option<f64>,
    /// Hard cap on attempted steps before giving up.
    pub max_steps: u64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-9,
            atol: 1e-12,
            h_init: None,
            max_steps: 20_000_000,
        }
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
// fifth-order solution weights; also the seventh stage (FSAL)
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// difference between the fifth- and embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate `y' = f(t, y)` from `t_grid[0]`, returning the state at every
/// grid time (including the first, which is `y0` itself).
pub fn integrate_to_grid<F>(
    mut f: F,
    y0: &[f64],
    t_grid: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    integrate_to_grid_projected(&mut f, y0, t_grid, opts, |_| {})
}

/// As [`integrate_to_grid`], additionally applying `project` to the state
/// after every accepted step (and to the stored grid samples).
pub fn integrate_to_grid_projected<F, P>(
    f: F,
    y0: &[f64],
    t_grid: &[f64],
    opts: &OdeOptions,
    project: P,
) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    P: FnMut(&mut [f64]),
{
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(t_grid.len());
    integrate_observed(f, y0, t_grid, opts, project, |_, y| out.push(y.to_vec()))?;
    Ok(out)
}

/// Core driver: instead of storing states, hand each grid-time state to
/// `observe`. Lets long chains run with O(state) memory.
pub fn integrate_observed<F, P, O>(
    mut f: F,
    y0: &[f64],
    t_grid: &[f64],
    opts: &OdeOptions,
    mut project: P,
    mut observe: O,
) -> Result<()>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    P: FnMut(&mut [f64]),
    O: FnMut(f64, &[f64]),
{
    validate(y0, t_grid, opts)?;
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t_grid[0];

    observe(t, &y);

    let mut k: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0; n]).collect();
    let mut y_stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];

    f(t, &y, &mut k[0]);
    let mut h = opts.h_init.unwrap_or_else(|| initial_step(&y, &k[0], t_grid, opts));

    let mut steps: u64 = 0;
    for (gi, &t_target) in t_grid.iter().enumerate().skip(1) {
        if t_target == t {
            observe(t, &y);
            continue;
        }
        while t < t_target {
            if steps >= opts.max_steps {
                return Err(Error::Integrator {
                    t_reached: t,
                    message: format!("step limit {} exhausted", opts.max_steps),
                });
            }
            steps += 1;

            // clip to the grid time without losing the controller's step
            let h_intended = h;
            let h_try = h.min(t_target - t);
            let clipped = h_try < h;
            if h_try < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Integrator {
                    t_reached: t,
                    message: "step size underflow".into(),
                });
            }

            // stages 2..6
            stage(&mut y_stage, &y, &k, &A2, h_try);
            f(t + C[1] * h_try, &y_stage, &mut k[1]);
            stage(&mut y_stage, &y, &k, &A3, h_try);
            f(t + C[2] * h_try, &y_stage, &mut k[2]);
            stage(&mut y_stage, &y, &k, &A4, h_try);
            f(t + C[3] * h_try, &y_stage, &mut k[3]);
            stage(&mut y_stage, &y, &k, &A5, h_try);
            f(t + C[4] * h_try, &y_stage, &mut k[4]);
            stage(&mut y_stage, &y, &k, &A6, h_try);
            f(t + C[5] * h_try, &y_stage, &mut k[5]);
            // fifth-order solution doubles as the seventh stage point
            stage(&mut y_new, &y, &k, &B, h_try);
            f(t + h_try, &y_new, &mut k[6]);

            // scaled RMS error over the embedded difference
            let mut acc = 0.0;
            for i in 0..n {
                let mut e = 0.0;
                for (s, ks) in k.iter().enumerate() {
                    if E[s] != 0.0 {
                        e += E[s] * ks[i];
                    }
                }
                e *= h_try;
                let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                let r = e / scale;
                acc += r * r;
            }
            let err = (acc / n as f64).sqrt();

            if err <= 1.0 {
                t += h_try;
                std::mem::swap(&mut y, &mut y_new);
                project(&mut y);
                // FSAL: stage 7 becomes stage 1 of the next step; a
                // projection may have moved the state, so refresh it
                k.swap(0, 6);
                f(t, &y, &mut k[0]);

                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                h = if clipped {
                    // the controller's opinion applies to the unclipped step
                    h_intended.max(h_try * factor.min(1.0))
                } else {
                    h_try * factor
                };
            } else {
                let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                h = h_try * factor;
            }
        }
        debug_assert!(gi < t_grid.len());
        observe(t, &y);
    }
    Ok(())
}

fn validate(y0: &[f64], t_grid: &[f64], opts: &OdeOptions) -> Result<()> {
    if y0.is_empty() {
        return Err(Error::InvalidInput("empty initial state".into()));
    }
    if t_grid.len() < 2 {
        return Err(Error::InvalidInput(
            "time grid needs at least a start and one target".into(),
        ));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "time grid must be strictly increasing".into(),
        ));
    }
    if !t_grid.iter().all(|t| t.is_finite()) {
        return Err(Error::InvalidInput("non-finite grid time".into()));
    }
    if !(opts.rtol > 0.0) || !(opts.atol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerances must be positive, got rtol={} atol={}",
            opts.rtol, opts.atol
        )));
    }
    if let Some(h) = opts.h_init {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidInput(format!(
                "h_init must be positive and finite, got {h}"
            )));
        }
    }
    Ok(())
}

fn initial_step(y: &[f64], f0: &[f64], t_grid: &[f64], opts: &OdeOptions) -> f64 {
    let span = t_grid[t_grid.len() - 1] - t_grid[0];
    let n = y.len() as f64;
    let d0 = (y.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    let d1 = (f0.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    let by_derivative = if d1 > 1e-300 {
        0.01 * (d0.max(opts.atol) / d1)
    } else {
        span * 1e-3
    };
    by_derivative.min(span * 1e-3).max(span * 1e-12)
}

fn stage(dst: &mut [f64], y: &[f64], k: &[Vec<f64>], coeffs: &[f64], h: f64) {
    for i in 0..dst.len() {
        let mut acc = 0.0;
        for (s, &a) in coeffs.iter().enumerate() {
            if a != 0.0 {
                acc += a * k[s][i];
            }
        }
        dst[i] = y[i] + h * acc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let grid: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let out = integrate_to_grid(
            |_, y, dy| dy[0] = -y[0],
            &[1.0],
            &grid,
            &OdeOptions::default(),
        )
        .unwrap();
        for (i, row) in out.iter().enumerate() {
            let exact = (-(i as f64)).exp();
            assert!(
                (row[0] - exact).abs() < 1e-8 * exact.max(1e-3),
                "t={i}: {} vs {exact}",
                row[0]
            );
        }
    }

    #[test]
    fn harmonic_oscillator_stays_on_the_circle() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.5).collect();
        let out = integrate_to_grid(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            &[1.0, 0.0],
            &grid,
            &OdeOptions::default(),
        )
        .unwrap();
        for (i, row) in out.iter().enumerate() {
            let t = grid[i];
            assert!((row[0] - t.cos()).abs() < 5e-7, "position at t={t}");
            let r2 = row[0] * row[0] + row[1] * row[1];
            assert!((r2 - 1.0).abs() < 1e-7, "energy drift at t={t}: {r2}");
        }
    }

    #[test]
    fn projection_hook_pins_the_norm() {
        let grid: Vec<f64> = (0..=50).map(|i| i as f64).collect();
        let out = integrate_to_grid_projected(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            &[1.0, 0.0],
            &grid,
            &OdeOptions {
                rtol: 1e-6,
                atol: 1e-9,
                ..OdeOptions::default()
            },
            |y| {
                let norm = (y[0] * y[0] + y[1] * y[1]).sqrt();
                y[0] /= norm;
                y[1] /= norm;
            },
        )
        .unwrap();
        for row in out.iter().skip(1) {
            let r2 = row[0] * row[0] + row[1] * row[1];
            assert!((r2 - 1.0).abs() < 1e-15, "projected norm {r2}");
        }
    }

    #[test]
    fn step_limit_reports_progress() {
        let grid = vec![0.0, 1e6];
        let res = integrate_to_grid(
            |_, y, dy| dy[0] = y[1].cos() - y[0],
            &[1.0, 0.5],
            &grid,
            &OdeOptions {
                max_steps: 10,
                ..OdeOptions::default()
            },
        );
        match res {
            Err(Error::Integrator { t_reached, .. }) => {
                assert!(t_reached < 1e6 && t_reached >= 0.0);
            }
            other => panic!("expected step-limit error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_grids_and_tolerances() {
        let f = |_: f64, _: &[f64], dy: &mut [f64]| dy[0] = 0.0;
        assert!(integrate_to_grid(f, &[1.0], &[0.0], &OdeOptions::default()).is_err());
        assert!(integrate_to_grid(f, &[1.0], &[0.0, 0.0], &OdeOptions::default()).is_err());
        assert!(integrate_to_grid(f, &[1.0], &[1.0, 0.5], &OdeOptions::default()).is_err());
        assert!(integrate_to_grid(f, &[], &[0.0, 1.0], &OdeOptions::default()).is_err());
        let bad = OdeOptions {
            rtol: -1.0,
            ..OdeOptions::default()
        };
        assert!(integrate_to_grid(f, &[1.0], &[0.0, 1.0], &bad).is_err());
    }

    #[test]
    fn irregular_grids_are_hit_exactly() {
        let grid = vec![0.0, 0.013, 0.7, 0.70001, 2.5, 9.0];
        let out = integrate_to_grid(
            |t, _, dy| dy[0] = 3.0 * t * t,
            &[0.0],
            &grid,
            &OdeOptions::default(),
        )
        .unwrap();
        for (i, row) in out.iter().enumerate() {
            let exact = grid[i].powi(3);
            assert!((row[0] - exact).abs() < 1e-9 + 1e-9 * exact, "t={}", grid[i]);
        }
    }

    proptest! {
        /// A fifth-order method integrates quartics in t to rounding error.
        #[test]
        fn quartics_integrate_exactly(
            coeffs in proptest::collection::vec(-3.0f64..3.0, 5),
        ) {
            let grid = vec![0.0, 0.7, 1.9, 4.0];
            let out = integrate_to_grid(
                |t, _, dy| {
                    dy[0] = coeffs
                        .iter()
                        .enumerate()
                        .map(|(p, c)| c * (p + 1) as f64 * t.powi(p as i32))
                        .sum();
                },
                &[0.0],
                &grid,
                &OdeOptions::default(),
            )
            .unwrap();
            for (i, row) in out.iter().enumerate() {
                let t = grid[i];
                let exact: f64 = coeffs
                    .iter()
                    .enumerate()
                    .map(|(p, c)| c * t.powi(p as i32 + 1))
                    .sum();
                prop_assert!(
                    (row[0] - exact).abs() < 1e-8 * (1.0 + exact.abs()),
                    "t={t}: {} vs {exact}", row[0]
                );
            }
        }
    }
}
