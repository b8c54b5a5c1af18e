//! Coherent dynamics on truncated semi-infinite chains of number states.
//!
//! A chain site holds the amplitude of the state with `n` flipped spins,
//! `n = 1..=N`. The Hamiltonian is real, symmetric, tridiagonal with zero
//! diagonal; the hop strength between `n` and `n+1` encodes the lattice
//! dimensionality of the underlying problem: constant for 1D, `√(n+1)` for
//! 2D (the path-count ratio of consecutive levels), and `(n+1)^(2/3)` for
//! the 3D surface-growth ansatz. Evolution starts from the single-flip
//! state and is integrated with the shared adaptive scheme; population in a
//! trailing guard window certifies that the finite truncation has not yet
//! polluted an observable.

use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions};
use num_complex::Complex64;

/// Spatial dimension of the lattice the chain stands in for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    D1,
    D2,
    D3,
}

impl Dimension {
    /// Truncation length used when the caller does not choose one. Higher
    /// dimensions have faster fronts, so they get shorter default windows
    /// in exchange for cheaper steps.
    pub fn default_length(self) -> usize {
        match self {
            Dimension::D1 => 512,
            Dimension::D2 => 256,
            Dimension::D3 => 128,
        }
    }
}

impl std::str::FromStr for Dimension {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "1d" | "d1" | "D1" => Ok(Dimension::D1),
            "2" | "2d" | "d2" | "D2" => Ok(Dimension::D2),
            "3" | "3d" | "d3" | "D3" => Ok(Dimension::D3),
            other => Err(Error::InvalidInput(format!(
                "unknown dimension {other:?}, expected 1, 2 or 3"
            ))),
        }
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Dimension::D1 => write!(f, "1"),
            Dimension::D2 => write!(f, "2"),
            Dimension::D3 => write!(f, "3"),
        }
    }
}

/// Sites reserved at the far end of the chain for leakage certification.
pub const DEFAULT_GUARD: usize = 8;

/// A finite truncation of the effective chain for one dimension.
#[derive(Clone, Debug)]
pub struct ChainSpec {
    pub dimension: Dimension,
    pub length: usize,
    pub omega: f64,
    couplings: Vec<f64>,
}

impl ChainSpec {
    /// Build the chain; `length` counts sites (states `1..=length`).
    pub fn new(dimension: Dimension, length: usize, omega: f64) -> Result<Self> {
        if length < 2 {
            return Err(Error::InvalidInput(format!(
                "chain length must be at least 2, got {length}"
            )));
        }
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidInput(format!(
                "drive coupling must be positive and finite, got {omega}"
            )));
        }
        let couplings = (0..length - 1)
            .map(|k| {
                // hop between states n = k+1 and n+1 = k+2
                let upper = (k + 2) as f64;
                match dimension {
                    Dimension::D1 => omega,
                    Dimension::D2 => omega * upper.sqrt(),
                    Dimension::D3 => omega * upper.powf(2.0 / 3.0),
                }
            })
            .collect();
        Ok(ChainSpec {
            dimension,
            length,
            omega,
            couplings,
        })
    }

    /// Hop strengths; entry `k` couples sites `k` and `k+1`.
    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Apply the (zero-diagonal, tridiagonal) Hamiltonian to a real vector.
    fn apply_h(&self, x: &[f64], out: &mut [f64]) {
        let n = self.length;
        let c = &self.couplings;
        for i in 0..n {
            let mut acc = 0.0;
            if i > 0 {
                acc += c[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += c[i] * x[i + 1];
            }
            out[i] = acc;
        }
    }

    /// Expectation value of the Hamiltonian in `state`.
    pub fn energy(&self, state: &ChainState) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.couplings.iter().enumerate() {
            // ⟨ψ|H|ψ⟩ for a real symmetric H: 2·Re(conj(a_k)·a_{k+1})·c
            acc += 2.0 * c * (state.amps[k].conj() * state.amps[k + 1]).re;
        }
        acc
    }
}

/// Amplitudes over the number states at one instant.
#[derive(Clone, Debug)]
pub struct ChainState {
    /// Entry `k` is the amplitude of the state with `k+1` flipped spins.
    pub amps: Vec<Complex64>,
    pub time: f64,
}

impl ChainState {
    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// The single-flip starting state.
pub fn initial_state(spec: &ChainSpec) -> ChainState {
    let mut amps = vec![Complex64::new(0.0, 0.0); spec.length];
    amps[0] = Complex64::new(1.0, 0.0);
    ChainState { amps, time: 0.0 }
}

fn validate_tol(tol: f64) -> Result<()> {
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(Error::InvalidInput(format!(
            "relative tolerance must lie in [1e-12, 1e-6], got {tol}"
        )));
    }
    Ok(())
}

/// Integrate the Schrödinger equation from the single-flip state, returning
/// one state per grid time. `t_grid` must be increasing with `t_grid[0] ≥ 0`.
pub fn evolve(spec: &ChainSpec, t_grid: &[f64], tol: f64) -> Result<Vec<ChainState>> {
    validate_tol(tol)?;
    if t_grid.is_empty() {
        return Err(Error::InvalidInput("empty time grid".into()));
    }
    if t_grid[0] < 0.0 {
        return Err(Error::InvalidInput(format!(
            "grid must start at a non-negative time, got {}",
            t_grid[0]
        )));
    }

    let n = spec.length;
    // flat layout: [re_0.., im_0..]; i·da/dt = H·a  →  ẋ = H·y, ẏ = −H·x
    let mut y0 = vec![0.0; 2 * n];
    y0[0] = 1.0;

    // ensure the integration starts at t=0 where the initial state is defined
    let mut grid: Vec<f64> = Vec::with_capacity(t_grid.len() + 1);
    let prepended = t_grid[0] > 0.0;
    if prepended {
        grid.push(0.0);
    }
    grid.extend_from_slice(t_grid);
    if grid.len() == 1 {
        return Ok(vec![initial_state(spec)]);
    }

    let opts = OdeOptions {
        rtol: tol,
        atol: tol * 1e-3,
        ..OdeOptions::default()
    };
    let mut hx = vec![0.0; n];
    let mut hy = vec![0.0; n];
    let rows = ode::integrate_to_grid_projected(
        |_, y, dy| {
            spec.apply_h(&y[..n], &mut hx);
            spec.apply_h(&y[n..], &mut hy);
            dy[..n].copy_from_slice(&hy);
            for i in 0..n {
                dy[n + i] = -hx[i];
            }
        },
        &y0,
        &grid,
        &opts,
        |y| {
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for v in y.iter_mut() {
                    *v /= norm;
                }
            }
        },
    )?;

    let skip = usize::from(prepended);
    Ok(rows
        .into_iter()
        .skip(skip)
        .zip(t_grid.iter())
        .map(|(row, &t)| ChainState {
            amps: (0..n)
                .map(|i| Complex64::new(row[i], row[n + i]))
                .collect(),
            time: t,
        })
        .collect())
}

/// Expected number of flipped spins, `Σ n·|amp_n|²`.
pub fn mean_excitation(state: &ChainState) -> f64 {
    state
        .amps
        .iter()
        .enumerate()
        .map(|(k, a)| (k + 1) as f64 * a.norm_sqr())
        .sum()
}

/// Total population in the last `guard` sites.
pub fn boundary_leakage(state: &ChainState, guard: usize) -> Result<f64> {
    let n = state.amps.len();
    if guard == 0 || guard >= n {
        return Err(Error::InvalidInput(format!(
            "guard must satisfy 1 ≤ guard < {n}, got {guard}"
        )));
    }
    Ok(state.amps[n - guard..].iter().map(|a| a.norm_sqr()).sum())
}

/// Time series of the polarisation observable with its guard certificate.
#[derive(Clone, Debug)]
pub struct PolarisationSeries {
    pub times: Vec<f64>,
    pub mean_n: Vec<f64>,
    pub leakage: Vec<f64>,
}

/// Evolve and reduce to the observables used by the scaling fits. Streams
/// through the integration, so memory stays linear in the chain length no
/// matter how fine the grid is.
pub fn polarisation_series(
    spec: &ChainSpec,
    t_grid: &[f64],
    tol: f64,
    guard: usize,
) -> Result<PolarisationSeries> {
    if guard == 0 || guard >= spec.length {
        return Err(Error::InvalidInput(format!(
            "guard must satisfy 1 ≤ guard < {}, got {guard}",
            spec.length
        )));
    }
    validate_tol(tol)?;
    if t_grid.is_empty() {
        return Err(Error::InvalidInput("empty time grid".into()));
    }
    if t_grid[0] < 0.0 {
        return Err(Error::InvalidInput(format!(
            "grid must start at a non-negative time, got {}",
            t_grid[0]
        )));
    }

    let n = spec.length;
    let mut y0 = vec![0.0; 2 * n];
    y0[0] = 1.0;
    let prepended = t_grid[0] > 0.0;
    let mut grid: Vec<f64> = Vec::with_capacity(t_grid.len() + 1);
    if prepended {
        grid.push(0.0);
    }
    grid.extend_from_slice(t_grid);

    let mut series = PolarisationSeries {
        times: Vec::with_capacity(t_grid.len()),
        mean_n: Vec::with_capacity(t_grid.len()),
        leakage: Vec::with_capacity(t_grid.len()),
    };
    if grid.len() == 1 {
        series.times.push(0.0);
        series.mean_n.push(1.0);
        series.leakage.push(0.0);
        return Ok(series);
    }

    let opts = OdeOptions {
        rtol: tol,
        atol: tol * 1e-3,
        ..OdeOptions::default()
    };
    let mut hx = vec![0.0; n];
    let mut hy = vec![0.0; n];
    let mut seen = 0usize;
    ode::integrate_observed(
        |_, y, dy| {
            spec.apply_h(&y[..n], &mut hx);
            spec.apply_h(&y[n..], &mut hy);
            dy[..n].copy_from_slice(&hy);
            for i in 0..n {
                dy[n + i] = -hx[i];
            }
        },
        &y0,
        &grid,
        &opts,
        |y| {
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for v in y.iter_mut() {
                    *v /= norm;
                }
            }
        },
        |t, y| {
            seen += 1;
            if prepended && seen == 1 {
                return;
            }
            let mut mean = 0.0;
            for i in 0..n {
                mean += (i + 1) as f64 * (y[i] * y[i] + y[n + i] * y[n + i]);
            }
            let mut leak = 0.0;
            for i in n - guard..n {
                leak += y[i] * y[i] + y[n + i] * y[n + i];
            }
            series.times.push(t);
            series.mean_n.push(mean);
            series.leakage.push(leak);
        },
    )?;
    Ok(series)
}

/// Amplitudes at time `t` from a dense eigendecomposition of the chain
/// Hamiltonian — an independent cross-check for the adaptive integrator.
/// Cost is cubic in the length, so keep it to short chains.
pub fn dense_reference_amplitudes(spec: &ChainSpec, t: f64) -> Vec<Complex64> {
    use nalgebra::DMatrix;
    let n = spec.length;
    let mut h = DMatrix::<f64>::zeros(n, n);
    for (k, &c) in spec.couplings.iter().enumerate() {
        h[(k, k + 1)] = c;
        h[(k + 1, k)] = c;
    }
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut amps = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        // a(t) = V e^{−iΛt} Vᵀ e₁;  (Vᵀe₁)_j is the first row of V
        let phase = Complex64::new(0.0, -eig.eigenvalues[j] * t).exp() * v[(0, j)];
        for i in 0..n {
            amps[i] += phase * v[(i, j)];
        }
    }
    amps
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn couplings_follow_the_dimension_rules() {
        let d1 = ChainSpec::new(Dimension::D1, 5, 1.0).unwrap();
        assert_eq!(d1.couplings(), &[1.0, 1.0, 1.0, 1.0]);

        let d2 = ChainSpec::new(Dimension::D2, 4, 1.0).unwrap();
        let expect = [2.0f64.sqrt(), 3.0f64.sqrt(), 2.0];
        for (a, b) in d2.couplings().iter().zip(expect) {
            assert_relative_eq!(*a, b, max_relative = 1e-15);
        }

        let d3 = ChainSpec::new(Dimension::D3, 3, 2.0).unwrap();
        let expect = [
            2.0 * 2.0f64.powf(2.0 / 3.0),
            2.0 * 3.0f64.powf(2.0 / 3.0),
        ];
        for (a, b) in d3.couplings().iter().zip(expect) {
            assert_relative_eq!(*a, b, max_relative = 1e-15);
        }
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(ChainSpec::new(Dimension::D1, 1, 1.0).is_err());
        assert!(ChainSpec::new(Dimension::D1, 8, 0.0).is_err());
        assert!(ChainSpec::new(Dimension::D1, 8, -1.0).is_err());
        assert!(ChainSpec::new(Dimension::D1, 8, f64::NAN).is_err());
        let spec = ChainSpec::new(Dimension::D1, 8, 1.0).unwrap();
        assert!(evolve(&spec, &[0.0, 1.0], 1e-5).is_err());
        assert!(evolve(&spec, &[0.0, 1.0], 1e-13).is_err());
        assert!(evolve(&spec, &[-1.0, 1.0], 1e-9).is_err());
        assert!(evolve(&spec, &[], 1e-9).is_err());
    }

    #[test]
    fn time_zero_returns_the_seed_state() {
        let spec = ChainSpec::new(Dimension::D2, 16, 1.0).unwrap();
        let states = evolve(&spec, &[0.0], 1e-9).unwrap();
        assert_eq!(states.len(), 1);
        assert_eq!(states[0].amps[0], Complex64::new(1.0, 0.0));
        assert_relative_eq!(mean_excitation(&states[0]), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn two_site_chain_rabi_oscillates() {
        for dim in [Dimension::D1, Dimension::D2, Dimension::D3] {
            let spec = ChainSpec::new(dim, 2, 1.3).unwrap();
            let g = spec.couplings()[0];
            let grid = [0.0, 0.3, 0.7, 1.1, 2.9];
            let states = evolve(&spec, &grid, 1e-10).unwrap();
            for s in &states {
                let expect = (g * s.time).sin().powi(2);
                assert!(
                    (s.amps[1].norm_sqr() - expect).abs() < 1e-8,
                    "t={}: {} vs {expect}",
                    s.time,
                    s.amps[1].norm_sqr()
                );
            }
        }
    }

    #[test]
    fn mean_excitation_averages_site_labels() {
        let spec = ChainSpec::new(Dimension::D1, 4, 1.0).unwrap();
        let state = initial_state(&spec);
        assert_eq!(mean_excitation(&state), 1.0);

        let r = std::f64::consts::FRAC_1_SQRT_2;
        let state = ChainState {
            amps: vec![
                Complex64::new(r, 0.0),
                Complex64::new(0.0, r),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
            time: 0.0,
        };
        assert_relative_eq!(mean_excitation(&state), 1.5, max_relative = 1e-15);
    }

    #[test]
    fn leakage_counts_guard_population() {
        let spec = ChainSpec::new(Dimension::D1, 6, 1.0).unwrap();
        let state = initial_state(&spec);
        assert_eq!(boundary_leakage(&state, 2).unwrap(), 0.0);
        assert!(boundary_leakage(&state, 0).is_err());
        assert!(boundary_leakage(&state, 6).is_err());
    }

    #[test]
    fn reflected_packet_piles_into_the_guard() {
        // on a short uniform chain the packet reaches the far wall and the
        // population almost entirely leaves the launch site
        let spec = ChainSpec::new(Dimension::D1, 4, 1.0).unwrap();
        let grid: Vec<f64> = (0..=60).map(|i| i as f64 * 0.1).collect();
        let states = evolve(&spec, &grid, 1e-9).unwrap();
        let max_leak = states
            .iter()
            .map(|s| boundary_leakage(s, 3).unwrap())
            .fold(0.0f64, f64::max);
        assert!(max_leak > 0.9, "max guard population {max_leak}");
    }

    #[test]
    fn norm_stays_pinned_across_the_grid() {
        let spec = ChainSpec::new(Dimension::D3, 48, 1.0).unwrap();
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
        let states = evolve(&spec, &grid, 1e-9).unwrap();
        for s in &states {
            assert!((s.norm_sq() - 1.0).abs() <= 1e-9, "t={}", s.time);
        }
    }

    #[test]
    fn energy_is_conserved() {
        let spec = ChainSpec::new(Dimension::D2, 32, 1.0).unwrap();
        let grid: Vec<f64> = (0..=50).map(|i| i as f64 * 0.1).collect();
        let states = evolve(&spec, &grid, 1e-9).unwrap();
        let e0 = spec.energy(&states[0]);
        assert!(e0.abs() < 1e-12, "seed state has zero energy, got {e0}");
        for s in &states {
            assert!(
                (spec.energy(s) - e0).abs() <= 1e-8,
                "t={}: energy {}",
                s.time,
                spec.energy(s)
            );
        }
    }

    #[test]
    fn integrator_matches_dense_eigendecomposition() {
        for (dim, n) in [(Dimension::D2, 24), (Dimension::D3, 16)] {
            let spec = ChainSpec::new(dim, n, 1.0).unwrap();
            let times = [0.17, 0.5, 0.93, 1.31, 1.74, 2.2, 2.68, 3.01, 3.55, 4.0];
            let mut grid = vec![0.0];
            grid.extend_from_slice(&times);
            let states = evolve(&spec, &grid, 1e-10).unwrap();
            for s in states.iter().skip(1) {
                let reference = dense_reference_amplitudes(&spec, s.time);
                let max_err = s
                    .amps
                    .iter()
                    .zip(&reference)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0f64, f64::max);
                assert!(max_err < 1e-6, "dim {dim:?} t={}: {max_err}", s.time);
            }
        }
    }

    #[test]
    fn series_reports_the_tracked_observables() {
        let spec = ChainSpec::new(Dimension::D2, 64, 1.0).unwrap();
        let grid: Vec<f64> = (0..=30).map(|i| i as f64 * 0.1).collect();
        let series = polarisation_series(&spec, &grid, 1e-9, 8).unwrap();
        assert_eq!(series.times.len(), grid.len());
        assert_relative_eq!(series.mean_n[0], 1.0, max_relative = 1e-12);
        for (&m, &l) in series.mean_n.iter().zip(&series.leakage) {
            assert!((1.0..=64.0).contains(&m));
            assert!((0.0..=1.0 + 1e-12).contains(&l));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn evolution_preserves_probability_structure(
            dim_pick in 0usize..3,
            n in 4usize..24,
            omega in 0.2f64..3.0,
            t_end in 0.2f64..2.0,
        ) {
            let dim = [Dimension::D1, Dimension::D2, Dimension::D3][dim_pick];
            let spec = ChainSpec::new(dim, n, omega).unwrap();
            let grid = [0.0, t_end * 0.5, t_end];
            let states = evolve(&spec, &grid, 1e-9).unwrap();
            for s in &states {
                prop_assert!((s.norm_sq() - 1.0).abs() <= 1e-9);
                let m = mean_excitation(s);
                prop_assert!(m >= 1.0 - 1e-12 && m <= n as f64 + 1e-12);
            }
        }
    }
}
