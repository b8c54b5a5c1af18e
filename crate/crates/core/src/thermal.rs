//! Stochastic simulation of the flip rules at imperfect initial polarisation.
//!
//! At finite temperature a fraction of the ancilla spins starts up. Under
//! heavy dephasing the coherent dynamics reduces to a classical Markov chain
//! in which every rule-allowed flip proceeds at the same rate, so the lattice
//! is simulated with a continuous-time Gillespie algorithm: all allowed flips
//! ([`crate::lattice::flip_allowed`], the finite-sample reading — the grid is
//! the whole crystal, with four real edges) carry unit rate, waiting times
//! are exponential in the total rate, and the allowed set is maintained
//! incrementally (a flip can only change the eligibility of its four
//! neighbours).
//!
//! A trajectory is classified as *triggered* when the ancilla up-count ever
//! reaches the fraction `theta` of the lattice area; sweeping the initial up
//! probability with the test spin held down measures the false-positive rate
//! and locates the polarisation threshold below which amplification is
//! trustworthy.
//!
//! Thermal defects keep the far row and column mildly active at any
//! temperature (edge segments grow and shrink there), so mere activity at the
//! far boundary cannot signal a finite-size failure. A run is marked
//! *truncated* — and stops — only when an up spin on the far boundary belongs
//! to a connected up-cluster of at least half the trigger scale: a
//! macroscopic front has then outgrown the grid and the classification of
//! that run is not trustworthy. Truncated runs that never triggered are
//! censored out of the rate estimates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{allowed_flips, flip_allowed, LatticeConfig};

/// Planck constant, J s (exact SI).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Boltzmann constant, J/K (exact SI).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Excited-state fraction of a two-level spin with splitting `h·freq` in
/// equilibrium at temperature `temperature`: `1/(1 + exp(h·freq/(k_B·T)))`.
pub fn boltzmann_up_fraction(freq: f64, temperature: f64) -> Result<f64> {
    if !(freq > 0.0) || !freq.is_finite() {
        return Err(Error::InvalidInput(format!(
            "frequency must be positive and finite, got {freq}"
        )));
    }
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::InvalidInput(format!(
            "temperature must be positive and finite, got {temperature}"
        )));
    }
    Ok(1.0 / (1.0 + (PLANCK * freq / (BOLTZMANN * temperature)).exp()))
}

/// Parameters of one stochastic lattice experiment.
#[derive(Clone, Debug)]
pub struct ThermalSpec {
    /// Grid width (≥ 8).
    pub width: usize,
    /// Grid height (≥ 8).
    pub height: usize,
    /// Probability that each ancilla spin starts up, in `[0, 1)`.
    pub p_up: f64,
    /// Initial state of the corner test spin.
    pub test_up: bool,
    /// Simulated time horizon in units of the inverse flip rate.
    pub t_max: f64,
    /// Triggered classification: ancilla up-count ≥ `theta · width · height`.
    pub theta: f64,
    /// Base seed; per-trial streams are derived from it.
    pub rng_seed: u64,
}

impl ThermalSpec {
    pub fn new(width: usize, height: usize, p_up: f64, test_up: bool) -> Result<Self> {
        let spec = ThermalSpec {
            width,
            height,
            p_up,
            test_up,
            t_max: 200.0,
            theta: 0.25,
            rng_seed: 0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 8 || self.height < 8 {
            return Err(Error::InvalidInput(format!(
                "grid must be at least 8x8, got {}x{}",
                self.width, self.height
            )));
        }
        if !(0.0..1.0).contains(&self.p_up) {
            return Err(Error::InvalidInput(format!(
                "p_up must lie in [0, 1), got {}",
                self.p_up
            )));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::InvalidInput(format!(
                "t_max must be positive and finite, got {}",
                self.t_max
            )));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::InvalidInput(format!(
                "theta must lie in (0, 1), got {}",
                self.theta
            )));
        }
        Ok(())
    }

    /// Ancilla up-count at or above which a trajectory counts as triggered.
    pub fn trigger_count(&self) -> u32 {
        (self.theta * (self.width * self.height) as f64).ceil() as u32
    }

    /// Connected up-cluster size at which boundary contact counts as a
    /// macroscopic front (half the trigger scale).
    pub fn front_scale(&self) -> u32 {
        (self.trigger_count() + 1) / 2
    }

    /// Independent RNG stream for one trial of one sweep point, derived from
    /// the base seed: stream id = `(point_index << 32) | trial_index`.
    pub fn trial_rng(&self, point_index: u32, trial_index: u32) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(((point_index as u64) << 32) | trial_index as u64);
        rng
    }
}

/// Event record of one Gillespie run.
#[derive(Clone, Debug)]
pub struct TrajectoryResult {
    /// Event times, strictly increasing.
    pub times: Vec<f64>,
    /// Ancilla up-count immediately after each event.
    pub up_counts: Vec<u32>,
    /// Whether the up-count ever reached the trigger threshold.
    pub triggered: bool,
    /// Whether the dynamics reached the far row or column (finite-size
    /// emulation of the semi-infinite lattice broke down; the run stops).
    pub truncated: bool,
    /// Time at which the run stopped (last event, `t_max`, or rate zero).
    pub t_end: f64,
}

/// Initial configuration: every ancilla up independently with probability
/// `p_up`, the corner forced to `test_up`. Deterministic given the RNG state.
pub fn sample_initial(spec: &ThermalSpec, rng: &mut impl Rng) -> Result<LatticeConfig> {
    spec.validate()?;
    let mut cfg = LatticeConfig::new(spec.width, spec.height)?;
    for row in 0..spec.height {
        for col in 0..spec.width {
            if row == 0 && col == 0 {
                continue;
            }
            if rng.gen::<f64>() < spec.p_up {
                cfg.set(row, col, true);
            }
        }
    }
    cfg.set(0, 0, spec.test_up);
    Ok(cfg)
}

/// Incrementally maintained set of rule-allowed flips.
struct AllowedSet {
    sites: Vec<u32>,
    position: Vec<u32>,
    width: usize,
    height: usize,
}

const NOT_PRESENT: u32 = u32::MAX;

impl AllowedSet {
    fn build(cfg: &LatticeConfig) -> Self {
        let width = cfg.width();
        let height = cfg.height();
        let mut set = AllowedSet {
            sites: Vec::new(),
            position: vec![NOT_PRESENT; width * height],
            width,
            height,
        };
        for (r, c) in allowed_flips(cfg) {
            set.insert((r * width + c) as u32);
        }
        set
    }

    fn len(&self) -> usize {
        self.sites.len()
    }

    fn insert(&mut self, site: u32) {
        if self.position[site as usize] == NOT_PRESENT {
            self.position[site as usize] = self.sites.len() as u32;
            self.sites.push(site);
        }
    }

    fn remove(&mut self, site: u32) {
        let pos = self.position[site as usize];
        if pos != NOT_PRESENT {
            self.sites.swap_remove(pos as usize);
            if let Some(&moved) = self.sites.get(pos as usize) {
                self.position[moved as usize] = pos;
            }
            self.position[site as usize] = NOT_PRESENT;
        }
    }

    /// Re-evaluate one site's eligibility against the current configuration.
    fn sync(&mut self, cfg: &LatticeConfig, row: usize, col: usize) {
        let site = (row * self.width + col) as u32;
        if flip_allowed(cfg, row, col) {
            self.insert(site);
        } else {
            self.remove(site);
        }
    }

    /// A flip at `(row, col)` can only change the eligibility of the four
    /// neighbours; the flipped site's own eligibility is invariant.
    fn apply_flip(&mut self, cfg: &LatticeConfig, row: usize, col: usize) {
        if row > 0 {
            self.sync(cfg, row - 1, col);
        }
        if row + 1 < self.height {
            self.sync(cfg, row + 1, col);
        }
        if col > 0 {
            self.sync(cfg, row, col - 1);
        }
        if col + 1 < self.width {
            self.sync(cfg, row, col + 1);
        }
    }
}

/// Continuous-time Gillespie run with unit rates on all allowed flips.
///
/// Stops at `t_max`, when no flip is allowed, or when a macroscopic front
/// (connected up-cluster of at least [`ThermalSpec::front_scale`] sites)
/// reaches the far row or column — the run is then marked truncated because
/// the grid demonstrably failed to contain the structure being classified.
/// Ordinary defect churn on the far boundary is part of the finite sample's
/// own dynamics and neither stops nor censors a run.
pub fn run_trajectory(spec: &ThermalSpec, rng: &mut impl Rng) -> Result<TrajectoryResult> {
    let cfg = sample_initial(spec, rng)?;
    gillespie(spec, cfg, rng, false)
}

/// As [`run_trajectory`] but stops as soon as the trigger fires; sweeps use
/// this since classification is monotone in the running maximum up-count.
fn run_classified(spec: &ThermalSpec, rng: &mut impl Rng) -> Result<TrajectoryResult> {
    let cfg = sample_initial(spec, rng)?;
    gillespie(spec, cfg, rng, true)
}

fn gillespie(
    spec: &ThermalSpec,
    mut cfg: LatticeConfig,
    rng: &mut impl Rng,
    stop_on_trigger: bool,
) -> Result<TrajectoryResult> {
    let trigger_count = spec.trigger_count();
    let front_scale = spec.front_scale();
    let mut ups = cfg.ancilla_up_count();
    let mut triggered = ups >= trigger_count;
    let mut truncated = false;

    let mut allowed = AllowedSet::build(&cfg);
    let mut times = Vec::new();
    let mut up_counts = Vec::new();
    let mut t = 0.0_f64;

    let far_row = spec.height - 1;
    let far_col = spec.width - 1;
    let mut cluster = ClusterProbe::new(spec.width, spec.height);

    while !(stop_on_trigger && triggered) {
        let rate = allowed.len();
        if rate == 0 {
            break;
        }
        let mut dt = -(1.0 - rng.gen::<f64>()).ln() / rate as f64;
        while dt == 0.0 {
            dt = -(1.0 - rng.gen::<f64>()).ln() / rate as f64;
        }
        if t + dt > spec.t_max {
            t = spec.t_max;
            break;
        }
        t += dt;

        let site = allowed.sites[rng.gen_range(0..rate)] as usize;
        let (row, col) = (site / spec.width, site % spec.width);
        debug_assert!(flip_allowed(&cfg, row, col));
        let was_up = cfg.get(row, col);
        cfg.flip(row, col);
        ups = if was_up { ups - 1 } else { ups + 1 };
        allowed.apply_flip(&cfg, row, col);

        times.push(t);
        up_counts.push(ups);
        if ups >= trigger_count {
            triggered = true;
        }
        if !was_up
            && (row == far_row || col == far_col)
            && cluster.size_reaches(&cfg, row, col, front_scale)
        {
            truncated = true;
            break;
        }
    }

    Ok(TrajectoryResult {
        times,
        up_counts,
        triggered,
        truncated,
        t_end: t,
    })
}

/// Reusable flood-fill for the connected up-cluster of one site, with early
/// exit once a target size is reached. Epoch stamps avoid re-zeroing.
struct ClusterProbe {
    stamp: Vec<u32>,
    epoch: u32,
    stack: Vec<u32>,
    width: usize,
    height: usize,
}

impl ClusterProbe {
    fn new(width: usize, height: usize) -> Self {
        ClusterProbe {
            stamp: vec![0; width * height],
            epoch: 0,
            stack: Vec::new(),
            width,
            height,
        }
    }

    fn size_reaches(&mut self, cfg: &LatticeConfig, row: usize, col: usize, target: u32) -> bool {
        self.epoch += 1;
        self.stack.clear();
        let start = (row * self.width + col) as u32;
        self.stamp[start as usize] = self.epoch;
        self.stack.push(start);
        let mut size = 0u32;
        while let Some(site) = self.stack.pop() {
            size += 1;
            if size >= target {
                return true;
            }
            let (r, c) = (site as usize / self.width, site as usize % self.width);
            let push = |rr: usize, cc: usize, probe: &mut Self| {
                let s = rr * probe.width + cc;
                if probe.stamp[s] != probe.epoch && cfg.get(rr, cc) {
                    probe.stamp[s] = probe.epoch;
                    probe.stack.push(s as u32);
                }
            };
            if r > 0 {
                push(r - 1, c, self);
            }
            if r + 1 < self.height {
                push(r + 1, c, self);
            }
            if c > 0 {
                push(r, c - 1, self);
            }
            if c + 1 < self.width {
                push(r, c + 1, self);
            }
        }
        false
    }
}

/// Trigger statistics across a sweep of initial up probabilities.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub p_values: Vec<f64>,
    /// Trials run per point.
    pub trials: usize,
    /// Triggered trials per point.
    pub triggered: Vec<usize>,
    /// Truncated trials per point (dynamics reached the far boundary).
    pub truncated: Vec<usize>,
    /// Trials entering the rate denominator per point: truncated runs that
    /// never triggered are censored (their eventual classification is
    /// unknowable on this grid) and excluded.
    pub effective_trials: Vec<usize>,
    /// Trigger rate per point, `triggered / effective_trials`.
    pub rates: Vec<f64>,
    /// 95% Wilson confidence interval per point.
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
}

/// Wilson score interval for `successes` out of `n` at normal quantile `z`.
pub fn wilson_interval(successes: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p_hat = successes as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p_hat + z2 / (2.0 * n_f)) / denom;
    let half = z * (p_hat * (1.0 - p_hat) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn sweep(spec: &ThermalSpec, p_values: &[f64], trials: usize, test_up: bool) -> Result<SweepResult> {
    if trials < 200 {
        return Err(Error::InvalidInput(format!(
            "at least 200 trials per point are required for stable rates, got {trials}"
        )));
    }
    if p_values.is_empty() {
        return Err(Error::InvalidInput("no sweep points given".into()));
    }
    let mut point_spec = spec.clone();
    point_spec.test_up = test_up;

    let mut result = SweepResult {
        p_values: p_values.to_vec(),
        trials,
        triggered: Vec::new(),
        truncated: Vec::new(),
        effective_trials: Vec::new(),
        rates: Vec::new(),
        ci_low: Vec::new(),
        ci_high: Vec::new(),
    };

    for (point_index, &p) in p_values.iter().enumerate() {
        let mut ps = point_spec.clone();
        ps.p_up = p;
        ps.validate()?;

        // Trials are independent; the per-trial stream makes the outcome
        // vector identical regardless of scheduling.
        let outcomes: Vec<(bool, bool)> = (0..trials as u32)
            .into_par_iter()
            .map(|trial| {
                let mut rng = ps.trial_rng(point_index as u32, trial);
                let traj = run_classified(&ps, &mut rng)
                    .expect("spec validated before dispatch");
                (traj.triggered, traj.truncated)
            })
            .collect();

        let triggered = outcomes.iter().filter(|o| o.0).count();
        let truncated = outcomes.iter().filter(|o| o.1).count();
        let censored = outcomes.iter().filter(|o| o.1 && !o.0).count();
        let effective = trials - censored;
        let rate = if effective > 0 {
            triggered as f64 / effective as f64
        } else {
            f64::NAN
        };
        let (lo, hi) = wilson_interval(triggered, effective, 1.96);

        result.triggered.push(triggered);
        result.truncated.push(truncated);
        result.effective_trials.push(effective);
        result.rates.push(rate);
        result.ci_low.push(lo);
        result.ci_high.push(hi);
    }
    Ok(result)
}

/// Trigger rate with the test spin held *down*: any trigger is a false
/// positive caused purely by thermal initialization defects.
pub fn false_positive_sweep(
    spec: &ThermalSpec,
    p_values: &[f64],
    trials: usize,
) -> Result<SweepResult> {
    sweep(spec, p_values, trials, false)
}

/// Trigger rate with the test spin *up*: the detection (true-positive) rate.
pub fn detection_sweep(spec: &ThermalSpec, p_values: &[f64], trials: usize) -> Result<SweepResult> {
    sweep(spec, p_values, trials, true)
}

/// First crossing of `level` by the rate curve, linearly interpolated in p.
/// Returns the first p if the curve starts at or above the level, `None` if
/// it never reaches it.
pub fn threshold_crossing(sweep: &SweepResult, level: f64) -> Option<f64> {
    let r = &sweep.rates;
    let p = &sweep.p_values;
    if r.is_empty() {
        return None;
    }
    if r[0] >= level {
        return Some(p[0]);
    }
    for i in 0..r.len() - 1 {
        if r[i] < level && r[i + 1] >= level {
            let frac = (level - r[i]) / (r[i + 1] - r[i]);
            return Some(p[i] + frac * (p[i + 1] - p[i]));
        }
    }
    None
}
