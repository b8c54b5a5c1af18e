//! Open dynamics on the number-state chain: collective dephasing and its
//! classical Markov shadow.
//!
//! The master equation evolved here is, componentwise in the number basis,
//!
//! ```text
//!   ρ̇_nm = i(ρH − Hρ)_nm − Γ(n−m)²·ρ_nm
//! ```
//!
//! i.e. unitary motion under the tridiagonal chain Hamiltonian plus exact
//! quadratic-in-distance damping of coherences generated by the diagonal
//! noise operator `L = Σ n|n⟩⟨n|`. With the drive off this gives the closed
//! form `ρ_nm(t) = ρ_nm(0)·exp(−Γ(n−m)²t)` and strictly constant
//! populations, which the tests pin down.
//!
//! The damping rates reach `Γ(N−1)²`, which makes the system far too stiff
//! for an explicit adaptive scheme at heavy dephasing. The integrator is
//! therefore a fixed-step exponential Runge–Kutta (ETDRK4): the diagonal
//! damping is applied through exact exponentials and only the bounded
//! Hamiltonian commutator is treated explicitly, so the step size is set by
//! the hop strengths alone, independent of Γ. Only the upper triangle of ρ
//! is stored and evolved; the mirror half exists through conjugation, so
//! Hermiticity is structural.
//!
//! In the heavy-dephasing regime the populations follow a classical
//! birth–death chain with hop rates `w = 2g²/Γ`; `markov_evolve` integrates
//! that reduction and `compare_lindblad_markov` measures the distance
//! between the two descriptions.

use crate::chain::{ChainSpec, PolarisationSeries};
use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions};
use num_complex::Complex64;

/// Chain plus dephasing rate.
#[derive(Clone, Debug)]
pub struct DephasingSpec {
    pub chain: ChainSpec,
    pub gamma: f64,
}

impl DephasingSpec {
    pub fn new(chain: ChainSpec, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidInput(format!(
                "dephasing rate must be positive and finite, got {gamma}"
            )));
        }
        Ok(DephasingSpec { chain, gamma })
    }

    /// Diagonal of the noise operator: entry `k` is `n = k+1`.
    pub fn noise_diagonal(&self) -> Vec<f64> {
        (1..=self.chain.length).map(|n| n as f64).collect()
    }
}

/// Hermitian density matrix over the number states, stored as the packed
/// upper triangle (row-major, diagonal included).
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
    pub time: f64,
}

#[inline]
fn packed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < n);
    i * (2 * n - i + 1) / 2 + (j - i)
}

impl DensityMatrix {
    /// The pure state concentrated on `n = 1`.
    pub fn pure_ground(n: usize) -> Self {
        let m = n * (n + 1) / 2;
        let mut re = vec![0.0; m];
        re[0] = 1.0;
        DensityMatrix {
            n,
            re,
            im: vec![0.0; m],
            time: 0.0,
        }
    }

    /// Build from a dense Hermitian matrix given row-major; the strictly
    /// lower triangle is ignored.
    pub fn from_upper(n: usize, entries: &[Complex64], time: f64) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "expected {}x{n} entries, got {}",
                n,
                entries.len()
            )));
        }
        let m = n * (n + 1) / 2;
        let mut re = vec![0.0; m];
        let mut im = vec![0.0; m];
        for i in 0..n {
            for j in i..n {
                let e = entries[i * n + j];
                let idx = packed_index(n, i, j);
                re[idx] = e.re;
                im[idx] = if i == j { 0.0 } else { e.im };
            }
        }
        Ok(DensityMatrix { n, re, im, time })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Entry `(i, j)`, zero-indexed; the lower triangle mirrors by
    /// conjugation.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if i <= j {
            let idx = packed_index(self.n, i, j);
            Complex64::new(self.re[idx], self.im[idx])
        } else {
            self.get(j, i).conj()
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n)
            .map(|i| self.re[packed_index(self.n, i, i)])
            .sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.re[packed_index(self.n, i, i)])
            .collect()
    }

    /// `Σ n·ρ_nn` with `n = 1..=N`.
    pub fn mean_excitation(&self) -> f64 {
        self.diagonal()
            .iter()
            .enumerate()
            .map(|(k, p)| (k + 1) as f64 * p)
            .sum()
    }

    /// Smallest eigenvalue, from the real-symmetric embedding
    /// `[[Re ρ, −Im ρ], [Im ρ, Re ρ]]` (its spectrum is that of ρ, doubled).
    pub fn min_eigenvalue(&self) -> f64 {
        use nalgebra::DMatrix;
        let n = self.n;
        let mut big = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let e = self.get(i, j);
                big[(i, j)] = e.re;
                big[(n + i, n + j)] = e.re;
                big[(i, n + j)] = -e.im;
                big[(n + i, j)] = e.im;
            }
        }
        big.symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

// ---------------------------------------------------------------------------
// exponential integrator
// ---------------------------------------------------------------------------

/// Per-entry ETDRK4 weights for one step size.
struct EtdWeights {
    h: f64,
    e_full: Vec<f64>,
    e_half: Vec<f64>,
    q: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
}

/// `(e^z − 1)/z`, stable for all `z ≤ 0`.
fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 + 0.5 * z
    } else {
        z.exp_m1() / z
    }
}

/// The three ETDRK4 weight kernels `[−4−z+e^z(4−3z+z²)]/z³`,
/// `[2+z+e^z(−2+z)]/z³`, `[−4−3z−z²+e^z(4−z)]/z³`, via their Taylor series
/// near zero where the closed forms cancel catastrophically.
fn etd_kernels(z: f64) -> (f64, f64, f64) {
    if z < -0.5 {
        let ez = z.exp();
        let z3 = z * z * z;
        (
            (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3,
            (2.0 + z + ez * (-2.0 + z)) / z3,
            (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3,
        )
    } else {
        // coefficient of z^m in each bracket, m ≥ 3
        let mut fact = [0.0f64; 24];
        fact[0] = 1.0;
        for k in 1..24 {
            fact[k] = fact[k - 1] * k as f64;
        }
        let mut g1 = 0.0;
        let mut g2 = 0.0;
        let mut g3 = 0.0;
        let mut zp = 1.0;
        for m in 3..22 {
            let c1 = 4.0 / fact[m] - 3.0 / fact[m - 1] + 1.0 / fact[m - 2];
            let c2 = -2.0 / fact[m] + 1.0 / fact[m - 1];
            let c3 = 4.0 / fact[m] - 1.0 / fact[m - 1];
            g1 += c1 * zp;
            g2 += c2 * zp;
            g3 += c3 * zp;
            zp *= z;
        }
        (g1, g2, g3)
    }
}

impl EtdWeights {
    fn build(lam: &[f64], h: f64) -> Self {
        let m = lam.len();
        let mut w = EtdWeights {
            h,
            e_full: vec![0.0; m],
            e_half: vec![0.0; m],
            q: vec![0.0; m],
            f1: vec![0.0; m],
            f2: vec![0.0; m],
            f3: vec![0.0; m],
        };
        for (k, &l) in lam.iter().enumerate() {
            let z = l * h;
            w.e_full[k] = z.exp();
            w.e_half[k] = (0.5 * z).exp();
            w.q[k] = 0.5 * h * phi1(0.5 * z);
            let (g1, g2, g3) = etd_kernels(z);
            w.f1[k] = h * g1;
            w.f2[k] = h * g2;
            w.f3[k] = h * g3;
        }
        w
    }
}

/// Packed-triangle commutator RHS: `A(u) = i(uH − Hu)` for Hermitian `u`.
/// Entries below the diagonal are reached through conjugation.
struct CommutatorRhs<'a> {
    n: usize,
    c: &'a [f64],
}

impl CommutatorRhs<'_> {
    #[inline]
    fn fetch(&self, re: &[f64], im: &[f64], i: isize, j: isize) -> (f64, f64) {
        let n = self.n as isize;
        if i < 0 || j < 0 || i >= n || j >= n {
            return (0.0, 0.0);
        }
        let (a, b, conj) = if i <= j {
            (i as usize, j as usize, false)
        } else {
            (j as usize, i as usize, true)
        };
        let idx = packed_index(self.n, a, b);
        if conj {
            (re[idx], -im[idx])
        } else {
            (re[idx], im[idx])
        }
    }

    /// dst ← i(uH − Hu), where u is packed as (re, im) planes.
    fn apply(&self, u: &[f64], dst: &mut [f64]) {
        let n = self.n;
        let m = u.len() / 2;
        let (re, im) = u.split_at(m);
        let (dre, dim) = dst.split_at_mut(m);
        let c = |k: isize| -> f64 {
            if k < 0 || k as usize >= self.c.len() {
                0.0
            } else {
                self.c[k as usize]
            }
        };
        for i in 0..n {
            for j in i..n {
                let ii = i as isize;
                let jj = j as isize;
                // (uH)_ij = c_{j−1} u_{i,j−1} + c_j u_{i,j+1}
                let (l_re, l_im) = self.fetch(re, im, ii, jj - 1);
                let (r_re, r_im) = self.fetch(re, im, ii, jj + 1);
                let uh_re = c(jj - 1) * l_re + c(jj) * r_re;
                let uh_im = c(jj - 1) * l_im + c(jj) * r_im;
                // (Hu)_ij = c_{i−1} u_{i−1,j} + c_i u_{i+1,j}
                let (t_re, t_im) = self.fetch(re, im, ii - 1, jj);
                let (b_re, b_im) = self.fetch(re, im, ii + 1, jj);
                let hu_re = c(ii - 1) * t_re + c(ii) * b_re;
                let hu_im = c(ii - 1) * t_im + c(ii) * b_im;
                // i·(uH − Hu)
                let idx = packed_index(n, i, j);
                dre[idx] = -(uh_im - hu_im);
                dim[idx] = uh_re - hu_re;
            }
        }
    }
}

/// Fixed step from the hop scale and the requested tolerance; the damping
/// never constrains it because it is integrated exactly.
fn etd_step_target(spec: &DephasingSpec, tol: f64) -> f64 {
    let g_max = spec
        .chain
        .couplings()
        .iter()
        .cloned()
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let scale = 0.02 * (tol * 1e9).powf(0.25);
    (scale.clamp(5e-5, 0.1)) / g_max
}

fn validate_open_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidInput("empty time grid".into()));
    }
    if !t_grid.iter().all(|t| t.is_finite()) {
        return Err(Error::InvalidInput("non-finite grid time".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "time grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn validate_open_tol(tol: f64) -> Result<()> {
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(Error::InvalidInput(format!(
            "relative tolerance must lie in [1e-12, 1e-6], got {tol}"
        )));
    }
    Ok(())
}

/// Drive the master equation, handing each grid-time state to `observe`
/// together with the largest pre-projection trace defect since the previous
/// grid point.
fn lindblad_run<O>(
    spec: &DephasingSpec,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    tol: f64,
    mut observe: O,
) -> Result<()>
where
    O: FnMut(f64, &DensityMatrix, f64),
{
    validate_open_grid(t_grid)?;
    validate_open_tol(tol)?;
    let n = spec.chain.length;
    if rho0.dim() != n {
        return Err(Error::InvalidInput(format!(
            "density matrix dimension {} does not match chain length {n}",
            rho0.dim()
        )));
    }
    let m = n * (n + 1) / 2;

    // damping rate per packed entry, duplicated over the re/im planes
    let mut lam = vec![0.0f64; 2 * m];
    for i in 0..n {
        for j in i..n {
            let d = (j - i) as f64;
            let rate = -spec.gamma * d * d;
            let idx = packed_index(n, i, j);
            lam[idx] = rate;
            lam[m + idx] = rate;
        }
    }

    let rhs = CommutatorRhs {
        n,
        c: spec.chain.couplings(),
    };
    let h_target = etd_step_target(spec, tol);

    let mut u = vec![0.0f64; 2 * m];
    u[..m].copy_from_slice(&rho0.re);
    u[m..].copy_from_slice(&rho0.im);

    let mut weights: Option<EtdWeights> = None;
    let mut nu = vec![0.0; 2 * m];
    let mut na = vec![0.0; 2 * m];
    let mut nb = vec![0.0; 2 * m];
    let mut nc = vec![0.0; 2 * m];
    let mut sa = vec![0.0; 2 * m];
    let mut sb = vec![0.0; 2 * m];
    let mut sc = vec![0.0; 2 * m];

    let trace_of = |v: &[f64]| -> f64 {
        (0..n).map(|i| v[packed_index(n, i, i)]).sum()
    };

    let snapshot = |v: &[f64], t: f64| -> DensityMatrix {
        DensityMatrix {
            n,
            re: v[..m].to_vec(),
            im: v[m..].to_vec(),
            time: t,
        }
    };

    observe(t_grid[0], &snapshot(&u, t_grid[0]), 0.0);

    for seg in t_grid.windows(2) {
        let (t0, t1) = (seg[0], seg[1]);
        let n_sub = ((t1 - t0) / h_target).ceil().max(1.0) as usize;
        let h = (t1 - t0) / n_sub as f64;
        let rebuild = match &weights {
            Some(w) => (w.h - h).abs() > 1e-12 * h.max(1e-300),
            None => true,
        };
        if rebuild {
            weights = Some(EtdWeights::build(&lam, h));
        }
        let w = weights.as_ref().unwrap();

        let mut worst_trace = 0.0f64;
        for _ in 0..n_sub {
            rhs.apply(&u, &mut nu);
            for k in 0..2 * m {
                sa[k] = w.e_half[k] * u[k] + w.q[k] * nu[k];
            }
            rhs.apply(&sa, &mut na);
            for k in 0..2 * m {
                sb[k] = w.e_half[k] * u[k] + w.q[k] * na[k];
            }
            rhs.apply(&sb, &mut nb);
            for k in 0..2 * m {
                sc[k] = w.e_half[k] * sa[k] + w.q[k] * (2.0 * nb[k] - nu[k]);
            }
            rhs.apply(&sc, &mut nc);
            for k in 0..2 * m {
                u[k] = w.e_full[k] * u[k]
                    + w.f1[k] * nu[k]
                    + 2.0 * w.f2[k] * (na[k] + nb[k])
                    + w.f3[k] * nc[k];
            }
            // trace projection: the generator conserves trace exactly, the
            // discretization only approximately
            let tr = trace_of(&u);
            worst_trace = worst_trace.max((tr - 1.0).abs());
            if !tr.is_finite() || tr <= 0.0 {
                return Err(Error::Integrator {
                    t_reached: t0,
                    message: format!("state lost positivity of trace ({tr})"),
                });
            }
            for v in u.iter_mut() {
                *v /= tr;
            }
        }
        observe(t1, &snapshot(&u, t1), worst_trace);
    }
    Ok(())
}

/// Evolve from the pure `n = 1` state, returning a snapshot per grid time.
pub fn lindblad_evolve(
    spec: &DephasingSpec,
    t_grid: &[f64],
    tol: f64,
) -> Result<Vec<DensityMatrix>> {
    let rho0 = DensityMatrix::pure_ground(spec.chain.length);
    lindblad_evolve_from(spec, &rho0, t_grid, tol)
}

/// Evolve from an arbitrary Hermitian initial state.
pub fn lindblad_evolve_from(
    spec: &DephasingSpec,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    tol: f64,
) -> Result<Vec<DensityMatrix>> {
    let mut out = Vec::with_capacity(t_grid.len());
    lindblad_run(spec, rho0, t_grid, tol, |_, rho, _| out.push(rho.clone()))?;
    Ok(out)
}

/// Polarisation series plus the integrator's trace-defect diagnostic.
#[derive(Clone, Debug)]
pub struct OpenSeries {
    pub series: PolarisationSeries,
    /// Largest pre-projection |trace − 1| seen since the previous grid time.
    pub trace_err: Vec<f64>,
}

/// Streamed observables of a Lindblad run from the pure `n = 1` state.
pub fn lindblad_series(
    spec: &DephasingSpec,
    t_grid: &[f64],
    tol: f64,
    guard: usize,
) -> Result<OpenSeries> {
    let n = spec.chain.length;
    if guard == 0 || guard >= n {
        return Err(Error::InvalidInput(format!(
            "guard must satisfy 1 ≤ guard < {n}, got {guard}"
        )));
    }
    let rho0 = DensityMatrix::pure_ground(n);
    let mut out = OpenSeries {
        series: PolarisationSeries {
            times: Vec::with_capacity(t_grid.len()),
            mean_n: Vec::with_capacity(t_grid.len()),
            leakage: Vec::with_capacity(t_grid.len()),
        },
        trace_err: Vec::with_capacity(t_grid.len()),
    };
    lindblad_run(spec, &rho0, t_grid, tol, |t, rho, tr_err| {
        let diag = rho.diagonal();
        out.series.times.push(t);
        out.series
            .mean_n
            .push(diag.iter().enumerate().map(|(k, p)| (k + 1) as f64 * p).sum());
        out.series
            .leakage
            .push(diag[n - guard..].iter().sum());
        out.trace_err.push(tr_err);
    })?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// classical reduction
// ---------------------------------------------------------------------------

/// Classical probability distribution over the number states.
#[derive(Clone, Debug)]
pub struct ProbabilityVector {
    pub p: Vec<f64>,
    pub time: f64,
}

/// Symmetric hop rates of the heavy-dephasing birth–death chain.
#[derive(Clone, Debug)]
pub struct MarkovSpec {
    rates: Vec<f64>,
}

impl MarkovSpec {
    /// Rate of the hop between sites `k` and `k+1` (both directions).
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn site_count(&self) -> usize {
        self.rates.len() + 1
    }
}

/// Heavy-dephasing reduction: `w = 2g²/Γ` per hop.
pub fn markov_rates(spec: &DephasingSpec) -> MarkovSpec {
    MarkovSpec {
        rates: spec
            .chain
            .couplings()
            .iter()
            .map(|g| 2.0 * g * g / spec.gamma)
            .collect(),
    }
}

/// Integrate the birth–death master equation from `p = δ_{n,1}`. No
/// probability leaves the truncated chain; the far end is only monitored.
pub fn markov_evolve(m: &MarkovSpec, t_grid: &[f64]) -> Result<Vec<ProbabilityVector>> {
    validate_open_grid(t_grid)?;
    let n = m.site_count();
    let w = m.rates.clone();
    let mut p0 = vec![0.0; n];
    p0[0] = 1.0;

    let mut grid: Vec<f64> = Vec::with_capacity(t_grid.len() + 1);
    let prepended = t_grid[0] > 0.0;
    if prepended {
        grid.push(0.0);
    }
    grid.extend_from_slice(t_grid);
    if grid.len() == 1 {
        return Ok(vec![ProbabilityVector { p: p0, time: 0.0 }]);
    }
    if grid[0] < 0.0 {
        return Err(Error::InvalidInput(format!(
            "grid must start at a non-negative time, got {}",
            grid[0]
        )));
    }

    let rows = ode::integrate_to_grid_projected(
        |_, p, dp| {
            for i in 0..n {
                let mut acc = 0.0;
                if i > 0 {
                    acc += w[i - 1] * (p[i - 1] - p[i]);
                }
                if i + 1 < n {
                    acc += w[i] * (p[i + 1] - p[i]);
                }
                dp[i] = acc;
            }
        },
        &p0,
        &grid,
        &OdeOptions {
            rtol: 1e-9,
            atol: 1e-12,
            ..OdeOptions::default()
        },
        |p| {
            // the flow preserves positivity and total mass; clip the
            // integrator's tiny undershoots and restore the mass exactly
            let mut total = 0.0;
            for v in p.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
                total += *v;
            }
            if total > 0.0 {
                for v in p.iter_mut() {
                    *v /= total;
                }
            }
        },
    )?;

    let skip = usize::from(prepended);
    Ok(rows
        .into_iter()
        .skip(skip)
        .zip(t_grid.iter())
        .map(|(p, &t)| ProbabilityVector { p, time: t })
        .collect())
}

/// Observables of a Markov run in the same shape the scaling fits consume.
pub fn markov_series(
    m: &MarkovSpec,
    t_grid: &[f64],
    guard: usize,
) -> Result<PolarisationSeries> {
    let n = m.site_count();
    if guard == 0 || guard >= n {
        return Err(Error::InvalidInput(format!(
            "guard must satisfy 1 ≤ guard < {n}, got {guard}"
        )));
    }
    let states = markov_evolve(m, t_grid)?;
    let mut series = PolarisationSeries {
        times: Vec::with_capacity(states.len()),
        mean_n: Vec::with_capacity(states.len()),
        leakage: Vec::with_capacity(states.len()),
    };
    for s in &states {
        series.times.push(s.time);
        series
            .mean_n
            .push(s.p.iter().enumerate().map(|(k, p)| (k + 1) as f64 * p).sum());
        series.leakage.push(s.p[n - guard..].iter().sum());
    }
    Ok(series)
}

/// Largest L1 distance over the grid between the Lindblad populations and
/// the classical reduction started from the same state.
pub fn compare_lindblad_markov(spec: &DephasingSpec, t_grid: &[f64]) -> Result<f64> {
    let tol = 1e-9;
    let markov = markov_evolve(&markov_rates(spec), t_grid)?;
    let rho0 = DensityMatrix::pure_ground(spec.chain.length);
    let mut worst = 0.0f64;
    let mut idx = 0usize;
    lindblad_run(spec, &rho0, t_grid, tol, |_, rho, _| {
        let diag = rho.diagonal();
        let l1: f64 = diag
            .iter()
            .zip(&markov[idx].p)
            .map(|(a, b)| (a - b).abs())
            .sum();
        worst = worst.max(l1);
        idx += 1;
    })?;
    Ok(worst)
}
