//! Levels of the Young lattice, path-count weights, and coupled states.
//!
//! Level `n` holds all partitions of `n`. The weight of a partition is the
//! number of saturated paths from the single-box partition `(1)` up to it,
//! accumulating one box per step. Weights are exact big integers; the square
//! sum over a level equals `n!`, which is the identity the whole reduction
//! rests on.
//!
//! The coupled state `|n>` is the unit vector over level `n` whose component
//! on each partition is proportional to its weight. It is built here the same
//! way the physics produces it: apply the hop operator to `|n-1>`, read off
//! the unnormalised amplitudes (sum of parent coefficients), and normalise.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::partition::{partitions_of, Partition, MAX_PARTITION_N};

/// One level of the Young lattice: every partition of `n` with its exact
/// path-count weight, in canonical order.
#[derive(Clone, Debug)]
pub struct LatticeLevel {
    n: u32,
    entries: Vec<(Partition, BigUint)>,
}

impl LatticeLevel {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn entries(&self) -> &[(Partition, BigUint)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Weight of one partition, if it belongs to this level.
    pub fn weight(&self, p: &Partition) -> Option<&BigUint> {
        self.entries
            .binary_search_by(|(q, _)| q.cmp(p))
            .ok()
            .map(|i| &self.entries[i].1)
    }

    /// Sum of squared weights; equals `n!` exactly.
    pub fn weight_square_sum(&self) -> BigUint {
        let mut acc = BigUint::zero();
        for (_, w) in &self.entries {
            acc += w * w;
        }
        acc
    }
}

/// Levels `1..=n` of the lattice, built bottom-up.
pub fn levels_up_to(n: u32) -> Result<Vec<LatticeLevel>> {
    if n == 0 {
        return Err(Error::InvalidInput("level index must be at least 1".into()));
    }
    if n > MAX_PARTITION_N {
        return Err(Error::SizeLimit(format!(
            "level enumeration capped at n = {MAX_PARTITION_N}, got {n}"
        )));
    }
    let mut levels = Vec::with_capacity(n as usize);
    let mut current: HashMap<Partition, BigUint> =
        HashMap::from([(Partition::single(), BigUint::one())]);
    for k in 1..=n {
        let mut entries: Vec<(Partition, BigUint)> = current
            .iter()
            .map(|(p, w)| (p.clone(), w.clone()))
            .collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        levels.push(LatticeLevel { n: k, entries });
        if k == n {
            break;
        }
        let mut next: HashMap<Partition, BigUint> = HashMap::new();
        for (p, w) in &current {
            for child in p.children() {
                *next.entry(child).or_insert_with(BigUint::zero) += w;
            }
        }
        current = next;
    }
    Ok(levels)
}

/// Level `n` alone.
pub fn level(n: u32) -> Result<LatticeLevel> {
    Ok(levels_up_to(n)?.pop().expect("levels_up_to returns n levels"))
}

/// `n!` as an exact big integer.
pub fn factorial(n: u32) -> BigUint {
    let mut acc = BigUint::one();
    for k in 2..=n {
        acc *= BigUint::from(k);
    }
    acc
}

/// The normalised coupled state over level `n`.
///
/// Coefficients are stored in canonical partition order and are all positive;
/// they equal `weight / sqrt(n!)`.
#[derive(Clone, Debug)]
pub struct CoupledState {
    n: u32,
    coeffs: Vec<(Partition, f64)>,
}

impl CoupledState {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn coeffs(&self) -> &[(Partition, f64)] {
        &self.coeffs
    }

    /// Coefficient on one partition, if it belongs to this level.
    pub fn coeff(&self, p: &Partition) -> Option<f64> {
        self.coeffs
            .binary_search_by(|(q, _)| q.cmp(p))
            .ok()
            .map(|i| self.coeffs[i].1)
    }

    pub fn norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(_, c)| c * c)
            .sum::<f64>()
            .sqrt()
    }
}

/// Builds `|n>` iteratively from `|1>`: the raw amplitude on each partition of
/// level `k+1` is the sum of the coefficients of its parents in `|k>`, and the
/// level is then normalised.
pub fn coupled_state(n: u32) -> Result<CoupledState> {
    if n == 0 {
        return Err(Error::InvalidInput("coupled state needs n >= 1".into()));
    }
    if n > MAX_PARTITION_N {
        return Err(Error::SizeLimit(format!(
            "coupled state capped at n = {MAX_PARTITION_N}, got {n}"
        )));
    }
    let mut current: HashMap<Partition, f64> = HashMap::from([(Partition::single(), 1.0)]);
    for k in 1..n {
        let mut next: Vec<(Partition, f64)> = Vec::new();
        for q in partitions_of(k + 1)? {
            let raw: f64 = q.parents().iter().filter_map(|p| current.get(p)).sum();
            next.push((q, raw));
        }
        let norm = next.iter().map(|(_, c)| c * c).sum::<f64>().sqrt();
        current = next.into_iter().map(|(q, c)| (q, c / norm)).collect();
    }
    let mut coeffs: Vec<(Partition, f64)> = current.into_iter().collect();
    coeffs.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(CoupledState { n, coeffs })
}

/// The hop matrix element between `|n>` and `|n+1>` divided by its bare value:
/// returns `omega * sqrt(n)` for the element between `|n-1>` and `|n>`, i.e.
/// the coupling that multiplies the hop `n-1 <-> n`.
pub fn effective_coupling(n: u32, omega: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("coupling index starts at 1".into()));
    }
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidInput(format!(
            "omega must be positive and finite, got {omega}"
        )));
    }
    Ok(omega * (n as f64).sqrt())
}

/// Plain-text dump: one `partition<TAB>weight` line per partition, levels in
/// order and separated by a blank line.
pub fn render_level_dump(levels: &[LatticeLevel]) -> String {
    let mut out = String::new();
    for (i, level) in levels.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for (p, w) in &level.entries {
            out.push_str(&format!("{p}\t{w}\n"));
        }
    }
    out
}

/// Ratio `weight / sqrt(n!)` computed from exact integers; used to cross-check
/// the float recursion in [`coupled_state`].
pub fn exact_coefficient(weight: &BigUint, n: u32) -> f64 {
    let w = weight.to_f64().expect("weight fits in f64 range");
    let f = factorial(n).to_f64().expect("factorial fits in f64 range");
    w / f.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    /// Hook-length count of saturated paths: n! / product of hook lengths.
    /// Completely independent of the level-by-level accumulation.
    fn hook_length_weight(q: &Partition) -> BigUint {
        let parts = q.parts();
        let n = q.n();
        // column heights: number of parts >= c+1 for column c
        let cols: Vec<u32> = (0..parts.first().copied().unwrap_or(0))
            .map(|c| parts.iter().filter(|&&p| p > c).count() as u32)
            .collect();
        let mut denom = BigUint::one();
        for (r, &row_len) in parts.iter().enumerate() {
            for c in 0..row_len {
                let arm = row_len - c - 1;
                let leg = cols[c as usize] - r as u32 - 1;
                denom *= BigUint::from(arm + leg + 1);
            }
        }
        factorial(n) / denom
    }

    #[test]
    fn level_three_weights() {
        let lvl = level(3).unwrap();
        assert_eq!(lvl.len(), 3);
        assert_eq!(lvl.weight(&p(&[3])).unwrap(), &BigUint::from(1u32));
        assert_eq!(lvl.weight(&p(&[2, 1])).unwrap(), &BigUint::from(2u32));
        assert_eq!(lvl.weight(&p(&[1, 1, 1])).unwrap(), &BigUint::from(1u32));
        assert_eq!(lvl.weight_square_sum(), BigUint::from(6u32));
    }

    #[test]
    fn level_one_is_single_box() {
        let lvl = level(1).unwrap();
        assert_eq!(lvl.len(), 1);
        assert_eq!(lvl.weight(&Partition::single()).unwrap(), &BigUint::one());
    }

    #[test]
    fn level_zero_rejected() {
        assert!(matches!(level(0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn square_sum_is_factorial_up_to_20() {
        let levels = levels_up_to(20).unwrap();
        for lvl in &levels {
            assert_eq!(
                lvl.weight_square_sum(),
                factorial(lvl.n()),
                "identity fails at level {}",
                lvl.n()
            );
        }
    }

    #[test]
    fn weights_match_hook_length_oracle() {
        for lvl in levels_up_to(10).unwrap() {
            for (q, w) in lvl.entries() {
                assert_eq!(w, &hook_length_weight(q), "weight mismatch for {q:?}");
            }
        }
    }

    #[test]
    fn level_six_square_sum_is_720() {
        assert_eq!(level(6).unwrap().weight_square_sum(), BigUint::from(720u32));
    }

    #[test]
    fn coupled_state_two_is_symmetric_pair() {
        let cs = coupled_state(2).unwrap();
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        assert!((cs.coeff(&p(&[2])).unwrap() - inv_sqrt2).abs() < 1e-15);
        assert!((cs.coeff(&p(&[1, 1])).unwrap() - inv_sqrt2).abs() < 1e-15);
    }

    #[test]
    fn coupled_state_one_is_trivial() {
        let cs = coupled_state(1).unwrap();
        assert_eq!(cs.coeffs().len(), 1);
        assert!((cs.coeff(&Partition::single()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coupled_state_matches_exact_weights() {
        for n in 1..=15u32 {
            let cs = coupled_state(n).unwrap();
            let lvl = level(n).unwrap();
            assert!((cs.norm() - 1.0).abs() < 1e-12, "norm at n = {n}");
            for (q, c) in cs.coeffs() {
                let exact = exact_coefficient(lvl.weight(q).unwrap(), n);
                assert!(
                    (c - exact).abs() < 1e-12,
                    "coefficient mismatch at n = {n}, {q:?}: {c} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn coupled_state_four_orthogonal_complement() {
        // The raw level-4 vector produced by one hop from |3> must be parallel
        // to |4>: check by projecting out |4> and verifying nothing remains.
        let c3 = coupled_state(3).unwrap();
        let c4 = coupled_state(4).unwrap();
        let raw: Vec<f64> = c4
            .coeffs()
            .iter()
            .map(|(q, _)| {
                q.parents()
                    .iter()
                    .filter_map(|par| c3.coeff(par))
                    .sum::<f64>()
            })
            .collect();
        let dot: f64 = raw
            .iter()
            .zip(c4.coeffs())
            .map(|(r, (_, c))| r * c)
            .sum();
        for (i, r) in raw.iter().enumerate() {
            let residual = r - dot * c4.coeffs()[i].1;
            assert!(
                residual.abs() < 1e-12,
                "component {i} of H|3> leaks out of |4>: {residual}"
            );
        }
        // and the hop amplitude itself is sqrt(4)
        assert!((dot - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hop_elements_scale_as_sqrt_n() {
        // <n|H|n+1> accumulated over parent links with unit drive amplitude.
        for n in 1..=15u32 {
            let cn = coupled_state(n).unwrap();
            let cn1 = coupled_state(n + 1).unwrap();
            let elem: f64 = cn1
                .coeffs()
                .iter()
                .map(|(q, c1)| {
                    c1 * q
                        .parents()
                        .iter()
                        .filter_map(|par| cn.coeff(par))
                        .sum::<f64>()
                })
                .sum();
            let expect = ((n + 1) as f64).sqrt();
            assert!(
                (elem - expect).abs() < 1e-10,
                "hop element at n = {n}: {elem} vs {expect}"
            );
        }
    }

    #[test]
    fn effective_coupling_examples() {
        assert!((effective_coupling(1, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((effective_coupling(2, 1.0).unwrap() - 2.0f64.sqrt()).abs() < 1e-15);
        // ratio of normalisation factors sqrt(9!)/sqrt(8!) = 3, scaled by 0.5
        let from_factorials = (factorial(9).to_f64().unwrap() / factorial(8).to_f64().unwrap())
            .sqrt();
        assert!((effective_coupling(9, 0.5).unwrap() - 0.5 * from_factorials).abs() < 1e-12);
        assert!((effective_coupling(9, 0.5).unwrap() - 1.5).abs() < 1e-12);
        assert!(effective_coupling(0, 1.0).is_err());
        assert!(effective_coupling(3, 0.0).is_err());
        assert!(effective_coupling(3, -1.0).is_err());
    }

    #[test]
    fn dump_format_golden() {
        let levels = levels_up_to(3).unwrap();
        let dump = render_level_dump(&levels);
        assert_eq!(dump, "1\t1\n\n2\t1\n1,1\t1\n\n3\t1\n2,1\t2\n1,1,1\t1\n");
    }
}
