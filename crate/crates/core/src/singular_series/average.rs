//! B_𝒜(k), S*(k) and the quasi-monotonicity report.

use serde::{Deserialize, Serialize};

use super::{log_factor, rounding_rel, tail_log_bound, SingularEngine, SingularValue};
use crate::error::{Error, Result};
use crate::par;
use crate::sum::CompensatedSum;
use crate::tuple_core::TupleH;

/// Ceiling on candidate k-subsets. Subsets mixing parities have 𝔖 = 0 and
/// are never visited, so the count is C(#even, k) + C(#odd, k) for k ≥ 2.
pub const SUBSET_BUDGET: u64 = 100_000_000;
const MAX_SUBSET_K: usize = 8;

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

fn candidate_count(a: &TupleH, k: usize) -> u64 {
    let n = a.len() as u64;
    if k < 2 {
        return binomial(n, k as u64);
    }
    let even = a.shifts().iter().filter(|&&x| x % 2 == 0).count() as u64;
    binomial(even, k as u64).saturating_add(binomial(n - even, k as u64))
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// B_𝒜(k) = Σ over ordered k-subsets H ⊂ 𝒜 of 𝔖(H).
pub fn average_b(a: &TupleH, k: usize, cutoff: u64) -> Result<SingularValue> {
    average_b_with_budget(&SingularEngine::new(cutoff)?, a, k, SUBSET_BUDGET)
}

pub fn average_b_with_budget(
    engine: &SingularEngine,
    a: &TupleH,
    k: usize,
    budget: u64,
) -> Result<SingularValue> {
    if k == 0 || k > a.len() {
        return Err(Error::domain(format!("need 1 <= k <= |A| = {}", a.len())));
    }
    if k > MAX_SUBSET_K {
        return Err(Error::domain(format!("k = {k} exceeds {MAX_SUBSET_K}")));
    }
    let needed = candidate_count(a, k);
    if needed > budget {
        return Err(Error::capacity(format!(
            "{needed} candidate subsets needed, budget is {budget}"
        )));
    }
    // Δ(H) divides Δ(𝒜), so one check covers every subset.
    engine.check_cutoff(a)?;

    let split = a.span().max(k as u64).min(engine.cutoff());
    let n_exact = engine.primes().partition_point(|&p| p <= split);
    let primes = &engine.primes()[..n_exact];
    let generic = engine.generic_log_above(k, split);

    let shifts = a.shifts();
    let np = primes.len();
    let residues: Vec<u32> = shifts
        .iter()
        .flat_map(|&x| primes.iter().map(move |&p| (x % p) as u32))
        .collect();
    let logs: Vec<f64> = primes
        .iter()
        .flat_map(|&p| (0..=k as u64).map(move |nu| log_factor(p, nu, k)))
        .collect();

    let walker = Walker { k, np, residues: &residues, logs: &logs, generic };
    let partials = par::map_range(shifts.len(), |first| walker.branch(first, shifts.len()));
    let mut total = CompensatedSum::new();
    for p in &partials {
        total.merge(p);
    }
    let mid = total.value() * factorial(k);
    let rad = mid * tail_log_bound(k, engine.cutoff()).exp_m1()
        + mid * rounding_rel(engine.primes().len(), generic.abs() + np as f64);
    Ok(SingularValue { mid, rad, cutoff: engine.cutoff() })
}

struct Walker<'a> {
    k: usize,
    np: usize,
    residues: &'a [u32],
    logs: &'a [f64],
    generic: f64,
}

impl Walker<'_> {
    /// Σ 𝔖(H) over unordered subsets whose smallest index is `first`.
    fn branch(&self, first: usize, n: usize) -> CompensatedSum {
        let mut acc = CompensatedSum::new();
        let mut chosen = vec![first];
        let mut nus = vec![vec![1u8; self.np]];
        if self.k == 1 {
            acc.add(self.leaf(&nus[0]));
            return acc;
        }
        self.descend(first + 1, n, &mut chosen, &mut nus, &mut acc);
        acc
    }

    fn descend(
        &self,
        start: usize,
        n: usize,
        chosen: &mut Vec<usize>,
        nus: &mut Vec<Vec<u8>>,
        acc: &mut CompensatedSum,
    ) {
        let depth = chosen.len();
        let remaining = self.k - depth;
        for i in start..=(n - remaining) {
            let row = &self.residues[i * self.np..(i + 1) * self.np];
            let mut next = nus[depth - 1].clone();
            let mut dead = false;
            for (j, &r) in row.iter().enumerate() {
                let seen = chosen.iter().any(|&c| self.residues[c * self.np + j] == r);
                if !seen {
                    next[j] += 1;
                    if self.logs[j * (self.k + 1) + next[j] as usize] == f64::NEG_INFINITY {
                        dead = true;
                        break;
                    }
                }
            }
            if dead {
                continue;
            }
            if remaining == 1 {
                acc.add(self.leaf(&next));
            } else {
                chosen.push(i);
                nus.push(next);
                self.descend(i + 1, n, chosen, nus, acc);
                nus.pop();
                chosen.pop();
            }
        }
    }

    fn leaf(&self, nus: &[u8]) -> f64 {
        let mut l = self.generic;
        for (j, &nu) in nus.iter().enumerate() {
            l += self.logs[j * (self.k + 1) + nu as usize];
        }
        l.exp()
    }
}

/// S*(k) = B_𝒜(k)/h^k with h = |𝒜|.
pub fn s_star(a: &TupleH, k: usize, cutoff: u64) -> Result<SingularValue> {
    let b = average_b(a, k, cutoff)?;
    Ok(scale_by_h(b, a.len(), k))
}

fn scale_by_h(b: SingularValue, h: usize, k: usize) -> SingularValue {
    let hk = (h as f64).powi(k as i32);
    SingularValue { mid: b.mid / hk, rad: b.rad / hk, cutoff: b.cutoff }
}

/// One JSON record per (𝒜, k).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageRecord {
    pub tuple: Vec<u64>,
    pub k: usize,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "B_radius")]
    pub b_radius: f64,
    #[serde(rename = "S_star")]
    pub s_star: f64,
    pub cutoff: u64,
}

impl AverageRecord {
    pub fn new(a: &TupleH, k: usize, b: SingularValue) -> Self {
        AverageRecord {
            tuple: a.shifts().to_vec(),
            k,
            b: b.mid,
            b_radius: b.rad,
            s_star: scale_by_h(b, a.len(), k).mid,
            cutoff: b.cutoff,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub floor: f64,
    /// S*(1), …, S*(k_max).
    pub s_star: Vec<SingularValue>,
    /// S*(k+1)/S*(k) for k = 1..k_max−1; `None` where S*(k) = 0.
    pub ratios: Vec<Option<f64>>,
    pub min_ratio: Option<f64>,
    /// Values of k whose ratio S*(k+1)/S*(k) falls below `floor`.
    pub below_floor: Vec<usize>,
    /// Values of k with S*(k) = 0.
    pub zero_k: Vec<usize>,
}

impl MonotoneReport {
    pub fn passes(&self) -> bool {
        self.below_floor.is_empty() && self.zero_k.is_empty()
    }
}

/// S*(1..=k_max) and the ratios S*(k+1)/S*(k), flagged against `floor`.
pub fn check_monotone(a: &TupleH, k_max: usize, cutoff: u64, floor: f64) -> Result<MonotoneReport> {
    if k_max == 0 || k_max > MAX_SUBSET_K || k_max > a.len() {
        return Err(Error::domain(format!(
            "need 1 <= k_max <= min({MAX_SUBSET_K}, |A|)"
        )));
    }
    let engine = SingularEngine::new(cutoff)?;
    let mut values = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let b = average_b_with_budget(&engine, a, k, SUBSET_BUDGET)?;
        values.push(scale_by_h(b, a.len(), k));
    }
    let zero_k: Vec<usize> = (1..=k_max).filter(|&k| values[k - 1].mid == 0.0).collect();
    let ratios: Vec<Option<f64>> = values
        .windows(2)
        .map(|w| (w[0].mid != 0.0).then(|| w[1].mid / w[0].mid))
        .collect();
    let below_floor = ratios
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_some_and(|r| r < floor))
        .map(|(i, _)| i + 1)
        .collect();
    let min_ratio = ratios.iter().flatten().copied().reduce(f64::min);
    Ok(MonotoneReport { floor, s_star: values, ratios, min_ratio, below_floor, zero_k })
}
