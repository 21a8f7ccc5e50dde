//! Exponential-time exact solvers used as ground truth for every
//! approximation claim in the crate.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::eval::{eval_spm, order_by_decreasing_price};
use crate::model::{AspmNode, AspmTree, Instance, SpmSchedule};
use crate::rational::Rat;

/// Caps on oracle work. Exceeding a cap is an error, not a silent
/// truncation, since every caller depends on the result being exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    /// Maximum number of price vectors a brute-force enumeration may visit.
    pub max_enumeration: u64,
    /// Maximum number of weighted DP transitions (`2^n * n * L * K`).
    pub max_dp_states: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_enumeration: 2_000_000,
            max_dp_states: 100_000_000,
        }
    }
}

impl OracleBudget {
    pub fn unlimited() -> Self {
        OracleBudget {
            max_enumeration: u64::MAX,
            max_dp_states: u64::MAX,
        }
    }
}

/// Optimal non-adaptive mechanism by exhaustive search.
///
/// Enumerates every price vector (each buyer's support values plus skip),
/// orders each by decreasing price and evaluates exactly. Decreasing-price
/// ordering is optimal for fixed prices, so the maximum over vectors is the
/// optimal SPM value.
pub fn brute_spm_opt(inst: &Instance, budget: &OracleBudget) -> Result<(SpmSchedule, Rat)> {
    inst.validate()?;
    let counts: Vec<u64> = inst
        .buyers()
        .iter()
        .map(|b| b.support().len() as u64 + 1)
        .collect();
    let mut total: u64 = 1;
    for &c in &counts {
        total = total
            .checked_mul(c)
            .filter(|&t| t <= budget.max_enumeration)
            .ok_or_else(|| {
                Error::BudgetExceeded(format!(
                    "price-vector enumeration exceeds {}",
                    budget.max_enumeration
                ))
            })?;
    }

    let tails: Vec<Vec<(Rat, Rat)>> = inst
        .buyers()
        .iter()
        .map(|b| {
            b.support()
                .iter()
                .zip(b.tails())
                .map(|(pt, t)| (pt.value.clone(), t))
                .collect()
        })
        .collect();

    let mut best_value = Rat::zero();
    let mut best_schedule = SpmSchedule::default();
    for code in 0..total {
        let mut rem = code;
        let mut prices: Vec<(usize, Rat)> = Vec::new();
        for (buyer, &c) in counts.iter().enumerate() {
            let pick = (rem % c) as usize;
            rem /= c;
            if pick > 0 {
                prices.push((buyer, tails[buyer][pick - 1].0.clone()));
            }
        }
        let schedule = order_by_decreasing_price(&prices);
        let value = eval_spm(inst, &schedule)?;
        if value > best_value {
            best_value = value;
            best_schedule = schedule;
        }
    }
    Ok((best_schedule, best_value))
}

struct AspmDp {
    /// value[mask * (K+1) + k], mask = set of remaining buyers.
    value: Vec<Rat>,
    /// Best (buyer, support index) per state; `None` only at k = 0.
    choice: Vec<Option<(usize, usize)>>,
    copies: usize,
}

fn aspm_dp(inst: &Instance, budget: &OracleBudget) -> Result<AspmDp> {
    let n = inst.n();
    if n >= 26 {
        return Err(Error::BudgetExceeded(format!(
            "subset DP is limited to fewer than 26 buyers, got {n}"
        )));
    }
    let k = inst.copies() as usize;
    let l = inst
        .buyers()
        .iter()
        .map(|b| b.support().len())
        .max()
        .unwrap_or(1);
    let cost = (1u64 << n)
        .checked_mul(n as u64)
        .and_then(|c| c.checked_mul(l as u64))
        .and_then(|c| c.checked_mul(k as u64))
        .ok_or_else(|| Error::BudgetExceeded("subset DP cost overflows".into()))?;
    if cost > budget.max_dp_states {
        return Err(Error::BudgetExceeded(format!(
            "subset DP needs {cost} weighted states, budget is {}",
            budget.max_dp_states
        )));
    }

    let tails: Vec<Vec<(Rat, Rat, Rat)>> = inst
        .buyers()
        .iter()
        .map(|b| {
            b.support()
                .iter()
                .zip(b.tails())
                .map(|(pt, t)| {
                    let miss = Rat::one() - &t;
                    (pt.value.clone(), t, miss)
                })
                .collect()
        })
        .collect();

    let states = (1usize << n) * (k + 1);
    let mut value = vec![Rat::zero(); states];
    let mut choice: Vec<Option<(usize, usize)>> = vec![None; states];
    for mask in 1usize..(1 << n) {
        for copies in 1..=k {
            let mut best = Rat::zero();
            let mut best_choice = None;
            for buyer in 0..n {
                if mask & (1 << buyer) == 0 {
                    continue;
                }
                let rest = mask ^ (1 << buyer);
                let after_sale = &value[rest * (k + 1) + copies - 1];
                let after_miss = &value[rest * (k + 1) + copies];
                for (idx, (price, tail, miss)) in tails[buyer].iter().enumerate() {
                    let candidate = tail * (price + after_sale) + miss * after_miss;
                    if best_choice.is_none() || candidate > best {
                        best = candidate;
                        best_choice = Some((buyer, idx));
                    }
                }
            }
            value[mask * (k + 1) + copies] = best;
            choice[mask * (k + 1) + copies] = best_choice;
        }
    }
    Ok(AspmDp {
        value,
        choice,
        copies: k,
    })
}

/// Exact optimal adaptive mechanism via subset DP.
///
/// Optimal decisions depend only on the remaining buyer set and copies
/// left, so states are (bitmask, copies). The returned tree shares equal
/// states, i.e. it is a DAG presented through the tree interface.
pub fn exact_aspm_opt(inst: &Instance, budget: &OracleBudget) -> Result<(AspmTree, Rat)> {
    inst.validate()?;
    let dp = aspm_dp(inst, budget)?;
    let k = dp.copies;
    let full = (1usize << inst.n()) - 1;
    let mut tree = AspmTree::empty();
    let mut memo: HashMap<(usize, usize), Option<usize>> = HashMap::new();
    let root = materialize(inst, &dp, &mut tree, &mut memo, full, k);
    tree.root = root;
    Ok((tree, dp.value[full * (k + 1) + k].clone()))
}

/// Optimal adaptive value only, skipping tree materialization.
pub fn exact_aspm_value(inst: &Instance, budget: &OracleBudget) -> Result<Rat> {
    inst.validate()?;
    let dp = aspm_dp(inst, budget)?;
    let k = dp.copies;
    let full = (1usize << inst.n()) - 1;
    Ok(dp.value[full * (k + 1) + k].clone())
}

fn materialize(
    inst: &Instance,
    dp: &AspmDp,
    tree: &mut AspmTree,
    memo: &mut HashMap<(usize, usize), Option<usize>>,
    mask: usize,
    copies: usize,
) -> Option<usize> {
    if mask == 0 || copies == 0 {
        return None;
    }
    if let Some(&id) = memo.get(&(mask, copies)) {
        return id;
    }
    let k = dp.copies;
    let id = match dp.choice[mask * (k + 1) + copies] {
        None => None,
        Some((buyer, idx)) => {
            let rest = mask ^ (1 << buyer);
            let on_sale = materialize(inst, dp, tree, memo, rest, copies - 1);
            let on_no_sale = materialize(inst, dp, tree, memo, rest, copies);
            let price = inst.buyer(buyer).support()[idx].value.clone();
            Some(tree.add_node(AspmNode {
                buyer,
                price,
                on_sale,
                on_no_sale,
            }))
        }
    };
    memo.insert((mask, copies), id);
    id
}

/// Ratio of optimal adaptive revenue to optimal non-adaptive revenue,
/// exactly. At least 1, and exactly 1 when a single copy is sold.
pub fn adaptivity_gap(inst: &Instance, budget: &OracleBudget) -> Result<Rat> {
    let (_, spm) = brute_spm_opt(inst, budget)?;
    let aspm = exact_aspm_value(inst, budget)?;
    if spm.is_zero() {
        return Err(Error::InvalidInstance(
            "optimal SPM value is zero, gap undefined".into(),
        ));
    }
    Ok(aspm / spm)
}
