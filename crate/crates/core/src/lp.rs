//! LP relaxation of the K-unit posted-pricing problem, solved exactly.
//!
//! The relaxation (one price variable per buyer and support value, expected
//! sales at most `K`) upper-bounds the expected revenue of every adaptive
//! mechanism. Its Lagrangian decomposes per buyer, so the optimum is found
//! by an exact breakpoint search over the sale-cost multiplier `tau`:
//! candidates are all support values and all within-buyer crossings of the
//! marginal functions `(v - tau) * p`. The schedule built from the solution
//! posts each buyer's assigned price in decreasing order.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::model::{Instance, SpmSchedule};
use crate::rational::{rat_i, Rat};

/// One buyer's part of the LP solution: a single price carrying fraction
/// `x` of the buyer (full buyers have `fraction == 1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpAssignment {
    pub buyer: usize,
    pub price: Rat,
    pub tail: Rat,
    pub fraction: Rat,
}

/// The one buyer (if any) that the optimum mixes across two prices tied at
/// `tau_star`. Without the paper's random perturbation such ties are real:
/// the sales constraint can become binding exactly where a buyer's best
/// price switches, and then no single-price choice reaches the optimum.
/// `low` is the smaller price with the larger success probability and
/// carries `low_fraction` of the buyer; `high` carries the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSplit {
    pub buyer: usize,
    pub low_price: Rat,
    pub low_tail: Rat,
    pub high_price: Rat,
    pub high_tail: Rat,
    pub low_fraction: Rat,
}

/// Optimal structured solution of the relaxation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredLpSolution {
    /// Single-price buyers, at most one of them fractional.
    pub assignments: Vec<LpAssignment>,
    /// At most one buyer mixing two tied prices (see [`LpSplit`]).
    pub split: Option<LpSplit>,
    pub tau_star: Rat,
    /// Exact LP optimum; equals the total contribution of `assignments`
    /// and `split`.
    pub objective: Rat,
    /// Expected sales of the solution, `min(K, sales at tau = 0)`.
    pub expected_sales: Rat,
}

impl StructuredLpSolution {
    /// Re-checks the structural invariants independently of the solver.
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        let mut sales = Rat::zero();
        let mut value = Rat::zero();
        let mut fractional: Vec<&LpAssignment> = Vec::new();
        for a in &self.assignments {
            if a.buyer >= inst.n() {
                return Err(Error::InvalidParameter(format!("unknown buyer {}", a.buyer)));
            }
            if !(a.fraction > Rat::zero() && a.fraction <= Rat::one()) {
                return Err(Error::InvalidParameter(format!(
                    "fraction {} outside (0,1]",
                    a.fraction
                )));
            }
            if inst.buyer(a.buyer).tail_probability(&a.price) != a.tail {
                return Err(Error::InvalidParameter("stored tail is stale".into()));
            }
            sales += &a.tail * &a.fraction;
            value += &a.price * &a.tail * &a.fraction;
            if a.fraction < Rat::one() {
                fractional.push(a);
            }
        }
        if let Some(s) = &self.split {
            let f = &s.low_fraction;
            if !(f > &Rat::zero() && f < &Rat::one()) {
                return Err(Error::InvalidParameter("split fraction outside (0,1)".into()));
            }
            // Both sides must be tied in Lagrangian margin at tau_star.
            let low_margin = (&s.low_price - &self.tau_star) * &s.low_tail;
            let high_margin = (&s.high_price - &self.tau_star) * &s.high_tail;
            if low_margin != high_margin {
                return Err(Error::InvalidParameter(
                    "split prices are not tied at tau_star".into(),
                ));
            }
            sales += &s.low_tail * f + &s.high_tail * (Rat::one() - f);
            value += &s.low_price * &s.low_tail * f
                + &s.high_price * &s.high_tail * (Rat::one() - f);
        }
        if fractional.len() + self.split.iter().count() > 1 {
            return Err(Error::InvalidParameter(
                "more than one fractional buyer".into(),
            ));
        }
        if let Some(frac) = fractional.first() {
            if self
                .assignments
                .iter()
                .any(|a| a.price < frac.price)
            {
                return Err(Error::InvalidParameter(
                    "fractional buyer's price is not minimal".into(),
                ));
            }
        }
        let k = rat_i(inst.copies() as i64);
        if sales > k {
            return Err(Error::InvalidParameter("expected sales exceed K".into()));
        }
        if sales != self.expected_sales {
            return Err(Error::InvalidParameter("stored sales are stale".into()));
        }
        if value != self.objective {
            return Err(Error::InvalidParameter(
                "objective does not match the assignment contributions".into(),
            ));
        }
        Ok(())
    }
}

/// A buyer's best response to sale cost `tau`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LagrangianChoice {
    pub price: Rat,
    pub tail: Rat,
    /// `(price - tau) * tail`, strictly positive for assigned buyers.
    pub margin: Rat,
}

fn buyer_options(inst: &Instance) -> Vec<Vec<(Rat, Rat)>> {
    inst.buyers()
        .iter()
        .map(|b| {
            b.support()
                .iter()
                .zip(b.tails())
                .map(|(pt, tail)| (pt.value.clone(), tail))
                .collect()
        })
        .collect()
}

fn assign_one(options: &[(Rat, Rat)], tau: &Rat) -> Option<LagrangianChoice> {
    let mut best: Option<LagrangianChoice> = None;
    for (v, tail) in options {
        let margin = (v - tau) * tail;
        if !margin.is_positive() {
            continue;
        }
        // Iterating in increasing value order, `>=` breaks ties toward the
        // larger value.
        if best.as_ref().map_or(true, |b| margin >= b.margin) {
            best = Some(LagrangianChoice {
                price: v.clone(),
                tail: tail.clone(),
                margin,
            });
        }
    }
    best
}

/// Per-buyer best response to sale cost `tau`: the support value maximizing
/// `(v - tau) * p` when that maximum is positive, ties toward the larger
/// value; buyers whose maximum is non-positive are absent.
pub fn lagrangian_assign(inst: &Instance, tau: &Rat) -> Vec<Option<LagrangianChoice>> {
    assert!(!tau.is_negative(), "tau must be non-negative");
    buyer_options(inst)
        .iter()
        .map(|opts| assign_one(opts, tau))
        .collect()
}

fn total_sales(assignment: &[Option<LagrangianChoice>]) -> Rat {
    assignment
        .iter()
        .flatten()
        .map(|c| c.tail.clone())
        .sum()
}

/// Value of the Lagrangian dual at `tau`: `K tau + sum of positive margins`.
pub fn dual_objective_at(inst: &Instance, tau: &Rat) -> Rat {
    let margins: Rat = lagrangian_assign(inst, tau)
        .into_iter()
        .flatten()
        .map(|c| c.margin)
        .sum();
    rat_i(inst.copies() as i64) * tau + margins
}

/// All `tau` values where some buyer's best response can change: support
/// values (margins hit zero) and within-buyer crossings of two marginal
/// lines.
fn breakpoint_candidates(inst: &Instance) -> Vec<Rat> {
    let mut set: BTreeSet<Rat> = BTreeSet::new();
    for opts in buyer_options(inst) {
        for (v, _) in &opts {
            set.insert(v.clone());
        }
        for i in 0..opts.len() {
            for j in (i + 1)..opts.len() {
                let (v1, p1) = &opts[i];
                let (v2, p2) = &opts[j];
                if p1 == p2 {
                    continue;
                }
                let tau = (v1 * p1 - v2 * p2) / (p1 - p2);
                if tau.is_positive() {
                    set.insert(tau);
                }
            }
        }
    }
    set.into_iter().collect()
}

/// Solves the relaxation exactly.
///
/// `tau_star` is the smallest breakpoint where expected best-response sales
/// drop to at most `K`; buyers are then assigned their best response there,
/// and buyers whose response changed exactly at `tau_star` (all tied in
/// margin) are moved back toward their just-below-`tau_star` option in
/// decreasing value-times-probability order until expected sales reach `K`.
/// The last such move may be partial: either a fractional buyer at price
/// `tau_star` or a two-price [`LpSplit`].
pub fn solve_lp(inst: &Instance) -> Result<StructuredLpSolution> {
    inst.validate()?;
    let k = rat_i(inst.copies() as i64);
    let options = buyer_options(inst);
    let zero = Rat::zero();

    let at_zero: Vec<Option<LagrangianChoice>> = options
        .iter()
        .map(|opts| assign_one(opts, &zero))
        .collect();
    let sales_at_zero = total_sales(&at_zero);
    if sales_at_zero <= k {
        let assignments = full_assignments(&at_zero);
        let objective = assignments
            .iter()
            .map(|a| &a.price * &a.tail)
            .sum();
        return Ok(StructuredLpSolution {
            assignments,
            split: None,
            tau_star: Rat::zero(),
            objective,
            expected_sales: sales_at_zero,
        });
    }

    let candidates = breakpoint_candidates(inst);
    // Sales are non-increasing in tau and reach zero at the largest support
    // value, so the first candidate with sales <= K exists.
    let idx = partition_point(&candidates, |tau| {
        let assignment: Vec<_> = options.iter().map(|o| assign_one(o, tau)).collect();
        total_sales(&assignment) > k
    });
    let tau_star = candidates[idx].clone();
    let at_star: Vec<Option<LagrangianChoice>> = options
        .iter()
        .map(|opts| assign_one(opts, &tau_star))
        .collect();
    // Best responses are constant between consecutive candidates; probing
    // the midpoint recovers the assignment just below tau_star.
    let below = if idx == 0 {
        &tau_star / rat_i(2)
    } else {
        (&candidates[idx - 1] + &tau_star) / rat_i(2)
    };
    let at_below: Vec<Option<LagrangianChoice>> = options
        .iter()
        .map(|opts| assign_one(opts, &below))
        .collect();

    let mut assignments = full_assignments(&at_star);
    let mut sales = total_sales(&at_star);
    let mut split = None;

    // Buyers whose response changes at tau_star; both options are tied in
    // margin there, so moving mass between them keeps Lagrangian
    // optimality while raising expected sales.
    let mut boundary: Vec<(usize, LagrangianChoice, Option<LagrangianChoice>)> = Vec::new();
    for (buyer, (lo, hi)) in at_below.into_iter().zip(at_star.iter()).enumerate() {
        match (lo, hi) {
            (Some(l), Some(h)) if l.price != h.price => {
                boundary.push((buyer, l, Some(h.clone())));
            }
            (Some(l), None) => {
                debug_assert_eq!(l.price, tau_star, "dropouts sit exactly at tau_star");
                boundary.push((buyer, l, None));
            }
            _ => {}
        }
    }
    boundary.sort_by(|a, b| {
        let ka = &a.1.price * &a.1.tail;
        let kb = &b.1.price * &b.1.tail;
        kb.cmp(&ka).then(a.0.cmp(&b.0))
    });

    let mut need = &k - &sales;
    debug_assert!(need >= Rat::zero());
    for (buyer, low, high) in boundary {
        if need.is_zero() {
            break;
        }
        let gain = match &high {
            Some(h) => &low.tail - &h.tail,
            None => low.tail.clone(),
        };
        debug_assert!(gain.is_positive());
        if need >= gain {
            // Move the buyer fully to its just-below option.
            match &high {
                Some(_) => {
                    let slot = assignments
                        .iter_mut()
                        .find(|a| a.buyer == buyer)
                        .expect("switching buyer is assigned");
                    slot.price = low.price.clone();
                    slot.tail = low.tail.clone();
                }
                None => assignments.push(LpAssignment {
                    buyer,
                    price: low.price.clone(),
                    tail: low.tail.clone(),
                    fraction: Rat::one(),
                }),
            }
            sales += &gain;
            need -= &gain;
        } else {
            match high {
                Some(h) => {
                    let f = &need / &gain;
                    assignments.retain(|a| a.buyer != buyer);
                    split = Some(LpSplit {
                        buyer,
                        low_price: low.price.clone(),
                        low_tail: low.tail.clone(),
                        high_price: h.price.clone(),
                        high_tail: h.tail.clone(),
                        low_fraction: f,
                    });
                }
                None => {
                    let f = &need / &low.tail;
                    assignments.push(LpAssignment {
                        buyer,
                        price: low.price.clone(),
                        tail: low.tail.clone(),
                        fraction: f,
                    });
                }
            }
            sales += &need;
            need = Rat::zero();
        }
    }
    debug_assert!(need.is_zero(), "boundary mass always suffices to reach K");

    let mut objective: Rat = assignments
        .iter()
        .map(|a| &a.price * &a.tail * &a.fraction)
        .sum();
    if let Some(s) = &split {
        objective += &s.low_price * &s.low_tail * &s.low_fraction
            + &s.high_price * &s.high_tail * (Rat::one() - &s.low_fraction);
    }
    debug_assert_eq!(objective, dual_objective_at(inst, &tau_star));

    Ok(StructuredLpSolution {
        assignments,
        split,
        tau_star,
        objective,
        expected_sales: sales,
    })
}

fn full_assignments(assignment: &[Option<LagrangianChoice>]) -> Vec<LpAssignment> {
    assignment
        .iter()
        .enumerate()
        .filter_map(|(buyer, choice)| {
            choice.as_ref().map(|c| LpAssignment {
                buyer,
                price: c.price.clone(),
                tail: c.tail.clone(),
                fraction: Rat::one(),
            })
        })
        .collect()
}

fn partition_point(candidates: &[Rat], mut pred: impl FnMut(&Rat) -> bool) -> usize {
    let mut lo = 0usize;
    let mut hi = candidates.len();
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(&candidates[mid]) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Schedule posting each assigned buyer's price in decreasing order.
///
/// A fractional buyer is included fully (posting is all or nothing) and
/// placed last among equal prices; a split buyer is posted at its lower
/// price, the side with the larger contribution. Absent buyers are omitted.
pub fn schedule_from_solution(solution: &StructuredLpSolution) -> SpmSchedule {
    // (price, fractional flag, buyer); fractional sorts after full entries
    // of the same price.
    let mut entries: Vec<(Rat, bool, usize)> = solution
        .assignments
        .iter()
        .map(|a| (a.price.clone(), a.fraction < Rat::one(), a.buyer))
        .collect();
    if let Some(s) = &solution.split {
        entries.push((s.low_price.clone(), true, s.buyer));
    }
    entries.sort_by(|a, b| {
        b.0.cmp(&a.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    SpmSchedule::new(
        entries
            .into_iter()
            .map(|(price, _, buyer)| crate::model::SpmStep {
                buyer,
                price: crate::model::PostedPrice::At(price),
            })
            .collect(),
    )
}

/// Solves the relaxation and builds the decreasing-price schedule from it.
pub fn build_lp_spm(inst: &Instance) -> Result<SpmSchedule> {
    Ok(schedule_from_solution(&solve_lp(inst)?))
}

fn poisson_ratio_term(k: u32) -> f64 {
    // K^K / (K! e^K) in the log domain.
    let kf = k as f64;
    let mut ln_factorial = 0.0f64;
    for i in 2..=k {
        ln_factorial += (i as f64).ln();
    }
    (kf * kf.ln() - ln_factorial - kf).exp()
}

/// The guarantee `1 - K^K/(K! e^K)` of the LP-derived schedule against the
/// optimal adaptive mechanism. Also at least `1 - 1/sqrt(2 pi K)`.
pub fn approximation_bound(k: u32) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    Ok(1.0 - poisson_ratio_term(k))
}

/// `E[min(P, K)]` for a Poisson variable `P` with mean `K`, in closed form
/// `K - K^{K+1}/(K! e^K)`, evaluated as `K * approximation_bound(K)` so the
/// two share one rounding of the common term.
pub fn expected_min_poisson(k: u32) -> Result<f64> {
    Ok(k as f64 * approximation_bound(k)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::eval_spm;
    use crate::model::{random_instance, BuyerDistribution};
    use crate::rational::{rat, to_f64};
    use proptest::prelude::*;

    fn buyer(points: &[((i64, i64), (i64, i64))]) -> BuyerDistribution {
        BuyerDistribution::new(
            points
                .iter()
                .map(|((vn, vd), (mn, md))| (rat(*vn, *vd), rat(*mn, *md)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn lagrangian_assign_examples() {
        let inst = Instance::new(vec![buyer(&[((1, 1), (1, 2))])], 1).unwrap();
        let a = lagrangian_assign(&inst, &Rat::zero());
        let c = a[0].as_ref().unwrap();
        assert_eq!(c.price, rat_i(1));
        assert_eq!(c.margin, rat(1, 2));

        // Margins tie at 1.0; the larger value wins.
        let tied = Instance::new(
            vec![BuyerDistribution::new(vec![
                (rat_i(1), rat(9, 10)),
                (rat_i(10), rat(1, 10)),
            ])
            .unwrap()],
            1,
        )
        .unwrap();
        let a = lagrangian_assign(&tied, &Rat::zero());
        assert_eq!(a[0].as_ref().unwrap().price, rat_i(10));

        let at_boundary = Instance::new(vec![buyer(&[((1, 1), (1, 2))])], 1).unwrap();
        let a = lagrangian_assign(&at_boundary, &rat_i(1));
        assert!(a[0].is_none());
    }

    #[test]
    fn solve_lp_unconstrained_single_buyer() {
        let inst = Instance::new(vec![buyer(&[((1, 1), (1, 2))])], 1).unwrap();
        let sol = solve_lp(&inst).unwrap();
        assert_eq!(sol.tau_star, Rat::zero());
        assert_eq!(sol.objective, rat(1, 2));
        assert_eq!(sol.assignments.len(), 1);
        assert_eq!(sol.assignments[0].fraction, Rat::one());
        sol.validate(&inst).unwrap();
    }

    #[test]
    fn solve_lp_two_unit_mass_buyers() {
        let b = buyer(&[((1, 1), (1, 1))]);
        let inst = Instance::new(vec![b.clone(), b], 1).unwrap();
        let sol = solve_lp(&inst).unwrap();
        assert_eq!(sol.objective, rat_i(1));
        assert_eq!(sol.expected_sales, rat_i(1));
        sol.validate(&inst).unwrap();
    }

    #[test]
    fn solve_lp_fractional_example() {
        // A at (10, 0.1), B at (1, 1.0), K=1: A full, B at fraction 0.9.
        let inst = Instance::new(
            vec![buyer(&[((10, 1), (1, 10))]), buyer(&[((1, 1), (1, 1))])],
            1,
        )
        .unwrap();
        let sol = solve_lp(&inst).unwrap();
        assert_eq!(sol.tau_star, rat_i(1));
        assert_eq!(sol.objective, rat(19, 10));
        assert_eq!(sol.expected_sales, rat_i(1));
        let a = sol.assignments.iter().find(|a| a.buyer == 0).unwrap();
        assert_eq!((a.price.clone(), a.fraction.clone()), (rat_i(10), rat_i(1)));
        let b = sol.assignments.iter().find(|a| a.buyer == 1).unwrap();
        assert_eq!((b.price.clone(), b.fraction.clone()), (rat_i(1), rat(9, 10)));
        sol.validate(&inst).unwrap();

        let schedule = schedule_from_solution(&sol);
        let order: Vec<usize> = schedule.offers().map(|(b, _)| b).collect();
        assert_eq!(order, vec![0, 1]);
        assert_eq!(eval_spm(&inst, &schedule).unwrap(), rat(19, 10));
    }

    #[test]
    fn solve_lp_split_case_is_exact() {
        // B1 {(1, 1.0), (2, 0.4)}, B2 {(10, 0.5)}, K=1: the sales constraint
        // binds exactly where B1's best price switches, so the optimum mixes
        // B1 across both prices. Dual scan gives 35/6.
        let inst = Instance::new(
            vec![
                buyer(&[((1, 1), (3, 5)), ((2, 1), (2, 5))]),
                buyer(&[((10, 1), (1, 2))]),
            ],
            1,
        )
        .unwrap();
        let sol = solve_lp(&inst).unwrap();
        assert_eq!(sol.tau_star, rat(1, 3));
        assert_eq!(sol.objective, rat(35, 6));
        assert_eq!(sol.expected_sales, rat_i(1));
        let split = sol.split.as_ref().expect("split buyer expected");
        assert_eq!(split.buyer, 0);
        assert_eq!(split.low_price, rat_i(1));
        assert_eq!(split.high_price, rat_i(2));
        assert_eq!(split.low_fraction, rat(1, 6));
        sol.validate(&inst).unwrap();
        assert_eq!(sol.objective, lp_objective_by_dual_scan(&inst));
    }

    /// Independent route to the optimum: scan the dual over all candidate
    /// breakpoints and zero.
    fn lp_objective_by_dual_scan(inst: &Instance) -> Rat {
        let mut best = dual_objective_at(inst, &Rat::zero());
        for tau in breakpoint_candidates(inst) {
            let v = dual_objective_at(inst, &tau);
            if v < best {
                best = v;
            }
        }
        best
    }

    #[test]
    fn singleton_schedule_posts_revenue_maximizing_price() {
        let inst = Instance::new(
            vec![BuyerDistribution::new(vec![
                (rat_i(2), rat(1, 4)),
                (rat_i(5), rat(1, 4)),
            ])
            .unwrap()],
            1,
        )
        .unwrap();
        let schedule = build_lp_spm(&inst).unwrap();
        let offers: Vec<(usize, Rat)> = schedule.offers().map(|(b, p)| (b, p.clone())).collect();
        // Tail at 5 is 1/4 (revenue 5/4), tail at 2 is 1/2 (revenue 1).
        assert_eq!(offers, vec![(0, rat_i(5))]);
    }

    #[test]
    fn approximation_bound_values() {
        let b1 = approximation_bound(1).unwrap();
        assert!((b1 - (1.0 - 1.0 / std::f64::consts::E)).abs() < 1e-12);
        assert!((b1 - 0.6321206).abs() < 1e-7);
        let b2 = approximation_bound(2).unwrap();
        assert!((b2 - 0.7293294).abs() < 1e-7);
        assert!(approximation_bound(0).is_err());

        for k in 1..=1000u32 {
            let bound = approximation_bound(k).unwrap();
            let weaker = 1.0 - 1.0 / (2.0 * std::f64::consts::PI * k as f64).sqrt();
            assert!(bound >= weaker - 1e-12, "failed at K={k}");
        }
        // The bound approaches 1; at K = 10^4 it already clears the weaker
        // form, which is above 0.996.
        let big = approximation_bound(10_000).unwrap();
        let weaker = 1.0 - 1.0 / (2.0 * std::f64::consts::PI * 1e4).sqrt();
        assert!(big >= weaker && big > 0.99);
    }

    #[test]
    fn expected_min_poisson_values() {
        let e = std::f64::consts::E;
        assert!((expected_min_poisson(1).unwrap() - (1.0 - 1.0 / e)).abs() < 1e-12);
        assert!((expected_min_poisson(2).unwrap() - (2.0 - 4.0 / (e * e))).abs() < 1e-12);
        assert!((expected_min_poisson(2).unwrap() - 1.4586588).abs() < 1e-7);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn lagrangian_sales_are_non_increasing_in_tau(seed in 0u64..300) {
            let inst = random_instance(6, 2, 4, (1, 40), seed).unwrap();
            let mut taus: Vec<Rat> = vec![Rat::zero(), rat(1, 2), rat_i(1), rat(7, 2), rat_i(10), rat_i(41)];
            taus.sort();
            let mut last: Option<Rat> = None;
            for tau in &taus {
                let sales = total_sales(&lagrangian_assign(&inst, tau));
                if let Some(prev) = &last {
                    prop_assert!(&sales <= prev);
                }
                last = Some(sales);
            }
        }

        #[test]
        fn solve_lp_matches_dual_scan_and_keeps_shape(seed in 0u64..150, k in 1u32..4) {
            let inst = random_instance(7, k.min(7), 3, (1, 30), seed).unwrap();
            let sol = solve_lp(&inst).unwrap();
            sol.validate(&inst).unwrap();
            prop_assert_eq!(sol.objective.clone(), lp_objective_by_dual_scan(&inst));
            // Sales reach min(K, unconstrained sales) exactly.
            let unconstrained = total_sales(&lagrangian_assign(&inst, &Rat::zero()));
            let k_rat = rat_i(inst.copies() as i64);
            let expect = if unconstrained <= k_rat { unconstrained } else { k_rat };
            prop_assert_eq!(sol.expected_sales.clone(), expect);
        }

        #[test]
        fn lp_schedule_meets_guarantee_on_random_instances(seed in 0u64..60, k in 1u32..5) {
            let inst = random_instance(10, k.min(10), 4, (1, 60), seed).unwrap();
            let sol = solve_lp(&inst).unwrap();
            let schedule = schedule_from_solution(&sol);
            let value = eval_spm(&inst, &schedule).unwrap();
            let ratio = to_f64(&value) / to_f64(&sol.objective);
            let bound = approximation_bound(inst.copies()).unwrap();
            prop_assert!(ratio >= bound - 1e-9, "ratio {} below bound {}", ratio, bound);
            prop_assert!(value <= sol.objective);
        }
    }
}
