//! Exact and Monte-Carlo expected-revenue evaluation, plus the two easy
//! one-sided optimizations: decreasing-price ordering for fixed prices, and
//! the copies-indexed pricing dynamic program for a fixed visiting order.

use std::collections::HashMap;

use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{AspmNode, AspmTree, Instance, PostedPrice, SpmSchedule, SpmStep};
use crate::rational::Rat;

/// Distribution of the number of copies sold so far, truncated at `K`
/// (states "K or more" are merged since the process has stopped there).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StockDistribution {
    probs: Vec<Rat>,
}

impl StockDistribution {
    /// All mass on "zero sold".
    pub fn new(copies: u32) -> Self {
        let mut probs = vec![Rat::zero(); copies as usize + 1];
        probs[0] = Rat::one();
        StockDistribution { probs }
    }

    pub fn probs(&self) -> &[Rat] {
        &self.probs
    }

    /// Probability that fewer than `K` copies have been sold, i.e. that the
    /// process is still running.
    pub fn pr_stock_available(&self) -> Rat {
        Rat::one() - self.probs.last().expect("non-empty").clone()
    }

    /// Pushes one offer with success probability `p` through the
    /// distribution. Sales beyond the K-th cannot happen and stay merged in
    /// the top state.
    pub fn advance(&mut self, p: &Rat) {
        let k = self.probs.len() - 1;
        let q = Rat::one() - p;
        let mut next = vec![Rat::zero(); k + 1];
        for j in 0..k {
            next[j] += &self.probs[j] * &q;
            next[j + 1] += &self.probs[j] * p;
        }
        next[k] += &self.probs[k];
        self.probs = next;
    }

    pub fn validate(&self) -> Result<()> {
        let sum: Rat = self.probs.iter().cloned().sum();
        if sum != Rat::one() {
            return Err(Error::InvalidParameter(format!(
                "stock distribution sums to {sum}, not 1"
            )));
        }
        if self.probs.iter().any(|p| p < &Rat::zero() || p > &Rat::one()) {
            return Err(Error::InvalidParameter(
                "stock distribution entry outside [0,1]".into(),
            ));
        }
        Ok(())
    }
}

/// Exact expected revenue of a schedule: one forward pass over the stock
/// distribution, each offer contributing `price * p * Pr[stock left]`.
pub fn eval_spm(inst: &Instance, schedule: &SpmSchedule) -> Result<Rat> {
    schedule.validate(inst)?;
    let mut stock = StockDistribution::new(inst.copies());
    let mut revenue = Rat::zero();
    for (buyer, price) in schedule.offers() {
        let p = inst.buyer(buyer).tail_probability(price);
        if p.is_zero() {
            continue;
        }
        revenue += price * &p * stock.pr_stock_available();
        stock.advance(&p);
    }
    Ok(revenue)
}

/// Exact expected revenue of a decision tree.
///
/// Memoized over (node, copies left), so shared arenas evaluate in time
/// linear in the number of distinct states rather than the unfolded tree.
/// Structural validity (indices, support membership, acyclicity) is checked
/// here; full per-path buyer distinctness is the separate
/// [`AspmTree::validate_paths`] since it can be exponential on shared arenas.
pub fn eval_aspm(inst: &Instance, tree: &AspmTree) -> Result<Rat> {
    tree.validate_structure(inst)?;
    let root = match tree.root {
        Some(r) => r,
        None => return Ok(Rat::zero()),
    };
    let mut memo: HashMap<(usize, u32), Rat> = HashMap::new();
    Ok(eval_node(inst, tree, root, inst.copies(), &mut memo))
}

fn eval_node(
    inst: &Instance,
    tree: &AspmTree,
    id: usize,
    copies: u32,
    memo: &mut HashMap<(usize, u32), Rat>,
) -> Rat {
    if copies == 0 {
        return Rat::zero();
    }
    if let Some(v) = memo.get(&(id, copies)) {
        return v.clone();
    }
    let node = &tree.nodes[id];
    let p = inst.buyer(node.buyer).tail_probability(&node.price);
    let sale_value = match node.on_sale {
        Some(c) => eval_node(inst, tree, c, copies - 1, memo),
        None => Rat::zero(),
    };
    let no_sale_value = match node.on_no_sale {
        Some(c) => eval_node(inst, tree, c, copies, memo),
        None => Rat::zero(),
    };
    let value = &p * (&node.price + sale_value) + (Rat::one() - &p) * no_sale_value;
    memo.insert((id, copies), value.clone());
    value
}

/// Schedule with the given prices sorted by non-increasing price, ties
/// broken by buyer index.
pub fn order_by_decreasing_price(prices: &[(usize, Rat)]) -> SpmSchedule {
    let mut entries: Vec<(usize, Rat)> = prices.to_vec();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    SpmSchedule::new(
        entries
            .into_iter()
            .map(|(buyer, price)| SpmStep {
                buyer,
                price: PostedPrice::At(price),
            })
            .collect(),
    )
}

/// Revenue-maximizing price-adaptive mechanism for a fixed visiting order.
///
/// Table entry `(t, j)` holds the best expected revenue from the buyers at
/// positions `t..` with `j` copies left; candidates at each position are the
/// buyer's support prices plus skipping the buyer, with ties broken toward
/// the larger price (and any price over skipping). The returned tree is a
/// path in visiting order whose node prices depend on copies remaining,
/// shared as a (position, copies) arena.
pub fn adaptive_prices_for_order(inst: &Instance, order: &[usize]) -> Result<(AspmTree, Rat)> {
    adaptive_prices_with_copies(inst, order, inst.copies())
}

/// Same as [`adaptive_prices_for_order`] with an explicit number of copies
/// (zero gives the empty mechanism of value zero).
pub fn adaptive_prices_with_copies(
    inst: &Instance,
    order: &[usize],
    copies: u32,
) -> Result<(AspmTree, Rat)> {
    if order.is_empty() {
        return Err(Error::InvalidParameter("empty visiting order".into()));
    }
    let mut seen = vec![false; inst.n()];
    for &b in order {
        if b >= inst.n() {
            return Err(Error::InvalidParameter(format!("unknown buyer {b}")));
        }
        if seen[b] {
            return Err(Error::InvalidParameter(format!("buyer {b} repeated")));
        }
        seen[b] = true;
    }
    let m = order.len();
    let k = copies as usize;

    // choice[t][j] = None for skip, Some(price) otherwise.
    let mut value = vec![vec![Rat::zero(); k + 1]; m + 1];
    let mut choice: Vec<Vec<Option<Rat>>> = vec![vec![None; k + 1]; m];
    for t in (0..m).rev() {
        let buyer = inst.buyer(order[t]);
        for j in 1..=k {
            let mut best = value[t + 1][j].clone();
            let mut best_price: Option<Rat> = None;
            for pt in buyer.support() {
                let p = buyer.tail_probability(&pt.value);
                let candidate =
                    &p * (&pt.value + &value[t + 1][j - 1]) + (Rat::one() - &p) * &value[t + 1][j];
                if candidate >= best {
                    best = candidate;
                    best_price = Some(pt.value.clone());
                }
            }
            value[t][j] = best;
            choice[t][j] = best_price;
        }
    }

    let mut tree = AspmTree::empty();
    let mut memo: HashMap<(usize, usize), Option<usize>> = HashMap::new();
    let root = build_path_node(inst, order, &choice, &mut tree, &mut memo, 0, k);
    tree.root = root;
    Ok((tree, value[0][k].clone()))
}

fn build_path_node(
    inst: &Instance,
    order: &[usize],
    choice: &[Vec<Option<Rat>>],
    tree: &mut AspmTree,
    memo: &mut HashMap<(usize, usize), Option<usize>>,
    t: usize,
    j: usize,
) -> Option<usize> {
    if t >= order.len() || j == 0 {
        return None;
    }
    if let Some(&id) = memo.get(&(t, j)) {
        return id;
    }
    let id = match &choice[t][j] {
        None => build_path_node(inst, order, choice, tree, memo, t + 1, j),
        Some(price) => {
            let on_sale = build_path_node(inst, order, choice, tree, memo, t + 1, j - 1);
            let on_no_sale = build_path_node(inst, order, choice, tree, memo, t + 1, j);
            Some(tree.add_node(AspmNode {
                buyer: order[t],
                price: price.clone(),
                on_sale,
                on_no_sale,
            }))
        }
    };
    memo.insert((t, j), id);
    id
}

/// Mechanism reference for simulation.
#[derive(Debug, Clone, Copy)]
pub enum Mechanism<'a> {
    Schedule(&'a SpmSchedule),
    Tree(&'a AspmTree),
}

/// Seeded Monte-Carlo estimate of expected revenue: per trial each offered
/// buyer accepts independently with its success probability. Returns the
/// sample mean and standard error (zero for a single trial).
pub fn monte_carlo(
    inst: &Instance,
    mechanism: Mechanism<'_>,
    trials: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    match mechanism {
        Mechanism::Schedule(s) => s.validate(inst)?,
        Mechanism::Tree(t) => t.validate_structure(inst)?,
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0f64;
    let mut sumsq = 0.0f64;
    for _ in 0..trials {
        let revenue = match mechanism {
            Mechanism::Schedule(s) => simulate_schedule(inst, s, &mut rng),
            Mechanism::Tree(t) => simulate_tree(inst, t, &mut rng),
        };
        sum += revenue;
        sumsq += revenue * revenue;
    }
    let t = trials as f64;
    let mean = sum / t;
    let se = if trials > 1 {
        let var = ((sumsq - t * mean * mean) / (t - 1.0)).max(0.0);
        (var / t).sqrt()
    } else {
        0.0
    };
    Ok((mean, se))
}

fn accepts(inst: &Instance, buyer: usize, price: &Rat, rng: &mut ChaCha8Rng) -> bool {
    let p = inst
        .buyer(buyer)
        .tail_probability(price)
        .to_f64()
        .unwrap_or(0.0);
    rng.gen::<f64>() < p
}

fn simulate_schedule(inst: &Instance, schedule: &SpmSchedule, rng: &mut ChaCha8Rng) -> f64 {
    let mut copies = inst.copies();
    let mut revenue = 0.0;
    for (buyer, price) in schedule.offers() {
        if copies == 0 {
            break;
        }
        if accepts(inst, buyer, price, rng) {
            revenue += price.to_f64().unwrap_or(0.0);
            copies -= 1;
        }
    }
    revenue
}

fn simulate_tree(inst: &Instance, tree: &AspmTree, rng: &mut ChaCha8Rng) -> f64 {
    let mut copies = inst.copies();
    let mut revenue = 0.0;
    let mut cursor = tree.root;
    while let Some(id) = cursor {
        if copies == 0 {
            break;
        }
        let node = &tree.nodes[id];
        if accepts(inst, node.buyer, &node.price, rng) {
            revenue += node.price.to_f64().unwrap_or(0.0);
            copies -= 1;
            cursor = node.on_sale;
        } else {
            cursor = node.on_no_sale;
        }
    }
    revenue
}
