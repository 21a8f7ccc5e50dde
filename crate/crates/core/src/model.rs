//! Domain types: buyer distributions, instances, schedules and decision
//! trees, plus discretization preprocessing and seeded instance generation.

use std::collections::BTreeSet;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rational::{ceil_to_multiple, is_multiple_of, rat, rat_i, Rat};

/// One point of a discrete value distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportPoint {
    pub value: Rat,
    pub mass: Rat,
}

/// Discrete value distribution of a single buyer.
///
/// Support values are strictly increasing and positive; masses are positive
/// and sum to at most 1. Residual mass sits implicitly at value 0 (the buyer
/// rejects every positive price), so it is never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuyerDistribution {
    support: Vec<SupportPoint>,
}

impl BuyerDistribution {
    pub fn new(points: Vec<(Rat, Rat)>) -> Result<Self> {
        let support: Vec<SupportPoint> = points
            .into_iter()
            .map(|(value, mass)| SupportPoint { value, mass })
            .collect();
        let dist = BuyerDistribution { support };
        dist.validate()?;
        Ok(dist)
    }

    pub fn validate(&self) -> Result<()> {
        if self.support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let mut total = Rat::zero();
        for (i, pt) in self.support.iter().enumerate() {
            if !pt.value.is_positive() {
                return Err(Error::InvalidDistribution(format!(
                    "support value {} is not positive",
                    pt.value
                )));
            }
            if !pt.mass.is_positive() {
                return Err(Error::InvalidDistribution(format!(
                    "mass at value {} is not positive",
                    pt.value
                )));
            }
            if i > 0 && self.support[i - 1].value >= pt.value {
                return Err(Error::InvalidDistribution(
                    "support values are not strictly increasing".into(),
                ));
            }
            total += &pt.mass;
        }
        if total > Rat::one() {
            return Err(Error::InvalidDistribution("masses sum above 1".into()));
        }
        Ok(())
    }

    pub fn support(&self) -> &[SupportPoint] {
        &self.support
    }

    pub fn max_value(&self) -> &Rat {
        &self.support.last().expect("support is non-empty").value
    }

    /// Probability that the buyer's value is at least `v`, i.e. that it
    /// accepts price `v`. Zero above the support.
    pub fn tail_probability(&self, v: &Rat) -> Rat {
        assert!(v.is_positive(), "tail_probability requires v > 0");
        self.support
            .iter()
            .filter(|pt| &pt.value >= v)
            .map(|pt| pt.mass.clone())
            .sum()
    }

    /// Tail probability at each support point, in support order.
    pub fn tails(&self) -> Vec<Rat> {
        let mut acc = Rat::zero();
        let mut out = vec![Rat::zero(); self.support.len()];
        for (i, pt) in self.support.iter().enumerate().rev() {
            acc += &pt.mass;
            out[i] = acc.clone();
        }
        out
    }
}

/// A K-unit auction instance: one seller with `copies` identical items and a
/// list of independent buyers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    buyers: Vec<BuyerDistribution>,
    copies: u32,
    excess_copies_allowed: bool,
}

impl Instance {
    /// Builds an instance with the usual `K <= n` assumption enforced.
    pub fn new(buyers: Vec<BuyerDistribution>, copies: u32) -> Result<Self> {
        let inst = Instance {
            buyers,
            copies,
            excess_copies_allowed: false,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Builds an instance that may carry more copies than buyers.
    pub fn with_excess_copies(buyers: Vec<BuyerDistribution>, copies: u32) -> Result<Self> {
        let inst = Instance {
            buyers,
            copies,
            excess_copies_allowed: true,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.buyers.is_empty() {
            return Err(Error::InvalidInstance("no buyers".into()));
        }
        if self.copies == 0 {
            return Err(Error::InvalidInstance("copies must be at least 1".into()));
        }
        if !self.excess_copies_allowed && self.copies as usize > self.buyers.len() {
            return Err(Error::InvalidInstance(format!(
                "copies {} exceed buyer count {} (use with_excess_copies to allow)",
                self.copies,
                self.buyers.len()
            )));
        }
        for b in &self.buyers {
            b.validate()?;
        }
        Ok(())
    }

    pub fn buyers(&self) -> &[BuyerDistribution] {
        &self.buyers
    }

    pub fn buyer(&self, i: usize) -> &BuyerDistribution {
        &self.buyers[i]
    }

    pub fn n(&self) -> usize {
        self.buyers.len()
    }

    pub fn copies(&self) -> u32 {
        self.copies
    }

    /// Returns a copy of the instance with a different number of copies.
    pub fn with_copies(&self, copies: u32) -> Result<Self> {
        if copies as usize > self.n() {
            Instance::with_excess_copies(self.buyers.clone(), copies)
        } else {
            Instance::new(self.buyers.clone(), copies)
        }
    }

    /// The probability grid `1/(10 n^2)` used by discretization and the
    /// PTAS reductions.
    pub fn probability_grid(&self) -> Rat {
        let n = self.n() as i64;
        rat(1, 10 * n * n)
    }

    /// True when every tail probability is an integer multiple of the grid.
    pub fn is_on_probability_grid(&self) -> bool {
        let grid = self.probability_grid();
        self.buyers
            .iter()
            .all(|b| b.tails().iter().all(|t| is_multiple_of(t, &grid)))
    }

    pub fn max_value(&self) -> Rat {
        self.buyers
            .iter()
            .map(|b| b.max_value())
            .max()
            .expect("non-empty instance")
            .clone()
    }
}

/// Snaps support values down to the grid of powers of `(1 - 1/n^2)` times the
/// instance maximum, merges duplicates, then rounds every tail probability up
/// to a multiple of `1/(10 n^2)` while rescaling the value so the product
/// `value * tail` is unchanged.
///
/// An instance whose tails are already all on the probability grid is
/// returned unchanged, which makes the operation idempotent.
pub fn discretize(inst: &Instance) -> Result<Instance> {
    if inst.is_on_probability_grid() {
        return Ok(inst.clone());
    }
    let n = inst.n() as i64;
    let grid = inst.probability_grid();
    // With a single buyer the ratio 1 - 1/n^2 degenerates to zero and the
    // value grid is void; only the probability rounding applies.
    let snap_values = n > 1;
    let q = Rat::one() - rat(1, n * n);
    let anchor = inst.max_value();

    let mut buyers = Vec::with_capacity(inst.n());
    for b in inst.buyers() {
        // Stage 1: move each mass down to the nearest value-grid point,
        // keeping the mass itself. Duplicates merge.
        let mut snapped: Vec<(Rat, Rat)> = Vec::with_capacity(b.support().len());
        for pt in b.support() {
            let v = if snap_values {
                snap_down_to_value_grid(&pt.value, &anchor, &q)?
            } else {
                pt.value.clone()
            };
            match snapped.last_mut() {
                Some((last_v, last_m)) if *last_v == v => *last_m += &pt.mass,
                _ => snapped.push((v, pt.mass.clone())),
            }
        }
        // Values were increasing and the snap is monotone, so `snapped` is
        // sorted; equal neighbours were merged above.

        // Stage 2: round tails up to the probability grid and rescale values
        // so each retained product value*tail is preserved exactly.
        let m = snapped.len();
        let mut tails = vec![Rat::zero(); m];
        let mut acc = Rat::zero();
        for j in (0..m).rev() {
            acc += &snapped[j].1;
            tails[j] = acc.clone();
        }
        let rounded: Vec<Rat> = tails.iter().map(|t| ceil_to_multiple(t, &grid)).collect();
        let mut points: Vec<(Rat, Rat)> = Vec::with_capacity(m);
        for j in 0..m {
            if j + 1 < m && rounded[j] == rounded[j + 1] {
                // The point's mass vanished under rounding; it is absorbed
                // by the next-higher value.
                continue;
            }
            let value = &snapped[j].0 * &tails[j] / &rounded[j];
            let next = if j + 1 < m {
                rounded[j + 1].clone()
            } else {
                Rat::zero()
            };
            let mass = &rounded[j] - next;
            points.push((value, mass));
        }
        for w in points.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::MalformedDistribution(
                    "grid rounding collapsed the value ordering".into(),
                ));
            }
        }
        buyers.push(BuyerDistribution::new(points)?);
    }
    if inst.excess_copies_allowed {
        Instance::with_excess_copies(buyers, inst.copies())
    } else {
        Instance::new(buyers, inst.copies())
    }
}

/// Largest `anchor * q^j <= v` with `j >= 0`, found by a float guess that is
/// then corrected exactly.
fn snap_down_to_value_grid(v: &Rat, anchor: &Rat, q: &Rat) -> Result<Rat> {
    if v > anchor {
        return Err(Error::InvalidInstance(
            "support value above the instance maximum".into(),
        ));
    }
    let ratio = (v / anchor).to_f64().unwrap_or(1.0);
    let lq = q.to_f64().unwrap_or(0.5).ln();
    let mut j = if ratio >= 1.0 {
        0i64
    } else {
        (ratio.ln() / lq).ceil() as i64
    };
    if j < 0 {
        j = 0;
    }
    let mut g = anchor * pow_rat(q, j);
    while &g > v {
        g *= q;
        j += 1;
    }
    loop {
        let up = &g / q;
        if j == 0 || &up > v {
            break;
        }
        g = up;
        j -= 1;
    }
    Ok(g)
}

fn pow_rat(q: &Rat, e: i64) -> Rat {
    let mut out = Rat::one();
    let mut base = q.clone();
    let mut e = e as u64;
    while e > 0 {
        if e & 1 == 1 {
            out *= &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    out
}

/// Price posted to one buyer: a value from its support, or a sentinel that
/// omits the buyer (equivalent to posting above its support).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PostedPrice {
    Skip,
    At(Rat),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpmStep {
    pub buyer: usize,
    pub price: PostedPrice,
}

/// A non-adaptive mechanism: an ordered sequence of (buyer, posted price).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpmSchedule {
    pub steps: Vec<SpmStep>,
}

impl SpmSchedule {
    pub fn new(steps: Vec<SpmStep>) -> Self {
        SpmSchedule { steps }
    }

    /// Buyers with real offers, in schedule order.
    pub fn offers(&self) -> impl Iterator<Item = (usize, &Rat)> {
        self.steps.iter().filter_map(|s| match &s.price {
            PostedPrice::Skip => None,
            PostedPrice::At(p) => Some((s.buyer, p)),
        })
    }

    pub fn validate(&self, inst: &Instance) -> Result<()> {
        let mut seen = BTreeSet::new();
        for step in &self.steps {
            if step.buyer >= inst.n() {
                return Err(Error::InvalidSchedule(format!(
                    "unknown buyer {}",
                    step.buyer
                )));
            }
            if !seen.insert(step.buyer) {
                return Err(Error::InvalidSchedule(format!(
                    "buyer {} appears twice",
                    step.buyer
                )));
            }
            if let PostedPrice::At(p) = &step.price {
                let on_support = inst
                    .buyer(step.buyer)
                    .support()
                    .iter()
                    .any(|pt| &pt.value == p);
                if !on_support {
                    return Err(Error::InvalidSchedule(format!(
                        "price {} is not on buyer {}'s support",
                        p, step.buyer
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Node of an adaptive mechanism's decision tree.
///
/// `None` children are leaves (the process stops). Nodes are stored in an
/// arena and may be shared, so structurally equal subtrees can be
/// represented once; every consumer treats the structure as the tree it
/// unfolds into.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AspmNode {
    pub buyer: usize,
    pub price: Rat,
    pub on_sale: Option<usize>,
    pub on_no_sale: Option<usize>,
}

/// An adaptive mechanism: binary sale/no-sale branching over an arena of
/// nodes. Copies remaining is determined by the sale history along a path,
/// so binary branching is equivalent to the copies-indexed children view.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AspmTree {
    pub nodes: Vec<AspmNode>,
    pub root: Option<usize>,
}

impl AspmTree {
    pub fn empty() -> Self {
        AspmTree::default()
    }

    pub fn add_node(&mut self, node: AspmNode) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn single(buyer: usize, price: Rat) -> Self {
        AspmTree {
            nodes: vec![AspmNode {
                buyer,
                price,
                on_sale: None,
                on_no_sale: None,
            }],
            root: Some(0),
        }
    }

    /// Path-shaped tree equivalent to a schedule: both branches of each node
    /// continue to the next offer.
    pub fn path_from_schedule(schedule: &SpmSchedule) -> Self {
        let offers: Vec<(usize, Rat)> = schedule
            .offers()
            .map(|(b, p)| (b, p.clone()))
            .collect();
        let mut tree = AspmTree::empty();
        let mut next: Option<usize> = None;
        for (buyer, price) in offers.into_iter().rev() {
            let id = tree.add_node(AspmNode {
                buyer,
                price,
                on_sale: next,
                on_no_sale: next,
            });
            next = Some(id);
        }
        tree.root = next;
        tree
    }

    /// Checks node indices, price membership and acyclicity. Cheap enough to
    /// run before every evaluation.
    pub fn validate_structure(&self, inst: &Instance) -> Result<()> {
        for node in &self.nodes {
            if node.buyer >= inst.n() {
                return Err(Error::InvalidTree(format!("unknown buyer {}", node.buyer)));
            }
            let on_support = inst
                .buyer(node.buyer)
                .support()
                .iter()
                .any(|pt| pt.value == node.price);
            if !on_support {
                return Err(Error::InvalidTree(format!(
                    "price {} is not on buyer {}'s support",
                    node.price, node.buyer
                )));
            }
            for child in [node.on_sale, node.on_no_sale].into_iter().flatten() {
                if child >= self.nodes.len() {
                    return Err(Error::InvalidTree(format!("dangling child index {child}")));
                }
            }
        }
        if let Some(root) = self.root {
            if root >= self.nodes.len() {
                return Err(Error::InvalidTree(format!("dangling root index {root}")));
            }
            // Iterative colouring: grey on the stack means a back edge, i.e.
            // a cycle in what must unfold into a finite tree.
            #[derive(Clone, Copy, PartialEq)]
            enum Colour {
                White,
                Grey,
                Black,
            }
            let mut colour = vec![Colour::White; self.nodes.len()];
            let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
            colour[root] = Colour::Grey;
            while let Some(&mut (id, ref mut edge)) = stack.last_mut() {
                let children = [self.nodes[id].on_sale, self.nodes[id].on_no_sale];
                if *edge < 2 {
                    let child = children[*edge];
                    *edge += 1;
                    if let Some(c) = child {
                        match colour[c] {
                            Colour::Grey => {
                                return Err(Error::InvalidTree("cycle in decision tree".into()))
                            }
                            Colour::White => {
                                colour[c] = Colour::Grey;
                                stack.push((c, 0));
                            }
                            Colour::Black => {}
                        }
                    }
                } else {
                    colour[id] = Colour::Black;
                    stack.pop();
                }
            }
        }
        Ok(())
    }

    /// Exhaustive validation over reachable root-to-leaf paths: buyers
    /// distinct on every path. Depth at most `n` and the K-sale cap follow
    /// from distinctness and from sale branches ending once no copy is left;
    /// subtrees that sit beyond the K-th sale are unreachable and ignored.
    ///
    /// Walks every path, so on heavily shared arenas the cost is the size of
    /// the unfolded tree; `max_path_nodes` bounds the walk.
    pub fn validate_paths(&self, inst: &Instance, max_path_nodes: u64) -> Result<()> {
        self.validate_structure(inst)?;
        let root = match self.root {
            Some(r) => r,
            None => return Ok(()),
        };
        let mut visited = 0u64;
        let mut on_path = vec![false; inst.n()];
        self.validate_paths_rec(inst, root, inst.copies(), &mut on_path, &mut visited, max_path_nodes)
    }

    fn validate_paths_rec(
        &self,
        inst: &Instance,
        id: usize,
        sales_left: u32,
        on_path: &mut [bool],
        visited: &mut u64,
        max_path_nodes: u64,
    ) -> Result<()> {
        *visited += 1;
        if *visited > max_path_nodes {
            return Err(Error::BudgetExceeded(format!(
                "path validation visited more than {max_path_nodes} nodes"
            )));
        }
        let node = &self.nodes[id];
        if on_path[node.buyer] {
            return Err(Error::InvalidTree(format!(
                "buyer {} repeated on a root-to-leaf path",
                node.buyer
            )));
        }
        on_path[node.buyer] = true;
        if let Some(c) = node.on_sale {
            if sales_left > 1 {
                self.validate_paths_rec(inst, c, sales_left - 1, on_path, visited, max_path_nodes)?;
            }
        }
        if let Some(c) = node.on_no_sale {
            self.validate_paths_rec(inst, c, sales_left, on_path, visited, max_path_nodes)?;
        }
        on_path[node.buyer] = false;
        Ok(())
    }
}

/// Deterministic sampler of pre-discretized instances.
///
/// Every tail probability of the output is an integer multiple of
/// `1/(10 n^2)` and support values are distinct integers, so the result is a
/// fixed point of [`discretize`].
pub fn random_instance(
    n: usize,
    copies: u32,
    max_support: usize,
    value_range: (u64, u64),
    seed: u64,
) -> Result<Instance> {
    if n == 0 || copies == 0 || (copies as usize) > n {
        return Err(Error::InvalidParameter(format!(
            "need n >= K >= 1, got n={n} K={copies}"
        )));
    }
    if max_support == 0 {
        return Err(Error::InvalidParameter("need L >= 1".into()));
    }
    let (lo, hi) = value_range;
    if lo == 0 || hi < lo || ((hi - lo + 1) as usize) < max_support {
        return Err(Error::InvalidParameter(format!(
            "value range {lo}..={hi} cannot hold {max_support} distinct positive values"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid_units = 10 * (n as u64) * (n as u64);
    let mut buyers = Vec::with_capacity(n);
    for _ in 0..n {
        let count = rng.gen_range(1..=max_support);
        let mut values = BTreeSet::new();
        while values.len() < count {
            values.insert(rng.gen_range(lo..=hi));
        }
        let per_point_cap = (grid_units / count as u64).max(1);
        let points = values
            .into_iter()
            .map(|v| {
                let units = rng.gen_range(1..=per_point_cap);
                (rat_i(v as i64), rat(units as i64, grid_units as i64))
            })
            .collect();
        buyers.push(BuyerDistribution::new(points)?);
    }
    Instance::new(buyers, copies)
}
