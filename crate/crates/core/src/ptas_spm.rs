//! Configuration-enumeration search for near-optimal schedules.
//!
//! A schedule decomposes into permutable segments: runs of total success
//! probability at most `delta` (which may be reordered almost freely) and
//! single big buyers. A configuration records only the gridded weight of
//! each segment. For each configuration the reach probability of every
//! segment follows from a one-Bernoulli-per-segment recursion, buyers are
//! packed into segments by VersionGAP with those reach probabilities as bin
//! discounts, and the assembled schedule is evaluated exactly. The best
//! exact value over all configurations is returned.
//!
//! Faithful parameters are astronomically large even for small inputs, so
//! every derived field can be overridden; the search is exercised at
//! acceptance scale on all-big-buyer instances where segments collapse to
//! singletons and the configuration space is exactly enumerable.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::eval_spm;
use crate::model::{Instance, PostedPrice, SpmSchedule, SpmStep};
use crate::rational::{floor_to_multiple, format_rat, from_f64_exact, rat, rat_i, Rat};
use crate::versiongap::{
    solve_versiongap, FeasibleFamily, VgAssignment, VgBin, VgBinKind, VgInstance, VgObject,
    VgVersion,
};

/// Optional replacements for the derived search parameters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PtasOverrides {
    pub delta: Option<Rat>,
    pub weight_cap: Option<Rat>,
    pub segment_budget: Option<u64>,
    pub tau_grid: Option<Rat>,
}

/// Derived search parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PtasParams {
    pub epsilon: f64,
    /// Weight threshold below which a segment counts as small.
    pub delta: Rat,
    /// Cap on the total weight of a configuration.
    pub weight_cap: Rat,
    /// Cap on the number of segments (C).
    pub segment_budget: u64,
    /// Weight grid: segment weights are positive multiples of this.
    pub tau_grid: Rat,
    /// Which fields were overridden, echoed into metadata.
    pub overrides: PtasOverrides,
}

/// `delta = eps^3 / (20 K^3)`, `weight_cap = K ln(K/eps)`,
/// `C = ceil(2 weight_cap / delta) + n`, `tau_grid = delta / (20 C)`,
/// any of which an override replaces.
pub fn derive_params(
    epsilon: f64,
    copies: u32,
    n: usize,
    overrides: &PtasOverrides,
) -> Result<PtasParams> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0,1), got {epsilon}"
        )));
    }
    if copies < 1 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("need at least one buyer".into()));
    }
    let eps = from_f64_exact(epsilon)?;
    let k = rat_i(copies as i64);
    let delta = overrides
        .delta
        .clone()
        .unwrap_or_else(|| &eps * &eps * &eps / (rat_i(20) * &k * &k * &k));
    if !(delta > Rat::zero() && delta < Rat::one()) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0,1), got {delta}"
        )));
    }
    let weight_cap = match &overrides.weight_cap {
        Some(w) => w.clone(),
        None => from_f64_exact(copies as f64 * (copies as f64 / epsilon).ln())?,
    };
    if !weight_cap.is_positive() {
        return Err(Error::InvalidParameter(
            "weight cap must be positive".into(),
        ));
    }
    let segment_budget = match overrides.segment_budget {
        Some(c) => c,
        None => {
            let c: BigInt =
                (rat_i(2) * &weight_cap / &delta).ceil().to_integer() + BigInt::from(n);
            c.to_u64().unwrap_or(u64::MAX)
        }
    };
    if segment_budget == 0 {
        return Err(Error::InvalidParameter(
            "segment budget must be positive".into(),
        ));
    }
    let tau_grid = match &overrides.tau_grid {
        Some(t) => t.clone(),
        None => &delta / (rat_i(20) * rat_i(segment_budget.min(i64::MAX as u64) as i64)),
    };
    if !tau_grid.is_positive() {
        return Err(Error::InvalidParameter(
            "weight grid must be positive".into(),
        ));
    }
    Ok(PtasParams {
        epsilon,
        delta,
        weight_cap,
        segment_budget,
        tau_grid,
        overrides: overrides.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum SegmentKind {
    Small,
    Big,
}

/// One permutable segment of a configuration: its kind and gridded weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Segment {
    pub kind: SegmentKind,
    /// Weight in grid units, at least 1; the weight is `units * tau_grid`.
    pub weight_units: u64,
}

/// An ordered weight profile of permutable segments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default, Serialize)]
pub struct Configuration {
    pub segments: Vec<Segment>,
}

impl Configuration {
    pub fn segment_weight(&self, i: usize, params: &PtasParams) -> Rat {
        rat_i(self.segments[i].weight_units as i64) * &params.tau_grid
    }

    pub fn total_weight(&self, params: &PtasParams) -> Rat {
        self.segments
            .iter()
            .map(|s| rat_i(s.weight_units as i64) * &params.tau_grid)
            .sum()
    }

    pub fn validate(&self, params: &PtasParams) -> Result<()> {
        if self.segments.len() as u64 > params.segment_budget {
            return Err(Error::InvalidParameter("too many segments".into()));
        }
        for (i, seg) in self.segments.iter().enumerate() {
            if seg.weight_units == 0 {
                return Err(Error::InvalidParameter("zero-weight segment".into()));
            }
            let w = self.segment_weight(i, params);
            match seg.kind {
                SegmentKind::Small => {
                    if w > params.delta {
                        return Err(Error::InvalidParameter(
                            "small segment heavier than delta".into(),
                        ));
                    }
                }
                SegmentKind::Big => {
                    if w > Rat::one() {
                        return Err(Error::InvalidParameter(
                            "big segment heavier than 1".into(),
                        ));
                    }
                }
            }
        }
        if self.total_weight(params) > params.weight_cap {
            return Err(Error::InvalidParameter("total weight above cap".into()));
        }
        Ok(())
    }
}

/// Lazily enumerates every valid configuration exactly once, in
/// lexicographic prefix order over the alphabet (small weights ascending,
/// then big weights ascending). The first emitted item is the empty
/// configuration.
pub struct ConfigStream {
    alphabet: Vec<Segment>,
    weights: Vec<Rat>,
    max_len: u64,
    weight_cap: Rat,
    /// Current sequence as alphabet indices.
    current: Vec<usize>,
    current_weight: Rat,
    started: bool,
    done: bool,
}

pub(crate) fn segment_alphabet_for(params: &PtasParams) -> (Vec<Segment>, Vec<Rat>) {
    let small_max = (&params.delta / &params.tau_grid)
        .floor()
        .to_integer()
        .to_u64()
        .unwrap_or(0);
    let big_max = (Rat::one() / &params.tau_grid)
        .floor()
        .to_integer()
        .to_u64()
        .unwrap_or(0);
    let mut alphabet = Vec::new();
    for units in 1..=small_max {
        alphabet.push(Segment {
            kind: SegmentKind::Small,
            weight_units: units,
        });
    }
    for units in 1..=big_max {
        alphabet.push(Segment {
            kind: SegmentKind::Big,
            weight_units: units,
        });
    }
    let weights = alphabet
        .iter()
        .map(|s| rat_i(s.weight_units as i64) * &params.tau_grid)
        .collect();
    (alphabet, weights)
}

/// Budget guard plus stream construction. The guard bounds the full
/// prefix-tree size `sum_{l<=C} a^l`; exceeding `max_configurations` is an
/// error asking the caller for coarser parameters.
pub fn enumerate_configurations(
    params: &PtasParams,
    max_configurations: u64,
) -> Result<ConfigStream> {
    let (alphabet, weights) = segment_alphabet_for(params);
    let a = alphabet.len() as u128;
    let mut bound: u128 = 1; // the empty configuration
    let mut power: u128 = 1;
    for _ in 0..params.segment_budget.min(1 << 20) {
        power = power.saturating_mul(a);
        bound = bound.saturating_add(power);
        if bound > max_configurations as u128 {
            return Err(Error::BudgetExceeded(format!(
                "configuration space above {max_configurations}; raise epsilon or override the grid"
            )));
        }
        if power == 0 {
            break;
        }
    }
    Ok(ConfigStream {
        alphabet,
        weights,
        max_len: params.segment_budget,
        weight_cap: params.weight_cap.clone(),
        current: Vec::new(),
        current_weight: Rat::zero(),
        started: false,
        done: false,
    })
}

impl ConfigStream {
    fn fits(&self, idx: usize) -> bool {
        &self.current_weight + &self.weights[idx] <= self.weight_cap
    }

    fn emit(&self) -> Configuration {
        Configuration {
            segments: self.current.iter().map(|&i| self.alphabet[i]).collect(),
        }
    }
}

impl Iterator for ConfigStream {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.emit());
        }
        // Descend: extend with the first fitting letter.
        if (self.current.len() as u64) < self.max_len {
            if let Some(idx) = (0..self.alphabet.len()).find(|&i| self.fits(i)) {
                self.current.push(idx);
                self.current_weight += &self.weights[idx];
                return Some(self.emit());
            }
        }
        // Backtrack: advance the last letter to the next fitting one.
        while let Some(last) = self.current.pop() {
            self.current_weight -= &self.weights[last];
            if let Some(idx) = ((last + 1)..self.alphabet.len()).find(|&i| self.fits(i)) {
                self.current.push(idx);
                self.current_weight += &self.weights[idx];
                return Some(self.emit());
            }
        }
        self.done = true;
        None
    }
}

/// Reach probabilities for a configuration under the one-Bernoulli-per-
/// segment model: `rho(l, i)` is the probability that segment `i` (1-based)
/// is reached with at least `l` of the `K` copies left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscountTable {
    /// `rows[i][l]` for `i` in `0..=m` and `l` in `0..=K`; index 0 mirrors
    /// level 1 (reached at all), so each row reads as a tail distribution.
    rows: Vec<Vec<Rat>>,
    copies: u32,
}

impl DiscountTable {
    /// Position `i` is 1-based as in the recursion's statement.
    pub fn rho(&self, level: u32, position: usize) -> &Rat {
        &self.rows[position - 1][level as usize]
    }

    /// Reach probability of segment `i` (0-based): `rho(1, i+1)`.
    pub fn reach(&self, segment: usize) -> &Rat {
        &self.rows[segment][1]
    }

    pub fn positions(&self) -> usize {
        self.rows.len()
    }

    pub fn copies(&self) -> u32 {
        self.copies
    }
}

/// Computes the reach table for a configuration: each segment acts as one
/// Bernoulli trial with success probability equal to its weight, and
/// `rho(l, i+1) = rho(l, i) (1 - s_i) + rho(l+1, i) s_i`.
pub fn segment_discount_factors(
    config: &Configuration,
    params: &PtasParams,
    copies: u32,
) -> Result<DiscountTable> {
    let k = copies as usize;
    let m = config.segments.len();
    let zero = Rat::zero();
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(m + 1);
    let mut row = vec![Rat::one(); k + 1];
    rows.push(row.clone());
    for i in 0..m {
        let s = config.segment_weight(i, params);
        if s > Rat::one() {
            return Err(Error::InvalidParameter(format!(
                "segment {i} has weight {s} above 1"
            )));
        }
        let stay = Rat::one() - &s;
        let mut next = vec![Rat::zero(); k + 1];
        for l in 1..=k {
            let above = if l + 1 <= k { &row[l + 1] } else { &zero };
            next[l] = &row[l] * &stay + above * &s;
        }
        next[0] = next[1.min(k)].clone();
        rows.push(next.clone());
        row = next;
    }
    Ok(DiscountTable { rows, copies })
}

/// Builds the packing problem for one configuration: buyers are objects,
/// support prices are versions (profit `v * p`, size `p`), segment `i` is a
/// bin of capacity `weight_i` (floored to the `1/(10 n^2)` grid) and
/// discount equal to its reach probability. Big-buyer bins are exclusive to
/// a single object heavier than `delta`; each object may use at most one
/// bin.
pub fn config_to_versiongap(
    inst: &Instance,
    config: &Configuration,
    params: &PtasParams,
    table: &DiscountTable,
) -> Result<VgInstance> {
    if !inst.is_on_probability_grid() {
        return Err(Error::GridMismatch(
            "instance tails must be multiples of 1/(10 n^2); discretize first".into(),
        ));
    }
    let n = inst.n() as u32;
    let granularity = 10 * n * n;
    let unit = rat(1, granularity as i64);
    let objects: Vec<VgObject> = inst
        .buyers()
        .iter()
        .map(|b| VgObject {
            versions: b
                .support()
                .iter()
                .zip(b.tails())
                .map(|(pt, tail)| VgVersion {
                    profit: &pt.value * &tail,
                    size: tail,
                })
                .collect(),
        })
        .collect();
    let bins: Vec<VgBin> = config
        .segments
        .iter()
        .enumerate()
        .map(|(i, seg)| {
            let capacity = floor_to_multiple(&config.segment_weight(i, params), &unit);
            let kind = match seg.kind {
                SegmentKind::Small => VgBinKind::Shared,
                SegmentKind::Big => VgBinKind::Exclusive {
                    min_size_exclusive: params.delta.clone(),
                },
            };
            VgBin {
                capacity,
                discount: table.reach(i).clone(),
                kind,
            }
        })
        .collect();
    let vg = VgInstance {
        objects,
        bins,
        family: FeasibleFamily::AtMostOneBin,
        granularity,
    };
    vg.validate()?;
    Ok(vg)
}

/// Concatenates bin contents in configuration order, each bin internally
/// sorted by decreasing price (ties by buyer index).
pub fn assemble_schedule(
    inst: &Instance,
    config: &Configuration,
    assignment: &VgAssignment,
) -> SpmSchedule {
    let mut steps: Vec<SpmStep> = Vec::new();
    for bin in 0..config.segments.len() {
        let mut content: Vec<(Rat, usize)> = assignment
            .placements
            .iter()
            .filter(|p| p.bin == bin)
            .map(|p| {
                let price = inst.buyer(p.object).support()[p.version].value.clone();
                (price, p.object)
            })
            .collect();
        content.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        steps.extend(content.into_iter().map(|(price, buyer)| SpmStep {
            buyer,
            price: PostedPrice::At(price),
        }));
    }
    SpmSchedule::new(steps)
}

/// Enumeration and table budgets for one search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PtasBudget {
    pub max_configurations: u64,
    pub max_table_cells: u64,
}

impl Default for PtasBudget {
    fn default() -> Self {
        PtasBudget {
            max_configurations: 500_000,
            max_table_cells: 50_000_000,
        }
    }
}

/// Search metadata echoed with the result.
#[derive(Debug, Clone, Serialize)]
pub struct PtasMetadata {
    pub epsilon: f64,
    pub delta: String,
    pub weight_cap: String,
    pub segment_budget: u64,
    pub tau_grid: String,
    pub overridden: Vec<String>,
    pub configurations_examined: u64,
    pub best_configuration: Option<Configuration>,
}

fn overridden_fields(o: &PtasOverrides) -> Vec<String> {
    let mut out = Vec::new();
    if o.delta.is_some() {
        out.push("delta".into());
    }
    if o.weight_cap.is_some() {
        out.push("weight_cap".into());
    }
    if o.segment_budget.is_some() {
        out.push("segment_budget".into());
    }
    if o.tau_grid.is_some() {
        out.push("tau_grid".into());
    }
    out
}

fn metadata_for(params: &PtasParams) -> PtasMetadata {
    PtasMetadata {
        epsilon: params.epsilon,
        delta: format_rat(&params.delta),
        weight_cap: format_rat(&params.weight_cap),
        segment_budget: params.segment_budget,
        tau_grid: format_rat(&params.tau_grid),
        overridden: overridden_fields(&params.overrides),
        configurations_examined: 0,
        best_configuration: None,
    }
}

/// Full search: for every configuration, pack buyers with VersionGAP,
/// assemble the schedule and evaluate it exactly; returns the best schedule
/// by exact value (ties keep the earlier configuration in enumeration
/// order). The reported value is the exact schedule value, never the
/// packing objective.
pub fn ptas_spm(
    inst: &Instance,
    epsilon: f64,
    overrides: &PtasOverrides,
    budget: &PtasBudget,
) -> Result<(SpmSchedule, Rat, PtasMetadata)> {
    inst.validate()?;
    let params = derive_params(epsilon, inst.copies(), inst.n(), overrides)?;
    let mut metadata = metadata_for(&params);
    let stream = enumerate_configurations(&params, budget.max_configurations)?;

    let mut best_value = Rat::zero();
    let mut best_schedule = SpmSchedule::default();
    let mut best_config: Option<Configuration> = None;
    for config in stream {
        metadata.configurations_examined += 1;
        let table = segment_discount_factors(&config, &params, inst.copies())?;
        let vg = config_to_versiongap(inst, &config, &params, &table)?;
        let (assignment, _) = solve_versiongap(&vg, budget.max_table_cells)?;
        let schedule = assemble_schedule(inst, &config, &assignment);
        let value = eval_spm(inst, &schedule)?;
        if value > best_value {
            best_value = value;
            best_schedule = schedule;
            best_config = Some(config);
        }
    }
    metadata.best_configuration = best_config;
    Ok((best_schedule, best_value, metadata))
}
