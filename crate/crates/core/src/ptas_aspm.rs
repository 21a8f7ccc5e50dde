//! Configuration-enumeration search for near-optimal adaptive mechanisms.
//!
//! The adaptive analogue of the schedule search: configurations are trees
//! of permutable segments. A child edge either carries a copies-remaining
//! label (taken when the stock after the parent segment matches) or is the
//! unconditional continuation of a non-branching run; mass with no matching
//! child stops. Packing uses VersionGAP with the antichain family of the
//! configuration tree, so one buyer may serve several mutually exclusive
//! branches while every root-to-leaf path still offers to each buyer at
//! most once.

use std::collections::HashMap;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::eval_aspm;
use crate::model::{AspmNode, AspmTree, Instance};
use crate::ptas_spm::{segment_alphabet_for, PtasOverrides, PtasParams, SegmentKind};
use crate::rational::{floor_to_multiple, format_rat, from_f64_exact, rat, rat_i, Rat};
use crate::versiongap::{
    solve_versiongap, FeasibleFamily, VgAssignment, VgBin, VgBinKind, VgInstance, VgObject,
    VgVersion,
};

/// Optional replacements for the derived tree-search parameters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AspmOverrides {
    pub delta: Option<Rat>,
    /// Per-segment weight bound H.
    pub h_bound: Option<Rat>,
    /// Non-branching segment count bound D (enters only the C_tree default).
    pub d_bound: Option<f64>,
    pub c_tree: Option<u64>,
    pub per_path_segments: Option<u64>,
    pub per_path_weight: Option<Rat>,
    pub tau_grid: Option<Rat>,
}

/// Derived tree-search parameters. The paper-true `D = (K/eps)^{O(K)}` and
/// `H = (K/eps)^{O(1)}` hide constants; the defaults here use unit
/// constants and are expected to be overridden at any runnable scale.
#[derive(Debug, Clone, PartialEq)]
pub struct AspmPtasParams {
    pub epsilon: f64,
    pub delta: Rat,
    pub d_bound: f64,
    pub h_bound: Rat,
    /// Total segment budget C_tree.
    pub c_tree: u64,
    pub per_path_segments: u64,
    pub per_path_weight: Rat,
    pub tau_grid: Rat,
    pub overrides: AspmOverrides,
}

pub fn derive_aspm_params(
    epsilon: f64,
    copies: u32,
    n: usize,
    overrides: &AspmOverrides,
) -> Result<AspmPtasParams> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0,1), got {epsilon}"
        )));
    }
    if copies < 1 || n < 1 {
        return Err(Error::InvalidParameter(
            "need K >= 1 and at least one buyer".into(),
        ));
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
    let spine_weight = copies as f64 * (copies as f64 / epsilon).ln();
    let h_bound = match &overrides.h_bound {
        Some(h) => h.clone(),
        None => from_f64_exact(spine_weight.max(1.0))?,
    };
    let d_bound = overrides
        .d_bound
        .unwrap_or_else(|| (copies as f64 / epsilon).powi(copies as i32).max(1.0));
    let delta_f = delta.to_f64().unwrap_or(f64::MIN_POSITIVE);
    let c_tree = match overrides.c_tree {
        Some(c) => c,
        None => {
            let c = (2.0 * d_bound * h_bound.to_f64().unwrap_or(f64::MAX) / delta_f).ceil();
            if c.is_finite() && c < u64::MAX as f64 {
                (c as u64).max(1)
            } else {
                u64::MAX
            }
        }
    };
    if c_tree == 0 {
        return Err(Error::InvalidParameter("segment budget must be positive".into()));
    }
    let per_path_segments = match overrides.per_path_segments {
        Some(p) => p,
        None => {
            let p = (2.0 * copies as f64 * h_bound.to_f64().unwrap_or(f64::MAX) / delta_f).ceil();
            if p.is_finite() && p < u64::MAX as f64 {
                (p as u64).max(1)
            } else {
                u64::MAX
            }
        }
    };
    let per_path_weight = overrides
        .per_path_weight
        .clone()
        .unwrap_or_else(|| &k * &h_bound);
    if !per_path_weight.is_positive() {
        return Err(Error::InvalidParameter("path weight cap must be positive".into()));
    }
    let tau_grid = match &overrides.tau_grid {
        Some(t) => t.clone(),
        None => &delta / (rat_i(20) * rat_i(c_tree.min(i64::MAX as u64) as i64)),
    };
    if !tau_grid.is_positive() {
        return Err(Error::InvalidParameter("weight grid must be positive".into()));
    }
    let _ = n;
    Ok(AspmPtasParams {
        epsilon,
        delta,
        d_bound,
        h_bound,
        c_tree,
        per_path_segments,
        per_path_weight,
        tau_grid,
        overrides: overrides.clone(),
    })
}

/// One segment of a tree configuration. `parent == None` marks the root;
/// `branch_label == Some(j)` means the edge from the parent is taken when
/// exactly `j` copies remain after the parent segment, `None` means the
/// edge is taken unconditionally (the parent does not branch, so an
/// unlabeled child must be an only child).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TreeSegment {
    pub kind: SegmentKind,
    pub weight_units: u64,
    pub parent: Option<usize>,
    pub branch_label: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct TreeConfiguration {
    /// Segments in an order where every parent precedes its children;
    /// index 0 is the root when non-empty.
    pub segments: Vec<TreeSegment>,
}

impl TreeConfiguration {
    pub fn segment_weight(&self, i: usize, params: &AspmPtasParams) -> Rat {
        rat_i(self.segments[i].weight_units as i64) * &params.tau_grid
    }

    pub fn children_of(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.segments
            .iter()
            .enumerate()
            .filter(move |(_, s)| s.parent == Some(i))
            .map(|(c, _)| c)
    }

    /// The child receiving the process from segment `i` with `copies`
    /// remaining: a matching labeled child, else an unconditional child.
    pub fn route(&self, i: usize, copies: u32) -> Option<usize> {
        let mut unconditional = None;
        for c in self.children_of(i) {
            match self.segments[c].branch_label {
                Some(l) if l == copies => return Some(c),
                None => unconditional = Some(c),
                _ => {}
            }
        }
        unconditional
    }

    pub fn validate(&self, params: &AspmPtasParams, copies: u32) -> Result<()> {
        if self.segments.len() as u64 > params.c_tree {
            return Err(Error::InvalidParameter("too many segments".into()));
        }
        if self.segments.is_empty() {
            return Ok(());
        }
        if self.segments[0].parent.is_some() {
            return Err(Error::InvalidParameter("segment 0 must be the root".into()));
        }
        for (i, seg) in self.segments.iter().enumerate() {
            match seg.parent {
                None => {
                    if i != 0 {
                        return Err(Error::InvalidParameter("two roots".into()));
                    }
                    if seg.branch_label.is_some() {
                        return Err(Error::InvalidParameter("labeled root".into()));
                    }
                }
                Some(p) => {
                    if p >= i {
                        return Err(Error::InvalidParameter(
                            "parents must precede children".into(),
                        ));
                    }
                    if let Some(l) = seg.branch_label {
                        if l < 1 || l > copies {
                            return Err(Error::InvalidParameter(format!(
                                "branch label {l} outside 1..=K"
                            )));
                        }
                    }
                }
            }
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
                    if w > Rat::one() || w > params.h_bound {
                        return Err(Error::InvalidParameter(
                            "big segment heavier than min(1, H)".into(),
                        ));
                    }
                }
            }
        }
        // Sibling structure: distinct labels, unconditional child alone.
        for i in 0..self.segments.len() {
            let children: Vec<usize> = self.children_of(i).collect();
            let mut labels = Vec::new();
            let mut unconditional = 0usize;
            for &c in &children {
                match self.segments[c].branch_label {
                    None => unconditional += 1,
                    Some(l) => {
                        if labels.contains(&l) {
                            return Err(Error::InvalidParameter(format!(
                                "duplicate branch label {l}"
                            )));
                        }
                        labels.push(l);
                    }
                }
            }
            if unconditional > 0 && children.len() > 1 {
                return Err(Error::InvalidParameter(
                    "unconditional child must be an only child".into(),
                ));
            }
        }
        // Per-path caps.
        let mut depth = vec![0u64; self.segments.len()];
        let mut path_weight = vec![Rat::zero(); self.segments.len()];
        for i in 0..self.segments.len() {
            let w = self.segment_weight(i, params);
            match self.segments[i].parent {
                None => {
                    depth[i] = 1;
                    path_weight[i] = w;
                }
                Some(p) => {
                    depth[i] = depth[p] + 1;
                    path_weight[i] = &path_weight[p] + &w;
                }
            }
            if depth[i] > params.per_path_segments {
                return Err(Error::InvalidParameter("path too long".into()));
            }
            if path_weight[i] > params.per_path_weight {
                return Err(Error::InvalidParameter("path too heavy".into()));
            }
        }
        Ok(())
    }
}

struct Slot {
    parent: Option<usize>,
    label: Option<u32>,
    path_segments: u64,
    path_weight: Rat,
}

/// Enumerates every valid tree configuration exactly once.
///
/// Generation grammar: fill pending child slots depth-first; for each slot
/// choose a segment letter (ascending alphabet) and then its child-slot
/// set: none, one unconditional, or a non-empty set of distinct labels in
/// `1..=K` (ascending label-mask order). The empty configuration is
/// emitted first. Eager because tree interleavings do not stream as neatly
/// as sequences; `max_configurations` bounds both output size and search
/// work.
pub fn enumerate_tree_configurations(
    params: &AspmPtasParams,
    copies: u32,
    max_configurations: u64,
) -> Result<Vec<TreeConfiguration>> {
    let spm_like = PtasParams {
        epsilon: params.epsilon,
        delta: params.delta.clone(),
        weight_cap: params.per_path_weight.clone(),
        segment_budget: params.c_tree,
        tau_grid: params.tau_grid.clone(),
        overrides: PtasOverrides::default(),
    };
    let (mut alphabet, mut weights) = segment_alphabet_for(&spm_like);
    // Big segments are additionally bounded by H.
    let keep: Vec<bool> = alphabet
        .iter()
        .zip(&weights)
        .map(|(s, w)| match s.kind {
            SegmentKind::Small => true,
            SegmentKind::Big => w <= &params.h_bound,
        })
        .collect();
    let mut it = keep.iter();
    alphabet.retain(|_| *it.next().unwrap());
    let mut it = keep.iter();
    weights.retain(|_| *it.next().unwrap());

    let mut out = Vec::new();
    out.push(TreeConfiguration::default());
    let mut visits: u64 = 0;
    let root_slot = Slot {
        parent: None,
        label: None,
        path_segments: 0,
        path_weight: Rat::zero(),
    };
    let mut segments: Vec<TreeSegment> = Vec::new();
    fill_slots(
        params,
        copies,
        &alphabet,
        &weights,
        &mut segments,
        &[root_slot],
        &mut out,
        &mut visits,
        max_configurations,
    )?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn fill_slots(
    params: &AspmPtasParams,
    copies: u32,
    alphabet: &[crate::ptas_spm::Segment],
    weights: &[Rat],
    segments: &mut Vec<TreeSegment>,
    pending: &[Slot],
    out: &mut Vec<TreeConfiguration>,
    visits: &mut u64,
    max_configurations: u64,
) -> Result<()> {
    *visits += 1;
    if *visits > max_configurations.saturating_mul(64) {
        return Err(Error::BudgetExceeded(format!(
            "tree enumeration search exceeded {max_configurations} configurations"
        )));
    }
    let Some((slot, rest)) = pending.split_first() else {
        if out.len() as u64 >= max_configurations {
            return Err(Error::BudgetExceeded(format!(
                "tree configuration space above {max_configurations}"
            )));
        }
        out.push(TreeConfiguration {
            segments: segments.clone(),
        });
        return Ok(());
    };
    if segments.len() as u64 >= params.c_tree {
        return Ok(()); // no letter can fill this slot
    }
    for (idx, letter) in alphabet.iter().enumerate() {
        let w = &weights[idx];
        if slot.path_segments + 1 > params.per_path_segments {
            continue;
        }
        let path_weight = &slot.path_weight + w;
        if path_weight > params.per_path_weight {
            continue;
        }
        let me = segments.len();
        segments.push(TreeSegment {
            kind: letter.kind,
            weight_units: letter.weight_units,
            parent: slot.parent,
            branch_label: slot.label,
        });
        // Child-slot sets: none, one unconditional, or labeled subsets.
        for option in 0..=(1u32 << copies) {
            let mut new_pending: Vec<Slot> = Vec::new();
            if option == 1 << copies {
                new_pending.push(Slot {
                    parent: Some(me),
                    label: None,
                    path_segments: slot.path_segments + 1,
                    path_weight: path_weight.clone(),
                });
            } else {
                for l in 1..=copies {
                    if option & (1 << (l - 1)) != 0 {
                        new_pending.push(Slot {
                            parent: Some(me),
                            label: Some(l),
                            path_segments: slot.path_segments + 1,
                            path_weight: path_weight.clone(),
                        });
                    }
                }
            }
            let mut next: Vec<Slot> = new_pending;
            next.extend(rest.iter().map(|s| Slot {
                parent: s.parent,
                label: s.label,
                path_segments: s.path_segments,
                path_weight: s.path_weight.clone(),
            }));
            fill_slots(
                params,
                copies,
                alphabet,
                weights,
                segments,
                &next,
                out,
                visits,
                max_configurations,
            )?;
        }
        segments.pop();
    }
    Ok(())
}

/// Entry distributions and reach probabilities of every segment: the
/// root is entered with all `K` copies; each segment is one Bernoulli
/// trial routing its outgoing mass to the child whose label matches the
/// copies remaining (or the unconditional child), stopping otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDiscounts {
    /// `entry[seg][j]` = probability of entering `seg` with exactly `j`
    /// copies left, `j` in `0..=K` (index 0 stays zero).
    pub entry: Vec<Vec<Rat>>,
    /// Reach probability of each segment (sum of its entry row).
    pub reach: Vec<Rat>,
}

pub fn tree_discount_factors(
    tc: &TreeConfiguration,
    params: &AspmPtasParams,
    copies: u32,
) -> Result<TreeDiscounts> {
    let k = copies as usize;
    let m = tc.segments.len();
    let mut entry = vec![vec![Rat::zero(); k + 1]; m];
    if m > 0 {
        entry[0][k] = Rat::one();
    }
    for i in 0..m {
        let s = tc.segment_weight(i, params);
        if s > Rat::one() {
            return Err(Error::InvalidParameter(format!(
                "segment {i} has weight {s} above 1"
            )));
        }
        for j in 1..=k {
            let mass = entry[i][j].clone();
            if mass.is_zero() {
                continue;
            }
            // Sale: one copy consumed.
            let sold = &mass * &s;
            if j > 1 {
                if let Some(c) = tc.route(i, j as u32 - 1) {
                    entry[c][j - 1] += &sold;
                }
            }
            // No sale.
            let kept = mass - sold;
            if let Some(c) = tc.route(i, j as u32) {
                entry[c][j] += kept;
            }
        }
    }
    let reach = entry
        .iter()
        .map(|row| row.iter().skip(1).cloned().sum())
        .collect();
    Ok(TreeDiscounts { entry, reach })
}

/// As the schedule reduction, except objects may occupy any antichain of
/// the configuration tree: branches are mutually exclusive, so a buyer in
/// two incomparable bins is still offered to at most once per realized
/// path.
pub fn tree_config_to_versiongap(
    inst: &Instance,
    tc: &TreeConfiguration,
    params: &AspmPtasParams,
    discounts: &TreeDiscounts,
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
    let bins: Vec<VgBin> = tc
        .segments
        .iter()
        .enumerate()
        .map(|(i, seg)| {
            let capacity = floor_to_multiple(&tc.segment_weight(i, params), &unit);
            let kind = match seg.kind {
                SegmentKind::Small => VgBinKind::Shared,
                SegmentKind::Big => VgBinKind::Exclusive {
                    min_size_exclusive: params.delta.clone(),
                },
            };
            VgBin {
                capacity,
                discount: discounts.reach[i].clone(),
                kind,
            }
        })
        .collect();
    let vg = VgInstance {
        objects,
        bins,
        family: FeasibleFamily::TreeAntichains {
            parent: tc.segments.iter().map(|s| s.parent).collect(),
        },
        granularity,
    };
    vg.validate()?;
    Ok(vg)
}

/// Materializes the adaptive mechanism: each segment becomes its bin
/// content in decreasing-price order with sales tracked node by node, and
/// segment ends route on copies remaining. States (segment, position,
/// copies) are shared in the arena.
pub fn assemble_aspm(
    inst: &Instance,
    tc: &TreeConfiguration,
    assignment: &VgAssignment,
    copies: u32,
) -> AspmTree {
    let mut content: Vec<Vec<(Rat, usize)>> = vec![Vec::new(); tc.segments.len()];
    for p in &assignment.placements {
        let price = inst.buyer(p.object).support()[p.version].value.clone();
        content[p.bin].push((price, p.object));
    }
    for c in content.iter_mut() {
        c.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    }
    let mut tree = AspmTree::empty();
    if tc.segments.is_empty() {
        return tree;
    }
    let mut memo: HashMap<(usize, usize, u32), Option<usize>> = HashMap::new();
    let root = build_segment_node(tc, &content, &mut tree, &mut memo, 0, 0, copies);
    tree.root = root;
    tree
}

fn build_segment_node(
    tc: &TreeConfiguration,
    content: &[Vec<(Rat, usize)>],
    tree: &mut AspmTree,
    memo: &mut HashMap<(usize, usize, u32), Option<usize>>,
    seg: usize,
    pos: usize,
    copies: u32,
) -> Option<usize> {
    if copies == 0 {
        return None;
    }
    if let Some(&id) = memo.get(&(seg, pos, copies)) {
        return id;
    }
    let id = if pos == content[seg].len() {
        match tc.route(seg, copies) {
            Some(c) => build_segment_node(tc, content, tree, memo, c, 0, copies),
            None => None,
        }
    } else {
        let (price, buyer) = content[seg][pos].clone();
        let on_sale = if copies > 1 {
            build_segment_node(tc, content, tree, memo, seg, pos + 1, copies - 1)
        } else {
            None
        };
        let on_no_sale = build_segment_node(tc, content, tree, memo, seg, pos + 1, copies);
        Some(tree.add_node(AspmNode {
            buyer,
            price,
            on_sale,
            on_no_sale,
        }))
    };
    memo.insert((seg, pos, copies), id);
    id
}

/// Search metadata echoed with the result, including shape statistics of
/// the winning configuration.
#[derive(Debug, Clone, Serialize)]
pub struct AspmPtasMetadata {
    pub epsilon: f64,
    pub delta: String,
    pub h_bound: String,
    pub d_bound: f64,
    pub c_tree: u64,
    pub per_path_segments: u64,
    pub per_path_weight: String,
    pub tau_grid: String,
    pub overridden: Vec<String>,
    pub configurations_examined: u64,
    pub best_configuration: Option<TreeConfiguration>,
    pub best_segment_count: usize,
    pub best_max_depth: u64,
    pub best_branching_segments: usize,
}

fn overridden_fields(o: &AspmOverrides) -> Vec<String> {
    let mut out = Vec::new();
    if o.delta.is_some() {
        out.push("delta".into());
    }
    if o.h_bound.is_some() {
        out.push("h_bound".into());
    }
    if o.d_bound.is_some() {
        out.push("d_bound".into());
    }
    if o.c_tree.is_some() {
        out.push("c_tree".into());
    }
    if o.per_path_segments.is_some() {
        out.push("per_path_segments".into());
    }
    if o.per_path_weight.is_some() {
        out.push("per_path_weight".into());
    }
    if o.tau_grid.is_some() {
        out.push("tau_grid".into());
    }
    out
}

/// Budgets for one tree search; the table budget bounds each VersionGAP
/// solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AspmPtasBudget {
    pub max_configurations: u64,
    pub max_table_cells: u64,
}

impl Default for AspmPtasBudget {
    fn default() -> Self {
        AspmPtasBudget {
            max_configurations: 500_000,
            max_table_cells: 50_000_000,
        }
    }
}

/// Full tree search. Returns the best assembled mechanism by exact value
/// (ties keep the earlier configuration in enumeration order), with the
/// exact evaluation as the reported value.
pub fn ptas_aspm(
    inst: &Instance,
    epsilon: f64,
    overrides: &AspmOverrides,
    budget: &AspmPtasBudget,
) -> Result<(AspmTree, Rat, AspmPtasMetadata)> {
    inst.validate()?;
    let params = derive_aspm_params(epsilon, inst.copies(), inst.n(), overrides)?;
    let copies = inst.copies();
    let configs = enumerate_tree_configurations(&params, copies, budget.max_configurations)?;

    let mut metadata = AspmPtasMetadata {
        epsilon: params.epsilon,
        delta: format_rat(&params.delta),
        h_bound: format_rat(&params.h_bound),
        d_bound: params.d_bound,
        c_tree: params.c_tree,
        per_path_segments: params.per_path_segments,
        per_path_weight: format_rat(&params.per_path_weight),
        tau_grid: format_rat(&params.tau_grid),
        overridden: overridden_fields(&params.overrides),
        configurations_examined: 0,
        best_configuration: None,
        best_segment_count: 0,
        best_max_depth: 0,
        best_branching_segments: 0,
    };

    let mut best_value = Rat::zero();
    let mut best_tree = AspmTree::empty();
    let mut best_config: Option<TreeConfiguration> = None;
    for tc in configs {
        metadata.configurations_examined += 1;
        let discounts = tree_discount_factors(&tc, &params, copies)?;
        let vg = tree_config_to_versiongap(inst, &tc, &params, &discounts)?;
        let (assignment, _) = solve_versiongap(&vg, budget.max_table_cells)?;
        let tree = assemble_aspm(inst, &tc, &assignment, copies);
        let value = eval_aspm(inst, &tree)?;
        if value > best_value {
            best_value = value;
            best_tree = tree;
            best_config = Some(tc);
        }
    }
    if let Some(tc) = &best_config {
        metadata.best_segment_count = tc.segments.len();
        let mut depth = vec![0u64; tc.segments.len()];
        for i in 0..tc.segments.len() {
            depth[i] = match tc.segments[i].parent {
                None => 1,
                Some(p) => depth[p] + 1,
            };
        }
        metadata.best_max_depth = depth.iter().copied().max().unwrap_or(0);
        metadata.best_branching_segments = (0..tc.segments.len())
            .filter(|&i| tc.children_of(i).count() > 1)
            .count();
    }
    metadata.best_configuration = best_config;
    Ok((best_tree, best_value, metadata))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BuyerDistribution;
    use crate::oracles::{exact_aspm_value, OracleBudget};
    use crate::ptas_spm::{
        enumerate_configurations, ptas_spm, segment_discount_factors, Configuration,
        PtasBudget, Segment,
    };
    use crate::rational::to_f64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tree_params(copies: u32, n: usize) -> AspmPtasParams {
        derive_aspm_params(
            0.5,
            copies,
            n,
            &AspmOverrides {
                h_bound: Some(rat_i(1)),
                c_tree: Some(n as u64),
                per_path_segments: Some(n as u64),
                per_path_weight: Some(rat_i(n as i64)),
                tau_grid: Some(rat(1, 5)),
                ..Default::default()
            },
        )
        .unwrap()
    }

    fn all_big_instance(seed: u64, n: usize, copies: u32) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let buyers = (0..n)
            .map(|_| {
                let two = rng.gen_bool(0.6);
                let mut vals: Vec<i64> = Vec::new();
                while vals.len() < if two { 2 } else { 1 } {
                    let v = rng.gen_range(1..=20);
                    if !vals.contains(&v) {
                        vals.push(v);
                    }
                }
                vals.sort_unstable();
                if two {
                    let t2 = rng.gen_range(1..=4);
                    let t1 = rng.gen_range((t2 + 1)..=5);
                    BuyerDistribution::new(vec![
                        (rat_i(vals[0]), rat(t1 - t2, 5)),
                        (rat_i(vals[1]), rat(t2, 5)),
                    ])
                    .unwrap()
                } else {
                    let t = rng.gen_range(1..=5);
                    BuyerDistribution::new(vec![(rat_i(vals[0]), rat(t, 5))]).unwrap()
                }
            })
            .collect();
        Instance::new(buyers, copies).unwrap()
    }

    #[test]
    fn hand_countable_tree_space() {
        // Alphabet: big segments of weight 1/2 or 1 (tau = 1/2, delta tiny).
        // C_tree = 2, K = 2: the empty tree, 2 single-segment trees, and
        // 2 roots x 3 slot types (unconditional, label 1, label 2) x 2 child
        // letters = 12 two-segment trees. 15 total.
        let params = derive_aspm_params(
            0.5,
            2,
            2,
            &AspmOverrides {
                h_bound: Some(rat_i(1)),
                c_tree: Some(2),
                per_path_segments: Some(2),
                per_path_weight: Some(rat_i(2)),
                tau_grid: Some(rat(1, 2)),
                ..Default::default()
            },
        )
        .unwrap();
        let configs = enumerate_tree_configurations(&params, 2, 100_000).unwrap();
        assert_eq!(configs.len(), 15);
        for tc in &configs {
            tc.validate(&params, 2).unwrap();
        }
        // Exactly once: no duplicates under a full structural key.
        let mut seen = std::collections::HashSet::new();
        for tc in &configs {
            assert!(seen.insert(format!("{tc:?}")));
        }
    }

    #[test]
    fn path_trees_reproduce_sequence_discounts() {
        // A chain of unconditional children must match the sequence
        // recursion entrywise.
        let tp = tree_params(2, 4);
        let sp = crate::ptas_spm::derive_params(
            0.5,
            2,
            4,
            &crate::ptas_spm::PtasOverrides {
                weight_cap: Some(rat_i(4)),
                segment_budget: Some(4),
                tau_grid: Some(rat(1, 5)),
                ..Default::default()
            },
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let m = rng.gen_range(1..=4usize);
            let units: Vec<u64> = (0..m).map(|_| rng.gen_range(1..=5)).collect();
            let chain = TreeConfiguration {
                segments: units
                    .iter()
                    .enumerate()
                    .map(|(i, &u)| TreeSegment {
                        kind: SegmentKind::Big,
                        weight_units: u,
                        parent: if i == 0 { None } else { Some(i - 1) },
                        branch_label: None,
                    })
                    .collect(),
            };
            let seq = Configuration {
                segments: units
                    .iter()
                    .map(|&u| Segment {
                        kind: SegmentKind::Big,
                        weight_units: u,
                    })
                    .collect(),
            };
            let td = tree_discount_factors(&chain, &tp, 2).unwrap();
            let sd = segment_discount_factors(&seq, &sp, 2).unwrap();
            for i in 0..m {
                assert_eq!(&td.reach[i], sd.reach(i), "position {i} of {units:?}");
            }
        }
    }

    #[test]
    fn single_root_and_labeled_child_examples() {
        let params = tree_params(1, 2);
        let single = TreeConfiguration {
            segments: vec![TreeSegment {
                kind: SegmentKind::Big,
                weight_units: 5,
                parent: None,
                branch_label: None,
            }],
        };
        let d = tree_discount_factors(&single, &params, 1).unwrap();
        assert_eq!(d.reach[0], Rat::one());

        // Root weight 1/2 (units 5, tau 1/10), one child labeled K=1: the
        // child is reached only on the no-sale outcome.
        let params = derive_aspm_params(
            0.5,
            1,
            2,
            &AspmOverrides {
                h_bound: Some(rat_i(1)),
                c_tree: Some(2),
                per_path_segments: Some(2),
                per_path_weight: Some(rat_i(2)),
                tau_grid: Some(rat(1, 10)),
                ..Default::default()
            },
        )
        .unwrap();
        let tc = TreeConfiguration {
            segments: vec![
                TreeSegment {
                    kind: SegmentKind::Big,
                    weight_units: 5,
                    parent: None,
                    branch_label: None,
                },
                TreeSegment {
                    kind: SegmentKind::Big,
                    weight_units: 5,
                    parent: Some(0),
                    branch_label: Some(1),
                },
            ],
        };
        let d = tree_discount_factors(&tc, &params, 1).unwrap();
        assert_eq!(d.reach[1], rat(1, 2));
    }

    #[test]
    fn path_antichains_degenerate_to_single_bins() {
        let inst = all_big_instance(2, 3, 2);
        let params = tree_params(2, 3);
        let chain = TreeConfiguration {
            segments: (0..3)
                .map(|i| TreeSegment {
                    kind: SegmentKind::Big,
                    weight_units: 5,
                    parent: if i == 0 { None } else { Some(i - 1) },
                    branch_label: None,
                })
                .collect(),
        };
        let d = tree_discount_factors(&chain, &params, 2).unwrap();
        let vg = tree_config_to_versiongap(&inst, &chain, &params, &d).unwrap();
        let subsets = vg.family.subsets(3).unwrap();
        assert_eq!(subsets, vec![0b000, 0b001, 0b010, 0b100]);
        vg.validate().unwrap();

        // Sibling bins are independently usable by one object.
        let siblings = TreeConfiguration {
            segments: vec![
                TreeSegment {
                    kind: SegmentKind::Big,
                    weight_units: 5,
                    parent: None,
                    branch_label: None,
                },
                TreeSegment {
                    kind: SegmentKind::Big,
                    weight_units: 5,
                    parent: Some(0),
                    branch_label: Some(1),
                },
                TreeSegment {
                    kind: SegmentKind::Big,
                    weight_units: 5,
                    parent: Some(0),
                    branch_label: Some(2),
                },
            ],
        };
        let d = tree_discount_factors(&siblings, &params, 2).unwrap();
        let vg = tree_config_to_versiongap(&inst, &siblings, &params, &d).unwrap();
        let subsets = vg.family.subsets(3).unwrap();
        assert_eq!(subsets, vec![0b000, 0b001, 0b010, 0b100, 0b110]);
    }

    #[test]
    fn assembled_trees_are_valid_and_k1_matches_spm_search() {
        for seed in 0..5 {
            let n = 2 + (seed as usize % 2);
            let inst = all_big_instance(seed, n, 1);
            let overrides = AspmOverrides {
                h_bound: Some(rat_i(1)),
                c_tree: Some(n as u64),
                per_path_segments: Some(n as u64),
                per_path_weight: Some(rat_i(n as i64)),
                tau_grid: Some(rat(1, 5)),
                ..Default::default()
            };
            let (tree, value, meta) =
                ptas_aspm(&inst, 0.5, &overrides, &AspmPtasBudget::default()).unwrap();
            tree.validate_paths(&inst, 1_000_000).unwrap();
            assert!(meta.configurations_examined > 0);

            let spm_overrides = crate::ptas_spm::PtasOverrides {
                weight_cap: Some(rat_i(n as i64)),
                segment_budget: Some(n as u64),
                tau_grid: Some(rat(1, 5)),
                ..Default::default()
            };
            let (_, spm_value, _) =
                ptas_spm(&inst, 0.5, &spm_overrides, &PtasBudget::default()).unwrap();
            assert_eq!(value, spm_value, "seed {seed}: K=1 adaptivity is void");
        }
    }

    #[test]
    fn tree_search_brackets_the_exact_optimum_at_k2() {
        for seed in 0..4 {
            let n = 3;
            let inst = all_big_instance(40 + seed, n, 2);
            let overrides = AspmOverrides {
                h_bound: Some(rat_i(1)),
                c_tree: Some(4),
                per_path_segments: Some(n as u64),
                per_path_weight: Some(rat_i(n as i64)),
                tau_grid: Some(rat(1, 5)),
                ..Default::default()
            };
            let (tree, value, _) =
                ptas_aspm(&inst, 0.5, &overrides, &AspmPtasBudget::default()).unwrap();
            let opt = exact_aspm_value(&inst, &OracleBudget::default()).unwrap();
            assert!(value <= opt, "seed {seed}: above the adaptive optimum");
            assert!(
                to_f64(&value) >= 0.5 * to_f64(&opt),
                "seed {seed}: {} below half of {}",
                to_f64(&value),
                to_f64(&opt)
            );
            tree.validate_paths(&inst, 1_000_000).unwrap();
        }
    }
}
