//! VersionGAP: place versions of objects into discounted bins.
//!
//! Each object offers versions (profit, size); bin `l` has a capacity, a
//! discount multiplying the profit of everything placed in it, and the set
//! of bins used by one object must lie in a feasible family. Sizes and
//! capacities live on a `1/M` grid, which makes the consumed-capacity
//! dynamic program exact with integer unit bookkeeping.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{is_multiple_of, rat, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VgVersion {
    pub profit: Rat,
    pub size: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VgObject {
    pub versions: Vec<VgVersion>,
}

/// Bin occupancy rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VgBinKind {
    /// Any number of objects up to capacity.
    Shared,
    /// At most one object, and only versions strictly larger than the
    /// threshold. Used for big-buyer bins so small buyers cannot stuff a
    /// bin whose discount model assumes a single heavy offer.
    Exclusive { min_size_exclusive: Rat },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VgBin {
    pub capacity: Rat,
    pub discount: Rat,
    pub kind: VgBinKind,
}

/// Feasible sets of bins an object may occupy, as bitmasks over bin
/// indices. The two intensional forms cover what the mechanism reductions
/// need without materializing families up front.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibleFamily {
    Explicit(Vec<u32>),
    AtMostOneBin,
    /// Antichains of the given forest: no two chosen bins on one
    /// root-to-leaf path. `parent[i]` must point to a lower index.
    TreeAntichains { parent: Vec<Option<usize>> },
}

impl FeasibleFamily {
    /// Materializes the family as a sorted list of masks.
    pub fn subsets(&self, bins: usize) -> Result<Vec<u32>> {
        if bins > 20 {
            return Err(Error::BudgetExceeded(format!(
                "feasible families over {bins} bins are not materializable"
            )));
        }
        match self {
            FeasibleFamily::Explicit(masks) => {
                let mut out: Vec<u32> = masks.clone();
                out.sort_unstable();
                out.dedup();
                if out.first() != Some(&0) {
                    return Err(Error::InvalidParameter(
                        "feasible family must contain the empty set".into(),
                    ));
                }
                if let Some(&m) = out.last() {
                    if bins < 32 && m >= 1u32 << bins {
                        return Err(Error::InvalidParameter(
                            "feasible subset references an unknown bin".into(),
                        ));
                    }
                }
                Ok(out)
            }
            FeasibleFamily::AtMostOneBin => {
                let mut out = vec![0u32];
                out.extend((0..bins).map(|i| 1u32 << i));
                Ok(out)
            }
            FeasibleFamily::TreeAntichains { parent } => {
                if parent.len() != bins {
                    return Err(Error::InvalidParameter(
                        "parent table does not match bin count".into(),
                    ));
                }
                let ancestors = ancestor_masks(parent)?;
                let mut out = Vec::new();
                'mask: for mask in 0u32..(1u32 << bins) {
                    for i in 0..bins {
                        if mask & (1 << i) != 0 && mask & ancestors[i] != 0 {
                            continue 'mask;
                        }
                    }
                    out.push(mask);
                }
                Ok(out)
            }
        }
    }

    /// Membership test without materializing the family.
    pub fn contains(&self, mask: u32, bins: usize) -> Result<bool> {
        match self {
            FeasibleFamily::Explicit(masks) => Ok(masks.contains(&mask)),
            FeasibleFamily::AtMostOneBin => Ok(mask.count_ones() <= 1),
            FeasibleFamily::TreeAntichains { parent } => {
                if parent.len() != bins {
                    return Err(Error::InvalidParameter(
                        "parent table does not match bin count".into(),
                    ));
                }
                let ancestors = ancestor_masks(parent)?;
                for i in 0..bins {
                    if mask & (1 << i) != 0 && mask & ancestors[i] != 0 {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }
}

fn ancestor_masks(parent: &[Option<usize>]) -> Result<Vec<u32>> {
    let mut out = vec![0u32; parent.len()];
    for (i, p) in parent.iter().enumerate() {
        if let Some(p) = *p {
            if p >= i {
                return Err(Error::InvalidParameter(
                    "parents must point to lower indices".into(),
                ));
            }
            out[i] = out[p] | (1u32 << p);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VgInstance {
    pub objects: Vec<VgObject>,
    pub bins: Vec<VgBin>,
    pub family: FeasibleFamily,
    /// Grid granularity M: all sizes and capacities are multiples of 1/M.
    pub granularity: u32,
}

impl VgInstance {
    pub fn validate(&self) -> Result<()> {
        if self.granularity < 2 {
            return Err(Error::InvalidParameter("granularity must be >= 2".into()));
        }
        if self.bins.len() >= 32 {
            return Err(Error::InvalidParameter("too many bins".into()));
        }
        let unit = rat(1, self.granularity as i64);
        let one = Rat::one();
        for bin in &self.bins {
            if bin.capacity.is_negative() || bin.capacity > one {
                return Err(Error::InvalidParameter("bin capacity outside [0,1]".into()));
            }
            if !is_multiple_of(&bin.capacity, &unit) {
                return Err(Error::GridMismatch(format!(
                    "capacity {} not a multiple of 1/{}",
                    bin.capacity, self.granularity
                )));
            }
            if bin.discount.is_negative() || bin.discount > one {
                return Err(Error::InvalidParameter("discount outside [0,1]".into()));
            }
        }
        for obj in &self.objects {
            for ver in &obj.versions {
                if ver.size.is_negative() || ver.size > one {
                    return Err(Error::InvalidParameter("version size outside [0,1]".into()));
                }
                if !is_multiple_of(&ver.size, &unit) {
                    return Err(Error::GridMismatch(format!(
                        "size {} not a multiple of 1/{}",
                        ver.size, self.granularity
                    )));
                }
                if ver.profit.is_negative() {
                    return Err(Error::InvalidParameter("negative profit".into()));
                }
            }
        }
        // The family must at least admit leaving every object out.
        if !self.family.contains(0, self.bins.len())? {
            return Err(Error::InvalidParameter(
                "feasible family must contain the empty set".into(),
            ));
        }
        Ok(())
    }

    fn size_units(&self, size: &Rat) -> u64 {
        let units = size * rat(self.granularity as i64, 1);
        units.to_integer().try_into().unwrap_or(u64::MAX)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct VgPlacement {
    pub object: usize,
    pub version: usize,
    pub bin: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VgAssignment {
    pub placements: Vec<VgPlacement>,
}

impl VgAssignment {
    /// Re-validates every constraint independently of any solver: indices,
    /// per-object feasibility, per-bin loads, exclusivity.
    pub fn validate(&self, vg: &VgInstance) -> Result<()> {
        let bins = vg.bins.len();
        let mut object_mask = vec![0u32; vg.objects.len()];
        let mut load = vec![Rat::zero(); bins];
        let mut occupants = vec![0usize; bins];
        for p in &self.placements {
            let obj = vg.objects.get(p.object).ok_or_else(|| {
                Error::InvalidParameter(format!("unknown object {}", p.object))
            })?;
            let ver = obj.versions.get(p.version).ok_or_else(|| {
                Error::InvalidParameter(format!("unknown version {}", p.version))
            })?;
            if p.bin >= bins {
                return Err(Error::InvalidParameter(format!("unknown bin {}", p.bin)));
            }
            if object_mask[p.object] & (1 << p.bin) != 0 {
                return Err(Error::InvalidParameter(format!(
                    "object {} placed twice into bin {}",
                    p.object, p.bin
                )));
            }
            object_mask[p.object] |= 1 << p.bin;
            load[p.bin] += &ver.size;
            occupants[p.bin] += 1;
            if let VgBinKind::Exclusive { min_size_exclusive } = &vg.bins[p.bin].kind {
                if &ver.size <= min_size_exclusive {
                    return Err(Error::InvalidParameter(format!(
                        "version too small for exclusive bin {}",
                        p.bin
                    )));
                }
            }
        }
        for (i, bin) in vg.bins.iter().enumerate() {
            if load[i] > bin.capacity {
                return Err(Error::InvalidParameter(format!("bin {i} over capacity")));
            }
            if matches!(bin.kind, VgBinKind::Exclusive { .. }) && occupants[i] > 1 {
                return Err(Error::InvalidParameter(format!(
                    "exclusive bin {i} holds {} objects",
                    occupants[i]
                )));
            }
        }
        for (obj, mask) in object_mask.iter().enumerate() {
            if !vg.family.contains(*mask, bins)? {
                return Err(Error::InvalidParameter(format!(
                    "object {obj} uses an infeasible bin set"
                )));
            }
        }
        Ok(())
    }

    pub fn profit(&self, vg: &VgInstance) -> Rat {
        self.placements
            .iter()
            .map(|p| &vg.bins[p.bin].discount * &vg.objects[p.object].versions[p.version].profit)
            .sum()
    }
}

/// Per-bin DP state: consumed units for shared bins, a 0/1 occupancy flag
/// for exclusive bins.
fn bin_dims(vg: &VgInstance) -> Vec<u64> {
    vg.bins
        .iter()
        .map(|bin| match bin.kind {
            VgBinKind::Shared => vg.size_units(&bin.capacity) + 1,
            VgBinKind::Exclusive { .. } => 2,
        })
        .collect()
}

type Choice = Vec<(usize, usize)>; // (bin, version) pairs

/// Exact optimum by consumed-capacity dynamic programming over objects.
///
/// `max_table_cells` caps the total table size (all object layers); large
/// shared-bin products exceed it and error out rather than thrash.
pub fn solve_versiongap(vg: &VgInstance, max_table_cells: u64) -> Result<(VgAssignment, Rat)> {
    vg.validate()?;
    let bins = vg.bins.len();
    let dims = bin_dims(vg);
    let mut cells: u64 = 1;
    for &d in &dims {
        cells = cells
            .checked_mul(d)
            .ok_or_else(|| Error::BudgetExceeded("DP table size overflows".into()))?;
    }
    let layers = vg.objects.len() as u64 + 1;
    if cells.checked_mul(layers).map_or(true, |t| t > max_table_cells) {
        return Err(Error::BudgetExceeded(format!(
            "DP table needs {cells} cells per layer, budget is {max_table_cells} total"
        )));
    }
    let cells = cells as usize;
    let mut strides = vec![1u64; bins];
    for i in 1..bins {
        strides[i] = strides[i - 1] * dims[i - 1];
    }
    let subsets = vg.family.subsets(bins)?;

    // layer[state] = Some((profit, previous state, choice)).
    type Cell = Option<(Rat, usize, Choice)>;
    let mut layers_store: Vec<Vec<Cell>> = Vec::with_capacity(vg.objects.len() + 1);
    let mut current: Vec<Cell> = vec![None; cells];
    current[0] = Some((Rat::zero(), 0, Vec::new()));

    for obj in &vg.objects {
        let mut next: Vec<Cell> = vec![None; cells];
        for state in 0..cells {
            let Some((profit, _, _)) = &current[state] else {
                continue;
            };
            let profit = profit.clone();
            for &mask in &subsets {
                let bins_in_mask: Vec<usize> =
                    (0..bins).filter(|i| mask & (1 << i) != 0).collect();
                // Depth-first over version choices for each bin in the mask,
                // checking capacity and exclusivity against the state.
                let mut stack: Vec<(usize, usize, Rat, Choice)> =
                    vec![(0, state, Rat::zero(), Vec::new())];
                while let Some((depth, cur_state, added, choice)) = stack.pop() {
                    if depth == bins_in_mask.len() {
                        let total = &profit + &added;
                        let better = match &next[cur_state] {
                            None => true,
                            Some((existing, _, _)) => &total > existing,
                        };
                        if better {
                            next[cur_state] = Some((total, state, choice));
                        }
                        continue;
                    }
                    let bin_idx = bins_in_mask[depth];
                    let bin = &vg.bins[bin_idx];
                    let consumed = (cur_state as u64 / strides[bin_idx]) % dims[bin_idx];
                    for (v_idx, ver) in obj.versions.iter().enumerate() {
                        let step = match &bin.kind {
                            VgBinKind::Shared => {
                                let units = vg.size_units(&ver.size);
                                if consumed + units >= dims[bin_idx] {
                                    continue;
                                }
                                units
                            }
                            VgBinKind::Exclusive { min_size_exclusive } => {
                                if consumed != 0
                                    || &ver.size <= min_size_exclusive
                                    || ver.size > bin.capacity
                                {
                                    continue;
                                }
                                1
                            }
                        };
                        let mut c = choice.clone();
                        c.push((bin_idx, v_idx));
                        stack.push((
                            depth + 1,
                            cur_state + (step * strides[bin_idx]) as usize,
                            &added + &bin.discount * &ver.profit,
                            c,
                        ));
                    }
                }
            }
        }
        layers_store.push(current);
        current = next;
    }

    let mut best_state = None;
    for (state, cell) in current.iter().enumerate() {
        if let Some((profit, _, _)) = cell {
            let better = match best_state {
                None => true,
                Some((_, ref best)) => profit > best,
            };
            if better {
                best_state = Some((state, profit.clone()));
            }
        }
    }
    let (mut state, best_profit) =
        best_state.ok_or_else(|| Error::InvalidParameter("empty DP table".into()))?;

    layers_store.push(current);
    let mut placements = Vec::new();
    for object in (0..vg.objects.len()).rev() {
        let (_, prev, choice) = layers_store[object + 1][state]
            .as_ref()
            .expect("backtrack through live states");
        for &(bin, version) in choice {
            placements.push(VgPlacement {
                object,
                version,
                bin,
            });
        }
        state = *prev;
    }
    placements.sort();
    let assignment = VgAssignment { placements };
    debug_assert_eq!(assignment.profit(vg), best_profit);
    Ok((assignment, best_profit))
}

/// Exhaustive oracle over all per-object (subset, versions) options.
pub fn brute_versiongap(vg: &VgInstance, max_enumeration: u64) -> Result<(VgAssignment, Rat)> {
    vg.validate()?;
    let bins = vg.bins.len();
    let subsets = vg.family.subsets(bins)?;
    // Options per object: every feasible subset with every version choice.
    let mut per_object: Vec<Vec<(Choice, Rat, Vec<u64>)>> = Vec::new();
    for obj in &vg.objects {
        let mut options: Vec<(Choice, Rat, Vec<u64>)> = Vec::new();
        for &mask in &subsets {
            let bins_in_mask: Vec<usize> = (0..bins).filter(|i| mask & (1 << i) != 0).collect();
            let mut stack: Vec<(usize, Choice, Rat, Vec<u64>)> =
                vec![(0, Vec::new(), Rat::zero(), vec![0; bins])];
            while let Some((depth, choice, profit, sizes)) = stack.pop() {
                if depth == bins_in_mask.len() {
                    options.push((choice, profit, sizes));
                    continue;
                }
                let bin_idx = bins_in_mask[depth];
                let bin = &vg.bins[bin_idx];
                for (v_idx, ver) in obj.versions.iter().enumerate() {
                    if let VgBinKind::Exclusive { min_size_exclusive } = &bin.kind {
                        if &ver.size <= min_size_exclusive {
                            continue;
                        }
                    }
                    if ver.size > bin.capacity {
                        continue;
                    }
                    let mut c = choice.clone();
                    c.push((bin_idx, v_idx));
                    let mut s = sizes.clone();
                    s[bin_idx] += vg.size_units(&ver.size);
                    stack.push((
                        depth + 1,
                        c,
                        &profit + &bin.discount * &ver.profit,
                        s,
                    ));
                }
            }
        }
        per_object.push(options);
    }
    let mut total: u64 = 1;
    for opts in &per_object {
        total = total
            .checked_mul(opts.len() as u64)
            .filter(|&t| t <= max_enumeration)
            .ok_or_else(|| {
                Error::BudgetExceeded(format!("enumeration exceeds {max_enumeration}"))
            })?;
    }

    let cap_units: Vec<u64> = vg.bins.iter().map(|b| vg.size_units(&b.capacity)).collect();
    let exclusive: Vec<bool> = vg
        .bins
        .iter()
        .map(|b| matches!(b.kind, VgBinKind::Exclusive { .. }))
        .collect();

    let mut best: Option<(Rat, VgAssignment)> = None;
    let mut picks = vec![0usize; vg.objects.len()];
    loop {
        // Evaluate the current combination.
        let mut loads = vec![0u64; bins];
        let mut occupants = vec![0u32; bins];
        let mut profit = Rat::zero();
        let mut ok = true;
        'check: for (obj, &pick) in picks.iter().enumerate() {
            let (choice, p, sizes) = &per_object[obj][pick];
            profit += p;
            for &(bin, _) in choice {
                occupants[bin] += 1;
                if exclusive[bin] && occupants[bin] > 1 {
                    ok = false;
                    break 'check;
                }
            }
            for (bin, s) in sizes.iter().enumerate() {
                loads[bin] += s;
                if loads[bin] > cap_units[bin] {
                    ok = false;
                    break 'check;
                }
            }
        }
        if ok {
            let better = match &best {
                None => true,
                Some((bp, _)) => &profit > bp,
            };
            if better {
                let mut placements = Vec::new();
                for (obj, &pick) in picks.iter().enumerate() {
                    for &(bin, version) in &per_object[obj][pick].0 {
                        placements.push(VgPlacement {
                            object: obj,
                            version,
                            bin,
                        });
                    }
                }
                placements.sort();
                best = Some((profit, VgAssignment { placements }));
            }
        }
        // Advance the mixed-radix counter.
        let mut pos = 0;
        loop {
            if pos == picks.len() {
                let (profit, assignment) = best.expect("empty subset is always feasible");
                return Ok((assignment, profit));
            }
            picks[pos] += 1;
            if picks[pos] < per_object[pos].len() {
                break;
            }
            picks[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_i;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const CELLS: u64 = 4_000_000;
    const ENUM: u64 = 4_000_000;

    fn shared_bin(cap: Rat, discount: Rat) -> VgBin {
        VgBin {
            capacity: cap,
            discount,
            kind: VgBinKind::Shared,
        }
    }

    #[test]
    fn no_objects_gives_zero_profit() {
        let vg = VgInstance {
            objects: vec![],
            bins: vec![shared_bin(Rat::one(), Rat::one())],
            family: FeasibleFamily::AtMostOneBin,
            granularity: 2,
        };
        let (assignment, profit) = solve_versiongap(&vg, CELLS).unwrap();
        assert!(assignment.placements.is_empty());
        assert_eq!(profit, Rat::zero());
        let (_, brute) = brute_versiongap(&vg, ENUM).unwrap();
        assert_eq!(brute, profit);
    }

    #[test]
    fn both_objects_fit_one_bin() {
        let vg = VgInstance {
            objects: vec![
                VgObject {
                    versions: vec![VgVersion {
                        profit: rat_i(1),
                        size: rat(1, 2),
                    }],
                },
                VgObject {
                    versions: vec![VgVersion {
                        profit: rat_i(2),
                        size: rat(1, 2),
                    }],
                },
            ],
            bins: vec![shared_bin(Rat::one(), Rat::one())],
            family: FeasibleFamily::Explicit(vec![0b0, 0b1]),
            granularity: 2,
        };
        let (assignment, profit) = solve_versiongap(&vg, CELLS).unwrap();
        assert_eq!(profit, rat_i(3));
        assignment.validate(&vg).unwrap();
        assert_eq!(assignment.placements.len(), 2);
        let (_, brute) = brute_versiongap(&vg, ENUM).unwrap();
        assert_eq!(brute, profit);
    }

    #[test]
    fn discount_scales_profit() {
        let vg = VgInstance {
            objects: vec![VgObject {
                versions: vec![VgVersion {
                    profit: rat_i(2),
                    size: rat(1, 2),
                }],
            }],
            bins: vec![shared_bin(Rat::one(), rat(1, 2))],
            family: FeasibleFamily::AtMostOneBin,
            granularity: 2,
        };
        let (_, profit) = solve_versiongap(&vg, CELLS).unwrap();
        assert_eq!(profit, rat_i(1));
    }

    #[test]
    fn empty_family_only_allows_nothing() {
        let vg = VgInstance {
            objects: vec![VgObject {
                versions: vec![VgVersion {
                    profit: rat_i(5),
                    size: rat(1, 2),
                }],
            }],
            bins: vec![shared_bin(Rat::one(), Rat::one())],
            family: FeasibleFamily::Explicit(vec![0]),
            granularity: 2,
        };
        let (assignment, profit) = solve_versiongap(&vg, CELLS).unwrap();
        assert_eq!(profit, Rat::zero());
        assert!(assignment.placements.is_empty());
        let (_, brute) = brute_versiongap(&vg, ENUM).unwrap();
        assert_eq!(brute, profit);
    }

    #[test]
    fn antichain_family_of_a_small_tree() {
        // Root 0 with children 1 and 2: feasible sets avoid ancestor pairs.
        let family = FeasibleFamily::TreeAntichains {
            parent: vec![None, Some(0), Some(0)],
        };
        let subsets = family.subsets(3).unwrap();
        assert_eq!(subsets, vec![0b000, 0b001, 0b010, 0b100, 0b110]);
        assert!(family.contains(0b110, 3).unwrap());
        assert!(!family.contains(0b011, 3).unwrap());
    }

    #[test]
    fn exclusive_bins_reject_small_and_second_occupants() {
        let vg = VgInstance {
            objects: vec![
                VgObject {
                    versions: vec![
                        VgVersion {
                            profit: rat_i(4),
                            size: rat(3, 4),
                        },
                        VgVersion {
                            profit: rat_i(1),
                            size: rat(1, 4),
                        },
                    ],
                },
                VgObject {
                    versions: vec![VgVersion {
                        profit: rat_i(3),
                        size: rat(3, 4),
                    }],
                },
            ],
            bins: vec![VgBin {
                capacity: Rat::one(),
                discount: Rat::one(),
                kind: VgBinKind::Exclusive {
                    min_size_exclusive: rat(1, 2),
                },
            }],
            family: FeasibleFamily::AtMostOneBin,
            granularity: 4,
        };
        let (assignment, profit) = solve_versiongap(&vg, CELLS).unwrap();
        // Only one occupant allowed and the small version is barred, so the
        // best is object 0's big version alone.
        assert_eq!(profit, rat_i(4));
        assignment.validate(&vg).unwrap();
        let (_, brute) = brute_versiongap(&vg, ENUM).unwrap();
        assert_eq!(brute, profit);
    }

    fn random_vg(seed: u64, max_objects: usize, max_versions: usize, max_bins: usize) -> VgInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.gen_range(2u32..=8);
        let bins_n = rng.gen_range(1..=max_bins);
        let bins: Vec<VgBin> = (0..bins_n)
            .map(|_| {
                let cap_units = rng.gen_range(0..=m);
                let disc_num = rng.gen_range(0..=4i64);
                let kind = if rng.gen_bool(0.25) {
                    VgBinKind::Exclusive {
                        min_size_exclusive: rat(1, 2 * m as i64),
                    }
                } else {
                    VgBinKind::Shared
                };
                VgBin {
                    capacity: rat(cap_units as i64, m as i64),
                    discount: rat(disc_num, 4),
                    kind,
                }
            })
            .collect();
        let objects: Vec<VgObject> = (0..rng.gen_range(0..=max_objects))
            .map(|_| VgObject {
                versions: (0..rng.gen_range(1..=max_versions))
                    .map(|_| VgVersion {
                        profit: rat(rng.gen_range(0..=20), 2),
                        size: rat(rng.gen_range(0..=m) as i64, m as i64),
                    })
                    .collect(),
            })
            .collect();
        let family = match rng.gen_range(0..3) {
            0 => FeasibleFamily::AtMostOneBin,
            1 => {
                let mut masks = vec![0u32];
                for mask in 1u32..(1 << bins_n) {
                    if rng.gen_bool(0.6) {
                        masks.push(mask);
                    }
                }
                FeasibleFamily::Explicit(masks)
            }
            _ => FeasibleFamily::TreeAntichains {
                parent: (0..bins_n)
                    .map(|i| {
                        if i == 0 || rng.gen_bool(0.3) {
                            None
                        } else {
                            Some(rng.gen_range(0..i))
                        }
                    })
                    .collect(),
            },
        };
        VgInstance {
            objects,
            bins,
            family,
            granularity: m,
        }
    }

    #[test]
    fn dp_matches_brute_force_on_random_instances() {
        for seed in 0..60 {
            let vg = random_vg(seed, 4, 3, 2);
            let (assignment, dp) = solve_versiongap(&vg, CELLS).unwrap();
            let (_, brute) = brute_versiongap(&vg, ENUM).unwrap();
            assert_eq!(dp, brute, "seed {seed}");
            assignment.validate(&vg).unwrap();
            assert_eq!(assignment.profit(&vg), dp);
        }
    }

    #[test]
    fn profit_is_monotone_in_extras() {
        for seed in 0..25 {
            let vg = random_vg(seed, 3, 2, 2);
            let (_, base) = solve_versiongap(&vg, CELLS).unwrap();

            // Adding a version can only help.
            let mut more_versions = vg.clone();
            if let Some(obj) = more_versions.objects.first_mut() {
                obj.versions.push(VgVersion {
                    profit: rat_i(3),
                    size: Rat::zero(),
                });
                let (_, v) = solve_versiongap(&more_versions, CELLS).unwrap();
                assert!(v >= base, "seed {seed} version");
            }

            // Raising a discount can only help.
            let mut higher_discount = vg.clone();
            higher_discount.bins[0].discount = Rat::one();
            let (_, v) = solve_versiongap(&higher_discount, CELLS).unwrap();
            assert!(v >= base, "seed {seed} discount");

            // Enlarging the family can only help.
            let bins_n = vg.bins.len();
            let full: Vec<u32> = (0u32..(1 << bins_n)).collect();
            let mut bigger_family = vg.clone();
            bigger_family.family = FeasibleFamily::Explicit(full);
            let (_, v) = solve_versiongap(&bigger_family, CELLS).unwrap();
            assert!(v >= base, "seed {seed} family");
        }
    }

    #[test]
    fn budget_errors_are_reported() {
        let vg = random_vg(1, 3, 2, 2);
        assert!(matches!(
            solve_versiongap(&vg, 1),
            Err(crate::error::Error::BudgetExceeded(_))
        ));
    }
}
