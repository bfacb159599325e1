//! Problem data: colored items, capacitated bins, assignments and their
//! fragmentation objective.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ItemId = u32;
pub type Color = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Item {
    pub id: ItemId,
    pub size: u32,
    pub color: Color,
}

impl Item {
    pub fn new(id: ItemId, size: u32, color: Color) -> Self {
        Item { id, size, color }
    }
}

/// Generator parameters attached to an instance file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub k: usize,
    #[serde(rename = "B")]
    pub capacity: u32,
    pub seed: u64,
}

/// A validated problem instance. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct Instance {
    items: Vec<Item>,
    bins: Vec<u32>,
    meta: Option<InstanceMeta>,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    bins: Vec<u32>,
    items: Vec<Item>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<InstanceMeta>,
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        let mut instance = Instance::new(file.items, file.bins)?;
        instance.meta = file.meta;
        Ok(instance)
    }
}

impl From<Instance> for InstanceFile {
    fn from(instance: Instance) -> Self {
        InstanceFile {
            bins: instance.bins,
            items: instance.items,
            meta: instance.meta,
        }
    }
}

impl Instance {
    /// Validates sizes, colors, ids and capacities. An empty item list is
    /// accepted; at least one bin is required.
    pub fn new(items: Vec<Item>, bins: Vec<u32>) -> Result<Self> {
        if bins.is_empty() {
            return Err(Error::NoBins);
        }
        if let Some(bin) = bins.iter().position(|&c| c == 0) {
            return Err(Error::ZeroCapacity { bin });
        }
        let mut ids = BTreeSet::new();
        for item in &items {
            if item.size == 0 {
                return Err(Error::ZeroSize { id: item.id });
            }
            if item.color == 0 {
                return Err(Error::ZeroColor { id: item.id });
            }
            if !ids.insert(item.id) {
                return Err(Error::DuplicateItem { id: item.id });
            }
        }
        Ok(Instance {
            items,
            bins,
            meta: None,
        })
    }

    /// Builds an instance from parallel size/color lists, numbering items 1..n.
    pub fn from_parts(sizes: &[u32], colors: &[Color], bins: Vec<u32>) -> Result<Self> {
        assert_eq!(
            sizes.len(),
            colors.len(),
            "sizes and colors differ in length"
        );
        let items = sizes
            .iter()
            .zip(colors)
            .enumerate()
            .map(|(i, (&size, &color))| Item::new(i as ItemId + 1, size, color))
            .collect();
        Instance::new(items, bins)
    }

    pub fn with_meta(mut self, meta: InstanceMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn bins(&self) -> &[u32] {
        &self.bins
    }

    pub fn meta(&self) -> Option<&InstanceMeta> {
        self.meta.as_ref()
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    pub fn num_bins(&self) -> usize {
        self.bins.len()
    }

    pub fn max_capacity(&self) -> u32 {
        self.bins.iter().copied().max().unwrap_or(0)
    }

    pub fn total_size(&self) -> u64 {
        self.items.iter().map(|o| o.size as u64).sum()
    }

    /// Distinct colors in ascending order.
    pub fn colors(&self) -> Vec<Color> {
        let set: BTreeSet<Color> = self.items.iter().map(|o| o.color).collect();
        set.into_iter().collect()
    }

    /// Total size per color.
    pub fn color_sizes(&self) -> BTreeMap<Color, u64> {
        let mut totals = BTreeMap::new();
        for o in &self.items {
            *totals.entry(o.color).or_insert(0) += o.size as u64;
        }
        totals
    }

    /// The (color, size) classes with their item counts.
    pub fn color_size_classes(&self) -> BTreeMap<(Color, u32), usize> {
        let mut classes = BTreeMap::new();
        for o in &self.items {
            *classes.entry((o.color, o.size)).or_insert(0) += 1;
        }
        classes
    }

    pub fn uniform_capacity(&self) -> bool {
        self.bins.windows(2).all(|w| w[0] == w[1])
    }

    pub fn position_of(&self, id: ItemId) -> Option<usize> {
        self.items.iter().position(|o| o.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))
    }
}

/// An instance in canonical layer order together with the ids the items
/// carried before renumbering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canonical {
    pub instance: Instance,
    /// `original_ids[i]` is the pre-canonicalization id of item `i + 1`.
    pub original_ids: Vec<ItemId>,
}

impl Canonical {
    pub fn original_id(&self, id: ItemId) -> ItemId {
        self.original_ids[id as usize - 1]
    }

    /// Maps a solution over canonical ids back onto the original ids.
    pub fn restore(&self, solution: &Solution) -> Solution {
        Solution {
            bin_of: solution
                .bin_of
                .iter()
                .map(|(&id, &bin)| (self.original_id(id), bin))
                .collect(),
            objective: solution.objective,
        }
    }

    /// Maps a solution over original ids onto canonical ids.
    pub fn translate(&self, solution: &Solution) -> Solution {
        let forward: BTreeMap<ItemId, ItemId> = self
            .original_ids
            .iter()
            .enumerate()
            .map(|(i, &orig)| (orig, i as ItemId + 1))
            .collect();
        Solution {
            bin_of: solution
                .bin_of
                .iter()
                .map(|(id, &bin)| (forward[id], bin))
                .collect(),
            objective: solution.objective,
        }
    }
}

/// Sorts items by ascending color, then nonincreasing size, then original id,
/// and renumbers them 1..n.
pub fn canonical_order(instance: &Instance) -> Canonical {
    let mut items = instance.items.clone();
    items.sort_by(|a, b| {
        a.color
            .cmp(&b.color)
            .then(b.size.cmp(&a.size))
            .then(a.id.cmp(&b.id))
    });
    let original_ids = items.iter().map(|o| o.id).collect();
    for (i, item) in items.iter_mut().enumerate() {
        item.id = i as ItemId + 1;
    }
    Canonical {
        instance: Instance {
            items,
            bins: instance.bins.clone(),
            meta: instance.meta,
        },
        original_ids,
    }
}

/// A complete, capacity-feasible assignment of items to bins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub bin_of: BTreeMap<ItemId, usize>,
    pub objective: u32,
}

impl Solution {
    /// Bin indices in the instance's item order.
    pub fn assignment_vector(&self, instance: &Instance) -> Vec<usize> {
        instance
            .items()
            .iter()
            .map(|o| self.bin_of[&o.id])
            .collect()
    }
}

/// Checks an assignment against the instance and computes Σ_g n_g.
pub fn evaluate(instance: &Instance, bin_of: &BTreeMap<ItemId, usize>) -> Result<Solution> {
    let k = instance.num_bins();
    for &id in bin_of.keys() {
        if instance.position_of(id).is_none() {
            return Err(Error::UnknownItem { id });
        }
    }
    let mut load = vec![0u64; k];
    let mut incidences = BTreeSet::new();
    for item in instance.items() {
        let bin = *bin_of
            .get(&item.id)
            .ok_or(Error::UnassignedItem { id: item.id })?;
        if bin >= k {
            return Err(Error::UnknownBin {
                id: item.id,
                bin,
                bins: k,
            });
        }
        load[bin] += item.size as u64;
        incidences.insert((bin, item.color));
    }
    for (bin, (&l, &capacity)) in load.iter().zip(instance.bins()).enumerate() {
        if l > capacity as u64 {
            return Err(Error::CapacityViolation {
                bin,
                load: l,
                capacity,
            });
        }
    }
    Ok(Solution {
        bin_of: bin_of.clone(),
        objective: incidences.len() as u32,
    })
}

/// Σ_g ⌈S_g / B_max⌉: every color needs at least that many bins.
pub fn objective_lower_bound(instance: &Instance) -> u32 {
    let cap = instance.max_capacity() as u64;
    instance
        .color_sizes()
        .values()
        .map(|&total| total.div_ceil(cap) as u32)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Feasible,
    Infeasible,
    TimeLimit,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Optimal => "Optimal",
            Status::Feasible => "Feasible",
            Status::Infeasible => "Infeasible",
            Status::TimeLimit => "TimeLimit",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: Status,
    pub lower_bound: u32,
    pub upper_bound: Option<u32>,
    pub gap_pct: f64,
    pub elapsed_s: f64,
    pub nodes_explored: u64,
}

impl SolveReport {
    pub fn new(
        status: Status,
        lower_bound: u32,
        upper_bound: Option<u32>,
        elapsed_s: f64,
        nodes_explored: u64,
    ) -> Self {
        SolveReport {
            status,
            lower_bound,
            upper_bound,
            gap_pct: gap_pct(lower_bound, upper_bound),
            elapsed_s,
            nodes_explored,
        }
    }
}

/// 100·(UB−LB)/UB; zero when the bounds meet, infinite without an upper bound.
pub fn gap_pct(lower_bound: u32, upper_bound: Option<u32>) -> f64 {
    match upper_bound {
        None => f64::INFINITY,
        Some(ub) if ub <= lower_bound => 0.0,
        Some(ub) => 100.0 * (ub - lower_bound) as f64 / ub as f64,
    }
}

/// Outcome of a solver: an assignment unless infeasibility was proven or no
/// solution was found in time.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub solution: Option<Solution>,
    pub report: SolveReport,
}

#[derive(Serialize, Deserialize)]
struct SolutionFile {
    objective: Option<u32>,
    bin_of: BTreeMap<ItemId, usize>,
    status: Status,
}

impl Outcome {
    /// `{"objective":..,"bin_of":{"1":0,..},"status":".."}`
    pub fn to_json(&self) -> String {
        let file = SolutionFile {
            objective: self.solution.as_ref().map(|s| s.objective),
            bin_of: self
                .solution
                .as_ref()
                .map(|s| s.bin_of.clone())
                .unwrap_or_default(),
            status: self.report.status,
        };
        serde_json::to_string(&file).expect("solution serializes")
    }
}

/// Parses a solution file and re-evaluates it against `instance`.
pub fn solution_from_json(instance: &Instance, text: &str) -> Result<(Option<Solution>, Status)> {
    let file: SolutionFile = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
    if file.objective.is_none() && file.bin_of.is_empty() {
        return Ok((None, file.status));
    }
    let solution = evaluate(instance, &file.bin_of)?;
    Ok((Some(solution), file.status))
}
