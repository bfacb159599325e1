//! Exact consistent-path search over the per-bin diagrams.
//!
//! The search walks all diagrams in lockstep, one layer (item) at a time. At
//! each layer exactly one bin follows its one-arc and every other bin follows
//! its zero-arc, so a complete walk is one root-terminal path per bin with
//! the items partitioned among them. Depth-first branch-and-bound with:
//!
//! * a lower bound from the diagrams' completion costs and, per color still
//!   to be placed, the fewest bins whose free capacity can hold it;
//! * symmetry breaking between bins of equal capacity and between identical
//!   consecutive items;
//! * a table of proven completion bounds keyed by the multiset of bin states,
//!   consulted wherever no symmetry constraint carries over from the
//!   previous layer.

use std::collections::{BTreeMap, HashMap};
use std::time::{Duration, Instant};

use crate::bdd::{Diagrams, NodeId};
use crate::error::Result;
use crate::model::{
    canonical_order, evaluate, objective_lower_bound, Canonical, Instance, Item, Outcome, Solution,
    SolveReport, Status,
};

const INFEASIBLE: u32 = u32::MAX / 4;
const MEMO_CAPACITY: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub time_limit_s: f64,
    /// Break symmetries between equal-capacity bins and identical items.
    pub use_symmetry: bool,
    /// Seed the incumbent with [`greedy_incumbent`].
    pub heuristic_incumbent: bool,
    pub node_budget: Option<u64>,
    /// Prune with the lower bound at every node. When off, only complete
    /// assignments are compared against the incumbent.
    pub use_bounds: bool,
    /// Reuse completion bounds across search nodes with equal bin states.
    pub use_memo: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            time_limit_s: 1800.0,
            use_symmetry: true,
            heuristic_incumbent: true,
            node_budget: None,
            use_bounds: true,
            use_memo: true,
        }
    }
}

impl SolverConfig {
    pub fn with_time_limit(mut self, seconds: f64) -> Self {
        self.time_limit_s = seconds;
        self
    }

    /// Plain enumeration: no bounds, memo, symmetry breaking or warm start.
    pub fn exhaustive() -> Self {
        SolverConfig {
            use_symmetry: false,
            heuristic_incumbent: false,
            use_bounds: false,
            use_memo: false,
            ..SolverConfig::default()
        }
    }
}

/// Search state: the layer reached, one diagram node per bin, and the cost of
/// the arcs taken so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchNode {
    pub layer: usize,
    pub cursors: Vec<NodeId>,
    pub cost_so_far: u32,
}

/// Diagrams compiled for one instance, ready to be searched.
pub struct ConsistentPathSolver {
    canonical: Canonical,
    diagrams: Diagrams,
    build_s: f64,
}

impl ConsistentPathSolver {
    pub fn new(instance: &Instance) -> Result<Self> {
        let start = Instant::now();
        let canonical = canonical_order(instance);
        let diagrams = Diagrams::build(&canonical.instance)?;
        Ok(ConsistentPathSolver {
            canonical,
            diagrams,
            build_s: start.elapsed().as_secs_f64(),
        })
    }

    /// Wall-clock seconds spent compiling the diagrams.
    pub fn build_seconds(&self) -> f64 {
        self.build_s
    }

    pub fn diagrams(&self) -> &Diagrams {
        &self.diagrams
    }

    pub fn canonical(&self) -> &Canonical {
        &self.canonical
    }

    /// Runs the search. The returned solution uses the caller's item ids.
    pub fn solve(&self, config: &SolverConfig) -> Outcome {
        let start = Instant::now();
        let instance = &self.canonical.instance;
        let root_bound = objective_lower_bound(instance);
        let mut search = Search::new(instance, &self.diagrams, config, start);

        if config.heuristic_incumbent {
            if let Some(sol) = greedy_incumbent(instance) {
                search.incumbent = Some((sol.objective, sol.assignment_vector(instance)));
            }
        }
        search.dfs(0, 0);

        let elapsed = start.elapsed().as_secs_f64();
        let nodes = search.nodes;
        let upper = search.incumbent.as_ref().map(|(v, _)| *v);
        let solution = search.incumbent.as_ref().map(|(_, bins)| {
            let bin_of: BTreeMap<_, _> = instance
                .items()
                .iter()
                .zip(bins)
                .map(|(o, &b)| (o.id, b))
                .collect();
            let sol = evaluate(instance, &bin_of).expect("search only builds feasible assignments");
            self.canonical.restore(&sol)
        });

        let report = if search.aborted {
            let frontier = search.frontier_lb.unwrap_or(0);
            let lb = frontier.min(upper.unwrap_or(u32::MAX)).max(root_bound);
            let lb = upper.map_or(lb, |ub| lb.min(ub));
            SolveReport::new(Status::TimeLimit, lb, upper, elapsed, nodes)
        } else {
            match upper {
                Some(ub) => SolveReport::new(Status::Optimal, ub, Some(ub), elapsed, nodes),
                None => SolveReport::new(Status::Infeasible, 0, None, elapsed, nodes),
            }
        };
        Outcome { solution, report }
    }
}

/// Builds the diagrams and searches them.
pub fn solve(instance: &Instance, config: &SolverConfig) -> Result<Outcome> {
    Ok(ConsistentPathSolver::new(instance)?.solve(config))
}

struct Search<'a> {
    diagrams: &'a Diagrams,
    config: &'a SolverConfig,
    k: usize,
    n: usize,
    class: Vec<usize>,
    capacity: Vec<u32>,
    /// `cursors[layer * k + b]`: node of bin `b` at `layer` on the current path.
    cursors: Vec<NodeId>,
    assignment: Vec<usize>,
    suffix_size: Vec<u64>,
    suffix_max: Vec<u32>,
    /// First layer after the color block containing each layer.
    block_end: Vec<usize>,
    /// Sizes of the color blocks starting at or after each layer boundary.
    later_blocks: Vec<Vec<u64>>,
    run_start: Vec<bool>,
    memo: HashMap<Box<[u32]>, u32>,
    memo_ok: bool,
    incumbent: Option<(u32, Vec<usize>)>,
    nodes: u64,
    deadline: Instant,
    aborted: bool,
    path_lbs: Vec<u32>,
    frontier_lb: Option<u32>,
    scratch: Vec<u32>,
}

impl<'a> Search<'a> {
    fn new(
        instance: &'a Instance,
        diagrams: &'a Diagrams,
        config: &'a SolverConfig,
        start: Instant,
    ) -> Self {
        let items = instance.items();
        let n = items.len();
        let k = instance.num_bins();

        let mut suffix_size = vec![0u64; n + 1];
        let mut suffix_max = vec![0u32; n + 1];
        for l in (0..n).rev() {
            suffix_size[l] = suffix_size[l + 1] + items[l].size as u64;
            suffix_max[l] = suffix_max[l + 1].max(items[l].size);
        }
        let mut block_end = vec![n; n];
        for l in (0..n.saturating_sub(1)).rev() {
            block_end[l] = if items[l + 1].color == items[l].color {
                block_end[l + 1]
            } else {
                l + 1
            };
        }
        // Totals of every color block beginning at layer >= l, for l at block
        // starts; other layers reuse the entry of the next block start.
        let mut later_blocks = vec![Vec::new(); n + 1];
        for l in (0..n).rev() {
            let starts_block = l == 0 || items[l - 1].color != items[l].color;
            later_blocks[l] = if starts_block {
                let mut v = later_blocks[block_end[l]].clone();
                v.push(suffix_size[l] - suffix_size[block_end[l]]);
                v
            } else {
                later_blocks[block_end[l]].clone()
            };
        }
        let run_start = (0..n)
            .map(|l| {
                l == 0 || (items[l - 1].color, items[l - 1].size) != (items[l].color, items[l].size)
            })
            .collect();

        let capacity: Vec<u32> = instance.bins().to_vec();
        let class: Vec<usize> = (0..k).map(|b| diagrams.class_of(b)).collect();
        let memo_ok =
            capacity.iter().all(|&c| c < (1 << 19)) && diagrams.distinct().len() < (1 << 12);

        let mut cursors = vec![NodeId(0); (n + 1) * k];
        for (b, cursor) in cursors.iter_mut().take(k).enumerate() {
            *cursor = diagrams.for_bin(b).root();
        }
        let deadline = start + Duration::from_secs_f64(config.time_limit_s.clamp(0.0, 1e9));

        Search {
            diagrams,
            config,
            k,
            n,
            class,
            capacity,
            cursors,
            assignment: vec![0; n],
            suffix_size,
            suffix_max,
            block_end,
            later_blocks,
            run_start,
            memo: HashMap::new(),
            memo_ok,
            incumbent: None,
            nodes: 0,
            deadline,
            aborted: false,
            path_lbs: Vec::with_capacity(n + 1),
            frontier_lb: None,
            scratch: Vec::with_capacity(k),
        }
    }

    fn incumbent_value(&self) -> u32 {
        self.incumbent.as_ref().map_or(INFEASIBLE, |(v, _)| *v)
    }

    fn cursor(&self, layer: usize, bin: usize) -> NodeId {
        self.cursors[layer * self.k + bin]
    }

    fn check_limits(&mut self) {
        if let Some(budget) = self.config.node_budget {
            if self.nodes > budget {
                self.abort();
                return;
            }
        }
        if self.nodes.is_multiple_of(256) && Instant::now() >= self.deadline {
            self.abort();
        }
    }

    fn abort(&mut self) {
        self.aborted = true;
        self.frontier_lb = self.path_lbs.iter().copied().min();
    }

    /// Lower bound on the cost of completing the node at `layer`, or
    /// `INFEASIBLE` when no completion can exist.
    fn completion_lb(&mut self, layer: usize) -> u32 {
        let k = self.k;
        let mut structural = 0u32;
        let mut seen_free = 0u64;
        let mut total_free = 0u64;
        let mut max_free = 0u32;
        self.scratch.clear();
        for b in 0..k {
            let bdd = self.diagrams.for_bin(b);
            let node = bdd.node(self.cursor(layer, b));
            structural += bdd.completion_bound(self.cursor(layer, b));
            let free = node.state.remaining;
            total_free += free as u64;
            max_free = max_free.max(free);
            if node.state.seen {
                seen_free += free as u64;
            } else {
                self.scratch.push(free);
            }
        }
        if self.suffix_size[layer] > total_free || self.suffix_max[layer] > max_free {
            return INFEASIBLE;
        }

        // Current color: items may go to bins already holding it for free.
        let end = self.block_end[layer];
        let current = self.suffix_size[layer] - self.suffix_size[end];
        self.scratch.sort_unstable_by(|a, b| b.cmp(a));
        let mut need = 0u32;
        let mut covered = seen_free;
        for &free in &self.scratch {
            if covered >= current {
                break;
            }
            covered += free as u64;
            need += 1;
        }
        if covered < current {
            return INFEASIBLE;
        }

        // Later colors: each needs the fewest bins whose free space holds it.
        if !self.later_blocks[end].is_empty() {
            self.scratch.clear();
            for b in 0..k {
                let bdd = self.diagrams.for_bin(b);
                self.scratch
                    .push(bdd.node(self.cursor(layer, b)).state.remaining);
            }
            self.scratch.sort_unstable_by(|a, b| b.cmp(a));
            let mut prefix = Vec::with_capacity(k);
            let mut acc = 0u64;
            for &free in &self.scratch {
                acc += free as u64;
                prefix.push(acc);
            }
            for &total in &self.later_blocks[end] {
                match prefix.iter().position(|&p| p >= total) {
                    Some(m) => need += m as u32 + 1,
                    None => return INFEASIBLE,
                }
            }
        }
        need.max(structural)
    }

    fn memo_key(&self, layer: usize) -> Box<[u32]> {
        let mut key: Vec<u32> = Vec::with_capacity(self.k + 1);
        key.push(layer as u32);
        for b in 0..self.k {
            let state = self.diagrams.for_bin(b).node(self.cursor(layer, b)).state;
            key.push(
                ((self.class[b] as u32) << 20) | (state.remaining << 1) | u32::from(state.seen),
            );
        }
        key[1..].sort_unstable();
        key.into_boxed_slice()
    }

    /// Explores the subtree below the node at `layer` and returns a lower
    /// bound on its completion cost (exact when the subtree was searched
    /// without incumbent pruning).
    fn dfs(&mut self, layer: usize, cost: u32) -> u32 {
        self.nodes += 1;
        self.check_limits();
        if self.aborted {
            return 0;
        }
        if layer == self.n {
            if cost < self.incumbent_value() {
                self.incumbent = Some((cost, self.assignment.clone()));
            }
            return 0;
        }

        let mut bound = 0;
        if self.config.use_bounds {
            bound = self.completion_lb(layer);
            if bound >= INFEASIBLE {
                return INFEASIBLE;
            }
        }
        let key = (self.config.use_memo && self.memo_ok && self.run_start[layer])
            .then(|| self.memo_key(layer));
        if let Some(known) = key.as_ref().and_then(|k| self.memo.get(k)) {
            bound = bound.max(*known);
        }
        if cost.saturating_add(bound) >= self.incumbent_value() {
            return bound;
        }

        self.path_lbs.push(cost + bound);
        let mut best = INFEASIBLE;
        for (bin, arc_cost) in self.branches(layer) {
            self.advance(layer, bin);
            self.assignment[layer] = bin;
            let below = self.dfs(layer + 1, cost + arc_cost);
            best = best.min(arc_cost.saturating_add(below));
            if self.aborted {
                break;
            }
        }
        self.path_lbs.pop();

        let best = best.max(bound);
        if !self.aborted {
            if let Some(key) = key {
                if let Some(slot) = self.memo.get_mut(&key) {
                    *slot = (*slot).max(best);
                } else if self.memo.len() < MEMO_CAPACITY {
                    self.memo.insert(key, best);
                }
            }
        }
        best
    }

    /// Candidate bins for the item at `layer` with the cost of their one-arc,
    /// cost-free bins first, then by bin index.
    fn branches(&self, layer: usize) -> Vec<(usize, u32)> {
        let mut out = Vec::with_capacity(self.k);
        let mut empty_class_seen: Vec<usize> = Vec::new();
        let min_bin = if self.config.use_symmetry && !self.run_start[layer] {
            self.assignment[layer - 1]
        } else {
            0
        };
        for b in min_bin..self.k {
            let bdd = self.diagrams.for_bin(b);
            let node = bdd.node(self.cursor(layer, b));
            let Some(one) = node.one_arc else { continue };
            if self.config.use_symmetry && node.state.remaining == self.capacity[b] {
                // Only the lowest-indexed empty bin of each capacity class may open.
                if empty_class_seen.contains(&self.class[b]) {
                    continue;
                }
                empty_class_seen.push(self.class[b]);
            }
            out.push((b, bdd.arc(one).cost));
        }
        out.sort_by_key(|&(b, c)| (c, b));
        out
    }

    fn advance(&mut self, layer: usize, chosen: usize) {
        let k = self.k;
        for b in 0..k {
            let bdd = self.diagrams.for_bin(b);
            let node = bdd.node(self.cursors[layer * k + b]);
            let arc = if b == chosen {
                node.one_arc
            } else {
                node.zero_arc
            };
            self.cursors[(layer + 1) * k + b] = bdd.arc(arc.expect("arc exists")).to;
        }
    }
}

/// Feasible starting solution: colors by descending total size, each item
/// into the fullest-free bin already holding its color, else the bin with
/// the most free space.
pub fn greedy_incumbent(instance: &Instance) -> Option<Solution> {
    let k = instance.num_bins();
    let mut free: Vec<u64> = instance.bins().iter().map(|&c| c as u64).collect();
    let mut by_color: BTreeMap<u32, Vec<&Item>> = BTreeMap::new();
    for item in instance.items() {
        by_color.entry(item.color).or_default().push(item);
    }
    let mut colors: Vec<(u32, u64)> = by_color
        .iter()
        .map(|(&g, items)| (g, items.iter().map(|o| o.size as u64).sum()))
        .collect();
    colors.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut bin_of = BTreeMap::new();
    for (color, _) in colors {
        let mut items = by_color[&color].clone();
        items.sort_by(|a, b| b.size.cmp(&a.size).then(a.id.cmp(&b.id)));
        let mut holds = vec![false; k];
        for item in items {
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &b| {
                holds[b]
                    .cmp(&holds[a])
                    .then(free[b].cmp(&free[a]))
                    .then(a.cmp(&b))
            });
            let bin = order.into_iter().find(|&b| free[b] >= item.size as u64)?;
            free[bin] -= item.size as u64;
            holds[bin] = true;
            bin_of.insert(item.id, bin);
        }
    }
    evaluate(instance, &bin_of).ok()
}

/// Bins grouped by capacity; groups ordered by their lowest bin index.
pub fn symmetry_classes(instance: &Instance) -> Vec<Vec<usize>> {
    let mut classes: Vec<(u32, Vec<usize>)> = Vec::new();
    for (b, &cap) in instance.bins().iter().enumerate() {
        match classes.iter_mut().find(|(c, _)| *c == cap) {
            Some((_, members)) => members.push(b),
            None => classes.push((cap, vec![b])),
        }
    }
    classes.into_iter().map(|(_, members)| members).collect()
}
