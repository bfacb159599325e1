//! Exact decision diagrams for a single bin.
//!
//! A diagram for capacity `B` has one layer per item (in color-blocked order)
//! plus the terminal layer. Each node carries a `(remaining, seen)` state:
//! the capacity still free on every path reaching it and whether an item of
//! the current color has already been taken. Nodes of a layer are unique by
//! state, so the diagram is reduced by construction.
//!
//! Every root-terminal path selects a set of items whose sizes fit in `B`,
//! each such set appears on exactly one path, and the cost of a path is the
//! number of distinct colors it selects.

use std::collections::HashMap;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::model::{Instance, Item, ItemId};

/// Default path budget for [`Bdd::enumerate_paths`].
pub const DEFAULT_PATH_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeState {
    pub remaining: u32,
    pub seen: bool,
}

impl NodeState {
    pub fn new(remaining: u32, seen: bool) -> Self {
        NodeState { remaining, seen }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArcId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ArcId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BddNode {
    pub layer: usize,
    pub state: NodeState,
    pub zero_arc: Option<ArcId>,
    pub one_arc: Option<ArcId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BddArc {
    pub from: NodeId,
    pub to: NodeId,
    /// `true` for a one-arc (item taken).
    pub domain: bool,
    pub cost: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bdd {
    capacity: u32,
    items: Vec<Item>,
    nodes: Vec<BddNode>,
    arcs: Vec<BddArc>,
    layers: Vec<Vec<NodeId>>,
    completion: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BddStats {
    pub nodes: usize,
    pub arcs: usize,
    pub max_width: usize,
}

impl Bdd {
    /// Compiles the exact diagram for `capacity` over `items`.
    ///
    /// Items must come in contiguous color blocks; the within-block order is
    /// free. With no items the diagram is a root joined to the terminal by a
    /// single zero-arc.
    pub fn build(items: &[Item], capacity: u32) -> Result<Bdd> {
        check_color_blocks(items)?;
        let n = items.len();
        let arc_layers = n.max(1);
        let mut bdd = Bdd {
            capacity,
            items: items.to_vec(),
            nodes: Vec::new(),
            arcs: Vec::new(),
            layers: Vec::with_capacity(arc_layers + 1),
            completion: Vec::new(),
        };
        let root = bdd.push_node(0, NodeState::new(capacity, false));
        bdd.layers.push(vec![root]);

        if n == 0 {
            let terminal = bdd.push_node(1, NodeState::new(0, false));
            bdd.layers.push(vec![terminal]);
            bdd.push_arc(root, terminal, false, 0);
            bdd.fill_completion();
            return Ok(bdd);
        }

        for layer in 0..n {
            let item = items[layer];
            let closes_color = layer + 1 == n || items[layer + 1].color != item.color;
            let mut next: Vec<NodeId> = Vec::new();
            let mut by_state: HashMap<NodeState, NodeId> = HashMap::new();
            let terminal = if layer + 1 == n {
                let t = bdd.push_node(n, NodeState::new(0, false));
                next.push(t);
                Some(t)
            } else {
                None
            };

            for idx in 0..bdd.layers[layer].len() {
                let u = bdd.layers[layer][idx];
                let state = bdd.nodes[u.index()].state;
                let mut children = vec![(false, NodeState::new(state.remaining, state.seen), 0)];
                if state.remaining >= item.size {
                    let cost = u32::from(!state.seen);
                    children.push((
                        true,
                        NodeState::new(state.remaining - item.size, true),
                        cost,
                    ));
                }
                for (domain, mut child, cost) in children {
                    if closes_color {
                        child.seen = false;
                    }
                    let target = match terminal {
                        Some(t) => t,
                        None => *by_state.entry(child).or_insert_with(|| {
                            let v = bdd.push_node(layer + 1, child);
                            next.push(v);
                            v
                        }),
                    };
                    bdd.push_arc(u, target, domain, cost);
                }
            }
            bdd.layers.push(next);
        }
        bdd.fill_completion();
        Ok(bdd)
    }

    fn push_node(&mut self, layer: usize, state: NodeState) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(BddNode {
            layer,
            state,
            zero_arc: None,
            one_arc: None,
        });
        id
    }

    fn push_arc(&mut self, from: NodeId, to: NodeId, domain: bool, cost: u32) {
        let id = ArcId(self.arcs.len() as u32);
        self.arcs.push(BddArc {
            from,
            to,
            domain,
            cost,
        });
        let node = &mut self.nodes[from.index()];
        if domain {
            node.one_arc = Some(id);
        } else {
            node.zero_arc = Some(id);
        }
    }

    // Node ids are assigned layer by layer, so reverse id order is a reverse
    // topological order.
    fn fill_completion(&mut self) {
        let mut completion = vec![u32::MAX; self.nodes.len()];
        completion[self.terminal().index()] = 0;
        for u in (0..self.nodes.len()).rev() {
            let node = &self.nodes[u];
            let best = [node.zero_arc, node.one_arc]
                .into_iter()
                .flatten()
                .map(|a| {
                    let arc = &self.arcs[a.index()];
                    arc.cost + completion[arc.to.index()]
                })
                .min();
            if let Some(best) = best {
                completion[u] = best;
            }
        }
        self.completion = completion;
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn terminal(&self) -> NodeId {
        *self.layers.last().unwrap().first().unwrap()
    }

    pub fn node(&self, id: NodeId) -> &BddNode {
        &self.nodes[id.index()]
    }

    pub fn arc(&self, id: ArcId) -> &BddArc {
        &self.arcs[id.index()]
    }

    pub fn nodes(&self) -> &[BddNode] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[BddArc] {
        &self.arcs
    }

    pub fn layers(&self) -> &[Vec<NodeId>] {
        &self.layers
    }

    pub fn layer_widths(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    /// The item decided by arcs leaving `layer`; `None` on the placeholder
    /// layer of an empty diagram.
    pub fn item_of_layer(&self, layer: usize) -> Option<&Item> {
        self.items.get(layer)
    }

    /// Layer of the arc's start node, i.e. the index of the item it decides.
    pub fn arc_layer(&self, id: ArcId) -> usize {
        self.nodes[self.arcs[id.index()].from.index()].layer
    }

    /// Minimum cost over all paths from `node` to the terminal.
    pub fn completion_bound(&self, node: NodeId) -> u32 {
        self.completion[node.index()]
    }

    pub fn stats(&self) -> BddStats {
        BddStats {
            nodes: self.nodes.len(),
            arcs: self.arcs.len(),
            max_width: self.layers.iter().map(Vec::len).max().unwrap_or(0),
        }
    }

    /// Selected items and cost of a root-terminal arc sequence.
    pub fn decode(&self, path: &[ArcId]) -> Result<(Vec<ItemId>, u32)> {
        let expected = self.layers.len() - 1;
        if path.len() != expected {
            return Err(Error::MalformedPath(format!(
                "expected {expected} arcs, got {}",
                path.len()
            )));
        }
        let mut at = self.root();
        let mut selected = Vec::new();
        let mut cost = 0;
        for (step, &a) in path.iter().enumerate() {
            let arc = self
                .arcs
                .get(a.index())
                .ok_or_else(|| Error::MalformedPath(format!("unknown arc {}", a.0)))?;
            if arc.from != at {
                return Err(Error::MalformedPath(format!(
                    "arc {} at step {step} does not leave node {}",
                    a.0, at.0
                )));
            }
            if arc.domain {
                if let Some(item) = self.item_of_layer(step) {
                    selected.push(item.id);
                }
            }
            cost += arc.cost;
            at = arc.to;
        }
        debug_assert_eq!(at, self.terminal());
        Ok((selected, cost))
    }

    /// Follows the path that takes exactly the items in `ids`, if one exists.
    pub fn path_for(&self, ids: &[ItemId]) -> Option<Vec<ArcId>> {
        let mut at = self.root();
        let mut path = Vec::with_capacity(self.layers.len() - 1);
        for layer in 0..self.layers.len() - 1 {
            let take = self
                .item_of_layer(layer)
                .is_some_and(|item| ids.contains(&item.id));
            let node = self.node(at);
            let arc = if take { node.one_arc? } else { node.zero_arc? };
            path.push(arc);
            at = self.arc(arc).to;
        }
        Some(path)
    }

    /// All root-terminal paths as (selected items, cost), depth first with
    /// the zero-arc explored before the one-arc.
    pub fn enumerate_paths(&self, budget: u64) -> Result<Vec<(Vec<ItemId>, u32)>> {
        let mut out = Vec::new();
        let mut selected = Vec::new();
        self.walk(self.root(), 0, &mut selected, 0, budget, &mut out)?;
        Ok(out)
    }

    fn walk(
        &self,
        at: NodeId,
        layer: usize,
        selected: &mut Vec<ItemId>,
        cost: u32,
        budget: u64,
        out: &mut Vec<(Vec<ItemId>, u32)>,
    ) -> Result<()> {
        if at == self.terminal() {
            if out.len() as u64 >= budget {
                return Err(Error::BudgetExceeded { limit: budget });
            }
            out.push((selected.clone(), cost));
            return Ok(());
        }
        let node = self.node(at);
        if let Some(a) = node.zero_arc {
            self.walk(self.arc(a).to, layer + 1, selected, cost, budget, out)?;
        }
        if let Some(a) = node.one_arc {
            let arc = self.arc(a);
            selected.push(self.items[layer].id);
            let r = self.walk(arc.to, layer + 1, selected, cost + arc.cost, budget, out);
            selected.pop();
            r?;
        }
        Ok(())
    }

    /// Graphviz rendering for debugging.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph bdd {\n  rankdir=TB;\n");
        for (i, node) in self.nodes.iter().enumerate() {
            let _ = writeln!(
                s,
                "  n{i} [label=\"({},{})\"];",
                node.state.remaining,
                u8::from(node.state.seen)
            );
        }
        for arc in &self.arcs {
            let style = if arc.domain { "solid" } else { "dashed" };
            let _ = writeln!(
                s,
                "  n{} -> n{} [style={style}, label=\"{}\"];",
                arc.from.0, arc.to.0, arc.cost
            );
        }
        s.push_str("}\n");
        s
    }
}

fn check_color_blocks(items: &[Item]) -> Result<()> {
    let mut closed = std::collections::HashSet::new();
    for (layer, pair) in items.windows(2).enumerate() {
        if pair[0].color != pair[1].color {
            closed.insert(pair[0].color);
            if closed.contains(&pair[1].color) {
                return Err(Error::ColorsNotContiguous {
                    color: pair[1].color,
                    layer: layer + 1,
                });
            }
        }
    }
    Ok(())
}

/// One diagram per distinct capacity, shared by all bins of that capacity.
#[derive(Debug, Clone)]
pub struct Diagrams {
    diagrams: Vec<Bdd>,
    of_bin: Vec<usize>,
}

impl Diagrams {
    /// `instance` must already be in a color-blocked order (see
    /// [`crate::model::canonical_order`]).
    pub fn build(instance: &Instance) -> Result<Diagrams> {
        let mut diagrams: Vec<Bdd> = Vec::new();
        let mut index: HashMap<u32, usize> = HashMap::new();
        let mut of_bin = Vec::with_capacity(instance.num_bins());
        for &cap in instance.bins() {
            let idx = match index.get(&cap) {
                Some(&i) => i,
                None => {
                    diagrams.push(Bdd::build(instance.items(), cap)?);
                    index.insert(cap, diagrams.len() - 1);
                    diagrams.len() - 1
                }
            };
            of_bin.push(idx);
        }
        Ok(Diagrams { diagrams, of_bin })
    }

    pub fn for_bin(&self, bin: usize) -> &Bdd {
        &self.diagrams[self.of_bin[bin]]
    }

    pub fn distinct(&self) -> &[Bdd] {
        &self.diagrams
    }

    pub fn num_bins(&self) -> usize {
        self.of_bin.len()
    }

    /// Index into [`Diagrams::distinct`] used by `bin`.
    pub fn class_of(&self, bin: usize) -> usize {
        self.of_bin[bin]
    }
}
