//! Exact solver for instances where no bin can take three items.
//!
//! For a fixed number `q` of two-item bins the instance becomes a weighted
//! matching problem: one vertex per item, `n − 2q` artificial vertices that
//! stand for singleton bins, real pairs weighted `2 + n` (same color) or
//! `1 + n` (different colors), and real-artificial edges weighted `n²` so that
//! every maximum matching covers the artificial vertices. Scanning all `q`
//! and keeping the best assignment gives the optimum.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::{evaluate, Instance, ItemId, Outcome, Solution, SolveReport, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightedEdge {
    pub u: usize,
    pub v: usize,
    pub weight: i64,
}

/// Vertices `0..num_real` are the instance items in order; the artificial
/// vertices follow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairGraph {
    pub q: usize,
    pub num_real: usize,
    pub num_artificial: usize,
    pub edges: Vec<WeightedEdge>,
}

impl PairGraph {
    pub fn num_vertices(&self) -> usize {
        self.num_real + self.num_artificial
    }

    pub fn is_artificial(&self, v: usize) -> bool {
        v >= self.num_real
    }
}

/// True when every bin holds at most two items in any feasible packing.
pub fn applies(instance: &Instance) -> bool {
    if instance.num_items() <= 2 {
        return true;
    }
    let mut sizes: Vec<u64> = instance.items().iter().map(|o| o.size as u64).collect();
    sizes.sort_unstable();
    sizes[..3].iter().sum::<u64>() > instance.max_capacity() as u64
}

/// Matching graph for `q` two-item bins. Real pairs are kept only when they
/// fit the largest bin; placement checks the actual bins later.
pub fn build_pair_graph(instance: &Instance, q: usize) -> Result<PairGraph> {
    let n = instance.num_items();
    let k = instance.num_bins();
    if q > n / 2 {
        return Err(Error::InvalidQ {
            q,
            reason: format!("at most {} pairs exist among {n} items", n / 2),
        });
    }
    if n - q > k {
        return Err(Error::InvalidQ {
            q,
            reason: format!("{} bins needed but only {k} available", n - q),
        });
    }
    let items = instance.items();
    let cap = instance.max_capacity();
    let n_w = n as i64;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if items[i].size as u64 + items[j].size as u64 > cap as u64 {
                continue;
            }
            let weight = if items[i].color == items[j].color {
                2 + n_w
            } else {
                1 + n_w
            };
            edges.push(WeightedEdge { u: i, v: j, weight });
        }
    }
    let num_artificial = n - 2 * q;
    for i in 0..n {
        for a in 0..num_artificial {
            edges.push(WeightedEdge {
                u: i,
                v: n + a,
                weight: n_w * n_w,
            });
        }
    }
    Ok(PairGraph {
        q,
        num_real: n,
        num_artificial,
        edges,
    })
}

/// Solves the instance through the matching reduction. Optimality is claimed
/// for uniform capacities only; with mixed capacities the result is the best
/// pairing whose loads fit the bins largest-first.
pub fn solve_two_per_bin(instance: &Instance) -> Result<Outcome> {
    if !applies(instance) {
        return Err(Error::NotTwoPerBin);
    }
    let start = Instant::now();
    let n = instance.num_items();
    let k = instance.num_bins();
    let mut best: Option<Solution> = None;
    let mut inspected = 0u64;

    for q in n.saturating_sub(k)..=n / 2 {
        inspected += 1;
        let graph = build_pair_graph(instance, q)?;
        let matched = max_weight_matching(graph.num_vertices(), &graph.edges);
        let mut mate = vec![None; graph.num_vertices()];
        for &e in &matched {
            let WeightedEdge { u, v, .. } = graph.edges[e];
            mate[u] = Some(v);
            mate[v] = Some(u);
        }
        if (graph.num_real..graph.num_vertices()).any(|a| mate[a].is_none()) {
            continue;
        }
        let Some(sol) = place(instance, &mate) else {
            continue;
        };
        if best.as_ref().is_none_or(|b| sol.objective < b.objective) {
            best = Some(sol);
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    let uniform = instance.uniform_capacity();
    Ok(match best {
        Some(sol) => {
            let ub = sol.objective;
            let (status, lb) = if uniform {
                (Status::Optimal, ub)
            } else {
                (
                    Status::Feasible,
                    crate::objective_lower_bound(instance).min(ub),
                )
            };
            Outcome {
                solution: Some(sol),
                report: SolveReport::new(status, lb, Some(ub), elapsed, inspected),
            }
        }
        None => Outcome {
            solution: None,
            report: SolveReport::new(Status::Infeasible, 0, None, elapsed, inspected),
        },
    })
}

/// Groups matched real vertices into bin loads and places the heaviest load
/// in the largest bin.
fn place(instance: &Instance, mate: &[Option<usize>]) -> Option<Solution> {
    let items = instance.items();
    let n = items.len();
    let mut loads: Vec<(u64, Vec<ItemId>)> = Vec::new();
    for i in 0..n {
        match mate[i] {
            Some(j) if j < n => {
                if i < j {
                    loads.push((
                        items[i].size as u64 + items[j].size as u64,
                        vec![items[i].id, items[j].id],
                    ));
                }
            }
            _ => loads.push((items[i].size as u64, vec![items[i].id])),
        }
    }
    if loads.len() > instance.num_bins() {
        return None;
    }
    loads.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    let mut bins: Vec<usize> = (0..instance.num_bins()).collect();
    bins.sort_by(|&a, &b| instance.bins()[b].cmp(&instance.bins()[a]).then(a.cmp(&b)));

    let mut bin_of = BTreeMap::new();
    for ((load, ids), &bin) in loads.iter().zip(&bins) {
        if *load > instance.bins()[bin] as u64 {
            return None;
        }
        for &id in ids {
            bin_of.insert(id, bin);
        }
    }
    evaluate(instance, &bin_of).ok()
}

const NONE: usize = usize::MAX;

/// Maximum-weight matching on a general graph (Edmonds' blossom algorithm
/// with the primal-dual bookkeeping of Galil's survey). Returns the indices
/// of the matched edges in ascending order. Edges with non-positive weight
/// are never useful and may be left out of the result.
pub fn max_weight_matching(num_vertices: usize, edges: &[WeightedEdge]) -> Vec<usize> {
    if edges.is_empty() {
        return Vec::new();
    }
    let mut m = Matcher::new(num_vertices, edges);
    m.run();
    let mut out = Vec::new();
    for v in 0..num_vertices {
        let p = m.mate[v];
        if p != NONE && v < m.endpoint[p] {
            out.push(p / 2);
        }
    }
    out.sort_unstable();
    out
}

/// Duals are stored doubled so that integer weights keep every quantity
/// integral.
struct Matcher<'a> {
    n: usize,
    edges: &'a [WeightedEdge],
    endpoint: Vec<usize>,
    neighbend: Vec<Vec<usize>>,
    /// Remote endpoint of the matched edge, or NONE.
    mate: Vec<usize>,
    /// 0 free, 1 S, 2 T; 5 marks blossoms visited by `scan_blossom`.
    label: Vec<u8>,
    labelend: Vec<usize>,
    inblossom: Vec<usize>,
    blossomparent: Vec<usize>,
    blossomchilds: Vec<Vec<usize>>,
    blossombase: Vec<usize>,
    blossomendps: Vec<Vec<usize>>,
    bestedge: Vec<usize>,
    blossombestedges: Vec<Option<Vec<usize>>>,
    unusedblossoms: Vec<usize>,
    dualvar: Vec<i64>,
    allowedge: Vec<bool>,
    queue: Vec<usize>,
}

fn wrap(j: isize, len: usize) -> usize {
    j.rem_euclid(len as isize) as usize
}

impl<'a> Matcher<'a> {
    fn new(n: usize, edges: &'a [WeightedEdge]) -> Self {
        let maxweight = edges.iter().map(|e| e.weight).max().unwrap_or(0).max(0);
        let mut endpoint = Vec::with_capacity(2 * edges.len());
        let mut neighbend = vec![Vec::new(); n];
        for (k, e) in edges.iter().enumerate() {
            endpoint.push(e.u);
            endpoint.push(e.v);
            neighbend[e.u].push(2 * k + 1);
            neighbend[e.v].push(2 * k);
        }
        Matcher {
            n,
            edges,
            endpoint,
            neighbend,
            mate: vec![NONE; n],
            label: vec![0; 2 * n],
            labelend: vec![NONE; 2 * n],
            inblossom: (0..n).collect(),
            blossomparent: vec![NONE; 2 * n],
            blossomchilds: vec![Vec::new(); 2 * n],
            blossombase: (0..n).chain(std::iter::repeat_n(NONE, n)).collect(),
            blossomendps: vec![Vec::new(); 2 * n],
            bestedge: vec![NONE; 2 * n],
            blossombestedges: vec![None; 2 * n],
            unusedblossoms: (n..2 * n).collect(),
            dualvar: std::iter::repeat_n(maxweight, n)
                .chain(std::iter::repeat_n(0, n))
                .collect(),
            allowedge: vec![false; edges.len()],
            queue: Vec::new(),
        }
    }

    fn slack(&self, k: usize) -> i64 {
        let e = &self.edges[k];
        self.dualvar[e.u] + self.dualvar[e.v] - 2 * e.weight
    }

    fn leaves(&self, b: usize) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(b, &mut out);
        out
    }

    fn collect_leaves(&self, b: usize, out: &mut Vec<usize>) {
        if b < self.n {
            out.push(b);
        } else {
            for &t in &self.blossomchilds[b] {
                self.collect_leaves(t, out);
            }
        }
    }

    fn assign_label(&mut self, w: usize, t: u8, p: usize) {
        let b = self.inblossom[w];
        debug_assert!(self.label[w] == 0 && self.label[b] == 0);
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = NONE;
        self.bestedge[b] = NONE;
        if t == 1 {
            let leaves = self.leaves(b);
            self.queue.extend(leaves);
        } else if t == 2 {
            let base = self.blossombase[b];
            let mp = self.mate[base];
            debug_assert!(mp != NONE);
            self.assign_label(self.endpoint[mp], 1, mp ^ 1);
        }
    }

    /// Walks up from `v` and `w` in alternation; returns the base of the new
    /// blossom or NONE when the paths reach two different roots.
    fn scan_blossom(&mut self, mut v: usize, mut w: usize) -> usize {
        let mut path = Vec::new();
        let mut base = NONE;
        while v != NONE || w != NONE {
            let mut b = self.inblossom[v];
            if self.label[b] & 4 != 0 {
                base = self.blossombase[b];
                break;
            }
            path.push(b);
            self.label[b] = 5;
            if self.labelend[b] == NONE {
                v = NONE;
            } else {
                v = self.endpoint[self.labelend[b]];
                b = self.inblossom[v];
                v = self.endpoint[self.labelend[b]];
            }
            if w != NONE {
                std::mem::swap(&mut v, &mut w);
            }
        }
        for b in path {
            self.label[b] = 1;
        }
        base
    }

    fn add_blossom(&mut self, base: usize, k: usize) {
        let WeightedEdge {
            u: mut v, v: mut w, ..
        } = self.edges[k];
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];
        let b = self.unusedblossoms.pop().expect("blossom slots available");
        self.blossombase[b] = base;
        self.blossomparent[b] = NONE;
        self.blossomparent[bb] = b;

        let mut path = Vec::new();
        let mut endps = Vec::new();
        while bv != bb {
            self.blossomparent[bv] = b;
            path.push(bv);
            endps.push(self.labelend[bv]);
            v = self.endpoint[self.labelend[bv]];
            bv = self.inblossom[v];
        }
        path.push(bb);
        path.reverse();
        endps.reverse();
        endps.push(2 * k);
        while bw != bb {
            self.blossomparent[bw] = b;
            path.push(bw);
            endps.push(self.labelend[bw] ^ 1);
            w = self.endpoint[self.labelend[bw]];
            bw = self.inblossom[w];
        }
        self.blossomchilds[b] = path.clone();
        self.blossomendps[b] = endps;

        self.label[b] = 1;
        self.labelend[b] = self.labelend[bb];
        self.dualvar[b] = 0;
        for leaf in self.leaves(b) {
            if self.label[self.inblossom[leaf]] == 2 {
                self.queue.push(leaf);
            }
            self.inblossom[leaf] = b;
        }

        let mut bestedgeto = vec![NONE; 2 * self.n];
        for &bv in &path {
            let lists: Vec<Vec<usize>> = match self.blossombestedges[bv].take() {
                Some(list) => vec![list],
                None => self
                    .leaves(bv)
                    .into_iter()
                    .map(|leaf| self.neighbend[leaf].iter().map(|p| p / 2).collect())
                    .collect(),
            };
            for list in lists {
                for k in list {
                    let WeightedEdge {
                        u: mut i, v: mut j, ..
                    } = self.edges[k];
                    if self.inblossom[j] == b {
                        std::mem::swap(&mut i, &mut j);
                    }
                    let _ = i;
                    let bj = self.inblossom[j];
                    if bj != b
                        && self.label[bj] == 1
                        && (bestedgeto[bj] == NONE || self.slack(k) < self.slack(bestedgeto[bj]))
                    {
                        bestedgeto[bj] = k;
                    }
                }
            }
            self.bestedge[bv] = NONE;
        }
        let best: Vec<usize> = bestedgeto.into_iter().filter(|&k| k != NONE).collect();
        self.bestedge[b] = NONE;
        for &k in &best {
            if self.bestedge[b] == NONE || self.slack(k) < self.slack(self.bestedge[b]) {
                self.bestedge[b] = k;
            }
        }
        self.blossombestedges[b] = Some(best);
    }

    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        let childs = self.blossomchilds[b].clone();
        for &s in &childs {
            self.blossomparent[s] = NONE;
            if s < self.n {
                self.inblossom[s] = s;
            } else if endstage && self.dualvar[s] == 0 {
                self.expand_blossom(s, endstage);
            } else {
                for leaf in self.leaves(s) {
                    self.inblossom[leaf] = s;
                }
            }
        }

        if !endstage && self.label[b] == 2 {
            let len = childs.len();
            let endps = self.blossomendps[b].clone();
            let entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]];
            let mut j = childs.iter().position(|&c| c == entrychild).unwrap() as isize;
            let (jstep, endptrick): (isize, usize) = if j & 1 == 1 {
                j -= len as isize;
                (1, 0)
            } else {
                (-1, 1)
            };
            let mut p = self.labelend[b];
            while j != 0 {
                self.label[self.endpoint[p ^ 1]] = 0;
                let q = endps[wrap(j - endptrick as isize, len)];
                self.label[self.endpoint[q ^ endptrick ^ 1]] = 0;
                self.assign_label(self.endpoint[p ^ 1], 2, p);
                self.allowedge[q / 2] = true;
                j += jstep;
                p = endps[wrap(j - endptrick as isize, len)] ^ endptrick;
                self.allowedge[p / 2] = true;
                j += jstep;
            }
            let bv = childs[wrap(j, len)];
            let ep = self.endpoint[p ^ 1];
            self.label[ep] = 2;
            self.label[bv] = 2;
            self.labelend[ep] = p;
            self.labelend[bv] = p;
            self.bestedge[bv] = NONE;
            j += jstep;
            while childs[wrap(j, len)] != entrychild {
                let bv = childs[wrap(j, len)];
                if self.label[bv] == 1 {
                    j += jstep;
                    continue;
                }
                let reached = self.leaves(bv).into_iter().find(|&v| self.label[v] != 0);
                if let Some(v) = reached {
                    debug_assert_eq!(self.label[v], 2);
                    self.label[v] = 0;
                    let m = self.endpoint[self.mate[self.blossombase[bv]]];
                    self.label[m] = 0;
                    self.assign_label(v, 2, self.labelend[v]);
                }
                j += jstep;
            }
        }

        self.label[b] = 0;
        self.labelend[b] = NONE;
        self.blossomchilds[b].clear();
        self.blossomendps[b].clear();
        self.blossombase[b] = NONE;
        self.blossombestedges[b] = None;
        self.bestedge[b] = NONE;
        self.unusedblossoms.push(b);
    }

    /// Swaps matched and unmatched edges along the even path from `v` to the
    /// base of blossom `b`, then rotates `b` so that `v` becomes its base.
    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.blossomparent[t] != b {
            t = self.blossomparent[t];
        }
        if t >= self.n {
            self.augment_blossom(t, v);
        }
        let len = self.blossomchilds[b].len();
        let i = self.blossomchilds[b].iter().position(|&c| c == t).unwrap();
        let mut j = i as isize;
        let (jstep, endptrick): (isize, usize) = if i & 1 == 1 {
            j -= len as isize;
            (1, 0)
        } else {
            (-1, 1)
        };
        while j != 0 {
            j += jstep;
            let t = self.blossomchilds[b][wrap(j, len)];
            let p = self.blossomendps[b][wrap(j - endptrick as isize, len)] ^ endptrick;
            if t >= self.n {
                self.augment_blossom(t, self.endpoint[p]);
            }
            j += jstep;
            let t = self.blossomchilds[b][wrap(j, len)];
            if t >= self.n {
                self.augment_blossom(t, self.endpoint[p ^ 1]);
            }
            self.mate[self.endpoint[p]] = p ^ 1;
            self.mate[self.endpoint[p ^ 1]] = p;
        }
        self.blossomchilds[b].rotate_left(i);
        self.blossomendps[b].rotate_left(i);
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]];
        debug_assert_eq!(self.blossombase[b], v);
    }

    fn augment_matching(&mut self, k: usize) {
        let WeightedEdge { u: v, v: w, .. } = self.edges[k];
        for (mut s, mut p) in [(v, 2 * k + 1), (w, 2 * k)] {
            loop {
                let bs = self.inblossom[s];
                if bs >= self.n {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = p;
                if self.labelend[bs] == NONE {
                    break;
                }
                let t = self.endpoint[self.labelend[bs]];
                let bt = self.inblossom[t];
                s = self.endpoint[self.labelend[bt]];
                let j = self.endpoint[self.labelend[bt] ^ 1];
                if bt >= self.n {
                    self.augment_blossom(bt, j);
                }
                self.mate[j] = self.labelend[bt];
                p = self.labelend[bt] ^ 1;
            }
        }
    }

    fn run(&mut self) {
        let n = self.n;
        for _ in 0..n {
            self.label.iter_mut().for_each(|l| *l = 0);
            self.bestedge.iter_mut().for_each(|e| *e = NONE);
            for b in n..2 * n {
                self.blossombestedges[b] = None;
            }
            self.allowedge.iter_mut().for_each(|a| *a = false);
            self.queue.clear();
            for v in 0..n {
                if self.mate[v] == NONE && self.label[self.inblossom[v]] == 0 {
                    self.assign_label(v, 1, NONE);
                }
            }

            let mut augmented = false;
            loop {
                'scan: while let Some(v) = self.queue.pop() {
                    for idx in 0..self.neighbend[v].len() {
                        let p = self.neighbend[v][idx];
                        let k = p / 2;
                        let w = self.endpoint[p];
                        if self.inblossom[v] == self.inblossom[w] {
                            continue;
                        }
                        let mut kslack = 0;
                        if !self.allowedge[k] {
                            kslack = self.slack(k);
                            if kslack <= 0 {
                                self.allowedge[k] = true;
                            }
                        }
                        if self.allowedge[k] {
                            if self.label[self.inblossom[w]] == 0 {
                                self.assign_label(w, 2, p ^ 1);
                            } else if self.label[self.inblossom[w]] == 1 {
                                let base = self.scan_blossom(v, w);
                                if base != NONE {
                                    self.add_blossom(base, k);
                                } else {
                                    self.augment_matching(k);
                                    augmented = true;
                                    break 'scan;
                                }
                            } else if self.label[w] == 0 {
                                self.label[w] = 2;
                                self.labelend[w] = p ^ 1;
                            }
                        } else if self.label[self.inblossom[w]] == 1 {
                            let b = self.inblossom[v];
                            if self.bestedge[b] == NONE || kslack < self.slack(self.bestedge[b]) {
                                self.bestedge[b] = k;
                            }
                        } else if self.label[w] == 0
                            && (self.bestedge[w] == NONE || kslack < self.slack(self.bestedge[w]))
                        {
                            self.bestedge[w] = k;
                        }
                    }
                }
                if augmented {
                    break;
                }

                // Dual adjustment. Type 1 (a vertex dual hits zero) ends the stage.
                let mut deltatype = 1;
                let mut delta = *self.dualvar[..n].iter().min().unwrap();
                let mut deltaedge = NONE;
                let mut deltablossom = NONE;
                for v in 0..n {
                    if self.label[self.inblossom[v]] == 0 && self.bestedge[v] != NONE {
                        let d = self.slack(self.bestedge[v]);
                        if d < delta {
                            delta = d;
                            deltatype = 2;
                            deltaedge = self.bestedge[v];
                        }
                    }
                }
                for b in 0..2 * n {
                    if self.blossomparent[b] == NONE
                        && self.label[b] == 1
                        && self.bestedge[b] != NONE
                    {
                        let kslack = self.slack(self.bestedge[b]);
                        debug_assert_eq!(kslack % 2, 0);
                        let d = kslack / 2;
                        if d < delta {
                            delta = d;
                            deltatype = 3;
                            deltaedge = self.bestedge[b];
                        }
                    }
                }
                for b in n..2 * n {
                    if self.blossombase[b] != NONE
                        && self.blossomparent[b] == NONE
                        && self.label[b] == 2
                        && self.dualvar[b] < delta
                    {
                        delta = self.dualvar[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }

                for v in 0..n {
                    match self.label[self.inblossom[v]] {
                        1 => self.dualvar[v] -= delta,
                        2 => self.dualvar[v] += delta,
                        _ => {}
                    }
                }
                for b in n..2 * n {
                    if self.blossombase[b] != NONE && self.blossomparent[b] == NONE {
                        match self.label[b] {
                            1 => self.dualvar[b] += delta,
                            2 => self.dualvar[b] -= delta,
                            _ => {}
                        }
                    }
                }

                match deltatype {
                    1 => break,
                    2 => {
                        self.allowedge[deltaedge] = true;
                        let WeightedEdge { u: mut i, v: j, .. } = self.edges[deltaedge];
                        if self.label[self.inblossom[i]] == 0 {
                            i = j;
                        }
                        self.queue.push(i);
                    }
                    3 => {
                        self.allowedge[deltaedge] = true;
                        self.queue.push(self.edges[deltaedge].u);
                    }
                    _ => self.expand_blossom(deltablossom, false),
                }
            }
            if !augmented {
                break;
            }
            for b in n..2 * n {
                if self.blossomparent[b] == NONE
                    && self.blossombase[b] != NONE
                    && self.label[b] == 1
                    && self.dualvar[b] == 0
                {
                    self.expand_blossom(b, true);
                }
            }
        }
    }
}
