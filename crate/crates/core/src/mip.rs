//! LP-format export of the two integer programs and import of solver output.
//!
//! * The direct model assigns items to bins with `x_b{b}_o{o}` and marks
//!   color usage with `y_b{b}_g{g}`.
//! * The arc-flow model has one `z_b{b}_a{arc}` per bin and diagram arc,
//!   unit flow through every bin's diagram, and one covering row per
//!   (color, size) class.
//!
//! Output is deterministic: identical instances give byte-identical files.

use std::collections::BTreeMap;
use std::fmt::{self, Write};

use crate::bdd::{ArcId, Diagrams};
use crate::error::{Error, Result};
use crate::model::{evaluate, Color, Instance, ItemId, Solution};

const TERMS_PER_LINE: usize = 8;
const VALUE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formulation {
    Ip,
    Anf,
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formulation::Ip => "IP",
            Formulation::Anf => "ANF",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarMeaning {
    Assign { bin: usize, item: ItemId },
    UsesColor { bin: usize, color: Color },
    Arc { bin: usize, arc: ArcId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelFile {
    pub formulation: Formulation,
    pub text: String,
    pub var_index: BTreeMap<String, VarMeaning>,
    pub num_rows: usize,
}

impl ModelFile {
    pub fn num_vars(&self) -> usize {
        self.var_index.len()
    }
}

/// Reads the formulation tag written in the header of an emitted file.
pub fn detect_formulation(text: &str) -> Option<Formulation> {
    text.lines().find_map(
        |line| match line.trim().strip_prefix("\\ formulation:")?.trim() {
            "IP" => Some(Formulation::Ip),
            "ANF" => Some(Formulation::Anf),
            _ => None,
        },
    )
}

fn x_name(bin: usize, item: ItemId) -> String {
    format!("x_b{bin}_o{item}")
}

fn y_name(bin: usize, color: Color) -> String {
    format!("y_b{bin}_g{color}")
}

fn z_name(bin: usize, arc: ArcId) -> String {
    format!("z_b{bin}_a{}", arc.0)
}

type Terms = Vec<(i64, String)>;

/// Accumulates rows and renders the LP sections.
struct LpWriter {
    objective: Vec<(i64, String)>,
    rows: Vec<(String, Terms, &'static str, i64)>,
    binaries: Vec<String>,
}

impl LpWriter {
    fn new() -> Self {
        LpWriter {
            objective: Vec::new(),
            rows: Vec::new(),
            binaries: Vec::new(),
        }
    }

    fn row(&mut self, name: String, terms: Vec<(i64, String)>, sense: &'static str, rhs: i64) {
        self.rows.push((name, terms, sense, rhs));
    }

    fn render(&self, header: &[String]) -> String {
        let mut s = String::new();
        for line in header {
            let _ = writeln!(s, "\\ {line}");
        }
        s.push_str("Minimize\n");
        write_expr(&mut s, "obj", &self.objective, None);
        s.push_str("Subject To\n");
        for (name, terms, sense, rhs) in &self.rows {
            write_expr(&mut s, name, terms, Some((sense, *rhs)));
        }
        s.push_str("Binary\n");
        for chunk in self.binaries.chunks(TERMS_PER_LINE) {
            let _ = writeln!(s, " {}", chunk.join(" "));
        }
        s.push_str("End\n");
        s
    }
}

fn write_expr(s: &mut String, name: &str, terms: &[(i64, String)], rhs: Option<(&str, i64)>) {
    let _ = write!(s, " {name}:");
    if terms.is_empty() {
        s.push_str(" 0");
    }
    for (i, (coef, var)) in terms.iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            s.push_str("\n   ");
        }
        let sign = if *coef < 0 { "-" } else { "+" };
        let mag = coef.abs();
        if i == 0 && *coef >= 0 {
            s.push(' ');
        } else {
            let _ = write!(s, " {sign} ");
        }
        if mag != 1 {
            let _ = write!(s, "{mag} ");
        }
        s.push_str(var);
    }
    if let Some((sense, rhs)) = rhs {
        let _ = write!(s, " {sense} {rhs}");
    }
    s.push('\n');
}

/// Direct assignment model: k·n + k·|G| binaries and n + k + k·n rows.
pub fn emit_ip(instance: &Instance) -> ModelFile {
    let k = instance.num_bins();
    let colors = instance.colors();
    let mut lp = LpWriter::new();
    let mut var_index = BTreeMap::new();

    for b in 0..k {
        for item in instance.items() {
            let name = x_name(b, item.id);
            var_index.insert(
                name.clone(),
                VarMeaning::Assign {
                    bin: b,
                    item: item.id,
                },
            );
            lp.binaries.push(name);
        }
    }
    for b in 0..k {
        for &g in &colors {
            let name = y_name(b, g);
            var_index.insert(name.clone(), VarMeaning::UsesColor { bin: b, color: g });
            lp.objective.push((1, name.clone()));
            lp.binaries.push(name);
        }
    }

    for item in instance.items() {
        let terms = (0..k).map(|b| (1, x_name(b, item.id))).collect();
        lp.row(format!("assign_o{}", item.id), terms, "=", 1);
    }
    for (b, &cap) in instance.bins().iter().enumerate() {
        let terms = instance
            .items()
            .iter()
            .map(|o| (o.size as i64, x_name(b, o.id)))
            .collect();
        lp.row(format!("cap_b{b}"), terms, "<=", cap as i64);
    }
    for b in 0..k {
        for item in instance.items() {
            let terms = vec![(1, x_name(b, item.id)), (-1, y_name(b, item.color))];
            lp.row(format!("link_b{b}_o{}", item.id), terms, "<=", 0);
        }
    }

    let header = [
        "bin packing with minimum color fragmentation".to_string(),
        "formulation: IP".to_string(),
        format!(
            "items: {}, bins: {}, colors: {}",
            instance.num_items(),
            k,
            colors.len()
        ),
    ];
    ModelFile {
        formulation: Formulation::Ip,
        text: lp.render(&header),
        var_index,
        num_rows: lp.rows.len(),
    }
}

/// Arc-flow model over the per-bin diagrams of a color-blocked instance.
pub fn emit_anf(instance: &Instance, diagrams: &Diagrams) -> ModelFile {
    let k = instance.num_bins();
    let mut lp = LpWriter::new();
    let mut var_index = BTreeMap::new();
    let mut cover: BTreeMap<(Color, u32), Vec<(i64, String)>> = BTreeMap::new();

    for b in 0..k {
        let bdd = diagrams.for_bin(b);
        for (i, arc) in bdd.arcs().iter().enumerate() {
            let id = ArcId(i as u32);
            let name = z_name(b, id);
            var_index.insert(name.clone(), VarMeaning::Arc { bin: b, arc: id });
            if arc.cost != 0 {
                lp.objective.push((arc.cost as i64, name.clone()));
            }
            if arc.domain {
                if let Some(item) = bdd.item_of_layer(bdd.arc_layer(id)) {
                    cover
                        .entry((item.color, item.size))
                        .or_default()
                        .push((1, name.clone()));
                }
            }
            lp.binaries.push(name);
        }
    }
    if lp.objective.is_empty() {
        if let Some(first) = lp.binaries.first() {
            lp.objective.push((0, first.clone()));
        }
    }

    for b in 0..k {
        let bdd = diagrams.for_bin(b);
        let mut inflow: Vec<Vec<(i64, String)>> = vec![Vec::new(); bdd.nodes().len()];
        let mut outflow: Vec<Vec<(i64, String)>> = vec![Vec::new(); bdd.nodes().len()];
        for (i, arc) in bdd.arcs().iter().enumerate() {
            let name = z_name(b, ArcId(i as u32));
            inflow[arc.to.index()].push((1, name.clone()));
            outflow[arc.from.index()].push((1, name));
        }
        let root = bdd.root().index();
        let terminal = bdd.terminal().index();
        lp.row(format!("src_b{b}"), outflow[root].clone(), "=", 1);
        for u in 0..bdd.nodes().len() {
            if u == root || u == terminal {
                continue;
            }
            let mut terms = inflow[u].clone();
            terms.extend(outflow[u].iter().map(|(_, v)| (-1, v.clone())));
            lp.row(format!("flow_b{b}_n{u}"), terms, "=", 0);
        }
        lp.row(format!("snk_b{b}"), inflow[terminal].clone(), "=", 1);
    }

    let classes = instance.color_size_classes();
    for (&(g, s), &count) in &classes {
        let terms = cover.remove(&(g, s)).unwrap_or_default();
        lp.row(format!("cover_g{g}_s{s}"), terms, "=", count as i64);
    }

    let header = [
        "bin packing with minimum color fragmentation".to_string(),
        "formulation: ANF".to_string(),
        format!(
            "items: {}, bins: {}, classes: {}",
            instance.num_items(),
            k,
            classes.len()
        ),
    ];
    ModelFile {
        formulation: Formulation::Anf,
        text: lp.render(&header),
        var_index,
        num_rows: lp.rows.len(),
    }
}

/// Parses `name value` lines. Blank lines and `#` comments are skipped;
/// values must lie within 1e-6 of 0 or 1.
pub fn parse_values(text: &str) -> Result<BTreeMap<String, bool>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected `name value`, got `{line}`"),
            });
        };
        let v: f64 = value.parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("`{value}` is not a number"),
        })?;
        let bit = if v.abs() <= VALUE_TOLERANCE {
            false
        } else if (v - 1.0).abs() <= VALUE_TOLERANCE {
            true
        } else {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("value {v} of `{name}` is not binary"),
            });
        };
        out.insert(name.to_string(), bit);
    }
    Ok(out)
}

/// Turns solver output for `model` back into an evaluated solution. Missing
/// variables count as 0.
pub fn import_solution(
    instance: &Instance,
    model: &ModelFile,
    values: &BTreeMap<String, bool>,
) -> Result<Solution> {
    if let Some(name) = values.keys().find(|n| !model.var_index.contains_key(*n)) {
        return Err(Error::UnknownVariable(name.clone()));
    }
    let ones = values
        .iter()
        .filter(|(_, &v)| v)
        .map(|(n, _)| model.var_index[n]);
    match model.formulation {
        Formulation::Ip => import_ip(instance, ones.collect()),
        Formulation::Anf => import_anf(instance, ones.collect()),
    }
}

fn import_ip(instance: &Instance, ones: Vec<VarMeaning>) -> Result<Solution> {
    let mut bin_of = BTreeMap::new();
    let mut used = std::collections::BTreeSet::new();
    for m in &ones {
        match *m {
            VarMeaning::Assign { bin, item } => {
                if bin_of.insert(item, bin).is_some() {
                    return Err(Error::InconsistentValues(format!(
                        "item {item} is assigned to more than one bin"
                    )));
                }
            }
            VarMeaning::UsesColor { bin, color } => {
                used.insert((bin, color));
            }
            VarMeaning::Arc { .. } => unreachable!("arc variable in direct model"),
        }
    }
    for item in instance.items() {
        if let Some(&bin) = bin_of.get(&item.id) {
            if !used.contains(&(bin, item.color)) {
                return Err(Error::InconsistentValues(format!(
                    "item {} sits in bin {bin} but {} is 0",
                    item.id,
                    y_name(bin, item.color)
                )));
            }
        }
    }
    evaluate(instance, &bin_of)
}

fn import_anf(instance: &Instance, ones: Vec<VarMeaning>) -> Result<Solution> {
    let diagrams = Diagrams::build(instance)?;
    let k = instance.num_bins();
    let mut chosen: Vec<std::collections::BTreeSet<ArcId>> = vec![Default::default(); k];
    for m in ones {
        if let VarMeaning::Arc { bin, arc } = m {
            chosen[bin].insert(arc);
        }
    }

    // Per bin: walk the unit flow from the root and record the taken layers.
    let mut picks: BTreeMap<(Color, u32), Vec<usize>> = BTreeMap::new();
    for (b, arcs) in chosen.iter().enumerate() {
        let bdd = diagrams.for_bin(b);
        let mut at = bdd.root();
        let mut steps = 0;
        while at != bdd.terminal() {
            let node = bdd.node(at);
            let out: Vec<ArcId> = [node.zero_arc, node.one_arc]
                .into_iter()
                .flatten()
                .filter(|a| arcs.contains(a))
                .collect();
            let [arc] = out[..] else {
                return Err(Error::InconsistentValues(format!(
                    "bin {b}: node {} carries {} units of outgoing flow",
                    at.0,
                    out.len()
                )));
            };
            let layer = bdd.arc_layer(arc);
            if bdd.arc(arc).domain {
                if let Some(item) = bdd.item_of_layer(layer) {
                    picks.entry((item.color, item.size)).or_default().push(b);
                }
            }
            at = bdd.arc(arc).to;
            steps += 1;
        }
        if steps != arcs.len() {
            return Err(Error::InconsistentValues(format!(
                "bin {b}: {} arcs set but the path has {steps}",
                arcs.len()
            )));
        }
    }

    let mut bin_of = BTreeMap::new();
    for (class, count) in instance.color_size_classes() {
        let bins = picks.remove(&class).unwrap_or_default();
        if bins.len() != count {
            return Err(Error::InconsistentValues(format!(
                "class (color {}, size {}) covered {} times, expected {count}",
                class.0,
                class.1,
                bins.len()
            )));
        }
        let mut ids: Vec<ItemId> = instance
            .items()
            .iter()
            .filter(|o| (o.color, o.size) == class)
            .map(|o| o.id)
            .collect();
        ids.sort_unstable();
        for (id, bin) in ids.into_iter().zip(bins) {
            bin_of.insert(id, bin);
        }
    }
    evaluate(instance, &bin_of)
}
