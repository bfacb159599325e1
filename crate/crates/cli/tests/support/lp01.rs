//! Minimal reader for the LP files the library writes, and an exhaustive
//! 0/1 solver with bound propagation. Independent of the library's own model
//! bookkeeping: it only sees the text.

use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(i64, usize)>,
    pub sense: Sense,
    pub rhs: i64,
}

#[derive(Debug, Clone, Default)]
pub struct Lp {
    pub objective: Vec<(i64, usize)>,
    pub rows: Vec<Row>,
    pub vars: Vec<String>,
    pub index: HashMap<String, usize>,
}

#[derive(PartialEq)]
enum Section {
    None,
    Objective,
    Rows,
    Binary,
}

fn var_id(lp: &mut Lp, name: &str) -> usize {
    if let Some(&i) = lp.index.get(name) {
        return i;
    }
    lp.vars.push(name.to_string());
    lp.index.insert(name.to_string(), lp.vars.len() - 1);
    lp.vars.len() - 1
}

type Parsed = (Vec<(i64, usize)>, Option<(Sense, i64)>);

/// Splits a row body into terms and optional `(sense, rhs)`.
fn parse_expr(lp: &mut Lp, tokens: &[&str]) -> Parsed {
    let mut terms = Vec::new();
    let mut sign = 1;
    let mut coef: Option<i64> = None;
    let mut i = 0;
    while i < tokens.len() {
        let t = tokens[i];
        match t {
            "+" => sign = 1,
            "-" => sign = -1,
            "<=" | ">=" | "=" => {
                let sense = match t {
                    "<=" => Sense::Le,
                    ">=" => Sense::Ge,
                    _ => Sense::Eq,
                };
                let rhs: i64 = tokens[i + 1].parse().expect("numeric right-hand side");
                assert_eq!(i + 2, tokens.len(), "trailing tokens after rhs");
                return (terms, Some((sense, rhs)));
            }
            _ => {
                if let Ok(c) = t.parse::<i64>() {
                    coef = Some(c);
                } else {
                    let v = var_id(lp, t);
                    terms.push((sign * coef.take().unwrap_or(1), v));
                    sign = 1;
                }
            }
        }
        i += 1;
    }
    (terms, None)
}

pub fn parse(text: &str) -> Lp {
    let mut lp = Lp::default();
    let mut section = Section::None;
    // (name, tokens) of rows being accumulated across continuation lines
    let mut pending: Vec<(String, Vec<String>)> = Vec::new();
    let mut binaries = Vec::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.starts_with('\\') || trimmed.is_empty() {
            continue;
        }
        match trimmed {
            "Minimize" => {
                section = Section::Objective;
                continue;
            }
            "Subject To" => {
                section = Section::Rows;
                continue;
            }
            "Binary" | "Binaries" => {
                section = Section::Binary;
                continue;
            }
            "End" => break,
            _ => {}
        }
        match section {
            Section::Objective | Section::Rows => {
                let mut tokens = trimmed.split_whitespace().peekable();
                if let Some(first) = tokens.peek() {
                    if let Some(name) = first.strip_suffix(':') {
                        let name = name.to_string();
                        tokens.next();
                        pending.push((name, Vec::new()));
                    }
                }
                let (_, body) = pending.last_mut().expect("row body before a name");
                body.extend(tokens.map(str::to_string));
            }
            Section::Binary => binaries.extend(trimmed.split_whitespace().map(str::to_string)),
            Section::None => panic!("text outside a section: {line}"),
        }
    }
    let mut first = true;
    for (name, body) in pending {
        let refs: Vec<&str> = body.iter().map(String::as_str).collect();
        let (terms, rhs) = parse_expr(&mut lp, &refs);
        if first {
            assert!(rhs.is_none(), "objective has a sense");
            lp.objective = terms;
            first = false;
        } else {
            let (sense, rhs) = rhs.expect("row without sense");
            lp.rows.push(Row {
                name,
                terms,
                sense,
                rhs,
            });
        }
    }
    let declared = binaries.len();
    for b in &binaries {
        var_id(&mut lp, b);
    }
    assert_eq!(
        lp.vars.len(),
        declared,
        "variables used but not declared binary"
    );
    lp
}

struct Search<'a> {
    lp: &'a Lp,
    order: Vec<usize>,
    rows_of: Vec<Vec<usize>>,
    value: Vec<i8>,
    trail: Vec<usize>,
    best: Option<(i64, Vec<i8>)>,
    nodes: u64,
    limit: u64,
}

impl Search<'_> {
    fn set(&mut self, v: usize, val: i8) {
        self.value[v] = val;
        self.trail.push(v);
    }

    /// Bound propagation to a fixpoint; false on a violated row.
    fn propagate(&mut self, mut queue: Vec<usize>) -> bool {
        while let Some(r) = queue.pop() {
            let row = &self.lp.rows[r];
            let (mut lo, mut hi) = (0i64, 0i64);
            for &(c, v) in &row.terms {
                match self.value[v] {
                    1 => {
                        lo += c;
                        hi += c;
                    }
                    0 => {}
                    _ if c > 0 => hi += c,
                    _ => lo += c,
                }
            }
            let need_le = matches!(row.sense, Sense::Le | Sense::Eq);
            let need_ge = matches!(row.sense, Sense::Ge | Sense::Eq);
            if (need_le && lo > row.rhs) || (need_ge && hi < row.rhs) {
                return false;
            }
            let mut forced = Vec::new();
            for &(c, v) in &row.terms {
                if self.value[v] != -1 || c == 0 {
                    continue;
                }
                // Activity bounds if v were fixed to 1 or to 0.
                let (lo1, hi1, lo0, hi0) = if c > 0 {
                    (lo + c, hi, lo, hi - c)
                } else {
                    (lo, hi + c, lo - c, hi)
                };
                let ok1 = !(need_le && lo1 > row.rhs) && !(need_ge && hi1 < row.rhs);
                let ok0 = !(need_le && lo0 > row.rhs) && !(need_ge && hi0 < row.rhs);
                match (ok0, ok1) {
                    (false, false) => return false,
                    (false, true) => forced.push((v, 1)),
                    (true, false) => forced.push((v, 0)),
                    _ => {}
                }
            }
            for (v, val) in forced {
                if self.value[v] == -1 {
                    self.set(v, val);
                    queue.extend(self.rows_of[v].iter().copied());
                } else if self.value[v] != val {
                    return false;
                }
            }
        }
        true
    }

    fn objective_floor(&self) -> i64 {
        self.lp
            .objective
            .iter()
            .map(|&(c, v)| match self.value[v] {
                1 => c,
                -1 if c < 0 => c,
                _ => 0,
            })
            .sum()
    }

    fn dfs(&mut self, pos: usize) {
        self.nodes += 1;
        assert!(
            self.nodes <= self.limit,
            "exhaustive search exceeded {} nodes",
            self.limit
        );
        if let Some((best, _)) = &self.best {
            if self.objective_floor() >= *best {
                return;
            }
        }
        let Some(offset) = self.order[pos..].iter().position(|&v| self.value[v] == -1) else {
            let obj = self.objective_floor();
            self.best = Some((obj, self.value.clone()));
            return;
        };
        let pos = pos + offset;
        let v = self.order[pos];
        for val in [0, 1] {
            let mark = self.trail.len();
            self.set(v, val);
            if self.propagate(self.rows_of[v].clone()) {
                self.dfs(pos + 1);
            }
            for u in self.trail.drain(mark..) {
                self.value[u] = -1;
            }
        }
    }
}

/// Minimum objective and the variables set to 1, or `None` when no 0/1
/// point satisfies every row. `order` lists variables to branch on first.
pub fn solve(lp: &Lp, order: &[usize], limit: u64) -> Option<(i64, Vec<String>)> {
    let mut rows_of = vec![Vec::new(); lp.vars.len()];
    for (r, row) in lp.rows.iter().enumerate() {
        for &(_, v) in &row.terms {
            rows_of[v].push(r);
        }
    }
    let mut full: Vec<usize> = order.to_vec();
    let mut listed = vec![false; lp.vars.len()];
    for &v in order {
        listed[v] = true;
    }
    full.extend((0..lp.vars.len()).filter(|&v| !listed[v]));
    let mut s = Search {
        lp,
        order: full,
        rows_of,
        value: vec![-1; lp.vars.len()],
        trail: Vec::new(),
        best: None,
        nodes: 0,
        limit,
    };
    if s.propagate((0..lp.rows.len()).collect()) {
        s.dfs(0);
    }
    s.best.map(|(obj, value)| {
        let ones = (0..lp.vars.len())
            .filter(|&v| value[v] == 1)
            .map(|v| lp.vars[v].clone())
            .collect();
        (obj, ones)
    })
}

/// Checks a full 0/1 point against every row.
pub fn feasible(lp: &Lp, ones: &[String]) -> bool {
    let mut x = vec![0i64; lp.vars.len()];
    for name in ones {
        x[lp.index[name]] = 1;
    }
    lp.rows.iter().all(|row| {
        let act: i64 = row.terms.iter().map(|&(c, v)| c * x[v]).sum();
        match row.sense {
            Sense::Le => act <= row.rhs,
            Sense::Ge => act >= row.rhs,
            Sense::Eq => act == row.rhs,
        }
    })
}
