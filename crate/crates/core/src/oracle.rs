//! Exhaustive reference solver. Slow by construction; used as ground truth.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::{evaluate, Instance, Outcome, SolveReport, Status};

/// Default node budget for [`brute_force_solve`].
pub const DEFAULT_LIMIT: u64 = 50_000_000;

/// Enumerates every capacity-feasible assignment (no symmetry reduction) and
/// keeps the first minimum in lexicographic order of the bin vector.
pub fn brute_force_solve(instance: &Instance, limit: u64) -> Result<Outcome> {
    let start = Instant::now();
    let mut search = Enumeration {
        sizes: instance.items().iter().map(|o| o.size as u64).collect(),
        colors: instance.items().iter().map(|o| o.color).collect(),
        capacity: instance.bins().iter().map(|&c| c as u64).collect(),
        load: vec![0; instance.num_bins()],
        current: Vec::with_capacity(instance.num_items()),
        best: None,
        nodes: 0,
        limit,
    };
    search.run()?;

    let elapsed = start.elapsed().as_secs_f64();
    let nodes = search.nodes;
    Ok(match search.best {
        Some((objective, bins)) => {
            let bin_of: BTreeMap<_, _> = instance
                .items()
                .iter()
                .zip(bins)
                .map(|(o, b)| (o.id, b))
                .collect();
            let solution = evaluate(instance, &bin_of).expect("enumerated assignment is feasible");
            debug_assert_eq!(solution.objective, objective);
            Outcome {
                solution: Some(solution),
                report: SolveReport::new(
                    Status::Optimal,
                    objective,
                    Some(objective),
                    elapsed,
                    nodes,
                ),
            }
        }
        None => Outcome {
            solution: None,
            report: SolveReport::new(Status::Infeasible, 0, None, elapsed, nodes),
        },
    })
}

struct Enumeration {
    sizes: Vec<u64>,
    colors: Vec<u32>,
    capacity: Vec<u64>,
    load: Vec<u64>,
    current: Vec<usize>,
    best: Option<(u32, Vec<usize>)>,
    nodes: u64,
    limit: u64,
}

impl Enumeration {
    fn run(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.limit {
            return Err(Error::BudgetExceeded { limit: self.limit });
        }
        let depth = self.current.len();
        if depth == self.sizes.len() {
            let objective = self.objective();
            if self.best.as_ref().is_none_or(|(b, _)| objective < *b) {
                self.best = Some((objective, self.current.clone()));
            }
            return Ok(());
        }
        for bin in 0..self.capacity.len() {
            if self.load[bin] + self.sizes[depth] > self.capacity[bin] {
                continue;
            }
            self.load[bin] += self.sizes[depth];
            self.current.push(bin);
            let r = self.run();
            self.current.pop();
            self.load[bin] -= self.sizes[depth];
            r?;
        }
        Ok(())
    }

    fn objective(&self) -> u32 {
        let pairs: BTreeSet<(usize, u32)> = self
            .current
            .iter()
            .zip(&self.colors)
            .map(|(&b, &g)| (b, g))
            .collect();
        pairs.len() as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        let inst = Instance::from_parts(&[2, 2, 3, 3], &[1, 1, 2, 2], vec![5, 5]).unwrap();
        let out = brute_force_solve(&inst, DEFAULT_LIMIT).unwrap();
        assert_eq!(out.solution.unwrap().objective, 4);
        assert_eq!(out.report.status, Status::Optimal);
        assert_eq!(out.report.gap_pct, 0.0);

        let fig1 = Instance::from_parts(&[2, 3, 2, 3, 2], &[1, 1, 1, 2, 2], vec![4, 4, 4]).unwrap();
        let out = brute_force_solve(&fig1, DEFAULT_LIMIT).unwrap();
        assert!(out.solution.is_none());
        assert_eq!(out.report.status, Status::Infeasible);

        let too_big = Instance::from_parts(&[2], &[1], vec![1]).unwrap();
        assert_eq!(
            brute_force_solve(&too_big, DEFAULT_LIMIT)
                .unwrap()
                .report
                .status,
            Status::Infeasible
        );
    }

    #[test]
    fn lexicographic_tie_break() {
        let inst = Instance::from_parts(&[1, 1], &[1, 2], vec![2, 2]).unwrap();
        let out = brute_force_solve(&inst, DEFAULT_LIMIT).unwrap();
        let sol = out.solution.unwrap();
        assert_eq!(sol.objective, 2);
        assert_eq!(sol.assignment_vector(&inst), vec![0, 0]);
    }

    #[test]
    fn budget_is_enforced() {
        let inst = Instance::from_parts(&[1; 8], &[1; 8], vec![8; 4]).unwrap();
        assert_eq!(
            brute_force_solve(&inst, 100).unwrap_err(),
            Error::BudgetExceeded { limit: 100 }
        );
    }
}
