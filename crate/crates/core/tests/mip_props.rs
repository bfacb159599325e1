mod common;

use std::collections::BTreeMap;

use bpmcf::bdd::Diagrams;
use bpmcf::mip::{emit_anf, emit_ip, import_solution, parse_values, Formulation};
use bpmcf::search::{solve, SolverConfig};
use bpmcf::{canonical_order, Instance};
use common::random_instance;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn canonical(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    canonical_order(&random_instance(&mut rng, 10, 4, 10, 5, 4, false)).instance
}

/// `name value` text setting the named variables to 1.
fn values_text(ones: &[String]) -> String {
    ones.iter().map(|n| format!("{n} 1\n")).collect()
}

#[test]
fn model_sizes() {
    for seed in 0..60 {
        let inst = canonical(seed);
        let (n, k, g) = (inst.num_items(), inst.num_bins(), inst.colors().len());
        let ip = emit_ip(&inst);
        assert_eq!(ip.num_vars(), k * n + k * g);
        assert_eq!(ip.num_rows, n + k + k * n);

        let d = Diagrams::build(&inst).unwrap();
        let anf = emit_anf(&inst, &d);
        let arcs: usize = (0..k).map(|b| d.for_bin(b).arcs().len()).sum();
        let nodes: usize = (0..k).map(|b| d.for_bin(b).nodes().len()).sum();
        assert_eq!(anf.num_vars(), arcs);
        // one flow row per node, plus one per (color, size) class
        assert_eq!(anf.num_rows, nodes + inst.color_size_classes().len());
        assert_eq!(anf.formulation, Formulation::Anf);
    }
}

#[test]
fn emission_is_byte_identical() {
    for seed in 0..30 {
        let inst = canonical(seed);
        let again = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(emit_ip(&inst).text, emit_ip(&again).text);
        let a = emit_anf(&inst, &Diagrams::build(&inst).unwrap()).text;
        let b = emit_anf(&again, &Diagrams::build(&again).unwrap()).text;
        assert_eq!(a, b);
    }
}

#[test]
fn optimal_assignments_round_trip_through_both_models() {
    for seed in 0..60 {
        let inst = canonical(seed);
        let out = solve(&inst, &SolverConfig::default()).unwrap();
        let Some(sol) = out.solution else { continue };

        let ip = emit_ip(&inst);
        let mut ones = Vec::new();
        for (&id, &b) in &sol.bin_of {
            ones.push(format!("x_b{b}_o{id}"));
        }
        let used: std::collections::BTreeSet<(usize, u32)> = inst
            .items()
            .iter()
            .map(|o| (sol.bin_of[&o.id], o.color))
            .collect();
        ones.extend(used.iter().map(|(b, g)| format!("y_b{b}_g{g}")));
        let values = parse_values(&values_text(&ones)).unwrap();
        assert_eq!(import_solution(&inst, &ip, &values).unwrap(), sol);

        let d = Diagrams::build(&inst).unwrap();
        let anf = emit_anf(&inst, &d);
        let mut per_bin: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
        for (&id, &b) in &sol.bin_of {
            per_bin.entry(b).or_default().push(id);
        }
        let mut ones = Vec::new();
        for b in 0..inst.num_bins() {
            let ids = per_bin.remove(&b).unwrap_or_default();
            for a in d.for_bin(b).path_for(&ids).unwrap() {
                ones.push(format!("z_b{b}_a{}", a.0));
            }
        }
        let values = parse_values(&values_text(&ones)).unwrap();
        let back = import_solution(&inst, &anf, &values).unwrap();
        assert_eq!(back.objective, sol.objective);
    }
}
