#![allow(dead_code)]

use bpmcf::Instance;
use proptest::prelude::*;
use rand::Rng;

/// Random instance with `1..=max_n` items, `1..=max_k` bins of capacity
/// `1..=max_b` (uniform when `uniform`), sizes `1..=max_size` and up to
/// `max_colors` colors, drawn from `rng`.
pub fn random_instance(
    rng: &mut impl Rng,
    max_n: usize,
    max_k: usize,
    max_b: u32,
    max_size: u32,
    max_colors: u32,
    uniform: bool,
) -> Instance {
    let n = rng.gen_range(1..=max_n);
    let k = rng.gen_range(1..=max_k);
    let bins = if uniform {
        vec![rng.gen_range(1..=max_b); k]
    } else {
        (0..k).map(|_| rng.gen_range(1..=max_b)).collect()
    };
    let sizes: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=max_size)).collect();
    let colors: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=max_colors)).collect();
    Instance::from_parts(&sizes, &colors, bins).unwrap()
}

/// Proptest strategy over small instances.
pub fn small_instance(max_n: usize, max_k: usize, max_b: u32) -> impl Strategy<Value = Instance> {
    (
        prop::collection::vec((1..=6u32, 1..=3u32), 1..=max_n),
        prop::collection::vec(1..=max_b, 1..=max_k),
        any::<bool>(),
    )
        .prop_map(|(items, mut bins, uniform)| {
            if uniform {
                let b = bins[0];
                bins.iter_mut().for_each(|c| *c = b);
            }
            let sizes: Vec<u32> = items.iter().map(|p| p.0).collect();
            let colors: Vec<u32> = items.iter().map(|p| p.1).collect();
            Instance::from_parts(&sizes, &colors, bins).unwrap()
        })
}

/// Distinct colors per bin, recounted from scratch.
pub fn recount(instance: &Instance, bin_of: &std::collections::BTreeMap<u32, usize>) -> u32 {
    let mut pairs = std::collections::BTreeSet::new();
    for item in instance.items() {
        pairs.insert((bin_of[&item.id], item.color));
    }
    pairs.len() as u32
}

/// Like [`random_instance`] but stops adding items once the total size
/// would pass `fill` times the total capacity, so most draws are feasible.
pub fn packable_instance(
    rng: &mut impl Rng,
    max_n: usize,
    max_k: usize,
    max_b: u32,
    max_colors: u32,
    fill: f64,
) -> Instance {
    let k = rng.gen_range(1..=max_k);
    let min_b = 3.min(max_b);
    let bins: Vec<u32> = if rng.gen_bool(0.5) {
        vec![rng.gen_range(min_b..=max_b); k]
    } else {
        (0..k).map(|_| rng.gen_range(min_b..=max_b)).collect()
    };
    let largest = *bins.iter().max().unwrap();
    let budget = (fill * bins.iter().sum::<u32>() as f64) as u32;
    let target = rng.gen_range(1..=max_n);
    let (mut sizes, mut colors, mut total) = (Vec::new(), Vec::new(), 0);
    while sizes.len() < target {
        let s = rng.gen_range(1..=largest.min(5));
        if !sizes.is_empty() && total + s > budget {
            break;
        }
        total += s;
        sizes.push(s);
        colors.push(rng.gen_range(1..=max_colors));
    }
    Instance::from_parts(&sizes, &colors, bins).unwrap()
}
