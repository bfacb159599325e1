#![allow(dead_code)]

pub mod lp01;

use bpmcf::Instance;
use rand::Rng;

/// Random instance: `1..=max_n` items of size `1..=max_size` in up to
/// `max_colors` colors, `1..=max_k` bins of capacity `1..=max_b`.
pub fn random_instance(
    rng: &mut impl Rng,
    max_n: usize,
    max_k: usize,
    max_b: u32,
    max_size: u32,
    max_colors: u32,
) -> Instance {
    let n = rng.gen_range(1..=max_n);
    let k = rng.gen_range(1..=max_k);
    let bins = if rng.gen_bool(0.5) {
        vec![rng.gen_range(1..=max_b); k]
    } else {
        (0..k).map(|_| rng.gen_range(1..=max_b)).collect()
    };
    let sizes: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=max_size)).collect();
    let colors: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=max_colors)).collect();
    Instance::from_parts(&sizes, &colors, bins).unwrap()
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

pub fn bin_path() -> &'static str {
    env!("CARGO_BIN_EXE_bpmcf")
}
