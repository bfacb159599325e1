//! Seeded random instances in the style of the group-seating benchmark:
//! sizes 2..=5 drawn i.i.d. until 85% of the total capacity is used, then
//! colors handed out to consecutive blocks of 2..=8 items.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Instance, InstanceMeta, Item};

/// Item sizes and their probabilities.
pub const SIZE_DISTRIBUTION: [(u32, f64); 4] = [(2, 0.4), (3, 0.3), (4, 0.2), (5, 0.1)];
/// Probability that a color block size is drawn from {2, 3, 4} rather than {5, ..., 8}.
pub const SMALL_BLOCK_PROBABILITY: f64 = 0.6;
/// Share of the overall capacity filled before item generation stops.
pub const FILL_PERCENT: u64 = 85;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenConfig {
    pub k: usize,
    pub capacity: u32,
    pub seed: u64,
}

impl GenConfig {
    pub fn new(k: usize, capacity: u32, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if capacity < 8 {
            return Err(Error::InvalidConfig(format!(
                "bin capacity must be at least 8, got {capacity}"
            )));
        }
        Ok(GenConfig { k, capacity, seed })
    }

    /// ⌈0.85·k·B⌉: generation stops once the total size reaches this.
    pub fn fill_threshold(&self) -> u64 {
        (FILL_PERCENT * self.k as u64 * self.capacity as u64).div_ceil(100)
    }
}

/// Draws one instance. Sizes are sampled first, then color blocks left to
/// right; a single leftover item joins the previous color.
pub fn generate(config: &GenConfig) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let sizes_dist = WeightedIndex::new(SIZE_DISTRIBUTION.iter().map(|&(_, p)| p))
        .expect("weights are positive");

    let threshold = config.fill_threshold();
    let mut sizes = Vec::new();
    let mut total = 0u64;
    while total < threshold {
        let size = SIZE_DISTRIBUTION[sizes_dist.sample(&mut rng)].0;
        total += size as u64;
        sizes.push(size);
    }

    let mut colors = Vec::with_capacity(sizes.len());
    let mut color = 0u32;
    while colors.len() < sizes.len() {
        let left = sizes.len() - colors.len();
        if left == 1 && color > 0 {
            colors.push(color);
            break;
        }
        let block = if rng.gen_bool(SMALL_BLOCK_PROBABILITY) {
            rng.gen_range(2..=4)
        } else {
            rng.gen_range(5..=8)
        };
        color += 1;
        colors.extend(std::iter::repeat_n(color, block.min(left)));
    }

    let items = sizes
        .iter()
        .zip(&colors)
        .enumerate()
        .map(|(i, (&s, &g))| Item::new(i as u32 + 1, s, g))
        .collect();
    Instance::new(items, vec![config.capacity; config.k])
        .expect("generated instance is valid")
        .with_meta(InstanceMeta {
            k: config.k,
            capacity: config.capacity,
            seed: config.seed,
        })
}

/// Distributional summary of a batch of instances.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenStats {
    pub instances: usize,
    pub items: usize,
    /// item size → count
    pub size_histogram: BTreeMap<u32, usize>,
    /// items per color → number of colors
    pub class_size_histogram: BTreeMap<usize, usize>,
    /// Σ sizes / total capacity, one entry per instance
    pub fill_ratios: Vec<f64>,
    /// |G| → number of instances
    pub color_count_histogram: BTreeMap<usize, usize>,
}

impl GenStats {
    pub fn size_frequency(&self, size: u32) -> f64 {
        *self.size_histogram.get(&size).unwrap_or(&0) as f64 / self.items.max(1) as f64
    }

    /// Share of color classes with 2 to 4 items.
    pub fn small_class_share(&self) -> f64 {
        let classes: usize = self.class_size_histogram.values().sum();
        let small: usize = (2..=4)
            .map(|s| self.class_size_histogram.get(&s).copied().unwrap_or(0))
            .sum();
        small as f64 / classes.max(1) as f64
    }

    pub fn min_fill(&self) -> f64 {
        self.fill_ratios
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_fill(&self) -> f64 {
        self.fill_ratios
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn stats(instances: &[Instance]) -> GenStats {
    let mut out = GenStats {
        instances: instances.len(),
        ..GenStats::default()
    };
    for inst in instances {
        out.items += inst.num_items();
        for item in inst.items() {
            *out.size_histogram.entry(item.size).or_insert(0) += 1;
        }
        let mut per_color: BTreeMap<u32, usize> = BTreeMap::new();
        for item in inst.items() {
            *per_color.entry(item.color).or_insert(0) += 1;
        }
        for &count in per_color.values() {
            *out.class_size_histogram.entry(count).or_insert(0) += 1;
        }
        *out.color_count_histogram
            .entry(per_color.len())
            .or_insert(0) += 1;
        let capacity: u64 = inst.bins().iter().map(|&c| c as u64).sum();
        out.fill_ratios
            .push(inst.total_size() as f64 / capacity as f64);
    }
    out
}
