use bpmcf::instgen::{generate, stats, GenConfig};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn generated_instances_respect_the_recipe(k in 1usize..=40, cap in 8u32..=16, seed in any::<u64>()) {
        let cfg = GenConfig::new(k, cap, seed).unwrap();
        let inst = generate(&cfg);
        prop_assert_eq!(inst.to_json(), generate(&cfg).to_json());

        let total = inst.total_size();
        let kb = k as u64 * cap as u64;
        prop_assert!(total >= (85 * kb).div_ceil(100));
        prop_assert!(total <= kb + 4);
        prop_assert!(inst.items().iter().all(|o| (2..=5).contains(&o.size)));

        // Labels 1..|G| appear in order of first appearance, in contiguous blocks.
        let mut last = 0;
        for o in inst.items() {
            prop_assert!(o.color == last || o.color == last + 1);
            last = o.color;
        }
        prop_assert_eq!(inst.colors().len() as u32, last);
        prop_assert_eq!(inst.meta().unwrap().seed, seed);
        prop_assert!(inst.uniform_capacity());
        prop_assert_eq!(inst.num_bins(), k);
    }
}

#[test]
fn pooled_size_frequencies() {
    let batch: Vec<_> = (0..400)
        .map(|s| generate(&GenConfig::new(30, 10, s).unwrap()))
        .collect();
    let st = stats(&batch);
    assert!(st.items > 30_000);
    for (size, p) in [(2, 0.4), (3, 0.3), (4, 0.2), (5, 0.1)] {
        assert!(
            (st.size_frequency(size) - p).abs() < 0.01,
            "size {size}: {}",
            st.size_frequency(size)
        );
    }
}
