//! Property tests for the data model and the two-covariate solvers.

use std::collections::BTreeMap;

use covbal::balance::{
    imbalance, index_levels, intersection_counts, materialize, selection_from_ids, Selection,
};
use covbal::balance2::{classify_3type, solve_maxflow2, solve_mcnf2};
use covbal::oracle::random_instance;
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Params {
    n: usize,
    n_prime: usize,
    k1: usize,
    k2: usize,
    seed: u64,
}

fn params() -> impl Strategy<Value = Params> {
    (1usize..=6, 0usize..=6, 1usize..=4, 1usize..=4, 0u64..1 << 32).prop_map(
        |(n, extra, k1, k2, seed)| Params {
            n,
            n_prime: n + extra,
            k1,
            k2,
            seed,
        },
    )
}

/// Deterministic pseudo-random selection of `size` controls.
fn arbitrary_selection(
    dataset: &covbal::Dataset,
    index: &covbal::LevelIndex,
    size: usize,
    seed: u64,
) -> Selection {
    let mut order: Vec<usize> = (0..dataset.control().len()).collect();
    // simple LCG walk keeps this test independent of the library's RNG
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
    for i in (1..order.len()).rev() {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        order.swap(i, (state >> 33) as usize % (i + 1));
    }
    let mut counts: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
    for &j in order.iter().take(size) {
        *counts
            .entry(index.cell_of(&dataset.control()[j]))
            .or_insert(0) += 1;
    }
    Selection::from_counts(counts)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn discrepancies_telescope(p in params(), size_frac in 0.0f64..=1.0) {
        let ds = random_instance(2, p.n, p.n_prime, &[p.k1, p.k2], p.seed).unwrap();
        let index = index_levels(&ds).unwrap();
        let counts = intersection_counts(&ds, &index);
        let size = ((p.n_prime as f64) * size_frac) as usize;
        let selection = arbitrary_selection(&ds, &index, size, p.seed ^ 0xabcd);
        let report = imbalance(&index, &counts, &selection).unwrap();
        for covariate in 0..2 {
            let total: i64 = report
                .levels
                .iter()
                .filter(|l| l.covariate == covariate)
                .map(|l| l.discrepancy)
                .sum();
            prop_assert_eq!(total, selection.total() - ds.n());
        }
    }

    #[test]
    fn empty_selection_scores_p_times_n(p in params()) {
        let ds = random_instance(2, p.n, p.n_prime, &[p.k1, p.k2], p.seed).unwrap();
        let index = index_levels(&ds).unwrap();
        let counts = intersection_counts(&ds, &index);
        let report = imbalance(&index, &counts, &Selection::default()).unwrap();
        prop_assert_eq!(report.total, 2 * ds.n());
    }

    #[test]
    fn materialization_preserves_imbalance(p in params(), seed_a in 0u64..100, seed_b in 0u64..100) {
        let ds = random_instance(2, p.n, p.n_prime, &[p.k1, p.k2], p.seed).unwrap();
        let index = index_levels(&ds).unwrap();
        let counts = intersection_counts(&ds, &index);
        let size = p.n.min(p.n_prime);
        let selection = arbitrary_selection(&ds, &index, size, p.seed ^ 0x77);
        let expected = imbalance(&index, &counts, &selection).unwrap().total;
        for seed in [seed_a, seed_b] {
            let ids = materialize(&ds, &selection, seed).unwrap();
            prop_assert_eq!(ids.len() as i64, selection.total());
            let back = selection_from_ids(&ds, &index, &ids).unwrap();
            prop_assert_eq!(back.counts(), selection.counts());
            prop_assert_eq!(imbalance(&index, &counts, &back).unwrap().total, expected);
        }
    }

    #[test]
    fn three_type_identity_holds_for_any_full_selection(p in params()) {
        let ds = random_instance(2, p.n, p.n_prime, &[p.k1, p.k2], p.seed).unwrap();
        prop_assume!(ds.n() <= ds.n_prime());
        let index = index_levels(&ds).unwrap();
        let counts = intersection_counts(&ds, &index);
        let selection = arbitrary_selection(&ds, &index, p.n, p.seed ^ 0x3333);
        let im = imbalance(&index, &counts, &selection).unwrap().total;
        let (s1, s2, s3) = classify_3type(&index, &counts, &selection).unwrap();
        prop_assert_eq!(s1 + s2 + s3, ds.n());
        prop_assert_eq!(im, 4 * ds.n() - 2 * s2 - 4 * s3);
    }

    #[test]
    fn solver_routes_agree(p in params(), q_frac in 0.0f64..=1.0) {
        let ds = random_instance(2, p.n, p.n_prime, &[p.k1, p.k2], p.seed).unwrap();
        let q = ((p.n_prime as f64) * q_frac) as i64;
        let mcnf = solve_mcnf2(&ds, q).unwrap();
        let maxflow = solve_maxflow2(&ds, q).unwrap();
        prop_assert_eq!(mcnf.objective, maxflow.objective);
        prop_assert_eq!(mcnf.selection.total(), q);
        prop_assert_eq!(maxflow.selection.total(), q);
        // the maxflow route's accounting identity, any q >= f*
        let stats = maxflow.maxflow.unwrap();
        if q >= stats.f_star {
            prop_assert_eq!(
                maxflow.objective,
                2 * (ds.n() - stats.f_star) + 2 * stats.s_plus_size
            );
        } else {
            prop_assert_eq!(maxflow.objective, 2 * (ds.n() - q));
        }
    }
}
