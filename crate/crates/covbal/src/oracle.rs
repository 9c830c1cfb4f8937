//! Ground-truth exhaustive solver for tiny instances, a seeded random
//! instance generator, and the 3-dimensional-matching instance generator.
//!
//! The oracle enumerates per-cell selection counts rather than subsets of
//! samples: the imbalance depends only on level-intersection sizes, and the
//! count space is exponentially smaller. Uniqueness is reported in the same
//! terms, as the number of optimal count vectors.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::balance::{
    index_levels, intersection_counts, BalanceError, Dataset, Sample, Selection,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error(
        "instance too large for exhaustive search: {cells} nonempty cells (max {max_cells}), \
         n'={n_prime} (max {max_n_prime})"
    )]
    TooLarge {
        cells: usize,
        max_cells: usize,
        n_prime: i64,
        max_n_prime: i64,
    },
    #[error("selection size q={q} outside 0..={n_prime}")]
    QOutOfRange { q: i64, n_prime: i64 },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error(transparent)]
    Balance(#[from] BalanceError),
}

/// Exhaustive-search outcome: the optimum, one argmin, and how many distinct
/// optimal count vectors exist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub objective: i64,
    pub argmin: Selection,
    pub optima_count: u64,
}

const MAX_CELLS: usize = 12;
const MAX_N_PRIME: i64 = 16;

/// Enumerates every per-cell count vector summing to q and returns the
/// minimum imbalance. Guarded to tiny instances.
pub fn exact_min_imbalance(dataset: &Dataset, q: i64) -> Result<OracleResult, OracleError> {
    let index = index_levels(dataset)?;
    let counts = intersection_counts(dataset, &index);
    let cells: Vec<(Vec<usize>, i64)> = counts
        .cells()
        .iter()
        .map(|(c, &u)| (c.clone(), u))
        .collect();
    if cells.len() > MAX_CELLS || index.n_prime() > MAX_N_PRIME {
        return Err(OracleError::TooLarge {
            cells: cells.len(),
            max_cells: MAX_CELLS,
            n_prime: index.n_prime(),
            max_n_prime: MAX_N_PRIME,
        });
    }
    if q < 0 || q > index.n_prime() {
        return Err(OracleError::QOutOfRange {
            q,
            n_prime: index.n_prime(),
        });
    }

    let mut suffix_cap = vec![0i64; cells.len() + 1];
    for (i, (_, u)) in cells.iter().enumerate().rev() {
        suffix_cap[i] = suffix_cap[i + 1] + u;
    }

    struct Search<'a> {
        cells: &'a [(Vec<usize>, i64)],
        suffix_cap: &'a [i64],
        targets: Vec<Vec<i64>>,
        sums: Vec<Vec<i64>>,
        chosen: Vec<i64>,
        best: i64,
        best_vector: Vec<i64>,
        optima_count: u64,
    }

    impl Search<'_> {
        fn run(&mut self, idx: usize, q_left: i64) {
            if q_left > self.suffix_cap[idx] {
                return;
            }
            if idx == self.cells.len() {
                if q_left == 0 {
                    let mut im = 0;
                    for (sums_p, targets_p) in self.sums.iter().zip(&self.targets) {
                        for (s, t) in sums_p.iter().zip(targets_p) {
                            im += (s - t).abs();
                        }
                    }
                    if im < self.best {
                        self.best = im;
                        self.best_vector = self.chosen.clone();
                        self.optima_count = 1;
                    } else if im == self.best {
                        self.optima_count += 1;
                    }
                }
                return;
            }
            let (cell, u) = &self.cells[idx];
            for v in 0..=(*u).min(q_left) {
                self.chosen[idx] = v;
                for (p, &i) in cell.iter().enumerate() {
                    self.sums[p][i] += v;
                }
                self.run(idx + 1, q_left - v);
                for (p, &i) in cell.iter().enumerate() {
                    self.sums[p][i] -= v;
                }
            }
            self.chosen[idx] = 0;
        }
    }

    let targets: Vec<Vec<i64>> = (0..index.covariate_count())
        .map(|p| {
            (0..index.level_count(p))
                .map(|i| index.treatment_count(p, i))
                .collect()
        })
        .collect();
    let sums: Vec<Vec<i64>> = targets.iter().map(|t| vec![0; t.len()]).collect();
    let mut search = Search {
        cells: &cells,
        suffix_cap: &suffix_cap,
        targets,
        sums,
        chosen: vec![0; cells.len()],
        best: i64::MAX,
        best_vector: Vec::new(),
        optima_count: 0,
    };
    search.run(0, q);

    let argmin = Selection::from_counts(
        cells
            .iter()
            .zip(&search.best_vector)
            .map(|((cell, _), &v)| (cell.clone(), v))
            .collect(),
    );
    Ok(OracleResult {
        objective: search.best,
        argmin,
        optima_count: search.optima_count,
    })
}

/// A 3-dimensional-matching instance: elements 1..=x_size and triples over
/// them, optionally with a known perfect matching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreeDMInstance {
    x_size: usize,
    triples: Vec<[usize; 3]>,
    planted: Option<Vec<[usize; 3]>>,
}

impl ThreeDMInstance {
    pub fn new(
        x_size: usize,
        triples: Vec<[usize; 3]>,
        planted: Option<Vec<[usize; 3]>>,
    ) -> Result<Self, OracleError> {
        if x_size == 0 {
            return Err(OracleError::InvalidInstance(
                "element set must be nonempty".to_string(),
            ));
        }
        for triple in &triples {
            if triple.iter().any(|&v| v == 0 || v > x_size) {
                return Err(OracleError::InvalidInstance(format!(
                    "triple {triple:?} has a coordinate outside 1..={x_size}"
                )));
            }
        }
        if let Some(matching) = &planted {
            if matching.len() != x_size {
                return Err(OracleError::InvalidInstance(format!(
                    "planted matching has {} triples, expected {x_size}",
                    matching.len()
                )));
            }
            for coord in 0..3 {
                let values: BTreeSet<usize> = matching.iter().map(|t| t[coord]).collect();
                if values.len() != x_size {
                    return Err(OracleError::InvalidInstance(format!(
                        "planted matching collides on coordinate {coord}"
                    )));
                }
            }
            for triple in matching {
                if !triples.contains(triple) {
                    return Err(OracleError::InvalidInstance(format!(
                        "planted triple {triple:?} is not in the triple set"
                    )));
                }
            }
        }
        Ok(Self {
            x_size,
            triples,
            planted,
        })
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn triples(&self) -> &[[usize; 3]] {
        &self.triples
    }

    pub fn planted(&self) -> Option<&[[usize; 3]]> {
        self.planted.as_deref()
    }
}

/// Encodes a 3DM instance as a P=3 dataset: treatment sample j carries
/// labels (j,j,j) so every level of every covariate has target 1, and each
/// triple becomes one control sample. A perfect matching exists iff the
/// minimum imbalance at q = |X| is zero.
pub fn gen_3dm_dataset(instance: &ThreeDMInstance) -> Dataset {
    let treatment = (1..=instance.x_size)
        .map(|j| Sample::new(format!("t{j}"), vec![j.to_string(); 3]))
        .collect();
    let control = instance
        .triples
        .iter()
        .enumerate()
        .map(|(idx, triple)| {
            Sample::new(
                format!("c{}", idx + 1),
                triple.iter().map(|v| v.to_string()).collect(),
            )
        })
        .collect();
    Dataset::new(3, treatment, control).expect("3dm datasets are valid by construction")
}

/// A 3DM instance with a planted perfect matching plus `extra` random
/// distractor triples, reproducible by seed.
pub fn random_planted_3dm(x_size: usize, extra: usize, seed: u64) -> ThreeDMInstance {
    assert!(x_size > 0, "x_size must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sigma: Vec<usize> = (1..=x_size).collect();
    let mut tau: Vec<usize> = (1..=x_size).collect();
    sigma.shuffle(&mut rng);
    tau.shuffle(&mut rng);
    let planted: Vec<[usize; 3]> = (0..x_size)
        .map(|j| [j + 1, sigma[j], tau[j]])
        .collect();
    let mut triples: Vec<[usize; 3]> = planted.clone();
    let mut seen: BTreeSet<[usize; 3]> = planted.iter().copied().collect();
    let mut attempts = 0;
    while triples.len() < x_size + extra && attempts < 100 * (extra + 1) {
        let triple = [
            rng.random_range(1..=x_size),
            rng.random_range(1..=x_size),
            rng.random_range(1..=x_size),
        ];
        attempts += 1;
        if seen.insert(triple) {
            triples.push(triple);
        }
    }
    triples.shuffle(&mut rng);
    ThreeDMInstance::new(x_size, triples, Some(planted)).expect("planted instance is valid")
}

/// Uniform i.i.d. random dataset: `k[p]` candidate labels per covariate,
/// reproducible by seed.
pub fn random_instance(
    covariates: usize,
    n: usize,
    n_prime: usize,
    k: &[usize],
    seed: u64,
) -> Result<Dataset, OracleError> {
    if covariates == 0 || n == 0 || n_prime == 0 {
        return Err(OracleError::InvalidInstance(
            "covariates, n, and n' must be positive".to_string(),
        ));
    }
    if k.len() != covariates || k.iter().any(|&kp| kp == 0) {
        return Err(OracleError::InvalidInstance(format!(
            "need {covariates} positive level counts, found {k:?}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |prefix: &str, count: usize| {
        (0..count)
            .map(|row| {
                let labels = (0..covariates)
                    .map(|p| rng.random_range(0..k[p]).to_string())
                    .collect();
                Sample::new(format!("{prefix}{row}"), labels)
            })
            .collect::<Vec<_>>()
    };
    let treatment = draw("t", n);
    let control = draw("c", n_prime);
    Ok(Dataset::new(covariates, treatment, control)?)
}
