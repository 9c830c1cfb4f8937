//! Problem data model: samples with nominal covariates, level indexing,
//! level-intersection counting, imbalance evaluation, selection
//! materialization, and the kappa-expansion reduction.
//!
//! A selection is stored as counts per level-intersection cell. Which
//! concrete samples realize those counts never affects the imbalance, so
//! solvers work on counts and `materialize` picks ids afterwards.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum BalanceError {
    #[error("treatment group is empty")]
    EmptyTreatment,
    #[error("sample {id:?} has {found} labels, expected {expected}")]
    WrongLabelCount {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("duplicate sample id {id:?} within the {group} group")]
    DuplicateId { id: String, group: &'static str },
    #[error("cell {cell:?} selects {selected} of {available} control sample(s)")]
    CellOverflow {
        cell: Vec<usize>,
        selected: i64,
        available: i64,
    },
    #[error("cell {cell:?} is inconsistent with the level index")]
    CellMismatch { cell: Vec<usize> },
    #[error("kappa {kappa} outside 1..={max}")]
    KappaOutOfRange { kappa: i64, max: i64 },
    #[error("unknown control id {id:?}")]
    UnknownControlId { id: String },
    #[error("control id {id:?} listed more than once")]
    RepeatedControlId { id: String },
}

/// One observation: an id plus one label per covariate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub id: String,
    pub labels: Vec<String>,
}

impl Sample {
    pub fn new(id: impl Into<String>, labels: Vec<String>) -> Self {
        Self {
            id: id.into(),
            labels,
        }
    }
}

/// Treatment and control samples over a fixed number of nominal covariates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    covariate_count: usize,
    treatment: Vec<Sample>,
    control: Vec<Sample>,
}

impl Dataset {
    pub fn new(
        covariate_count: usize,
        treatment: Vec<Sample>,
        control: Vec<Sample>,
    ) -> Result<Self, BalanceError> {
        for (group, samples) in [("treatment", &treatment), ("control", &control)] {
            let mut seen = BTreeSet::new();
            for sample in samples {
                if sample.labels.len() != covariate_count {
                    return Err(BalanceError::WrongLabelCount {
                        id: sample.id.clone(),
                        expected: covariate_count,
                        found: sample.labels.len(),
                    });
                }
                if !seen.insert(&sample.id) {
                    return Err(BalanceError::DuplicateId {
                        id: sample.id.clone(),
                        group,
                    });
                }
            }
        }
        Ok(Self {
            covariate_count,
            treatment,
            control,
        })
    }

    pub fn covariate_count(&self) -> usize {
        self.covariate_count
    }

    /// Treatment group size n.
    pub fn n(&self) -> i64 {
        self.treatment.len() as i64
    }

    /// Control group size n'.
    pub fn n_prime(&self) -> i64 {
        self.control.len() as i64
    }

    pub fn treatment(&self) -> &[Sample] {
        &self.treatment
    }

    pub fn control(&self) -> &[Sample] {
        &self.control
    }
}

/// Per-covariate level universe and per-level group sizes.
///
/// Levels are the union of labels seen in either group, ordered
/// lexicographically; a label present in only one group gets count zero in
/// the other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelIndex {
    labels: Vec<Vec<String>>,
    label_pos: Vec<HashMap<String, usize>>,
    treatment_counts: Vec<Vec<i64>>,
    control_counts: Vec<Vec<i64>>,
    n: i64,
    n_prime: i64,
}

impl LevelIndex {
    pub fn covariate_count(&self) -> usize {
        self.labels.len()
    }

    /// Number of levels k_p of covariate `p`.
    pub fn level_count(&self, p: usize) -> usize {
        self.labels[p].len()
    }

    pub fn label(&self, p: usize, i: usize) -> &str {
        &self.labels[p][i]
    }

    pub fn level_of(&self, p: usize, label: &str) -> Option<usize> {
        self.label_pos[p].get(label).copied()
    }

    /// Treatment level size l_{p,i}.
    pub fn treatment_count(&self, p: usize, i: usize) -> i64 {
        self.treatment_counts[p][i]
    }

    /// Control level size l'_{p,i}.
    pub fn control_count(&self, p: usize, i: usize) -> i64 {
        self.control_counts[p][i]
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn n_prime(&self) -> i64 {
        self.n_prime
    }

    /// Cell key (one level index per covariate) of a sample.
    pub fn cell_of(&self, sample: &Sample) -> Vec<usize> {
        sample
            .labels
            .iter()
            .enumerate()
            .map(|(p, label)| self.label_pos[p][label])
            .collect()
    }
}

/// Builds the level index of a dataset.
pub fn index_levels(dataset: &Dataset) -> Result<LevelIndex, BalanceError> {
    if dataset.treatment.is_empty() {
        return Err(BalanceError::EmptyTreatment);
    }
    let p_count = dataset.covariate_count();
    let mut labels: Vec<Vec<String>> = vec![Vec::new(); p_count];
    for p in 0..p_count {
        let mut universe = BTreeSet::new();
        for sample in dataset.treatment.iter().chain(&dataset.control) {
            universe.insert(sample.labels[p].clone());
        }
        labels[p] = universe.into_iter().collect();
    }
    let label_pos: Vec<HashMap<String, usize>> = labels
        .iter()
        .map(|lv| {
            lv.iter()
                .enumerate()
                .map(|(i, s)| (s.clone(), i))
                .collect()
        })
        .collect();
    let mut treatment_counts: Vec<Vec<i64>> =
        labels.iter().map(|lv| vec![0; lv.len()]).collect();
    let mut control_counts: Vec<Vec<i64>> = labels.iter().map(|lv| vec![0; lv.len()]).collect();
    for sample in &dataset.treatment {
        for p in 0..p_count {
            treatment_counts[p][label_pos[p][&sample.labels[p]]] += 1;
        }
    }
    for sample in &dataset.control {
        for p in 0..p_count {
            control_counts[p][label_pos[p][&sample.labels[p]]] += 1;
        }
    }
    Ok(LevelIndex {
        labels,
        label_pos,
        treatment_counts,
        control_counts,
        n: dataset.n(),
        n_prime: dataset.n_prime(),
    })
}

/// Control counts per nonempty level-intersection cell (the u capacities).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntersectionCounts {
    cells: BTreeMap<Vec<usize>, i64>,
}

impl IntersectionCounts {
    pub fn cells(&self) -> &BTreeMap<Vec<usize>, i64> {
        &self.cells
    }

    /// u for a cell; zero for cells with no control samples.
    pub fn count(&self, cell: &[usize]) -> i64 {
        self.cells.get(cell).copied().unwrap_or(0)
    }

    pub fn nonempty_cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn total(&self) -> i64 {
        self.cells.values().sum()
    }
}

/// Counts control samples per level-intersection cell.
pub fn intersection_counts(dataset: &Dataset, index: &LevelIndex) -> IntersectionCounts {
    let mut cells = BTreeMap::new();
    for sample in &dataset.control {
        *cells.entry(index.cell_of(sample)).or_insert(0) += 1;
    }
    IntersectionCounts { cells }
}

/// Control sample indices per nonempty cell, in dataset row order.
pub fn cell_members(dataset: &Dataset, index: &LevelIndex) -> BTreeMap<Vec<usize>, Vec<usize>> {
    let mut members: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (j, sample) in dataset.control.iter().enumerate() {
        members.entry(index.cell_of(sample)).or_default().push(j);
    }
    members
}

/// Selected control counts per cell, optionally with materialized ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Selection {
    counts: BTreeMap<Vec<usize>, i64>,
    materialized: Option<Vec<String>>,
}

impl Selection {
    /// Builds a selection from per-cell counts; zero entries are dropped.
    pub fn from_counts(counts: BTreeMap<Vec<usize>, i64>) -> Self {
        let counts: BTreeMap<Vec<usize>, i64> = counts.into_iter().filter(|&(_, c)| c != 0).collect();
        assert!(
            counts.values().all(|&c| c > 0),
            "selection counts must be nonnegative"
        );
        Self {
            counts,
            materialized: None,
        }
    }

    pub fn counts(&self) -> &BTreeMap<Vec<usize>, i64> {
        &self.counts
    }

    pub fn count(&self, cell: &[usize]) -> i64 {
        self.counts.get(cell).copied().unwrap_or(0)
    }

    pub fn total(&self) -> i64 {
        self.counts.values().sum()
    }

    pub fn materialized(&self) -> Option<&[String]> {
        self.materialized.as_deref()
    }

    pub fn with_materialized(mut self, ids: Vec<String>) -> Self {
        self.materialized = Some(ids);
        self
    }
}

/// Counts of a list of control ids grouped by cell.
pub fn selection_from_ids(
    dataset: &Dataset,
    index: &LevelIndex,
    ids: &[String],
) -> Result<Selection, BalanceError> {
    let by_id: HashMap<&str, &Sample> = dataset
        .control
        .iter()
        .map(|s| (s.id.as_str(), s))
        .collect();
    let mut seen = BTreeSet::new();
    let mut counts: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
    for id in ids {
        let sample = by_id
            .get(id.as_str())
            .ok_or_else(|| BalanceError::UnknownControlId { id: id.clone() })?;
        if !seen.insert(id.clone()) {
            return Err(BalanceError::RepeatedControlId { id: id.clone() });
        }
        *counts.entry(index.cell_of(sample)).or_insert(0) += 1;
    }
    Ok(Selection::from_counts(counts))
}

/// Signed discrepancy and its split into excess/deficit for one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelImbalance {
    pub covariate: usize,
    pub level: usize,
    /// Treatment target l_{p,i}.
    pub target: i64,
    /// Selected control count at this level.
    pub selected: i64,
    pub discrepancy: i64,
    pub excess: i64,
    pub deficit: i64,
}

/// Per-level discrepancies and the total imbalance objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImbalanceReport {
    pub levels: Vec<LevelImbalance>,
    pub total: i64,
}

fn validate_cells(
    index: &LevelIndex,
    counts: &IntersectionCounts,
    selection: &Selection,
) -> Result<(), BalanceError> {
    for (cell, &s) in selection.counts() {
        if cell.len() != index.covariate_count()
            || cell
                .iter()
                .enumerate()
                .any(|(p, &i)| i >= index.level_count(p))
        {
            return Err(BalanceError::CellMismatch { cell: cell.clone() });
        }
        let u = counts.count(cell);
        if s > u {
            return Err(BalanceError::CellOverflow {
                cell: cell.clone(),
                selected: s,
                available: u,
            });
        }
    }
    Ok(())
}

/// Per-level selected counts of a selection, one vector per covariate.
pub fn level_sums(index: &LevelIndex, selection: &Selection) -> Vec<Vec<i64>> {
    let mut sums: Vec<Vec<i64>> = (0..index.covariate_count())
        .map(|p| vec![0; index.level_count(p)])
        .collect();
    for (cell, &s) in selection.counts() {
        for (p, &i) in cell.iter().enumerate() {
            sums[p][i] += s;
        }
    }
    sums
}

/// Evaluates the imbalance objective of a selection.
pub fn imbalance(
    index: &LevelIndex,
    counts: &IntersectionCounts,
    selection: &Selection,
) -> Result<ImbalanceReport, BalanceError> {
    validate_cells(index, counts, selection)?;
    let sums = level_sums(index, selection);
    let mut levels = Vec::new();
    let mut total = 0;
    for p in 0..index.covariate_count() {
        for i in 0..index.level_count(p) {
            let target = index.treatment_count(p, i);
            let selected = sums[p][i];
            let discrepancy = selected - target;
            let excess = discrepancy.max(0);
            let deficit = (-discrepancy).max(0);
            total += excess + deficit;
            levels.push(LevelImbalance {
                covariate: p,
                level: i,
                target,
                selected,
                discrepancy,
                excess,
                deficit,
            });
        }
    }
    Ok(ImbalanceReport { levels, total })
}

/// Picks concrete control ids realizing a selection's cell counts.
///
/// Within each cell the ids are drawn by a seeded ChaCha8 shuffle, so the
/// result is reproducible; by construction any draw has the same imbalance.
pub fn materialize(
    dataset: &Dataset,
    selection: &Selection,
    seed: u64,
) -> Result<Vec<String>, BalanceError> {
    let index = index_levels(dataset)?;
    let members = cell_members(dataset, &index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids = Vec::new();
    for (cell, &want) in selection.counts() {
        let pool = members.get(cell).map(Vec::as_slice).unwrap_or(&[]);
        if want > pool.len() as i64 {
            return Err(BalanceError::CellOverflow {
                cell: cell.clone(),
                selected: want,
                available: pool.len() as i64,
            });
        }
        let mut pool: Vec<usize> = pool.to_vec();
        pool.shuffle(&mut rng);
        pool.truncate(want as usize);
        pool.sort_unstable();
        ids.extend(pool.into_iter().map(|j| dataset.control[j].id.clone()));
    }
    Ok(ids)
}

/// Replicates every treatment sample `kappa` times (fresh ids), reducing the
/// minimum kappa-imbalance problem to plain min-imbalance.
pub fn kappa_expand(dataset: &Dataset, kappa: i64) -> Result<Dataset, BalanceError> {
    if dataset.treatment.is_empty() {
        return Err(BalanceError::EmptyTreatment);
    }
    let max = dataset.n_prime() / dataset.n();
    if kappa < 1 || kappa > max {
        return Err(BalanceError::KappaOutOfRange { kappa, max });
    }
    let mut treatment = Vec::with_capacity(dataset.treatment.len() * kappa as usize);
    for sample in &dataset.treatment {
        for copy in 1..=kappa {
            treatment.push(Sample::new(
                format!("{}#{copy}", sample.id),
                sample.labels.clone(),
            ));
        }
    }
    Dataset::new(dataset.covariate_count(), treatment, dataset.control.clone())
}
