//! Second-stage distance matching: given fixed per-cell selection sizes,
//! assign each treatment sample exactly kappa selected controls minimizing
//! total distance, as one min-cost flow over cells, controls, and treatments.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::balance::{cell_members, index_levels, BalanceError, Dataset, Selection};
use crate::netflow::{certify_mcnf, mcnf_solve, Capacity, FlowError, FlowNetwork};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MatchError {
    #[error("no assignment exists: {0}")]
    InfeasibleSizes(String),
    #[error("distance matrix is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("distance at row {row}, column {col} is negative")]
    NegativeDistance { row: usize, col: usize },
    #[error("internal certificate failed: {0}")]
    CertificateFailure(String),
    #[error(transparent)]
    Balance(#[from] BalanceError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Dense n x n' nonnegative integer distances, row per treatment sample.
/// Callers pre-scale real metrics to integers (e.g. x1000, rounded).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    rows: usize,
    cols: usize,
    values: Vec<i64>,
}

impl DistanceMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<i64>) -> Result<Self, MatchError> {
        if values.len() != rows * cols {
            return Err(MatchError::DimensionMismatch {
                rows,
                cols: if rows == 0 { 0 } else { values.len() / rows },
                expected_rows: rows,
                expected_cols: cols,
            });
        }
        if let Some(pos) = values.iter().position(|&v| v < 0) {
            return Err(MatchError::NegativeDistance {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, treatment: usize, control: usize) -> i64 {
        self.values[treatment * self.cols + control]
    }
}

/// Exactly kappa distinct control ids per treatment sample, index-aligned
/// with the dataset's treatment rows, plus the total distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub per_treatment: Vec<Vec<String>>,
    pub total_cost: i64,
}

/// Minimum-distance kappa-to-one assignment consistent with `cell_sizes`.
///
/// The flow network has one source node per cell with positive size,
/// capacity-1 cost-0 arcs to that cell's controls, capacity-1 arcs from each
/// such control to every treatment sample at its distance, and demand kappa
/// at each treatment node.
pub fn assign_controls(
    dataset: &Dataset,
    cell_sizes: &Selection,
    kappa: i64,
    distances: &DistanceMatrix,
) -> Result<Assignment, MatchError> {
    let n = dataset.n() as usize;
    let n_prime = dataset.n_prime() as usize;
    if distances.rows() != n || distances.cols() != n_prime {
        return Err(MatchError::DimensionMismatch {
            rows: distances.rows(),
            cols: distances.cols(),
            expected_rows: n,
            expected_cols: n_prime,
        });
    }
    if kappa < 1 {
        return Err(MatchError::InfeasibleSizes(format!(
            "kappa must be at least 1, found {kappa}"
        )));
    }
    let required = kappa * n as i64;
    if cell_sizes.total() != required {
        return Err(MatchError::InfeasibleSizes(format!(
            "cell sizes sum to {}, expected kappa*n = {required}",
            cell_sizes.total()
        )));
    }

    let index = index_levels(dataset)?;
    let members = cell_members(dataset, &index);
    let active: BTreeMap<&Vec<usize>, i64> = cell_sizes
        .counts()
        .iter()
        .filter(|&(_, &s)| s > 0)
        .map(|(c, &s)| (c, s))
        .collect();
    for (cell, &size) in &active {
        let population = members.get(*cell).map_or(0, Vec::len) as i64;
        if size > population {
            return Err(MatchError::InfeasibleSizes(format!(
                "cell {cell:?} asks for {size} of {population} control sample(s)"
            )));
        }
    }

    let cell_count = active.len();
    let control_base = cell_count;
    let treatment_base = cell_count + n_prime;
    let mut supplies = vec![0i64; treatment_base + n];
    for (slot, (_, &size)) in active.iter().enumerate() {
        supplies[slot] = size;
    }
    for t in 0..n {
        supplies[treatment_base + t] = -kappa;
    }

    let mut network = FlowNetwork::new(supplies);
    let mut control_arcs = Vec::new();
    for (slot, (cell, _)) in active.iter().enumerate() {
        for &j in &members[*cell] {
            network.add_arc(slot, control_base + j, 0, Capacity::Finite(1), 0)?;
        }
    }
    for (cell, _) in &active {
        for &j in &members[*cell] {
            for t in 0..n {
                let arc = network.add_arc(
                    control_base + j,
                    treatment_base + t,
                    0,
                    Capacity::Finite(1),
                    distances.get(t, j),
                )?;
                control_arcs.push((arc, j, t));
            }
        }
    }

    let solution = mcnf_solve(&network)?;
    if !certify_mcnf(&network, &solution)? {
        return Err(MatchError::CertificateFailure(
            "assignment flow failed the reduced-cost check".to_string(),
        ));
    }

    let mut per_treatment: Vec<Vec<String>> = vec![Vec::new(); n];
    for &(arc, j, t) in &control_arcs {
        if solution.flows[arc] > 0 {
            per_treatment[t].push(dataset.control()[j].id.clone());
        }
    }
    for (t, ids) in per_treatment.iter_mut().enumerate() {
        ids.sort();
        if ids.len() as i64 != kappa {
            return Err(MatchError::CertificateFailure(format!(
                "treatment row {t} received {} control(s), expected {kappa}",
                ids.len()
            )));
        }
    }
    Ok(Assignment {
        per_treatment,
        total_cost: solution.objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::Sample;

    fn dataset(treatment: &[(&str, &[&str])], control: &[(&str, &[&str])]) -> Dataset {
        let p = treatment[0].1.len();
        let build = |rows: &[(&str, &[&str])]| {
            rows.iter()
                .map(|(id, labels)| {
                    Sample::new(*id, labels.iter().map(|s| s.to_string()).collect())
                })
                .collect()
        };
        Dataset::new(p, build(treatment), build(control)).unwrap()
    }

    fn selection(cells: &[(&[usize], i64)]) -> Selection {
        Selection::from_counts(cells.iter().map(|&(c, s)| (c.to_vec(), s)).collect())
    }

    #[test]
    fn zero_distances_cost_nothing() {
        let ds = dataset(
            &[("t1", &["a"]), ("t2", &["b"])],
            &[("c1", &["a"]), ("c2", &["b"])],
        );
        let sizes = selection(&[(&[0], 1), (&[1], 1)]);
        let d = DistanceMatrix::new(2, 2, vec![0; 4]).unwrap();
        let assignment = assign_controls(&ds, &sizes, 1, &d).unwrap();
        assert_eq!(assignment.total_cost, 0);
        assert!(assignment.per_treatment.iter().all(|ids| ids.len() == 1));
    }

    #[test]
    fn picks_identity_pairing() {
        let ds = dataset(
            &[("t1", &["a"]), ("t2", &["b"])],
            &[("c1", &["a"]), ("c2", &["b"])],
        );
        let sizes = selection(&[(&[0], 1), (&[1], 1)]);
        let d = DistanceMatrix::new(2, 2, vec![0, 5, 5, 0]).unwrap();
        let assignment = assign_controls(&ds, &sizes, 1, &d).unwrap();
        assert_eq!(assignment.total_cost, 0);
        assert_eq!(assignment.per_treatment[0], vec!["c1"]);
        assert_eq!(assignment.per_treatment[1], vec!["c2"]);
    }

    #[test]
    fn kappa_two_takes_selected_cells() {
        let ds = dataset(
            &[("t1", &["a"])],
            &[("c1", &["a"]), ("c2", &["b"]), ("c3", &["c"])],
        );
        let sizes = selection(&[(&[0], 1), (&[2], 1)]);
        let d = DistanceMatrix::new(1, 3, vec![4, 1, 9]).unwrap();
        let assignment = assign_controls(&ds, &sizes, 2, &d).unwrap();
        assert_eq!(assignment.total_cost, 4 + 9);
        assert_eq!(assignment.per_treatment[0], vec!["c1", "c3"]);
    }

    #[test]
    fn rejects_inconsistent_sizes() {
        let ds = dataset(&[("t1", &["a"])], &[("c1", &["a"]), ("c2", &["b"])]);
        let d = DistanceMatrix::new(1, 2, vec![1, 1]).unwrap();
        let too_many = selection(&[(&[0], 2)]);
        assert!(matches!(
            assign_controls(&ds, &too_many, 2, &d),
            Err(MatchError::InfeasibleSizes(_))
        ));
        let wrong_total = selection(&[(&[0], 1)]);
        assert!(matches!(
            assign_controls(&ds, &wrong_total, 2, &d),
            Err(MatchError::InfeasibleSizes(_))
        ));
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(matches!(
            DistanceMatrix::new(2, 2, vec![0, 1, 2]),
            Err(MatchError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            DistanceMatrix::new(1, 2, vec![3, -1]),
            Err(MatchError::NegativeDistance { row: 0, col: 1 })
        ));
        let ds = dataset(&[("t1", &["a"])], &[("c1", &["a"])]);
        let wrong_shape = DistanceMatrix::new(1, 2, vec![0, 0]).unwrap();
        assert!(matches!(
            assign_controls(&ds, &selection(&[(&[0], 1)]), 1, &wrong_shape),
            Err(MatchError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn beats_every_alternative_pairing() {
        // n=3, kappa=1, singleton cells: the optimum over all 3! pairings
        let ds = dataset(
            &[("t1", &["a"]), ("t2", &["b"]), ("t3", &["c"])],
            &[("c1", &["a"]), ("c2", &["b"]), ("c3", &["c"])],
        );
        let sizes = selection(&[(&[0], 1), (&[1], 1), (&[2], 1)]);
        let values = vec![7, 2, 9, 3, 8, 4, 6, 5, 1];
        let d = DistanceMatrix::new(3, 3, values.clone()).unwrap();
        let assignment = assign_controls(&ds, &sizes, 1, &d).unwrap();
        let mut best = i64::MAX;
        let perms = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        for perm in perms {
            best = best.min((0..3).map(|t| values[t * 3 + perm[t]]).sum());
        }
        assert_eq!(assignment.total_cost, best);
    }
}
