//! JSON report structures with a stable key set and deterministic ordering:
//! levels sorted by (covariate, label), ids sorted lexicographically.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::balance::{
    imbalance, index_levels, intersection_counts, selection_from_ids, Dataset, IntersectionCounts,
    LevelIndex, Selection,
};
use crate::balance2::Solve2Result;
use crate::matchbal::Assignment;
use crate::oracle::OracleResult;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct LevelRow {
    pub covariate: String,
    pub level: String,
    pub ell: i64,
    pub selected: i64,
    pub excess: i64,
    pub deficit: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Report {
    pub method: String,
    pub q: i64,
    pub kappa: i64,
    pub objective: i64,
    pub f_star: Option<i64>,
    pub s_plus: Option<i64>,
    pub levels: Vec<LevelRow>,
    pub selected_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unique_count: Option<u64>,
}

fn level_rows(
    covariate_names: &[String],
    index: &LevelIndex,
    counts: &IntersectionCounts,
    selection: &Selection,
) -> Result<Vec<LevelRow>, CliError> {
    let report = imbalance(index, counts, selection)?;
    let mut rows: Vec<LevelRow> = report
        .levels
        .iter()
        .map(|l| LevelRow {
            covariate: covariate_names
                .get(l.covariate)
                .cloned()
                .unwrap_or_else(|| format!("c{}", l.covariate + 1)),
            level: index.label(l.covariate, l.level).to_string(),
            ell: l.target,
            selected: l.selected,
            excess: l.excess,
            deficit: l.deficit,
        })
        .collect();
    rows.sort_by(|a, b| (&a.covariate, &a.level).cmp(&(&b.covariate, &b.level)));
    Ok(rows)
}

impl Report {
    pub fn from_solution(
        dataset: &Dataset,
        covariate_names: &[String],
        q: i64,
        kappa: i64,
        result: &Solve2Result,
        mut ids: Vec<String>,
    ) -> Result<Self, CliError> {
        let index = index_levels(dataset)?;
        let counts = intersection_counts(dataset, &index);
        ids.sort();
        Ok(Report {
            method: result.method.as_str().to_string(),
            q,
            kappa,
            objective: result.objective,
            f_star: result.maxflow.as_ref().map(|s| s.f_star),
            s_plus: result.maxflow.as_ref().map(|s| s.s_plus_size),
            levels: level_rows(covariate_names, &index, &counts, &result.selection)?,
            selected_ids: ids,
            unique_count: None,
        })
    }

    pub fn from_oracle(
        dataset: &Dataset,
        covariate_names: &[String],
        q: i64,
        kappa: i64,
        result: &OracleResult,
        mut ids: Vec<String>,
    ) -> Result<Self, CliError> {
        let index = index_levels(dataset)?;
        let counts = intersection_counts(dataset, &index);
        ids.sort();
        Ok(Report {
            method: "oracle".to_string(),
            q,
            kappa,
            objective: result.objective,
            f_star: None,
            s_plus: None,
            levels: level_rows(covariate_names, &index, &counts, &result.argmin)?,
            selected_ids: ids,
            unique_count: Some(result.optima_count),
        })
    }

    #[allow(clippy::too_many_arguments)]
    pub fn from_verify(
        _dataset: &Dataset,
        covariate_names: &[String],
        stage1: &Report,
        recomputed: i64,
        selection: &Selection,
        index: &LevelIndex,
        counts: &IntersectionCounts,
    ) -> Result<Self, CliError> {
        let mut ids = stage1.selected_ids.clone();
        ids.sort();
        Ok(Report {
            method: "verify".to_string(),
            q: stage1.q,
            kappa: stage1.kappa,
            objective: recomputed,
            f_star: None,
            s_plus: None,
            levels: level_rows(covariate_names, index, counts, selection)?,
            selected_ids: ids,
            unique_count: None,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Rebuilds the report's selection against a dataset, for verification.
    pub fn selection_against(
        &self,
        dataset: &Dataset,
        index: &LevelIndex,
    ) -> Result<Selection, CliError> {
        Ok(selection_from_ids(dataset, index, &self.selected_ids)?)
    }
}

/// Reads a previously written solve/oracle report.
pub fn read_report(path: &Path) -> Result<Report, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text)
        .map_err(|err| CliError::BadSelectionReport(format!("{}: {err}", path.display())))
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct AssignmentRow {
    pub treatment: String,
    pub controls: Vec<String>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct MatchReport {
    pub method: String,
    pub q: i64,
    pub kappa: i64,
    pub total_cost: i64,
    pub assignment: Vec<AssignmentRow>,
    /// Number of optimal stage-1 count vectors when the oracle can count
    /// them; the assignment is exact for the two-stage problem only if 1.
    pub stage1_unique_count: Option<u64>,
}

impl MatchReport {
    pub fn new(
        dataset: &Dataset,
        kappa: i64,
        q: i64,
        assignment: &Assignment,
        stage1_unique_count: Option<u64>,
    ) -> Self {
        let rows = dataset
            .treatment()
            .iter()
            .zip(&assignment.per_treatment)
            .map(|(sample, controls)| AssignmentRow {
                treatment: sample.id.clone(),
                controls: controls.clone(),
            })
            .collect();
        MatchReport {
            method: "match".to_string(),
            q,
            kappa,
            total_cost: assignment.total_cost,
            assignment: rows,
            stage1_unique_count,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub error: ErrorBody,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

impl ErrorReport {
    pub fn new(code: &str, message: &str) -> Self {
        ErrorReport {
            error: ErrorBody {
                code: code.to_string(),
                message: message.to_string(),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}
