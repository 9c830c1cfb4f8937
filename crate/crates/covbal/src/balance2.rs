//! Exact solvers for the two-covariate min-imbalance problem.
//!
//! Two independent routes produce the same optimal objective:
//!
//! * a min-cost-flow network whose cost-1 arcs price excess and deficit per
//!   level and whose cost-0 arcs carry the per-cell selection counts, and
//! * a max-flow network over the same level nodes, whose maximum value f*
//!   seeds a recovery procedure that grows the selection to the requested
//!   size q, padding arbitrarily once no deficit level has spare samples.
//!
//! Both support any selection size 0 <= q <= n' (the supply of the two
//! balancing nodes shifts by q - n on the min-cost route; the recovery loop
//! targets q on the max-flow route).

use std::collections::BTreeMap;

use crate::balance::{
    imbalance, index_levels, intersection_counts, BalanceError, Dataset, IntersectionCounts,
    LevelIndex, Selection,
};
use crate::netflow::{
    certify_maxflow, certify_mcnf, maxflow_solve, mcnf_solve, Capacity, FlowError, FlowNetwork,
};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("expected 2 covariates, found {found}")]
    NotTwoCovariates { found: usize },
    #[error("selection size q={q} outside 0..={n_prime}")]
    QTooLarge { q: i64, n_prime: i64 },
    #[error("recovery target q={q} is below the maximum flow value {f_star}")]
    QBelowMaxflow { q: i64, f_star: i64 },
    #[error("selection has {found} sample(s), expected {expected}")]
    WrongSelectionSize { expected: i64, found: i64 },
    #[error("internal certificate failed: {0}")]
    CertificateFailure(String),
    #[error(transparent)]
    Balance(#[from] BalanceError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Mcnf,
    Maxflow,
}

impl SolveMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveMethod::Mcnf => "mcnf",
            SolveMethod::Maxflow => "maxflow",
        }
    }
}

/// Max-flow route bookkeeping: the flow value, the padding size |S+|, and
/// the sums lbar_p of min(l_{p,i}, l'_{p,i}) over levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaxflowStats {
    pub f_star: i64,
    pub s_plus_size: i64,
    pub lbar1: i64,
    pub lbar2: i64,
}

/// An optimal selection with its imbalance objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solve2Result {
    pub selection: Selection,
    pub objective: i64,
    pub method: SolveMethod,
    pub maxflow: Option<MaxflowStats>,
}

/// What a builder arc stands for, index-aligned with the network's arcs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcRole {
    /// Selection count x_{i1,i2} of one level-intersection cell.
    Cell { i1: usize, i2: usize },
    /// Excess e_{p,i} of one level.
    Excess { covariate: usize, level: usize },
    /// Deficit d_{p,i} of one level.
    Deficit { covariate: usize, level: usize },
    /// Source-side arc bounding covariate-1 level intake (max-flow graph).
    Source { level: usize },
    /// Sink-side arc bounding covariate-2 level intake (max-flow graph).
    Sink { level: usize },
}

#[derive(Debug, Clone)]
pub struct McnfGraph {
    pub network: FlowNetwork,
    pub legend: Vec<ArcRole>,
    /// Balancing node on the covariate-1 side (supply q - n).
    pub node1: usize,
    /// Balancing node on the covariate-2 side (supply n - q).
    pub node2: usize,
}

#[derive(Debug, Clone)]
pub struct MaxflowGraph {
    pub network: FlowNetwork,
    pub source: usize,
    pub sink: usize,
    pub legend: Vec<ArcRole>,
}

fn require_two_covariates(index: &LevelIndex) -> Result<(usize, usize), SolveError> {
    if index.covariate_count() != 2 {
        return Err(SolveError::NotTwoCovariates {
            found: index.covariate_count(),
        });
    }
    Ok((index.level_count(0), index.level_count(1)))
}

fn check_q(q: i64, n_prime: i64) -> Result<(), SolveError> {
    if q < 0 || q > n_prime {
        return Err(SolveError::QTooLarge { q, n_prime });
    }
    Ok(())
}

/// Builds the min-cost-flow network for a size-q selection.
///
/// Nodes: covariate-1 levels (supply l_{1,i1}), covariate-2 levels (supply
/// -l_{2,i2}), then the balancing nodes 1 and 2 with supplies q - n and
/// n - q. Cell arcs cost 0 with capacity u; excess/deficit arcs cost 1,
/// capped at n + n' which no optimal flow can exceed.
pub fn build_mcnf_graph(
    index: &LevelIndex,
    counts: &IntersectionCounts,
    q: i64,
) -> Result<McnfGraph, SolveError> {
    let (k1, k2) = require_two_covariates(index)?;
    let n = index.n();
    let node1 = k1 + k2;
    let node2 = k1 + k2 + 1;

    let mut supplies = vec![0i64; k1 + k2 + 2];
    for i1 in 0..k1 {
        supplies[i1] = index.treatment_count(0, i1);
    }
    for i2 in 0..k2 {
        supplies[k1 + i2] = -index.treatment_count(1, i2);
    }
    supplies[node1] = q - n;
    supplies[node2] = n - q;

    let mut network = FlowNetwork::new(supplies);
    let mut legend = Vec::new();
    for (cell, &u) in counts.cells() {
        let (i1, i2) = (cell[0], cell[1]);
        network.add_arc(i1, k1 + i2, 0, Capacity::Finite(u), 0)?;
        legend.push(ArcRole::Cell { i1, i2 });
    }
    let slack = Capacity::Finite(index.n() + index.n_prime());
    for i1 in 0..k1 {
        network.add_arc(node1, i1, 0, slack, 1)?;
        legend.push(ArcRole::Excess {
            covariate: 0,
            level: i1,
        });
        network.add_arc(i1, node1, 0, slack, 1)?;
        legend.push(ArcRole::Deficit {
            covariate: 0,
            level: i1,
        });
    }
    for i2 in 0..k2 {
        network.add_arc(node2, k1 + i2, 0, slack, 1)?;
        legend.push(ArcRole::Deficit {
            covariate: 1,
            level: i2,
        });
        network.add_arc(k1 + i2, node2, 0, slack, 1)?;
        legend.push(ArcRole::Excess {
            covariate: 1,
            level: i2,
        });
    }
    Ok(McnfGraph {
        network,
        legend,
        node1,
        node2,
    })
}

/// Builds the max-flow network: source -> covariate-1 levels (cap l_{1,i1}),
/// cell arcs (cap u), covariate-2 levels -> sink (cap l_{2,i2}).
pub fn build_maxflow_graph(
    index: &LevelIndex,
    counts: &IntersectionCounts,
) -> Result<MaxflowGraph, SolveError> {
    let (k1, k2) = require_two_covariates(index)?;
    let source = k1 + k2;
    let sink = k1 + k2 + 1;
    let mut network = FlowNetwork::new(vec![0; k1 + k2 + 2]);
    let mut legend = Vec::new();
    for i1 in 0..k1 {
        network.add_arc(
            source,
            i1,
            0,
            Capacity::Finite(index.treatment_count(0, i1)),
            0,
        )?;
        legend.push(ArcRole::Source { level: i1 });
    }
    for (cell, &u) in counts.cells() {
        let (i1, i2) = (cell[0], cell[1]);
        network.add_arc(i1, k1 + i2, 0, Capacity::Finite(u), 0)?;
        legend.push(ArcRole::Cell { i1, i2 });
    }
    for i2 in 0..k2 {
        network.add_arc(
            k1 + i2,
            sink,
            0,
            Capacity::Finite(index.treatment_count(1, i2)),
            0,
        )?;
        legend.push(ArcRole::Sink { level: i2 });
    }
    Ok(MaxflowGraph {
        network,
        source,
        sink,
        legend,
    })
}

/// Solves min-imbalance for a size-q selection via min-cost flow.
pub fn solve_mcnf2(dataset: &Dataset, q: i64) -> Result<Solve2Result, SolveError> {
    let index = index_levels(dataset)?;
    check_q(q, index.n_prime())?;
    let counts = intersection_counts(dataset, &index);
    let graph = build_mcnf_graph(&index, &counts, q)?;
    let assignment = mcnf_solve(&graph.network)?;
    if !certify_mcnf(&graph.network, &assignment)? {
        return Err(SolveError::CertificateFailure(
            "min-cost flow reduced-cost check failed".to_string(),
        ));
    }

    let mut cells = BTreeMap::new();
    for (role, &flow) in graph.legend.iter().zip(&assignment.flows) {
        if let ArcRole::Cell { i1, i2 } = *role {
            if flow > 0 {
                cells.insert(vec![i1, i2], flow);
            }
        }
    }
    let selection = Selection::from_counts(cells);
    let objective = imbalance(&index, &counts, &selection)?.total;
    if objective != assignment.objective {
        return Err(SolveError::CertificateFailure(format!(
            "flow cost {} disagrees with recomputed imbalance {objective}",
            assignment.objective
        )));
    }
    Ok(Solve2Result {
        selection,
        objective,
        method: SolveMethod::Mcnf,
        maxflow: None,
    })
}

struct LevelCells {
    /// Cell keys grouped by level, per covariate, each list in lex order.
    by_level: [Vec<Vec<Vec<usize>>>; 2],
}

impl LevelCells {
    fn build(index: &LevelIndex, counts: &IntersectionCounts) -> Self {
        let mut by_level = [
            vec![Vec::new(); index.level_count(0)],
            vec![Vec::new(); index.level_count(1)],
        ];
        for cell in counts.cells().keys() {
            by_level[0][cell[0]].push(cell.clone());
            by_level[1][cell[1]].push(cell.clone());
        }
        Self { by_level }
    }
}

/// Grows an initial max-flow selection to size q (Algorithm 1, batched).
///
/// Starting from the cell counts of a maximum flow, repeatedly adds one
/// unselected control sample from a cell whose covariate-1 or covariate-2
/// level still has a deficit, covariate 1 first and cells in lex order;
/// when no such sample remains, pads with lex-first leftover capacity.
/// Returns the final selection and |S+|, the number of padding samples.
pub fn recover_selection(
    index: &LevelIndex,
    counts: &IntersectionCounts,
    xstar: &Selection,
    q: i64,
) -> Result<(Selection, i64), SolveError> {
    require_two_covariates(index)?;
    check_q(q, index.n_prime())?;
    let f_star = xstar.total();
    if q < f_star {
        return Err(SolveError::QBelowMaxflow { q, f_star });
    }

    let cells_by_level = LevelCells::build(index, counts);
    let mut selected: BTreeMap<Vec<usize>, i64> = xstar.counts().clone();
    let mut total = f_star;
    let mut level_sums = [
        vec![0i64; index.level_count(0)],
        vec![0i64; index.level_count(1)],
    ];
    for (cell, &s) in &selected {
        level_sums[0][cell[0]] += s;
        level_sums[1][cell[1]] += s;
    }

    for p in 0..2 {
        for i in 0..index.level_count(p) {
            for cell in &cells_by_level.by_level[p][i] {
                let deficit = index.treatment_count(p, i) - level_sums[p][i];
                let room = q - total;
                if deficit <= 0 || room <= 0 {
                    break;
                }
                let entry = selected.entry(cell.clone()).or_insert(0);
                let add = (counts.count(cell) - *entry).min(deficit).min(room);
                if add > 0 {
                    *entry += add;
                    level_sums[0][cell[0]] += add;
                    level_sums[1][cell[1]] += add;
                    total += add;
                }
            }
        }
    }

    let mut s_plus = 0;
    if total < q {
        for (cell, &u) in counts.cells() {
            if total >= q {
                break;
            }
            let entry = selected.entry(cell.clone()).or_insert(0);
            let add = (u - *entry).min(q - total);
            if add > 0 {
                *entry += add;
                total += add;
                s_plus += add;
            }
        }
    }
    debug_assert_eq!(total, q);
    Ok((Selection::from_counts(selected), s_plus))
}

/// Solves min-imbalance for a size-q selection via max flow plus recovery.
///
/// For q < f* the initial flow is trimmed cell by cell in reverse lex order;
/// every kept unit erases one deficit per covariate, so the objective is
/// 2(n - q) no matter which units are kept.
pub fn solve_maxflow2(dataset: &Dataset, q: i64) -> Result<Solve2Result, SolveError> {
    let index = index_levels(dataset)?;
    check_q(q, index.n_prime())?;
    let counts = intersection_counts(dataset, &index);
    let graph = build_maxflow_graph(&index, &counts)?;
    let assignment = maxflow_solve(&graph.network, graph.source, graph.sink)?;
    let (optimal, _) = certify_maxflow(&graph.network, &assignment, graph.source, graph.sink)?;
    if !optimal {
        return Err(SolveError::CertificateFailure(
            "max-flow residual cut check failed".to_string(),
        ));
    }
    let f_star = assignment.objective;

    let mut xstar = BTreeMap::new();
    for (role, &flow) in graph.legend.iter().zip(&assignment.flows) {
        if let ArcRole::Cell { i1, i2 } = *role {
            if flow > 0 {
                xstar.insert(vec![i1, i2], flow);
            }
        }
    }
    let xstar = Selection::from_counts(xstar);

    let (selection, s_plus) = if q < f_star {
        let mut trimmed = xstar.counts().clone();
        let mut surplus = f_star - q;
        for (_, s) in trimmed.iter_mut().rev() {
            let drop = (*s).min(surplus);
            *s -= drop;
            surplus -= drop;
            if surplus == 0 {
                break;
            }
        }
        (Selection::from_counts(trimmed), 0)
    } else {
        recover_selection(&index, &counts, &xstar, q)?
    };

    let objective = imbalance(&index, &counts, &selection)?.total;
    let lbar = |p: usize| {
        (0..index.level_count(p))
            .map(|i| index.treatment_count(p, i).min(index.control_count(p, i)))
            .sum()
    };
    Ok(Solve2Result {
        selection,
        objective,
        method: SolveMethod::Maxflow,
        maxflow: Some(MaxflowStats {
            f_star,
            s_plus_size: s_plus,
            lbar1: lbar(0),
            lbar2: lbar(1),
        }),
    })
}

/// Splits a size-n selection into the three classification types: samples
/// whose both levels are over target, samples with exactly one level over
/// target when picked, and the balanced remainder. Cells are drained in lex
/// order. For any size-n selection, IM = 4n - 2*s2 - 4*s3.
pub fn classify_3type(
    index: &LevelIndex,
    counts: &IntersectionCounts,
    selection: &Selection,
) -> Result<(i64, i64, i64), SolveError> {
    require_two_covariates(index)?;
    let n = index.n();
    if selection.total() != n {
        return Err(SolveError::WrongSelectionSize {
            expected: n,
            found: selection.total(),
        });
    }
    // reuse the validation inside imbalance
    imbalance(index, counts, selection)?;

    let mut dis = [
        vec![0i64; index.level_count(0)],
        vec![0i64; index.level_count(1)],
    ];
    for (cell, &s) in selection.counts() {
        dis[0][cell[0]] += s;
        dis[1][cell[1]] += s;
    }
    for p in 0..2 {
        for i in 0..index.level_count(p) {
            dis[p][i] -= index.treatment_count(p, i);
        }
    }

    let mut remaining: BTreeMap<Vec<usize>, i64> = selection.counts().clone();
    let take = |remaining: &mut BTreeMap<Vec<usize>, i64>,
                    dis: &mut [Vec<i64>; 2],
                    both: bool| {
        let mut taken = 0;
        for (cell, left) in remaining.iter_mut() {
            let (d1, d2) = (dis[0][cell[0]], dis[1][cell[1]]);
            let eligible = if both { d1.min(d2) } else { d1.max(d2) };
            let t = eligible.max(0).min(*left);
            if t > 0 {
                *left -= t;
                dis[0][cell[0]] -= t;
                dis[1][cell[1]] -= t;
                taken += t;
            }
        }
        taken
    };
    let s1 = take(&mut remaining, &mut dis, true);
    let s2 = take(&mut remaining, &mut dis, false);
    let s3 = n - s1 - s2;
    Ok((s1, s2, s3))
}
