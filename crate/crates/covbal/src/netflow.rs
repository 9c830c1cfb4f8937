//! Generic integer min-cost-flow and max-flow engine.
//!
//! Min-cost flow is solved by successive shortest paths with node potentials
//! (Dijkstra on reduced costs); max flow by blocking flows over BFS level
//! graphs. Both return integer flows together with enough information to
//! certify optimality after the fact: node potentials for min-cost flow,
//! residual reachability for max flow.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

/// Upper bound of an arc. `Unbounded` arcs are resolved to a finite bound
/// that provably does not constrain any optimal solution (the total positive
/// supply for min-cost flow, the sum of finite capacities for max flow).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capacity {
    Finite(i64),
    Unbounded,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FlowError {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("infeasible: {remaining} unit(s) of supply cannot reach any deficit node")]
    Infeasible { remaining: i64 },
    #[error("assignment violates flow constraints: {0}")]
    InfeasibleAssignment(String),
    #[error("assignment carries no node potentials")]
    MissingPotentials,
}

/// A directed arc with lower bound, capacity, and per-unit cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub lower: i64,
    pub capacity: Capacity,
    pub cost: i64,
}

/// A directed graph with per-node supplies (negative = demand) and arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNetwork {
    supplies: Vec<i64>,
    arcs: Vec<Arc>,
}

impl FlowNetwork {
    /// An arc-less network over `supplies.len()` nodes.
    pub fn new(supplies: Vec<i64>) -> Self {
        Self {
            supplies,
            arcs: Vec::new(),
        }
    }

    /// Adds an arc and returns its index.
    pub fn add_arc(
        &mut self,
        tail: usize,
        head: usize,
        lower: i64,
        capacity: Capacity,
        cost: i64,
    ) -> Result<usize, FlowError> {
        let n = self.node_count();
        if tail >= n || head >= n {
            return Err(FlowError::InvalidNetwork(format!(
                "arc ({tail},{head}) references a node >= node count {n}"
            )));
        }
        if lower < 0 {
            return Err(FlowError::InvalidNetwork(format!(
                "arc ({tail},{head}) has negative lower bound {lower}"
            )));
        }
        if let Capacity::Finite(cap) = capacity {
            if cap < lower {
                return Err(FlowError::InvalidNetwork(format!(
                    "arc ({tail},{head}) has capacity {cap} below lower bound {lower}"
                )));
            }
        }
        self.arcs.push(Arc {
            tail,
            head,
            lower,
            capacity,
            cost,
        });
        Ok(self.arcs.len() - 1)
    }

    pub fn node_count(&self) -> usize {
        self.supplies.len()
    }

    pub fn supplies(&self) -> &[i64] {
        &self.supplies
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn total_positive_supply(&self) -> i64 {
        self.supplies.iter().filter(|&&b| b > 0).sum()
    }

    /// Line-oriented debug dump, one arc per line: `tail head lower cap cost`,
    /// with `inf` for unbounded capacity.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for arc in &self.arcs {
            match arc.capacity {
                Capacity::Finite(c) => {
                    let _ = writeln!(
                        out,
                        "{} {} {} {} {}",
                        arc.tail, arc.head, arc.lower, c, arc.cost
                    );
                }
                Capacity::Unbounded => {
                    let _ = writeln!(out, "{} {} {} inf {}", arc.tail, arc.head, arc.lower, arc.cost);
                }
            }
        }
        out
    }

    /// Rebuilds a network from supplies plus the `dump` arc format.
    pub fn from_dump(supplies: Vec<i64>, text: &str) -> Result<Self, FlowError> {
        let mut net = FlowNetwork::new(supplies);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(FlowError::InvalidNetwork(format!(
                    "dump line {}: expected 5 fields, found {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let parse = |s: &str| -> Result<i64, FlowError> {
                s.parse().map_err(|_| {
                    FlowError::InvalidNetwork(format!("dump line {}: bad integer {s:?}", lineno + 1))
                })
            };
            let tail = parse(fields[0])? as usize;
            let head = parse(fields[1])? as usize;
            let lower = parse(fields[2])?;
            let capacity = if fields[3] == "inf" {
                Capacity::Unbounded
            } else {
                Capacity::Finite(parse(fields[3])?)
            };
            let cost = parse(fields[4])?;
            net.add_arc(tail, head, lower, capacity, cost)?;
        }
        Ok(net)
    }
}

/// Per-arc integer flows plus the solver's optimality evidence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowAssignment {
    /// Flow on each arc, indexed like `FlowNetwork::arcs`.
    pub flows: Vec<i64>,
    /// Total cost for min-cost flow, flow value for max flow.
    pub objective: i64,
    /// Node potentials satisfying reduced-cost optimality (min-cost flow only).
    pub node_potentials: Option<Vec<i64>>,
}

const INF: i64 = i64::MAX / 4;

/// Residual graph with paired arcs: residual arc `2i` is the forward side of
/// network arc `i`, residual arc `2i ^ 1` its reverse.
struct Residual {
    adj: Vec<Vec<u32>>,
    to: Vec<u32>,
    cap: Vec<i64>,
    cost: Vec<i64>,
}

impl Residual {
    fn build(network: &FlowNetwork, resolved: &[i64]) -> Self {
        let n = network.node_count();
        let mut res = Residual {
            adj: vec![Vec::new(); n],
            to: Vec::with_capacity(network.arcs.len() * 2),
            cap: Vec::with_capacity(network.arcs.len() * 2),
            cost: Vec::with_capacity(network.arcs.len() * 2),
        };
        for (i, arc) in network.arcs.iter().enumerate() {
            res.adj[arc.tail].push((2 * i) as u32);
            res.to.push(arc.head as u32);
            res.cap.push(resolved[i]);
            res.cost.push(arc.cost);
            res.adj[arc.head].push((2 * i + 1) as u32);
            res.to.push(arc.tail as u32);
            res.cap.push(0);
            res.cost.push(-arc.cost);
        }
        res
    }

    fn flows(&self, resolved: &[i64]) -> Vec<i64> {
        resolved
            .iter()
            .enumerate()
            .map(|(i, &cap)| cap - self.cap[2 * i])
            .collect()
    }
}

fn resolve_capacities(network: &FlowNetwork, bound: i64) -> Vec<i64> {
    network
        .arcs
        .iter()
        .map(|arc| match arc.capacity {
            Capacity::Finite(c) => c,
            Capacity::Unbounded => bound,
        })
        .collect()
}

fn require_zero_lower_bounds(network: &FlowNetwork) -> Result<(), FlowError> {
    for (i, arc) in network.arcs.iter().enumerate() {
        if arc.lower != 0 {
            return Err(FlowError::InvalidNetwork(format!(
                "arc {i} has nonzero lower bound {}; solvers require zero lower bounds",
                arc.lower
            )));
        }
    }
    Ok(())
}

/// Minimum-cost feasible flow by successive shortest paths with node
/// potentials. Requires zero lower bounds, nonnegative costs, and supplies
/// summing to zero. Excess nodes are drained lowest index first; shortest
/// paths break ties by node index.
pub fn mcnf_solve(network: &FlowNetwork) -> Result<FlowAssignment, FlowError> {
    let n = network.node_count();
    if network.supplies.iter().sum::<i64>() != 0 {
        return Err(FlowError::InvalidNetwork(
            "supplies must sum to zero".to_string(),
        ));
    }
    require_zero_lower_bounds(network)?;
    for (i, arc) in network.arcs.iter().enumerate() {
        if arc.cost < 0 {
            return Err(FlowError::InvalidNetwork(format!(
                "arc {i} has negative cost {}; not supported",
                arc.cost
            )));
        }
    }

    let resolved = resolve_capacities(network, network.total_positive_supply());
    let mut res = Residual::build(network, &resolved);
    let mut potential = vec![0i64; n];
    let mut excess = network.supplies.clone();
    let mut dist = vec![INF; n];
    let mut parent = vec![u32::MAX; n];

    while let Some(src) = (0..n).find(|&v| excess[v] > 0) {
        dist.fill(INF);
        parent.fill(u32::MAX);
        dist[src] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0i64, src)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &e in &res.adj[u] {
                let e = e as usize;
                if res.cap[e] <= 0 {
                    continue;
                }
                let v = res.to[e] as usize;
                let nd = d + res.cost[e] + potential[u] - potential[v];
                if nd < dist[v] {
                    dist[v] = nd;
                    parent[v] = e as u32;
                    heap.push(Reverse((nd, v)));
                }
            }
        }

        let target = (0..n)
            .filter(|&v| excess[v] < 0 && dist[v] < INF)
            .min_by_key(|&v| (dist[v], v));
        let Some(t) = target else {
            let remaining = excess.iter().filter(|&&e| e > 0).sum();
            return Err(FlowError::Infeasible { remaining });
        };

        let mut delta = excess[src].min(-excess[t]);
        let mut v = t;
        while v != src {
            let e = parent[v] as usize;
            delta = delta.min(res.cap[e]);
            v = res.to[e ^ 1] as usize;
        }
        let mut v = t;
        while v != src {
            let e = parent[v] as usize;
            res.cap[e] -= delta;
            res.cap[e ^ 1] += delta;
            v = res.to[e ^ 1] as usize;
        }
        excess[src] -= delta;
        excess[t] += delta;

        // Raising unreached nodes by the full target distance keeps every
        // residual arc at a nonnegative reduced cost, so later searches stay
        // label-setting and the final potentials certify optimality.
        let reach = dist[t];
        for v in 0..n {
            potential[v] += dist[v].min(reach);
        }
    }

    let flows = res.flows(&resolved);
    let objective = flows
        .iter()
        .zip(&network.arcs)
        .map(|(&f, arc)| f * arc.cost)
        .sum();
    Ok(FlowAssignment {
        flows,
        objective,
        node_potentials: Some(potential),
    })
}

/// Maximum `source`->`sink` flow via blocking flows on BFS level graphs.
/// Costs are ignored; lower bounds must be zero.
pub fn maxflow_solve(
    network: &FlowNetwork,
    source: usize,
    sink: usize,
) -> Result<FlowAssignment, FlowError> {
    let n = network.node_count();
    if source >= n || sink >= n {
        return Err(FlowError::InvalidNetwork(format!(
            "source {source} or sink {sink} outside node range {n}"
        )));
    }
    if source == sink {
        return Err(FlowError::InvalidNetwork(
            "source and sink must differ".to_string(),
        ));
    }
    require_zero_lower_bounds(network)?;

    // An s-t path made only of unbounded arcs means the value is unbounded;
    // otherwise the sum of finite capacities dominates every finite cut.
    let mut finite_sum = 0i64;
    let mut unbounded_adj = vec![Vec::new(); n];
    for arc in &network.arcs {
        match arc.capacity {
            Capacity::Finite(c) => finite_sum = finite_sum.saturating_add(c),
            Capacity::Unbounded => unbounded_adj[arc.tail].push(arc.head),
        }
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([source]);
    seen[source] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &unbounded_adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    if seen[sink] {
        return Err(FlowError::InvalidNetwork(
            "maximum flow value is unbounded".to_string(),
        ));
    }

    let resolved = resolve_capacities(network, finite_sum);
    let mut res = Residual::build(network, &resolved);
    let mut level = vec![-1i32; n];
    let mut iter = vec![0usize; n];
    let mut value = 0i64;

    loop {
        level.fill(-1);
        level[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &e in &res.adj[u] {
                let e = e as usize;
                let v = res.to[e] as usize;
                if res.cap[e] > 0 && level[v] < 0 {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        if level[sink] < 0 {
            break;
        }
        iter.fill(0);
        loop {
            let pushed = blocking_dfs(&mut res, &level, &mut iter, source, sink, INF);
            if pushed == 0 {
                break;
            }
            value += pushed;
        }
    }

    let flows = res.flows(&resolved);
    Ok(FlowAssignment {
        flows,
        objective: value,
        node_potentials: None,
    })
}

fn blocking_dfs(
    res: &mut Residual,
    level: &[i32],
    iter: &mut [usize],
    u: usize,
    sink: usize,
    limit: i64,
) -> i64 {
    if u == sink {
        return limit;
    }
    while iter[u] < res.adj[u].len() {
        let e = res.adj[u][iter[u]] as usize;
        let v = res.to[e] as usize;
        if res.cap[e] > 0 && level[u] < level[v] {
            let pushed = blocking_dfs(res, level, iter, v, sink, limit.min(res.cap[e]));
            if pushed > 0 {
                res.cap[e] -= pushed;
                res.cap[e ^ 1] += pushed;
                return pushed;
            }
        }
        iter[u] += 1;
    }
    0
}

fn check_capacity_bounds(network: &FlowNetwork, flows: &[i64]) -> Result<(), FlowError> {
    if flows.len() != network.arcs.len() {
        return Err(FlowError::InfeasibleAssignment(format!(
            "expected {} arc flows, found {}",
            network.arcs.len(),
            flows.len()
        )));
    }
    for (i, (arc, &f)) in network.arcs.iter().zip(flows).enumerate() {
        if f < arc.lower {
            return Err(FlowError::InfeasibleAssignment(format!(
                "arc {i} carries {f} below lower bound {}",
                arc.lower
            )));
        }
        if let Capacity::Finite(c) = arc.capacity {
            if f > c {
                return Err(FlowError::InfeasibleAssignment(format!(
                    "arc {i} carries {f} above capacity {c}"
                )));
            }
        }
    }
    Ok(())
}

fn net_outflow(network: &FlowNetwork, flows: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; network.node_count()];
    for (arc, &f) in network.arcs.iter().zip(flows) {
        out[arc.tail] += f;
        out[arc.head] -= f;
    }
    out
}

/// Checks that `assignment` is a maximum flow via residual reachability:
/// returns true iff the sink cannot be reached from the source in the
/// residual network, together with the source side of the induced cut.
pub fn certify_maxflow(
    network: &FlowNetwork,
    assignment: &FlowAssignment,
    source: usize,
    sink: usize,
) -> Result<(bool, Vec<usize>), FlowError> {
    let n = network.node_count();
    if source >= n || sink >= n || source == sink {
        return Err(FlowError::InvalidNetwork(
            "bad source/sink for certification".to_string(),
        ));
    }
    check_capacity_bounds(network, &assignment.flows)?;
    let out = net_outflow(network, &assignment.flows);
    for v in 0..n {
        if v == source || v == sink {
            continue;
        }
        if out[v] != network.supplies[v] {
            return Err(FlowError::InfeasibleAssignment(format!(
                "node {v} violates flow balance: net outflow {} vs supply {}",
                out[v], network.supplies[v]
            )));
        }
    }
    if out[source] != assignment.objective {
        return Err(FlowError::InfeasibleAssignment(format!(
            "objective {} does not match source net outflow {}",
            assignment.objective, out[source]
        )));
    }

    let mut reachable = vec![false; n];
    reachable[source] = true;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for (arc, &f) in network.arcs.iter().zip(&assignment.flows) {
            let forward_open = arc.tail == u
                && match arc.capacity {
                    Capacity::Finite(c) => f < c,
                    Capacity::Unbounded => true,
                };
            let backward_open = arc.head == u && f > arc.lower;
            let v = if forward_open {
                arc.head
            } else if backward_open {
                arc.tail
            } else {
                continue;
            };
            if !reachable[v] {
                reachable[v] = true;
                queue.push_back(v);
            }
        }
    }
    let cut: Vec<usize> = (0..n).filter(|&v| reachable[v]).collect();
    Ok((!reachable[sink], cut))
}

/// Checks reduced-cost optimality: true iff every residual arc has
/// `cost + potential(tail) - potential(head) >= 0`.
pub fn certify_mcnf(network: &FlowNetwork, assignment: &FlowAssignment) -> Result<bool, FlowError> {
    let potentials = assignment
        .node_potentials
        .as_ref()
        .ok_or(FlowError::MissingPotentials)?;
    if potentials.len() != network.node_count() {
        return Err(FlowError::InfeasibleAssignment(format!(
            "expected {} potentials, found {}",
            network.node_count(),
            potentials.len()
        )));
    }
    check_capacity_bounds(network, &assignment.flows)?;
    let out = net_outflow(network, &assignment.flows);
    for v in 0..network.node_count() {
        if out[v] != network.supplies[v] {
            return Err(FlowError::InfeasibleAssignment(format!(
                "node {v} violates flow balance: net outflow {} vs supply {}",
                out[v], network.supplies[v]
            )));
        }
    }
    for (arc, &f) in network.arcs.iter().zip(&assignment.flows) {
        let forward_open = match arc.capacity {
            Capacity::Finite(c) => f < c,
            Capacity::Unbounded => true,
        };
        if forward_open && arc.cost + potentials[arc.tail] - potentials[arc.head] < 0 {
            return Ok(false);
        }
        if f > arc.lower && -arc.cost + potentials[arc.head] - potentials[arc.tail] < 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(supplies: Vec<i64>, arcs: &[(usize, usize, i64, i64)]) -> FlowNetwork {
        let mut n = FlowNetwork::new(supplies);
        for &(t, h, cap, cost) in arcs {
            n.add_arc(t, h, 0, Capacity::Finite(cap), cost).unwrap();
        }
        n
    }

    #[test]
    fn mcnf_single_arc() {
        let n = net(vec![1, -1], &[(0, 1, 1, 3)]);
        let sol = mcnf_solve(&n).unwrap();
        assert_eq!(sol.flows, vec![1]);
        assert_eq!(sol.objective, 3);
        assert!(certify_mcnf(&n, &sol).unwrap());
    }

    #[test]
    fn mcnf_prefers_cheap_detour() {
        // Both units route through node 1 (cost 2 each) over the direct
        // cost-5 arc; enumerating both routings gives 4 as the optimum.
        let n = net(vec![2, 0, -2], &[(0, 1, 2, 1), (1, 2, 2, 1), (0, 2, 2, 5)]);
        let sol = mcnf_solve(&n).unwrap();
        assert_eq!(sol.objective, 4);
        assert_eq!(sol.flows, vec![2, 2, 0]);
        assert!(certify_mcnf(&n, &sol).unwrap());
    }

    #[test]
    fn mcnf_empty_network() {
        let n = FlowNetwork::new(vec![0, 0, 0]);
        let sol = mcnf_solve(&n).unwrap();
        assert!(sol.flows.is_empty());
        assert_eq!(sol.objective, 0);
        assert!(certify_mcnf(&n, &sol).unwrap());
    }

    #[test]
    fn mcnf_reports_unsatisfiable_remainder() {
        let n = net(vec![2, 1, -3], &[(0, 2, 1, 1)]);
        let err = mcnf_solve(&n).unwrap_err();
        assert_eq!(err, FlowError::Infeasible { remaining: 2 });
    }

    #[test]
    fn mcnf_rejects_unbalanced_supplies() {
        let n = net(vec![1, 0], &[(0, 1, 1, 1)]);
        assert!(matches!(
            mcnf_solve(&n),
            Err(FlowError::InvalidNetwork(_))
        ));
    }

    #[test]
    fn mcnf_unbounded_arcs_resolve_to_total_supply() {
        let mut n = FlowNetwork::new(vec![3, -3]);
        n.add_arc(0, 1, 0, Capacity::Unbounded, 2).unwrap();
        let sol = mcnf_solve(&n).unwrap();
        assert_eq!(sol.flows, vec![3]);
        assert_eq!(sol.objective, 6);
        assert!(certify_mcnf(&n, &sol).unwrap());
    }

    #[test]
    fn certify_mcnf_rejects_expensive_routing() {
        let n = net(vec![2, 0, -2], &[(0, 1, 2, 1), (1, 2, 2, 1), (0, 2, 2, 5)]);
        let detour = FlowAssignment {
            flows: vec![0, 0, 2],
            objective: 10,
            node_potentials: Some(vec![0, 0, 0]),
        };
        assert!(!certify_mcnf(&n, &detour).unwrap());
    }

    #[test]
    fn certify_mcnf_needs_potentials() {
        let n = net(vec![0, 0], &[]);
        let sol = FlowAssignment {
            flows: vec![],
            objective: 0,
            node_potentials: None,
        };
        assert_eq!(certify_mcnf(&n, &sol), Err(FlowError::MissingPotentials));
    }

    #[test]
    fn certify_mcnf_zero_everything() {
        let n = FlowNetwork::new(vec![0, 0]);
        let sol = FlowAssignment {
            flows: vec![],
            objective: 0,
            node_potentials: Some(vec![0, 0]),
        };
        assert!(certify_mcnf(&n, &sol).unwrap());
    }

    #[test]
    fn maxflow_single_arc() {
        let n = net(vec![0, 0], &[(0, 1, 7, 0)]);
        let sol = maxflow_solve(&n, 0, 1).unwrap();
        assert_eq!(sol.objective, 7);
        assert!(certify_maxflow(&n, &sol, 0, 1).unwrap().0);
    }

    #[test]
    fn maxflow_diamond() {
        // s=0, a=1, b=2, t=3; the a->b shortcut cannot beat the s-side cut.
        let n = net(
            vec![0; 4],
            &[(0, 1, 1, 0), (0, 2, 1, 0), (1, 3, 1, 0), (2, 3, 1, 0), (1, 2, 5, 0)],
        );
        let sol = maxflow_solve(&n, 0, 3).unwrap();
        assert_eq!(sol.objective, 2);
        let (ok, cut) = certify_maxflow(&n, &sol, 0, 3).unwrap();
        assert!(ok);
        assert_eq!(cut, vec![0]);
    }

    #[test]
    fn maxflow_disconnected() {
        let n = net(vec![0, 0, 0], &[(1, 2, 4, 0)]);
        let sol = maxflow_solve(&n, 0, 2).unwrap();
        assert_eq!(sol.objective, 0);
        assert!(certify_maxflow(&n, &sol, 0, 2).unwrap().0);
    }

    #[test]
    fn certify_maxflow_detects_augmenting_path() {
        let n = net(
            vec![0; 4],
            &[(0, 1, 1, 0), (0, 2, 1, 0), (1, 3, 1, 0), (2, 3, 1, 0), (1, 2, 5, 0)],
        );
        let suboptimal = FlowAssignment {
            flows: vec![1, 0, 1, 0, 0],
            objective: 1,
            node_potentials: None,
        };
        let (ok, _) = certify_maxflow(&n, &suboptimal, 0, 3).unwrap();
        assert!(!ok);
    }

    #[test]
    fn certify_maxflow_zero_arc_network() {
        let n = FlowNetwork::new(vec![0, 0]);
        let sol = FlowAssignment {
            flows: vec![],
            objective: 0,
            node_potentials: None,
        };
        let (ok, cut) = certify_maxflow(&n, &sol, 0, 1).unwrap();
        assert!(ok);
        assert_eq!(cut, vec![0]);
    }

    #[test]
    fn certify_maxflow_rejects_overfull_arc() {
        let n = net(vec![0, 0], &[(0, 1, 2, 0)]);
        let bad = FlowAssignment {
            flows: vec![3],
            objective: 3,
            node_potentials: None,
        };
        assert!(matches!(
            certify_maxflow(&n, &bad, 0, 1),
            Err(FlowError::InfeasibleAssignment(_))
        ));
    }

    #[test]
    fn maxflow_rejects_unbounded_path() {
        let mut n = FlowNetwork::new(vec![0, 0]);
        n.add_arc(0, 1, 0, Capacity::Unbounded, 0).unwrap();
        assert!(matches!(
            maxflow_solve(&n, 0, 1),
            Err(FlowError::InvalidNetwork(_))
        ));
    }

    #[test]
    fn dump_round_trips() {
        let mut n = net(vec![1, 0, -1], &[(0, 1, 3, 2), (1, 2, 4, 0)]);
        n.add_arc(0, 2, 0, Capacity::Unbounded, 1).unwrap();
        let text = n.dump();
        assert_eq!(text, "0 1 0 3 2\n1 2 0 4 0\n0 2 0 inf 1\n");
        let back = FlowNetwork::from_dump(vec![1, 0, -1], &text).unwrap();
        assert_eq!(back, n);
    }

    #[test]
    fn add_arc_validates() {
        let mut n = FlowNetwork::new(vec![0, 0]);
        assert!(n.add_arc(0, 2, 0, Capacity::Finite(1), 0).is_err());
        assert!(n.add_arc(0, 1, -1, Capacity::Finite(1), 0).is_err());
        assert!(n.add_arc(0, 1, 2, Capacity::Finite(1), 0).is_err());
        assert!(n.add_arc(0, 1, 0, Capacity::Finite(1), 0).is_ok());
    }
}
