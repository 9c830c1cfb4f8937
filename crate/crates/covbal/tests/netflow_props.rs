//! Property tests pitting the flow engine against brute-force enumeration
//! on tiny instances, plus certificate checks on every solved instance.

use covbal::netflow::{
    certify_maxflow, certify_mcnf, maxflow_solve, mcnf_solve, Capacity, FlowError, FlowNetwork,
};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct RawNet {
    supplies: Vec<i64>,
    arcs: Vec<(usize, usize, i64, i64)>,
}

fn build(raw: &RawNet) -> FlowNetwork {
    let mut net = FlowNetwork::new(raw.supplies.clone());
    for &(tail, head, cap, cost) in &raw.arcs {
        net.add_arc(tail, head, 0, Capacity::Finite(cap), cost)
            .unwrap();
    }
    net
}

fn mcnf_instances() -> impl Strategy<Value = RawNet> {
    (2usize..=5).prop_flat_map(|n| {
        (
            proptest::collection::vec(-3i64..=3, n - 1),
            proptest::collection::vec((0..n, 0..n, 0i64..=3, 0i64..=4), 0..=6),
        )
            .prop_map(|(mut supplies, arcs)| {
                let balance: i64 = supplies.iter().sum();
                supplies.push(-balance);
                RawNet { supplies, arcs }
            })
    })
}

fn maxflow_instances() -> impl Strategy<Value = RawNet> {
    (2usize..=6).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n, 0i64..=5, Just(0i64)), 0..=10).prop_map(
            move |arcs| RawNet {
                supplies: vec![0; n],
                arcs: arcs
                    .into_iter()
                    .map(|(t, h, cap, cost)| (t, h, cap, cost))
                    .collect(),
            },
        )
    })
}

/// Enumerates every integer flow vector within the capacities and returns
/// the cheapest feasible one, if any.
fn brute_force_mcnf(net: &FlowNetwork) -> Option<i64> {
    let caps: Vec<i64> = net
        .arcs()
        .iter()
        .map(|a| match a.capacity {
            Capacity::Finite(c) => c,
            Capacity::Unbounded => unreachable!("generator emits finite capacities"),
        })
        .collect();
    let mut flows = vec![0i64; caps.len()];
    let mut best: Option<i64> = None;
    loop {
        let mut out = vec![0i64; net.node_count()];
        for (arc, &f) in net.arcs().iter().zip(&flows) {
            out[arc.tail] += f;
            out[arc.head] -= f;
        }
        if out == net.supplies() {
            let cost = net
                .arcs()
                .iter()
                .zip(&flows)
                .map(|(a, &f)| a.cost * f)
                .sum();
            best = Some(best.map_or(cost, |b: i64| b.min(cost)));
        }
        // odometer increment
        let mut idx = 0;
        loop {
            if idx == caps.len() {
                return best;
            }
            if flows[idx] < caps[idx] {
                flows[idx] += 1;
                break;
            }
            flows[idx] = 0;
            idx += 1;
        }
    }
}

/// Minimum cut value over every source-side node subset.
fn brute_force_min_cut(net: &FlowNetwork, source: usize, sink: usize) -> i64 {
    let n = net.node_count();
    let mut best = i64::MAX;
    for mask in 0u32..(1 << n) {
        if mask & (1 << source) == 0 || mask & (1 << sink) != 0 {
            continue;
        }
        let cut = net
            .arcs()
            .iter()
            .filter(|a| mask & (1 << a.tail) != 0 && mask & (1 << a.head) == 0)
            .map(|a| match a.capacity {
                Capacity::Finite(c) => c,
                Capacity::Unbounded => unreachable!(),
            })
            .sum();
        best = best.min(cut);
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn mcnf_matches_brute_force(raw in mcnf_instances()) {
        let net = build(&raw);
        match (mcnf_solve(&net), brute_force_mcnf(&net)) {
            (Ok(solution), Some(expected)) => {
                prop_assert_eq!(solution.objective, expected);
                // integrality regression guard: bounds and exact balance
                for (arc, &f) in net.arcs().iter().zip(&solution.flows) {
                    let cap = match arc.capacity { Capacity::Finite(c) => c, _ => unreachable!() };
                    prop_assert!(f >= 0 && f <= cap);
                }
                prop_assert!(certify_mcnf(&net, &solution).unwrap());
            }
            (Err(FlowError::Infeasible { remaining }), None) => {
                prop_assert!(remaining > 0);
            }
            (got, expected) => {
                return Err(TestCaseError::fail(format!(
                    "solver {got:?} disagrees with brute force {expected:?}"
                )));
            }
        }
    }

    #[test]
    fn maxflow_matches_min_cut(raw in maxflow_instances()) {
        let net = build(&raw);
        let n = net.node_count();
        let (source, sink) = (0, n - 1);
        let solution = maxflow_solve(&net, source, sink).unwrap();
        prop_assert_eq!(solution.objective, brute_force_min_cut(&net, source, sink));
        let (optimal, cut) = certify_maxflow(&net, &solution, source, sink).unwrap();
        prop_assert!(optimal);
        prop_assert!(cut.contains(&source));
        prop_assert!(!cut.contains(&sink));
    }
}
