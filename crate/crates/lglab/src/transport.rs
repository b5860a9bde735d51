//! Transportation feasibility as bipartite max-flow: route type masses to
//! action masses along admissible (type, action) arcs.
//!
//! Used by the symmetrization step: the system is feasible exactly when
//! the target aggregate decomposes into per-type mixtures supported on
//! best responses.

/// Residual capacities below this are treated as exhausted; keeps float
/// dust from generating endless augmenting paths.
const FLOW_EPS: f64 = 1e-14;

pub(crate) struct TransportResult {
    /// Total routed mass.
    pub flow: f64,
    /// flow\[t\]\[a\], nonzero only on admissible arcs.
    pub arc_flow: Vec<Vec<f64>>,
}

/// Maximum flow from type supplies to action demands over the given arcs.
/// Deterministic: Edmonds-Karp with BFS in fixed node order.
pub(crate) fn max_flow_bipartite(
    supplies: &[f64],
    demands: &[f64],
    arcs: &[Vec<bool>],
) -> TransportResult {
    let t = supplies.len();
    let a = demands.len();
    let nodes = t + a + 2;
    let source = 0;
    let sink = nodes - 1;
    let type_node = |i: usize| 1 + i;
    let action_node = |j: usize| 1 + t + j;

    // dense residual matrix; the graph is tiny (<= 64 + 16 + 2 nodes)
    let mut cap = vec![vec![0.0f64; nodes]; nodes];
    for (i, &s) in supplies.iter().enumerate() {
        cap[source][type_node(i)] = s;
    }
    for (j, &d) in demands.iter().enumerate() {
        cap[action_node(j)][sink] = d;
    }
    for i in 0..t {
        for j in 0..a {
            if arcs[i][j] {
                cap[type_node(i)][action_node(j)] = f64::INFINITY;
            }
        }
    }

    let mut flow = 0.0;
    loop {
        // BFS for a shortest augmenting path
        let mut parent = vec![usize::MAX; nodes];
        parent[source] = source;
        let mut queue = std::collections::VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for v in 0..nodes {
                if parent[v] == usize::MAX && cap[u][v] > FLOW_EPS {
                    parent[v] = u;
                    if v == sink {
                        queue.clear();
                        break;
                    }
                    queue.push_back(v);
                }
            }
        }
        if parent[sink] == usize::MAX {
            break;
        }
        let mut bottleneck = f64::INFINITY;
        let mut v = sink;
        while v != source {
            let u = parent[v];
            bottleneck = bottleneck.min(cap[u][v]);
            v = u;
        }
        let mut v = sink;
        while v != source {
            let u = parent[v];
            cap[u][v] -= bottleneck;
            cap[v][u] += bottleneck;
            v = u;
        }
        flow += bottleneck;
    }

    let mut arc_flow = vec![vec![0.0f64; a]; t];
    for i in 0..t {
        for j in 0..a {
            if arcs[i][j] {
                // flow on an infinite-capacity arc equals its reverse residual
                arc_flow[i][j] = cap[action_node(j)][type_node(i)];
            }
        }
    }
    TransportResult { flow, arc_flow }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn routes_single_source_single_sink() {
        let r = max_flow_bipartite(&[1.0], &[1.0], &[vec![true]]);
        assert!((r.flow - 1.0).abs() < 1e-12);
        assert!((r.arc_flow[0][0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn solves_the_two_by_two_system() {
        // weights (1/2, 1/2), admissible sets {0,1} and {1}, demands (1/4, 3/4)
        let r = max_flow_bipartite(
            &[0.5, 0.5],
            &[0.25, 0.75],
            &[vec![true, true], vec![false, true]],
        );
        assert!((r.flow - 1.0).abs() < 1e-12);
        assert!((r.arc_flow[0][0] - 0.25).abs() < 1e-12);
        assert!((r.arc_flow[0][1] - 0.25).abs() < 1e-12);
        assert!((r.arc_flow[1][1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn reports_infeasibility_as_deficit() {
        // demand on action 0 cannot be met: only type 1 may use it, weight 0.3
        let r = max_flow_bipartite(
            &[0.3, 0.7],
            &[0.5, 0.5],
            &[vec![true, true], vec![false, true]],
        );
        assert!(r.flow < 1.0 - 0.19);
    }
}
