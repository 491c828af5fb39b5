use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::OracleError;
use crate::model::ScenarioInstance;
use crate::partition::{classify, RegimeDescriptor};

/// Factor applied to delays before they become integer arc costs.
pub const COST_SCALE: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub capacity: u64,
    /// Delay per unit of flow.
    pub cost: f64,
}

/// Source, one node per AP, one per server column, the cloud, and the sink.
///
/// Node ids: source `0`, AP `i` at `1 + i`, server column `s` at
/// `1 + n + s`, cloud at `1 + n + m`, sink at `2 + n + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowNetwork {
    pub ap_count: usize,
    pub servers: Vec<usize>,
    pub arcs: Vec<FlowArc>,
    pub supply: u64,
    /// `sum(pi_i * chi_i)`, added to the flow cost.
    pub constant_delay: f64,
}

impl FlowNetwork {
    pub fn build(instance: &ScenarioInstance, descriptor: &RegimeDescriptor) -> Self {
        let n = instance.len();
        let servers = instance.server_indices();
        let m = servers.len();
        let delays = instance.topology.delays();
        let capacity = instance.profile.public_capacity();
        let supply = descriptor.pu;
        let mut arcs = Vec::new();
        let (source, cloud, sink) = (0, 1 + n + m, 2 + n + m);

        for i in 0..n {
            let demand = descriptor.public_demand[i];
            arcs.push(FlowArc { from: source, to: 1 + i, capacity: demand, cost: 0.0 });
            for (s, &j) in servers.iter().enumerate() {
                arcs.push(FlowArc { from: 1 + i, to: 1 + n + s, capacity: demand, cost: delays.get(i, j) });
            }
        }
        let cloud_capacity = if descriptor.regime.uses_cloud() { supply } else { 0 };
        for s in 0..m {
            arcs.push(FlowArc { from: 1 + n + s, to: sink, capacity, cost: 0.0 });
            arcs.push(FlowArc {
                from: 1 + n + s,
                to: cloud,
                capacity: cloud_capacity,
                cost: instance.profile.lambda,
            });
        }
        arcs.push(FlowArc { from: cloud, to: sink, capacity: cloud_capacity, cost: 0.0 });

        let constant_delay = (0..n).map(|i| instance.pi[i] * descriptor.chi[i] as f64).sum();
        FlowNetwork { ap_count: n, servers, arcs, supply, constant_delay }
    }

    pub fn node_count(&self) -> usize {
        3 + self.ap_count + self.servers.len()
    }

    pub fn source(&self) -> usize {
        0
    }

    pub fn sink(&self) -> usize {
        self.node_count() - 1
    }

    pub fn cloud(&self) -> usize {
        self.node_count() - 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowOutcome {
    /// Flow cost plus the constant term.
    pub objective: f64,
    pub routing_cost: f64,
    pub cloud_cost: f64,
    pub constant_delay: f64,
    /// Flow on each arc of the network, in arc order.
    pub arc_flow: Vec<u64>,
    pub augmentations: u64,
    /// Every arc cost was an integer after scaling.
    pub scaled_exactly: bool,
}

struct Edge {
    to: usize,
    residual: u64,
    cost: i64,
    rev: usize,
}

struct Residual {
    adj: Vec<Vec<Edge>>,
    /// Position of each network arc in `adj`.
    handles: Vec<(usize, usize)>,
}

impl Residual {
    fn new(network: &FlowNetwork, costs: &[i64]) -> Self {
        let mut adj: Vec<Vec<Edge>> = (0..network.node_count()).map(|_| Vec::new()).collect();
        let mut handles = Vec::with_capacity(network.arcs.len());
        for (arc, &cost) in network.arcs.iter().zip(costs) {
            let (u, v) = (arc.from, arc.to);
            let fwd = adj[u].len();
            let back = adj[v].len() + usize::from(u == v);
            adj[u].push(Edge { to: v, residual: arc.capacity, cost, rev: back });
            adj[v].push(Edge { to: u, residual: 0, cost: -cost, rev: fwd });
            handles.push((u, fwd));
        }
        Residual { adj, handles }
    }
}

/// Min-cost flow of `descriptor.pu` units by successive shortest paths with
/// Johnson potentials, followed by a Bellman-Ford optimality certificate on
/// the final residual graph.
pub fn mincost_flow(instance: &ScenarioInstance, descriptor: &RegimeDescriptor) -> Result<FlowOutcome, OracleError> {
    let fresh = classify(instance)?;
    if &fresh != descriptor {
        return Err(OracleError::Internal(format!(
            "descriptor says {} but instance classifies as {}",
            descriptor.regime, fresh.regime
        )));
    }
    solve_network(&FlowNetwork::build(instance, descriptor))
}

fn solve_network(network: &FlowNetwork) -> Result<FlowOutcome, OracleError> {
    let mut scaled_exactly = true;
    let costs: Vec<i64> = network
        .arcs
        .iter()
        .map(|a| {
            let scaled = a.cost * COST_SCALE;
            let rounded = scaled.round();
            if (scaled - rounded).abs() > 1e-6 * rounded.abs().max(1.0) {
                scaled_exactly = false;
            }
            rounded as i64
        })
        .collect();
    let mut graph = Residual::new(network, &costs);
    let nodes = network.node_count();
    let (source, sink) = (network.source(), network.sink());

    let mut potential = vec![0i64; nodes];
    let mut flow = 0u64;
    let mut augmentations = 0u64;
    while flow < network.supply {
        let mut dist = vec![i64::MAX; nodes];
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; nodes];
        let mut heap = BinaryHeap::new();
        dist[source] = 0;
        heap.push(Reverse((0i64, source)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for (k, e) in graph.adj[u].iter().enumerate() {
                if e.residual == 0 {
                    continue;
                }
                let nd = d + e.cost + potential[u] - potential[e.to];
                if nd < dist[e.to] {
                    dist[e.to] = nd;
                    prev[e.to] = Some((u, k));
                    heap.push(Reverse((nd, e.to)));
                }
            }
        }
        if dist[sink] == i64::MAX {
            return Err(OracleError::Infeasible {
                deficit: network.supply - flow,
                supply: network.supply,
            });
        }
        // nodes unreachable now stay unreachable, so their potentials are never read
        for v in 0..nodes {
            if dist[v] != i64::MAX {
                potential[v] += dist[v];
            }
        }

        let mut push = network.supply - flow;
        let mut v = sink;
        while let Some((u, k)) = prev[v] {
            push = push.min(graph.adj[u][k].residual);
            v = u;
        }
        let mut v = sink;
        while let Some((u, k)) = prev[v] {
            let rev = graph.adj[u][k].rev;
            graph.adj[u][k].residual -= push;
            graph.adj[v][rev].residual += push;
            v = u;
        }
        flow += push;
        augmentations += 1;
    }

    certify(&graph)?;

    let arc_flow: Vec<u64> = network
        .arcs
        .iter()
        .zip(&graph.handles)
        .map(|(arc, &(u, k))| arc.capacity - graph.adj[u][k].residual)
        .collect();
    let cloud = network.cloud();
    let mut routing_cost = 0.0;
    let mut cloud_cost = 0.0;
    for (arc, &f) in network.arcs.iter().zip(&arc_flow) {
        if f == 0 {
            continue;
        }
        if arc.to == cloud {
            cloud_cost += arc.cost * f as f64;
        } else {
            routing_cost += arc.cost * f as f64;
        }
    }
    Ok(FlowOutcome {
        objective: routing_cost + cloud_cost + network.constant_delay,
        routing_cost,
        cloud_cost,
        constant_delay: network.constant_delay,
        arc_flow,
        augmentations,
        scaled_exactly,
    })
}

/// Bellman-Ford from a virtual root over arcs with residual capacity. A
/// feasible potential exists exactly when the residual graph has no negative
/// cycle; the reduced costs under it are then checked to be nonnegative.
fn certify(graph: &Residual) -> Result<(), OracleError> {
    let nodes = graph.adj.len();
    let mut p = vec![0i64; nodes];
    let mut settled = false;
    for _ in 0..=nodes {
        let mut changed = false;
        for u in 0..nodes {
            for e in &graph.adj[u] {
                if e.residual > 0 && p[u] + e.cost < p[e.to] {
                    p[e.to] = p[u] + e.cost;
                    changed = true;
                }
            }
        }
        if !changed {
            settled = true;
            break;
        }
    }
    if !settled {
        return Err(OracleError::Certificate("residual graph has a negative cycle".into()));
    }
    for u in 0..nodes {
        for e in &graph.adj[u] {
            if e.residual > 0 && e.cost + p[u] - p[e.to] < 0 {
                return Err(OracleError::Certificate(format!(
                    "arc {u}->{} has negative reduced cost",
                    e.to
                )));
            }
        }
    }
    Ok(())
}

pub fn mincost_flow_optimum(instance: &ScenarioInstance, descriptor: &RegimeDescriptor) -> Result<f64, OracleError> {
    mincost_flow(instance, descriptor).map(|o| o.objective)
}
