//! Domain types, instance validation and the total-delay objective.
//!
//! AP indices are 0-based in memory. Everything user-facing (scenario files,
//! violation messages, reports) uses the 1-based AP ids.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par::{self, Execution};
use crate::partition::Regime;

/// Absolute tolerance for comparing delay values.
pub const DELAY_TOLERANCE: f64 = 1e-9;

/// Private compute fraction used by the reference experiments.
pub const REFERENCE_ALPHA: f64 = 0.3;
/// Private request fraction used by the reference experiments.
pub const REFERENCE_BETA: f64 = 0.1;

/// Floor of a count-valued expression.
///
/// Products such as `0.1 * 30.0` land a hair above or below the integer they
/// denote, so values within `1e-9` of an integer are taken at face value.
pub fn floor_count(value: f64) -> i64 {
    let nearest = value.round();
    if (value - nearest).abs() <= 1e-9 * value.abs().max(1.0) {
        nearest as i64
    } else {
        value.floor() as i64
    }
}

/// Smallest positive integer `K` with `floor(ratio * K) >= need`, if any.
pub fn min_capacity(ratio: f64, need: u64) -> Option<u64> {
    if need == 0 {
        return Some(1);
    }
    if !(ratio > 0.0) {
        return None;
    }
    let meets = |k: u64| floor_count(ratio * k as f64) >= need as i64;
    let mut k = ((need as f64 / ratio).ceil() as u64).max(1);
    while k > 1 && meets(k - 1) {
        k -= 1;
    }
    while !meets(k) {
        k += 1;
    }
    Some(k)
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn delays_agree(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid topology: {0}")]
    Topology(String),
    #[error("network is disconnected: AP {a} cannot reach AP {b}")]
    Disconnected { a: usize, b: usize },
    #[error("solution violates: {0}")]
    Structure(String),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("scenario JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccessPoint {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

/// Undirected link between two APs (1-based ids).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Link {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

/// Dense symmetric matrix of inter-AP routing delays.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DelayMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        let data = rows.into_iter().flatten().collect::<Vec<_>>();
        assert_eq!(data.len(), n * n, "delay matrix must be square");
        DelayMatrix { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then node id
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(adjacency: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adjacency.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapEntry { dist: 0.0, node: source });
    while let Some(HeapEntry { dist: d, node }) = heap.pop() {
        if d > dist[node] {
            continue;
        }
        for &(next, length) in &adjacency[node] {
            let candidate = d + length;
            if candidate < dist[next] {
                dist[next] = candidate;
                heap.push(HeapEntry { dist: candidate, node: next });
            }
        }
    }
    dist
}

fn check_links(ap_count: usize, links: &[Link]) -> Result<(), ModelError> {
    for link in links {
        if link.a == 0 || link.a > ap_count || link.b == 0 || link.b > ap_count {
            return Err(ModelError::Topology(format!(
                "link ({}, {}) references an unknown AP",
                link.a, link.b
            )));
        }
        if !link.length.is_finite() || link.length < 0.0 {
            return Err(ModelError::Topology(format!(
                "link ({}, {}) has invalid length {}",
                link.a, link.b, link.length
            )));
        }
    }
    Ok(())
}

/// All-pairs shortest-path delays over the links.
pub fn shortest_path_delays(ap_count: usize, links: &[Link]) -> Result<DelayMatrix, ModelError> {
    shortest_path_delays_with(ap_count, links, Execution::default())
}

pub fn shortest_path_delays_with(
    ap_count: usize,
    links: &[Link],
    exec: Execution,
) -> Result<DelayMatrix, ModelError> {
    check_links(ap_count, links)?;
    let mut adjacency = vec![Vec::new(); ap_count];
    for link in links {
        let (a, b) = (link.a - 1, link.b - 1);
        if a == b {
            continue;
        }
        adjacency[a].push((b, link.length));
        adjacency[b].push((a, link.length));
    }
    for neighbours in &mut adjacency {
        neighbours.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
    }

    let rows = par::map_range(exec, ap_count, |source| dijkstra(&adjacency, source));

    let mut data = vec![0.0; ap_count * ap_count];
    for i in 0..ap_count {
        for j in (i + 1)..ap_count {
            // Float path sums are order dependent; pick one value for both directions.
            let d = rows[i][j].min(rows[j][i]);
            if !d.is_finite() {
                return Err(ModelError::Disconnected { a: i + 1, b: j + 1 });
            }
            data[i * ap_count + j] = d;
            data[j * ap_count + i] = d;
        }
    }
    Ok(DelayMatrix { n: ap_count, data })
}

/// APs, links and the derived all-pairs delay matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTopology {
    aps: Vec<AccessPoint>,
    links: Vec<Link>,
    delays: DelayMatrix,
}

impl NetworkTopology {
    pub fn new(aps: Vec<AccessPoint>, links: Vec<Link>) -> Result<Self, ModelError> {
        Self::new_with(aps, links, Execution::default())
    }

    pub fn new_with(
        aps: Vec<AccessPoint>,
        links: Vec<Link>,
        exec: Execution,
    ) -> Result<Self, ModelError> {
        for (index, ap) in aps.iter().enumerate() {
            if ap.id != index + 1 {
                return Err(ModelError::Topology(format!(
                    "AP at position {} has id {}, expected {}",
                    index + 1,
                    ap.id,
                    index + 1
                )));
            }
            if !ap.x.is_finite() || !ap.y.is_finite() {
                return Err(ModelError::Topology(format!("AP {} has non-finite coordinates", ap.id)));
            }
        }
        let delays = shortest_path_delays_with(aps.len(), &links, exec)?;
        Ok(NetworkTopology { aps, links, delays })
    }

    /// Builds a topology around a precomputed delay matrix without checking it.
    /// [`validate_instance`] recomputes and compares.
    pub fn from_parts_unchecked(aps: Vec<AccessPoint>, links: Vec<Link>, delays: DelayMatrix) -> Self {
        NetworkTopology { aps, links, delays }
    }

    pub fn len(&self) -> usize {
        self.aps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aps.is_empty()
    }

    pub fn aps(&self) -> &[AccessPoint] {
        &self.aps
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn delays(&self) -> &DelayMatrix {
        &self.delays
    }
}

/// Uniform capacities, resource split ratios and the cloud redirection delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceProfile {
    /// Computation capacity of each hybrid edge server.
    #[serde(rename = "K")]
    pub k: f64,
    /// Communication capacity of each AP.
    #[serde(rename = "W")]
    pub w: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
}

impl ResourceProfile {
    pub fn reference(k: f64, w: f64, lambda: f64) -> Self {
        ResourceProfile {
            k,
            w,
            alpha: REFERENCE_ALPHA,
            beta: REFERENCE_BETA,
            lambda,
        }
    }

    /// `floor(alpha * K)`
    pub fn private_capacity(&self) -> u64 {
        floor_count(self.alpha * self.k).max(0) as u64
    }

    /// `floor((1 - alpha) * K)`
    pub fn public_capacity(&self) -> u64 {
        floor_count((1.0 - self.alpha) * self.k).max(0) as u64
    }

    /// W as a request count.
    pub fn communication_capacity(&self) -> u64 {
        floor_count(self.w).max(0) as u64
    }

    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let integral = |v: f64| v.is_finite() && (v - v.round()).abs() <= 1e-9;
        if !(self.k > 0.0) || !integral(self.k) {
            out.push(format!("K must be a positive integer, got {}", self.k));
        }
        if !(self.w > 0.0) || !integral(self.w) {
            out.push(format!("W must be a positive integer, got {}", self.w));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            out.push(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            out.push(format!("beta must lie in [0, 1], got {}", self.beta));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            out.push(format!("lambda must be finite and nonnegative, got {}", self.lambda));
        }
        out
    }
}

/// A complete scheduling problem: network, resources, load and placement.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioInstance {
    pub topology: NetworkTopology,
    pub profile: ResourceProfile,
    /// Total requests per AP.
    pub theta: Vec<u64>,
    /// Local user-to-AP delay per AP.
    pub pi: Vec<f64>,
    /// Whether a hybrid edge server is co-located with each AP.
    pub placement: Vec<bool>,
    /// Declared number of servers; must equal the placement count.
    pub servers: usize,
}

impl ScenarioInstance {
    pub fn new(
        topology: NetworkTopology,
        profile: ResourceProfile,
        theta: Vec<u64>,
        pi: Vec<f64>,
        placement: Vec<bool>,
    ) -> Self {
        let servers = placement.iter().filter(|&&x| x).count();
        ScenarioInstance {
            topology,
            profile,
            theta,
            pi,
            placement,
            servers,
        }
    }

    pub fn with_declared_servers(mut self, servers: usize) -> Self {
        self.servers = servers;
        self
    }

    pub fn len(&self) -> usize {
        self.topology.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topology.is_empty()
    }

    pub fn server_indices(&self) -> Vec<usize> {
        self.placement
            .iter()
            .enumerate()
            .filter_map(|(i, &x)| x.then_some(i))
            .collect()
    }

    /// `chi_i = min(theta_i, W)`
    pub fn admitted(&self, i: usize) -> u64 {
        self.theta[i].min(self.profile.communication_capacity())
    }

    /// `floor(beta * theta_i)`
    pub fn private_requests(&self, i: usize) -> u64 {
        floor_count(self.profile.beta * self.theta[i] as f64).max(0) as u64
    }

    /// Requests AP `i` must route to servers (or through them to the cloud):
    /// `floor(chi_i - beta * theta_i)` at server APs (private load stays in the
    /// private partition) and `chi_i` elsewhere. Clamped at zero.
    pub fn public_demand(&self, i: usize) -> u64 {
        let chi = self.admitted(i);
        if self.placement[i] {
            floor_count(chi as f64 - self.profile.beta * self.theta[i] as f64).max(0) as u64
        } else {
            chi
        }
    }
}

/// One failed validation check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// 1-based AP id, when the violation is local to an AP.
    pub ap: Option<usize>,
    pub message: String,
}

impl Violation {
    fn global(message: impl Into<String>) -> Self {
        Violation { ap: None, message: message.into() }
    }

    fn at(ap_index: usize, message: impl Into<String>) -> Self {
        Violation {
            ap: Some(ap_index + 1),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ap {
            Some(ap) => write!(f, "AP {ap}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every violated instance invariant. An empty list means the instance is valid.
pub fn validate_instance(instance: &ScenarioInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = instance.len();
    if n == 0 {
        out.push(Violation::global("instance has no APs"));
        return out;
    }
    for (name, len) in [
        ("theta", instance.theta.len()),
        ("pi", instance.pi.len()),
        ("placement", instance.placement.len()),
    ] {
        if len != n {
            out.push(Violation::global(format!("{name} has {len} entries, expected {n}")));
        }
    }
    if !out.is_empty() {
        return out;
    }

    out.extend(instance.profile.violations().into_iter().map(Violation::global));

    let placed = instance.placement.iter().filter(|&&x| x).count();
    if placed != instance.servers {
        out.push(Violation::global(format!(
            "placement sum {placed} != m = {}",
            instance.servers
        )));
    }
    if placed == 0 {
        out.push(Violation::global("at least one hybrid edge server is required"));
    }

    let private_capacity = instance.profile.private_capacity();
    for i in 0..n {
        if instance.placement[i] {
            let private = instance.private_requests(i);
            if private > private_capacity {
                out.push(Violation::at(
                    i,
                    format!(
                        "private demand floor(beta*theta) = {private} exceeds private compute capacity floor(alpha*K) = {private_capacity}"
                    ),
                ));
            }
        }
        let pi = instance.pi[i];
        if !pi.is_finite() || pi < 0.0 {
            out.push(Violation::at(i, format!("local delay pi = {pi} must be finite and nonnegative")));
        }
    }

    out.extend(topology_violations(&instance.topology));
    out
}

fn topology_violations(topology: &NetworkTopology) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = topology.len();
    for (index, ap) in topology.aps().iter().enumerate() {
        if ap.id != index + 1 {
            out.push(Violation::at(index, format!("AP id {} out of order", ap.id)));
        }
    }
    let delays = topology.delays();
    if delays.len() != n {
        out.push(Violation::global(format!(
            "delay matrix is {0}x{0}, expected {n}x{n}",
            delays.len()
        )));
        return out;
    }
    for i in 0..n {
        if delays.get(i, i) != 0.0 {
            out.push(Violation::at(i, "delay matrix diagonal must be zero"));
        }
        for j in (i + 1)..n {
            if delays.get(i, j) != delays.get(j, i) {
                out.push(Violation::at(i, format!("delay matrix is not symmetric at ({}, {})", i + 1, j + 1)));
            }
        }
    }
    match shortest_path_delays(n, topology.links()) {
        Ok(recomputed) => {
            'outer: for i in 0..n {
                for j in 0..n {
                    if !delays_agree(recomputed.get(i, j), delays.get(i, j), DELAY_TOLERANCE) {
                        out.push(Violation::at(
                            i,
                            format!(
                                "delay to AP {} is {} but the shortest path is {}",
                                j + 1,
                                delays.get(i, j),
                                recomputed.get(i, j)
                            ),
                        ));
                        break 'outer;
                    }
                }
            }
        }
        Err(err) => out.push(Violation::global(err.to_string())),
    }
    out
}

/// Request counts routed from each AP to each server, stored over server
/// columns only. `get(i, j)` is zero whenever AP `j` hosts no server.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoutingMatrix {
    n: usize,
    servers: Vec<usize>,
    counts: Vec<u64>,
}

impl RoutingMatrix {
    pub fn zeros(n: usize, servers: Vec<usize>) -> Self {
        let counts = vec![0; n * servers.len()];
        RoutingMatrix { n, servers, counts }
    }

    pub fn ap_count(&self) -> usize {
        self.n
    }

    pub fn servers(&self) -> &[usize] {
        &self.servers
    }

    /// Count routed from AP `i` to the server in column `s`.
    #[inline]
    pub fn by_column(&self, i: usize, s: usize) -> u64 {
        self.counts[i * self.servers.len() + s]
    }

    pub fn set_by_column(&mut self, i: usize, s: usize, count: u64) {
        let m = self.servers.len();
        self.counts[i * m + s] = count;
    }

    /// Count routed from AP `i` to the server co-located with AP `j`.
    pub fn get(&self, i: usize, j: usize) -> u64 {
        match self.servers.binary_search(&j) {
            Ok(s) => self.by_column(i, s),
            Err(_) => 0,
        }
    }

    pub fn row_total(&self, i: usize) -> u64 {
        let m = self.servers.len();
        self.counts[i * m..(i + 1) * m].iter().sum()
    }

    pub fn inflow(&self, s: usize) -> u64 {
        (0..self.n).map(|i| self.by_column(i, s)).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// A complete schedule for one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleSolution {
    pub y: RoutingMatrix,
    /// Requests each AP's server redirects to the cloud (zero at non-server APs).
    pub zeta: Vec<u64>,
    pub chi: Vec<u64>,
    pub blocked: Vec<u64>,
    pub objective: f64,
}

impl ScheduleSolution {
    /// Fills `chi`, `blocked` and `zeta` from the routing matrix; the objective is left at zero.
    pub fn from_routing(instance: &ScenarioInstance, y: RoutingMatrix) -> Self {
        let n = instance.len();
        let chi: Vec<u64> = (0..n).map(|i| instance.admitted(i)).collect();
        let blocked = (0..n).map(|i| instance.theta[i] - chi[i]).collect();
        let capacity = instance.profile.public_capacity();
        let mut zeta = vec![0; n];
        for (s, &j) in y.servers().iter().enumerate() {
            zeta[j] = y.inflow(s).saturating_sub(capacity);
        }
        ScheduleSolution {
            y,
            zeta,
            chi,
            blocked,
            objective: 0.0,
        }
    }

    pub fn total_offload(&self) -> u64 {
        self.zeta.iter().sum()
    }

    pub fn total_blocked(&self) -> u64 {
        self.blocked.iter().sum()
    }
}

/// Checks a solution against the structural invariants of an instance.
pub fn check_structure(instance: &ScenarioInstance, solution: &ScheduleSolution) -> Result<(), ModelError> {
    let n = instance.len();
    let fail = |msg: String| Err(ModelError::Structure(msg));
    if solution.y.ap_count() != n || solution.zeta.len() != n || solution.chi.len() != n || solution.blocked.len() != n {
        return fail(format!("solution dimensions do not match {n} APs"));
    }
    let servers = instance.server_indices();
    if solution.y.servers() != servers.as_slice() {
        return fail("routing columns do not match the server placement (y[i][j] > 0 requires x_j = 1)".into());
    }
    let capacity = instance.profile.public_capacity();
    for i in 0..n {
        let chi = instance.admitted(i);
        if solution.chi[i] != chi {
            return fail(format!("AP {}: chi = {} but min(theta, W) = {chi}", i + 1, solution.chi[i]));
        }
        if solution.blocked[i] != instance.theta[i] - chi {
            return fail(format!(
                "AP {}: blocked = {} but theta - chi = {}",
                i + 1,
                solution.blocked[i],
                instance.theta[i] - chi
            ));
        }
        let routed = solution.y.row_total(i);
        let demand = instance.public_demand(i);
        if routed != demand {
            return fail(format!("AP {}: routes {routed} requests but its public demand is {demand}", i + 1));
        }
        if !instance.placement[i] && solution.zeta[i] != 0 {
            return fail(format!("AP {}: cloud offload without a server", i + 1));
        }
    }
    for (s, &j) in servers.iter().enumerate() {
        let expected = solution.y.inflow(s).saturating_sub(capacity);
        if solution.zeta[j] != expected {
            return fail(format!(
                "AP {}: zeta = {} but max(0, inflow - floor((1-alpha)K)) = {expected}",
                j + 1,
                solution.zeta[j]
            ));
        }
    }
    Ok(())
}

/// The three components of the total delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayBreakdown {
    pub cloud: f64,
    pub local: f64,
    pub routing: f64,
    pub total: f64,
}

/// `sum(lambda * zeta) + sum(pi * chi) + sum(xi * y)`, after checking structure.
pub fn delay_breakdown(instance: &ScenarioInstance, solution: &ScheduleSolution) -> Result<DelayBreakdown, ModelError> {
    check_structure(instance, solution)?;
    let cloud = instance.profile.lambda * solution.total_offload() as f64;
    let local = (0..instance.len())
        .map(|i| instance.pi[i] * solution.chi[i] as f64)
        .sum::<f64>();
    let delays = instance.topology.delays();
    let servers = solution.y.servers();
    let mut routing = 0.0;
    for i in 0..instance.len() {
        for (s, &j) in servers.iter().enumerate() {
            let count = solution.y.by_column(i, s);
            if count > 0 {
                routing += delays.get(i, j) * count as f64;
            }
        }
    }
    Ok(DelayBreakdown {
        cloud,
        local,
        routing,
        total: cloud + local + routing,
    })
}

/// Total delay of a solution, computed from scratch.
pub fn evaluate_objective(instance: &ScenarioInstance, solution: &ScheduleSolution) -> Result<f64, ModelError> {
    delay_breakdown(instance, solution).map(|b| b.total)
}

/// Fraction of local private requests at server APs served by the private
/// partition. Independent of routing.
pub fn private_service_rate(instance: &ScenarioInstance) -> f64 {
    let capacity = instance.profile.private_capacity();
    let (mut total, mut served) = (0u64, 0u64);
    for i in instance.server_indices() {
        let private = instance.private_requests(i);
        total += private;
        served += private.min(instance.admitted(i)).min(capacity);
    }
    if total == 0 {
        1.0
    } else {
        served as f64 / total as f64
    }
}

/// Fraction of the routed (public-class) demand processed on edge servers
/// within the window; blocked and cloud-redirected requests count as unserved.
pub fn public_service_rate(instance: &ScenarioInstance, total_offload: u64) -> f64 {
    let mut total = 0u64;
    let mut routed = 0u64;
    for i in 0..instance.len() {
        routed += instance.public_demand(i);
        total += if instance.placement[i] {
            floor_count(instance.theta[i] as f64 * (1.0 - instance.profile.beta)).max(0) as u64
        } else {
            instance.theta[i]
        };
    }
    if total == 0 {
        1.0
    } else {
        routed.saturating_sub(total_offload) as f64 / total as f64
    }
}

/// Outcome of solving one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub regime: Regime,
    pub solution: ScheduleSolution,
    /// Branch-and-bound nodes whose relaxation was solved ("iterations").
    pub branch_nodes: u64,
    pub lp_pivots: u64,
    pub wall_time: Duration,
    pub private_service_rate: f64,
    pub public_service_rate: f64,
    pub cloud_offload: u64,
    pub blocked: u64,
    /// Total public demand to place (`Pu`).
    pub public_demand: u64,
    pub total_public_capacity: u64,
    pub delays: DelayBreakdown,
}

/// On-disk scenario layout. Field names are fixed; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub aps: Vec<AccessPoint>,
    pub links: Vec<Link>,
    pub profile: ResourceProfile,
    pub theta: Vec<u64>,
    pub pi: Vec<f64>,
    pub placement: Vec<u8>,
}

impl ScenarioFile {
    pub fn from_instance(instance: &ScenarioInstance) -> Self {
        ScenarioFile {
            aps: instance.topology.aps().to_vec(),
            links: instance.topology.links().to_vec(),
            profile: instance.profile,
            theta: instance.theta.clone(),
            pi: instance.pi.clone(),
            placement: instance.placement.iter().map(|&x| u8::from(x)).collect(),
        }
    }

    pub fn into_instance(self) -> Result<ScenarioInstance, ModelError> {
        let placement = self
            .placement
            .iter()
            .enumerate()
            .map(|(i, &x)| match x {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(ModelError::Scenario(format!("placement[{}] = {other}, expected 0 or 1", i + 1))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let topology = NetworkTopology::new(self.aps, self.links)?;
        Ok(ScenarioInstance::new(topology, self.profile, self.theta, self.pi, placement))
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Pretty JSON with a trailing newline; byte-stable for a given instance.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("scenario serializes");
        text.push('\n');
        text
    }
}

pub fn read_scenario(path: impl AsRef<Path>) -> Result<ScenarioInstance, ModelError> {
    let text = std::fs::read_to_string(path)?;
    ScenarioFile::from_json(&text)?.into_instance()
}

pub fn write_scenario(path: impl AsRef<Path>, instance: &ScenarioInstance) -> Result<(), ModelError> {
    std::fs::write(path, ScenarioFile::from_instance(instance).to_json())?;
    Ok(())
}
