//! Event-driven execution of an online exploration.
//!
//! Agents move at unit speed; the policy is consulted whenever at least one
//! agent arrives at a node (and once at time zero). Simultaneous arrivals are
//! processed in agent order before the policy sees the new state.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{NodeId, WeightedGraph};
use crate::rational::Rational;

/// One incident edge as answered by an oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevealedEdge {
    pub neighbor: String,
    pub weight: Rational,
}

/// Online interface to a (possibly adversarial) instance.
pub trait RevelationOracle {
    fn start_label(&self) -> String;

    /// Incident edges of `label`, asked exactly once, on its first visit.
    fn reveal(&mut self, label: &str) -> Vec<RevealedEdge>;

    /// Called when an agent leaves `from` towards `to`.
    fn on_depart(&mut self, _from: &str, _to: &str) {}

    /// The graph the oracle is committed to after the run.
    fn finalize(&self) -> WeightedGraph;

    /// Upper bound on the total edge weight, used for the runaway guard.
    fn total_weight_hint(&self) -> Rational;

    fn initial_view(&mut self) -> Vec<RevealedEdge> {
        let s = self.start_label();
        self.reveal(&s)
    }
}

/// Answers straight from a fixed graph.
#[derive(Debug, Clone)]
pub struct StaticOracle {
    graph: WeightedGraph,
}

impl StaticOracle {
    pub fn new(graph: WeightedGraph) -> Self {
        StaticOracle { graph }
    }
}

impl RevelationOracle for StaticOracle {
    fn start_label(&self) -> String {
        self.graph.start_label().to_string()
    }

    fn reveal(&mut self, label: &str) -> Vec<RevealedEdge> {
        let v = self.graph.node(label).expect("engine only asks for revealed labels");
        self.graph
            .neighbors(v)
            .iter()
            .map(|&(u, e)| RevealedEdge {
                neighbor: self.graph.label(u).to_string(),
                weight: self.graph.edge(e).weight,
            })
            .collect()
    }

    fn finalize(&self) -> WeightedGraph {
        self.graph.clone()
    }

    fn total_weight_hint(&self) -> Rational {
        self.graph.total_weight()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolicyError {
    #[error("wrong graph class: {0}")]
    WrongGraphClass(String),
    #[error("insufficient agents: {0}")]
    InsufficientAgents(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExploreError {
    #[error("at least one agent is required")]
    NoAgents,
    #[error("agent {agent}: illegal command ({detail})")]
    IllegalCommand { agent: usize, detail: String },
    #[error("run did not terminate (clock {clock})")]
    NonTermination { clock: Rational },
    #[error("oracle inconsistency: {0}")]
    OracleInconsistency(String),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnownEdge {
    pub a: NodeId,
    pub b: NodeId,
    pub weight: Rational,
}

impl KnownEdge {
    pub fn other(&self, v: NodeId) -> NodeId {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }
}

pub type KnownEdgeId = usize;

/// Shared knowledge of all agents. Ids are local to the run and assigned in
/// order of first sight.
#[derive(Debug, Clone, Default)]
pub struct Knowledge {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    visited: Vec<bool>,
    first_visit: Vec<Option<Rational>>,
    edges: Vec<KnownEdge>,
    adj: Vec<Vec<(NodeId, KnownEdgeId)>>,
    traversed: Vec<bool>,
    start: NodeId,
}

impl Knowledge {
    fn node_or_insert(&mut self, label: &str) -> NodeId {
        if let Some(&v) = self.index.get(label) {
            return v;
        }
        let v = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), v);
        self.visited.push(false);
        self.first_visit.push(None);
        self.adj.push(Vec::new());
        v
    }

    fn integrate(&mut self, v: NodeId, answer: &[RevealedEdge], clock: Rational) -> Result<(), ExploreError> {
        let label = self.labels[v].clone();
        let mut seen = Vec::new();
        for r in answer {
            if !r.weight.is_positive() {
                return Err(ExploreError::OracleInconsistency(format!(
                    "edge {label}-{} has non-positive weight",
                    r.neighbor
                )));
            }
            if r.neighbor == label || seen.contains(&r.neighbor) {
                return Err(ExploreError::OracleInconsistency(format!(
                    "{label} lists neighbour {} twice or itself",
                    r.neighbor
                )));
            }
            seen.push(r.neighbor.clone());
        }
        // Edges already known at v (seen from visited neighbours) must be confirmed.
        for &(u, e) in &self.adj[v] {
            let ulabel = &self.labels[u];
            match answer.iter().find(|r| &r.neighbor == ulabel) {
                Some(r) if r.weight == self.edges[e].weight => {}
                Some(r) => {
                    return Err(ExploreError::OracleInconsistency(format!(
                        "edge {label}-{ulabel} revealed as {} and {}",
                        self.edges[e].weight, r.weight
                    )))
                }
                None => {
                    return Err(ExploreError::OracleInconsistency(format!(
                        "edge {label}-{ulabel} missing from reveal of {label}"
                    )))
                }
            }
        }
        for r in answer {
            let u = self.node_or_insert(&r.neighbor);
            if self.adj[v].iter().any(|&(w, _)| w == u) {
                continue;
            }
            if self.visited[u] {
                return Err(ExploreError::OracleInconsistency(format!(
                    "edge {label}-{} was not listed when {} was revealed",
                    r.neighbor, r.neighbor
                )));
            }
            let e = self.edges.len();
            self.edges.push(KnownEdge {
                a: v,
                b: u,
                weight: r.weight,
            });
            self.traversed.push(false);
            self.adj[v].push((u, e));
            self.adj[u].push((v, e));
        }
        self.visited[v] = true;
        self.first_visit[v] = Some(clock);
        Ok(())
    }

    pub fn start(&self) -> NodeId {
        self.start
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v]
    }

    pub fn node(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    pub fn is_visited(&self, v: NodeId) -> bool {
        self.visited[v]
    }

    pub fn first_visit(&self, v: NodeId) -> Option<Rational> {
        self.first_visit[v]
    }

    pub fn all_visited(&self) -> bool {
        self.visited.iter().all(|&b| b)
    }

    pub fn edge(&self, e: KnownEdgeId) -> &KnownEdge {
        &self.edges[e]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Known incident edges in reveal order.
    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, KnownEdgeId)] {
        &self.adj[v]
    }

    /// Degree of a visited node (all its edges are known).
    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v].len()
    }

    pub fn is_traversed(&self, e: KnownEdgeId) -> bool {
        self.traversed[e]
    }

    /// Whether `e` leads from a visited node to an unvisited one.
    pub fn is_frontier(&self, e: KnownEdgeId) -> bool {
        let edge = &self.edges[e];
        self.visited[edge.a] != self.visited[edge.b]
    }

    /// Shortest distances from `source` in the known graph.
    pub fn distances_from(&self, source: NodeId) -> Vec<Option<Rational>> {
        self.dijkstra(source).0
    }

    fn dijkstra(&self, source: NodeId) -> (Vec<Option<Rational>>, Vec<Option<(NodeId, KnownEdgeId)>>) {
        let n = self.labels.len();
        let mut dist: Vec<Option<Rational>> = vec![None; n];
        let mut parent = vec![None; n];
        let mut heap = BinaryHeap::new();
        dist[source] = Some(Rational::ZERO);
        heap.push(Reverse((Rational::ZERO, source)));
        while let Some(Reverse((d, v))) = heap.pop() {
            if dist[v].is_some_and(|best| d > best) {
                continue;
            }
            for &(u, e) in &self.adj[v] {
                let nd = d + self.edges[e].weight;
                if dist[u].is_none_or(|best| nd < best) {
                    dist[u] = Some(nd);
                    parent[u] = Some((v, e));
                    heap.push(Reverse((nd, u)));
                }
            }
        }
        (dist, parent)
    }

    /// Edge sequence of a shortest known path from `from` to `to`.
    pub fn shortest_route(&self, from: NodeId, to: NodeId) -> Option<Vec<KnownEdgeId>> {
        let (_, parent) = self.dijkstra(to);
        let mut route = Vec::new();
        let mut cur = from;
        while cur != to {
            let (p, e) = parent[cur]?;
            route.push(e);
            cur = p;
        }
        Some(route)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentPos {
    At(NodeId),
    Moving {
        edge: KnownEdgeId,
        from: NodeId,
        to: NodeId,
        depart: Rational,
        arrive: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentState {
    pub pos: AgentPos,
    /// Distance travelled up to the last arrival.
    pub distance: Rational,
    pub waiting: bool,
}

impl AgentState {
    pub fn node(&self) -> Option<NodeId> {
        match self.pos {
            AgentPos::At(v) => Some(v),
            AgentPos::Moving { .. } => None,
        }
    }
}

/// Read-only snapshot handed to the policy.
pub struct View<'a> {
    pub knowledge: &'a Knowledge,
    pub agents: &'a [AgentState],
    pub clock: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Traverse(KnownEdgeId),
    Wait,
    /// One hop along a shortest known path towards the start.
    Retreat,
}

/// Online strategy. `decide` returns one command per agent; commands for
/// agents that are mid-edge are ignored.
pub trait StrategyPolicy {
    fn name(&self) -> String;
    fn decide(&mut self, view: &View<'_>, choices: &mut ChoiceStream) -> Result<Vec<Command>, PolicyError>;
}

/// Source of random choices: seeded, or scripted for exhaustive enumeration.
#[derive(Debug, Clone)]
pub struct ChoiceStream {
    source: ChoiceSource,
    log: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
enum ChoiceSource {
    Seeded(ChaCha8Rng),
    Scripted { script: Vec<usize>, pos: usize },
}

impl ChoiceStream {
    pub fn seeded(seed: u64) -> Self {
        ChoiceStream {
            source: ChoiceSource::Seeded(ChaCha8Rng::seed_from_u64(seed)),
            log: Vec::new(),
        }
    }

    /// Replays `script`; choices past its end pick option 0.
    pub fn scripted(script: Vec<usize>) -> Self {
        ChoiceStream {
            source: ChoiceSource::Scripted { script, pos: 0 },
            log: Vec::new(),
        }
    }

    /// Uniform choice among `options`; single-option calls are not recorded.
    pub fn choose(&mut self, options: usize) -> usize {
        if options <= 1 {
            return 0;
        }
        let pick = match &mut self.source {
            ChoiceSource::Seeded(rng) => rng.gen_range(0..options),
            ChoiceSource::Scripted { script, pos } => {
                let p = script.get(*pos).copied().unwrap_or(0).min(options - 1);
                *pos += 1;
                p
            }
        };
        self.log.push((options, pick));
        pick
    }

    /// `(options, picked)` for every recorded choice.
    pub fn log(&self) -> &[(usize, usize)] {
        &self.log
    }
}

/// Runs `f` once for every combination of random outcomes, or returns `None`
/// as soon as more than `limit` outcomes exist.
pub fn enumerate_choices<R, E>(
    limit: usize,
    mut f: impl FnMut(&mut ChoiceStream) -> Result<R, E>,
) -> Result<Option<Vec<(Vec<usize>, R)>>, E> {
    let mut results = Vec::new();
    let mut script: Vec<usize> = Vec::new();
    loop {
        let mut stream = ChoiceStream::scripted(script.clone());
        let r = f(&mut stream)?;
        let log = stream.log().to_vec();
        results.push((log.iter().map(|&(_, p)| p).collect(), r));
        if results.len() > limit {
            return Ok(None);
        }
        // Odometer step over the recorded choice tree.
        let mut next = None;
        for i in (0..log.len()).rev() {
            let (options, picked) = log[i];
            if picked + 1 < options {
                let mut s: Vec<usize> = log[..i].iter().map(|&(_, p)| p).collect();
                s.push(picked + 1);
                next = Some(s);
                break;
            }
        }
        match next {
            Some(s) => script = s,
            None => return Ok(Some(results)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Depart,
    Arrive,
    WaitBegin,
    WaitEnd,
    Done,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Depart => "depart",
            EventKind::Arrive => "arrive",
            EventKind::WaitBegin => "wait_begin",
            EventKind::WaitEnd => "wait_end",
            EventKind::Done => "done",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub time: Rational,
    pub agent: usize,
    pub kind: EventKind,
    pub from: String,
    pub to: String,
    pub edge_weight: Option<Rational>,
    pub agent_total_distance: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    pub distances: Vec<Rational>,
    pub completion_time: Rational,
    /// First-visit time of every node, in order of discovery.
    pub first_visits: Vec<(String, Rational)>,
}

impl Trace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,agent,kind,from,to,edge_weight,agent_total_distance\n");
        for e in &self.events {
            let w = e.edge_weight.map(|w| w.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                e.time, e.agent, e.kind, e.from, e.to, w, e.agent_total_distance
            );
        }
        out
    }

    /// Undirected edges crossed by some agent, as label pairs.
    pub fn traversed_edges(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .events
            .iter()
            .filter(|e| e.kind == EventKind::Depart)
            .map(|e| {
                if e.from <= e.to {
                    (e.from.clone(), e.to.clone())
                } else {
                    (e.to.clone(), e.from.clone())
                }
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Completion time: when the last agent is back at the start.
pub fn cost_time(t: &Trace) -> Rational {
    t.completion_time
}

/// Largest distance travelled by a single agent.
pub fn cost_energy(t: &Trace) -> Rational {
    t.distances.iter().copied().max().unwrap_or(Rational::ZERO)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("offline optimum is zero")]
pub struct ZeroOptimum;

pub fn competitive_ratio(onl: Rational, opt: Rational) -> Result<Rational, ZeroOptimum> {
    if opt.is_zero() {
        Err(ZeroOptimum)
    } else {
        Ok(onl / opt)
    }
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// The run aborts once the clock exceeds this multiple of the total weight.
    pub guard_factor: Rational,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            guard_factor: Rational::integer(100),
        }
    }
}

/// Result of a run: the trace and the graph the oracle committed to.
#[derive(Debug, Clone)]
pub struct Exploration {
    pub trace: Trace,
    pub graph: WeightedGraph,
}

pub fn run_seeded(
    policy: &mut dyn StrategyPolicy,
    oracle: &mut dyn RevelationOracle,
    k: usize,
    seed: u64,
) -> Result<Exploration, ExploreError> {
    run(policy, oracle, k, &mut ChoiceStream::seeded(seed), &EngineConfig::default())
}

pub fn run(
    policy: &mut dyn StrategyPolicy,
    oracle: &mut dyn RevelationOracle,
    k: usize,
    choices: &mut ChoiceStream,
    config: &EngineConfig,
) -> Result<Exploration, ExploreError> {
    if k == 0 {
        return Err(ExploreError::NoAgents);
    }
    let limit = config.guard_factor * oracle.total_weight_hint();
    let mut know = Knowledge::default();
    let s_label = oracle.start_label();
    let s = know.node_or_insert(&s_label);
    know.start = s;
    let view0 = oracle.initial_view();
    know.integrate(s, &view0, Rational::ZERO)?;

    let mut clock = Rational::ZERO;
    let mut agents = vec![
        AgentState {
            pos: AgentPos::At(s),
            distance: Rational::ZERO,
            waiting: false,
        };
        k
    ];
    let mut events = Vec::new();
    let mut discovery = vec![(s_label.clone(), Rational::ZERO)];

    loop {
        if know.all_visited() && agents.iter().all(|a| a.pos == AgentPos::At(s)) {
            break;
        }
        let commands = {
            let view = View {
                knowledge: &know,
                agents: &agents,
                clock,
            };
            policy.decide(&view, choices)?
        };
        if commands.len() != k {
            return Err(ExploreError::IllegalCommand {
                agent: 0,
                detail: format!("expected {k} commands, got {}", commands.len()),
            });
        }
        for (i, cmd) in commands.iter().enumerate() {
            let AgentPos::At(v) = agents[i].pos else { continue };
            let edge = match *cmd {
                Command::Wait => None,
                Command::Retreat if v == s => None,
                Command::Retreat => {
                    let route = know.shortest_route(v, s).ok_or_else(|| ExploreError::IllegalCommand {
                        agent: i,
                        detail: "no known route to the start".into(),
                    })?;
                    Some(route[0])
                }
                Command::Traverse(e) => {
                    if e >= know.edge_count() {
                        return Err(ExploreError::IllegalCommand {
                            agent: i,
                            detail: format!("edge {e} has not been revealed"),
                        });
                    }
                    let edge = know.edge(e);
                    if edge.a != v && edge.b != v {
                        return Err(ExploreError::IllegalCommand {
                            agent: i,
                            detail: format!("edge {e} is not incident to {}", know.label(v)),
                        });
                    }
                    Some(e)
                }
            };
            match edge {
                None => {
                    if !agents[i].waiting {
                        agents[i].waiting = true;
                        events.push(TraceEvent {
                            time: clock,
                            agent: i,
                            kind: EventKind::WaitBegin,
                            from: know.label(v).to_string(),
                            to: know.label(v).to_string(),
                            edge_weight: None,
                            agent_total_distance: agents[i].distance,
                        });
                    }
                }
                Some(e) => {
                    if agents[i].waiting {
                        agents[i].waiting = false;
                        events.push(TraceEvent {
                            time: clock,
                            agent: i,
                            kind: EventKind::WaitEnd,
                            from: know.label(v).to_string(),
                            to: know.label(v).to_string(),
                            edge_weight: None,
                            agent_total_distance: agents[i].distance,
                        });
                    }
                    let edge = know.edge(e).clone();
                    let to = edge.other(v);
                    know.traversed[e] = true;
                    oracle.on_depart(know.label(v), know.label(to));
                    agents[i].pos = AgentPos::Moving {
                        edge: e,
                        from: v,
                        to,
                        depart: clock,
                        arrive: clock + edge.weight,
                    };
                    events.push(TraceEvent {
                        time: clock,
                        agent: i,
                        kind: EventKind::Depart,
                        from: know.label(v).to_string(),
                        to: know.label(to).to_string(),
                        edge_weight: Some(edge.weight),
                        agent_total_distance: agents[i].distance,
                    });
                }
            }
        }

        let next = agents
            .iter()
            .filter_map(|a| match a.pos {
                AgentPos::Moving { arrive, .. } => Some(arrive),
                AgentPos::At(_) => None,
            })
            .min();
        let Some(next) = next else {
            // Nobody moves and the run is not finished.
            return Err(ExploreError::NonTermination { clock });
        };
        clock = next;
        if clock > limit {
            return Err(ExploreError::NonTermination { clock });
        }
        for i in 0..k {
            let AgentPos::Moving { edge, from, to, arrive, .. } = agents[i].pos else { continue };
            if arrive != clock {
                continue;
            }
            let w = know.edge(edge).weight;
            agents[i].pos = AgentPos::At(to);
            agents[i].distance += w;
            events.push(TraceEvent {
                time: clock,
                agent: i,
                kind: EventKind::Arrive,
                from: know.label(from).to_string(),
                to: know.label(to).to_string(),
                edge_weight: Some(w),
                agent_total_distance: agents[i].distance,
            });
            if !know.is_visited(to) {
                let label = know.label(to).to_string();
                let answer = oracle.reveal(&label);
                know.integrate(to, &answer, clock)?;
                discovery.push((label, clock));
            }
        }
    }

    for (i, a) in agents.iter().enumerate() {
        if a.waiting {
            events.push(TraceEvent {
                time: clock,
                agent: i,
                kind: EventKind::WaitEnd,
                from: s_label.clone(),
                to: s_label.clone(),
                edge_weight: None,
                agent_total_distance: a.distance,
            });
        }
        events.push(TraceEvent {
            time: clock,
            agent: i,
            kind: EventKind::Done,
            from: s_label.clone(),
            to: s_label.clone(),
            edge_weight: None,
            agent_total_distance: a.distance,
        });
    }

    let graph = oracle.finalize();
    check_final(&know, &graph)?;
    Ok(Exploration {
        trace: Trace {
            events,
            distances: agents.iter().map(|a| a.distance).collect(),
            completion_time: clock,
            first_visits: discovery,
        },
        graph,
    })
}

/// The committed graph must be exactly what the agents saw.
fn check_final(know: &Knowledge, g: &WeightedGraph) -> Result<(), ExploreError> {
    let fail = |msg: String| Err(ExploreError::OracleInconsistency(msg));
    if g.node_count() != know.node_count() || g.edge_count() != know.edge_count() {
        return fail(format!(
            "final graph has {} nodes / {} edges, the run saw {} / {}",
            g.node_count(),
            g.edge_count(),
            know.node_count(),
            know.edge_count()
        ));
    }
    if g.start_label() != know.label(know.start()) {
        return fail("final graph has a different start".into());
    }
    for e in &know.edges {
        let (Ok(a), Ok(b)) = (g.node(know.label(e.a)), g.node(know.label(e.b))) else {
            return fail(format!("final graph lacks {} or {}", know.label(e.a), know.label(e.b)));
        };
        match g.edge_between(a, b) {
            Some(ge) if g.edge(ge).weight == e.weight => {}
            _ => {
                return fail(format!(
                    "edge {}-{} of weight {} is not in the final graph",
                    know.label(e.a),
                    know.label(e.b),
                    e.weight
                ))
            }
        }
    }
    Ok(())
}
