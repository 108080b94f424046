//! Team-based exploration machine shared by every policy.
//!
//! Agents are grouped in teams that move in lockstep. A team explores an
//! "arm": at every node it continues along the single unexplored edge, splits
//! when it finds several, and stops when the next node is already known.
//! Policies differ in how teams are launched, how movement is sequenced
//! (one exploring move at a time, or parallel with a waiting rule) and what
//! happens to leftover arms.

use std::collections::VecDeque;

use crate::engine::{ChoiceStream, Command, Knowledge, KnownEdgeId, PolicyError, View};
use crate::graph::NodeId;
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphClass {
    Cycle,
    Tadpole,
    NTadpole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Key {
    /// Weight of the next edge.
    Lightest,
    /// Distance travelled so far plus the weight of the next edge.
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ties {
    /// The tied team with the highest agent index moves.
    Last,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Movement {
    /// Exactly one exploring move at a time, chosen by smallest key.
    Token { key: Key, ties: Ties },
    /// Everybody moves except a unique team whose target distance is largest.
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Launch {
    /// One agent per direction (two on a lone edge); the rest stay in reserve.
    Singles,
    /// All agents are split across the directions of the start.
    SplitAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Leftovers {
    /// Reserve agents walk to unexplored arms while explorers pause.
    Summon,
    /// Agents whose arm is finished walk to unexplored arms in parallel.
    Reuse,
    /// A leftover arm is an error.
    Forbid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MachineConfig {
    pub class: GraphClass,
    pub movement: Movement,
    pub launch: Launch,
    pub leftovers: Leftovers,
    /// Pick which directions to take at random when a team is too small.
    pub random_branches: bool,
    /// A stopped team next to the cycle midpoint node steps onto it.
    pub meet_at_midpoint: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Job {
    /// At `node`, about to traverse `arm`.
    Ready { node: NodeId, arm: KnownEdgeId, meeting: bool },
    /// Crossing `via` towards `to`; the team reaches `arrival` distance there.
    Moving {
        to: NodeId,
        via: KnownEdgeId,
        meeting: bool,
        arrival: Rational,
    },
    /// Walking a known route to the node where `arm` starts.
    Travelling {
        route: VecDeque<KnownEdgeId>,
        arm: KnownEdgeId,
        exclusive: bool,
        in_transit: bool,
    },
    Finished,
    Reserve,
    /// No job; heads home and may be reassigned.
    Free,
}

#[derive(Debug, Clone)]
struct Team {
    members: Vec<usize>,
    job: Job,
}

#[derive(Debug, Clone)]
pub struct TeamMachine {
    name: String,
    config: MachineConfig,
    teams: Vec<Team>,
    pending: Vec<KnownEdgeId>,
    launched: bool,
}

/// Sizes of `parts` teams formed from `m` agents: equal shares, the
/// remainder joining the first team.
pub fn split_sizes(m: usize, parts: usize) -> Vec<usize> {
    let base = m / parts;
    let mut sizes = vec![base; parts];
    sizes[0] += m - base * parts;
    sizes
}

impl TeamMachine {
    pub fn new(name: impl Into<String>, config: MachineConfig) -> Self {
        TeamMachine {
            name: name.into(),
            config,
            teams: Vec::new(),
            pending: Vec::new(),
            launched: false,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    fn team_distance(&self, view: &View<'_>, t: usize) -> Rational {
        view.agents[self.teams[t].members[0]].distance
    }

    fn team_node(&self, view: &View<'_>, t: usize) -> Option<NodeId> {
        let nodes: Vec<Option<NodeId>> = self.teams[t]
            .members
            .iter()
            .map(|&a| view.agents[a].node())
            .collect();
        if nodes.iter().all(|n| *n == nodes[0]) {
            nodes[0]
        } else {
            None
        }
    }

    /// Edges some team or the leftover list already owns.
    fn claimed(&self) -> Vec<KnownEdgeId> {
        let mut out = self.pending.clone();
        for team in &self.teams {
            match &team.job {
                Job::Ready { arm, .. } => out.push(*arm),
                Job::Moving { via, .. } => out.push(*via),
                Job::Travelling { arm, .. } => out.push(*arm),
                _ => {}
            }
        }
        out
    }

    fn new_directions(&self, know: &Knowledge, v: NodeId, came_by: Option<KnownEdgeId>) -> Vec<KnownEdgeId> {
        let claimed = self.claimed();
        know.neighbors(v)
            .iter()
            .filter(|&&(u, e)| Some(e) != came_by && !know.is_visited(u) && !claimed.contains(&e))
            .map(|&(_, e)| e)
            .collect()
    }

    /// Decide which of `dirs` a team of `m` agents takes; the rest are left over.
    fn pick_directions(
        &self,
        m: usize,
        dirs: &[KnownEdgeId],
        choices: &mut ChoiceStream,
    ) -> (Vec<KnownEdgeId>, Vec<KnownEdgeId>) {
        if m >= dirs.len() {
            return (dirs.to_vec(), Vec::new());
        }
        if !self.config.random_branches {
            return (dirs[..m].to_vec(), dirs[m..].to_vec());
        }
        let mut taken = dirs.to_vec();
        let mut left = Vec::new();
        while taken.len() > m {
            let i = choices.choose(taken.len());
            left.push(taken.remove(i));
        }
        left.sort_by_key(|e| dirs.iter().position(|d| d == e));
        (taken, left)
    }

    /// Replace team `t` by sub-teams exploring `dirs` from `node`.
    fn branch(
        &mut self,
        t: usize,
        node: NodeId,
        dirs: &[KnownEdgeId],
        choices: &mut ChoiceStream,
    ) -> Result<(), PolicyError> {
        let members = self.teams[t].members.clone();
        let m = members.len();
        let (taken, left) = self.pick_directions(m, dirs, choices);
        if !left.is_empty() && self.config.leftovers == Leftovers::Forbid {
            return Err(PolicyError::InsufficientAgents(format!(
                "{m} agent(s) reached a node with {} unexplored directions",
                dirs.len()
            )));
        }
        self.pending.extend(left);
        let sizes = split_sizes(m, taken.len());
        let mut offset = 0;
        for (i, (&arm, &size)) in taken.iter().zip(&sizes).enumerate() {
            let team = Team {
                members: members[offset..offset + size].to_vec(),
                job: Job::Ready {
                    node,
                    arm,
                    meeting: false,
                },
            };
            offset += size;
            if i == 0 {
                self.teams[t] = team;
            } else {
                self.teams.push(team);
            }
        }
        Ok(())
    }

    fn launch(&mut self, view: &View<'_>, choices: &mut ChoiceStream) -> Result<(), PolicyError> {
        let know = view.knowledge;
        let s = know.start();
        let k = view.agents.len();
        let dirs: Vec<KnownEdgeId> = know.neighbors(s).iter().map(|&(_, e)| e).collect();
        let active = match self.config.launch {
            Launch::SplitAll => k,
            Launch::Singles if dirs.len() == 1 => k.min(2),
            Launch::Singles => k.min(dirs.len()),
        };
        self.teams.push(Team {
            members: (0..active).collect(),
            job: Job::Finished,
        });
        for a in active..k {
            self.teams.push(Team {
                members: vec![a],
                job: Job::Reserve,
            });
        }
        self.branch(0, s, &dirs, choices)
    }

    /// A team at `node` has nowhere new to go.
    fn stop(&mut self, know: &Knowledge, t: usize, node: NodeId, came_by: Option<KnownEdgeId>) {
        if self.config.meet_at_midpoint {
            if let Some(mid) = known_midpoint_node(know) {
                let step = know.neighbors(node).iter().find(|&&(u, e)| {
                    u == mid && Some(e) != came_by && !know.is_traversed(e) && know.is_visited(u)
                });
                if let Some(&(_, e)) = step {
                    let taken = self.teams.iter().enumerate().any(|(i, tm)| {
                        i != t
                            && matches!(tm.job, Job::Ready { arm, meeting: true, .. } | Job::Moving { via: arm, meeting: true, .. } if arm == e)
                    });
                    if !taken {
                        self.teams[t].job = Job::Ready {
                            node,
                            arm: e,
                            meeting: true,
                        };
                        return;
                    }
                }
            }
        }
        self.teams[t].job = if self.config.leftovers == Leftovers::Reuse {
            Job::Free
        } else {
            Job::Finished
        };
    }

    fn arrive(
        &mut self,
        view: &View<'_>,
        t: usize,
        node: NodeId,
        came_by: Option<KnownEdgeId>,
        choices: &mut ChoiceStream,
    ) -> Result<(), PolicyError> {
        let dirs = self.new_directions(view.knowledge, node, came_by);
        match dirs.len() {
            0 => {
                self.stop(view.knowledge, t, node, came_by);
                Ok(())
            }
            1 => {
                self.teams[t].job = Job::Ready {
                    node,
                    arm: dirs[0],
                    meeting: false,
                };
                Ok(())
            }
            _ => self.branch(t, node, &dirs, choices),
        }
    }

    fn check_class(&self, know: &Knowledge) -> Result<(), PolicyError> {
        let degrees: Vec<usize> = (0..know.node_count())
            .filter(|&v| know.is_visited(v))
            .map(|v| know.degree(v))
            .collect();
        let count = |d: usize| degrees.iter().filter(|&&x| x == d).count();
        match self.config.class {
            GraphClass::Cycle => {
                if let Some(d) = degrees.iter().find(|&&d| d != 2) {
                    return Err(PolicyError::WrongGraphClass(format!(
                        "cycle policy met a node of degree {d}"
                    )));
                }
            }
            GraphClass::Tadpole => {
                if degrees.iter().any(|&d| d > 3) || count(3) > 1 || count(1) > 1 {
                    return Err(PolicyError::WrongGraphClass(
                        "tadpole policy met a second branching or dead end".into(),
                    ));
                }
                if know.all_visited() && count(3) != 1 {
                    return Err(PolicyError::WrongGraphClass(
                        "tadpole policy explored a graph without a tail".into(),
                    ));
                }
            }
            GraphClass::NTadpole => {}
        }
        Ok(())
    }

    pub fn decide(&mut self, view: &View<'_>, choices: &mut ChoiceStream) -> Result<Vec<Command>, PolicyError> {
        let know = view.knowledge;
        let k = view.agents.len();
        self.check_class(know)?;
        if !self.launched {
            self.launched = true;
            self.launch(view, choices)?;
        }

        // Arrivals.
        for t in 0..self.teams.len() {
            match self.teams[t].job.clone() {
                Job::Moving { to, via, meeting, .. } => {
                    if self.team_node(view, t) == Some(to) {
                        if meeting {
                            self.stop_after_meeting(t);
                        } else {
                            self.arrive(view, t, to, Some(via), choices)?;
                        }
                    }
                }
                Job::Travelling {
                    mut route,
                    arm,
                    exclusive,
                    in_transit: true,
                } => {
                    if let Some(node) = self.team_node(view, t) {
                        route.pop_front();
                        self.teams[t].job = if route.is_empty() {
                            Job::Ready {
                                node,
                                arm,
                                meeting: false,
                            }
                        } else {
                            Job::Travelling {
                                route,
                                arm,
                                exclusive,
                                in_transit: false,
                            }
                        };
                    }
                }
                _ => {}
            }
        }

        // Arms closed from the other side.
        self.pending.retain(|&e| know.is_frontier(e));
        for t in 0..self.teams.len() {
            if let Job::Ready {
                node,
                arm,
                meeting: false,
            } = self.teams[t].job
            {
                if !know.is_visited(know.edge(arm).other(node)) {
                    continue;
                }
                // Anything else to do from here?
                self.teams[t].job = Job::Finished;
                self.arrive(view, t, node, None, choices)?;
            }
        }

        if know.all_visited() {
            return Ok(self.finish_meetings(view, k));
        }

        self.assign_leftovers(view)?;

        let mut commands = vec![Command::Wait; k];
        match self.config.movement {
            Movement::Token { key, ties } => self.token_moves(view, key, ties, choices),
            Movement::Parallel => self.parallel_moves(view),
        }
        for team in &self.teams {
            let cmd = match &team.job {
                Job::Moving { via, .. } => Command::Traverse(*via),
                Job::Travelling { route, .. } => Command::Traverse(route[0]),
                Job::Free => Command::Retreat,
                _ => Command::Wait,
            };
            for &a in &team.members {
                commands[a] = cmd;
            }
        }
        Ok(commands)
    }

    /// Everything is visited: a pending meeting still completes, then all
    /// agents return.
    fn finish_meetings(&mut self, view: &View<'_>, k: usize) -> Vec<Command> {
        let mut commands = vec![Command::Wait; k];
        let mut meeting = false;
        for t in 0..self.teams.len() {
            if matches!(self.teams[t].job, Job::Ready { meeting: true, .. }) {
                self.depart(view, t);
            }
            if let Job::Moving { via, meeting: true, .. } = self.teams[t].job {
                meeting = true;
                for &a in &self.teams[t].members {
                    commands[a] = Command::Traverse(via);
                }
            }
        }
        if meeting {
            commands
        } else {
            vec![Command::Retreat; k]
        }
    }

    fn stop_after_meeting(&mut self, t: usize) {
        self.teams[t].job = if self.config.leftovers == Leftovers::Reuse {
            Job::Free
        } else {
            Job::Finished
        };
    }

    fn assign_leftovers(&mut self, view: &View<'_>) -> Result<(), PolicyError> {
        let know = view.knowledge;
        while let Some(&arm) = self.pending.first() {
            let busy = self
                .teams
                .iter()
                .any(|t| matches!(t.job, Job::Travelling { exclusive: true, .. }));
            let candidate = match self.config.leftovers {
                Leftovers::Summon => {
                    if busy {
                        return Ok(());
                    }
                    match self.teams.iter().position(|t| t.job == Job::Reserve) {
                        Some(t) => t,
                        None => {
                            return Err(PolicyError::InsufficientAgents(
                                "an unexplored direction has no agent left to take it".into(),
                            ))
                        }
                    }
                }
                Leftovers::Reuse => {
                    // Agents meet before anyone backtracks.
                    let meeting = self.teams.iter().any(|t| {
                        matches!(t.job, Job::Ready { meeting: true, .. } | Job::Moving { meeting: true, .. })
                    });
                    if meeting {
                        return Ok(());
                    }
                    let mut best: Option<(Rational, usize)> = None;
                    for t in 0..self.teams.len() {
                        if self.teams[t].job == Job::Free && self.team_node(view, t).is_some() {
                            let d = self.team_distance(view, t);
                            if best.is_none_or(|(bd, _)| d < bd) {
                                best = Some((d, t));
                            }
                        }
                    }
                    match best {
                        Some((_, t)) => t,
                        None => return Ok(()),
                    }
                }
                Leftovers::Forbid => {
                    return Err(PolicyError::InsufficientAgents(
                        "an unexplored direction has no agent left to take it".into(),
                    ))
                }
            };
            self.pending.remove(0);
            let here = self.team_node(view, candidate).expect("idle team");
            let e = know.edge(arm);
            let target = if know.is_visited(e.a) { e.a } else { e.b };
            let route: VecDeque<KnownEdgeId> = know
                .shortest_route(here, target)
                .expect("known graph is connected")
                .into();
            self.teams[candidate].job = if route.is_empty() {
                Job::Ready {
                    node: here,
                    arm,
                    meeting: false,
                }
            } else {
                Job::Travelling {
                    route,
                    arm,
                    exclusive: self.config.leftovers == Leftovers::Summon,
                    in_transit: false,
                }
            };
        }
        Ok(())
    }

    fn start_travel(&mut self) {
        for team in &mut self.teams {
            if let Job::Travelling { in_transit, .. } = &mut team.job {
                *in_transit = true;
            }
        }
    }

    fn token_moves(&mut self, view: &View<'_>, key: Key, ties: Ties, choices: &mut ChoiceStream) {
        self.start_travel();
        let blocked = self.teams.iter().any(|t| {
            matches!(t.job, Job::Moving { .. } | Job::Travelling { exclusive: true, .. })
        });
        if blocked {
            return;
        }
        let know = view.knowledge;
        let mut best: Option<Rational> = None;
        let mut tied: Vec<usize> = Vec::new();
        for t in 0..self.teams.len() {
            if let Job::Ready { arm, .. } = self.teams[t].job {
                let w = know.edge(arm).weight;
                let value = match key {
                    Key::Lightest => w,
                    Key::Distance => self.team_distance(view, t) + w,
                };
                match best {
                    Some(b) if value > b => {}
                    Some(b) if value == b => tied.push(t),
                    _ => {
                        best = Some(value);
                        tied = vec![t];
                    }
                }
            }
        }
        if tied.is_empty() {
            return;
        }
        tied.sort_by_key(|&t| self.teams[t].members[0]);
        let chosen = match ties {
            Ties::Last => *tied.last().unwrap(),
            Ties::Random => tied[choices.choose(tied.len())],
        };
        self.depart(view, chosen);
    }

    fn depart(&mut self, view: &View<'_>, t: usize) {
        let Job::Ready { node, arm, meeting } = self.teams[t].job else {
            return;
        };
        let know = view.knowledge;
        let edge = know.edge(arm);
        self.teams[t].job = Job::Moving {
            to: edge.other(node),
            via: arm,
            meeting,
            arrival: self.team_distance(view, t) + edge.weight,
        };
    }

    fn parallel_moves(&mut self, view: &View<'_>) {
        self.start_travel();
        let know = view.knowledge;
        let keys: Vec<Option<Rational>> = (0..self.teams.len())
            .map(|t| match self.teams[t].job {
                Job::Ready { arm, .. } => Some(self.team_distance(view, t) + know.edge(arm).weight),
                Job::Moving { arrival, .. } => Some(arrival),
                _ => None,
            })
            .collect();
        let active = keys.iter().filter(|k| k.is_some()).count();
        for t in 0..self.teams.len() {
            if !matches!(self.teams[t].job, Job::Ready { .. }) {
                continue;
            }
            let mine = keys[t].unwrap();
            let strict_max = keys
                .iter()
                .enumerate()
                .all(|(u, k)| u == t || k.is_none_or(|k| k < mine));
            if active >= 2 && strict_max {
                continue;
            }
            self.depart(view, t);
        }
    }
}

/// Node diametrically opposite the cycle's reference point, when the cycle
/// is fully known and the midpoint falls on a node.
pub fn known_midpoint_node(know: &Knowledge) -> Option<NodeId> {
    let n = know.node_count();
    let mut degree: Vec<usize> = (0..n).map(|v| know.neighbors(v).len()).collect();
    let mut removed = vec![false; n];
    let mut queue: Vec<NodeId> = (0..n).filter(|&v| degree[v] <= 1).collect();
    while let Some(v) = queue.pop() {
        if removed[v] {
            continue;
        }
        removed[v] = true;
        for &(u, _) in know.neighbors(v) {
            if !removed[u] {
                degree[u] -= 1;
                if degree[u] == 1 {
                    queue.push(u);
                }
            }
        }
    }
    if removed.iter().all(|&r| r) {
        return None;
    }
    // Entry point: nearest remaining node to the start.
    let dist = know.distances_from(know.start());
    let reference = (0..n)
        .filter(|&v| !removed[v])
        .min_by_key(|&v| dist[v])?;
    let mut order = vec![(reference, Rational::ZERO)];
    let mut prev = None;
    let mut cur = reference;
    let mut acc = Rational::ZERO;
    loop {
        let &(next, e) = know
            .neighbors(cur)
            .iter()
            .find(|&&(u, e)| !removed[u] && Some(e) != prev)?;
        acc += know.edge(e).weight;
        if next == reference {
            break;
        }
        order.push((next, acc));
        prev = Some(e);
        cur = next;
    }
    let half = acc / Rational::integer(2);
    order.into_iter().find(|&(_, d)| d == half).map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitter_gives_remainder_to_first_team() {
        assert_eq!(split_sizes(8, 3), vec![4, 2, 2]);
        assert_eq!(split_sizes(4, 2), vec![2, 2]);
        assert_eq!(split_sizes(4, 3), vec![2, 1, 1]);
        assert_eq!(split_sizes(1, 1), vec![1]);
    }
}
