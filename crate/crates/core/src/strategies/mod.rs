//! Online exploration policies.

mod machine;
mod replay;

use std::fmt;
use std::str::FromStr;

use crate::engine::{ChoiceStream, Command, PolicyError, StrategyPolicy, View};

pub use machine::{
    known_midpoint_node, split_sizes, GraphClass, Key, Launch, Leftovers, MachineConfig, Movement, TeamMachine,
    Ties,
};
pub use replay::ReplayPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyId {
    AleCycle2,
    AleTadpole,
    AmpCycle2,
    AmpTadpole2Random,
    AmpTadpole3,
    AmpTadpole4,
    NTadpoleNPlus2,
    NTadpoleExp,
}

impl PolicyId {
    pub const ALL: [PolicyId; 8] = [
        PolicyId::AleCycle2,
        PolicyId::AleTadpole,
        PolicyId::AmpCycle2,
        PolicyId::AmpTadpole2Random,
        PolicyId::AmpTadpole3,
        PolicyId::AmpTadpole4,
        PolicyId::NTadpoleNPlus2,
        PolicyId::NTadpoleExp,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PolicyId::AleCycle2 => "ale-cycle",
            PolicyId::AleTadpole => "ale-tadpole",
            PolicyId::AmpCycle2 => "amp-cycle",
            PolicyId::AmpTadpole2Random => "amp-tad2",
            PolicyId::AmpTadpole3 => "amp-tad3",
            PolicyId::AmpTadpole4 => "amp-tad4",
            PolicyId::NTadpoleNPlus2 => "ntad-nplus2",
            PolicyId::NTadpoleExp => "ntad-exp",
        }
    }

    /// Whether runs consume random choices.
    pub fn is_randomized(&self) -> bool {
        matches!(self, PolicyId::AleCycle2 | PolicyId::AleTadpole | PolicyId::AmpTadpole2Random)
    }

    /// Agent count used when none is given.
    pub fn default_agents(&self) -> usize {
        match self {
            PolicyId::AleCycle2 | PolicyId::AmpCycle2 | PolicyId::AmpTadpole2Random => 2,
            PolicyId::AleTadpole | PolicyId::AmpTadpole3 => 3,
            PolicyId::AmpTadpole4 | PolicyId::NTadpoleNPlus2 => 4,
            PolicyId::NTadpoleExp => 8,
        }
    }

    pub fn graph_class(&self) -> GraphClass {
        match self {
            PolicyId::AleCycle2 | PolicyId::AmpCycle2 => GraphClass::Cycle,
            PolicyId::NTadpoleNPlus2 | PolicyId::NTadpoleExp => GraphClass::NTadpole,
            _ => GraphClass::Tadpole,
        }
    }

    /// Builds a fresh policy for `k` agents.
    pub fn build(&self, k: usize) -> Result<Box<dyn StrategyPolicy>, PolicyError> {
        Ok(Box::new(match self {
            PolicyId::AleCycle2 => ale_cycle_policy(k)?,
            PolicyId::AleTadpole => ale_tadpole_policy(k)?,
            PolicyId::AmpCycle2 => amp_cycle_policy(k)?,
            PolicyId::AmpTadpole2Random => amp_tadpole2_policy(k)?,
            PolicyId::AmpTadpole3 => amp_tadpole3_policy(k)?,
            PolicyId::AmpTadpole4 => amp_tadpole4_policy(k)?,
            PolicyId::NTadpoleNPlus2 => ntad_nplus2_policy(k)?,
            PolicyId::NTadpoleExp => ntad_exp_policy(k)?,
        }))
    }
}

impl fmt::Display for PolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let id = match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "ale" | "ale-cycle" => PolicyId::AleCycle2,
            "ale-tadpole" | "ale-tad" => PolicyId::AleTadpole,
            "amp" | "amp-cycle" => PolicyId::AmpCycle2,
            "amp-tad2" | "amp-tadpole2" => PolicyId::AmpTadpole2Random,
            "amp-tad3" | "amp-tadpole3" => PolicyId::AmpTadpole3,
            "amp-tad4" | "amp-tadpole4" => PolicyId::AmpTadpole4,
            "ntad-nplus2" | "nplus2" => PolicyId::NTadpoleNPlus2,
            "ntad-exp" | "exp" => PolicyId::NTadpoleExp,
            other => {
                let names: Vec<&str> = PolicyId::ALL.iter().map(|p| p.name()).collect();
                return Err(format!("unknown strategy `{other}` (known: {})", names.join(", ")));
            }
        };
        Ok(id)
    }
}

/// A [`TeamMachine`] wrapped as a [`StrategyPolicy`].
#[derive(Debug, Clone)]
pub struct MachinePolicy(TeamMachine);

impl MachinePolicy {
    pub fn new(name: &str, config: MachineConfig) -> Self {
        MachinePolicy(TeamMachine::new(name, config))
    }
}

impl StrategyPolicy for MachinePolicy {
    fn name(&self) -> String {
        self.0.name().to_string()
    }

    fn decide(&mut self, view: &View<'_>, choices: &mut ChoiceStream) -> Result<Vec<Command>, PolicyError> {
        self.0.decide(view, choices)
    }
}

fn require(k: usize, min: usize, max: Option<usize>, name: &str) -> Result<(), PolicyError> {
    if k < min {
        return Err(PolicyError::InsufficientAgents(format!(
            "{name} needs at least {min} agents, got {k}"
        )));
    }
    if let Some(max) = max {
        if k > max {
            return Err(PolicyError::InsufficientAgents(format!(
                "{name} is defined for at most {max} agents, got {k}"
            )));
        }
    }
    Ok(())
}

/// Two agents, opposite directions; the one facing the lighter edge moves.
pub fn ale_cycle_policy(k: usize) -> Result<MachinePolicy, PolicyError> {
    require(k, 2, Some(2), "ale-cycle")?;
    Ok(MachinePolicy::new(
        "ale-cycle",
        MachineConfig {
            class: GraphClass::Cycle,
            movement: Movement::Token {
                key: Key::Lightest,
                ties: Ties::Random,
            },
            launch: Launch::Singles,
            leftovers: Leftovers::Forbid,
            random_branches: false,
            meet_at_midpoint: false,
        },
    ))
}

/// Lightest-edge exploration of a tadpole with three or four agents.
pub fn ale_tadpole_policy(k: usize) -> Result<MachinePolicy, PolicyError> {
    require(k, 3, Some(4), "ale-tadpole")?;
    Ok(MachinePolicy::new(
        "ale-tadpole",
        MachineConfig {
            class: GraphClass::Tadpole,
            movement: Movement::Token {
                key: Key::Lightest,
                ties: Ties::Random,
            },
            launch: if k == 3 { Launch::Singles } else { Launch::SplitAll },
            leftovers: if k == 3 { Leftovers::Summon } else { Leftovers::Forbid },
            random_branches: false,
            meet_at_midpoint: false,
        },
    ))
}

/// Two agents; the one with the smaller distance-after-next-edge moves,
/// ties going to the second agent.
pub fn amp_cycle_policy(k: usize) -> Result<MachinePolicy, PolicyError> {
    require(k, 2, Some(2), "amp-cycle")?;
    Ok(MachinePolicy::new(
        "amp-cycle",
        MachineConfig {
            class: GraphClass::Cycle,
            movement: Movement::Token {
                key: Key::Distance,
                ties: Ties::Last,
            },
            launch: Launch::Singles,
            leftovers: Leftovers::Forbid,
            random_branches: false,
            meet_at_midpoint: false,
        },
    ))
}

/// Two agents on a tadpole with random branch choices and reuse of agents
/// whose arm is finished.
pub fn amp_tadpole2_policy(k: usize) -> Result<MachinePolicy, PolicyError> {
    require(k, 2, Some(2), "amp-tad2")?;
    Ok(MachinePolicy::new(
        "amp-tad2",
        MachineConfig {
            class: GraphClass::Tadpole,
            movement: Movement::Token {
                key: Key::Distance,
                ties: Ties::Last,
            },
            launch: Launch::Singles,
            leftovers: Leftovers::Reuse,
            random_branches: true,
            meet_at_midpoint: true,
        },
    ))
}

fn sequential_with_reserve(name: &str, class: GraphClass) -> MachinePolicy {
    MachinePolicy::new(
        name,
        MachineConfig {
            class,
            movement: Movement::Token {
                key: Key::Distance,
                ties: Ties::Last,
            },
            launch: Launch::Singles,
            leftovers: Leftovers::Summon,
            random_branches: false,
            meet_at_midpoint: true,
        },
    )
}

/// Three agents, one exploring move at a time, spare agent summoned to the
/// intersection.
pub fn amp_tadpole3_policy(k: usize) -> Result<MachinePolicy, PolicyError> {
    require(k, 3, Some(3), "amp-tad3")?;
    Ok(sequential_with_reserve("amp-tad3", GraphClass::Tadpole))
}

/// `n + 2` agents on an n-tadpole; same discipline as the three-agent policy.
pub fn ntad_nplus2_policy(k: usize) -> Result<MachinePolicy, PolicyError> {
    require(k, 2, None, "ntad-nplus2")?;
    Ok(sequential_with_reserve("ntad-nplus2", GraphClass::NTadpole))
}

fn parallel_teams(name: &str, class: GraphClass) -> MachinePolicy {
    MachinePolicy::new(
        name,
        MachineConfig {
            class,
            movement: Movement::Parallel,
            launch: Launch::SplitAll,
            leftovers: Leftovers::Forbid,
            random_branches: false,
            meet_at_midpoint: false,
        },
    )
}

/// Four agents moving in parallel teams; only a unique farthest team waits.
pub fn amp_tadpole4_policy(k: usize) -> Result<MachinePolicy, PolicyError> {
    require(k, 4, Some(4), "amp-tad4")?;
    Ok(parallel_teams("amp-tad4", GraphClass::Tadpole))
}

/// `2^(n+1)` agents on an n-tadpole, teams halving at every intersection.
pub fn ntad_exp_policy(k: usize) -> Result<MachinePolicy, PolicyError> {
    require(k, 1, None, "ntad-exp")?;
    Ok(parallel_teams("ntad-exp", GraphClass::NTadpole))
}
