//! A clairvoyant policy that walks precomputed closed walks. Useful as a
//! baseline: against any oracle committing to the same graph its cost is the
//! offline makespan.

use crate::engine::{ChoiceStream, Command, PolicyError, StrategyPolicy, View};

#[derive(Debug, Clone)]
pub struct ReplayPolicy {
    walks: Vec<Vec<String>>,
    next: Vec<usize>,
}

impl ReplayPolicy {
    /// One label sequence per agent, each starting and ending at the start node.
    pub fn new(walks: Vec<Vec<String>>) -> Self {
        let next = vec![1; walks.len()];
        ReplayPolicy { walks, next }
    }
}

impl StrategyPolicy for ReplayPolicy {
    fn name(&self) -> String {
        "replay".into()
    }

    fn decide(&mut self, view: &View<'_>, _choices: &mut ChoiceStream) -> Result<Vec<Command>, PolicyError> {
        let know = view.knowledge;
        let mut out = vec![Command::Wait; view.agents.len()];
        for (i, agent) in view.agents.iter().enumerate() {
            let (Some(v), Some(walk)) = (agent.node(), self.walks.get(i)) else {
                continue;
            };
            let Some(target) = walk.get(self.next[i]) else {
                continue;
            };
            let edge = know
                .neighbors(v)
                .iter()
                .find(|&&(u, _)| know.label(u) == target)
                .map(|&(_, e)| e)
                .ok_or_else(|| {
                    PolicyError::WrongGraphClass(format!("replayed walk expects an edge {} - {target}", know.label(v)))
                })?;
            self.next[i] += 1;
            out[i] = Command::Traverse(edge);
        }
        Ok(out)
    }
}
