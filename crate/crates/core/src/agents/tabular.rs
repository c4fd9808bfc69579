use std::collections::BTreeMap;

use crate::interaction::{
    Action, ActionDist, Agent, AgentFault, EnvSpec, EpisodeOutcome, Interface, Move,
    Observation, Step, Task, TaskView,
};

const MOVES: [Move; 2] = [Move::Back, Move::Forward];

/// Epsilon-greedy Q-learner over chain positions.
///
/// Values start optimistic at `q_init`; ties go to `Back`, so an untrained
/// learner never reaches the goal. During training the exploration rate for
/// the k-th learning episode is `eps0 / (1 + k)`; evaluation is greedy.
#[derive(Debug, Clone)]
pub struct TabularLearner {
    q: BTreeMap<(usize, Move), f64>,
    episodes_seen: u64,
    training: bool,
    pub alpha: f64,
    pub eps0: f64,
    pub q_init: f64,
}

impl Default for TabularLearner {
    fn default() -> Self {
        TabularLearner {
            q: BTreeMap::new(),
            episodes_seen: 0,
            training: false,
            alpha: 0.5,
            eps0: 0.5,
            q_init: 0.5,
        }
    }
}

impl TabularLearner {
    pub fn value(&self, state: usize, m: Move) -> f64 {
        self.q.get(&(state, m)).copied().unwrap_or(self.q_init)
    }

    pub fn greedy(&self, state: usize) -> Move {
        let mut best = MOVES[0];
        for m in &MOVES[1..] {
            if self.value(state, *m) > self.value(state, best) {
                best = *m;
            }
        }
        best
    }

    pub fn epsilon(&self) -> f64 {
        self.eps0 / (1.0 + self.episodes_seen as f64)
    }

    fn learn(&mut self, state: usize, m: Move, target: f64) {
        let q = self.value(state, m);
        self.q.insert((state, m), q + self.alpha * (target - q));
    }
}

fn position(obs: &Observation) -> Option<usize> {
    match obs {
        Observation::Position(p) => Some(*p),
        _ => None,
    }
}

impl Agent for TabularLearner {
    fn kind(&self) -> &str {
        "tabular-learner"
    }

    fn act(&self, _view: &TaskView, _steps: &[Step], obs: &Observation) -> Result<ActionDist, AgentFault> {
        let Some(state) = position(obs) else {
            return Err(AgentFault(format!("tabular learner cannot read {obs:?}")));
        };
        let greedy = self.greedy(state);
        if !self.training {
            return Ok(ActionDist::point(Action::Move(greedy)));
        }
        let eps = self.epsilon();
        let other = if greedy == Move::Back { Move::Forward } else { Move::Back };
        Ok(ActionDist::Finite(vec![
            (Action::Move(greedy), 1.0 - eps / 2.0),
            (Action::Move(other), eps / 2.0),
        ]))
    }

    fn update(&mut self, task: &Task, outcome: &EpisodeOutcome) -> usize {
        let mut written = 0;
        for (leaf, seg) in task.leaves().iter().zip(&outcome.history.segments) {
            let EnvSpec::Mdp(chain) = &leaf.env else { continue };
            let goal = chain.goal();
            let n = seg.steps.len();
            for (t, step) in seg.steps.iter().enumerate() {
                let (Some(s), Action::Move(m)) = (position(&step.observation), &step.action) else {
                    continue;
                };
                if *m == Move::Shortcut {
                    continue;
                }
                let next = if t + 1 < n {
                    position(&seg.steps[t + 1].observation)
                } else {
                    seg.final_observation.as_ref().and_then(position)
                };
                let Some(s2) = next else { continue };
                let reached = s2 == goal;
                let terminal = reached || t + 1 == n;
                let reward = if reached { 1.0 } else { 0.0 };
                let bootstrap = if terminal {
                    0.0
                } else {
                    MOVES.iter().map(|a| self.value(s2, *a)).fold(f64::MIN, f64::max)
                };
                self.learn(s, *m, reward + bootstrap);
                written += 1;
            }
        }
        self.episodes_seen += 1;
        written
    }

    fn set_training(&mut self, on: bool) {
        self.training = on;
    }

    fn is_deterministic(&self) -> bool {
        !self.training
    }

    fn supports(&self, interface: Interface) -> bool {
        interface == Interface::Chain
    }

    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }
}
