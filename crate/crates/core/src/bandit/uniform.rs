use rand::Rng;

use super::{Agent, Context, Observation, SimRng};

/// Picks every action with equal probability.
#[derive(Debug, Clone)]
pub struct UniformAgent {
    name: String,
    num_actions: usize,
}

impl UniformAgent {
    pub fn new(num_actions: usize) -> Self {
        assert!(num_actions >= 1, "uniform agent needs at least one action");
        UniformAgent {
            name: "Uniform".to_string(),
            num_actions,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

impl Agent for UniformAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn choose(&mut self, _context: &Context, rng: &mut SimRng) -> usize {
        rng.random_range(0..self.num_actions)
    }

    fn observe(&mut self, _obs: &Observation) {}
}
