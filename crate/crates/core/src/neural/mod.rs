//! Feedforward networks and the agents that explore with them.

mod agents;
mod mlp;
mod train;

pub use agents::{
    dropout_choose, neural_greedy_choose, param_noise_adapt, param_noise_choose, perturb,
    BootstrapAgent, Exploration, NeuralGreedyAgent, NeuralLinearAgent, ParamNoiseAgent,
    ParamNoiseState, PARAM_NOISE_ADAPT_FACTOR, PARAM_NOISE_PROBE_WINDOW,
};
pub use mlp::{Architecture, Batch, DropoutMasks, ForwardPass, Gradient, Mlp};
pub use train::{
    sample_batch, LrPolicy, RmsProp, Trainer, TrainingSchedule, DEFAULT_BATCH_SIZE, RMSPROP_DECAY,
    RMSPROP_EPS,
};
