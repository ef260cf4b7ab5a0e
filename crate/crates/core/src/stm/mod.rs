//! The segmented topic model: stores contain baskets, basket mixtures are
//! Pitman-Yor draws around their store's mixture.

pub mod chains;
pub mod config;
pub mod estimate;
pub mod sampler;
pub mod simulate;
pub mod state;

pub use chains::{refit_fixed_topics, run_chains, ChainRun, RefitConfig, RefitRun, Trace};
pub use config::{sample_schedule, Hyper, StmConfig};
pub use estimate::{nu_hat, phi_hat, theta_hat, PosteriorSample};
pub use sampler::{init_state, BlockGibbs, TopicTerms};
pub use simulate::{simulate, Simulation, SimulationSpec, SimulationTruth};
pub use state::{SamplerState, TokenLayout};
