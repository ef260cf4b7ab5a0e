pub mod corpus;
pub mod error;
pub mod eval;
pub mod geo;
pub mod lgpr;
pub mod pdp;
pub mod pipeline;
pub mod rng;
pub mod stm;
pub mod summary;
