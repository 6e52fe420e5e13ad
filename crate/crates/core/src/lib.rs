pub mod galois;
pub mod codec;
pub mod resilience;
pub mod bandwidth;
pub mod scheduler;
pub mod store;
pub mod anchors;
pub mod cli;
