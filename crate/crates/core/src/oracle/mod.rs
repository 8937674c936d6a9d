//! Independent numerical references: Monte Carlo simulation of every metric,
//! inverse-cdf sampling and brute-force convolution.

mod convolve;
pub mod exec;
mod mc;
mod sampler;
pub mod testkit;

pub use convolve::numeric_convolve;
pub use exec::Exec;
pub use mc::{mc_metric, McEstimate, McScenario, RngConfig};
pub use sampler::Sampler;
