//! Certified high-precision computation of Kempner-type sums K(b,E): the sum
//! of reciprocals of positive integers whose base-b digits avoid an excluded
//! set E.  All real-valued results are balls (midpoint + radius) guaranteed to
//! contain the true value; all moments are exact rationals.

pub mod asymptotics;
pub mod ball;
pub mod engine;
mod error;
pub mod measure;
pub mod moments;
pub mod problem;
pub mod specfun;
pub mod verify;

pub use ball::{Ball, Dyadic, Precision};
pub use error::Error;
pub use problem::{make_problem, ProblemSpec};
