//! Exact rational scalars and piecewise-linear calculus on `[0, 1]`.

mod pl;
mod rational;

pub use pl::{Breakpoint, EndpointsMode, PlFunction, Side};
pub(crate) use pl::RangeAcc;
pub use rational::{q, Rational};
