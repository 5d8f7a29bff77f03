//! Symbolic models of `f: X → [0,1]`, point-level topology, small images and
//! separation of points.

mod baseset;
mod model;
mod openset;

pub use baseset::{BaseInterval, BaseSet};
pub use model::{FiberCoord, FiberKind, FiberedSpaceModel, ModelName, TopologyMode, XPoint};
pub use openset::{separate_points, small_image, FiberRange, OpenSet, Piece};
