//! One-dimensional tropical sandpile dynamics with exact arithmetic.
//!
//! States are finite break-point sets of piecewise-linear functions on
//! `[0, 1]`; dropping a grain at a smooth point shrinks the break-free
//! interval around it. All coordinates are integer numerators over a
//! common denominator, so coincidence tests — stabilization, double-point
//! merges, the position of the limit state's extra break point — are
//! exact. On top of the dynamics sit the statistics used to study how
//! the number of relaxation sweeps distributes: Monte Carlo histograms
//! and tail fits, avalanche-length laws, and dense parameter-plane scans.

pub mod config;
pub mod coord;
pub mod montecarlo;
pub mod observables;
pub mod raster;
pub mod relax;
pub mod state;

pub use config::{ConfigError, LimitCase, PointConfig};
pub use coord::{Coord, ParseCoordError};
pub use relax::{
    relax, relax_traced, sweep, MaxSweepsExceeded, RelaxResult, TraceStep, DEFAULT_MAX_SWEEPS,
};
pub use state::{BreakPoint, Component, SandpileState};
