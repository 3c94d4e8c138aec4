//! Sweep-based relaxation to the stable state.
//!
//! A sweep topples at every grain point in tuple order. Each topple that
//! is not the identity strictly raises the function somewhere, and the
//! relaxation stabilizes after finitely many sweeps; the first change-free
//! sweep certifies that every grain point lies on the hypersurface. The
//! stopping rule is purely operational — it never consults the closed-form
//! limit state, so the two constructions can be checked against each other.

use std::error::Error;
use std::fmt;

use crate::config::PointConfig;
use crate::state::SandpileState;

/// Guard for runaway relaxations. Stabilization is guaranteed for valid
/// input, so tripping the guard indicates a bug or a hostile state; the
/// default is generous.
pub const DEFAULT_MAX_SWEEPS: u64 = 10_000_000;

/// One toppling application within a traced relaxation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    /// Index into the configuration tuple of the point applied.
    pub point_index: usize,
    /// Whether this application changed the state.
    pub changed: bool,
    /// The state after the application.
    pub state: SandpileState,
}

/// Outcome of a finished relaxation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelaxResult {
    pub final_state: SandpileState,
    /// The number of sweeps that changed the state; the minimal sweep
    /// count taking the zero series to the limit.
    pub sweeps: u64,
    /// Every toppling application in order, including the change-free
    /// confirmation sweep. `None` unless tracing was requested.
    pub trace: Option<Vec<TraceStep>>,
}

/// The relaxation exceeded its sweep budget; carries the state reached
/// for diagnosis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxSweepsExceeded {
    pub max_sweeps: u64,
    pub state: SandpileState,
}

impl fmt::Display for MaxSweepsExceeded {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(
            f,
            "relaxation did not stabilize within {} sweeps (state has {} break points)",
            self.max_sweeps,
            self.state.points().len()
        )
    }
}

impl Error for MaxSweepsExceeded {}

/// Topples once at every configuration point in tuple order; returns
/// whether any application changed the state.
pub fn sweep(state: &mut SandpileState, cfg: &PointConfig) -> bool {
    let mut changed = false;
    for &p in cfg.points() {
        changed |= state.topple_in_place(p);
    }
    changed
}

fn sweep_traced(state: &mut SandpileState, cfg: &PointConfig, trace: &mut Vec<TraceStep>) -> bool {
    let mut changed = false;
    for (point_index, &p) in cfg.points().iter().enumerate() {
        let step_changed = state.topple_in_place(p);
        changed |= step_changed;
        trace.push(TraceStep {
            point_index,
            changed: step_changed,
            state: state.clone(),
        });
    }
    changed
}

/// Relaxes the zero series under the configuration until a change-free
/// sweep certifies stabilization.
pub fn relax(cfg: &PointConfig, max_sweeps: u64) -> Result<RelaxResult, MaxSweepsExceeded> {
    let mut state = SandpileState::new();
    let mut sweeps = 0u64;
    loop {
        if !sweep(&mut state, cfg) {
            return Ok(RelaxResult {
                final_state: state,
                sweeps,
                trace: None,
            });
        }
        sweeps += 1;
        if sweeps > max_sweeps {
            return Err(MaxSweepsExceeded {
                max_sweeps,
                state,
            });
        }
    }
}

/// Like [`relax`], recording every toppling application.
pub fn relax_traced(cfg: &PointConfig, max_sweeps: u64) -> Result<RelaxResult, MaxSweepsExceeded> {
    let mut state = SandpileState::new();
    let mut trace = Vec::new();
    let mut sweeps = 0u64;
    loop {
        if !sweep_traced(&mut state, cfg, &mut trace) {
            return Ok(RelaxResult {
                final_state: state,
                sweeps,
                trace: Some(trace),
            });
        }
        sweeps += 1;
        if sweeps > max_sweeps {
            return Err(MaxSweepsExceeded {
                max_sweeps,
                state,
            });
        }
    }
}
