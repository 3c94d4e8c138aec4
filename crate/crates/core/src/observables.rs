//! Derived quantities: relaxation length, exact locus areas for two
//! grains, mirror symmetry and the avalanche interval.

use std::error::Error;
use std::fmt;

use num_rational::Ratio;

use crate::config::PointConfig;
use crate::coord::Coord;
use crate::relax::{relax, MaxSweepsExceeded, DEFAULT_MAX_SWEEPS};

/// The number of sweeps a relaxation of the configuration needs.
pub fn length_of_relaxation(cfg: &PointConfig) -> Result<u64, MaxSweepsExceeded> {
    Ok(relax(cfg, DEFAULT_MAX_SWEEPS)?.sweeps)
}

/// Diagnostic re-verification that a reported length is minimal: the state
/// after `len` sweeps is the limit and the state after `len - 1` is not.
/// Costs a full replay; meant for tests, not production loops.
pub fn verify_minimal_length(cfg: &PointConfig, len: u64) -> bool {
    use crate::relax::sweep;
    use crate::state::SandpileState;

    let limit = cfg.limit_state();
    let mut state = SandpileState::new();
    for k in 0..len {
        if k == len - 1 && state == limit {
            return false; // reached the limit too early
        }
        sweep(&mut state, cfg);
    }
    state == limit
}

/// Exact area of the locus of two-grain configurations with relaxation
/// length `n`: `1/4` for `n = 1` and
/// `3 (9n^2 - 18n + 7) / ((3n-1)(3n-2)(3n-4)(3n-5))` for `n >= 2`.
///
/// Panics if `n == 0`.
pub fn n2_locus_area(n: u64) -> Ratio<u128> {
    assert!(n >= 1, "relaxation length starts at 1");
    if n == 1 {
        return Ratio::new(1, 4);
    }
    let n = n as u128;
    let numer = 3 * (9 * n * n - 18 * n + 7);
    let denom = (3 * n - 1) * (3 * n - 2) * (3 * n - 4) * (3 * n - 5);
    Ratio::new(numer, denom)
}

/// The reflected configuration `(1 - p_1, ..., 1 - p_n)`; the relaxation
/// length is invariant under this reflection.
pub fn mirror(cfg: &PointConfig) -> PointConfig {
    PointConfig::new(cfg.points().iter().map(Coord::mirror).collect())
        .expect("reflection preserves validity")
}

/// The open interval over which the limit state changes when one more
/// grain is dropped: `(0, q)` if the new grain falls left of `q`,
/// `(q, 1)` if right, where `q` is the fractional part of minus the sum
/// of the previous grains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AvalancheInterval {
    pub lo: Coord,
    pub hi: Coord,
    /// Set when `q = 0`: the dichotomy degenerates and the avalanche
    /// spans the whole domain.
    pub q_is_integral: bool,
}

impl AvalancheInterval {
    /// Exact interval length.
    pub fn length(&self) -> Ratio<u64> {
        self.hi.to_ratio() - self.lo.to_ratio()
    }
}

/// The new grain coincides with `q`, where the avalanche interval is not
/// defined (a measure-zero configuration).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegenerateConfiguration {
    pub q: Coord,
}

impl fmt::Display for DegenerateConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "new grain coincides with q = {}", self.q)
    }
}

impl Error for DegenerateConfiguration {}

/// Avalanche interval of dropping `p_new` onto the limit of `cfg`.
///
/// `p_new` must be interior; `p_new = q` is rejected as degenerate.
pub fn avalanche_interval(
    cfg: &PointConfig,
    p_new: Coord,
) -> Result<AvalancheInterval, DegenerateConfiguration> {
    assert!(p_new.is_interior(), "new grain must lie in (0, 1)");
    let q = cfg.fractional_q();
    if p_new == q {
        return Err(DegenerateConfiguration { q });
    }
    let den = q.den();
    if p_new < q {
        Ok(AvalancheInterval {
            lo: Coord::zero(den),
            hi: q,
            q_is_integral: false,
        })
    } else {
        Ok(AvalancheInterval {
            lo: q,
            hi: Coord::one(den),
            q_is_integral: q.num() == 0,
        })
    }
}
