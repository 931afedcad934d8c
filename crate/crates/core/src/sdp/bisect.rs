use alloc::boxed::Box;
use alloc::vec::Vec;

use super::{feasibility_solve, AffineLmi, Assignment, LmiSolution, SdpError, SolverOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct AlphaSolution {
    pub alpha: f64,
    pub solution: LmiSolution,
}

/// Largest `α ∈ [lo, hi]`, to within `tol`, for which the system produced by
/// `builder(α)` is feasible. Feasibility is assumed to be an interval in `α`
/// starting at `lo`.
///
/// An undecided solve counts as infeasible. Errors returned by `builder`
/// propagate unchanged.
pub fn maximize_alpha<F>(
    builder: F,
    lo: f64,
    hi: f64,
    tol: f64,
    opts: &SolverOptions,
    start: Option<&Assignment>,
) -> Result<AlphaSolution, SdpError>
where
    F: Fn(f64) -> Result<Vec<AffineLmi>, SdpError>,
{
    if !(lo >= 0.0 && hi > lo && tol > 0.0 && hi.is_finite()) {
        return Err(SdpError::InvalidRange { lo, hi, tol });
    }
    let solve = |alpha: f64, hint: Option<&Assignment>| -> Result<Result<LmiSolution, SdpError>, SdpError> {
        let system = builder(alpha)?;
        Ok(feasibility_solve(&system, opts, hint))
    };

    let mut best = match solve(lo, start)? {
        Ok(sol) => sol,
        Err(e) => return Err(SdpError::InfeasibleAtLower(Box::new(e))),
    };
    if let Ok(sol) = solve(hi, Some(&best.assignment))? {
        return Ok(AlphaSolution { alpha: hi, solution: sol });
    }

    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        match solve(mid, Some(&best.assignment))? {
            Ok(sol) => {
                a = mid;
                best = sol;
            }
            Err(e) => {
                log::trace!("alpha {mid} rejected: {e}");
                b = mid;
            }
        }
    }
    Ok(AlphaSolution { alpha: a, solution: best })
}
