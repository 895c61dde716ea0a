//! Richardson-Gaudin equations: residuals, Newton solver, continuation and the two-level case.

pub mod continuation;
pub mod io;
pub mod mapping;
pub mod residual;
pub mod solve;
pub mod su2;

use num_complex::Complex;

pub use continuation::{
    continue_in_l, continue_in_p, decaying_candidates, init_steady_state_guess, multistart, radial_deviation,
    slowest_decaying_state, solve_steady_state, steady_state_path, Continued, PathPoint,
};
pub use io::{ReIm, SolutionRecord};
pub use mapping::RGMappingConstants;
pub use residual::{
    eigenvalue_from_q, eigenvalue_from_x, jacobian_su2, jacobian_su3, residual_su2, residual_su3, residual_sun_general,
    QSystem,
};
pub use solve::{solve, solve_q, solve_x, SolverOptions, SpectralSolution};
pub use su2::{collective_spin_shift_check, heine_stieltjes, su2_spectrum, ShiftSectorReport, Su2Sector};

use crate::error::Result;
use crate::model::LiouvParams;
use crate::scalar::Real;

/// Liouvillian eigenvalue of a root set, evaluated in rational variables for three levels.
pub fn eigenvalue_from_solution<T: Real>(sol: &SpectralSolution<T>, params: &LiouvParams<T>) -> Result<Complex<T>> {
    if params.n_levels == 3 {
        eigenvalue_from_x(&sol.e(), &sol.w(), params, &sol.sector)
    } else {
        let last = sol.q.len() - 1;
        Ok(eigenvalue_from_q(&sol.q[0], &sol.q[last], params, &sol.sector))
    }
}
