//! Time integration of the nonlocal KPP equation on a truncated line and of the
//! drifted problem on a bounded interval.

mod cauchy;
mod frame;
mod reaction;

pub use cauchy::{
    simulate_cauchy, step_cauchy, step_cauchy_in_place, CauchyProblem, Field, TimeScheme,
    Trajectory, WindowBoundary,
};
pub use frame::{
    compatible_ramp, frame_lambda, make_admissible, relax, simulate_frame, stationary_state, step_frame,
    step_frame_in_place, uniqueness_probe, AdmissibleInitial, FrameProblem, StationaryOptions,
    StationaryOutcome, UniquenessReport,
};
pub use reaction::{KppReport, Reaction, ReactionFn, ReactionKind, KNOWN_REACTIONS};
