//! Closed-form states: the stationary solutions and the periodic activities
//! under the piecewise threshold, with their density reconstructions.

mod characteristics;
mod families;
mod profile;
mod stationary;

pub use characteristics::{
    density_from_activity, sample_times, verify, verify_boundary, verify_mass, Characteristics,
    VerificationReport, TAIL,
};
pub use families::{
    build, build_class_flat, build_class_one, build_class_two, class_flat_condition,
    class_flat_plateau_end, class_flat_profile, class_two_condition, class_two_displayed_condition,
    class_two_min_period, class_two_period, class_two_profile, cross_check_roots, f_eval, g_eval,
    Construction, Family, FamilyRoots, RootCrossCheck, BRACKET_PROBES,
};
pub use profile::{PeriodicProfile, Segment, SegmentForm};
pub use stationary::{
    linear_stationary_profile, n_minus_plus, n_star, steady_state_nonlinear, StationaryProfile,
};

/// `N(t)` of the periodic extension, right-continuous at jumps.
pub fn eval_profile(profile: &PeriodicProfile, t: f64) -> f64 {
    profile.eval(t)
}
