//! Regime classification and diagnostics for simulated activity traces.

mod desync;
mod diagnostics;
mod regime;
mod scan;

pub use desync::{desync_certificate, DesyncCertificate};
pub use diagnostics::{
    convergence_rate, crossing_check, flux_residual, profile_threshold_velocity, ContractionReport,
    CrossingReport, FluxReport, LOCK_TOL,
};
pub use regime::{
    classify_trace, detect_jumps, estimate_period, log_distance_slope, ClassifyParams, Jump,
    Regime, RegimeReport,
};
pub use scan::{
    scan_connectivity, scan_parameter, Critical, ScanParam, ScanRow, ScanSettings, ScanTable,
};
