//! Empirical checks of the regularity estimates: sub-Gaussian heat kernel
//! fits, local lower estimates of killed kernels, oscillation decay,
//! parabolic and elliptic Harnack inequalities, and JSON reporting.

pub mod checks;
mod geometry;
mod harnack;
mod hke;
mod lle;
mod oscillation;
mod phi;
mod report;

pub use geometry::{
    evolve_on, oscillation, time_samples, AnisotropicCylinder, KilledSetup, ProductGeometry,
};
pub use harnack::{
    harnack_holder_main, holder_fit, ExteriorData, HarnackConfig, HarnackReport, HarnackRun,
    HolderFit, DEFAULT_ETA,
};
pub use hke::{
    decimation_ratios, default_points, fit_on_diagonal, scaling_window, window_times,
    DecimationReport, HkeFitReport, WINDOW_SAMPLES,
};
pub use lle::{lle_check, lle_times, LleReport, DEFAULT_EPSILONS};
pub use oscillation::{
    caloric_oscillations, delta_from_epsilon, oscillation_check, standard_cylinder,
    OscillationReport,
};
pub use phi::{phi_check, phi_extremes, PhiParameters, PhiReport};
pub use report::{write_index, write_report, CheckReport, IndexEntry, ReportIndex};
