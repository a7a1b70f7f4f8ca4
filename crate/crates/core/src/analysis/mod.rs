//! Group actions, bandlimited projection, and the experiment runners that
//! measure invariance, stability, chart constants, the Calderón–Zygmund
//! decomposition and empirical operator constants.

mod charts;
mod cz;
mod empirical;
mod maps;
mod report;
mod stability;

pub use charts::{
    arc_measure, chart_constants_circle, chart_product_closed_form, circle_atlas, cover_lebesgue_number,
    doubling_constant, Chart, ChartAtlas, ChartCoordinate, ChartReport,
};
pub use cz::{cz_decompose, BadPart, CZDecomposition, CzCheck, CZ_CERTIFIED_CONSTANT, CZ_MAX_DEPTH};
pub use empirical::{
    empirical_cq, empirical_weak_constant, moment_boundedness, nonexpansive_ratio, random_bandlimited, random_spiky,
    signal_family, weak_11_ratio, EmpiricalSup, SignalFamily, WeakTypeReport, WEAK_GRID_POINTS,
};
pub use maps::{apply_action, bandlimit_project, check_bandlimited, is_bandlimited, Action, MapKind, PointMap};
pub use report::{Check, Report};
pub use stability::{
    fit_slope, isometry_invariance_report, log_grid, stability_curve, table_deviation, InvarianceReport,
    StabilityCurve, StabilityPoint, BANDLIMIT_TOLERANCE, ROUNDOFF_ALLOWANCE,
};
