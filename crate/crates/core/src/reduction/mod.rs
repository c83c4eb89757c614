//! Casimir functions and global Darboux charts for the three families.

mod antiderivative;
mod casimir;
mod chart;

pub use antiderivative::{Antiderivative, AntiderivativeInfo, QUAD_TOL};
pub use casimir::{
    casimir, casimir_delta, casimir_gamma_pair, casimir_gamma_singleton, CasimirFn,
    CasimirReport, CASIMIR_TOL,
};
pub use chart::{
    darboux, darboux_delta, darboux_gamma_pair, darboux_gamma_singleton, step_one_map,
    verify_chart, verify_chart_seeded, ChartExport, ChartReport, DarbouxChart, PerAxisMap, CHART_SAMPLES, CHART_TOL,
    DELTA_TARGET, GAMMA_TARGET,
};
