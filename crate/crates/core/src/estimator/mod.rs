//! Event-study and two-way fixed-effects estimation.

pub mod event_study;
pub mod pretrend;
pub mod twfe;
pub mod vcov;

pub use event_study::{
    fit_event_study, fit_point, CellMean, EventStudyFit, EventStudySpec, FitMethod, Layout, MuCell, PointFit,
};
pub use pretrend::{pretrend_report, PretrendReport, PretrendRow};
pub use twfe::{fit_two_way_fe, week_of, weekly_earnings, TimeEffect, TwfeObservation, TwoWayFeFit};
pub use vcov::{cluster_vcov, VcovKind};
