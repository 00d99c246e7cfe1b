//! Domain types, wage binning, panel aggregation and descriptive tables.

pub mod binning;
pub mod describe;
pub mod io;
pub mod macro_metrics;
pub mod outcome;
pub mod panel;
pub mod types;

pub use binning::{assign_bin, assign_group, BinningRule, ExposureGroup};
pub use describe::{change_grid, distribution_table, Axis, ChangeRow, DescribeBins, DistRow};
pub use macro_metrics::{macro_metrics, MacroSeries};
pub use outcome::{
    outcome_series, AmenityDenominator, ClusterLevel, Observation, OutcomeKind, OutcomeOptions,
    OutcomeSeries, Weighting,
};
pub use panel::{build_panel, BinKey, Panel, PanelCell, PanelOptions, PanelStats, PrefectureMonthTotals};
pub use types::{
    ContractRecord, MinWageEntry, MinWageSchedule, Occupation, StudyWindow, TimeSlot, YearMonth,
};
