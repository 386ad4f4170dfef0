//! Reports, the grid-search baseline and threshold sweeps.

mod grid;
mod report;
mod sweep;

pub use grid::{grid_check, grid_values, GridReport, GRID_SEMANTICS};
pub use report::{
    point_map, status_label, subsumption_notes, AuditReport, ConfigEcho, ModelSummary, SpecReport, StatsReport, ToolInfo,
    WitnessPoint, WitnessReport,
};
pub use sweep::{threshold_sweep, SweepRow};
