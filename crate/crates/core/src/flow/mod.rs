//! Volume-preserving area descent and classification.

pub mod classify;
pub mod evolve;
pub mod project;
pub mod remesh;

pub use classify::{angle_sum_witness, classify, Classification, Configuration, PieceFit};
pub use evolve::{evolve, evolve_with, jitter, write_trace_csv, EvolveOutcome, FlowParams, StepRule, TraceRow};
pub use project::{project_volume_preserving, project_weighted, Projection};
pub use remesh::{remesh, RemeshStats};
