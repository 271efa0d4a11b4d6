//! Joint peak detection for multi-sample count data.
//!
//! Fits a constrained Poisson segmentation over S aligned coverage profiles:
//! each sample gets either a flat mean or one peak, and every peaked sample
//! shares the exact same peak interval. The solver zooms out to a coarse
//! binned grid, searches it exhaustively, then zooms back in refining the
//! peak at each level. Model size (how many samples peak) is chosen by a
//! penalty function learned from annotated region labels via L1-regularized
//! interval regression.
//!
//! Modules:
//! - [`coverage`]: bedGraph ingestion, window tiling, problem extraction, binning
//! - [`model`]: Poisson loss, feasibility indicators, joint model types
//! - [`zoom`]: the coarse-to-fine solver
//! - [`oracle`]: exact reference solvers for tests and the timing baseline
//! - [`learn`]: model selection, target intervals, features, FISTA training
//! - [`labels`]: annotated regions and annotation-error counting
//! - [`sim`]: Poisson simulation with planted peaks

pub mod coverage;
pub mod error;
pub mod labels;
pub mod learn;
pub mod model;
pub mod oracle;
pub mod sim;
pub mod zoom;

pub use coverage::{
    bin_count, bin_problem, extract_problem, parse_bedgraph, parse_manifest, tile_window,
    BinnedProblem, CoverageProfile, CoverageRun, ProblemMatrix, SampleEntry, TileWindow,
};
pub use error::{Error, Result};
pub use labels::{
    errors_by_model_size, parse_labels, region_error, total_error, Annotation, ErrorCount,
    LabeledRegion,
};
pub use learn::{
    compute_target_interval, extract_features, extract_features_with, predict_log_penalty,
    selection_breakpoints, squared_hinge, surrogate_loss, train_fista, Feature, FeatureMatrix,
    FistaConfig, SelectionFunction, SelectionSegment, TargetInterval, TrainedWeights,
    DEFAULT_FEATURES,
};
pub use model::{
    peak_indicator, poisson_loss, segments_and_peaks, validate_joint_model, JointModel,
    ModelSequence, PeakInterval, SampleFit,
};
pub use oracle::{brute_force_joint, brute_force_model_selection, three_segment_dp};
pub use zoom::{
    fit_model_sequence, grid_search, joint_zoom, joint_zoom_traced, max_bin_size,
    max_bin_size_with, search_near_peak, zoom_schedule, GridFit, GridOutcome, ZoomLevel, ZoomTrace,
};
