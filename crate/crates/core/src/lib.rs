//! Extreme value statistics of distance observables along orbits of
//! systems with singular invariant measures, and recovery of the
//! information dimension from the fitted GEV parameters.
//!
//! The pipeline: [`maps`] generates orbits, [`observables`] turns distances
//! to a center into block maxima, [`lmoments`] fits a GEV, [`gof`] ranks
//! candidate laws, [`dimension`] inverts the fitted parameters, and
//! [`harness`] runs whole experiment grids from a config file.

pub mod dimension;
pub mod error;
pub mod gev;
pub mod gof;
pub mod harness;
pub mod lmoments;
pub mod maps;
pub mod observables;
pub mod rng;
pub mod selftest;

pub use dimension::{DimensionEstimate, Method, ParamSeries, ScalingFit, SlopeRoute};
pub use error::{Error, Result};
pub use gev::GevParams;
pub use gof::{Family, KsReport};
pub use harness::{ExperimentConfig, ExperimentRecord, RunOutput};
pub use lmoments::{FitResult, LMomentSet};
pub use maps::{Point, SystemSpec};
pub use observables::{ObservableKind, ObservableSpec};
pub use rng::RngStream;
