//! Generalized score distribution (GSD) for answers on an ordinal
//! `1..=M` rating scale.
//!
//! The crate covers the distribution itself ([`dist`]), the rounded and
//! censored Normal it is usually compared with ([`normal`]),
//! maximum-likelihood fitting ([`estimation`]), Pearson χ² goodness of fit
//! with a binomial meta-test over many items ([`gof`]), an estimator
//! accuracy simulation study ([`simstudy`]) and the batch pipeline that ties
//! them to CSV input ([`dataset`], [`report`]).
//!
//! ```
//! use gsd::{dist, GsdParams};
//!
//! let params = GsdParams::new(3.0, 0.75, 5).unwrap();
//! let pmf = dist::pmf(&params);
//! assert!((pmf.prob(3) - 6.0 / 16.0).abs() < 1e-12);
//! ```

pub mod dataset;
pub mod dist;
mod error;
pub mod estimation;
pub mod format;
pub mod gof;
pub mod normal;
mod pmf;
pub mod report;
mod sample;
pub mod simstudy;
pub mod special;

pub use dataset::{CsvFormat, DataError, Dataset};
pub use dist::{GsdParams, VarianceBounds, DEFAULT_SCALE};
pub use error::{Error, Result};
pub use estimation::{FitConfig, FitResult};
pub use gof::{GlobalTestResult, GofResult};
pub use normal::{DiscretizedMoments, NormalParams};
pub use pmf::Pmf;
pub use report::{BatchConfig, BatchReport, Model};
pub use sample::ScoreSample;
pub use simstudy::{RhoPrior, SimDesign, SimRecord};
