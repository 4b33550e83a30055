//! Approximate persistent homology of large point clouds.
//!
//! Persistence diagrams of many small bootstrap subsamples are averaged as
//! persistence measures; the average approximates the diagram of the full
//! dataset, whose direct computation is out of reach. The crate contains the
//! whole chain: samplers and file formats ([`pointcloud`]), Vietoris–Rips
//! persistence ([`vr`]), persistence measures ([`measure`]), exact transport
//! distances ([`transport`]), central-tendency estimators ([`means`]) and the
//! subsampling pipeline with its rate experiments and bounds ([`pipeline`]).

// NaN-rejecting `!(x >= 0.0)` checks and index loops over paired arrays are intended.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod error;
pub mod fmt;
pub mod means;
pub mod measure;
pub mod pipeline;
pub mod pointcloud;
pub mod rng;
pub mod transport;
pub mod vr;

pub use error::{Error, Result};
