//! Time-frequency embeddings, outer-measure Lebesgue spaces and wave-packet
//! models of Carleson-type operators.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments, clippy::needless_range_loop, clippy::type_complexity)]

pub mod embeddings;
pub mod error;
pub mod fourier;
pub mod geometry;
pub mod harness;
pub mod operators;
pub mod outer;
pub mod par;
pub mod sizes;
pub mod wavepackets;

pub use error::{Error, Result};
