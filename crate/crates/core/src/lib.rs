//! Rightmost paths of coupled supercritical oriented percolation, their
//! rescaling, and the sticky Brownian pairs they are compared against.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coupled;
pub mod error;
pub mod experiment;
pub mod fixture;
pub mod lattice;
pub mod moments;
pub mod paths;
pub mod stats;
pub mod sticky;
pub mod web;

pub use error::{Error, Result};
