//! Behavioral device-to-architecture model of a skyrmionic in-memory binary
//! neural network accelerator.

// Negated float comparisons are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod bnn;
pub mod config;
pub mod dataset;
pub mod device;
pub mod faults;
pub mod perf;
pub mod peripherals;
