#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregation;
pub mod classifiers;
pub mod cli;
pub mod csp;
pub mod data;
pub mod dsp;
pub mod eval;
pub mod fusion;
pub mod pipeline;
pub mod util;
