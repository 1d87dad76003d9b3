//! Library surface of the command-line front end: the expression grammar,
//! problem-file parsing, run dispatch, and report serialization.

// validation guards use `!(x > 0.0)` style comparisons so NaN inputs fail
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod expr;
pub mod problem;
pub mod report;
pub mod run;
