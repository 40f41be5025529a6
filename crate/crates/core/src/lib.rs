//! World-model graphs for math story problems.

pub mod convert;
pub mod corpus;
pub mod eval;
pub mod fol;
pub mod lf;
pub mod metrics;
pub mod model;
pub mod normalize;
pub mod number;
pub mod qagen;
pub mod reason;
