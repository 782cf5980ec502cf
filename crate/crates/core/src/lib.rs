//! Quantitative reactive synthesis for manipulation domains.

pub mod dd;
pub mod domain;
pub mod ltlf;
pub mod pipeline;
pub mod regret;
pub mod solvers;
pub mod symgame;
pub mod value;

pub use value::Value;
