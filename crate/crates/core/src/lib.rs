#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons reject NaN

pub mod ddesolver;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod lambert;
pub mod observables;
pub mod params;

pub use error::{Error, Result};
pub use params::{GeneralInitialState, InitialState, ModelParams, Parity};
