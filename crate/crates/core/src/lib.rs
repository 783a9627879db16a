//! Fractional calculus on uniform grids, fractional Brownian drivers,
//! Weyl-derivative Stieltjes integrals and a windowed Picard solver for
//! transport equations driven by fBm sheets.

pub mod error;
pub mod fbm;
pub mod field;
pub mod frac_calc;
pub mod norms;
pub mod solver;
pub mod stieltjes;
mod par;

pub use par::is_parallel;

pub use error::{Error, Result};
pub use field::SpaceTimeField;
pub use frac_calc::{Endpoint, FractionalOrder, GridFunction};
