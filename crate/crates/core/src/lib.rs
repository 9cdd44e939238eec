pub mod coeff;
pub mod constraints;
pub mod currents;
pub mod error;
pub mod jack;
pub mod ppoly;
pub mod tau;
pub mod weyl;

pub use coeff::{Coeff, Var};
pub use error::{Error, Result};
pub use ppoly::{PMonomial, PPoly};
pub use weyl::WeylOp;
