//! Numerical laboratory for the derivative nonlinear Schrodinger equation
//! `u_t = i u_xx + (|u|^2 u)_x` on a periodic box.

pub mod constants;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod gauge;
pub mod grid;
pub mod ground_state;
pub mod integrator;
pub mod io;
pub mod modulation;
mod optimize;
pub mod random_fields;
pub mod solitons;

pub use error::{Error, Result};
pub use grid::{make_grid, ComplexField, Grid, Norm, C64};
