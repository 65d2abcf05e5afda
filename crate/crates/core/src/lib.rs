//! Heat-engine cycle for a trapped attractive condensate whose working
//! medium is a bright soliton, driven by a time-dependent interaction
//! strength.
//!
//! The crate splits into the closed-form ansatz physics ([`variational`]),
//! ramp design including the inverse-engineered shortcut ([`pulse`]), the
//! spectral mean-field solver ([`gpe`]), cycle thermodynamics with
//! speed-limit and cost bounds ([`thermo`]) and the on-disk formats
//! ([`io`]).

pub mod error;
pub mod gpe;
pub mod io;
pub mod pulse;
pub mod thermo;
pub mod variational;

pub use error::{Error, Result};
