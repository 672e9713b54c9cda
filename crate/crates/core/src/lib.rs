//! Simulation, closed forms and angle training for QAOA state preparation with
//! a projector problem Hamiltonian `P = |t⟩⟨t|` and the transverse-field mixer.

pub mod analytic;
pub mod error;
pub mod oracle;
pub mod schedule;
pub mod symsim;
pub mod train;
pub mod verify;

pub use error::{QaoaError, Result};
pub use schedule::{wrap_angle, AngleSchedule};
pub use symsim::{DickeState, MixerPropagator, OverlapResult, SymmetricSimulator};
