//! Renormalization-group flow and scattering for the attractive
//! inverse-square potential with a delta-function source at the origin.

pub mod cli;
pub mod conventions;
pub mod model;
pub mod oracle;
pub mod ode;
pub mod rgflow;
pub mod scattering;
pub mod special;
