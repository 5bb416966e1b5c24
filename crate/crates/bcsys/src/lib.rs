//! Finite, height-truncated B-systems, C-systems, E-systems and CE-systems:
//! exhaustive axiom checking and the translations between them.

pub mod cat;
pub mod bsys;
pub mod cesys;
pub mod csys;
pub mod esys;
pub mod io;
pub mod report;
pub mod syntax;
pub mod xlate;
