//! Finite-scale workbench for construction-principle witnesses.

pub mod cyclic;
pub mod harness;
pub mod hf;
pub mod incidence;
pub mod iso;
pub mod ngon;
pub mod plane;
pub mod steiner;
pub mod tfab;
pub mod variety;
