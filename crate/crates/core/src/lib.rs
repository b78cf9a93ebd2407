//! Numerics for the diffusive prey-predator model with an infectious
//! disease in the prey: susceptible prey `S`, infected prey `I`, predator
//! `P` on a 1-D interval under Neumann or Dirichlet boundary conditions.
//!
//! The crate is `no_std` (with `alloc`); file formats, configuration and the
//! command-line front end live in the `ecoepi` companion crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod eigen;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod model;
pub mod newton;
pub mod rng;
pub mod simulate;
pub mod steady;
pub mod verify;

pub use error::{ModelError, NumError, SimError, SteadyError};
pub use grid::{apply_laplacian, solve_helmholtz, Boundary, Field, Grid};
pub use model::{
    bound_constants, classify_dirichlet, classify_neumann, equilibria, reaction_terms, Attractor,
    EigenBundle, EquilibriumKind, EquilibriumSet, Parameters, PreyPredatorParams, RegimePrediction,
    State,
};
