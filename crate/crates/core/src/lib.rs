//! Exact computations for Bridgeland stability on local models of K3
//! moduli: Mukai lattices, stability functions, Ext-quivers and their
//! double-quiver representations, and the wall analysis built on them.

#![allow(clippy::needless_range_loop)]

pub mod character;
pub mod error;
pub mod ext_quiver;
pub mod gaussian;
pub mod lattice;
pub mod matrix;
pub mod quiver_rep;
pub mod rational;
pub mod stability;
pub mod wall_analysis;
pub mod walls;

pub use error::{Error, Result};
pub use rational::Rational;
