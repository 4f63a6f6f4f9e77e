//! Exact computer algebra for rational models: commutative differential
//! graded algebras, Sullivan minimal models, fiber products of cochain
//! algebras, polynomial forms on simplices, local systems over finite ordered
//! simplicial complexes and their spectral sequences.
//!
//! All arithmetic is over the rationals and exact.

pub mod cdga;
pub mod error;
pub mod exactlin;
pub mod fixtures;
pub mod gluing;
pub mod graded;
pub mod localsys;
pub mod par;
pub mod polyforms;
pub mod simplicial;
pub mod specseq;
pub mod sullivan;

pub use error::{Error, Result};
pub use exactlin::{QMatrix, QVector, Rational};
