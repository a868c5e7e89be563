//! Finite first-order structures valued in MTL chains.

pub mod algebra;
pub mod cli;
pub mod harness;
pub mod morphisms;
pub mod products;
pub mod solver;
pub mod structures;
pub mod syntax;
