pub mod calculus;
pub mod error;
pub mod families;
pub mod functionals;
pub mod grid;
pub mod hamiltonian;
pub mod lab;
pub mod map;
pub mod solver;
pub mod sphere;
