//! Integrals of sampled maps: symplectic area, graph energy, the taming
//! margin of the product structure, and the ε-norm of perturbations.

mod area;
mod energy;
mod epsilon;
mod taming;

pub use area::{row_densities, symplectic_area, AreaReport, TAIL_WARNING_RATIO};
pub use energy::graph_energy;
pub use epsilon::{epsilon_norm, epsilon_partial_sums, gradient_norms, EpsilonSequence};
pub(crate) use taming::random_point;
pub use taming::{perturbation_sup_norm, taming_form, taming_margin, ProductVector, TamingResult};
