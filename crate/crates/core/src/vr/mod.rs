//! Vietoris–Rips filtrations and their persistence diagrams over Z/2.

mod diagram;
mod filtration;
mod reduction;
mod rips;

pub use diagram::{write_diagrams_json, DiagramPoint, PersistenceDiagram};
pub use filtration::{build_vr_filtration, enclosing_radius, FilteredSimplex};
pub use reduction::{compute_persistence, naive_reduction_oracle};
pub use rips::{dataset_persistence, rips_persistence, DistanceMatrix};
