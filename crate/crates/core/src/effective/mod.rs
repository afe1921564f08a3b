//! Level-set quadrature for free energies and effective-dynamics
//! coefficients, and the interpolation table built from them.

mod coefficients;
mod quadrature;
mod table;

pub use coefficients::{effective_coefficients, free_energy_quadrature, QuadratureSpec};
pub use quadrature::GaussLegendre;
pub use table::{uniform_grid, CoefficientTable, Coefficients, TabulatedFreeEnergy, DEFAULT_GRID_NODES};
