//! Mass-constrained ground states of the quintic NLS energy on noncompact
//! metric graphs: topology classification, discrete energy functionals, a
//! normalized-flow variational solver, a Gagliardo-Nirenberg best-constant
//! estimator, and the constructive transforms (rearrangements, bridge
//! doubling, exponential tail regularization) with their exact identities.

pub mod error;
pub mod fixtures;
pub mod function;
pub mod gn;
pub mod graph;
pub mod grid;
mod linalg;
pub mod reference;
pub mod selftest;
pub mod solver;
pub mod transforms;

pub use error::{FunctionError, GraphError, SolverError, TransformError};
pub use function::{EnergyBreakdown, GraphFunction, PortableFunction};
pub use graph::{Edge, EdgeEnds, EdgeId, MetricGraph, TopologyClass, TopologyTag, VertexId};
pub use grid::{Discretization, GridSpec};
pub use reference::{constants, critical_mass_exact, soliton, soliton_energy_defect, Constants, CriticalMass};
