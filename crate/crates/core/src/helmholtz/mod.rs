//! Meshes, Lagrange assembly and resolution analysis for the Helmholtz problem.

pub mod assembly;
pub mod dispersion;
pub mod fe;
pub mod mesh;
pub mod resolution;
pub mod velocity;

pub use assembly::{assemble_helmholtz, AssembledSystem, HelmholtzProblem, OuterBc, Source};
pub use dispersion::{dispersion_curve, phase_velocity, DispersionSpec, Scheme};
pub use mesh::{build_rect_mesh, refine_uniform, ElementOrder, Mesh};
pub use resolution::{mesh_size_rule, ppwl, Calibration, MeshRule};
pub use velocity::{load_raster_model, VelocityModel, WedgeModel};
