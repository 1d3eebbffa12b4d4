//! Numerical kernels: univariate roots, Newton refinement, path tracking and
//! homotopies.

mod homotopy;
mod newton;
mod tracker;
mod univariate;

pub use homotopy::{canonical_sort, dedup_points, derive_seed, parameter_homotopy, random_gamma, solve_base_system};
pub use newton::newton_refine;
pub(crate) use newton::residual_ok;
pub use tracker::{track_path, Homotopy, PathResult, PathStatus, StraightLineHomotopy, TrackerConfig};
pub use univariate::univariate_roots;
