//! Tolerances shared by the solvers and the verification checks.

/// Relative tolerance for the block-diagonal form of the plate coefficient matrix.
pub const PLATE_COEFFS_REL: f64 = 1e-12;

/// Residual bound for the transverse profile problem.
pub const PROFILE_RESIDUAL: f64 = 1e-12;

/// Agreement of isotropic closed forms.
pub const ISOTROPIC_CLOSED_FORM: f64 = 1e-13;

/// Change of the log matrix between two angular resolutions that stops refinement.
pub const ANGULAR_REFINE: f64 = 1e-10;

/// Starting number of angular quadrature nodes.
pub const ANGULAR_NODES: usize = 256;

/// Largest number of angular quadrature nodes tried before giving up.
pub const ANGULAR_NODES_MAX: usize = 1 << 16;

/// Fourier coefficients below this fraction of the largest are dropped.
pub const FOURIER_TRUNCATION: f64 = 1e-15;

/// Circle flux identities of the fundamental solutions.
pub const FLUX: f64 = 1e-6;

/// Symmetry required of a user-supplied capacity matrix.
pub const CAPACITY_SYMMETRY: f64 = 1e-10;

/// Condition number above which the matching matrix is rejected.
pub const MATCHING_CONDITION_MAX: f64 = 1e12;

/// Relative residual accepted for the 4x4 coefficient solve.
pub const COEFFICIENT_RESIDUAL: f64 = 1e-12;

/// Relative residual accepted after a sparse solve.
pub const SPARSE_RESIDUAL: f64 = 1e-8;

/// Relative asymmetry of the Green matrix, as a multiple of its Richardson error bar, that raises a flag.
pub const GREEN_ASYMMETRY_FACTOR: f64 = 10.0;

/// Two-route disagreement of the data column, relative to the pairing scale, that raises a flag.
pub const F_ROUTE_MAX: f64 = 1e-2;

/// Step of the central differences in the stationarity check.
pub const STATIONARITY_STEP: f64 = 1e-4;

/// Bound on normalized directional derivatives at the solution.
pub const STATIONARITY: f64 = 1e-6;

/// Energy identity agreement.
pub const ENERGY_IDENTITY: f64 = 1e-10;
