//! Deterministic simulator of coherent free-electron interaction with a
//! strongly-coupled nanocavity + quantum-emitter target.
//!
//! The target's truncated eigenbasis (z-mode Fock ladder ⊗ polariton ladder)
//! couples to a passing electron through closed-form quasi-static couplings;
//! the scattering matrix is the exponential of the interaction matrix over a
//! commutative momentum-shift operator ring, which keeps the electron's
//! momentum distribution exact and sparse. On top of that sit EELS, CL and
//! PINEM observables: momentum reshaping Δn_k, net energy change ΔE, reduced
//! target densities and emission power spectra, for monochromatic and
//! comb-modulated beams.

pub mod bessel;
pub mod cli;
pub mod electron;
pub mod em_couplings;
pub mod hilbert;
pub mod observables;
pub mod params;
pub mod quadrature;
pub mod scattering;
pub mod shift_algebra;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("truncated dimension {dim} exceeds the hard limit {limit}")]
    CapsTooLarge { dim: usize, limit: usize },

    #[error("{what} did not converge (residual {residual:.3e})")]
    NonConvergence { what: String, residual: f64 },

    #[error("momentum grid not shift-closed: k = {from} has no destination for q = {shift}")]
    GridNotShiftClosed { from: f64, shift: f64 },

    #[error("population norms differ: {before} before vs {after} after")]
    NormMismatch { before: f64, after: f64 },

    #[error("populated state {state} sits on the truncation boundary (cap {cap}); enlarge caps by one shell")]
    InsufficientPadding { state: String, cap: u32 },

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub use electron::{delta_n, KDistribution, MomentumPopulations, Wavepacket};
pub use em_couplings::{
    classical_eels_loss, coupling_g_c_qe, first_order_quantum_loss, induced_dipole_ratio,
    reduced_coupling, reduced_g_ec, reduced_g_eqe, CavityAxis, Channel, ReducedCoupling,
};
pub use hilbert::{BareState, Branch, Caps, PolaritonState, TargetSpace};
pub use observables::{
    dipole_operator, peak_heights, pinem_initial, power_spectrum, reduce_electron, reduce_target,
    scatter, scatter_density, superposition_initial, JointState, SpectrumLines, TargetDensity,
};
pub use params::PhysicalParams;
pub use scattering::{
    build_interaction, joint_space_oracle, matrix_element_h, scattering_matrix, shift_closed_grid,
    unitarity_defect, InteractionMatrix, ProbeConfig,
};
pub use shift_algebra::{apply_poly, mat_exp, ShiftMatrix, ShiftPoly, ShiftTerm};
