//! Third-order moments of collective pseudo-spin operators for symmetric
//! N-qubit pure states, the tripartite parameter `S` built from them, and a
//! brute-force oracle that checks the underlying operator algebra.
//!
//! Two state representations run side by side:
//!
//! - the (N+1)-dimensional Dicke subspace ([`SymmetricState`]), which is the
//!   fast path and scales to any N;
//! - the full 2^N product basis ([`FullState`]), which is the oracle path.
//!
//! Basis convention everywhere: atom 1 is the most significant bit of a
//! product-basis index, and a 0 bit means the upper level (m = +1/2).

pub mod error;
pub mod frame;
pub mod moments;
pub mod operators;
pub mod oracle;
pub mod sampler;
pub mod states;

pub use error::{Error, Result};
pub use frame::{mean_spin, rotated_ops, rotation_angles, MeanSpin, RotationAngles};
pub use moments::{
    central_moment, entanglement_s, entanglement_s_full, third_moment_sum_xp,
    third_moment_sum_yp, triple_correlators, MomentReport, TripleCorrelatorSet,
};
pub use operators::{
    collective_op, collective_op_dicke, single_atom_op, Axis, CollectiveComponent, Observable,
    OperatorMatrix, Space,
};
pub use states::{FullState, ProductState, StateVector, SymmetricState};

pub use num_complex::Complex64;

/// Frame threshold: below this mean-spin magnitude the rotated frame is undefined.
pub const FRAME_EPS: f64 = 1e-9;

/// Tolerance used for normalization checks on every state type.
pub const NORM_TOL: f64 = 1e-12;
