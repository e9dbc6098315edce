//! Simulation engine for a parametrically driven cavity-QED system.
//!
//! A two-photon drive on the cavity, diagonalized by a Bogoliubov (squeeze)
//! transformation, turns a weakly coupled Jaynes-Cummings system into a quantum
//! Rabi model with an exponentially enhanced coupling `g e^r / 2` and a
//! compressed effective cavity frequency `delta_c sech 2r`. This crate builds
//! the truncated-space operators, the lab- and squeezed-frame Hamiltonians,
//! dissipative time evolution, steady states, regression-theorem absorption
//! spectra, and the observables (fidelity, logarithmic negativity, Wigner
//! functions, displacement trajectories) used by the experiment runners.
//!
//! Units: the cavity detuning `delta_c` is the frequency scale (set to 1 in
//! all shipped configurations); time is measured in `1/delta_c`.

extern crate blas_src;

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod model;

pub use error::{Error, Result, Warning};
pub use hilbert::{
    annihilation, coherent_state, embed, matrix_exponential, partial_trace, partial_transpose,
    qubit_operators, trace_norm, DensityMatrix, Domain, HilbertSpec, Operator, StateVector,
};
pub use model::{DriveRamp, FrameSnapshot, ModelParams};
