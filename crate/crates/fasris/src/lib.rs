//! Link-level Monte-Carlo simulator for fluid-antenna systems (FAS) assisted
//! by a reconfigurable intelligent surface (RIS) on a mmWave link.
//!
//! The simulator synthesizes spatially correlated Rician fading over a
//! BS -> RIS -> UE geometry, applies ideal per-element RIS co-phasing, and
//! compares six receiver/transmitter architectures (fixed antennas, FAS port
//! selection at either or both ends, a fluid RIS, and a FAS-embedded RIS
//! decode-and-forward relay) by ergodic throughput.
//!
//! Layering, bottom up:
//!
//! * [`numerics`]: Bessel J0, a complex Jacobi eigensolver with a PSD matrix
//!   square root, and counter-based RNG streams.
//! * [`channel`]: geometry, link budget, Jakes port correlation and the
//!   correlated Rician channel synthesis.
//! * [`architectures`]: the six architecture evaluators over one realization.
//! * [`experiment`]: trial orchestration, throughput sweeps, calibration of
//!   the reference path gain, and brute-force oracles.
//! * [`validate`]: self-contained correctness checks runnable from the CLI.
//! * [`cli`]: configuration files, sweep/figure commands and table output.
//!
//! Every random quantity derives from a `(master_seed, trial_index)` pair, so
//! sweeps are reproducible bit-for-bit regardless of thread count.

pub mod architectures;
pub mod channel;
pub mod cli;
pub mod experiment;
pub mod numerics;
pub mod reference;
pub mod validate;
