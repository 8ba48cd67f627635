//! Quantum state targeting on maximally entangled qudit pairs, and the Bell
//! inequality obtained by scoring it.
//!
//! Alice steers Bob's half of `(1/√d) Σ|k,k⟩` into the intermediate state of
//! a computational target `|a_k⟩` and a Fourier target `|a′_l⟩`. Bob tests
//! in whichever basis his chosen target lives in. Summing pass probabilities
//! minus fail probabilities over all `2d²` setting pairs yields `2√d`, while
//! every local deterministic strategy scores at most `2`.
//!
//! * [`linalg`]: complex vectors, Hermitian operators, Jacobi eigensolver
//! * [`states`]: bases, intermediate states, steering vectors
//! * [`game`]: the targeting protocol and a seeded Monte-Carlo engine
//! * [`bell`]: joint tables, the Bell sum, the Bell operator, see-saw
//! * [`lhv`]: local deterministic bound by enumeration and by counting
//! * [`cli`]: the `qstbell` command line

pub mod bell;
pub mod cli;
pub mod error;
pub mod game;
pub mod lhv;
pub mod linalg;
pub mod states;

pub use error::{Error, Result};
