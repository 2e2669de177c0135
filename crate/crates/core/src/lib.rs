//! Numerical toolkit for collective light emission from partially pumped
//! spin ensembles.
//!
//! A single spin `σ` is incoherently pumped at rate `w` while it decays
//! collectively, at rate `Γ`, together with a large unpumped spin
//! `J = N/2`. The shared decay channel carries a relative phase `φ`
//! between the two contributions, which controls interference between
//! the emission pathways and with it the linewidth and the photon
//! statistics of the emitted light.
//!
//! The crate builds the Lindblad generators of this family of models in
//! the pumped-spin ⊗ Dicke product basis (or a truncated bosonic basis
//! for large `N`), solves for their steady states, eigendecomposes the
//! Liouvillian to obtain emission spectra through the quantum regression
//! theorem, and classifies parameter regimes by linewidth and coherence.
//!
//! All rates are expressed in units of the collective decay rate `Γ = 1`.

pub mod error;
pub mod linalg;
pub mod liouvillian;
pub mod observables;
pub mod operators;
pub mod oracle;
pub mod pipeline;
pub mod regimes;
pub mod sector;
pub mod spectrum;
pub mod steady;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Collective decay rate; the unit in which every other rate is expressed.
pub const GAMMA: f64 = 1.0;
