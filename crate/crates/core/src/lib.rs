//! Spontaneous-emission rates of a two-level emitter near a lossy cavity.
//!
//! Two routes are implemented side by side and cross-checked:
//!
//! * the continuum route, where the decay rate follows from a quasinormal-mode
//!   (QNM) expansion of the medium Green's function ([`continuum`]);
//! * the quantized lossy-mode route, where a Jaynes-Cummings system couples to
//!   a photon reservoir through a frequency-dependent coupling function
//!   Λ(ω) ([`spectral_density`]) and is propagated with a non-secular
//!   Born-Markov master equation ([`master`]).
//!
//! All frequencies are dimensionless, measured in units of the cavity
//! frequency ω_c (which is 1 unless a configuration says otherwise).

pub mod acceptance;
pub mod continuum;
pub mod dressed;
pub mod error;
pub mod integrate;
pub mod master;
pub mod model;
pub mod ops;
pub mod spectra;
pub mod spectral_density;
pub mod table;

pub use faer::complex_native::c64;

pub use crate::error::{Error, Result};
pub use crate::model::{FrequencyGrid, Gauge, QnmMode, SimConfig, TlsParams};
pub use crate::spectral_density::{NegativeChiPolicy, SystemBathCoupling};
