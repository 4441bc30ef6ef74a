//! One-dimensional quantum hydrodynamics in the Madelung-Bohm picture.
//!
//! A wavefunction `psi = A exp(iS/hbar)` is split into a real amplitude and
//! an action-valued phase. The Schrödinger equation then becomes a quantum
//! Hamilton-Jacobi equation carrying the Bohm potential
//! `V_B = -(hbar^2 / 2m) A''/A` plus a continuity equation. This crate
//! provides:
//!
//! - [`specfun`]: Airy `Ai`, Hermite polynomials and Gamma.
//! - [`field`]: grids, sampled fields, finite-difference and spectral
//!   derivatives, polar decomposition with phase unwrapping.
//! - [`bohm`]: Bohm potential, Hamilton-Jacobi and continuity residuals,
//!   Bohmian trajectories.
//! - [`catalog`]: closed-form solutions (plane wave, Gaussian, oscillator
//!   eigenstates, the accelerating Airy packet, Morse ground state).
//! - [`family`]: the cubic wavefunction-potential family with identically
//!   vanishing Bohm potential, and the external potential and force it
//!   implies.
//! - [`evolve`]: a Strang split-step Fourier propagator and observables.

pub mod bohm;
pub mod catalog;
mod error;
pub mod evolve;
pub mod family;
pub mod field;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
pub use field::{AmplitudeMode, ComplexField, Grid1D, PhysicalParams, PolarField};
