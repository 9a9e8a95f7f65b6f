//! Resolvent families of the memory diffusion equation
//! `u' = Au + (kappa * Au)` with kernel `kappa(t) = alpha e^{-beta t} t^{mu-1} / Gamma(mu)`.
#![allow(clippy::excessive_precision)]

pub mod error;
pub mod inversion;
pub mod quadrature;
pub mod resolvent;
pub mod route;
pub mod special;
pub mod spectral;
pub mod stability;
pub mod symbols;
pub mod verification;
pub mod volterra;

pub use error::{Error, Result};
