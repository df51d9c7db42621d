//! Fractional Kelvin–Voigt damping of coupled wave and beam systems, realized
//! through a diffusive (augmented) variable.
//!
//! The crate covers the whole numerical chain: quadrature of the diffusive
//! kernel ([`kernel`]), finite element assembly of five coupled systems
//! ([`assembly`]), the augmented generator and its resolvent ([`operator`]),
//! energy-stable time stepping ([`evolution`]) and resolvent/decay-rate
//! estimation ([`frequency`]).

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod banded;
pub mod config;
pub mod error;
pub mod evolution;
pub mod experiment;
pub mod frequency;
pub mod kernel;
pub mod modes;
pub mod operator;

pub use error::{Error, Result};
