//! Sensorless induction-motor drive simulation.
//!
//! A stationary-frame induction machine model, an adaptive sliding mode
//! observer (currents, rotor flux, speed and rotor resistance), a direct
//! stator-field-oriented controller, Lyapunov-based checks of the observer
//! error dynamics, a second-order sliding-mode benchmark plant, and a
//! fixed-step scenario harness that writes CSV and JSON results.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
pub mod dsfoc;
pub mod error;
pub mod integrate;
pub mod lyapunov;
pub mod motor_model;
pub mod observer;
pub mod sim;
pub mod transforms;

pub use error::{Error, Result};
