//! Numerical laboratory for the information-theoretic reconstruction of
//! finite-dimensional quantum theory.
//!
//! The geometry, state, transformation, measurement and composite-system
//! modules are generic over [`Real`] (`f64` and `f32`); concrete aliases for
//! both live at the crate root. Inference, the information-gain lab, the
//! experiment simulator and the CLI work in `f64`.

pub mod cli;
pub mod complex;
pub mod composite;
pub mod error;
pub mod inference;
pub mod infogain;
pub mod io;
pub mod measurement;
pub mod rng;
pub mod scalar;
pub mod sim;
pub mod simplex;
pub mod state;
pub mod stats;
pub mod transform;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ProbVector64 = simplex::ProbVector<f64>;
pub type ProbVector32 = simplex::ProbVector<f32>;
pub type QPoint64 = simplex::QPoint<f64>;
pub type QPoint32 = simplex::QPoint<f32>;
pub type QuantumState64 = state::QuantumState<f64>;
pub type QuantumState32 = state::QuantumState<f32>;
pub type BigQ64 = state::BigQ<f64>;
pub type StateVector64 = state::StateVectorC<f64>;
pub type StateVector32 = state::StateVectorC<f32>;
pub type OrthoMap64 = transform::OrthoMap<f64>;
pub type OrthoMap32 = transform::OrthoMap<f32>;
pub type ComplexMap64 = transform::ComplexMap<f64>;
pub type ComplexMap32 = transform::ComplexMap<f32>;
pub type MeasurementOp64 = measurement::MeasurementOp<f64>;
pub type MeasurementOp32 = measurement::MeasurementOp<f32>;
