//! Step refinable functions and tight wavelet frames on the additive group of
//! the p-adic numbers, computed exactly on finite quotient windows.
//!
//! The pipeline is: choose zeros on a mask tree ([`mask`]), solve for the
//! refinement coefficients and synthesize `φ̂`, tile the outer dual ring by
//! dilated cosets ([`frame`]), then analyse signals with the resulting frame
//! ([`frame_ops`]) and compare measured remainders with the approximation
//! bounds ([`approx`]).

pub mod approx;
pub mod corpus;
pub mod doc;
pub mod fft;
pub mod frame;
pub mod frame_ops;
pub mod group;
pub mod mask;
pub mod step;

/// Threshold below which a mask value or product counts as zero.
pub const TAU_ZERO: f64 = 1e-12;
/// Absolute tolerance for approximate equalities on unit-scale data.
pub const TAU_EQ: f64 = 1e-10;
