//! Reference solutions that depend only on the convolution equation and its
//! Laplace transform, never on the series or asymptotic representations.

pub mod grid;
pub mod laplace;
pub mod tailfit;
pub mod volterra;

pub use grid::{Spacing, TimeGrid};
pub use laplace::{laplace_invert, transfer, LaplaceInverter, LaplaceParts, PoleTerm};
pub use tailfit::{fit_tail_exponent, least_squares_loglog, TailFit};
pub use volterra::{
    volterra_solve, ConvolutionKernel, HatWeights, LorentzianKernel, ReservoirKernel,
    VolterraSolver,
};
