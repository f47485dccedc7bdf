//! Heat-kernel harmonic analysis on tori, SU(2) and their products.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments, clippy::type_complexity)]

pub mod check;
pub mod config;
pub mod error;
pub mod euclid;
pub mod fock;
pub mod fourier;
pub mod group;
pub mod heat;
pub mod numeric;
pub mod operators;
pub mod quadrature;
pub mod report;
pub mod stochastic;
pub mod suite;
pub mod transforms;

pub use check::Comparison;
pub use config::Config;
pub use error::{HeatlabError, Result};
pub use fock::{
    hermite_function, hermite_norm, inverse_taylor, taylor_map, FockNorm, FockSpace,
    TensorFunctional,
};
pub use fourier::FourierCoefficients;
pub use group::{
    irreps_up_to, CompactGroup, ComplexFactorPoint, ComplexGroupPoint, Factor, FactorLabel,
    FactorPoint, GroupPoint, Irrep, IrrepLabel,
};
pub use heat::{heat_operator, mu_t_torus, nu_t_torus, rho_t, rho_t_complex, HeatKernel};
pub use numeric::C64;
pub use quadrature::{haar_quadrature, haar_quadrature_with, QuadratureRule};
pub use report::{Report, TestRecord};
pub use stochastic::{holonomy, loop_action, LoopElement, NoisePath};
