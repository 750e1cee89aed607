//! Numerical laboratory for functions of self-adjoint operators with
//! non-smooth symbols: a Helffer-Sjöstrand functional calculus built on
//! quasi-analytic extensions, Schatten quasi-norm bounds for quasi-commutators,
//! and two-term trace asymptotics of discretized Wiener-Hopf operators.

pub mod asym_coeffs;
pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod func_classes;
pub mod hs_calculus;
pub mod jet;
pub mod matrix_io;
pub mod operator;
pub mod qa_extension;
pub mod quadrature;
pub mod schatten;
pub mod wiener_hopf;

pub use error::{Error, Result};
pub use func_classes::{CutoffZeta, SingularFunction};
pub use hs_calculus::{QuadratureSpec, Scheme};
pub use operator::{DenseOperator, C64};
pub use qa_extension::QAExtension;
pub use asym_coeffs::CoeffResult;
pub use wiener_hopf::{DomainSpec, Symbol2, WHModel};
