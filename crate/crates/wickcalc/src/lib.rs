//! Quantization of two-dimensional symplectic leaves: reproducing kernels, irreducible
//! representations of permutation-relation algebras, Wick star products, quantum
//! restriction and the exponentially small corrections on the quantum cylinder.
//!
//! The algebraic layer ([`poly`], [`algebra`], [`representation`], [`normal_product`] and
//! the kernel coefficients in [`special`]) is generic over the scalar type through
//! [`Real`]. The analytic layer (quadrature, theta functions, Wick calculus, restriction,
//! tunneling) works in `f64`.

pub mod algebra;
pub mod error;
pub mod normal_product;
pub mod poly;
pub mod real;
pub mod representation;
pub mod restriction;
pub mod special;
pub mod tunneling;
pub mod wick;

pub use error::{Error, Result};
pub use real::{Cx, Real};

pub type Polynomial = poly::Polynomial<f64>;
pub type AlgebraSpec = algebra::AlgebraSpec<f64>;
pub type Factorization = algebra::Factorization<f64>;
pub type FlowSpec = algebra::FlowSpec<f64>;
pub type ModelData = algebra::ModelData<f64>;
pub type C64 = Cx<f64>;
