//! Symbolic flatness analysis for discrete-time nonlinear systems
//! `x₊ = f(x, u)`.
//!
//! The crate is layered: [`expr`] (exact rational functions), [`exterior`]
//! (fields and forms), [`distributions`], [`system`], [`decompose`] (one
//! normal-form step) and [`flatness`] (the two iterated tests).

pub mod error;
pub mod expr;
pub mod exterior;
pub mod distributions;
pub mod system;
pub mod decompose;
pub mod flatness;
pub mod io;

pub use error::{Error, ExprError, Result};
pub use expr::{parse, Expr, Symbol, SymbolicMatrix};
