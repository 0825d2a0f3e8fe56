//! Exact rational-function expressions and linear algebra over them.

mod matrix;
mod parse;
mod poly;
mod ratfun;
mod render;
mod sample;
mod solve;
mod symbol;

pub use matrix::{
    generic_rank, normalize_first_nonzero, q_null_space, q_rank, q_rref, solve_linear_over_field,
    Rref, SymbolicMatrix,
};
pub use parse::{parse, parse_ast, parse_free, Node};
pub use poly::{Monomial, Poly, Q};
pub use ratfun::Expr;
pub use render::{render_full, render_pretty};
pub use sample::{is_zero, Sampler, DEFAULT_TRIALS};
pub use solve::{expr_sqrt, solve_map_inverse};
pub use symbol::{symbols, Symbol};
