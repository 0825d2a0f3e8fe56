//! Seeded random rational sample points for generic-point checks.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poly::Q;
use super::ratfun::Expr;
use super::symbol::Symbol;
use crate::error::ExprError;

pub const DEFAULT_TRIALS: usize = 8;
const MAX_RESAMPLES: usize = 32;

/// Draws coordinates uniformly from `-100..=100`.
#[derive(Clone, Debug)]
pub struct Sampler {
    rng: ChaCha8Rng,
    pub trials: usize,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            trials: DEFAULT_TRIALS,
        }
    }

    pub fn with_trials(seed: u64, trials: usize) -> Self {
        Sampler {
            trials: trials.max(1),
            ..Sampler::new(seed)
        }
    }

    pub fn point<'a, I: IntoIterator<Item = &'a Symbol>>(&mut self, vars: I) -> HashMap<Symbol, Q> {
        vars.into_iter()
            .map(|v| (v.clone(), Q::from_integer(BigInt::from(self.rng.random_range(-100i64..=100)))))
            .collect()
    }

    /// Evaluates every expression at a common random point, resampling when
    /// a denominator vanishes.
    pub fn eval_all(&mut self, exprs: &[&Expr]) -> Result<Vec<Q>, ExprError> {
        let mut vars = BTreeSet::new();
        for e in exprs {
            vars.extend(e.free_vars());
        }
        for _ in 0..MAX_RESAMPLES {
            let p = self.point(vars.iter());
            let vals: Result<Vec<Q>, ExprError> = exprs.iter().map(|e| e.eval(&p)).collect();
            match vals {
                Ok(v) => return Ok(v),
                Err(ExprError::Singular) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(ExprError::Indeterminate {
            attempts: MAX_RESAMPLES,
        })
    }

    /// Randomised zero test: zero at every one of `trials` points.
    pub fn probably_zero(&mut self, e: &Expr) -> Result<bool, ExprError> {
        for _ in 0..self.trials {
            let v = self.eval_all(&[e])?;
            if !num_traits::Zero::is_zero(&v[0]) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Exact zero test for the rational class; kept as a named operation so
/// call sites read as the mathematical check they perform.
pub fn is_zero(e: &Expr) -> bool {
    e.is_zero()
}
