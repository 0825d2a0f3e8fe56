//! Local inversion of maps given implicitly by equations `eᵢ = 0`.
//!
//! Strategy: repeatedly pick an equation whose numerator is linear in one
//! of the unknowns (preferring equations with a single unknown and
//! constant coefficients), solve, substitute. When only nonlinear
//! equations are left, a quadratic in a single unknown is accepted if its
//! discriminant is a perfect square. Anything else is reported unsolved.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::matrix::SymbolicMatrix;
use super::poly::{Monomial, Poly, Q};
use super::ratfun::Expr;
use super::symbol::Symbol;
use crate::error::ExprError;

/// Solves `equations = 0` for `solve_for`, returning each unknown as an
/// expression in the remaining variables.
pub fn solve_map_inverse(
    equations: &[Expr],
    solve_for: &[Symbol],
) -> Result<HashMap<Symbol, Expr>, ExprError> {
    if equations.len() != solve_for.len() {
        return Err(ExprError::DimensionMismatch(format!(
            "{} equations for {} unknowns",
            equations.len(),
            solve_for.len()
        )));
    }
    let jac = SymbolicMatrix::jacobian(equations, solve_for);
    let rank = jac.generic_rank();
    if rank < solve_for.len() {
        return Err(ExprError::RankDeficient {
            expected: solve_for.len(),
            found: rank,
        });
    }

    let mut eqs: Vec<Poly> = equations.iter().map(|e| e.numer().clone()).collect();
    let mut unknowns: Vec<Symbol> = solve_for.to_vec();
    let mut solved: Vec<(Symbol, Expr)> = Vec::new();

    while !unknowns.is_empty() {
        let step = pick_linear(&eqs, &unknowns).or_else(|| pick_quadratic(&eqs, &unknowns));
        let Some((ei, t, value)) = step else {
            return Err(ExprError::UnsupportedInversion {
                unsolved: eqs.iter().map(|p| format!("{p} = 0")).collect(),
            });
        };
        eqs.remove(ei);
        unknowns.retain(|u| u != &t);
        let bind: HashMap<Symbol, Expr> = [(t.clone(), value.clone())].into_iter().collect();
        for (_, v) in solved.iter_mut() {
            *v = v.substitute(&bind);
        }
        let mut next = Vec::with_capacity(eqs.len());
        for p in &eqs {
            let e = Expr::poly(p.clone()).substitute(&bind);
            if e.is_zero() {
                // dependent equation; the rank check makes this unreachable
                // for well-posed input
                return Err(ExprError::RankDeficient {
                    expected: solve_for.len(),
                    found: solve_for.len() - 1,
                });
            }
            next.push(e.numer().clone());
        }
        eqs = next;
        solved.push((t, value));
    }

    let map: HashMap<Symbol, Expr> = solved.into_iter().collect();
    let residuals: Vec<String> = equations
        .iter()
        .filter(|e| !e.substitute(&map).is_zero())
        .map(|e| format!("{e} = 0"))
        .collect();
    if !residuals.is_empty() {
        return Err(ExprError::UnsupportedInversion { unsolved: residuals });
    }
    Ok(map)
}

fn unknowns_in<'a>(p: &Poly, unknowns: &'a [Symbol]) -> Vec<&'a Symbol> {
    unknowns.iter().filter(|u| p.contains_var(u)).collect()
}

fn pick_linear(eqs: &[Poly], unknowns: &[Symbol]) -> Option<(usize, Symbol, Expr)> {
    let mut best: Option<((usize, usize, usize, usize, usize), usize, Symbol)> = None;
    for (ei, p) in eqs.iter().enumerate() {
        let present = unknowns_in(p, unknowns);
        for (ui, t) in unknowns.iter().enumerate() {
            if p.degree_in(t) != 1 {
                continue;
            }
            let c = p.coeffs_in(t);
            let a = &c[1];
            let key = (
                present.len(),
                usize::from(!a.is_constant()),
                a.num_terms() + c[0].num_terms(),
                ei,
                ui,
            );
            if best.as_ref().is_none_or(|(k, _, _)| key < *k) {
                best = Some((key, ei, t.clone()));
            }
        }
    }
    let (_, ei, t) = best?;
    let c = eqs[ei].coeffs_in(&t);
    let value = -(Expr::poly(c[0].clone()) / Expr::poly(c[1].clone()));
    Some((ei, t, value))
}

fn pick_quadratic(eqs: &[Poly], unknowns: &[Symbol]) -> Option<(usize, Symbol, Expr)> {
    for (ei, p) in eqs.iter().enumerate() {
        let present = unknowns_in(p, unknowns);
        if present.len() != 1 {
            continue;
        }
        let t = present[0];
        if p.degree_in(t) != 2 {
            continue;
        }
        let c = p.coeffs_in(t);
        let (a, b, cc) = (Expr::poly(c[2].clone()), Expr::poly(c[1].clone()), Expr::poly(c[0].clone()));
        let disc = &(&b * &b) - &(&(&Expr::int(4) * &a) * &cc);
        let Some(root) = expr_sqrt(&disc) else { continue };
        let two_a = &Expr::int(2) * &a;
        let value = &(&root - &b) / &two_a;
        return Some((ei, t.clone(), value));
    }
    None
}

/// Square root of a rational function when it is a perfect square.
pub fn expr_sqrt(e: &Expr) -> Option<Expr> {
    if e.is_zero() {
        return Some(Expr::zero());
    }
    let n = poly_sqrt(e.numer())?;
    let d = poly_sqrt(e.denom())?;
    Some(Expr::poly(n) / Expr::poly(d))
}

fn q_sqrt(c: &Q) -> Option<Q> {
    if c.is_negative() {
        return None;
    }
    let (n, d) = (c.numer(), c.denom());
    let (rn, rd): (BigInt, BigInt) = (n.sqrt(), d.sqrt());
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        Some(Q::new(rn, rd))
    } else {
        None
    }
}

fn monomial_sqrt(m: &Monomial) -> Option<Monomial> {
    let mut out = Monomial::one();
    for (s, e) in m.factors() {
        if e % 2 != 0 {
            return None;
        }
        out = out.mul(&Monomial::pow_of(s.clone(), e / 2));
    }
    Some(out)
}

/// Polynomial square root by term-wise long division in the monomial order.
fn poly_sqrt(p: &Poly) -> Option<Poly> {
    let (lm, lc) = p.leading()?;
    let mut s = Poly::monomial(monomial_sqrt(lm)?, q_sqrt(lc)?);
    let (s_lm, s_lc) = {
        let (m, c) = s.leading().expect("nonzero");
        (m.clone(), c.clone())
    };
    let two_lc = &s_lc * Q::from_integer(2.into());
    let mut r = p.sub(&s.mul(&s));
    let cap = 4 * p.num_terms() + 4;
    for _ in 0..cap {
        let Some((rm, rc)) = r.leading() else { break };
        let m = rm.div(&s_lm)?;
        let t = Poly::monomial(m, rc / &two_lc);
        // (s + t)² − p = r − 2 s t − t²
        r = r.sub(&s.mul(&t).scale(&Q::from_integer(2.into()))).sub(&t.mul(&t));
        s = s.add(&t);
    }
    (r.is_zero() && !s.is_zero() && s.leading_coeff() != Q::zero()).then_some(s)
}
