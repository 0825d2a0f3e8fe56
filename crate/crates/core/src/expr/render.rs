//! Text rendering of polynomials and rational functions.
//!
//! Two styles share the parser's grammar: `render_pretty` uses ordinary
//! precedence, `render_full` parenthesises every binary operation.

use std::cmp::Reverse;

use num_traits::{One, Signed};

use super::poly::{Monomial, Poly, Q};
use super::ratfun::Expr;

fn ordered_terms(p: &Poly) -> Vec<(&Monomial, &Q)> {
    let mut terms: Vec<_> = p.terms().collect();
    // higher total degree first, then the monomial order descending
    terms.sort_by_key(|(m, _)| Reverse(((*m).total_degree(), (*m).clone())));
    terms
}

fn q_to_string(c: &Q) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn monomial_pretty(m: &Monomial) -> String {
    m.factors()
        .iter()
        .map(|(s, e)| if *e == 1 { s.to_string() } else { format!("{s}^{e}") })
        .collect::<Vec<_>>()
        .join("*")
}

/// Pretty polynomial, e.g. `x2*u1 + x2 - 1`.
pub fn poly_to_string(p: &Poly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (m, c)) in ordered_terms(p).into_iter().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if m.is_one() {
            out.push_str(&q_to_string(&a));
        } else if a.is_one() {
            out.push_str(&monomial_pretty(m));
        } else {
            out.push_str(&q_to_string(&a));
            out.push('*');
            out.push_str(&monomial_pretty(m));
        }
    }
    out
}

fn is_single_term(p: &Poly) -> bool {
    p.num_terms() == 1
}

fn is_atomic(p: &Poly) -> bool {
    // a bare variable or non-negative integer renders without operators
    if p.num_terms() != 1 {
        return false;
    }
    let (m, c) = p.terms().next().expect("one term");
    if m.is_one() {
        return c.is_integer() && !c.is_negative();
    }
    c.is_one() && m.factors().len() == 1 && m.factors()[0].1 == 1
}

pub fn render_pretty(e: &Expr) -> String {
    let num = e.numer();
    let den = e.denom();
    if den.is_constant() {
        return poly_to_string(num);
    }
    let n = poly_to_string(num);
    let d = poly_to_string(den);
    let n = if is_single_term(num) { n } else { format!("({n})") };
    let d = if is_atomic(den) { d } else { format!("({d})") };
    format!("{n}/{d}")
}

fn q_full(c: &Q) -> String {
    let s = if c.is_integer() {
        c.numer().abs().to_string()
    } else {
        format!("({}/{})", c.numer().abs(), c.denom())
    };
    if c.is_negative() {
        format!("(-{s})")
    } else {
        s
    }
}

fn monomial_full(m: &Monomial) -> String {
    let parts: Vec<String> = m
        .factors()
        .iter()
        .map(|(s, e)| if *e == 1 { s.to_string() } else { format!("({s}^{e})") })
        .collect();
    fold_binary(parts, "*")
}

fn fold_binary(parts: Vec<String>, op: &str) -> String {
    let mut it = parts.into_iter();
    let mut acc = it.next().unwrap_or_else(|| "1".into());
    for p in it {
        acc = format!("({acc}{op}{p})");
    }
    acc
}

fn poly_full(p: &Poly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let parts: Vec<String> = ordered_terms(p)
        .into_iter()
        .map(|(m, c)| {
            if m.is_one() {
                q_full(c)
            } else if c.is_one() {
                monomial_full(m)
            } else {
                format!("({}*{})", q_full(c), monomial_full(m))
            }
        })
        .collect();
    fold_binary(parts, "+")
}

pub fn render_full(e: &Expr) -> String {
    if e.denom().is_constant() {
        poly_full(e.numer())
    } else {
        format!("({}/{})", poly_full(e.numer()), poly_full(e.denom()))
    }
}
