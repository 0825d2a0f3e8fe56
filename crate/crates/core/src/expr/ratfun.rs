//! Canonical rational functions: the `Expr` type used throughout.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::poly::{gcd, Poly, Q};
use super::symbol::Symbol;
use crate::error::ExprError;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct Inner {
    num: Poly,
    den: Poly,
}

/// An exact rational function over ℚ.
///
/// Always stored in normal form: numerator and denominator coprime and the
/// denominator monic, so structural equality is mathematical equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expr(Arc<Inner>);

impl Expr {
    fn raw(num: Poly, den: Poly) -> Self {
        Expr(Arc::new(Inner { num, den }))
    }

    /// Builds `num / den` and brings it to normal form.
    ///
    /// Panics if `den` is the zero polynomial.
    pub fn from_polys(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "rational function with zero denominator");
        if num.is_zero() {
            return Expr::zero();
        }
        if let Some(c) = den.as_constant() {
            return Expr::raw(num.scale(&c.recip()), Poly::one());
        }
        let g = gcd(&num, &den);
        let (n, d) = if g.is_constant() {
            (num, den)
        } else {
            (
                num.exact_div(&g).expect("gcd divides numerator"),
                den.exact_div(&g).expect("gcd divides denominator"),
            )
        };
        let lc = d.leading_coeff();
        if lc.is_one() {
            Expr::raw(n, d)
        } else {
            let inv = lc.recip();
            Expr::raw(n.scale(&inv), d.scale(&inv))
        }
    }

    pub fn poly(p: Poly) -> Self {
        Expr::raw(p, Poly::one())
    }

    pub fn zero() -> Self {
        Expr::raw(Poly::zero(), Poly::one())
    }

    pub fn one() -> Self {
        Expr::int(1)
    }

    pub fn int(n: i64) -> Self {
        Expr::poly(Poly::from_int(n))
    }

    pub fn rational(c: Q) -> Self {
        Expr::poly(Poly::constant(c))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Expr::rational(Q::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn var(name: impl Into<Symbol>) -> Self {
        Expr::poly(Poly::var(name.into()))
    }

    pub fn numer(&self) -> &Poly {
        &self.0.num
    }

    pub fn denom(&self) -> &Poly {
        &self.0.den
    }

    /// Exact zero test; exact because the class is closed rational functions.
    pub fn is_zero(&self) -> bool {
        self.0.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.den.is_constant() && self.0.num.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.0.num.is_constant() && self.0.den.is_constant()
    }

    pub fn is_polynomial(&self) -> bool {
        self.0.den.is_constant()
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.is_constant() {
            Some(self.0.num.constant_term())
        } else {
            None
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Symbol> {
        let mut v = self.0.num.vars();
        v.extend(self.0.den.vars());
        v
    }

    pub fn depends_on(&self, v: &Symbol) -> bool {
        self.0.num.contains_var(v) || self.0.den.contains_var(v)
    }

    /// Size measure used for deterministic "simplest first" choices.
    pub fn complexity(&self) -> usize {
        self.0.num.num_terms() + if self.0.den.is_constant() { 0 } else { self.0.den.num_terms() }
    }

    pub fn recip(&self) -> Option<Expr> {
        if self.is_zero() {
            None
        } else {
            Some(Expr::from_polys(self.0.den.clone(), self.0.num.clone()))
        }
    }

    pub fn checked_div(&self, other: &Expr) -> Option<Expr> {
        other.recip().map(|r| self * &r)
    }

    pub fn pow(&self, e: i32) -> Expr {
        if e >= 0 {
            let e = e as u32;
            Expr::raw(self.0.num.pow(e), self.0.den.pow(e)).renormalise_den()
        } else {
            self.recip()
                .expect("negative power of zero")
                .pow(-e)
        }
    }

    fn renormalise_den(self) -> Expr {
        let lc = self.0.den.leading_coeff();
        if lc.is_one() {
            self
        } else {
            let inv = lc.recip();
            Expr::raw(self.0.num.scale(&inv), self.0.den.scale(&inv))
        }
    }

    /// Exact partial derivative.
    pub fn diff(&self, v: &Symbol) -> Expr {
        if !self.depends_on(v) {
            return Expr::zero();
        }
        let (n, d) = (&self.0.num, &self.0.den);
        if d.is_constant() {
            return Expr::raw(n.derivative(v), d.clone());
        }
        let dn = n.derivative(v);
        let dd = d.derivative(v);
        Expr::from_polys(dn.mul(d).sub(&n.mul(&dd)), d.mul(d))
    }

    /// Simultaneous substitution of variables by expressions.
    ///
    /// Panics if the denominator vanishes identically; see
    /// [`Expr::try_substitute`].
    pub fn substitute(&self, bindings: &HashMap<Symbol, Expr>) -> Expr {
        self.try_substitute(bindings)
            .expect("substitution made a denominator vanish identically")
    }

    pub fn try_substitute(&self, bindings: &HashMap<Symbol, Expr>) -> Result<Expr, ExprError> {
        if bindings.is_empty() || self.free_vars().iter().all(|v| !bindings.contains_key(v)) {
            return Ok(self.clone());
        }
        let n = subst_poly(&self.0.num, bindings);
        let d = subst_poly(&self.0.den, bindings);
        n.checked_div(&d).ok_or(ExprError::DivisionByZero)
    }

    /// Evaluation at a rational point.
    pub fn eval(&self, point: &HashMap<Symbol, Q>) -> Result<Q, ExprError> {
        let d = self
            .0
            .den
            .eval(point)
            .ok_or_else(|| ExprError::UnboundVariable(self.first_unbound(point)))?;
        if d.is_zero() {
            return Err(ExprError::Singular);
        }
        let n = self
            .0
            .num
            .eval(point)
            .ok_or_else(|| ExprError::UnboundVariable(self.first_unbound(point)))?;
        Ok(n / d)
    }

    fn first_unbound(&self, point: &HashMap<Symbol, Q>) -> String {
        self.free_vars()
            .into_iter()
            .find(|v| !point.contains_key(v))
            .map(|v| v.to_string())
            .unwrap_or_default()
    }

    /// Value at the origin when defined there.
    pub fn value_at_origin(&self) -> Option<Q> {
        let d = self.0.den.constant_term();
        if d.is_zero() {
            None
        } else {
            Some(self.0.num.constant_term() / d)
        }
    }

    /// Fully parenthesised rendering in the expression grammar.
    pub fn render(&self) -> String {
        super::render::render_full(self)
    }
}

fn subst_poly(p: &Poly, bindings: &HashMap<Symbol, Expr>) -> Expr {
    let mut cache: HashMap<(Symbol, u32), Expr> = HashMap::new();
    let mut acc_num = Expr::zero();
    for (m, c) in p.terms() {
        let mut t = Expr::rational(c.clone());
        for (s, e) in m.factors() {
            let f = cache
                .entry((s.clone(), *e))
                .or_insert_with(|| match bindings.get(s) {
                    Some(x) => x.pow(*e as i32),
                    None => Expr::var(s.clone()).pow(*e as i32),
                })
                .clone();
            t = &t * &f;
        }
        acc_num = &acc_num + &t;
    }
    acc_num
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::render::render_pretty(self))
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl<'a> Add<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (a, b) = (&self.0, &rhs.0);
        if a.den == b.den {
            if a.den.is_constant() {
                return Expr::raw(a.num.add(&b.num), a.den.clone());
            }
            return Expr::from_polys(a.num.add(&b.num), a.den.clone());
        }
        if b.den.is_constant() {
            let c = b.den.constant_term().recip();
            return Expr::from_polys(a.num.add(&b.num.scale(&c).mul(&a.den)), a.den.clone());
        }
        if a.den.is_constant() {
            let c = a.den.constant_term().recip();
            return Expr::from_polys(a.num.scale(&c).mul(&b.den).add(&b.num), b.den.clone());
        }
        let g = gcd(&a.den, &b.den);
        let ad = a.den.exact_div(&g).expect("gcd divides");
        let bd = b.den.exact_div(&g).expect("gcd divides");
        let num = a.num.mul(&bd).add(&b.num.mul(&ad));
        Expr::from_polys(num, ad.mul(&b.den))
    }
}

impl<'a> Sub<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        if self.is_zero() || rhs.is_zero() {
            return Expr::zero();
        }
        if self.is_one() {
            return rhs.clone();
        }
        if rhs.is_one() {
            return self.clone();
        }
        let (a, b) = (&self.0, &rhs.0);
        if a.den.is_constant() && b.den.is_constant() {
            return Expr::raw(a.num.mul(&b.num), Poly::one());
        }
        // cross-cancel before multiplying
        let g1 = gcd(&a.num, &b.den);
        let g2 = gcd(&b.num, &a.den);
        let an = a.num.exact_div(&g1).expect("gcd divides");
        let bd = b.den.exact_div(&g1).expect("gcd divides");
        let bn = b.num.exact_div(&g2).expect("gcd divides");
        let ad = a.den.exact_div(&g2).expect("gcd divides");
        Expr::raw(an.mul(&bn), ad.mul(&bd)).renormalise_den()
    }
}

impl<'a> Div<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        self.checked_div(rhs).expect("division by the zero expression")
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::raw(self.0.num.neg(), self.0.den.clone())
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                (&self).$m(rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                self.$m(&rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
owned_binop!(Div, div);

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl Zero for Expr {
    fn zero() -> Self {
        Expr::zero()
    }
    fn is_zero(&self) -> bool {
        Expr::is_zero(self)
    }
}

impl One for Expr {
    fn one() -> Self {
        Expr::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Expr {
        Expr::var(n)
    }

    #[test]
    fn normal_form_cancels() {
        let e = &(&(&v("x2") + &Expr::one()) / &v("x1")) * &v("x1");
        let d = &(&e - &v("x2")) - &Expr::one();
        assert!(d.is_zero());
    }

    #[test]
    fn quotient_rule() {
        let e = &(&v("x1") * &(&v("u1") + &Expr::one())) / &(&v("x2") + &Expr::one());
        let expected = -(&(&v("x1") * &(&v("u1") + &Expr::one()))
            / &(&v("x2") + &Expr::one()).pow(2));
        assert_eq!(e.diff(&Symbol::new("x2")), expected);
    }

    #[test]
    fn substitution_is_simultaneous() {
        let e = &v("a") - &v("b");
        let mut b = HashMap::new();
        b.insert(Symbol::new("a"), v("b"));
        b.insert(Symbol::new("b"), v("a"));
        assert_eq!(e.substitute(&b), &v("b") - &v("a"));
    }
}
