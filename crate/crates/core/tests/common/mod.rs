//! Random objects and calculus properties shared by the property suite and
//! the acceptance target.
#![allow(dead_code)]

use flatdisc_core::distributions::{cauchy_characteristic, is_involutive, Codistribution};
use flatdisc_core::expr::{Expr, Symbol};
use flatdisc_core::exterior::*;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub const CASES: u32 = 200;

pub fn chart(prefix: &str, n: usize) -> Chart {
    Chart::new((1..=n).map(|i| Symbol::new(&format!("{prefix}{i}"))).collect()).unwrap()
}

fn monomial(vars: &[Symbol], exps: &[u32]) -> Expr {
    let mut m = Expr::one();
    for (x, &e) in vars.iter().zip(exps) {
        for _ in 0..e {
            m = &m * &Expr::var(x.clone());
        }
    }
    m
}

/// Polynomial with at most `terms` terms, per-variable degree ≤ `deg`.
pub fn poly(vars: Vec<Symbol>, deg: u32, terms: usize) -> impl Strategy<Value = Expr> {
    let n = vars.len();
    prop::collection::vec((-3i64..=3, prop::collection::vec(0..=deg, n)), 0..=terms).prop_map(move |ts| {
        let mut p = Expr::zero();
        for (c, e) in ts {
            p = &p + &(&Expr::int(c) * &monomial(&vars, &e));
        }
        p
    })
}

/// Sum of at most two terms `c`, `c·xᵢ` or `c·xᵢxⱼ`.
pub fn low_degree(vars: Vec<Symbol>) -> impl Strategy<Value = Expr> {
    let n = vars.len();
    prop::collection::vec((-3i64..=3, prop::option::of(0..n), prop::option::of(0..n)), 0..=2).prop_map(
        move |ts| {
            let mut p = Expr::zero();
            for (c, i, j) in ts {
                let mut t = Expr::int(c);
                for k in [i, j].into_iter().flatten() {
                    t = &t * &Expr::var(vars[k].clone());
                }
                p = &p + &t;
            }
            p
        },
    )
}

/// Polynomial, sometimes divided by `xᵢ + c` with `c ≠ 0`.
pub fn ratfun(vars: Vec<Symbol>) -> impl Strategy<Value = Expr> {
    let n = vars.len();
    let vs = vars.clone();
    (poly(vars, 2, 3), prop::option::weighted(0.3, (0..n, 1i64..=3))).prop_map(move |(p, den)| match den {
        None => p,
        Some((i, c)) => &p / &(&Expr::var(vs[i].clone()) + &Expr::int(c)),
    })
}

fn combinations(n: usize, p: usize) -> Vec<Vec<usize>> {
    if p == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut c: Vec<usize> = (0..p).collect();
    loop {
        out.push(c.clone());
        if !next_combination(&mut c, n) {
            return out;
        }
    }
}

pub fn form(c: &Chart, p: usize) -> impl Strategy<Value = DifferentialForm> {
    let idx = combinations(c.dim(), p);
    let c = c.clone();
    prop::collection::vec(prop::option::weighted(0.6, ratfun(c.vars().to_vec())), idx.len())
        .prop_map(move |coeffs| {
            let terms = idx.iter().cloned().zip(coeffs).filter_map(|(i, e)| e.map(|e| (i, e)));
            DifferentialForm::from_terms(&c, p, terms).unwrap()
        })
}

pub fn field(c: &Chart, deg: u32) -> impl Strategy<Value = VectorField> {
    let c = c.clone();
    prop::collection::vec(poly(c.vars().to_vec(), deg, 2), c.dim())
        .prop_map(move |v| VectorField::new(&c, v).unwrap())
}

fn eq_forms(a: &DifferentialForm, b: &DifferentialForm, what: &str) -> Result<(), String> {
    if a.sub(b).map_err(|e| e.to_string())?.is_zero() {
        Ok(())
    } else {
        Err(format!("{what}: {a} ≠ {b}"))
    }
}

fn sign(k: usize) -> Expr {
    if k % 2 == 0 {
        Expr::one()
    } else {
        -Expr::one()
    }
}

// ---- properties -----------------------------------------------------------

pub fn d_squared(w: &DifferentialForm) -> Result<(), String> {
    let dd = exterior_derivative(&exterior_derivative(w));
    if dd.is_zero() {
        Ok(())
    } else {
        Err(format!("d(d({w})) = {dd}"))
    }
}

pub fn wedge_antisymmetry(a: &DifferentialForm, b: &DifferentialForm) -> Result<(), String> {
    let ab = wedge(a, b).map_err(|e| e.to_string())?;
    let ba = wedge(b, a).map_err(|e| e.to_string())?;
    eq_forms(&ab, &ba.scale(&sign(a.degree() * b.degree())), "a∧b vs ±b∧a")
}

pub fn interior_derivation(v: &VectorField, a: &DifferentialForm, b: &DifferentialForm) -> Result<(), String> {
    let e = |r: flatdisc_core::Result<DifferentialForm>| r.map_err(|e| e.to_string());
    let lhs = e(interior_product(v, &e(wedge(a, b))?))?;
    let r1 = e(wedge(&e(interior_product(v, a))?, b))?;
    let r2 = e(wedge(a, &e(interior_product(v, b))?))?.scale(&sign(a.degree()));
    eq_forms(&lhs, &e(r1.add(&r2))?, "interior product rule")
}

pub fn jacobi(x: &VectorField, y: &VectorField, z: &VectorField) -> Result<(), String> {
    let br = |a: &VectorField, b: &VectorField| lie_bracket(a, b).map_err(|e| e.to_string());
    let (a, b, c) = (br(x, &br(y, z)?)?, br(y, &br(z, x)?)?, br(z, &br(x, y)?)?);
    let s = a.add(&b).and_then(|t| t.add(&c)).map_err(|e| e.to_string())?;
    if s.is_zero() {
        Ok(())
    } else {
        Err(format!("Jacobi sum {s}"))
    }
}

/// `φ*(dω) = d(φ*ω)` and `φ*(a∧b) = φ*a ∧ φ*b`.
pub fn pullback_naturality(
    phi: &MapBetweenCharts,
    w: &DifferentialForm,
    b: &DifferentialForm,
) -> Result<(), String> {
    let e = |r: flatdisc_core::Result<DifferentialForm>| r.map_err(|e| e.to_string());
    let lhs = e(pullback(phi, &exterior_derivative(w)))?;
    let rhs = exterior_derivative(&e(pullback(phi, w))?);
    eq_forms(&lhs, &rhs, "pullback commutes with d")?;
    let lhs = e(pullback(phi, &e(wedge(w, b))?))?;
    let rhs = e(wedge(&e(pullback(phi, w))?, &e(pullback(phi, b))?))?;
    eq_forms(&lhs, &rhs, "pullback commutes with ∧")
}

/// `⟨dfʲ, ∂_{fⁱ}⟩ = δᵢʲ`.
pub fn dual_frame_duality(c: &Chart, f: &[Expr]) -> Result<(), String> {
    let frame = dual_frame(c, f).map_err(|e| e.to_string())?;
    for (i, v) in frame.iter().enumerate() {
        for (j, fj) in f.iter().enumerate() {
            let p = pairing(&DifferentialForm::differential(c, fj), v).map_err(|e| e.to_string())?;
            let want = if i == j { Expr::one() } else { Expr::zero() };
            if p != want {
                return Err(format!("<df{j}, d/df{i}> = {p}"));
            }
        }
    }
    Ok(())
}

/// Every characteristic field `c` has `c⌋P = 0`, `c⌋dP ⊆ P`, and the
/// characteristic distribution is involutive.
pub fn cauchy_conditions(p: &Codistribution) -> Result<(), String> {
    let cc = cauchy_characteristic(p).map_err(|e| e.to_string())?;
    for c in cc.basis() {
        for w in p.basis() {
            let a = pairing(&w, &c).map_err(|e| e.to_string())?;
            if !a.is_zero() {
                return Err(format!("{c} does not annihilate {w}"));
            }
            let i = interior_product(&c, &exterior_derivative(&w)).map_err(|e| e.to_string())?;
            if !p.contains(&i) {
                return Err(format!("{c} ⌋ d({w}) = {i} not in P"));
            }
        }
    }
    if !is_involutive(&cc) {
        return Err("characteristic distribution not involutive".into());
    }
    Ok(())
}

// ---- strategies for the properties ---------------------------------------

pub fn map_strategy() -> impl Strategy<Value = MapBetweenCharts> {
    let s = chart("s", 2);
    let t = chart("x", 3);
    prop::collection::vec(low_degree(s.vars().to_vec()), 3)
        .prop_map(move |comps| MapBetweenCharts::new(&s, &t, comps).unwrap())
}

/// A map with forms on its target, avoiding maps whose image lies in a
/// form's singular set.
pub fn pullback_case() -> impl Strategy<Value = (MapBetweenCharts, DifferentialForm, DifferentialForm)> {
    let t = chart("x", 3);
    (map_strategy(), 0usize..=1)
        .prop_flat_map(move |(m, p)| (Just(m), form(&t, p), form(&t, 1)))
        .prop_filter("pullback undefined", |(m, w, b)| pullback(m, w).is_ok() && pullback(m, b).is_ok())
}

/// Triangular perturbations `fᵢ = cᵢxᵢ + pᵢ(x₁…x_{i−1})`: always a chart.
pub fn triangular_functions(c: &Chart) -> impl Strategy<Value = Vec<Expr>> {
    let c = c.clone();
    let n = c.dim();
    (
        prop::collection::vec(prop_oneof![-3i64..=-1, 1i64..=3], n),
        prop::collection::vec(poly(c.vars().to_vec(), 2, 3), n),
    )
        .prop_map(move |(cs, ps)| {
            let vars = c.vars();
            (0..n)
                .map(|i| {
                    // keep only the part of pᵢ in earlier variables
                    let mut bind = std::collections::HashMap::new();
                    for x in &vars[i..] {
                        bind.insert(x.clone(), Expr::zero());
                    }
                    &(&Expr::int(cs[i]) * &Expr::var(vars[i].clone())) + &ps[i].substitute(&bind)
                })
                .collect()
        })
}

/// Codistributions with one or two generators on four variables.
pub fn codistribution_strategy() -> impl Strategy<Value = Codistribution> {
    let c = chart("x", 4);
    let cc = c.clone();
    let one = move || {
        let c = cc.clone();
        prop::collection::vec(low_degree(c.vars().to_vec()), 4)
            .prop_map(move |v| DifferentialForm::one_form(&c, &v).unwrap())
    };
    prop::collection::vec(one(), 1..=2).prop_map(move |g| Codistribution::new(&c, g).unwrap())
}

/// Runs `check` on `CASES` deterministic samples.
pub fn run_property<S: Strategy>(
    cases: u32,
    strategy: S,
    check: impl Fn(S::Value) -> Result<(), String>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner
        .run(&strategy, |v| check(v).map_err(TestCaseError::fail))
        .map_err(|e| e.to_string())
}

/// The calculus property suite: `(name, outcome)` per property.
pub fn calculus_suite(cases: u32) -> Vec<(&'static str, Result<(), String>)> {
    let c3 = chart("x", 3);
    let c4 = chart("x", 4);
    vec![
        (
            "d∘d = 0",
            run_property(cases, (0usize..=2).prop_flat_map(move |p| form(&c3, p)), |w| d_squared(&w)),
        ),
        ("wedge graded antisymmetry", {
            let c = chart("x", 3);
            run_property(
                cases,
                (0usize..=2, 0usize..=2).prop_flat_map(move |(p, q)| (form(&c, p), form(&c, q))),
                |(a, b)| wedge_antisymmetry(&a, &b),
            )
        }),
        ("interior-product derivation rule", {
            let c = chart("x", 3);
            run_property(
                cases,
                (1usize..=2, 0usize..=1)
                    .prop_flat_map(move |(p, q)| (field(&c, 1), form(&c, p), form(&c, q))),
                |(v, a, b)| interior_derivation(&v, &a, &b),
            )
        }),
        ("Lie-bracket Jacobi identity", {
            let c = chart("x", 3);
            run_property(cases, (field(&c, 2), field(&c, 2), field(&c, 2)), |(x, y, z)| jacobi(&x, &y, &z))
        }),
        (
            "pullback naturality",
            run_property(cases, pullback_case(), |(m, w, b)| pullback_naturality(&m, &w, &b)),
        ),
        ("dual-frame duality", {
            let c = c4.clone();
            run_property(cases, triangular_functions(&c4), move |f| dual_frame_duality(&c, &f))
        }),
        ("Cauchy characteristic conditions", {
            run_property(cases, codistribution_strategy(), |p| cauchy_conditions(&p))
        }),
    ]
}
