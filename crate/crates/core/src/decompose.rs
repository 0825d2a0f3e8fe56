//! One normal-form step: from a system without trivial inputs build the
//! input change `q`, the state change `h`, the transformed system and its
//! split into a pure shift part and a remaining subsystem.

use std::collections::HashMap;

use crate::distributions::{
    cauchy_characteristic, first_integrals, largest_annihilated_subcodistribution,
    Codistribution, Distribution,
};
use crate::error::{Error, Result};
use crate::expr::{solve_map_inverse, Expr, Symbol, SymbolicMatrix};
use crate::exterior::{complete_with_coordinates, next_combination, Chart};
use crate::system::{projectable_input_fields, DiscreteSystem, ProjectableInputs};

/// `P₀ = span(df¹, …, dfⁿ)` on the total chart.
pub fn build_p0(s: &DiscreteSystem) -> Codistribution {
    Codistribution::exact(s.total(), s.dynamics())
}

/// `count` names `base1, base2, …` avoiding `taken`.
pub fn fresh_names(base: &str, count: usize, taken: &[&Chart]) -> Vec<Symbol> {
    let clash = |name: &str| taken.iter().any(|c| c.contains(&Symbol::new(name)));
    let mut prefix = base.to_string();
    while (1..=count).any(|i| clash(&format!("{prefix}{i}"))) {
        prefix.push('_');
    }
    (1..=count).map(|i| Symbol::new(&format!("{prefix}{i}"))).collect()
}

fn var(s: &Symbol) -> Expr {
    Expr::var(s.clone())
}

fn binding(names: &[Symbol], values: &[Expr]) -> HashMap<Symbol, Expr> {
    names.iter().cloned().zip(values.iter().cloned()).collect()
}

fn sum_complexity<'a>(it: impl IntoIterator<Item = &'a Expr>) -> usize {
    it.into_iter().map(Expr::complexity).sum()
}

/// All objects of one normal-form step.
#[derive(Clone, Debug)]
pub struct DecompositionStep {
    pub system: DiscreteSystem,
    pub projectable: ProjectableInputs,
    pub w: Distribution,
    pub v: Distribution,
    pub m_w: usize,
    pub m_v: usize,
    pub p0: Codistribution,
    pub p1: Codistribution,
    /// First integrals of `f⋆W` on the shifted chart.
    pub chi: Vec<Expr>,
    /// `gⁱ = χⁱ ∘ f`, `n − m_w` functions on the total chart.
    pub g: Vec<Expr>,
    /// Indices into `g` forming `v`.
    pub v_indices: Vec<usize>,
    /// Indices into `f` forming `w`.
    pub w_indices: Vec<usize>,
    pub v_names: Vec<Symbol>,
    pub w_names: Vec<Symbol>,
    /// `(v, w) = q(x, u)`.
    pub q: Vec<Expr>,
    /// `u = q⁻¹(x, v, w)`, one entry per original input.
    pub q_inv: Vec<Expr>,
    pub z_names: Vec<Symbol>,
    /// `z = p(x, v)`.
    pub p: Vec<Expr>,
    /// `x = p⁻¹(z, v)`.
    pub p_inv: Vec<Expr>,
    pub xt_names: Vec<Symbol>,
    /// `x = h(x̃)`.
    pub h: Vec<Expr>,
    /// `x̃ = h⁻¹(x)`.
    pub h_inv: Vec<Expr>,
    /// `x̃₊ = (g̃(x̃, ṽ), ṽ, w̃)`.
    pub transformed: Vec<Expr>,
}

/// Renaming applied by [`split`]: new name → expression in the step's
/// tilde coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Renaming {
    pub states: Vec<(Symbol, Symbol)>,
    pub inputs: Vec<(Symbol, Symbol)>,
}

#[derive(Clone, Debug)]
pub struct SplitResult {
    /// `x̃₊^{n−m_w+1..n} = w̃`.
    pub shift: Vec<(Symbol, Symbol)>,
    pub remaining: Option<DiscreteSystem>,
    pub renaming: Renaming,
}

struct Selection {
    v_indices: Vec<usize>,
    w_indices: Vec<usize>,
    q_inv: Vec<Expr>,
    h_inv: Vec<Expr>,
    h: Vec<Expr>,
    g_hat: Vec<Expr>,
}

pub fn normal_form_step(s: &DiscreteSystem) -> Result<DecompositionStep> {
    let (n, m) = (s.n(), s.m());
    let total = s.total();
    let projectable = projectable_input_fields(s)?;
    let (w, v) = (projectable.split.w.clone(), projectable.split.v.clone());
    let (m_w, m_v) = (w.dim(), v.dim());
    if m_w == 0 {
        return Err(Error::NoProjectableField);
    }
    let p0 = build_p0(s);
    let p1 = largest_annihilated_subcodistribution(&p0, &w)?;
    if p1.dim() != n - m_w {
        return Err(Error::Inconsistent(format!(
            "dim P1 = {}, expected {}",
            p1.dim(),
            n - m_w
        )));
    }
    let cc = cauchy_characteristic(&p1)?;
    if !cc.intersection(&s.input_distribution())?.span_eq(&w) {
        return Err(Error::CauchyMismatch(format!(
            "characteristic directions {} do not meet the inputs in {}",
            cc.render(),
            w.render()
        )));
    }

    // g = χ ∘ f with χ first integrals of the pushed-forward W
    let shifted = s.shifted();
    let pushed = Distribution::new(shifted, projectable.pushed.clone())?;
    let chi_raw = first_integrals(&pushed, n - m_w)?;
    let fmap = s.map();
    let mut chi = Vec::with_capacity(chi_raw.len());
    let mut g = Vec::with_capacity(chi_raw.len());
    for c in &chi_raw {
        let mut c = c.clone();
        let mut gi = fmap.compose(&c);
        // prefer g over 1/g
        if !gi.is_polynomial() && gi.numer().is_constant() {
            c = c.recip().expect("nonzero integral");
            gi = gi.recip().expect("nonzero integral");
        }
        let offset = gi.value_at_origin().map(Expr::rational).unwrap_or_else(Expr::zero);
        chi.push(&c - &offset);
        g.push(&gi - &offset);
    }
    if !Codistribution::exact(total, &g).span_eq(&p1) {
        return Err(Error::Inconsistent("span(dg) differs from P1".into()));
    }

    let v_names = fresh_names("v", m_v, &[total]);
    let w_names = fresh_names("w", m_w, &[total]);
    let xt_names = fresh_names("xt", n, &[total]);
    let z_names = fresh_names("z", n, &[total]);
    let sel = select(s, &chi, &g, m_v, m_w, &v_names, &w_names, &xt_names)?;

    let q: Vec<Expr> = sel
        .v_indices
        .iter()
        .map(|&i| g[i].clone())
        .chain(sel.w_indices.iter().map(|&i| s.dynamics()[i].clone()))
        .collect();

    // z = p(x, v): ĝ plus coordinate completions in x
    let mut p: Vec<Expr> = sel.g_hat.clone();
    let comp = complete_with_coordinates(&p, &Chart::new(s.states().vars().to_vec())?)
        .filter(|c| c.len() == n - p.len())
        .ok_or_else(|| Error::NotReachable("no completion of the map z = p(x, v)".into()))?;
    p.extend(comp.iter().map(|&i| var(s.states().var(i))));
    let p_eqs: Vec<Expr> = z_names.iter().zip(&p).map(|(z, pi)| &var(z) - pi).collect();
    let p_sol = solve_map_inverse(&p_eqs, s.states().vars()).map_err(|e| match e {
        crate::ExprError::RankDeficient { .. } => {
            Error::NotReachable("the map z = p(x, v) is not invertible".into())
        }
        other => other.into(),
    })?;
    let p_inv: Vec<Expr> = s.states().vars().iter().map(|x| p_sol[x].clone()).collect();

    // h identity: f(p⁻¹(z, v), q⁻¹(v, w)) = h(z¹..z^{n−m}, v, w)
    let xs = s.states().vars();
    let us = s.inputs().vars();
    let mut lhs_bind = binding(xs, &p_inv);
    let q_inv_at_p: Vec<Expr> = sel.q_inv.iter().map(|e| e.substitute(&binding(xs, &p_inv))).collect();
    lhs_bind.extend(binding(us, &q_inv_at_p));
    let mut args: Vec<Expr> = z_names[..n - m].iter().map(var).collect();
    args.extend(v_names.iter().map(var));
    args.extend(w_names.iter().map(var));
    let h_at = binding(&xt_names, &args);
    for (i, f) in s.dynamics().iter().enumerate() {
        let r = &f.substitute(&lhs_bind) - &sel.h[i].substitute(&h_at);
        if !r.is_zero() {
            return Err(Error::Inconsistent(format!("h identity fails in component {}: {r}", i + 1)));
        }
    }

    // x̃₊ = h⁻¹(f(h(x̃), q⁻¹(h(x̃), ṽ, w̃)))
    let hx = binding(xs, &sel.h);
    let mut full = hx.clone();
    full.extend(binding(us, &sel.q_inv.iter().map(|e| e.substitute(&hx)).collect::<Vec<_>>()));
    let f_in_tilde: Vec<Expr> = s.dynamics().iter().map(|f| f.substitute(&full)).collect();
    let at_f = binding(xs, &f_in_tilde);
    let transformed: Vec<Expr> = sel.h_inv.iter().map(|c| c.substitute(&at_f)).collect();
    for (i, t) in transformed.iter().enumerate() {
        if i < n - m_w && w_names.iter().any(|w| t.depends_on(w)) {
            return Err(Error::Inconsistent(format!("transformed component {} depends on w", i + 1)));
        }
        let expected = if i >= n - m_w {
            Some(var(&w_names[i - (n - m_w)]))
        } else if i >= n - m {
            Some(var(&v_names[i - (n - m)]))
        } else {
            None
        };
        if let Some(e) = expected {
            if t != &e {
                return Err(Error::Inconsistent(format!("transformed component {} is {t}, expected {e}", i + 1)));
            }
        }
    }

    Ok(DecompositionStep {
        system: s.clone(),
        projectable,
        w,
        v,
        m_w,
        m_v,
        p0,
        p1,
        chi,
        g,
        v_indices: sel.v_indices,
        w_indices: sel.w_indices,
        v_names,
        w_names,
        q,
        q_inv: sel.q_inv,
        z_names,
        p,
        p_inv,
        xt_names,
        h: sel.h,
        h_inv: sel.h_inv,
        transformed,
    })
}

/// Chooses `w` among the components of `f` and `v` among the `g`s.
///
/// Admissible choices make `(v, w)` invertible in `u` and `h⁻¹` a local
/// diffeomorphism; among those the least complex transformation wins,
/// ties going to later indices.
#[allow(clippy::too_many_arguments)]
fn select(
    s: &DiscreteSystem,
    chi: &[Expr],
    g: &[Expr],
    m_v: usize,
    m_w: usize,
    v_names: &[Symbol],
    w_names: &[Symbol],
    xt_names: &[Symbol],
) -> Result<Selection> {
    let (n, m) = (s.n(), s.m());
    let xs = s.states().vars();
    let us = s.inputs().vars();
    let to_x = binding(s.shifted().vars(), &xs.iter().map(var).collect::<Vec<_>>());
    let mut best: Option<(usize, Vec<usize>, Vec<usize>, Selection)> = None;

    let mut wc: Vec<usize> = (0..m_w).collect();
    loop {
        let mut vc: Vec<usize> = (0..m_v).collect();
        loop {
            if let Some(sel) = try_selection(s, chi, g, &vc, &wc, v_names, w_names, xt_names, &to_x, xs, us, n, m) {
                let cost = sum_complexity(&sel.h)
                    + sum_complexity(&sel.h_inv)
                    + sum_complexity(&sel.q_inv)
                    + sel.v_indices.iter().map(|&i| g[i].complexity()).sum::<usize>()
                    + sel.w_indices.iter().map(|&i| s.dynamics()[i].complexity()).sum::<usize>();
                // colex comparison: compare reversed index lists
                let key_w: Vec<usize> = wc.iter().rev().copied().collect();
                let key_v: Vec<usize> = vc.iter().rev().copied().collect();
                let better = match &best {
                    None => true,
                    Some((c, bw, bv, _)) => cost < *c || (cost == *c && (key_w.clone(), key_v.clone()) > (bw.clone(), bv.clone())),
                };
                if better {
                    best = Some((cost, key_w, key_v, sel));
                }
            }
            if m_v == 0 || !next_combination(&mut vc, g.len()) {
                break;
            }
        }
        if !next_combination(&mut wc, n) {
            break;
        }
    }
    best.map(|b| b.3).ok_or(Error::Resorting { count: m })
}

#[allow(clippy::too_many_arguments)]
fn try_selection(
    s: &DiscreteSystem,
    chi: &[Expr],
    g: &[Expr],
    vc: &[usize],
    wc: &[usize],
    v_names: &[Symbol],
    w_names: &[Symbol],
    xt_names: &[Symbol],
    to_x: &HashMap<Symbol, Expr>,
    xs: &[Symbol],
    us: &[Symbol],
    n: usize,
    m: usize,
) -> Option<Selection> {
    let qv: Vec<Expr> = vc
        .iter()
        .map(|&i| g[i].clone())
        .chain(wc.iter().map(|&i| s.dynamics()[i].clone()))
        .collect();
    if SymbolicMatrix::jacobian(&qv, us).generic_rank() != m {
        return None;
    }
    // h⁻¹(x) = (χ_rest(x), χ_v(x), x_w)
    let rest: Vec<usize> = (0..g.len()).filter(|i| !vc.contains(i)).collect();
    let h_inv: Vec<Expr> = rest
        .iter()
        .chain(vc)
        .map(|&i| chi[i].substitute(to_x))
        .chain(wc.iter().map(|&i| var(&xs[i])))
        .collect();
    if SymbolicMatrix::jacobian(&h_inv, xs).generic_rank() != n {
        return None;
    }
    let h_eqs: Vec<Expr> = xt_names.iter().zip(&h_inv).map(|(t, hi)| &var(t) - hi).collect();
    let h_sol = solve_map_inverse(&h_eqs, xs).ok()?;
    let h: Vec<Expr> = xs.iter().map(|x| h_sol[x].clone()).collect();

    let names: Vec<Symbol> = v_names.iter().chain(w_names).cloned().collect();
    let q_eqs: Vec<Expr> = names.iter().zip(&qv).map(|(nm, qi)| &var(nm) - qi).collect();
    let q_sol = solve_map_inverse(&q_eqs, us).ok()?;
    let q_inv: Vec<Expr> = us.iter().map(|u| q_sol[u].clone()).collect();
    let qb = binding(us, &q_inv);
    let g_hat: Vec<Expr> = rest.iter().map(|&i| g[i].substitute(&qb)).collect();
    if g_hat.iter().any(|e| w_names.iter().any(|w| e.depends_on(w))) {
        return None;
    }
    debug_assert_eq!(g_hat.len(), n - m);
    Some(Selection {
        v_indices: vc.to_vec(),
        w_indices: wc.to_vec(),
        q_inv,
        h_inv,
        h,
        g_hat,
    })
}

/// Splits the transformed system into the pure shift part and the
/// remaining subsystem, renaming per the convention: remaining states take
/// the first `n − m_w` state names; inputs are the shifted-out states
/// first, then `ṽ`.
pub fn split(step: &DecompositionStep) -> Result<SplitResult> {
    let s = &step.system;
    let n = s.n();
    let keep = n - step.m_w;
    let shift: Vec<(Symbol, Symbol)> = step.xt_names[keep..]
        .iter()
        .cloned()
        .zip(step.w_names.iter().cloned())
        .collect();
    if keep == 0 {
        return Ok(SplitResult {
            shift,
            remaining: None,
            renaming: Renaming {
                states: Vec::new(),
                inputs: Vec::new(),
            },
        });
    }
    let new_states: Vec<Symbol> = s.states().vars()[..keep].to_vec();
    let old_inputs: Vec<Symbol> = step.xt_names[keep..].iter().chain(&step.v_names).cloned().collect();
    let mut new_inputs: Vec<Symbol> = s.inputs().vars().iter().take(old_inputs.len()).cloned().collect();
    let mut k = 1;
    while new_inputs.len() < old_inputs.len() {
        let c = Symbol::new(&format!("u{k}"));
        k += 1;
        if !s.total().contains(&c) && !new_inputs.contains(&c) {
            new_inputs.push(c);
        }
    }
    let mut bind = binding(&step.xt_names[..keep], &new_states.iter().map(var).collect::<Vec<_>>());
    bind.extend(binding(&old_inputs, &new_inputs.iter().map(var).collect::<Vec<_>>()));
    let dynamics: Vec<Expr> = step.transformed[..keep].iter().map(|t| t.substitute(&bind)).collect();
    let remaining = DiscreteSystem::new(new_states.clone(), new_inputs.clone(), dynamics)?;
    Ok(SplitResult {
        shift,
        remaining: Some(remaining),
        renaming: Renaming {
            states: new_states.into_iter().zip(step.xt_names[..keep].iter().cloned()).collect(),
            inputs: new_inputs.into_iter().zip(old_inputs).collect(),
        },
    })
}
