//! The simple and advanced flatness tests, flat-output extraction and the
//! assembled parametrization `F = (F_x, F_u)` with its verification.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::decompose::{fresh_names, normal_form_step, split, DecompositionStep, SplitResult};
use crate::distributions::{first_integrals, involutive_complement, Codistribution, Distribution};
use crate::expr::{Expr, Symbol, SymbolicMatrix};
use crate::exterior::{pushforward_with_section, Chart, MapBetweenCharts, VectorField};
use crate::system::{
    eliminate_trivial_inputs, projectable_fields, DiscreteSystem, ProjectableOutcome, RingTest, TrivialInputRecord,
};
use crate::{Error, Result};

/// Reason attached to a negative verdict when no field projects.
pub const ZERO_PROJECTABLE: &str = "zero-dimensional projectable distribution";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Flat,
    /// A necessary condition fails.
    NotFlat(String),
    /// A closed-form step (integration, inversion, …) could not be carried out.
    Undecided(String),
}

impl Verdict {
    pub fn is_flat(&self) -> bool {
        matches!(self, Verdict::Flat)
    }

    pub fn is_not_flat(&self) -> bool {
        matches!(self, Verdict::NotFlat(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Flat => "flat",
            Verdict::NotFlat(_) => "not-flat",
            Verdict::Undecided(_) => "undecided",
        }
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Verdict::Flat => None,
            Verdict::NotFlat(r) | Verdict::Undecided(r) => Some(r),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.reason() {
            None => write!(f, "{}", self.label()),
            Some(r) => write!(f, "{} ({r})", self.label()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Simple,
    Advanced,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Simple => "simple",
            Method::Advanced => "advanced",
        }
    }
}

/// One pass of the simple test, all objects on the (effective) total chart
/// unless noted.
#[derive(Clone, Debug)]
pub struct SimpleIteration {
    /// `U_k`.
    pub fields: Vec<VectorField>,
    /// `F_k = φ_k ∘ f` onto the reduced chart `Y_k`.
    pub map: MapBetweenCharts,
    pub outcome: ProjectableOutcome,
    pub w: Distribution,
    pub v: Distribution,
    /// Directions of `U_k` with vanishing pushforward.
    pub trivial: Vec<VectorField>,
    /// `F_k⋆(W_k)` on `Y_k`.
    pub pushed: Vec<VectorField>,
    /// First integrals of the pushed distribution, on `Y_k`.
    pub integrals: Vec<Expr>,
    /// `P_{k+1} = span(dF_{k+1})`.
    pub p_next: Codistribution,
    /// `dim Y_{k+1}`.
    pub remaining: usize,
}

/// One pass of the advanced test.
#[derive(Clone, Debug)]
pub struct AdvancedIteration {
    pub trivial: TrivialInputRecord,
    pub step: DecompositionStep,
    pub split: SplitResult,
}

/// `F = (F_x, F_u)` on the chart of flat variables `yⁱ_k`, `k = 0..=rᵢ`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatParametrization {
    /// Base names `yⁱ`; coordinates are `{yⁱ}_{k}`.
    pub outputs: Vec<Symbol>,
    pub shifts: Vec<usize>,
    pub states: Vec<Symbol>,
    pub inputs: Vec<Symbol>,
    pub fx: Vec<Expr>,
    pub fu: Vec<Expr>,
}

impl FlatParametrization {
    pub fn variable(&self, i: usize, k: usize) -> Symbol {
        shifted_name(&self.outputs[i], k)
    }

    /// All coordinates `yⁱ_0 … yⁱ_{rᵢ}`.
    pub fn chart(&self) -> Result<Chart> {
        let mut vars = Vec::new();
        for (i, &r) in self.shifts.iter().enumerate() {
            for k in 0..=r {
                vars.push(self.variable(i, k));
            }
        }
        Chart::new(vars)
    }

    /// `(output index, shift)` of a flat coordinate.
    pub fn locate(&self, s: &Symbol) -> Option<(usize, usize)> {
        let name = s.as_str();
        self.outputs.iter().enumerate().find_map(|(i, y)| {
            let rest = name.strip_prefix(y.as_str())?.strip_prefix('_')?;
            rest.parse::<usize>().ok().map(|k| (i, k))
        })
    }

    /// Forward shift `yⁱ_k ↦ yⁱ_{k+1}`.
    pub fn shift(&self, e: &Expr) -> Expr {
        let bind: HashMap<Symbol, Expr> = e
            .free_vars()
            .into_iter()
            .filter_map(|s| {
                let (i, k) = self.locate(&s)?;
                Some((s, Expr::var(self.variable(i, k + 1))))
            })
            .collect();
        e.substitute(&bind)
    }

    /// Largest shift of each output occurring in `exprs`.
    pub fn max_shifts<'a>(&self, exprs: impl IntoIterator<Item = &'a Expr>) -> Vec<Option<usize>> {
        let mut out = vec![None; self.outputs.len()];
        for e in exprs {
            for s in e.free_vars() {
                if let Some((i, k)) = self.locate(&s) {
                    out[i] = Some(out[i].map_or(k, |c: usize| c.max(k)));
                }
            }
        }
        out
    }
}

fn shifted_name(base: &Symbol, k: usize) -> Symbol {
    Symbol::new(&format!("{}_{k}", base.as_str()))
}

/// Outcome of checking `F_x(σy) = f(F_x(y), F_u(y))` and the rank
/// conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct Verification {
    /// Nonzero residuals, by state index.
    pub residuals: Vec<(usize, Expr)>,
    pub submersion: bool,
    /// `rank ∂_{y₀}F_x` and the number of outputs entering `F_x`.
    pub y0_rank: (usize, usize),
    /// Flat coordinates used beyond the declared depths.
    pub depth_violations: Vec<String>,
    pub chart_error: Option<String>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.residuals.is_empty()
            && self.submersion
            && self.y0_rank.0 == self.y0_rank.1
            && self.depth_violations.is_empty()
            && self.chart_error.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct FlatnessReport {
    pub method: Method,
    pub system: DiscreteSystem,
    pub verdict: Verdict,
    pub trivial_inputs: Option<TrivialInputRecord>,
    pub simple: Vec<SimpleIteration>,
    pub advanced: Vec<AdvancedIteration>,
    /// `W̄ = ⊕ W_k` (simple test).
    pub w_bar: Option<Distribution>,
    pub outputs: Option<Vec<Expr>>,
    pub residual_pde: Vec<String>,
    pub shifts: Vec<usize>,
    pub parametrization: Option<FlatParametrization>,
    pub verification: Option<Verification>,
    /// Last subsystem of the reduction chain (advanced test).
    pub terminal: Option<DiscreteSystem>,
}

impl FlatnessReport {
    fn new(method: Method, s: &DiscreteSystem) -> Self {
        FlatnessReport {
            method,
            system: s.clone(),
            verdict: Verdict::Undecided("not run".into()),
            trivial_inputs: None,
            simple: Vec::new(),
            advanced: Vec::new(),
            w_bar: None,
            outputs: None,
            residual_pde: Vec::new(),
            shifts: Vec::new(),
            parametrization: None,
            verification: None,
            terminal: None,
        }
    }

    pub fn iterations(&self) -> usize {
        match self.method {
            Method::Simple => self.simple.len(),
            Method::Advanced => self.advanced.len(),
        }
    }
}

fn verdict_from_error(e: &Error, iteration: usize) -> Verdict {
    match e {
        Error::NoProjectableField => Verdict::NotFlat(format!(
            "{ZERO_PROJECTABLE}: no projectable input field at iteration {iteration}"
        )),
        Error::NotReachable(msg) => Verdict::NotFlat(format!("not reachable at iteration {iteration}: {msg}")),
        other => Verdict::Undecided(format!("iteration {iteration}: {other}")),
    }
}

fn pde_of(e: &Error) -> Vec<String> {
    match e {
        Error::FirstIntegrals { pde } => pde.clone(),
        _ => Vec::new(),
    }
}

// ---------------------------------------------------------------------------
// simple test

/// Iterated projectable-field reduction in the original coordinates.
pub fn simple_test(s: &DiscreteSystem, max_iter: Option<usize>) -> FlatnessReport {
    let mut report = FlatnessReport::new(Method::Simple, s);
    let eff = match eliminate_trivial_inputs(s) {
        Ok((eff, rec)) => {
            report.trivial_inputs = Some(rec);
            eff
        }
        Err(e) => {
            report.verdict = verdict_from_error(&e, 1);
            return report;
        }
    };
    let max_iter = max_iter.unwrap_or(eff.n());
    if let Err(e) = run_simple(&eff, max_iter, &mut report) {
        report.residual_pde = pde_of(&e);
        report.verdict = verdict_from_error(&e, report.simple.len() + 1);
    }
    report
}

fn run_simple(s: &DiscreteSystem, max_iter: usize, report: &mut FlatnessReport) -> Result<()> {
    let total = s.total().clone();
    let (n, m) = (s.n(), s.m());
    let xs = s.states().vars().to_vec();
    let to_f: HashMap<Symbol, Expr> = xs.iter().cloned().zip(s.dynamics().iter().cloned()).collect();
    let mut phi: Vec<Expr> = xs.iter().map(|x| Expr::var(x.clone())).collect();
    let mut target = s.shifted().clone();
    let mut fields: Vec<VectorField> = s.input_distribution().generators().to_vec();
    let mut w_bar: Vec<VectorField> = Vec::new();

    for k in 0..max_iter {
        let comps: Vec<Expr> = phi.iter().map(|p| p.substitute(&to_f)).collect();
        let map = MapBetweenCharts::new(&total, &target, comps)?;
        let outcome = projectable_fields(&map, &fields, RingTest::Wedge, n + m)?;
        let w = Distribution::new(&total, outcome.projectable.iter().map(VectorField::cleared).collect())?;
        let trivial = outcome.trivial.clone();
        let u = Distribution::new(&total, fields.clone())?;
        let v = involutive_complement(&w.sum(&Distribution::new(&total, trivial.clone())?)?, &u)?;
        let converged = outcome.converged;
        if w.dim() == 0 {
            report.simple.push(SimpleIteration {
                fields,
                map,
                outcome,
                w,
                v,
                trivial,
                pushed: Vec::new(),
                integrals: Vec::new(),
                p_next: Codistribution::zero(&total),
                remaining: target.dim(),
            });
            report.verdict = Verdict::NotFlat(format!("{ZERO_PROJECTABLE} at iteration {}", k + 1));
            return Ok(());
        }

        let section = map.section()?;
        let mut pushed = Vec::with_capacity(w.dim());
        for g in w.generators() {
            pushed.push(
                pushforward_with_section(&map, &section, g)?
                    .target
                    .ok_or_else(|| Error::Inconsistent(format!("{g} passed the ring test but does not project")))?,
            );
        }
        let pushed_d = Distribution::new(&target, pushed.clone())?;
        let n_k = target.dim();
        let n_next = n_k - pushed_d.dim();
        let chi = first_integrals(&pushed_d, n_next)?;

        // lift F_k⋆(W_k) back to X through φ_k
        let to_phi: HashMap<Symbol, Expr> = target.vars().iter().cloned().zip(phi.iter().cloned()).collect();
        let jphi = SymbolicMatrix::jacobian(&phi, &xs);
        let mut lifted = Vec::with_capacity(pushed.len());
        for psi in pushed_d.generators() {
            let b: Vec<Expr> = psi.coeffs().iter().map(|c| c.substitute(&to_phi)).collect();
            let mut xi = jphi
                .solve(&b)
                .ok_or_else(|| Error::Inconsistent(format!("pushed field {psi} has no lift")))?;
            xi.extend(std::iter::repeat_n(Expr::zero(), m));
            lifted.push(VectorField::new(&total, xi)?.cleared());
        }
        let phi_next: Vec<Expr> = chi.iter().map(|c| c.substitute(&to_phi)).collect();
        let p_next = Codistribution::exact(&total, &phi_next.iter().map(|p| p.substitute(&to_f)).collect::<Vec<_>>());
        let next_target = Chart::new(fresh_names(&format!("z{}_", k + 1), n_next, &[&total]))?;

        w_bar.extend(w.generators().iter().cloned());
        let mut next_fields = lifted;
        next_fields.extend(v.generators().iter().cloned());
        next_fields.extend(trivial.iter().cloned());
        report.simple.push(SimpleIteration {
            fields: std::mem::take(&mut fields),
            map,
            outcome,
            w,
            v,
            trivial,
            pushed,
            integrals: chi,
            p_next,
            remaining: n_next,
        });
        if !converged {
            report.verdict = Verdict::Undecided(format!("λ-scheme did not settle at iteration {}", k + 1));
            return Ok(());
        }
        if n_next == 0 {
            let wb = Distribution::new(&total, w_bar)?;
            if wb.dim() != n {
                return Err(Error::Inconsistent(format!("dim W̄ = {}, expected {n}", wb.dim())));
            }
            match first_integrals(&wb, m) {
                Ok(ys) => report.outputs = Some(ys),
                Err(e) => report.residual_pde = pde_of(&e),
            }
            report.w_bar = Some(wb);
            report.verdict = Verdict::Flat;
            return Ok(());
        }
        phi = phi_next;
        target = next_target;
        fields = next_fields;
    }
    report.verdict = Verdict::Undecided(format!(
        "iteration cap {max_iter} reached with {} reduced states left",
        target.dim()
    ));
    Ok(())
}

// ---------------------------------------------------------------------------
// advanced test

/// Repeated normal-form reduction until the remaining system is empty; on
/// success the parametrization is assembled and verified.
pub fn advanced_test(s: &DiscreteSystem, max_iter: Option<usize>) -> FlatnessReport {
    let mut report = FlatnessReport::new(Method::Advanced, s);
    let max_iter = max_iter.unwrap_or(s.n());
    let mut current = s.clone();
    for k in 0..max_iter {
        let (eff, rec) = match eliminate_trivial_inputs(&current) {
            Ok(p) => p,
            Err(e) => {
                report.verdict = verdict_from_error(&e, k + 1);
                return report;
            }
        };
        if k == 0 {
            report.trivial_inputs = Some(rec.clone());
        }
        let (step, sp) = match normal_form_step(&eff).and_then(|st| split(&st).map(|sp| (st, sp))) {
            Ok(p) => p,
            Err(e) => {
                report.residual_pde = pde_of(&e);
                report.verdict = verdict_from_error(&e, k + 1);
                report.terminal = Some(eff);
                return report;
            }
        };
        let remaining = sp.remaining.clone();
        report.advanced.push(AdvancedIteration {
            trivial: rec,
            step,
            split: sp,
        });
        match remaining {
            Some(r) => current = r,
            None => {
                report.terminal = Some(eff);
                finish_advanced(&mut report);
                return report;
            }
        }
    }
    report.verdict = Verdict::Undecided(format!(
        "iteration cap {max_iter} reached with {} states left",
        current.n()
    ));
    report
}

fn finish_advanced(report: &mut FlatnessReport) {
    let (param, outputs) = match assemble(&report.advanced, &report.system) {
        Ok(p) => p,
        Err(e) => {
            report.verdict = Verdict::Undecided(format!("parametrization assembly failed: {e}"));
            return;
        }
    };
    let check = verify_parametrization(&report.system, &param);
    report.verdict = if check.passed() {
        Verdict::Flat
    } else {
        Verdict::Undecided("assembled parametrization failed verification".into())
    };
    report.shifts = param.shifts.clone();
    report.outputs = Some(outputs);
    report.parametrization = Some(param);
    report.verification = Some(check);
}

enum Origin {
    Tilde(Symbol),
    Trivial(Symbol),
}

/// Back-substitutes the reduction chain: flat variables are the states of
/// the last step and every trivial input met on the way.
fn assemble(iters: &[AdvancedIteration], top: &DiscreteSystem) -> Result<(FlatParametrization, Vec<Expr>)> {
    let mut prefix = String::from("y");
    while top.total().vars().iter().any(|v| v.as_str().starts_with(&prefix)) {
        prefix.push('_');
    }
    let mut param = FlatParametrization {
        outputs: Vec::new(),
        shifts: Vec::new(),
        states: top.states().vars().to_vec(),
        inputs: top.inputs().vars().to_vec(),
        fx: Vec::new(),
        fu: Vec::new(),
    };
    let mut origins: Vec<(usize, Origin)> = Vec::new();
    let mut fresh = |param: &mut FlatParametrization, level: usize, origin: Origin| -> Expr {
        let base = Symbol::new(&format!("{prefix}{}", param.outputs.len() + 1));
        param.outputs.push(base);
        origins.push((level, origin));
        Expr::var(param.variable(param.outputs.len() - 1, 0))
    };

    let mut below: Option<(HashMap<Symbol, Expr>, HashMap<Symbol, Expr>)> = None;
    for (k, it) in iters.iter().enumerate().rev() {
        let (step, sp) = (&it.step, &it.split);
        let mut val: HashMap<Symbol, Expr> = HashMap::new();
        match &below {
            Some((xv, uv)) => {
                for (new, old) in &sp.renaming.states {
                    val.insert(old.clone(), xv[new].clone());
                }
                for (new, old) in &sp.renaming.inputs {
                    val.insert(old.clone(), uv[new].clone());
                }
            }
            None => {
                for xt in &step.xt_names {
                    let y = fresh(&mut param, k, Origin::Tilde(xt.clone()));
                    val.insert(xt.clone(), y);
                }
            }
        }
        for (xt, w) in &sp.shift {
            let e = param.shift(&val[xt]);
            val.insert(w.clone(), e);
        }
        let xs = step.system.states().vars();
        let xv: HashMap<Symbol, Expr> = xs.iter().cloned().zip(step.h.iter().map(|h| h.substitute(&val))).collect();
        let mut bind = val;
        bind.extend(xv.iter().map(|(a, b)| (a.clone(), b.clone())));
        let us = step.system.inputs().vars();
        let uv_eff: HashMap<Symbol, Expr> =
            us.iter().cloned().zip(step.q_inv.iter().map(|q| q.substitute(&bind))).collect();
        let rec = &it.trivial;
        let uv = if rec.is_identity() {
            uv_eff
        } else {
            let mut b = xv.clone();
            b.extend(uv_eff);
            let mut out = HashMap::new();
            for t in &rec.trivial {
                let y = fresh(&mut param, k, Origin::Trivial(t.clone()));
                b.insert(t.clone(), y.clone());
                out.insert(t.clone(), y);
            }
            for (u, inv) in &rec.inverse {
                out.insert(u.clone(), inv.substitute(&b));
            }
            out
        };
        below = Some((xv, uv));
    }
    let (xv, uv) = below.ok_or_else(|| Error::Inconsistent("empty reduction chain".into()))?;
    param.fx = param.states.iter().map(|x| xv[x].clone()).collect();
    param.fu = param
        .inputs
        .iter()
        .map(|u| uv.get(u).cloned().ok_or_else(|| Error::Inconsistent(format!("input {u} not parametrized"))))
        .collect::<Result<_>>()?;
    param.shifts = param.max_shifts(&param.fx).into_iter().map(|s| s.map_or(0, |k| k + 1)).collect();

    // flat outputs in the original coordinates
    let mut outputs = Vec::with_capacity(origins.len());
    for (level, origin) in &origins {
        let it = &iters[*level];
        let mut e = match origin {
            Origin::Tilde(xt) => {
                let i = it.step.xt_names.iter().position(|t| t == xt).expect("tilde state");
                it.step.h_inv[i].clone()
            }
            Origin::Trivial(u) => Expr::var(u.clone()),
        };
        for j in (0..*level).rev() {
            e = pull_up(&iters[j], &e);
        }
        outputs.push(e);
    }
    Ok((param, outputs))
}

/// Rewrites an expression in the variables of the system after step `it`
/// in those of the system before it.
fn pull_up(it: &AdvancedIteration, e: &Expr) -> Expr {
    let step = &it.step;
    let idx = |s: &Symbol| step.xt_names.iter().position(|t| t == s);
    let mut bind: HashMap<Symbol, Expr> = HashMap::new();
    for (new, old) in it.split.renaming.states.iter().chain(&it.split.renaming.inputs) {
        let value = match idx(old) {
            Some(i) => step.h_inv[i].clone(),
            None => {
                let l = step.v_names.iter().position(|v| v == old).expect("renamed input is x̃ or v");
                step.q[l].clone()
            }
        };
        bind.insert(new.clone(), value);
    }
    let e = e.substitute(&bind);
    if it.trivial.is_identity() {
        e
    } else {
        let back: HashMap<Symbol, Expr> = it.trivial.effective.iter().cloned().collect();
        e.substitute(&back)
    }
}

/// Checks `F_x(σy) = f(F_x(y), F_u(y))` componentwise, the submersion
/// property and `rank ∂_{y₀}F_x`.
pub fn verify_parametrization(s: &DiscreteSystem, f: &FlatParametrization) -> Verification {
    let mut out = Verification {
        residuals: Vec::new(),
        submersion: false,
        y0_rank: (0, 0),
        depth_violations: Vec::new(),
        chart_error: None,
    };
    if f.states.as_slice() != s.states().vars()
        || f.inputs.as_slice() != s.inputs().vars()
        || f.fx.len() != s.n()
        || f.fu.len() != s.m()
        || f.shifts.len() != f.outputs.len()
    {
        out.chart_error = Some("parametrization does not match the system's states and inputs".into());
        return out;
    }
    let chart = match f.chart() {
        Ok(c) => c,
        Err(e) => {
            out.chart_error = Some(e.to_string());
            return out;
        }
    };
    let mut unknown = BTreeSet::new();
    for e in f.fx.iter().chain(&f.fu) {
        for v in e.free_vars() {
            match f.locate(&v) {
                None => {
                    unknown.insert(v.to_string());
                }
                Some((i, k)) => {
                    let in_fx = f.fx.iter().any(|x| x.depends_on(&v));
                    if k > f.shifts[i] || (in_fx && k >= f.shifts[i]) {
                        out.depth_violations.push(v.to_string());
                    }
                }
            }
        }
    }
    out.depth_violations.sort();
    out.depth_violations.dedup();
    if !unknown.is_empty() {
        out.chart_error = Some(format!(
            "unknown symbols in F: {}",
            unknown.into_iter().collect::<Vec<_>>().join(", ")
        ));
        return out;
    }

    let bind: HashMap<Symbol, Expr> = f
        .states
        .iter()
        .cloned()
        .zip(f.fx.iter().cloned())
        .chain(f.inputs.iter().cloned().zip(f.fu.iter().cloned()))
        .collect();
    for (i, (fx, rhs)) in f.fx.iter().zip(s.dynamics()).enumerate() {
        let r = &f.shift(fx) - &rhs.substitute(&bind);
        if !r.is_zero() {
            out.residuals.push((i, r));
        }
    }
    let all: Vec<Expr> = f.fx.iter().chain(&f.fu).cloned().collect();
    out.submersion = SymbolicMatrix::jacobian(&all, chart.vars()).generic_rank() == s.n() + s.m();
    let y0: Vec<Symbol> = (0..f.outputs.len())
        .filter(|&i| f.shifts[i] > 0)
        .map(|i| f.variable(i, 0))
        .collect();
    out.y0_rank = (SymbolicMatrix::jacobian(&f.fx, &y0).generic_rank(), y0.len());
    out
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CorollaryCheck {
    Holds,
    /// Input symbols occurring in the flat outputs.
    Violated(Vec<Symbol>),
    Skipped(String),
}

impl CorollaryCheck {
    pub fn holds(&self) -> bool {
        matches!(self, CorollaryCheck::Holds)
    }
}

/// Without trivial inputs, flat outputs do not depend on the inputs.
pub fn corollary_check(report: &FlatnessReport) -> CorollaryCheck {
    if !report.verdict.is_flat() {
        return CorollaryCheck::Skipped("verdict is not flat".into());
    }
    if report.trivial_inputs.as_ref().is_some_and(|r| !r.is_identity()) {
        return CorollaryCheck::Skipped("system has trivial inputs".into());
    }
    let Some(outputs) = &report.outputs else {
        return CorollaryCheck::Skipped("flat outputs are not explicit".into());
    };
    let bad: BTreeSet<Symbol> = outputs
        .iter()
        .flat_map(|y| y.free_vars())
        .filter(|v| !report.system.states().contains(v))
        .collect();
    if bad.is_empty() {
        CorollaryCheck::Holds
    } else {
        CorollaryCheck::Violated(bad.into_iter().collect())
    }
}
