//! The discrete-time system model `x₊ = f(x, u)` and its map-level
//! services: trivial-input elimination and projectable input fields.

use std::collections::HashMap;
use std::fmt;

use crate::distributions::{involutive_complement, Distribution};
use crate::error::{Error, Result};
use crate::expr::{parse, solve_map_inverse, Expr, Symbol, SymbolicMatrix};
use crate::exterior::{
    complete_with_coordinates, dual_frame, kernel_fields, next_combination, pushforward_with_section, wedge_all,
    Chart, DifferentialForm, MapBetweenCharts, VectorField,
};

/// Suffix marking shifted-state coordinates.
pub const SHIFT_SUFFIX: &str = "_p";

#[derive(Clone, PartialEq, Eq)]
pub struct DiscreteSystem {
    states: Chart,
    inputs: Chart,
    total: Chart,
    shifted: Chart,
    dynamics: Vec<Expr>,
}

fn fresh_shift_names(states: &Chart, total: &Chart) -> Vec<Symbol> {
    states
        .vars()
        .iter()
        .map(|x| {
            let mut name = format!("{x}{SHIFT_SUFFIX}");
            while total.contains(&Symbol::new(&name)) {
                name.push_str(SHIFT_SUFFIX);
            }
            Symbol::new(&name)
        })
        .collect()
}

impl DiscreteSystem {
    pub fn new(states: Vec<Symbol>, inputs: Vec<Symbol>, dynamics: Vec<Expr>) -> Result<Self> {
        if dynamics.len() != states.len() {
            return Err(Error::InvalidSystem(format!(
                "{} dynamics for {} states",
                dynamics.len(),
                states.len()
            )));
        }
        let states = Chart::new(states)?;
        let inputs = Chart::new(inputs)?;
        let total = states.join(&inputs)?;
        for f in &dynamics {
            if let Some(v) = f.free_vars().into_iter().find(|v| !total.contains(v)) {
                return Err(Error::InvalidSystem(format!("undeclared identifier `{v}`")));
            }
        }
        let shifted = Chart::new(fresh_shift_names(&states, &total))?;
        Ok(DiscreteSystem {
            states,
            inputs,
            total,
            shifted,
            dynamics,
        })
    }

    /// Parses dynamics strings against the declared names.
    pub fn parse<S: AsRef<str>>(states: &[S], inputs: &[S], dynamics: &[S]) -> Result<Self> {
        let xs: Vec<Symbol> = states.iter().map(|s| Symbol::new(s.as_ref())).collect();
        let us: Vec<Symbol> = inputs.iter().map(|s| Symbol::new(s.as_ref())).collect();
        let all: Vec<Symbol> = xs.iter().chain(&us).cloned().collect();
        let f = dynamics
            .iter()
            .map(|d| parse(d.as_ref(), &all))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        DiscreteSystem::new(xs, us, f)
    }

    pub fn n(&self) -> usize {
        self.states.dim()
    }

    pub fn m(&self) -> usize {
        self.inputs.dim()
    }

    pub fn states(&self) -> &Chart {
        &self.states
    }

    pub fn inputs(&self) -> &Chart {
        &self.inputs
    }

    /// `(x, u)`.
    pub fn total(&self) -> &Chart {
        &self.total
    }

    pub fn shifted(&self) -> &Chart {
        &self.shifted
    }

    pub fn dynamics(&self) -> &[Expr] {
        &self.dynamics
    }

    /// `f` as a map from `(x, u)` to the shifted states.
    pub fn map(&self) -> MapBetweenCharts {
        MapBetweenCharts::new(&self.total, &self.shifted, self.dynamics.clone()).expect("validated")
    }

    pub fn input_jacobian(&self) -> SymbolicMatrix {
        SymbolicMatrix::jacobian(&self.dynamics, self.inputs.vars())
    }

    pub fn state_jacobian(&self) -> SymbolicMatrix {
        SymbolicMatrix::jacobian(&self.dynamics, self.states.vars())
    }

    pub fn is_submersion(&self) -> bool {
        self.map().jacobian().generic_rank() == self.n()
    }

    /// `U = span(∂u)` on the total chart.
    pub fn input_distribution(&self) -> Distribution {
        Distribution::coordinate(&self.total, self.inputs.vars()).expect("inputs are coordinates")
    }

    pub fn render(&self) -> Vec<String> {
        self.states
            .vars()
            .iter()
            .zip(&self.dynamics)
            .map(|(x, f)| format!("{x}+ = {f}"))
            .collect()
    }
}

impl fmt::Debug for DiscreteSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x={:?} u={:?} [{}]", self.states, self.inputs, self.render().join("; "))
    }
}

/// Outcome of trivial-input elimination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrivialInputRecord {
    /// Components of `f` taken as the new inputs (ascending).
    pub components: Vec<usize>,
    /// New input name and its definition `ūⁱ = tⁱ(x, u)`.
    pub effective: Vec<(Symbol, Expr)>,
    /// Inputs the reduced system does not depend on.
    pub trivial: Vec<Symbol>,
    /// Original inputs solved from `ū = t(x, u)`, in terms of `(x, ū, trivial)`.
    pub inverse: Vec<(Symbol, Expr)>,
}

impl TrivialInputRecord {
    pub fn is_identity(&self) -> bool {
        self.trivial.is_empty()
    }
}

/// Replaces inputs by `m_u` components of `f` so that every remaining
/// input is effective; the others are reported trivial.
pub fn eliminate_trivial_inputs(s: &DiscreteSystem) -> Result<(DiscreteSystem, TrivialInputRecord)> {
    let (n, m) = (s.n(), s.m());
    let ju = s.input_jacobian();
    let mu = ju.generic_rank();
    if mu == m {
        let record = TrivialInputRecord {
            components: Vec::new(),
            effective: s.inputs.vars().iter().map(|u| (u.clone(), Expr::var(u.clone()))).collect(),
            trivial: Vec::new(),
            inverse: Vec::new(),
        };
        return Ok((s.clone(), record));
    }
    if mu == 0 {
        return Err(Error::NotReachable("the dynamics do not depend on any input".into()));
    }
    // component subsets, starting from the last m_u components
    let mut combo: Vec<usize> = (0..mu).collect();
    loop {
        let comps: Vec<usize> = combo.iter().rev().map(|&c| n - 1 - c).collect();
        let t: Vec<Expr> = comps.iter().map(|&i| s.dynamics[i].clone()).collect();
        let jt = SymbolicMatrix::jacobian(&t, s.inputs.vars());
        if jt.generic_rank() == mu {
            // solve for the lexicographically first input subset that works
            let mut ucombo: Vec<usize> = (0..mu).collect();
            loop {
                let solved: Vec<Symbol> = ucombo.iter().map(|&i| s.inputs.var(i).clone()).collect();
                if jt.select_cols(&ucombo).generic_rank() == mu {
                    return finish_elimination(s, comps, t, solved);
                }
                if !next_combination(&mut ucombo, m) {
                    break;
                }
            }
        }
        if !next_combination(&mut combo, n) {
            return Err(Error::Resorting { count: mu });
        }
    }
}

fn finish_elimination(
    s: &DiscreteSystem,
    comps: Vec<usize>,
    t: Vec<Expr>,
    solved: Vec<Symbol>,
) -> Result<(DiscreteSystem, TrivialInputRecord)> {
    // new inputs reuse the names of the inputs they replace
    let temps: Vec<Symbol> = solved.iter().map(|u| Symbol::new(&format!("__ubar_{u}"))).collect();
    let eqs: Vec<Expr> = temps
        .iter()
        .zip(&t)
        .map(|(b, ti)| &Expr::var(b.clone()) - ti)
        .collect();
    let inv = solve_map_inverse(&eqs, &solved)?;
    let rename: HashMap<Symbol, Expr> = temps
        .iter()
        .cloned()
        .zip(solved.iter().map(|u| Expr::var(u.clone())))
        .collect();
    let trivial: Vec<Symbol> = s.inputs.vars().iter().filter(|u| !solved.contains(u)).cloned().collect();
    let mut dynamics = Vec::with_capacity(s.n());
    for (i, f) in s.dynamics.iter().enumerate() {
        if let Some(k) = comps.iter().position(|&c| c == i) {
            dynamics.push(Expr::var(solved[k].clone()));
        } else {
            let g = f.substitute(&inv).substitute(&rename);
            if trivial.iter().any(|u| g.depends_on(u)) {
                return Err(Error::Inconsistent(format!(
                    "component {} still depends on a trivial input after elimination",
                    i + 1
                )));
            }
            dynamics.push(g);
        }
    }
    let reduced = DiscreteSystem::new(s.states.vars().to_vec(), solved.clone(), dynamics)?;
    let record = TrivialInputRecord {
        components: {
            let mut c = comps.clone();
            c.sort_unstable();
            c
        },
        effective: solved.iter().cloned().zip(t).collect(),
        trivial,
        inverse: solved
            .iter()
            .map(|u| (u.clone(), inv[u].substitute(&rename)))
            .collect(),
    };
    Ok((reduced, record))
}

/// Ring-membership test used by the λ-scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RingTest {
    /// `dg ∧ df¹ ∧ ⋯ ∧ dfⁿ = 0`.
    Wedge,
    /// `k(g) = 0` for every field `k` spanning `ker f⋆`.
    KernelFields,
}

/// One round of the λ-scheme.
#[derive(Clone, Debug)]
pub struct LambdaRound {
    /// Normalisation rows `j₁ … j_r` of the pushed-forward fields.
    pub normalization: Vec<usize>,
    /// Normalised pushforwards `vᵢ`, in source coordinates.
    pub normalized: Vec<Vec<Expr>>,
    /// Linear system in `λ`, one row per condition.
    pub equations: SymbolicMatrix,
    /// Null-space basis of `equations`.
    pub lambda: Vec<Vec<Expr>>,
}

/// Result of the projectable-field computation for a set of fields.
#[derive(Clone, Debug)]
pub struct ProjectableOutcome {
    pub rounds: Vec<LambdaRound>,
    /// Projectable fields with nonzero pushforward.
    pub projectable: Vec<VectorField>,
    /// Fields in the span whose pushforward vanishes.
    pub trivial: Vec<VectorField>,
    /// `false` when the round cap was hit while the family still shrank.
    pub converged: bool,
}

fn combine(fields: &[VectorField], coeffs: &[Expr]) -> VectorField {
    let mut acc = VectorField::zero(fields[0].chart());
    for (g, c) in fields.iter().zip(coeffs) {
        if !c.is_zero() {
            acc = acc.add(&g.scale(c)).expect("same chart");
        }
    }
    acc
}

/// Lexicographically first `r` rows with an invertible `r × r` minor on
/// some lexicographically first column set.
fn normalization_indices(m: &SymbolicMatrix, r: usize) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut rows: Vec<usize> = (0..r).collect();
    loop {
        let sub = m.select_rows(&rows);
        if sub.generic_rank() == r {
            let mut cols: Vec<usize> = (0..r).collect();
            loop {
                if sub.select_cols(&cols).generic_rank() == r {
                    return Some((rows, cols));
                }
                if !next_combination(&mut cols, m.cols()) {
                    break;
                }
            }
        }
        if !next_combination(&mut rows, m.rows()) {
            return None;
        }
    }
}

struct RingConditions {
    test: RingTest,
    vol: DifferentialForm,
    kernel: Vec<VectorField>,
    source: Chart,
}

impl RingConditions {
    fn new(map: &MapBetweenCharts, test: RingTest) -> Result<Self> {
        let source = map.source().clone();
        let forms: Vec<DifferentialForm> = map
            .components()
            .iter()
            .map(|f| DifferentialForm::differential(&source, f))
            .collect();
        Ok(RingConditions {
            test,
            vol: wedge_all(&source, &forms)?,
            kernel: match test {
                RingTest::KernelFields => kernel_fields(map),
                RingTest::Wedge => Vec::new(),
            },
            source,
        })
    }

    /// Linear functionals whose joint vanishing means `g ∈ f*(C∞)`
    /// (for `g` ranging over a linear family, these are linear too).
    fn functionals(&self, g: &Expr) -> Result<Vec<(Vec<usize>, Expr)>> {
        Ok(match self.test {
            RingTest::Wedge => {
                let dg = DifferentialForm::differential(&self.source, g);
                let w = crate::exterior::wedge(&dg, &self.vol)?;
                w.terms().map(|(k, c)| (k.clone(), c.clone())).collect()
            }
            RingTest::KernelFields => self
                .kernel
                .iter()
                .enumerate()
                .map(|(a, k)| (vec![a], k.apply(g)))
                .collect(),
        })
    }

    fn is_member(&self, g: &Expr) -> Result<bool> {
        Ok(self.functionals(g)?.iter().all(|(_, c)| c.is_zero()))
    }
}

/// Projectable fields within `span(fields)` along the submersion `map`,
/// by iterated normalisation and linear ring conditions on `λ`.
pub fn projectable_fields(
    map: &MapBetweenCharts,
    fields: &[VectorField],
    test: RingTest,
    max_rounds: usize,
) -> Result<ProjectableOutcome> {
    let ring = RingConditions::new(map, test)?;
    let jf = map.jacobian();
    let mut rounds = Vec::new();
    let mut trivial: Vec<VectorField> = Vec::new();
    let mut current: Vec<VectorField> = fields.to_vec();
    if current.is_empty() {
        return Ok(ProjectableOutcome {
            rounds,
            projectable: Vec::new(),
            trivial,
            converged: true,
        });
    }
    let max_rounds = max_rounds.max(1);
    for round in 0..=max_rounds {
        // pushforward matrix, one column per field
        let cols: Vec<Vec<Expr>> = current.iter().map(|g| jf.mul_vec(g.coeffs())).collect();
        let k = current.len();
        let m = SymbolicMatrix::from_rows(
            (0..map.target().dim()).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect(),
            k,
        );
        for t in m.null_space() {
            trivial.push(combine(&current, &t).cleared());
        }
        let r = m.generic_rank();
        if r == 0 {
            return Ok(ProjectableOutcome {
                rounds,
                projectable: Vec::new(),
                trivial,
                converged: true,
            });
        }
        let (rows, kcols) = normalization_indices(&m, r).expect("rank r minor exists");
        let minor = m.select_rows(&rows).select_cols(&kcols);
        let inv = minor.inverse().expect("invertible minor");
        let base: Vec<VectorField> = kcols.iter().map(|&c| current[c].clone()).collect();
        let normalized_fields: Vec<VectorField> = (0..r).map(|i| combine(&base, &inv.column(i))).collect();
        let normalized: Vec<Vec<Expr>> = normalized_fields.iter().map(|g| jf.mul_vec(g.coeffs())).collect();

        // condition rows: one per (component, functional index)
        let mut keyed: std::collections::BTreeMap<(usize, Vec<usize>), Vec<Expr>> = Default::default();
        for (i, v) in normalized.iter().enumerate() {
            for (j, vij) in v.iter().enumerate() {
                if rows.contains(&j) || vij.is_constant() {
                    continue;
                }
                for (key, c) in ring.functionals(vij)? {
                    keyed.entry((j, key)).or_insert_with(|| vec![Expr::zero(); r])[i] = c;
                }
            }
        }
        let eq_rows: Vec<Vec<Expr>> = keyed.into_values().filter(|row| row.iter().any(|c| !c.is_zero())).collect();
        let equations = SymbolicMatrix::from_rows(eq_rows, r);
        let lambda = equations.null_space();
        let s = lambda.len();
        let next: Vec<VectorField> = lambda.iter().map(|l| combine(&normalized_fields, l)).collect();
        rounds.push(LambdaRound {
            normalization: rows,
            normalized,
            equations,
            lambda,
        });
        if s == r {
            return Ok(ProjectableOutcome {
                rounds,
                projectable: normalized_fields,
                trivial,
                converged: true,
            });
        }
        if s == 0 {
            return Ok(ProjectableOutcome {
                rounds,
                projectable: Vec::new(),
                trivial,
                converged: true,
            });
        }
        if round == max_rounds {
            break;
        }
        current = next;
    }
    // cap reached while still shrinking: keep only fields verified projectable
    let section = map.section()?;
    let projectable = current
        .into_iter()
        .filter(|g| {
            pushforward_with_section(map, &section, g)
                .map(|p| p.is_projected())
                .unwrap_or(false)
        })
        .collect();
    Ok(ProjectableOutcome {
        rounds,
        projectable,
        trivial,
        converged: false,
    })
}

/// `W ⊆ U` of projectable input directions together with a complement.
#[derive(Clone, Debug)]
pub struct InputSplit {
    pub w: Distribution,
    pub v: Distribution,
    pub m_w: usize,
    pub m_v: usize,
}

#[derive(Clone, Debug)]
pub struct ProjectableInputs {
    pub split: InputSplit,
    pub outcome: ProjectableOutcome,
    /// Pushforwards of `W`'s generators on the shifted-state chart.
    pub pushed: Vec<VectorField>,
}

/// The λ-scheme applied to `U = span(∂u)`.
pub fn projectable_input_fields(s: &DiscreteSystem) -> Result<ProjectableInputs> {
    let u = s.input_distribution();
    let fields: Vec<VectorField> = u.generators().to_vec();
    let map = s.map();
    let outcome = projectable_fields(&map, &fields, RingTest::Wedge, s.m())?;
    if !outcome.trivial.is_empty() {
        return Err(Error::InvalidSystem("system has trivial inputs; eliminate them first".into()));
    }
    let w_fields: Vec<VectorField> = outcome.projectable.iter().map(VectorField::cleared).collect();
    let w = Distribution::new(s.total(), w_fields)?;
    let v = involutive_complement(&w, &u)?;
    let mut pushed = Vec::new();
    if w.dim() > 0 {
        let section = map.section()?;
        for g in w.generators() {
            let p = pushforward_with_section(&map, &section, g)?;
            pushed.push(p.target.ok_or_else(|| {
                Error::Inconsistent(format!("field {g} passed the ring test but did not project"))
            })?);
        }
    }
    let (m_w, m_v) = (w.dim(), v.dim());
    Ok(ProjectableInputs {
        split: InputSplit { w, v, m_w, m_v },
        outcome,
        pushed,
    })
}

/// Report of the dual-frame method.
#[derive(Clone, Debug)]
pub struct BasisMethodReport {
    /// Completing coordinate functions `f^{n+1} …`.
    pub completion: Vec<Symbol>,
    pub frame: Vec<VectorField>,
    /// `∂uᵢ` expressed in the frame: one coefficient row per input.
    pub input_coordinates: Vec<Vec<Expr>>,
    pub kernel: Vec<VectorField>,
    pub w: Distribution,
}

/// Projectable input directions via a dual frame and the kernel-field
/// ring test; independent of the wedge criterion.
pub fn pushforward_basis_method(s: &DiscreteSystem) -> Result<BasisMethodReport> {
    let total = s.total();
    let idx = complete_with_coordinates(s.dynamics(), total).ok_or(Error::CompletionFailure)?;
    let completion: Vec<Symbol> = idx.iter().map(|&i| total.var(i).clone()).collect();
    let mut funcs = s.dynamics().to_vec();
    funcs.extend(completion.iter().map(|z| Expr::var(z.clone())));
    let frame = dual_frame(total, &funcs)?;
    let u_fields: Vec<VectorField> = s.input_distribution().generators().to_vec();
    let input_coordinates: Vec<Vec<Expr>> = u_fields
        .iter()
        .map(|du| funcs.iter().map(|f| du.apply(f)).collect())
        .collect();
    let map = s.map();
    let outcome = projectable_fields(&map, &u_fields, RingTest::KernelFields, s.m())?;
    let ring = RingConditions::new(&map, RingTest::KernelFields)?;
    for g in &outcome.projectable {
        for c in jf_apply(&map, g) {
            if !ring.is_member(&c)? {
                return Err(Error::Inconsistent(format!("{g} has a coefficient outside the ring")));
            }
        }
    }
    let w = Distribution::new(total, outcome.projectable.iter().map(VectorField::cleared).collect())?;
    Ok(BasisMethodReport {
        completion,
        frame,
        input_coordinates,
        kernel: kernel_fields(&map),
        w,
    })
}

fn jf_apply(map: &MapBetweenCharts, g: &VectorField) -> Vec<Expr> {
    map.components().iter().map(|f| g.apply(f)).collect()
}

/// Ring membership `g ∈ f*(C∞(target))` by the wedge criterion.
pub fn in_pullback_ring(map: &MapBetweenCharts, g: &Expr) -> bool {
    map.is_pullback_function(g)
}
