//! Distributions and codistributions with reduced bases.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exterior::{exterior_derivative, interior_product, lie_bracket, Chart, DifferentialForm, VectorField};
use crate::expr::{q_null_space, Expr, Monomial, Poly, Q, SymbolicMatrix};

/// Row-reduces coefficient rows; returns the nonzero reduced rows and
/// their pivot columns.
fn reduce_rows(rows: Vec<Vec<Expr>>, cols: usize) -> (Vec<Vec<Expr>>, Vec<usize>) {
    let m = SymbolicMatrix::from_rows(rows, cols);
    let r = m.rref();
    let k = r.pivots.len();
    ((0..k).map(|i| r.matrix.row(i).to_vec()).collect(), r.pivots)
}

/// Reduces `v` against a reduced basis with the given pivots.
fn residual(basis: &[Vec<Expr>], pivots: &[usize], v: &[Expr]) -> Vec<Expr> {
    let mut r = v.to_vec();
    for (b, &p) in basis.iter().zip(pivots) {
        let c = r[p].clone();
        if c.is_zero() {
            continue;
        }
        for (ri, bi) in r.iter_mut().zip(b) {
            if !bi.is_zero() {
                *ri = &*ri - &(&c * bi);
            }
        }
    }
    r
}

/// Span of vector fields on a chart.
#[derive(Clone)]
pub struct Distribution {
    chart: Chart,
    generators: Vec<VectorField>,
    rows: Vec<Vec<Expr>>,
    pivots: Vec<usize>,
}

impl Distribution {
    pub fn new(chart: &Chart, generators: Vec<VectorField>) -> Result<Self> {
        if generators.iter().any(|g| g.chart() != chart) {
            return Err(Error::ChartMismatch);
        }
        let rows = generators.iter().map(|g| g.coeffs().to_vec()).collect();
        let (rows, pivots) = reduce_rows(rows, chart.dim());
        Ok(Distribution {
            chart: chart.clone(),
            generators,
            rows,
            pivots,
        })
    }

    pub fn zero(chart: &Chart) -> Self {
        Distribution::new(chart, Vec::new()).expect("empty")
    }

    /// Span of the coordinate fields with the given names.
    pub fn coordinate(chart: &Chart, names: &[crate::Symbol]) -> Result<Self> {
        let gens = names
            .iter()
            .map(|n| {
                chart
                    .index_of(n)
                    .map(|i| VectorField::coordinate(chart, i))
                    .ok_or_else(|| Error::InvalidSystem(format!("`{n}` is not a coordinate")))
            })
            .collect::<Result<Vec<_>>>()?;
        Distribution::new(chart, gens)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn generators(&self) -> &[VectorField] {
        &self.generators
    }

    /// Reduced row echelon basis (pivot coefficients equal one).
    pub fn basis(&self) -> Vec<VectorField> {
        self.rows
            .iter()
            .map(|r| VectorField::new(&self.chart, r.clone()).expect("chart-sized"))
            .collect()
    }

    /// Generators with redundant ones dropped, in input order.
    pub fn independent_generators(&self) -> Vec<VectorField> {
        let mut out: Vec<VectorField> = Vec::new();
        for g in &self.generators {
            let mut trial = out.clone();
            trial.push(g.clone());
            let d = Distribution::new(&self.chart, trial).expect("same chart");
            if d.dim() > out.len() {
                out.push(g.clone());
            }
        }
        out
    }

    pub fn contains(&self, v: &VectorField) -> bool {
        v.chart() == &self.chart && residual(&self.rows, &self.pivots, v.coeffs()).iter().all(Expr::is_zero)
    }

    pub fn is_subset_of(&self, other: &Distribution) -> bool {
        self.basis().iter().all(|v| other.contains(v))
    }

    pub fn span_eq(&self, other: &Distribution) -> bool {
        self.dim() == other.dim() && self.is_subset_of(other)
    }

    pub fn sum(&self, other: &Distribution) -> Result<Distribution> {
        let mut g = self.generators.clone();
        g.extend(other.generators.iter().cloned());
        Distribution::new(&self.chart, g)
    }

    pub fn intersection(&self, other: &Distribution) -> Result<Distribution> {
        if self.chart != other.chart {
            return Err(Error::ChartMismatch);
        }
        Ok(self.annihilator_sum(other)?.annihilator().with_generators_cleared())
    }

    fn annihilator_sum(&self, other: &Distribution) -> Result<Codistribution> {
        annihilator(self)?.sum(&annihilator(other)?)
    }

    fn with_generators_cleared(self) -> Distribution {
        let g = self.basis().iter().map(VectorField::cleared).collect();
        Distribution::new(&self.chart, g).expect("same chart")
    }

    pub fn render(&self) -> String {
        let parts: Vec<String> = self.independent_generators().iter().map(|g| g.render()).collect();
        format!("span{{{}}}", parts.join(", "))
    }
}

impl fmt::Debug for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Span of one-forms on a chart.
#[derive(Clone)]
pub struct Codistribution {
    chart: Chart,
    generators: Vec<DifferentialForm>,
    rows: Vec<Vec<Expr>>,
    pivots: Vec<usize>,
}

impl Codistribution {
    pub fn new(chart: &Chart, generators: Vec<DifferentialForm>) -> Result<Self> {
        if generators.iter().any(|g| g.chart() != chart) {
            return Err(Error::ChartMismatch);
        }
        if generators.iter().any(|g| g.degree() != 1 && !g.is_zero()) {
            return Err(Error::InvalidSystem("codistribution generators must be one-forms".into()));
        }
        let rows = generators
            .iter()
            .map(|g| (0..chart.dim()).map(|i| g.coeff(&[i])).collect())
            .collect();
        let (rows, pivots) = reduce_rows(rows, chart.dim());
        Ok(Codistribution {
            chart: chart.clone(),
            generators,
            rows,
            pivots,
        })
    }

    pub fn zero(chart: &Chart) -> Self {
        Codistribution::new(chart, Vec::new()).expect("empty")
    }

    /// Span of the differentials of the given functions.
    pub fn exact(chart: &Chart, funcs: &[Expr]) -> Self {
        let g = funcs.iter().map(|f| DifferentialForm::differential(chart, f)).collect();
        Codistribution::new(chart, g).expect("same chart")
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn generators(&self) -> &[DifferentialForm] {
        &self.generators
    }

    pub fn basis(&self) -> Vec<DifferentialForm> {
        self.rows
            .iter()
            .map(|r| DifferentialForm::one_form(&self.chart, r).expect("chart-sized"))
            .collect()
    }

    pub fn contains(&self, w: &DifferentialForm) -> bool {
        if w.is_zero() {
            return true;
        }
        w.chart() == &self.chart
            && w.degree() == 1
            && residual(&self.rows, &self.pivots, &w.one_form_coeffs()).iter().all(Expr::is_zero)
    }

    pub fn is_subset_of(&self, other: &Codistribution) -> bool {
        self.basis().iter().all(|w| other.contains(w))
    }

    pub fn span_eq(&self, other: &Codistribution) -> bool {
        self.dim() == other.dim() && self.is_subset_of(other)
    }

    pub fn sum(&self, other: &Codistribution) -> Result<Codistribution> {
        let mut g = self.generators.clone();
        g.extend(other.generators.iter().cloned());
        Codistribution::new(&self.chart, g)
    }

    /// Fields annihilating every form of the span.
    pub fn annihilator(&self) -> Distribution {
        let m = SymbolicMatrix::from_rows(self.rows.clone(), self.chart.dim());
        let gens = m
            .null_space()
            .into_iter()
            .map(|c| VectorField::new(&self.chart, c).expect("chart-sized").cleared())
            .collect();
        Distribution::new(&self.chart, gens).expect("same chart")
    }

    pub fn render(&self) -> String {
        let parts: Vec<String> = self.generators.iter().map(|g| g.render()).collect();
        format!("span{{{}}}", parts.join(", "))
    }
}

impl fmt::Debug for Codistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn clear_form(w: DifferentialForm) -> DifferentialForm {
    let c = w.one_form_coeffs();
    let v = VectorField::new(w.chart(), c).expect("chart-sized").cleared();
    DifferentialForm::one_form(w.chart(), v.coeffs()).expect("chart-sized")
}

pub fn annihilator(d: &Distribution) -> Result<Codistribution> {
    let m = SymbolicMatrix::from_rows(d.rows.clone(), d.chart.dim());
    let gens = m
        .null_space()
        .into_iter()
        .map(|c| clear_form(DifferentialForm::one_form(&d.chart, &c).expect("chart-sized")))
        .collect();
    Codistribution::new(&d.chart, gens)
}

pub fn is_involutive(d: &Distribution) -> bool {
    let b = d.basis();
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            let br = lie_bracket(&b[i], &b[j]).expect("same chart");
            if !d.contains(&br) {
                return false;
            }
        }
    }
    true
}

/// Largest subcodistribution `Q ⊆ P` with `W ⌋ Q = 0`.
pub fn largest_annihilated_subcodistribution(p: &Codistribution, w: &Distribution) -> Result<Codistribution> {
    if p.chart != w.chart {
        return Err(Error::ChartMismatch);
    }
    let pb = p.basis();
    let wb = w.basis();
    if wb.is_empty() {
        return Ok(p.clone());
    }
    let rows: Vec<Vec<Expr>> = wb
        .iter()
        .map(|v| {
            pb.iter()
                .map(|om| crate::exterior::pairing(om, v).expect("same chart"))
                .collect()
        })
        .collect();
    let m = SymbolicMatrix::from_rows(rows, pb.len());
    let mut gens = Vec::new();
    for a in m.null_space() {
        let mut acc = DifferentialForm::zero(&p.chart, 1);
        for (ai, om) in a.iter().zip(&pb) {
            if !ai.is_zero() {
                acc = acc.add(&om.scale(ai))?;
            }
        }
        gens.push(clear_form(acc));
    }
    Codistribution::new(&p.chart, gens)
}

/// `{v : v ⌋ P = 0, v ⌋ dP ⊆ P}`.
pub fn cauchy_characteristic(p: &Codistribution) -> Result<Distribution> {
    let ann = p.annihilator().basis();
    let dp: Vec<DifferentialForm> = p.basis().iter().map(exterior_derivative).collect();
    let k = ann.len();
    let mut rows = Vec::new();
    for dw in &dp {
        // dω(a_k, a_l) for each l: one row per (ω, l)
        let inner: Vec<DifferentialForm> = ann
            .iter()
            .map(|a| interior_product(a, dw))
            .collect::<Result<_>>()?;
        for al in &ann {
            let row: Vec<Expr> = inner
                .iter()
                .map(|ik| crate::exterior::pairing(ik, al))
                .collect::<Result<_>>()?;
            rows.push(row);
        }
    }
    let m = SymbolicMatrix::from_rows(rows, k);
    let mut gens = Vec::new();
    for c in m.null_space() {
        let mut v = VectorField::zero(&p.chart);
        for (ci, a) in c.iter().zip(&ann) {
            if !ci.is_zero() {
                v = v.add(&a.scale(ci))?;
            }
        }
        gens.push(v.cleared());
    }
    let c = Distribution::new(&p.chart, gens)?;
    if !is_involutive(&c) {
        return Err(Error::Inconsistent("Cauchy characteristic is not involutive".into()));
    }
    Ok(c)
}

/// An involutive `C` with `D ⊕ C = E`, chosen among subsets of `E`'s
/// reduced basis.
pub fn involutive_complement(d: &Distribution, e: &Distribution) -> Result<Distribution> {
    if d.chart != e.chart {
        return Err(Error::ChartMismatch);
    }
    if !d.is_subset_of(e) {
        return Err(Error::ComplementConstruction("D is not contained in E".into()));
    }
    let eb = e.basis();
    let k = e.dim() - d.dim();
    if k == 0 {
        return Ok(Distribution::zero(&e.chart));
    }
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        let cand: Vec<VectorField> = combo.iter().map(|&i| eb[i].clone()).collect();
        let c = Distribution::new(&e.chart, cand)?;
        if c.dim() == k && d.sum(&c)?.dim() == e.dim() && is_involutive(&c) {
            return Ok(c);
        }
        if !crate::exterior::next_combination(&mut combo, eb.len()) {
            break;
        }
    }
    Err(Error::ComplementConstruction(format!(
        "no involutive complement of {} in {} among basis subsets",
        d.render(),
        e.render()
    )))
}

/// Rendering of the PDE system `v(y) = 0`, one line per basis field.
pub fn render_pde(d: &Distribution) -> Vec<String> {
    d.basis()
        .iter()
        .map(|v| format!("{} = 0", v.render().replace("d/d", "dy/d")))
        .collect()
}

/// Functionally independent first integrals of an involutive distribution.
pub fn first_integrals(d: &Distribution, count: usize) -> Result<Vec<Expr>> {
    let chart = &d.chart;
    let n = chart.dim();
    if count > n - d.dim() {
        return Err(Error::InvalidSystem(format!(
            "{count} first integrals requested, at most {} exist",
            n - d.dim()
        )));
    }
    let mut picker = Picker::new(chart, d, count);
    if count == 0 {
        return Ok(Vec::new());
    }
    let basis = d.basis();

    // untouched coordinates
    for (i, x) in chart.vars().iter().enumerate() {
        if basis.iter().all(|v| v.coeff(i).is_zero()) && picker.offer(Expr::var(x.clone())) {
            return Ok(picker.done());
        }
    }

    // variables along which D contains the coordinate field drop out
    let free: Vec<usize> = (0..n)
        .filter(|&i| !d.contains(&VectorField::coordinate(chart, i)))
        .collect();

    // constant coefficients: linear integrals
    let constant = basis.iter().all(|v| v.coeffs().iter().all(Expr::is_constant));
    if constant {
        let rows: Vec<Vec<Q>> = basis
            .iter()
            .map(|v| v.coeffs().iter().map(|c| c.as_constant().expect("constant")).collect())
            .collect();
        for a in q_null_space(rows, n) {
            let mut h = Expr::zero();
            for (ai, x) in a.iter().zip(chart.vars()) {
                if !ai.is_zero() {
                    h = &h + &(&Expr::rational(ai.clone()) * &Expr::var(x.clone()));
                }
            }
            if picker.offer(h) {
                return Ok(picker.done());
            }
        }
    }

    // rational ansatz N/D
    let vars: Vec<crate::Symbol> = free.iter().map(|&i| chart.var(i).clone()).collect();
    let mut denominators: Vec<Poly> = vec![Poly::one()];
    let mut push_den = |p: Poly| {
        if !p.is_constant() {
            let p = p.monic();
            if !denominators.contains(&p) {
                denominators.push(p);
            }
        }
    };
    for x in &vars {
        push_den(Poly::var(x.clone()));
    }
    for v in &basis {
        for c in v.coeffs() {
            push_den(c.numer().clone());
            push_den(c.denom().clone());
        }
    }
    for degree in 1..=2u32 {
        let monos = monomials_up_to(&vars, degree);
        for den in &denominators {
            for h in ansatz(&basis, &monos, den) {
                if picker.offer(h) {
                    return Ok(picker.done());
                }
            }
        }
    }
    Err(Error::FirstIntegrals { pde: render_pde(d) })
}

fn monomials_up_to(vars: &[crate::Symbol], degree: u32) -> Vec<Monomial> {
    let mut out = vec![Monomial::one()];
    let mut frontier = vec![(Monomial::one(), 0usize)];
    for _ in 0..degree {
        let mut next = Vec::new();
        for (m, start) in &frontier {
            for (i, x) in vars.iter().enumerate().skip(*start) {
                let mm = m.mul(&Monomial::var(x.clone()));
                out.push(mm.clone());
                next.push((mm, i));
            }
        }
        frontier = next;
    }
    out
}

/// Nonconstant `N/den` with `v(N/den) = 0` for every field, `N` ranging
/// over the span of `monos`.
fn ansatz(basis: &[VectorField], monos: &[Monomial], den: &Poly) -> Vec<Expr> {
    let den_e = Expr::poly(den.clone());
    // per field and monomial: v(m)·D − m·v(D), cleared to polynomials
    let mut rows: std::collections::BTreeMap<(usize, Monomial), Vec<Q>> = Default::default();
    for (fi, v) in basis.iter().enumerate() {
        let vd = v.apply(&den_e);
        let conds: Vec<Expr> = monos
            .iter()
            .map(|m| {
                let me = Expr::poly(Poly::monomial(m.clone(), Q::from_integer(1.into())));
                &(&v.apply(&me) * &den_e) - &(&me * &vd)
            })
            .collect();
        let mut l = Poly::one();
        for c in &conds {
            let g = l.gcd(c.denom());
            l = l.mul(&c.denom().exact_div(&g).expect("gcd divides"));
        }
        for (k, c) in conds.iter().enumerate() {
            let scaled = c.numer().mul(&l.exact_div(c.denom()).expect("lcm"));
            for (mono, coef) in scaled.terms() {
                rows.entry((fi, mono.clone()))
                    .or_insert_with(|| vec![Q::zero(); monos.len()])[k] = coef.clone();
            }
        }
    }
    let sol = q_null_space(rows.into_values().collect(), monos.len());
    sol.into_iter()
        .map(|c| {
            let num = Poly::from_terms(monos.iter().cloned().zip(c));
            Expr::from_polys(num, den.clone())
        })
        .collect()
}

/// Normalises an integral: drop an additive constant when the value at
/// the origin is finite; linear functions get last nonzero coefficient +1,
/// others a monic numerator. `c/g` is replaced by `g`.
pub fn canonical_integral(h: &Expr, chart: &Chart) -> Expr {
    let mut h = h.clone();
    if !h.is_polynomial() && h.numer().is_constant() {
        h = h.recip().expect("nonzero");
    }
    if let Some(c) = h.value_at_origin() {
        h = &h - &Expr::rational(c);
    }
    if h.is_zero() {
        return h;
    }
    let linear = h.is_polynomial() && h.numer().total_degree() == 1;
    let scale = if linear {
        chart
            .vars()
            .iter()
            .rev()
            .map(|x| h.diff(x))
            .find(|c| !c.is_zero())
            .and_then(|c| c.as_constant())
    } else {
        Some(h.numer().leading_coeff())
    };
    match scale {
        Some(s) if !s.is_zero() => &h * &Expr::rational(s.recip()),
        _ => h,
    }
}

/// Greedy functional-independence filter.
struct Picker<'a> {
    chart: &'a Chart,
    d: &'a Distribution,
    count: usize,
    chosen: Vec<Expr>,
    rows: Vec<Vec<Expr>>,
}

impl<'a> Picker<'a> {
    fn new(chart: &'a Chart, d: &'a Distribution, count: usize) -> Self {
        Picker {
            chart,
            d,
            count,
            chosen: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Returns `true` once enough integrals have been accepted.
    fn offer(&mut self, h: Expr) -> bool {
        let h = canonical_integral(&h, self.chart);
        if h.is_constant() || self.chosen.contains(&h) {
            return self.chosen.len() >= self.count;
        }
        if !self.d.basis().iter().all(|v| v.apply(&h).is_zero()) {
            return self.chosen.len() >= self.count;
        }
        let row: Vec<Expr> = self.chart.vars().iter().map(|x| h.diff(x)).collect();
        let mut trial = self.rows.clone();
        trial.push(row);
        let rank = SymbolicMatrix::from_rows(trial.clone(), self.chart.dim()).generic_rank();
        if rank == trial.len() {
            self.rows = trial;
            self.chosen.push(h);
        }
        self.chosen.len() >= self.count
    }

    fn done(self) -> Vec<Expr> {
        self.chosen
    }
}
