//! Vector fields, differential forms and maps between coordinate charts.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, ExprError, Result};
use crate::expr::{solve_map_inverse, Expr, Poly, Sampler, Symbol, SymbolicMatrix};

/// Ordered coordinate names.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Chart {
    vars: Arc<[Symbol]>,
}

impl Chart {
    pub fn new(vars: Vec<Symbol>) -> Result<Self> {
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::InvalidSystem(format!("duplicate coordinate `{v}`")));
            }
        }
        Ok(Chart { vars: vars.into() })
    }

    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        Chart::new(names.iter().map(|n| Symbol::new(n.as_ref())).collect())
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[Symbol] {
        &self.vars
    }

    pub fn var(&self, i: usize) -> &Symbol {
        &self.vars[i]
    }

    pub fn index_of(&self, s: &Symbol) -> Option<usize> {
        self.vars.iter().position(|v| v == s)
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        self.index_of(s).is_some()
    }

    /// Concatenation; fails on a repeated name.
    pub fn join(&self, other: &Chart) -> Result<Chart> {
        Chart::new(self.vars.iter().chain(other.vars.iter()).cloned().collect())
    }

    pub fn coordinate_functions(&self) -> Vec<Expr> {
        self.vars.iter().map(|v| Expr::var(v.clone())).collect()
    }

    fn check_expr(&self, e: &Expr) -> Result<()> {
        match e.free_vars().into_iter().find(|v| !self.contains(v)) {
            Some(v) => Err(Error::InvalidSystem(format!(
                "`{v}` is not a coordinate of the chart ({self:?})"
            ))),
            None => Ok(()),
        }
    }
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.vars.iter().map(|s| s.as_str()).collect();
        write!(f, "({})", names.join(", "))
    }
}

fn same_chart(a: &Chart, b: &Chart) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::ChartMismatch)
    }
}

fn coeff_string(c: &Expr) -> Option<String> {
    // `None` for a unit coefficient
    if c.is_one() {
        return None;
    }
    let s = c.to_string();
    let simple = c.denom().is_constant() && c.numer().num_terms() == 1;
    Some(if simple { s } else { format!("({s})") })
}

fn join_terms(parts: Vec<String>) -> String {
    if parts.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, p) in parts.into_iter().enumerate() {
        if i == 0 {
            out.push_str(&p);
        } else if let Some(rest) = p.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&p);
        }
    }
    out
}

#[derive(Clone, PartialEq, Eq)]
pub struct VectorField {
    chart: Chart,
    coeffs: Vec<Expr>,
}

impl VectorField {
    pub fn new(chart: &Chart, coeffs: Vec<Expr>) -> Result<Self> {
        if coeffs.len() != chart.dim() {
            return Err(Error::Expr(ExprError::DimensionMismatch(format!(
                "{} coefficients on a {}-dimensional chart",
                coeffs.len(),
                chart.dim()
            ))));
        }
        Ok(VectorField {
            chart: chart.clone(),
            coeffs,
        })
    }

    pub fn zero(chart: &Chart) -> Self {
        VectorField {
            chart: chart.clone(),
            coeffs: vec![Expr::zero(); chart.dim()],
        }
    }

    /// The coordinate field `∂/∂xᵢ`.
    pub fn coordinate(chart: &Chart, i: usize) -> Self {
        let mut v = VectorField::zero(chart);
        v.coeffs[i] = Expr::one();
        v
    }

    pub fn coordinate_named(chart: &Chart, name: &str) -> Option<Self> {
        chart
            .index_of(&Symbol::new(name))
            .map(|i| VectorField::coordinate(chart, i))
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &Expr {
        &self.coeffs[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Expr::is_zero)
    }

    /// Directional derivative `v(h)`.
    pub fn apply(&self, h: &Expr) -> Expr {
        let mut acc = Expr::zero();
        for (c, x) in self.coeffs.iter().zip(self.chart.vars()) {
            if !c.is_zero() && h.depends_on(x) {
                acc = &acc + &(c * &h.diff(x));
            }
        }
        acc
    }

    pub fn scale(&self, f: &Expr) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            coeffs: self.coeffs.iter().map(|c| c * f).collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        same_chart(&self.chart, &other.chart)?;
        Ok(VectorField {
            chart: self.chart.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        self.add(&other.scale(&Expr::int(-1)))
    }

    pub fn substitute(&self, bind: &HashMap<Symbol, Expr>) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            coeffs: self.coeffs.iter().map(|c| c.substitute(bind)).collect(),
        }
    }

    /// Multiplies through by the common denominator so coefficients are
    /// polynomial; the span is unchanged.
    pub fn cleared(&self) -> VectorField {
        let mut l = Poly::one();
        for c in &self.coeffs {
            let d = c.denom();
            let g = l.gcd(d);
            l = l.mul(&d.exact_div(&g).expect("gcd divides"));
        }
        self.scale(&Expr::poly(l))
    }

    /// Same field with the first nonzero coefficient scaled to one.
    pub fn normalized(&self) -> VectorField {
        match self.coeffs.iter().find(|c| !c.is_zero()) {
            Some(c) if !c.is_one() => self.scale(&c.recip().expect("nonzero")),
            _ => self.clone(),
        }
    }

    pub fn render(&self) -> String {
        let parts = self
            .coeffs
            .iter()
            .zip(self.chart.vars())
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, x)| match coeff_string(c) {
                None => format!("d/d{x}"),
                Some(s) if s == "-1" => format!("-d/d{x}"),
                Some(s) => format!("{s}*d/d{x}"),
            })
            .collect();
        join_terms(parts)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorField[{}]", self.render())
    }
}

/// A p-form stored as strictly increasing index tuples → coefficient.
#[derive(Clone, PartialEq, Eq)]
pub struct DifferentialForm {
    chart: Chart,
    degree: usize,
    terms: BTreeMap<Vec<usize>, Expr>,
}

/// Sorts `idx` in place, returning the permutation sign, or `None` when
/// an index repeats.
fn sort_with_sign(idx: &mut [usize]) -> Option<bool> {
    let mut negative = false;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            negative = !negative;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(negative)
    }
}

impl DifferentialForm {
    pub fn zero(chart: &Chart, degree: usize) -> Self {
        DifferentialForm {
            chart: chart.clone(),
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn function(chart: &Chart, f: Expr) -> Self {
        let mut w = DifferentialForm::zero(chart, 0);
        w.add_term(Vec::new(), f);
        w
    }

    /// `dxᵢ`.
    pub fn coordinate(chart: &Chart, i: usize) -> Self {
        let mut w = DifferentialForm::zero(chart, 1);
        w.add_term(vec![i], Expr::one());
        w
    }

    pub fn one_form(chart: &Chart, coeffs: &[Expr]) -> Result<Self> {
        if coeffs.len() != chart.dim() {
            return Err(Error::Expr(ExprError::DimensionMismatch(
                "one-form coefficient count".into(),
            )));
        }
        let mut w = DifferentialForm::zero(chart, 1);
        for (i, c) in coeffs.iter().enumerate() {
            w.add_term(vec![i], c.clone());
        }
        Ok(w)
    }

    /// `df` for a function on the chart.
    pub fn differential(chart: &Chart, f: &Expr) -> Self {
        let coeffs: Vec<Expr> = chart.vars().iter().map(|x| f.diff(x)).collect();
        DifferentialForm::one_form(chart, &coeffs).expect("chart-sized")
    }

    /// Builds from arbitrary index tuples, normalising order and sign.
    pub fn from_terms(
        chart: &Chart,
        degree: usize,
        terms: impl IntoIterator<Item = (Vec<usize>, Expr)>,
    ) -> Result<Self> {
        let mut w = DifferentialForm::zero(chart, degree);
        for (mut idx, c) in terms {
            if idx.len() != degree || idx.iter().any(|&i| i >= chart.dim()) {
                return Err(Error::Expr(ExprError::DimensionMismatch(format!(
                    "index tuple {idx:?} for a {degree}-form on a {}-dimensional chart",
                    chart.dim()
                ))));
            }
            match sort_with_sign(&mut idx) {
                None => {}
                Some(false) => w.add_term(idx, c),
                Some(true) => w.add_term(idx, -c),
            }
        }
        Ok(w)
    }

    fn add_term(&mut self, idx: Vec<usize>, c: Expr) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&idx) {
            None => {
                self.terms.insert(idx, c);
            }
            Some(old) => {
                let s = &old + &c;
                if !s.is_zero() {
                    self.terms.insert(idx, s);
                }
            }
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Expr)> {
        self.terms.iter()
    }

    pub fn coeff(&self, idx: &[usize]) -> Expr {
        self.terms.get(idx).cloned().unwrap_or_else(Expr::zero)
    }

    /// Coefficients of a one-form, one per coordinate.
    pub fn one_form_coeffs(&self) -> Vec<Expr> {
        assert_eq!(self.degree, 1, "not a one-form");
        (0..self.chart.dim()).map(|i| self.coeff(&[i])).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &DifferentialForm) -> Result<DifferentialForm> {
        same_chart(&self.chart, &other.chart)?;
        if self.degree != other.degree && !self.is_zero() && !other.is_zero() {
            return Err(Error::Expr(ExprError::DimensionMismatch(
                "adding forms of different degree".into(),
            )));
        }
        let mut out = self.clone();
        if out.is_zero() {
            out.degree = other.degree;
        }
        for (i, c) in &other.terms {
            out.add_term(i.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DifferentialForm) -> Result<DifferentialForm> {
        self.add(&other.scale(&Expr::int(-1)))
    }

    pub fn scale(&self, f: &Expr) -> DifferentialForm {
        let mut out = DifferentialForm::zero(&self.chart, self.degree);
        for (i, c) in &self.terms {
            out.add_term(i.clone(), c * f);
        }
        out
    }

    pub fn render(&self) -> String {
        let vars = self.chart.vars();
        let parts = self
            .terms
            .iter()
            .map(|(idx, c)| {
                if idx.is_empty() {
                    return c.to_string();
                }
                let basis: Vec<String> = idx.iter().map(|&i| format!("d{}", vars[i])).collect();
                let basis = basis.join("∧");
                match coeff_string(c) {
                    None => basis,
                    Some(s) if s == "-1" => format!("-{basis}"),
                    Some(s) => format!("{s}*{basis}"),
                }
            })
            .collect();
        join_terms(parts)
    }
}

impl fmt::Display for DifferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for DifferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form{}[{}]", self.degree, self.render())
    }
}

pub fn wedge(a: &DifferentialForm, b: &DifferentialForm) -> Result<DifferentialForm> {
    same_chart(&a.chart, &b.chart)?;
    let degree = a.degree + b.degree;
    let mut out = DifferentialForm::zero(&a.chart, degree);
    if degree > a.chart.dim() {
        return Ok(out);
    }
    for (i, c) in &a.terms {
        for (j, e) in &b.terms {
            let mut idx: Vec<usize> = i.iter().chain(j).copied().collect();
            match sort_with_sign(&mut idx) {
                None => {}
                Some(neg) => {
                    let p = c * e;
                    out.add_term(idx, if neg { -p } else { p });
                }
            }
        }
    }
    Ok(out)
}

/// Wedge of a list of forms, left to right; the empty product is `1`.
pub fn wedge_all(chart: &Chart, forms: &[DifferentialForm]) -> Result<DifferentialForm> {
    let mut acc = DifferentialForm::function(chart, Expr::one());
    for w in forms {
        acc = wedge(&acc, w)?;
    }
    Ok(acc)
}

pub fn exterior_derivative(w: &DifferentialForm) -> DifferentialForm {
    let mut out = DifferentialForm::zero(&w.chart, w.degree + 1);
    for (idx, c) in &w.terms {
        for (j, x) in w.chart.vars().iter().enumerate() {
            if idx.contains(&j) || !c.depends_on(x) {
                continue;
            }
            // dxʲ ∧ dx^I, moved into increasing position
            let before = idx.iter().filter(|&&i| i < j).count();
            let mut new_idx = idx.clone();
            new_idx.insert(before, j);
            let dc = c.diff(x);
            out.add_term(new_idx, if before % 2 == 1 { -dc } else { dc });
        }
    }
    out
}

/// `v ⌋ ω`; a 0-form maps to the zero form.
pub fn interior_product(v: &VectorField, w: &DifferentialForm) -> Result<DifferentialForm> {
    same_chart(&v.chart, &w.chart)?;
    if w.degree == 0 {
        return Ok(DifferentialForm::zero(&w.chart, 0));
    }
    let mut out = DifferentialForm::zero(&w.chart, w.degree - 1);
    for (idx, c) in &w.terms {
        for (k, &i) in idx.iter().enumerate() {
            let vi = &v.coeffs[i];
            if vi.is_zero() {
                continue;
            }
            let mut rest = idx.clone();
            rest.remove(k);
            let p = vi * c;
            out.add_term(rest, if k % 2 == 1 { -p } else { p });
        }
    }
    Ok(out)
}

/// Pairing `⟨ω, v⟩` of a one-form with a field.
pub fn pairing(w: &DifferentialForm, v: &VectorField) -> Result<Expr> {
    let r = interior_product(v, w)?;
    Ok(r.coeff(&[]))
}

pub fn lie_bracket(v: &VectorField, w: &VectorField) -> Result<VectorField> {
    same_chart(&v.chart, &w.chart)?;
    let coeffs = v
        .coeffs
        .iter()
        .zip(&w.coeffs)
        .map(|(vi, wi)| &v.apply(wi) - &w.apply(vi))
        .collect();
    Ok(VectorField {
        chart: v.chart.clone(),
        coeffs,
    })
}

/// A smooth map given by one expression per target coordinate.
#[derive(Clone, PartialEq, Eq)]
pub struct MapBetweenCharts {
    source: Chart,
    target: Chart,
    components: Vec<Expr>,
}

impl MapBetweenCharts {
    pub fn new(source: &Chart, target: &Chart, components: Vec<Expr>) -> Result<Self> {
        if components.len() != target.dim() {
            return Err(Error::Expr(ExprError::DimensionMismatch(format!(
                "{} components for a {}-dimensional target",
                components.len(),
                target.dim()
            ))));
        }
        for c in &components {
            source.check_expr(c)?;
        }
        Ok(MapBetweenCharts {
            source: source.clone(),
            target: target.clone(),
            components,
        })
    }

    pub fn identity(chart: &Chart) -> Self {
        MapBetweenCharts {
            source: chart.clone(),
            target: chart.clone(),
            components: chart.coordinate_functions(),
        }
    }

    pub fn source(&self) -> &Chart {
        &self.source
    }

    pub fn target(&self) -> &Chart {
        &self.target
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn jacobian(&self) -> SymbolicMatrix {
        SymbolicMatrix::jacobian(&self.components, self.source.vars())
    }

    pub fn is_submersion(&self) -> bool {
        self.jacobian().generic_rank() == self.target.dim()
    }

    /// Composes `h ∘ self` for a function `h` on the target chart.
    pub fn compose(&self, h: &Expr) -> Expr {
        h.substitute(&self.bindings())
    }

    fn bindings(&self) -> HashMap<Symbol, Expr> {
        self.target
            .vars()
            .iter()
            .cloned()
            .zip(self.components.iter().cloned())
            .collect()
    }

    /// Wedge criterion: `g ∈ f*(C∞(target))` iff `dg ∧ df¹ ∧ … ∧ dfⁿ = 0`.
    pub fn is_pullback_function(&self, g: &Expr) -> bool {
        let mut forms: Vec<DifferentialForm> = vec![DifferentialForm::differential(&self.source, g)];
        forms.extend(
            self.components
                .iter()
                .map(|f| DifferentialForm::differential(&self.source, f)),
        );
        wedge_all(&self.source, &forms).expect("same chart").is_zero()
    }

    /// Local right inverse data used to re-express functions of the source
    /// through target coordinates.
    pub fn section(&self) -> Result<Section> {
        Section::new(self)
    }
}

impl fmt::Debug for MapBetweenCharts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} -> {:?}: [", self.source, self.target)?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Indices (into `chart`) of the lexicographically first set of coordinate
/// functions completing `funcs` to a basis, if any.
pub fn complete_with_coordinates(funcs: &[Expr], chart: &Chart) -> Option<Vec<usize>> {
    let n = chart.dim();
    let k = n.checked_sub(funcs.len())?;
    let mut sampler = Sampler::new(0x5eed);
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        let mut all: Vec<Expr> = funcs.to_vec();
        all.extend(combo.iter().map(|&i| Expr::var(chart.var(i).clone())));
        let jac = SymbolicMatrix::jacobian(&all, chart.vars());
        // cheap sampled screen before the exact check
        let full = match jac.sampled_rank(&mut sampler) {
            Ok(r) if r == n => true,
            _ => jac.generic_rank() == n,
        };
        if full {
            return Some(combo);
        }
        if !next_combination(&mut combo, n) {
            return None;
        }
    }
}

/// Advances `c` to the next k-subset of `0..n` in lexicographic order.
pub fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// The source expressed through target coordinates plus completing
/// source coordinates: `s = σ(y, z)`.
#[derive(Clone, Debug)]
pub struct Section {
    target: Chart,
    completion: Vec<Symbol>,
    temps: Vec<Symbol>,
    inverse: HashMap<Symbol, Expr>,
}

impl Section {
    fn new(map: &MapBetweenCharts) -> Result<Self> {
        let idx = complete_with_coordinates(&map.components, &map.source).ok_or(Error::CompletionFailure)?;
        let completion: Vec<Symbol> = idx.iter().map(|&i| map.source.var(i).clone()).collect();
        let unknowns: Vec<Symbol> = map
            .source
            .vars()
            .iter()
            .filter(|v| !completion.contains(v))
            .cloned()
            .collect();
        // temporaries keep target names from colliding with source names
        let temps: Vec<Symbol> = (0..map.target.dim())
            .map(|i| Symbol::new(&format!("__tgt{i}")))
            .collect();
        let eqs: Vec<Expr> = temps
            .iter()
            .zip(&map.components)
            .map(|(t, f)| &Expr::var(t.clone()) - f)
            .collect();
        let inverse = solve_map_inverse(&eqs, &unknowns)?;
        Ok(Section {
            target: map.target.clone(),
            completion,
            temps,
            inverse,
        })
    }

    pub fn completion(&self) -> &[Symbol] {
        &self.completion
    }

    /// `ψ` with `g = ψ ∘ f`, or `None` when `g` is not of that form.
    pub fn express(&self, g: &Expr) -> Option<Expr> {
        let e = g.substitute(&self.inverse);
        if self.completion.iter().any(|z| e.depends_on(z)) {
            return None;
        }
        let rename: HashMap<Symbol, Expr> = self
            .temps
            .iter()
            .cloned()
            .zip(self.target.coordinate_functions())
            .collect();
        Some(e.substitute(&rename))
    }
}

/// Result of pushing a field forward along a submersion.
#[derive(Clone, Debug)]
pub struct Pushforward {
    /// `(∂f/∂s)·v`, in source coordinates.
    pub source_coeffs: Vec<Expr>,
    /// The same field on the target chart when it is projectable.
    pub target: Option<VectorField>,
}

impl Pushforward {
    pub fn is_projected(&self) -> bool {
        self.target.is_some()
    }
}

pub fn pushforward_along_submersion(f: &MapBetweenCharts, v: &VectorField) -> Result<Pushforward> {
    let section = f.section()?;
    pushforward_with_section(f, &section, v)
}

/// As [`pushforward_along_submersion`] with a precomputed section.
pub fn pushforward_with_section(
    f: &MapBetweenCharts,
    section: &Section,
    v: &VectorField,
) -> Result<Pushforward> {
    same_chart(&f.source, &v.chart)?;
    let source_coeffs: Vec<Expr> = f.components.iter().map(|c| v.apply(c)).collect();
    let mut target = Vec::with_capacity(source_coeffs.len());
    for c in &source_coeffs {
        match section.express(c) {
            Some(e) => target.push(e),
            None => {
                return Ok(Pushforward {
                    source_coeffs,
                    target: None,
                })
            }
        }
    }
    Ok(Pushforward {
        source_coeffs,
        target: Some(VectorField::new(&f.target, target)?),
    })
}

/// Basis of the kernel of `f⋆`, with polynomial coefficients.
pub fn kernel_fields(f: &MapBetweenCharts) -> Vec<VectorField> {
    f.jacobian()
        .null_space()
        .into_iter()
        .map(|c| VectorField::new(&f.source, c).expect("chart-sized").cleared())
        .collect()
}

/// The frame `∂_{fⁱ}` dual to the differentials of basis functions.
pub fn dual_frame(chart: &Chart, funcs: &[Expr]) -> Result<Vec<VectorField>> {
    let n = chart.dim();
    if funcs.len() != n {
        return Err(Error::Expr(ExprError::DimensionMismatch(format!(
            "{} functions on a {n}-dimensional chart",
            funcs.len()
        ))));
    }
    let jac = SymbolicMatrix::jacobian(funcs, chart.vars());
    let inv = jac.inverse().ok_or_else(|| {
        Error::Expr(ExprError::RankDeficient {
            expected: n,
            found: jac.generic_rank(),
        })
    })?;
    let frame: Vec<VectorField> = (0..n)
        .map(|i| VectorField::new(chart, inv.column(i)).expect("chart-sized"))
        .collect();
    for (i, fi) in frame.iter().enumerate() {
        for (j, g) in funcs.iter().enumerate() {
            let p = fi.apply(g);
            let ok = if i == j { p.is_one() } else { p.is_zero() };
            if !ok {
                return Err(Error::Inconsistent(format!("dual frame pairing ({i},{j}) = {p}")));
            }
        }
    }
    Ok(frame)
}

/// Pulls a form on `φ`'s target back to its source.
pub fn pullback(phi: &MapBetweenCharts, w: &DifferentialForm) -> Result<DifferentialForm> {
    same_chart(&phi.target, &w.chart)?;
    let bind = phi.bindings();
    let dphi: Vec<DifferentialForm> = phi
        .components
        .iter()
        .map(|c| DifferentialForm::differential(&phi.source, c))
        .collect();
    let mut out = DifferentialForm::zero(&phi.source, w.degree);
    for (idx, c) in &w.terms {
        let parts: Vec<DifferentialForm> = idx.iter().map(|&i| dphi[i].clone()).collect();
        let term = wedge_all(&phi.source, &parts)?.scale(&c.try_substitute(&bind)?);
        out = out.add(&term)?;
    }
    Ok(out)
}
