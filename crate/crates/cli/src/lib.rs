//! Orchestration behind the `flatdisc` binary: running the tests, building
//! reports and rendering them as text.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::Instant;

use flatdisc_core::expr::Sampler;
use flatdisc_core::flatness::{advanced_test, simple_test, FlatParametrization};
use flatdisc_core::io::{AnalysisReport, MethodReport, SystemDefinitionFile, FORMAT_VERSION};
use flatdisc_core::system::DiscreteSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum MethodChoice {
    Both,
    Simple,
    Advanced,
}

pub const EXIT_FLAT: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_FLAT: i32 = 2;
pub const EXIT_UNDECIDED: i32 = 3;

pub fn exit_code(verdict: &str) -> i32 {
    match verdict {
        "flat" => EXIT_FLAT,
        "not-flat" => EXIT_NOT_FLAT,
        _ => EXIT_UNDECIDED,
    }
}

/// Combined verdict; contradicting methods give "undecided".
fn overall(methods: &[MethodReport]) -> String {
    let flat = methods.iter().any(|m| m.verdict == "flat");
    let not_flat = methods.iter().any(|m| m.verdict == "not-flat");
    match (flat, not_flat) {
        (true, false) => "flat".into(),
        (false, true) => "not-flat".into(),
        _ => "undecided".into(),
    }
}

pub fn analyze(
    def: &SystemDefinitionFile,
    method: MethodChoice,
    seed: u64,
    max_iter: Option<usize>,
) -> flatdisc_core::Result<AnalysisReport> {
    let s = def.to_system()?;
    let mut methods = Vec::new();
    if matches!(method, MethodChoice::Both | MethodChoice::Simple) {
        let t = Instant::now();
        let r = simple_test(&s, max_iter);
        methods.push(MethodReport::new(&r, t.elapsed().as_millis() as u64));
    }
    if matches!(method, MethodChoice::Both | MethodChoice::Advanced) {
        let t = Instant::now();
        let r = advanced_test(&s, max_iter);
        let mut rep = MethodReport::new(&r, t.elapsed().as_millis() as u64);
        if let (Some(p), Some(v)) = (&r.parametrization, rep.verification.as_mut()) {
            // independent numeric spot check of the identity
            if !spot_check(&s, p, seed) {
                v.passed = false;
                rep.verdict = "undecided".into();
                rep.reason = Some("numeric spot check of the parametrization failed".into());
            }
        }
        methods.push(rep);
    }
    let verdict = overall(&methods);
    Ok(AnalysisReport {
        version: FORMAT_VERSION,
        seed,
        input: def.clone(),
        methods,
        verdict,
    })
}

/// Evaluates `F_x(σy) − f(F_x(y), F_u(y))` at seeded random points.
pub fn spot_check(s: &DiscreteSystem, p: &FlatParametrization, seed: u64) -> bool {
    let bind: HashMap<_, _> = p
        .states
        .iter()
        .cloned()
        .zip(p.fx.iter().cloned())
        .chain(p.inputs.iter().cloned().zip(p.fu.iter().cloned()))
        .collect();
    let mut sampler = Sampler::new(seed);
    p.fx.iter().zip(s.dynamics()).all(|(fx, rhs)| {
        let r = &p.shift(fx) - &rhs.substitute(&bind);
        sampler.probably_zero(&r).unwrap_or(false)
    })
}

/// Human-readable rendering of the structured report.
pub fn render_text(r: &AnalysisReport) -> String {
    let mut o = String::new();
    let _ = writeln!(o, "system ({} states, {} inputs)", r.input.states.len(), r.input.inputs.len());
    for (x, f) in r.input.states.iter().zip(&r.input.dynamics) {
        let _ = writeln!(o, "  {x}+ = {f}");
    }
    for m in &r.methods {
        let _ = writeln!(o, "\n== {} test: {}", m.method, m.verdict);
        if let Some(reason) = &m.reason {
            let _ = writeln!(o, "reason: {reason}");
        }
        if let Some(t) = &m.trivial_inputs {
            if !t.trivial.is_empty() {
                let _ = writeln!(o, "trivial inputs: {}", t.trivial.join(", "));
                for [u, e] in &t.effective {
                    let _ = writeln!(o, "  {u} := {e}");
                }
            }
        }
        for (k, it) in m.simple_iterations.iter().enumerate() {
            let _ = writeln!(o, "-- iteration {}", k + 1);
            list(&mut o, "U", &it.u);
            for l in &it.lambda {
                let sols: Vec<String> = l.solutions.iter().map(|s| format!("({})", s.join(", "))).collect();
                let _ = writeln!(o, "  lambda: {{{}}}", sols.join(", "));
            }
            list(&mut o, "W", &it.w);
            list(&mut o, "V", &it.v);
            if !it.trivial.is_empty() {
                list(&mut o, "trivial", &it.trivial);
            }
            list(&mut o, "pushed W", &it.pushed);
            list(&mut o, "P next", &it.p_next);
        }
        for (k, it) in m.advanced_iterations.iter().enumerate() {
            let _ = writeln!(o, "-- iteration {}", k + 1);
            for line in &it.system {
                let _ = writeln!(o, "  {line}");
            }
            for l in &it.lambda {
                let sols: Vec<String> = l.solutions.iter().map(|s| format!("({})", s.join(", "))).collect();
                let _ = writeln!(o, "  lambda: {{{}}}", sols.join(", "));
            }
            list(&mut o, "W", &it.w);
            list(&mut o, "V", &it.v);
            list(&mut o, "P", &it.p1);
            list(&mut o, "g", &it.g);
            list(&mut o, "q", &it.q);
            list(&mut o, "p", &it.p);
            list(&mut o, "h", &it.h);
            if let Some(rem) = &it.remaining {
                let _ = writeln!(o, "  remaining system:");
                for line in rem {
                    let _ = writeln!(o, "    {line}");
                }
            }
        }
        if let Some(w) = &m.w_bar {
            list(&mut o, "W_bar", w);
        }
        if let Some(t) = &m.terminal {
            let _ = writeln!(o, "terminal system:");
            for line in t {
                let _ = writeln!(o, "  {line}");
            }
        }
        if let Some(ys) = &m.outputs {
            let _ = writeln!(o, "flat outputs:");
            for (i, y) in ys.iter().enumerate() {
                let _ = writeln!(o, "  y{} = {y}", i + 1);
            }
        }
        if !m.residual_pde.is_empty() {
            list(&mut o, "unsolved PDE", &m.residual_pde);
        }
        if let Some(p) = &m.parametrization {
            let shifts: Vec<String> = p.outputs.iter().map(|e| format!("{}: {}", e.name, e.shift)).collect();
            let _ = writeln!(o, "parametrization (r = {}):", shifts.join(", "));
            for (x, f) in p.states.iter().zip(&p.fx) {
                let _ = writeln!(o, "  {x} = {f}");
            }
            for (u, f) in p.inputs.iter().zip(&p.fu) {
                let _ = writeln!(o, "  {u} = {f}");
            }
        }
        if let Some(v) = &m.verification {
            let _ = writeln!(
                o,
                "verification: {} (submersion {}, rank d_y0 F_x {}/{})",
                if v.passed { "passed" } else { "failed" },
                v.submersion,
                v.y0_rank,
                v.y0_expected
            );
            for (i, res) in &v.residuals {
                let _ = writeln!(o, "  residual {}: {res}", i + 1);
            }
        }
        let _ = writeln!(o, "time: {} ms", m.elapsed_ms);
    }
    let _ = writeln!(o, "\nverdict: {}", r.verdict);
    o
}

fn list(o: &mut String, label: &str, items: &[String]) {
    let _ = writeln!(o, "  {label}: {{{}}}", items.join(", "));
}
