//! JSON file formats: system definitions, parametrizations and the
//! analysis report.

use serde::{Deserialize, Serialize};

use crate::distributions::{Codistribution, Distribution};
use crate::expr::{parse, Expr, Symbol};
use crate::exterior::VectorField;
use crate::flatness::{FlatParametrization, FlatnessReport, Verification};
use crate::system::{DiscreteSystem, TrivialInputRecord};
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDefinitionFile {
    pub version: u32,
    pub states: Vec<String>,
    pub inputs: Vec<String>,
    pub dynamics: Vec<String>,
    #[serde(default)]
    pub meta: Meta,
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Format(format!("line {}, column {}: {e}", e.line(), e.column()))
}

impl SystemDefinitionFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let f: SystemDefinitionFile = serde_json::from_str(text).map_err(json_error)?;
        if f.version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {}", f.version)));
        }
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_system(s: &DiscreteSystem) -> Self {
        SystemDefinitionFile {
            version: FORMAT_VERSION,
            states: names(s.states().vars()),
            inputs: names(s.inputs().vars()),
            dynamics: strings(s.dynamics()),
            meta: Meta::default(),
        }
    }

    /// Builds the system; parse errors name the offending component.
    pub fn to_system(&self) -> Result<DiscreteSystem> {
        if self.dynamics.len() != self.states.len() {
            return Err(Error::Format(format!(
                "{} dynamics for {} states",
                self.dynamics.len(),
                self.states.len()
            )));
        }
        for name in self.states.iter().chain(&self.inputs) {
            if !Symbol::is_valid_identifier(name) {
                return Err(Error::Format(format!("invalid identifier `{name}`")));
            }
        }
        let xs: Vec<Symbol> = self.states.iter().map(|s| Symbol::new(s)).collect();
        let us: Vec<Symbol> = self.inputs.iter().map(|s| Symbol::new(s)).collect();
        let all: Vec<Symbol> = xs.iter().chain(&us).cloned().collect();
        let f = self
            .dynamics
            .iter()
            .enumerate()
            .map(|(i, d)| parse(d, &all).map_err(|e| Error::Format(format!("dynamics[{i}] `{d}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        DiscreteSystem::new(xs, us, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatOutputEntry {
    pub name: String,
    pub shift: usize,
}

/// `F = (F_x, F_u)` on disk; coordinates are `{name}_{k}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametrizationFile {
    pub version: u32,
    pub outputs: Vec<FlatOutputEntry>,
    pub states: Vec<String>,
    pub inputs: Vec<String>,
    pub fx: Vec<String>,
    pub fu: Vec<String>,
}

impl ParametrizationFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let f: ParametrizationFile = serde_json::from_str(text).map_err(json_error)?;
        if f.version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {}", f.version)));
        }
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_parametrization(p: &FlatParametrization) -> Self {
        ParametrizationFile {
            version: FORMAT_VERSION,
            outputs: p
                .outputs
                .iter()
                .zip(&p.shifts)
                .map(|(y, &r)| FlatOutputEntry {
                    name: y.to_string(),
                    shift: r,
                })
                .collect(),
            states: names(&p.states),
            inputs: names(&p.inputs),
            fx: strings(&p.fx),
            fu: strings(&p.fu),
        }
    }

    pub fn to_parametrization(&self) -> Result<FlatParametrization> {
        let mut p = FlatParametrization {
            outputs: self.outputs.iter().map(|o| Symbol::new(&o.name)).collect(),
            shifts: self.outputs.iter().map(|o| o.shift).collect(),
            states: self.states.iter().map(|s| Symbol::new(s)).collect(),
            inputs: self.inputs.iter().map(|s| Symbol::new(s)).collect(),
            fx: Vec::new(),
            fu: Vec::new(),
        };
        let vars = p.chart()?.vars().to_vec();
        let parse_all = |label: &str, v: &[String]| -> Result<Vec<Expr>> {
            v.iter()
                .enumerate()
                .map(|(i, s)| parse(s, &vars).map_err(|e| Error::Format(format!("{label}[{i}] `{s}`: {e}"))))
                .collect()
        };
        p.fx = parse_all("fx", &self.fx)?;
        p.fu = parse_all("fu", &self.fu)?;
        Ok(p)
    }
}

fn names(v: &[Symbol]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn strings(v: &[Expr]) -> Vec<String> {
    v.iter().map(|e| e.to_string()).collect()
}

fn fields(v: &[VectorField]) -> Vec<String> {
    v.iter().map(|f| f.render()).collect()
}

fn dist(d: &Distribution) -> Vec<String> {
    fields(d.generators())
}

fn codist(c: &Codistribution) -> Vec<String> {
    c.generators().iter().map(|w| w.render()).collect()
}

fn pairs(v: &[(Symbol, Expr)]) -> Vec<[String; 2]> {
    v.iter().map(|(a, b)| [a.to_string(), b.to_string()]).collect()
}

fn renames(v: &[(Symbol, Symbol)]) -> Vec<[String; 2]> {
    v.iter().map(|(a, b)| [a.to_string(), b.to_string()]).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrivialInputReport {
    /// New input name and the component of `f` it replaces.
    pub effective: Vec<[String; 2]>,
    pub trivial: Vec<String>,
    pub inverse: Vec<[String; 2]>,
}

impl From<&TrivialInputRecord> for TrivialInputReport {
    fn from(r: &TrivialInputRecord) -> Self {
        TrivialInputReport {
            effective: pairs(&r.effective),
            trivial: names(&r.trivial),
            inverse: pairs(&r.inverse),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaReport {
    pub normalization: Vec<usize>,
    pub equations: Vec<Vec<String>>,
    pub solutions: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimpleIterationReport {
    pub u: Vec<String>,
    pub map: Vec<String>,
    pub lambda: Vec<LambdaReport>,
    pub w: Vec<String>,
    pub v: Vec<String>,
    pub trivial: Vec<String>,
    pub pushed: Vec<String>,
    pub integrals: Vec<String>,
    pub p_next: Vec<String>,
    pub remaining: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdvancedIterationReport {
    pub system: Vec<String>,
    pub trivial_inputs: TrivialInputReport,
    pub lambda: Vec<LambdaReport>,
    pub w: Vec<String>,
    pub v: Vec<String>,
    pub p1: Vec<String>,
    pub g: Vec<String>,
    pub q: Vec<String>,
    pub p: Vec<String>,
    pub h: Vec<String>,
    pub transformed: Vec<String>,
    pub shift: Vec<[String; 2]>,
    pub rename_states: Vec<[String; 2]>,
    pub rename_inputs: Vec<[String; 2]>,
    pub remaining: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub residuals: Vec<(usize, String)>,
    pub submersion: bool,
    pub y0_rank: usize,
    pub y0_expected: usize,
    pub depth_violations: Vec<String>,
    pub chart_error: Option<String>,
}

impl From<&Verification> for VerificationReport {
    fn from(v: &Verification) -> Self {
        VerificationReport {
            passed: v.passed(),
            residuals: v.residuals.iter().map(|(i, r)| (*i, r.to_string())).collect(),
            submersion: v.submersion,
            y0_rank: v.y0_rank.0,
            y0_expected: v.y0_rank.1,
            depth_violations: v.depth_violations.clone(),
            chart_error: v.chart_error.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: String,
    pub verdict: String,
    pub reason: Option<String>,
    pub trivial_inputs: Option<TrivialInputReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub simple_iterations: Vec<SimpleIterationReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub advanced_iterations: Vec<AdvancedIterationReport>,
    pub w_bar: Option<Vec<String>>,
    pub outputs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residual_pde: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub shifts: Vec<usize>,
    pub terminal: Option<Vec<String>>,
    pub parametrization: Option<ParametrizationFile>,
    pub verification: Option<VerificationReport>,
    pub elapsed_ms: u64,
}

fn lambda_reports(o: &crate::system::ProjectableOutcome) -> Vec<LambdaReport> {
    o.rounds
        .iter()
        .map(|r| LambdaReport {
            normalization: r.normalization.clone(),
            equations: (0..r.equations.rows())
                .map(|i| r.equations.row(i).iter().map(|e| e.to_string()).collect())
                .collect(),
            solutions: r.lambda.iter().map(|l| strings(l)).collect(),
        })
        .collect()
}

impl MethodReport {
    pub fn new(r: &FlatnessReport, elapsed_ms: u64) -> Self {
        let simple_iterations = r
            .simple
            .iter()
            .map(|it| SimpleIterationReport {
                u: fields(&it.fields),
                map: strings(it.map.components()),
                lambda: lambda_reports(&it.outcome),
                w: dist(&it.w),
                v: dist(&it.v),
                trivial: fields(&it.trivial),
                pushed: fields(&it.pushed),
                integrals: strings(&it.integrals),
                p_next: codist(&it.p_next),
                remaining: it.remaining,
            })
            .collect();
        let advanced_iterations = r
            .advanced
            .iter()
            .map(|it| {
                let st = &it.step;
                AdvancedIterationReport {
                    system: st.system.render(),
                    trivial_inputs: (&it.trivial).into(),
                    lambda: lambda_reports(&st.projectable.outcome),
                    w: dist(&st.w),
                    v: dist(&st.v),
                    p1: codist(&st.p1),
                    g: strings(&st.g),
                    q: strings(&st.q),
                    p: strings(&st.p),
                    h: strings(&st.h),
                    transformed: strings(&st.transformed),
                    shift: renames(&it.split.shift),
                    rename_states: renames(&it.split.renaming.states),
                    rename_inputs: renames(&it.split.renaming.inputs),
                    remaining: it.split.remaining.as_ref().map(|s| s.render()),
                }
            })
            .collect();
        MethodReport {
            method: r.method.name().into(),
            verdict: r.verdict.label().into(),
            reason: r.verdict.reason().map(str::to_string),
            trivial_inputs: r.trivial_inputs.as_ref().map(Into::into),
            simple_iterations,
            advanced_iterations,
            w_bar: r.w_bar.as_ref().map(dist),
            outputs: r.outputs.as_deref().map(strings),
            residual_pde: r.residual_pde.clone(),
            shifts: r.shifts.clone(),
            terminal: r.terminal.as_ref().map(|s| s.render()),
            parametrization: r.parametrization.as_ref().map(ParametrizationFile::from_parametrization),
            verification: r.verification.as_ref().map(Into::into),
            elapsed_ms,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub version: u32,
    pub seed: u64,
    pub input: SystemDefinitionFile,
    pub methods: Vec<MethodReport>,
    /// Overall verdict across methods.
    pub verdict: String,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(json_error)
    }
}
