//! Run configuration: a TOML document with one section per concern.

use std::path::{Path, PathBuf};

use evalexpr::{
    build_operator_tree, ContextWithMutableFunctions, ContextWithMutableVariables,
    DefaultNumericTypes, Function, HashMapContext, Node, Value,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn cfg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

/// A number given literally or as an arithmetic expression such as `"2*pi"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Value(f64),
    Expr(String),
}

impl Number {
    pub fn eval(&self) -> Result<f64> {
        match self {
            Number::Value(v) => Ok(*v),
            Number::Expr(s) => Expression::parse(s)?.eval(&[]),
        }
    }
}

impl From<f64> for Number {
    fn from(v: f64) -> Self {
        Number::Value(v)
    }
}

impl From<&str> for Number {
    fn from(s: &str) -> Self {
        Number::Expr(s.to_owned())
    }
}

/// A compiled scalar expression with `pi`, `e` and the usual elementary functions.
pub struct Expression {
    source: String,
    tree: Node<DefaultNumericTypes>,
    context: HashMapContext<DefaultNumericTypes>,
}

impl std::fmt::Debug for Expression {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("Expression").field(&self.source).finish()
    }
}

macro_rules! unary {
    ($ctx:expr, $($name:ident),*) => {
        $(
            $ctx.set_function(
                stringify!($name).into(),
                Function::new(|a: &Value<DefaultNumericTypes>| {
                    let x: f64 = a.as_number()?;
                    Ok(Value::from_float(x.$name()))
                }),
            )
            .expect("hash map context accepts functions");
        )*
    };
}

impl Expression {
    pub fn parse(source: &str) -> Result<Self> {
        let tree = build_operator_tree::<DefaultNumericTypes>(source)
            .map_err(|e| Error::Config(format!("cannot parse expression {source:?}: {e}")))?;
        let mut context = HashMapContext::<DefaultNumericTypes>::new();
        unary!(context, sin, cos, tan, sinh, cosh, tanh, exp, ln, sqrt, abs);
        context
            .set_value("pi".into(), Value::from_float(std::f64::consts::PI))
            .expect("hash map context accepts values");
        context
            .set_value("e".into(), Value::from_float(std::f64::consts::E))
            .expect("hash map context accepts values");
        Ok(Self {
            source: source.to_owned(),
            tree,
            context,
        })
    }

    /// Evaluate with extra variable bindings.
    pub fn eval(&self, vars: &[(&str, f64)]) -> Result<f64> {
        let mut ctx = self.context.clone();
        for (name, value) in vars {
            ctx.set_value((*name).into(), Value::from_float(*value))
                .expect("hash map context accepts values");
        }
        self.tree
            .eval_number_with_context(&ctx)
            .map_err(|e| Error::Config(format!("cannot evaluate {:?}: {e}", self.source)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub lx: Number,
    pub ly: Number,
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            lx: "pi".into(),
            ly: "pi".into(),
            nx: 64,
            ny: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// `φ = ψ₀ = sin(πx/Lx) sin(πy/Ly)`, `ψ₁ = 0`.
    Standard,
    Zero,
    /// Standard data with the coupling switched off.
    Linear,
    /// Seeded random data with decaying spectrum.
    Random,
    /// Data from `u`/`v`/`vt` mode lists and `*_expr` expressions.
    Custom,
}

/// One term `(re + i·im) sin(kπx/Lx) sin(lπy/Ly)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: usize,
    pub l: usize,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub preset: Preset,
    /// Multiplies `φ` after the preset is built.
    pub phi_scale: Number,
    /// Apply `J_n` to the data of regularized runs.
    pub regularize: bool,
    pub u: Vec<ModeSpec>,
    pub v: Vec<ModeSpec>,
    pub vt: Vec<ModeSpec>,
    pub u_expr: Option<String>,
    pub u_expr_im: Option<String>,
    pub v_expr: Option<String>,
    pub vt_expr: Option<String>,
    /// Highest index `k, l` excited by the random preset.
    pub random_modes: usize,
    pub random_amplitude: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            preset: Preset::Standard,
            phi_scale: 1.0.into(),
            regularize: true,
            u: Vec::new(),
            v: Vec::new(),
            vt: Vec::new(),
            u_expr: None,
            u_expr_im: None,
            v_expr: None,
            vt_expr: None,
            random_modes: 6,
            random_amplitude: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub eps: Number,
    pub yosida_n: Option<u64>,
    pub dt: Number,
    pub dealias: bool,
    pub coupled: bool,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            eps: 1.0.into(),
            yosida_n: None,
            dt: 1e-3.into(),
            dealias: true,
            coupled: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub t_final: Number,
    pub monitor_stride: usize,
    pub output: PathBuf,
    pub seed: u64,
    /// Overrides the estimated Gagliardo–Nirenberg constant.
    pub c0: Option<Number>,
    /// Write a checkpoint every this many monitor samples; 0 disables.
    pub checkpoint_every: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            t_final: 1.0.into(),
            monitor_stride: 10,
            output: PathBuf::from("out"),
            seed: 0,
            c0: None,
            checkpoint_every: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub eps_list: Vec<f64>,
    pub n_list: Vec<u64>,
    pub dt_list: Vec<f64>,
    /// Run sweep members concurrently.
    pub parallel: bool,
    /// The order test reference uses `dt_min / reference_factor`.
    pub reference_factor: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            eps_list: vec![0.1, 0.05, 0.025, 0.0125],
            n_list: vec![8, 16, 32, 64],
            dt_list: vec![1e-2, 5e-3, 2.5e-3],
            parallel: true,
            reference_factor: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub lx: Number,
    pub ly: Number,
    pub nx: usize,
    pub ny: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            lx: "2*pi".into(),
            ly: "2*pi".into(),
            nx: 256,
            ny: 256,
            max_iter: 500,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    /// Yosida indices `1, 2, 4, …, 2^max_log2_n`.
    pub max_log2_n: u32,
    pub times: Vec<f64>,
    pub eps_list: Vec<f64>,
    pub random_fields: usize,
    /// Test hook: corrupt the Yosida symbol so the suite must fail.
    pub inject_fault: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            max_log2_n: 10,
            times: vec![0.0, 0.1, 1.0, 10.0, 100.0],
            eps_list: vec![0.0, 0.5, 1.0],
            random_fields: 100,
            inject_fault: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssertConfig {
    /// Maximum relative deviation of the charge from its initial value.
    pub charge_rel_tol: f64,
    /// Check the envelope bounds that apply to the run.
    pub envelope: bool,
    /// Maximum relative energy drift, unchecked when absent.
    pub energy_rel_drift: Option<f64>,
    /// Admissible range of every observed order in the order test.
    pub min_order: f64,
    pub max_order: f64,
    /// Bound on the distance between the largest-`n` run and the reference.
    pub n_reference_tol: Option<f64>,
}

impl Default for AssertConfig {
    fn default() -> Self {
        Self {
            charge_rel_tol: 1e-10,
            envelope: true,
            energy_rel_drift: None,
            min_order: 1.9,
            max_order: 2.1,
            n_reference_tol: None,
        }
    }
}

/// Complete description of a run, echoed verbatim into its manifest.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub data: DataConfig,
    pub system: SystemConfig,
    pub run: RunSection,
    pub sweep: SweepConfig,
    pub estimator: EstimatorConfig,
    pub check: CheckConfig,
    #[serde(rename = "assert")]
    pub assertions: AssertConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    /// Numeric values after evaluating expressions, with range checks.
    pub fn resolve(&self) -> Result<Resolved> {
        let lx = self.grid.lx.eval()?;
        let ly = self.grid.ly.eval()?;
        let eps = self.system.eps.eval()?;
        let dt = self.system.dt.eval()?;
        let t_final = self.run.t_final.eval()?;
        let phi_scale = self.data.phi_scale.eval()?;
        let c0 = self.run.c0.as_ref().map(Number::eval).transpose()?;
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return cfg(format!("domain lengths must be positive, got {lx} × {ly}"));
        }
        if self.grid.nx == 0 || self.grid.ny == 0 {
            return cfg("grid needs at least one mode per axis");
        }
        if !(0.0..=1.0).contains(&eps) {
            return cfg(format!("system.eps must lie in [0, 1], got {eps}"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return cfg(format!("system.dt must be positive, got {dt}"));
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return cfg(format!("run.t_final must be positive, got {t_final}"));
        }
        if self.run.monitor_stride == 0 {
            return cfg("run.monitor_stride must be at least 1");
        }
        if self.system.yosida_n == Some(0) {
            return cfg("system.yosida_n must be at least 1");
        }
        if !phi_scale.is_finite() {
            return cfg("data.phi_scale must be finite");
        }
        if let Some(c) = c0 {
            if !(c > 0.0 && c.is_finite()) {
                return cfg(format!("run.c0 must be positive, got {c}"));
            }
        }
        let custom = !(self.data.u.is_empty() && self.data.v.is_empty() && self.data.vt.is_empty())
            || self.data.u_expr.is_some()
            || self.data.u_expr_im.is_some()
            || self.data.v_expr.is_some()
            || self.data.vt_expr.is_some();
        if custom && self.data.preset != Preset::Custom {
            return cfg("mode lists and expressions require data.preset = \"custom\"");
        }
        for m in self.data.u.iter().chain(&self.data.v).chain(&self.data.vt) {
            if m.k == 0 || m.l == 0 || m.k > self.grid.nx || m.l > self.grid.ny {
                return cfg(format!("mode ({}, {}) outside the grid", m.k, m.l));
            }
        }
        if self.data.v.iter().chain(&self.data.vt).any(|m| m.im != 0.0) {
            return cfg("ion-sound data v, vt must be real");
        }
        let est = &self.estimator;
        let (elx, ely) = (est.lx.eval()?, est.ly.eval()?);
        if !(elx > 0.0 && ely > 0.0) || est.nx == 0 || est.ny == 0 || est.max_iter == 0 {
            return cfg("estimator grid and iteration count must be positive");
        }
        Ok(Resolved {
            lx,
            ly,
            eps,
            dt,
            t_final,
            phi_scale,
            c0,
            estimator_lx: elx,
            estimator_ly: ely,
        })
    }
}

/// Evaluated numeric fields of a [`RunConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved {
    pub lx: f64,
    pub ly: f64,
    pub eps: f64,
    pub dt: f64,
    pub t_final: f64,
    pub phi_scale: f64,
    pub c0: Option<f64>,
    pub estimator_lx: f64,
    pub estimator_ly: f64,
}
