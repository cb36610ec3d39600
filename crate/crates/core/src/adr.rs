//! The adaptive Douglas–Rachford operator
//! `T = (1−κ)Id + κR₂R₁` with `R₁ = J^λ_{γA}`, `R₂ = J^μ_{δB}`, its
//! parameter regimes, and an iteration engine that tracks the shadow
//! sequence `J₁(x_k)`.

use serde::{Deserialize, Serialize};

use crate::demiclosedness::SequenceWindow;
use crate::error::{Error, Result};
use crate::operators::{check_dim, Flavor, OperatorKind, OperatorSpec, PointMap};
use crate::resolvents::ResolventHandle;
use crate::vecspace::Vector;

/// The operators' moduli are read as monotone or comonotone moduli.
pub type Regime = Flavor;

/// Tolerance below which `|α+β|` counts as zero.
pub const ZERO_SUM_TOL: f64 = 1e-12;
/// Relative tolerance for equality conditions and slack for non-strict
/// inequalities.
pub const EQUALITY_TOL: f64 = 1e-12;
/// Iterates with a larger norm abort the run.
pub const DIVERGENCE_NORM: f64 = 1e12;

/// `(λ, μ) = (1 + δ/γ, 1 + γ/δ)`.
pub fn derive_relaxations(gamma: f64, delta: f64) -> Result<(f64, f64)> {
    for (name, v) in [("gamma", gamma), ("delta", delta)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Parameter(format!("{name} must be > 0, got {v}")));
        }
    }
    Ok((1.0 + delta / gamma, 1.0 + gamma / delta))
}

/// Step sizes and moduli, without the relaxation κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub gamma: f64,
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub regime: Regime,
    /// Also require `(γ+δ) ≤ min{2(γ+α), 2(δ+β)}` in the comonotone regime.
    #[serde(default)]
    pub shadow_mode: bool,
}

impl ProblemParams {
    pub fn new(gamma: f64, delta: f64, alpha: f64, beta: f64, regime: Regime) -> Self {
        Self {
            gamma,
            delta,
            alpha,
            beta,
            regime,
            shadow_mode: false,
        }
    }

    pub fn with_shadow_mode(mut self, on: bool) -> Self {
        self.shadow_mode = on;
        self
    }

    fn zero_sum(&self) -> bool {
        (self.alpha + self.beta).abs() <= ZERO_SUM_TOL
    }

    /// `ρ = (λ−1, 1)`.
    pub fn shadow_rho(&self) -> Result<[f64; 2]> {
        let (lambda, _) = derive_relaxations(self.gamma, self.delta)?;
        Ok([lambda - 1.0, 1.0])
    }

    /// `τ = (1+γα, 1+δβ)`, the resolvents' cocoercivity constants.
    pub fn cocoercive_taus(&self) -> [f64; 2] {
        [1.0 + self.gamma * self.alpha, 1.0 + self.delta * self.beta]
    }

    /// `θ = (γ/(2(γ+α)), δ/(2(δ+β)))`, the resolvents' averagedness
    /// constants.
    pub fn averaged_thetas(&self) -> [f64; 2] {
        [
            self.gamma / (2.0 * (self.gamma + self.alpha)),
            self.delta / (2.0 * (self.delta + self.beta)),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Equal,
    Less,
    LessOrEqual,
}

/// One displayed condition `lhs (=|<|≤) rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: String,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    /// `rhs − lhs` for inequalities, `−|lhs − rhs|` for equalities.
    pub slack: f64,
    pub pass: bool,
}

impl ConditionCheck {
    fn new(name: &str, lhs: f64, relation: Relation, rhs: f64) -> Self {
        let (slack, pass) = match relation {
            Relation::Equal => {
                let gap = (lhs - rhs).abs();
                (-gap, gap <= EQUALITY_TOL * (1.0 + rhs.abs()))
            }
            Relation::Less => (rhs - lhs, lhs < rhs),
            Relation::LessOrEqual => (rhs - lhs, lhs <= rhs + EQUALITY_TOL),
        };
        Self {
            name: name.to_string(),
            lhs,
            relation,
            rhs,
            slack,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub regime: Regime,
    pub conditions: Vec<ConditionCheck>,
    /// Present when every regime condition holds.
    pub kappa_bar: Option<f64>,
    pub pass: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> Vec<String> {
        self.conditions
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.clone())
            .collect()
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionCheck> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

fn regime_conditions(p: &ProblemParams) -> Vec<ConditionCheck> {
    use Relation::*;
    let (g, d, a, b) = (p.gamma, p.delta, p.alpha, p.beta);
    let mut out = vec![
        ConditionCheck::new("0 < gamma", 0.0, Less, g),
        ConditionCheck::new("0 < delta", 0.0, Less, d),
        ConditionCheck::new("0 <= alpha + beta", 0.0, LessOrEqual, a + b),
    ];
    let zero_sum = p.zero_sum();
    match p.regime {
        Flavor::Monotone => {
            out.push(ConditionCheck::new(
                "0 < 1 + gamma*alpha",
                0.0,
                Less,
                1.0 + g * a,
            ));
            out.push(ConditionCheck::new(
                "0 < 1 + delta*beta",
                0.0,
                Less,
                1.0 + d * b,
            ));
            if zero_sum {
                out.push(ConditionCheck::new(
                    "delta*(1 + 2*gamma*alpha) = gamma",
                    d * (1.0 + 2.0 * g * a),
                    Equal,
                    g,
                ));
            } else {
                out.push(ConditionCheck::new(
                    "(gamma + delta)^2 < 4*gamma*delta*(1 + gamma*alpha)*(1 + delta*beta)",
                    (g + d).powi(2),
                    Less,
                    4.0 * g * d * (1.0 + g * a) * (1.0 + d * b),
                ));
            }
        }
        Flavor::Comonotone => {
            out.push(ConditionCheck::new("0 < gamma + alpha", 0.0, Less, g + a));
            out.push(ConditionCheck::new("0 < delta + beta", 0.0, Less, d + b));
            if zero_sum {
                out.push(ConditionCheck::new(
                    "delta = gamma + 2*alpha",
                    d,
                    Equal,
                    g + 2.0 * a,
                ));
            } else {
                out.push(ConditionCheck::new(
                    "(gamma + delta)^2 < 4*(gamma + alpha)*(delta + beta)",
                    (g + d).powi(2),
                    Less,
                    4.0 * (g + a) * (d + b),
                ));
            }
            if p.shadow_mode {
                out.push(ConditionCheck::new(
                    "gamma + delta <= min{2*(gamma + alpha), 2*(delta + beta)}",
                    g + d,
                    LessOrEqual,
                    (2.0 * (g + a)).min(2.0 * (d + b)),
                ));
            }
        }
    }
    out
}

fn kappa_bar_unchecked(p: &ProblemParams) -> f64 {
    let (g, d, a, b) = (p.gamma, p.delta, p.alpha, p.beta);
    if p.zero_sum() {
        return 1.0;
    }
    match p.regime {
        Flavor::Monotone => {
            (4.0 * g * d * (1.0 + g * a) * (1.0 + d * b) - (g + d).powi(2))
                / (2.0 * g * d * (g + d) * (a + b))
        }
        Flavor::Comonotone => {
            (4.0 * (g + a) * (d + b) - (g + d).powi(2)) / (2.0 * (g + d) * (a + b))
        }
    }
}

/// Upper bound `κ̄` on the relaxation for the declared regime.
pub fn kappa_bound(p: &ProblemParams) -> Result<f64> {
    let failed: Vec<String> = regime_conditions(p)
        .into_iter()
        .filter(|c| !c.pass)
        .map(|c| c.name)
        .collect();
    if !failed.is_empty() {
        return Err(Error::Validation(failed));
    }
    Ok(kappa_bar_unchecked(p))
}

/// Evaluates every regime condition, plus `0 < κ < κ̄` when `kappa` is given.
pub fn validate(p: &ProblemParams, kappa: Option<f64>) -> ValidationReport {
    let mut conditions = regime_conditions(p);
    let regime_ok = conditions.iter().all(|c| c.pass);
    let kappa_bar = regime_ok.then(|| kappa_bar_unchecked(p));
    if let (Some(k), Some(bar)) = (kappa, kappa_bar) {
        conditions.push(ConditionCheck::new("0 < kappa", 0.0, Relation::Less, k));
        conditions.push(ConditionCheck::new(
            "kappa < kappa_bar",
            k,
            Relation::Less,
            bar,
        ));
    }
    ValidationReport {
        regime: p.regime,
        pass: conditions.iter().all(|c| c.pass),
        conditions,
        kappa_bar,
    }
}

/// Validated parameters with the derived `λ`, `μ` and `κ̄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdrParams {
    pub problem: ProblemParams,
    pub kappa: f64,
    pub lambda: f64,
    pub mu: f64,
    pub kappa_bar: f64,
}

impl AdrParams {
    /// Validates `problem` and `κ`; without `κ` the midpoint `κ̄/2` is used.
    pub fn new(problem: ProblemParams, kappa: Option<f64>) -> Result<Self> {
        let (lambda, mu) = derive_relaxations(problem.gamma, problem.delta)?;
        let kappa_bar = kappa_bound(&problem)?;
        let kappa = kappa.unwrap_or(kappa_bar / 2.0);
        let report = validate(&problem, Some(kappa));
        if !report.pass {
            return Err(Error::Validation(report.failures()));
        }
        Ok(Self {
            problem,
            kappa,
            lambda,
            mu,
            kappa_bar,
        })
    }

    /// Parameters for a plain step without regime validation.
    pub fn unchecked(gamma: f64, delta: f64, kappa: f64) -> Result<Self> {
        let (lambda, mu) = derive_relaxations(gamma, delta)?;
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::Parameter(format!("kappa must be > 0, got {kappa}")));
        }
        Ok(Self {
            problem: ProblemParams::new(gamma, delta, 0.0, 0.0, Flavor::Monotone),
            kappa,
            lambda,
            mu,
            kappa_bar: f64::NAN,
        })
    }
}

/// Intermediate values of one application of `T`.
#[derive(Debug, Clone)]
struct StepParts {
    j1: Vector,
    j2: Vector,
    next: Vector,
}

#[derive(Debug, Clone)]
pub struct AdrOperator {
    params: AdrParams,
    j1: ResolventHandle,
    j2: ResolventHandle,
}

impl AdrOperator {
    /// Builds `J_{γA}` and `J_{δB}`. The operators must carry claims that
    /// imply the declared moduli.
    pub fn new(params: AdrParams, a: OperatorSpec, b: OperatorSpec) -> Result<Self> {
        let p = &params.problem;
        let mut missing = vec![];
        if !a.supports(p.regime, p.alpha) {
            missing.push(format!("A is not {}-{}", p.alpha, p.regime));
        }
        if !b.supports(p.regime, p.beta) {
            missing.push(format!("B is not {}-{}", p.beta, p.regime));
        }
        if !missing.is_empty() {
            return Err(Error::Validation(missing));
        }
        if a.dim() != b.dim() {
            return Err(Error::Shape(format!(
                "A has dim {}, B has dim {}",
                a.dim(),
                b.dim()
            )));
        }
        let j1 = ResolventHandle::new(a, p.gamma)?;
        let j2 = ResolventHandle::new(b, p.delta)?;
        Self::from_handles(params, j1, j2)
    }

    pub fn from_handles(
        params: AdrParams,
        j1: ResolventHandle,
        j2: ResolventHandle,
    ) -> Result<Self> {
        if j1.gamma() != params.problem.gamma || j2.gamma() != params.problem.delta {
            return Err(Error::Parameter(format!(
                "handle step sizes ({}, {}) do not match (gamma, delta) = ({}, {})",
                j1.gamma(),
                j2.gamma(),
                params.problem.gamma,
                params.problem.delta
            )));
        }
        if j1.op().dim() != j2.op().dim() {
            return Err(Error::Shape("resolvent dimensions differ".into()));
        }
        Ok(Self { params, j1, j2 })
    }

    pub fn params(&self) -> &AdrParams {
        &self.params
    }

    pub fn j1(&self) -> &ResolventHandle {
        &self.j1
    }

    pub fn j2(&self) -> &ResolventHandle {
        &self.j2
    }

    pub fn a(&self) -> &OperatorSpec {
        self.j1.op()
    }

    pub fn b(&self) -> &OperatorSpec {
        self.j2.op()
    }

    fn parts(&self, x: &Vector) -> Result<StepParts> {
        let AdrParams {
            kappa, lambda, mu, ..
        } = self.params;
        let j1 = self.j1.resolve(x)?;
        let r1 = x * (1.0 - lambda) + &j1 * lambda;
        let j2 = self.j2.resolve(&r1)?;
        let r2 = &r1 * (1.0 - mu) + &j2 * mu;
        let next = x * (1.0 - kappa) + r2 * kappa;
        Ok(StepParts { j1, j2, next })
    }

    /// `T(x) = (1−κ)x + κR₂(R₁(x))`.
    pub fn step(&self, x: &Vector) -> Result<Vector> {
        Ok(self.parts(x)?.next)
    }

    /// `J₁(x)`.
    pub fn shadow(&self, x: &Vector) -> Result<Vector> {
        self.j1.resolve(x)
    }

    /// `R₁(x)`.
    pub fn reflect_first(&self, x: &Vector) -> Result<Vector> {
        self.j1.relaxed_resolve(self.params.lambda, x)
    }

    /// The window `(x_k, R₁x_k)` with limits `(x*, R₁x*)` and `y = J₁x*`,
    /// the sequence pair along which the shadow sequence is analysed.
    pub fn shadow_window(&self, iterates: &[Vector], x_star: &Vector) -> Result<SequenceWindow> {
        let z = iterates
            .iter()
            .map(|x| self.reflect_first(x))
            .collect::<Result<Vec<_>>>()?;
        SequenceWindow::new(vec![iterates.to_vec(), z])?.with_limits(
            vec![x_star.clone(), self.reflect_first(x_star)?],
            self.shadow(x_star)?,
        )
    }

    /// Iterates `x_{k+1} = T(x_k)` from `x0`.
    pub fn run(&self, x0: &Vector, stop: StopRule) -> Result<IterationTrace> {
        check_dim(self.j1.op().dim(), x0)?;
        let kappa_mu = self.params.kappa * self.params.mu;
        let mut records = Vec::new();
        let mut x = x0.clone();
        let mut k = 0;
        let status = loop {
            let StepParts { j1, j2, next } = self.parts(&x)?;
            let displacement = &x - &next;
            let gap = &j1 - &j2;
            let step_residual = displacement.norm();
            let shadow_inclusion_residual = inclusion_residual(self.a(), self.b(), &j1).ok();
            let keep = x.len() <= stop.dim_cap;
            records.push(IterationRecord {
                k,
                x: keep.then(|| x.clone()),
                shadow: keep.then(|| j1.clone()),
                x_norm: x.norm(),
                step_residual,
                split_gap: gap.norm(),
                identity_residual: (displacement - gap * kappa_mu).norm(),
                shadow_inclusion_residual,
            });
            if !step_residual.is_finite() {
                break RunStatus::Diverged;
            }
            if step_residual <= stop.step_tol {
                break RunStatus::Converged;
            }
            if k >= stop.max_iters {
                break RunStatus::MaxIters;
            }
            if next.norm() > DIVERGENCE_NORM {
                x = next;
                break RunStatus::Diverged;
            }
            x = next;
            k += 1;
        };
        let final_shadow = self.shadow(&x).unwrap_or_else(|_| x.clone());
        Ok(IterationTrace {
            records,
            status,
            final_x: x,
            final_shadow,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_iters: usize,
    /// Stop once `‖x_k − x_{k+1}‖ ≤ step_tol`.
    pub step_tol: f64,
    /// Iterates and shadows are stored only up to this dimension.
    pub dim_cap: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            max_iters: 100_000,
            step_tol: 1e-10,
            dim_cap: 16,
        }
    }
}

impl StopRule {
    pub fn new(max_iters: usize, step_tol: f64) -> Self {
        Self {
            max_iters,
            step_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    MaxIters,
    Diverged,
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunStatus::Converged => "converged",
            RunStatus::MaxIters => "max_iters",
            RunStatus::Diverged => "diverged",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub x: Option<Vector>,
    pub shadow: Option<Vector>,
    pub x_norm: f64,
    /// `‖x_k − x_{k+1}‖`
    pub step_residual: f64,
    /// `‖J₁(x_k) − J₂(R₁(x_k))‖`
    pub split_gap: f64,
    /// `‖(x_k − T(x_k)) − κμ(J₁(x_k) − J₂(R₁(x_k)))‖`
    pub identity_residual: f64,
    /// [`inclusion_residual`] at the shadow, when the operator pair supports
    /// it.
    pub shadow_inclusion_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub status: RunStatus,
    /// The last iterate `x_K`.
    pub final_x: Vector,
    pub final_shadow: Vector,
}

impl IterationTrace {
    /// Index of the last record.
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.k)
    }

    pub fn last(&self) -> &IterationRecord {
        self.records
            .last()
            .expect("a trace has at least one record")
    }

    /// All stored iterates, or `None` when the dimension exceeded the cap.
    pub fn iterates(&self) -> Option<Vec<Vector>> {
        self.records.iter().map(|r| r.x.clone()).collect()
    }

    pub fn shadows(&self) -> Option<Vec<Vector>> {
        self.records.iter().map(|r| r.shadow.clone()).collect()
    }
}

fn box_cone_distance(w: &Vector, p: &Vector, lower: &Vector, upper: &Vector) -> f64 {
    (0..w.len())
        .map(|i| {
            let at_lo = p[i] <= lower[i];
            let at_hi = p[i] >= upper[i];
            match (at_lo, at_hi) {
                (true, true) => 0.0,
                (true, false) => w[i].max(0.0),
                (false, true) => (-w[i]).max(0.0),
                (false, false) => w[i].abs(),
            }
        })
        .map(|d| d * d)
        .sum::<f64>()
        .sqrt()
}

fn ball_cone_distance(w: &Vector, p: &Vector, center: &Vector, radius: f64) -> f64 {
    let n = p - center;
    let r = n.norm();
    if r < radius * (1.0 - EQUALITY_TOL) {
        return w.norm();
    }
    let dir = n / r;
    let t = w.dot(&dir);
    if t <= 0.0 {
        w.norm()
    } else {
        (w - dir * t).norm()
    }
}

/// `dist(x, C) + dist(w, N_C(P_C x))` for the normal cone kinds.
fn cone_residual(cone: &OperatorSpec, x: &Vector, w: &Vector) -> Result<f64> {
    match cone.kind() {
        OperatorKind::NormalConeBox { lower, upper } => {
            let p = x.zip_zip_map(lower, upper, |v, l, u| v.clamp(l, u));
            Ok((x - &p).norm() + box_cone_distance(w, &p, lower, upper))
        }
        OperatorKind::NormalConeBall { center, radius } => {
            let d = x - center;
            let p = if d.norm() <= *radius {
                x.clone()
            } else {
                center + d * (*radius / (x - center).norm())
            };
            Ok((x - &p).norm() + ball_cone_distance(w, &p, center, *radius))
        }
        _ => Err(Error::Unsupported(format!(
            "{} is not a normal cone",
            cone.name()
        ))),
    }
}

/// How far `x` is from solving `0 ∈ Ax + Bx`.
///
/// Both single-valued: `‖A(x) + B(x)‖`. One normal cone `N_C` and one
/// single-valued `F`: `dist(x, C) + dist(−F(x), N_C(P_C x))`.
pub fn inclusion_residual(a: &OperatorSpec, b: &OperatorSpec, x: &Vector) -> Result<f64> {
    check_dim(a.dim(), x)?;
    check_dim(b.dim(), x)?;
    match (a.is_single_valued(), b.is_single_valued()) {
        (true, true) => Ok((a.eval(x)? + b.eval(x)?).norm()),
        (true, false) => cone_residual(b, x, &-a.eval(x)?),
        (false, true) => cone_residual(a, x, &-b.eval(x)?),
        (false, false) => Err(Error::Unsupported(format!(
            "inclusion residual for {} + {}",
            a.name(),
            b.name()
        ))),
    }
}

impl PointMap for AdrOperator {
    fn dim(&self) -> usize {
        self.j1.op().dim()
    }

    fn apply(&self, x: &Vector) -> Result<Vector> {
        self.step(x)
    }
}
