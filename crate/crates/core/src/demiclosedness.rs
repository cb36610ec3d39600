//! Premise checkers and conclusion verifiers for multi-operator
//! demiclosedness principles.
//!
//! Given finite windows of sequences `(x_{i,k})` and caller-supplied limits
//! `xᵢ`, `y`, the checkers evaluate one residual series per convergence
//! condition and summarize its trend. In finite dimension weak and strong
//! convergence coincide, so every `⇀` premise is tested as a strong limit.
//!
//! The balance conditions on the constants, the product-space lifting of
//! cocoercive maps and the averaged → firmly nonexpansive transform are
//! exposed as standalone operations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{check_dim, PointMap, Verdict};
use crate::vecspace::{
    project_affine_complement, project_scaled_diagonal, ProductVector, ScaledDiagonal, Vector,
    WeightedSpace,
};

/// Slack allowed on the balance inequalities.
pub const BALANCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub weighted_average: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    /// Signed distance to the boundary of the condition. Gaps within
    /// `BALANCE_TOL` below zero are reported as 0, so the verdict passes iff
    /// `slack ≥ 0`.
    pub slack: f64,
}

fn balance_report(weighted_average: f64, threshold: f64, gap: f64) -> BalanceReport {
    let slack = if (-BALANCE_TOL..0.0).contains(&gap) {
        0.0
    } else {
        gap
    };
    BalanceReport {
        weighted_average,
        threshold,
        verdict: Verdict::from_bool(slack >= 0.0),
        slack,
    }
}

fn positive(values: &[f64], what: &str) -> Result<()> {
    match values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        Some(v) => Err(Error::Parameter(format!(
            "{what} entries must be > 0, got {v}"
        ))),
        None => Ok(()),
    }
}

/// `Σρᵢτᵢ / Σρᵢ ≥ 1`.
pub fn balance_cocoercive(rho: &[f64], tau: &[f64]) -> Result<BalanceReport> {
    if rho.len() != tau.len() || rho.is_empty() {
        return Err(Error::Shape(format!(
            "rho and tau must be nonempty and equally long, got {} and {}",
            rho.len(),
            tau.len()
        )));
    }
    positive(rho, "rho")?;
    positive(tau, "tau")?;
    let num: f64 = rho.iter().zip(tau).map(|(r, t)| r * t).sum();
    let den: f64 = rho.iter().sum();
    let avg = num / den;
    Ok(balance_report(avg, 1.0, avg - 1.0))
}

/// `θ₁ ≤ ρ₂/(ρ₁+ρ₂)` and `θ₂ ≤ ρ₁/(ρ₁+ρ₂)`.
///
/// `weighted_average` is `(ρ₁θ₁+ρ₂θ₂)/(ρ₁+ρ₂)`, which the two bounds keep at
/// or below the reported threshold of 1/2.
pub fn balance_averaged(theta1: f64, theta2: f64, rho1: f64, rho2: f64) -> Result<BalanceReport> {
    positive(&[theta1, theta2], "theta")?;
    positive(&[rho1, rho2], "rho")?;
    let total = rho1 + rho2;
    let gap1 = rho2 / total - theta1;
    let gap2 = rho1 / total - theta2;
    Ok(balance_report(
        (rho1 * theta1 + rho2 * theta2) / total,
        0.5,
        gap1.min(gap2),
    ))
}

/// `z ↦ (τ₁F₁(z₁), …, τₙFₙ(zₙ))` on the flat product space.
///
/// When each `Fᵢ` is `τᵢ`-cocoercive this map is firmly nonexpansive in the
/// metric of [`LiftedMap::space`].
pub struct LiftedMap<'a> {
    maps: Vec<&'a dyn PointMap>,
    tau: Vec<f64>,
    space: WeightedSpace,
}

pub fn lift_to_product<'a>(
    maps: Vec<&'a dyn PointMap>,
    tau: Vec<f64>,
    omega: Vec<f64>,
) -> Result<LiftedMap<'a>> {
    if maps.is_empty() || maps.len() != tau.len() || maps.len() != omega.len() {
        return Err(Error::Shape(format!(
            "{} maps, {} tau entries and {} weights",
            maps.len(),
            tau.len(),
            omega.len()
        )));
    }
    positive(&tau, "tau")?;
    let block_dim = maps[0].dim();
    if maps.iter().any(|m| m.dim() != block_dim) {
        return Err(Error::Shape("lifted maps must share a dimension".into()));
    }
    let space = WeightedSpace::new(omega, block_dim)?;
    Ok(LiftedMap { maps, tau, space })
}

/// Lifting with the weights `ωᵢ = ρᵢ/τᵢ`.
pub fn lift_balanced<'a>(
    maps: Vec<&'a dyn PointMap>,
    rho: &[f64],
    tau: Vec<f64>,
) -> Result<LiftedMap<'a>> {
    positive(rho, "rho")?;
    if rho.len() != tau.len() {
        return Err(Error::Shape("rho and tau lengths differ".into()));
    }
    let omega = rho.iter().zip(&tau).map(|(r, t)| r / t).collect();
    lift_to_product(maps, tau, omega)
}

impl LiftedMap<'_> {
    pub fn space(&self) -> &WeightedSpace {
        &self.space
    }

    pub fn diagonal(&self) -> Result<ScaledDiagonal> {
        ScaledDiagonal::new(self.tau.clone())
    }

    pub fn apply_product(&self, z: &ProductVector) -> Result<ProductVector> {
        let blocks = self
            .maps
            .iter()
            .zip(&self.tau)
            .enumerate()
            .map(|(i, (m, t))| Ok(m.apply(&z.block(i).into_owned())? * *t))
            .collect::<Result<Vec<_>>>()?;
        ProductVector::from_blocks(&blocks)
    }
}

impl PointMap for LiftedMap<'_> {
    fn dim(&self) -> usize {
        self.space.flat_dim()
    }

    fn apply(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x)?;
        let z = ProductVector::from_flat(x.clone(), self.maps.len())?;
        Ok(self.apply_product(&z)?.into_flat())
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta.is_finite() && theta > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("theta must be > 0, got {theta}")))
    }
}

/// `F = Id − (Id − T)/(2θ)`; firmly nonexpansive when `T` is conically
/// θ-averaged.
pub struct AveragedToFne<M> {
    inner: M,
    theta: f64,
}

pub fn averaged_to_fne<M: PointMap>(map: M, theta: f64) -> Result<AveragedToFne<M>> {
    check_theta(theta)?;
    Ok(AveragedToFne { inner: map, theta })
}

impl<M: PointMap> PointMap for AveragedToFne<M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: &Vector) -> Result<Vector> {
        let t = self.inner.apply(x)?;
        Ok(x - (x - t) / (2.0 * self.theta))
    }
}

/// `T = (1 − 2θ)Id + 2θF`, the inverse of [`averaged_to_fne`].
pub struct FneToAveraged<M> {
    inner: M,
    theta: f64,
}

pub fn fne_to_averaged<M: PointMap>(map: M, theta: f64) -> Result<FneToAveraged<M>> {
    check_theta(theta)?;
    Ok(FneToAveraged { inner: map, theta })
}

impl<M: PointMap> PointMap for FneToAveraged<M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: &Vector) -> Result<Vector> {
        let f = self.inner.apply(x)?;
        Ok(x * (1.0 - 2.0 * self.theta) + f * (2.0 * self.theta))
    }
}

/// Finite windows of `n` sequences with optional claimed limits.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceWindow {
    slots: Vec<Vec<Vector>>,
    limits: Option<Vec<Vector>>,
    y: Option<Vector>,
}

impl SequenceWindow {
    pub fn new(slots: Vec<Vec<Vector>>) -> Result<Self> {
        let len = slots.first().map(Vec::len).unwrap_or(0);
        if slots.is_empty() || len == 0 {
            return Err(Error::Usage("sequence window is empty".into()));
        }
        if slots.iter().any(|s| s.len() != len) {
            return Err(Error::Shape(
                "all slots must share the window length".into(),
            ));
        }
        let dim = slots[0][0].len();
        if slots.iter().flatten().any(|x| x.len() != dim) {
            return Err(Error::Shape(
                "all window entries must share a dimension".into(),
            ));
        }
        Ok(Self {
            slots,
            limits: None,
            y: None,
        })
    }

    pub fn with_limits(mut self, limits: Vec<Vector>, y: Vector) -> Result<Self> {
        if limits.len() != self.n_slots() {
            return Err(Error::Shape(format!(
                "{} limits for {} slots",
                limits.len(),
                self.n_slots()
            )));
        }
        if limits
            .iter()
            .chain(std::iter::once(&y))
            .any(|v| v.len() != self.dim())
        {
            return Err(Error::Shape("limit dimension mismatch".into()));
        }
        self.limits = Some(limits);
        self.y = Some(y);
        Ok(self)
    }

    pub fn n_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn len(&self) -> usize {
        self.slots[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.slots[0][0].len()
    }

    pub fn slot(&self, i: usize) -> &[Vector] {
        &self.slots[i]
    }

    pub fn limits(&self) -> Option<(&[Vector], &Vector)> {
        Some((self.limits.as_deref()?, self.y.as_ref()?))
    }

    fn require_limits(&self) -> Result<(&[Vector], &Vector)> {
        self.limits()
            .ok_or_else(|| Error::Usage("claimed limits x_i and y are required".into()))
    }
}

/// A "→ 0" condition passes when its final-quarter mean residual is at most
/// `max(atol, rtol · initial residual)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendTolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for TrendTolerance {
    fn default() -> Self {
        Self {
            atol: 1e-8,
            rtol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSeries {
    pub name: String,
    pub residuals: Vec<f64>,
    pub final_quarter_mean: f64,
    /// Least-squares slope of `ln(residual)` against `k` over the final
    /// quarter; `None` with fewer than two positive residuals there.
    pub log_slope: Option<f64>,
    pub threshold: f64,
    pub verdict: Verdict,
}

impl ConditionSeries {
    pub fn from_residuals(
        name: impl Into<String>,
        residuals: Vec<f64>,
        tol: TrendTolerance,
    ) -> Self {
        let n = residuals.len();
        let start = n - n.div_ceil(4).max(1).min(n);
        let tail = &residuals[start..];
        let mean = tail.iter().sum::<f64>() / tail.len() as f64;
        let threshold = tol
            .atol
            .max(tol.rtol * residuals.first().copied().unwrap_or(0.0));
        Self {
            name: name.into(),
            log_slope: log_slope(start, tail),
            final_quarter_mean: mean,
            threshold,
            verdict: Verdict::from_bool(mean <= threshold),
            residuals,
        }
    }
}

fn log_slope(start: usize, tail: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .enumerate()
        .filter(|(_, r)| **r > 0.0 && r.is_finite())
        .map(|(j, r)| ((start + j) as f64, r.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionDiagnostics {
    pub series: Vec<ConditionSeries>,
    pub balance: Option<BalanceReport>,
    pub verdict: Verdict,
}

impl ConditionDiagnostics {
    fn new(series: Vec<ConditionSeries>, balance: Option<BalanceReport>) -> Self {
        let ok =
            series.iter().all(|s| s.verdict.passed()) && balance.is_none_or(|b| b.verdict.passed());
        Self {
            series,
            balance,
            verdict: Verdict::from_bool(ok),
        }
    }

    pub fn series(&self, name: &str) -> Option<&ConditionSeries> {
        self.series.iter().find(|s| s.name == name)
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }

    /// Names of the failing series (and `balance` if the constants are
    /// unbalanced).
    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .series
            .iter()
            .filter(|s| !s.verdict.passed())
            .map(|s| s.name.clone())
            .collect();
        if self.balance.is_some_and(|b| !b.verdict.passed()) {
            out.push("balance".into());
        }
        out
    }
}

/// Which cocoercive principle the aggregate condition follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CocoerciveMode {
    /// `Σρᵢ(x_{i,k} − τᵢFᵢ(x_{i,k})) → −(Σρᵢτᵢ)y + Σρᵢxᵢ`
    Raw,
    /// `Σρᵢ(x_{i,k} − Fᵢ(x_{i,k})) → −(Σρᵢ)y + Σρᵢxᵢ`, together with
    /// `Σρᵢτᵢ/Σρᵢ ≥ 1`.
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AveragedVariant {
    /// Any number of maps; targets `Tᵢ(x_{i,k}) → 2θᵢy + (1−2θᵢ)xᵢ`.
    General,
    /// Two maps with `θ₁ ≤ ρ₂/(ρ₁+ρ₂)`, `θ₂ ≤ ρ₁/(ρ₁+ρ₂)`.
    TwoBalanced { rho: [f64; 2] },
}

fn check_maps(window: &SequenceWindow, maps: &[&dyn PointMap]) -> Result<()> {
    if maps.len() != window.n_slots() {
        return Err(Error::Shape(format!(
            "{} maps for {} slots",
            maps.len(),
            window.n_slots()
        )));
    }
    if maps.iter().any(|m| m.dim() != window.dim()) {
        return Err(Error::Shape(
            "map dimension does not match the window".into(),
        ));
    }
    Ok(())
}

/// `Fᵢ(x_{i,k})` for every slot and step.
fn images(window: &SequenceWindow, maps: &[&dyn PointMap]) -> Result<Vec<Vec<Vector>>> {
    maps.iter()
        .enumerate()
        .map(|(i, m)| window.slot(i).iter().map(|x| m.apply(x)).collect())
        .collect()
}

fn slot_distance_series(
    window: &SequenceWindow,
    prefix: &str,
    values: &[Vec<Vector>],
    targets: &[Vector],
    tol: TrendTolerance,
) -> Vec<ConditionSeries> {
    (0..window.n_slots())
        .map(|i| {
            let r = values[i].iter().map(|v| (v - &targets[i]).norm()).collect();
            ConditionSeries::from_residuals(format!("{prefix}[{i}]"), r, tol)
        })
        .collect()
}

/// `max_{i<j} ‖gᵢ,k − gⱼ,k‖` per step.
fn pairwise_gap(per_slot: &[Vec<Vector>], k: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..per_slot.len() {
        for j in i + 1..per_slot.len() {
            worst = worst.max((&per_slot[i][k] - &per_slot[j][k]).norm());
        }
    }
    worst
}

/// Residual series for the cocoercive premises: `a[i]` (iterates), `b[i]`
/// (images), `c` (aggregate sum), `d` (pairwise image gaps).
pub fn check_cocoercive_premises(
    window: &SequenceWindow,
    maps: &[&dyn PointMap],
    rho: &[f64],
    tau: &[f64],
    mode: CocoerciveMode,
    tol: TrendTolerance,
) -> Result<ConditionDiagnostics> {
    let (limits, y) = window.require_limits()?;
    check_maps(window, maps)?;
    if rho.len() != window.n_slots() || tau.len() != window.n_slots() {
        return Err(Error::Shape("rho and tau need one entry per slot".into()));
    }
    positive(rho, "rho")?;
    positive(tau, "tau")?;
    let balance = match mode {
        CocoerciveMode::Raw => None,
        CocoerciveMode::Balanced => Some(balance_cocoercive(rho, tau)?),
    };
    let scale: Vec<f64> = match mode {
        CocoerciveMode::Raw => tau.to_vec(),
        CocoerciveMode::Balanced => vec![1.0; tau.len()],
    };
    let fx = images(window, maps)?;

    let mut target = -(y * rho.iter().zip(&scale).map(|(r, s)| r * s).sum::<f64>());
    for (r, x) in rho.iter().zip(limits) {
        target += x * *r;
    }
    let c: Vec<f64> = (0..window.len())
        .map(|k| {
            let mut sum = Vector::zeros(window.dim());
            for i in 0..window.n_slots() {
                sum += (&window.slot(i)[k] - &fx[i][k] * scale[i]) * rho[i];
            }
            (sum - &target).norm()
        })
        .collect();
    let d: Vec<f64> = (0..window.len()).map(|k| pairwise_gap(&fx, k)).collect();

    let ys = vec![y.clone(); window.n_slots()];
    let mut series = slot_distance_series(window, "a", &window.slots, limits, tol);
    series.extend(slot_distance_series(window, "b", &fx, &ys, tol));
    series.push(ConditionSeries::from_residuals("c", c, tol));
    series.push(ConditionSeries::from_residuals("d", d, tol));
    Ok(ConditionDiagnostics::new(series, balance))
}

/// Residual series for the conically averaged premises.
pub fn check_averaged_premises(
    window: &SequenceWindow,
    maps: &[&dyn PointMap],
    theta: &[f64],
    variant: AveragedVariant,
    tol: TrendTolerance,
) -> Result<ConditionDiagnostics> {
    let (limits, y) = window.require_limits()?;
    check_maps(window, maps)?;
    if theta.len() != window.n_slots() {
        return Err(Error::Shape("theta needs one entry per slot".into()));
    }
    positive(theta, "theta")?;
    let n = window.n_slots();
    let tx = images(window, maps)?;
    let a = slot_distance_series(window, "a", &window.slots, limits, tol);

    match variant {
        AveragedVariant::General => {
            let targets: Vec<Vector> = limits
                .iter()
                .zip(theta)
                .map(|(x, t)| y * (2.0 * t) + x * (1.0 - 2.0 * t))
                .collect();
            // qᵢ,k = (x_{i,k} − Tᵢ(x_{i,k})) / (2θᵢ)
            let q: Vec<Vec<Vector>> = (0..n)
                .map(|i| {
                    window
                        .slot(i)
                        .iter()
                        .zip(&tx[i])
                        .map(|(x, t)| (x - t) / (2.0 * theta[i]))
                        .collect()
                })
                .collect();
            let mut target = -(y * n as f64);
            for x in limits {
                target += x;
            }
            let c: Vec<f64> = (0..window.len())
                .map(|k| {
                    let mut sum = Vector::zeros(window.dim());
                    for qi in &q {
                        sum += &qi[k];
                    }
                    (sum - &target).norm()
                })
                .collect();
            let shifted: Vec<Vec<Vector>> = (0..n)
                .map(|i| {
                    window
                        .slot(i)
                        .iter()
                        .zip(&q[i])
                        .map(|(x, qi)| x - qi)
                        .collect()
                })
                .collect();
            let d: Vec<f64> = (0..window.len())
                .map(|k| pairwise_gap(&shifted, k))
                .collect();

            let mut series = a;
            series.extend(slot_distance_series(window, "b", &tx, &targets, tol));
            series.push(ConditionSeries::from_residuals("c", c, tol));
            series.push(ConditionSeries::from_residuals("d", d, tol));
            Ok(ConditionDiagnostics::new(series, None))
        }
        AveragedVariant::TwoBalanced { rho } => {
            if n != 2 {
                return Err(Error::Shape(format!(
                    "the two-map balanced variant needs 2 slots, got {n}"
                )));
            }
            let balance = balance_averaged(theta[0], theta[1], rho[0], rho[1])?;
            let c: Vec<f64> = (0..window.len())
                .map(|k| {
                    let s = (&window.slot(0)[k] - &tx[0][k]) * rho[0]
                        + (&window.slot(1)[k] - &tx[1][k]) * rho[1];
                    s.norm()
                })
                .collect();
            let d: Vec<f64> = (0..window.len()).map(|k| pairwise_gap(&tx, k)).collect();
            let ys = vec![y.clone(); 2];
            let mut series = a;
            series.extend(slot_distance_series(window, "b", &tx, &ys, tol));
            series.push(ConditionSeries::from_residuals("c", c, tol));
            series.push(ConditionSeries::from_residuals("d", d, tol));
            Ok(ConditionDiagnostics::new(series, Some(balance)))
        }
    }
}

/// The single-operator premises in the weighted product space: with
/// `F = (τᵢFᵢ)`, `ω = ρ/τ`, `C` the τ-diagonal, `ȳ = (τᵢy)` and
/// `D = x − ȳ + C⊥`, reports `x_k → x` (`px`), `F(x_k) → ȳ` (`pf`),
/// `F(x_k) − P_C F(x_k)` (`pc`) and
/// `(x_k − F(x_k)) − P_D(x_k − F(x_k))` (`pd`), all in the ω-norm.
pub fn check_product_premises(
    window: &SequenceWindow,
    maps: &[&dyn PointMap],
    rho: &[f64],
    tau: &[f64],
    tol: TrendTolerance,
) -> Result<ConditionDiagnostics> {
    let (limits, y) = window.require_limits()?;
    check_maps(window, maps)?;
    let lifted = lift_balanced(maps.to_vec(), rho, tau.to_vec())?;
    let space = lifted.space().clone();
    let diag = lifted.diagonal()?;
    let n = window.n_slots();

    let x_lim = ProductVector::from_blocks(limits)?;
    let y_bar = ProductVector::diagonal(y, tau)?;
    let anchor = ProductVector::from_flat(x_lim.as_flat() - y_bar.as_flat(), n)?;

    let (mut px, mut pf, mut pc, mut pd) = (vec![], vec![], vec![], vec![]);
    for k in 0..window.len() {
        let blocks: Vec<Vector> = (0..n).map(|i| window.slot(i)[k].clone()).collect();
        let xk = ProductVector::from_blocks(&blocks)?;
        let fk = lifted.apply_product(&xk)?;
        let rk = ProductVector::from_flat(xk.as_flat() - fk.as_flat(), n)?;
        let on_c = project_scaled_diagonal(&fk, &diag, &space)?;
        let on_d = project_affine_complement(&rk, &anchor, &diag, &space)?;
        let w = |a: &Vector, b: &Vector| {
            ProductVector::from_flat(a - b, n).and_then(|d| space.norm_w(&d))
        };
        px.push(w(xk.as_flat(), x_lim.as_flat())?);
        pf.push(w(fk.as_flat(), y_bar.as_flat())?);
        pc.push(w(fk.as_flat(), on_c.as_flat())?);
        pd.push(w(rk.as_flat(), on_d.as_flat())?);
    }
    let series = vec![
        ConditionSeries::from_residuals("px", px, tol),
        ConditionSeries::from_residuals("pf", pf, tol),
        ConditionSeries::from_residuals("pc", pc, tol),
        ConditionSeries::from_residuals("pd", pd, tol),
    ];
    Ok(ConditionDiagnostics::new(
        series,
        Some(balance_cocoercive(rho, tau)?),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConclusionReport {
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub verdict: Verdict,
}

fn conclusion(residuals: Vec<f64>, tol: f64) -> ConclusionReport {
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    ConclusionReport {
        verdict: Verdict::from_bool(max_residual <= tol),
        residuals,
        max_residual,
    }
}

/// Checks `Fᵢ(xᵢ) = y` for every slot.
pub fn verify_conclusion(
    maps: &[&dyn PointMap],
    xs: &[Vector],
    y: &Vector,
    tol: f64,
) -> Result<ConclusionReport> {
    if maps.len() != xs.len() {
        return Err(Error::Shape(format!(
            "{} maps for {} points",
            maps.len(),
            xs.len()
        )));
    }
    let r = maps
        .iter()
        .zip(xs)
        .map(|(m, x)| Ok((m.apply(x)? - y).norm()))
        .collect::<Result<Vec<_>>>()?;
    Ok(conclusion(r, tol))
}

/// Checks `Tᵢ(xᵢ) = 2θᵢy + (1−2θᵢ)xᵢ` for every slot.
pub fn verify_averaged_conclusion(
    maps: &[&dyn PointMap],
    xs: &[Vector],
    y: &Vector,
    theta: &[f64],
    tol: f64,
) -> Result<ConclusionReport> {
    if maps.len() != xs.len() || maps.len() != theta.len() {
        return Err(Error::Shape("maps, points and theta must align".into()));
    }
    positive(theta, "theta")?;
    let r = maps
        .iter()
        .zip(xs)
        .zip(theta)
        .map(|((m, x), t)| {
            let target = y * (2.0 * t) + x * (1.0 - 2.0 * t);
            Ok((m.apply(x)? - target).norm())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(conclusion(r, tol))
}
