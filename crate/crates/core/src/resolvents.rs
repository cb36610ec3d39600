//! Closed-form resolvents `J_{γA} = (Id + γA)⁻¹`, their relaxations
//! `(1−λ)Id + λJ_{γA}`, and the constants they inherit from the modulus of `A`:
//!
//! * `A` α-monotone with `1 + γα > 0` ⇒ `J_{γA}` is `(1+γα)`-cocoercive;
//! * `A` α-comonotone with `γ + α > 0` ⇒ `J_{γA}` is conically
//!   `γ/(2(γ+α))`-averaged.

use nalgebra::{DMatrix, Dyn, LU};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{check_dim, Flavor, OperatorKind, OperatorSpec, PointMap};
use crate::vecspace::Vector;

/// `1 + γα` (monotone) or `γ/(2(γ+α))` (comonotone).
pub fn expected_constant(flavor: Flavor, gamma: f64, alpha: f64) -> Result<f64> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::Parameter(format!("gamma must be > 0, got {gamma}")));
    }
    if !alpha.is_finite() {
        return Err(Error::Parameter("alpha must be finite".into()));
    }
    match flavor {
        Flavor::Monotone => {
            let tau = 1.0 + gamma * alpha;
            if tau > 0.0 {
                Ok(tau)
            } else {
                Err(Error::Regime(format!(
                    "1 + gamma*alpha = {tau} is not positive (gamma={gamma}, alpha={alpha})"
                )))
            }
        }
        Flavor::Comonotone => {
            let s = gamma + alpha;
            if s > 0.0 {
                Ok(gamma / (2.0 * s))
            } else {
                Err(Error::Regime(format!(
                    "gamma + alpha = {s} is not positive (gamma={gamma}, alpha={alpha})"
                )))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum DerivedConstant {
    Cocoercive(f64),
    ConicallyAveraged(f64),
}

#[derive(Debug, Clone)]
enum Evaluator {
    /// `u = (x − γ·shift) / denom`
    Scalar {
        denom: f64,
        gamma_shift: Vector,
    },
    /// `(I + γM)u = x − γ·shift`, factorized once.
    Linear {
        lu: LU<f64, Dyn, Dyn>,
        gamma_shift: Vector,
    },
    Box {
        lower: Vector,
        upper: Vector,
    },
    Ball {
        center: Vector,
        radius: f64,
    },
}

/// A resolvent `J_{γA}` with its derived constants.
#[derive(Debug, Clone)]
pub struct ResolventHandle {
    op: OperatorSpec,
    gamma: f64,
    evaluator: Evaluator,
    constants: Vec<DerivedConstant>,
}

impl ResolventHandle {
    pub fn new(op: OperatorSpec, gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Parameter(format!("gamma must be > 0, got {gamma}")));
        }
        let constants: Vec<DerivedConstant> = [Flavor::Monotone, Flavor::Comonotone]
            .into_iter()
            .filter_map(|f| {
                let alpha = op.modulus(f)?;
                let c = expected_constant(f, gamma, alpha).ok()?;
                Some(match f {
                    Flavor::Monotone => DerivedConstant::Cocoercive(c),
                    Flavor::Comonotone => DerivedConstant::ConicallyAveraged(c),
                })
            })
            .collect();
        if constants.is_empty() {
            return Err(Error::Regime(format!(
                "no modulus of the {} operator satisfies 1 + gamma*alpha > 0 or gamma + alpha > 0 at gamma={gamma}",
                op.name()
            )));
        }
        let evaluator = Self::build_evaluator(&op, gamma)?;
        Ok(Self {
            op,
            gamma,
            evaluator,
            constants,
        })
    }

    fn build_evaluator(op: &OperatorSpec, gamma: f64) -> Result<Evaluator> {
        match op.kind() {
            OperatorKind::ScaledIdentity { scale, shift } => {
                let denom = 1.0 + gamma * scale;
                if denom == 0.0 {
                    return Err(Error::Regime("1 + gamma*c vanishes".into()));
                }
                Ok(Evaluator::Scalar {
                    denom,
                    gamma_shift: shift * gamma,
                })
            }
            OperatorKind::NormalConeBox { lower, upper } => Ok(Evaluator::Box {
                lower: lower.clone(),
                upper: upper.clone(),
            }),
            OperatorKind::NormalConeBall { center, radius } => Ok(Evaluator::Ball {
                center: center.clone(),
                radius: *radius,
            }),
            _ => {
                let (m, shift) = op.linear_part().ok_or_else(|| {
                    Error::Unsupported(format!(
                        "no closed-form resolvent for a {} operator with set-valued terms",
                        op.name()
                    ))
                })?;
                let n = op.dim();
                let lu = (DMatrix::identity(n, n) + m * gamma).lu();
                if !lu.is_invertible() {
                    return Err(Error::Regime("I + gamma*M is singular".into()));
                }
                Ok(Evaluator::Linear {
                    lu,
                    gamma_shift: shift * gamma,
                })
            }
        }
    }

    pub fn op(&self) -> &OperatorSpec {
        &self.op
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn constants(&self) -> &[DerivedConstant] {
        &self.constants
    }

    pub fn cocoercivity(&self) -> Option<f64> {
        self.constants.iter().find_map(|c| match c {
            DerivedConstant::Cocoercive(t) => Some(*t),
            _ => None,
        })
    }

    pub fn averagedness(&self) -> Option<f64> {
        self.constants.iter().find_map(|c| match c {
            DerivedConstant::ConicallyAveraged(t) => Some(*t),
            _ => None,
        })
    }

    /// The unique `u` with `x ∈ u + γA(u)`.
    pub fn resolve(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.op.dim(), x)?;
        match &self.evaluator {
            Evaluator::Scalar { denom, gamma_shift } => Ok((x - gamma_shift) / *denom),
            Evaluator::Linear { lu, gamma_shift } => lu
                .solve(&(x - gamma_shift))
                .ok_or_else(|| Error::Regime("I + gamma*M is singular".into())),
            Evaluator::Box { lower, upper } => {
                Ok(x.zip_zip_map(lower, upper, |v, l, u| v.clamp(l, u)))
            }
            Evaluator::Ball { center, radius } => {
                let d = x - center;
                let n = d.norm();
                if n <= *radius {
                    Ok(x.clone())
                } else {
                    Ok(center + d * (*radius / n))
                }
            }
        }
    }

    /// `(1−λ)x + λ·J(x)`.
    pub fn relaxed_resolve(&self, lambda: f64, x: &Vector) -> Result<Vector> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Parameter(format!(
                "relaxation must be > 0, got {lambda}"
            )));
        }
        let j = self.resolve(x)?;
        Ok(x * (1.0 - lambda) + j * lambda)
    }

    /// `2J − Id`.
    pub fn reflect(&self, x: &Vector) -> Result<Vector> {
        self.relaxed_resolve(2.0, x)
    }

    pub fn relaxed(&self, lambda: f64) -> Result<RelaxedResolvent<'_>> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Parameter(format!(
                "relaxation must be > 0, got {lambda}"
            )));
        }
        Ok(RelaxedResolvent {
            handle: self,
            lambda,
        })
    }
}

impl PointMap for ResolventHandle {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &Vector) -> Result<Vector> {
        self.resolve(x)
    }
}

/// `J^λ = (1−λ)Id + λJ` as a point map.
#[derive(Debug, Clone, Copy)]
pub struct RelaxedResolvent<'a> {
    handle: &'a ResolventHandle,
    lambda: f64,
}

impl PointMap for RelaxedResolvent<'_> {
    fn dim(&self) -> usize {
        self.handle.dim()
    }

    fn apply(&self, x: &Vector) -> Result<Vector> {
        self.handle.relaxed_resolve(self.lambda, x)
    }
}
