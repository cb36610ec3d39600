//! Set-valued operators with certified monotonicity/comonotonicity moduli.
//!
//! The zoo covers the operators whose resolvents have closed forms: affine
//! maps (with the scaled identity and planar rotations as special cases) and
//! normal cones of boxes and balls. Every member carries analytically derived
//! modulus claims; [`certify`] provides sampling-based falsifiers to check them.

pub mod certify;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vecspace::{ensure_finite, Vector};

pub use certify::{
    certify, certify_cocoercive, certify_comonotone, certify_conically_averaged, certify_monotone,
    pair_margins, sample_pairs, Certificate, Property, SamplingConfig, Verdict, CERTIFY_TOL,
};

/// A single-valued map on `ℝᵈ`.
pub trait PointMap: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &Vector) -> Result<Vector>;
}

impl<T: PointMap + ?Sized> PointMap for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &Vector) -> Result<Vector> {
        (**self).apply(x)
    }
}

impl<T: PointMap + ?Sized> PointMap for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &Vector) -> Result<Vector> {
        (**self).apply(x)
    }
}

impl<T: PointMap + Send + ?Sized> PointMap for std::sync::Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &Vector) -> Result<Vector> {
        (**self).apply(x)
    }
}

/// Wraps a closure as a [`PointMap`].
pub struct FnMap<F> {
    dim: usize,
    f: F,
}

impl<F> FnMap<F>
where
    F: Fn(&Vector) -> Vector + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> PointMap for FnMap<F>
where
    F: Fn(&Vector) -> Vector + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim, x)?;
        Ok((self.f)(x))
    }
}

pub(crate) fn check_dim(expected: usize, x: &Vector) -> Result<()> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(Error::Shape(format!(
            "expected a vector of dim {expected}, got {}",
            x.len()
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// `⟨x−y, u−v⟩ ≥ α‖x−y‖²`
    Monotone,
    /// `⟨x−y, u−v⟩ ≥ α‖u−v‖²`
    Comonotone,
}

impl std::fmt::Display for Flavor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Flavor::Monotone => f.write_str("monotone"),
            Flavor::Comonotone => f.write_str("comonotone"),
        }
    }
}

pub const CLAIM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusClaim {
    pub flavor: Flavor,
    pub alpha: f64,
    pub maximal: bool,
}

impl ModulusClaim {
    /// Whether this claim implies `(flavor, alpha)`.
    ///
    /// A larger modulus implies every smaller one of the same flavor, and a
    /// nonnegative modulus of either flavor implies plain monotonicity, which
    /// is 0-monotonicity and 0-comonotonicity at once. Computed moduli carry
    /// eigensolver rounding, so comparisons allow [`CLAIM_TOL`] relative slack.
    pub fn implies(&self, flavor: Flavor, alpha: f64) -> bool {
        let slack = CLAIM_TOL * (1.0 + self.alpha.abs());
        if self.flavor == flavor {
            alpha <= self.alpha + slack
        } else {
            self.alpha >= -slack && alpha <= 0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    /// `A(x) = Mx + u`.
    Affine {
        matrix: DMatrix<f64>,
        shift: Vector,
    },
    /// `A(x) = c·x + u`.
    ScaledIdentity {
        scale: f64,
        shift: Vector,
    },
    /// Planar rotation by the angle with the given cosine and sine.
    Rotation2d {
        cos: f64,
        sin: f64,
    },
    /// `A(x) = c·x + R(x) + u` on `ℝ²`.
    ScaledIdentityPlusRotation {
        scale: f64,
        cos: f64,
        sin: f64,
        shift: Vector,
    },
    /// Normal cone of the box `[lower, upper]`.
    NormalConeBox {
        lower: Vector,
        upper: Vector,
    },
    /// Normal cone of the closed ball.
    NormalConeBall {
        center: Vector,
        radius: f64,
    },
    SumOfTwo(Box<OperatorSpec>, Box<OperatorSpec>),
}

impl OperatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::Affine { .. } => "affine",
            OperatorKind::ScaledIdentity { .. } => "scaled_identity",
            OperatorKind::Rotation2d { .. } => "rotation2d",
            OperatorKind::ScaledIdentityPlusRotation { .. } => "scaled_identity_plus_rotation",
            OperatorKind::NormalConeBox { .. } => "normal_cone_box",
            OperatorKind::NormalConeBall { .. } => "normal_cone_ball",
            OperatorKind::SumOfTwo(..) => "sum_of_two",
        }
    }
}

/// An operator together with its certified moduli.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    kind: OperatorKind,
    dim: usize,
    claims: Vec<ModulusClaim>,
}

/// Cosine and sine of an angle in degrees, exact at multiples of 90°.
pub fn sin_cos_degrees(degrees: f64) -> (f64, f64) {
    let quarter = degrees / 90.0;
    if quarter.fract() == 0.0 {
        match (quarter as i64).rem_euclid(4) {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        }
    } else {
        degrees.to_radians().sin_cos()
    }
}

fn rotation_matrix(cos: f64, sin: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[cos, -sin, sin, cos])
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_sym_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.min()
}

/// Monotone and (if `m` is invertible) comonotone moduli of `x ↦ Mx + u`.
fn linear_moduli(m: &DMatrix<f64>) -> (f64, Option<f64>) {
    let mono = min_sym_eigenvalue(m);
    let co = m.clone().try_inverse().map(|inv| min_sym_eigenvalue(&inv));
    (mono, co)
}

fn maximal(flavor: Flavor, alpha: f64) -> ModulusClaim {
    ModulusClaim {
        flavor,
        alpha,
        maximal: true,
    }
}

impl OperatorSpec {
    fn with_linear_claims(kind: OperatorKind, dim: usize, mono: f64, co: Option<f64>) -> Self {
        let mut claims = vec![maximal(Flavor::Monotone, mono)];
        if let Some(c) = co {
            claims.push(maximal(Flavor::Comonotone, c));
        }
        Self { kind, dim, claims }
    }

    pub fn affine(matrix: DMatrix<f64>, shift: Vector) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != shift.len() || shift.is_empty() {
            return Err(Error::Shape(format!(
                "affine operator needs a square matrix matching the shift, got {}x{} and {}",
                matrix.nrows(),
                matrix.ncols(),
                shift.len()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("matrix has non-finite entries".into()));
        }
        ensure_finite(&shift, "shift")?;
        let dim = shift.len();
        let (mono, co) = linear_moduli(&matrix);
        Ok(Self::with_linear_claims(
            OperatorKind::Affine { matrix, shift },
            dim,
            mono,
            co,
        ))
    }

    pub fn scaled_identity(scale: f64, shift: Vector) -> Result<Self> {
        if !scale.is_finite() {
            return Err(Error::Parameter("scale must be finite".into()));
        }
        if shift.is_empty() {
            return Err(Error::Shape("dimension must be positive".into()));
        }
        ensure_finite(&shift, "shift")?;
        let dim = shift.len();
        let co = (scale != 0.0).then(|| 1.0 / scale);
        Ok(Self::with_linear_claims(
            OperatorKind::ScaledIdentity { scale, shift },
            dim,
            scale,
            co,
        ))
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::scaled_identity(0.0, Vector::zeros(dim))
    }

    pub fn rotation2d(degrees: f64) -> Result<Self> {
        if !degrees.is_finite() {
            return Err(Error::Parameter("angle must be finite".into()));
        }
        let (sin, cos) = sin_cos_degrees(degrees);
        // R⁻¹ = Rᵀ has the same symmetric part.
        Ok(Self::with_linear_claims(
            OperatorKind::Rotation2d { cos, sin },
            2,
            cos,
            Some(cos),
        ))
    }

    pub fn scaled_identity_plus_rotation(scale: f64, degrees: f64, shift: Vector) -> Result<Self> {
        if !(scale.is_finite() && degrees.is_finite()) {
            return Err(Error::Parameter("scale and angle must be finite".into()));
        }
        if shift.len() != 2 {
            return Err(Error::Shape(
                "scaled identity plus rotation acts on R^2".into(),
            ));
        }
        ensure_finite(&shift, "shift")?;
        let (sin, cos) = sin_cos_degrees(degrees);
        // M = aI + bJ with J the quarter turn; M⁻¹ = (aI − bJ)/(a² + b²).
        let a = scale + cos;
        let r2 = a * a + sin * sin;
        let co = (r2 > 0.0).then(|| a / r2);
        Ok(Self::with_linear_claims(
            OperatorKind::ScaledIdentityPlusRotation {
                scale,
                cos,
                sin,
                shift,
            },
            2,
            a,
            co,
        ))
    }

    pub fn normal_cone_box(lower: Vector, upper: Vector) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::Shape(
                "box bounds must share a positive dimension".into(),
            ));
        }
        ensure_finite(&lower, "lower bound")?;
        ensure_finite(&upper, "upper bound")?;
        if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
            return Err(Error::Parameter(
                "box lower bound exceeds upper bound".into(),
            ));
        }
        let dim = lower.len();
        Ok(Self {
            kind: OperatorKind::NormalConeBox { lower, upper },
            dim,
            claims: vec![maximal(Flavor::Monotone, 0.0)],
        })
    }

    pub fn normal_cone_ball(center: Vector, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::Shape("dimension must be positive".into()));
        }
        ensure_finite(&center, "center")?;
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::Parameter("radius must be finite and >= 0".into()));
        }
        let dim = center.len();
        Ok(Self {
            kind: OperatorKind::NormalConeBall { center, radius },
            dim,
            claims: vec![maximal(Flavor::Monotone, 0.0)],
        })
    }

    /// `A + B`. Two single-valued linear terms collapse into one affine
    /// operator; otherwise the monotone moduli add.
    pub fn sum(a: OperatorSpec, b: OperatorSpec) -> Result<Self> {
        if a.dim != b.dim {
            return Err(Error::Shape(format!(
                "summands act on dims {} and {}",
                a.dim, b.dim
            )));
        }
        let dim = a.dim;
        if let (Some((ma, _)), Some((mb, _))) = (a.linear_part(), b.linear_part()) {
            let (mono, co) = linear_moduli(&(&ma + &mb));
            return Ok(Self::with_linear_claims(
                OperatorKind::SumOfTwo(Box::new(a), Box::new(b)),
                dim,
                mono,
                co,
            ));
        }
        let mono = match (a.modulus(Flavor::Monotone), b.modulus(Flavor::Monotone)) {
            (Some(x), Some(y)) => x + y,
            _ => {
                return Err(Error::Unsupported(
                    "sum needs monotone moduli on both summands".into(),
                ))
            }
        };
        Ok(Self {
            kind: OperatorKind::SumOfTwo(Box::new(a), Box::new(b)),
            dim,
            claims: vec![maximal(Flavor::Monotone, mono)],
        })
    }

    /// Adds a weaker modulus claim. Claims stronger than what the analytic
    /// moduli support are rejected.
    pub fn with_claim(mut self, claim: ModulusClaim) -> Result<Self> {
        if !claim.alpha.is_finite() {
            return Err(Error::Parameter("modulus must be finite".into()));
        }
        if !self.supports(claim.flavor, claim.alpha) {
            return Err(Error::Parameter(format!(
                "{} operator does not support a {} modulus of {}",
                self.kind.name(),
                claim.flavor,
                claim.alpha
            )));
        }
        self.claims.push(claim);
        Ok(self)
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn claims(&self) -> &[ModulusClaim] {
        &self.claims
    }

    /// Largest claimed modulus of the given flavor.
    pub fn modulus(&self, flavor: Flavor) -> Option<f64> {
        self.claims
            .iter()
            .filter(|c| c.flavor == flavor)
            .map(|c| c.alpha)
            .reduce(f64::max)
    }

    pub fn supports(&self, flavor: Flavor, alpha: f64) -> bool {
        self.claims.iter().any(|c| c.implies(flavor, alpha))
    }

    pub fn is_maximal(&self) -> bool {
        self.claims.iter().all(|c| c.maximal)
    }

    pub fn is_single_valued(&self) -> bool {
        self.linear_part().is_some()
    }

    /// `(M, u)` with `A(x) = Mx + u` for single-valued kinds.
    pub fn linear_part(&self) -> Option<(DMatrix<f64>, Vector)> {
        match &self.kind {
            OperatorKind::Affine { matrix, shift } => Some((matrix.clone(), shift.clone())),
            OperatorKind::ScaledIdentity { scale, shift } => Some((
                DMatrix::identity(self.dim, self.dim) * *scale,
                shift.clone(),
            )),
            OperatorKind::Rotation2d { cos, sin } => {
                Some((rotation_matrix(*cos, *sin), Vector::zeros(2)))
            }
            OperatorKind::ScaledIdentityPlusRotation {
                scale,
                cos,
                sin,
                shift,
            } => Some((
                rotation_matrix(*cos, *sin) + DMatrix::identity(2, 2) * *scale,
                shift.clone(),
            )),
            OperatorKind::NormalConeBox { .. } | OperatorKind::NormalConeBall { .. } => None,
            OperatorKind::SumOfTwo(a, b) => {
                let (ma, ua) = a.linear_part()?;
                let (mb, ub) = b.linear_part()?;
                Some((ma + mb, ua + ub))
            }
        }
    }

    /// `A(x)` for single-valued kinds.
    pub fn eval(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim, x)?;
        match &self.kind {
            OperatorKind::Affine { matrix, shift } => Ok(matrix * x + shift),
            OperatorKind::ScaledIdentity { scale, shift } => Ok(x * *scale + shift),
            OperatorKind::Rotation2d { cos, sin } => Ok(Vector::from_row_slice(&[
                cos * x[0] - sin * x[1],
                sin * x[0] + cos * x[1],
            ])),
            OperatorKind::ScaledIdentityPlusRotation {
                scale,
                cos,
                sin,
                shift,
            } => Ok(Vector::from_row_slice(&[
                (scale + cos) * x[0] - sin * x[1] + shift[0],
                sin * x[0] + (scale + cos) * x[1] + shift[1],
            ])),
            OperatorKind::NormalConeBox { .. } => Err(Error::UnsupportedEval("normal_cone_box")),
            OperatorKind::NormalConeBall { .. } => Err(Error::UnsupportedEval("normal_cone_ball")),
            OperatorKind::SumOfTwo(a, b) => Ok(a.eval(x)? + b.eval(x)?),
        }
    }
}

impl PointMap for OperatorSpec {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &Vector) -> Result<Vector> {
        self.eval(x)
    }
}
