//! Dense vectors, the weighted n-fold product space, and projections onto the
//! scaled diagonal `C = {(τ₁u, …, τₙu)}` and onto affine translates of `C⊥`.
//!
//! Product vectors are stored as `n` contiguous blocks of a common block
//! dimension.

use nalgebra::{DVector, DVectorView};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense real vector.
pub type Vector = DVector<f64>;

/// An inner product on flat vectors of a fixed length.
pub trait Metric: Sync {
    fn inner(&self, a: &Vector, b: &Vector) -> f64;

    /// Whether flat vectors of length `dim` live in this space.
    fn accepts(&self, _dim: usize) -> bool {
        true
    }

    fn norm_sq(&self, a: &Vector) -> f64 {
        self.inner(a, a)
    }

    fn norm(&self, a: &Vector) -> f64 {
        self.norm_sq(a).sqrt()
    }
}

/// The standard Euclidean inner product.
#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl Metric for Euclidean {
    fn inner(&self, a: &Vector, b: &Vector) -> f64 {
        a.dot(b)
    }
}

/// Returns an error if any entry is NaN or infinite.
pub fn ensure_finite(v: &Vector, what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{what} has non-finite entries")))
    }
}

/// An element of `Hⁿ`, stored block-contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductVector {
    data: Vector,
    n_blocks: usize,
}

impl ProductVector {
    pub fn from_flat(data: Vector, n_blocks: usize) -> Result<Self> {
        if n_blocks == 0 || data.is_empty() || !data.len().is_multiple_of(n_blocks) {
            return Err(Error::Shape(format!(
                "cannot split {} entries into {} equal blocks",
                data.len(),
                n_blocks
            )));
        }
        Ok(Self { data, n_blocks })
    }

    pub fn from_blocks(blocks: &[Vector]) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::Shape("product vector needs at least one block".into()))?;
        let block_dim = first.len();
        if block_dim == 0 || blocks.iter().any(|b| b.len() != block_dim) {
            return Err(Error::Shape(
                "blocks must share a positive dimension".into(),
            ));
        }
        let mut data = Vector::zeros(block_dim * blocks.len());
        for (i, b) in blocks.iter().enumerate() {
            data.rows_mut(i * block_dim, block_dim).copy_from(b);
        }
        Ok(Self {
            data,
            n_blocks: blocks.len(),
        })
    }

    /// Builds `(τ₁u, …, τₙu)`.
    pub fn diagonal(u: &Vector, tau: &[f64]) -> Result<Self> {
        let blocks: Vec<Vector> = tau.iter().map(|&t| u * t).collect();
        Self::from_blocks(&blocks)
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn block_dim(&self) -> usize {
        self.data.len() / self.n_blocks
    }

    pub fn block(&self, i: usize) -> DVectorView<'_, f64> {
        let d = self.block_dim();
        self.data.rows(i * d, d)
    }

    pub fn blocks(&self) -> Vec<Vector> {
        (0..self.n_blocks)
            .map(|i| self.block(i).into_owned())
            .collect()
    }

    pub fn as_flat(&self) -> &Vector {
        &self.data
    }

    pub fn into_flat(self) -> Vector {
        self.data
    }
}

/// `Hⁿ` equipped with `⟨x, y⟩_ω = Σ ωᵢ⟨xᵢ, yᵢ⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSpace {
    weights: Vec<f64>,
    block_dim: usize,
}

impl WeightedSpace {
    pub fn new(weights: Vec<f64>, block_dim: usize) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Parameter(
                "weighted space needs at least one block".into(),
            ));
        }
        if block_dim == 0 {
            return Err(Error::Parameter("block dimension must be positive".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Parameter(format!(
                "weights must be finite and > 0, got {w}"
            )));
        }
        Ok(Self { weights, block_dim })
    }

    /// Weights `ωᵢ = ρᵢ/τᵢ`, the metric in which the lifted cocoercive map is
    /// firmly nonexpansive.
    pub fn from_balance(rho: &[f64], tau: &[f64], block_dim: usize) -> Result<Self> {
        if rho.len() != tau.len() {
            return Err(Error::Shape(format!(
                "rho has {} entries, tau has {}",
                rho.len(),
                tau.len()
            )));
        }
        if rho.iter().chain(tau).any(|v| v.is_nan() || *v <= 0.0) {
            return Err(Error::Parameter("rho and tau entries must be > 0".into()));
        }
        Self::new(rho.iter().zip(tau).map(|(r, t)| r / t).collect(), block_dim)
    }

    pub fn n_blocks(&self) -> usize {
        self.weights.len()
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn flat_dim(&self) -> usize {
        self.weights.len() * self.block_dim
    }

    fn check(&self, x: &ProductVector) -> Result<()> {
        if x.n_blocks() != self.n_blocks() || x.block_dim() != self.block_dim {
            return Err(Error::Shape(format!(
                "expected {} blocks of dim {}, got {} blocks of dim {}",
                self.n_blocks(),
                self.block_dim,
                x.n_blocks(),
                x.block_dim()
            )));
        }
        Ok(())
    }

    pub fn inner_w(&self, x: &ProductVector, y: &ProductVector) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.weighted_dot(x.as_flat(), y.as_flat()))
    }

    pub fn norm_w(&self, x: &ProductVector) -> Result<f64> {
        Ok(self.inner_w(x, x)?.sqrt())
    }

    fn weighted_dot(&self, a: &Vector, b: &Vector) -> f64 {
        let d = self.block_dim;
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * a.rows(i * d, d).dot(&b.rows(i * d, d)))
            .sum()
    }
}

impl Metric for WeightedSpace {
    /// Flat vectors must have length `n · block_dim`.
    fn inner(&self, a: &Vector, b: &Vector) -> f64 {
        assert_eq!(a.len(), self.flat_dim(), "flat vector length mismatch");
        assert_eq!(b.len(), self.flat_dim(), "flat vector length mismatch");
        self.weighted_dot(a, b)
    }

    fn accepts(&self, dim: usize) -> bool {
        dim == self.flat_dim()
    }
}

/// The direction `τ` of the subspace `C = {(τ₁u, …, τₙu) : u ∈ H}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledDiagonal {
    tau: Vec<f64>,
}

impl ScaledDiagonal {
    pub fn new(tau: Vec<f64>) -> Result<Self> {
        if tau.is_empty() {
            return Err(Error::InvalidSubspace("tau is empty".into()));
        }
        if tau.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidSubspace("tau has non-finite entries".into()));
        }
        if tau.iter().all(|t| *t == 0.0) {
            return Err(Error::InvalidSubspace("tau is identically zero".into()));
        }
        Ok(Self { tau })
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    /// `Σ ωᵢτᵢ²`.
    pub fn gram(&self, space: &WeightedSpace) -> Result<f64> {
        if self.tau.len() != space.n_blocks() {
            return Err(Error::Shape(format!(
                "tau has {} entries but the space has {} blocks",
                self.tau.len(),
                space.n_blocks()
            )));
        }
        let g: f64 = space
            .weights()
            .iter()
            .zip(&self.tau)
            .map(|(w, t)| w * t * t)
            .sum();
        if g > 0.0 {
            Ok(g)
        } else {
            Err(Error::InvalidSubspace(
                "sum of w_i * tau_i^2 is not positive".into(),
            ))
        }
    }

    /// The coordinate `ū = Σωᵢτᵢxᵢ / Σωᵢτᵢ²` of `P_C(x)`.
    pub fn coordinate(&self, x: &ProductVector, space: &WeightedSpace) -> Result<Vector> {
        space.check(x)?;
        let g = self.gram(space)?;
        let mut acc = Vector::zeros(space.block_dim());
        for (i, (w, t)) in space.weights().iter().zip(&self.tau).enumerate() {
            acc.axpy(w * t, &x.block(i), 1.0);
        }
        Ok(acc / g)
    }
}

/// Orthogonal projection (in the ω-metric) onto the scaled diagonal.
pub fn project_scaled_diagonal(
    x: &ProductVector,
    diag: &ScaledDiagonal,
    space: &WeightedSpace,
) -> Result<ProductVector> {
    let u = diag.coordinate(x, space)?;
    ProductVector::diagonal(&u, diag.tau())
}

/// ω-metric projection of `z` onto `anchor + C⊥`, i.e.
/// `anchor + (Id − P_C)(z − anchor)`.
pub fn project_affine_complement(
    z: &ProductVector,
    anchor: &ProductVector,
    diag: &ScaledDiagonal,
    space: &WeightedSpace,
) -> Result<ProductVector> {
    space.check(z)?;
    space.check(anchor)?;
    let shifted = ProductVector::from_flat(z.as_flat() - anchor.as_flat(), z.n_blocks())?;
    let p = project_scaled_diagonal(&shifted, diag, space)?;
    ProductVector::from_flat(z.as_flat() - p.as_flat(), z.n_blocks())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pv(blocks: &[&[f64]]) -> ProductVector {
        let b: Vec<Vector> = blocks.iter().map(|s| Vector::from_row_slice(s)).collect();
        ProductVector::from_blocks(&b).unwrap()
    }

    #[test]
    fn inner_w_examples() {
        let s = WeightedSpace::new(vec![1.0, 2.0], 1).unwrap();
        assert_eq!(
            s.inner_w(&pv(&[&[1.0], &[1.0]]), &pv(&[&[1.0], &[1.0]]))
                .unwrap(),
            3.0
        );

        let s = WeightedSpace::new(vec![1.0, 1.0], 2).unwrap();
        let x = pv(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let y = pv(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert_eq!(s.inner_w(&x, &y).unwrap(), 0.0);

        let s = WeightedSpace::new(vec![2.0, 3.0], 1).unwrap();
        assert_eq!(
            s.inner_w(&pv(&[&[1.0], &[2.0]]), &pv(&[&[4.0], &[5.0]]))
                .unwrap(),
            38.0
        );
    }

    #[test]
    fn inner_w_rejects_shape_mismatch() {
        let s = WeightedSpace::new(vec![1.0, 1.0], 2).unwrap();
        let x = pv(&[&[1.0], &[1.0]]);
        assert!(matches!(s.inner_w(&x, &x), Err(Error::Shape(_))));
    }

    #[test]
    fn weights_must_be_positive() {
        assert!(WeightedSpace::new(vec![1.0, 0.0], 1).is_err());
        assert!(WeightedSpace::new(vec![1.0, -2.0], 1).is_err());
        assert!(WeightedSpace::new(vec![1.0, f64::NAN], 1).is_err());
    }

    #[test]
    fn projection_examples() {
        let s = WeightedSpace::new(vec![1.0, 2.0], 1).unwrap();
        let d = ScaledDiagonal::new(vec![3.0, 1.0]).unwrap();
        // least squares: minimise (1 - 3u)^2 + 2(5 - u)^2 => 3(3u - 1) + 2(u - 5) = 0 => u = 13/11
        let p = project_scaled_diagonal(&pv(&[&[1.0], &[5.0]]), &d, &s).unwrap();
        assert_abs_diff_eq!(p.block(0)[0], 39.0 / 11.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.block(1)[0], 13.0 / 11.0, epsilon = 1e-14);

        let x = pv(&[&[3.0 * 0.7], &[0.7]]);
        let p = project_scaled_diagonal(&x, &d, &s).unwrap();
        assert_abs_diff_eq!(p.as_flat(), x.as_flat(), epsilon = 1e-15);

        let s = WeightedSpace::new(vec![1.0, 1.0], 1).unwrap();
        let d = ScaledDiagonal::new(vec![1.0, 1.0]).unwrap();
        let p = project_scaled_diagonal(&pv(&[&[0.0], &[2.0]]), &d, &s).unwrap();
        assert_eq!(p, pv(&[&[1.0], &[1.0]]));
    }

    #[test]
    fn zero_tau_is_rejected() {
        assert!(matches!(
            ScaledDiagonal::new(vec![0.0, 0.0]),
            Err(Error::InvalidSubspace(_))
        ));
    }

    #[test]
    fn partially_zero_tau_is_allowed() {
        let s = WeightedSpace::new(vec![1.0, 4.0], 1).unwrap();
        let d = ScaledDiagonal::new(vec![0.0, 2.0]).unwrap();
        let p = project_scaled_diagonal(&pv(&[&[5.0], &[3.0]]), &d, &s).unwrap();
        assert_eq!(p, pv(&[&[0.0], &[3.0]]));
    }

    #[test]
    fn affine_complement_examples() {
        let s = WeightedSpace::new(vec![1.0, 1.0], 1).unwrap();
        let d = ScaledDiagonal::new(vec![1.0, 1.0]).unwrap();
        let zero = pv(&[&[0.0], &[0.0]]);
        let z = pv(&[&[3.0], &[-1.0]]);
        let r = project_affine_complement(&z, &zero, &d, &s).unwrap();
        let pc = project_scaled_diagonal(&z, &d, &s).unwrap();
        assert_eq!(r.as_flat(), &(z.as_flat() - pc.as_flat()));

        // Already in anchor + C⊥.
        let anchor = pv(&[&[1.0], &[0.0]]);
        let z = pv(&[&[2.0], &[-1.0]]);
        let r = project_affine_complement(&z, &anchor, &d, &s).unwrap();
        assert_abs_diff_eq!(r.as_flat(), z.as_flat(), epsilon = 1e-15);

        // Minimise (a-3)^2 + (b-3)^2 subject to (a-1) + (b-0) = 0: a = 0.5, b = 0.5.
        let z = pv(&[&[3.0], &[3.0]]);
        let r = project_affine_complement(&z, &anchor, &d, &s).unwrap();
        assert_abs_diff_eq!(
            r.as_flat(),
            pv(&[&[0.5], &[0.5]]).as_flat(),
            epsilon = 1e-15
        );
    }
}
