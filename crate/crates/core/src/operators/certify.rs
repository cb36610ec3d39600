//! Sampling-based falsifiers for monotonicity, comonotonicity, cocoercivity
//! and conical averagedness.
//!
//! A certificate reports the worst normalized margin
//! `(lhs − rhs) / (1 + ‖x−y‖²)` over the sampled pairs; it passes iff that
//! margin is at least `−CERTIFY_TOL`. Passing means no violation was found.

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::PointMap;
use crate::error::{Error, Result};
use crate::vecspace::{Euclidean, Metric, Vector};

pub const CERTIFY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub samples: usize,
    pub seed: u64,
    /// Entries are drawn as `radius · N(0, 1)`.
    pub radius: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            samples: 1000,
            seed: 0,
            radius: 10.0,
        }
    }
}

impl SamplingConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        })
    }
}

/// The inequality being probed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "property", content = "constant", rename_all = "snake_case")]
pub enum Property {
    /// `⟨x−y, Tx−Ty⟩ ≥ α‖x−y‖²`
    Monotone(f64),
    /// `⟨x−y, Tx−Ty⟩ ≥ α‖Tx−Ty‖²`
    Comonotone(f64),
    /// `⟨x−y, Tx−Ty⟩ ≥ τ‖Tx−Ty‖²`, `τ > 0`
    Cocoercive(f64),
    /// `‖Tx−Ty‖² ≤ ‖x−y‖² − ((1−θ)/θ)‖(Id−T)x − (Id−T)y‖²`, `θ > 0`
    ConicallyAveraged(f64),
}

impl Property {
    pub fn constant(&self) -> f64 {
        match *self {
            Property::Monotone(c)
            | Property::Comonotone(c)
            | Property::Cocoercive(c)
            | Property::ConicallyAveraged(c) => c,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Property::Monotone(_) => "monotone",
            Property::Comonotone(_) => "comonotone",
            Property::Cocoercive(_) => "cocoercive",
            Property::ConicallyAveraged(_) => "conically_averaged",
        }
    }

    fn validate(&self) -> Result<()> {
        let c = self.constant();
        if !c.is_finite() {
            return Err(Error::Parameter(format!(
                "{} constant must be finite",
                self.name()
            )));
        }
        match self {
            Property::Cocoercive(t) if *t <= 0.0 => Err(Error::Parameter(format!(
                "cocoercivity constant must be > 0, got {t}"
            ))),
            Property::ConicallyAveraged(t) if *t <= 0.0 => Err(Error::Parameter(format!(
                "averagedness constant must be > 0, got {t}"
            ))),
            _ => Ok(()),
        }
    }

    /// `lhs − rhs` of the inequality for the displacement `d = x − y` and
    /// image difference `e = Tx − Ty`.
    fn margin(&self, d: &Vector, e: &Vector, metric: &dyn Metric) -> f64 {
        match *self {
            Property::Monotone(a) => metric.inner(d, e) - a * metric.norm_sq(d),
            Property::Comonotone(a) | Property::Cocoercive(a) => {
                metric.inner(d, e) - a * metric.norm_sq(e)
            }
            Property::ConicallyAveraged(theta) => {
                let r = d - e;
                metric.norm_sq(d) - (1.0 - theta) / theta * metric.norm_sq(&r) - metric.norm_sq(e)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(flatten)]
    pub property: Property,
    pub sample_count: usize,
    /// Smallest normalized margin seen; negative values are violations.
    pub worst_violation: f64,
    pub verdict: Verdict,
}

/// Deterministic random pairs `(x, y)` for the given seed.
pub fn sample_pairs(dim: usize, cfg: &SamplingConfig) -> Result<Vec<(Vector, Vector)>> {
    if cfg.samples == 0 {
        return Err(Error::Parameter("at least one sample is required".into()));
    }
    if !(cfg.radius.is_finite() && cfg.radius > 0.0) {
        return Err(Error::Parameter(
            "sampling radius must be finite and > 0".into(),
        ));
    }
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let draw = |rng: &mut StdRng| {
        Vector::from_fn(dim, |_, _| {
            cfg.radius * Distribution::<f64>::sample(&StandardNormal, rng)
        })
    };
    Ok((0..cfg.samples)
        .map(|_| {
            let x = draw(&mut rng);
            let y = draw(&mut rng);
            (x, y)
        })
        .collect())
}

/// Normalized margins of `property` for `map` on each pair.
pub fn pair_margins(
    map: &dyn PointMap,
    property: Property,
    pairs: &[(Vector, Vector)],
    metric: &dyn Metric,
) -> Result<Vec<f64>> {
    property.validate()?;
    if !metric.accepts(map.dim()) {
        return Err(Error::Shape(format!(
            "metric does not accept vectors of dim {}",
            map.dim()
        )));
    }
    pairs
        .iter()
        .map(|(x, y)| {
            let d = x - y;
            let e = map.apply(x)? - map.apply(y)?;
            let scale = 1.0 + metric.norm_sq(&d);
            Ok(property.margin(&d, &e, metric) / scale)
        })
        .collect()
}

/// Probes `property` on `cfg.samples` random pairs in the given metric.
pub fn certify(
    map: &dyn PointMap,
    property: Property,
    cfg: &SamplingConfig,
    metric: &dyn Metric,
) -> Result<Certificate> {
    let pairs = sample_pairs(map.dim(), cfg)?;
    let margins = pair_margins(map, property, &pairs, metric)?;
    let worst = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Certificate {
        property,
        sample_count: margins.len(),
        worst_violation: worst,
        verdict: Verdict::from_bool(worst >= -CERTIFY_TOL),
    })
}

pub fn certify_monotone(
    map: &dyn PointMap,
    alpha: f64,
    cfg: &SamplingConfig,
) -> Result<Certificate> {
    certify(map, Property::Monotone(alpha), cfg, &Euclidean)
}

pub fn certify_comonotone(
    map: &dyn PointMap,
    alpha: f64,
    cfg: &SamplingConfig,
) -> Result<Certificate> {
    certify(map, Property::Comonotone(alpha), cfg, &Euclidean)
}

pub fn certify_cocoercive(
    map: &dyn PointMap,
    tau: f64,
    cfg: &SamplingConfig,
) -> Result<Certificate> {
    certify(map, Property::Cocoercive(tau), cfg, &Euclidean)
}

pub fn certify_conically_averaged(
    map: &dyn PointMap,
    theta: f64,
    cfg: &SamplingConfig,
) -> Result<Certificate> {
    certify(map, Property::ConicallyAveraged(theta), cfg, &Euclidean)
}
