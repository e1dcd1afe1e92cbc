//! Closed-form univariate distributions.
//!
//! Every [`ParametricDist`] is validated on construction, so the evaluation
//! methods (`pdf`, `cdf`, `icdf`) never fail on parameter grounds. The
//! quantile function is the workhorse: inverse transform sampling, the
//! Dirac-mixture discretization and the Galerkin ICDF fits all go through it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, QuadConfig};
use crate::special::{gaussian_pdf, std_normal_cdf, std_normal_quantile, std_normal_sf};
use crate::transform::Transform;

/// Tolerance on mixture weight normalization.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Half-width, in standard deviations, of the finite window used for
/// quadrature over Gaussian supports. Tail mass outside is below 1e-44.
const GAUSS_WINDOW_SD: f64 = 14.0;

/// Half-width of the initial bisection bracket for mixture quantiles.
const MIXTURE_BRACKET_SD: f64 = 12.0;
const MIXTURE_MAX_ITER: usize = 200;

/// Anything with a quantile function, e.g. a [`ParametricDist`] or a
/// numerically-tabulated [`crate::density::AnalyticDensity`].
pub trait Quantile {
    fn quantile(&self, u: f64) -> Result<f64>;
    fn label(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub std_dev: f64,
}

impl MixtureComponent {
    pub const fn new(weight: f64, mean: f64, std_dev: f64) -> Self {
        Self { weight, mean, std_dev }
    }
}

/// Variant tag plus parameters. Obtain one through the validating
/// constructors on [`ParametricDist`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DistKind {
    Uniform { lower: f64, upper: f64 },
    Gaussian { mean: f64, std_dev: f64 },
    GaussianMixture { components: Vec<MixtureComponent> },
    Bernoulli { p: f64 },
    LogNormal { mu: f64, sigma: f64 },
    Exponential { rate: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistKind", into = "DistKind")]
pub struct ParametricDist {
    kind: DistKind,
}

impl TryFrom<DistKind> for ParametricDist {
    type Error = Error;

    fn try_from(kind: DistKind) -> Result<Self> {
        validate(&kind)?;
        Ok(Self { kind })
    }
}

impl From<ParametricDist> for DistKind {
    fn from(d: ParametricDist) -> Self {
        d.kind
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: v,
            reason: "must be finite",
        })
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    finite(name, v)?;
    if v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: v,
            reason: "must be positive",
        })
    }
}

fn validate(kind: &DistKind) -> Result<()> {
    match *kind {
        DistKind::Uniform { lower, upper } => {
            finite("lower", lower)?;
            finite("upper", upper)?;
            if lower >= upper {
                return Err(Error::InvalidParameter {
                    name: "upper",
                    value: upper,
                    reason: "must exceed lower",
                });
            }
        }
        DistKind::Gaussian { mean, std_dev } => {
            finite("mean", mean)?;
            positive("std_dev", std_dev)?;
        }
        DistKind::GaussianMixture { ref components } => {
            if components.is_empty() {
                return Err(Error::InvalidParameter {
                    name: "components",
                    value: 0.0,
                    reason: "mixture needs at least one component",
                });
            }
            let mut total = 0.0;
            for c in components {
                positive("weight", c.weight)?;
                finite("mean", c.mean)?;
                positive("std_dev", c.std_dev)?;
                total += c.weight;
            }
            if (total - 1.0).abs() > WEIGHT_SUM_TOL {
                return Err(Error::InvalidParameter {
                    name: "weights",
                    value: total,
                    reason: "must sum to 1",
                });
            }
        }
        DistKind::Bernoulli { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter {
                    name: "p",
                    value: p,
                    reason: "must lie in [0, 1]",
                });
            }
        }
        DistKind::LogNormal { mu, sigma } => {
            finite("mu", mu)?;
            positive("sigma", sigma)?;
        }
        DistKind::Exponential { rate } => positive("rate", rate)?,
    }
    Ok(())
}

fn check_unit(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(u))
    }
}

impl ParametricDist {
    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        DistKind::Uniform { lower, upper }.try_into()
    }

    pub fn gaussian(mean: f64, std_dev: f64) -> Result<Self> {
        DistKind::Gaussian { mean, std_dev }.try_into()
    }

    pub fn mixture(components: Vec<MixtureComponent>) -> Result<Self> {
        DistKind::GaussianMixture { components }.try_into()
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        DistKind::Bernoulli { p }.try_into()
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        DistKind::LogNormal { mu, sigma }.try_into()
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        DistKind::Exponential { rate }.try_into()
    }

    /// Bimodal input of the convergence-challenge application:
    /// `0.6·N(2, 0.5²) + 0.4·N(−1, 1²)`.
    pub fn convergence_challenge_input() -> Self {
        Self::mixture(vec![
            MixtureComponent::new(0.6, 2.0, 0.5),
            MixtureComponent::new(0.4, -1.0, 1.0),
        ])
        .expect("constant mixture is valid")
    }

    pub fn kind(&self) -> &DistKind {
        &self.kind
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.kind, DistKind::Bernoulli { .. })
    }

    /// Short identifier used in sample provenance.
    pub fn id(&self) -> String {
        match &self.kind {
            DistKind::Uniform { lower, upper } => format!("uniform({lower},{upper})"),
            DistKind::Gaussian { mean, std_dev } => format!("gaussian({mean},{std_dev})"),
            DistKind::GaussianMixture { components } => {
                let parts: Vec<String> = components
                    .iter()
                    .map(|c| format!("{}:{}:{}", c.weight, c.mean, c.std_dev))
                    .collect();
                format!("mixture({})", parts.join(";"))
            }
            DistKind::Bernoulli { p } => format!("bernoulli({p})"),
            DistKind::LogNormal { mu, sigma } => format!("lognormal({mu},{sigma})"),
            DistKind::Exponential { rate } => format!("exponential({rate})"),
        }
    }

    /// Density at `x`; for the Bernoulli variant this is the mass function.
    pub fn pdf(&self, x: f64) -> f64 {
        match &self.kind {
            DistKind::Uniform { lower, upper } => {
                if x >= *lower && x <= *upper {
                    1.0 / (upper - lower)
                } else {
                    0.0
                }
            }
            DistKind::Gaussian { mean, std_dev } => gaussian_pdf(x, *mean, *std_dev),
            DistKind::GaussianMixture { components } => components
                .iter()
                .map(|c| c.weight * gaussian_pdf(x, c.mean, c.std_dev))
                .sum(),
            DistKind::Bernoulli { p } => {
                if x == 1.0 {
                    *p
                } else if x == 0.0 {
                    1.0 - p
                } else {
                    0.0
                }
            }
            DistKind::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    gaussian_pdf(x.ln(), *mu, *sigma) / x
                }
            }
            DistKind::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match &self.kind {
            DistKind::Uniform { lower, upper } => ((x - lower) / (upper - lower)).clamp(0.0, 1.0),
            DistKind::Gaussian { mean, std_dev } => std_normal_cdf((x - mean) / std_dev),
            DistKind::GaussianMixture { components } => components
                .iter()
                .map(|c| c.weight * std_normal_cdf((x - c.mean) / c.std_dev))
                .sum::<f64>()
                .min(1.0),
            DistKind::Bernoulli { p } => {
                if x < 0.0 {
                    0.0
                } else if x < 1.0 {
                    1.0 - p
                } else {
                    1.0
                }
            }
            DistKind::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    std_normal_cdf((x.ln() - mu) / sigma)
                }
            }
            DistKind::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
        }
    }

    /// Upper tail `1 − F(x)`, used by the mixture quantile search above the
    /// median where `F` itself would lose digits.
    fn sf(&self, x: f64) -> f64 {
        match &self.kind {
            DistKind::GaussianMixture { components } => components
                .iter()
                .map(|c| c.weight * std_normal_sf((x - c.mean) / c.std_dev))
                .sum(),
            _ => 1.0 - self.cdf(x),
        }
    }

    /// Quantile function for `u` in (0, 1).
    pub fn icdf(&self, u: f64) -> Result<f64> {
        check_unit(u)?;
        Ok(match &self.kind {
            DistKind::Uniform { lower, upper } => lower + u * (upper - lower),
            DistKind::Gaussian { mean, std_dev } => mean + std_dev * std_normal_quantile(u),
            DistKind::GaussianMixture { components } => self.mixture_icdf(components, u),
            DistKind::Bernoulli { p } => {
                if u <= 1.0 - p {
                    0.0
                } else {
                    1.0
                }
            }
            DistKind::LogNormal { mu, sigma } => (mu + sigma * std_normal_quantile(u)).exp(),
            DistKind::Exponential { rate } => -(-u).ln_1p() / rate,
        })
    }

    /// Bracketing search with Newton steps, falling back to bisection
    /// whenever a Newton step leaves the bracket.
    fn mixture_icdf(&self, components: &[MixtureComponent], u: f64) -> f64 {
        if let [c] = components {
            return c.mean + c.std_dev * std_normal_quantile(u);
        }
        let mut lo = components
            .iter()
            .map(|c| c.mean - MIXTURE_BRACKET_SD * c.std_dev)
            .fold(f64::INFINITY, f64::min);
        let mut hi = components
            .iter()
            .map(|c| c.mean + MIXTURE_BRACKET_SD * c.std_dev)
            .fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        // Newton on the log of whichever tail probability is smaller: well
        // conditioned in the middle and fast far out, where the plain
        // residual only moves about 1/|z| per step.
        let upper = u > 0.5;
        let log_target = if upper { (-u).ln_1p() } else { u.ln() };
        let tail = |x: f64| if upper { self.sf(x) } else { self.cdf(x) };
        let residual = |x: f64| {
            let g = tail(x).ln() - log_target;
            if upper {
                -g
            } else {
                g
            }
        };
        while residual(lo) > 0.0 {
            lo -= span;
        }
        while residual(hi) < 0.0 {
            hi += span;
        }

        let mut x = 0.5 * (lo + hi);
        for _ in 0..MIXTURE_MAX_ITER {
            let t = tail(x);
            let g = residual(x);
            if g == 0.0 {
                return x;
            }
            if g < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let slope = self.pdf(x) / t;
            let newton = x - g / slope;
            let next = if slope > 0.0 && slope.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE)
                || hi - lo <= 4.0 * f64::EPSILON * x.abs().max(1e-300)
            {
                return next;
            }
            x = next;
        }
        x
    }

    pub fn mean(&self) -> f64 {
        match &self.kind {
            DistKind::Uniform { lower, upper } => 0.5 * (lower + upper),
            DistKind::Gaussian { mean, .. } => *mean,
            DistKind::GaussianMixture { components } => components.iter().map(|c| c.weight * c.mean).sum(),
            DistKind::Bernoulli { p } => *p,
            DistKind::LogNormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            DistKind::Exponential { rate } => 1.0 / rate,
        }
    }

    pub fn variance(&self) -> f64 {
        match &self.kind {
            DistKind::Uniform { lower, upper } => (upper - lower).powi(2) / 12.0,
            DistKind::Gaussian { std_dev, .. } => std_dev * std_dev,
            DistKind::GaussianMixture { components } => {
                let m = self.mean();
                components
                    .iter()
                    .map(|c| c.weight * (c.std_dev * c.std_dev + (c.mean - m).powi(2)))
                    .sum()
            }
            DistKind::Bernoulli { p } => p * (1.0 - p),
            DistKind::LogNormal { mu, sigma } => {
                let s2 = sigma * sigma;
                s2.exp_m1() * (2.0 * mu + s2).exp()
            }
            DistKind::Exponential { rate } => 1.0 / (rate * rate),
        }
    }

    /// Finite window carrying all but a negligible tail mass, used as the
    /// integration range for continuous variants.
    pub fn effective_support(&self) -> (f64, f64) {
        match &self.kind {
            DistKind::Uniform { lower, upper } => (*lower, *upper),
            DistKind::Gaussian { mean, std_dev } => {
                (mean - GAUSS_WINDOW_SD * std_dev, mean + GAUSS_WINDOW_SD * std_dev)
            }
            DistKind::GaussianMixture { components } => {
                components
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
                        (
                            lo.min(c.mean - GAUSS_WINDOW_SD * c.std_dev),
                            hi.max(c.mean + GAUSS_WINDOW_SD * c.std_dev),
                        )
                    })
            }
            DistKind::Bernoulli { .. } => (0.0, 1.0),
            DistKind::LogNormal { mu, sigma } => (
                (mu - GAUSS_WINDOW_SD * sigma).exp(),
                (mu + GAUSS_WINDOW_SD * sigma).exp(),
            ),
            DistKind::Exponential { rate } => (0.0, 105.0 / rate),
        }
    }

    /// `E[g(X)] = ∫ g(x) p(x) dx` by adaptive quadrature (a finite sum for
    /// the Bernoulli variant). `None` means the identity.
    pub fn expectation(&self, g: Option<&Transform>, cfg: QuadConfig) -> Result<f64> {
        let eval = |x: f64| -> Result<f64> {
            let y = match g {
                Some(t) => t.apply(x),
                None => x,
            };
            if y.is_finite() {
                Ok(y)
            } else {
                Err(Error::propagation(
                    format!("expectation integrand at x = {x}"),
                    "transform returned a non-finite value",
                ))
            }
        };
        match &self.kind {
            DistKind::Bernoulli { p } => Ok((1.0 - p) * eval(0.0)? + p * eval(1.0)?),
            DistKind::LogNormal { mu, sigma } => {
                // x = exp(mu + sigma z) keeps the integrand well scaled.
                let (mu, sigma) = (*mu, *sigma);
                let r = quad::integrate_fallible(
                    |z| {
                        let w = crate::special::std_normal_pdf(z);
                        if w == 0.0 {
                            return Ok(0.0);
                        }
                        Ok(eval((mu + sigma * z).exp())? * w)
                    },
                    -GAUSS_WINDOW_SD,
                    GAUSS_WINDOW_SD,
                    cfg.pieces(cfg.initial_pieces.max(56)),
                )?;
                Ok(r.value)
            }
            _ => {
                let (lo, hi) = self.effective_support();
                let pieces = self.default_pieces().max(cfg.initial_pieces);
                let r = quad::integrate_fallible(
                    |x| {
                        let w = self.pdf(x);
                        if w == 0.0 {
                            return Ok(0.0);
                        }
                        Ok(eval(x)? * w)
                    },
                    lo,
                    hi,
                    cfg.pieces(pieces),
                )?;
                Ok(r.value)
            }
        }
    }

    /// Initial partition size so that no piece is much wider than the
    /// narrowest feature of the density.
    pub(crate) fn default_pieces(&self) -> usize {
        match &self.kind {
            DistKind::Uniform { .. } | DistKind::Bernoulli { .. } => 4,
            DistKind::Gaussian { .. } | DistKind::LogNormal { .. } => 56,
            DistKind::GaussianMixture { components } => {
                let (lo, hi) = self.effective_support();
                let narrow = components.iter().map(|c| c.std_dev).fold(f64::INFINITY, f64::min);
                ((hi - lo) / (0.5 * narrow)).ceil().clamp(8.0, 4096.0) as usize
            }
            DistKind::Exponential { .. } => 210,
        }
    }
}

impl Quantile for ParametricDist {
    fn quantile(&self, u: f64) -> Result<f64> {
        self.icdf(u)
    }

    fn label(&self) -> String {
        self.id()
    }
}
