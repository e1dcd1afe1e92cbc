//! Change-of-variables densities `p_Y(y) = p_X(f⁻¹(y)) · |d f⁻¹/dy|`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::dist::{ParametricDist, Quantile};
use crate::error::{Error, Result};
use crate::quad::{self, QuadConfig};
use crate::transform::{Monotonicity, Transform};

type DensityFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// Number of cells in the cumulative table behind [`AnalyticDensity::cdf`].
const CDF_CELLS: usize = 2048;
const CELL_TOL: f64 = 1e-15;

/// An evaluable density on an interval. Evaluation at or beyond the
/// endpoints returns 0.
#[derive(Clone)]
pub struct AnalyticDensity {
    name: String,
    pdf: DensityFn,
    support: (f64, f64),
    pieces: usize,
    table: Arc<OnceLock<Result<CdfTable, String>>>,
}

impl fmt::Debug for AnalyticDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticDensity")
            .field("name", &self.name)
            .field("support", &self.support)
            .finish()
    }
}

#[derive(Debug)]
struct CdfTable {
    edges: Vec<f64>,
    /// Unnormalized mass to the left of each edge.
    cumulative: Vec<f64>,
}

impl AnalyticDensity {
    pub fn new<F>(name: impl Into<String>, support: (f64, f64), pdf: F) -> Self
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            pdf: Arc::new(pdf),
            support,
            pieces: 256,
            table: Arc::new(OnceLock::new()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn density(&self, y: f64) -> Result<f64> {
        let (lo, hi) = self.support;
        if !(y > lo && y < hi) {
            return Ok(0.0);
        }
        (self.pdf)(y)
    }

    /// `∫ g(y) p(y) dy` over the support.
    pub fn integrate<G>(&self, g: G, cfg: QuadConfig) -> Result<f64>
    where
        G: Fn(f64) -> f64,
    {
        let (lo, hi) = self.support;
        let r = quad::integrate_fallible(
            |y| {
                let p = self.density(y)?;
                Ok(if p == 0.0 { 0.0 } else { g(y) * p })
            },
            lo,
            hi,
            cfg.pieces(cfg.initial_pieces.max(self.pieces)),
        )?;
        Ok(r.value)
    }

    pub fn total_mass(&self, cfg: QuadConfig) -> Result<f64> {
        self.integrate(|_| 1.0, cfg)
    }

    pub fn mean(&self, cfg: QuadConfig) -> Result<f64> {
        self.integrate(|y| y, cfg)
    }

    fn table(&self) -> Result<&CdfTable> {
        self.table
            .get_or_init(|| self.build_table().map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| Error::propagation(format!("cdf table of {}", self.name), e.clone()))
    }

    fn build_table(&self) -> Result<CdfTable> {
        let (lo, hi) = self.support;
        let width = (hi - lo) / CDF_CELLS as f64;
        let edges: Vec<f64> = (0..=CDF_CELLS)
            .map(|i| if i == CDF_CELLS { hi } else { lo + width * i as f64 })
            .collect();
        let mut cumulative = Vec::with_capacity(CDF_CELLS + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in edges.windows(2) {
            acc += self.cell_mass(w[0], w[1])?;
            cumulative.push(acc);
        }
        Ok(CdfTable { edges, cumulative })
    }

    fn cell_mass(&self, a: f64, b: f64) -> Result<f64> {
        Ok(quad::integrate_fallible(|y| self.density(y), a, b, QuadConfig::with_tol(CELL_TOL))?.value)
    }

    /// Normalized cumulative distribution, from a cached cell table.
    pub fn cdf(&self, y: f64) -> Result<f64> {
        let (lo, hi) = self.support;
        if y <= lo {
            return Ok(0.0);
        }
        if y >= hi {
            return Ok(1.0);
        }
        let t = self.table()?;
        let k = t.edges.partition_point(|&e| e <= y) - 1;
        let total = t.cumulative[CDF_CELLS];
        Ok((t.cumulative[k] + self.cell_mass(t.edges[k], y)?) / total)
    }

    /// Quantile by safeguarded Newton inside the table cell holding `u`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(u));
        }
        let t = self.table()?;
        let target = u * t.cumulative[CDF_CELLS];
        let k = (t.cumulative.partition_point(|&c| c < target).max(1) - 1).min(CDF_CELLS - 1);
        let (mut a, mut b) = (t.edges[k], t.edges[k + 1]);
        let base = t.cumulative[k];
        let cell_lo = a;
        let mut y = a + (b - a) * ((target - base) / (t.cumulative[k + 1] - base)).clamp(0.0, 1.0);
        for _ in 0..100 {
            let g = base + self.cell_mass(cell_lo, y)? - target;
            if g == 0.0 {
                break;
            }
            if g < 0.0 {
                a = y;
            } else {
                b = y;
            }
            let p = self.density(y)?;
            let newton = y - g / p;
            let next = if p > 0.0 && newton > a && newton < b {
                newton
            } else {
                0.5 * (a + b)
            };
            let done = (next - y).abs() <= 4.0 * f64::EPSILON * y.abs().max(1e-300);
            y = next;
            if done || b - a <= 4.0 * f64::EPSILON * y.abs().max(1e-300) {
                break;
            }
        }
        Ok(y)
    }
}

impl Quantile for AnalyticDensity {
    fn quantile(&self, u: f64) -> Result<f64> {
        AnalyticDensity::quantile(self, u)
    }

    fn label(&self) -> String {
        self.name.clone()
    }
}

/// Density of `Y = t(X)` for an invertible, differentiable, monotone `t`.
pub fn pushforward_density(dist: &ParametricDist, t: &Transform) -> Result<AnalyticDensity> {
    if dist.is_discrete() {
        return Err(Error::argument("pushforward of a discrete distribution has no density"));
    }
    if !t.has_inverse() || !t.has_derivative() || t.monotonicity() == Monotonicity::NonMonotone {
        return Err(Error::UnsupportedTransform(t.name().to_string()));
    }
    let (lo, hi) = dist.effective_support();
    let (mut a, mut b) = (t.apply(lo), t.apply(hi));
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    // A bounded codomain is the support itself; the density is zero wherever
    // the source has no mass.
    if let Some((clo, chi)) = t.codomain() {
        if clo.is_finite() {
            a = clo;
        }
        if chi.is_finite() {
            b = chi;
        }
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::argument(format!("pushforward support [{a}, {b}] is not finite")));
    }
    let d = dist.clone();
    let tt = t.clone();
    let name = format!("{}∘{}", t.name(), dist.id());
    let mut out = AnalyticDensity::new(name, (a, b), move |y| {
        let x = tt.inverse(y).expect("checked above");
        let px = d.pdf(x);
        if px == 0.0 {
            return Ok(0.0);
        }
        let slope = tt.derivative(x).expect("checked above");
        if slope == 0.0 || !slope.is_finite() {
            return Err(Error::Singularity(format!(
                "derivative of {} is {slope} at x = {x} (y = {y})",
                tt.name()
            )));
        }
        Ok(px / slope.abs())
    });
    out.pieces = dist.default_pieces().max(256);
    Ok(out)
}

/// Closed-form output density of the convergence-challenge application,
/// written out term by term rather than through [`pushforward_density`].
///
/// With `L = logit(y) = 1 + ln(y/(1−y))`:
/// `p(y) = [0.6·φ(L; 2, 0.5) + 0.4·φ(L; −1, 1)] · |e^{1−L} / (e^{1−L} + 1)²|^{−1}`.
pub fn convergence_output_density() -> AnalyticDensity {
    let norm = 1.0 / (2.0 * PI).sqrt();
    let mut out = AnalyticDensity::new("convergence-output", (0.0, 1.0), move |y: f64| {
        let l = 1.0 + (y / (1.0 - y)).ln();
        let mixture =
            0.6 * (norm / 0.5) * (-2.0 * (l - 2.0).powi(2)).exp() + 0.4 * norm * (-(l + 1.0).powi(2) / 2.0).exp();
        if mixture == 0.0 {
            return Ok(0.0);
        }
        let e = (1.0 - l).exp();
        let jacobian = e / (e + 1.0).powi(2);
        Ok(mixture / jacobian.abs())
    });
    out.pieces = 512;
    out
}
