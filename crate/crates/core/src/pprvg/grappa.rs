use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use crate::dist::Quantile;
use crate::error::{Error, Result};
use crate::mc::{Provenance, SampleSet};
use crate::rng::RngHandle;

pub const DEFAULT_GRID: usize = 4096;

/// Relative norm below which a response counts as dependent on earlier ones.
const DEPENDENCE_TOL: f64 = 1e-10;

/// A device transfer characteristic `g(u)` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    Constant(f64),
    /// `uᵏ`.
    Monomial(i32),
    /// `tanh(slope·(u − center))`, a saturating transfer curve.
    Tanh {
        center: f64,
        slope: f64,
    },
    /// `ln(u + knee)`; steep near 0, saturating above the knee.
    LogSat {
        knee: f64,
    },
    /// `−ln(1 − u + knee)`; the mirror image of `LogSat`.
    LogSatUpper {
        knee: f64,
    },
    /// Piecewise-linear interpolation of measured `(u, g)` pairs.
    Table {
        u: Arc<[f64]>,
        g: Arc<[f64]>,
    },
}

impl Response {
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Response::Constant(c) => *c,
            Response::Monomial(k) => u.powi(*k),
            Response::Tanh { center, slope } => (slope * (u - center)).tanh(),
            Response::LogSat { knee } => (u + knee).ln(),
            Response::LogSatUpper { knee } => -(1.0 - u + knee).ln(),
            Response::Table { u: xs, g } => interpolate(xs, g, u),
        }
    }

    pub fn table(u: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if u.len() < 2 || u.len() != g.len() {
            return Err(Error::Format(format!(
                "response table needs at least two (u, g) rows, got {} and {}",
                u.len(),
                g.len()
            )));
        }
        if u.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Format(
                "response table u column must be strictly increasing".into(),
            ));
        }
        if u.iter().chain(&g).any(|v| !v.is_finite()) {
            return Err(Error::Format("response table contains non-finite values".into()));
        }
        Ok(Response::Table {
            u: u.into(),
            g: g.into(),
        })
    }

    /// Two-column CSV with header `u,g`.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let (mut u, mut g) = (Vec::new(), Vec::new());
        for rec in rdr.deserialize::<(f64, f64)>() {
            let (a, b) = rec?;
            u.push(a);
            g.push(b);
        }
        Self::table(u, g)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = xs.partition_point(|&v| v <= x);
    let (x0, x1, y0, y1) = (xs[i - 1], xs[i], ys[i - 1], ys[i]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// The built-in surrogate device family. Prefixes are nested: the first
/// `k` entries of `gfet_family(k + 1)` equal `gfet_family(k)`.
pub fn gfet_family(k: usize) -> Vec<Response> {
    const FAMILY: [Response; 12] = [
        Response::Constant(1.0),
        Response::Monomial(1),
        Response::Tanh {
            center: 0.5,
            slope: 6.0,
        },
        Response::LogSat { knee: 1e-3 },
        Response::LogSatUpper { knee: 1e-3 },
        Response::Tanh {
            center: 0.15,
            slope: 12.0,
        },
        Response::Tanh {
            center: 0.85,
            slope: 12.0,
        },
        Response::LogSat { knee: 1e-5 },
        Response::LogSatUpper { knee: 1e-5 },
        Response::Tanh {
            center: 0.5,
            slope: 20.0,
        },
        Response::Tanh {
            center: 0.03,
            slope: 40.0,
        },
        Response::Tanh {
            center: 0.97,
            slope: 40.0,
        },
    ];
    FAMILY.iter().take(k).cloned().collect()
}

/// `1, u, u², …, u^{k−1}`.
pub fn polynomial_family(k: usize) -> Vec<Response> {
    (0..k as i32)
        .map(|d| {
            if d == 0 {
                Response::Constant(1.0)
            } else {
                Response::Monomial(d)
            }
        })
        .collect()
}

fn midpoints(q: usize) -> impl Iterator<Item = f64> {
    (0..q).map(move |k| (k as f64 + 0.5) / q as f64)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / a.len() as f64
}

/// Orthonormal basis `e₁..e_K` spanning the first `K` responses under the
/// midpoint-rule inner product on `Q` points.
#[derive(Debug, Clone)]
pub struct GalerkinBasis {
    responses: Vec<Response>,
    q: usize,
    /// Row `i` expresses `eᵢ` in the raw responses: `eᵢ = Σⱼ coeffs[i][j]·gⱼ`.
    coeffs: Vec<Vec<f64>>,
    grid: Vec<Vec<f64>>,
    condition: f64,
}

impl GalerkinBasis {
    pub fn k(&self) -> usize {
        self.coeffs.len()
    }

    pub fn grid_size(&self) -> usize {
        self.q
    }

    pub fn responses(&self) -> &[Response] {
        &self.responses
    }

    /// `eᵢ` at the grid midpoints.
    pub fn grid_values(&self, i: usize) -> &[f64] {
        &self.grid[i]
    }

    pub fn eval(&self, i: usize, u: f64) -> f64 {
        self.coeffs[i]
            .iter()
            .zip(&self.responses)
            .map(|(c, g)| c * g.eval(u))
            .sum()
    }

    /// `⟨eᵢ, eⱼ⟩` under the grid inner product.
    pub fn inner(&self, i: usize, j: usize) -> f64 {
        dot(&self.grid[i], &self.grid[j])
    }

    /// Estimate of the Gram-matrix condition number of the raw responses,
    /// from the spread of the Gram-Schmidt pivots.
    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
pub fn build_basis(responses: &[Response], k: usize, q: usize) -> Result<GalerkinBasis> {
    if k == 0 || k > responses.len() {
        return Err(Error::argument(format!(
            "basis size {k} must be between 1 and the number of responses ({})",
            responses.len()
        )));
    }
    if q == 0 {
        return Err(Error::argument("quadrature grid needs at least one point"));
    }
    let responses = responses[..k].to_vec();
    let mut grid: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(k);
    let (mut pivot_min, mut pivot_max) = (f64::INFINITY, 0.0f64);
    for (i, g) in responses.iter().enumerate() {
        let mut v: Vec<f64> = midpoints(q).map(|u| g.eval(u)).collect();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::argument(format!("response {i} is not finite on the grid")));
        }
        let mut c = vec![0.0; k];
        c[i] = 1.0;
        let raw_norm = dot(&v, &v).sqrt();
        for _pass in 0..2 {
            for (e, ce) in grid.iter().zip(&coeffs) {
                let p = dot(&v, e);
                v.iter_mut().zip(e).for_each(|(x, y)| *x -= p * y);
                c.iter_mut().zip(ce).for_each(|(x, y)| *x -= p * y);
            }
        }
        let norm = dot(&v, &v).sqrt();
        let rel = if raw_norm > 0.0 { norm / raw_norm } else { 0.0 };
        if !(rel > DEPENDENCE_TOL) {
            return Err(Error::DependentBasis { index: i, norm: rel });
        }
        pivot_min = pivot_min.min(norm);
        pivot_max = pivot_max.max(norm);
        v.iter_mut().for_each(|x| *x /= norm);
        c.iter_mut().for_each(|x| *x /= norm);
        grid.push(v);
        coeffs.push(c);
    }
    Ok(GalerkinBasis {
        responses,
        q,
        coeffs,
        grid,
        condition: (pivot_max / pivot_min).powi(2),
    })
}

/// A Galerkin approximation `Σ cᵢ eᵢ(u)` of a quantile function.
#[derive(Debug, Clone)]
pub struct IcdfApprox {
    coefficients: Vec<f64>,
    /// Same function expressed over the raw responses, for sampling.
    raw: Vec<f64>,
    basis: Arc<GalerkinBasis>,
    residual: f64,
    target: String,
    monotonicity_defect: f64,
}

impl IcdfApprox {
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn basis(&self) -> &GalerkinBasis {
        &self.basis
    }

    /// Root-mean-square error against the target quantile on the grid.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    /// Largest drop between consecutive grid values; 0 means the
    /// approximation is nondecreasing on the grid.
    pub fn monotonicity_defect(&self) -> f64 {
        self.monotonicity_defect
    }

    pub fn is_monotone(&self) -> bool {
        self.monotonicity_defect == 0.0
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        self.raw
            .iter()
            .zip(&self.basis.responses)
            .map(|(c, g)| c * g.eval(u))
            .sum()
    }
}

/// Projects the target's quantile function onto the basis. The grid is the
/// set of cell midpoints, so the endpoints `0` and `1` are never evaluated
/// and the fit is restricted to `[1/(2Q), 1 − 1/(2Q)]`.
pub fn fit_icdf<D: Quantile + ?Sized>(basis: Arc<GalerkinBasis>, target: &D) -> Result<IcdfApprox> {
    let f = midpoints(basis.q)
        .map(|u| {
            let x = target.quantile(u)?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(Error::propagation(
                    format!("u = {u}"),
                    format!("quantile of {} is {x}", target.label()),
                ))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let coefficients: Vec<f64> = basis.grid.iter().map(|e| dot(&f, e)).collect();
    let mut fitted = vec![0.0; basis.q];
    for (c, e) in coefficients.iter().zip(&basis.grid) {
        fitted.iter_mut().zip(e).for_each(|(y, v)| *y += c * v);
    }
    let err: Vec<f64> = f.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let residual = dot(&err, &err).sqrt();
    let monotonicity_defect = fitted.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
    let mut raw = vec![0.0; basis.k()];
    for (c, row) in coefficients.iter().zip(&basis.coeffs) {
        raw.iter_mut().zip(row).for_each(|(r, v)| *r += c * v);
    }
    Ok(IcdfApprox {
        coefficients,
        raw,
        basis,
        residual,
        target: target.label(),
        monotonicity_defect,
    })
}

/// Inverse transform sampling through the fitted quantile. Each variate
/// costs the same `K` response evaluations whatever the target.
pub fn grappa_sample(approx: &IcdfApprox, rng: &mut RngHandle, n: usize) -> SampleSet {
    let values = (0..n).map(|_| approx.eval(rng.next_f64())).collect();
    SampleSet::new(
        values,
        Provenance::new(
            rng.algorithm().id(),
            rng.seed(),
            format!("grappa[{}](K={})", approx.target, approx.basis.k()),
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::ParametricDist;

    #[test]
    fn constant_and_linear_basis() {
        // Under the midpoint rule Var(u) = (1 − 1/Q²)/12, so the normalized
        // linear term is √12·(u − ½) only up to O(1/Q²).
        let q = DEFAULT_GRID;
        let b = build_basis(&polynomial_family(2), 2, q).unwrap();
        let discrete = (12.0 / (1.0 - 1.0 / (q * q) as f64)).sqrt();
        for u in [0.1, 0.5, 0.93] {
            assert!((b.eval(0, u) - 1.0).abs() < 1e-8);
            assert!((b.eval(1, u) - discrete * (u - 0.5)).abs() < 1e-8);
        }
        let fine = build_basis(&polynomial_family(2), 2, 4 * q).unwrap();
        for u in [0.0, 0.1, 0.5, 0.93, 1.0] {
            assert!((fine.eval(1, u) - 12f64.sqrt() * (u - 0.5)).abs() < 1e-8);
        }
        let c = build_basis(&[Response::Constant(2.0)], 1, 64).unwrap();
        assert!((c.eval(0, 0.3) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicates_are_dependent() {
        let r = [Response::Monomial(1), Response::Monomial(1)];
        assert!(matches!(
            build_basis(&r, 2, 256),
            Err(Error::DependentBasis { index: 1, .. })
        ));
    }

    #[test]
    fn orthonormal_on_grid() {
        for family in [gfet_family(12), polynomial_family(8)] {
            let k = family.len();
            let b = build_basis(&family, k, DEFAULT_GRID).unwrap();
            for i in 0..k {
                for j in 0..k {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((b.inner(i, j) - want).abs() < 1e-8, "({i},{j}) {}", b.inner(i, j));
                }
            }
            assert!(b.condition_estimate() >= 1.0);
        }
    }

    #[test]
    fn uniform_icdf_is_in_span() {
        let b = Arc::new(build_basis(&gfet_family(2), 2, DEFAULT_GRID).unwrap());
        let a = fit_icdf(b, &ParametricDist::uniform(0.0, 1.0).unwrap()).unwrap();
        assert!(a.residual() <= 1e-8);
        assert!(a.is_monotone());
        assert!((a.eval(0.3) - 0.3).abs() < 1e-10);
    }

    #[test]
    fn nested_residuals_do_not_grow() {
        let g = ParametricDist::gaussian(0.0, 1.0).unwrap();
        for family in [polynomial_family(8), gfet_family(8)] {
            let mut prev = f64::INFINITY;
            for k in 1..=8 {
                let b = Arc::new(build_basis(&family, k, DEFAULT_GRID).unwrap());
                let r = fit_icdf(b, &g).unwrap().residual();
                assert!(r <= prev, "K={k}: {r} > {prev}");
                prev = r;
            }
        }
    }

    #[test]
    fn table_responses_interpolate() {
        let csv = "u,g\n0,0\n0.5,1\n1,3\n";
        let r = Response::read_csv(csv.as_bytes()).unwrap();
        assert_eq!(r.eval(0.25), 0.5);
        assert_eq!(r.eval(0.75), 2.0);
        assert!(Response::read_csv("u,g\n0,0\n".as_bytes()).is_err());
        assert!(Response::read_csv("u,g\n0.5,0\n0.1,1\n".as_bytes()).is_err());
    }

    #[test]
    fn sampling() {
        let b = Arc::new(build_basis(&gfet_family(8), 8, DEFAULT_GRID).unwrap());
        let a = fit_icdf(b, &ParametricDist::lognormal(0.0, 1.0).unwrap()).unwrap();
        assert!(grappa_sample(&a, &mut RngHandle::seeded(1), 0).is_empty());
        let s1 = grappa_sample(&a, &mut RngHandle::seeded(42), 1000);
        let s2 = grappa_sample(&a, &mut RngHandle::seeded(42), 1000);
        assert_eq!(s1.values(), s2.values());
    }
}
