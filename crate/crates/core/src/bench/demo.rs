//! The smaller CLI demonstrations: Buffon's needle, the pushforward
//! triptych and the generator fits.

use std::sync::Arc;

use crate::app::AppId;
use crate::density::convergence_output_density;
use crate::dist::ParametricDist;
use crate::error::{Error, Result};
use crate::mc::{buffon_estimate, sample_icdf};
use crate::metrics::wasserstein1;
use crate::pprvg::grappa::{build_basis, fit_icdf, gfet_family, grappa_sample, DEFAULT_GRID};
use crate::pprvg::spot::{spot_sample, NoiseSource, SpotProgram};
use crate::rng::RngHandle;
use crate::transform::Transform;

use super::plot::{Axis, Svg, PALETTE};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuffonReport {
    pub n: usize,
    pub estimate: f64,
    pub error: f64,
    /// Three binomial standard errors at `p = 2/π`.
    pub tolerance: f64,
}

pub fn buffon(n: usize, seed: u64) -> Result<BuffonReport> {
    let estimate = buffon_estimate(&mut RngHandle::seeded(seed), n)?;
    let p = std::f64::consts::FRAC_2_PI;
    Ok(BuffonReport {
        n,
        estimate,
        error: estimate - p,
        tolerance: 3.0 * (p * (1.0 - p) / n as f64).sqrt(),
    })
}

/// Local maxima of `f` on a uniform grid over `(lo, hi)`.
pub fn grid_maxima(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let xs: Vec<f64> = (1..points).map(|i| lo + (hi - lo) * i as f64 / points as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    (1..xs.len() - 1)
        .filter(|&i| ys[i] > ys[i - 1] && ys[i] >= ys[i + 1])
        .map(|i| xs[i])
        .collect()
}

/// Input density, transform and analytic output density side by side.
pub fn pushforward_svg(app: AppId) -> Result<String> {
    if app != AppId::ConvergenceChallenge {
        return Err(Error::argument(format!(
            "pushforward plot needs a single-input monotone application, not `{app}`"
        )));
    }
    let input = ParametricDist::convergence_challenge_input();
    let t = Transform::sigmoid();
    let output = convergence_output_density();
    let npts = 400;
    let (xlo, xhi) = (-4.0, 5.0);
    let xs: Vec<f64> = (0..=npts).map(|i| xlo + (xhi - xlo) * i as f64 / npts as f64).collect();
    let ys: Vec<f64> = (1..npts).map(|i| i as f64 / npts as f64).collect();
    // (title, x label, y label, points)
    type Panel = (&'static str, &'static str, &'static str, Vec<(f64, f64)>);
    let panels: [Panel; 3] = [
        (
            "input density",
            "x",
            "p_X(x)",
            xs.iter().map(|&x| (x, input.pdf(x))).collect(),
        ),
        ("transform", "x", "f(x)", xs.iter().map(|&x| (x, t.apply(x))).collect()),
        (
            "output density",
            "y",
            "p_Y(y)",
            ys.iter().map(|&y| Ok((y, output.density(y)?))).collect::<Result<_>>()?,
        ),
    ];
    let (pw, ph, gap) = (300.0, 260.0, 80.0);
    let mut svg = Svg::new(3.0 * (pw + gap) + 40.0, ph + 110.0);
    for (k, (title, xl, yl, pts)) in panels.iter().enumerate() {
        let left = 70.0 + k as f64 * (pw + gap);
        let x = Axis::fit(pts.iter().map(|p| p.0), false, left, left + pw);
        let y = Axis::fit(pts.iter().map(|p| p.1).chain([0.0]), false, 40.0 + ph, 40.0);
        svg.text(left + 0.5 * pw, 26.0, 13.0, "middle", title);
        svg.axes(&x, &y, xl, yl);
        let mapped: Vec<(f64, f64)> = pts.iter().map(|&(a, b)| (x.map(a), y.map(b))).collect();
        svg.polyline(&mapped, PALETTE[k], 1.5);
    }
    Ok(svg.finish())
}

pub fn named_target(name: &str) -> Result<ParametricDist> {
    match name {
        "uniform" => ParametricDist::uniform(0.0, 1.0),
        "gaussian" => ParametricDist::gaussian(0.0, 1.0),
        "lognormal" => ParametricDist::lognormal(0.0, 1.0),
        "exponential" => ParametricDist::exponential(1.0),
        "mixture" | "convergence-challenge" => Ok(ParametricDist::convergence_challenge_input()),
        other => Err(Error::argument(format!(
            "unknown target `{other}` (expected uniform, gaussian, lognormal, exponential or mixture)"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PprvgFitReport {
    pub target: String,
    pub k: usize,
    pub residual: f64,
    pub monotonicity_defect: f64,
    pub grappa_w1: f64,
    /// `None` when Spot cannot be programmed for the target.
    pub spot_w1: Option<f64>,
    /// W1 between two independent quantile-sampled sets of the same size.
    pub noise_floor_w1: f64,
    pub n: usize,
}

/// Fits Grappa with `k` surrogate responses and, where possible, programs
/// Spot; reports sample quality against direct quantile sampling.
pub fn pprvg_fit(target_name: &str, k: usize, n: usize, seed: u64) -> Result<PprvgFitReport> {
    let target = named_target(target_name)?;
    if k == 0 || k > gfet_family(usize::MAX).len() {
        return Err(Error::argument(format!(
            "K must be between 1 and {}",
            gfet_family(usize::MAX).len()
        )));
    }
    let basis = Arc::new(build_basis(&gfet_family(k), k, DEFAULT_GRID)?);
    let approx = fit_icdf(basis, &target)?;
    let reference = sample_icdf(&mut RngHandle::seeded(seed), &target, n)?;
    let other = sample_icdf(&mut RngHandle::seeded(seed ^ 0x5EED), &target, n)?;
    let grappa = grappa_sample(&approx, &mut RngHandle::seeded(seed.wrapping_add(1)), n);
    let spot_w1 = match SpotProgram::for_target(&target, 0.0, 1.0) {
        Ok(prog) => {
            let mut src = NoiseSource::standard(seed.wrapping_add(2));
            let s = spot_sample(&mut src, &prog, &mut RngHandle::seeded(seed.wrapping_add(3)), n)?;
            Some(wasserstein1(&s, &reference)?.distance)
        }
        Err(_) => None,
    };
    Ok(PprvgFitReport {
        target: target.id(),
        k,
        residual: approx.residual(),
        monotonicity_defect: approx.monotonicity_defect(),
        grappa_w1: wasserstein1(&grappa, &reference)?.distance,
        spot_w1,
        noise_floor_w1: wasserstein1(&other, &reference)?.distance,
        n,
    })
}
