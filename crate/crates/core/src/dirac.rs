//! Fixed-size Dirac-mixture representation of a distribution.
//!
//! A [`DiracMixture`] holds `r` weighted point masses sorted by position.
//! Construction from a parametric distribution places `r` equal-mass atoms at
//! the midpoint quantiles `F⁻¹((i − ½)/r)`. Unary maps move atoms without
//! touching masses; binary operations on independent operands form the
//! `r₁·r₂` product atoms and [`requantize`] folds them back to `r`
//! equal-mass atoms while conserving total mass and the mean.
//!
//! Everything here is deterministic: the same inputs give bit-identical atoms.

use std::io::Write;

use crate::dist::Quantile;
use crate::error::{Error, Result};
use crate::mc::{CompensatedSum, Provenance, SampleSet, SummaryStats};
use crate::rng::RngHandle;
use crate::transform::Transform;

pub const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub position: f64,
    pub mass: f64,
}

impl Atom {
    pub const fn new(position: f64, mass: f64) -> Self {
        Self { position, mass }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => a / b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiracMixture {
    atoms: Vec<Atom>,
}

impl DiracMixture {
    /// Validates sortedness, positivity and unit total mass.
    pub fn from_atoms(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::argument("a Dirac mixture needs at least one atom"));
        }
        let mut total = CompensatedSum::default();
        for (i, a) in atoms.iter().enumerate() {
            if !a.position.is_finite() {
                return Err(Error::propagation(format!("atom {i}"), "position is not finite"));
            }
            if !(a.mass > 0.0) {
                return Err(Error::argument(format!("atom {i} has non-positive mass {}", a.mass)));
            }
            if i > 0 && atoms[i - 1].position > a.position {
                return Err(Error::argument(format!("atom {i} is out of order")));
            }
            total.add(a.mass);
        }
        if (total.value() - 1.0).abs() > MASS_TOL {
            return Err(Error::argument(format!(
                "atom masses sum to {}, expected 1",
                total.value()
            )));
        }
        Ok(Self { atoms })
    }

    /// A point mass.
    pub fn point(position: f64) -> Self {
        Self {
            atoms: vec![Atom::new(position, 1.0)],
        }
    }

    /// Equal-mass atoms at the midpoint quantiles of `dist`.
    pub fn from_dist<D: Quantile + ?Sized>(dist: &D, r: usize) -> Result<Self> {
        if r < 2 {
            return Err(Error::argument(format!("representation size must be >= 2, got {r}")));
        }
        let mass = 1.0 / r as f64;
        let mut atoms = Vec::with_capacity(r);
        for i in 0..r {
            let u = (i as f64 + 0.5) / r as f64;
            atoms.push(Atom::new(dist.quantile(u)?, mass));
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Representation size.
    pub fn r(&self) -> usize {
        self.atoms.len()
    }

    pub fn mean(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.mass * a.position)
            .collect::<CompensatedSum>()
            .value()
    }

    /// Population moments of the discrete measure.
    pub fn moments(&self) -> SummaryStats {
        let mean = self.mean();
        let variance = self
            .atoms
            .iter()
            .map(|a| a.mass * (a.position - mean).powi(2))
            .collect::<CompensatedSum>()
            .value();
        SummaryStats {
            mean,
            variance,
            count: self.atoms.len(),
        }
    }

    /// Moves every atom through `t` and re-sorts; masses are unchanged.
    pub fn apply_unary(&self, t: &Transform) -> Result<Self> {
        self.map_positions(|x| t.apply(x), t.name())
    }

    pub(crate) fn map_positions<F: Fn(f64) -> f64>(&self, f: F, what: &str) -> Result<Self> {
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for (i, a) in self.atoms.iter().enumerate() {
            let y = f(a.position);
            if !y.is_finite() {
                return Err(Error::propagation(
                    format!("atom {i} (position {})", a.position),
                    format!("`{what}` produced {y}"),
                ));
            }
            atoms.push(Atom::new(y, a.mass));
        }
        atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
        Ok(Self { atoms })
    }

    /// Inverse transform sampling on the discrete CDF.
    pub fn sample(&self, rng: &mut RngHandle, n: usize) -> Result<SampleSet> {
        if n == 0 {
            return Err(Error::argument("sample count must be at least 1"));
        }
        let mut cumulative = Vec::with_capacity(self.atoms.len());
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.mass;
            cumulative.push(acc);
        }
        let total = acc;
        let last = self.atoms.len() - 1;
        let values = (0..n)
            .map(|_| {
                let u = rng.next_f64() * total;
                let i = cumulative.partition_point(|&c| c <= u).min(last);
                self.atoms[i].position
            })
            .collect();
        Ok(SampleSet::new(
            values,
            Provenance::new(
                rng.algorithm().id(),
                rng.seed(),
                format!("dirac-mixture(r={})", self.r()),
            ),
        ))
    }

    /// Two-column CSV: `position,mass`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "position,mass")?;
        for a in &self.atoms {
            writeln!(w, "{:?},{:?}", a.position, a.mass)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["position", "mass"] {
            return Err(Error::Format(format!("expected header position,mass, got {headers:?}")));
        }
        let mut atoms = Vec::new();
        for rec in rdr.deserialize::<(f64, f64)>() {
            let (position, mass) = rec?;
            atoms.push(Atom::new(position, mass));
        }
        Self::from_atoms(atoms)
    }
}

/// Moments of a mixture; see [`DiracMixture::moments`].
pub fn moments(d: &DiracMixture) -> SummaryStats {
    d.moments()
}

/// `n` draws from the discrete CDF of `d`.
pub fn sample_repr(d: &DiracMixture, rng: &mut RngHandle, n: usize) -> Result<SampleSet> {
    d.sample(rng, n)
}

/// Folds an arbitrary weighted atom list into `r` atoms of mass `1/r`.
///
/// Atoms are stably sorted by position, then the discrete CDF is walked and
/// cut at the multiples of `total/r`; an atom straddling a cut is split. Each
/// output atom sits at the mass-weighted mean of what landed in its bucket,
/// so the overall mean is conserved.
pub fn requantize(mut atoms: Vec<Atom>, r: usize) -> Result<DiracMixture> {
    if atoms.is_empty() {
        return Err(Error::argument("cannot requantize an empty atom list"));
    }
    if r == 0 {
        return Err(Error::argument("representation size must be positive"));
    }
    atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
    let total: f64 = atoms.iter().map(|a| a.mass).collect::<CompensatedSum>().value();
    let target = total / r as f64;
    let snap = MASS_TOL * target;
    let out_mass = 1.0 / r as f64;

    let mut out = Vec::with_capacity(r);
    let mut bucket = Bucket::default();
    for a in &atoms {
        let mut remaining = a.mass;
        while remaining > 0.0 {
            let last_bucket = out.len() + 1 == r;
            let capacity = target - bucket.filled;
            let take = if last_bucket || remaining <= capacity + snap {
                remaining
            } else {
                capacity
            };
            bucket.add(a.position, take);
            remaining -= take;
            if !last_bucket && bucket.filled >= target - snap {
                out.push(Atom::new(bucket.take_position(), out_mass));
            }
        }
    }
    if out.len() < r && bucket.filled > 0.0 {
        out.push(Atom::new(bucket.take_position(), out_mass));
    }
    // Masses rounded away at the very end can leave trailing buckets empty;
    // they belong at the top of the support.
    while out.len() < r {
        let top = atoms.last().expect("non-empty").position;
        out.push(Atom::new(top, out_mass));
    }
    Ok(DiracMixture { atoms: out })
}

#[derive(Default)]
struct Bucket {
    filled: f64,
    moment: CompensatedSum,
    // Position of the single source when a bucket draws from one place only;
    // keeps fixed points bit-exact.
    sole: Option<f64>,
    mixed: bool,
}

impl Bucket {
    fn add(&mut self, position: f64, mass: f64) {
        self.filled += mass;
        self.moment.add(mass * position);
        match self.sole {
            None if !self.mixed => self.sole = Some(position),
            Some(x) if x != position => self.mixed = true,
            _ => {}
        }
    }

    fn take_position(&mut self) -> f64 {
        let position = match (self.mixed, self.sole) {
            (false, Some(x)) => x,
            _ => self.moment.value() / self.filled,
        };
        *self = Self::default();
        position
    }
}

/// Combines independent operands atom-by-atom and requantizes to `r`.
pub fn combine(d1: &DiracMixture, d2: &DiracMixture, op: BinaryOp, r: usize) -> Result<DiracMixture> {
    if op == BinaryOp::Div {
        if let Some(i) = d2.atoms.iter().position(|a| a.position == 0.0) {
            return Err(Error::Singularity(format!("divisor atom {i} is at 0")));
        }
    }
    let mut product = Vec::with_capacity(d1.atoms.len() * d2.atoms.len());
    for (i, a) in d1.atoms.iter().enumerate() {
        for (j, b) in d2.atoms.iter().enumerate() {
            let x = op.apply(a.position, b.position);
            if !x.is_finite() {
                return Err(Error::propagation(
                    format!("atoms ({i}, {j})"),
                    format!("{} {} {} = {x}", a.position, op.symbol(), b.position),
                ));
            }
            product.push(Atom::new(x, a.mass * b.mass));
        }
    }
    requantize(product, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::ParametricDist;

    fn two_point(a: f64, b: f64) -> DiracMixture {
        DiracMixture::from_atoms(vec![Atom::new(a, 0.5), Atom::new(b, 0.5)]).unwrap()
    }

    #[test]
    fn uniform_midpoint_quantiles() {
        let d = DiracMixture::from_dist(&ParametricDist::uniform(0.0, 1.0).unwrap(), 4).unwrap();
        let pos: Vec<f64> = d.atoms().iter().map(|a| a.position).collect();
        assert_eq!(pos, [0.125, 0.375, 0.625, 0.875]);
        assert!(d.atoms().iter().all(|a| a.mass == 0.25));
        assert!(DiracMixture::from_dist(&ParametricDist::uniform(0.0, 1.0).unwrap(), 1).is_err());
    }

    #[test]
    fn gaussian_atoms_are_centred() {
        for r in [64, 100, 256] {
            let d = DiracMixture::from_dist(&ParametricDist::gaussian(2.0, 3.0).unwrap(), r).unwrap();
            assert!((d.mean() - 2.0).abs() < 3.0 * 1e-3);
        }
    }

    #[test]
    fn apply_unary_examples() {
        let d = two_point(0.0, 1.0);
        let out = d.apply_unary(&Transform::affine(2.0, 3.0)).unwrap();
        assert_eq!(out.atoms(), [Atom::new(3.0, 0.5), Atom::new(5.0, 0.5)]);
        let sq = two_point(-1.0, 1.0).apply_unary(&Transform::square()).unwrap();
        assert_eq!(sq.atoms(), [Atom::new(1.0, 0.5), Atom::new(1.0, 0.5)]);
        let neg = two_point(0.0, 1.0).apply_unary(&Transform::affine(-1.0, 0.0)).unwrap();
        assert_eq!(neg.atoms()[0].position, -1.0);
    }

    #[test]
    fn apply_unary_reports_failing_atom() {
        let d = two_point(0.0, 1.0);
        let err = d.apply_unary(&Transform::new(
            "ln",
            f64::ln,
            crate::transform::Monotonicity::Increasing,
        ));
        assert!(err.unwrap_err().to_string().contains("atom 0"));
    }

    #[test]
    fn combine_examples() {
        let out = combine(&DiracMixture::point(2.0), &DiracMixture::point(3.0), BinaryOp::Add, 1).unwrap();
        assert_eq!(out.atoms(), [Atom::new(5.0, 1.0)]);

        let g = DiracMixture::from_dist(&ParametricDist::gaussian(0.0, 1.0).unwrap(), 256).unwrap();
        let s = combine(&g, &g.clone(), BinaryOp::Add, 256).unwrap().moments();
        assert!(s.mean.abs() < 1e-9);
        assert!((s.variance - 2.0).abs() < 0.05, "{}", s.variance);

        let u = DiracMixture::from_dist(&ParametricDist::uniform(1.0, 2.0).unwrap(), 256).unwrap();
        let m = combine(&u, &u.clone(), BinaryOp::Mul, 256).unwrap().mean();
        assert!((m - 2.25).abs() < 0.01);
    }

    #[test]
    fn division_by_atom_at_zero() {
        let d = two_point(0.0, 1.0);
        assert!(matches!(
            combine(&two_point(1.0, 2.0), &d, BinaryOp::Div, 2),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn overflow_is_a_propagation_error() {
        let big = two_point(1e300, 2e300);
        assert!(matches!(
            combine(&big, &big.clone(), BinaryOp::Mul, 2),
            Err(Error::Propagation { .. })
        ));
    }

    #[test]
    fn requantize_examples() {
        let d = DiracMixture::from_dist(&ParametricDist::convergence_challenge_input(), 32).unwrap();
        let again = requantize(d.atoms().to_vec(), 32).unwrap();
        assert_eq!(again, d);

        let out = requantize(vec![Atom::new(0.0, 0.5), Atom::new(10.0, 0.5)], 1).unwrap();
        assert_eq!(out.atoms(), [Atom::new(5.0, 1.0)]);
        assert!(requantize(vec![], 4).is_err());
    }

    #[test]
    fn requantize_splits_straddling_atoms() {
        // Three equal atoms into two buckets: the middle one is split in half.
        let third = 1.0 / 3.0;
        let out = requantize(
            vec![Atom::new(0.0, third), Atom::new(3.0, third), Atom::new(6.0, third)],
            2,
        )
        .unwrap();
        assert!((out.atoms()[0].position - 1.0).abs() < 1e-12);
        assert!((out.atoms()[1].position - 5.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs_collapse() {
        let out = requantize(vec![Atom::new(7.0, 0.25); 4], 3).unwrap();
        assert_eq!(out.r(), 3);
        assert!(out.atoms().iter().all(|a| a.position == 7.0));
        let out = requantize(vec![Atom::new(7.0, 1.0)], 5).unwrap();
        assert_eq!(out.r(), 5);
    }

    #[test]
    fn moments_example() {
        let s = two_point(1.0, 3.0).moments();
        assert_eq!((s.mean, s.variance), (2.0, 1.0));
    }

    #[test]
    fn sampling_a_point_mass() {
        let s = DiracMixture::point(7.0).sample(&mut RngHandle::seeded(1), 100).unwrap();
        assert!(s.values().iter().all(|&v| v == 7.0));
    }

    #[test]
    fn csv_round_trip() {
        let d = DiracMixture::from_dist(&ParametricDist::gaussian(0.1, 0.3).unwrap(), 16).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"position,mass\n"));
        assert_eq!(DiracMixture::read_csv(buf.as_slice()).unwrap(), d);
    }

    #[test]
    fn from_atoms_validation() {
        assert!(DiracMixture::from_atoms(vec![Atom::new(1.0, 0.5), Atom::new(0.0, 0.5)]).is_err());
        assert!(DiracMixture::from_atoms(vec![Atom::new(0.0, 0.6), Atom::new(1.0, 0.5)]).is_err());
        assert!(DiracMixture::from_atoms(vec![Atom::new(0.0, 0.0), Atom::new(1.0, 1.0)]).is_err());
    }
}
