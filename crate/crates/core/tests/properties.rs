use std::collections::HashMap;

use proptest::prelude::*;

use mcprop::dirac::{combine, requantize, Atom, BinaryOp, DiracMixture};
use mcprop::dist::{MixtureComponent, ParametricDist};
use mcprop::expr::{self, eval_expr};
use mcprop::mc::{sample_gaussian, sample_icdf, sample_uniform, SampleSet};
use mcprop::metrics::{time_block, wasserstein1};
use mcprop::pprvg::grappa::{build_basis, fit_icdf, gfet_family, DEFAULT_GRID};
use mcprop::pprvg::spot::{spot_sample, NoiseSource, SpotProgram};
use mcprop::quad::{integrate, QuadConfig};
use mcprop::rng::RngHandle;
use mcprop::transform::Transform;

fn mixture() -> impl Strategy<Value = ParametricDist> {
    prop::collection::vec((0.1f64..1.0, -5.0f64..5.0, 0.2f64..3.0), 1..4).prop_map(|raw| {
        let total: f64 = raw.iter().map(|c| c.0).sum();
        let mut comps: Vec<MixtureComponent> = raw
            .iter()
            .map(|&(w, m, s)| MixtureComponent::new(w / total, m, s))
            .collect();
        // Absorb rounding so the weights sum to one to the last bit we can.
        let rest: f64 = comps[1..].iter().map(|c| c.weight).sum();
        comps[0].weight = 1.0 - rest;
        ParametricDist::mixture(comps).unwrap()
    })
}

fn continuous() -> impl Strategy<Value = ParametricDist> {
    prop_oneof![
        (-10.0f64..10.0, 0.01f64..10.0).prop_map(|(a, w)| ParametricDist::uniform(a, a + w).unwrap()),
        (-10.0f64..10.0, 0.05f64..5.0).prop_map(|(m, s)| ParametricDist::gaussian(m, s).unwrap()),
        mixture(),
    ]
}

fn samples(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, 1..max)
}

fn w1(a: &[f64], b: &[f64]) -> f64 {
    wasserstein1(&SampleSet::from_values(a.to_vec()), &SampleSet::from_values(b.to_vec()))
        .unwrap()
        .distance
}

fn atoms(max: usize) -> impl Strategy<Value = Vec<Atom>> {
    prop::collection::vec((0.001f64..50.0, 0.01f64..1.0), 1..max).prop_map(|raw| {
        let total: f64 = raw.iter().map(|a| a.1).sum();
        let mut atoms: Vec<Atom> = raw
            .iter()
            .map(|&(p, m)| Atom {
                position: p,
                mass: m / total,
            })
            .collect();
        atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
        atoms
    })
}

fn weighted_mean(atoms: &[Atom]) -> f64 {
    let total: f64 = atoms.iter().map(|a| a.mass).sum();
    atoms.iter().map(|a| a.position * a.mass).sum::<f64>() / total
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pdf_integrates_to_one(d in continuous()) {
        let (lo, hi) = d.effective_support();
        let mass = integrate(|x| d.pdf(x), lo, hi, QuadConfig::with_tol(1e-12).pieces(64)).unwrap().value;
        prop_assert!((mass - 1.0).abs() <= 1e-9, "{} integrates to {mass}", d.id());
    }

    #[test]
    fn icdf_inverts_cdf(d in continuous(), u in 0.001f64..0.999) {
        let x = d.icdf(u).unwrap();
        prop_assert!((d.cdf(x) - u).abs() <= 1e-8);
        let back = d.icdf(d.cdf(x)).unwrap();
        prop_assert!((back - x).abs() <= 1e-8 * x.abs().max(1.0));
    }

    #[test]
    fn mixture_pdf_is_weighted_sum(d in mixture(), x in -15.0f64..15.0) {
        let mcprop::dist::DistKind::GaussianMixture { components } = d.kind() else { unreachable!() };
        let sum: f64 = components
            .iter()
            .map(|c| c.weight * ParametricDist::gaussian(c.mean, c.std_dev).unwrap().pdf(x))
            .sum();
        prop_assert!(close(d.pdf(x), sum, 1e-14) || (d.pdf(x) - sum).abs() < 1e-300);
    }

    #[test]
    fn transform_inverse_and_derivative(x in -8.0f64..8.0, a in 0.1f64..4.0, b in -3.0f64..3.0) {
        for t in [Transform::sigmoid(), Transform::affine(a, b), Transform::exp()] {
            let y = t.apply(x);
            prop_assert!((t.inverse(y).unwrap() - x).abs() <= 1e-10 * x.abs().max(1.0), "{}", t.name());
            let h = 1e-5 * x.abs().max(1.0);
            let fd = (t.apply(x + h) - t.apply(x - h)) / (2.0 * h);
            prop_assert!(close(t.derivative(x).unwrap(), fd, 1e-6), "{}", t.name());
        }
    }
}

proptest! {
    #[test]
    fn same_seed_same_stream(seed in any::<u64>()) {
        let (mut a, mut b) = (RngHandle::seeded(seed), RngHandle::seeded(seed));
        for _ in 0..64 {
            prop_assert_eq!(a.next_u64(), b.next_u64());
        }
        let u = a.next_f64();
        prop_assert!((0.0..1.0).contains(&u));
    }

    #[test]
    fn gaussian_samples_are_affine_in_parameters(seed in any::<u64>(), m in -10.0f64..10.0, s in 0.1f64..10.0) {
        let z = sample_gaussian(&mut RngHandle::seeded(seed), 0.0, 1.0, 50).unwrap();
        let x = sample_gaussian(&mut RngHandle::seeded(seed), m, s, 50).unwrap();
        for (zi, xi) in z.values().iter().zip(x.values()) {
            prop_assert_eq!(xi.to_bits(), (m + s * zi).to_bits());
        }
    }

    #[test]
    fn uniform_icdf_sampling_is_identity(seed in any::<u64>()) {
        let u = sample_uniform(&mut RngHandle::seeded(seed), 100).unwrap();
        let v = sample_icdf(&mut RngHandle::seeded(seed), &ParametricDist::uniform(0.0, 1.0).unwrap(), 100).unwrap();
        prop_assert_eq!(u.values(), v.values());
    }

    #[test]
    fn w1_symmetric_and_nonnegative(a in samples(200), b in samples(200)) {
        let d = w1(&a, &b);
        prop_assert!(d >= 0.0);
        prop_assert_eq!(d.to_bits(), w1(&b, &a).to_bits());
        prop_assert_eq!(w1(&a, &a), 0.0);
    }

    #[test]
    fn w1_translation(a in samples(200), c in -50.0f64..50.0) {
        let shifted: Vec<f64> = a.iter().map(|x| x + c).collect();
        prop_assert!((w1(&a, &shifted) - c.abs()).abs() <= 1e-12);
    }

    #[test]
    fn w1_scale(a in samples(200), b in samples(200), k in -5.0f64..5.0) {
        let ka: Vec<f64> = a.iter().map(|x| k * x).collect();
        let kb: Vec<f64> = b.iter().map(|x| k * x).collect();
        let (lhs, rhs) = (w1(&ka, &kb), k.abs() * w1(&a, &b));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn w1_matches_sorted_oracle(pair in (1usize..300).prop_flat_map(|n| {
        (prop::collection::vec(-100.0f64..100.0, n), prop::collection::vec(-100.0f64..100.0, n))
    })) {
        let (mut a, mut b) = pair;
        let d = w1(&a, &b);
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let oracle = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64;
        prop_assert!((d - oracle).abs() <= 1e-12 * oracle.max(1.0));
    }

    #[test]
    fn w1_triangle(a in samples(100), b in samples(100), c in samples(100)) {
        prop_assert!(w1(&a, &c) <= w1(&a, &b) + w1(&b, &c) + 1e-12);
    }

    #[test]
    fn requantize_conserves_mass_and_mean(a in atoms(200), r in 1usize..80) {
        let before = weighted_mean(&a);
        let q = requantize(a, r).unwrap();
        prop_assert_eq!(q.atoms().len(), r);
        let mass: f64 = q.atoms().iter().map(|x| x.mass).sum();
        prop_assert!((mass - 1.0).abs() <= 1e-12);
        prop_assert!(q.atoms().windows(2).all(|w| w[0].position <= w[1].position));
        prop_assert!(close(weighted_mean(q.atoms()), before, 1e-12));
    }

    #[test]
    fn combine_add_conserves_mean(a in atoms(40), b in atoms(40), r in 2usize..64) {
        let (da, db) = (DiracMixture::from_atoms(a).unwrap(), DiracMixture::from_atoms(b).unwrap());
        let s = combine(&da, &db, BinaryOp::Add, r).unwrap();
        prop_assert!(close(s.mean(), da.mean() + db.mean(), 1e-12));
    }

    #[test]
    fn combine_mul_factorizes_expectation(a in atoms(40), b in atoms(40), r in 2usize..64) {
        // Independent operands: E[XY] = E[X]E[Y].
        let (da, db) = (DiracMixture::from_atoms(a).unwrap(), DiracMixture::from_atoms(b).unwrap());
        let p = combine(&da, &db, BinaryOp::Mul, r).unwrap();
        prop_assert!(close(p.mean(), da.mean() * db.mean(), 1e-12));
    }

    #[test]
    fn affine_map_is_exact_on_moments(d in continuous(), r in 2usize..128, a in -4.0f64..4.0, b in -10.0f64..10.0) {
        prop_assume!(a.abs() > 1e-3);
        let q = DiracMixture::from_dist(&d, r).unwrap();
        let m = q.apply_unary(&Transform::affine(a, b)).unwrap();
        let (s0, s1) = (q.moments(), m.moments());
        prop_assert!((s1.mean - (a * s0.mean + b)).abs() <= 1e-12 * (a * s0.mean).abs().max(b.abs()).max(1.0) * 10.0);
        prop_assert!(close(s1.variance, a * a * s0.variance, 1e-10));
    }

    #[test]
    fn from_dist_is_equal_mass_and_sorted(d in continuous(), r in 2usize..256) {
        let q = DiracMixture::from_dist(&d, r).unwrap();
        prop_assert_eq!(q.atoms().len(), r);
        prop_assert!(q.atoms().iter().all(|x| x.mass == 1.0 / r as f64));
        prop_assert!(q.atoms().windows(2).all(|w| w[0].position <= w[1].position));
    }

    #[test]
    fn spot_single_component_is_affine_of_source(seed in any::<u64>(), a in -5.0f64..5.0, b in -5.0f64..5.0) {
        prop_assume!(a != 0.0);
        let prog = SpotProgram::affine(a, b).unwrap();
        let got = spot_sample(&mut NoiseSource::standard(seed), &prog, &mut RngHandle::seeded(1), 200).unwrap();
        let mut raw = NoiseSource::standard(seed);
        for y in got.values() {
            prop_assert_eq!(y.to_bits(), (a * raw.draw().unwrap() + b).to_bits());
        }
    }

    #[test]
    fn timer_spans_are_ordered(work in 0usize..2000) {
        let (_, span) = time_block(|| (0..work).map(|i| i as f64).sum::<f64>());
        prop_assert!(span.end >= span.start);
        prop_assert_eq!(span.elapsed_ms(), (span.end - span.start) as f64 / 1e6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn eval_expr_is_deterministic(m in 1.0f64..5.0, s in 0.1f64..1.0, r in 4usize..64) {
        let e = expr::mul(expr::input("a"), expr::add(expr::input("b"), expr::constant(2.0)));
        let inputs: HashMap<String, DiracMixture> = [
            ("a".to_string(), DiracMixture::from_dist(&ParametricDist::gaussian(m, s).unwrap(), r).unwrap()),
            ("b".to_string(), DiracMixture::from_dist(&ParametricDist::uniform(m, m + s).unwrap(), r).unwrap()),
        ]
        .into();
        prop_assert_eq!(eval_expr(&e, &inputs, r).unwrap(), eval_expr(&e, &inputs, r).unwrap());
    }

    #[test]
    fn galerkin_residual_shrinks_with_k(d in continuous()) {
        // Residuals that reach the rounding floor (exactly representable
        // targets) may jitter there; compare against the target's scale.
        let floor = 1e-12 * (d.icdf(0.99).unwrap() - d.icdf(0.01).unwrap() + d.icdf(0.5).unwrap().abs());
        let mut last = f64::INFINITY;
        for k in 1..=8 {
            let basis = build_basis(&gfet_family(k), k, DEFAULT_GRID).unwrap();
            for i in 0..k {
                prop_assert!((basis.inner(i, i) - 1.0).abs() <= 1e-8);
                if i > 0 {
                    prop_assert!(basis.inner(i, i - 1).abs() <= 1e-8);
                }
            }
            let res = fit_icdf(std::sync::Arc::new(basis), &d).unwrap().residual();
            prop_assert!(res >= 0.0 && res <= last * (1.0 + 1e-12) + floor, "K={k}: {res} after {last}");
            last = res;
        }
    }
}
