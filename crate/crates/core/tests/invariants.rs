//! Property tests over the spectral and Dirichlet machinery: semigroup
//! identities, symmetry, positivity, and the maximum principle on random
//! data.

use std::sync::OnceLock;

use fracharm::dirichlet::{solve_fractional_dirichlet, DirichletProblem};
use fracharm::fractal::{build_fractal, Family, FractalSpec};
use fracharm::spectral::{eigendecompose, GeneratorOperator, SpectralDecomposition};
use proptest::prelude::*;

fn gasket() -> &'static SpectralDecomposition {
    static DEC: OnceLock<SpectralDecomposition> = OnceLock::new();
    DEC.get_or_init(|| {
        let g = build_fractal(FractalSpec::new(Family::Gasket, 3)).unwrap();
        eigendecompose(&GeneratorOperator::from_graph(&g).unwrap()).unwrap()
    })
}

fn vector() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, gasket().dim())
}

fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fractional_powers_compose(f in vector(), s in 0.1f64..0.9) {
        let dec = gasket();
        let once = dec.fractional_apply(1.0, &f).unwrap();
        let twice = dec.fractional_apply(s, &dec.fractional_apply(1.0 - s, &f).unwrap()).unwrap();
        let gap: Vec<f64> = once.iter().zip(&twice).map(|(a, b)| a - b).collect();
        prop_assert!(sup(&gap) <= 1e-9 * sup(&once).max(1.0));
    }

    #[test]
    fn semigroup_is_markov(f in vector(), t in 1e-4f64..1.0) {
        let dec = gasket();
        let u = dec.semigroup_apply(t, &f).unwrap();
        // contraction in sup norm and conservation of the mean
        prop_assert!(sup(&u) <= sup(&f) + 1e-10);
        let mass = |g: &[f64]| g.iter().zip(dec.measure()).map(|(a, m)| a * m).sum::<f64>();
        prop_assert!((mass(&u) - mass(&f)).abs() <= 1e-10);
    }

    #[test]
    fn fractional_energy_is_positive_and_symmetric(f in vector(), g in vector(), s in 0.1f64..0.9) {
        let dec = gasket();
        prop_assert!(dec.fractional_energy(s, &f).unwrap() >= -1e-12);
        let a = dec.inner(&dec.fractional_apply(s, &f).unwrap(), &g);
        let b = dec.inner(&f, &dec.fractional_apply(s, &g).unwrap());
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn dirichlet_solutions_obey_maximum_principle(
        datum in vector(),
        mask in prop::collection::vec(any::<bool>(), 42),
        s in 0.2f64..0.8,
    ) {
        let dec = gasket();
        let domain: Vec<usize> = (0..dec.dim()).filter(|&x| mask[x]).collect();
        prop_assume!(!domain.is_empty() && domain.len() < dec.dim());
        let p = DirichletProblem::new(s, &domain, datum).unwrap();
        let sol = solve_fractional_dirichlet(dec, &p).unwrap();
        let ext = p.exterior();
        let lo = ext.iter().map(|&x| p.datum()[x]).fold(f64::INFINITY, f64::min);
        let hi = ext.iter().map(|&x| p.datum()[x]).fold(f64::NEG_INFINITY, f64::max);
        for &x in p.domain() {
            prop_assert!(sol.u[x] >= lo - 1e-10 && sol.u[x] <= hi + 1e-10);
        }
        for &x in &ext {
            prop_assert_eq!(sol.u[x], p.datum()[x]);
        }
    }
}
