use proptest::prelude::*;
use twoweight_core::generate::{generate, rng_for, GenConfig};
use twoweight_core::operators::{
    apply_adjoint, apply_forward, dense_norm, norm_of_matrix, power_iteration, NormOptions, OperatorMatrix,
};
use twoweight_core::{KernelParams, MuAtom, Point, UpperHalfMeasure};

use rand::Rng;

fn p() -> KernelParams {
    KernelParams::default()
}

fn norm(params: &KernelParams, inst: &twoweight_core::io::Instance) -> f64 {
    let m = OperatorMatrix::assemble(params, &inst.sigma, &inst.mu).unwrap();
    norm_of_matrix(&m, &NormOptions::default()).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn duality(seed in 0u64..10_000, ns in 1usize..24, nm in 1usize..24) {
        let params = p();
        let inst = generate(seed, &GenConfig::new(ns, nm), &params).unwrap();
        let mut rng = rng_for(seed ^ 0xabc);
        let f: Vec<f64> = (0..inst.sigma.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..inst.mu.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let pf = apply_forward(&params, &inst.sigma, &inst.mu, &f);
        let pg = apply_adjoint(&params, &inst.sigma, &inst.mu, &g);
        let lhs: f64 = pf.iter().zip(&g).zip(inst.mu.atoms()).map(|((a, b), m)| a * b * m.weight).sum();
        let rhs: f64 = pg.iter().zip(&f).zip(inst.sigma.atoms()).map(|((a, b), s)| a * b * s.weight).sum();
        let scale: f64 = pf.iter().zip(&g).zip(inst.mu.atoms()).map(|((a, b), m)| (a * b * m.weight).abs()).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn forward_is_linear(seed in 0u64..10_000) {
        let params = p();
        let inst = generate(seed, &GenConfig::new(6, 6), &params).unwrap();
        let m = OperatorMatrix::assemble(&params, &inst.sigma, &inst.mu).unwrap();
        let mut rng = rng_for(seed);
        let f: Vec<f64> = (0..inst.sigma.len()).map(|_| rng.random::<f64>()).collect();
        let g: Vec<f64> = (0..inst.sigma.len()).map(|_| rng.random::<f64>()).collect();
        let sum: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
        let (a, b, c) = (m.forward(&f), m.forward(&g), m.forward(&sum));
        for i in 0..c.len() {
            prop_assert!((a[i] + b[i] - c[i]).abs() <= 1e-13 * c[i].abs().max(1e-300));
        }
    }

    #[test]
    fn homogeneity_in_both_weights(seed in 0u64..10_000, c in 0.01f64..100.0) {
        let params = p();
        let inst = generate(seed, &GenConfig::new(8, 8), &params).unwrap();
        let n0 = norm(&params, &inst);
        let s = twoweight_core::io::Instance::new(inst.sigma.scaled(c), inst.mu.clone());
        let u = twoweight_core::io::Instance::new(inst.sigma.clone(), inst.mu.scaled(c));
        prop_assert!((norm(&params, &s) - c.sqrt() * n0).abs() <= 1e-8 * c.sqrt() * n0);
        prop_assert!((norm(&params, &u) - c.sqrt() * n0).abs() <= 1e-8 * c.sqrt() * n0);
    }

    #[test]
    fn adding_a_mu_atom_never_decreases_the_norm(seed in 0u64..10_000, s in 0.01f64..8.0, t in 0.05f64..8.0, w in 0.001f64..1000.0) {
        let params = p();
        let inst = generate(seed, &GenConfig::new(8, 8), &params).unwrap();
        let n0 = norm(&params, &inst);
        let mut atoms = inst.mu.atoms().to_vec();
        atoms.push(MuAtom { point: Point::small(s), t, weight: w });
        let bigger = twoweight_core::io::Instance::new(inst.sigma.clone(), UpperHalfMeasure::new(atoms).unwrap());
        prop_assert!(norm(&params, &bigger) >= n0 * (1.0 - 1e-9));
    }
}

#[test]
fn power_iteration_matches_svd_and_the_transpose() {
    let params = p();
    for seed in 0..20 {
        let inst = generate(seed, &GenConfig::new(32, 32), &params).unwrap();
        let m = OperatorMatrix::assemble(&params, &inst.sigma, &inst.mu).unwrap();
        let pi = power_iteration(&m, 1e-10, 10_000).unwrap();
        let svd = dense_norm(&m);
        assert!((pi.value - svd).abs() <= 1e-8 * svd, "seed {seed}: {} vs {svd}", pi.value);
        // the dual inequality has the same best constant
        let at = m.weighted_dense().transpose();
        let dual = at.singular_values().max();
        assert!((dual - svd).abs() <= 1e-12 * svd);
    }
}
