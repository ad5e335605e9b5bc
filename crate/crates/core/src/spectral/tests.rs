use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;

fn grid2(n: usize) -> TorusGrid {
    TorusGrid::new(2, n).unwrap()
}

fn random(grid: TorusGrid, ncomp: usize, cutoff: f64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpectralField::random(grid, ncomp, cutoff, cutoff, 0.0, &mut rng).unwrap()
}

fn sin_x1(grid: TorusGrid, k: f64, cutoff: f64) -> SpectralField {
    SpectralField::from_fn(grid, 1, cutoff, |x, o| o[0] = (k * x[0]).sin()).unwrap()
}

#[test]
fn zero_round_trip() {
    let g = grid2(16);
    let f = SpectralField::zeros(g, 2, 7.0).unwrap();
    let phys = f.to_physical();
    assert!(phys.iter().flatten().all(|&v| v == 0.0));
    assert_eq!(SpectralField::to_spectral(g, &phys, 7.0).unwrap(), f);
}

#[test]
fn single_mode_pair() {
    let g = grid2(16);
    let f = sin_x1(g, 1.0, 7.0);
    // sin(x1) = (e^{ix} - e^{-ix}) / 2i
    assert!((f.coeff(0, [1, 0, 0]) - num_complex::Complex64::new(0.0, -0.5)).norm() < 1e-15);
    assert!((f.coeff(0, [-1, 0, 0]) - num_complex::Complex64::new(0.0, 0.5)).norm() < 1e-15);
    let phys = f.to_physical();
    for p in 0..g.len() {
        assert!((phys[0][p] - g.coords(p)[0].sin()).abs() < 1e-14);
    }
    let back = SpectralField::to_spectral(g, &phys, 7.0).unwrap();
    assert!(back.max_coeff_diff(&f) <= 1e-12 * f.max_coeff());
}

#[test]
fn random_round_trip() {
    for (dim, n, k) in [(2, 16, 7.0), (2, 24, 9.5), (3, 8, 3.0)] {
        let g = TorusGrid::new(dim, n).unwrap();
        let f = random(g, 3, k, 7);
        let back = SpectralField::to_spectral(g, &f.to_physical(), k).unwrap();
        for c in 0..3 {
            for (a, b) in back.coeffs(c).iter().zip(f.coeffs(c)) {
                assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-3));
            }
        }
    }
}

#[test]
fn shape_mismatch_is_reported() {
    let g = grid2(16);
    let err = SpectralField::to_spectral(g, &[vec![0.0; 10]], 7.0).unwrap_err();
    assert!(matches!(err, crate::Error::ShapeMismatch { .. }));
    assert!(SpectralField::zeros(g, 1, 8.0).is_err());
}

#[test]
fn mollifier_cutoffs() {
    let g = grid2(16);
    let f = sin_x1(g, 2.0, 7.0);
    assert!(f.mollify(0.6).max_coeff() < 1e-15);
    let kept = f.mollify(0.4);
    assert!(kept.max_coeff_diff(&f) < 1e-15);
    assert_eq!(kept.cutoff(), 2.5);
    // (2, 1) has |xi| = sqrt(5) < 2.5 and must survive.
    let r = random(g, 1, 7.0, 3);
    assert_eq!(r.mollify(0.4).coeff(0, [2, 1, 0]), r.coeff(0, [2, 1, 0]));
    assert_eq!(r.mollify(0.4).coeff(0, [2, 2, 0]).norm(), 0.0);
}

#[test]
fn mollifier_error_bound_and_idempotence() {
    let g = grid2(48);
    for seed in 0..100u64 {
        let u = random(g, 2, 23.0, seed);
        for s in [3usize, 4, 5] {
            let hs = u.sobolev_norm_sq(s, false).unwrap().sqrt();
            for eps in [0.25, 0.125, 0.0625] {
                let j = u.mollify(eps);
                assert_eq!(j.mollify(eps), j);
                let err = u.sub(&j).sobolev_norm_sq(s - 1, false).unwrap().sqrt();
                assert!(err <= eps * hs, "seed {seed} s {s} eps {eps}");
            }
        }
    }
}

#[test]
fn leray_examples() {
    let g = grid2(16);
    let grad = SpectralField::from_fn(g, 2, 7.0, |x, o| {
        o[0] = x[0].cos();
        o[1] = 0.0;
    })
    .unwrap();
    assert!(grad.leray_project().unwrap().max_coeff() < 1e-15);
    let shear = SpectralField::from_fn(g, 2, 7.0, |x, o| {
        o[0] = x[1].sin();
        o[1] = 0.0;
    })
    .unwrap();
    assert!(shear.leray_project().unwrap().max_coeff_diff(&shear) < 1e-15);
    assert!(SpectralField::zeros(g, 3, 7.0).unwrap().leray_project().is_err());
}

#[test]
fn leray_random_properties() {
    for dim in [2, 3] {
        let g = TorusGrid::new(dim, if dim == 2 { 16 } else { 8 }).unwrap();
        let k = g.max_cutoff();
        for seed in 0..100u64 {
            let u = random(g, dim, k, seed);
            let p = u.leray_project().unwrap();
            assert!(p.divergence_defect().unwrap() <= 1e-12);
            assert!(p.leray_project().unwrap().max_coeff_diff(&p) <= 1e-15);
            // u - Pu is curl free: xi_a r_b - xi_b r_a = 0 per mode
            let r = u.sub(&p);
            for flat in 0..g.len() {
                let xi = g.wavenumber(flat);
                for a in 0..dim {
                    for b in 0..dim {
                        let c = xi[a] as f64 * r.coeffs(b)[flat] - xi[b] as f64 * r.coeffs(a)[flat];
                        assert!(c.norm() <= 1e-12);
                    }
                }
            }
            let phi = random(g, 1, k, seed + 1000);
            assert!(p.inner(&phi.gradient()).abs() <= 1e-12 * p.l2_norm_sq().max(1.0));
            assert!(phi.gradient().leray_project().unwrap().max_coeff() <= 1e-13);
            let v = random(g, dim, k, seed + 2000);
            let sa = (v.inner(&p) - v.leray_project().unwrap().inner(&u)).abs();
            assert!(sa <= 1e-10);
        }
    }
}

#[test]
fn derivative_examples() {
    let g = grid2(16);
    let c = SpectralField::from_fn(g, 1, 7.0, |_, o| o[0] = 3.0).unwrap();
    assert!(c.gradient().max_coeff() == 0.0);
    let f = sin_x1(g, 2.0, 7.0);
    assert!(f.laplacian().max_coeff_diff(&f.scaled(-4.0)) < 1e-13);
    let r = random(g, 1, 7.0, 5);
    let lhs = r.gradient().divergence().unwrap();
    assert!(lhs.max_coeff_diff(&r.laplacian()) <= 1e-12);
    assert!(r.divergence().is_err());
}

#[test]
fn tensor_divergence_matches_rows() {
    let g = grid2(16);
    let t = random(g, 4, 7.0, 9);
    let div = t.tensor_divergence().unwrap();
    // out_i = d_1 T[0][i] + d_2 T[1][i]
    for i in 0..2 {
        let col = SpectralField::stack(&[&t.component(i), &t.component(2 + i)]).unwrap();
        assert!(div.component(i).max_coeff_diff(&col.divergence().unwrap()) < 1e-15);
    }
}

#[test]
fn sobolev_examples() {
    let g = grid2(16);
    assert_eq!(SpectralField::zeros(g, 1, 7.0).unwrap().sobolev_norm_sq(3, false).unwrap(), 0.0);
    let f = sin_x1(g, 1.0, 7.0);
    for s in 0..6usize {
        let v = f.sobolev_norm_sq(s, false).unwrap();
        assert!((v - (s as f64 + 1.0) * 2.0 * PI * PI).abs() < 1e-12);
    }
    assert!(matches!(f.sobolev_norm_sq(0, true), Err(crate::Error::InvalidOrder(0))));
}

/// Sum of `|grad^k f|^2` with each derivative tensor built by repeated
/// gradients and integrated by grid quadrature.
fn sobolev_by_derivatives(f: &SpectralField, s: usize, k0: usize) -> f64 {
    let g = f.grid();
    let cell = g.spacing().powi(g.dim() as i32);
    let mut d = f.clone();
    let mut total = 0.0;
    for k in 0..=s {
        if k >= k0 {
            total += d.to_physical().iter().flatten().map(|v| v * v).sum::<f64>() * cell;
        }
        d = d.gradient();
    }
    total
}

#[test]
fn sobolev_matches_differentiated_norms() {
    let g = grid2(16);
    for seed in 0..10 {
        let f = random(g, 2, 7.0, seed);
        for s in 1..5 {
            for hom in [false, true] {
                let a = f.sobolev_norm_sq(s, hom).unwrap();
                let b = sobolev_by_derivatives(&f, s, usize::from(hom));
                assert!((a - b).abs() <= 1e-10 * b);
            }
            let split = f.sobolev_norm_sq(s, true).unwrap() + f.l2_norm_sq();
            assert!((f.sobolev_norm_sq(s, false).unwrap() - split).abs() <= 1e-12 * split);
        }
    }
}

#[test]
fn linf_examples() {
    let g = grid2(16);
    let e3 = SpectralField::from_fn(g, 3, 7.0, |_, o| o.copy_from_slice(&[0.0, 0.0, 1.0])).unwrap();
    assert!((e3.linf_norm() - 1.0).abs() < 1e-15);
    assert!((sin_x1(g, 1.0, 7.0).linf_norm() - 1.0).abs() < 1e-15);
    for seed in 0..10 {
        let f = random(g, 2, 7.0, seed);
        let coarse = f.linf_norm();
        let fine = f.linf_norm_on(64);
        assert!(coarse <= fine * (1.0 + 1e-12));
        assert!((fine - coarse) <= 0.01 * fine * 30.0, "grid sampling far off");
    }
}

#[test]
fn linf_within_one_percent_when_resolved() {
    // modes up to |xi| = 3 on a 32 grid: within 1% of the 4x oversampled
    // maximum
    let g = grid2(32);
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = SpectralField::random(g, 1, 15.0, 3.0, 0.0, &mut rng).unwrap();
        let fine = f.linf_norm_on(128);
        assert!((fine - f.linf_norm()).abs() <= 0.01 * fine);
    }
}

#[test]
fn mollifier_is_self_adjoint_and_non_expansive() {
    let g = grid2(16);
    for seed in 0..20 {
        let f = random(g, 2, 7.0, seed);
        let h = random(g, 2, 7.0, seed + 50);
        for eps in [0.2, 0.3, 0.5] {
            let a = f.mollify(eps).inner(&h);
            let b = f.inner(&h.mollify(eps));
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            for s in 0..4 {
                assert!(
                    f.mollify(eps).sobolev_norm_sq(s, false).unwrap()
                        <= f.sobolev_norm_sq(s, false).unwrap()
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pipelines_preserve_hermitian_symmetry(seed in 0u64..10_000, eps in 0.1f64..1.0) {
        let g = grid2(16);
        let u = random(g, 2, 7.0, seed);
        let out = u.leray_project().unwrap().mollify(eps).gradient().tensor_divergence().unwrap().laplacian();
        prop_assert!(out.hermitian_defect() <= 1e-12);
        let prod = SpectralField::to_spectral(
            g,
            &u.to_physical().iter().map(|c| c.iter().map(|v| v * v).collect()).collect::<Vec<_>>(),
            7.0,
        ).unwrap();
        prop_assert!(prod.hermitian_defect() <= 1e-14);
        prop_assert!(prod.band_defect() == 0.0);
    }

    #[test]
    fn round_trip_any_seed(seed in 0u64..10_000) {
        let g = grid2(16);
        let f = random(g, 1, 7.0, seed);
        let back = SpectralField::to_spectral(g, &f.to_physical(), 7.0).unwrap();
        prop_assert!(back.max_coeff_diff(&f) <= 1e-13);
    }
}
