use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::coefficients::DEFAULT_PARODI_TOL;

fn grid2(n: usize) -> TorusGrid {
    TorusGrid::new(2, n).unwrap()
}

fn part3() -> LeslieCoefficients {
    LeslieCoefficients::new([0.0, 0.0, 1.0, 101.0, 0.0, 0.0], 1.0, false, DEFAULT_PARODI_TOL).unwrap()
}

fn generic() -> LeslieCoefficients {
    // mu2 + mu3 = mu6 - mu5
    LeslieCoefficients::new([0.4, 0.2, 0.9, 3.0, 0.3, 1.4], 1.7, true, DEFAULT_PARODI_TOL).unwrap()
}

fn random_state(grid: TorusGrid, k: f64, seed: u64, amp: f64) -> State {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = SpectralField::random(grid, grid.dim(), k, k, 1.0, &mut rng)
        .unwrap()
        .leray_project()
        .unwrap()
        .scaled(amp);
    let d = SpectralField::random(grid, 3, k, k, 1.0, &mut rng).unwrap().scaled(amp);
    let w = SpectralField::random(grid, 3, k, k, 1.0, &mut rng).unwrap().scaled(amp);
    State::new(0.3, u, d, w).unwrap()
}

#[test]
fn zero_state_has_zero_tendency() {
    let s = State::zeros(grid2(16), 5.0).unwrap();
    assert_eq!(rhs_full(&s, &generic(), 0.2).unwrap().max_coeff(), 0.0);
    assert_eq!(rhs_wavemap(&s, 1.0, 1.0, 0.2).unwrap().max_coeff(), 0.0);
}

#[test]
fn eps_must_match_cutoff() {
    let s = State::zeros(grid2(16), 5.0).unwrap();
    assert!(matches!(rhs_full(&s, &generic(), 0.25), Err(Error::CutoffMismatch(_))));
    let sys = FullSystem::new(generic(), grid2(16), 4.0).unwrap();
    assert!(sys.eval(&s).is_err());
}

#[test]
fn twist_wave_is_stationary() {
    let g = grid2(48);
    for m in [1, 2, 3] {
        let init = make_initial_data(&Preset::TwistWave { m }, g, 21.0).unwrap();
        assert!(init.constraint_residual < 1e-14);
        for coef in [part3(), generic()] {
            let k = rhs_full(&init.state, &coef, 1.0 / 21.0).unwrap();
            assert!(k.max_coeff() < 1e-11, "m = {m}: {}", k.max_coeff());
        }
        let k = rhs_wavemap(&init.state, 2.0, 0.5, 1.0 / 21.0).unwrap();
        assert!(k.max_coeff() < 1e-11);
    }
}

#[test]
fn shear_with_constant_director_decays_viscously() {
    let g = grid2(16);
    let init = make_initial_data(&Preset::ConstantDirectorShear { amplitude: 1.0 }, g, 5.0).unwrap();
    let mu4 = 1.5;
    let k = rhs_wavemap(&init.state, mu4, 1.0, 0.2).unwrap();
    assert!(k.du_dt.max_coeff_diff(&init.state.u.scaled(-0.5 * mu4)) < 1e-14);
    assert!(k.dddot_dt.max_coeff() < 1e-14);
    assert!(k.dd_dt.max_coeff() < 1e-14);
}

#[test]
fn wavemap_agrees_with_full_system() {
    let g = grid2(24);
    let coef = LeslieCoefficients::wave_map(1.3, 0.7).unwrap();
    for seed in 0..5 {
        let s = random_state(g, 7.0, seed, 0.5);
        let a = rhs_full(&s, &coef, 1.0 / 7.0).unwrap();
        let b = rhs_wavemap(&s, 1.3, 0.7, 1.0 / 7.0).unwrap();
        assert!(a.max_diff(&b) <= 1e-13 * a.max_coeff().max(1.0));
    }
}

#[test]
fn tendency_is_band_limited_and_solenoidal() {
    let g = grid2(24);
    for seed in 0..3 {
        let s = random_state(g, 7.5, seed, 0.5);
        let k = rhs_full(&s, &generic(), 1.0 / 7.5).unwrap();
        assert!(k.du_dt.divergence_defect().unwrap() < 1e-12);
        for f in [&k.du_dt, &k.dddot_dt, &k.dd_dt] {
            assert_eq!(f.band_defect(), 0.0);
            assert_eq!(&f.mollify(1.0 / 7.5), f);
            assert!(f.hermitian_defect() < 1e-14);
        }
    }
}

#[test]
fn breakdown_sums_to_tendency() {
    let s = random_state(grid2(24), 7.0, 4, 0.5);
    let sys = FullSystem::new(generic(), s.grid(), 7.0).unwrap();
    let b = sys.breakdown(&s).unwrap();
    let k = sys.eval(&s).unwrap();
    assert_eq!(b.total(&s), k);
    let nl = sys.nonlinear(&s).unwrap();
    let mut back = nl.clone();
    back.du_dt.axpy(0.5 * sys.viscosity(), &s.u.laplacian());
    assert!(back.max_diff(&k) < 1e-14);
}

/// Reflection `x1 -> -x1` with the first components of `u`, `d`, `ddot`
/// negated.
fn reflect(f: &SpectralField, ncomp_flip: usize) -> SpectralField {
    let g = f.grid();
    let comps = (0..f.ncomp())
        .map(|c| {
            let sign = if c == ncomp_flip { -1.0 } else { 1.0 };
            (0..g.len())
                .map(|flat| {
                    let xi = g.wavenumber(flat);
                    sign * f.coeff(c, [-xi[0], xi[1], xi[2]])
                })
                .collect::<Vec<Complex64>>()
        })
        .collect();
    SpectralField::from_coeffs(g, f.cutoff(), comps).unwrap()
}

#[test]
fn reflection_symmetry() {
    let g = grid2(24);
    let s = random_state(g, 7.0, 9, 0.4);
    let r = State::new(s.t, reflect(&s.u, 0), reflect(&s.d, 0), reflect(&s.ddot, 0)).unwrap();
    let k = rhs_full(&s, &generic(), 1.0 / 7.0).unwrap();
    let kr = rhs_full(&r, &generic(), 1.0 / 7.0).unwrap();
    let expect = Tendency {
        du_dt: reflect(&k.du_dt, 0),
        dddot_dt: reflect(&k.dddot_dt, 0),
        dd_dt: reflect(&k.dd_dt, 0),
    };
    assert!(kr.max_diff(&expect) < 1e-12);
    let twist = make_initial_data(&Preset::PerturbedTwist { m: 1, amplitude: 0.1 }, g, 7.0).unwrap().state;
    let tr = State::new(0.0, reflect(&twist.u, 0), reflect(&twist.d, 0), reflect(&twist.ddot, 0)).unwrap();
    let a = rhs_full(&twist, &part3(), 1.0 / 7.0).unwrap();
    let b = rhs_full(&tr, &part3(), 1.0 / 7.0).unwrap();
    assert!(b.dddot_dt.max_coeff_diff(&reflect(&a.dddot_dt, 0)) < 1e-12);
}

#[test]
fn multiplier_pairing_is_self_adjoint() {
    // <J(gamma d), ddot> equals the lattice quadrature of gamma d . ddot
    let g = grid2(24);
    let init = make_initial_data(&Preset::PerturbedTwist { m: 1, amplitude: 0.2 }, g, 7.0).unwrap();
    let s = &init.state;
    let sys = FullSystem::new(part3(), g, 7.0).unwrap();
    let b = sys.breakdown(s).unwrap();
    let spectral_pairing = b.constraint.scaled(part3().rho1()).inner(&s.ddot);
    let m = sys.lattice_size();
    let d = s.d.to_physical_on(m);
    let w = s.ddot.to_physical_on(m);
    let gd = s.d.gradient().to_physical_on(m);
    let mut quad = 0.0;
    for p in 0..d[0].len() {
        let wsq: f64 = (0..3).map(|k| w[k][p] * w[k][p]).sum();
        let gsq: f64 = gd.iter().map(|c| c[p] * c[p]).sum();
        let gamma = gsq - wsq;
        quad += gamma * (0..3).map(|k| d[k][p] * w[k][p]).sum::<f64>();
    }
    quad *= g.volume() / d[0].len() as f64;
    assert!((spectral_pairing - quad).abs() <= 1e-12 * quad.abs().max(1.0));
}

#[test]
fn presets_are_admissible() {
    let g = grid2(32);
    let twist = make_initial_data(&Preset::TwistWave { m: 1 }, g, 10.0).unwrap();
    assert!(twist.constraint_residual < 1e-15 && twist.compat_residual == 0.0);
    let e = 1.0;
    let shear = make_initial_data(&Preset::ConstantDirectorShear { amplitude: 0.5 }, g, 10.0).unwrap();
    assert!(shear.constraint_residual < 1e-15);
    // |u|^2_{H^s} = 0.25 * 2 pi^2 * (s + 1)
    let s_ord = 4;
    let exact = 0.25 * 2.0 * std::f64::consts::PI.powi(2) * (s_ord as f64 + 1.0);
    assert!((shear.energy(e, s_ord) - exact).abs() < 1e-12 * exact);
    for seed in 0..4 {
        let r = make_initial_data(&Preset::random_small(0.01, seed), g, 15.0).unwrap();
        assert!(r.constraint_residual <= 1e-10, "{}", r.constraint_residual);
        assert!(r.compat_residual <= 1e-10);
        assert!(r.state.u.divergence_defect().unwrap() < 1e-14);
        assert!(r.state.u.linf_norm() <= 0.0101);
    }
    let pt = make_initial_data(&Preset::PerturbedTwist { m: 1, amplitude: 1e-2 }, g, 10.0).unwrap();
    assert!(pt.constraint_residual < 1e-12 && pt.compat_residual < 1e-12);
    assert!(pt.state.u.divergence_defect().unwrap() < 1e-14);
}

#[test]
fn random_preset_is_seeded() {
    let g = grid2(16);
    let a = make_initial_data(&Preset::random_small(0.05, 3), g, 5.0).unwrap();
    let b = make_initial_data(&Preset::random_small(0.05, 3), g, 5.0).unwrap();
    let c = make_initial_data(&Preset::random_small(0.05, 4), g, 5.0).unwrap();
    assert_eq!(a.state, b.state);
    assert_ne!(a.state, c.state);
}

#[test]
fn truncation_never_raises_energy() {
    let g = grid2(32);
    for p in [
        Preset::PerturbedTwist { m: 2, amplitude: 0.3 },
        Preset::random_small(0.1, 1),
    ] {
        let init = make_initial_data(&p, g, 6.0).unwrap();
        let s = &init.state;
        let e0 = s.u.sobolev_norm_sq(4, false).unwrap()
            + 1.3 * s.ddot.sobolev_norm_sq(4, false).unwrap()
            + s.d.gradient().sobolev_norm_sq(4, false).unwrap();
        assert!(e0 <= init.energy(1.3, 4));
    }
}

#[test]
fn preset_names() {
    for name in ["twist_wave", "perturbed_twist", "random_small", "constant_director_shear"] {
        assert_eq!(Preset::from_name(name).unwrap().name(), name);
    }
    assert!(matches!(Preset::from_name("vortex"), Err(Error::UnknownPreset(_))));
    let p: Preset = toml::from_str("preset = \"perturbed_twist\"\namplitude = 0.1").unwrap();
    assert_eq!(p, Preset::PerturbedTwist { m: 1, amplitude: 0.1 });
    assert!(toml::from_str::<Preset>("preset = \"twist_wave\"\nbogus = 1").is_err());
}

#[test]
fn zero_director_cannot_be_normalized() {
    let mut d = vec![vec![0.0; 4]; 3];
    d[2][1] = 1.0;
    assert!(matches!(
        super::initial::normalize_samples(&mut d),
        Err(Error::NormalizationFailed { index: 0 })
    ));
}
