use approx::assert_abs_diff_eq;
use hyperfill::curves::fixtures::*;
use hyperfill::curves::*;
use hyperfill::hyperbolic::h_distance;
use hyperfill::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type MakePath = fn(f64) -> SampledPath;

#[test]
fn geodesics_are_straight_and_one_quasi() {
    for n in [2, 3, 5] {
        for dt in [1e-2, 5e-3] {
            let path = geodesic(n, 3.0, dt).unwrap();
            let k = geodesic_curvature(&path).unwrap().max_kappa;
            assert!(k < dt * dt, "n = {n}, dt = {dt}: {k}");
            let rep = verify_quasi_geodesic(&path, 1.0).unwrap();
            assert!(rep.lower_violation < 1e-9);
            assert!(rep.chord_hausdorff < 1e-6);
        }
    }
}

#[test]
fn identity_residual_converges_quadratically() {
    let fixtures: [(&str, MakePath); 3] = [
        ("geodesic", |dt| geodesic(2, 2.0, dt).unwrap()),
        ("circle", |dt| circle(1.0, 2.0, dt).unwrap()),
        ("equidistant", |dt| equidistant(0.5, 2.0, dt).unwrap()),
    ];
    for (name, make) in fixtures {
        let fine = accel_identity_residual(&make(1e-3)).unwrap();
        let coarse = accel_identity_residual(&make(2e-3)).unwrap();
        assert!(fine < 1e-4, "{name}: {fine}");
        let ratio = coarse / fine;
        assert!((3.5..=4.5).contains(&ratio), "{name}: ratio {ratio}");
    }
    // κ = 1 kills the leading error term; only round-off is left
    for dt in [2e-3, 1e-3] {
        assert!(accel_identity_residual(&horocycle(2.0, dt).unwrap()).unwrap() < 1e-8);
    }
}

#[test]
fn residual_leading_term_matches_chord_expansion() {
    // |1 − c²| with chords of length Δt(1 − κ²Δt²/24) gives (1 − κ²)Δt²/6
    for (path, kappa) in [
        (geodesic(2, 1.0, 2e-3).unwrap(), 0.0f64),
        (equidistant(0.5, 1.0, 2e-3).unwrap(), 0.5f64.tanh()),
        (circle(1.0, 1.0, 2e-3).unwrap(), 1f64.tanh().recip()),
    ] {
        let want = (1.0 - kappa * kappa).abs() * 4e-6 / 6.0;
        let got = accel_identity_residual(&path).unwrap();
        assert!((got - want).abs() < 0.02 * want, "{got} vs {want}");
    }
}

#[test]
fn hypercycle_constant_is_sharp() {
    let d: f64 = 0.5;
    let dt = 2e-2;
    let path = equidistant(d, 20.0, dt).unwrap();
    let tight = verify_quasi_geodesic(&path, d.cosh()).unwrap();
    assert!(tight.lower_violation < 10.0 * dt, "{tight:?}");
    let loose = verify_quasi_geodesic(&path, 0.95 * d.cosh()).unwrap();
    assert!(loose.lower_violation > 0.1, "{loose:?}");
}

#[test]
fn hypercycle_chord_approaches_distance_from_below() {
    let d = 0.4;
    let mut last = 0.0;
    for length in [2.0, 4.0, 8.0, 16.0] {
        let h = chord_hausdorff(&equidistant(d, length, 1e-2).unwrap()).unwrap();
        assert!(h > last && h < d + 1e-9, "length {length}: {h}");
        last = h;
    }
    assert!(d - last < 1e-2);
}

#[test]
fn displacement_bound_on_admissible_fixtures() {
    let dt = 1e-2;
    let paths = [
        geodesic(2, 6.0, dt).unwrap(),
        equidistant(0.1, 6.0, dt).unwrap(),
        equidistant(0.5, 6.0, dt).unwrap(),
        equidistant(1.5, 6.0, dt).unwrap(),
    ];
    for path in &paths {
        let prof = geodesic_curvature(path).unwrap();
        assert!(displacement_excess(path, &prof).unwrap() <= 10.0 * dt);
    }
    for path in [horocycle(2.0, dt).unwrap(), circle(1.0, 2.0, dt).unwrap()] {
        let prof = geodesic_curvature(&path).unwrap();
        assert!(matches!(
            displacement_excess(&path, &prof),
            Err(Error::CurvatureTooLarge(_))
        ));
    }
}

#[test]
fn displacement_of_hypercycle_is_scaled_length() {
    let d: f64 = 0.7;
    let dt = 1e-2;
    let path = equidistant(d, 4.0, dt).unwrap();
    let prof = geodesic_curvature(&path).unwrap();
    let delta = displacement_integral(&prof, dt).unwrap();
    let span = (delta.len() - 1) as f64 * dt;
    assert_abs_diff_eq!(*delta.last().unwrap(), span / d.cosh(), epsilon = 1e-4);
    assert!(delta.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn chord_distance_shrinks_with_curvature() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let base = Perturbation::random(&mut rng, 0.08);
        let mut last = f64::INFINITY;
        let mut last_k = f64::INFINITY;
        for scale in [1.0, 0.5, 0.25, 0.125, 0.0] {
            let path = perturbed_geodesic(&base.scaled(scale), 6.0, 2e-2).unwrap();
            let k = geodesic_curvature(&path).unwrap().max_kappa;
            let h = chord_hausdorff(&path).unwrap();
            assert!(k <= last_k && h <= last + 1e-12, "scale {scale}: κ {k}, h {h}");
            last = h;
            last_k = k;
        }
        assert!(last < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn small_curvature_paths_are_quasi_geodesics(seed in any::<u64>(), amp in 0.01f64..0.1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pert = Perturbation::random(&mut rng, amp);
        let dt = 2e-2;
        let path = perturbed_geodesic(&pert, 5.0, dt).unwrap();
        let prof = geodesic_curvature(&path).unwrap();
        prop_assume!(prof.max_kappa < 0.9);
        let k = quasi_constant(prof.max_kappa).unwrap();
        let rep = verify_quasi_geodesic(&path, k).unwrap();
        prop_assert!(rep.lower_violation < 10.0 * dt, "{:?}", rep);
        prop_assert!(rep.upper_excess <= path.unit_speed_tol() * path.len() as f64 * dt);
        prop_assert!(displacement_excess(&path, &prof).unwrap() <= 10.0 * dt);
    }

    #[test]
    fn quasi_constant_matches_hypercycle_identity(d in 0.0f64..3.0) {
        prop_assert!((quasi_constant(d.tanh()).unwrap() - d.cosh()).abs() < 1e-9 * d.cosh());
    }

    #[test]
    fn sampled_steps_respect_unit_speed(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let path = perturbed_geodesic(&Perturbation::random(&mut rng, 0.1), 2.0, 1e-2).unwrap();
        for w in path.points().windows(2) {
            let step = h_distance(&w[0], &w[1]).unwrap();
            prop_assert!((step - 1e-2).abs() <= path.unit_speed_tol() * 1e-2);
        }
    }
}
