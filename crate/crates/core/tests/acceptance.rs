//! Acceptance suite: each test checks one advertised guarantee end to end at
//! default numerics and prints a `criterion N: PASS (...)` line with the
//! measured figures (visible with `--nocapture`).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use kappaloop::characters::{bialternant, jacobi_trudi, schur_eval, su2_character, weyl_dimension, WeightVector};
use kappaloop::config::Numerics;
use kappaloop::isotopy::{lax_solve, Coefficient, GeneratorPath, PathTerm, Segment};
use kappaloop::kappa::{
    kappa_report, verify_base_point_independence, verify_deformation, verify_product,
};
use kappaloop::lie::{self, UnitaryMatrix};
use kappaloop::loops;
use kappaloop::orbit::{symplectic_area, CapSurface, OrbitPoint, OrbitSpec};

fn sphere_spec() -> OrbitSpec {
    OrbitSpec::new(vec![1, 1], vec![3, 0]).unwrap()
}

fn flag_spec() -> OrbitSpec {
    OrbitSpec::new(vec![1, 1, 1], vec![3, 1, 0]).unwrap()
}

#[test]
fn criterion_1_half_turn_loop_on_the_sphere() {
    let start = Instant::now();
    let spec = sphere_spec();
    let num = Numerics::default();
    let x0 = spec.random_point(num.seed);
    let report = kappa_report(&spec, &loops::su2_pi(), &x0, &num).unwrap();
    let expected = Complex64::new(-1.0, 0.0);
    let direct_err = (report.direct.value - expected).norm();
    let stab_err = (report.stabilizer - expected).norm();
    let weyl_err = (report.weyl.expect("regular orbit, closed loop") - expected).norm();
    let elapsed = start.elapsed();
    assert!(direct_err < 1e-4, "direct route off by {direct_err}");
    assert!(stab_err < 1e-10, "stabilizer route off by {stab_err}");
    assert!(weyl_err < 1e-10, "Weyl route off by {weyl_err}");
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    println!(
        "criterion 1: PASS (half-turn loop, level-(3,0) sphere: κ = -1 with direct error \
         {direct_err:.2e} < 1e-4, stabilizer {stab_err:.2e} < 1e-10, Weyl {weyl_err:.2e} < 1e-10, \
         in {elapsed:.2?} < 30s)"
    );
}

#[test]
fn criterion_2_central_loop_on_the_flag_orbit() {
    let spec = flag_spec();
    let num = Numerics::default();
    let path = loops::central_loop(3, 0.3, &[1, 0, 0]).unwrap();
    let x0 = spec.random_point(num.seed + 1);
    let report = kappa_report(&spec, &path, &x0, &num).unwrap();
    // Total level 4 winding with θ = 0.3 plus one level-3 shift:
    // κ = e^{2πi(1.2 + 3)} = e^{2πi·0.2}.
    let expected = Complex64::from_polar(1.0, TAU * 1.2);
    let direct_err = (report.direct.value - expected).norm();
    let stab_err = (report.stabilizer - expected).norm();
    let weyl_err = (report.weyl.expect("regular orbit, central endpoint") - expected).norm();
    let fixed_err = (report.fixed_point.expect("diagonal base is fixed") - expected).norm();
    assert!(direct_err < 1e-4, "direct route off by {direct_err}");
    assert!(stab_err < 1e-8, "stabilizer route off by {stab_err}");
    assert!(weyl_err < 1e-8, "Weyl route off by {weyl_err}");
    assert!(fixed_err < 1e-10, "fixed-point route off by {fixed_err}");
    println!(
        "criterion 2: PASS (central loop θ = 0.3 with one unit shift on levels (3,1,0): \
         κ = e^{{2πi·1.2}} with direct error {direct_err:.2e} < 1e-4, stabilizer {stab_err:.2e} \
         < 1e-8, Weyl {weyl_err:.2e} < 1e-8, fixed-point {fixed_err:.2e} < 1e-10)"
    );
}

#[test]
fn criterion_3_base_point_independence() {
    let num = Numerics::default();
    assert_eq!(num.independence_points, 10);
    let sphere = verify_base_point_independence(&sphere_spec(), &loops::su2_pi(), &num).unwrap();
    assert!(sphere.pass, "sphere spread {}", sphere.spread);
    let path = loops::central_loop(3, 0.3, &[1, 0, 0]).unwrap();
    let flag = verify_base_point_independence(&flag_spec(), &path, &num).unwrap();
    assert!(flag.pass, "flag spread {}", flag.spread);
    println!(
        "criterion 3: PASS (direct κ from 10 random base points: spread {:.2e} on the sphere \
         orbit and {:.2e} on the flag orbit, both < 1e-4)",
        sphere.spread, flag.spread
    );
}

/// Closed polyline γ_k = exp(t_k Z)·x₀·exp(-t_k Z) for Z = u·2πi·diag(k)·u†.
fn torus_loop(spec: &OrbitSpec, seed: u64, samples: usize) -> Vec<OrbitPoint> {
    let n = spec.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = lie::haar_from_rng(n, &mut rng);
    let mut ints: Vec<i64> = (0..n).map(|_| rng.gen_range(-1..=1)).collect();
    if ints.iter().all(|&k| k == 0) {
        ints[0] = 1;
    }
    let x0 = spec.base_point().conjugated_by(&lie::haar_from_rng(n, &mut rng));
    let mut gamma = Vec::with_capacity(samples + 1);
    for j in 0..samples {
        let t = j as f64 / samples as f64;
        let phases = DVector::from_iterator(
            n,
            ints.iter().map(|&k| Complex64::from_polar(1.0, TAU * t * k as f64)),
        );
        let h = UnitaryMatrix::new_unchecked(
            u.matrix() * DMatrix::from_diagonal(&phases) * u.matrix().adjoint(),
        );
        gamma.push(x0.conjugated_by(&h));
    }
    gamma.push(gamma[0].clone());
    gamma
}

/// Area of a converged cap over γ, trying random apexes from `seed` up.
fn capped_area(spec: &OrbitSpec, gamma: &[OrbitPoint], mut seed: u64) -> (f64, u64) {
    for _ in 0..10 {
        let base = spec.random_point(seed);
        let cap = CapSurface::new(spec, base, gamma).unwrap();
        if let Ok(est) = symplectic_area(&cap, (32, 128), 2e-5, 4) {
            return (est.area, seed);
        }
        seed += 1;
    }
    panic!("no cap apex converged for this loop");
}

#[test]
fn criterion_4_cap_areas_differ_by_integers() {
    let mut worst: f64 = 0.0;
    for (spec, tag) in [(sphere_spec(), 2u64), (flag_spec(), 3u64)] {
        for loop_index in 0..5u64 {
            let gamma = torus_loop(&spec, 40 + 10 * tag + loop_index, 256);
            let (a1, _) = capped_area(&spec, &gamma, 500 + 100 * tag + loop_index);
            let (a2, _) = capped_area(&spec, &gamma, 900 + 100 * tag + loop_index);
            let diff = a1 - a2;
            let deviation = (diff - diff.round()).abs();
            assert!(
                deviation < 2e-4,
                "u({}) loop {loop_index}: areas {a1} and {a2} differ by non-integer {diff}",
                spec.dim()
            );
            worst = worst.max(deviation);
        }
    }

    // Full sphere: caps from the two poles over the equator of the level-3
    // sphere differ by the whole symplectic volume, which is the level.
    let spec = sphere_spec();
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let tilt = UnitaryMatrix::new_unchecked(DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(c, 0.0),
            Complex64::new(-c, 0.0),
            Complex64::new(c, 0.0),
            Complex64::new(c, 0.0),
        ],
    ));
    let x_eq = spec.base_point().conjugated_by(&tilt);
    let samples = 256;
    let mut equator = Vec::with_capacity(samples + 1);
    for j in 0..samples {
        let t = j as f64 / samples as f64;
        let h = UnitaryMatrix::new_unchecked(DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::from_polar(1.0, std::f64::consts::PI * t),
            Complex64::from_polar(1.0, -std::f64::consts::PI * t),
        ])));
        equator.push(x_eq.conjugated_by(&h));
    }
    equator.push(equator[0].clone());
    let north = spec.base_point();
    let swap = UnitaryMatrix::new_unchecked(DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    ));
    let south = north.conjugated_by(&swap);
    let cap_n = CapSurface::new(&spec, north, &equator).unwrap();
    let cap_s = CapSurface::new(&spec, south, &equator).unwrap();
    let area_n = symplectic_area(&cap_n, (32, 128), 1e-5, 5).unwrap().area;
    let area_s = symplectic_area(&cap_s, (32, 128), 1e-5, 5).unwrap().area;
    let volume_err = ((area_n - area_s).abs() - 3.0).abs();
    assert!(
        volume_err < 1e-4,
        "pole caps over the equator gave {area_n} and {area_s}, total off by {volume_err}"
    );
    println!(
        "criterion 4: PASS (10 random loops on two orbits: cap-pair areas integer to \
         {worst:.2e} < 2e-4; equator pole caps span the full sphere volume 3 to \
         {volume_err:.2e} < 1e-4)"
    );
}

#[test]
fn criterion_5_concatenation_is_multiplicative() {
    // The 2e-4 product tolerance does not need the default 1e-6 cap ladder;
    // a 1e-5 ladder from a quarter-size grid keeps a comfortable margin at a
    // fraction of the quadrature cost.
    let num = Numerics { cap_grid: (32, 128), quad_tol: 1e-5, ..Numerics::default() };
    let pairs: [(OrbitSpec, GeneratorPath, GeneratorPath); 3] = [
        (
            sphere_spec(),
            loops::su2_pi(),
            loops::central_loop(2, 0.25, &[1, 0]).unwrap(),
        ),
        (
            sphere_spec(),
            loops::fourier_loop(2, 21, 2).unwrap(),
            loops::fourier_loop(2, 22, 3).unwrap(),
        ),
        (
            flag_spec(),
            loops::central_loop(3, 0.3, &[1, 0, 0]).unwrap(),
            loops::fourier_loop(3, 23, 2).unwrap(),
        ),
    ];
    let mut worst_direct: f64 = 0.0;
    let mut worst_stab: f64 = 0.0;
    for (i, (spec, first, second)) in pairs.iter().enumerate() {
        let x0 = spec.random_point(60 + i as u64);
        let report = verify_product(spec, first, second, &x0, &num).unwrap();
        assert!(
            report.pass,
            "pair {i}: direct error {} stabilizer error {}",
            report.direct_error, report.stabilizer_error
        );
        worst_direct = worst_direct.max(report.direct_error);
        worst_stab = worst_stab.max(report.stabilizer_error);
    }
    println!(
        "criterion 5: PASS (3 loop pairs: |κ(ψφ) - κ(ψ)κ(φ)| at most {worst_direct:.2e} < 2e-4 \
         direct, {worst_stab:.2e} < 1e-8 stabilizer)"
    );
}

#[test]
fn criterion_6_deformation_invariance() {
    let num = Numerics::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst_fd: f64 = 0.0;
    let mut worst_boundary: f64 = 0.0;
    let mut worst_spread: f64 = 0.0;
    let sphere = sphere_spec();
    let sphere_path = loops::su2_pi();
    let flag = flag_spec();
    let flag_path = loops::central_loop(3, 0.3, &[1, 0, 0]).unwrap();
    let cases: [(&OrbitSpec, &GeneratorPath); 2] = [(&sphere, &sphere_path), (&flag, &flag_path)];
    for (spec, path) in cases {
        let direction = lie::random_skew_hermitian(spec.dim(), &mut rng).scaled(0.7);
        let report = verify_deformation(spec, path, &direction, 1e-3, &num).unwrap();
        assert!(
            report.pass,
            "fd {} boundary {} spread {}",
            report.stabilizer_derivative, report.max_boundary, report.spread
        );
        worst_fd = worst_fd.max(report.stabilizer_derivative);
        worst_boundary = worst_boundary.max(report.max_boundary);
        worst_spread = worst_spread.max(report.spread);
    }
    println!(
        "criterion 6: PASS (conjugation deformations at ds = 1e-3 on two orbits: \
         |dκ/ds| ≤ {worst_fd:.2e} < 1e-5, first-variation integral ≤ {worst_boundary:.2e} \
         < 1e-5, spread over 5 base points ≤ {worst_spread:.2e} < 1e-6)"
    );
}

#[test]
fn criterion_7_vertex_lattice_integrality() {
    let mut worst: f64 = 0.0;
    for (mults, chars) in [
        (vec![1usize, 1, 1], vec![3i64, 1, 0]),
        (vec![1, 1, 1, 1], vec![5, 2, -1, 0]),
    ] {
        let spec = OrbitSpec::new(mults, chars).unwrap();
        let report = spec.vertex_lattice_check();
        assert!(
            report.pass,
            "levels {:?}: max deviation {}",
            spec.char_ints(),
            report.max_deviation
        );
        worst = worst.max(report.max_deviation);
    }
    println!(
        "criterion 7: PASS (moment images of torus fixed points on levels (3,1,0) and \
         (5,2,-1,0) differ by integer vectors to {worst:.2e} < 1e-9)"
    );
}

#[test]
fn criterion_8_flow_solver_guarantees() {
    // Exactness on constant generators.
    let path = loops::su2_pi();
    let num = Numerics::default();
    let flow = lax_solve(&path, num.lax_steps, num.scheme).unwrap();
    let exact = lie::expm_skew(&path.sample(0.0)).unwrap();
    let const_err = (flow.endpoint().matrix() - exact.matrix()).norm();
    assert!(const_err < 1e-12, "constant-generator endpoint off by {const_err}");

    // Fourth-order convergence on a non-commuting oscillating pair.
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let b1 = lie::random_skew_hermitian(2, &mut rng).scaled(1.2);
    let b2 = lie::random_skew_hermitian(2, &mut rng).scaled(0.9);
    let wavy = GeneratorPath::new(vec![Segment {
        t0: 0.0,
        t1: 1.0,
        terms: vec![
            PathTerm {
                coefficient: Coefficient::Cosine { harmonic: 1, amplitude: 1.0 },
                generator: b1,
            },
            PathTerm {
                coefficient: Coefficient::Sine { harmonic: 1, amplitude: 1.0 },
                generator: b2,
            },
        ],
    }])
    .unwrap();
    let reference = lax_solve(&wavy, 8192, num.scheme).unwrap().endpoint().matrix().clone();
    let err_at = |steps: usize| {
        (lax_solve(&wavy, steps, num.scheme).unwrap().endpoint().matrix() - &reference).norm()
    };
    let ratio = err_at(256) / err_at(512);
    assert!(
        (12.0..=20.0).contains(&ratio),
        "error ratio {ratio} outside the fourth-order window [12, 20]"
    );

    // Unitarity drift stays at rounding level on long integrations.
    let drift = lax_solve(&wavy, 4096, num.scheme).unwrap().drift;
    assert!(drift < 1e-12, "unitarity drift {drift}");
    println!(
        "criterion 8: PASS (constant-loop endpoint exact to {const_err:.2e} < 1e-12; \
         step-halving error ratio {ratio:.1} in [12, 20]; unitarity drift {drift:.2e} \
         < 1e-12 at 4096 steps)"
    );
}

#[test]
fn criterion_9_character_identities() {
    // Schur at the all-ones point is the Weyl dimension.
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    let mut worst_dim: f64 = 0.0;
    for _ in 0..40 {
        let n = rng.gen_range(2..=4);
        let mut w: Vec<i64> = (0..n).map(|_| rng.gen_range(-6..=6)).collect();
        w.sort_unstable_by(|a, b| b.cmp(a));
        let weight = WeightVector::new(w).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); n];
        let value = schur_eval(&weight, &ones).unwrap();
        let dim = weyl_dimension(&weight) as f64;
        let dev = (value - Complex64::new(dim, 0.0)).norm() / dim.max(1.0);
        assert!(dev < 1e-9, "weight {:?}: {value} vs {dim}", weight.components());
        worst_dim = worst_dim.max(dev);
    }

    // su(2) characters at t = 1 count weight-space dimensions.
    for m in -6..=0i64 {
        let value = su2_character(m, Complex64::new(1.0, 0.0)).unwrap();
        let expected = (-m + 1) as f64;
        assert!((value - Complex64::new(expected, 0.0)).norm() < 1e-12);
    }

    // The two Schur pipelines agree on generic arguments.
    let mut worst_pipe: f64 = 0.0;
    for trial in 0..50 {
        let n = 2 + trial % 3;
        let mut mu: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=6)).collect();
        mu.sort_unstable_by(|a, b| b.cmp(a));
        let args: Vec<Complex64> = (0..n)
            .map(|k| {
                Complex64::from_polar(
                    rng.gen_range(0.6..1.4),
                    TAU * k as f64 / n as f64 + rng.gen_range(0.05..0.6),
                )
            })
            .collect();
        let via_b = bialternant(&mu, &args).unwrap();
        let via_jt = jacobi_trudi(&mu, &args).unwrap();
        let dev = (via_b - via_jt).norm() / via_b.norm().max(1.0);
        assert!(dev < 1e-8, "trial {trial}: {via_b} vs {via_jt}");
        worst_pipe = worst_pipe.max(dev);
    }
    println!(
        "criterion 9: PASS (Schur at 1ⁿ matches Weyl dimensions to {worst_dim:.2e}; su(2) \
         characters at t = 1 count dimensions exactly; bialternant and Jacobi-Trudi pipelines \
         agree to {worst_pipe:.2e} < 1e-8 on 50 samples)"
    );
}
