use std::f64::consts::PI;

use degenpop::*;
use proptest::prelude::*;

/// Coefficients of det(l I - W), highest power first (Faddeev-LeVerrier).
fn char_poly(w: &CouplingMatrix) -> Vec<f64> {
    let n = w.dim();
    let a: Vec<Vec<f64>> = w.to_rows();
    let matmul = |x: &Vec<Vec<f64>>, y: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| x[i][k] * y[k][j]).sum()).collect())
            .collect()
    };
    let mut coeffs = vec![1.0];
    let mut m = vec![vec![0.0; n]; n];
    let mut c = 1.0;
    for k in 1..=n {
        for i in 0..n {
            m[i][i] += c;
        }
        m = matmul(&a, &m);
        let trace: f64 = (0..n).map(|i| m[i][i]).sum();
        c = -trace / k as f64;
        coeffs.push(c);
    }
    coeffs
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().fold(0.0, |acc, &v| acc * x + v)
}

/// Simple real roots by scanning for sign changes and bisecting.
fn poly_roots(c: &[f64], bound: f64) -> Vec<f64> {
    let steps = 200_000;
    let h = 2.0 * bound / steps as f64;
    let mut roots = Vec::new();
    for i in 0..steps {
        let (mut lo, mut hi) = (-bound + i as f64 * h, -bound + (i + 1) as f64 * h);
        let (flo, fhi) = (horner(c, lo), horner(c, hi));
        if flo == 0.0 {
            roots.push(lo);
            continue;
        }
        if flo * fhi < 0.0 {
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if horner(c, mid) * horner(c, lo) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    roots
}

#[test]
fn four_state_spectrum_matches_characteristic_polynomial() {
    let w = build_coupling(&SystemSpec::structured(4, -1.0 / 3.0).unwrap()).unwrap();
    let oracle = poly_roots(&char_poly(&w), w.norm_inf() + 1.0);
    assert_eq!(oracle.len(), 4);
    let es = eigen_decompose(&w).unwrap();
    for (z, r) in es.eigenvalues().iter().zip(&oracle) {
        assert!((z - r).abs() < 1e-10, "{z} vs {r}");
    }
    // closed forms 1/3 -+ (2/3) sqrt(10), and the spectator eigenvalue -1
    let z = es.eigenvalues();
    assert!((z[0] + 1.774_851_773_445_586_2).abs() < 1e-13);
    assert!((z[1] + 1.0).abs() < 1e-13);
    assert!((z[2] - 1.0 / 3.0).abs() < 1e-13);
    assert!((z[3] - 2.441_518_440_112_252_9).abs() < 1e-13);
}

#[test]
fn spectator_eigenvalue_multiplicity() {
    for n in 4..9 {
        let w = build_coupling(&SystemSpec::structured(n, 0.3).unwrap()).unwrap();
        let es = eigen_decompose(&w).unwrap();
        let count = es.eigenvalues().iter().filter(|z| (**z + 1.0).abs() < 1e-10).count();
        assert_eq!(count, n - 3, "n = {n}");
        assert!(es.max_residual(&w) <= 1e-10 * w.frobenius_norm());
        assert!(es.orthogonality_error() < 1e-10);
    }
}

#[test]
fn reduced_roots_agree_with_full_spectrum() {
    for (n, alpha) in [(3, 0.0), (4, -1.0 / 3.0), (7, 1.3)] {
        let rs = reduced_system(n, alpha).unwrap();
        let es = eigen_decompose(&build_coupling(&SystemSpec::structured(n, alpha).unwrap()).unwrap())
            .unwrap();
        for z in rs.z {
            assert!(es.eigenvalues().iter().any(|e| (e - z).abs() < 1e-12), "n={n} z={z}");
        }
    }
}

/// Independent RK4 run of the designed system in area units (V = 1).
fn rk4_target_population(n: usize, area: f64) -> f64 {
    let spec = SystemSpec::structured(n, -(n as f64 - 3.0) / 3.0).unwrap();
    let pulse = Pulse::constant(1.0).unwrap();
    let cfg = IntegratorConfig::new(&spec, &pulse, area).unwrap();
    integrate(&spec, &pulse, &cfg).unwrap().last_populations().unwrap()[1]
}

#[test]
fn four_state_design_propagator_transfers() {
    let d = design_transfer(4, 1).unwrap();
    let es = eigen_decompose(&build_coupling(&d.spec()).unwrap()).unwrap();
    let u = propagator(&es, d.area);
    assert!((u.get(1, 0).norm_sqr() - 1.0).abs() < 1e-10);
    assert!((rk4_target_population(4, d.area) - 1.0).abs() < 1e-8);
}

#[test]
fn four_state_half_area_populations() {
    // scipy expm oracle: P1 = P2 = 0.275, P3 = 0.225 per spectator
    let d = design_transfer(4, 1).unwrap();
    let rs = reduced_system(4, d.alpha).unwrap();
    let p = reduced_populations(&rs, 0.5 * d.area);
    assert!((p.p1 - 0.275).abs() < 1e-12);
    assert!((p.p2 - 0.275).abs() < 1e-12);
    assert!((p.p3 - 0.225).abs() < 1e-12);
    assert!((2.0 * p.p3 - (1.0 - 2.0 * p.p1)).abs() < 1e-12);
}

#[test]
fn design_validity_through_full_matrix() {
    for n in 3..=10 {
        for n0 in [1, 3, 5] {
            let d = design_transfer(n, n0).unwrap();
            let es = eigen_decompose(&build_coupling(&d.spec()).unwrap()).unwrap();
            let p = full_matrix_populations(&es, d.area, 2);
            assert!((p.p2 - 1.0).abs() < 1e-10, "n={n} n0={n0} p2={}", p.p2);
            let (k, kp) = d.phase_conditions().unwrap();
            assert!((k - 2.0 * n0 as f64).abs() < 1e-10);
            assert!((kp + n0 as f64).abs() < 1e-10);
        }
    }
}

#[test]
fn negative_branch_transfers_too() {
    let d = design_transfer_signed(5, 3, Branch::Negative).unwrap();
    assert!(d.area < 0.0);
    let es = eigen_decompose(&build_coupling(&d.spec()).unwrap()).unwrap();
    assert!((full_matrix_populations(&es, d.area, 4).p2 - 1.0).abs() < 1e-10);
}

#[test]
fn theta_form_exact_for_three_states() {
    let d = design_transfer(3, 1).unwrap();
    let rs = reduced_system(3, d.alpha).unwrap();
    let mut theta = 0.0;
    while theta <= 4.0 * PI {
        let closed = theta_populations(theta, 3).unwrap().populations;
        let full = reduced_populations(&rs, theta * d.area / (2.0 * PI));
        assert!(closed.max_abs_diff(&full) < 1e-12, "theta = {theta}");
        theta += 1e-3;
    }
}

#[test]
fn theta_form_endpoints_for_larger_systems() {
    for n in 3..=12 {
        for n0 in [1, 3] {
            let d = design_transfer(n, n0).unwrap();
            let rs = reduced_system(n, d.alpha).unwrap();
            for theta in [0.0, 2.0 * PI * n0 as f64] {
                let closed = theta_populations(theta, n).unwrap().populations;
                let full = reduced_populations(&rs, d.theta_inverse(theta));
                assert!(closed.max_abs_diff(&full) < 1e-10, "n={n} theta={theta}");
            }
        }
    }
}

#[test]
fn theta_form_mid_pulse_deviation_for_four_states() {
    // the closed form is not the solution for n = 4 away from the endpoints
    let d = design_transfer(4, 1).unwrap();
    let rs = reduced_system(4, d.alpha).unwrap();
    let closed = theta_populations(PI, 4).unwrap();
    assert!(!closed.exact);
    let full = reduced_populations(&rs, d.theta_inverse(PI));
    assert!((closed.populations.max_abs_diff(&full) - 0.025).abs() < 1e-12);
}

trait ThetaInverse {
    fn theta_inverse(&self, theta: f64) -> f64;
}

impl ThetaInverse for TransferDesign {
    fn theta_inverse(&self, theta: f64) -> f64 {
        theta * self.area / (2.0 * PI * self.n0 as f64)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn reduced_matches_full_matrix(n in 3usize..=8, alpha in -3.0f64..3.0, seed in 0u64..1000) {
        let rs = reduced_system(n, alpha).unwrap();
        let es = eigen_decompose(&build_coupling(&SystemSpec::structured(n, alpha).unwrap()).unwrap()).unwrap();
        // 100 areas spread deterministically over [0, 10] from the seed
        for i in 0..100u64 {
            let area = 10.0 * (((seed * 7919 + i * 104_729) % 10_007) as f64 / 10_007.0);
            let spectator = 2 + (i as usize % (n - 2));
            let full = full_matrix_populations(&es, area, spectator);
            let reduced = reduced_populations(&rs, area);
            prop_assert!(full.max_abs_diff(&reduced) < 1e-10);
            prop_assert!((reduced.total(n) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spectators_share_modulus(n in 4usize..=9, alpha in -3.0f64..3.0, area in 0.0f64..10.0) {
        let es = eigen_decompose(&build_coupling(&SystemSpec::structured(n, alpha).unwrap()).unwrap()).unwrap();
        let a = es.evolve(&AmplitudeVector::basis(n, 0), area);
        for j in 3..n {
            prop_assert!((a[j].norm() - a[2].norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn propagator_group_law(
        entries in proptest::collection::vec(-2.0f64..2.0, 15),
        a1 in -5.0f64..5.0,
        a2 in -5.0f64..5.0,
    ) {
        let n = 5;
        let mut rows = vec![vec![0.0; n]; n];
        let mut it = entries.into_iter();
        for i in 0..n {
            for j in i..n {
                let v = it.next().unwrap();
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        let w = CouplingMatrix::from_rows(&rows).unwrap();
        let es = eigen_decompose(&w).unwrap();
        prop_assert!(es.max_residual(&w) <= 1e-10 * w.frobenius_norm().max(1.0));
        let (u1, u2) = (propagator(&es, a1), propagator(&es, a2));
        prop_assert!(u1.unitarity_error() < 1e-10);
        prop_assert!(u1.matmul(&u2).max_abs_diff(&propagator(&es, a1 + a2)) < 1e-10);
        prop_assert!(propagator(&es, 0.0).max_abs_diff(&ComplexMatrix::identity(n)) < 1e-10);
    }

    #[test]
    fn coupling_is_bitwise_symmetric(
        n in 3usize..12,
        alpha in -5.0f64..5.0,
        beta in -5.0f64..5.0,
        gamma in -5.0f64..5.0,
        eps in proptest::array::uniform3(-2.0f64..2.0),
    ) {
        let spec = SystemSpec::new(n, CouplingSpec::Structured { alpha, beta, gamma, epsilon: eps }).unwrap();
        let w = build_coupling(&spec).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(w.get(i, j).to_bits(), w.get(j, i).to_bits());
            }
        }
    }
}
