//! Randomized invariant checks over every library module, runnable from a
//! release binary without the test harness.

use std::f64::consts::{FRAC_PI_2, PI};

use clap::Args;
use degenpop::*;
use std::result::Result;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::commands::Globals;
use crate::error::{usage, CliError, CliResult};

const MODULES: [&str; 4] = ["model", "spectral", "integrator", "analysis"];
const CASES: usize = 8;

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Run only the properties of one module.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(MODULES))]
    pub filter: Option<String>,
    /// Force this RK4 step in the integrator properties.
    #[arg(long)]
    pub dt: Option<f64>,
}

struct Ctx {
    rng: StdRng,
    dt: Option<f64>,
}

type Check = fn(&mut Ctx) -> Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: degenpop::Result<T>) -> Result<T, String> {
    r.map_err(|e| format!("error={} {e}", e.name()))
}

fn random_structured(ctx: &mut Ctx, n_lo: usize, n_hi: usize) -> SystemSpec {
    let n = ctx.rng.gen_range(n_lo..=n_hi);
    let mut p = || ctx.rng.gen_range(-2.0..2.0);
    let coupling = CouplingSpec::Structured {
        alpha: p(),
        beta: p(),
        gamma: p(),
        epsilon: [p(), p(), p()],
    };
    SystemSpec::new(n, coupling).expect("n >= 3")
}

fn random_symmetric(ctx: &mut Ctx, n: usize) -> CouplingMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = ctx.rng.gen_range(-2.0..2.0);
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    CouplingMatrix::from_rows(&rows).expect("symmetric by construction")
}

fn random_pulse(ctx: &mut Ctx) -> Pulse {
    match ctx.rng.gen_range(0..3) {
        0 => Pulse::cosine(ctx.rng.gen_range(0.2..2.0), ctx.rng.gen_range(0.3..3.0)),
        1 => Pulse::constant(ctx.rng.gen_range(-2.0..2.0)),
        _ => Pulse::gaussian(
            ctx.rng.gen_range(0.2..2.0),
            ctx.rng.gen_range(0.5..2.0),
            ctx.rng.gen_range(0.1..1.0),
        ),
    }
    .expect("valid parameters")
}

fn coupling_symmetric(ctx: &mut Ctx) -> Result<(), String> {
    for _ in 0..CASES {
        let spec = random_structured(ctx, 3, 12);
        let w = lib(build_coupling(&spec))?;
        let CouplingSpec::Structured { alpha, beta, .. } = *spec.coupling() else {
            unreachable!()
        };
        ensure(w.get(0, 1) == alpha && w.get(0, 2) == beta, || {
            format!("layout mismatch for {spec:?}")
        })?;
        for i in 0..w.dim() {
            for j in 0..w.dim() {
                ensure(w.get(i, j).to_bits() == w.get(j, i).to_bits(), || {
                    format!("W[{i}][{j}] != W[{j}][{i}]")
                })?;
            }
        }
    }
    Ok(())
}

fn area_is_antiderivative(ctx: &mut Ctx) -> Result<(), String> {
    let h = 1e-4;
    for _ in 0..CASES {
        let pulse = random_pulse(ctx);
        let t = ctx.rng.gen_range(h..4.0);
        let slope = (pulse_area(&pulse, t + h) - pulse_area(&pulse, t - h)) / (2.0 * h);
        let v = pulse_value(&pulse, t);
        ensure((slope - v).abs() <= 1e-6 * v.abs().max(1.0), || {
            format!("{pulse:?} at t={t}: dA/dt={slope} V={v}")
        })?;
        ensure(pulse_area(&pulse, 0.0) == 0.0, || format!("{pulse:?}: A(0) != 0"))?;
    }
    Ok(())
}

fn area_inversion_round_trip(ctx: &mut Ctx) -> Result<(), String> {
    for _ in 0..CASES {
        let (chi, omega) = (ctx.rng.gen_range(0.2..3.0), ctx.rng.gen_range(0.1..5.0));
        let pulse = Pulse::cosine(chi, omega).expect("valid parameters");
        let target = ctx.rng.gen_range(-0.99..0.99) * chi / omega;
        let t = lib(invert_area(&pulse, target))?;
        let got = pulse_area(&pulse, t);
        ensure(t >= 0.0 && (got - target).abs() <= 1e-10, || {
            format!("chi={chi} omega={omega}: A({t})={got}, wanted {target}")
        })?;
    }
    Ok(())
}

fn eigen_residual(ctx: &mut Ctx) -> Result<(), String> {
    for _ in 0..CASES {
        let n = ctx.rng.gen_range(2..=12);
        let w = random_symmetric(ctx, n);
        let es = lib(eigen_decompose(&w))?;
        let res = es.max_residual(&w);
        let orth = es.orthogonality_error();
        ensure(res <= 1e-10 * w.frobenius_norm().max(1.0) && orth <= 1e-10, || {
            format!("n={n}: residual {res:e}, orthogonality {orth:e}")
        })?;
        ensure(es.eigenvalues().windows(2).all(|z| z[0] <= z[1]), || {
            format!("n={n}: eigenvalues not ascending")
        })?;
    }
    Ok(())
}

fn unitarity_and_group_law(ctx: &mut Ctx) -> Result<(), String> {
    for _ in 0..CASES {
        let n = ctx.rng.gen_range(2..=8);
        let es = lib(eigen_decompose(&random_symmetric(ctx, n)))?;
        let (a1, a2) = (ctx.rng.gen_range(-5.0..5.0), ctx.rng.gen_range(-5.0..5.0));
        let (u1, u2) = (propagator(&es, a1), propagator(&es, a2));
        let unit = u1.unitarity_error();
        let group = u1.matmul(&u2).max_abs_diff(&propagator(&es, a1 + a2));
        ensure(unit <= 1e-10 && group <= 1e-10, || {
            format!("n={n}: unitarity {unit:e}, group law {group:e}")
        })?;
    }
    Ok(())
}

fn reduced_matches_full(ctx: &mut Ctx) -> Result<(), String> {
    for _ in 0..CASES {
        let n = ctx.rng.gen_range(3..=8);
        let alpha = ctx.rng.gen_range(-3.0..3.0);
        let rs = lib(reduced_system(n, alpha))?;
        let spec = SystemSpec::structured(n, alpha).expect("n >= 3");
        let es = lib(eigen_decompose(&lib(build_coupling(&spec))?))?;
        let area = ctx.rng.gen_range(0.0..10.0);
        let diff = full_matrix_populations(&es, area, n - 1).max_abs_diff(&reduced_populations(&rs, area));
        ensure(diff <= 1e-10, || format!("n={n} alpha={alpha} A={area}: {diff:e}"))?;
    }
    Ok(())
}

fn designs_transfer(_: &mut Ctx) -> Result<(), String> {
    for n in 3..=10 {
        for n0 in [1, 3] {
            let d = lib(design_transfer(n, n0))?;
            let es = lib(eigen_decompose(&lib(build_coupling(&d.spec()))?))?;
            let p2 = full_matrix_populations(&es, d.area, 2).p2;
            let (k, kp) = lib(d.phase_conditions())?;
            ensure((p2 - 1.0).abs() <= 1e-10, || format!("n={n} n0={n0}: P2={p2}"))?;
            ensure(
                (k - 2.0 * n0 as f64).abs() <= 1e-10 && (kp + n0 as f64).abs() <= 1e-10,
                || format!("n={n} n0={n0}: k={k} k'={kp}"),
            )?;
        }
    }
    Ok(())
}

fn closed_form_three_state(ctx: &mut Ctx) -> Result<(), String> {
    let d = lib(design_transfer(3, 1))?;
    let rs = lib(reduced_system(3, d.alpha))?;
    for _ in 0..100 {
        let theta = ctx.rng.gen_range(0.0..4.0 * PI);
        let closed = lib(theta_populations(theta, 3))?.populations;
        let diff = closed.max_abs_diff(&reduced_populations(&rs, d.area * theta / (2.0 * PI)));
        ensure(diff <= 1e-12, || format!("theta={theta}: {diff:e}"))?;
    }
    Ok(())
}

fn config_for(ctx: &Ctx, spec: &SystemSpec, pulse: &Pulse, t_end: f64) -> Result<IntegratorConfig, String> {
    let cfg = lib(IntegratorConfig::new(spec, pulse, t_end))?;
    Ok(match ctx.dt {
        Some(dt) => cfg.with_dt(dt),
        None => cfg,
    })
}

fn rk4_matches_analytic(ctx: &mut Ctx) -> Result<(), String> {
    for _ in 0..CASES / 2 {
        let spec = random_structured(ctx, 3, 5);
        let pulse = random_pulse(ctx);
        let t_end = ctx.rng.gen_range(0.5..2.0);
        let cfg = config_for(ctx, &spec, &pulse, t_end)?.with_stride(usize::MAX);
        let traj = lib(integrate(&spec, &pulse, &cfg))?;
        let exact = lib(evolve_analytic(&spec, &pulse, &[0.0, t_end]))?;
        let last = traj.last_populations().expect("final sample");
        let diff = last
            .iter()
            .zip(&exact.populations[1])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        ensure(diff <= 1e-6, || format!("{pulse:?}: |rk4 - analytic| = {diff:e}"))?;
    }
    Ok(())
}

fn norm_conserved_with_split_levels(ctx: &mut Ctx) -> Result<(), String> {
    for _ in 0..CASES / 2 {
        let spec = random_structured(ctx, 3, 6);
        let energies = (0..spec.n()).map(|_| ctx.rng.gen_range(-1.0..1.0)).collect();
        let spec = lib(spec.with_new_energies(energies))?;
        let pulse = random_pulse(ctx);
        let cfg = config_for(ctx, &spec, &pulse, 2.0)?.with_stride(100);
        let traj = lib(integrate(&spec, &pulse, &cfg))?;
        let drift = traj.max_norm_drift();
        ensure(drift <= 1e-8, || format!("norm drift {drift:e}"))?;
    }
    Ok(())
}

fn rk4_order_is_four(_: &mut Ctx) -> Result<(), String> {
    let d = lib(design_transfer(3, 1))?;
    let pulse = lib(designed_cosine(d.area, 1.0))?;
    let t0 = lib(invert_area(&pulse, d.area))?;
    let order = lib(convergence_order(&d.spec(), &pulse, t0))?;
    ensure((3.7..=4.3).contains(&order), || format!("order {order}"))
}

fn quarter_kick_transfers(ctx: &mut Ctx) -> Result<(), String> {
    let spec = SystemSpec::new(2, CouplingSpec::two_state()).expect("two-state system");
    let t = ctx.rng.gen_range(0.0..5.0);
    let train = lib(Pulse::kicks(vec![Kick::new(t, FRAC_PI_2)]))?;
    let traj = lib(integrate_kicks(&spec, &train, t + 3.0))?;
    for p in traj.populations.iter().skip(2) {
        ensure((p[1] - 1.0).abs() <= 1e-12, || format!("post-kick P2={}", p[1]))?;
    }
    Ok(())
}

fn degenerate_limit_has_no_leakage(ctx: &mut Ctx) -> Result<(), String> {
    let n = ctx.rng.gen_range(3..=5);
    let points = lib(leakage_scan(n, 1, 1.0, &[0.0]))?;
    ensure(points[0].leakage <= 1e-8, || format!("n={n}: leakage {}", points[0].leakage))
}

fn power_law_recovered(ctx: &mut Ctx) -> Result<(), String> {
    for _ in 0..CASES {
        let c = ctx.rng.gen_range(0.01..10.0);
        let p = ctx.rng.gen_range(0.5..3.0);
        let points: Vec<LeakagePoint> = (0..6)
            .map(|i| {
                let r = 0.01 * 1.7f64.powi(i);
                LeakagePoint {
                    detuning_ratio: r,
                    leakage: c * r.powf(p),
                }
            })
            .collect();
        let fit = lib(fit_power_law(&points))?;
        ensure(
            (fit.exponent - p).abs() <= 1e-10 && (fit.coefficient - c).abs() <= 1e-9 * c,
            || format!("c={c} p={p}: got {fit:?}"),
        )?;
    }
    Ok(())
}

fn fidelity_at_design_time(_: &mut Ctx) -> Result<(), String> {
    let d = lib(design_transfer(4, 1))?;
    let pulse = lib(designed_cosine(d.area, 1.0))?;
    let t0 = lib(invert_area(&pulse, d.area))?;
    let times: Vec<f64> = (0..=200).map(|i| t0 * i as f64 / 200.0).collect();
    let traj = lib(evolve_analytic(&d.spec(), &pulse, &times))?;
    let f = lib(transfer_fidelity(&traj, 1, t0))?;
    ensure((f - 1.0).abs() <= 1e-10, || format!("fidelity {f}"))
}

const PROPERTIES: [(&str, &str, Check); 15] = [
    ("model", "coupling_symmetric", coupling_symmetric),
    ("model", "area_is_antiderivative", area_is_antiderivative),
    ("model", "area_inversion_round_trip", area_inversion_round_trip),
    ("spectral", "eigen_residual", eigen_residual),
    ("spectral", "unitarity_and_group_law", unitarity_and_group_law),
    ("spectral", "reduced_matches_full", reduced_matches_full),
    ("spectral", "designs_transfer", designs_transfer),
    ("spectral", "closed_form_three_state", closed_form_three_state),
    ("integrator", "rk4_matches_analytic", rk4_matches_analytic),
    ("integrator", "norm_conserved_with_split_levels", norm_conserved_with_split_levels),
    ("integrator", "rk4_order_is_four", rk4_order_is_four),
    ("integrator", "quarter_kick_transfers", quarter_kick_transfers),
    ("analysis", "degenerate_limit_has_no_leakage", degenerate_limit_has_no_leakage),
    ("analysis", "power_law_recovered", power_law_recovered),
    ("analysis", "fidelity_at_design_time", fidelity_at_design_time),
];

pub fn selftest(g: &Globals, args: &SelftestArgs) -> CliResult<()> {
    if g.out.is_some() || g.svg.is_some() {
        return Err(usage("selftest writes no files"));
    }
    if let Some(dt) = args.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(usage("--dt must be positive"));
        }
    }
    let seed = g.seed.unwrap_or(0);
    let mut ctx = Ctx {
        rng: StdRng::seed_from_u64(seed),
        dt: args.dt,
    };
    if !g.porcelain {
        println!("selftest seed={seed}");
    }
    let (mut total, mut failed) = (0, 0);
    for (module, name, check) in PROPERTIES {
        if args.filter.as_deref().is_some_and(|f| f != module) {
            continue;
        }
        total += 1;
        let outcome = check(&mut ctx);
        match (&outcome, g.porcelain) {
            (Ok(()), true) => println!("{module}/{name}=pass"),
            (Ok(()), false) => println!("[PASS] {module}/{name}"),
            (Err(msg), true) => println!("{module}/{name}=fail {msg}"),
            (Err(msg), false) => println!("[FAIL] {module}/{name}: {msg}"),
        }
        failed += usize::from(outcome.is_err());
    }
    if !g.porcelain {
        println!("{}/{total} properties passed", total - failed);
    }
    if failed > 0 {
        return Err(CliError::SelftestFailed { failed, total });
    }
    Ok(())
}
