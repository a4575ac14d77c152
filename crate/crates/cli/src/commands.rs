use std::f64::consts::PI;
use std::path::PathBuf;

use clap::Args;
use degenpop::{
    design_transfer_signed, evolve_analytic, fit_power_law, integrate, integrate_kicks,
    invert_area, leakage_scan, AmplitudeVector, IntegratorConfig, Pulse, SystemSpec, Trajectory,
};

use crate::config::{parse_kicks, parse_list, Method, PulseSection, RunConfig, Shape};
use crate::error::{config_err, usage, CliResult};
use crate::output::{emit, num, population_fields, population_series, push_row, svg_plot};

/// Options shared by every subcommand.
pub struct Globals {
    pub config: RunConfig,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub porcelain: bool,
    pub seed: Option<u64>,
}

/// Summary lines: `key=value` under `--porcelain`, aligned text otherwise.
/// Goes to stdout unless stdout already carries CSV.
struct Summary {
    porcelain: bool,
    lines: Vec<(String, String)>,
}

impl Summary {
    fn new(porcelain: bool) -> Self {
        Summary {
            porcelain,
            lines: Vec::new(),
        }
    }

    fn add(&mut self, key: &str, value: impl ToString) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    fn render(&self) -> String {
        let width = self.lines.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut s = String::new();
        for (k, v) in &self.lines {
            if self.porcelain {
                s.push_str(&format!("{k}={v}\n"));
            } else {
                s.push_str(&format!("{k:<width$} = {v}\n"));
            }
        }
        s
    }

    fn print(&self, to_stderr: bool) {
        if to_stderr {
            eprint!("{}", self.render());
        } else {
            print!("{}", self.render());
        }
    }
}

/// Shortest round-trip form, scientific outside `[1e-4, 1e15)`; `-0` is
/// written as `0`.
fn plain(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if (1e-4..1e15).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn reject_svg(g: &Globals, command: &str) -> CliResult<()> {
    if g.svg.is_some() {
        return Err(usage(format!("--svg is not supported by {command}")));
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// Number of states.
    #[arg(long)]
    pub n: Option<usize>,
    /// Odd design integer n0.
    #[arg(long, allow_negative_numbers = true)]
    pub n0: Option<i64>,
    /// Coupling ratio alpha (defaults to the transfer design).
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Comma-separated bare energies, one per state.
    #[arg(long, allow_hyphen_values = true)]
    pub energies: Option<String>,
}

impl SystemArgs {
    fn apply(&self, cfg: &mut RunConfig) -> CliResult<()> {
        if let Some(n) = self.n {
            cfg.system.n = Some(n);
        }
        if let Some(n0) = self.n0 {
            cfg.design.n0 = Some(n0);
        }
        if let Some(alpha) = self.alpha {
            cfg.system.alpha = Some(alpha);
        }
        if let Some(e) = &self.energies {
            cfg.system.energies = Some(parse_list(e).map_err(config_err)?);
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Pulse used to find t0, as `shape[:key=value,...]`.
    #[arg(long)]
    pub pulse: Option<String>,
}

pub fn design(g: &Globals, args: &DesignArgs) -> CliResult<()> {
    reject_svg(g, "design")?;
    let mut cfg = g.config.clone();
    args.system.apply(&mut cfg)?;
    let n = cfg.n().ok_or_else(|| usage("design needs --n"))?;
    let mut s = Summary::new(g.porcelain);
    s.add("n", n);
    s.add("n0", cfg.n0());
    let a0 = cfg.design_area(n)?;
    if n == 2 {
        s.add("alpha", 1);
        s.add("A0", plain(a0));
    } else {
        let d = design_transfer_signed(n, cfg.n0(), cfg.branch())?;
        s.add("alpha", plain(d.alpha));
        s.add("beta", plain(d.beta));
        s.add("A0", plain(d.area));
        s.add("A0_over_pi", plain(d.area / PI));
        s.add("k", d.k);
        s.add("k_prime", d.k_prime);
    }
    let pulse = match &args.pulse {
        Some(p) => Some(PulseSection::parse_inline(p)?),
        None if cfg.pulse != PulseSection::default() => Some(cfg.pulse.clone()),
        None => None,
    };
    if let Some(p) = pulse {
        let t0 = invert_area(&p.build(a0)?, a0)?;
        s.add("t0", plain(t0));
    }
    emit(g.out.as_deref(), &s.render())
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Pulse as `shape[:key=value,...]`; defaults to the designed cosine.
    #[arg(long)]
    pub pulse: Option<String>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// End time; defaults to the transfer time t0.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Number of output rows.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Upper bound on the RK4 step.
    #[arg(long)]
    pub dt: Option<f64>,
}

fn uniform_times(t_end: f64, samples: usize) -> Vec<f64> {
    let last = samples - 1;
    (0..samples)
        .map(|i| {
            if i == last {
                t_end
            } else {
                t_end * i as f64 / last as f64
            }
        })
        .collect()
}

fn rk4_run(spec: &SystemSpec, pulse: &Pulse, t_end: f64, samples: usize, dt: Option<f64>) -> CliResult<Trajectory> {
    if t_end == 0.0 {
        let mut traj = Trajectory::with_capacity(1);
        traj.push(0.0, 0.0, AmplitudeVector::basis(spec.n(), 0));
        return Ok(traj);
    }
    let mut cfg = IntegratorConfig::new(spec, pulse, t_end)?;
    if let Some(dt) = dt {
        cfg = cfg.with_dt(dt);
    }
    Ok(integrate(spec, pulse, &cfg.with_samples(samples))?)
}

fn is_monotone(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[1] >= w[0])
}

pub fn simulate(g: &Globals, args: &SimulateArgs) -> CliResult<()> {
    let mut cfg = g.config.clone();
    args.system.apply(&mut cfg)?;
    if let Some(p) = &args.pulse {
        cfg.pulse = PulseSection::parse_inline(p)?;
    }
    if args.method.is_some() {
        cfg.run.method = args.method;
    }
    cfg.run.t_end = args.t_end.or(cfg.run.t_end);
    cfg.run.samples = args.samples.or(cfg.run.samples);
    cfg.run.dt = args.dt.or(cfg.run.dt);

    let n = cfg.n().unwrap_or(4);
    let spec = cfg.system_spec(n)?;
    let a0 = cfg.design_area(n)?;
    let pulse = cfg.pulse.build(a0)?;
    if pulse.is_kick_train() {
        return Err(usage("kick schedules run through the kick subcommand"));
    }
    let t_end = match cfg.run.t_end {
        Some(t) => t,
        None => invert_area(&pulse, a0)?,
    };
    if t_end < 0.0 {
        return Err(config_err("t_end must be non-negative"));
    }
    let samples = if t_end == 0.0 { 1 } else { cfg.run.samples.unwrap_or(201) };
    if samples < 2 && t_end > 0.0 {
        return Err(config_err("samples must be at least 2"));
    }
    let method = cfg.run.method.unwrap_or(if spec.is_degenerate() {
        Method::Analytic
    } else {
        Method::Rk4
    });

    let (primary, secondary) = match method {
        Method::Analytic => (evolve_analytic(&spec, &pulse, &uniform_times(t_end, samples))?, None),
        Method::Rk4 => (rk4_run(&spec, &pulse, t_end, samples, cfg.run.dt)?, None),
        Method::Both => {
            let rk4 = rk4_run(&spec, &pulse, t_end, samples, cfg.run.dt)?;
            (evolve_analytic(&spec, &pulse, &rk4.times)?, Some(rk4))
        }
    };

    let n0 = cfg.n0() as f64;
    let theta: Vec<f64> = primary.areas.iter().map(|a| 2.0 * PI * n0 * a / a0).collect();
    let mut header = vec!["t", "A", "theta", "P1", "P2", "P3_per_state", "P3_total", "norm"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    if secondary.is_some() {
        for c in crate::output::POPULATION_COLUMNS {
            header.push(format!("{c}_rk4"));
        }
    }
    let mut csv = String::new();
    push_row(&mut csv, header);
    let mut max_diff: f64 = 0.0;
    for i in 0..primary.len() {
        let mut row = vec![num(primary.times[i]), num(primary.areas[i]), num(theta[i])];
        row.extend(population_fields(&primary.populations[i]).map(num));
        if let Some(rk4) = &secondary {
            row.extend(population_fields(&rk4.populations[i]).map(num));
            for (p, q) in primary.populations[i].iter().zip(&rk4.populations[i]) {
                max_diff = max_diff.max((p - q).abs());
            }
        }
        push_row(&mut csv, row);
    }
    emit(g.out.as_deref(), &csv)?;

    if let Some(path) = &g.svg {
        let (x, label) = if is_monotone(&theta) {
            (&theta, "theta")
        } else {
            (&primary.times, "t")
        };
        emit(Some(path), &svg_plot(x, label, &population_series(&primary)))?;
    }

    let last = primary.last_populations().expect("at least one row");
    let mut s = Summary::new(g.porcelain);
    s.add("method", format!("{method:?}").to_lowercase());
    s.add("rows", primary.len());
    s.add("t_end", plain(t_end));
    s.add("theta_end", plain(*theta.last().unwrap()));
    s.add("P1_end", plain(last[0]));
    s.add("P2_end", plain(last[1]));
    s.add("max_norm_drift", format!("{:.3e}", primary.max_norm_drift()));
    if let Some(rk4) = &secondary {
        s.add("max_norm_drift_rk4", format!("{:.3e}", rk4.max_norm_drift()));
        s.add("max_abs_diff", format!("{max_diff:.3e}"));
    }
    s.print(g.out.is_none());
    Ok(())
}

#[derive(Debug, Args)]
pub struct KickArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Schedule `t:area[:a-b],...`; `area` may be `A0`, `a-b` relabels states.
    #[arg(long, allow_hyphen_values = true)]
    pub kicks: Option<String>,
    /// End time; defaults to one time unit after the last kick.
    #[arg(long)]
    pub t_end: Option<f64>,
}

pub fn kick(g: &Globals, args: &KickArgs) -> CliResult<()> {
    let mut cfg = g.config.clone();
    args.system.apply(&mut cfg)?;
    if let Some(k) = &args.kicks {
        cfg.pulse = PulseSection {
            shape: Some(Shape::Kicks),
            kicks: Some(parse_kicks(k).map_err(config_err)?),
            ..PulseSection::default()
        };
    }
    match cfg.pulse.shape {
        None | Some(Shape::Kicks) => cfg.pulse.shape = Some(Shape::Kicks),
        Some(other) => return Err(usage(format!("kick needs a kick schedule, not {other:?}"))),
    }
    cfg.run.t_end = args.t_end.or(cfg.run.t_end);

    let n = cfg.n().unwrap_or(4);
    let spec = cfg.system_spec(n)?;
    let a0 = cfg.design_area(n)?;
    let train = cfg.pulse.build(a0)?;
    let Pulse::KickTrain(kicks) = &train else {
        unreachable!("shape forced to kicks")
    };
    let t_end = cfg
        .run
        .t_end
        .unwrap_or_else(|| kicks.last().map_or(1.0, |k| k.time + 1.0));
    let traj = integrate_kicks(&spec, &train, t_end)?;
    let applied = kicks.iter().filter(|k| k.time <= t_end).count();

    let n0 = cfg.n0() as f64;
    let mut csv = String::new();
    push_row(
        &mut csv,
        ["t", "event", "A", "theta", "P1", "P2", "P3_per_state", "P3_total", "norm"].map(String::from),
    );
    for i in 0..traj.len() {
        let event = match i {
            0 => "start",
            i if i <= 2 * applied => {
                if i % 2 == 1 {
                    "pre"
                } else {
                    "post"
                }
            }
            _ => "end",
        };
        let a = traj.areas[i];
        let mut row = vec![num(traj.times[i]), event.to_string(), num(a), num(2.0 * PI * n0 * a / a0)];
        row.extend(population_fields(&traj.populations[i]).map(num));
        push_row(&mut csv, row);
    }
    emit(g.out.as_deref(), &csv)?;
    if let Some(path) = &g.svg {
        emit(Some(path), &svg_plot(&traj.times, "t", &population_series(&traj)))?;
    }

    let last = traj.last_populations().expect("at least one row");
    let mut s = Summary::new(g.porcelain);
    s.add("kicks", applied);
    s.add("t_end", plain(t_end));
    s.add("P1_end", plain(last[0]));
    s.add("P2_end", plain(last[1]));
    s.print(g.out.is_none());
    Ok(())
}

#[derive(Debug, Args)]
pub struct LeakageArgs {
    /// Number of states.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub n0: Option<i64>,
    /// Comma list `r1,r2,...` or geometric range `lo..hi:count`.
    #[arg(long, allow_hyphen_values = true)]
    pub ratios: Option<String>,
    /// Pulse angular frequency.
    #[arg(long)]
    pub omega: Option<f64>,
}

/// Comma list, or `lo..hi:count` for `count` geometrically spaced values.
pub fn parse_ratios(s: &str) -> CliResult<Vec<f64>> {
    if let Some((range, count)) = s.split_once(':') {
        let (lo, hi) = range
            .split_once("..")
            .ok_or_else(|| config_err(format!("ratio range `{s}` must look like lo..hi:count")))?;
        let lo: f64 = lo.trim().parse().map_err(|_| config_err(format!("bad ratio `{lo}`")))?;
        let hi: f64 = hi.trim().parse().map_err(|_| config_err(format!("bad ratio `{hi}`")))?;
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| config_err(format!("bad point count `{count}`")))?;
        if !(lo > 0.0 && hi > 0.0) || count == 0 {
            return Err(config_err("geometric range needs lo, hi > 0 and count >= 1"));
        }
        if count == 1 {
            return Ok(vec![lo]);
        }
        let step = (hi / lo).ln() / (count - 1) as f64;
        return Ok((0..count)
            .map(|i| if i == count - 1 { hi } else { lo * (step * i as f64).exp() })
            .collect());
    }
    parse_list(s).map_err(config_err)
}

pub fn leakage(g: &Globals, args: &LeakageArgs) -> CliResult<()> {
    reject_svg(g, "leakage")?;
    let cfg = &g.config;
    let n = args.n.or(cfg.n()).unwrap_or(4);
    let n0 = args.n0.unwrap_or(cfg.n0());
    let omega = args.omega.or(cfg.pulse.omega).unwrap_or(1.0);
    let ratios = parse_ratios(args.ratios.as_deref().unwrap_or("0.01..0.1:8"))?;
    if ratios.is_empty() {
        return Err(config_err("no ratios given"));
    }
    let points = leakage_scan(n, n0, omega, &ratios)?;
    let fit = fit_power_law(&points)?;

    let mut csv = String::new();
    push_row(&mut csv, ["ratio", "leakage"].map(String::from));
    for p in &points {
        push_row(&mut csv, [num(p.detuning_ratio), num(p.leakage)]);
    }
    emit(g.out.as_deref(), &csv)?;
    println!(
        "exponent={:.6}, c={:.6}, r2={:.6}",
        fit.exponent, fit.coefficient, fit.r_squared
    );
    Ok(())
}
