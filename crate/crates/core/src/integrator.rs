//! Fixed-step fourth-order Runge-Kutta solution of
//! `i da_k/dt = E_k a_k + V(t) sum_j W_kj a_j`, plus exact jumps for delta
//! kicks.
//!
//! This route shares nothing with the spectral module except the coupling
//! layout, so it serves as the independent check on the exact solution and
//! is the only route that handles split energies.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::model::{build_coupling, AmplitudeVector, CouplingMatrix, Pulse, SystemSpec, Trajectory};
use crate::spectral::eigen_decompose;

/// Largest tolerated `|1 - sum |a_k|^2|` during a run.
pub const NORM_TOLERANCE: f64 = 1e-8;

/// Hard cap on the number of RK4 steps in one run.
pub const MAX_STEPS: f64 = 1e9;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    pub sample_stride: usize,
    /// Repeat the run at `dt / 2` and record the largest population
    /// difference in [`Trajectory::step_error`].
    pub richardson_check: bool,
}

impl IntegratorConfig {
    /// Default step for `spec` driven by `pulse`, sampling every step.
    pub fn new(spec: &SystemSpec, pulse: &Pulse, t_end: f64) -> Result<Self> {
        let w = build_coupling(spec)?;
        Ok(IntegratorConfig {
            dt: default_dt(&w, spec.energies(), pulse),
            t_end,
            sample_stride: 1,
            richardson_check: false,
        })
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.sample_stride = stride;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    /// Sets the stride so roughly `samples` evenly spaced points are emitted,
    /// and shrinks `dt` so those points fall exactly on the step grid.
    pub fn with_samples(mut self, samples: usize) -> Self {
        let intervals = samples.saturating_sub(1).max(1);
        let per = (self.t_end / intervals as f64 / self.dt).ceil().max(1.0) as usize;
        self.sample_stride = per;
        self.dt = self.t_end / (per * intervals) as f64;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt must be positive"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(invalid("t_end must be positive"));
        }
        if self.sample_stride == 0 {
            return Err(invalid("sample_stride must be at least 1"));
        }
        Ok(())
    }

    /// Number of uniform steps covering `[0, t_end]`.
    pub fn step_count(&self) -> Result<usize> {
        let steps = (self.t_end / self.dt - 1e-9).ceil().max(1.0);
        if steps > MAX_STEPS {
            return Err(Error::StepCountOverflow { steps });
        }
        Ok(steps as usize)
    }
}

/// `1e-3 / max(1, |W| chi, max |E_k|, omega)`.
pub fn default_dt(w: &CouplingMatrix, energies: &[f64], pulse: &Pulse) -> f64 {
    let e_max = energies.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let rate = 1f64
        .max(w.norm_inf() * pulse.amplitude_scale())
        .max(e_max)
        .max(pulse.frequency_scale());
    1e-3 / rate
}

/// RK4 stepper for one system and smooth envelope.
#[derive(Debug, Clone)]
pub struct Rk4Solver {
    energies: Vec<f64>,
    w: CouplingMatrix,
    pulse: Pulse,
}

impl Rk4Solver {
    pub fn new(spec: &SystemSpec, pulse: &Pulse) -> Result<Self> {
        pulse.validate()?;
        if pulse.is_kick_train() {
            return Err(invalid("kick trains have no sampled envelope; use integrate_kicks"));
        }
        Ok(Rk4Solver {
            energies: spec.energies().to_vec(),
            w: build_coupling(spec)?,
            pulse: pulse.clone(),
        })
    }

    /// `da/dt` written into `out`.
    fn derivative(&self, t: f64, a: &[Complex64], out: &mut [Complex64]) {
        let v = self.pulse.value(t);
        for (k, o) in out.iter_mut().enumerate() {
            let coupled: Complex64 = self.w.row(k).iter().zip(a).map(|(w, x)| x * *w).sum();
            *o = -I * (a[k] * self.energies[k] + coupled * v);
        }
    }

    /// One classic RK4 step of size `h` (negative steps run backwards).
    pub fn step(&self, t: f64, h: f64, a: &mut [Complex64]) {
        let n = a.len();
        let zero = Complex64::new(0.0, 0.0);
        let (mut k1, mut k2, mut k3, mut k4) =
            (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
        let mut tmp = vec![zero; n];
        self.derivative(t, a, &mut k1);
        for i in 0..n {
            tmp[i] = a[i] + k1[i] * (0.5 * h);
        }
        self.derivative(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = a[i] + k2[i] * (0.5 * h);
        }
        self.derivative(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = a[i] + k3[i] * h;
        }
        self.derivative(t + h, &tmp, &mut k4);
        for i in 0..n {
            a[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }

    /// Advances `a` from `t_from` to `t_to` in `steps` equal steps.
    pub fn propagate(&self, a: &mut [Complex64], t_from: f64, t_to: f64, steps: usize) {
        let h = (t_to - t_from) / steps as f64;
        for m in 0..steps {
            self.step(t_from + m as f64 * h, h, a);
        }
    }

    fn run(&self, cfg: &IntegratorConfig) -> Result<Trajectory> {
        let steps = cfg.step_count()?;
        let h = cfg.t_end / steps as f64;
        let n = self.energies.len();
        let mut a = AmplitudeVector::basis(n, 0).into_inner();
        let mut traj = Trajectory::with_capacity(steps / cfg.sample_stride + 2);
        traj.push(0.0, 0.0, AmplitudeVector::from_vec(a.clone()));
        for m in 0..steps {
            let t = m as f64 * h;
            self.step(t, h, &mut a);
            let t_next = if m + 1 == steps { cfg.t_end } else { (m + 1) as f64 * h };
            let norm: f64 = a.iter().map(|x| x.norm_sqr()).sum();
            let drift = (1.0 - norm).abs();
            if !(drift <= NORM_TOLERANCE) {
                return Err(Error::NormDrift {
                    drift,
                    time: t_next,
                });
            }
            if (m + 1) % cfg.sample_stride == 0 || m + 1 == steps {
                traj.push(t_next, self.pulse.area(t_next), AmplitudeVector::from_vec(a.clone()));
            }
        }
        Ok(traj)
    }
}

/// Integrates from `a(0) = e1` to `cfg.t_end`.
///
/// Samples every `sample_stride` steps plus the final time. Fails with
/// [`Error::NormDrift`] as soon as the norm leaves `1 ± 1e-8`.
pub fn integrate(spec: &SystemSpec, pulse: &Pulse, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let solver = Rk4Solver::new(spec, pulse)?;
    let mut traj = solver.run(cfg)?;
    if cfg.richardson_check {
        let fine_cfg = IntegratorConfig {
            dt: cfg.t_end / (2 * cfg.step_count()?) as f64,
            sample_stride: 2 * cfg.sample_stride,
            richardson_check: false,
            ..cfg.clone()
        };
        let fine = solver.run(&fine_cfg)?;
        let diff = traj
            .populations
            .iter()
            .zip(&fine.populations)
            .flat_map(|(p, q)| p.iter().zip(q).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        traj.step_error = Some(diff);
    }
    Ok(traj)
}

/// Applies a kick train exactly: free phases `exp(-i E_k dt)` between kicks
/// and the jump `exp(-i A0 W)` at each kick.
///
/// Samples at `t = 0`, immediately before and after every kick in
/// `[0, t_end]`, and at `t_end`.
pub fn integrate_kicks(spec: &SystemSpec, train: &Pulse, t_end: f64) -> Result<Trajectory> {
    train.validate()?;
    let Pulse::KickTrain(kicks) = train else {
        return Err(invalid("integrate_kicks needs a kick train"));
    };
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(invalid("t_end must be non-negative"));
    }
    if kicks.first().is_some_and(|k| k.time < 0.0) {
        return Err(invalid("kick times must be non-negative"));
    }
    let n = spec.n();
    let energies = spec.energies();
    let free = |a: &mut [Complex64], dt: f64| {
        if dt != 0.0 {
            for (x, e) in a.iter_mut().zip(energies) {
                *x *= Complex64::from_polar(1.0, -e * dt);
            }
        }
    };

    let mut w = build_coupling(spec)?;
    let mut es = eigen_decompose(&w)?;
    let mut a = AmplitudeVector::basis(n, 0).into_inner();
    let mut traj = Trajectory::with_capacity(2 * kicks.len() + 2);
    let (mut t, mut area) = (0.0, 0.0);
    traj.push(t, area, AmplitudeVector::from_vec(a.clone()));

    for kick in kicks.iter().take_while(|k| k.time <= t_end) {
        free(&mut a, kick.time - t);
        t = kick.time;
        traj.push(t, area, AmplitudeVector::from_vec(a.clone()));
        if let Some((p, q)) = kick.swap {
            if p >= n || q >= n {
                return Err(invalid(format!("kick swap ({p}, {q}) out of range")));
            }
            w = w.swap_states(p, q);
            es = eigen_decompose(&w)?;
        }
        a = es.evolve(&a, kick.area).into_inner();
        area += kick.area;
        traj.push(t, area, AmplitudeVector::from_vec(a.clone()));
    }
    if t_end > t || traj.len() == 1 {
        free(&mut a, t_end - t);
        traj.push(t_end, area, AmplitudeVector::from_vec(a));
    }
    Ok(traj)
}

/// Empirical RK4 order `log2(e(dt) / e(dt / 2))` at `t_probe`, measured
/// against the exact degenerate solution with a coarse step `0.1 / rate`.
///
/// Returns NaN when both errors vanish (e.g. zero coupling).
pub fn convergence_order(spec: &SystemSpec, pulse: &Pulse, t_probe: f64) -> Result<f64> {
    let w = build_coupling(spec)?;
    let dt = 100.0 * default_dt(&w, spec.energies(), pulse);
    convergence_order_with(spec, pulse, t_probe, dt)
}

/// [`convergence_order`] with an explicit coarse step.
pub fn convergence_order_with(spec: &SystemSpec, pulse: &Pulse, t_probe: f64, dt: f64) -> Result<f64> {
    if !spec.is_degenerate() {
        return Err(Error::NotDegenerate);
    }
    if !(t_probe > 0.0 && dt > 0.0) {
        return Err(invalid("t_probe and dt must be positive"));
    }
    let solver = Rk4Solver::new(spec, pulse)?;
    let es = eigen_decompose(&build_coupling(spec)?)?;
    let start = AmplitudeVector::basis(spec.n(), 0);
    let exact = es.evolve(&start, pulse.area(t_probe));
    let error = |steps: usize| {
        let mut a = start.to_vec();
        solver.propagate(&mut a, 0.0, t_probe, steps);
        a.iter()
            .zip(exact.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    };
    let coarse = ((t_probe / dt).ceil() as usize).max(8);
    let (e1, e2) = (error(coarse), error(2 * coarse));
    if e1 == 0.0 && e2 == 0.0 {
        return Ok(f64::NAN);
    }
    Ok((e1 / e2).log2())
}
