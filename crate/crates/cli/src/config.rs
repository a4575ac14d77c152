//! Run configuration: flat `key = value` lines grouped under `[section]`
//! headers. `#` starts a comment. Unknown sections and keys are rejected.
//!
//! ```text
//! [system]
//! n = 4
//! energies = 0, 0.01, 0.02, 0.03
//!
//! [design]
//! n0 = 1
//!
//! [pulse]
//! shape = cosine
//! omega = 1
//!
//! [run]
//! samples = 401
//! method = both
//! ```

use std::path::Path;

use clap::ValueEnum;
use degenpop::{
    design_transfer_2state, design_transfer_signed, designed_cosine, Branch, CouplingSpec, Kick,
    Pulse, SystemSpec,
};

use crate::error::{config_err, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Analytic,
    Rk4,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Cosine,
    Constant,
    Gaussian,
    Kicks,
}

/// Kick entry before the design area is known; `area = None` means `A0`
/// scaled by `area_sign`.
#[derive(Debug, Clone, PartialEq)]
pub struct KickEntry {
    pub time: f64,
    pub area: Option<f64>,
    pub area_sign: f64,
    pub swap: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SystemSection {
    pub n: Option<usize>,
    pub energies: Option<Vec<f64>>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub epsilon: Option<Vec<f64>>,
    pub matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DesignSection {
    pub n0: Option<i64>,
    pub branch: Option<Branch>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PulseSection {
    pub shape: Option<Shape>,
    pub chi: Option<f64>,
    pub omega: Option<f64>,
    pub v0: Option<f64>,
    pub peak: Option<f64>,
    pub area: Option<f64>,
    pub center: Option<f64>,
    pub width: Option<f64>,
    pub kicks: Option<Vec<KickEntry>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSection {
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub samples: Option<usize>,
    pub method: Option<Method>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub system: SystemSection,
    pub design: DesignSection,
    pub pulse: PulseSection,
    pub run: RunSection,
}

enum Set {
    Done,
    Unknown,
}

fn parse_f64(v: &str) -> Result<f64, String> {
    let x: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{v}` is not finite"))
    }
}

fn parse_int<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.trim().parse().map_err(|_| format!("`{v}` is not an integer"))
}

pub fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(parse_f64).collect()
}

fn parse_matrix(v: &str) -> Result<Vec<Vec<f64>>, String> {
    v.split(';')
        .map(|row| row.split_whitespace().map(parse_f64).collect())
        .collect()
}

fn parse_enum<T: ValueEnum>(v: &str) -> Result<T, String> {
    T::from_str(v.trim(), true).map_err(|_| format!("unrecognised value `{v}`"))
}

fn parse_branch(v: &str) -> Result<Branch, String> {
    match v.trim() {
        "positive" | "+" | "+1" | "1" => Ok(Branch::Positive),
        "negative" | "-" | "-1" => Ok(Branch::Negative),
        _ => Err(format!("branch must be positive or negative, got `{v}`")),
    }
}

/// `t:area[:a-b]` entries separated by commas; labels are 1-based and
/// `area` may be `A0` or `-A0`.
pub fn parse_kicks(v: &str) -> Result<Vec<KickEntry>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|entry| {
            let parts: Vec<&str> = entry.trim().split(':').collect();
            if !(2..=3).contains(&parts.len()) {
                return Err(format!("kick `{entry}` must look like t:area[:a-b]"));
            }
            let time = parse_f64(parts[0])?;
            let (area, area_sign) = match parts[1].trim() {
                "A0" | "+A0" => (None, 1.0),
                "-A0" => (None, -1.0),
                s => (Some(parse_f64(s)?), 1.0),
            };
            let swap = match parts.get(2) {
                None => None,
                Some(s) => {
                    let (a, b) = s
                        .split_once('-')
                        .ok_or_else(|| format!("relabel `{s}` must look like a-b"))?;
                    let (a, b): (usize, usize) = (parse_int(a)?, parse_int(b)?);
                    if a == 0 || b == 0 {
                        return Err("state labels start at 1".into());
                    }
                    Some((a - 1, b - 1))
                }
            };
            Ok(KickEntry {
                time,
                area,
                area_sign,
                swap,
            })
        })
        .collect()
}

impl SystemSection {
    fn set(&mut self, key: &str, v: &str) -> Result<Set, String> {
        match key {
            "n" => self.n = Some(parse_int(v)?),
            "energies" => self.energies = Some(parse_list(v)?),
            "alpha" => self.alpha = Some(parse_f64(v)?),
            "beta" => self.beta = Some(parse_f64(v)?),
            "gamma" => self.gamma = Some(parse_f64(v)?),
            "epsilon" => self.epsilon = Some(parse_list(v)?),
            "matrix" => self.matrix = Some(parse_matrix(v)?),
            _ => return Ok(Set::Unknown),
        }
        Ok(Set::Done)
    }
}

impl DesignSection {
    fn set(&mut self, key: &str, v: &str) -> Result<Set, String> {
        match key {
            "n0" => self.n0 = Some(parse_int(v)?),
            "branch" => self.branch = Some(parse_branch(v)?),
            _ => return Ok(Set::Unknown),
        }
        Ok(Set::Done)
    }
}

impl PulseSection {
    fn set(&mut self, key: &str, v: &str) -> Result<Set, String> {
        match key {
            "shape" => self.shape = Some(parse_enum(v)?),
            "chi" => self.chi = Some(parse_f64(v)?),
            "omega" => self.omega = Some(parse_f64(v)?),
            "v0" => self.v0 = Some(parse_f64(v)?),
            "peak" => self.peak = Some(parse_f64(v)?),
            "area" => self.area = Some(parse_f64(v)?),
            "center" => self.center = Some(parse_f64(v)?),
            "width" => self.width = Some(parse_f64(v)?),
            "kicks" => self.kicks = Some(parse_kicks(v)?),
            _ => return Ok(Set::Unknown),
        }
        Ok(Set::Done)
    }

    /// Inline form used by `--pulse`: `shape[:key=value,...]`, e.g.
    /// `cosine:omega=2` or `gaussian:center=3,width=0.5`.
    pub fn parse_inline(s: &str) -> CliResult<Self> {
        let (shape, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut p = PulseSection::default();
        p.set("shape", shape).map_err(config_err)?;
        for item in rest.split(',').filter(|i| !i.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| config_err(format!("pulse option `{item}` must be key=value")))?;
            let k = k.trim();
            if k == "shape" || k == "kicks" {
                return Err(config_err(format!("`{k}` cannot be set inline")));
            }
            if let Set::Unknown = p.set(k, v).map_err(config_err)? {
                return Err(CliError::UnknownKey {
                    line: 0,
                    what: "key",
                    name: format!("pulse.{k}"),
                });
            }
        }
        Ok(p)
    }

    /// Builds the envelope; `a0` is the design area used for defaults.
    pub fn build(&self, a0: f64) -> CliResult<Pulse> {
        let shape = self.shape.unwrap_or(Shape::Cosine);
        let allowed: &[&str] = match shape {
            Shape::Cosine => &["chi", "omega"],
            Shape::Constant => &["v0"],
            Shape::Gaussian => &["peak", "area", "center", "width"],
            Shape::Kicks => &["kicks"],
        };
        for (key, set) in [
            ("chi", self.chi.is_some()),
            ("omega", self.omega.is_some()),
            ("v0", self.v0.is_some()),
            ("peak", self.peak.is_some()),
            ("area", self.area.is_some()),
            ("center", self.center.is_some()),
            ("width", self.width.is_some()),
            ("kicks", self.kicks.is_some()),
        ] {
            if set && !allowed.contains(&key) {
                return Err(config_err(format!(
                    "pulse key `{key}` does not apply to shape {shape:?}"
                )));
            }
        }
        let pulse = match shape {
            Shape::Cosine => {
                let omega = self.omega.unwrap_or(1.0);
                match self.chi {
                    Some(chi) => Pulse::cosine(chi, omega)?,
                    None => designed_cosine(a0, omega)?,
                }
            }
            Shape::Constant => Pulse::constant(self.v0.unwrap_or(1.0))?,
            Shape::Gaussian => {
                let width = self.width.unwrap_or(1.0);
                let center = self.center.unwrap_or(4.0 * width);
                match (self.peak, self.area) {
                    (Some(_), Some(_)) => {
                        return Err(config_err("give either pulse peak or pulse area, not both"))
                    }
                    (Some(peak), None) => Pulse::gaussian(peak, center, width)?,
                    (None, area) => Pulse::gaussian_with_area(area.unwrap_or(a0), center, width)?,
                }
            }
            Shape::Kicks => {
                let kicks = self
                    .kicks
                    .iter()
                    .flatten()
                    .map(|k| {
                        let kick = Kick::new(k.time, k.area.unwrap_or(k.area_sign * a0));
                        match k.swap {
                            Some((a, b)) => kick.with_swap(a, b),
                            None => kick,
                        }
                    })
                    .collect();
                Pulse::kicks(kicks)?
            }
        };
        Ok(pulse)
    }
}

impl RunSection {
    fn set(&mut self, key: &str, v: &str) -> Result<Set, String> {
        match key {
            "t_end" => self.t_end = Some(parse_f64(v)?),
            "dt" => self.dt = Some(parse_f64(v)?),
            "samples" => self.samples = Some(parse_int(v)?),
            "method" => self.method = Some(parse_enum(v)?),
            _ => return Ok(Set::Unknown),
        }
        Ok(Set::Done)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = RunConfig::default();
        let mut section: Option<String> = None;
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim();
                if !["system", "design", "pulse", "run"].contains(&name) {
                    return Err(CliError::UnknownKey {
                        line,
                        what: "section",
                        name: name.to_string(),
                    });
                }
                section = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(config_err(format!("line {line}: expected `key = value`")));
            };
            let key = key.trim();
            let Some(sec) = section.as_deref() else {
                return Err(config_err(format!("line {line}: `{key}` outside any [section]")));
            };
            if !seen.insert(format!("{sec}.{key}")) {
                return Err(config_err(format!("line {line}: duplicate key `{sec}.{key}`")));
            }
            let set = match sec {
                "system" => cfg.system.set(key, value),
                "design" => cfg.design.set(key, value),
                "pulse" => cfg.pulse.set(key, value),
                _ => cfg.run.set(key, value),
            }
            .map_err(|msg| config_err(format!("line {line}: {sec}.{key}: {msg}")))?;
            if let Set::Unknown = set {
                return Err(CliError::UnknownKey {
                    line,
                    what: "key",
                    name: format!("{sec}.{key}"),
                });
            }
        }
        Ok(cfg)
    }

    pub fn n0(&self) -> i64 {
        self.design.n0.unwrap_or(1)
    }

    pub fn branch(&self) -> Branch {
        self.design.branch.unwrap_or_default()
    }

    /// State count from `n`, the matrix, or the energy list, in that order.
    pub fn n(&self) -> Option<usize> {
        self.system
            .n
            .or_else(|| self.system.matrix.as_ref().map(|m| m.len()))
            .or_else(|| self.system.energies.as_ref().map(|e| e.len()))
    }

    /// Design area for the configured `n`, `n0`, and branch. Used as the
    /// transfer target and as the theta reference.
    pub fn design_area(&self, n: usize) -> CliResult<f64> {
        Ok(if n == 2 {
            self.branch().sign() * design_transfer_2state(self.n0())?
        } else {
            design_transfer_signed(n, self.n0(), self.branch())?.area
        })
    }

    /// The system, with design defaults for anything not given.
    pub fn system_spec(&self, n: usize) -> CliResult<SystemSpec> {
        let s = &self.system;
        for (what, len) in [
            ("matrix", s.matrix.as_ref().map(|m| m.len())),
            ("energies", s.energies.as_ref().map(|e| e.len())),
        ] {
            if let Some(len) = len {
                if len != n {
                    return Err(config_err(format!("{what} has {len} states but n = {n}")));
                }
            }
        }
        let energies = s.energies.clone().unwrap_or_else(|| vec![0.0; n]);
        let coupling = if let Some(m) = &s.matrix {
            if s.alpha.is_some() || s.beta.is_some() || s.gamma.is_some() || s.epsilon.is_some() {
                return Err(config_err("matrix excludes alpha, beta, gamma, epsilon"));
            }
            CouplingSpec::Explicit(m.clone())
        } else if n == 2 {
            if s.beta.is_some() || s.gamma.is_some() {
                return Err(config_err("a two-state system takes only alpha and epsilon"));
            }
            CouplingSpec::TwoState {
                alpha: s.alpha.unwrap_or(1.0),
                epsilon: fixed_epsilon(s.epsilon.as_deref())?,
            }
        } else {
            let beta = s.beta.unwrap_or(1.0);
            CouplingSpec::Structured {
                alpha: s.alpha.unwrap_or(-(n as f64 - 3.0) / 3.0),
                beta,
                gamma: s.gamma.unwrap_or(beta),
                epsilon: fixed_epsilon(s.epsilon.as_deref())?,
            }
        };
        Ok(SystemSpec::with_energies(energies, coupling)?)
    }
}

fn fixed_epsilon<const K: usize>(eps: Option<&[f64]>) -> CliResult<[f64; K]> {
    match eps {
        None => Ok([0.0; K]),
        Some(e) => e
            .try_into()
            .map_err(|_| config_err(format!("epsilon needs {K} values, got {}", e.len()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_sections() {
        let cfg = RunConfig::parse(
            "# comment\n[system]\nn = 4\nenergies = 0, 0.1, 0.2, 0.3\n\n[design]\nn0 = 3\nbranch = negative\n\
             [pulse]\nshape = kicks\nkicks = 1:A0, 2:0.5:1-2\n[run]\nt_end = 3 # trailing\nmethod = both\nsamples = 11\n",
        )
        .unwrap();
        assert_eq!(cfg.n(), Some(4));
        assert_eq!(cfg.n0(), 3);
        assert_eq!(cfg.branch(), Branch::Negative);
        assert_eq!(cfg.run.method, Some(Method::Both));
        assert_eq!(cfg.run.t_end, Some(3.0));
        let kicks = cfg.pulse.kicks.unwrap();
        assert_eq!(kicks[0].area, None);
        assert_eq!(kicks[1].swap, Some((0, 1)));
    }

    #[test]
    fn unknown_keys_and_sections_are_errors() {
        let e = RunConfig::parse("[system]\nnn = 4\n").unwrap_err();
        assert!(matches!(e, CliError::UnknownKey { line: 2, .. }), "{e:?}");
        let e = RunConfig::parse("[sytem]\n").unwrap_err();
        assert!(matches!(e, CliError::UnknownKey { what: "section", .. }));
    }

    #[test]
    fn malformed_lines_are_config_errors() {
        for text in [
            "n = 4\n",
            "[system]\nn 4\n",
            "[system]\nn = four\n",
            "[system]\nn = 4\nn = 5\n",
            "[run]\nmethod = euler\n",
            "[pulse]\nkicks = 1:2:0-1\n",
        ] {
            let e = RunConfig::parse(text).unwrap_err();
            assert_eq!(e.name(), "Config", "{text}");
        }
    }

    #[test]
    fn default_system_is_the_design() {
        let cfg = RunConfig::default();
        let spec = cfg.system_spec(4).unwrap();
        assert_eq!(spec, SystemSpec::structured(4, -1.0 / 3.0).unwrap());
        let two = cfg.system_spec(2).unwrap();
        assert_eq!(two.coupling(), &CouplingSpec::two_state());
    }

    #[test]
    fn explicit_matrix_sets_n() {
        let cfg = RunConfig::parse("[system]\nmatrix = 0 1; 1 0\n").unwrap();
        assert_eq!(cfg.n(), Some(2));
        assert!(cfg.system_spec(2).is_ok());
        assert!(cfg.system_spec(3).is_err());
    }

    #[test]
    fn inline_pulse() {
        let p = PulseSection::parse_inline("cosine:chi=2,omega=0.5").unwrap();
        assert_eq!(p.build(1.0).unwrap(), Pulse::cosine(2.0, 0.5).unwrap());
        let p = PulseSection::parse_inline("cosine").unwrap();
        assert_eq!(p.build(1.0).unwrap(), designed_cosine(1.0, 1.0).unwrap());
        assert!(PulseSection::parse_inline("constant:omega=1").unwrap().build(1.0).is_err());
        assert!(PulseSection::parse_inline("square").is_err());
        assert!(PulseSection::parse_inline("cosine:speed=1").is_err());
    }
}
