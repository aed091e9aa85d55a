//! Run configuration: a flat `key = value` config file plus programmatic
//! overrides, validated before any compute. Unknown keys are rejected with
//! line diagnostics.

use std::path::PathBuf;

use crate::ensemble::{EnsembleSpec, ObservableFlags};
use crate::error::{Error, Result};
use crate::hamil::Boundary;

/// The four front-end commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    GroundState,
    PhaseDiagram,
    CriticalTau,
    ComparePt,
}

impl std::fmt::Display for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Command::GroundState => "ground-state",
            Command::PhaseDiagram => "phase-diagram",
            Command::CriticalTau => "critical-tau",
            Command::ComparePt => "compare-pt",
        };
        write!(f, "{name}")
    }
}

/// Linear or logarithmic grid spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridScale {
    Lin,
    Log,
}

/// A grid given as `lo:hi:count:scale`, e.g. `0.05:2:30:log`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub scale: GridScale,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, count: usize, scale: GridScale) -> Result<Self> {
        let g = GridSpec { lo, hi, count, scale };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(Error::config("grid endpoints must be finite"));
        }
        if self.count == 0 {
            return Err(Error::config("grid needs at least 1 point"));
        }
        if self.count == 1 {
            if self.lo != self.hi {
                return Err(Error::config("a 1-point grid needs lo == hi"));
            }
        } else if self.lo >= self.hi {
            return Err(Error::config(format!(
                "grid needs lo < hi, got {}:{}",
                self.lo, self.hi
            )));
        }
        if self.scale == GridScale::Log && self.lo <= 0.0 {
            return Err(Error::config("log grids need lo > 0"));
        }
        Ok(())
    }

    /// Materialize the grid points, endpoints included, strictly ascending.
    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        if n == 1 {
            return vec![self.lo];
        }
        match self.scale {
            GridScale::Lin => {
                let step = (self.hi - self.lo) / (n as f64 - 1.0);
                (0..n).map(|i| self.lo + step * i as f64).collect()
            }
            GridScale::Log => {
                let ratio = (self.hi / self.lo).powf(1.0 / (n as f64 - 1.0));
                (0..n).map(|i| self.lo * ratio.powi(i as i32)).collect()
            }
        }
    }
}

impl std::str::FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(Error::config(format!(
                "grid spec '{s}' must be lo:hi:count:scale"
            )));
        }
        let lo = parts[0]
            .parse()
            .map_err(|_| Error::config(format!("bad grid lo '{}'", parts[0])))?;
        let hi = parts[1]
            .parse()
            .map_err(|_| Error::config(format!("bad grid hi '{}'", parts[1])))?;
        let count = parts[2]
            .parse()
            .map_err(|_| Error::config(format!("bad grid count '{}'", parts[2])))?;
        let scale = match parts[3] {
            "lin" => GridScale::Lin,
            "log" => GridScale::Log,
            other => return Err(Error::config(format!("bad grid scale '{other}'"))),
        };
        GridSpec::new(lo, hi, count, scale)
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let scale = match self.scale {
            GridScale::Lin => "lin",
            GridScale::Log => "log",
        };
        write!(f, "{}:{}:{}:{scale}", self.lo, self.hi, self.count)
    }
}

/// Everything a front-end run needs; defaults match the desk-scale figures.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub l: usize,
    pub n: u32,
    pub boundary: Boundary,
    pub tau: Option<f64>,
    pub delta: Option<f64>,
    pub tau_grid: Option<GridSpec>,
    pub delta_grid: Option<GridSpec>,
    /// Boson numbers for critical-tau sweeps; defaults to `[n]`.
    pub n_list: Option<Vec<u32>>,
    pub realizations: u32,
    pub seed: u64,
    pub workers: Option<usize>,
    pub out_dir: PathBuf,
    pub dump_state: bool,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            l: 8,
            n: 4,
            boundary: Boundary::Open,
            tau: None,
            delta: None,
            tau_grid: None,
            delta_grid: None,
            n_list: None,
            realizations: 100,
            seed: 0,
            workers: None,
            out_dir: PathBuf::from("runs"),
            dump_state: false,
        }
    }

    /// Apply a config file; file values lose to flags applied afterwards.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (line, key, value) in crate::io::read_kv_lines(text)? {
            self.apply_key(&key, &value)
                .map_err(|e| Error::config(format!("line {line}: {e}")))?;
        }
        Ok(())
    }

    fn apply_key(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::config(format!("invalid {what} '{value}'"));
        match key {
            "l" => self.l = value.parse().map_err(|_| bad("l"))?,
            "n" => self.n = value.parse().map_err(|_| bad("n"))?,
            "boundary" => self.boundary = value.parse()?,
            "tau" => self.tau = Some(value.parse().map_err(|_| bad("tau"))?),
            "delta" => self.delta = Some(value.parse().map_err(|_| bad("delta"))?),
            "tau_grid" => self.tau_grid = Some(value.parse()?),
            "delta_grid" => self.delta_grid = Some(value.parse()?),
            "n_list" => {
                let list = value
                    .split(',')
                    .map(|tok| tok.trim().parse::<u32>().map_err(|_| bad("n_list")))
                    .collect::<Result<Vec<_>>>()?;
                self.n_list = Some(list);
            }
            "realizations" => self.realizations = value.parse().map_err(|_| bad("realizations"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "workers" => self.workers = Some(value.parse().map_err(|_| bad("workers"))?),
            "out" => self.out_dir = PathBuf::from(value),
            "dump_state" => {
                self.dump_state = match value {
                    "true" | "1" => true,
                    "false" | "0" => false,
                    _ => return Err(bad("dump_state")),
                }
            }
            other => return Err(Error::config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Validate all preconditions of the selected command.
    pub fn validate(&self) -> Result<()> {
        if self.l < 1 {
            return Err(Error::config("l must be >= 1"));
        }
        if self.n < 2 {
            return Err(Error::config("n must be >= 2 (scaled parameters)"));
        }
        if self.realizations < 1 {
            return Err(Error::config("realizations must be >= 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers must be >= 1"));
        }
        let need_point = |v: Option<f64>, name: &str| -> Result<f64> {
            let x = v.ok_or_else(|| Error::config(format!("{} requires {name}", self.command)))?;
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::config(format!("{name} must be finite and >= 0")));
            }
            Ok(x)
        };
        let need_grid = |g: &Option<GridSpec>, name: &str| -> Result<()> {
            g.as_ref()
                .ok_or_else(|| Error::config(format!("{} requires {name}", self.command)))?
                .validate()
        };
        match self.command {
            Command::GroundState => {
                let tau = need_point(self.tau, "tau")?;
                need_point(self.delta, "delta")?;
                if tau <= 0.0 {
                    return Err(Error::config("ground-state requires tau > 0"));
                }
            }
            Command::PhaseDiagram | Command::ComparePt => {
                need_grid(&self.tau_grid, "tau_grid")?;
                need_grid(&self.delta_grid, "delta_grid")?;
            }
            Command::CriticalTau => {
                need_grid(&self.tau_grid, "tau_grid")?;
                need_grid(&self.delta_grid, "delta_grid")?;
                if let Some(list) = &self.n_list {
                    if list.is_empty() || list.iter().any(|&n| n < 2) {
                        return Err(Error::config("n_list entries must be >= 2"));
                    }
                }
                if self.tau_grid.as_ref().is_some_and(|g| g.count < 5) {
                    return Err(Error::config("critical-tau requires >= 5 tau points"));
                }
            }
        }
        Ok(())
    }

    /// The boson-number list for sweeps.
    pub fn effective_n_list(&self) -> Vec<u32> {
        self.n_list.clone().unwrap_or_else(|| vec![self.n])
    }

    /// Build the ensemble spec for grid commands.
    pub fn ensemble_spec(&self) -> Result<EnsembleSpec> {
        let tau_grid = self
            .tau_grid
            .as_ref()
            .ok_or_else(|| Error::config("missing tau_grid"))?
            .points();
        let delta_grid = self
            .delta_grid
            .as_ref()
            .ok_or_else(|| Error::config("missing delta_grid"))?
            .points();
        let spec = EnsembleSpec {
            l: self.l,
            n: self.n,
            boundary: self.boundary,
            tau_grid,
            delta_grid,
            realizations: self.realizations,
            master_seed: self.seed,
            observables: ObservableFlags {
                fidelities: self.command == Command::ComparePt,
                tau_c: self.command == Command::CriticalTau,
                ..ObservableFlags::default()
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The effective configuration, echoed into every metadata sidecar.
    pub fn to_kv_pairs(&self) -> Vec<(String, String)> {
        let mut pairs = vec![
            ("command".to_string(), self.command.to_string()),
            ("l".to_string(), self.l.to_string()),
            ("n".to_string(), self.n.to_string()),
            ("boundary".to_string(), self.boundary.to_string()),
            ("realizations".to_string(), self.realizations.to_string()),
            ("seed".to_string(), self.seed.to_string()),
            ("out".to_string(), self.out_dir.display().to_string()),
            ("dump_state".to_string(), self.dump_state.to_string()),
        ];
        if let Some(t) = self.tau {
            pairs.push(("tau".to_string(), format!("{t}")));
        }
        if let Some(d) = self.delta {
            pairs.push(("delta".to_string(), format!("{d}")));
        }
        if let Some(g) = &self.tau_grid {
            pairs.push(("tau_grid".to_string(), g.to_string()));
        }
        if let Some(g) = &self.delta_grid {
            pairs.push(("delta_grid".to_string(), g.to_string()));
        }
        if let Some(list) = &self.n_list {
            let joined = list.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
            pairs.push(("n_list".to_string(), joined));
        }
        if let Some(w) = self.workers {
            pairs.push(("workers".to_string(), w.to_string()));
        }
        pairs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec_parsing_and_points() {
        let g: GridSpec = "0.05:2:4:log".parse().unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 4);
        assert!((pts[0] - 0.05).abs() < 1e-15);
        assert!((pts[3] - 2.0).abs() < 1e-12);
        let ratio = pts[1] / pts[0];
        assert!((pts[2] / pts[1] - ratio).abs() < 1e-12);

        let g: GridSpec = "0:1:5:lin".parse().unwrap();
        assert_eq!(g.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);

        assert!("1:2:3".parse::<GridSpec>().is_err());
        assert!("2:1:3:lin".parse::<GridSpec>().is_err());
        assert!("0:1:5:log".parse::<GridSpec>().is_err());
        assert!("0.1:1:1:log".parse::<GridSpec>().is_err());
        // A single-point grid is a 1D cut.
        let g: GridSpec = "0.001:0.001:1:lin".parse().unwrap();
        assert_eq!(g.points(), vec![0.001]);
    }

    #[test]
    fn config_file_round_trip() {
        let mut cfg = RunConfig::new(Command::PhaseDiagram);
        cfg.apply_file(
            "# comment\n\
             l = 6\n\
             n = 3\n\
             boundary = periodic\n\
             tau_grid = 0.05:2:10:log\n\
             delta_grid = 1e-4:1:8:log\n\
             realizations = 7\n\
             seed = 99\n\
             workers = 2\n\
             out = scratch\n",
        )
        .unwrap();
        assert_eq!(cfg.l, 6);
        assert_eq!(cfg.boundary, Boundary::Periodic);
        assert_eq!(cfg.realizations, 7);
        assert!(cfg.validate().is_ok());
        let spec = cfg.ensemble_spec().unwrap();
        assert_eq!(spec.tau_grid.len(), 10);
        assert_eq!(spec.master_seed, 99);
    }

    #[test]
    fn unknown_keys_are_rejected_with_line() {
        let mut cfg = RunConfig::new(Command::GroundState);
        let err = cfg.apply_file("l = 4\nwat = 1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2") && msg.contains("wat"), "{msg}");
    }

    #[test]
    fn per_command_validation() {
        let mut cfg = RunConfig::new(Command::GroundState);
        assert!(cfg.validate().is_err());
        cfg.tau = Some(0.1);
        cfg.delta = Some(0.0);
        assert!(cfg.validate().is_ok());

        let mut cfg = RunConfig::new(Command::CriticalTau);
        cfg.tau_grid = Some("0.05:0.5:4:log".parse().unwrap());
        cfg.delta_grid = Some("1e-4:1e-2:3:log".parse().unwrap());
        assert!(cfg.validate().is_err()); // needs >= 5 tau points
        cfg.tau_grid = Some("0.05:0.5:6:log".parse().unwrap());
        assert!(cfg.validate().is_ok());
        cfg.n_list = Some(vec![4, 1]);
        assert!(cfg.validate().is_err());
    }
}
