//! Run configuration: flat `section.key = value` text (TOML syntax), with
//! defaults that depend on the scenario.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use toml::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scenario {
    Localization,
    TwoObservers,
    Recoil,
    Trajectory,
    DelocDevice,
    Decoherence,
    Epr,
    OracleSuite,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Localization,
        Scenario::TwoObservers,
        Scenario::Recoil,
        Scenario::Trajectory,
        Scenario::DelocDevice,
        Scenario::Decoherence,
        Scenario::Epr,
        Scenario::OracleSuite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Localization => "localization",
            Scenario::TwoObservers => "two-observers",
            Scenario::Recoil => "recoil",
            Scenario::Trajectory => "trajectory",
            Scenario::DelocDevice => "deloc-device",
            Scenario::Decoherence => "decoherence",
            Scenario::Epr => "epr",
            Scenario::OracleSuite => "oracle-suite",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL.into_iter().find(|sc| sc.name() == s).ok_or_else(|| {
            let names: Vec<_> = Scenario::ALL.iter().map(|s| s.name()).collect();
            format!("unknown scenario '{s}', expected one of: {}", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub m: usize,
    pub x_min: f64,
    pub x_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    pub n: usize,
    /// Point-spread width on the receptor array.
    pub sigma: f64,
    pub image_scale: f64,
    pub image_offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsConfig {
    pub mass: f64,
    pub t: f64,
    pub t_prime: f64,
    pub hbar: f64,
    pub x0: f64,
    pub width0: f64,
    pub p0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoilConfig {
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceConfig {
    pub k1: usize,
    pub k2: usize,
    pub d_list: Vec<usize>,
    pub beta: f64,
    pub t: f64,
    pub trials: usize,
    pub sweep_k1: usize,
    pub sweep_k2: usize,
    pub excited_amplitude: f64,
    pub haar_trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelocConfig {
    /// Cells in the relative-coordinate grid, centred on zero.
    pub rel_cells: usize,
    pub com_center: f64,
    pub com_width: f64,
    pub rel_center: f64,
    pub rel_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EprConfig {
    /// Bloch angles of the extra measured basis, besides x, y and z.
    pub theta: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub m: usize,
    pub n: usize,
    pub env_dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub output_dir: String,
    pub grid: GridConfig,
    pub detector: DetectorConfig,
    pub dynamics: DynamicsConfig,
    pub recoil: RecoilConfig,
    pub decoherence: DecoherenceConfig,
    pub deloc: DelocConfig,
    pub epr: EprConfig,
    pub oracle: OracleConfig,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}", .0.join("\n"))]
    Invalid(Vec<String>),
}

impl ScenarioConfig {
    pub fn defaults(scenario: Scenario) -> Self {
        let mut c = Self {
            scenario,
            seed: 0,
            output_dir: ".".into(),
            grid: GridConfig {
                m: 256,
                x_min: 0.0,
                x_max: 256.0,
            },
            detector: DetectorConfig {
                n: 32,
                sigma: 4.0,
                image_scale: 1.0,
                image_offset: 0.0,
            },
            dynamics: DynamicsConfig {
                mass: 100.0,
                t: 25600.0,
                t_prime: 3200.0,
                hbar: 1.0,
                x0: 160.0,
                width0: 24.0,
                p0: 0.5,
            },
            recoil: RecoilConfig { w: 8.0 },
            decoherence: DecoherenceConfig {
                k1: 4,
                k2: 4,
                d_list: vec![16, 32, 64, 128, 256, 512, 1024],
                beta: 1.0,
                t: 20.0,
                trials: 20,
                sweep_k1: 1,
                sweep_k2: 1,
                excited_amplitude: 0.005,
                haar_trials: 2000,
            },
            deloc: DelocConfig {
                rel_cells: 65,
                com_center: 128.0,
                com_width: 48.0,
                rel_center: 0.0,
                rel_width: 0.5,
            },
            epr: EprConfig { theta: 1.0, phi: 0.5 },
            oracle: OracleConfig { m: 8, n: 3, env_dim: 2 },
        };
        match scenario {
            Scenario::Localization => {
                c.grid = GridConfig {
                    m: 1024,
                    x_min: 0.0,
                    x_max: 1024.0,
                };
                c.detector.n = 128;
            }
            Scenario::Trajectory => {
                c.grid = GridConfig {
                    m: 512,
                    x_min: 0.0,
                    x_max: 512.0,
                };
                c.detector.n = 64;
            }
            Scenario::DelocDevice => {
                c.detector.n = 13;
                c.detector.sigma = 2.0;
            }
            _ => {}
        }
        c
    }

    /// Parses and validates. `scenario` picks the defaults when the text does
    /// not name one itself.
    pub fn parse(text: &str, scenario: Option<Scenario>) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            let (line, column) = e.span().map(|s| line_col(text, s.start)).unwrap_or((0, 0));
            ConfigError::Parse {
                line,
                column,
                message: e.message().trim().to_string(),
            }
        })?;
        let mut flat = BTreeMap::new();
        flatten("", &table, &mut flat);

        let mut errors = Vec::new();
        let named = match flat.remove("scenario") {
            None => None,
            Some(Value::String(s)) => match s.parse::<Scenario>() {
                Ok(sc) => Some(sc),
                Err(e) => {
                    errors.push(format!("scenario: {e}"));
                    None
                }
            },
            Some(_) => {
                errors.push("scenario: expected a string".into());
                None
            }
        };
        let scenario = match (scenario, named) {
            (Some(a), Some(b)) if a != b => {
                errors.push(format!("scenario: file says '{b}' but '{a}' was requested"));
                a
            }
            (Some(a), _) => a,
            (None, Some(b)) => b,
            (None, None) => {
                errors.push("scenario: not given".into());
                Scenario::Localization
            }
        };

        let mut cfg = Self::defaults(scenario);
        let mut r = Reader { flat, errors };
        r.u64("seed", &mut cfg.seed);
        r.string("output_dir", &mut cfg.output_dir);
        r.usize("grid.M", &mut cfg.grid.m);
        r.f64("grid.x_min", &mut cfg.grid.x_min);
        r.f64("grid.x_max", &mut cfg.grid.x_max);
        r.usize("detector.N", &mut cfg.detector.n);
        r.f64("detector.sigma", &mut cfg.detector.sigma);
        r.f64("detector.image_scale", &mut cfg.detector.image_scale);
        r.f64("detector.image_offset", &mut cfg.detector.image_offset);
        r.f64("dynamics.mass", &mut cfg.dynamics.mass);
        r.f64("dynamics.t", &mut cfg.dynamics.t);
        r.f64("dynamics.t_prime", &mut cfg.dynamics.t_prime);
        r.f64("dynamics.hbar", &mut cfg.dynamics.hbar);
        r.f64("dynamics.x0", &mut cfg.dynamics.x0);
        r.f64("dynamics.width0", &mut cfg.dynamics.width0);
        r.f64("dynamics.p0", &mut cfg.dynamics.p0);
        r.f64("recoil.w", &mut cfg.recoil.w);
        r.usize("decoherence.K1", &mut cfg.decoherence.k1);
        r.usize("decoherence.K2", &mut cfg.decoherence.k2);
        r.usize_list("decoherence.D_list", &mut cfg.decoherence.d_list);
        r.f64("decoherence.beta", &mut cfg.decoherence.beta);
        r.f64("decoherence.t", &mut cfg.decoherence.t);
        r.usize("decoherence.trials", &mut cfg.decoherence.trials);
        r.usize("decoherence.sweep_K1", &mut cfg.decoherence.sweep_k1);
        r.usize("decoherence.sweep_K2", &mut cfg.decoherence.sweep_k2);
        r.f64("decoherence.excited_amplitude", &mut cfg.decoherence.excited_amplitude);
        r.usize("decoherence.haar_trials", &mut cfg.decoherence.haar_trials);
        r.usize("deloc.rel_cells", &mut cfg.deloc.rel_cells);
        r.f64("deloc.com_center", &mut cfg.deloc.com_center);
        r.f64("deloc.com_width", &mut cfg.deloc.com_width);
        r.f64("deloc.rel_center", &mut cfg.deloc.rel_center);
        r.f64("deloc.rel_width", &mut cfg.deloc.rel_width);
        r.f64("epr.theta", &mut cfg.epr.theta);
        r.f64("epr.phi", &mut cfg.epr.phi);
        r.usize("oracle.M", &mut cfg.oracle.m);
        r.usize("oracle.N", &mut cfg.oracle.n);
        r.usize("oracle.env_dim", &mut cfg.oracle.env_dim);

        let Reader { flat, mut errors } = r;
        for key in flat.keys() {
            errors.push(format!("{key}: unknown key"));
        }
        errors.extend(cfg.range_errors());
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError::Invalid(errors))
        }
    }

    /// Every range violation, each naming its key.
    pub fn range_errors(&self) -> Vec<String> {
        let mut e = Vec::new();
        let mut positive = |key: &str, v: f64| {
            if !(v > 0.0 && v.is_finite()) {
                e.push(format!("{key}: must be positive and finite, got {v}"));
            }
        };
        positive("detector.sigma", self.detector.sigma);
        positive("dynamics.mass", self.dynamics.mass);
        positive("dynamics.hbar", self.dynamics.hbar);
        positive("dynamics.t", self.dynamics.t);
        positive("dynamics.width0", self.dynamics.width0);
        positive("recoil.w", self.recoil.w);
        positive("decoherence.beta", self.decoherence.beta);
        positive("decoherence.t", self.decoherence.t);
        positive("decoherence.excited_amplitude", self.decoherence.excited_amplitude);
        positive("deloc.com_width", self.deloc.com_width);
        positive("deloc.rel_width", self.deloc.rel_width);

        let mut finite = |key: &str, v: f64| {
            if !v.is_finite() {
                e.push(format!("{key}: must be finite, got {v}"));
            }
        };
        finite("grid.x_min", self.grid.x_min);
        finite("grid.x_max", self.grid.x_max);
        finite("detector.image_offset", self.detector.image_offset);
        finite("dynamics.x0", self.dynamics.x0);
        finite("dynamics.p0", self.dynamics.p0);
        finite("deloc.com_center", self.deloc.com_center);
        finite("deloc.rel_center", self.deloc.rel_center);
        finite("epr.theta", self.epr.theta);
        finite("epr.phi", self.epr.phi);

        if self.grid.x_max.is_finite() && self.grid.x_min.is_finite() && self.grid.x_max <= self.grid.x_min {
            e.push(format!(
                "grid.x_max: must exceed grid.x_min ({}), got {}",
                self.grid.x_min, self.grid.x_max
            ));
        }
        if self.grid.m < 2 {
            e.push(format!("grid.M: must be at least 2, got {}", self.grid.m));
        }
        if self.detector.n < 2 {
            e.push(format!("detector.N: must be at least 2, got {}", self.detector.n));
        }
        if !(self.detector.image_scale.is_finite() && self.detector.image_scale != 0.0) {
            e.push(format!(
                "detector.image_scale: must be finite and nonzero, got {}",
                self.detector.image_scale
            ));
        }
        if !(self.dynamics.t_prime >= 0.0 && self.dynamics.t_prime.is_finite()) {
            e.push(format!(
                "dynamics.t_prime: must be nonnegative, got {}",
                self.dynamics.t_prime
            ));
        }
        let d = &self.decoherence;
        for (key, v) in [
            ("decoherence.K1", d.k1),
            ("decoherence.K2", d.k2),
            ("decoherence.sweep_K1", d.sweep_k1),
            ("decoherence.sweep_K2", d.sweep_k2),
        ] {
            if v == 0 {
                e.push(format!("{key}: must be at least 1"));
            }
        }
        if d.excited_amplitude >= 1.0 {
            e.push(format!(
                "decoherence.excited_amplitude: must be below 1, got {}",
                d.excited_amplitude
            ));
        }
        if d.trials < 5 {
            e.push(format!("decoherence.trials: need at least 5, got {}", d.trials));
        }
        if d.haar_trials < 200 {
            e.push(format!(
                "decoherence.haar_trials: need at least 200, got {}",
                d.haar_trials
            ));
        }
        if d.d_list.len() < 2 {
            e.push("decoherence.D_list: need at least two dimensions".into());
        }
        if d.d_list.contains(&0) {
            e.push("decoherence.D_list: dimensions must be at least 1".into());
        }
        if d.d_list.windows(2).any(|w| w[1] <= w[0]) {
            e.push("decoherence.D_list: must be strictly increasing".into());
        }
        if self.deloc.rel_cells < 2 {
            e.push(format!(
                "deloc.rel_cells: must be at least 2, got {}",
                self.deloc.rel_cells
            ));
        }
        if self.oracle.m < 2 || self.oracle.m > 16 {
            e.push(format!("oracle.M: must be in 2..=16, got {}", self.oracle.m));
        }
        if self.oracle.n < 2 || self.oracle.n > 3 {
            e.push(format!("oracle.N: must be 2 or 3, got {}", self.oracle.n));
        }
        if self.oracle.env_dim < 1 || self.oracle.env_dim > 2 {
            e.push(format!("oracle.env_dim: must be 1 or 2, got {}", self.oracle.env_dim));
        }
        e
    }

    /// The configuration as text that parses back to `self`.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let f = |v: f64| format!("{v:?}");
        let _ = writeln!(s, "scenario = \"{}\"", self.scenario);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "output_dir = {}", Value::String(self.output_dir.clone()));
        let lines: Vec<(&str, String)> = vec![
            ("grid.M", self.grid.m.to_string()),
            ("grid.x_min", f(self.grid.x_min)),
            ("grid.x_max", f(self.grid.x_max)),
            ("detector.N", self.detector.n.to_string()),
            ("detector.sigma", f(self.detector.sigma)),
            ("detector.image_scale", f(self.detector.image_scale)),
            ("detector.image_offset", f(self.detector.image_offset)),
            ("dynamics.mass", f(self.dynamics.mass)),
            ("dynamics.t", f(self.dynamics.t)),
            ("dynamics.t_prime", f(self.dynamics.t_prime)),
            ("dynamics.hbar", f(self.dynamics.hbar)),
            ("dynamics.x0", f(self.dynamics.x0)),
            ("dynamics.width0", f(self.dynamics.width0)),
            ("dynamics.p0", f(self.dynamics.p0)),
            ("recoil.w", f(self.recoil.w)),
            ("decoherence.K1", self.decoherence.k1.to_string()),
            ("decoherence.K2", self.decoherence.k2.to_string()),
            (
                "decoherence.D_list",
                format!(
                    "[{}]",
                    self.decoherence
                        .d_list
                        .iter()
                        .map(|d| d.to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            ),
            ("decoherence.beta", f(self.decoherence.beta)),
            ("decoherence.t", f(self.decoherence.t)),
            ("decoherence.trials", self.decoherence.trials.to_string()),
            ("decoherence.sweep_K1", self.decoherence.sweep_k1.to_string()),
            ("decoherence.sweep_K2", self.decoherence.sweep_k2.to_string()),
            ("decoherence.excited_amplitude", f(self.decoherence.excited_amplitude)),
            ("decoherence.haar_trials", self.decoherence.haar_trials.to_string()),
            ("deloc.rel_cells", self.deloc.rel_cells.to_string()),
            ("deloc.com_center", f(self.deloc.com_center)),
            ("deloc.com_width", f(self.deloc.com_width)),
            ("deloc.rel_center", f(self.deloc.rel_center)),
            ("deloc.rel_width", f(self.deloc.rel_width)),
            ("epr.theta", f(self.epr.theta)),
            ("epr.phi", f(self.epr.phi)),
            ("oracle.M", self.oracle.m.to_string()),
            ("oracle.N", self.oracle.n.to_string()),
            ("oracle.env_dim", self.oracle.env_dim.to_string()),
        ];
        for (k, v) in lines {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

struct Reader {
    flat: BTreeMap<String, Value>,
    errors: Vec<String>,
}

impl Reader {
    fn f64(&mut self, key: &str, slot: &mut f64) {
        match self.flat.remove(key) {
            None => {}
            Some(Value::Float(v)) => *slot = v,
            Some(Value::Integer(v)) => *slot = v as f64,
            Some(_) => self.errors.push(format!("{key}: expected a number")),
        }
    }

    fn int(&mut self, key: &str) -> Option<i64> {
        match self.flat.remove(key) {
            None => None,
            Some(Value::Integer(v)) => Some(v),
            Some(_) => {
                self.errors.push(format!("{key}: expected an integer"));
                None
            }
        }
    }

    fn usize(&mut self, key: &str, slot: &mut usize) {
        if let Some(v) = self.int(key) {
            match usize::try_from(v) {
                Ok(v) => *slot = v,
                Err(_) => self.errors.push(format!("{key}: must be nonnegative, got {v}")),
            }
        }
    }

    fn u64(&mut self, key: &str, slot: &mut u64) {
        if let Some(v) = self.int(key) {
            match u64::try_from(v) {
                Ok(v) => *slot = v,
                Err(_) => self.errors.push(format!("{key}: must be nonnegative, got {v}")),
            }
        }
    }

    fn string(&mut self, key: &str, slot: &mut String) {
        match self.flat.remove(key) {
            None => {}
            Some(Value::String(v)) => *slot = v,
            Some(_) => self.errors.push(format!("{key}: expected a string")),
        }
    }

    fn usize_list(&mut self, key: &str, slot: &mut Vec<usize>) {
        match self.flat.remove(key) {
            None => {}
            Some(Value::Array(items)) => {
                let parsed: Option<Vec<usize>> = items
                    .iter()
                    .map(|v| v.as_integer().and_then(|i| usize::try_from(i).ok()))
                    .collect();
                match parsed {
                    Some(v) => *slot = v,
                    None => self
                        .errors
                        .push(format!("{key}: expected a list of nonnegative integers")),
                }
            }
            Some(_) => self
                .errors
                .push(format!("{key}: expected a list of nonnegative integers")),
        }
    }
}
