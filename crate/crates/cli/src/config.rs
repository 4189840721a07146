//! Scenario files: TOML with a fixed schema.
//!
//! ```toml
//! name = "flagship"
//! grid = 16
//!
//! [model]
//! omega = 0.5
//! k_eos = 0.6666666666666666   # or: kappa = ..., mu = ...
//! m = 3
//!
//! [source]
//! kind = "fluid"               # zero | uniform | mode | bump | fluid
//! amplitude = "budget:0.5"     # "raw" | number | "budget:<fraction>"
//! phi_t_mean = 1.0             # fluid
//! phi_t_wave = 0.3
//! grad_amp = 0.2
//! # wavevector = [1, 0, 0]     # mode
//! # width = 0.5                # bump
//! # time = "constant"          # constant | exponential | cosine (mode, bump, uniform)
//! # rate = 1.0 / frequency = 1.0
//!
//! [initial]
//! energy = 0.05                # optional joint rescaling to E_m(0)
//! u0 = { kind = "zero" }
//! u1 = { kind = "mode", wavevector = [1, 0, 0], amplitude = 1.0, phase = -1.5707963267948966 }
//! # kind = "bump": width, amplitude
//! # kind = "coefficients": coefficients = [[n1, n2, n3, re, im], ...]
//! # kind = "random": k_max, decay, seed, sup, generator = "chacha8"
//!
//! [solver]
//! dt = 0.02
//! t_end = 100.0
//! sample_every = 5
//! dealias = true
//!
//! [bootstrap]
//! enabled = true
//! t1 = "auto"                  # or a number; likewise eps_prime, delta, delta_prime
//!
//! [verify]
//! asymptotic_tol = 1e-6
//! mean_mode_tol = 1e-3
//! ```

use std::collections::BTreeSet;
use std::fmt;

use dampwave::estimates::BootstrapInputs;
use dampwave::scenario::{Amplitude, FieldPreset, InitialData, Scenario};
use dampwave::source::{FluidPotential, ModelParams, SourcePayload, SpatialPreset, TimeProfile};
use dampwave::torus::GridSpec;
use toml::{Table, Value};

/// Name of the only random generator, recorded in every random preset.
pub const GENERATOR: &str = "chacha8";

/// A malformed or physically inadmissible scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Exponents {
    Eos { k: f64 },
    Explicit { kappa: f64, mu: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub omega: f64,
    pub exponents: Exponents,
    pub m: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceConfig {
    Zero,
    Preset {
        spatial: SpatialPreset,
        time: TimeProfile<f64>,
    },
    Fluid {
        phi_t_mean: f64,
        phi_t_wave: f64,
        grad_amp: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub grid: usize,
    pub model: ModelConfig,
    pub source: SourceConfig,
    pub amplitude: Amplitude,
    pub initial: InitialData,
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: usize,
    pub dealias: bool,
    pub bootstrap: Option<BootstrapInputs<f64>>,
    pub asymptotic_tol: f64,
    pub mean_mode_tol: f64,
}

/// A table whose consumed keys are tracked, so leftovers can be reported.
struct Section<'a> {
    path: String,
    table: &'a Table,
    used: BTreeSet<String>,
}

impl<'a> Section<'a> {
    fn new(path: &str, table: &'a Table) -> Self {
        Self {
            path: path.to_string(),
            table,
            used: BTreeSet::new(),
        }
    }

    fn key(&self, k: &str) -> String {
        if self.path.is_empty() {
            k.to_string()
        } else {
            format!("{}.{k}", self.path)
        }
    }

    fn get(&mut self, k: &str) -> Option<&'a Value> {
        self.used.insert(k.to_string());
        self.table.get(k)
    }

    fn req(&mut self, k: &str) -> Result<&'a Value> {
        let key = self.key(k);
        self.get(k).ok_or_else(|| ConfigError(format!("missing key `{key}`")))
    }

    fn float(&mut self, k: &str) -> Result<f64> {
        let key = self.key(k);
        as_float(self.req(k)?).ok_or_else(|| ConfigError(format!("`{key}` must be a number")))
    }

    fn float_or(&mut self, k: &str, default: f64) -> Result<f64> {
        match self.get(k) {
            None => Ok(default),
            Some(_) => self.float(k),
        }
    }

    fn int(&mut self, k: &str) -> Result<i64> {
        let key = self.key(k);
        self.req(k)?
            .as_integer()
            .ok_or_else(|| ConfigError(format!("`{key}` must be an integer")))
    }

    fn usize(&mut self, k: &str) -> Result<usize> {
        let key = self.key(k);
        usize::try_from(self.int(k)?).map_err(|_| ConfigError(format!("`{key}` must be nonnegative")))
    }

    fn str(&mut self, k: &str) -> Result<&'a str> {
        let key = self.key(k);
        self.req(k)?
            .as_str()
            .ok_or_else(|| ConfigError(format!("`{key}` must be a string")))
    }

    fn bool_or(&mut self, k: &str, default: bool) -> Result<bool> {
        let key = self.key(k);
        match self.get(k) {
            None => Ok(default),
            Some(v) => v.as_bool().ok_or_else(|| ConfigError(format!("`{key}` must be true or false"))),
        }
    }

    fn wavevector(&mut self, k: &str) -> Result<[i64; 3]> {
        let key = self.key(k);
        let bad = || ConfigError(format!("`{key}` must be an array of three integers"));
        let arr = self.req(k)?.as_array().ok_or_else(bad)?;
        let v: Vec<i64> = arr.iter().map(|x| x.as_integer().ok_or_else(bad)).collect::<Result<_>>()?;
        v.try_into().map_err(|_| bad())
    }

    fn sub(&mut self, k: &str) -> Result<Option<Section<'a>>> {
        let key = self.key(k);
        match self.get(k) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(Section::new(&key, t))),
            Some(_) => err(format!("`{key}` must be a table")),
        }
    }

    fn auto_or_float(&mut self, k: &str) -> Result<Option<f64>> {
        let key = self.key(k);
        match self.get(k) {
            None => Ok(None),
            Some(Value::String(s)) if s == "auto" => Ok(None),
            Some(v) => as_float(v)
                .map(Some)
                .ok_or_else(|| ConfigError(format!("`{key}` must be \"auto\" or a number"))),
        }
    }

    /// Unknown keys, with their dotted paths.
    fn leftovers(&self, out: &mut Vec<String>) {
        out.extend(self.table.keys().filter(|k| !self.used.contains(*k)).map(|k| self.key(k)));
    }
}

fn as_float(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError(e.to_string()))?;
        let mut unknown = Vec::new();
        let mut root = Section::new("", &table);
        let name = root.str("name")?.to_string();
        let grid = root.usize("grid")?;

        let mut model = root.sub("model")?.ok_or_else(|| ConfigError("missing table `model`".into()))?;
        let omega = model.float("omega")?;
        let m = u32::try_from(model.int("m")?).map_err(|_| ConfigError("`model.m` out of range".into()))?;
        let exponents = match (model.get("k_eos").is_some(), model.get("kappa").is_some() || model.get("mu").is_some()) {
            (true, false) => Exponents::Eos {
                k: model.float("k_eos")?,
            },
            (false, true) => Exponents::Explicit {
                kappa: model.float("kappa")?,
                mu: model.float("mu")?,
            },
            (true, true) => return err("give either `model.k_eos` or `model.kappa` and `model.mu`, not both"),
            (false, false) => return err("`model` needs `k_eos` or `kappa` and `mu`"),
        };
        model.leftovers(&mut unknown);

        let mut src = root.sub("source")?.ok_or_else(|| ConfigError("missing table `source`".into()))?;
        let source = parse_source(&mut src)?;
        let amplitude = match src.get("amplitude") {
            None => Amplitude::Raw,
            Some(Value::String(s)) if s == "raw" => Amplitude::Raw,
            Some(Value::String(s)) => match s.strip_prefix("budget:").map(str::parse::<f64>) {
                Some(Ok(f)) => Amplitude::BudgetFraction(f),
                _ => return err(format!("`source.amplitude` = \"{s}\" is not \"raw\" or \"budget:<fraction>\"")),
            },
            Some(v) => Amplitude::Absolute(
                as_float(v).ok_or_else(|| ConfigError("`source.amplitude` must be a number or string".into()))?,
            ),
        };
        src.leftovers(&mut unknown);

        let mut init = root.sub("initial")?.ok_or_else(|| ConfigError("missing table `initial`".into()))?;
        let energy = match init.get("energy") {
            None => None,
            Some(_) => Some(init.float("energy")?),
        };
        let mut field = |key: &str| -> Result<FieldPreset> {
            match init.sub(key)? {
                None => err(format!("missing table `initial.{key}`")),
                Some(mut s) => {
                    let p = parse_field(&mut s)?;
                    s.leftovers(&mut unknown);
                    Ok(p)
                }
            }
        };
        let u0 = field("u0")?;
        let u1 = field("u1")?;
        init.leftovers(&mut unknown);

        let mut sol = root.sub("solver")?.ok_or_else(|| ConfigError("missing table `solver`".into()))?;
        let dt = sol.float("dt")?;
        let t_end = sol.float("t_end")?;
        let sample_every = match sol.get("sample_every") {
            None => 1,
            Some(_) => sol.usize("sample_every")?,
        };
        let dealias = sol.bool_or("dealias", true)?;
        sol.leftovers(&mut unknown);

        let bootstrap = match root.sub("bootstrap")? {
            None => Some(BootstrapInputs::default()),
            Some(mut b) => {
                let enabled = b.bool_or("enabled", true)?;
                let inputs = BootstrapInputs {
                    t1: b.auto_or_float("t1")?,
                    eps_prime: b.auto_or_float("eps_prime")?,
                    delta: b.auto_or_float("delta")?,
                    delta_prime: b.auto_or_float("delta_prime")?,
                };
                b.leftovers(&mut unknown);
                enabled.then_some(inputs)
            }
        };

        let (asymptotic_tol, mean_mode_tol) = match root.sub("verify")? {
            None => (1e-6, 1e-3),
            Some(mut v) => {
                let r = (v.float_or("asymptotic_tol", 1e-6)?, v.float_or("mean_mode_tol", 1e-3)?);
                v.leftovers(&mut unknown);
                r
            }
        };
        root.leftovers(&mut unknown);
        if !unknown.is_empty() {
            unknown.sort();
            return err(format!("unknown keys: {}", unknown.join(", ")));
        }

        Ok(Self {
            name,
            grid,
            model: ModelConfig { omega, exponents, m },
            source,
            amplitude,
            initial: InitialData { u0, u1, energy },
            dt,
            t_end,
            sample_every,
            dealias,
            bootstrap,
            asymptotic_tol,
            mean_mode_tol,
        })
    }

    pub fn model_params(&self) -> Result<ModelParams<f64>> {
        let m = &self.model;
        let p = match m.exponents {
            Exponents::Eos { k } => ModelParams::from_equation_of_state(k, m.omega, m.m),
            Exponents::Explicit { kappa, mu } => ModelParams::new(m.omega, kappa, mu, m.m),
        };
        p.map_err(|e| ConfigError(physical_message(&e)))
    }

    pub fn build(&self) -> Result<Scenario<f64>> {
        let grid = GridSpec::new(self.grid).map_err(|e| ConfigError(e.to_string()))?;
        let params = self.model_params()?;
        let source = match self.source {
            SourceConfig::Zero => SourcePayload::Zero,
            SourceConfig::Preset { spatial, time } => SourcePayload::Preset { spatial, time },
            SourceConfig::Fluid {
                phi_t_mean,
                phi_t_wave,
                grad_amp,
            } => SourcePayload::Fluid {
                potential: FluidPotential::preset(grid, phi_t_mean, phi_t_wave, grad_amp)
                    .map_err(|e| ConfigError(e.to_string()))?,
            },
        };
        Ok(Scenario {
            name: self.name.clone(),
            grid,
            params,
            source,
            amplitude: self.amplitude,
            initial: self.initial.clone(),
            dt: self.dt,
            t_end: self.t_end,
            sample_every: self.sample_every,
            dealias: self.dealias,
            bootstrap: self.bootstrap,
            asymptotic_tol: self.asymptotic_tol,
            mean_mode_tol: self.mean_mode_tol,
        })
    }

    /// Replace the seed of every random initial field.
    pub fn set_seed(&mut self, seed: u64) {
        for p in [&mut self.initial.u0, &mut self.initial.u1] {
            if let FieldPreset::Random { seed: s, .. } = p {
                *s = seed;
            }
        }
    }

    /// Fold a resolved scenario back in, fixing every automatic choice.
    pub fn with_resolved(&self, resolved: &Scenario<f64>) -> Self {
        Self {
            amplitude: resolved.amplitude,
            bootstrap: resolved.bootstrap,
            ..self.clone()
        }
    }

    pub fn to_toml(&self) -> String {
        let mut root = Table::new();
        root.insert("name".into(), Value::String(self.name.clone()));
        root.insert("grid".into(), Value::Integer(self.grid as i64));

        let mut model = Table::new();
        model.insert("omega".into(), Value::Float(self.model.omega));
        match self.model.exponents {
            Exponents::Eos { k } => {
                model.insert("k_eos".into(), Value::Float(k));
            }
            Exponents::Explicit { kappa, mu } => {
                model.insert("kappa".into(), Value::Float(kappa));
                model.insert("mu".into(), Value::Float(mu));
            }
        }
        model.insert("m".into(), Value::Integer(self.model.m as i64));
        root.insert("model".into(), Value::Table(model));

        let mut src = source_table(&self.source);
        src.insert(
            "amplitude".into(),
            match self.amplitude {
                Amplitude::Raw => Value::String("raw".into()),
                Amplitude::Absolute(a) => Value::Float(a),
                Amplitude::BudgetFraction(f) => Value::String(format!("budget:{f:?}")),
            },
        );
        root.insert("source".into(), Value::Table(src));

        let mut init = Table::new();
        if let Some(e) = self.initial.energy {
            init.insert("energy".into(), Value::Float(e));
        }
        init.insert("u0".into(), Value::Table(field_table(&self.initial.u0)));
        init.insert("u1".into(), Value::Table(field_table(&self.initial.u1)));
        root.insert("initial".into(), Value::Table(init));

        let mut sol = Table::new();
        sol.insert("dt".into(), Value::Float(self.dt));
        sol.insert("t_end".into(), Value::Float(self.t_end));
        sol.insert("sample_every".into(), Value::Integer(self.sample_every as i64));
        sol.insert("dealias".into(), Value::Boolean(self.dealias));
        root.insert("solver".into(), Value::Table(sol));

        let mut bs = Table::new();
        bs.insert("enabled".into(), Value::Boolean(self.bootstrap.is_some()));
        let inputs = self.bootstrap.unwrap_or_default();
        for (k, v) in [
            ("t1", inputs.t1),
            ("eps_prime", inputs.eps_prime),
            ("delta", inputs.delta),
            ("delta_prime", inputs.delta_prime),
        ] {
            bs.insert(k.into(), v.map_or(Value::String("auto".into()), Value::Float));
        }
        root.insert("bootstrap".into(), Value::Table(bs));

        let mut ver = Table::new();
        ver.insert("asymptotic_tol".into(), Value::Float(self.asymptotic_tol));
        ver.insert("mean_mode_tol".into(), Value::Float(self.mean_mode_tol));
        root.insert("verify".into(), Value::Table(ver));
        root.to_string()
    }
}

/// Messages for physical preconditions, phrased as the model constraint.
pub fn physical_message(e: &dampwave::Error) -> String {
    match e {
        dampwave::Error::NotTimelike { .. } => {
            format!("{e}; the fluid source needs a timelike potential gradient")
        }
        other => other.to_string(),
    }
}

fn parse_time(s: &mut Section) -> Result<TimeProfile<f64>> {
    Ok(match s.get("time").map(|_| s.str("time")).transpose()?.unwrap_or("constant") {
        "constant" => TimeProfile::Constant,
        "exponential" => TimeProfile::Exponential { rate: s.float("rate")? },
        "cosine" => TimeProfile::Cosine {
            frequency: s.float("frequency")?,
        },
        other => return err(format!("`source.time` = \"{other}\" is not constant, exponential or cosine")),
    })
}

fn parse_source(s: &mut Section) -> Result<SourceConfig> {
    Ok(match s.str("kind")? {
        "zero" => SourceConfig::Zero,
        "uniform" => SourceConfig::Preset {
            spatial: SpatialPreset::Uniform,
            time: parse_time(s)?,
        },
        "mode" => SourceConfig::Preset {
            spatial: SpatialPreset::Mode {
                wavevector: s.wavevector("wavevector")?,
            },
            time: parse_time(s)?,
        },
        "bump" => SourceConfig::Preset {
            spatial: SpatialPreset::Bump { width: s.float("width")? },
            time: parse_time(s)?,
        },
        "fluid" => SourceConfig::Fluid {
            phi_t_mean: s.float("phi_t_mean")?,
            phi_t_wave: s.float("phi_t_wave")?,
            grad_amp: s.float("grad_amp")?,
        },
        other => return err(format!("`source.kind` = \"{other}\" is not zero, uniform, mode, bump or fluid")),
    })
}

fn parse_field(s: &mut Section) -> Result<FieldPreset> {
    let path = s.path.clone();
    Ok(match s.str("kind")? {
        "zero" => FieldPreset::Zero,
        "mode" => FieldPreset::Mode {
            wavevector: s.wavevector("wavevector")?,
            amplitude: s.float_or("amplitude", 1.0)?,
            phase: s.float_or("phase", 0.0)?,
        },
        "bump" => FieldPreset::Bump {
            width: s.float("width")?,
            amplitude: s.float_or("amplitude", 1.0)?,
        },
        "coefficients" => {
            let bad = || ConfigError(format!("`{path}.coefficients` must be a list of [n1, n2, n3, re, im]"));
            let list = s.req("coefficients")?.as_array().ok_or_else(bad)?;
            let mut out = Vec::with_capacity(list.len());
            for row in list {
                let row = row.as_array().filter(|r| r.len() == 5).ok_or_else(bad)?;
                let n: Vec<i64> = row[..3].iter().map(|x| x.as_integer().ok_or_else(bad)).collect::<Result<_>>()?;
                let (re, im) = (as_float(&row[3]).ok_or_else(bad)?, as_float(&row[4]).ok_or_else(bad)?);
                out.push(([n[0], n[1], n[2]], re, im));
            }
            FieldPreset::Coefficients(out)
        }
        "random" => {
            if let Some(g) = s.get("generator") {
                if g.as_str() != Some(GENERATOR) {
                    return err(format!("`{path}.generator` must be \"{GENERATOR}\""));
                }
            }
            FieldPreset::Random {
                k_max: s.int("k_max")?,
                decay: s.float("decay")?,
                seed: u64::try_from(s.int("seed")?).map_err(|_| ConfigError(format!("`{path}.seed` must be >= 0")))?,
                sup: s.float("sup")?,
            }
        }
        other => {
            return err(format!(
                "`{path}.kind` = \"{other}\" is not zero, mode, bump, coefficients or random"
            ))
        }
    })
}

fn source_table(s: &SourceConfig) -> Table {
    let mut t = Table::new();
    let time = |t: &mut Table, profile: &TimeProfile<f64>| match *profile {
        TimeProfile::Constant => {
            t.insert("time".into(), Value::String("constant".into()));
        }
        TimeProfile::Exponential { rate } => {
            t.insert("time".into(), Value::String("exponential".into()));
            t.insert("rate".into(), Value::Float(rate));
        }
        TimeProfile::Cosine { frequency } => {
            t.insert("time".into(), Value::String("cosine".into()));
            t.insert("frequency".into(), Value::Float(frequency));
        }
    };
    match s {
        SourceConfig::Zero => {
            t.insert("kind".into(), Value::String("zero".into()));
        }
        SourceConfig::Preset { spatial, time: tp } => {
            match *spatial {
                SpatialPreset::Uniform => {
                    t.insert("kind".into(), Value::String("uniform".into()));
                }
                SpatialPreset::Mode { wavevector } => {
                    t.insert("kind".into(), Value::String("mode".into()));
                    t.insert("wavevector".into(), int_array(&wavevector));
                }
                SpatialPreset::Bump { width } => {
                    t.insert("kind".into(), Value::String("bump".into()));
                    t.insert("width".into(), Value::Float(width));
                }
            }
            time(&mut t, tp);
        }
        SourceConfig::Fluid {
            phi_t_mean,
            phi_t_wave,
            grad_amp,
        } => {
            t.insert("kind".into(), Value::String("fluid".into()));
            t.insert("phi_t_mean".into(), Value::Float(*phi_t_mean));
            t.insert("phi_t_wave".into(), Value::Float(*phi_t_wave));
            t.insert("grad_amp".into(), Value::Float(*grad_amp));
        }
    }
    t
}

fn int_array(v: &[i64]) -> Value {
    Value::Array(v.iter().map(|&x| Value::Integer(x)).collect())
}

fn field_table(p: &FieldPreset) -> Table {
    let mut t = Table::new();
    let kind = |t: &mut Table, k: &str| {
        t.insert("kind".into(), Value::String(k.into()));
    };
    match p {
        FieldPreset::Zero => kind(&mut t, "zero"),
        FieldPreset::Mode {
            wavevector,
            amplitude,
            phase,
        } => {
            kind(&mut t, "mode");
            t.insert("wavevector".into(), int_array(wavevector));
            t.insert("amplitude".into(), Value::Float(*amplitude));
            t.insert("phase".into(), Value::Float(*phase));
        }
        FieldPreset::Bump { width, amplitude } => {
            kind(&mut t, "bump");
            t.insert("width".into(), Value::Float(*width));
            t.insert("amplitude".into(), Value::Float(*amplitude));
        }
        FieldPreset::Coefficients(list) => {
            kind(&mut t, "coefficients");
            let rows = list
                .iter()
                .map(|(n, re, im)| {
                    let mut row: Vec<Value> = n.iter().map(|&x| Value::Integer(x)).collect();
                    row.extend([Value::Float(*re), Value::Float(*im)]);
                    Value::Array(row)
                })
                .collect();
            t.insert("coefficients".into(), Value::Array(rows));
        }
        FieldPreset::Random { k_max, decay, seed, sup } => {
            kind(&mut t, "random");
            t.insert("generator".into(), Value::String(GENERATOR.into()));
            t.insert("k_max".into(), Value::Integer(*k_max));
            t.insert("decay".into(), Value::Float(*decay));
            t.insert("seed".into(), Value::Integer(*seed as i64));
            t.insert("sup".into(), Value::Float(*sup));
        }
    }
    t
}
