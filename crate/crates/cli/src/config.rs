//! Experiment configuration: one JSON object, validated key by key.

use std::path::PathBuf;

use detproc::orthopoly::{FamilySpec, LimitRegime, ParamPair, SiteWindow};
use detproc::{Error, Result};
use serde_json::{Map, Value};

pub const EXPERIMENTS: [&str; 7] = ["kernel", "ensemble", "sample", "dynamics", "verify", "limits", "cylindric"];

const KEYS: [&str; 18] = [
    "experiment", "family", "window", "beta", "mu", "N", "times", "sites", "samples", "seed", "n_max", "theta",
    "out_dir", "threads", "regime", "rungs", "cases", "margin",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Kernel,
    Ensemble,
    Sample,
    Dynamics,
    Verify,
    Limits,
    Cylindric,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub family: Option<FamilySpec>,
    pub window: Option<(f64, f64)>,
    /// f64::INFINITY for "inf".
    pub beta: Option<f64>,
    pub mu: f64,
    pub n: Option<usize>,
    pub times: Option<Vec<f64>>,
    pub sites: Option<Vec<f64>>,
    pub samples: usize,
    pub seed: u64,
    pub n_max: usize,
    pub theta: f64,
    pub out_dir: PathBuf,
    pub threads: usize,
    pub regimes: Vec<LimitRegime>,
    pub rungs: usize,
    pub cases: Option<usize>,
    pub margin: usize,
    /// Echo of the accepted JSON with overrides applied.
    pub raw: Value,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn number(map: &Map<String, Value>, key: &str, path: &str) -> Result<Option<f64>> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_f64()
            .filter(|x| x.is_finite())
            .map(Some)
            .ok_or_else(|| config_err(format!("{path} must be a number"))),
    }
}

fn count(map: &Map<String, Value>, key: &str, path: &str) -> Result<Option<usize>> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|x| Some(x as usize))
            .ok_or_else(|| config_err(format!("{path} must be a nonnegative integer"))),
    }
}

fn numbers(map: &Map<String, Value>, key: &str) -> Result<Option<Vec<f64>>> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| v.as_f64().filter(|x| x.is_finite()))
            .collect::<Option<Vec<_>>>()
            .map(Some)
            .ok_or_else(|| config_err(format!("{key} must be a list of numbers"))),
        Some(_) => Err(config_err(format!("{key} must be a list of numbers"))),
    }
}

fn pair(v: &Value, path: &str) -> Result<ParamPair> {
    let bad = || config_err(format!("{path} must be {{\"re\": x, \"im\": y}} or a pair [z, z']"));
    match v {
        Value::Object(m) => {
            let re = number(m, "re", &format!("{path}.re"))?.ok_or_else(bad)?;
            let im = number(m, "im", &format!("{path}.im"))?.unwrap_or(0.0);
            Ok(ParamPair::Principal { re, im })
        }
        Value::Array(a) if a.len() == 2 => {
            let z = a[0].as_f64().ok_or_else(bad)?;
            let w = a[1].as_f64().ok_or_else(bad)?;
            Ok(ParamPair::Complementary(z, w))
        }
        _ => Err(bad()),
    }
}

fn family(v: &Value) -> Result<FamilySpec> {
    let m = v.as_object().ok_or_else(|| config_err("family must be an object with a name"))?;
    let name = m
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| config_err("family.name is required"))?;
    let allowed: &[&str] = match name {
        "meixner" => &["c", "xi"],
        "charlier" => &["mu"],
        "krawtchouk" => &["m", "p"],
        "hahn" => &["m", "a", "b"],
        "racah" => &["m", "alpha", "beta", "gamma", "delta"],
        "hermite" => &[],
        "laguerre" => &["c"],
        "jacobi" => &["a", "b"],
        "askey_lesky" => &["u", "w"],
        "discrete_hypergeometric" => &["z", "xi"],
        other => {
            return Err(config_err(format!(
                "family.name {other:?} is not one of meixner, charlier, krawtchouk, hahn, racah, hermite, laguerre, jacobi, askey_lesky, discrete_hypergeometric"
            )))
        }
    };
    for k in m.keys() {
        if k != "name" && !allowed.contains(&k.as_str()) {
            return Err(config_err(format!("unknown key family.{k} for family {name}")));
        }
    }
    let real = |k: &str| -> Result<f64> {
        number(m, k, &format!("family.{k}"))?.ok_or_else(|| config_err(format!("family.{k} is required")))
    };
    let int = |k: &str| -> Result<usize> {
        count(m, k, &format!("family.{k}"))?.ok_or_else(|| config_err(format!("family.{k} is required")))
    };
    let get = |k: &str| m.get(k).ok_or_else(|| config_err(format!("family.{k} is required")));
    let spec = match name {
        "meixner" => FamilySpec::Meixner { c: real("c")?, xi: real("xi")? },
        "charlier" => FamilySpec::Charlier { mu: real("mu")? },
        "krawtchouk" => FamilySpec::Krawtchouk { m: int("m")?, p: real("p")? },
        "hahn" => FamilySpec::Hahn { m: int("m")?, a: real("a")?, b: real("b")? },
        "racah" => FamilySpec::Racah {
            m: int("m")?,
            alpha: real("alpha")?,
            beta: real("beta")?,
            gamma: real("gamma")?,
            delta: real("delta")?,
        },
        "hermite" => FamilySpec::Hermite,
        "laguerre" => FamilySpec::Laguerre { c: real("c")? },
        "jacobi" => FamilySpec::Jacobi { a: real("a")?, b: real("b")? },
        "askey_lesky" => FamilySpec::AskeyLesky { u: pair(get("u")?, "family.u")?, w: pair(get("w")?, "family.w")? },
        _ => FamilySpec::DiscreteHypergeometric { z: pair(get("z")?, "family.z")?, xi: real("xi")? },
    };
    spec.validate().map_err(|e| config_err(format!("family parameters are invalid: {e}")))?;
    Ok(spec)
}

fn experiment(v: Option<&Value>) -> Result<Experiment> {
    let list = EXPERIMENTS.join(", ");
    let name = v
        .and_then(Value::as_str)
        .ok_or_else(|| config_err(format!("experiment is required and must be one of {list}")))?;
    Ok(match name {
        "kernel" => Experiment::Kernel,
        "ensemble" => Experiment::Ensemble,
        "sample" => Experiment::Sample,
        "dynamics" => Experiment::Dynamics,
        "verify" => Experiment::Verify,
        "limits" => Experiment::Limits,
        "cylindric" => Experiment::Cylindric,
        other => return Err(config_err(format!("experiment {other:?} is not one of {list}"))),
    })
}

impl ExperimentConfig {
    /// Parses and validates; `out` and `seed` override the file.
    pub fn parse(text: &str, out: Option<PathBuf>, seed: Option<u64>) -> Result<Self> {
        let mut raw: Value =
            serde_json::from_str(text).map_err(|e| config_err(format!("config is not valid JSON: {e}")))?;
        let map = raw.as_object_mut().ok_or_else(|| config_err("config must be a JSON object"))?;
        if let Some(k) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(config_err(format!("unknown key {k}; expected one of {}", KEYS.join(", "))));
        }
        if let Some(o) = &out {
            map.insert("out_dir".into(), Value::String(o.display().to_string()));
        }
        if let Some(s) = seed {
            map.insert("seed".into(), Value::from(s));
        }
        let map = &*map;
        let experiment = experiment(map.get("experiment"))?;
        let family = map.get("family").map(family).transpose()?;
        let window = match numbers(map, "window")? {
            None => None,
            Some(w) if w.len() == 2 && w[0] <= w[1] => Some((w[0], w[1])),
            Some(_) => return Err(config_err("window must be [lo, hi] with lo <= hi")),
        };
        let beta = match map.get("beta") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) if s == "inf" => Some(f64::INFINITY),
            Some(v) => match v.as_f64() {
                Some(b) if b > 0.0 && b.is_finite() => Some(b),
                _ => return Err(config_err("beta must be positive or \"inf\"")),
            },
        };
        let mu = number(map, "mu", "mu")?.unwrap_or(0.0);
        let n = count(map, "N", "N")?;
        if n == Some(0) {
            return Err(config_err("N must be at least 1"));
        }
        let times = numbers(map, "times")?;
        if let Some(t) = &times {
            if t.is_empty() {
                return Err(config_err("times must not be empty"));
            }
            if t.windows(2).any(|w| w[1] < w[0]) {
                return Err(config_err("times must be nondecreasing"));
            }
        }
        let sites = numbers(map, "sites")?;
        let samples = count(map, "samples", "samples")?.unwrap_or(1000);
        let seed = match map.get("seed") {
            None | Some(Value::Null) => 0,
            Some(v) => v.as_u64().ok_or_else(|| config_err("seed must be a nonnegative integer"))?,
        };
        let n_max = count(map, "n_max", "n_max")?.unwrap_or(12);
        if n_max > 20 {
            return Err(config_err("n_max must be at most 20"));
        }
        let theta = number(map, "theta", "theta")?.unwrap_or(1.0);
        if theta < 0.0 {
            return Err(config_err("theta must be nonnegative"));
        }
        let out_dir = map
            .get("out_dir")
            .and_then(Value::as_str)
            .map(PathBuf::from)
            .ok_or_else(|| config_err("out_dir is required (or pass --out)"))?;
        let threads = count(map, "threads", "threads")?.unwrap_or(1);
        if threads == 0 {
            return Err(config_err("threads must be at least 1"));
        }
        let regimes = match map.get("regime") {
            None | Some(Value::Null) => LimitRegime::ALL.to_vec(),
            Some(Value::String(s)) => vec![LimitRegime::from_name(s)?],
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| LimitRegime::from_name(v.as_str().unwrap_or("")))
                .collect::<Result<Vec<_>>>()?,
            Some(_) => return Err(config_err("regime must be a name or a list of names")),
        };
        let rungs = count(map, "rungs", "rungs")?.unwrap_or(6);
        if !(2..=8).contains(&rungs) {
            return Err(config_err("rungs must be between 2 and 8"));
        }
        let cases = count(map, "cases", "cases")?;
        if cases == Some(0) {
            return Err(config_err("cases must be at least 1"));
        }
        let margin = count(map, "margin", "margin")?.unwrap_or(4);
        let cfg = ExperimentConfig {
            experiment,
            family,
            window,
            beta,
            mu,
            n,
            times,
            sites,
            samples,
            seed,
            n_max,
            theta,
            out_dir,
            threads,
            regimes,
            rungs,
            cases,
            margin,
            raw: raw.clone(),
        };
        cfg.check_required()?;
        Ok(cfg)
    }

    fn check_required(&self) -> Result<()> {
        let need = |present: bool, key: &str| {
            if present {
                Ok(())
            } else {
                Err(config_err(format!("{key} is required for this experiment")))
            }
        };
        let discrete = || -> Result<()> {
            need(self.family.is_some(), "family")?;
            if self.family.as_ref().is_some_and(|f| !f.has_discrete_weight()) {
                return Err(config_err("family must be a discrete family for this experiment"));
            }
            need(self.window.is_some(), "window")
        };
        match self.experiment {
            Experiment::Kernel => {
                discrete()?;
                need(self.beta.is_some(), "beta")
            }
            Experiment::Ensemble | Experiment::Sample => {
                discrete()?;
                need(self.n.is_some() || self.beta.is_some(), "N or beta")
            }
            Experiment::Dynamics => {
                discrete()?;
                need(self.beta.is_some_and(f64::is_finite), "finite beta")?;
                need(self.times.is_some(), "times")
            }
            Experiment::Verify | Experiment::Limits => Ok(()),
            Experiment::Cylindric => {
                if self.beta.is_some_and(f64::is_infinite) {
                    return Err(config_err("beta must be finite for this experiment"));
                }
                Ok(())
            }
        }
    }

    pub fn site_window(&self) -> Result<SiteWindow> {
        let (lo, hi) = self.window.expect("window checked");
        SiteWindow::for_family(self.family.as_ref().expect("family checked"), lo, hi)
            .map_err(|e| config_err(format!("window does not fit the family lattice: {e}")))
    }
}
