//! Typed views of the `key = value` config shared by the subcommands.

use emergence_core::config::{Config, ConfigError};
use emergence_core::corpus::{StreamConfig, TaskMix};
use emergence_core::percolation::DegreeDistribution;
use emergence_core::typegraph::{Level, TypeGraphParams};

pub const GRAPH_KEYS: [&str; 6] = [
    "seed",
    "n_entities",
    "n_desc_props",
    "n_classes",
    "n_verbs",
    "edge_fraction",
];
pub const STREAM_KEYS: [&str; 4] = ["batch_size", "iterations", "mix", "level"];

fn invalid(key: &str, value: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        value: value.into(),
        message: message.into(),
    }
}

pub fn seed(cfg: &Config) -> Result<u64, ConfigError> {
    cfg.get_or("seed", 0)
}

pub fn graph_params(cfg: &Config) -> Result<TypeGraphParams, ConfigError> {
    let d = TypeGraphParams::default();
    let params = TypeGraphParams {
        n_entities: cfg.get_or("n_entities", d.n_entities)?,
        n_desc_props: cfg.get_or("n_desc_props", d.n_desc_props)?,
        n_classes: cfg.get_or("n_classes", d.n_classes)?,
        n_verbs: cfg.get_or("n_verbs", d.n_verbs)?,
        edge_fraction: cfg.get_or("edge_fraction", d.edge_fraction)?,
        seed: seed(cfg)?,
    };
    // Validation messages start with the offending parameter's name.
    params.validate().map_err(|e| {
        let message = e.to_string();
        let key = GRAPH_KEYS
            .into_iter()
            .find(|k| message.contains(k))
            .unwrap_or("n_classes");
        invalid(key, cfg.raw(key).unwrap_or("default"), message)
    })?;
    Ok(params)
}

pub fn level(cfg: &Config) -> Result<Level, ConfigError> {
    match cfg.raw("level").unwrap_or("seen") {
        "seen" => Ok(Level::Seen),
        "class" => Ok(Level::Class),
        other => Err(invalid("level", other, "expected `seen` or `class`")),
    }
}

pub fn stream_config(cfg: &Config) -> Result<StreamConfig, ConfigError> {
    let d = StreamConfig::default();
    let batch_size: usize = cfg.get_or("batch_size", d.batch_size)?;
    if batch_size == 0 {
        return Err(invalid("batch_size", "0", "must be positive"));
    }
    let mix = match cfg.get_list::<f64>("mix")? {
        None => d.mix,
        Some(v) if v.len() == 3 => TaskMix::new(v[0], v[1], v[2])
            .map_err(|e| invalid("mix", cfg.raw("mix").unwrap_or(""), e.to_string()))?,
        Some(_) => {
            return Err(invalid(
                "mix",
                cfg.raw("mix").unwrap_or(""),
                "expected free, unscramble, conditional",
            ))
        }
    };
    Ok(StreamConfig {
        seed: seed(cfg)?,
        batch_size,
        mix,
        level: level(cfg)?,
    })
}

/// `a:b:n`, `n` log-spaced points from `a` to `b` inclusive.
pub fn log_grid(cfg: &Config, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
    let Some(raw) = cfg.raw(key) else {
        return Ok(None);
    };
    let bad = |m: &str| invalid(key, raw, m);
    let parts: Vec<&str> = raw.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(bad("expected `start:end:points`"));
    };
    let a: f64 = a.trim().parse().map_err(|_| bad("start is not a number"))?;
    let b: f64 = b.trim().parse().map_err(|_| bad("end is not a number"))?;
    let n: usize = n
        .trim()
        .parse()
        .map_err(|_| bad("points is not an integer"))?;
    if !(a > 0.0 && b > a && b.is_finite()) || n < 2 {
        return Err(bad("need 0 < start < end and at least 2 points"));
    }
    let (la, lb) = (a.ln(), b.ln());
    Ok(Some(
        (0..n)
            .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
            .collect(),
    ))
}

/// `a:b:step`, an arithmetic grid from `a` to `b` inclusive.
pub fn step_grid(cfg: &Config, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
    let Some(raw) = cfg.raw(key) else {
        return Ok(None);
    };
    let bad = |m: String| invalid(key, raw, m);
    let parts: Vec<f64> = raw
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| bad(e.to_string()))?;
    let [a, b, step] = parts[..] else {
        return Err(bad("expected `start:end:step`".into()));
    };
    emergence_core::analysis::exponent_grid(a, b, step)
        .map(Some)
        .map_err(|e| bad(e.to_string()))
}

/// `poisson:<mean>` or `delta:<k>`.
pub fn degree_distribution(cfg: &Config, key: &str) -> Result<DegreeDistribution, ConfigError> {
    let raw = cfg
        .raw(key)
        .ok_or_else(|| ConfigError::Missing(key.to_string()))?;
    let bad = |m: String| invalid(key, raw, m);
    match raw.split_once(':') {
        Some(("poisson", mean)) => {
            let mean: f64 = mean
                .trim()
                .parse()
                .map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?;
            DegreeDistribution::poisson(mean).map_err(|e| bad(e.to_string()))
        }
        Some(("delta", k)) => k
            .trim()
            .parse()
            .map(DegreeDistribution::delta)
            .map_err(|e: std::num::ParseIntError| bad(e.to_string())),
        _ => Err(bad("expected `poisson:<mean>` or `delta:<degree>`".into())),
    }
}
