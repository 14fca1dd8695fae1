//! Flat `key = value` configuration documents.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dynamic::Envelope;
use crate::experiments::{ExperimentConfig, Perturbation, Sweep, SweepVariable, Target};
use crate::noise::NoiseMode;
use crate::propagator::Units;
use crate::schedule::PulseShape;

pub const KEYS: [&str; 27] = [
    "run.label",
    "gate.name",
    "gate.theta",
    "perturb.stage",
    "perturb.term",
    "perturb.extra",
    "perturb.epsilon",
    "dynamic.t0",
    "dynamic.envelope",
    "dynamic.retune",
    "pulse.shape",
    "pulse.r",
    "pulse.erf_width",
    "pulse.gap",
    "pulse.gate_time",
    "pulse.samples",
    "pulse.units",
    "noise.mode",
    "noise.sigma",
    "noise.bandwidth",
    "noise.per_line",
    "mc.runs",
    "mc.seed",
    "sweep.variable",
    "sweep.values",
    "output.path",
    "output.format",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("{key}: {message}")]
    Value { key: String, message: String },
    #[error("{0}")]
    Inconsistent(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(OutputFormat::Csv),
            "json" => Some(OutputFormat::Json),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct OutputSpec {
    pub path: Option<String>,
    pub format: OutputFormat,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ConfigDocument {
    pub experiment: ExperimentConfig,
    pub output: OutputSpec,
}

fn units_name(u: Units) -> &'static str {
    match u {
        Units::Angular => "angular",
        Units::Cycles => "cycles",
    }
}

struct Values {
    map: BTreeMap<String, String>,
}

impl Values {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| ConfigError::Value {
                key: key.into(),
                message: format!("cannot parse {v:?}"),
            }),
        }
    }

    fn named<T>(&mut self, key: &str, f: impl Fn(&str) -> Option<T>) -> Result<Option<T>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => f(&v).map(Some).ok_or_else(|| ConfigError::Value {
                key: key.into(),
                message: format!("unrecognized value {v:?}"),
            }),
        }
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.map.keys().any(|k| k.starts_with(prefix))
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl ConfigDocument {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            pairs.push((i + 1, k.trim().to_string(), v.trim().to_string()));
        }
        Self::from_numbered_pairs(pairs)
    }

    pub fn from_pairs<I, K, V>(pairs: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        Self::from_numbered_pairs(
            pairs
                .into_iter()
                .enumerate()
                .map(|(i, (k, v))| (i + 1, k.into(), v.into()))
                .collect(),
        )
    }

    fn from_numbered_pairs(pairs: Vec<(usize, String, String)>) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (line, key, value) in pairs {
            if !KEYS.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey { line, key });
            }
            if map.insert(key.clone(), value).is_some() {
                return Err(ConfigError::DuplicateKey { line, key });
            }
        }
        let mut v = Values { map };
        let mut e = ExperimentConfig::default();

        set(&mut e.label, v.take("run.label"));
        let name = v.take("gate.name").unwrap_or_else(|| "cnot1".into());
        let theta = v.parse::<f64>("gate.theta")?;
        e.target = if name == "dynamic" {
            if theta.is_some() || v.has_prefix("perturb.") {
                return Err(ConfigError::Inconsistent("the dynamic gate takes no angle or perturbation".into()));
            }
            let mut t0 = 10.0;
            set(&mut t0, v.parse("dynamic.t0")?);
            let mut envelope = Envelope::Square;
            set(&mut envelope, v.named("dynamic.envelope", Envelope::parse)?);
            let mut retune = false;
            set(&mut retune, v.parse("dynamic.retune")?);
            Target::Dynamic { t0, envelope, retune }
        } else {
            if v.has_prefix("dynamic.") {
                return Err(ConfigError::Inconsistent("dynamic.* keys need gate.name = dynamic".into()));
            }
            let perturb = if v.has_prefix("perturb.") {
                let missing = |k: &str| ConfigError::Value {
                    key: k.into(),
                    message: "required with a perturbation".into(),
                };
                let stage = v.parse("perturb.stage")?.ok_or_else(|| missing("perturb.stage"))?;
                let extra = v.take("perturb.extra").ok_or_else(|| missing("perturb.extra"))?;
                let mut p = Perturbation {
                    stage,
                    term: 1,
                    extra,
                    epsilon: 0.0,
                };
                set(&mut p.term, v.parse("perturb.term")?);
                set(&mut p.epsilon, v.parse("perturb.epsilon")?);
                Some(p)
            } else {
                None
            };
            Target::Adiabatic {
                gate: name,
                theta,
                perturb,
            }
        };

        let p = &mut e.pulse;
        set(&mut p.shape, v.named("pulse.shape", PulseShape::parse)?);
        set(&mut p.rz_ratio, v.parse("pulse.r")?);
        p.erf_width = v.parse("pulse.erf_width")?;
        set(&mut p.gap, v.parse("pulse.gap")?);
        set(&mut p.gate_time, v.parse("pulse.gate_time")?);
        set(&mut p.samples, v.parse("pulse.samples")?);
        set(
            &mut e.units,
            v.named("pulse.units", |s| match s {
                "angular" => Some(Units::Angular),
                "cycles" => Some(Units::Cycles),
                _ => None,
            })?,
        );

        let n = &mut e.noise;
        set(&mut n.mode, v.named("noise.mode", NoiseMode::parse)?);
        set(&mut n.sigma, v.parse("noise.sigma")?);
        set(&mut n.bandwidth, v.parse("noise.bandwidth")?);
        set(&mut n.per_line_independent, v.parse("noise.per_line")?);
        set(&mut e.runs, v.parse("mc.runs")?);
        set(&mut e.seed, v.parse("mc.seed")?);
        n.seed = e.seed;

        let variable = v.named("sweep.variable", SweepVariable::parse)?;
        let values = v.take("sweep.values");
        e.sweep = match (variable, values) {
            (None, None) => None,
            (Some(variable), Some(text)) => {
                let values = text
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<f64>().map_err(|_| ConfigError::Value {
                            key: "sweep.values".into(),
                            message: format!("cannot parse {s:?}"),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Some(Sweep { variable, values })
            }
            _ => {
                return Err(ConfigError::Inconsistent(
                    "sweep.variable and sweep.values go together".into(),
                ))
            }
        };

        let mut output = OutputSpec {
            path: v.take("output.path"),
            ..OutputSpec::default()
        };
        set(&mut output.format, v.named("output.format", OutputFormat::parse)?);
        debug_assert!(v.map.is_empty(), "unconsumed keys {:?}", v.map);
        Ok(Self { experiment: e, output })
    }

    /// Every resolved key, in the canonical order.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = experiment_pairs(&self.experiment);
        if let Some(p) = &self.output.path {
            out.push(("output.path", p.clone()));
        }
        out.push(("output.format", self.output.format.name().into()));
        out
    }

    pub fn render(&self) -> String {
        render_pairs(&self.to_pairs())
    }
}

fn render_pairs(pairs: &[(&'static str, String)]) -> String {
    let mut s = String::new();
    for (k, v) in pairs {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

pub fn experiment_pairs(e: &ExperimentConfig) -> Vec<(&'static str, String)> {
    let mut out: Vec<(&'static str, String)> = Vec::new();
    let mut push = |k: &'static str, v: String| out.push((k, v));
    if !e.label.is_empty() {
        push("run.label", e.label.clone());
    }
    match &e.target {
        Target::Adiabatic { gate, theta, perturb } => {
            push("gate.name", gate.clone());
            if let Some(t) = theta {
                push("gate.theta", t.to_string());
            }
            if let Some(p) = perturb {
                push("perturb.stage", p.stage.to_string());
                push("perturb.term", p.term.to_string());
                push("perturb.extra", p.extra.clone());
                push("perturb.epsilon", p.epsilon.to_string());
            }
        }
        Target::Dynamic { t0, envelope, retune } => {
            push("gate.name", "dynamic".into());
            push("dynamic.t0", t0.to_string());
            push("dynamic.envelope", envelope.name().into());
            push("dynamic.retune", retune.to_string());
        }
    }
    let p = &e.pulse;
    push("pulse.shape", p.shape.name().into());
    push("pulse.r", p.rz_ratio.to_string());
    if let Some(w) = p.erf_width {
        push("pulse.erf_width", w.to_string());
    }
    push("pulse.gap", p.gap.to_string());
    push("pulse.gate_time", p.gate_time.to_string());
    push("pulse.samples", p.samples.to_string());
    push("pulse.units", units_name(e.units).into());
    let n = &e.noise;
    push("noise.mode", n.mode.name().into());
    push("noise.sigma", n.sigma.to_string());
    push("noise.bandwidth", n.bandwidth.to_string());
    push("noise.per_line", n.per_line_independent.to_string());
    push("mc.runs", e.runs.to_string());
    push("mc.seed", e.seed.to_string());
    if let Some(s) = &e.sweep {
        push("sweep.variable", s.variable.name().into());
        let vals: Vec<String> = s.values.iter().map(f64::to_string).collect();
        push("sweep.values", vals.join(", "));
    }
    out
}

impl ExperimentConfig {
    pub fn render(&self) -> String {
        render_pairs(&experiment_pairs(self))
    }

    /// SHA-256 of the rendered experiment, hex encoded.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.render().as_bytes());
        hash.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::preset;
    use proptest::prelude::*;

    const SAMPLE: &str = "\
# fig3a-like point
gate.name = cnot1
pulse.gap = 5
pulse.gate_time = 10.5   # ns
noise.mode = dc
noise.sigma = 0.15
mc.runs = 100
mc.seed = 7
sweep.variable = gate_time
sweep.values = 4, 6.5, 8
output.format = json
";

    #[test]
    fn parses_sample() {
        let d = ConfigDocument::parse(SAMPLE).unwrap();
        let e = &d.experiment;
        assert_eq!(e.pulse.gate_time, 10.5);
        assert_eq!(e.noise.mode, NoiseMode::Dc);
        assert_eq!(e.noise.seed, 7);
        assert_eq!(e.sweep.as_ref().unwrap().values, vec![4.0, 6.5, 8.0]);
        assert_eq!(d.output.format, OutputFormat::Json);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = ConfigDocument::parse("noise.mode = dc\nnoise.sgma = 0.1\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::UnknownKey {
                line: 2,
                key: "noise.sgma".into()
            }
        );
        assert!(err.to_string().contains("noise.sgma"));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ConfigDocument::parse("pulse.gap = 0,5").is_err());
        assert!(ConfigDocument::parse("pulse.gap 5").is_err());
        assert!(ConfigDocument::parse("pulse.gap = 5\npulse.gap = 6").is_err());
        assert!(ConfigDocument::parse("noise.mode = pink").is_err());
        assert!(ConfigDocument::parse("sweep.variable = sigma_f").is_err());
        assert!(ConfigDocument::parse("dynamic.t0 = 10").is_err());
        assert!(ConfigDocument::parse("perturb.stage = 1").is_err());
    }

    #[test]
    fn empty_values_parse_but_fail_validation() {
        let d = ConfigDocument::parse("sweep.variable = gate_time\nsweep.values =\n").unwrap();
        assert!(d.experiment.validate().is_err());
    }

    #[test]
    fn presets_round_trip() {
        for name in crate::experiments::PRESETS {
            for e in preset(name, 9, 50).unwrap() {
                let doc = ConfigDocument {
                    experiment: e,
                    output: OutputSpec::default(),
                };
                let back = ConfigDocument::parse(&doc.render()).unwrap();
                assert_eq!(back, doc);
                assert_eq!(back.experiment.digest(), doc.experiment.digest());
            }
        }
    }

    #[test]
    fn digest_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.seed = 1;
        assert_eq!(a.digest().len(), 64);
        assert_ne!(a.digest(), b.digest());
    }

    proptest! {
        #[test]
        fn numeric_round_trip(gap in 1e-6f64..1e6, t in 1e-3f64..1e4, sigma in 0.0f64..1.0, seed in any::<u64>()) {
            let mut e = ExperimentConfig::default();
            e.pulse.gap = gap;
            e.pulse.gate_time = t;
            e.noise.sigma = sigma;
            e.seed = seed;
            e.noise.seed = seed;
            let doc = ConfigDocument { experiment: e, output: OutputSpec::default() };
            prop_assert_eq!(ConfigDocument::parse(&doc.render()).unwrap(), doc);
        }
    }
}
