//! Experiment config files.
//!
//! ```text
//! # comment
//! [environment]
//! name = wheel
//! delta = 0.95
//!
//! [agent "LinFullPost"]
//! lambda = 0.5
//!
//! [agent "RMS"]
//!
//! [run]
//! trials = 10
//! horizon = 2000
//! seed = 0
//! out = results
//! workers = 4
//! ```
//!
//! Keys inside an `[agent "<preset>"]` block override the preset's settings;
//! `name = ...` renames the agent in the output.

use std::collections::HashSet;
use std::path::PathBuf;
use std::str::FromStr;

use banditlab::catalog::AgentSpec;
use banditlab::envs::{DatasetSpec, LinearBanditSpec, RewardRule, WheelConfig};

use crate::output::sanitize_name;
use crate::{BenchError, Result};

const WHEEL_ACTIONS: usize = 5;

#[derive(Debug, Clone)]
pub enum EnvKind {
    Wheel(WheelConfig),
    Linear(LinearBanditSpec),
    Dataset(DatasetSpec),
}

#[derive(Debug, Clone)]
pub struct EnvConfig {
    pub kind: EnvKind,
    /// Append a constant 1 to every context.
    pub bias: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub trials: usize,
    pub horizon: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub workers: usize,
    /// Round-robin pulls of every action before agents take over.
    pub warmup: usize,
    /// Record wall-clock time. Off by default so reruns produce identical
    /// files.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            trials: 10,
            horizon: 2000,
            seed: 0,
            out: PathBuf::from("results"),
            workers: 1,
            warmup: 3,
            timing: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub env: EnvConfig,
    /// Declared agents in file order, with the uniform baseline last if it
    /// was not declared.
    pub agents: Vec<AgentSpec>,
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn uniform_index(&self) -> usize {
        self.agents
            .iter()
            .position(AgentSpec::is_uniform)
            .expect("parse_config always includes a uniform agent")
    }
}

fn err(line: usize, message: impl Into<String>) -> BenchError {
    BenchError::Config {
        line,
        message: message.into(),
    }
}

#[derive(Debug, PartialEq)]
enum Header {
    Environment,
    Run,
    Agent(String),
}

struct Entry {
    line: usize,
    key: String,
    value: String,
}

struct Section {
    header: Header,
    line: usize,
    entries: Vec<Entry>,
}

fn parse_header(line: usize, inner: &str) -> Result<Header> {
    let inner = inner.trim();
    match inner {
        "environment" => return Ok(Header::Environment),
        "run" => return Ok(Header::Run),
        _ => {}
    }
    if let Some(rest) = inner.strip_prefix("agent") {
        let rest = rest.trim();
        if let Some(name) = rest.strip_prefix('"').and_then(|r| r.strip_suffix('"')) {
            if name.is_empty() {
                return Err(err(line, "agent preset name is empty"));
            }
            return Ok(Header::Agent(name.to_string()));
        }
        return Err(err(line, "agent sections are written [agent \"<preset>\"]"));
    }
    Err(err(line, format!("unknown section [{inner}]")))
}

fn unquote(value: &str) -> &str {
    value
        .strip_prefix('"')
        .and_then(|v| v.strip_suffix('"'))
        .unwrap_or(value)
}

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
            continue;
        }
        if let Some(inner) = trimmed.strip_prefix('[') {
            let inner = inner
                .strip_suffix(']')
                .ok_or_else(|| err(line, "section header is missing `]`"))?;
            sections.push(Section {
                header: parse_header(line, inner)?,
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected `key = value`, found `{trimmed}`")))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(err(line, "empty key"));
        }
        let section = sections
            .last_mut()
            .ok_or_else(|| err(line, format!("`{key}` appears before any section")))?;
        if section.entries.iter().any(|e| e.key == key) {
            return Err(err(line, format!("duplicate key `{key}`")));
        }
        section.entries.push(Entry {
            line,
            key: key.to_string(),
            value: unquote(value.trim()).to_string(),
        });
    }
    Ok(sections)
}

fn parse_value<T: FromStr>(entry: &Entry) -> Result<T> {
    entry
        .value
        .parse()
        .map_err(|_| err(entry.line, format!("invalid value `{}` for `{}`", entry.value, entry.key)))
}

fn parse_positive(entry: &Entry) -> Result<usize> {
    let v: usize = parse_value(entry)?;
    if v == 0 {
        return Err(err(entry.line, format!("`{}` must be positive", entry.key)));
    }
    Ok(v)
}

fn parse_bool(entry: &Entry) -> Result<bool> {
    match entry.value.as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(err(entry.line, format!("`{}` expects true or false", entry.key))),
    }
}

fn parse_list(entry: &Entry) -> Vec<String> {
    entry
        .value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn parse_floats(entry: &Entry) -> Result<Vec<f64>> {
    entry
        .value
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| err(entry.line, format!("invalid number `{}` in `{}`", s.trim(), entry.key)))
        })
        .collect()
}

fn unknown_key(entry: &Entry, what: &str) -> BenchError {
    err(entry.line, format!("unknown key `{}` for {what}", entry.key))
}

fn parse_wheel(entries: &[&Entry]) -> Result<WheelConfig> {
    let mut cfg = WheelConfig::default();
    for e in entries {
        let slot = match e.key.as_str() {
            "delta" => &mut cfg.delta,
            "mu1" => &mut cfg.mu1,
            "mu2" => &mut cfg.mu2,
            "mu3" => &mut cfg.mu3,
            "sigma" => &mut cfg.sigma,
            _ => return Err(unknown_key(e, "the wheel environment")),
        };
        *slot = parse_value(e)?;
    }
    Ok(cfg)
}

fn parse_linear(entries: &[&Entry]) -> Result<LinearBanditSpec> {
    let mut spec = LinearBanditSpec::uniform_noise(20, 6, 1.0, 0.5, 0);
    let mut sigmas: Option<(usize, Vec<f64>)> = None;
    for e in entries {
        match e.key.as_str() {
            "d" => spec.d = parse_positive(e)?,
            "k" => spec.k = parse_positive(e)?,
            "lambda" => spec.prior_lambda = parse_value(e)?,
            "sigma" => sigmas = Some((e.line, parse_floats(e)?)),
            "context_correlation" => spec.context_correlation = parse_value(e)?,
            _ => return Err(unknown_key(e, "the linear environment")),
        }
    }
    spec.noise_sigmas = match sigmas {
        None => vec![0.5; spec.k],
        Some((_, s)) if s.len() == 1 => vec![s[0]; spec.k],
        Some((line, s)) if s.len() != spec.k => {
            return Err(err(line, format!("`sigma` lists {} values for {} arms", s.len(), spec.k)));
        }
        Some((_, s)) => s,
    };
    Ok(spec)
}

fn parse_dataset(entries: &[&Entry], line: usize) -> Result<DatasetSpec> {
    let mut path = None;
    let mut rule = None;
    for e in entries {
        match e.key.as_str() {
            "path" => path = Some(PathBuf::from(&e.value)),
            "rule" => {
                rule = Some(
                    RewardRule::from_str(&e.value).map_err(|source| err(e.line, source.to_string()))?,
                )
            }
            _ => {}
        }
    }
    let path = path.ok_or_else(|| err(line, "dataset environment needs `path`"))?;
    let rule = rule.ok_or_else(|| err(line, "dataset environment needs `rule`"))?;
    let mut spec = DatasetSpec::new(path, rule);
    for e in entries {
        match e.key.as_str() {
            "path" | "rule" => {}
            "delimiter" => {
                spec.delimiter = match e.value.as_str() {
                    "tab" | "\\t" => b'\t',
                    "space" => b' ',
                    v if v.len() == 1 => v.as_bytes()[0],
                    _ => return Err(err(e.line, "delimiter must be a single character, `tab` or `space`")),
                }
            }
            "header" => spec.has_header = parse_bool(e)?,
            "label" => spec.label_column = Some(e.value.clone()),
            "numeric_columns" => spec.numeric_columns = parse_list(e),
            "categorical_columns" => spec.categorical_columns = parse_list(e),
            "context_columns" => spec.context_columns = parse_list(e),
            "num_actions" => spec.num_actions = Some(parse_positive(e)?),
            "poisonous_label" => spec.poisonous_label = e.value.clone(),
            "mixing_seed" => spec.mixing_seed = parse_value(e)?,
            _ => return Err(unknown_key(e, "the dataset environment")),
        }
    }
    Ok(spec)
}

fn parse_environment(section: &Section) -> Result<EnvConfig> {
    let mut name = None;
    let mut bias = false;
    let mut rest = Vec::new();
    for e in &section.entries {
        match e.key.as_str() {
            "name" => name = Some(e),
            "bias" => bias = parse_bool(e)?,
            _ => rest.push(e),
        }
    }
    let name = name.ok_or_else(|| err(section.line, "[environment] needs `name`"))?;
    let kind = match name.value.as_str() {
        "wheel" => {
            let cfg = parse_wheel(&rest)?;
            cfg.validate().map_err(|e| err(section.line, e.to_string()))?;
            EnvKind::Wheel(cfg)
        }
        "linear" => {
            let spec = parse_linear(&rest)?;
            spec.validate().map_err(|e| err(section.line, e.to_string()))?;
            EnvKind::Linear(spec)
        }
        "dataset" => EnvKind::Dataset(parse_dataset(&rest, section.line)?),
        other => {
            return Err(err(
                name.line,
                format!("unknown environment `{other}` (expected wheel, linear or dataset)"),
            ))
        }
    };
    Ok(EnvConfig { kind, bias })
}

fn parse_run(section: &Section) -> Result<RunConfig> {
    let mut run = RunConfig::default();
    for e in &section.entries {
        match e.key.as_str() {
            "trials" => run.trials = parse_positive(e)?,
            "horizon" => run.horizon = parse_positive(e)?,
            "seed" => run.seed = parse_value(e)?,
            "out" => run.out = PathBuf::from(&e.value),
            "workers" => run.workers = parse_positive(e)?,
            "warmup" => run.warmup = parse_value(e)?,
            "timing" => run.timing = parse_bool(e)?,
            _ => return Err(unknown_key(e, "[run]")),
        }
    }
    Ok(run)
}

fn parse_agent(section: &Section, preset: &str) -> Result<AgentSpec> {
    let mut spec = AgentSpec::preset(preset).map_err(|e| err(section.line, e.to_string()))?;
    for e in &section.entries {
        spec.set(&e.key, &e.value).map_err(|source| err(e.line, source.to_string()))?;
    }
    if spec.name.is_empty() {
        return Err(err(section.line, "agent name is empty"));
    }
    Ok(spec)
}

/// Parses and validates a config. Every error carries the 1-based line it
/// refers to; problems with the file as a whole point at its last line.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let last_line = text.lines().count().max(1);
    let sections = split_sections(text)?;

    let mut env = None;
    let mut run = None;
    let mut agents: Vec<AgentSpec> = Vec::new();
    let mut file_names = HashSet::new();
    for section in &sections {
        match &section.header {
            Header::Environment => {
                if env.is_some() {
                    return Err(err(section.line, "second [environment] section"));
                }
                env = Some(parse_environment(section)?);
            }
            Header::Run => {
                if run.is_some() {
                    return Err(err(section.line, "second [run] section"));
                }
                run = Some(parse_run(section)?);
            }
            Header::Agent(preset) => {
                let spec = parse_agent(section, preset)?;
                if !file_names.insert(sanitize_name(&spec.name)) {
                    return Err(err(
                        section.line,
                        format!("agent name `{}` clashes with an earlier agent", spec.name),
                    ));
                }
                agents.push(spec);
            }
        }
    }

    let env = env.ok_or_else(|| err(last_line, "missing [environment] section"))?;
    let run = run.unwrap_or_default();
    if agents.is_empty() {
        return Err(err(last_line, "no [agent \"...\"] sections"));
    }
    if !agents.iter().any(AgentSpec::is_uniform) {
        let uniform = AgentSpec::preset("Uniform")?;
        if !file_names.insert(sanitize_name(&uniform.name)) {
            return Err(err(
                last_line,
                "an agent named `Uniform` is not the uniform baseline; rename it",
            ));
        }
        agents.push(uniform);
    }

    let known_actions = match &env.kind {
        EnvKind::Wheel(_) => Some(WHEEL_ACTIONS),
        EnvKind::Linear(spec) => Some(spec.k),
        EnvKind::Dataset(_) => None,
    };
    if let Some(k) = known_actions {
        if run.horizon < k * run.warmup {
            return Err(err(
                last_line,
                format!(
                    "horizon {} is shorter than the {}-step warmup",
                    run.horizon,
                    k * run.warmup
                ),
            ));
        }
    }

    Ok(ExperimentConfig { env, agents, run })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config_err(text: &str) -> (usize, String) {
        match parse_config(text) {
            Err(BenchError::Config { line, message }) => (line, message),
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config() {
        let cfg = parse_config("[environment]\nname = wheel\n[agent \"RMS\"]\n").unwrap();
        assert_eq!(cfg.agents.len(), 2);
        assert_eq!(cfg.agents[1].name, "Uniform");
        assert_eq!(cfg.run, RunConfig::default());
    }

    #[test]
    fn declared_uniform_is_not_duplicated() {
        let cfg = parse_config("[environment]\nname = wheel\n[agent \"Uniform\"]\n[agent \"RMS\"]\n").unwrap();
        assert_eq!(cfg.agents.len(), 2);
        assert_eq!(cfg.uniform_index(), 0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let (line, msg) = config_err("[environment]\nname = wheel\n\n[agent \"Nope\"]\n");
        assert_eq!(line, 4);
        assert!(msg.contains("Nope"));

        let (line, _) = config_err("[environment]\nname = wheel\nradius = 2\n[agent \"RMS\"]\n");
        assert_eq!(line, 3);

        let (line, _) = config_err("[environment]\nname = wheel\n[agent \"RMS\"]\nbogus = 1\n");
        assert_eq!(line, 4);

        let (line, _) = config_err("[environment]\nname = wheel\n[agent \"RMS\"]\n[run]\ntrials = 0\n");
        assert_eq!(line, 5);

        let (line, _) = config_err("[environment]\nname = wheel\n[agent \"RMS\"]\n[run]\nhorizon = -3\n");
        assert_eq!(line, 5);

        let (line, msg) = config_err("[agent \"RMS\"]\n[run]\ntrials = 2\n");
        assert_eq!(line, 3);
        assert!(msg.contains("environment"));

        let (_, msg) = config_err("[environment]\nname = wheel\n");
        assert!(msg.contains("agent"));
    }

    #[test]
    fn malformed_lines() {
        assert_eq!(config_err("trials = 3\n").0, 1);
        assert_eq!(config_err("[environment\nname = wheel\n").0, 1);
        assert_eq!(config_err("[environment]\njust words\n").0, 2);
        assert_eq!(config_err("[environment]\nname = wheel\nname = linear\n").0, 3);
        assert_eq!(config_err("[agent RMS]\n").0, 1);
    }

    #[test]
    fn environment_parameters() {
        let cfg = parse_config(
            "[environment]\nname = linear\nd = 30\nk = 3\nsigma = 0.1, 0.2, 0.3\ncontext_correlation = 0.8\nbias = true\n[agent \"LinPost\"]\n",
        )
        .unwrap();
        assert!(cfg.env.bias);
        match cfg.env.kind {
            EnvKind::Linear(spec) => {
                assert_eq!((spec.d, spec.k), (30, 3));
                assert_eq!(spec.noise_sigmas, vec![0.1, 0.2, 0.3]);
                assert_eq!(spec.context_correlation, 0.8);
            }
            other => panic!("unexpected {other:?}"),
        }
        let (line, _) = config_err("[environment]\nname = linear\nk = 3\nsigma = 0.1, 0.2\n[agent \"LinPost\"]\n");
        assert_eq!(line, 4);
        let (line, _) = config_err("[environment]\nname = wheel\ndelta = 1.5\n[agent \"RMS\"]\n");
        assert_eq!(line, 1);
    }

    #[test]
    fn dataset_section() {
        let cfg = parse_config(
            "[environment]\nname = dataset\npath = \"data/m.csv\"\nrule = mushroom\nlabel = class\ndelimiter = tab\n[agent \"LinPost\"]\n",
        )
        .unwrap();
        match cfg.env.kind {
            EnvKind::Dataset(spec) => {
                assert_eq!(spec.path, PathBuf::from("data/m.csv"));
                assert_eq!(spec.reward_rule, RewardRule::Mushroom);
                assert_eq!(spec.label_column.as_deref(), Some("class"));
                assert_eq!(spec.delimiter, b'\t');
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(config_err("[environment]\nname = dataset\nrule = mushroom\n[agent \"LinPost\"]\n").0, 1);
        assert_eq!(config_err("[environment]\nname = dataset\npath = x\nrule = nope\n[agent \"LinPost\"]\n").0, 4);
    }

    #[test]
    fn overrides_and_renames() {
        let cfg = parse_config(
            "[environment]\nname = wheel\n[agent \"LinFullPost\"]\nname = wide\nlambda = 2\n[agent \"LinFullPost\"]\n",
        )
        .unwrap();
        assert_eq!(cfg.agents[0].name, "wide");
        assert_eq!(cfg.agents[1].name, "LinFullPost");
        let (line, _) = config_err("[environment]\nname = wheel\n[agent \"RMS\"]\n[agent \"RMS\"]\n");
        assert_eq!(line, 4);
    }

    #[test]
    fn warmup_longer_than_horizon() {
        let (_, msg) = config_err("[environment]\nname = wheel\n[agent \"RMS\"]\n[run]\nhorizon = 10\n");
        assert!(msg.contains("warmup"));
    }
}
