//! Line-oriented `key = value` run configuration with `[section]` headers.

use std::fmt;
use std::path::PathBuf;
use trimmed_iga::analysis::{CaseKind, RunSettings};

/// Largest mesh level; level `l` has `2^l` elements per direction.
pub const MAX_LEVEL: u32 = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case_name: CaseKind,
    pub p: usize,
    pub r: usize,
    pub ht_divisions: usize,
    pub mesh_levels: Vec<u32>,
    pub quad_boost: usize,
    pub geo_precision: f64,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

const STUDY_KEYS: [&str; 7] = ["case_name", "p", "r", "ht_divisions", "mesh_levels", "quad_boost", "geo_precision"];
const OUTPUT_KEYS: [&str; 3] = ["output_path", "seed", "threads"];

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let err = |line: usize, message: String| ConfigError { line, message };
        let mut section = String::new();
        let mut case_name = None;
        let mut p = None;
        let mut r = None;
        let mut cfg = RunConfig {
            case_name: CaseKind::Poisson2d,
            p: 0,
            r: 0,
            ht_divisions: 1,
            mesh_levels: vec![3, 4, 5, 6],
            quad_boost: 0,
            geo_precision: 0.0,
            seed: 0,
            output_path: None,
            threads: None,
        };
        let mut seen: Vec<String> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(ln, format!("malformed section header `{line}`")))?
                    .trim();
                if name != "study" && name != "output" {
                    return Err(err(ln, format!("unknown section `[{name}]`")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(ln, format!("expected `key = value`, got `{line}`")))?;
            let allowed: &[&str] = match section.as_str() {
                "study" => &STUDY_KEYS,
                "output" => &OUTPUT_KEYS,
                _ => return Err(err(ln, format!("key `{key}` outside a section"))),
            };
            if !allowed.contains(&key) {
                return Err(err(ln, format!("unknown key `{key}` in [{section}]")));
            }
            if seen.iter().any(|k| k == key) {
                return Err(err(ln, format!("duplicate key `{key}`")));
            }
            seen.push(key.to_string());
            let bad = |what: &str| err(ln, format!("invalid {what} `{value}` for `{key}`"));
            let uint = || value.parse::<usize>().map_err(|_| bad("integer"));
            match key {
                "case_name" => case_name = Some(value.parse::<CaseKind>().map_err(|e| err(ln, e.to_string()))?),
                "p" => p = Some(uint()?),
                "r" => r = Some(uint()?),
                "ht_divisions" => {
                    cfg.ht_divisions = uint()?;
                    if cfg.ht_divisions == 0 {
                        return Err(bad("positive integer"));
                    }
                }
                "mesh_levels" => {
                    let mut levels = Vec::new();
                    for tok in value.split(',').map(str::trim) {
                        let l = tok.parse::<u32>().map_err(|_| bad("level list"))?;
                        if l == 0 || l > MAX_LEVEL {
                            return Err(err(ln, format!("mesh level {l} outside 1..={MAX_LEVEL}")));
                        }
                        levels.push(l);
                    }
                    levels.sort_unstable();
                    levels.dedup();
                    cfg.mesh_levels = levels;
                }
                "quad_boost" => cfg.quad_boost = uint()?,
                "geo_precision" => {
                    let v = value.parse::<f64>().map_err(|_| bad("number"))?;
                    if !(v >= 0.0 && v.is_finite()) {
                        return Err(bad("non-negative number"));
                    }
                    cfg.geo_precision = v;
                }
                "output_path" => cfg.output_path = Some(PathBuf::from(value)),
                "seed" => cfg.seed = value.parse().map_err(|_| bad("integer"))?,
                "threads" => {
                    let t = uint()?;
                    if t == 0 {
                        return Err(bad("positive integer"));
                    }
                    cfg.threads = Some(t);
                }
                _ => unreachable!(),
            }
        }
        let missing = |k: &str| err(0, format!("missing required key `{k}`"));
        cfg.case_name = case_name.ok_or_else(|| missing("case_name"))?;
        cfg.p = p.ok_or_else(|| missing("p"))?;
        cfg.r = r.unwrap_or(cfg.p);
        let line_of = |k: &str| {
            text.lines()
                .position(|l| l.split('=').next().map(str::trim) == Some(k))
                .map_or(0, |i| i + 1)
        };
        if !(1..=6).contains(&cfg.p) {
            return Err(err(line_of("p"), format!("p = {} outside 1..=6", cfg.p)));
        }
        if !(1..=cfg.p).contains(&cfg.r) {
            return Err(err(line_of("r"), format!("r = {} outside 1..=p", cfg.r)));
        }
        Ok(cfg)
    }

    /// Elements per direction of every mesh level.
    pub fn elements(&self) -> Vec<usize> {
        self.mesh_levels.iter().map(|&l| 1usize << l).collect()
    }

    pub fn settings(&self) -> RunSettings {
        let mut s = RunSettings::new(self.p, self.r);
        s.ht_divisions = self.ht_divisions;
        s.quad_boost = self.quad_boost;
        s.geo_precision = self.geo_precision;
        s
    }
}
