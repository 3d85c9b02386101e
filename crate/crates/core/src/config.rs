//! Run configuration shared by the CLI subcommands: defaults, config-file
//! parsing, flag merging, and the artifact header echo.
//!
//! Config file grammar (one setting per line):
//!
//! ```text
//! # comment                 blank lines and '#' comments are ignored
//! [params]                  sections: params, window, run, sim, output
//! q = 0.5
//! nu = 1.5
//! precision_bits = 192
//! trunc_tol = 1e-40
//! [window]
//! lo = -8
//! hi = 48
//! [run]
//! r = 0
//! t = 1.0
//! s = 0.5
//! [sim]
//! n_paths = 100000
//! seed = 7
//! guard_lo = -12
//! guard_hi = 30
//! max_events = 1000000
//! t_end = 0.5
//! [output]
//! out = row.csv
//! ```
//!
//! Values given on the command line override values from the file.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::{GridWindow, QParams, DEFAULT_PRECISION_BITS, DEFAULT_TRUNC_TOL};

/// Fully resolved run configuration, echoed into every output artifact.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub q: f64,
    pub nu: f64,
    pub precision_bits: u32,
    pub trunc_tol: f64,
    pub window_lo: i64,
    pub window_hi: i64,
    pub r: i64,
    pub t: f64,
    pub s: f64,
    pub n_paths: u64,
    pub seed: u64,
    pub guard_lo: i64,
    pub guard_hi: i64,
    pub max_events: u64,
    pub t_end: f64,
    /// True when the window came from a flag or config file rather than the
    /// built-in default; `verify` computes adequate windows otherwise.
    #[serde(skip)]
    pub window_explicit: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            q: 0.5,
            nu: 0.0,
            precision_bits: DEFAULT_PRECISION_BITS,
            trunc_tol: DEFAULT_TRUNC_TOL,
            window_lo: -8,
            window_hi: 48,
            r: 0,
            t: 1.0,
            s: 0.5,
            n_paths: 100_000,
            seed: 7,
            guard_lo: -12,
            guard_hi: 30,
            max_events: 1_000_000,
            t_end: 0.5,
            window_explicit: false,
        }
    }
}

impl RunConfig {
    pub fn params(&self) -> Result<QParams> {
        QParams::new(self.q, self.nu, self.precision_bits, self.trunc_tol)
    }

    pub fn window(&self) -> Result<GridWindow> {
        GridWindow::new(self.window_lo, self.window_hi)
    }

    pub fn guard(&self) -> Result<GridWindow> {
        GridWindow::new(self.guard_lo, self.guard_hi)
    }

    /// `# key = value` comment lines carrying the effective configuration,
    /// for CSV artifact headers. Deterministic order.
    pub fn csv_header(&self, tool_version: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# tool_version = {tool_version}");
        for (k, v) in self.as_pairs() {
            let _ = writeln!(s, "# {k} = {v}");
        }
        s
    }

    fn as_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("q", format!("{}", self.q)),
            ("nu", format!("{}", self.nu)),
            ("precision_bits", format!("{}", self.precision_bits)),
            ("trunc_tol", format!("{:e}", self.trunc_tol)),
            ("window_lo", format!("{}", self.window_lo)),
            ("window_hi", format!("{}", self.window_hi)),
            ("r", format!("{}", self.r)),
            ("t", format!("{}", self.t)),
            ("s", format!("{}", self.s)),
            ("n_paths", format!("{}", self.n_paths)),
            ("seed", format!("{}", self.seed)),
            ("guard_lo", format!("{}", self.guard_lo)),
            ("guard_hi", format!("{}", self.guard_hi)),
            ("max_events", format!("{}", self.max_events)),
            ("t_end", format!("{}", self.t_end)),
        ]
    }

    /// Apply settings parsed from a config file (flags are applied on top by
    /// the CLI afterwards).
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        let table = parse_config_file(text)?;
        for ((section, key), value) in &table {
            self.apply_key(section, key, value)?;
        }
        Ok(())
    }

    fn apply_key(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("invalid {what}: '{value}'"));
        match (section, key) {
            ("params", "q") => self.q = value.parse().map_err(|_| bad("q"))?,
            ("params", "nu") => self.nu = value.parse().map_err(|_| bad("nu"))?,
            ("params", "precision_bits") => {
                self.precision_bits = value.parse().map_err(|_| bad("precision_bits"))?
            }
            ("params", "trunc_tol") => {
                self.trunc_tol = value.parse().map_err(|_| bad("trunc_tol"))?
            }
            ("window", "lo") => {
                self.window_lo = value.parse().map_err(|_| bad("window lo"))?;
                self.window_explicit = true;
            }
            ("window", "hi") => {
                self.window_hi = value.parse().map_err(|_| bad("window hi"))?;
                self.window_explicit = true;
            }
            ("run", "r") => self.r = value.parse().map_err(|_| bad("r"))?,
            ("run", "t") => self.t = value.parse().map_err(|_| bad("t"))?,
            ("run", "s") => self.s = value.parse().map_err(|_| bad("s"))?,
            ("sim", "n_paths") => self.n_paths = value.parse().map_err(|_| bad("n_paths"))?,
            ("sim", "seed") => self.seed = value.parse().map_err(|_| bad("seed"))?,
            ("sim", "guard_lo") => self.guard_lo = value.parse().map_err(|_| bad("guard_lo"))?,
            ("sim", "guard_hi") => self.guard_hi = value.parse().map_err(|_| bad("guard_hi"))?,
            ("sim", "max_events") => {
                self.max_events = value.parse().map_err(|_| bad("max_events"))?
            }
            ("sim", "t_end") => self.t_end = value.parse().map_err(|_| bad("t_end"))?,
            ("output", _) => {} // output paths are flag-only; tolerated in files
            _ => {
                return Err(Error::Config(format!(
                    "unknown config key '{key}' in section [{section}]"
                )))
            }
        }
        Ok(())
    }
}

/// Parse the sectioned key-value grammar into ((section, key) -> value).
pub fn parse_config_file(text: &str) -> Result<BTreeMap<(String, String), String>> {
    let mut section = String::new();
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::Config(format!("line {}: unterminated section", lineno + 1)))?;
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
        })?;
        if section.is_empty() {
            return Err(Error::Config(format!(
                "line {}: key before any [section]",
                lineno + 1
            )));
        }
        out.insert(
            (section.clone(), key.trim().to_string()),
            value.trim().to_string(),
        );
    }
    Ok(out)
}

/// Parse a LO:HI pair as used by --window and --guard.
pub fn parse_window_spec(spec: &str) -> Result<(i64, i64)> {
    let (lo, hi) = spec
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("expected LO:HI, got '{spec}'")))?;
    let lo = lo
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad window bound '{lo}'")))?;
    let hi = hi
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad window bound '{hi}'")))?;
    Ok((lo, hi))
}
