//! Experiment configuration files.
//!
//! A config is a single TOML document. Top-level keys are shared by every
//! experiment; model parameters live in a section named after the
//! experiment (`[mbl]` for both disorder experiments). Unknown keys are
//! rejected.

use std::fmt;
use std::path::Path;

use gechi_core::solvers::DmrgConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    AkltSweep,
    MgSweep,
    HaldaneGrid,
    MblScan,
    MblScatter,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] =
        [Self::AkltSweep, Self::MgSweep, Self::HaldaneGrid, Self::MblScan, Self::MblScatter];

    pub fn name(self) -> &'static str {
        match self {
            Self::AkltSweep => "aklt_sweep",
            Self::MgSweep => "mg_sweep",
            Self::HaldaneGrid => "haldane_grid",
            Self::MblScan => "mbl_scan",
            Self::MblScatter => "mbl_scatter",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Self::AkltSweep => "extended Haldane chain ground states across the biquadratic coupling",
            Self::MgSweep => "J1-J2 chain ground states across the next-nearest-neighbour coupling",
            Self::HaldaneGrid => "anisotropic Haldane chain ground states on a (D, E) grid",
            Self::MblScan => "disorder-averaged E_1 - E_chi of mid-spectrum eigenstates",
            Self::MblScatter => "per-eigenstate (mu, E_chi) points of disordered chains",
        }
    }

    fn section(self) -> &'static str {
        match self {
            Self::MblScan | Self::MblScatter => "mbl",
            other => other.name(),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A list of values, either explicit or evenly spaced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range(Range),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range(r) if r.points == 1 => vec![r.start],
            Grid::Range(r) => {
                let steps = (r.points - 1) as f64;
                (0..r.points).map(|i| r.start + (r.stop - r.start) * i as f64 / steps).collect()
            }
        }
    }

    fn check(&self) -> Result<(), String> {
        match self {
            Grid::List(v) if v.is_empty() => Err("grid is empty".into()),
            Grid::List(v) if v.iter().any(|x| !x.is_finite()) => Err("grid values must be finite".into()),
            Grid::List(_) => Ok(()),
            Grid::Range(r) if r.points == 0 => Err("points must be positive".into()),
            Grid::Range(r) if !(r.start.is_finite() && r.stop.is_finite()) => {
                Err("start and stop must be finite".into())
            }
            Grid::Range(r) if r.stop < r.start => Err("stop is below start".into()),
            Grid::Range(_) => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AkltSweep {
    pub j_aklt: Grid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MgSweep {
    #[serde(default = "one")]
    pub j1: f64,
    pub j2: Grid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HaldaneGrid {
    #[serde(default = "one")]
    pub j: f64,
    pub d: Grid,
    pub e: Grid,
    /// Field on the two end spins, see `anisotropic_haldane_pinned`.
    #[serde(default)]
    pub edge_field: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mbl {
    #[serde(default = "one")]
    pub j: f64,
    /// Disorder strengths `h`.
    pub h: Grid,
    pub samples: usize,
    pub eigenstates_per_sample: usize,
    /// Largest Hilbert space handed to exact diagonalization.
    #[serde(default = "default_dense_cap")]
    pub dense_cap: usize,
    /// Magnetization sector the eigenstates are drawn from.
    #[serde(default)]
    pub sector: Sector,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    /// Total `S^z = 0`; needs even chain lengths.
    #[default]
    Zero,
    /// The whole spectrum.
    All,
}

impl Sector {
    /// `2 S^z_total` of the sector, `None` for the whole spectrum.
    pub fn twice_sz(self) -> Option<i32> {
        match self {
            Self::Zero => Some(0),
            Self::All => None,
        }
    }

    /// Number of states available at `n` spin-1/2 sites.
    pub fn dim(self, n: usize) -> usize {
        match self {
            Self::Zero => (0..n / 2).fold(1usize, |acc, k| acc.saturating_mul(n - k) / (k + 1)),
            Self::All => 1usize.checked_shl(n as u32).unwrap_or(usize::MAX),
        }
    }
}

fn one() -> f64 {
    1.0
}

fn default_dense_cap() -> usize {
    1 << 20
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    /// Output directory; the CLI flag and `GECHI_OUT_DIR` take precedence.
    pub dir: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub chi_list: Vec<usize>,
    #[serde(default)]
    pub refine_sweeps: usize,
    #[serde(default)]
    pub solver: DmrgConfig,
    #[serde(default)]
    pub output: Output,
    pub aklt_sweep: Option<AkltSweep>,
    pub mg_sweep: Option<MgSweep>,
    pub haldane_grid: Option<HaldaneGrid>,
    pub mbl: Option<Mbl>,
}

/// A config problem, with the line it was found on when known.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// 1-based line of the first `key = ...` assignment, optionally inside
/// `[section]`.
fn locate(text: &str, section: Option<&str>, key: &str) -> Option<usize> {
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = Some(name.trim().to_string());
            if section == Some(name.trim()) && key.is_empty() {
                return Some(i + 1);
            }
            continue;
        }
        let in_scope = match section {
            None => current.is_none(),
            Some(s) => current.as_deref() == Some(s),
        };
        if in_scope {
            if let Some((lhs, _)) = line.split_once('=') {
                if lhs.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            ConfigError { line, message: e.message().trim().to_string() }
        })?;
        cfg.validate_with(text)?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError { line: None, message: format!("cannot read {}: {e}", path.display()) })?;
        Self::from_toml(&text)
    }

    /// Semantic checks; `text` is only used to attach line numbers.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_with("")
    }

    fn validate_with(&self, text: &str) -> Result<(), ConfigError> {
        let err = |section: Option<&str>, key: &str, message: String| ConfigError {
            line: locate(text, section, key),
            message: match section {
                Some(s) if !key.is_empty() => format!("{s}.{key}: {message}"),
                Some(s) => format!("[{s}]: {message}"),
                None => format!("{key}: {message}"),
            },
        };
        if self.sizes.is_empty() {
            return Err(err(None, "sizes", "must not be empty".into()));
        }
        let min_size = match self.experiment {
            ExperimentKind::AkltSweep | ExperimentKind::MgSweep => 3,
            _ => 2,
        };
        if let Some(&n) = self.sizes.iter().find(|&&n| n < min_size) {
            return Err(err(None, "sizes", format!("{n} is below the minimum chain length {min_size}")));
        }
        if self.chi_list.is_empty() {
            return Err(err(None, "chi_list", "must not be empty".into()));
        }
        if self.chi_list[0] == 0 || self.chi_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(err(None, "chi_list", "must be strictly ascending positive integers".into()));
        }
        if self.experiment == ExperimentKind::MblScan && (self.chi_list[0] != 1 || self.chi_list.len() < 2) {
            return Err(err(
                None,
                "chi_list",
                "mbl_scan compares chi = 1 against larger values: start at 1 and list at least two".into(),
            ));
        }
        if let Err(e) = self.solver.validate() {
            return Err(err(Some("solver"), "", e.to_string()));
        }
        let present = [
            ("aklt_sweep", self.aklt_sweep.is_some()),
            ("mg_sweep", self.mg_sweep.is_some()),
            ("haldane_grid", self.haldane_grid.is_some()),
            ("mbl", self.mbl.is_some()),
        ];
        let wanted = self.experiment.section();
        for (name, is_set) in present {
            if name == wanted && !is_set {
                return Err(err(None, "experiment", format!("{} needs a [{wanted}] section", self.experiment)));
            }
            if name != wanted && is_set {
                return Err(err(Some(name), "", format!("section is not used by {}", self.experiment)));
            }
        }
        let grid = |section: &str, key: &str, g: &Grid| g.check().map_err(|m| err(Some(section), key, m));
        let finite = |section: &str, key: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(err(Some(section), key, "must be finite".into()))
            }
        };
        if let Some(s) = &self.aklt_sweep {
            grid("aklt_sweep", "j_aklt", &s.j_aklt)?;
        }
        if let Some(s) = &self.mg_sweep {
            finite("mg_sweep", "j1", s.j1)?;
            grid("mg_sweep", "j2", &s.j2)?;
        }
        if let Some(s) = &self.haldane_grid {
            finite("haldane_grid", "j", s.j)?;
            finite("haldane_grid", "edge_field", s.edge_field)?;
            grid("haldane_grid", "d", &s.d)?;
            grid("haldane_grid", "e", &s.e)?;
        }
        if let Some(s) = &self.mbl {
            finite("mbl", "j", s.j)?;
            grid("mbl", "h", &s.h)?;
            if s.h.values().iter().any(|&h| h < 0.0) {
                return Err(err(Some("mbl"), "h", "disorder strengths must be non-negative".into()));
            }
            if s.samples == 0 {
                return Err(err(Some("mbl"), "samples", "must be positive".into()));
            }
            if s.eigenstates_per_sample == 0 {
                return Err(err(Some("mbl"), "eigenstates_per_sample", "must be positive".into()));
            }
            for &n in &self.sizes {
                let dim = 1usize.checked_shl(n as u32).filter(|_| n < usize::BITS as usize);
                match dim {
                    Some(d) if d <= s.dense_cap => {
                        if s.sector == Sector::Zero && n % 2 == 1 {
                            return Err(err(
                                Some("mbl"),
                                "sector",
                                format!("n = {n} has no zero-magnetization sector"),
                            ));
                        }
                        let available = s.sector.dim(n);
                        if s.eigenstates_per_sample > available {
                            return Err(err(
                                Some("mbl"),
                                "eigenstates_per_sample",
                                format!("exceeds the {available} eigenstates in the sector at n = {n}"),
                            ));
                        }
                    }
                    _ => return Err(err(None, "sizes", format!("n = {n} exceeds mbl.dense_cap = {}", s.dense_cap))),
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form; formatting and comments in the
    /// source file do not affect it.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HALDANE: &str = r#"
experiment = "haldane_grid"
seed = 3
sizes = [8]
chi_list = [1, 2, 3]

[solver]
max_bond = 16

[haldane_grid]
d = { start = 0.0, stop = 2.0, points = 9 }
e = [0.0, 1.0]
"#;

    #[test]
    fn parses_a_grid_config() {
        let cfg = ExperimentConfig::from_toml(HALDANE).unwrap();
        let g = cfg.haldane_grid.as_ref().unwrap();
        assert_eq!(g.d.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]);
        assert_eq!(g.e.values(), vec![0.0, 1.0]);
        assert_eq!(g.j, 1.0);
        assert_eq!(cfg.solver.max_bond, 16);
        assert_eq!(cfg.solver.sweeps, DmrgConfig::default().sweeps);
    }

    #[test]
    fn range_hits_its_end_points() {
        let g = Grid::Range(Range { start: 0.0, stop: 2.0, points: 21 });
        let v = g.values();
        assert_eq!(v[10], 1.0);
        assert_eq!(v[20], 2.0);
    }

    #[test]
    fn missing_field_is_named() {
        let text = HALDANE.replace("chi_list = [1, 2, 3]\n", "");
        let e = ExperimentConfig::from_toml(&text).unwrap_err();
        assert!(e.message.contains("chi_list"), "{e}");
    }

    #[test]
    fn unknown_key_reports_its_line() {
        let text = HALDANE.replace("max_bond = 16", "max_bond = 16\nmax_bnd = 3");
        let e = ExperimentConfig::from_toml(&text).unwrap_err();
        assert!(e.message.contains("max_bnd"), "{e}");
        assert_eq!(e.line, Some(9));
    }

    #[test]
    fn semantic_errors_point_at_the_key() {
        let text = HALDANE.replace("chi_list = [1, 2, 3]", "chi_list = [2, 1]");
        let e = ExperimentConfig::from_toml(&text).unwrap_err();
        assert_eq!(e.line, Some(5));
        assert!(e.message.starts_with("chi_list"));
        let text = HALDANE.replace("e = [0.0, 1.0]", "e = []");
        let e = ExperimentConfig::from_toml(&text).unwrap_err();
        assert_eq!(e.line, Some(12));
        assert!(e.to_string().contains("haldane_grid.e"));
    }

    #[test]
    fn sections_must_match_the_experiment() {
        let text = HALDANE.replace("haldane_grid\"", "aklt_sweep\"");
        let e = ExperimentConfig::from_toml(&text).unwrap_err();
        assert!(e.message.contains("[aklt_sweep]"), "{e}");
    }

    #[test]
    fn zero_sector_needs_even_sizes() {
        let base = "experiment = \"mbl_scan\"\nseed = 1\nsizes = [7]\nchi_list = [1, 2]\n[mbl]\nh = [1.0]\nsamples = 2\neigenstates_per_sample = 3\n";
        let e = ExperimentConfig::from_toml(base).unwrap_err();
        assert!(e.message.starts_with("mbl.sector"), "{e}");
        let all = ExperimentConfig::from_toml(&format!("{base}sector = \"all\"\n")).unwrap();
        assert_eq!(all.mbl.unwrap().sector, Sector::All);
        let e = ExperimentConfig::from_toml(&base.replace("[7]", "[4]").replace("= 3", "= 7")).unwrap_err();
        assert!(e.message.contains("6 eigenstates"), "{e}");
        assert_eq!(Sector::Zero.dim(12), 924);
    }

    #[test]
    fn hash_ignores_formatting() {
        let a = ExperimentConfig::from_toml(HALDANE).unwrap();
        let b = ExperimentConfig::from_toml(&format!("# comment\n{}", HALDANE.replace(" = ", "="))).unwrap();
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.seed += 1;
        assert_ne!(a.hash(), c.hash());
    }
}
