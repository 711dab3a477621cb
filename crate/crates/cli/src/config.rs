//! Run configuration shared by the sweep-style commands.
//!
//! A configuration is a flat `key = value` text file; `#` starts a
//! comment. Command-line flags override file values, and the file
//! overrides built-in defaults. Every command resolves its inputs
//! through this precedence so a fixed config plus a fixed command line
//! is fully deterministic.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use fasthit_core::analysis::PeakSearch;
use fasthit_core::walks::TimeUnits;
use fasthit_core::{Error, Result};

/// Inclusive integer range written `a..b`, or a single value `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntRange {
    pub start: u32,
    pub end: u32,
}

impl IntRange {
    pub fn values(&self) -> Vec<u32> {
        (self.start..=self.end).collect()
    }
}

impl FromStr for IntRange {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let parse_end = |part: &str| {
            part.trim().parse::<u32>().map_err(|_| {
                Error::Parameter(format!("{part:?} is not a non-negative integer"))
            })
        };
        let range = match text.split_once("..") {
            Some((a, b)) => IntRange { start: parse_end(a)?, end: parse_end(b)? },
            None => {
                let value = parse_end(text)?;
                IntRange { start: value, end: value }
            }
        };
        if range.start > range.end {
            return Err(Error::Parameter(format!(
                "range {}..{} runs backwards",
                range.start, range.end
            )));
        }
        Ok(range)
    }
}

/// Time axis chosen by the `units` key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitsKind {
    Dimensionless,
    Physical,
}

impl FromStr for UnitsKind {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        match text {
            "dimensionless" => Ok(UnitsKind::Dimensionless),
            "physical" => Ok(UnitsKind::Physical),
            other => Err(Error::Parameter(format!(
                "units must be \"dimensionless\" or \"physical\", got {other:?}"
            ))),
        }
    }
}

/// Values read from a configuration file; `None` means "not given".
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub branchings: Option<IntRange>,
    pub depths: Option<IntRange>,
    pub gamma: Option<f64>,
    pub tau_max: Option<f64>,
    pub coarse_step: Option<f64>,
    pub refine_tol: Option<f64>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub units: Option<UnitsKind>,
    pub gamma_phys: Option<f64>,
    pub speed: Option<f64>,
}

fn parse_positive(key: &str, value: &str) -> Result<f64> {
    let number: f64 = value
        .parse()
        .map_err(|_| Error::Parameter(format!("{key}: {value:?} is not a number")))?;
    if !number.is_finite() || number <= 0.0 {
        return Err(Error::Parameter(format!(
            "{key} must be positive and finite, got {number}"
        )));
    }
    Ok(number)
}

impl RunConfig {
    pub fn parse_str(text: &str) -> Result<RunConfig> {
        let mut config = RunConfig::default();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parameter(format!(
                    "config line {}: expected key = value, got {raw:?}",
                    index + 1
                ))
            })?;
            config.set(key.trim(), value.trim()).map_err(|error| match error {
                Error::Parameter(message) => {
                    Error::Parameter(format!("config line {}: {message}", index + 1))
                }
                other => other,
            })?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        RunConfig::parse_str(&std::fs::read_to_string(path)?)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "B_set" => self.branchings = Some(value.parse()?),
            "n_set" => self.depths = Some(value.parse()?),
            "gamma" => self.gamma = Some(parse_positive(key, value)?),
            "tau_max" => self.tau_max = Some(parse_positive(key, value)?),
            "coarse_step" => self.coarse_step = Some(parse_positive(key, value)?),
            "refine_tol" => self.refine_tol = Some(parse_positive(key, value)?),
            "seed" => {
                self.seed = Some(value.parse().map_err(|_| {
                    Error::Parameter(format!("seed: {value:?} is not a non-negative integer"))
                })?)
            }
            "output_dir" => self.output_dir = Some(PathBuf::from(value)),
            "units" => self.units = Some(value.parse()?),
            "gamma_phys" => self.gamma_phys = Some(parse_positive(key, value)?),
            "speed" => self.speed = Some(parse_positive(key, value)?),
            unknown => {
                return Err(Error::Parameter(format!("unknown config key {unknown:?}")))
            }
        }
        Ok(())
    }

    /// Time axis for written curves. Physical units need either
    /// `gamma_phys` (rate per mm) or `speed` (mm per unit time, so the
    /// rate per mm is `gamma / speed`), but not both.
    pub fn resolve_units(&self) -> Result<TimeUnits> {
        match self.units.unwrap_or(UnitsKind::Dimensionless) {
            UnitsKind::Dimensionless => Ok(TimeUnits::Dimensionless),
            UnitsKind::Physical => match (self.gamma_phys, self.speed) {
                (Some(gamma_phys), None) => Ok(TimeUnits::PhysicalMm { gamma_phys }),
                (None, Some(speed)) => Ok(TimeUnits::PhysicalMm {
                    gamma_phys: self.gamma.unwrap_or(1.0) / speed,
                }),
                (Some(_), Some(_)) => Err(Error::Parameter(
                    "give gamma_phys or speed, not both".into(),
                )),
                (None, None) => Err(Error::Parameter(
                    "units = physical needs gamma_phys or speed".into(),
                )),
            },
        }
    }

    /// Peak-search override for the scaling sweep. The three knobs only
    /// make sense as a set, so they must be given together; with none
    /// given, every tree shape gets its built-in search window.
    pub fn resolve_peak_search(&self) -> Result<Option<PeakSearch>> {
        match (self.coarse_step, self.tau_max, self.refine_tol) {
            (Some(coarse_step), Some(tau_max), Some(refine_tol)) => Ok(Some(PeakSearch {
                coarse_step,
                refine_tol,
                tau_max,
                noise_floor: 1e-9,
            })),
            (None, None, None) => Ok(None),
            _ => Err(Error::Parameter(
                "peak-search settings coarse_step, tau_max, and refine_tol must be given together"
                    .into(),
            )),
        }
    }
}

/// Directory receiving generated files: `--output-dir` flag, then the
/// config file, then the `FASTHIT_OUTPUT_DIR` environment value, then
/// the working directory.
pub fn resolve_output_dir(
    flag: Option<&Path>,
    config: &RunConfig,
    env: Option<&str>,
) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    if let Some(dir) = &config.output_dir {
        return dir.clone();
    }
    match env {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => PathBuf::from("."),
    }
}

/// Uniform grid `0, step, 2 step, ...` up to `tau_max` inclusive within
/// roundoff.
pub fn build_grid(tau_max: f64, step: f64) -> Result<Vec<f64>> {
    for (name, value) in [("tau-max", tau_max), ("step", step)] {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::Parameter(format!(
                "{name} must be positive and finite, got {value}"
            )));
        }
    }
    let count = (tau_max / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| i as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_parse_both_forms() {
        assert_eq!("2..5".parse::<IntRange>().unwrap().values(), vec![2, 3, 4, 5]);
        assert_eq!("4".parse::<IntRange>().unwrap().values(), vec![4]);
        assert_eq!(" 2 .. 3 ".parse::<IntRange>().unwrap().values(), vec![2, 3]);
        assert!("5..2".parse::<IntRange>().is_err());
        assert!("2..x".parse::<IntRange>().is_err());
        assert!("-1".parse::<IntRange>().is_err());
    }

    #[test]
    fn config_files_parse_with_comments() {
        let config = RunConfig::parse_str(
            "# batch run\nB_set = 2..5\nn_set = 4\ngamma = 0.5  # rate\n\nseed = 7\nunits = physical\ngamma_phys = 0.1\noutput_dir = out\n",
        )
        .unwrap();
        assert_eq!(config.branchings.unwrap().values(), vec![2, 3, 4, 5]);
        assert_eq!(config.depths.unwrap().values(), vec![4]);
        assert_eq!(config.gamma, Some(0.5));
        assert_eq!(config.seed, Some(7));
        assert_eq!(config.units, Some(UnitsKind::Physical));
        assert_eq!(config.output_dir, Some(PathBuf::from("out")));
        assert_eq!(
            config.resolve_units().unwrap(),
            TimeUnits::PhysicalMm { gamma_phys: 0.1 }
        );
    }

    #[test]
    fn config_rejects_bad_lines() {
        let unknown = RunConfig::parse_str("volume = 11\n");
        assert!(matches!(unknown, Err(Error::Parameter(m)) if m.contains("unknown config key")));
        let bare = RunConfig::parse_str("gamma\n");
        assert!(matches!(bare, Err(Error::Parameter(m)) if m.contains("line 1")));
        assert!(RunConfig::parse_str("gamma = -2\n").is_err());
        assert!(RunConfig::parse_str("tau_max = inf\n").is_err());
        assert!(RunConfig::parse_str("seed = 1.5\n").is_err());
    }

    #[test]
    fn units_resolution_covers_the_cases() {
        let base = RunConfig::default();
        assert_eq!(base.resolve_units().unwrap(), TimeUnits::Dimensionless);

        let mut physical = RunConfig { units: Some(UnitsKind::Physical), ..base.clone() };
        assert!(physical.resolve_units().is_err());
        physical.speed = Some(4.0);
        physical.gamma = Some(2.0);
        assert_eq!(
            physical.resolve_units().unwrap(),
            TimeUnits::PhysicalMm { gamma_phys: 0.5 }
        );
        physical.gamma_phys = Some(0.1);
        assert!(physical.resolve_units().is_err());
    }

    #[test]
    fn peak_search_settings_come_as_a_set() {
        assert_eq!(RunConfig::default().resolve_peak_search().unwrap(), None);
        let full = RunConfig {
            coarse_step: Some(0.01),
            tau_max: Some(50.0),
            refine_tol: Some(1e-8),
            ..RunConfig::default()
        };
        let search = full.resolve_peak_search().unwrap().unwrap();
        assert_eq!(search.tau_max, 50.0);
        assert_eq!(search.noise_floor, 1e-9);
        let partial = RunConfig { tau_max: Some(50.0), ..RunConfig::default() };
        assert!(partial.resolve_peak_search().is_err());
    }

    #[test]
    fn output_dir_precedence_is_flag_config_env() {
        let config = RunConfig { output_dir: Some(PathBuf::from("cfg")), ..Default::default() };
        let flag = Path::new("flag");
        assert_eq!(resolve_output_dir(Some(flag), &config, Some("env")), PathBuf::from("flag"));
        assert_eq!(resolve_output_dir(None, &config, Some("env")), PathBuf::from("cfg"));
        let bare = RunConfig::default();
        assert_eq!(resolve_output_dir(None, &bare, Some("env")), PathBuf::from("env"));
        assert_eq!(resolve_output_dir(None, &bare, Some("")), PathBuf::from("."));
        assert_eq!(resolve_output_dir(None, &bare, None), PathBuf::from("."));
    }

    #[test]
    fn grids_cover_zero_to_the_endpoint() {
        let grid = build_grid(6.0, 0.01).unwrap();
        assert_eq!(grid.len(), 601);
        assert_eq!(grid[0], 0.0);
        assert!((grid[600] - 6.0).abs() < 1e-12);
        assert_eq!(build_grid(0.005, 0.01).unwrap(), vec![0.0]);
        assert!(build_grid(0.0, 0.01).is_err());
        assert!(build_grid(6.0, -1.0).is_err());
    }
}
