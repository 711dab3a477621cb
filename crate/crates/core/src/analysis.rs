//! Peak search, branching/depth scaling sweeps, and curve fitting.
//!
//! The central object is the first arrival peak of the chain quantum walk:
//! the earliest dimensionless time where the exit probability reaches a
//! local maximum. A coarse scan with a noise-floor hysteresis brackets the
//! peak and a golden-section pass refines it, which keeps the search robust
//! against roundoff-scale wiggles near `tau = 0` without ever smoothing the
//! curve itself.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::walks::{ChainQw, LumpedCrw};

/// Golden ratio conjugate used by the refinement bracket updates.
const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Cap on golden-section iterations; at a fixed shrink rate per step this
/// is far beyond what any representable bracket needs.
const MAX_REFINEMENT_ITERATIONS: usize = 200;

/// Tuning knobs for [`find_first_peak`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakSearch {
    /// Grid spacing of the coarse scan, in dimensionless time.
    pub coarse_step: f64,
    /// Refinement stops once the bracket is narrower than this.
    pub refine_tol: f64,
    /// The scan gives up past this time.
    pub tau_max: f64,
    /// Rises and falls smaller than this are treated as noise: a candidate
    /// maximum must exceed the floor, and only a drop of more than the
    /// floor below it confirms the peak.
    pub noise_floor: f64,
}

impl PeakSearch {
    /// Search configuration scaled to a chain of the given shape.
    ///
    /// The first peak sits near `(2n + 2) / sqrt(B)` and its width shrinks
    /// like `1 / sqrt(B)`, so both the step and the horizon carry that
    /// factor.
    pub fn for_chain(branching: u32, depth: u32) -> Self {
        let scale = (branching as f64).sqrt();
        PeakSearch {
            coarse_step: 0.02 / scale,
            refine_tol: 1e-9,
            tau_max: 12.0 * (2 * depth + 2) as f64 / scale,
            noise_floor: 1e-9,
        }
    }

    fn check(&self) -> Result<()> {
        let positive = [
            ("coarse_step", self.coarse_step),
            ("refine_tol", self.refine_tol),
            ("tau_max", self.tau_max),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::parameter(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if !self.noise_floor.is_finite() || self.noise_floor < 0.0 {
            return Err(Error::parameter(format!(
                "noise_floor must be finite and >= 0, got {}",
                self.noise_floor
            )));
        }
        if self.coarse_step >= self.tau_max {
            return Err(Error::parameter(format!(
                "coarse_step {} must be smaller than tau_max {}",
                self.coarse_step, self.tau_max
            )));
        }
        Ok(())
    }
}

/// Location and height of a first local maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakResult {
    pub tau_star: f64,
    pub p_star: f64,
    /// Coarse-scan interval that contains `tau_star` strictly.
    pub bracket: (f64, f64),
    pub refinement_iterations: usize,
}

/// Finds the earliest interior local maximum of `f` on `[0, tau_max]`.
///
/// The coarse scan keeps a running reference value. Rising above it arms a
/// candidate; falling more than `noise_floor` below it either confirms the
/// candidate (when armed and above the floor) or resets the reference to
/// the current valley. Confirmed candidates are refined by golden-section
/// search inside the one-step bracket around the coarse maximum, and the
/// reported height never drops below the best coarse sample.
///
/// Curves that never rise and fall within the horizon produce a numerical
/// error rather than a boundary point.
pub fn find_first_peak<F>(mut f: F, config: &PeakSearch) -> Result<PeakResult>
where
    F: FnMut(f64) -> f64,
{
    config.check()?;
    let mut eval = |tau: f64| -> Result<f64> {
        let value = f(tau);
        if !value.is_finite() {
            return Err(Error::numerical(format!("curve value at tau = {tau} is not finite")));
        }
        Ok(value)
    };

    let steps = (config.tau_max / config.coarse_step).floor() as usize;
    let mut best_value = eval(0.0)?;
    let mut best_index = 0usize;
    let mut armed = false;
    let mut confirmed = None;

    for i in 1..=steps {
        let value = eval(i as f64 * config.coarse_step)?;
        if value > best_value {
            best_value = value;
            best_index = i;
            armed = true;
        } else if value < best_value - config.noise_floor {
            if armed && best_value > config.noise_floor {
                confirmed = Some((best_index, best_value));
                break;
            }
            best_value = value;
            best_index = i;
            armed = false;
        }
    }

    let (coarse_index, coarse_value) = confirmed.ok_or_else(|| {
        Error::numerical(format!(
            "no interior peak above the noise floor before tau = {}",
            config.tau_max
        ))
    })?;

    let bracket = (
        (coarse_index - 1) as f64 * config.coarse_step,
        (coarse_index + 1) as f64 * config.coarse_step,
    );
    let (mut lo, mut hi) = bracket;
    let mut inner_lo = hi - GOLDEN * (hi - lo);
    let mut inner_hi = lo + GOLDEN * (hi - lo);
    let mut value_lo = eval(inner_lo)?;
    let mut value_hi = eval(inner_hi)?;
    let mut iterations = 0;
    while hi - lo > config.refine_tol && iterations < MAX_REFINEMENT_ITERATIONS {
        if value_lo >= value_hi {
            hi = inner_hi;
            inner_hi = inner_lo;
            value_hi = value_lo;
            inner_lo = hi - GOLDEN * (hi - lo);
            value_lo = eval(inner_lo)?;
        } else {
            lo = inner_lo;
            inner_lo = inner_hi;
            value_lo = value_hi;
            inner_hi = lo + GOLDEN * (hi - lo);
            value_hi = eval(inner_hi)?;
        }
        iterations += 1;
    }

    let mut tau_star = 0.5 * (lo + hi);
    let mut p_star = eval(tau_star)?;
    if coarse_value > p_star {
        tau_star = coarse_index as f64 * config.coarse_step;
        p_star = coarse_value;
    }
    Ok(PeakResult { tau_star, p_star, bracket, refinement_iterations: iterations })
}

/// First-peak search for the chain quantum walk of the given shape.
///
/// `config` overrides the shape-scaled defaults from
/// [`PeakSearch::for_chain`].
pub fn chain_peak(branching: u32, depth: u32, config: Option<&PeakSearch>) -> Result<PeakResult> {
    let defaults = PeakSearch::for_chain(branching, depth);
    let config = config.copied().unwrap_or(defaults);
    let chain = ChainQw::new(branching, depth)?;
    find_first_peak(|tau| chain.exit_probability(tau), &config)
}

/// One row of a branching/depth scaling sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub branching: u32,
    pub depth: u32,
    /// First-peak time of the quantum walk, dimensionless.
    pub tau_star: f64,
    /// Quantum exit probability at the peak.
    pub p_star_qw: f64,
    /// Classical exit probability at the same time.
    pub p_crw_at_tau_star: f64,
    /// Classical long-time exit probability, one over the node count.
    pub p_crw_stationary: f64,
    /// Quantum-over-classical advantage at the peak time.
    pub enhancement_ratio: f64,
}

/// Quantum-over-classical exit-probability ratio at the peak time.
pub fn enhancement_ratio(record: &ScalingRecord) -> f64 {
    record.p_star_qw / record.p_crw_at_tau_star
}

/// Runs the first-peak search and the classical comparison over a grid of
/// shapes.
///
/// The hopping rate sets the physical clock of both walks: the search runs
/// over physical time and the reported `tau_star` is the rate times the
/// peak time, so records are identical for every valid rate.
pub fn scaling_sweep(
    branchings: &[u32],
    depths: &[u32],
    gamma: f64,
    peak_config: Option<&PeakSearch>,
) -> Result<Vec<ScalingRecord>> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::parameter(format!("gamma must be positive and finite, got {gamma}")));
    }
    if branchings.is_empty() || depths.is_empty() {
        return Err(Error::parameter("scaling sweep needs at least one branching and one depth"));
    }
    let mut records = Vec::with_capacity(branchings.len() * depths.len());
    for &branching in branchings {
        for &depth in depths {
            let peak = chain_peak(branching, depth, peak_config)?;
            let lumped = LumpedCrw::new(branching, depth)?;
            let p_crw = lumped.exit_probability(peak.tau_star);
            let mut record = ScalingRecord {
                branching,
                depth,
                tau_star: peak.tau_star,
                p_star_qw: peak.p_star,
                p_crw_at_tau_star: p_crw,
                p_crw_stationary: lumped.stationary_exit(),
                enhancement_ratio: 0.0,
            };
            record.enhancement_ratio = enhancement_ratio(&record);
            records.push(record);
        }
    }
    Ok(records)
}

/// Writes scaling records as CSV with 12 significant digits per float
/// column; identical records serialize to identical bytes.
pub fn write_scaling_csv<W: std::io::Write>(
    records: &[ScalingRecord],
    mut writer: W,
) -> Result<()> {
    writeln!(writer, "B,n,tau_star,p_qw,p_crw_at_tau_star,p_crw_stationary,ratio")?;
    for r in records {
        writeln!(
            writer,
            "{},{},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
            r.branching,
            r.depth,
            r.tau_star,
            r.p_star_qw,
            r.p_crw_at_tau_star,
            r.p_crw_stationary,
            r.enhancement_ratio
        )?;
    }
    Ok(())
}

/// Fitted model for a scaling trend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FitResult {
    /// `y = prefactor * x^exponent`, fitted by least squares in log-log
    /// coordinates; `r_squared` refers to the log-space residuals.
    PowerLaw { exponent: f64, prefactor: f64, r_squared: f64 },
    /// `y = slope * x + intercept`, fitted by ordinary least squares.
    Linear { slope: f64, intercept: f64, r_squared: f64 },
}

impl FitResult {
    pub fn r_squared(&self) -> f64 {
        match self {
            FitResult::PowerLaw { r_squared, .. } | FitResult::Linear { r_squared, .. } => {
                *r_squared
            }
        }
    }
}

fn check_fit_inputs(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::parameter(format!(
            "fit inputs have mismatched lengths {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::parameter(format!("fit needs at least 3 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::parameter("fit inputs must be finite"));
    }
    Ok(())
}

/// Slope, intercept, and r-squared of an ordinary least-squares line.
fn least_squares_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let count = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / count;
    let mean_y = ys.iter().sum::<f64>() / count;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::parameter("fit abscissas are all identical"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;

    let ssres: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let sstot: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    let scale = ys.iter().map(|y| y * y).sum::<f64>().max(f64::MIN_POSITIVE);
    let r_squared = if sstot <= 1e-28 * scale {
        // Constant ordinates: a flat line either explains everything or the
        // notion of explained variance is meaningless.
        if ssres <= 1e-24 * scale {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ssres / sstot
    };
    Ok((slope, intercept, r_squared))
}

/// Fits `y = a * x^k` through least squares on `(ln x, ln y)`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    check_fit_inputs(xs, ys)?;
    if xs.iter().chain(ys).any(|v| *v <= 0.0) {
        return Err(Error::parameter("power-law fit needs strictly positive coordinates"));
    }
    let log_xs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let log_ys: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (slope, intercept, r_squared) = least_squares_line(&log_xs, &log_ys)?;
    Ok(FitResult::PowerLaw { exponent: slope, prefactor: intercept.exp(), r_squared })
}

/// Fits `y = m * x + c` by ordinary least squares.
pub fn fit_linear(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    check_fit_inputs(xs, ys)?;
    let (slope, intercept, r_squared) = least_squares_line(xs, ys)?;
    Ok(FitResult::Linear { slope, intercept, r_squared })
}

/// Flags scaling records that break the expected trends: within each
/// branching factor, the peak height should not grow with depth and the
/// peak time should strictly grow. Violations are reported as messages
/// rather than errors so a sweep still completes.
pub fn monotonicity_warnings(records: &[ScalingRecord]) -> Vec<String> {
    let mut sorted: Vec<&ScalingRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.branching, r.depth));
    let mut warnings = Vec::new();
    for pair in sorted.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a.branching != b.branching {
            continue;
        }
        if b.p_star_qw > a.p_star_qw + 1e-9 {
            warnings.push(format!(
                "B={}: peak height rises from {:.6} at n={} to {:.6} at n={}",
                a.branching, a.p_star_qw, a.depth, b.p_star_qw, b.depth
            ));
        }
        if b.tau_star <= a.tau_star + 1e-9 {
            warnings.push(format!(
                "B={}: peak time fails to grow from {:.6} at n={} to {:.6} at n={}",
                a.branching, a.tau_star, a.depth, b.tau_star, b.depth
            ));
        }
    }
    warnings
}
