//! Exponential coupling model, its calibration fit, and waveguide layout
//! design.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::reduce_to_chain;

/// Evanescent coupling as a function of gap spacing:
/// `C(d) = c0 * exp(-d / d0)` with the coupling in 1/mm and both the
/// spacing and the decay length in micrometers or millimeters, as long as
/// the two stay consistent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingModel {
    /// Coupling extrapolated to zero gap.
    pub c0: f64,
    /// Decay length of the coupling with spacing.
    pub d0: f64,
}

impl CouplingModel {
    pub fn new(c0: f64, d0: f64) -> Result<Self> {
        for (name, value) in [("c0", c0), ("d0", d0)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::parameter(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        Ok(CouplingModel { c0, d0 })
    }

    /// Coupling produced by a gap of the given spacing.
    pub fn coupling_at(&self, spacing: f64) -> Result<f64> {
        if !spacing.is_finite() || spacing < 0.0 {
            return Err(Error::parameter(format!(
                "spacing must be finite and >= 0, got {spacing}"
            )));
        }
        Ok(self.c0 * (-spacing / self.d0).exp())
    }

    /// Gap spacing that produces the given coupling, the exact inverse of
    /// [`coupling_at`](Self::coupling_at).
    ///
    /// Couplings at or above `c0` would need a non-positive gap, which the
    /// model cannot realize.
    pub fn spacing_for(&self, coupling: f64) -> Result<f64> {
        if !(coupling > 0.0) || !coupling.is_finite() {
            return Err(Error::parameter(format!(
                "target coupling must be positive and finite, got {coupling}"
            )));
        }
        if coupling >= self.c0 {
            return Err(Error::parameter(format!(
                "target coupling {coupling} is not below the zero-gap coupling {}",
                self.c0
            )));
        }
        Ok(self.d0 * (self.c0 / coupling).ln())
    }
}

/// One measured (spacing, coupling) pair from a calibration sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSample {
    pub spacing_mm: f64,
    pub coupling_per_mm: f64,
}

impl CalibrationSample {
    /// Parses a calibration table: a `spacing_mm,coupling_per_mm` header
    /// followed by one sample per line.
    pub fn parse_csv(text: &str) -> Result<Vec<CalibrationSample>> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) =
            lines.next().ok_or_else(|| Error::format("calibration file is empty"))?;
        if header.trim() != "spacing_mm,coupling_per_mm" {
            return Err(Error::format(format!(
                "expected header spacing_mm,coupling_per_mm, found {header:?}"
            )));
        }
        let mut samples = Vec::new();
        for (index, line) in lines {
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != 2 {
                return Err(Error::format(format!(
                    "line {}: expected 2 comma-separated values, found {}",
                    index + 1,
                    fields.len()
                )));
            }
            let mut values = [0.0f64; 2];
            for (value, field) in values.iter_mut().zip(&fields) {
                *value = field.trim().parse().map_err(|_| {
                    Error::format(format!("line {}: {field:?} is not a number", index + 1))
                })?;
            }
            samples.push(CalibrationSample { spacing_mm: values[0], coupling_per_mm: values[1] });
        }
        if samples.is_empty() {
            return Err(Error::format("calibration file has no samples"));
        }
        Ok(samples)
    }

    pub fn read_csv<R: std::io::Read>(mut reader: R) -> Result<Vec<CalibrationSample>> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        Self::parse_csv(&text)
    }
}

/// Calibrated model together with its log-space residual summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingFit {
    pub model: CouplingModel,
    pub rms_log_residual: f64,
    pub max_abs_log_residual: f64,
}

/// Fits the exponential model to calibration samples by least squares on
/// `ln C` against spacing.
///
/// Needs at least two samples at distinct spacings with positive measured
/// couplings, and the couplings must decay with spacing on average; a flat
/// or rising trend has no decay length.
pub fn fit_coupling_model(samples: &[CalibrationSample]) -> Result<CouplingFit> {
    if samples.len() < 2 {
        return Err(Error::parameter(format!(
            "coupling fit needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    for (i, s) in samples.iter().enumerate() {
        if !s.spacing_mm.is_finite() || s.spacing_mm < 0.0 {
            return Err(Error::parameter(format!(
                "sample {i}: spacing must be finite and >= 0, got {}",
                s.spacing_mm
            )));
        }
        if !(s.coupling_per_mm > 0.0) || !s.coupling_per_mm.is_finite() {
            return Err(Error::parameter(format!(
                "sample {i}: coupling must be positive and finite, got {}",
                s.coupling_per_mm
            )));
        }
    }

    let count = samples.len() as f64;
    let mean_d = samples.iter().map(|s| s.spacing_mm).sum::<f64>() / count;
    let mean_log_c = samples.iter().map(|s| s.coupling_per_mm.ln()).sum::<f64>() / count;
    let sdd: f64 = samples.iter().map(|s| (s.spacing_mm - mean_d).powi(2)).sum();
    if sdd <= 0.0 {
        return Err(Error::parameter("coupling fit needs at least two distinct spacings"));
    }
    let sdc: f64 = samples
        .iter()
        .map(|s| (s.spacing_mm - mean_d) * (s.coupling_per_mm.ln() - mean_log_c))
        .sum();
    let slope = sdc / sdd;
    if slope >= 0.0 {
        return Err(Error::numerical(format!(
            "measured couplings do not decay with spacing (log slope {slope:.3e})"
        )));
    }
    let intercept = mean_log_c - slope * mean_d;
    let model = CouplingModel::new(intercept.exp(), -1.0 / slope)?;

    let mut sum_sq = 0.0;
    let mut max_abs: f64 = 0.0;
    for s in samples {
        let residual = s.coupling_per_mm.ln() - (slope * s.spacing_mm + intercept);
        sum_sq += residual * residual;
        max_abs = max_abs.max(residual.abs());
    }
    Ok(CouplingFit {
        model,
        rms_log_residual: (sum_sq / count).sqrt(),
        max_abs_log_residual: max_abs,
    })
}

/// Gap spacings realizing a chain of the given shape in a waveguide array.
///
/// Positions start at zero and accumulate gap by gap; the central gap at
/// index `n` is the narrow one since it carries the `B`-fold coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveguideLayout {
    #[serde(rename = "B")]
    pub branching: u32,
    #[serde(rename = "n")]
    pub depth: u32,
    /// Hopping rate in 1/mm realized by the side gaps up to the `sqrt(B)`
    /// chain weights.
    pub gamma_phys: f64,
    /// Propagation length of the device in mm.
    pub z_mm: f64,
    /// Transverse waveguide positions, `2n + 2` entries starting at 0.
    pub positions_mm: Vec<f64>,
    /// Gap widths between neighboring waveguides, `2n + 1` entries.
    pub spacings_mm: Vec<f64>,
    /// Couplings the gaps realize, the chain weights times `gamma_phys`.
    pub couplings_per_mm: Vec<f64>,
}

impl WaveguideLayout {
    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::format(e.to_string()))
    }

    pub fn write_json<W: std::io::Write>(&self, mut writer: W) -> Result<()> {
        let text = self.to_json_string()?;
        writer.write_all(text.as_bytes())?;
        writer.write_all(b"\n")?;
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::format(e.to_string()))
    }
}

/// Designs the waveguide array that realizes the chain of the given shape
/// at physical rate `gamma_phys` over a device of length `z_mm`.
///
/// Every chain weight must fall below the zero-gap coupling of the model,
/// otherwise no gap is narrow enough and the design fails.
pub fn design_layout(
    branching: u32,
    depth: u32,
    gamma_phys: f64,
    model: &CouplingModel,
    z_mm: f64,
) -> Result<WaveguideLayout> {
    if !(z_mm > 0.0) || !z_mm.is_finite() {
        return Err(Error::parameter(format!("z_mm must be positive and finite, got {z_mm}")));
    }
    let chain = reduce_to_chain(branching, depth, gamma_phys)?;
    let couplings: Vec<f64> = chain.off_diagonal().to_vec();
    let spacings: Vec<f64> =
        couplings.iter().map(|&c| model.spacing_for(c)).collect::<Result<_>>()?;
    let mut positions = Vec::with_capacity(spacings.len() + 1);
    positions.push(0.0);
    for &gap in &spacings {
        positions.push(positions.last().unwrap() + gap);
    }
    Ok(WaveguideLayout {
        branching,
        depth,
        gamma_phys,
        z_mm,
        positions_mm: positions,
        spacings_mm: spacings,
        couplings_per_mm: couplings,
    })
}
