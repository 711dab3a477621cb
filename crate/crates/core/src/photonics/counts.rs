//! Heralded coincidence counts and the second-order correlation estimate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw counts from a heralded three-detector run: trigger singles `N3`,
/// the two herald-detector coincidences `N13` and `N23`, and the triple
/// coincidences `N123`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoincidenceCounts {
    n3: u64,
    n13: u64,
    n23: u64,
    n123: u64,
}

impl CoincidenceCounts {
    pub fn new(n3: u64, n13: u64, n23: u64, n123: u64) -> Result<Self> {
        if n13 > n3 || n23 > n3 {
            return Err(Error::parameter(format!(
                "coincidences (N13 = {n13}, N23 = {n23}) cannot exceed the triggers (N3 = {n3})"
            )));
        }
        if n123 > n13.min(n23) {
            return Err(Error::parameter(format!(
                "triples (N123 = {n123}) cannot exceed either coincidence (N13 = {n13}, N23 = {n23})"
            )));
        }
        Ok(CoincidenceCounts { n3, n13, n23, n123 })
    }

    pub fn n3(&self) -> u64 {
        self.n3
    }

    pub fn n13(&self) -> u64 {
        self.n13
    }

    pub fn n23(&self) -> u64 {
        self.n23
    }

    pub fn n123(&self) -> u64 {
        self.n123
    }

    /// Parses the two-line CSV form: a `N3,N13,N23,N123` header and one
    /// data row.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::format("counts file is empty"))?;
        if header.trim() != "N3,N13,N23,N123" {
            return Err(Error::format(format!(
                "expected header N3,N13,N23,N123, found {header:?}"
            )));
        }
        let row = lines.next().ok_or_else(|| Error::format("counts file has no data row"))?;
        if lines.next().is_some() {
            return Err(Error::format("counts file must hold exactly one data row"));
        }
        let fields: Vec<&str> = row.trim().split(',').collect();
        if fields.len() != 4 {
            return Err(Error::format(format!(
                "expected 4 comma-separated counts, found {}",
                fields.len()
            )));
        }
        let mut values = [0u64; 4];
        for (value, field) in values.iter_mut().zip(&fields) {
            *value = field.trim().parse().map_err(|_| {
                Error::format(format!("count {field:?} is not an unsigned integer"))
            })?;
        }
        CoincidenceCounts::new(values[0], values[1], values[2], values[3])
    }

    pub fn to_csv_string(&self) -> String {
        format!("N3,N13,N23,N123\n{},{},{},{}\n", self.n3, self.n13, self.n23, self.n123)
    }

    pub fn write_csv<W: std::io::Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }
}

/// Heralded second-order correlation with its first-order counting error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Estimates `alpha = N3 * N123 / (N13 * N23)`, the heralded degree of
/// second-order coherence; values well below one certify single-photon
/// statistics.
///
/// The standard error propagates independent Poisson fluctuations of the
/// four counts to first order. Zero triples pin the estimate and its
/// first-order error to zero; zero heralded coincidences leave the ratio
/// undefined and fail instead.
pub fn alpha(counts: &CoincidenceCounts) -> Result<AlphaEstimate> {
    if counts.n13 == 0 || counts.n23 == 0 {
        return Err(Error::parameter(format!(
            "alpha needs both coincidence counts positive, got N13 = {}, N23 = {}",
            counts.n13, counts.n23
        )));
    }
    if counts.n123 == 0 {
        return Ok(AlphaEstimate { value: 0.0, std_error: 0.0 });
    }
    let value =
        counts.n3 as f64 * counts.n123 as f64 / (counts.n13 as f64 * counts.n23 as f64);
    let relative_variance = 1.0 / counts.n3 as f64
        + 1.0 / counts.n13 as f64
        + 1.0 / counts.n23 as f64
        + 1.0 / counts.n123 as f64;
    Ok(AlphaEstimate { value, std_error: value * relative_variance.sqrt() })
}
