//! Camera frames and spot-based probability extraction.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A non-negative intensity image, stored row-major.
///
/// Frames load from two formats: plain ASCII grids with one row of
/// whitespace-separated numbers per line, and PGM images in either the
/// ASCII (`P2`) or binary (`P5`) flavor with a maximum value up to 65535.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Frame {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Intensity at column `x`, row `y`; panics outside the frame.
    pub fn value(&self, x: usize, y: usize) -> f64 {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) outside the frame");
        self.data[y * self.width + x]
    }

    /// Parses a whitespace-separated grid; blank lines are skipped and
    /// every remaining line must hold the same number of values.
    pub fn from_ascii_str(text: &str) -> Result<Self> {
        let mut width = None;
        let mut data = Vec::new();
        let mut height = 0usize;
        for (index, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row_start = data.len();
            for token in line.split_whitespace() {
                let value: f64 = token.parse().map_err(|_| {
                    Error::format(format!("line {}: {token:?} is not a number", index + 1))
                })?;
                if !value.is_finite() || value < 0.0 {
                    return Err(Error::format(format!(
                        "line {}: intensity must be finite and >= 0, got {value}",
                        index + 1
                    )));
                }
                data.push(value);
            }
            let row_len = data.len() - row_start;
            match width {
                None => width = Some(row_len),
                Some(w) if w != row_len => {
                    return Err(Error::format(format!(
                        "line {}: expected {w} values, found {row_len}",
                        index + 1
                    )));
                }
                Some(_) => {}
            }
            height += 1;
        }
        match width {
            Some(w) if w > 0 => Ok(Frame { width: w, height, data }),
            _ => Err(Error::format("frame has no pixels")),
        }
    }

    /// Parses a PGM image, `P2` or `P5`, with `#` comments in the header.
    pub fn from_pgm_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cursor = PgmCursor { bytes, pos: 0 };
        let magic = cursor.token()?;
        if magic != b"P2" && magic != b"P5" {
            return Err(Error::format(format!(
                "unsupported image magic {:?}; expected P2 or P5",
                String::from_utf8_lossy(&magic)
            )));
        }
        let width = cursor.integer("width")?;
        let height = cursor.integer("height")?;
        if width == 0 || height == 0 {
            return Err(Error::format("image dimensions must be positive"));
        }
        let maxval = cursor.integer("maxval")?;
        if maxval == 0 || maxval > 65535 {
            return Err(Error::format(format!("maxval must be in 1..=65535, got {maxval}")));
        }

        let count = width
            .checked_mul(height)
            .ok_or_else(|| Error::format("image dimensions overflow"))?;
        let mut data = Vec::with_capacity(count);
        if magic == b"P2" {
            for _ in 0..count {
                let value = cursor.integer("pixel")?;
                if value > maxval {
                    return Err(Error::format(format!(
                        "pixel value {value} exceeds maxval {maxval}"
                    )));
                }
                data.push(value as f64);
            }
        } else {
            cursor.skip_single_whitespace()?;
            let bytes_per = if maxval > 255 { 2 } else { 1 };
            let raw = cursor.remaining();
            if raw.len() != count * bytes_per {
                return Err(Error::format(format!(
                    "expected {} bytes of pixel data, found {}",
                    count * bytes_per,
                    raw.len()
                )));
            }
            for chunk in raw.chunks_exact(bytes_per) {
                let value = if bytes_per == 2 {
                    u16::from_be_bytes([chunk[0], chunk[1]]) as usize
                } else {
                    chunk[0] as usize
                };
                if value > maxval {
                    return Err(Error::format(format!(
                        "pixel value {value} exceeds maxval {maxval}"
                    )));
                }
                data.push(value as f64);
            }
        }
        Ok(Frame { width, height, data })
    }

    /// Parses either supported format, deciding by the leading magic.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
            Self::from_pgm_bytes(bytes)
        } else {
            let text = std::str::from_utf8(bytes)
                .map_err(|_| Error::format("frame is neither valid UTF-8 nor a PGM image"))?;
            Self::from_ascii_str(text)
        }
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

struct PgmCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl PgmCursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<Vec<u8>> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::format("image header ended unexpectedly"));
        }
        Ok(self.bytes[start..self.pos].to_vec())
    }

    fn integer(&mut self, what: &str) -> Result<usize> {
        let token = self.token()?;
        std::str::from_utf8(&token)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                Error::format(format!(
                    "{what} field {:?} is not an unsigned integer",
                    String::from_utf8_lossy(&token)
                ))
            })
    }

    /// The binary flavor mandates exactly one whitespace byte between the
    /// maxval and the pixel bytes.
    fn skip_single_whitespace(&mut self) -> Result<()> {
        if self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::format("expected a whitespace separator before binary pixel data"))
        }
    }

    fn remaining(&self) -> &[u8] {
        &self.bytes[self.pos..]
    }
}

/// A circular integration region centered on a waveguide output.
///
/// Coordinates are in pixels with centers on the integer grid; the disc
/// must stay inside the frame, whose edge sits half a pixel beyond the
/// outermost pixel centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spot {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

impl Spot {
    /// Parses a JSON array of `{"x": .., "y": .., "radius": ..}` objects.
    pub fn parse_json(text: &str) -> Result<Vec<Spot>> {
        let spots: Vec<Spot> = serde_json::from_str(text)
            .map_err(|e| Error::format(format!("spots JSON: {e}")))?;
        if spots.is_empty() {
            return Err(Error::format("spots JSON: the array is empty"));
        }
        Ok(spots)
    }

    pub fn load_json<P: AsRef<Path>>(path: P) -> Result<Vec<Spot>> {
        Self::parse_json(&std::fs::read_to_string(path)?)
    }
}

/// Normalized per-spot intensity shares.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameProbabilities {
    /// One probability per spot, summing to one.
    pub values: Vec<f64>,
    /// Index pairs of spots whose discs shared at least one pixel; shared
    /// pixels are counted once, for the nearer center.
    pub overlaps: Vec<(usize, usize)>,
}

fn check_spots(frame: &Frame, spots: &[Spot]) -> Result<()> {
    if spots.is_empty() {
        return Err(Error::parameter("at least one spot is required"));
    }
    for (i, spot) in spots.iter().enumerate() {
        if !spot.x.is_finite() || !spot.y.is_finite() || !spot.radius.is_finite() {
            return Err(Error::parameter(format!("spot {i} has non-finite geometry")));
        }
        if spot.radius <= 0.0 {
            return Err(Error::parameter(format!(
                "spot {i}: radius must be positive, got {}",
                spot.radius
            )));
        }
        let (w, h) = (frame.width() as f64, frame.height() as f64);
        if spot.x - spot.radius < -0.5
            || spot.x + spot.radius > w - 0.5
            || spot.y - spot.radius < -0.5
            || spot.y + spot.radius > h - 0.5
        {
            return Err(Error::parameter(format!(
                "spot {i} at ({}, {}) with radius {} reaches outside the {w}x{h} frame",
                spot.x, spot.y, spot.radius
            )));
        }
    }
    Ok(())
}

/// Sums the intensity inside each spot disc and normalizes by the total
/// over all spots, so a global intensity rescaling cancels.
///
/// A pixel belongs to a disc when its center lies within the radius; a
/// pixel inside several discs counts once, toward the nearest center, with
/// the lower spot index winning exact ties. A frame with no intensity
/// under any spot has no meaningful shares and fails.
pub fn frame_probabilities(frame: &Frame, spots: &[Spot]) -> Result<FrameProbabilities> {
    check_spots(frame, spots)?;
    let mut sums = vec![0.0f64; spots.len()];
    let mut overlaps = BTreeSet::new();
    let mut containing = Vec::new();
    for py in 0..frame.height() {
        for px in 0..frame.width() {
            containing.clear();
            for (i, spot) in spots.iter().enumerate() {
                let dist_sq = (px as f64 - spot.x).powi(2) + (py as f64 - spot.y).powi(2);
                if dist_sq <= spot.radius * spot.radius {
                    containing.push((i, dist_sq));
                }
            }
            let Some(&(owner, _)) = containing
                .iter()
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
            else {
                continue;
            };
            sums[owner] += frame.value(px, py);
            for (offset, &(a, _)) in containing.iter().enumerate() {
                for &(b, _) in &containing[offset + 1..] {
                    overlaps.insert((a, b));
                }
            }
        }
    }

    let total: f64 = sums.iter().sum();
    if total <= 0.0 {
        return Err(Error::numerical("the spots capture no intensity"));
    }
    Ok(FrameProbabilities {
        values: sums.iter().map(|s| s / total).collect(),
        overlaps: overlaps.into_iter().collect(),
    })
}

/// Probability share of the spot at `exit_index`.
pub fn hitting_from_frame(frame: &Frame, spots: &[Spot], exit_index: usize) -> Result<f64> {
    if exit_index >= spots.len() {
        return Err(Error::parameter(format!(
            "exit index {exit_index} out of range for {} spots",
            spots.len()
        )));
    }
    Ok(frame_probabilities(frame, spots)?.values[exit_index])
}

#[cfg(test)]
mod tests {
    use super::*;

    use std::io::Write;

    use crate::walks::ChainQw;

    #[test]
    fn ascii_grids_parse_with_dimensions() {
        let frame = Frame::from_ascii_str("1 2 3\n\n4 5 6\n").unwrap();
        assert_eq!((frame.width(), frame.height()), (3, 2));
        assert_eq!(frame.value(0, 0), 1.0);
        assert_eq!(frame.value(2, 1), 6.0);
    }

    #[test]
    fn ascii_errors_carry_line_numbers() {
        let bad_token = Frame::from_ascii_str("1 2\n3 oops\n").unwrap_err();
        assert!(bad_token.to_string().contains("line 2"), "{bad_token}");
        let ragged = Frame::from_ascii_str("1 2\n3\n").unwrap_err();
        assert!(ragged.to_string().contains("line 2"), "{ragged}");
        let negative = Frame::from_ascii_str("1 2\n-3 4\n").unwrap_err();
        assert!(negative.to_string().contains("line 2"), "{negative}");
        assert!(Frame::from_ascii_str("\n\n").is_err());
    }

    #[test]
    fn ascii_pgm_parses_with_comments() {
        let frame = Frame::from_pgm_bytes(b"P2\n# a comment\n3 2\n255\n0 1 2\n3 4 5\n").unwrap();
        assert_eq!((frame.width(), frame.height()), (3, 2));
        assert_eq!(frame.value(1, 1), 4.0);
    }

    #[test]
    fn binary_pgm_parses_both_depths() {
        let frame = Frame::from_pgm_bytes(b"P5\n2 2\n255\n\x00\x10\x20\x30").unwrap();
        assert_eq!(frame.value(1, 1), 48.0);

        let mut bytes = b"P5\n2 1\n65535\n".to_vec();
        bytes.extend_from_slice(&300u16.to_be_bytes());
        bytes.extend_from_slice(&70u16.to_be_bytes());
        let frame = Frame::from_pgm_bytes(&bytes).unwrap();
        assert_eq!(frame.value(0, 0), 300.0);
        assert_eq!(frame.value(1, 0), 70.0);
    }

    #[test]
    fn malformed_pgm_files_are_rejected() {
        assert!(Frame::from_pgm_bytes(b"P7\n2 2\n255\n").is_err());
        assert!(Frame::from_pgm_bytes(b"P2\n2 2\n70000\n0 0 0 0").is_err());
        assert!(Frame::from_pgm_bytes(b"P2\n2 2\n255\n0 0 300 0").is_err());
        assert!(Frame::from_pgm_bytes(b"P5\n2 2\n255\n\x00\x01").is_err());
        assert!(Frame::from_pgm_bytes(b"P2\n0 2\n255\n").is_err());
        assert!(Frame::from_pgm_bytes(b"P2\n2 two\n255\n0 0 0 0").is_err());
    }

    #[test]
    fn loading_sniffs_the_format() {
        let dir = tempfile::tempdir().unwrap();
        let ascii_path = dir.path().join("frame.txt");
        std::fs::write(&ascii_path, "1 2\n3 4\n").unwrap();
        let pgm_path = dir.path().join("frame.pgm");
        let mut file = std::fs::File::create(&pgm_path).unwrap();
        file.write_all(b"P5\n2 2\n255\n\x01\x02\x03\x04").unwrap();
        drop(file);

        assert_eq!(Frame::load(&ascii_path).unwrap().value(1, 1), 4.0);
        assert_eq!(Frame::load(&pgm_path).unwrap().value(1, 1), 4.0);
        assert!(Frame::load(dir.path().join("missing.txt")).is_err());
    }

    #[test]
    fn two_clean_spots_split_the_intensity() {
        let frame = Frame::from_ascii_str("0 0 0 0 0 0 0\n0 3 0 0 0 7 0\n0 0 0 0 0 0 0\n").unwrap();
        let spots =
            [Spot { x: 1.0, y: 1.0, radius: 1.0 }, Spot { x: 5.0, y: 1.0, radius: 1.0 }];
        let result = frame_probabilities(&frame, &spots).unwrap();
        assert!((result.values[0] - 0.3).abs() < 1e-12);
        assert!((result.values[1] - 0.7).abs() < 1e-12);
        assert!(result.overlaps.is_empty());
    }

    #[test]
    fn empty_capture_is_an_error() {
        let frame = Frame::from_ascii_str("0 0 0\n0 0 0\n0 0 0\n").unwrap();
        let spots = [Spot { x: 1.0, y: 1.0, radius: 1.0 }];
        assert!(matches!(frame_probabilities(&frame, &spots), Err(Error::Numerical(_))));
    }

    #[test]
    fn probabilities_follow_spot_permutations() {
        let frame = Frame::from_ascii_str("0 0 0 0 0 0 0\n0 3 0 0 0 7 0\n0 0 0 0 0 0 0\n").unwrap();
        let a = Spot { x: 1.0, y: 1.0, radius: 1.0 };
        let b = Spot { x: 5.0, y: 1.0, radius: 1.0 };
        let forward = frame_probabilities(&frame, &[a, b]).unwrap();
        let reversed = frame_probabilities(&frame, &[b, a]).unwrap();
        assert_eq!(forward.values[0], reversed.values[1]);
        assert_eq!(forward.values[1], reversed.values[0]);
    }

    #[test]
    fn global_rescaling_leaves_probabilities_unchanged() {
        let base = Frame::from_ascii_str("0 1 0 2 0\n5 0 3 0 4\n0 2 0 1 0\n").unwrap();
        let scaled = Frame::from_ascii_str("0 5 0 10 0\n25 0 15 0 20\n0 10 0 5 0\n").unwrap();
        let spots =
            [Spot { x: 1.0, y: 1.0, radius: 1.1 }, Spot { x: 3.0, y: 1.0, radius: 1.1 }];
        let a = frame_probabilities(&base, &spots).unwrap();
        let b = frame_probabilities(&scaled, &spots).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn shared_pixels_go_to_the_nearest_center() {
        let frame = Frame::from_ascii_str(concat!(
            "0 0 0 0 0\n",
            "1 2 4 8 16\n",
            "0 0 0 0 0\n"
        ))
        .unwrap();
        // Pixel (2, 1) sits exactly between both spots; the tie goes to
        // spot 0, so it contributes its 4 to the left sum.
        let spots =
            [Spot { x: 1.0, y: 1.0, radius: 1.2 }, Spot { x: 3.0, y: 1.0, radius: 1.2 }];
        let result = frame_probabilities(&frame, &spots).unwrap();
        assert_eq!(result.overlaps, vec![(0, 1)]);
        assert!((result.values[0] - 7.0 / 31.0).abs() < 1e-12);
        assert!((result.values[1] - 24.0 / 31.0).abs() < 1e-12);

        // An asymmetric pair: the shared pixel at (2, 1) is strictly
        // nearer to the right spot and moves its 4 into that sum, leaving
        // the left spot with 1 + 2 against the right spot's 4 + 8.
        let spots =
            [Spot { x: 1.0, y: 1.0, radius: 1.2 }, Spot { x: 2.5, y: 1.0, radius: 1.0 }];
        let result = frame_probabilities(&frame, &spots).unwrap();
        assert_eq!(result.overlaps, vec![(0, 1)]);
        assert!((result.values[0] - 3.0 / 15.0).abs() < 1e-12);
        assert!((result.values[1] - 12.0 / 15.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_spot_geometry_is_rejected() {
        let frame = Frame::from_ascii_str("1 1 1\n1 1 1\n1 1 1\n").unwrap();
        assert!(frame_probabilities(&frame, &[]).is_err());
        assert!(frame_probabilities(&frame, &[Spot { x: 1.0, y: 1.0, radius: 0.0 }]).is_err());
        assert!(frame_probabilities(&frame, &[Spot { x: 0.0, y: 1.0, radius: 1.0 }]).is_err());
        assert!(frame_probabilities(&frame, &[Spot { x: 1.0, y: 1.0, radius: 2.0 }]).is_err());
        assert!(
            frame_probabilities(&frame, &[Spot { x: f64::NAN, y: 1.0, radius: 1.0 }]).is_err()
        );
        assert!(hitting_from_frame(&frame, &[Spot { x: 1.0, y: 1.0, radius: 1.0 }], 1).is_err());
    }

    #[test]
    fn simulated_output_frame_recovers_the_distribution() {
        // Render the chain output as Gaussian spots, quantize to 16-bit
        // pixels, and check the extraction returns the site probabilities.
        // Equal capture fractions per spot cancel in the normalization.
        let expected = ChainQw::new(2, 2).unwrap().distribution(2.6).unwrap();
        let centers: Vec<f64> = (0..6).map(|j| 10.0 + 20.0 * j as f64).collect();
        let (width, height, sigma, y0) = (120usize, 40usize, 2.0f64, 20.0f64);

        let mut peak = 0.0f64;
        let mut intensity = vec![0.0f64; width * height];
        for py in 0..height {
            for px in 0..width {
                let mut value = 0.0;
                for (p, x0) in expected.iter().zip(&centers) {
                    let dist_sq = (px as f64 - x0).powi(2) + (py as f64 - y0).powi(2);
                    value += p * (-dist_sq / (2.0 * sigma * sigma)).exp();
                }
                intensity[py * width + px] = value;
                peak = peak.max(value);
            }
        }
        let mut text = String::new();
        for py in 0..height {
            for px in 0..width {
                let quantized = (intensity[py * width + px] / peak * 65535.0).round() as u32;
                text.push_str(&format!("{quantized} "));
            }
            text.push('\n');
        }

        let frame = Frame::from_ascii_str(&text).unwrap();
        let spots: Vec<Spot> =
            centers.iter().map(|&x| Spot { x, y: y0, radius: 8.0 }).collect();
        let recovered = frame_probabilities(&frame, &spots).unwrap();
        assert!(recovered.overlaps.is_empty());
        for (i, (r, e)) in recovered.values.iter().zip(&expected).enumerate() {
            assert!((r - e).abs() < 0.02, "spot {i}: recovered {r}, expected {e}");
        }
    }

    #[test]
    fn spots_json_round_trips() {
        let spots = vec![
            Spot { x: 10.0, y: 20.0, radius: 8.0 },
            Spot { x: 30.0, y: 20.0, radius: 8.0 },
        ];
        let text = serde_json::to_string(&spots).unwrap();
        assert_eq!(Spot::parse_json(&text).unwrap(), spots);
    }

    #[test]
    fn spots_json_rejects_malformed_input() {
        assert!(Spot::parse_json("[]").is_err());
        assert!(Spot::parse_json("{\"x\": 1}").is_err());
        assert!(Spot::parse_json("[{\"x\": 1.0, \"y\": 2.0}]").is_err());
        let bad = Spot::parse_json("not json");
        assert!(matches!(bad, Err(Error::Format(_))));
    }
}
