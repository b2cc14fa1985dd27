//! Sampled optical spectra: the common currency between synthesis and
//! analysis.
//!
//! A [`Spectrum`] is a strictly monotone axis (wavelength in nm or photon
//! energy in eV) with one non-negative intensity value per sample,
//! interpreted as counts collected in that sample's bin. File format is a
//! two-column CSV with `#` comment lines and an optional header row.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::float::Float;
use crate::units;

/// Physical meaning of the axis samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    WavelengthNm,
    EnergyEv,
}

impl AxisKind {
    pub fn label(self) -> &'static str {
        match self {
            AxisKind::WavelengthNm => "wavelength_nm",
            AxisKind::EnergyEv => "energy_ev",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "wavelength_nm" | "wavelength" | "nm" => Some(AxisKind::WavelengthNm),
            "energy_ev" | "energy" | "ev" => Some(AxisKind::EnergyEv),
            _ => None,
        }
    }
}

/// A sampled spectrum. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    axis_kind: AxisKind,
    axis: Vec<T>,
    intensity: Vec<T>,
    temperature_k: Option<T>,
    metadata: BTreeMap<String, String>,
}

impl<T: Float> Spectrum<T> {
    /// Build a spectrum, sorting samples by axis value and validating the
    /// invariants: at least two samples, strictly monotone axis, equal
    /// lengths, finite non-negative intensities.
    pub fn new(axis_kind: AxisKind, axis: Vec<T>, intensity: Vec<T>) -> Result<Self> {
        if axis.len() != intensity.len() {
            return Err(Error::domain(format!(
                "axis has {} samples but intensity has {}",
                axis.len(),
                intensity.len()
            )));
        }
        if axis.len() < 2 {
            return Err(Error::domain("spectrum needs at least two samples"));
        }
        let mut pairs: Vec<(T, T)> = axis.into_iter().zip(intensity).collect();
        for (x, y) in &pairs {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::domain("non-finite sample in spectrum"));
            }
            if *y < T::zero() {
                return Err(Error::domain("negative intensity sample"));
            }
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite axis"));
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::domain(format!(
                    "duplicated axis value {}",
                    w[0].0
                )));
            }
        }
        let (axis, intensity) = pairs.into_iter().unzip();
        Ok(Spectrum {
            axis_kind,
            axis,
            intensity,
            temperature_k: None,
            metadata: BTreeMap::new(),
        })
    }

    pub fn with_temperature(mut self, kelvin: T) -> Self {
        self.temperature_k = Some(kelvin);
        self
    }

    pub fn with_metadata(mut self, key: &str, value: &str) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn axis_kind(&self) -> AxisKind {
        self.axis_kind
    }

    pub fn axis(&self) -> &[T] {
        &self.axis
    }

    pub fn intensity(&self) -> &[T] {
        &self.intensity
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    pub fn temperature_k(&self) -> Option<T> {
        self.temperature_k
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    /// Total collected counts (intensities are per-bin counts).
    pub fn total_counts(&self) -> T {
        self.intensity.iter().copied().sum()
    }

    /// Replace the intensity array, keeping axis and metadata.
    pub(crate) fn with_intensity(&self, intensity: Vec<T>) -> Result<Self> {
        let mut out = Self::new(self.axis_kind, self.axis.clone(), intensity)?;
        out.temperature_k = self.temperature_k;
        out.metadata = self.metadata.clone();
        Ok(out)
    }

    /// Local bin width around each sample, from midpoints to the neighbours.
    /// Used to convert per-bin counts into spectral density for fitting.
    pub fn bin_widths(&self) -> Vec<T> {
        let n = self.axis.len();
        let half = T::of(0.5);
        (0..n)
            .map(|i| {
                let lo = if i == 0 {
                    self.axis[0] - (self.axis[1] - self.axis[0]) * half
                } else {
                    (self.axis[i - 1] + self.axis[i]) * half
                };
                let hi = if i == n - 1 {
                    self.axis[n - 1] + (self.axis[n - 1] - self.axis[n - 2]) * half
                } else {
                    (self.axis[i] + self.axis[i + 1]) * half
                };
                hi - lo
            })
            .collect()
    }

    /// Convert the axis to `target` units. Counts per sample are carried
    /// over unchanged; when `jacobian` is set, intensities are additionally
    /// rescaled by `λ²/hc` (the density transformation `I(E) ∝ I(λ)·λ²`),
    /// which is only appropriate when the stored values represent spectral
    /// density rather than per-bin counts. Off by default in all pipelines.
    pub fn convert_axis(&self, target: AxisKind, jacobian: bool) -> Spectrum<T> {
        if target == self.axis_kind {
            return self.clone();
        }
        let hc = T::of(units::EV_NM);
        let mut pairs: Vec<(T, T)> = self
            .axis
            .iter()
            .zip(&self.intensity)
            .map(|(&x, &y)| {
                let nx = hc / x;
                let ny = if jacobian {
                    match self.axis_kind {
                        // λ → E: multiply by λ²/hc
                        AxisKind::WavelengthNm => y * x * x / hc,
                        // E → λ: multiply by E²/hc
                        AxisKind::EnergyEv => y * x * x / hc,
                    }
                } else {
                    y
                };
                (nx, ny)
            })
            .collect();
        pairs.reverse();
        let (axis, intensity) = pairs.into_iter().unzip();
        Spectrum {
            axis_kind: target,
            axis,
            intensity,
            temperature_k: self.temperature_k,
            metadata: self.metadata.clone(),
        }
    }

    /// Parse a two-column CSV (axis, counts). Lines starting with `#` are
    /// comments; one optional header row is accepted. A `# axis:` comment,
    /// when present, must agree with `axis_kind`.
    pub fn from_csv_reader<R: Read>(reader: R, axis_kind: AxisKind) -> Result<Self> {
        let buf = BufReader::new(reader);
        let mut axis = Vec::new();
        let mut intensity = Vec::new();
        let mut header_seen = false;
        let mut temperature_k = None;
        let mut metadata = BTreeMap::new();

        for (idx, line) in buf.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::Parse {
                line: lineno,
                message: e.to_string(),
            })?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                let comment = comment.trim();
                if let Some(v) = comment.strip_prefix("axis:") {
                    match AxisKind::parse(v) {
                        Some(k) if k == axis_kind => {}
                        Some(k) => {
                            return Err(Error::Parse {
                                line: lineno,
                                message: format!(
                                    "file declares axis '{}' but '{}' was requested",
                                    k.label(),
                                    axis_kind.label()
                                ),
                            })
                        }
                        None => {
                            return Err(Error::Parse {
                                line: lineno,
                                message: format!("unknown axis kind '{}'", v.trim()),
                            })
                        }
                    }
                } else if let Some(v) = comment.strip_prefix("temperature_k:") {
                    temperature_k = v.trim().parse::<f64>().ok().map(T::of);
                } else if let Some(kv) = comment.strip_prefix("meta ") {
                    if let Some((k, v)) = kv.split_once('=') {
                        metadata.insert(k.trim().to_string(), v.trim().to_string());
                    }
                }
                continue;
            }

            let fields: Vec<&str> = if trimmed.contains(',') {
                trimmed.split(',').map(str::trim).collect()
            } else {
                trimmed.split_whitespace().collect()
            };
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected 2 columns, found {}", fields.len()),
                });
            }
            match (fields[0].parse::<f64>(), fields[1].parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    if y < 0.0 {
                        return Err(Error::Parse {
                            line: lineno,
                            message: format!("negative counts {y}"),
                        });
                    }
                    axis.push(T::of(x));
                    intensity.push(T::of(y));
                }
                _ => {
                    // Accept a single non-numeric row as the header.
                    if axis.is_empty() && !header_seen {
                        header_seen = true;
                        continue;
                    }
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("unparsable row '{trimmed}'"),
                    });
                }
            }
        }

        let mut spectrum = Self::new(axis_kind, axis, intensity).map_err(|e| match e {
            Error::Domain(message) => Error::Parse { line: 0, message },
            other => other,
        })?;
        spectrum.temperature_k = temperature_k;
        spectrum.metadata = metadata;
        Ok(spectrum)
    }

    /// Load a spectrum from a CSV file.
    pub fn load_csv(path: impl AsRef<Path>, axis_kind: AxisKind) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file, axis_kind)
    }

    /// Serialize to the CSV format accepted by [`Spectrum::from_csv_reader`].
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# vibronix spectrum");
        let _ = writeln!(out, "# axis: {}", self.axis_kind.label());
        if let Some(t) = self.temperature_k {
            let _ = writeln!(out, "# temperature_k: {}", t.as_f64());
        }
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# meta {k}={v}");
        }
        let _ = writeln!(out, "{},counts", self.axis_kind.label());
        for (x, y) in self.axis.iter().zip(&self.intensity) {
            let _ = writeln!(out, "{},{}", x.as_f64(), y.as_f64());
        }
        out
    }

    /// Write the spectrum to a CSV file.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Spectrum<f64> {
        Spectrum::new(
            AxisKind::WavelengthNm,
            vec![540.0, 541.0, 542.0, 543.0],
            vec![1.0, 5.0, 2.0, 0.5],
        )
        .unwrap()
    }

    #[test]
    fn sorts_and_validates() {
        let s = Spectrum::<f64>::new(
            AxisKind::WavelengthNm,
            vec![542.0, 540.0, 541.0],
            vec![2.0, 1.0, 5.0],
        )
        .unwrap();
        assert_eq!(s.axis(), &[540.0, 541.0, 542.0]);
        assert_eq!(s.intensity(), &[1.0, 5.0, 2.0]);
    }

    #[test]
    fn rejects_duplicates_and_negatives() {
        assert!(Spectrum::<f64>::new(
            AxisKind::WavelengthNm,
            vec![540.0, 540.0],
            vec![1.0, 2.0]
        )
        .is_err());
        assert!(Spectrum::<f64>::new(
            AxisKind::WavelengthNm,
            vec![540.0, 541.0],
            vec![1.0, -2.0]
        )
        .is_err());
    }

    #[test]
    fn axis_conversion_involutive() {
        let s = sample();
        let back = s
            .convert_axis(AxisKind::EnergyEv, false)
            .convert_axis(AxisKind::WavelengthNm, false);
        for (a, b) in s.axis().iter().zip(back.axis()) {
            assert!((a - b).abs() < 1e-10 * a.abs());
        }
        assert_eq!(s.intensity(), back.intensity());
    }

    #[test]
    fn conversion_reference_value() {
        let s = Spectrum::<f64>::new(
            AxisKind::WavelengthNm,
            vec![547.5, 548.5],
            vec![1.0, 1.0],
        )
        .unwrap();
        let e = s.convert_axis(AxisKind::EnergyEv, false);
        // 547.5 nm -> 2.2646 eV; higher wavelength maps to lower energy.
        assert!((e.axis()[1] - 2.2646).abs() < 5e-5);
        assert!(e.axis()[0] < e.axis()[1]);
    }

    #[test]
    fn csv_round_trip() {
        let s = sample().with_temperature(300.0).with_metadata("source", "unit-test");
        let text = s.to_csv_string();
        let parsed = Spectrum::<f64>::from_csv_reader(text.as_bytes(), AxisKind::WavelengthNm).unwrap();
        assert_eq!(parsed.axis(), s.axis());
        assert_eq!(parsed.intensity(), s.intensity());
        assert_eq!(parsed.temperature_k(), Some(300.0));
        assert_eq!(parsed.metadata().get("source").unwrap(), "unit-test");
    }

    #[test]
    fn csv_parse_errors_carry_line_numbers() {
        let text = "540.0,1.0\nbogus,row,here\n";
        let err = Spectrum::<f64>::from_csv_reader(text.as_bytes(), AxisKind::WavelengthNm)
            .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }

        let text = "540.0,1.0\n541.0,-3.0\n";
        let err = Spectrum::<f64>::from_csv_reader(text.as_bytes(), AxisKind::WavelengthNm)
            .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn csv_axis_mismatch_rejected() {
        let text = "# axis: energy_ev\n2.0,1.0\n2.1,2.0\n";
        assert!(Spectrum::<f64>::from_csv_reader(text.as_bytes(), AxisKind::WavelengthNm).is_err());
    }

    #[test]
    fn header_row_accepted() {
        let text = "wavelength_nm,counts\n540.0,1.0\n541.0,2.0\n";
        let s = Spectrum::<f64>::from_csv_reader(text.as_bytes(), AxisKind::WavelengthNm).unwrap();
        assert_eq!(s.len(), 2);
    }
}
