//! Spec-file parsing, CSV emission, and raster rendering.
//!
//! The spec file is a single JSON object
//! `{"m": int, "n": int, "digits": [[col,row],...], "weights": [float,...]?}`.
//! Rasters are binary PGM (P5, maxval 255): byte-deterministic and viewable
//! everywhere.

use serde::{Deserialize, Serialize};

use crate::carpet::{cell_cover_range, counted_within_cap, exact_pow, CarpetSpec};
use crate::dims::SpectrumCurve;
use crate::error::{Error, Result};
use crate::measure::SelfAffineMeasure;
use crate::numerics::{Estimate, Histogram, LegendrePoint, LqCurve};
use crate::subsystem::ConvergenceTable;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    m: u64,
    n: u64,
    digits: Vec<(u64, u64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

/// Parses a spec file into a carpet and, when a `weights` field is present,
/// the self-affine measure it defines. Weights follow the order of the
/// `digits` array as written.
pub fn parse_spec(text: &str) -> Result<(CarpetSpec, Option<SelfAffineMeasure>)> {
    let raw: SpecFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    match raw.weights {
        None => Ok((CarpetSpec::new(raw.m, raw.n, raw.digits)?, None)),
        Some(weights) => {
            if weights.len() != raw.digits.len() {
                return Err(Error::Weight(format!(
                    "weights field has {} entries for {} digits",
                    weights.len(),
                    raw.digits.len()
                )));
            }
            // keep weights attached to their digits through canonical sorting
            let mut paired: Vec<((u64, u64), f64)> =
                raw.digits.into_iter().zip(weights).collect();
            paired.sort_by_key(|(d, _)| *d);
            let digits: Vec<(u64, u64)> = paired.iter().map(|(d, _)| *d).collect();
            let weights: Vec<f64> = paired.iter().map(|(_, w)| *w).collect();
            let spec = CarpetSpec::new(raw.m, raw.n, digits)?;
            let measure = SelfAffineMeasure::new(spec.clone(), weights)?;
            Ok((spec, Some(measure)))
        }
    }
}

/// Canonical single-line JSON form of a carpet; `parse_spec` of the output
/// returns an identical spec.
pub fn serialize_spec(spec: &CarpetSpec) -> String {
    let file = SpecFile {
        m: spec.m(),
        n: spec.n(),
        digits: spec.digits().iter().map(|d| (d.col, d.row)).collect(),
        weights: None,
    };
    serde_json::to_string(&file).expect("spec serialization cannot fail")
}

/// Canonical JSON form of a measure (spec plus weights).
pub fn serialize_measure(measure: &SelfAffineMeasure) -> String {
    let spec = measure.spec();
    let file = SpecFile {
        m: spec.m(),
        n: spec.n(),
        digits: spec.digits().iter().map(|d| (d.col, d.row)).collect(),
        weights: Some(measure.weights().to_vec()),
    };
    serde_json::to_string(&file).expect("spec serialization cannot fail")
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Full-precision (17 significant digits) locale-independent float format.
pub fn csv_num(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        return "-inf".into();
    }
    if x == f64::INFINITY {
        return "inf".into();
    }
    format!("{x:.16e}")
}

/// Anything this crate can emit as CSV: a header row, then numeric rows,
/// newline-terminated. Comment lines start with `#`.
pub trait ToCsv {
    fn to_csv(&self) -> String;
}

/// Generic writer entry point.
pub fn write_csv<T: ToCsv>(value: &T) -> String {
    value.to_csv()
}

impl ToCsv for SpectrumCurve {
    fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# kind = {}\n", self.kind.label()));
        out.push_str("theta,value\n");
        for (t, v) in self.thetas.iter().zip(&self.values) {
            if *t == self.phase_transition {
                out.push_str(&format!(
                    "# phase transition theta* = {} at the next row\n",
                    csv_num(self.phase_transition)
                ));
            }
            out.push_str(&format!("{},{}\n", csv_num(*t), csv_num(*v)));
        }
        out
    }
}

impl ToCsv for ConvergenceTable {
    fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# dim_H = {}\n", csv_num(self.hausdorff)));
        if let Some(k) = self.first_k_within {
            out.push_str(&format!("# first k within requested epsilon: {k}\n"));
        }
        out.push_str("k,l_k,dim_E_k,gap\n");
        for (k, row) in &self.rows {
            match row {
                Ok(r) => out.push_str(&format!(
                    "{},{},{},{}\n",
                    r.k,
                    r.word_length,
                    csv_num(r.dimension),
                    csv_num(r.gap)
                )),
                Err(e) => out.push_str(&format!("# k={k}: {e}\n")),
            }
        }
        out
    }
}

impl ToCsv for LqCurve {
    fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# convention: {}\n# k = {}\n", self.convention, self.k));
        out.push_str("q,tau\n");
        for (q, tau) in self.qs.iter().zip(&self.taus) {
            out.push_str(&format!("{},{}\n", csv_num(*q), csv_num(*tau)));
        }
        out
    }
}

impl ToCsv for Vec<LegendrePoint> {
    fn to_csv(&self) -> String {
        let mut out = String::from("alpha,f_alpha,attained\n");
        for p in self {
            out.push_str(&format!(
                "{},{},{}\n",
                csv_num(p.alpha),
                csv_num(p.value),
                u8::from(p.attained)
            ));
        }
        out
    }
}

impl ToCsv for Histogram {
    fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# k = {}, l = {}\n", self.k, self.l));
        if let Some(total) = &self.exact_total {
            out.push_str(&format!("# exact total = {total}\n"));
        }
        out.push_str("alpha,normalized_log_count,count\n");
        let centers = self.centers();
        for i in 0..self.values.len() {
            let count = match &self.exact_counts {
                Some(counts) => counts[i].to_string(),
                None => String::new(),
            };
            out.push_str(&format!(
                "{},{},{}\n",
                csv_num(centers[i]),
                csv_num(self.values[i]),
                count
            ));
        }
        out
    }
}

impl ToCsv for Estimate {
    fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# method = {}\n", self.method));
        out.push_str(&format!("# value = {}\n", csv_num(self.value)));
        if let Some(se) = self.stderr {
            out.push_str(&format!("# stderr = {}\n", csv_num(se)));
        }
        if let Some(s) = self.samples {
            out.push_str(&format!("# samples = {s}\n"));
        }
        match &self.regression {
            Some(reg) => {
                out.push_str(&format!("# slope = {}\n", csv_num(reg.slope)));
                out.push_str(&format!(
                    "# residual_norm = {}\n",
                    csv_num(reg.residual_norm)
                ));
                out.push_str("scale,count\n");
                for (r, c) in reg.scales.iter().zip(&reg.counts) {
                    out.push_str(&format!("{},{c}\n", csv_num(*r)));
                }
            }
            None => {
                out.push_str("value,stderr\n");
                out.push_str(&format!(
                    "{},{}\n",
                    csv_num(self.value),
                    self.stderr.map(csv_num).unwrap_or_default()
                ));
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Raster rendering
// ---------------------------------------------------------------------------

/// A grayscale raster of the unit square: 0 = black (occupied), 255 = white
/// (empty). Pixels are stored in file order (top row first); the bottom-left
/// pixel corresponds to the bottom-left of the unit square.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl RasterImage {
    /// Pixel value at grid cell `(col, row)` with row 0 at the *bottom*.
    pub fn at_cell(&self, col: u32, row: u32) -> u8 {
        let file_row = self.height - 1 - row;
        self.pixels[(file_row * self.width + col) as usize]
    }

    /// Binary PGM (P5, maxval 255) encoding; byte-deterministic.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

/// True when cell boundaries at this resolution align with every depth-`j`
/// cylinder boundary, making the rasterization exact.
pub fn resolution_aligned(spec: &CarpetSpec, depth: u32, pixels_per_unit: u32) -> bool {
    let lcm = spec.m() / gcd(spec.m(), spec.n()) * spec.n();
    match lcm.checked_pow(depth) {
        Some(cell) => pixels_per_unit as u64 % cell == 0,
        None => false,
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Renders the depth-`j` cylinder approximation: a pixel is black iff its
/// cell overlaps some cylinder with positive area (exact rational test).
pub fn render_set(spec: &CarpetSpec, depth: u32, pixels_per_unit: u32, cap: u64) -> Result<RasterImage> {
    render(spec, None, depth, pixels_per_unit, cap)
}

/// Renders a measure heatmap: occupied pixels are shaded by the log of the
/// largest depth-`j` cylinder measure covering them (darkest = largest),
/// normalized over the occupied pixels; empty cells stay white.
pub fn render_measure(
    measure: &SelfAffineMeasure,
    depth: u32,
    pixels_per_unit: u32,
    cap: u64,
) -> Result<RasterImage> {
    render(measure.spec(), Some(measure), depth, pixels_per_unit, cap)
}

/// Darkest-to-lightest span used for occupied pixels in measure renders,
/// keeping even the lightest occupied cell clearly distinct from white.
const MEASURE_GRAY_SPAN: f64 = 200.0;

fn render(
    spec: &CarpetSpec,
    measure: Option<&SelfAffineMeasure>,
    depth: u32,
    pixels_per_unit: u32,
    cap: u64,
) -> Result<RasterImage> {
    if depth == 0 || pixels_per_unit == 0 {
        return Err(Error::Domain(
            "render needs depth >= 1 and a positive resolution".into(),
        ));
    }
    let total = counted_within_cap(&[(spec.digit_count() as u64, depth)], cap)?;
    let cells = pixels_per_unit as u64;
    counted_within_cap(&[(cells, 2)], cap)?;
    let x_den = exact_pow(spec.m(), depth)?;
    let y_den = exact_pow(spec.n(), depth)?;
    for den in [x_den, y_den] {
        den.checked_mul(cells as u128)
            .ok_or_else(|| Error::CapExceeded("render grid exceeds exact integer range".into()))?;
    }

    // log-measure per pixel (max over covering cylinders); NEG_INFINITY = empty
    let mut shade = vec![f64::NEG_INFINITY; (cells * cells) as usize];
    for idx in 0..total {
        let rect = spec.cylinder_from_index(idx, depth, x_den, y_den);
        let log_mu = match measure {
            Some(m) => {
                // recover the word letters of this index to price the cylinder
                let mut log_mu = 0.0;
                let base = spec.digit_count() as u64;
                let mut rem = idx;
                for _ in 0..depth {
                    log_mu += m.weights()[(rem % base) as usize].ln();
                    rem /= base;
                }
                log_mu
            }
            None => 0.0,
        };
        let (ax0, ax1) = cell_cover_range(rect.x_num, x_den, cells).expect("pre-checked");
        let (ay0, ay1) = cell_cover_range(rect.y_num, y_den, cells).expect("pre-checked");
        for a in ax0..=ax1 {
            for b in ay0..=ay1 {
                let cell = (a * cells + b) as usize;
                if log_mu > shade[cell] {
                    shade[cell] = log_mu;
                }
            }
        }
    }

    let occupied: Vec<f64> = shade
        .iter()
        .cloned()
        .filter(|&s| s > f64::NEG_INFINITY)
        .collect();
    let (lo, hi) = occupied
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
            (lo.min(s), hi.max(s))
        });
    let span = hi - lo;

    let side = pixels_per_unit;
    let mut pixels = vec![255u8; (side * side) as usize];
    for a in 0..cells {
        for b in 0..cells {
            let s = shade[(a * cells + b) as usize];
            if s == f64::NEG_INFINITY {
                continue;
            }
            let gray = if measure.is_none() || span < 1e-12 {
                0
            } else {
                ((hi - s) / span * MEASURE_GRAY_SPAN).round() as u8
            };
            let file_row = (side - 1 - b as u32) as u64;
            pixels[(file_row * cells + a) as usize] = gray;
        }
    }
    Ok(RasterImage {
        width: side,
        height: side,
        pixels,
    })
}
