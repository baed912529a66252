//! Independent numerical oracles: exact pixel box-counting against the
//! rational grid, closed-form approximate-square counts, L^q moment sums and
//! spectra, discrete Legendre transforms, coarse multifractal histograms by
//! exact composition counting, and a (diagnostic) projection estimator.

use num_bigint::BigUint;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::carpet::{cell_cover_range, counted_within_cap, exact_pow, CarpetSpec};
use crate::dims::log_sum_exp;
use crate::error::{Error, Result};
use crate::measure::SelfAffineMeasure;

/// A numerical estimate with its diagnostics.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub value: f64,
    /// Standard error of the value, when the method yields one.
    pub stderr: Option<f64>,
    /// Monte Carlo sample count, when applicable.
    pub samples: Option<u64>,
    /// Regression diagnostics, when the value is a fitted slope.
    pub regression: Option<Regression>,
    pub method: &'static str,
}

/// Least-squares diagnostics of a log-log covering regression.
#[derive(Debug, Clone)]
pub struct Regression {
    /// Covering scales, strictly decreasing.
    pub scales: Vec<f64>,
    /// Covering counts per scale.
    pub counts: Vec<u64>,
    pub slope: f64,
    pub residual_norm: f64,
}

impl Regression {
    /// Fits `ln count` against `ln (1/scale)`.
    pub fn fit(scales: Vec<f64>, counts: Vec<u64>) -> Result<Self> {
        if scales.len() < 2 || scales.len() != counts.len() {
            return Err(Error::Domain(
                "regression needs at least 2 scales with matching counts".into(),
            ));
        }
        if !scales.windows(2).all(|w| w[0] > w[1]) {
            return Err(Error::Domain("scales must be strictly decreasing".into()));
        }
        let xs: Vec<f64> = scales.iter().map(|r| -r.ln()).collect();
        let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
        let nf = xs.len() as f64;
        let mean_x = xs.iter().sum::<f64>() / nf;
        let mean_y = ys.iter().sum::<f64>() / nf;
        let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
        let sxy: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mean_x) * (y - mean_y))
            .sum();
        let slope = sxy / sxx;
        let intercept = mean_y - slope * mean_x;
        let residual_norm = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - slope * x - intercept).powi(2))
            .sum::<f64>()
            .sqrt();
        Ok(Regression {
            scales,
            counts,
            slope,
            residual_norm,
        })
    }

    /// Standard error of the slope (needs at least 3 points).
    pub fn slope_stderr(&self) -> Option<f64> {
        let n = self.scales.len();
        if n < 3 {
            return None;
        }
        let xs: Vec<f64> = self.scales.iter().map(|r| -r.ln()).collect();
        let mean_x = xs.iter().sum::<f64>() / n as f64;
        let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
        let s2 = self.residual_norm.powi(2) / (n as f64 - 2.0);
        Some((s2 / sxx).sqrt())
    }
}

/// Number of `n^-k` by `n^-k` grid cells meeting the union of depth-`j`
/// cylinders, decided by exact integer arithmetic. Cells are half-open, and
/// only overlaps of positive area count, so aligned boundaries are never
/// double-counted.
pub fn pixel_box_count(spec: &CarpetSpec, j: u32, k: u32, cap: u64) -> Result<u64> {
    if j == 0 || k == 0 {
        return Err(Error::Domain("depths j and k must be at least 1".into()));
    }
    let cells = counted_within_cap(&[(spec.n(), k)], cap)?;
    counted_within_cap(&[(spec.n(), 2 * k)], cap)?;
    let total = counted_within_cap(&[(spec.digit_count() as u64, j)], cap)?;
    let x_den = exact_pow(spec.m(), j)?;
    let y_den = exact_pow(spec.n(), j)?;
    // pre-check the worst products so the inner loop cannot overflow
    for den in [x_den, y_den] {
        den.checked_mul(cells as u128).ok_or_else(|| {
            Error::CapExceeded("pixel grid exceeds exact integer range".into())
        })?;
    }

    let words = ((cells * cells + 63) / 64) as usize;
    let bitset = (0..total)
        .into_par_iter()
        .fold(
            || vec![0u64; words],
            |mut bits, idx| {
                let rect = spec.cylinder_from_index(idx, j, x_den, y_den);
                let (ax0, ax1) =
                    cell_cover_range(rect.x_num, x_den, cells).expect("pre-checked range");
                let (ay0, ay1) =
                    cell_cover_range(rect.y_num, y_den, cells).expect("pre-checked range");
                for a in ax0..=ax1 {
                    for b in ay0..=ay1 {
                        let cell = a * cells + b;
                        bits[(cell / 64) as usize] |= 1u64 << (cell % 64);
                    }
                }
                bits
            },
        )
        .reduce(
            || vec![0u64; words],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x |= y;
                }
                a
            },
        );
    Ok(bitset.iter().map(|w| w.count_ones() as u64).sum())
}

/// Least-squares box-dimension estimate from pixel counts at scales `n^-k`
/// for the listed exponents, using the depth-`j` cylinder approximation.
pub fn box_dimension_estimate(
    spec: &CarpetSpec,
    j: u32,
    k_list: &[u32],
    cap: u64,
) -> Result<Estimate> {
    let mut ks: Vec<u32> = k_list.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.len() < 3 {
        return Err(Error::Domain(
            "box-dimension regression needs at least 3 distinct scales".into(),
        ));
    }
    let counts: Vec<u64> = ks
        .iter()
        .map(|&k| pixel_box_count(spec, j, k, cap))
        .collect::<Result<_>>()?;
    let scales: Vec<f64> = ks
        .iter()
        .map(|&k| (spec.n() as f64).powi(-(k as i32)))
        .collect();
    let regression = Regression::fit(scales, counts)?;
    Ok(Estimate {
        value: regression.slope,
        stderr: regression.slope_stderr(),
        samples: None,
        regression: Some(regression),
        method: "pixel-box-regression",
    })
}

/// The exact covering count `N^k * M^(l(k)-k)` of approximate squares.
#[derive(Debug, Clone)]
pub struct ApproxSquareCount {
    pub k: u64,
    pub l: u64,
    /// `ln(N^k * M^(l-k))`; divided by `k ln n` this converges to the box
    /// dimension.
    pub log_count: f64,
    /// Exact big integer, present for moderate `k`.
    pub exact: Option<BigUint>,
}

impl ApproxSquareCount {
    /// `log count / (k log n)`, the finite-depth box-dimension reading.
    pub fn normalized(&self, n: u64) -> f64 {
        self.log_count / (self.k as f64 * (n as f64).ln())
    }
}

pub fn approx_square_count(spec: &CarpetSpec, k: u64) -> Result<ApproxSquareCount> {
    if k == 0 {
        return Err(Error::Domain("depth k must be at least 1".into()));
    }
    let l = spec.horizontal_depth(k);
    let n_total = spec.digit_count() as u64;
    let m_cols = spec.column_profile().column_count() as u64;
    let log_count =
        k as f64 * (n_total as f64).ln() + (l - k) as f64 * (m_cols as f64).ln();
    let exact = if l <= 20_000 {
        Some(
            BigUint::from(n_total).pow(k as u32)
                * BigUint::from(m_cols).pow((l - k) as u32),
        )
    } else {
        None
    };
    Ok(ApproxSquareCount {
        k,
        l,
        log_count,
        exact,
    })
}

/// Log of the `q`-th moment sum `M_k(q) = sum over approximate squares of
/// mu(Q)^q`, by the exact factorization
/// `k ln(sum p_d^q) + (l-k) ln(sum q_i^q)`.
///
/// `q = 1` returns exactly 0: the squares partition the total mass.
pub fn lq_moment_sum(measure: &SelfAffineMeasure, q: f64, k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("depth k must be at least 1".into()));
    }
    if q == 1.0 {
        return Ok(0.0);
    }
    let l = measure.spec().horizontal_depth(k);
    let (digit_term, column_term) = moment_terms(measure, q);
    Ok(k as f64 * digit_term + (l - k) as f64 * column_term)
}

/// `(ln sum p_d^q, ln sum q_i^q)` in log space.
fn moment_terms(measure: &SelfAffineMeasure, q: f64) -> (f64, f64) {
    let digit_terms: Vec<f64> = measure.weights().iter().map(|p| q * p.ln()).collect();
    let column_terms: Vec<f64> = measure
        .column_weights()
        .iter()
        .map(|p| q * p.ln())
        .collect();
    (log_sum_exp(&digit_terms), log_sum_exp(&column_terms))
}

/// The L^q scaling exponent under this crate's convention:
/// `tau(q) = lim_k log M_k(q) / (k log n)`.
///
/// In the limit the integer rounding of `l(k)` drops out, leaving
/// `[ln sum p_d^q + (log n / log m - 1) ln sum q_i^q] / ln n`, so
/// `tau(0)` is the box dimension of the support and `-tau'(1)` is the
/// dimension of the measure.
pub fn lq_tau(measure: &SelfAffineMeasure, q: f64) -> f64 {
    if q == 1.0 {
        return 0.0;
    }
    let log_m = (measure.spec().m() as f64).ln();
    let log_n = (measure.spec().n() as f64).ln();
    let (digit_term, column_term) = moment_terms(measure, q);
    (digit_term + (log_n / log_m - 1.0) * column_term) / log_n
}

/// An L^q spectrum sampled on a grid of moments.
#[derive(Debug, Clone)]
pub struct LqCurve {
    pub qs: Vec<f64>,
    pub taus: Vec<f64>,
    /// Moment-sum depth this curve was requested at (the limit value is
    /// depth-free; finite-depth sums are available via `lq_moment_sum`).
    pub k: u64,
    pub convention: &'static str,
}

pub fn lq_spectrum(measure: &SelfAffineMeasure, q_grid: &[f64], k: u64) -> Result<LqCurve> {
    if k == 0 {
        return Err(Error::Domain("depth k must be at least 1".into()));
    }
    if q_grid.is_empty() {
        return Err(Error::Domain("q grid must be nonempty".into()));
    }
    let taus = q_grid.iter().map(|&q| lq_tau(measure, q)).collect();
    Ok(LqCurve {
        qs: q_grid.to_vec(),
        taus,
        k,
        convention: "tau(q) = lim log M_k(q)/(k log n); tau(0) = dim_B, -tau'(1) = dim mu",
    })
}

/// Central-difference reading of `-tau'(1)`.
pub fn lq_dimension_reading(measure: &SelfAffineMeasure, step: f64) -> f64 {
    (lq_tau(measure, 1.0 - step) - lq_tau(measure, 1.0 + step)) / (2.0 * step)
}

/// One point of a discrete Legendre transform.
#[derive(Debug, Clone, Copy)]
pub struct LegendrePoint {
    pub alpha: f64,
    /// `min over the q grid of (q alpha + tau(q))`.
    pub value: f64,
    /// False when the transform is strongly negative, i.e. `alpha` is
    /// outside the attainable local-dimension range.
    pub attained: bool,
}

/// Discrete infimum `f(alpha) = min_q (q alpha + tau(q))` over the curve's
/// q grid. Output is concave in `alpha` as a pointwise min of affine maps.
pub fn legendre_transform(curve: &LqCurve, alphas: &[f64]) -> Result<Vec<LegendrePoint>> {
    if curve.qs.is_empty() {
        return Err(Error::Domain("L^q curve is empty".into()));
    }
    Ok(alphas
        .iter()
        .map(|&alpha| {
            let value = curve
                .qs
                .iter()
                .zip(&curve.taus)
                .map(|(q, tau)| q * alpha + tau)
                .fold(f64::INFINITY, f64::min);
            LegendrePoint {
                alpha,
                value,
                attained: value >= -1e-12,
            }
        })
        .collect())
}

/// Coarse multifractal histogram: every approximate square of depth `k` is
/// assigned its coarse local dimension `alpha(Q) = -log mu(Q) / (k log n)`
/// and counted, exactly, by enumerating (digit composition of the prefix,
/// column composition of the suffix) pairs with multinomial multiplicities.
#[derive(Debug, Clone)]
pub struct Histogram {
    pub k: u64,
    pub l: u64,
    /// Bin edges over alpha, length `bins + 1`.
    pub edges: Vec<f64>,
    /// `ln(count)` per bin, `-inf` for empty bins.
    pub log_counts: Vec<f64>,
    /// `ln(count) / (k log n)` per bin: the coarse spectrum reading.
    pub values: Vec<f64>,
    /// Exact per-bin counts (present for moderate word lengths).
    pub exact_counts: Option<Vec<BigUint>>,
    /// Exact total (sum over bins), for comparison with the covering count.
    pub exact_total: Option<BigUint>,
}

impl Histogram {
    pub fn centers(&self) -> Vec<f64> {
        self.edges
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }

    /// Center of the bin with the largest count.
    pub fn peak_alpha(&self) -> f64 {
        let (idx, _) = self
            .log_counts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("log counts are not NaN"))
            .expect("histogram has bins");
        self.centers()[idx]
    }

    pub fn peak_value(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Largest word length for which exact per-bin big-integer counts are kept.
const EXACT_HISTOGRAM_LIMIT: u64 = 2048;

pub fn coarse_multifractal_histogram(
    measure: &SelfAffineMeasure,
    k: u64,
    bins: usize,
    cap: u64,
) -> Result<Histogram> {
    if k == 0 {
        return Err(Error::Domain("depth k must be at least 1".into()));
    }
    if bins == 0 {
        return Err(Error::Domain("histogram needs at least one bin".into()));
    }
    let spec = measure.spec();
    let l = spec.horizontal_depth(k);
    let suffix = l - k;
    let n_digits = measure.weights().len();
    let m_cols = measure.column_weights().len();

    // composition-space size guard
    let pairs = compositions_count(k, n_digits) * compositions_count(suffix, m_cols);
    if pairs > BigUint::from(cap) {
        return Err(Error::CapExceeded(format!(
            "histogram would enumerate {pairs} composition pairs, over the cap of {cap}"
        )));
    }

    let exact = l <= EXACT_HISTOGRAM_LIMIT;
    let prefix_parts = composition_terms(k, measure.weights(), exact);
    let suffix_parts = composition_terms(suffix, measure.column_weights(), exact);

    // attained alpha range is pinned by the extreme per-letter weights
    let log_n = (spec.n() as f64).ln();
    let denom = k as f64 * log_n;
    let max_lp = measure.weights().iter().cloned().fold(f64::MIN, f64::max).ln();
    let min_lp = measure.weights().iter().cloned().fold(f64::MAX, f64::min).ln();
    let max_lq = measure
        .column_weights()
        .iter()
        .cloned()
        .fold(f64::MIN, f64::max)
        .ln();
    let min_lq = measure
        .column_weights()
        .iter()
        .cloned()
        .fold(f64::MAX, f64::min)
        .ln();
    let alpha_lo = -(k as f64 * max_lp + suffix as f64 * max_lq) / denom;
    let alpha_hi = -(k as f64 * min_lp + suffix as f64 * min_lq) / denom;
    // width floor absorbs ulp-level rounding when all squares share one alpha
    let width = ((alpha_hi - alpha_lo) / bins as f64).max(1e-9);
    let edges: Vec<f64> = (0..=bins)
        .map(|i| alpha_lo + i as f64 * width)
        .collect();

    let mut log_counts = vec![f64::NEG_INFINITY; bins];
    let mut exact_counts = exact.then(|| vec![BigUint::from(0u32); bins]);
    for p in &prefix_parts {
        for s in &suffix_parts {
            let alpha = -(p.log_weight + s.log_weight) / denom;
            let bin = (((alpha - alpha_lo) / width) as usize).min(bins - 1);
            log_counts[bin] = log_add_exp(log_counts[bin], p.log_count + s.log_count);
            if let (Some(counts), Some(pc), Some(sc)) =
                (exact_counts.as_mut(), p.exact.as_ref(), s.exact.as_ref())
            {
                counts[bin] += pc * sc;
            }
        }
    }
    let values = log_counts.iter().map(|&lc| lc / denom).collect();
    let exact_total = exact_counts
        .as_ref()
        .map(|counts| counts.iter().sum::<BigUint>());
    Ok(Histogram {
        k,
        l,
        edges,
        log_counts,
        values,
        exact_counts,
        exact_total,
    })
}

struct CompositionTerm {
    /// `sum c_j ln w_j` over the composition.
    log_weight: f64,
    /// `ln multinomial(total; c)`.
    log_count: f64,
    exact: Option<BigUint>,
}

/// All compositions of `total` into `weights.len()` parts, with their
/// multinomial multiplicities.
fn composition_terms(total: u64, weights: &[f64], exact: bool) -> Vec<CompositionTerm> {
    let parts = weights.len();
    let log_weights: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    let factorials = exact.then(|| factorial_table(total));
    let mut out = Vec::new();
    let mut comp = vec![0u64; parts];
    fill_compositions(total, 0, &mut comp, &mut |c: &[u64]| {
        let log_weight: f64 = c.iter().zip(&log_weights).map(|(&n, lw)| n as f64 * lw).sum();
        let log_count = ln_gamma(total as f64 + 1.0)
            - c.iter().map(|&n| ln_gamma(n as f64 + 1.0)).sum::<f64>();
        let exact = factorials.as_ref().map(|f| {
            c.iter()
                .fold(f[total as usize].clone(), |acc, &n| acc / &f[n as usize])
        });
        out.push(CompositionTerm {
            log_weight,
            log_count,
            exact,
        });
    });
    out
}

fn fill_compositions(remaining: u64, part: usize, comp: &mut Vec<u64>, f: &mut impl FnMut(&[u64])) {
    if part + 1 == comp.len() {
        comp[part] = remaining;
        f(comp);
        return;
    }
    for value in 0..=remaining {
        comp[part] = value;
        fill_compositions(remaining - value, part + 1, comp, f);
    }
    comp[part] = 0;
}

/// `C(total + parts - 1, parts - 1)`: the number of compositions.
fn compositions_count(total: u64, parts: usize) -> BigUint {
    let mut num = BigUint::from(1u32);
    let mut den = BigUint::from(1u32);
    for i in 0..(parts as u64 - 1) {
        num *= total + parts as u64 - 1 - i;
        den *= i + 1;
    }
    num / den
}

fn factorial_table(upto: u64) -> Vec<BigUint> {
    let mut table = Vec::with_capacity(upto as usize + 1);
    table.push(BigUint::from(1u32));
    for i in 1..=upto {
        let next = table.last().expect("nonempty") * i;
        table.push(next);
    }
    table
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Natural log of a big integer (`-inf` for zero).
pub fn log_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 53 {
        let v = x.to_u64_digits().first().copied().unwrap_or(0);
        return (v as f64).ln();
    }
    let shift = bits - 53;
    let top = x >> shift;
    let mantissa = top.to_u64_digits()[0] as f64;
    mantissa.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Box-dimension estimate of the projection of the depth-`j` cylinder
/// approximation onto the line at `angle` (radians) through the origin.
///
/// Diagnostic only: floating-point interval covering with slow convergence;
/// principal axes are excluded, as the projection theorem requires.
pub fn projection_box_estimate(
    spec: &CarpetSpec,
    angle: f64,
    j: u32,
    k_list: &[u32],
    cap: u64,
) -> Result<Estimate> {
    let (sin, cos) = angle.sin_cos();
    if sin.abs() < 1e-9 || cos.abs() < 1e-9 {
        return Err(Error::PrincipalAxis);
    }
    let mut ks: Vec<u32> = k_list.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.len() < 3 {
        return Err(Error::Domain(
            "projection regression needs at least 3 distinct scales".into(),
        ));
    }
    counted_within_cap(&[(spec.n(), *ks.last().expect("nonempty"))], cap)?;
    let total = counted_within_cap(&[(spec.digit_count() as u64, j)], cap)?;
    let x_den = exact_pow(spec.m(), j)?;
    let y_den = exact_pow(spec.n(), j)?;

    // projected corner intervals of every rectangle, as floats
    let intervals: Vec<(f64, f64)> = (0..total)
        .map(|idx| {
            let rect = spec.cylinder_from_index(idx, j, x_den, y_den);
            let (x0, y0) = (rect.x0(), rect.y0());
            let (x1, y1) = (x0 + rect.width(), y0 + rect.height());
            let corners = [
                x0 * cos + y0 * sin,
                x0 * cos + y1 * sin,
                x1 * cos + y0 * sin,
                x1 * cos + y1 * sin,
            ];
            let lo = corners.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = corners.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        })
        .collect();

    let n = spec.n() as f64;
    let mut counts = Vec::with_capacity(ks.len());
    let mut scales = Vec::with_capacity(ks.len());
    for &k in &ks {
        let r = n.powi(-(k as i32));
        // projections live in [-1, sqrt 2]; shift by 2 to index cells
        let size = ((3.5 / r).ceil() as usize) + 2;
        let mut hit = vec![false; size];
        for &(lo, hi) in &intervals {
            let a = ((lo + 2.0) / r).floor() as usize;
            let b = ((hi + 2.0) / r).floor() as usize;
            for cell in hit.iter_mut().take(b.min(size - 1) + 1).skip(a) {
                *cell = true;
            }
        }
        counts.push(hit.iter().filter(|&&h| h).count() as u64);
        scales.push(r);
    }
    let regression = Regression::fit(scales, counts)?;
    Ok(Estimate {
        value: regression.slope,
        stderr: regression.slope_stderr(),
        samples: None,
        regression: Some(regression),
        method: "projection-box-regression (diagnostic)",
    })
}
