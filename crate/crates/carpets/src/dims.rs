//! Closed-form dimension formulas driven entirely by the column profile.
//!
//! All five dimensions of a carpet, the p-average family that unifies them,
//! the two-scale interpolation spectra with their phase transition at
//! `log m / log n`, the modified lower dimension, and the projection
//! dimension for grids with irrational log-ratio.

use crate::carpet::{CarpetSpec, ColumnProfile};
use crate::error::{Error, Result};

/// The five dimensions of a carpet. Box and packing always coincide; the
/// whole chain `lower <= hausdorff <= box <= assouad` collapses to equality
/// exactly in the uniform-fibres case and is strict otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionReport {
    pub hausdorff: f64,
    pub box_dim: f64,
    pub packing: f64,
    pub assouad: f64,
    pub lower: f64,
}

/// Which end of the interpolation family a spectrum targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Assouad,
    Lower,
}

impl SpectrumKind {
    pub fn label(self) -> &'static str {
        match self {
            SpectrumKind::Assouad => "assouad",
            SpectrumKind::Lower => "lower",
        }
    }
}

/// A sampled interpolation spectrum over `theta` in (0,1), with the exact
/// phase-transition point `log m / log n` always included in the grid.
#[derive(Debug, Clone)]
pub struct SpectrumCurve {
    pub kind: SpectrumKind,
    pub thetas: Vec<f64>,
    pub values: Vec<f64>,
    pub phase_transition: f64,
}

/// Evaluates the four closed-form dimension expressions.
pub fn dimension_report(profile: &ColumnProfile, m: u64, n: u64) -> DimensionReport {
    let (log_m, log_n) = (ln(m), ln(n));
    let c = log_m / log_n;
    let col_count = profile.column_count() as f64;
    let total = profile.total() as f64;

    let hausdorff = profile
        .counts()
        .iter()
        .map(|&ni| (ni as f64).powf(c))
        .sum::<f64>()
        .ln()
        / log_m;
    let box_dim = col_count.ln() / log_m + (total / col_count).ln() / log_n;
    let assouad = col_count.ln() / log_m + (profile.max_count() as f64).ln() / log_n;
    let lower = col_count.ln() / log_m + (profile.min_count() as f64).ln() / log_n;

    DimensionReport {
        hausdorff,
        box_dim,
        packing: box_dim,
        assouad,
        lower,
    }
}

/// The p-average family
/// `log M / log m + log ||N||_p / log n`,
/// where `||N||_p = ((1/M) sum N_i^p)^(1/p)` with the usual extensions
/// (max at `p = +inf`, min at `p = -inf`, geometric mean at `p = 0`).
///
/// Reproduces the lower dimension at `p = -inf`, the Hausdorff dimension at
/// `p = log m / log n`, box and packing at `p = 1`, and Assouad at
/// `p = +inf`.
pub fn p_average_dimension(profile: &ColumnProfile, m: u64, n: u64, p: f64) -> f64 {
    let (log_m, log_n) = (ln(m), ln(n));
    let col_count = profile.column_count() as f64;
    let log_norm = if p == f64::INFINITY {
        (profile.max_count() as f64).ln()
    } else if p == f64::NEG_INFINITY {
        (profile.min_count() as f64).ln()
    } else if p == 0.0 {
        // geometric mean: the p -> 0 limit of the power mean
        profile.counts().iter().map(|&ni| (ni as f64).ln()).sum::<f64>() / col_count
    } else {
        // ((1/M) sum N_i^p)^(1/p) in log space, stable for large |p|
        let terms: Vec<f64> = profile
            .counts()
            .iter()
            .map(|&ni| p * (ni as f64).ln())
            .collect();
        (log_sum_exp(&terms) - col_count.ln()) / p
    };
    col_count.ln() / log_m + log_norm / log_n
}

/// One point of the Assouad or lower spectrum at `theta` in (0,1).
///
/// Below the phase transition `theta* = log m / log n` the branch formula
/// applies with the extreme column count (max for Assouad, min for lower);
/// at and above `theta*` the spectrum is constant at the corresponding
/// dimension. Both branches agree at `theta*`.
pub fn spectrum_value(
    profile: &ColumnProfile,
    m: u64,
    n: u64,
    kind: SpectrumKind,
    theta: f64,
) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!(
            "spectrum parameter theta must lie in (0,1), got {theta}"
        )));
    }
    let (log_m, log_n) = (ln(m), ln(n));
    let theta_star = log_m / log_n;
    let extreme = match kind {
        SpectrumKind::Assouad => profile.max_count(),
        SpectrumKind::Lower => profile.min_count(),
    } as f64;
    let col_count = profile.column_count() as f64;
    let total = profile.total() as f64;
    if theta <= theta_star {
        Ok((col_count.ln() - theta * (total / extreme).ln()) / ((1.0 - theta) * log_m)
            + ((total / col_count).ln() - theta * extreme.ln()) / ((1.0 - theta) * log_n))
    } else {
        Ok(col_count.ln() / log_m + extreme.ln() / log_n)
    }
}

/// Samples a spectrum on a uniform grid of `steps` interior points of (0,1),
/// with the exact phase transition inserted so it is visible in output.
pub fn spectrum_curve(
    profile: &ColumnProfile,
    m: u64,
    n: u64,
    kind: SpectrumKind,
    steps: usize,
) -> Result<SpectrumCurve> {
    if steps < 2 {
        return Err(Error::Domain(format!(
            "spectrum curve needs at least 2 grid points, got {steps}"
        )));
    }
    let theta_star = ln(m) / ln(n);
    let mut thetas: Vec<f64> = (1..=steps)
        .map(|i| i as f64 / (steps as f64 + 1.0))
        .collect();
    if !thetas.contains(&theta_star) {
        thetas.push(theta_star);
        thetas.sort_by(|a, b| a.partial_cmp(b).expect("thetas are finite"));
    }
    let values = thetas
        .iter()
        .map(|&t| spectrum_value(profile, m, n, kind, t))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SpectrumCurve {
        kind,
        thetas,
        values,
        phase_transition: theta_star,
    })
}

/// The modified lower dimension of a carpet equals its Hausdorff dimension
/// (witnessed constructively by uniform-fibres subsystems).
pub fn modified_lower_dimension(profile: &ColumnProfile, m: u64, n: u64) -> f64 {
    dimension_report(profile, m, n).hausdorff
}

/// Hausdorff dimension of the orthogonal projection onto any non-principal
/// line: `min(dim_H, 1)`, valid exactly when `log m / log n` is irrational.
///
/// The rationality test is exact integer arithmetic: `log m / log n` is
/// rational iff `m` and `n` are both powers of a common integer base.
pub fn projection_dimension(spec: &CarpetSpec) -> Result<f64> {
    let (m, n) = (spec.m(), spec.n());
    if log_ratio_is_rational(m, n) {
        return Err(Error::RationalRatio(format!(
            "m={m} and n={n} are powers of a common base; \
             the projection theorem does not apply"
        )));
    }
    let report = dimension_report(&spec.column_profile(), m, n);
    Ok(report.hausdorff.min(1.0))
}

/// True iff `log m / log n` is rational, i.e. `m = b^s` and `n = b^t` for a
/// common integer base `b >= 2`.
pub fn log_ratio_is_rational(m: u64, n: u64) -> bool {
    let base = primitive_base(m);
    let mut power = base;
    loop {
        if power == n {
            return true;
        }
        if power > n / base {
            // next multiplication would overshoot (or overflow)
            return false;
        }
        power *= base;
    }
}

/// The smallest integer `b >= 2` with `m = b^e` for some `e >= 1`
/// (i.e. the base of `m`'s maximal-exponent representation).
fn primitive_base(m: u64) -> u64 {
    debug_assert!(m >= 2);
    for exp in (2..=m.ilog2()).rev() {
        if let Some(root) = integer_root(m, exp) {
            return root;
        }
    }
    m
}

/// Exact integer `exp`-th root of `x`, if one exists.
fn integer_root(x: u64, exp: u32) -> Option<u64> {
    let guess = (x as f64).powf(1.0 / exp as f64).round() as u64;
    for candidate in guess.saturating_sub(1)..=guess + 1 {
        if let Some(power) = candidate.checked_pow(exp) {
            if power == x {
                return Some(candidate);
            }
        }
    }
    None
}

fn ln(x: u64) -> f64 {
    (x as f64).ln()
}

/// Numerically stable `ln(sum exp(t))`.
pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carpet::CarpetSpec;

    fn fig2() -> CarpetSpec {
        CarpetSpec::new(2, 3, [(0, 0), (1, 0), (1, 2)]).unwrap()
    }

    // Frozen from an independent 40-digit evaluation of the four closed
    // forms (and cross-checked against the entropy route: the maximal
    // self-affine measure has exactly this dimension).
    const FIG2_HAUSDORFF: f64 = 1.3496838201955776;
    const FIG2_BOX: f64 = 1.3690702464285426;
    const FIG2_ASSOUAD: f64 = 1.6309297535714574;

    #[test]
    fn report_fig2() {
        let spec = fig2();
        let r = dimension_report(&spec.column_profile(), 2, 3);
        assert!((r.lower - 1.0).abs() < 1e-12);
        assert!((r.hausdorff - FIG2_HAUSDORFF).abs() < 1e-12);
        assert!((r.box_dim - FIG2_BOX).abs() < 1e-12);
        assert_eq!(r.box_dim, r.packing);
        assert!((r.assouad - FIG2_ASSOUAD).abs() < 1e-12);
        // strict chain for non-uniform fibres
        assert!(r.lower < r.hausdorff && r.hausdorff < r.box_dim && r.box_dim < r.assouad);
    }

    #[test]
    fn report_full_grid_is_two() {
        let spec = CarpetSpec::full_grid(2, 3).unwrap();
        let r = dimension_report(&spec.column_profile(), 2, 3);
        for v in [r.hausdorff, r.box_dim, r.packing, r.assouad, r.lower] {
            assert!((v - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn report_uniform_diagonal_is_one() {
        let spec = CarpetSpec::new(2, 3, [(0, 0), (1, 1)]).unwrap();
        let r = dimension_report(&spec.column_profile(), 2, 3);
        for v in [r.hausdorff, r.box_dim, r.assouad, r.lower] {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn p_average_reproduces_all_four() {
        let spec = fig2();
        let profile = spec.column_profile();
        let r = dimension_report(&profile, 2, 3);
        let c = 2f64.ln() / 3f64.ln();
        assert!((p_average_dimension(&profile, 2, 3, f64::NEG_INFINITY) - r.lower).abs() < 1e-12);
        assert!((p_average_dimension(&profile, 2, 3, c) - r.hausdorff).abs() < 1e-12);
        assert!((p_average_dimension(&profile, 2, 3, 1.0) - r.box_dim).abs() < 1e-12);
        assert!((p_average_dimension(&profile, 2, 3, f64::INFINITY) - r.assouad).abs() < 1e-12);
    }

    #[test]
    fn p_average_monotone_in_p() {
        let spec = fig2();
        let profile = spec.column_profile();
        let ps = [-1e6, -40.0, -3.0, -1.0, 0.0, 0.3, 0.8, 1.0, 2.0, 7.0, 80.0, 1e6];
        let vals: Vec<f64> = ps
            .iter()
            .map(|&p| p_average_dimension(&profile, 2, 3, p))
            .collect();
        for w in vals.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "p-average must be non-decreasing");
        }
    }

    #[test]
    fn spectrum_values_fig2() {
        let spec = fig2();
        let profile = spec.column_profile();
        // frozen from direct high-precision evaluation of the branch formula
        let a03 = spectrum_value(&profile, 2, 3, SpectrumKind::Assouad, 0.3).unwrap();
        assert!((a03 - 1.4347179573439407).abs() < 1e-12);
        let l03 = spectrum_value(&profile, 2, 3, SpectrumKind::Lower, 0.3).unwrap();
        assert!((l03 - 1.2765449945888510).abs() < 1e-12);
        // constant branch beyond theta*
        let a09 = spectrum_value(&profile, 2, 3, SpectrumKind::Assouad, 0.9).unwrap();
        assert!((a09 - FIG2_ASSOUAD).abs() < 1e-12);
    }

    #[test]
    fn spectrum_continuous_at_phase_transition() {
        let spec = fig2();
        let profile = spec.column_profile();
        let theta_star = 2f64.ln() / 3f64.ln();
        for kind in [SpectrumKind::Assouad, SpectrumKind::Lower] {
            let left = spectrum_value(&profile, 2, 3, kind, theta_star).unwrap();
            let right =
                spectrum_value(&profile, 2, 3, kind, theta_star + 1e-15).unwrap();
            assert!((left - right).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_domain_errors() {
        let spec = fig2();
        let profile = spec.column_profile();
        for bad in [0.0, 1.0, -0.1, 1.5] {
            assert!(matches!(
                spectrum_value(&profile, 2, 3, SpectrumKind::Assouad, bad),
                Err(Error::Domain(_))
            ));
        }
        assert!(matches!(
            spectrum_curve(&profile, 2, 3, SpectrumKind::Assouad, 1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn spectrum_curve_contains_transition_and_limits() {
        let spec = fig2();
        let profile = spec.column_profile();
        let curve = spectrum_curve(&profile, 2, 3, SpectrumKind::Assouad, 5).unwrap();
        assert!(curve.thetas.contains(&curve.phase_transition));
        assert!(curve.thetas.windows(2).all(|w| w[0] < w[1]));
        // endpoints approach box (theta -> 0) and assouad (theta -> 1)
        let near0 = spectrum_value(&profile, 2, 3, SpectrumKind::Assouad, 1e-9).unwrap();
        assert!((near0 - FIG2_BOX).abs() < 1e-6);
        let near1 =
            spectrum_value(&profile, 2, 3, SpectrumKind::Assouad, 1.0 - 1e-9).unwrap();
        assert!((near1 - FIG2_ASSOUAD).abs() < 1e-6);
    }

    #[test]
    fn spectrum_constant_for_uniform_fibres() {
        let spec = CarpetSpec::full_grid(2, 3).unwrap();
        let profile = spec.column_profile();
        let box_dim = dimension_report(&profile, 2, 3).box_dim;
        for kind in [SpectrumKind::Assouad, SpectrumKind::Lower] {
            let curve = spectrum_curve(&profile, 2, 3, kind, 17).unwrap();
            for v in curve.values {
                assert!((v - box_dim).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn modified_lower_equals_hausdorff() {
        let spec = fig2();
        let profile = spec.column_profile();
        assert_eq!(
            modified_lower_dimension(&profile, 2, 3),
            dimension_report(&profile, 2, 3).hausdorff
        );
        let single = CarpetSpec::new(2, 3, [(0, 0)]).unwrap();
        assert_eq!(modified_lower_dimension(&single.column_profile(), 2, 3), 0.0);
    }

    #[test]
    fn rational_ratio_detection() {
        assert!(!log_ratio_is_rational(2, 3));
        assert!(log_ratio_is_rational(2, 4));
        assert!(log_ratio_is_rational(4, 8)); // both powers of 2
        assert!(log_ratio_is_rational(9, 27)); // both powers of 3
        assert!(!log_ratio_is_rational(6, 12));
        assert!(!log_ratio_is_rational(4, 6));
        assert!(log_ratio_is_rational(36, 216)); // both powers of 6
    }

    #[test]
    fn projection_dimension_cases() {
        // dim_H > 1 clips at 1
        assert_eq!(projection_dimension(&fig2()).unwrap(), 1.0);
        // rational case refused
        let r = CarpetSpec::new(2, 4, [(0, 0), (1, 3)]).unwrap();
        assert!(matches!(
            projection_dimension(&r),
            Err(Error::RationalRatio(_))
        ));
        // single-column carpet with dim_H = log 2 / log 3 < 1
        let thin = CarpetSpec::new(2, 3, [(0, 0), (0, 2)]).unwrap();
        let d = projection_dimension(&thin).unwrap();
        assert!((d - 0.6309297535714574).abs() < 1e-12);
    }

    #[test]
    fn outputs_invariant_under_reorder_and_reflection() {
        let spec = fig2();
        let reordered = CarpetSpec::new(2, 3, [(1, 2), (1, 0), (0, 0)]).unwrap();
        // vertical reflection row -> n-1-row keeps the column profile
        let reflected = CarpetSpec::new(2, 3, [(0, 2), (1, 2), (1, 0)]).unwrap();
        let base = dimension_report(&spec.column_profile(), 2, 3);
        for other in [reordered, reflected] {
            let r = dimension_report(&other.column_profile(), 2, 3);
            assert_eq!(base, r);
        }
    }
}
