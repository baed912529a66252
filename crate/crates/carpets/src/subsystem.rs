//! Uniform-fibres subsystems: frequency-constrained word sets, their
//! multinomial counts in log space, the subsystem dimension, and its
//! convergence to the Hausdorff dimension of the ambient carpet.
//!
//! For a measure with weights `p_d` and a frequency parameter `k`, the words
//! of length `l(k) = sum floor(k p_d)` in which digit `d` appears exactly
//! `floor(k p_d)` times generate a carpet on the `m^l(k) x n^l(k)` grid with
//! uniform fibres whose dimension approaches `dim_H` as `k` grows.

use num_bigint::BigUint;
use statrs::function::gamma::ln_gamma;

use crate::carpet::CarpetSpec;
use crate::error::{Error, Result};
use crate::measure::SelfAffineMeasure;

/// Largest word length for which the exact big-integer factorial path is
/// evaluated alongside the log-gamma path.
const EXACT_COUNT_LIMIT: u64 = 512;

/// Digit frequencies `floor(k p_d)` and their sum, the subsystem word length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FloorCounts {
    pub per_digit: Vec<u64>,
    pub word_length: u64,
}

/// Multinomial counts and dimension of the frequency-constrained subsystem.
#[derive(Debug, Clone)]
pub struct SubsystemCounts {
    pub k: u64,
    /// Word length `l(k)`.
    pub word_length: u64,
    /// `ln N(k)`: log of the number of frequency-constrained words.
    pub log_word_count: f64,
    /// `ln M(k)`: log of the number of their column words.
    pub log_column_word_count: f64,
    /// Hausdorff dimension of the subsystem carpet.
    pub dimension: f64,
    /// Exact counts, present when the word length is small enough for
    /// big-integer factorials.
    pub exact: Option<ExactSubsystemCounts>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSubsystemCounts {
    pub word_count: BigUint,
    pub column_word_count: BigUint,
}

/// One row of a convergence table.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub k: u64,
    pub word_length: u64,
    pub dimension: f64,
    /// `dim_H F - dim_H E(k)`, non-negative since the subsystem is a subset.
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub hausdorff: f64,
    pub rows: Vec<(u64, Result<ConvergenceRow>)>,
    /// Smallest listed `k` whose gap drops below the requested epsilon.
    pub first_k_within: Option<u64>,
}

/// Per-digit frequencies `floor(k p_d)` and the word length `l(k)`.
pub fn floor_counts(measure: &SelfAffineMeasure, k: u64) -> Result<FloorCounts> {
    if k == 0 {
        return Err(Error::Domain("frequency parameter k must be at least 1".into()));
    }
    let per_digit: Vec<u64> = measure
        .weights()
        .iter()
        .map(|p| (k as f64 * p).floor() as u64)
        .collect();
    let word_length: u64 = per_digit.iter().sum();
    if word_length == 0 {
        return Err(Error::Degenerate(format!(
            "all digit frequencies floor(k p_d) vanish at k={k}; increase k"
        )));
    }
    Ok(FloorCounts {
        per_digit,
        word_length,
    })
}

/// Multinomial counts `N(k) = l! / prod floor(k p_d)!` and
/// `M(k) = l! / prod (column sums)!`, evaluated via log-gamma, plus the
/// subsystem dimension
/// `log M(k) / (l log m) + log(N(k)/M(k)) / (l log n)`.
pub fn subsystem_counts(measure: &SelfAffineMeasure, k: u64) -> Result<SubsystemCounts> {
    let floors = floor_counts(measure, k)?;
    let l = floors.word_length;
    let spec = measure.spec();

    let mut column_sums = vec![0u64; measure.column_weights().len()];
    for (f, &ci) in floors.per_digit.iter().zip(measure.digit_column()) {
        column_sums[ci] += f;
    }

    let log_l_fact = ln_factorial(l);
    let log_word_count =
        log_l_fact - floors.per_digit.iter().map(|&f| ln_factorial(f)).sum::<f64>();
    let log_column_word_count =
        log_l_fact - column_sums.iter().map(|&s| ln_factorial(s)).sum::<f64>();

    let log_m = (spec.m() as f64).ln();
    let log_n = (spec.n() as f64).ln();
    let lf = l as f64;
    let dimension = log_column_word_count / (lf * log_m)
        + (log_word_count - log_column_word_count) / (lf * log_n);

    let exact = if l <= EXACT_COUNT_LIMIT {
        let l_fact = factorial(l);
        let word_count = floors
            .per_digit
            .iter()
            .fold(l_fact.clone(), |acc, &f| acc / factorial(f));
        let column_word_count = column_sums
            .iter()
            .fold(l_fact, |acc, &s| acc / factorial(s));
        Some(ExactSubsystemCounts {
            word_count,
            column_word_count,
        })
    } else {
        None
    };

    Ok(SubsystemCounts {
        k,
        word_length: l,
        log_word_count,
        log_column_word_count,
        dimension,
        exact,
    })
}

/// Evaluates the subsystem dimension for each listed `k` and reports the gap
/// to the Hausdorff dimension of the ambient carpet.
pub fn convergence_table(
    measure: &SelfAffineMeasure,
    k_list: &[u64],
    epsilon: Option<f64>,
) -> Result<ConvergenceTable> {
    if k_list.is_empty() {
        return Err(Error::Domain("k list must be nonempty".into()));
    }
    let spec = measure.spec();
    let hausdorff =
        crate::dims::dimension_report(&spec.column_profile(), spec.m(), spec.n()).hausdorff;
    let rows: Vec<(u64, Result<ConvergenceRow>)> = k_list
        .iter()
        .map(|&k| {
            let outcome = subsystem_counts(measure, k).map(|c| ConvergenceRow {
                k,
                word_length: c.word_length,
                dimension: c.dimension,
                gap: hausdorff - c.dimension,
            });
            (k, outcome)
        })
        .collect();
    let first_k_within = epsilon.and_then(|eps| {
        rows.iter()
            .filter_map(|(k, r)| r.as_ref().ok().filter(|row| row.gap < eps).map(|_| *k))
            .min()
    });
    Ok(ConvergenceTable {
        hausdorff,
        rows,
        first_k_within,
    })
}

/// Convergence table for a bare carpet, driven by its maximal measure.
pub fn convergence_table_mcmullen(
    spec: &CarpetSpec,
    k_list: &[u64],
    epsilon: Option<f64>,
) -> Result<ConvergenceTable> {
    let measure = SelfAffineMeasure::mcmullen(spec.clone())?;
    convergence_table(&measure, k_list, epsilon)
}

/// Builds the subsystem carpet explicitly: every frequency-constrained word
/// of length `l(k)` becomes a digit of a carpet on the `m^l x n^l` grid.
///
/// The result always has uniform fibres, and its closed-form Hausdorff
/// dimension equals `subsystem_counts(measure, k).dimension`.
pub fn materialize_subsystem(
    measure: &SelfAffineMeasure,
    k: u64,
    cap: u64,
) -> Result<CarpetSpec> {
    let counts = subsystem_counts(measure, k)?;
    let l = counts.word_length;
    let word_count_big = match &counts.exact {
        Some(e) => e.word_count.clone(),
        None => {
            return Err(Error::CapExceeded(format!(
                "word length l(k)={l} is too large to materialize"
            )))
        }
    };
    if word_count_big > BigUint::from(cap) {
        return Err(Error::CapExceeded(format!(
            "subsystem has {word_count_big} words, over the cap of {cap}"
        )));
    }
    let spec = measure.spec();
    let grid_m = checked_grid(spec.m(), l)?;
    let grid_n = checked_grid(spec.n(), l)?;

    let mut remaining = floor_counts(measure, k)?.per_digit;
    let mut word: Vec<usize> = Vec::with_capacity(l as usize);
    let mut digits: Vec<(u64, u64)> = Vec::new();
    compose_words(spec, &mut remaining, &mut word, l as usize, &mut digits);
    debug_assert_eq!(BigUint::from(digits.len()), word_count_big);

    CarpetSpec::new(grid_m, grid_n, digits)
}

/// Recursive multiset-permutation enumeration in lexicographic digit order;
/// each complete word is composed into a digit of the product grid.
fn compose_words(
    spec: &CarpetSpec,
    remaining: &mut Vec<u64>,
    word: &mut Vec<usize>,
    length: usize,
    out: &mut Vec<(u64, u64)>,
) {
    if word.len() == length {
        let mut col: u64 = 0;
        let mut row: u64 = 0;
        for &d in word.iter() {
            let digit = spec.digits()[d];
            col = col * spec.m() + digit.col;
            row = row * spec.n() + digit.row;
        }
        out.push((col, row));
        return;
    }
    for d in 0..remaining.len() {
        if remaining[d] > 0 {
            remaining[d] -= 1;
            word.push(d);
            compose_words(spec, remaining, word, length, out);
            word.pop();
            remaining[d] += 1;
        }
    }
}

fn checked_grid(base: u64, exp: u64) -> Result<u64> {
    u32::try_from(exp)
        .ok()
        .and_then(|e| base.checked_pow(e))
        .ok_or_else(|| {
            Error::CapExceeded(format!(
                "{base}^{exp} does not fit exact integer arithmetic for a materialized grid"
            ))
        })
}

fn ln_factorial(x: u64) -> f64 {
    ln_gamma(x as f64 + 1.0)
}

fn factorial(x: u64) -> BigUint {
    let mut acc = BigUint::from(1u32);
    for i in 2..=x {
        acc *= i;
    }
    acc
}
