//! Carpet construction: validated grid specs, the column structure,
//! cylinder and approximate-square enumeration, and the coding map.
//!
//! A carpet is determined by grid integers `2 <= m < n` and a set of selected
//! cells ("digits"). Digit `(col, row)` indexes the contraction
//! `(x, y) -> ((x + col)/m, (y + row)/n)`, row 0 at the bottom, so depth-`k`
//! cylinders are rectangles of width `m^-k` and height `n^-k` with corners on
//! the exact rational grid.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::error::{Error, Result};

/// Default cap on the number of items any enumeration may produce.
pub const DEFAULT_ENUM_CAP: u64 = 10_000_000;

/// One selected cell of the `m`-by-`n` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Digit {
    pub col: u64,
    pub row: u64,
}

impl Digit {
    pub fn new(col: u64, row: u64) -> Self {
        Digit { col, row }
    }
}

impl From<(u64, u64)> for Digit {
    fn from((col, row): (u64, u64)) -> Self {
        Digit { col, row }
    }
}

/// A validated carpet: grid integers `2 <= m < n` plus a nonempty set of
/// distinct digits, kept sorted by `(col, row)` so equal carpets compare and
/// serialize identically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CarpetSpec {
    m: u64,
    n: u64,
    digits: Vec<Digit>,
}

impl CarpetSpec {
    /// Validates raw grid parameters and digit pairs, returning the
    /// canonical (sorted) spec.
    pub fn new<I, D>(m: u64, n: u64, digits: I) -> Result<Self>
    where
        I: IntoIterator<Item = D>,
        D: Into<Digit>,
    {
        if m < 2 {
            return Err(Error::Grid(format!("m must be at least 2, got {m}")));
        }
        if n <= m {
            return Err(Error::Grid(format!("n must exceed m, got m={m}, n={n}")));
        }
        let mut digits: Vec<Digit> = digits.into_iter().map(Into::into).collect();
        if digits.is_empty() {
            return Err(Error::Digit("digit set must be nonempty".into()));
        }
        for d in &digits {
            if d.col >= m || d.row >= n {
                return Err(Error::Digit(format!(
                    "digit ({}, {}) outside the {m}x{n} grid",
                    d.col, d.row
                )));
            }
        }
        digits.sort();
        if digits.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Digit("digits must be pairwise distinct".into()));
        }
        Ok(CarpetSpec { m, n, digits })
    }

    /// The full `m`-by-`n` grid (attractor is the unit square).
    pub fn full_grid(m: u64, n: u64) -> Result<Self> {
        let digits = (0..m).flat_map(|c| (0..n).map(move |r| Digit::new(c, r)));
        CarpetSpec::new(m, n, digits)
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn digits(&self) -> &[Digit] {
        &self.digits
    }

    /// Number of digits `N` (maps in the defining system).
    pub fn digit_count(&self) -> usize {
        self.digits.len()
    }

    /// Per-column digit counts over the non-empty columns.
    pub fn column_profile(&self) -> ColumnProfile {
        let mut by_col: BTreeMap<u64, u64> = BTreeMap::new();
        for d in &self.digits {
            *by_col.entry(d.col).or_insert(0) += 1;
        }
        let columns: Vec<u64> = by_col.keys().copied().collect();
        let counts: Vec<u64> = by_col.values().copied().collect();
        ColumnProfile {
            columns,
            counts,
            total: self.digits.len() as u64,
        }
    }

    /// True iff every non-empty column holds the same number of digits.
    /// Exactly then all five dimensions of the carpet coincide.
    pub fn is_uniform_fibres(&self) -> bool {
        self.column_profile().is_uniform()
    }

    /// Smallest integer `l` with `m^l >= n^k`, i.e. `ceil(k log n / log m)`,
    /// decided by exact integer comparison rather than floating point.
    ///
    /// This is the horizontal depth at which cylinder columns refine to the
    /// width of a height-`n^-k` approximate square.
    pub fn horizontal_depth(&self, k: u64) -> u64 {
        horizontal_depth(self.m, self.n, k)
    }

    /// Streams the `N^k` depth-`k` cylinders in lexicographic word order.
    pub fn enumerate_cylinders(&self, k: u32) -> Result<impl Iterator<Item = CylinderRect> + '_> {
        self.enumerate_cylinders_capped(k, DEFAULT_ENUM_CAP)
    }

    pub fn enumerate_cylinders_capped(
        &self,
        k: u32,
        cap: u64,
    ) -> Result<impl Iterator<Item = CylinderRect> + '_> {
        if k == 0 {
            return Err(Error::Domain("cylinder depth k must be at least 1".into()));
        }
        let total = counted_within_cap(&[(self.digits.len() as u64, k)], cap)?;
        let x_den = exact_pow(self.m, k)?;
        let y_den = exact_pow(self.n, k)?;
        Ok((0..total).map(move |idx| self.cylinder_from_index(idx, k, x_den, y_den)))
    }

    /// Cylinder of the `idx`-th length-`k` word in lexicographic order.
    pub(crate) fn cylinder_from_index(
        &self,
        idx: u64,
        k: u32,
        x_den: u128,
        y_den: u128,
    ) -> CylinderRect {
        let base = self.digits.len() as u64;
        let mut x_num: u128 = 0;
        let mut y_num: u128 = 0;
        let mut div = base.pow(k - 1);
        let mut rem = idx;
        for _ in 0..k {
            let d = self.digits[(rem / div) as usize];
            rem %= div;
            if div > 1 {
                div /= base;
            }
            x_num = x_num * self.m as u128 + d.col as u128;
            y_num = y_num * self.n as u128 + d.row as u128;
        }
        CylinderRect {
            depth: k,
            x_num,
            x_den,
            y_num,
            y_den,
        }
    }

    /// Cylinder rectangle of an explicit word.
    pub fn cylinder_of_word(&self, word: &SymbolicWord) -> Result<CylinderRect> {
        if word.is_empty() {
            return Err(Error::Domain("word must be nonempty".into()));
        }
        let k = word.len() as u32;
        let x_den = exact_pow(self.m, k)?;
        let y_den = exact_pow(self.n, k)?;
        let mut x_num: u128 = 0;
        let mut y_num: u128 = 0;
        for &letter in word.letters() {
            let d = *self
                .digits
                .get(letter as usize)
                .ok_or_else(|| Error::Domain(format!("letter {letter} out of range")))?;
            x_num = x_num * self.m as u128 + d.col as u128;
            y_num = y_num * self.n as u128 + d.row as u128;
        }
        Ok(CylinderRect {
            depth: k,
            x_num,
            x_den,
            y_num,
            y_den,
        })
    }

    /// Truncated coding map: sends `(d_1, …, d_t)` to
    /// `(sum col_t m^-t, sum row_t n^-t)`, the lower-left corner of the
    /// word's cylinder.
    pub fn code_to_point(&self, word: &SymbolicWord) -> Result<(f64, f64)> {
        if word.is_empty() {
            return Err(Error::Domain("word must be nonempty".into()));
        }
        let mut x = 0.0;
        let mut y = 0.0;
        for &letter in word.letters().iter().rev() {
            let d = *self
                .digits
                .get(letter as usize)
                .ok_or_else(|| Error::Domain(format!("letter {letter} out of range")))?;
            x = (x + d.col as f64) / self.m as f64;
            y = (y + d.row as f64) / self.n as f64;
        }
        Ok((x, y))
    }

    /// Streams the `N^k * M^(l-k)` approximate squares of vertical depth `k`,
    /// lexicographic in (digit prefix, column suffix).
    pub fn approx_squares(&self, k: u32) -> Result<impl Iterator<Item = ApproxSquare> + '_> {
        self.approx_squares_capped(k, DEFAULT_ENUM_CAP)
    }

    pub fn approx_squares_capped(
        &self,
        k: u32,
        cap: u64,
    ) -> Result<impl Iterator<Item = ApproxSquare> + '_> {
        if k == 0 {
            return Err(Error::Domain(
                "approximate-square depth k must be at least 1".into(),
            ));
        }
        let l = self.horizontal_depth(k as u64);
        let suffix_len = (l - k as u64) as u32;
        let m_cols = self.column_profile().column_count() as u64;
        let total = counted_within_cap(
            &[(self.digits.len() as u64, k), (m_cols, suffix_len)],
            cap,
        )?;
        let suffix_total = m_cols.pow(suffix_len);
        Ok((0..total).map(move |idx| {
            let prefix = digits_of_index(idx / suffix_total, self.digits.len() as u64, k);
            let suffix = digits_of_index(idx % suffix_total, m_cols, suffix_len);
            ApproxSquare {
                k,
                l: l as u32,
                prefix,
                suffix,
            }
        }))
    }
}

/// The vector of per-column digit counts `(N_1, …, N_M)` over the non-empty
/// columns in increasing column order, together with the total `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnProfile {
    columns: Vec<u64>,
    counts: Vec<u64>,
    total: u64,
}

impl ColumnProfile {
    /// Number of non-empty columns `M`.
    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    /// Grid indices of the non-empty columns, increasing.
    pub fn columns(&self) -> &[u64] {
        &self.columns
    }

    /// Digits per non-empty column, aligned with `columns()`.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Total digit count `N`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn max_count(&self) -> u64 {
        *self.counts.iter().max().expect("profile is nonempty")
    }

    pub fn min_count(&self) -> u64 {
        *self.counts.iter().min().expect("profile is nonempty")
    }

    /// Position of a grid column among the non-empty columns.
    pub fn index_of(&self, col: u64) -> Option<usize> {
        self.columns.binary_search(&col).ok()
    }

    pub fn is_uniform(&self) -> bool {
        self.counts.iter().all(|&c| c == self.counts[0])
    }
}

/// A finite word of digit indices into `CarpetSpec::digits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicWord {
    letters: Vec<u32>,
}

impl SymbolicWord {
    /// Validates that every letter indexes a digit of an alphabet of the
    /// given size.
    pub fn new(letters: Vec<u32>, alphabet_size: usize) -> Result<Self> {
        if let Some(&bad) = letters.iter().find(|&&l| l as usize >= alphabet_size) {
            return Err(Error::Domain(format!(
                "letter {bad} outside alphabet of size {alphabet_size}"
            )));
        }
        Ok(SymbolicWord { letters })
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

/// A depth-`k` cylinder: the rectangle `[x0, x0 + m^-k] x [y0, y0 + n^-k]`
/// with `x0 = x_num / x_den`, `y0 = y_num / y_den`, `x_den = m^k`,
/// `y_den = n^k`. Corners are exact rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CylinderRect {
    pub depth: u32,
    pub x_num: u128,
    pub x_den: u128,
    pub y_num: u128,
    pub y_den: u128,
}

impl CylinderRect {
    pub fn x0(&self) -> f64 {
        self.x_num as f64 / self.x_den as f64
    }

    pub fn y0(&self) -> f64 {
        self.y_num as f64 / self.y_den as f64
    }

    pub fn width(&self) -> f64 {
        1.0 / self.x_den as f64
    }

    pub fn height(&self) -> f64 {
        1.0 / self.y_den as f64
    }

    /// True iff `other` is contained in `self` (exact integer test).
    pub fn contains(&self, other: &CylinderRect) -> bool {
        // a/b <= c/d  <=>  a*d <= c*b for positive denominators
        let le = |a: u128, b: u128, c: u128, d: u128| a * d <= c * b;
        le(self.x_num, self.x_den, other.x_num, other.x_den)
            && le(other.x_num + 1, other.x_den, self.x_num + 1, self.x_den)
            && le(self.y_num, self.y_den, other.y_num, other.y_den)
            && le(other.y_num + 1, other.y_den, self.y_num + 1, self.y_den)
    }
}

/// An approximate square: a depth-`k` cylinder refined horizontally to depth
/// `l = ceil(k log n / log m)` by a suffix of non-empty-column indices, so its
/// extent is `m^-l` wide and `n^-k` tall with `m^-l <= n^-k < m^-(l-1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ApproxSquare {
    pub k: u32,
    pub l: u32,
    /// Digit indices `d_1 .. d_k`.
    pub prefix: Vec<u32>,
    /// Indices into the non-empty columns (`0..M`) for positions `k+1 .. l`.
    pub suffix: Vec<u32>,
}

/// Exact lower-left corner of an approximate square:
/// `(x_num / m^l, y_num / n^k)`.
pub fn approx_square_rect(
    spec: &CarpetSpec,
    profile: &ColumnProfile,
    square: &ApproxSquare,
) -> Result<(u128, u128, u128, u128)> {
    let x_den = exact_pow(spec.m(), square.l)?;
    let y_den = exact_pow(spec.n(), square.k)?;
    let mut x_num: u128 = 0;
    let mut y_num: u128 = 0;
    for &letter in &square.prefix {
        let d = spec.digits()[letter as usize];
        x_num = x_num * spec.m() as u128 + d.col as u128;
        y_num = y_num * spec.n() as u128 + d.row as u128;
    }
    for &col_idx in &square.suffix {
        let col = profile.columns()[col_idx as usize];
        x_num = x_num * spec.m() as u128 + col as u128;
    }
    Ok((x_num, x_den, y_num, y_den))
}

/// Smallest `l >= 1` with `m^l >= n^k` (for `k >= 1`), via exact big-integer
/// comparison. Floating point only seeds the search.
pub fn horizontal_depth(m: u64, n: u64, k: u64) -> u64 {
    assert!(k >= 1, "horizontal depth requires k >= 1");
    let target = BigUint::from(n).pow(k as u32);
    let guess = (k as f64 * (n as f64).ln() / (m as f64).ln()).ceil() as i64;
    let mut l = guess.saturating_sub(2).max(1) as u64;
    let mut power = BigUint::from(m).pow(l as u32);
    while power < target {
        power *= m;
        l += 1;
    }
    while l > 1 && &power / m >= target {
        power /= m;
        l -= 1;
    }
    l
}

/// Word digits of a linear index, most significant first (empty for `len==0`).
fn digits_of_index(mut idx: u64, base: u64, len: u32) -> Vec<u32> {
    let mut out = vec![0u32; len as usize];
    for slot in out.iter_mut().rev() {
        *slot = (idx % base) as u32;
        idx /= base;
    }
    out
}

/// Product of `base^exp` factors, checked against the cap.
pub(crate) fn counted_within_cap(factors: &[(u64, u32)], cap: u64) -> Result<u64> {
    let mut total: u128 = 1;
    for &(base, exp) in factors {
        for _ in 0..exp {
            total = total
                .checked_mul(base as u128)
                .ok_or_else(|| cap_error(cap))?;
            if total > cap as u128 {
                return Err(cap_error(cap));
            }
        }
    }
    Ok(total as u64)
}

fn cap_error(cap: u64) -> Error {
    Error::CapExceeded(format!(
        "enumeration would exceed the cap of {cap} items; lower the depth or raise the cap"
    ))
}

/// `base^exp` in u128, erring when the exact-arithmetic range runs out.
pub(crate) fn exact_pow(base: u64, exp: u32) -> Result<u128> {
    (base as u128).checked_pow(exp).ok_or_else(|| {
        Error::CapExceeded(format!(
            "{base}^{exp} exceeds the exact integer range of the covering kernels"
        ))
    })
}

/// Cell indices `c` (of `cells` half-open cells subdividing `[0,1]`) whose
/// cell `[c/cells, (c+1)/cells)` overlaps the interval
/// `(num/den, (num+1)/den)` with positive length. Returns `(lo, hi)`
/// inclusive; touching only at an endpoint does not count.
pub(crate) fn cell_cover_range(num: u128, den: u128, cells: u64) -> Result<(u64, u64)> {
    let cells_u = cells as u128;
    let scaled_lo = num
        .checked_mul(cells_u)
        .ok_or_else(|| Error::CapExceeded("cell index arithmetic overflow".into()))?;
    let scaled_hi = (num + 1)
        .checked_mul(cells_u)
        .ok_or_else(|| Error::CapExceeded("cell index arithmetic overflow".into()))?;
    let lo = (scaled_lo / den) as u64;
    let hi = if scaled_hi % den == 0 {
        (scaled_hi / den - 1) as u64
    } else {
        (scaled_hi / den) as u64
    };
    Ok((lo, hi.min(cells - 1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn fig2() -> CarpetSpec {
        CarpetSpec::new(2, 3, [(0, 0), (1, 0), (1, 2)]).unwrap()
    }

    #[test]
    fn validates_and_canonicalizes() {
        let spec = CarpetSpec::new(2, 3, [(1, 2), (0, 0), (1, 0)]).unwrap();
        assert_eq!(spec, fig2());
        assert_eq!(spec.digit_count(), 3);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(
            CarpetSpec::new(3, 3, [(0, 0)]),
            Err(Error::Grid(_))
        ));
        assert!(matches!(
            CarpetSpec::new(1, 3, [(0, 0)]),
            Err(Error::Grid(_))
        ));
        assert!(matches!(
            CarpetSpec::new(3, 2, [(0, 0)]),
            Err(Error::Grid(_))
        ));
    }

    #[test]
    fn rejects_bad_digits() {
        assert!(matches!(
            CarpetSpec::new(2, 3, [(0, 0), (0, 0)]),
            Err(Error::Digit(_))
        ));
        assert!(matches!(
            CarpetSpec::new(2, 3, [(2, 0)]),
            Err(Error::Digit(_))
        ));
        assert!(matches!(
            CarpetSpec::new(2, 3, [(0, 3)]),
            Err(Error::Digit(_))
        ));
        let empty: [(u64, u64); 0] = [];
        assert!(matches!(
            CarpetSpec::new(2, 3, empty),
            Err(Error::Digit(_))
        ));
    }

    #[test]
    fn column_profile_fig2() {
        let p = fig2().column_profile();
        assert_eq!(p.column_count(), 2);
        assert_eq!(p.counts(), &[1, 2]);
        assert_eq!(p.total(), 3);
        assert_eq!(p.index_of(1), Some(1));
        assert_eq!(p.index_of(7), None);
    }

    #[test]
    fn column_profile_edges() {
        let full = CarpetSpec::full_grid(2, 3).unwrap();
        let p = full.column_profile();
        assert_eq!((p.column_count(), p.counts(), p.total()), (2, &[3, 3][..], 6));
        assert!(full.is_uniform_fibres());

        let single = CarpetSpec::new(2, 3, [(0, 0)]).unwrap();
        let p = single.column_profile();
        assert_eq!((p.column_count(), p.counts(), p.total()), (1, &[1][..], 1));
        assert!(single.is_uniform_fibres());

        assert!(!fig2().is_uniform_fibres());
        assert!(CarpetSpec::new(2, 3, [(0, 0), (1, 1)])
            .unwrap()
            .is_uniform_fibres());
    }

    #[test]
    fn horizontal_depth_exact() {
        // 2^l >= 3^k: k=1 -> 2, k=2 -> 4 (16 >= 9), k=5 -> 8 (256 >= 243)
        assert_eq!(horizontal_depth(2, 3, 1), 2);
        assert_eq!(horizontal_depth(2, 3, 2), 4);
        assert_eq!(horizontal_depth(2, 3, 5), 8);
        assert_eq!(horizontal_depth(2, 3, 1000), 1585);
        // rational ratio: 2^l >= 4^k exactly at l = 2k
        assert_eq!(horizontal_depth(2, 4, 3), 6);
        // m^l and n^k never tie here: 3^l >= 5^2 -> 27 < 25? no: 3^3=27 >= 25
        assert_eq!(horizontal_depth(3, 5, 2), 3);
    }

    #[test]
    fn cylinders_level_one_are_the_digits() {
        let spec = fig2();
        let rects: Vec<_> = spec.enumerate_cylinders(1).unwrap().collect();
        assert_eq!(rects.len(), 3);
        for r in &rects {
            assert_eq!(r.x_den, 2);
            assert_eq!(r.y_den, 3);
        }
        assert_eq!((rects[0].x_num, rects[0].y_num), (0, 0));
        assert_eq!((rects[1].x_num, rects[1].y_num), (1, 0));
        assert_eq!((rects[2].x_num, rects[2].y_num), (1, 2));
    }

    /// Brute-force oracle: compose the affine maps of a word by hand and
    /// compare against the streamed corner arithmetic.
    #[test]
    fn cylinders_level_two_match_map_composition() {
        let spec = fig2();
        let rects: Vec<_> = spec.enumerate_cylinders(2).unwrap().collect();
        assert_eq!(rects.len(), 9);
        let mut expected = Vec::new();
        for a in spec.digits() {
            for b in spec.digits() {
                // S_a(S_b([0,1]^2)) has corner (a.col/m + b.col/m^2, ...)
                let x = (a.col * 2 + b.col, 4u64);
                let y = (a.row * 3 + b.row, 9u64);
                expected.push((x, y));
            }
        }
        for (r, (x, y)) in rects.iter().zip(expected) {
            assert_eq!((r.x_num as u64, r.x_den as u64), x);
            assert_eq!((r.y_num as u64, r.y_den as u64), y);
            assert_eq!(r.width(), 0.25);
            assert_eq!(r.height(), 1.0 / 9.0);
        }
    }

    #[test]
    fn cylinder_cap_and_domain() {
        let spec = fig2();
        assert!(matches!(
            spec.enumerate_cylinders_capped(20, 1000).err(),
            Some(Error::CapExceeded(_))
        ));
        assert!(matches!(
            spec.enumerate_cylinders(0).err(),
            Some(Error::Domain(_))
        ));
    }

    #[test]
    fn cylinder_nesting() {
        let spec = fig2();
        let parents: Vec<_> = spec.enumerate_cylinders(2).unwrap().collect();
        for child in spec.enumerate_cylinders(3).unwrap() {
            assert!(
                parents.iter().any(|p| p.contains(&child)),
                "depth-3 cylinder not nested in any depth-2 cylinder"
            );
        }
    }

    #[test]
    fn code_to_point_examples() {
        let spec = fig2();
        // fixed point of the (0,0) map
        let w = SymbolicWord::new(vec![0; 8], 3).unwrap();
        assert_eq!(spec.code_to_point(&w).unwrap(), (0.0, 0.0));
        // single letter (1,2): corner (1/2, 2/3)
        let w = SymbolicWord::new(vec![2], 3).unwrap();
        let (x, y) = spec.code_to_point(&w).unwrap();
        assert_eq!(x, 0.5);
        assert!((y - 2.0 / 3.0).abs() < 1e-15);
        // (1,2),(1,2): (1/2 + 1/4, 2/3 + 2/9) = (3/4, 8/9)
        let w = SymbolicWord::new(vec![2, 2], 3).unwrap();
        let (x, y) = spec.code_to_point(&w).unwrap();
        assert!((x - 0.75).abs() < 1e-15);
        assert!((y - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn code_to_point_lies_in_prefix_cylinders() {
        let spec = fig2();
        let w = SymbolicWord::new(vec![2, 0, 1, 2, 1], 3).unwrap();
        let (x, y) = spec.code_to_point(&w).unwrap();
        for plen in 1..=w.len() {
            let prefix = SymbolicWord::new(w.letters()[..plen].to_vec(), 3).unwrap();
            let rect = spec.cylinder_of_word(&prefix).unwrap();
            assert!(rect.x0() <= x && x <= rect.x0() + rect.width());
            assert!(rect.y0() <= y && y <= rect.y0() + rect.height());
        }
    }

    #[test]
    fn word_validation() {
        assert!(SymbolicWord::new(vec![0, 3], 3).is_err());
        let w = SymbolicWord::new(vec![], 3).unwrap();
        assert!(matches!(
            fig2().code_to_point(&w),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn approx_square_counts() {
        let spec = fig2();
        // k=2: l=4, 3^2 * 2^2 = 36 distinct squares
        let squares: Vec<_> = spec.approx_squares(2).unwrap().collect();
        assert_eq!(squares.len(), 36);
        let profile = spec.column_profile();
        let corners: std::collections::HashSet<_> = squares
            .iter()
            .map(|s| approx_square_rect(&spec, &profile, s).unwrap())
            .collect();
        assert_eq!(corners.len(), 36, "squares must be pairwise distinct");
        for s in &squares {
            assert_eq!((s.k, s.l), (2, 4));
        }

        // full grid, k=1: l=2, 6 * 2 = 12
        let full = CarpetSpec::full_grid(2, 3).unwrap();
        assert_eq!(full.approx_squares(1).unwrap().count(), 12);

        // single-digit carpet: exactly one square at every depth
        let single = CarpetSpec::new(2, 3, [(0, 0)]).unwrap();
        for k in 1..=4 {
            assert_eq!(single.approx_squares(k).unwrap().count(), 1);
        }
    }

    #[test]
    fn approx_square_geometry_is_square_like() {
        let spec = fig2();
        let profile = spec.column_profile();
        let sq = spec.approx_squares(2).unwrap().next().unwrap();
        let (_, x_den, _, y_den) = approx_square_rect(&spec, &profile, &sq).unwrap();
        // width m^-l <= height n^-k < m * width
        assert!(x_den >= y_den);
        assert!(y_den > x_den / spec.m() as u128);
    }

    #[test]
    fn cell_cover_range_openness() {
        // interval (0, 1/2) over 6 cells covers cells 0..2 (boundary 3 excluded)
        assert_eq!(cell_cover_range(0, 2, 6).unwrap(), (0, 2));
        // interval (1/2, 1) covers cells 3..5
        assert_eq!(cell_cover_range(1, 2, 6).unwrap(), (3, 5));
        // interval (1/3, 2/3) over 2 cells straddles both
        assert_eq!(cell_cover_range(1, 3, 2).unwrap(), (0, 1));
    }
}
