//! Empirical densities for the observations: histogram bins, Parzen window
//! counts or k-nearest-neighbour balls, plus the bin-count rules and the
//! integer golden-section search used to pick `v` or `k`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{round_half_up, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PreprocessingKind {
    #[serde(rename = "histogram")]
    Histogram,
    #[serde(rename = "Parzen window")]
    ParzenWindow,
    #[serde(rename = "k-nearest neighbour")]
    KNearestNeighbour,
}

impl PreprocessingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PreprocessingKind::Histogram => "histogram",
            PreprocessingKind::ParzenWindow => "Parzen window",
            PreprocessingKind::KNearestNeighbour => "k-nearest neighbour",
        }
    }
}

impl fmt::Display for PreprocessingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PreprocessingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "histogram" => Ok(Self::Histogram),
            "Parzen window" | "parzen-window" => Ok(Self::ParzenWindow),
            "k-nearest neighbour" | "k-nearest-neighbour" => Ok(Self::KNearestNeighbour),
            _ => Err(Error::UnknownName {
                kind: "preprocessing",
                name: s.to_owned(),
            }),
        }
    }
}

/// `round(1 + log2 n)`.
pub fn sturges_rule(n: usize) -> usize {
    round_half_up(1.0 + (n.max(1) as f64).log2()).max(1)
}

/// `round(10 log10 n)`, at least 1.
pub fn log10_rule(n: usize) -> usize {
    round_half_up(10.0 * (n.max(1) as f64).log10()).max(1)
}

/// `round(2 sqrt n)`, at least 1.
pub fn rootn_rule(n: usize) -> usize {
    round_half_up(2.0 * (n.max(1) as f64).sqrt()).max(1)
}

/// `round(sqrt n)`.
pub fn knn_thumb(n: usize) -> usize {
    round_half_up((n.max(1) as f64).sqrt()).max(1)
}

/// Ascending candidate values for `v` or `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KGrid(Vec<usize>);

impl KGrid {
    pub fn new(mut candidates: Vec<usize>) -> Result<Self> {
        candidates.sort_unstable();
        candidates.dedup();
        if candidates.is_empty() || candidates[0] == 0 {
            return Err(Error::InvalidArgument(
                "K grid needs at least one positive value".into(),
            ));
        }
        Ok(Self(candidates))
    }

    /// Ten geometrically spaced values from Sturges' rule to the RootN rule,
    /// clamped to `[lo, hi]`.
    pub fn auto(n: usize, lo: usize, hi: usize) -> Self {
        let a = sturges_rule(n).clamp(lo, hi) as f64;
        let b = rootn_rule(n).clamp(lo, hi) as f64;
        let mut v: Vec<usize> = (0..10)
            .map(|i| round_half_up(a * (b / a).powf(i as f64 / 9.0)).clamp(lo, hi))
            .collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }
}

/// One occupied histogram bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Bin {
    /// Integer cell coordinates relative to the origin.
    pub cell: Vec<i64>,
    /// Bin centre.
    pub position: Vec<f64>,
    pub frequency: usize,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramGrid {
    pub v: usize,
    pub h: Vec<f64>,
    pub origin: Vec<f64>,
    pub ymin: Vec<f64>,
    pub ymax: Vec<f64>,
    pub n: usize,
    pub bins: Vec<Bin>,
}

impl HistogramGrid {
    pub fn volume(&self) -> f64 {
        self.h.iter().product()
    }
}

/// Resolves the binning range: supplied bounds widened to cover the data.
fn resolve_range(data: &Dataset, ymin: Option<&[f64]>, ymax: Option<&[f64]>) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = data.d();
    for b in [ymin, ymax].into_iter().flatten() {
        if b.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: b.len(),
            });
        }
    }
    let bounds = data.bounds();
    let lo: Vec<f64> = (0..d)
        .map(|i| ymin.map_or(bounds[i].0, |m| m[i].min(bounds[i].0)))
        .collect();
    let hi: Vec<f64> = (0..d)
        .map(|i| ymax.map_or(bounds[i].1, |m| m[i].max(bounds[i].1)))
        .collect();
    for i in 0..d {
        if !(hi[i] > lo[i]) {
            return Err(Error::DegenerateRange(i));
        }
    }
    Ok((lo, hi))
}

/// Bins the observations on a regular grid with `v` bins across the range.
///
/// Bins are half-open `[lower, upper)` except the topmost, which is closed.
/// With `y0` the edges are `y0 + m h` for integer `m`.
pub fn build_histogram(
    data: &Dataset,
    v: usize,
    y0: Option<&[f64]>,
    ymin: Option<&[f64]>,
    ymax: Option<&[f64]>,
) -> Result<HistogramGrid> {
    if v == 0 {
        return Err(Error::InvalidArgument("v must be positive".into()));
    }
    let d = data.d();
    let (lo, hi) = resolve_range(data, ymin, ymax)?;
    let h: Vec<f64> = (0..d).map(|i| (hi[i] - lo[i]) / v as f64).collect();
    if let Some(o) = y0 {
        if o.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: o.len(),
            });
        }
    }
    let origin: Vec<f64> = y0.map_or_else(|| lo.clone(), <[f64]>::to_vec);
    let top: Vec<i64> = (0..d).map(|i| ((hi[i] - origin[i]) / h[i]).ceil() as i64 - 1).collect();

    let mut counts: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut cell = vec![0i64; d];
    for row in data.rows() {
        for i in 0..d {
            let mut c = ((row[i] - origin[i]) / h[i]).floor() as i64;
            if y0.is_none() {
                c = c.clamp(0, v as i64 - 1);
            } else if c > top[i] && row[i] <= origin[i] + (top[i] + 1) as f64 * h[i] {
                c = top[i];
            }
            cell[i] = c;
        }
        *counts.entry(cell.clone()).or_insert(0) += 1;
    }

    let n = data.n();
    let volume: f64 = h.iter().product();
    let mut cells: Vec<(Vec<i64>, usize)> = counts.into_iter().collect();
    cells.sort_unstable();
    let bins = cells
        .into_iter()
        .map(|(cell, k)| Bin {
            position: (0..d).map(|i| origin[i] + (cell[i] as f64 + 0.5) * h[i]).collect(),
            cell,
            frequency: k,
            density: k as f64 / (n as f64 * volume),
        })
        .collect();
    Ok(HistogramGrid {
        v,
        h,
        origin,
        ymin: lo,
        ymax: hi,
        n,
        bins,
    })
}

/// Per-observation empirical densities (Parzen window or k-NN).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPoints {
    pub kind: PreprocessingKind,
    /// `v` for the Parzen window, `k` for nearest neighbours.
    pub parameter: usize,
    pub h: Vec<f64>,
    pub ymin: Vec<f64>,
    pub ymax: Vec<f64>,
    pub d: usize,
    pub positions: Vec<f64>,
    pub densities: Vec<f64>,
    /// Half-widths of the neighbourhood box of every point, row-major.
    pub half_widths: Vec<f64>,
}

impl DensityPoints {
    pub fn n(&self) -> usize {
        self.densities.len()
    }

    pub fn position(&self, j: usize) -> &[f64] {
        &self.positions[j * self.d..(j + 1) * self.d]
    }
}

/// Counts, for every observation, the observations inside the axis-aligned
/// box of half-widths `h_i / 2` around it (itself included).
pub fn parzen_density(data: &Dataset, v: usize) -> Result<DensityPoints> {
    parzen_density_with(data, v, None, None)
}

pub fn parzen_density_with(
    data: &Dataset,
    v: usize,
    ymin: Option<&[f64]>,
    ymax: Option<&[f64]>,
) -> Result<DensityPoints> {
    if v == 0 {
        return Err(Error::InvalidArgument("v must be positive".into()));
    }
    let d = data.d();
    let n = data.n();
    let (lo, hi, h) = if n == 1 && ymin.is_none() && ymax.is_none() {
        // A single observation has no spread; unit widths keep f finite.
        let lo = data.row(0).to_vec();
        let hi: Vec<f64> = lo.iter().map(|x| x + v as f64).collect();
        (lo, hi, vec![1.0; d])
    } else {
        let (lo, hi) = resolve_range(data, ymin, ymax)?;
        let h: Vec<f64> = (0..d).map(|i| (hi[i] - lo[i]) / v as f64).collect();
        (lo, hi, h)
    };
    let half: Vec<f64> = h.iter().map(|x| 0.5 * x).collect();

    // Cells of width h: every neighbour of a point lies in the 3^d block
    // around the point's own cell.
    let cell_of = |row: &[f64]| -> Vec<i64> { (0..d).map(|i| ((row[i] - lo[i]) / h[i]).floor() as i64).collect() };
    let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (j, row) in data.rows().enumerate() {
        cells.entry(cell_of(row)).or_default().push(j);
    }
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
        .map(|mut code| {
            (0..d)
                .map(|_| {
                    let o = (code % 3) as i64 - 1;
                    code /= 3;
                    o
                })
                .collect()
        })
        .collect();

    let volume: f64 = h.iter().product();
    let mut densities = Vec::with_capacity(n);
    let mut probe = vec![0i64; d];
    for row in data.rows() {
        let base = cell_of(row);
        let mut count = 0usize;
        for off in &offsets {
            for i in 0..d {
                probe[i] = base[i] + off[i];
            }
            if let Some(members) = cells.get(&probe) {
                count += members
                    .iter()
                    .filter(|&&m| {
                        let other = data.row(m);
                        (0..d).all(|i| (other[i] - row[i]).abs() <= half[i])
                    })
                    .count();
            }
        }
        densities.push(count as f64 / (n as f64 * volume));
    }
    Ok(DensityPoints {
        kind: PreprocessingKind::ParzenWindow,
        parameter: v,
        half_widths: half.repeat(n),
        h,
        ymin: lo,
        ymax: hi,
        d,
        positions: data.values().to_vec(),
        densities,
    })
}

/// Volume of the unit d-ball.
fn unit_ball_volume(d: usize) -> f64 {
    // V_d = pi^{d/2} / Gamma(d/2 + 1), via the recursion V_d = 2 pi V_{d-2} / d.
    let mut v = if d.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if d.is_multiple_of(2) { 2 } else { 3 };
    while k <= d {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

/// `f_j = k / (n V_j)` with `V_j` the ball reaching the k-th nearest
/// neighbour (the point itself counts as the first), measured after dividing
/// each coordinate by its range.
///
/// Distances are computed by brute force, so cost grows as `n²`.
pub fn knn_density(data: &Dataset, k: usize) -> Result<DensityPoints> {
    knn_density_with(data, k, None, None)
}

pub fn knn_density_with(data: &Dataset, k: usize, ymin: Option<&[f64]>, ymax: Option<&[f64]>) -> Result<DensityPoints> {
    let n = data.n();
    let d = data.d();
    if k < 2 || k > n {
        return Err(Error::InvalidArgument(format!("k must lie in 2..={n}, got {k}")));
    }
    let (lo, hi) = resolve_range(data, ymin, ymax)?;
    let range: Vec<f64> = (0..d).map(|i| hi[i] - lo[i]).collect();
    let scaled: Vec<f64> = data
        .values()
        .chunks_exact(d)
        .flat_map(|r| (0..d).map(|i| r[i] / range[i]).collect::<Vec<_>>())
        .collect();
    let unit = unit_ball_volume(d);
    let scale_volume: f64 = range.iter().product();
    let mut dist = vec![0.0; n];
    let mut densities = Vec::with_capacity(n);
    let mut radii = Vec::with_capacity(n);
    for j in 0..n {
        let a = &scaled[j * d..(j + 1) * d];
        for (m, slot) in dist.iter_mut().enumerate() {
            let b = &scaled[m * d..(m + 1) * d];
            *slot = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        }
        let (_, kth, _) = dist.select_nth_unstable_by(k - 1, f64::total_cmp);
        let r = kth.sqrt();
        if !(r > 0.0) {
            return Err(Error::DuplicatePointsExceedK(j));
        }
        radii.push(r);
        densities.push(k as f64 / (n as f64 * unit * r.powi(d as i32) * scale_volume));
    }
    let mean_r = radii.iter().sum::<f64>() / n as f64;
    let mut half_widths = Vec::with_capacity(n * d);
    for r in &radii {
        half_widths.extend(range.iter().map(|w| r * w));
    }
    Ok(DensityPoints {
        kind: PreprocessingKind::KNearestNeighbour,
        parameter: k,
        h: range.iter().map(|w| 2.0 * mean_r * w).collect(),
        ymin: lo,
        ymax: hi,
        d,
        positions: data.values().to_vec(),
        densities,
        half_widths,
    })
}

/// Either preprocessed representation, viewed as weighted support points.
#[derive(Debug, Clone, PartialEq)]
pub enum Preprocessed {
    Histogram(HistogramGrid),
    Points(DensityPoints),
}

impl Preprocessed {
    pub fn build(
        data: &Dataset,
        kind: PreprocessingKind,
        parameter: usize,
        y0: Option<&[f64]>,
        ymin: Option<&[f64]>,
        ymax: Option<&[f64]>,
    ) -> Result<Self> {
        Ok(match kind {
            PreprocessingKind::Histogram => Self::Histogram(build_histogram(data, parameter, y0, ymin, ymax)?),
            PreprocessingKind::ParzenWindow => Self::Points(parzen_density_with(data, parameter, ymin, ymax)?),
            PreprocessingKind::KNearestNeighbour => Self::Points(knn_density_with(data, parameter, ymin, ymax)?),
        })
    }

    pub fn kind(&self) -> PreprocessingKind {
        match self {
            Self::Histogram(_) => PreprocessingKind::Histogram,
            Self::Points(p) => p.kind,
        }
    }

    /// `v` or `k`.
    pub fn parameter(&self) -> usize {
        match self {
            Self::Histogram(g) => g.v,
            Self::Points(p) => p.parameter,
        }
    }

    pub fn d(&self) -> usize {
        match self {
            Self::Histogram(g) => g.h.len(),
            Self::Points(p) => p.d,
        }
    }

    /// Number of support entries (occupied bins or observations).
    pub fn len(&self) -> usize {
        match self {
            Self::Histogram(g) => g.bins.len(),
            Self::Points(p) => p.n(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Total number of observations `n`.
    pub fn n(&self) -> usize {
        match self {
            Self::Histogram(g) => g.n,
            Self::Points(p) => p.n(),
        }
    }

    pub fn h(&self) -> &[f64] {
        match self {
            Self::Histogram(g) => &g.h,
            Self::Points(p) => &p.h,
        }
    }

    pub fn ymin(&self) -> &[f64] {
        match self {
            Self::Histogram(g) => &g.ymin,
            Self::Points(p) => &p.ymin,
        }
    }

    pub fn ymax(&self) -> &[f64] {
        match self {
            Self::Histogram(g) => &g.ymax,
            Self::Points(p) => &p.ymax,
        }
    }

    #[inline]
    pub fn position(&self, j: usize) -> &[f64] {
        match self {
            Self::Histogram(g) => &g.bins[j].position,
            Self::Points(p) => p.position(j),
        }
    }

    /// `k_j`: bin count, or 1 per observation.
    #[inline]
    pub fn frequency(&self, j: usize) -> f64 {
        match self {
            Self::Histogram(g) => g.bins[j].frequency as f64,
            Self::Points(_) => 1.0,
        }
    }

    /// Empirical density `f_j`.
    #[inline]
    pub fn density(&self, j: usize) -> f64 {
        match self {
            Self::Histogram(g) => g.bins[j].density,
            Self::Points(p) => p.densities[j],
        }
    }

    /// Empirical density carried by one unit of frequency at entry `j`.
    #[inline]
    pub fn unit_density(&self, j: usize) -> f64 {
        match self {
            Self::Histogram(g) => 1.0 / (g.n as f64 * g.volume()),
            Self::Points(p) => p.densities[j],
        }
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.frequency(j)).collect()
    }

    /// Entries inside the neighbourhood slice through entry `m` along
    /// dimension `i`: `(in_slice, in_window)` for every entry `j`.
    ///
    /// For bins the slice is the row of bins sharing every cell coordinate
    /// with `m` except `i`, and the window is bin `m` itself. For points both
    /// use the neighbourhood box of `m`.
    pub(crate) fn slice_membership(&self, m: usize, i: usize, j: usize) -> (bool, bool) {
        match self {
            Self::Histogram(g) => {
                let a = &g.bins[m].cell;
                let b = &g.bins[j].cell;
                let in_slice = (0..a.len()).all(|t| t == i || a[t] == b[t]);
                (in_slice, in_slice && a[i] == b[i])
            }
            Self::Points(p) => {
                let d = p.d;
                let a = p.position(m);
                let b = p.position(j);
                let w = &p.half_widths[m * d..(m + 1) * d];
                let in_slice = (0..d).all(|t| t == i || (a[t] - b[t]).abs() <= w[t]);
                (in_slice, in_slice && (a[i] - b[i]).abs() <= w[i])
            }
        }
    }

    /// Window width along dimension `i` around entry `m`.
    pub(crate) fn window_width(&self, m: usize, i: usize) -> f64 {
        match self {
            Self::Histogram(g) => g.h[i],
            Self::Points(p) => 2.0 * p.half_widths[m * p.d + i],
        }
    }
}

/// The global mode among entries with positive residual frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalMode {
    pub index: usize,
    pub position: Vec<f64>,
    /// Residual empirical density at the mode.
    pub density: f64,
    /// Residual frequency at the mode.
    pub frequency: f64,
}

/// Highest residual empirical density, lowest index on ties.
///
/// `residual[j]` is the frequency of entry `j` not yet attributed to any
/// component; pass [`Preprocessed::frequencies`] for the unmasked view.
pub fn global_mode(prep: &Preprocessed, residual: &[f64]) -> Result<GlobalMode> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &r) in residual.iter().enumerate() {
        if r <= 0.0 {
            continue;
        }
        let f = r * prep.unit_density(j);
        if best.is_none_or(|(_, bf)| f > bf) {
            best = Some((j, f));
        }
    }
    let (index, density) = best.ok_or(Error::EmptySelection)?;
    Ok(GlobalMode {
        index,
        position: prep.position(index).to_vec(),
        density,
        frequency: residual[index],
    })
}

/// Integer golden-section search inside a bracket `(low, mid, high)` whose
/// middle value is not worse than its ends. Returns the best `(K, IC)`.
///
/// Every `K` is evaluated at most once. Ties go to the smaller `K`.
pub fn golden_section_refine<F>(bracket: (usize, usize, usize), mut evaluate: F) -> Result<(usize, f64)>
where
    F: FnMut(usize) -> f64,
{
    let (low, mid, high) = bracket;
    if !(low <= mid && mid <= high) {
        return Err(Error::InvalidBracket { low, mid, high });
    }
    let mut memo: HashMap<usize, f64> = HashMap::new();
    let mut eval = |k: usize, memo: &mut HashMap<usize, f64>| -> f64 { *memo.entry(k).or_insert_with(|| evaluate(k)) };
    let (mut a, mut b, mut c) = (low, mid, high);
    let fb0 = eval(b, &mut memo);
    if c - a <= 2 {
        return Ok((b, fb0));
    }
    let fa = eval(a, &mut memo);
    let fc = eval(c, &mut memo);
    if fb0 > fa.min(fc) || a == b || b == c {
        return Err(Error::InvalidBracket { low, mid, high });
    }
    let better = |x: usize, fx: f64, y: usize, fy: f64| fx < fy || (fx == fy && x < y);
    const RATIO: f64 = 0.381_966_011_250_105_1;
    while c - a > 2 {
        let fb = eval(b, &mut memo);
        let left = b - a;
        let right = c - b;
        let x = if left > right {
            let step = ((left as f64 * RATIO).round() as usize).clamp(1, left - 1);
            b - step
        } else {
            let step = ((right as f64 * RATIO).round() as usize).clamp(1, right - 1);
            b + step
        };
        let fx = eval(x, &mut memo);
        if x < b {
            if better(x, fx, b, fb) {
                c = b;
                b = x;
            } else {
                a = x;
            }
        } else if better(x, fx, b, fb) {
            a = b;
            b = x;
        } else {
            c = x;
        }
    }
    Ok((b, eval(b, &mut memo)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ds1(xs: &[f64]) -> Dataset {
        Dataset::new("t", 1, xs.to_vec()).unwrap()
    }

    #[test]
    fn bin_count_rules() {
        assert_eq!(sturges_rule(1), 1);
        assert_eq!(sturges_rule(50000), 17);
        assert_eq!(sturges_rule(1024), 11);
        assert_eq!(log10_rule(50000), 47);
        assert_eq!(rootn_rule(50000), 447);
        assert_eq!(rootn_rule(1), 2);
        assert_eq!(knn_thumb(100), 10);
        assert_eq!(knn_thumb(50000), 224);
        assert_eq!(knn_thumb(2), 1);
    }

    #[test]
    fn auto_grid_spans_rules() {
        let g = KGrid::auto(50000, 1, usize::MAX);
        assert_eq!(g.values().first(), Some(&17));
        assert_eq!(g.values().last(), Some(&447));
        assert!(g.values().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g.values().len(), 10);
    }

    #[test]
    fn histogram_hand_binning() {
        let g = build_histogram(&ds1(&[0.1, 0.4, 0.6, 0.9]), 2, None, Some(&[0.0]), Some(&[1.0])).unwrap();
        assert_eq!(g.bins.len(), 2);
        assert_eq!(g.bins[0].position, vec![0.25]);
        assert_eq!(g.bins[1].position, vec![0.75]);
        assert_eq!(g.bins[0].frequency, 2);
        assert_abs_diff_eq!(g.bins[0].density, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.bins[1].density, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn histogram_topmost_bin_is_closed() {
        let g = build_histogram(&ds1(&[0.0, 0.5, 1.0]), 2, None, None, None).unwrap();
        let total: usize = g.bins.iter().map(|b| b.frequency).sum();
        assert_eq!(total, 3);
        assert_eq!(g.bins.len(), 2);
        assert_eq!(g.bins[1].frequency, 2);
    }

    #[test]
    fn histogram_identical_points() {
        let data = Dataset::new("t", 2, vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0]).unwrap();
        assert!(matches!(
            build_histogram(&data, 3, None, None, None),
            Err(Error::DegenerateRange(0))
        ));
        let g = build_histogram(&data, 3, None, Some(&[0.0, 0.0]), Some(&[3.0, 3.0])).unwrap();
        assert_eq!(g.bins.len(), 1);
        assert_eq!(g.bins[0].frequency, 3);
    }

    #[test]
    fn histogram_with_origin() {
        let g = build_histogram(&ds1(&[0.0, 1.0, 2.0, 3.0, 4.0]), 4, Some(&[-0.5]), None, None).unwrap();
        // h = 1, edges at -0.5 + m
        let centers: Vec<f64> = g.bins.iter().map(|b| b.position[0]).collect();
        assert_eq!(centers, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn parzen_examples() {
        let p = parzen_density(&ds1(&[3.0]), 4).unwrap();
        assert_abs_diff_eq!(p.densities[0], 1.0 / p.h[0], epsilon = 1e-15);

        let p = parzen_density(&ds1(&[0.0, 0.0, 0.0, 10.0]), 5).unwrap();
        // h = 2; the three coincident points see each other
        assert_abs_diff_eq!(p.densities[0], 3.0 / (4.0 * 2.0), epsilon = 1e-15);
        assert_abs_diff_eq!(p.densities[3], 1.0 / (4.0 * 2.0), epsilon = 1e-15);

        let p = parzen_density(&ds1(&[0.0, 5.0, 10.0]), 10).unwrap();
        for f in &p.densities {
            assert_abs_diff_eq!(*f, 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn parzen_matches_brute_force() {
        let mut vals = Vec::new();
        for j in 0..200 {
            let t = j as f64;
            vals.push((t * 0.37).sin() * 3.0 + (t * 0.011).cos());
            vals.push((t * 0.71).cos() * 2.0);
        }
        let data = Dataset::new("t", 2, vals).unwrap();
        let p = parzen_density(&data, 7).unwrap();
        let vol: f64 = p.h.iter().product();
        for j in 0..data.n() {
            let a = data.row(j);
            let count = data
                .rows()
                .filter(|b| (0..2).all(|i| (a[i] - b[i]).abs() <= p.h[i] / 2.0))
                .count();
            assert_abs_diff_eq!(p.densities[j], count as f64 / (200.0 * vol), epsilon = 1e-12);
        }
    }

    #[test]
    fn knn_examples() {
        let p = knn_density(&ds1(&[0.0, 1.0, 2.0]), 2).unwrap();
        assert_abs_diff_eq!(p.densities[1], 1.0 / 3.0, epsilon = 1e-12);

        let data = ds1(&[0.0, 1.0, 4.0]);
        let p = knn_density(&data, 3).unwrap();
        // k = n: radius reaches the farthest point
        assert_abs_diff_eq!(p.densities[0], 3.0 / (3.0 * 2.0 * 4.0), epsilon = 1e-12);
        assert_abs_diff_eq!(p.densities[2], 3.0 / (3.0 * 2.0 * 4.0), epsilon = 1e-12);

        let dup = ds1(&[1.0, 1.0, 1.0, 2.0]);
        assert!(matches!(knn_density(&dup, 2), Err(Error::DuplicatePointsExceedK(0))));
    }

    #[test]
    fn knn_density_decreases_with_radius() {
        let data = ds1(&[0.0, 0.1, 0.3, 0.7, 1.5, 3.1, 6.3]);
        let p = knn_density(&data, 2).unwrap();
        let mut pairs: Vec<(f64, f64)> = (0..data.n()).map(|j| (p.half_widths[j], p.densities[j])).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in pairs.windows(2) {
            if w[0].0 < w[1].0 {
                assert!(w[0].1 > w[1].1);
            }
        }
    }

    #[test]
    fn unit_balls() {
        assert_abs_diff_eq!(unit_ball_volume(1), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(unit_ball_volume(2), std::f64::consts::PI, epsilon = 1e-15);
        assert_abs_diff_eq!(unit_ball_volume(3), 4.0 / 3.0 * std::f64::consts::PI, epsilon = 1e-14);
    }

    #[test]
    fn global_mode_rules() {
        let data = ds1(&[0.5, 1.5, 1.5, 1.5, 1.5, 1.5, 2.5, 2.5, 0.2, 0.7]);
        let prep = Preprocessed::Histogram(build_histogram(&data, 3, None, Some(&[0.0]), Some(&[3.0])).unwrap());
        let freq = prep.frequencies();
        assert_eq!(freq, vec![3.0, 5.0, 2.0]);
        let m = global_mode(&prep, &freq).unwrap();
        assert_eq!(m.index, 1);
        assert_eq!(m.position, vec![1.5]);

        let masked = vec![3.0, 0.0, 2.0];
        assert_eq!(global_mode(&prep, &masked).unwrap().index, 0);

        let tie = vec![2.0, 2.0, 2.0];
        assert_eq!(global_mode(&prep, &tie).unwrap().index, 0);

        assert_eq!(global_mode(&prep, &[0.0, 0.0, 0.0]), Err(Error::EmptySelection));
    }

    #[test]
    fn golden_section_quadratic() {
        let mut calls = Vec::new();
        let (k, ic) = golden_section_refine((20, 40, 60), |v| {
            calls.push(v);
            (v as f64 - 46.0).powi(2)
        })
        .unwrap();
        assert_eq!(k, 46);
        assert_eq!(ic, 0.0);
        assert!(calls.len() <= 12, "{} evaluations", calls.len());
        assert!(calls.iter().all(|&v| (20..=60).contains(&v)));
    }

    #[test]
    fn golden_section_narrow_and_flat() {
        let mut calls = 0;
        let (k, _) = golden_section_refine((4, 5, 6), |_| {
            calls += 1;
            1.0
        })
        .unwrap();
        assert_eq!((k, calls), (5, 1));

        let (k, _) = golden_section_refine((10, 20, 30), |_| 3.0).unwrap();
        assert!((10..=30).contains(&k));
        let (k2, _) = golden_section_refine((10, 20, 30), |_| 3.0).unwrap();
        assert_eq!(k, k2);

        assert!(matches!(
            golden_section_refine((10, 20, 30), |v| v as f64),
            Err(Error::InvalidBracket { .. })
        ));
    }
}
