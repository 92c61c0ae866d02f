use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::datagen::CounterRng;
use crate::error::{Error, Result};
use crate::hybrid::{hybrid_select, HybridConfig};
use crate::reduce::{chunked_reduce, CompensatedSum, DEFAULT_CHUNK_LEN};
use crate::sample::{Sample, SelectionSpec};

/// Elemental systems whose 1-norm condition estimate exceeds this are
/// skipped.
pub const MAX_CONDITION: f64 = 1e12;

/// How the trimming count `h` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrimRule {
    /// `⌊(n + p) / 2⌋`.
    #[default]
    Default,
    /// `(n + 1) / 2` for odd `n`, `n / 2` for even `n`.
    HalfSample,
    Explicit(usize),
}

impl TrimRule {
    pub fn resolve(self, n: usize, p: usize) -> Result<usize> {
        let h = match self {
            TrimRule::Default => (n + p) / 2,
            TrimRule::HalfSample => n.div_ceil(2),
            TrimRule::Explicit(h) => h,
        };
        if !(1..=n).contains(&h) {
            return Err(Error::InvalidArgument(format!("trimming count {h} is outside 1..={n}")));
        }
        Ok(h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// Least median of squares.
    Lms,
    /// Least trimmed squares.
    Lts,
}

/// Linear model data: `n` rows of `p` explanatory values (row-major) and a
/// response per row.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionProblem {
    x: Vec<f64>,
    y: Vec<f64>,
    n: usize,
    p: usize,
    h: usize,
}

impl RegressionProblem {
    /// `x` is row-major with `y.len()` rows. Requires `n > p ≥ 1` and finite
    /// entries.
    pub fn new(x: Vec<f64>, y: Vec<f64>, p: usize) -> Result<Self> {
        let n = y.len();
        if p == 0 || n <= p {
            return Err(Error::InvalidArgument(format!("need n > p >= 1, got n = {n}, p = {p}")));
        }
        if x.len() != n * p {
            return Err(Error::DimensionMismatch { expected: n * p, got: x.len() });
        }
        if let Some(index) = x.iter().chain(&y).position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let h = TrimRule::Default.resolve(n, p)?;
        Ok(RegressionProblem { x, y, n, p, h })
    }

    /// Builds the problem from rows, appending a trailing column of ones
    /// when `intercept` is set.
    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>, intercept: bool) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        let mut x = Vec::with_capacity(rows.len() * (width + intercept as usize));
        for row in rows {
            if row.len() != width {
                return Err(Error::DimensionMismatch { expected: width, got: row.len() });
            }
            x.extend_from_slice(row);
            if intercept {
                x.push(1.0);
            }
        }
        if rows.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: rows.len(), got: y.len() });
        }
        Self::new(x, y, width + intercept as usize)
    }

    pub fn with_trim(mut self, rule: TrimRule) -> Result<Self> {
        self.h = rule.resolve(self.n, self.p)?;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub fn response(&self) -> &[f64] {
        &self.y
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.p {
            return Err(Error::DimensionMismatch { expected: self.p, got: theta.len() });
        }
        if let Some(index) = theta.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(())
    }
}

/// `rᵢ = xᵢ·θ − yᵢ`.
pub fn residuals(problem: &RegressionProblem, theta: &[f64]) -> Result<Vec<f64>> {
    problem.check_theta(theta)?;
    Ok(problem
        .x
        .par_chunks(problem.p)
        .zip(problem.y.par_iter())
        .map(|(row, &yi)| row.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>() - yi)
        .collect())
}

/// Median of the squared residuals (lower median for even `n`).
pub fn lms_objective(problem: &RegressionProblem, theta: &[f64]) -> Result<f64> {
    let r = residuals(problem, theta)?;
    lms_from_residuals(&r)
}

/// LMS value for a residual vector.
pub fn lms_from_residuals(r: &[f64]) -> Result<f64> {
    let sq = Sample::new(r.iter().map(|v| v * v).collect::<Vec<f64>>())?;
    Ok(hybrid_select(&sq, SelectionSpec::Median, &HybridConfig::default())?.value)
}

/// Threshold and tie multiplicities for trimming `h` residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrimWeights {
    /// `count(|rᵢ| < m)`.
    pub b_l: usize,
    /// `count(|rᵢ| = m)`.
    pub b: usize,
    /// `h − b_l`, the number of threshold ties that are kept.
    pub a: usize,
    /// The `h`-th smallest `|rᵢ|`.
    pub m: f64,
}

impl TrimWeights {
    /// Weight of one residual with magnitude `abs`.
    pub fn weight(&self, abs: f64) -> f64 {
        if abs < self.m {
            1.0
        } else if abs == self.m {
            self.a as f64 / self.b as f64
        } else {
            0.0
        }
    }
}

#[derive(Clone, Copy, Default)]
struct TrimPartial {
    below: CompensatedSum,
    b_l: usize,
    b: usize,
}

/// The `h`-th smallest absolute residual plus one pass counting the
/// residuals below and at it. Also returns the compensated sum of `rᵢ²`
/// over `|rᵢ| < m`.
fn trim(abs: &[f64], h: usize) -> Result<(TrimWeights, CompensatedSum)> {
    let sample = Sample::new(abs.to_vec())?;
    let m = hybrid_select(&sample, SelectionSpec::KthSmallest(h), &HybridConfig::default())?.value;
    let part = chunked_reduce(
        abs,
        DEFAULT_CHUNK_LEN,
        |c| {
            let mut p = TrimPartial::default();
            for &v in c {
                if v < m {
                    p.below.add(v * v);
                    p.b_l += 1;
                } else if v == m {
                    p.b += 1;
                }
            }
            p
        },
        |x, y| TrimPartial { below: x.below.merge(y.below), b_l: x.b_l + y.b_l, b: x.b + y.b },
    )
    .expect("non-empty");
    let w = TrimWeights { b_l: part.b_l, b: part.b, a: h - part.b_l, m };
    debug_assert!(w.a >= 1 && w.a <= w.b);
    Ok((w, part.below))
}

/// Tie weights for trimming `h` of the given absolute residuals.
pub fn trim_weights(abs_residuals: &[f64], h: usize) -> Result<TrimWeights> {
    check_h(h, abs_residuals.len())?;
    Ok(trim(abs_residuals, h)?.0)
}

fn check_h(h: usize, n: usize) -> Result<()> {
    if !(1..=n).contains(&h) {
        return Err(Error::InvalidArgument(format!("trimming count {h} is outside 1..={n}")));
    }
    Ok(())
}

/// Sum of the `h` smallest squared residuals, computed from a selected
/// threshold and tie weights instead of a sort.
pub fn lts_objective(problem: &RegressionProblem, theta: &[f64]) -> Result<f64> {
    let r = residuals(problem, theta)?;
    lts_from_residuals(&r, problem.h)
}

/// LTS value for a residual vector and trimming count.
pub fn lts_from_residuals(r: &[f64], h: usize) -> Result<f64> {
    check_h(h, r.len())?;
    let abs: Vec<f64> = r.par_iter().map(|v| v.abs()).collect();
    let (w, mut below) = trim(&abs, h)?;
    // All ties have r² = m², so (a/b)·Σ_{|r|=m} r² is a·m².
    below.add(w.a as f64 * (w.m * w.m));
    Ok(below.value())
}

pub fn objective(estimator: Estimator, problem: &RegressionProblem, theta: &[f64]) -> Result<f64> {
    match estimator {
        Estimator::Lms => lms_objective(problem, theta),
        Estimator::Lts => lts_objective(problem, theta),
    }
}

/// Best candidate found by [`fit_elemental`].
#[derive(Debug, Clone, PartialEq)]
pub struct ElementalFit {
    pub theta: Vec<f64>,
    pub objective: f64,
    pub estimator: Estimator,
    /// Index of the winning subset.
    pub subset: usize,
    /// Subsets skipped as singular or ill-conditioned.
    pub rejected: usize,
}

/// Random elemental-subset search: each of `subsets` draws `p` distinct
/// rows, solves them exactly for `θ` and evaluates the objective. The lowest
/// value wins, ties going to the lowest subset index.
pub fn fit_elemental(problem: &RegressionProblem, subsets: usize, seed: u64, estimator: Estimator) -> Result<ElementalFit> {
    if subsets == 0 {
        return Err(Error::InvalidArgument("need at least one subset".into()));
    }
    let rng = CounterRng::new(seed);
    let candidates: Vec<Option<(f64, Vec<f64>)>> = (0..subsets)
        .into_par_iter()
        .map(|s| {
            let rows = floyd_sample(rng.substream(s as u64), problem.n, problem.p);
            let theta = solve_elemental(problem, &rows)?;
            let f = objective(estimator, problem, &theta).ok()?;
            Some((f, theta))
        })
        .collect();
    let rejected = candidates.iter().filter(|c| c.is_none()).count();
    let (subset, (f, theta)) = candidates
        .into_iter()
        .enumerate()
        .filter_map(|(i, c)| c.map(|c| (i, c)))
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.0.cmp(&b.0)))
        .ok_or(Error::NoFit { subsets })?;
    Ok(ElementalFit { theta, objective: f, estimator, subset, rejected })
}

/// `k` distinct indices from `0..n` by Floyd's algorithm, in draw order.
fn floyd_sample(rng: CounterRng, n: usize, k: usize) -> Vec<usize> {
    let mut counter = 0u64;
    let mut out: Vec<usize> = Vec::with_capacity(k);
    for j in n - k..n {
        let t = rng.below(&mut counter, j as u64 + 1) as usize;
        out.push(if out.contains(&t) { j } else { t });
    }
    out
}

/// Exact fit through the given rows; `None` if the system is singular or
/// its condition estimate exceeds [`MAX_CONDITION`].
fn solve_elemental(problem: &RegressionProblem, rows: &[usize]) -> Option<Vec<f64>> {
    let p = problem.p;
    let a = DMatrix::from_fn(p, p, |i, j| problem.row(rows[i])[j]);
    let b = DVector::from_iterator(p, rows.iter().map(|&i| problem.y[i]));
    let lu = a.clone().lu();
    let inv = lu.try_inverse()?;
    let cond = one_norm(&a) * one_norm(&inv);
    if !(cond.is_finite() && cond <= MAX_CONDITION) {
        return None;
    }
    let theta = a.lu().solve(&b)?;
    theta.iter().all(|v| v.is_finite()).then(|| theta.iter().copied().collect())
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Ordinary least squares via SVD.
pub fn least_squares(problem: &RegressionProblem) -> Result<Vec<f64>> {
    let a = DMatrix::from_row_slice(problem.n, problem.p, &problem.x);
    let b = DVector::from_column_slice(&problem.y);
    let theta = a
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| Error::InvalidArgument(format!("least squares failed: {e}")))?;
    Ok(theta.iter().copied().collect())
}

/// Reads a CSV file with a header row. The column named `y` is the
/// response; all other columns are explanatory variables in file order.
pub fn load_regression_csv(path: impl AsRef<Path>, intercept: bool) -> Result<RegressionProblem> {
    read_regression_csv(std::fs::File::open(path)?, intercept)
}

pub fn read_regression_csv<R: std::io::Read>(input: R, intercept: bool) -> Result<RegressionProblem> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let y_col = headers
        .iter()
        .position(|h| h == "y")
        .ok_or_else(|| Error::Format("no column named `y`".into()))?;
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let mut row = Vec::with_capacity(record.len());
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Format(format!("row {}: `{field}` is not a number", line + 1)))?;
            if col == y_col {
                y.push(v);
            } else {
                row.push(v);
            }
        }
        rows.push(row);
    }
    RegressionProblem::from_rows(&rows, y, intercept)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_problem(n: usize, outliers: usize) -> RegressionProblem {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 * 0.5]).collect();
        let y: Vec<f64> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| if i % 4 == 1 && i / 4 < outliers { 500.0 } else { 2.0 * r[0] + 1.0 })
            .collect();
        RegressionProblem::from_rows(&rows, y, true).unwrap()
    }

    fn sorted_sq_oracle(r: &[f64], h: usize) -> f64 {
        let mut sq: Vec<f64> = r.iter().map(|v| v * v).collect();
        sq.sort_by(f64::total_cmp);
        sq[..h].iter().sum()
    }

    #[test]
    fn residual_examples() {
        assert!(RegressionProblem::new(vec![1.0], vec![1.0], 1).is_err(), "n must exceed p");
        let pr = RegressionProblem::new(vec![1.0, 2.0], vec![1.0, 2.0], 1).unwrap();
        assert_eq!(residuals(&pr, &[1.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(residuals(&pr, &[0.0]).unwrap(), vec![-1.0, -2.0]);
        assert!(matches!(residuals(&pr, &[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn lms_examples() {
        assert_eq!(lms_from_residuals(&[0.0, 0.0, 3.0]).unwrap(), 0.0);
        assert_eq!(lms_from_residuals(&[1.0, -2.0, 3.0]).unwrap(), 4.0);
    }

    #[test]
    fn lts_examples() {
        assert_eq!(lts_from_residuals(&[1.0, -2.0, 3.0, 4.0], 2).unwrap(), 5.0);
        assert_eq!(lts_from_residuals(&[2.0, -2.0, 2.0, 2.0], 2).unwrap(), 8.0);
        let w = trim_weights(&[2.0; 4], 2).unwrap();
        assert_eq!((w.b_l, w.b, w.a, w.m), (0, 4, 2, 2.0));
        assert_eq!(w.weight(2.0), 0.5);
        let r = [0.5, -1.5, 2.5, 3.0];
        assert_eq!(lts_from_residuals(&r, 4).unwrap(), r.iter().map(|v| v * v).sum::<f64>());
        assert!(lts_from_residuals(&r, 5).is_err());
    }

    #[test]
    fn lts_matches_sorted_sum_with_ties() {
        let r: Vec<f64> = (0..301).map(|i| ((i * 17) % 23) as f64 - 11.0).collect();
        for h in [1, 2, 100, 151, 300, 301] {
            let want = sorted_sq_oracle(&r, h);
            let got = lts_from_residuals(&r, h).unwrap();
            assert!((got - want).abs() <= 4.0 * f64::EPSILON * want, "h = {h}: {got} vs {want}");
        }
    }

    #[test]
    fn trim_rules() {
        assert_eq!(TrimRule::Default.resolve(200, 2).unwrap(), 101);
        assert_eq!(TrimRule::HalfSample.resolve(7, 2).unwrap(), 4);
        assert_eq!(TrimRule::HalfSample.resolve(8, 2).unwrap(), 4);
        assert!(TrimRule::Explicit(0).resolve(8, 2).is_err());
    }

    #[test]
    fn elemental_fit_ignores_gross_outliers() {
        let pr = line_problem(25, 5);
        for est in [Estimator::Lms, Estimator::Lts] {
            let fit = fit_elemental(&pr, 500, 7, est).unwrap();
            assert!((fit.theta[0] - 2.0).abs() < 1e-6 && (fit.theta[1] - 1.0).abs() < 1e-6, "{fit:?}");
            let truth = objective(est, &pr, &[2.0, 1.0]).unwrap();
            assert!(fit.objective <= truth);
            assert_eq!(fit_elemental(&pr, 500, 7, est).unwrap(), fit);
        }
    }

    #[test]
    fn clean_data_fits_exactly() {
        let pr = line_problem(12, 0);
        let fit = fit_elemental(&pr, 20, 1, Estimator::Lms).unwrap();
        assert_eq!(fit.objective, 0.0);
    }

    #[test]
    fn all_singular_subsets_fail() {
        // Every row identical: any 2-row system is singular.
        let rows = vec![vec![1.0]; 6];
        let pr = RegressionProblem::from_rows(&rows, vec![1.0; 6], true).unwrap();
        assert!(matches!(fit_elemental(&pr, 10, 0, Estimator::Lts), Err(Error::NoFit { subsets: 10 })));
    }

    #[test]
    fn floyd_draws_distinct_rows() {
        let rng = CounterRng::new(5);
        for s in 0..200 {
            let mut v = floyd_sample(rng.substream(s), 10, 4);
            v.sort_unstable();
            v.dedup();
            assert_eq!(v.len(), 4);
            assert!(v.iter().all(|&i| i < 10));
        }
    }

    #[test]
    fn ols_breaks_down() {
        let pr = line_problem(25, 5);
        let theta = least_squares(&pr).unwrap();
        assert!((theta[0] - 2.0).abs() + (theta[1] - 1.0).abs() > 1.0);
        let clean = least_squares(&line_problem(25, 0)).unwrap();
        assert!((clean[0] - 2.0).abs() < 1e-9 && (clean[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn csv_loading() {
        let text = "a, y, b\n1, 3, 0\n2, 5, 1\n3, 7, 0\n4, 9, 1\n";
        let pr = read_regression_csv(text.as_bytes(), true).unwrap();
        assert_eq!((pr.n(), pr.p()), (4, 3));
        assert_eq!(pr.row(1), &[2.0, 1.0, 1.0]);
        assert_eq!(pr.response(), &[3.0, 5.0, 7.0, 9.0]);
        assert!(matches!(read_regression_csv("a,b\n1,2\n".as_bytes(), false), Err(Error::Format(_))));
        assert!(matches!(read_regression_csv("a,y\n1,x\n".as_bytes(), false), Err(Error::Format(_))));
    }
}
