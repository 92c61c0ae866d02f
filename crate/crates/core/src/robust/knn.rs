use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hybrid::{hybrid_select, HybridConfig};
use crate::reduce::{chunked_reduce_indexed, CompensatedSum, DEFAULT_CHUNK_LEN};
use crate::sample::{Sample, SelectionSpec};

/// Offset added to distances under [`Weighting::InverseDistance`].
pub const INVERSE_DISTANCE_DELTA: f64 = 1e-12;

pub trait Metric: Sync {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl Metric for Euclidean {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Manhattan;

impl Metric for Manhattan {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    #[default]
    Uniform,
    /// `1 / (d + δ)` with `δ = 1e-12`.
    InverseDistance,
}

impl Weighting {
    fn of(self, d: f64) -> f64 {
        match self {
            Weighting::Uniform => 1.0,
            Weighting::InverseDistance => 1.0 / (d + INVERSE_DISTANCE_DELTA),
        }
    }
}

/// Training points (all of one dimension) with a target per point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet<L> {
    points: Vec<Vec<f64>>,
    targets: Vec<L>,
}

impl<L> TrainingSet<L> {
    pub fn new(points: Vec<Vec<f64>>, targets: Vec<L>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySample);
        }
        if points.len() != targets.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: targets.len() });
        }
        let dim = points[0].len();
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
        }
        Ok(TrainingSet { points, targets })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }
}

/// Selection weight of every training point: 1 inside the `k`-th distance,
/// `a/b` for the `b` points tied at it (of which `a` are needed to make up
/// `k`), 0 beyond.
fn neighbour_weights<L>(train: &TrainingSet<L>, query: &[f64], k: usize, metric: &dyn Metric) -> Result<(Vec<f64>, Vec<f64>)> {
    if query.len() != train.dim() {
        return Err(Error::DimensionMismatch { expected: train.dim(), got: query.len() });
    }
    if !(1..=train.len()).contains(&k) {
        return Err(Error::RankOutOfRange { rank: k, n: train.len() });
    }
    let d: Vec<f64> = train.points.par_iter().map(|p| metric.distance(p, query)).collect();
    let sample = Sample::new(d.clone())?;
    let dk = hybrid_select(&sample, SelectionSpec::KthSmallest(k), &HybridConfig::default())?.value;
    let (below, ties) = d.par_iter().fold(|| (0usize, 0usize), |(b, t), &v| (b + (v < dk) as usize, t + (v == dk) as usize)).reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    let tie_weight = (k - below) as f64 / ties as f64;
    let sel = d.iter().map(|&v| if v < dk { 1.0 } else if v == dk { tie_weight } else { 0.0 }).collect();
    Ok((d, sel))
}

/// Weighted mean of the targets of the `k` nearest points.
pub fn knn_predict(train: &TrainingSet<f64>, query: &[f64], k: usize, weighting: Weighting) -> Result<f64> {
    knn_predict_with(train, query, k, weighting, &Euclidean)
}

pub fn knn_predict_with(
    train: &TrainingSet<f64>,
    query: &[f64],
    k: usize,
    weighting: Weighting,
    metric: &dyn Metric,
) -> Result<f64> {
    let (d, sel) = neighbour_weights(train, query, k, metric)?;
    let (num, den) = chunked_reduce_indexed(
        &d,
        DEFAULT_CHUNK_LEN,
        |off, c| {
            let (mut num, mut den) = (CompensatedSum::default(), CompensatedSum::default());
            for (i, &di) in c.iter().enumerate() {
                let w = sel[off + i] * weighting.of(di);
                if w > 0.0 {
                    num.add(w * train.targets[off + i]);
                    den.add(w);
                }
            }
            (num, den)
        },
        |a, b| (a.0.merge(b.0), a.1.merge(b.1)),
    )
    .expect("non-empty");
    Ok(num.value() / den.value())
}

/// Label with the largest total weight among the `k` nearest points; equal
/// totals go to the smallest label.
pub fn knn_classify<L>(train: &TrainingSet<L>, query: &[f64], k: usize, weighting: Weighting) -> Result<L>
where
    L: Ord + Clone + Sync,
{
    knn_classify_with(train, query, k, weighting, &Euclidean)
}

pub fn knn_classify_with<L>(
    train: &TrainingSet<L>,
    query: &[f64],
    k: usize,
    weighting: Weighting,
    metric: &dyn Metric,
) -> Result<L>
where
    L: Ord + Clone + Sync,
{
    let (d, sel) = neighbour_weights(train, query, k, metric)?;
    let mut votes: BTreeMap<&L, f64> = BTreeMap::new();
    for (i, &di) in d.iter().enumerate() {
        let w = sel[i] * weighting.of(di);
        if w > 0.0 {
            *votes.entry(&train.targets[i]).or_default() += w;
        }
    }
    let mut best: Option<(&L, f64)> = None;
    for (label, w) in votes {
        if best.map_or(true, |(_, bw)| w > bw) {
            best = Some((label, w));
        }
    }
    Ok(best.expect("k >= 1 selects at least one point").0.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: &[f64], targets: Vec<f64>) -> TrainingSet<f64> {
        TrainingSet::new(points.iter().map(|&p| vec![p]).collect(), targets).unwrap()
    }

    #[test]
    fn two_nearest() {
        let t = line(&[0.0, 1.0, 10.0], vec![1.0, 2.0, 99.0]);
        assert_eq!(knn_predict(&t, &[0.4], 2, Weighting::Uniform).unwrap(), 1.5);
    }

    #[test]
    fn equidistant_ties_share_weight() {
        let t = TrainingSet::new(
            vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            vec![1.0, 2.0, 3.0, 10.0],
        )
        .unwrap();
        assert_eq!(knn_predict(&t, &[0.0, 0.0], 2, Weighting::Uniform).unwrap(), 4.0);
        assert_eq!(knn_predict(&t, &[0.0, 0.0], 2, Weighting::InverseDistance).unwrap(), 4.0);
    }

    #[test]
    fn all_neighbours_give_the_mean() {
        let t = line(&[0.0, 3.0, 7.0, 8.0, 20.0], vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(knn_predict(&t, &[5.0], 5, Weighting::Uniform).unwrap(), 3.0);
    }

    #[test]
    fn inverse_distance_prefers_close_points() {
        let t = line(&[0.0, 1.0], vec![0.0, 10.0]);
        let v = knn_predict(&t, &[0.1], 2, Weighting::InverseDistance).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn classification_majority() {
        let t = TrainingSet::new(
            vec![vec![0.0], vec![0.2], vec![0.3], vec![5.0], vec![5.1]],
            vec!["a", "b", "b", "a", "a"],
        )
        .unwrap();
        assert_eq!(knn_classify(&t, &[0.1], 3, Weighting::Uniform).unwrap(), "b");
        assert_eq!(knn_classify(&t, &[0.1], 5, Weighting::Uniform).unwrap(), "a");
        assert_eq!(knn_classify_with(&t, &[5.0], 2, Weighting::Uniform, &Manhattan).unwrap(), "a");
    }

    #[test]
    fn invalid_queries() {
        let t = line(&[0.0, 1.0], vec![0.0, 1.0]);
        assert!(matches!(knn_predict(&t, &[0.0], 3, Weighting::Uniform), Err(Error::RankOutOfRange { .. })));
        assert!(matches!(knn_predict(&t, &[0.0, 1.0], 1, Weighting::Uniform), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(TrainingSet::<f64>::new(vec![], vec![]), Err(Error::EmptySample)));
    }
}
