//! Deterministic chunked reductions.
//!
//! Every full pass over a sample goes through [`chunked_reduce`]: the input is
//! cut into fixed-length chunks, each chunk is folded sequentially (in
//! parallel across chunks), and the per-chunk partials are merged with a fixed
//! pairwise tree. The result depends only on the chunk length, never on the
//! number of worker threads.
//!
//! The partial list is also the unit of distribution: a sample split across
//! devices at chunk boundaries can compute [`chunk_partials`] for each piece,
//! concatenate the lists in order and call [`tree_combine`] to get the same
//! bits a single pass would.

use rayon::prelude::*;

/// Default chunk length, in elements.
pub const DEFAULT_CHUNK_LEN: usize = 1 << 16;

/// Folds each chunk of `data` with `kernel`, in parallel, keeping chunk order.
pub fn chunk_partials<T, P, K>(data: &[T], chunk_len: usize, kernel: K) -> Vec<P>
where
    T: Sync,
    P: Send,
    K: Fn(&[T]) -> P + Sync + Send,
{
    assert!(chunk_len > 0, "chunk length must be positive");
    data.par_chunks(chunk_len).map(kernel).collect()
}

/// Merges partials with a fixed pairwise tree: neighbours `(0,1), (2,3), ...`
/// are combined level by level, an odd tail is carried up unchanged.
pub fn tree_combine<P, C>(mut parts: Vec<P>, combine: C) -> Option<P>
where
    C: Fn(P, P) -> P,
{
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(combine(a, b)),
                None => next.push(a),
            }
        }
        parts = next;
    }
    parts.pop()
}

/// One deterministic reduction pass: [`chunk_partials`] then [`tree_combine`].
/// Returns `None` only for empty input.
pub fn chunked_reduce<T, P, K, C>(data: &[T], chunk_len: usize, kernel: K, combine: C) -> Option<P>
where
    T: Sync,
    P: Send,
    K: Fn(&[T]) -> P + Sync + Send,
    C: Fn(P, P) -> P,
{
    tree_combine(chunk_partials(data, chunk_len, kernel), combine)
}

/// [`chunked_reduce`] whose kernel also receives the offset of its chunk,
/// for reductions that read companion arrays by index.
pub fn chunked_reduce_indexed<T, P, K, C>(data: &[T], chunk_len: usize, kernel: K, combine: C) -> Option<P>
where
    T: Sync,
    P: Send,
    K: Fn(usize, &[T]) -> P + Sync + Send,
    C: Fn(P, P) -> P,
{
    assert!(chunk_len > 0, "chunk length must be positive");
    let parts = data.par_chunks(chunk_len).enumerate().map(|(i, c)| kernel(i * chunk_len, c)).collect();
    tree_combine(parts, combine)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    /// Combines two partial sums; used as the tree merge step.
    pub fn merge(mut self, other: Self) -> Self {
        self.add(other.sum);
        self.carry += other.carry;
        self
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_shape_is_fixed() {
        // Record the tree as a string so the merge order is visible.
        let leaves: Vec<String> = (0..5).map(|i| i.to_string()).collect();
        let root = tree_combine(leaves, |a, b| format!("({a}{b})")).unwrap();
        assert_eq!(root, "(((01)(23))4)");
    }

    #[test]
    fn empty_input_has_no_result() {
        let data: [f64; 0] = [];
        assert!(chunked_reduce(&data, 4, |c| c.len(), |a, b| a + b).is_none());
    }

    #[test]
    fn result_ignores_worker_count() {
        let data: Vec<f64> = (0..100_000).map(|i| ((i * 7919) % 1000) as f64 * 0.1 + 1e-3).collect();
        let sum = |c: &[f64]| c.iter().sum::<f64>();
        let reference = chunked_reduce(&data, 1024, sum, |a, b| a + b).unwrap();
        for workers in [1, 2, 7] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
            let got = pool.install(|| chunked_reduce(&data, 1024, sum, |a, b| a + b).unwrap());
            assert_eq!(got.to_bits(), reference.to_bits());
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..10 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 10.0);
    }
}
