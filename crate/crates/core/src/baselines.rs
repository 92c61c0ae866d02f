//! Comparison-based reference selectors.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::real::Real;

/// Element of 1-based `rank` after a full parallel sort of a copy.
pub fn sort_select<T: Real>(values: &[T], rank: usize) -> Result<T> {
    check_rank(values.len(), rank)?;
    let mut v = values.to_vec();
    v.par_sort_unstable_by(T::total_cmp);
    Ok(v[rank - 1])
}

/// In-place quickselect with median-of-three pivots and Hoare partitioning.
/// Reorders `values`; afterwards `values[rank - 1]` holds the answer, with no
/// larger element before it and no smaller one after it.
pub fn quickselect<T: Real>(values: &mut [T], rank: usize) -> Result<T> {
    check_rank(values.len(), rank)?;
    let target = rank - 1;
    let (mut lo, mut hi) = (0usize, values.len() - 1);
    while lo < hi {
        if hi - lo < 16 {
            insertion_sort(&mut values[lo..=hi]);
            break;
        }
        let pivot = median_of_three(values, lo, hi);
        let split = hoare_partition(values, lo, hi, pivot);
        if target <= split {
            hi = split;
        } else {
            lo = split + 1;
        }
    }
    Ok(values[target])
}

fn check_rank(n: usize, rank: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if !(1..=n).contains(&rank) {
        return Err(Error::RankOutOfRange { rank, n });
    }
    Ok(())
}

fn lt<T: Real>(a: T, b: T) -> bool {
    a.total_cmp(&b).is_lt()
}

fn insertion_sort<T: Real>(v: &mut [T]) {
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && lt(v[j], v[j - 1]) {
            v.swap(j, j - 1);
            j -= 1;
        }
    }
}

/// Orders `v[lo], v[mid], v[hi]` and returns the middle one.
fn median_of_three<T: Real>(v: &mut [T], lo: usize, hi: usize) -> T {
    let mid = lo + (hi - lo) / 2;
    if lt(v[mid], v[lo]) {
        v.swap(mid, lo);
    }
    if lt(v[hi], v[lo]) {
        v.swap(hi, lo);
    }
    if lt(v[hi], v[mid]) {
        v.swap(hi, mid);
    }
    v[mid]
}

/// Returns `p` with `lo ≤ p < hi`, every element of `v[lo..=p]` not greater
/// than `pivot` and every element of `v[p+1..=hi]` not less than it.
fn hoare_partition<T: Real>(v: &mut [T], lo: usize, hi: usize, pivot: T) -> usize {
    let mut i = lo;
    let mut j = hi;
    loop {
        while lt(v[i], pivot) {
            i += 1;
        }
        while lt(pivot, v[j]) {
            j -= 1;
        }
        if i >= j {
            return j;
        }
        v.swap(i, j);
        i += 1;
        j -= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_cases() {
        assert_eq!(sort_select(&[3.0, 1.0, 2.0], 2).unwrap(), 2.0);
        let mut v = [5.0f32, 4.0, 3.0, 2.0, 1.0];
        assert_eq!(quickselect(&mut v, 1).unwrap(), 1.0);
        assert!(matches!(quickselect::<f64>(&mut [], 1), Err(Error::EmptySample)));
        assert!(matches!(sort_select(&[1.0], 2), Err(Error::RankOutOfRange { rank: 2, n: 1 })));
    }

    #[test]
    fn adversarial_patterns() {
        let n = 4099;
        let patterns: Vec<Vec<f64>> = vec![
            (0..n).map(|i| i as f64).collect(),
            (0..n).rev().map(|i| i as f64).collect(),
            vec![1.0; n],
            (0..n).map(|i| (i % 2) as f64).collect(),
            (0..n).map(|i| if i < n / 2 { i as f64 } else { (n - i) as f64 }).collect(),
            (0..n).map(|i| ((i * 2654435761usize) % 97) as f64).collect(),
        ];
        for p in patterns {
            let mut sorted = p.clone();
            sorted.sort_by(f64::total_cmp);
            for rank in [1, 2, n / 2, n - 1, n] {
                let mut v = p.clone();
                assert_eq!(quickselect(&mut v, rank).unwrap(), sorted[rank - 1]);
            }
        }
    }

    proptest! {
        #[test]
        fn quickselect_partitions(v in prop::collection::vec(-1e6f64..1e6, 1..400), r in any::<prop::sample::Index>()) {
            let rank = r.index(v.len()) + 1;
            let mut w = v.clone();
            let got = quickselect(&mut w, rank).unwrap();
            prop_assert_eq!(got, sort_select(&v, rank).unwrap());
            prop_assert!(w[..rank - 1].iter().all(|&x| x <= got));
            prop_assert!(w[rank..].iter().all(|&x| x >= got));
        }
    }
}
