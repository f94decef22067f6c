//! Small dense-vector helpers over slices.

use crate::scalar::Scalar;

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[inline]
pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

#[inline]
pub fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

#[inline]
pub fn dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    sq_dist(a, b).sqrt()
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn scale<T: Scalar>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

/// Arithmetic mean of a non-empty set of equal-length points.
pub fn mean<T: Scalar, P: AsRef<[T]>>(points: &[P]) -> Option<Vec<T>> {
    let first = points.first()?.as_ref();
    let mut acc = vec![T::zero(); first.len()];
    for p in points {
        for (a, &x) in acc.iter_mut().zip(p.as_ref()) {
            *a = *a + x;
        }
    }
    let n = T::from_usize_lossy(points.len());
    acc.iter_mut().for_each(|a| *a = *a / n);
    Some(acc)
}

/// Cosine distance `1 - <v,w> / (|v||w|)`; `None` when either vector is zero.
pub fn cosine_distance<T: Scalar>(v: &[T], w: &[T]) -> Option<T> {
    let nv = norm(v);
    let nw = norm(w);
    if nv == T::zero() || nw == T::zero() {
        return None;
    }
    let c = dot(v, w) / (nv * nw);
    // rounding can push |c| marginally past 1
    let c = c.max(-T::one()).min(T::one());
    Some(T::one() - c)
}

/// Median with the even-count convention (mean of the two middle values).
/// Sorts `values` in place; returns `None` for an empty slice.
pub fn median_in_place<T: Scalar>(values: &mut [T]) -> Option<T> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    if n % 2 == 1 {
        Some(values[n / 2])
    } else {
        Some((values[n / 2 - 1] + values[n / 2]) / T::lit(2.0))
    }
}
