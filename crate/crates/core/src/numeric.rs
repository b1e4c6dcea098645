//! Order-independent floating-point reductions.

/// Sums values in ascending order, so that any two collections with the
/// same multiset of values produce bit-identical totals. The empty sum is
/// `+0.0`.
pub fn canonical_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v.into_iter().fold(0.0, |acc, x| acc + x)
}
