/// Nearest-rank percentile: the value at 1-based rank `ceil(p/100 * n)`
/// of the sorted sample (rank clamped to `[1, n]`). NaNs sort last.
pub fn percentile_nearest_rank(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of an empty sample");
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    v[rank.clamp(1, n) - 1]
}
