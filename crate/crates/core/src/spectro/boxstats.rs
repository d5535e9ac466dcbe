/// Five-number summary of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxStats {
    pub min: f64,
    pub lower_quartile: f64,
    pub median: f64,
    pub upper_quartile: f64,
    pub max: f64,
    pub count: usize,
}

fn median_sorted(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// Tukey hinges: the quartiles are the medians of the lower and upper
/// halves, each half including the median element when `n` is odd.
/// `None` for an empty sample; NaNs are ignored.
pub fn box_stats(sample: &[f64]) -> Option<BoxStats> {
    let mut xs: Vec<f64> = sample.iter().copied().filter(|x| !x.is_nan()).collect();
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let half = n.div_ceil(2);
    Some(BoxStats {
        min: xs[0],
        lower_quartile: median_sorted(&xs[..half]),
        median: median_sorted(&xs),
        upper_quartile: median_sorted(&xs[n - half..]),
        max: xs[n - 1],
        count: n,
    })
}
