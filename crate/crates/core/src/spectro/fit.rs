use super::binning::{BinKind, BinnedSeries};

/// The three scaling relations and their sign conventions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    /// `|R| ~ J^-alpha` on frequency bins.
    ReturnVsFrequency,
    /// `|R| ~ dt^beta` on holding-time bins.
    ReturnVsHolding,
    /// `dt ~ J^-gamma` on frequency bins.
    HoldingVsFrequency,
}

impl Relation {
    pub const ALL: [Relation; 3] = [
        Relation::ReturnVsFrequency,
        Relation::ReturnVsHolding,
        Relation::HoldingVsFrequency,
    ];

    pub fn exponent_name(self) -> &'static str {
        match self {
            Relation::ReturnVsFrequency => "alpha",
            Relation::ReturnVsHolding => "beta",
            Relation::HoldingVsFrequency => "gamma",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Relation::ReturnVsFrequency => "R~J",
            Relation::ReturnVsHolding => "R~dt",
            Relation::HoldingVsFrequency => "dt~J",
        }
    }

    pub fn bin_kind(self) -> BinKind {
        match self {
            Relation::ReturnVsFrequency | Relation::HoldingVsFrequency => BinKind::Frequency,
            Relation::ReturnVsHolding => BinKind::HoldingTime,
        }
    }

    /// Multiplier turning the log-log slope into the reported exponent.
    pub fn sign(self) -> f64 {
        match self {
            Relation::ReturnVsHolding => 1.0,
            _ => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSettings {
    /// Minimum investors per bin for the bin to enter a fit.
    pub min_count: u64,
    /// Weight each bin by its count.
    pub weighted: bool,
    /// Consistency threshold in combined standard errors.
    pub k: f64,
}

impl Default for FitSettings {
    fn default() -> Self {
        FitSettings {
            min_count: 10,
            weighted: false,
            k: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    /// Exponent under the relation's sign convention.
    pub value: f64,
    pub stderr: f64,
    /// Intercept of the natural-log regression.
    pub intercept: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawFit {
    pub relation: Relation,
    pub estimate: Option<Estimate>,
    pub bins_used: usize,
    /// Lowest and highest bin center used.
    pub fit_range: Option<(f64, f64)>,
    pub notes: Vec<String>,
}

impl PowerLawFit {
    pub fn value_and_error(&self) -> Option<(f64, f64)> {
        self.estimate.map(|e| (e.value, e.stderr))
    }
}

/// Least squares slope of `y` on `x` with optional weights: (slope, slope
/// standard error, intercept, R²). Needs at least three points.
pub fn ols(x: &[f64], y: &[f64], w: Option<&[f64]>) -> Option<(f64, f64, f64, f64)> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return None;
    }
    let weight = |i: usize| w.map_or(1.0, |w| w[i]);
    let sw: f64 = (0..n).map(weight).sum();
    let mx = (0..n).map(|i| weight(i) * x[i]).sum::<f64>() / sw;
    let my = (0..n).map(|i| weight(i) * y[i]).sum::<f64>() / sw;
    let sxx: f64 = (0..n).map(|i| weight(i) * (x[i] - mx).powi(2)).sum();
    let sxy: f64 = (0..n).map(|i| weight(i) * (x[i] - mx) * (y[i] - my)).sum();
    let syy: f64 = (0..n).map(|i| weight(i) * (y[i] - my).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = (0..n)
        .map(|i| weight(i) * (y[i] - intercept - slope * x[i]).powi(2))
        .sum();
    // weights act as relative precisions, so the residual scale is estimated
    let stderr = (ssr / (n as f64 - 2.0) / sxx).sqrt();
    let r2 = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    Some((slope, stderr, intercept, r2))
}

/// Fit `relation` on a binned series by least squares in log-log space.
///
/// Bins with fewer than `min_count` members are skipped; bins with a
/// non-positive dependent mean are skipped with a note. Losers enter through
/// the magnitude of their mean return.
pub fn fit_power_law(
    series: &BinnedSeries,
    relation: Relation,
    settings: &FitSettings,
) -> PowerLawFit {
    let mut fit = PowerLawFit {
        relation,
        estimate: None,
        bins_used: 0,
        fit_range: None,
        notes: Vec::new(),
    };
    if series.kind != relation.bin_kind() {
        fit.notes.push(format!(
            "{} needs {} bins, got {}",
            relation.label(),
            relation.bin_kind().as_str(),
            series.kind.as_str()
        ));
        return fit;
    }
    let (mut xs, mut ys, mut ws) = (Vec::new(), Vec::new(), Vec::new());
    for b in series.bins.iter().filter(|b| b.count >= settings.min_count) {
        let y = match relation {
            Relation::HoldingVsFrequency => b.mean_other,
            _ => b.mean_ret.abs(),
        };
        if !(y > 0.0 && y.is_finite()) {
            fit.notes
                .push(format!("bin at {} excluded: non-positive mean", b.center));
            continue;
        }
        xs.push(b.center.ln());
        ys.push(y.ln());
        ws.push(b.count as f64);
        fit.fit_range = Some(match fit.fit_range {
            None => (b.center, b.center),
            Some((lo, _)) => (lo, b.center),
        });
    }
    fit.bins_used = xs.len();
    match ols(&xs, &ys, settings.weighted.then_some(ws.as_slice())) {
        Some((slope, stderr, intercept, r2)) => {
            fit.estimate = Some(Estimate {
                value: relation.sign() * slope,
                stderr,
                intercept,
                r2,
            });
        }
        None => fit.notes.push(format!(
            "{} unavailable: {} usable bins (need 3)",
            relation.label(),
            fit.bins_used
        )),
    }
    fit
}
