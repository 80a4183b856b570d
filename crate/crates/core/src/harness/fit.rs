use super::{GapTrace, HarnessError};

/// Minimum number of points a slope fit needs.
pub const MIN_FIT_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub t_lo: u64,
    pub t_hi: u64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub points: usize,
}

/// Least-squares fit of `log gap` against `log t` over rows with
/// `t_lo ≤ t ≤ t_hi`.
///
/// A window containing nonpositive gaps is shrunk to the positive run that
/// starts at its first positive gap, with a warning.
pub fn fit_loglog_slope(trace: &GapTrace, t_lo: u64, t_hi: u64) -> Result<RateFit, HarnessError> {
    let window: Vec<(u64, f64)> = trace.gaps().filter(|&(t, _)| t >= t_lo && t <= t_hi).collect();
    let start = window.iter().position(|&(_, g)| g > 0.0).unwrap_or(window.len());
    let len = window[start..]
        .iter()
        .position(|&(_, g)| !(g > 0.0))
        .unwrap_or(window.len() - start);
    let pts = &window[start..start + len];
    if pts.len() != window.len() {
        if let (Some(a), Some(b)) = (pts.first(), pts.last()) {
            log::warn!(
                "nonpositive gaps in [{t_lo}, {t_hi}]; fitting over [{}, {}] instead",
                a.0,
                b.0
            );
        }
    }
    if pts.len() < MIN_FIT_POINTS {
        return Err(HarnessError::Numeric(format!(
            "only {} positive gaps in [{t_lo}, {t_hi}]; need {MIN_FIT_POINTS}",
            pts.len()
        )));
    }
    let xs: Vec<f64> = pts.iter().map(|&(t, _)| (t as f64).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|&(_, g)| g.ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    let n = xs.len() as f64;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    Ok(RateFit {
        slope,
        intercept,
        t_lo: pts[0].0,
        t_hi: pts[pts.len() - 1].0,
        residual: (rss / n).sqrt(),
        points: pts.len(),
    })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
