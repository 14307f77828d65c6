//! Posterior summaries and plot data.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::backends::Trace;
use crate::error::{Error, Result};

/// Quantile levels reported by [`summary`], in percent.
pub const SUMMARY_QUANTILES: [f64; 5] = [2.5, 25.0, 50.0, 75.0, 97.5];

const BATCHES: usize = 20;

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Sums run over sorted values so the result does not depend on sample order.
pub fn mean(samples: &[f64]) -> f64 {
    sorted(samples).iter().sum::<f64>() / samples.len() as f64
}

/// Sample standard deviation (n − 1 denominator); 0 for fewer than two values.
pub fn sd(samples: &[f64]) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let s = sorted(samples);
    let m = s.iter().sum::<f64>() / n as f64;
    (s.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Quantile of already sorted data by linear interpolation between order
/// statistics; `p` in [0, 1].
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty data");
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quantile(samples: &[f64], p: f64) -> f64 {
    quantile_sorted(&sorted(samples), p)
}

/// Highest posterior density interval: the narrowest window holding
/// `ceil((1 − alpha)·n)` sorted samples, earliest on ties.
pub fn hpd(samples: &[f64], alpha: f64) -> Result<(f64, f64)> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let s = sorted(samples);
    // guard against 0.95·100 landing a hair above 95
    let m = (((1.0 - alpha) * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    let mut best = 0;
    let mut width = f64::INFINITY;
    for i in 0..=n - m {
        let w = s[i + m - 1] - s[i];
        if w < width {
            width = w;
            best = i;
        }
    }
    Ok((s[best], s[best + m - 1]))
}

/// Monte Carlo standard error by batch means over 20 batches.
pub fn mc_error(samples: &[f64]) -> Result<f64> {
    let n = samples.len();
    if n < BATCHES {
        return Err(Error::TooFewSamples { needed: BATCHES, got: n });
    }
    let b = n / BATCHES;
    let means: Vec<f64> = samples.chunks_exact(b).take(BATCHES).map(mean).collect();
    Ok(sd(&means) / (BATCHES as f64).sqrt())
}

/// Effective sample size with Geyer's initial positive sequence. A constant
/// series has ESS 0.
pub fn ess(samples: &[f64]) -> Result<f64> {
    let n = samples.len();
    if n < 100 {
        return Err(Error::TooFewSamples { needed: 100, got: n });
    }
    let m = mean(samples);
    let c: Vec<f64> = samples.iter().map(|x| x - m).collect();
    let acov = |k: usize| c[..n - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    let g0 = acov(0);
    if g0 <= 0.0 {
        return Ok(0.0);
    }
    let mut sum_pairs = 0.0;
    let mut k = 0;
    while k + 1 < n {
        let pair = (acov(k) + acov(k + 1)) / g0;
        if pair <= 0.0 {
            break;
        }
        sum_pairs += pair;
        k += 2;
    }
    let tau = (-1.0 + 2.0 * sum_pairs).max(1.0 / n as f64);
    Ok(n as f64 / tau)
}

/// Gaussian kernel density estimate with Scott's bandwidth, on 200 points
/// spanning the data range padded by three bandwidths.
pub fn kde(samples: &[f64]) -> (Vec<f64>, Vec<f64>) {
    const POINTS: usize = 200;
    let n = samples.len() as f64;
    let s = sd(samples);
    let bw = if s > 0.0 { n.powf(-0.2) * s } else { 1.0 };
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * bw;
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * bw;
    let norm = 1.0 / (n * bw * (2.0 * std::f64::consts::PI).sqrt());
    let xs: Vec<f64> = (0..POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (POINTS - 1) as f64)
        .collect();
    let ys = xs
        .iter()
        .map(|&x| {
            norm * samples
                .iter()
                .map(|&v| (-0.5 * ((x - v) / bw).powi(2)).exp())
                .sum::<f64>()
        })
        .collect();
    (xs, ys)
}

/// Counts for every integer from the minimum to the maximum sample.
pub fn int_histogram(samples: &[f64]) -> Vec<(i64, usize)> {
    if samples.is_empty() {
        return Vec::new();
    }
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min).round() as i64;
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max).round() as i64;
    let mut counts = vec![0usize; (hi - lo + 1) as usize];
    for &v in samples {
        counts[(v.round() as i64 - lo) as usize] += 1;
    }
    counts.into_iter().enumerate().map(|(i, c)| (lo + i as i64, c)).collect()
}

/// Posterior statistics for one flattened component.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub mc_error: f64,
    pub hpd_lower: f64,
    pub hpd_upper: f64,
    /// Values at [`SUMMARY_QUANTILES`].
    pub quantiles: [f64; 5],
}

impl SummaryRow {
    pub fn from_samples(name: &str, samples: &[f64]) -> Result<Self> {
        let s = sorted(samples);
        let (hpd_lower, hpd_upper) = hpd(samples, 0.05)?;
        Ok(SummaryRow {
            name: name.to_string(),
            mean: mean(samples),
            sd: sd(samples),
            mc_error: mc_error(samples)?,
            hpd_lower,
            hpd_upper,
            quantiles: SUMMARY_QUANTILES.map(|q| quantile_sorted(&s, q / 100.0)),
        })
    }
}

fn selected<'a>(trace: &'a Trace, vars: &'a [String]) -> Result<Vec<&'a str>> {
    if vars.is_empty() {
        return Ok(trace.var_names());
    }
    vars.iter()
        .map(|v| trace.spec(v).map(|s| s.name.as_str()))
        .collect()
}

/// One row per flattened component, grouped by variable.
pub fn summary(trace: &Trace, vars: &[String]) -> Result<Vec<(String, Vec<SummaryRow>)>> {
    let mut out = Vec::new();
    for name in selected(trace, vars)? {
        let spec = trace.spec(name)?;
        let rows = spec
            .component_names()
            .iter()
            .enumerate()
            .map(|(k, comp)| SummaryRow::from_samples(comp, &trace.component(name, k)?))
            .collect::<Result<Vec<_>>>()?;
        out.push((name.to_string(), rows));
    }
    Ok(out)
}

/// Text summary: one block per variable with a statistics table and a
/// quantile ruler, one line per component.
pub fn summary_text(trace: &Trace, vars: &[String]) -> Result<String> {
    let mut s = String::new();
    for (name, rows) in summary(trace, vars)? {
        let _ = writeln!(s, "{name}:\n");
        let _ = writeln!(s, "  {:<17}{:<17}{:<17}95% HPD interval", "Mean", "SD", "MC Error");
        let _ = writeln!(s, "  {}\n", "-".repeat(67));
        for r in &rows {
            let _ = writeln!(
                s,
                "  {:<17}{:<17}{:<17}[{:.3}, {:.3}]",
                format!("{:.3}", r.mean),
                format!("{:.3}", r.sd),
                format!("{:.3}", r.mc_error),
                r.hpd_lower,
                r.hpd_upper
            );
        }
        let _ = writeln!(s, "\n  Posterior quantiles:");
        let _ = writeln!(s, "  {:<15}{:<15}{:<15}{:<15}97.5", "2.5", "25", "50", "75");
        let _ = writeln!(
            s,
            "  |{}|{}|{}|{}|\n",
            "-".repeat(14),
            "=".repeat(14),
            "=".repeat(14),
            "-".repeat(14)
        );
        for r in &rows {
            let q = r.quantiles.map(|v| format!("{v:.3}"));
            let _ = writeln!(s, "  {:<15}{:<15}{:<15}{:<15}{}", q[0], q[1], q[2], q[3], q[4]);
        }
        s.push_str("\n\n");
    }
    Ok(s)
}

/// Plot series for one flattened component.
#[derive(Clone, Debug, PartialEq)]
pub enum Marginal {
    Density { x: Vec<f64>, density: Vec<f64> },
    Histogram(Vec<(i64, usize)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotData {
    /// Flattened component name.
    pub name: String,
    pub marginal: Marginal,
    /// Draws in sampling order, chains concatenated.
    pub draws: Vec<f64>,
}

/// Marginal density (or histogram for integer variables) and draw series
/// for every component of the selected variables.
pub fn traceplot_data(trace: &Trace, vars: &[String]) -> Result<Vec<PlotData>> {
    let mut out = Vec::new();
    for name in selected(trace, vars)? {
        let is_int = trace.is_int(name)?;
        let spec = trace.spec(name)?;
        for (k, comp) in spec.component_names().into_iter().enumerate() {
            let draws = trace.component(name, k)?;
            let marginal = if is_int {
                Marginal::Histogram(int_histogram(&draws))
            } else {
                let (x, density) = kde(&draws);
                Marginal::Density { x, density }
            };
            out.push(PlotData {
                name: comp,
                marginal,
                draws,
            });
        }
    }
    Ok(out)
}

/// Write `<name>_density.csv` (or `<name>_hist.csv`) and `<name>_draws.csv`
/// for each entry. Returns the paths written.
pub fn write_plot_data(data: &[PlotData], dir: impl AsRef<Path>) -> Result<Vec<std::path::PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for d in data {
        let (file, body) = match &d.marginal {
            Marginal::Density { x, density } => {
                let mut b = String::from("x,density\n");
                for (x, y) in x.iter().zip(density) {
                    let _ = writeln!(b, "{x:?},{y:?}");
                }
                (format!("{}_density.csv", d.name), b)
            }
            Marginal::Histogram(h) => {
                let mut b = String::from("value,count\n");
                for (v, c) in h {
                    let _ = writeln!(b, "{v},{c}");
                }
                (format!("{}_hist.csv", d.name), b)
            }
        };
        let path = dir.join(file);
        fs::write(&path, body)?;
        written.push(path);

        let mut b = String::from("draw,value\n");
        for (i, v) in d.draws.iter().enumerate() {
            let _ = writeln!(b, "{i},{v:?}");
        }
        let path = dir.join(format!("{}_draws.csv", d.name));
        fs::write(&path, b)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_to_hundred() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        assert!((quantile(&xs, 0.025) - 3.475).abs() < 1e-12);
        assert_eq!(quantile(&xs, 0.5), 50.5);
        assert_eq!(hpd(&xs, 0.05).unwrap(), (1.0, 95.0));
    }

    #[test]
    fn degenerate_series() {
        let c = vec![5.0; 200];
        assert_eq!(sd(&c), 0.0);
        assert_eq!(mc_error(&c).unwrap(), 0.0);
        assert_eq!(hpd(&c, 0.05).unwrap(), (5.0, 5.0));
        assert_eq!(ess(&c).unwrap(), 0.0);
        let alt: Vec<f64> = (0..200).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_eq!(mc_error(&alt).unwrap(), 0.0);
    }

    #[test]
    fn too_few() {
        assert!(matches!(hpd(&[1.0], 0.05), Err(Error::TooFewSamples { .. })));
        assert!(matches!(mc_error(&[1.0; 19]), Err(Error::TooFewSamples { .. })));
        assert!(matches!(ess(&[1.0; 99]), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn histogram_fills_gaps() {
        assert_eq!(int_histogram(&[3.0, 5.0, 5.0]), vec![(3, 1), (4, 0), (5, 2)]);
    }
}
