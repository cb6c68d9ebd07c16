//! Gaussian kernel density curves and a minimal SVG renderer.

use serde::Serialize;

pub const DENSITY_POINTS: usize = 128;

/// Silverman's rule of thumb, with fallbacks for degenerate samples.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 1.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr / 1.34),
        (true, false) => sd,
        (false, true) => iqr / 1.34,
        (false, false) => return 1.0,
    };
    0.9 * spread * (n as f64).powf(-0.2)
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn gaussian_kde(values: &[f64], bandwidth: f64, at: &[f64]) -> Vec<f64> {
    let norm = 1.0 / (values.len() as f64 * bandwidth * (2.0 * std::f64::consts::PI).sqrt());
    at.iter()
        .map(|&x| {
            values
                .iter()
                .map(|&v| (-0.5 * ((x - v) / bandwidth).powi(2)).exp())
                .sum::<f64>()
                * norm
        })
        .collect()
}

/// Paired densities of two samples on a shared grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityCurve {
    pub column: String,
    pub abscissa: Vec<f64>,
    pub density_original: Vec<f64>,
    pub density_imputed: Vec<f64>,
}

pub fn density_curve(column: &str, original: &[f64], imputed: &[f64]) -> Option<DensityCurve> {
    if original.is_empty() || imputed.is_empty() {
        return None;
    }
    let h_orig = silverman_bandwidth(original);
    let h_imp = silverman_bandwidth(imputed);
    let pad = 3.0 * h_orig.max(h_imp);
    let lo = original.iter().chain(imputed).copied().fold(f64::INFINITY, f64::min) - pad;
    let hi = original.iter().chain(imputed).copied().fold(f64::NEG_INFINITY, f64::max) + pad;
    let step = (hi - lo) / (DENSITY_POINTS - 1) as f64;
    let abscissa: Vec<f64> = (0..DENSITY_POINTS).map(|i| lo + step * i as f64).collect();
    Some(DensityCurve {
        column: column.to_string(),
        density_original: gaussian_kde(original, h_orig, &abscissa),
        density_imputed: gaussian_kde(imputed, h_imp, &abscissa),
        abscissa,
    })
}

/// Two-line SVG plot of a density curve.
pub fn density_svg(curve: &DensityCurve, label_original: &str, label_imputed: &str) -> String {
    const W: f64 = 480.0;
    const H: f64 = 320.0;
    const M: f64 = 40.0;
    let (x0, x1) = (curve.abscissa[0], *curve.abscissa.last().unwrap());
    let ymax = curve
        .density_original
        .iter()
        .chain(&curve.density_imputed)
        .copied()
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let sx = |x: f64| M + (x - x0) / (x1 - x0).max(f64::MIN_POSITIVE) * (W - 2.0 * M);
    let sy = |y: f64| H - M - y / ymax * (H - 2.0 * M);
    let line = |ys: &[f64]| {
        curve
            .abscissa
            .iter()
            .zip(ys)
            .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let escape = |s: &str| s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n",
            "<text x=\"{m}\" y=\"20\" font-size=\"14\">{title}</text>\n",
            "<line x1=\"{m}\" y1=\"{base}\" x2=\"{right}\" y2=\"{base}\" stroke=\"black\"/>\n",
            "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"{a}\"/>\n",
            "<polyline fill=\"none\" stroke=\"firebrick\" stroke-width=\"2\" stroke-dasharray=\"6 3\" points=\"{b}\"/>\n",
            "<text x=\"{right}\" y=\"20\" font-size=\"12\" text-anchor=\"end\" fill=\"steelblue\">{la}</text>\n",
            "<text x=\"{right}\" y=\"36\" font-size=\"12\" text-anchor=\"end\" fill=\"firebrick\">{lb}</text>\n",
            "<text x=\"{m}\" y=\"{lab}\" font-size=\"11\">{x0:.3}</text>\n",
            "<text x=\"{right}\" y=\"{lab}\" font-size=\"11\" text-anchor=\"end\">{x1:.3}</text>\n",
            "</svg>\n"
        ),
        w = W,
        h = H,
        m = M,
        base = H - M,
        right = W - M,
        lab = H - M + 16.0,
        title = escape(&curve.column),
        a = line(&curve.density_original),
        b = line(&curve.density_imputed),
        la = escape(label_original),
        lb = escape(label_imputed),
        x0 = x0,
        x1 = x1,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kde_integrates_to_one() {
        let values = [0.0, 1.0, 1.5, 3.0, 4.2];
        let curve = density_curve("x", &values, &values).unwrap();
        assert_eq!(curve.abscissa.len(), DENSITY_POINTS);
        let step = curve.abscissa[1] - curve.abscissa[0];
        let area: f64 = curve.density_original.iter().sum::<f64>() * step;
        assert!((area - 1.0).abs() < 0.01, "{area}");
        assert_eq!(curve.density_original, curve.density_imputed);
    }

    #[test]
    fn silverman_matches_formula() {
        let values: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let sd = (values.iter().map(|v| (v - 49.5f64).powi(2)).sum::<f64>() / 99.0).sqrt();
        let iqr = 74.25 - 24.75;
        let expect = 0.9 * sd.min(iqr / 1.34) * 100f64.powf(-0.2);
        assert!((silverman_bandwidth(&values) - expect).abs() < 1e-12);
        assert_eq!(silverman_bandwidth(&[2.0, 2.0, 2.0]), 1.0);
    }

    #[test]
    fn svg_is_well_formed() {
        let curve = density_curve("a<b", &[1.0, 2.0], &[1.5]).unwrap();
        let svg = density_svg(&curve, "original", "imputed");
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a&lt;b"));
    }
}
