//! Presentation-only SVG plots: log-log tail curves (one polyline per k) and
//! ratio-vs-n stability.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::HarnessError;
use crate::summary::Summary;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn svg_header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"14\">{title}</text>\n",
        WIDTH / 2.0
    )
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.x_min) / (self.x_max - self.x_min) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN - (v - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - 2.0 * MARGIN)
    }

    fn axes(&self, x_label: &str, y_label: &str) -> String {
        let x0 = MARGIN;
        let x1 = WIDTH - MARGIN;
        let y0 = HEIGHT - MARGIN;
        let y1 = MARGIN;
        format!(
            "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
             <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">{x_label}</text>\n\
             <text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\" transform=\"rotate(-90 16 {})\">{y_label}</text>\n",
            (x0 + x1) / 2.0,
            HEIGHT - 16.0,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
        )
    }
}

/// Log-log tail curves: `ln p` against `ln t`, one polyline per `(n, k)`
/// series present in the cells.
pub fn tail_plot(summary: &Summary) -> String {
    let pts: Vec<(usize, usize, f64, f64)> = summary
        .cells
        .iter()
        .filter(|c| c.prob > 0.0 && c.t > 0.0)
        .map(|c| (c.n, c.i_or_k, c.t.ln(), c.prob.ln()))
        .collect();
    let mut svg = svg_header(&format!("{}: tail probabilities (log-log)", summary.kind));
    if pts.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let frame = Frame {
        x_min: pts.iter().map(|p| p.2).fold(f64::INFINITY, f64::min),
        x_max: pts.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max),
        y_min: pts.iter().map(|p| p.3).fold(f64::INFINITY, f64::min),
        y_max: pts.iter().map(|p| p.3).fold(f64::NEG_INFINITY, f64::max),
    };
    svg.push_str(&frame.axes("ln t", "ln P"));
    let mut series: Vec<(usize, usize)> = pts.iter().map(|p| (p.0, p.1)).collect();
    series.dedup();
    series.sort_unstable();
    series.dedup();
    for (si, &(n, k)) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let coords: Vec<String> = pts
            .iter()
            .filter(|p| p.0 == n && p.1 == k)
            .map(|p| format!("{:.2},{:.2}", frame.x(p.2), frame.y(p.3)))
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            coords.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" fill=\"{color}\">n={n} k={k}</text>\n",
            WIDTH - MARGIN + 4.0,
            MARGIN + 16.0 * si as f64,
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Ratio stability: median (with quartile whiskers) of the normalized order
/// statistic against n.
pub fn ratio_plot(summary: &Summary) -> String {
    let mut svg = svg_header(&format!("{}: normalized ratios vs n", summary.kind));
    if summary.ratios.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let xs: Vec<f64> = summary.ratios.iter().map(|r| (r.n as f64).ln()).collect();
    let lo = summary.ratios.iter().map(|r| r.q25).fold(f64::INFINITY, f64::min);
    let hi = summary
        .ratios
        .iter()
        .map(|r| r.q75)
        .fold(f64::NEG_INFINITY, f64::max);
    let frame = Frame {
        x_min: xs.iter().cloned().fold(f64::INFINITY, f64::min) - 0.1,
        x_max: xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 0.1,
        y_min: (lo * 0.8).min(0.0),
        y_max: hi * 1.2 + 1e-9,
    };
    svg.push_str(&frame.axes("ln n", "ratio"));
    let mut med_coords = Vec::new();
    for (r, &x) in summary.ratios.iter().zip(&xs) {
        let cx = frame.x(x);
        med_coords.push(format!("{:.2},{:.2}", cx, frame.y(r.median)));
        svg.push_str(&format!(
            "<line x1=\"{cx:.2}\" y1=\"{:.2}\" x2=\"{cx:.2}\" y2=\"{:.2}\" stroke=\"#888\"/>\n",
            frame.y(r.q25),
            frame.y(r.q75)
        ));
        svg.push_str(&format!(
            "<circle cx=\"{cx:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{}\"/>\n",
            frame.y(r.median),
            PALETTE[0]
        ));
    }
    svg.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1\"/>\n",
        med_coords.join(" "),
        PALETTE[0]
    ));
    svg.push_str("</svg>\n");
    svg
}

/// Writes the plots for a summary under `dir`; returns the written paths.
pub fn write_plots(summary: &Summary, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut written = Vec::new();
    if !summary.cells.is_empty() {
        let path = dir.join("tails.svg");
        fs::write(&path, tail_plot(summary)).map_err(|e| HarnessError::io(&path, e))?;
        written.push(path);
    }
    if !summary.ratios.is_empty() {
        let path = dir.join("ratios.svg");
        fs::write(&path, ratio_plot(summary)).map_err(|e| HarnessError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentConfig, ExperimentKind};
    use crate::summary::{binomial_cell, ratio_entry};

    #[test]
    fn tail_plot_structure() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::SphereBaseline, 10, 1);
        cfg.n = Some(16);
        let mut s = Summary::new(&cfg);
        for k in [1usize, 2, 3] {
            for t in [0.25, 0.5, 0.75] {
                s.cells.push(binomial_cell(16, k, t, 2 + k, 10));
            }
        }
        let svg = tail_plot(&s);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        // one polyline per k series
        assert_eq!(svg.matches("<polyline").count(), 3);
        // angle brackets balance (rough well-formedness)
        assert_eq!(svg.matches('<').count(), svg.matches('>').count());
    }

    #[test]
    fn ratio_plot_structure() {
        let cfg = ExperimentConfig::new(ExperimentKind::EigvecNogapsReal, 10, 1);
        let mut s = Summary::new(&cfg);
        for n in [64usize, 128, 256] {
            let vals: Vec<f64> = (1..30).map(|x| 1.0 + 0.01 * x as f64).collect();
            s.ratios.push(ratio_entry(n, n - n / 8, &vals));
        }
        let svg = ratio_plot(&s);
        assert!(svg.contains("<circle"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
