//! Minimal hand-written SVG: truth-vs-estimate time series and Tukey
//! boxplots of the error channels.

use std::fmt::Write as _;
use std::str::FromStr;

use eposit::io_formats::ResultRow;
use eposit::metrics::{boxplot, BoxplotSummary, Channel};
use eposit::pose::Pose;

use crate::CliError;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Series(Channel),
    BoxplotRot,
    BoxplotTrans,
}

impl FromStr for PlotKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "boxplot_rot" => return Ok(PlotKind::BoxplotRot),
            "boxplot_trans" => return Ok(PlotKind::BoxplotTrans),
            _ => {}
        }
        Channel::ALL.into_iter().find(|c| c.name() == s).map(PlotKind::Series).ok_or_else(|| {
            CliError::Validation(format!(
                "unknown channel `{s}` (expected rot_x, rot_y, rot_z, trans_x, trans_y, trans_z, boxplot_rot or boxplot_trans)"
            ))
        })
    }
}

fn pose_channel(p: &Pose, c: Channel) -> f64 {
    let i = c.index();
    if i < 3 {
        p.euler_xyz_deg()[i]
    } else {
        p.translation[i - 3]
    }
}

/// Linear map of `[lo, hi]` onto `[a, b]`.
#[derive(Clone, Copy)]
struct Scale {
    lo: f64,
    hi: f64,
    a: f64,
    b: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, a: f64, b: f64) -> Self {
        let (lo, hi) = if hi - lo > 1e-12 { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        let pad = 0.05 * (hi - lo);
        Self { lo: lo - pad, hi: hi + pad, a, b }
    }

    fn map(&self, v: f64) -> f64 {
        self.a + (v - self.lo) / (self.hi - self.lo) * (self.b - self.a)
    }
}

fn header(s: &mut String, title: &str) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ =
        writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Frame plus five y ticks.
fn axes(s: &mut String, y: &Scale, y_label: &str) {
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
    let _ =
        writeln!(s, r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1);
    for k in 0..=4 {
        let v = y.lo + (y.hi - y.lo) * k as f64 / 4.0;
        let py = y.map(v);
        let _ = writeln!(s, r##"<line x1="{}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/>"##, x0 - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{v:.3}</text>"#, x0 - 8.0, py + 4.0);
    }
    let _ = writeln!(
        s,
        r#"<text transform="translate(16 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn polyline(s: &mut String, pts: impl Iterator<Item = (f64, f64)>, color: &str, label: &str) {
    let coords: Vec<String> = pts.map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(
        s,
        r#"<polyline class="curve" data-label="{}" fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
        escape(label),
        coords.join(" ")
    );
}

fn series(c: Channel, runs: &[(String, Vec<ResultRow>)]) -> String {
    let truth: Vec<(f64, f64)> = runs[0].1.iter().map(|r| (r.t, pose_channel(&r.truth, c))).collect();
    let estimates: Vec<Vec<(f64, f64)>> =
        runs.iter().map(|(_, rows)| rows.iter().map(|r| (r.t, pose_channel(&r.estimate, c))).collect()).collect();
    let all = truth.iter().chain(estimates.iter().flatten());
    let (tmin, tmax, vmin, vmax) = all.fold((f64::MAX, f64::MIN, f64::MAX, f64::MIN), |(a, b, c, d), &(t, v)| {
        (a.min(t), b.max(t), c.min(v), d.max(v))
    });
    let xs = Scale::new(tmin, tmax, MARGIN_L, WIDTH - MARGIN_R);
    let ys = Scale::new(vmin, vmax, HEIGHT - MARGIN_B, MARGIN_T);

    let mut s = String::new();
    header(&mut s, &format!("{c}: truth and estimate"));
    axes(&mut s, &ys, &format!("{} [{}]", c.name(), c.unit()));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">t</text>"#, WIDTH / 2.0, HEIGHT - 12.0);
    polyline(&mut s, truth.iter().map(|&(t, v)| (xs.map(t), ys.map(v))), "black", "truth");
    for (k, ((label, _), est)) in runs.iter().zip(&estimates).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        polyline(&mut s, est.iter().map(|&(t, v)| (xs.map(t), ys.map(v))), color, &format!("estimate {label}"));
    }
    let legend = std::iter::once(("truth".to_string(), "black"))
        .chain(runs.iter().enumerate().map(|(k, (l, _))| (format!("estimate {l}"), PALETTE[k % PALETTE.len()])));
    for (k, (label, color)) in legend.enumerate() {
        let y = MARGIN_T + 16.0 + 16.0 * k as f64;
        let x = MARGIN_L + 10.0;
        let _ =
            writeln!(s, r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/>"#, x + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, x + 26.0, y + 4.0, escape(&label));
    }
    s.push_str("</svg>\n");
    s
}

fn boxes(channels: [Channel; 3], runs: &[(String, Vec<ResultRow>)]) -> Result<String, CliError> {
    let mut stats: Vec<(String, usize, BoxplotSummary, Vec<f64>)> = Vec::new();
    for (label, rows) in runs {
        for (k, c) in channels.into_iter().enumerate() {
            let v: Vec<f64> = rows.iter().map(|r| r.error.channel(c)).collect();
            let b = boxplot(&v).map_err(|e| CliError::Validation(e.to_string()))?;
            let outliers = v.into_iter().filter(|x| *x < b.whisker_lo || *x > b.whisker_hi).collect();
            stats.push((format!("{} {label}", c.name()), k, b, outliers));
        }
    }
    let (lo, hi) = stats.iter().fold((f64::MAX, f64::MIN), |(lo, hi), (_, _, b, out)| {
        let lo = out.iter().copied().fold(lo.min(b.whisker_lo), f64::min);
        let hi = out.iter().copied().fold(hi.max(b.whisker_hi), f64::max);
        (lo, hi)
    });
    let ys = Scale::new(lo, hi, HEIGHT - MARGIN_B, MARGIN_T);
    let slot = (WIDTH - MARGIN_L - MARGIN_R) / stats.len() as f64;
    let half = (slot * 0.3).min(30.0);

    let unit = channels[0].unit();
    let mut s = String::new();
    header(&mut s, &format!("{} errors", if unit == "deg" { "rotation" } else { "translation" }));
    axes(&mut s, &ys, &format!("error [{unit}]"));
    for (n, (label, k, b, outliers)) in stats.iter().enumerate() {
        let cx = MARGIN_L + slot * (n as f64 + 0.5);
        let color = PALETTE[*k];
        let (q1, q3, med) = (ys.map(b.q1), ys.map(b.q3), ys.map(b.median));
        let (wlo, whi) = (ys.map(b.whisker_lo), ys.map(b.whisker_hi));
        let _ = writeln!(s, r#"<g class="box" data-label="{}">"#, escape(label));
        let _ = writeln!(
            s,
            r#"<line x1="{cx:.2}" y1="{wlo:.2}" x2="{cx:.2}" y2="{q1:.2}" stroke="black" stroke-dasharray="4 2"/>"#
        );
        let _ = writeln!(
            s,
            r#"<line x1="{cx:.2}" y1="{q3:.2}" x2="{cx:.2}" y2="{whi:.2}" stroke="black" stroke-dasharray="4 2"/>"#
        );
        for w in [wlo, whi] {
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{w:.2}" x2="{:.2}" y2="{w:.2}" stroke="black"/>"#,
                cx - half / 2.0,
                cx + half / 2.0
            );
        }
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{q3:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            cx - half,
            2.0 * half,
            (q1 - q3).max(0.5)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{med:.2}" x2="{:.2}" y2="{med:.2}" stroke="{color}" stroke-width="2"/>"#,
            cx - half,
            cx + half
        );
        for o in outliers {
            let _ =
                writeln!(s, r#"<circle cx="{cx:.2}" cy="{:.2}" r="2.5" fill="none" stroke="{color}"/>"#, ys.map(*o));
        }
        let _ = writeln!(s, "</g>");
        let _ = writeln!(
            s,
            r#"<text x="{cx:.2}" y="{}" text-anchor="middle" font-size="10">{}</text>"#,
            HEIGHT - MARGIN_B + 16.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// One SVG document. Series plots draw the first run's truth plus one
/// estimate curve per run; boxplots draw three boxes per run.
pub fn render(kind: PlotKind, runs: &[(String, Vec<ResultRow>)]) -> Result<String, CliError> {
    if runs.is_empty() || runs.iter().any(|(_, rows)| rows.is_empty()) {
        return Err(CliError::Validation("nothing to plot: no result rows".into()));
    }
    match kind {
        PlotKind::Series(c) => Ok(series(c, runs)),
        PlotKind::BoxplotRot => boxes([Channel::RotX, Channel::RotY, Channel::RotZ], runs),
        PlotKind::BoxplotTrans => boxes([Channel::TransX, Channel::TransY, Channel::TransZ], runs),
    }
}
