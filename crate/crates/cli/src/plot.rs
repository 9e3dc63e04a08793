//! Training curves and per-distribution bar charts from run directories.
//!
//! Every figure is written twice: an SVG with axis labels and legend, and a
//! PNG rasterised here pixel by pixel so the bytes only depend on the data.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use sada_core::stats::{ci95, mean};
use sada_core::trainer::EVAL_HEADER;
use sada_core::{Error, EvalReport, Result};

use crate::manifest::RunManifest;

const PALETTE: [[u8; 3]; 8] = [
    [31, 119, 180],
    [255, 127, 14],
    [44, 160, 44],
    [214, 39, 40],
    [148, 103, 189],
    [140, 86, 75],
    [227, 119, 194],
    [127, 127, 127],
];

const W: u32 = 720;
const H: u32 = 420;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

pub struct RunData {
    pub label: String,
    /// `(step, mean_reward)` rows of the training distribution.
    pub curve: Vec<(u64, f64)>,
    /// Newest report under `reports/`, if any.
    pub report: Option<EvalReport>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub step: u64,
    pub n: usize,
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<CurvePoint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BarGroup {
    pub label: String,
    /// Per distribution: mean over runs and the 95% half width.
    pub values: Vec<Option<(f64, f64)>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bars {
    pub distributions: Vec<String>,
    pub groups: Vec<BarGroup>,
}

fn bad(path: &Path, reason: impl Into<String>) -> Error {
    Error::validation(path.display().to_string(), reason)
}

/// Rows of `eval.csv` whose distribution is `train`.
pub fn read_eval_curve(path: &Path) -> Result<Vec<(u64, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| bad(path, format!("cannot read eval metrics: {e}")))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == EVAL_HEADER => {}
        _ => return Err(bad(path, "missing eval.csv header")),
    }
    let mut out = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let c: Vec<&str> = line.split(',').collect();
        let row_err = |what: &str| bad(path, format!("line {}: bad {what}", n + 2));
        if c.len() != 5 {
            return Err(row_err("column count"));
        }
        let step: u64 = c[0].parse().map_err(|_| row_err("step"))?;
        let reward: f64 = c[2].parse().map_err(|_| row_err("mean_reward"))?;
        if !reward.is_finite() {
            return Err(row_err("mean_reward"));
        }
        if c[1] == "train" {
            out.push((step, reward));
        }
    }
    Ok(out)
}

fn newest_report(dir: &Path) -> Result<Option<EvalReport>> {
    let reports = dir.join("reports");
    if !reports.is_dir() {
        return Ok(None);
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&reports)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    let Some(p) = paths.pop() else { return Ok(None) };
    let text = std::fs::read_to_string(&p)?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| bad(&p, format!("corrupt report: {e}")))
}

pub fn load_runs(dirs: &[PathBuf]) -> Result<Vec<RunData>> {
    if dirs.is_empty() {
        return Err(Error::validation("runs", "no run directories given"));
    }
    let manifests = dirs.iter().map(|d| RunManifest::read(d)).collect::<Result<Vec<_>>>()?;
    let one_pool = manifests.windows(2).all(|w| w[0].aug_pool == w[1].aug_pool);
    dirs.iter()
        .zip(manifests)
        .map(|(d, m)| {
            let label = if one_pool { m.recipe.clone() } else { format!("{} [{}]", m.recipe, m.aug_pool) };
            Ok(RunData {
                label,
                curve: read_eval_curve(&d.join("eval.csv"))?,
                report: newest_report(d)?,
            })
        })
        .collect()
}

fn grouped<'a>(runs: &'a [RunData]) -> BTreeMap<&'a str, Vec<&'a RunData>> {
    let mut g: BTreeMap<&str, Vec<&RunData>> = BTreeMap::new();
    for r in runs {
        g.entry(&r.label).or_default().push(r);
    }
    g
}

/// Mean and `1.96 sem` band across the runs of each label, at every step
/// logged by at least one of them.
pub fn curves(runs: &[RunData]) -> Vec<Series> {
    grouped(runs)
        .into_iter()
        .map(|(label, rs)| {
            let mut by_step: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
            for r in rs {
                for &(s, v) in &r.curve {
                    by_step.entry(s).or_default().push(v);
                }
            }
            let points = by_step
                .into_iter()
                .map(|(step, v)| {
                    let (lo, hi) = ci95(&v);
                    CurvePoint {
                        step,
                        n: v.len(),
                        mean: mean(&v),
                        lo,
                        hi,
                    }
                })
                .collect();
            Series {
                label: label.to_string(),
                points,
            }
        })
        .collect()
}

/// Per label and distribution, the mean report reward across runs.
pub fn bars(runs: &[RunData]) -> Option<Bars> {
    let mut distributions: Vec<String> = Vec::new();
    for r in runs {
        for d in r.report.iter().flat_map(|rep| &rep.distributions) {
            if !distributions.contains(&d.distribution) {
                distributions.push(d.distribution.clone());
            }
        }
    }
    if distributions.is_empty() {
        return None;
    }
    let groups = grouped(runs)
        .into_iter()
        .map(|(label, rs)| {
            let values = distributions
                .iter()
                .map(|d| {
                    let v: Vec<f64> = rs
                        .iter()
                        .filter_map(|r| r.report.as_ref()?.get(d).map(|s| s.mean_reward))
                        .collect();
                    (!v.is_empty()).then(|| {
                        let (lo, hi) = ci95(&v);
                        (mean(&v), (hi - lo) / 2.0)
                    })
                })
                .collect();
            BarGroup {
                label: label.to_string(),
                values,
            }
        })
        .collect();
    Some(Bars { distributions, groups })
}

/// Data range mapped into the plot area.
#[derive(Clone, Copy)]
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let (x1, y1) = (if x1 > x0 { x1 } else { x0 + 1.0 }, if y1 > y0 { y1 } else { y0 + 1.0 });
        let pad = (y1 - y0) * 0.05;
        Self {
            x0,
            x1,
            y0: y0 - pad,
            y1: y1 + pad,
        }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (f64::from(W) - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        f64::from(H) - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (f64::from(H) - TOP - BOTTOM)
    }
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 1000.0 && v.fract() == 0.0 {
        format!("{}", v as i64)
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn hex(c: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn svg_open(title: &str, xlabel: &str, ylabel: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, f64::from(W) / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
        (LEFT + f64::from(W) - RIGHT) / 2.0,
        H - 12,
        escape(xlabel)
    );
    let cy = (TOP + f64::from(H) - BOTTOM) / 2.0;
    let _ = writeln!(
        s,
        r#"<text x="16" y="{cy:.1}" text-anchor="middle" transform="rotate(-90 16 {cy:.1})">{}</text>"#,
        escape(ylabel)
    );
    s
}

fn svg_axes(s: &mut String, f: &Frame, xt: &[(f64, String)], yt: &[f64]) {
    let (bx, by) = (f64::from(W) - RIGHT, f64::from(H) - BOTTOM);
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{by}" x2="{bx}" y2="{by}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{by}" stroke="black"/>"#);
    for (x, label) in xt {
        let _ = writeln!(
            s,
            r#"<line x1="{x:.1}" y1="{by}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            by + 4.0,
            by + 17.0,
            escape(label)
        );
    }
    for &y in yt {
        let py = f.py(y);
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{py:.1}" x2="{LEFT}" y2="{py:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 4.0,
            LEFT - 7.0,
            py + 4.0,
            fmt_tick(y)
        );
    }
}

fn svg_legend(s: &mut String, labels: &[String]) {
    let x = f64::from(W) - RIGHT + 12.0;
    for (i, l) in labels.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{:.1}" width="12" height="12" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            y - 10.0,
            hex(PALETTE[i % PALETTE.len()]),
            x + 18.0,
            y,
            escape(l)
        );
    }
}

struct Canvas(RgbImage);

impl Canvas {
    fn new() -> Self {
        Canvas(RgbImage::from_pixel(W, H, Rgb([255, 255, 255])))
    }

    fn blend(&mut self, x: i64, y: i64, c: [u8; 3], a: f64) {
        if x < 0 || y < 0 || x >= i64::from(W) || y >= i64::from(H) {
            return;
        }
        let p = self.0.get_pixel_mut(x as u32, y as u32);
        for k in 0..3 {
            p[k] = (f64::from(p[k]) * (1.0 - a) + f64::from(c[k]) * a).round() as u8;
        }
    }

    fn rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, c: [u8; 3], a: f64) {
        let (xa, xb) = (x0.min(x1).round() as i64, x0.max(x1).round() as i64);
        let (ya, yb) = (y0.min(y1).round() as i64, y0.max(y1).round() as i64);
        for y in ya..=yb {
            for x in xa..=xb {
                self.blend(x, y, c, a);
            }
        }
    }

    fn line(&mut self, (x0, y0): (f64, f64), (x1, y1): (f64, f64), c: [u8; 3], width: i64) {
        let n = (x1 - x0).abs().max((y1 - y0).abs()).ceil().max(1.0) as i64;
        for i in 0..=n {
            let t = i as f64 / n as f64;
            let (x, y) = ((x0 + (x1 - x0) * t).round() as i64, (y0 + (y1 - y0) * t).round() as i64);
            for dy in 0..width {
                for dx in 0..width {
                    self.blend(x + dx - width / 2, y + dy - width / 2, c, 1.0);
                }
            }
        }
    }

    /// Fills between two piecewise-linear curves sharing x coordinates.
    fn band(&mut self, xs: &[f64], lo: &[f64], hi: &[f64], c: [u8; 3], a: f64) {
        for i in 1..xs.len() {
            let (xa, xb) = (xs[i - 1].round() as i64, xs[i].round() as i64);
            for x in xa..xb.max(xa + 1) {
                let t = if xb > xa { (x - xa) as f64 / (xb - xa) as f64 } else { 0.0 };
                let top = hi[i - 1] + (hi[i] - hi[i - 1]) * t;
                let bot = lo[i - 1] + (lo[i] - lo[i - 1]) * t;
                for y in top.round() as i64..=bot.round() as i64 {
                    self.blend(x, y, c, a);
                }
            }
        }
    }

    fn axes(&mut self, f: &Frame, xt: &[f64], yt: &[f64]) {
        let (bx, by) = (f64::from(W) - RIGHT, f64::from(H) - BOTTOM);
        let black = [0, 0, 0];
        self.line((LEFT, by), (bx, by), black, 1);
        self.line((LEFT, TOP), (LEFT, by), black, 1);
        for &x in xt {
            self.line((x, by), (x, by + 4.0), black, 1);
        }
        for &y in yt {
            let py = f.py(y);
            self.line((LEFT - 4.0, py), (LEFT, py), black, 1);
        }
    }

    fn legend(&mut self, n: usize) {
        let x = f64::from(W) - RIGHT + 12.0;
        for i in 0..n {
            let y = TOP + 10.0 + 18.0 * i as f64;
            self.rect(x, y - 10.0, x + 11.0, y + 1.0, PALETTE[i % PALETTE.len()], 1.0);
        }
    }
}

/// Training-distribution reward against environment steps.
pub fn curve_figure(series: &[Series]) -> (String, RgbImage) {
    let pts = series.iter().flat_map(|s| &s.points);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x0 = x0.min(p.step as f64);
        x1 = x1.max(p.step as f64);
        y0 = y0.min(p.lo);
        y1 = y1.max(p.hi);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let f = Frame::new(x0, x1, y0, y1);
    let xt = ticks(f.x0, f.x1);
    let yt = ticks(f.y0, f.y1);
    let mut svg = svg_open("Training distribution reward", "environment steps", "episode reward");
    let xtl: Vec<(f64, String)> = xt.iter().map(|&x| (f.px(x), fmt_tick(x))).collect();
    svg_axes(&mut svg, &f, &xtl, &yt);
    let mut png = Canvas::new();
    for (i, s) in series.iter().enumerate() {
        let c = PALETTE[i % PALETTE.len()];
        let xs: Vec<f64> = s.points.iter().map(|p| f.px(p.step as f64)).collect();
        let lo: Vec<f64> = s.points.iter().map(|p| f.py(p.lo)).collect();
        let hi: Vec<f64> = s.points.iter().map(|p| f.py(p.hi)).collect();
        let mid: Vec<f64> = s.points.iter().map(|p| f.py(p.mean)).collect();
        let mut poly: Vec<String> = xs.iter().zip(&hi).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        poly.extend(xs.iter().zip(&lo).rev().map(|(x, y)| format!("{x:.2},{y:.2}")));
        let _ = writeln!(svg, r#"<polygon points="{}" fill="{}" fill-opacity="0.25"/>"#, poly.join(" "), hex(c));
        let line: Vec<String> = xs.iter().zip(&mid).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#, line.join(" "), hex(c));
        png.band(&xs, &lo, &hi, c, 0.25);
        for k in 1..xs.len() {
            png.line((xs[k - 1], mid[k - 1]), (xs[k], mid[k]), c, 2);
        }
        if xs.len() == 1 {
            png.rect(xs[0] - 2.0, mid[0] - 2.0, xs[0] + 2.0, mid[0] + 2.0, c, 1.0);
        }
    }
    png.axes(&f, &xtl.iter().map(|t| t.0).collect::<Vec<_>>(), &yt);
    let labels: Vec<String> = series.iter().map(|s| s.label.clone()).collect();
    svg_legend(&mut svg, &labels);
    png.legend(labels.len());
    svg.push_str("</svg>\n");
    (svg, png.0)
}

/// Grouped bars of mean reward per distribution with 95% whiskers.
pub fn bar_figure(b: &Bars) -> (String, RgbImage) {
    let mut y0 = 0.0f64;
    let mut y1 = 0.0f64;
    for v in b.groups.iter().flat_map(|g| g.values.iter().flatten()) {
        y0 = y0.min(v.0 - v.1);
        y1 = y1.max(v.0 + v.1);
    }
    let nd = b.distributions.len() as f64;
    let f = Frame::new(0.0, nd, y0, y1);
    let yt = ticks(f.y0, f.y1);
    let mut svg = svg_open("Zero-shot reward per distribution", "distribution", "mean episode reward");
    let xtl: Vec<(f64, String)> = b
        .distributions
        .iter()
        .enumerate()
        .map(|(i, d)| (f.px(i as f64 + 0.5), d.clone()))
        .collect();
    svg_axes(&mut svg, &f, &[], &yt);
    for (x, label) in &xtl {
        let by = f64::from(H) - BOTTOM + 12.0;
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{by:.1}" text-anchor="end" font-size="9" transform="rotate(-35 {x:.1} {by:.1})">{}</text>"#,
            escape(label)
        );
    }
    let mut png = Canvas::new();
    let ng = b.groups.len().max(1) as f64;
    let zero = f.py(0.0);
    for (gi, g) in b.groups.iter().enumerate() {
        let c = PALETTE[gi % PALETTE.len()];
        for (di, v) in g.values.iter().enumerate() {
            let Some((m, h)) = *v else { continue };
            let xa = f.px(di as f64 + 0.1 + 0.8 * gi as f64 / ng);
            let xb = f.px(di as f64 + 0.1 + 0.8 * (gi as f64 + 1.0) / ng);
            let top = f.py(m);
            let _ = writeln!(
                svg,
                r#"<rect x="{xa:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                top.min(zero),
                xb - xa,
                (top - zero).abs(),
                hex(c)
            );
            png.rect(xa, top, xb - 1.0, zero, c, 1.0);
            if h > 0.0 {
                let xm = (xa + xb) / 2.0;
                let _ = writeln!(
                    svg,
                    r#"<line x1="{xm:.2}" y1="{:.2}" x2="{xm:.2}" y2="{:.2}" stroke="black"/>"#,
                    f.py(m - h),
                    f.py(m + h)
                );
                png.line((xm, f.py(m - h)), (xm, f.py(m + h)), [0, 0, 0], 1);
            }
        }
    }
    png.axes(&f, &xtl.iter().map(|t| t.0).collect::<Vec<_>>(), &yt);
    let labels: Vec<String> = b.groups.iter().map(|g| g.label.clone()).collect();
    svg_legend(&mut svg, &labels);
    png.legend(labels.len());
    svg.push_str("</svg>\n");
    (svg, png.0)
}

fn curve_csv(series: &[Series]) -> String {
    let mut s = String::from("label,step,n,mean,lo,hi\n");
    for se in series {
        for p in &se.points {
            let _ = writeln!(s, "{},{},{},{},{},{}", se.label, p.step, p.n, p.mean, p.lo, p.hi);
        }
    }
    s
}

fn bars_csv(b: &Bars) -> String {
    let mut s = String::from("label,distribution,mean,half_width\n");
    for g in &b.groups {
        for (d, v) in b.distributions.iter().zip(&g.values) {
            if let Some((m, h)) = v {
                let _ = writeln!(s, "{},{d},{m},{h}", g.label);
            }
        }
    }
    s
}

/// Writes every figure for `runs` into `out` and returns the paths.
pub fn plot_runs(dirs: &[PathBuf], out: &Path) -> Result<Vec<PathBuf>> {
    let runs = load_runs(dirs)?;
    std::fs::create_dir_all(out)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, bytes: &[u8]| -> Result<()> {
        let p = out.join(name);
        std::fs::write(&p, bytes)?;
        written.push(p);
        Ok(())
    };
    let series = curves(&runs);
    let (svg, png) = curve_figure(&series);
    emit("training_curve.csv", curve_csv(&series).as_bytes())?;
    emit("training_curve.svg", svg.as_bytes())?;
    emit("training_curve.png", &encode_png(&png)?)?;
    if let Some(b) = bars(&runs) {
        let (svg, png) = bar_figure(&b);
        emit("zero_shot.csv", bars_csv(&b).as_bytes())?;
        emit("zero_shot.svg", svg.as_bytes())?;
        emit("zero_shot.png", &encode_png(&png)?)?;
    }
    Ok(written)
}

fn encode_png(img: &RgbImage) -> Result<Vec<u8>> {
    let mut buf = std::io::Cursor::new(Vec::new());
    img.write_to(&mut buf, image::ImageFormat::Png)
        .map_err(|e| Error::validation("png", e.to_string()))?;
    Ok(buf.into_inner())
}
