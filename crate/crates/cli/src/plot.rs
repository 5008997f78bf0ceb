//! Static SVG figures. Output depends only on the input files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::args::PlotArgs;

const W: f64 = 720.0;
const H: f64 = 440.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 30.0, 50.0); // left, right, top, bottom
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Default, Clone)]
pub struct BandSeries {
    pub time: Vec<f64>,
    pub mean: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// `(model, quantity)` → band, in file order.
pub type UqTable = Vec<((String, String), BandSeries)>;

fn col(h: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    h.iter()
        .position(|x| x.trim() == name)
        .with_context(|| format!("{}: missing column '{name}'", path.display()))
}

fn num(rec: &csv::StringRecord, i: usize, path: &Path) -> Result<f64> {
    let line = rec.position().map_or(0, |p| p.line());
    rec.get(i)
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|x| x.is_finite())
        .with_context(|| format!("{}: line {line}: malformed number", path.display()))
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let f = fs::File::open(path).map_err(|e| ventsim_core::Error::io(path, e))?;
    Ok(csv::Reader::from_reader(f))
}

pub fn read_uq(path: &Path) -> Result<UqTable> {
    let mut rdr = reader(path)?;
    let h = rdr.headers()?.clone();
    let idx: Vec<usize> = ["time_s", "model", "quantity", "mean", "ci_low", "ci_high"]
        .iter()
        .map(|n| col(&h, n, path))
        .collect::<Result<_>>()?;
    let mut out: UqTable = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let key = (rec[idx[1]].trim().to_string(), rec[idx[2]].trim().to_string());
        let pos = match out.iter().position(|(k, _)| *k == key) {
            Some(p) => p,
            None => {
                out.push((key, BandSeries::default()));
                out.len() - 1
            }
        };
        let s = &mut out[pos].1;
        s.time.push(num(&rec, idx[0], path)?);
        s.mean.push(num(&rec, idx[3], path)?);
        s.lo.push(num(&rec, idx[4], path)?);
        s.hi.push(num(&rec, idx[5], path)?);
    }
    if out.is_empty() {
        bail!("{}: no report rows", path.display());
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Measurement {
    pub config: String,
    pub ach_mean: f64,
    pub ach_std: f64,
    pub start: f64,
    pub end: f64,
}

pub fn read_measurements(path: &Path) -> Result<Vec<Measurement>> {
    let mut rdr = reader(path)?;
    let h = rdr.headers()?.clone();
    let idx: Vec<usize> = ["config", "ach_mean", "ach_std", "start_s", "end_s"]
        .iter()
        .map(|n| col(&h, n, path))
        .collect::<Result<_>>()?;
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            Ok(Measurement {
                config: rec[idx[0]].trim().to_string(),
                ach_mean: num(&rec, idx[1], path)?,
                ach_std: num(&rec, idx[2], path)?,
                start: num(&rec, idx[3], path)?,
                end: num(&rec, idx[4], path)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SobolBox {
    pub model: String,
    pub parameter: String,
    /// min, q25, median, q75, max
    pub stats: [f64; 5],
}

/// `(window, quantity)` → boxes, in file order.
pub fn read_sobol(path: &Path) -> Result<Vec<((String, String), Vec<SobolBox>)>> {
    let mut rdr = reader(path)?;
    let h = rdr.headers()?.clone();
    let idx: Vec<usize> = ["window", "model", "quantity", "parameter", "min", "q25", "median", "q75", "max"]
        .iter()
        .map(|n| col(&h, n, path))
        .collect::<Result<_>>()?;
    let mut out: Vec<((String, String), Vec<SobolBox>)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let key = (rec[idx[0]].trim().to_string(), rec[idx[2]].trim().to_string());
        let b = SobolBox {
            model: rec[idx[1]].trim().to_string(),
            parameter: rec[idx[3]].trim().to_string(),
            stats: [
                num(&rec, idx[4], path)?,
                num(&rec, idx[5], path)?,
                num(&rec, idx[6], path)?,
                num(&rec, idx[7], path)?,
                num(&rec, idx[8], path)?,
            ],
        };
        match out.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(b),
            None => out.push((key, vec![b])),
        }
    }
    if out.is_empty() {
        bail!("{}: no index rows", path.display());
    }
    Ok(out)
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    mag * if r < 1.5 {
        1.0
    } else if r < 3.5 {
        2.0
    } else if r < 7.5 {
        5.0
    } else {
        10.0
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo < 1e-9 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Canvas {
    buf: String,
    x: (f64, f64),
    y: (f64, f64),
    x_ticks: bool,
}

impl Canvas {
    fn new(title: &str, xlabel: &str, ylabel: &str, x: (f64, f64), y: (f64, f64), x_ticks: bool) -> Self {
        let mut c = Canvas { buf: String::new(), x, y, x_ticks };
        let (l, r, t, b) = MARGIN;
        let _ = writeln!(
            c.buf,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(c.buf, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(c.buf, r#"<text x="{:.2}" y="18" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, esc(title));
        let _ = writeln!(
            c.buf,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            l + (W - l - r) / 2.0,
            H - 12.0,
            esc(xlabel)
        );
        let _ = writeln!(
            c.buf,
            r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            t + (H - t - b) / 2.0,
            esc(ylabel)
        );
        c.axes();
        c
    }

    fn px(&self, x: f64) -> f64 {
        let (l, r, _, _) = MARGIN;
        l + (x - self.x.0) / (self.x.1 - self.x.0) * (W - l - r)
    }

    fn py(&self, y: f64) -> f64 {
        let (_, _, t, b) = MARGIN;
        H - b - (y - self.y.0) / (self.y.1 - self.y.0) * (H - t - b)
    }

    fn axes(&mut self) {
        let (l, r, t, b) = MARGIN;
        let _ = writeln!(
            self.buf,
            r#"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            W - l - r,
            H - t - b
        );
        for (axis, (lo, hi)) in [(0, self.x), (1, self.y)] {
            if axis == 0 && !self.x_ticks {
                continue;
            }
            let step = nice_step(hi - lo);
            let mut v = (lo / step).ceil() * step;
            while v <= hi + 1e-9 * step {
                let decimals = (-step.log10().floor()).max(0.0) as usize;
                let label = format!("{:.*}", decimals, v);
                let label = if label.trim_start_matches(['-', '0', '.']).is_empty() { "0".to_string() } else { label };
                if axis == 0 {
                    let x = self.px(v);
                    let _ = writeln!(
                        self.buf,
                        r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
                        H - b,
                        H - b + 5.0,
                        H - b + 18.0
                    );
                } else {
                    let y = self.py(v);
                    let _ = writeln!(
                        self.buf,
                        r#"<line x1="{:.2}" y1="{y:.2}" x2="{l:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
                        l - 5.0,
                        l - 8.0,
                        y + 4.0
                    );
                }
                v += step;
            }
        }
    }

    fn polyline(&mut self, xs: &[f64], ys: &[f64], color: &str, width: f64) {
        let pts: Vec<String> = xs.iter().zip(ys).map(|(x, y)| format!("{:.2},{:.2}", self.px(*x), self.py(*y))).collect();
        let _ = writeln!(
            self.buf,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{width}"/>"#,
            pts.join(" ")
        );
    }

    fn band(&mut self, xs: &[f64], lo: &[f64], hi: &[f64], color: &str) {
        let mut pts: Vec<String> = xs.iter().zip(hi).map(|(x, y)| format!("{:.2},{:.2}", self.px(*x), self.py(*y))).collect();
        pts.extend(xs.iter().zip(lo).rev().map(|(x, y)| format!("{:.2},{:.2}", self.px(*x), self.py(*y))));
        let _ = writeln!(
            self.buf,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.25" stroke="none"/>"#,
            pts.join(" ")
        );
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, color: &str, dash: bool) {
        let d = if dash { r#" stroke-dasharray="4 3""# } else { "" };
        let _ = writeln!(
            self.buf,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}"{d}/>"#,
            self.px(x1),
            self.py(y1),
            self.px(x2),
            self.py(y2)
        );
    }

    fn legend(&mut self, entries: &[(String, &str)]) {
        let (l, _, t, _) = MARGIN;
        for (i, (name, color)) in entries.iter().enumerate() {
            let y = t + 14.0 + 16.0 * i as f64;
            let _ = writeln!(
                self.buf,
                r#"<rect x="{:.2}" y="{:.2}" width="12" height="10" fill="{color}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
                l + 10.0,
                y - 9.0,
                l + 27.0,
                y,
                esc(name)
            );
        }
    }

    fn finish(mut self) -> String {
        self.buf.push_str("</svg>\n");
        self.buf
    }
}

fn range_of<'a>(it: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

/// Mean line and shaded 95 % band per model.
pub fn band_plot(table: &UqTable, quantity: &str) -> Option<String> {
    let series: Vec<&(_, BandSeries)> = table.iter().filter(|((_, q), _)| q == quantity).collect();
    if series.is_empty() {
        return None;
    }
    let t0 = series[0].1.time[0];
    let celsius = quantity == "t_air";
    let conv = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| if celsius { x - 273.15 } else { *x }).collect() };
    let xr = range_of(series.iter().flat_map(|(_, s)| s.time.iter()));
    let xr = ((xr.0 - t0) / 3600.0, (xr.1 - t0) / 3600.0);
    let lo: Vec<f64> = series.iter().flat_map(|(_, s)| conv(&s.lo)).collect();
    let hi: Vec<f64> = series.iter().flat_map(|(_, s)| conv(&s.hi)).collect();
    let yr = padded(range_of(lo.iter()).0, range_of(hi.iter()).1);
    let (title, ylabel) = if celsius {
        ("Indoor air temperature", "T_air [°C]")
    } else {
        ("Air change rate", "ACH [1/h]")
    };
    let mut c = Canvas::new(title, "hours since start", ylabel, padded(xr.0, xr.1), yr, true);
    let mut legend = Vec::new();
    for (i, ((model, _), s)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let x: Vec<f64> = s.time.iter().map(|t| (t - t0) / 3600.0).collect();
        c.band(&x, &conv(&s.lo), &conv(&s.hi), color);
        c.polyline(&x, &conv(&s.mean), color, 1.5);
        legend.push((format!("{model} (mean, 95% CI)"), color));
    }
    c.legend(&legend);
    Some(c.finish())
}

/// Measured against predicted ACH, with error bars on both axes.
/// Returns the SVG and the number of measurements placed.
pub fn ach_scatter(table: &UqTable, model: &str, measurements: &[Measurement]) -> Result<(String, usize)> {
    let s = &table
        .iter()
        .find(|((m, q), _)| m == model && q == "ach")
        .with_context(|| format!("report has no ach rows for model '{model}'"))?
        .1;
    let mut pts = Vec::new();
    for m in measurements {
        let idx: Vec<usize> = (0..s.time.len()).filter(|&k| s.time[k] >= m.start && s.time[k] <= m.end).collect();
        if idx.is_empty() {
            eprintln!("warning: measurement {} [{}, {}] outside the report period", m.config, m.start, m.end);
            continue;
        }
        let avg = |v: &[f64]| idx.iter().map(|&k| v[k]).sum::<f64>() / idx.len() as f64;
        pts.push((m, avg(&s.mean), avg(&s.lo), avg(&s.hi)));
    }
    if pts.is_empty() {
        bail!("no measurement falls inside the report period");
    }
    let all: Vec<f64> = pts
        .iter()
        .flat_map(|(m, _, lo, hi)| [m.ach_mean - m.ach_std, m.ach_mean + m.ach_std, *lo, *hi])
        .collect();
    let (lo, hi) = range_of(all.iter());
    let r = padded(lo.min(0.0), hi);
    let mut c = Canvas::new("Predicted and measured air change rate", "measured ACH [1/h]", "predicted ACH [1/h]", r, r, true);
    c.line(r.0, r.0, r.1, r.1, "gray", true);
    let color = COLORS[0];
    for (m, mean, lo, hi) in &pts {
        c.line(m.ach_mean, *lo, m.ach_mean, *hi, color, false);
        c.line(m.ach_mean - m.ach_std, *mean, m.ach_mean + m.ach_std, *mean, color, false);
        let _ = writeln!(
            c.buf,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}"><title>{}</title></circle>"#,
            c.px(m.ach_mean),
            c.py(*mean),
            esc(&m.config)
        );
    }
    c.legend(&[(format!("{model}: mean and 95% CI vs measurement ± 1 sd"), color)]);
    Ok((c.finish(), pts.len()))
}

/// Box per parameter and model of the first-order indices over a window.
pub fn sobol_boxes(window: &str, quantity: &str, boxes: &[SobolBox]) -> String {
    let mut params: Vec<&str> = Vec::new();
    let mut models: Vec<&str> = Vec::new();
    for b in boxes {
        if !params.contains(&b.parameter.as_str()) {
            params.push(&b.parameter);
        }
        if !models.contains(&b.model.as_str()) {
            models.push(&b.model);
        }
    }
    let title = format!("First-order Sobol indices of {quantity}, window {window}");
    let mut c = Canvas::new(&title, "parameter", "S1", (0.0, params.len() as f64), (0.0, 1.0), false);
    let (_, _, _, b) = MARGIN;
    for (i, p) in params.iter().enumerate() {
        let _ = writeln!(
            c.buf,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            c.px(i as f64 + 0.5),
            H - b + 18.0,
            esc(p)
        );
    }
    let slot = 0.8 / models.len() as f64;
    for bx in boxes {
        let i = params.iter().position(|p| *p == bx.parameter).unwrap() as f64;
        let j = models.iter().position(|m| *m == bx.model).unwrap();
        let color = COLORS[j % COLORS.len()];
        let x0 = i + 0.1 + slot * j as f64 + 0.1 * slot;
        let x1 = x0 + 0.8 * slot;
        let xm = 0.5 * (x0 + x1);
        let [mn, q1, md, q3, mx] = bx.stats.map(|v| v.clamp(0.0, 1.0));
        c.line(xm, mn, xm, q1, color, false);
        c.line(xm, q3, xm, mx, color, false);
        let _ = writeln!(
            c.buf,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.35" stroke="{color}"/>"#,
            c.px(x0),
            c.py(q3),
            c.px(x1) - c.px(x0),
            c.py(q1) - c.py(q3)
        );
        c.line(x0, md, x1, md, "black", false);
    }
    let legend: Vec<(String, &str)> = models.iter().enumerate().map(|(j, m)| (m.to_string(), COLORS[j % COLORS.len()])).collect();
    c.legend(&legend);
    c.finish()
}

fn slug(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

fn write(out: &Path, name: &str, svg: &str) -> Result<()> {
    let p = out.join(name);
    fs::write(&p, svg).with_context(|| format!("writing {}", p.display()))
}

pub fn run(a: &PlotArgs) -> Result<()> {
    if a.uq.is_none() && a.sobol.is_none() {
        return Err(ventsim_core::Error::invalid("plot", "give --uq and/or --sobol").into());
    }
    let mut written = Vec::new();
    if let Some(path) = &a.uq {
        let table = read_uq(path)?;
        for q in ["t_air", "ach"] {
            if let Some(svg) = band_plot(&table, q) {
                let name = format!("{q}_band.svg");
                write(&a.out, &name, &svg)?;
                written.push(name);
            }
        }
        if let Some(mpath) = &a.measurements {
            let ms = read_measurements(mpath)?;
            let model = if a.model == "ensemble" && !table.iter().any(|((m, _), _)| m == "ensemble") {
                table[0].0 .0.clone()
            } else {
                a.model.clone()
            };
            let (svg, n) = ach_scatter(&table, &model, &ms)?;
            write(&a.out, "ach_scatter.svg", &svg)?;
            written.push(format!("ach_scatter.svg ({n} measurements)"));
        }
    } else if a.measurements.is_some() {
        return Err(ventsim_core::Error::invalid("--measurements", "needs --uq").into());
    }
    if let Some(path) = &a.sobol {
        let mut by_key: BTreeMap<String, ()> = BTreeMap::new();
        for ((window, quantity), boxes) in read_sobol(path)? {
            let name = format!("sobol_{}_{}.svg", slug(&window), slug(&quantity));
            if by_key.insert(name.clone(), ()).is_some() {
                bail!("{}: duplicate window name '{window}'", path.display());
            }
            write(&a.out, &name, &sobol_boxes(&window, &quantity, &boxes))?;
            written.push(name);
        }
    }
    eprintln!("wrote {}", written.join(", "));
    Ok(())
}
