use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;

/// What every output file records about the run that produced it.
#[derive(Clone, Debug)]
pub struct Provenance {
    pub command: &'static str,
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    fn lines(&self) -> [String; 2] {
        [
            format!("cutstack {} {}", env!("CARGO_PKG_VERSION"), self.command),
            format!("config_sha256={} seed={}", self.config_hash, self.seed),
        ]
    }
}

/// Writes `# `-prefixed provenance lines followed by a CSV table.
pub fn write_csv(
    dir: &Path,
    name: &str,
    prov: &Provenance,
    header: &[&str],
    rows: &[Vec<String>],
) -> anyhow::Result<PathBuf> {
    let path = dir.join(name);
    let mut buf = Vec::new();
    for line in prov.lines() {
        writeln!(buf, "# {line}")?;
    }
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> anyhow::Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// A named polyline.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Plain line chart with linear axes, one polyline per series.
pub fn write_svg(
    dir: &Path,
    name: &str,
    prov: &Provenance,
    title: &str,
    axes: (&str, &str),
    series: &[Series],
) -> anyhow::Result<PathBuf> {
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#)?;
    for line in prov.lines() {
        writeln!(s, "<!-- {} -->", escape(&line))?;
    }
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#)?;
    writeln!(s, r#"<text x="{}" y="24" font-size="15" text-anchor="middle">{}</text>"#, W / 2.0, escape(title))?;
    let (l, r, b, t) = (MARGIN, W - MARGIN, H - MARGIN, MARGIN);
    writeln!(s, r#"<path d="M{l} {t} L{l} {b} L{r} {b}" stroke="black" fill="none"/>"#)?;
    writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 16.0,
        escape(axes.0)
    )?;
    writeln!(
        s,
        r#"<text x="16" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(axes.1)
    )?;
    for (v, x) in [(x0, l), (x1, r)] {
        writeln!(s, r#"<text x="{x}" y="{}" font-size="11" text-anchor="middle">{}</text>"#, b + 16.0, fmt_tick(v))?;
    }
    for (v, y) in [(y0, b), (y1, t)] {
        writeln!(s, r#"<text x="{}" y="{y}" font-size="11" text-anchor="end">{}</text>"#, l - 6.0, fmt_tick(v))?;
    }
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let d: Vec<String> = ser
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        writeln!(s, r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="1.5"/>"#, d.join(" "))?;
        let ly = t + 14.0 * i as f64;
        writeln!(s, r#"<text x="{}" y="{ly}" font-size="11" fill="{color}">{}</text>"#, r - 120.0, escape(&ser.label))?;
    }
    s.push_str("</svg>\n");
    write_text(dir, name, &s)
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 1e4 || (v != 0.0 && v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{}", (v * 100.0).round() / 100.0)
    }
}
