//! Standalone SVG figures drawn from analysis CSVs.
//!
//! Output depends only on the input tables: coordinates are printed with
//! fixed precision and nothing time-dependent is embedded.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::files::CsvTable;

const WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 180.0;
const MARGIN: f64 = 48.0;
const SPECIES_COLOURS: [(&str, &str); 2] = [("A", "#d95f02"), ("B", "#1b9e77")];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Spectrogram,
    Silhouette,
    Clusters,
    Scores,
}

impl FromStr for Figure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectrogram" => Ok(Figure::Spectrogram),
            "silhouette" => Ok(Figure::Silhouette),
            "clusters" => Ok(Figure::Clusters),
            "scores" => Ok(Figure::Scores),
            _ => Err(Error::Argument(format!(
                "unknown figure `{s}` (expected spectrogram, silhouette, clusters or scores)"
            ))),
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Figure::Spectrogram => "spectrogram",
            Figure::Silhouette => "silhouette",
            Figure::Clusters => "clusters",
            Figure::Scores => "scores",
        })
    }
}

struct Svg {
    body: String,
    width: f64,
    height: f64,
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        Svg { body: String::new(), width, height }
    }

    fn push(&mut self, s: impl AsRef<str>) {
        self.body.push_str(s.as_ref());
        self.body.push('\n');
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, content: &str) {
        self.push(format!(r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#, escape(content)));
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Linear map from a data interval onto a pixel interval.
#[derive(Clone, Copy)]
struct Scale {
    d0: f64,
    d1: f64,
    p0: f64,
    p1: f64,
}

impl Scale {
    fn at(&self, v: f64) -> f64 {
        if self.d1 == self.d0 {
            return (self.p0 + self.p1) / 2.0;
        }
        self.p0 + (v - self.d0) / (self.d1 - self.d0) * (self.p1 - self.p0)
    }
}

fn extent(xs: impl IntoIterator<Item = f64>) -> (f64, f64) {
    xs.into_iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

fn polyline(points: &[(f64, f64)]) -> String {
    points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect::<Vec<_>>().join(" ")
}

fn axes(svg: &mut Svg, x: Scale, y: Scale, x_label: &str, y_label: &str, y_ticks: &[f64]) {
    svg.push(format!(
        r#"<g class="axes" stroke="black" fill="none"><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/></g>"#,
        x.p0, y.p0, x.p1, y.p0, x.p0, y.p0, x.p0, y.p1
    ));
    for &t in y_ticks {
        svg.text(x.p0 - 4.0, y.at(t) + 4.0, "end", &format!("{t}"));
    }
    svg.text(x.p0, y.p0 + 16.0, "start", &format!("{}", x.d0));
    svg.text(x.p1, y.p0 + 16.0, "end", &format!("{}", x.d1));
    svg.text((x.p0 + x.p1) / 2.0, y.p0 + 30.0, "middle", x_label);
    svg.text(x.p0, y.p1 - 8.0, "start", y_label);
}

fn numbers(table: &CsvTable, column: &str) -> Result<Vec<f64>> {
    Ok(table.floats(column)?.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect())
}

/// Two stacked panels (species A over B), nine band rows each, one cell per
/// generation shaded by usage rate. Expects `species,band,g0,g1,...`.
pub fn spectrogram_svg(table: &CsvTable) -> Result<String> {
    table.require(&["species", "band", "g0"])?;
    let gens: Vec<&str> = table.headers().iter().map(String::as_str).filter(|h| h.starts_with('g')).collect();
    let species = table.strings("species")?;
    let bands = numbers(table, "band")?;
    let columns: Vec<Vec<f64>> = gens.iter().map(|g| numbers(table, g)).collect::<Result<_>>()?;

    let n_bands = 9;
    let row_h = PANEL_HEIGHT / n_bands as f64;
    let cell_w = (WIDTH - 2.0 * MARGIN) / gens.len() as f64;
    let mut svg = Svg::new(WIDTH, 2.0 * (PANEL_HEIGHT + MARGIN) + MARGIN);
    for (panel, (name, colour)) in SPECIES_COLOURS.iter().enumerate() {
        let top = MARGIN + panel as f64 * (PANEL_HEIGHT + MARGIN);
        svg.push(format!(r#"<g class="panel" data-species="{name}">"#));
        svg.text(MARGIN, top - 8.0, "start", &format!("Species {name}"));
        for band in 0..n_bands {
            let row = (0..species.len()).find(|&r| species[r] == *name && bands[r] == band as f64);
            // band 0 is drawn at the bottom, as in a spectrogram
            let y = top + (n_bands - 1 - band) as f64 * row_h;
            svg.push(format!(r#"<g class="band" data-band="{band}">"#));
            svg.text(MARGIN - 4.0, y + row_h / 2.0 + 4.0, "end", &band.to_string());
            if let Some(r) = row {
                for (g, col) in columns.iter().enumerate() {
                    let rate = col[r].clamp(0.0, 1.0);
                    svg.push(format!(
                        r#"<rect x="{:.2}" y="{y:.2}" width="{:.2}" height="{row_h:.2}" fill="{colour}" fill-opacity="{rate:.3}"/>"#,
                        MARGIN + g as f64 * cell_w,
                        cell_w + 0.05
                    ));
                }
            }
            svg.push("</g>");
        }
        svg.text(WIDTH / 2.0, top + PANEL_HEIGHT + 18.0, "middle", "generation");
        svg.push("</g>");
    }
    Ok(svg.finish())
}

/// Mean silhouette per condition with a ±1 std band, from the experiment
/// CSV; `overlay` (`generation,silhouette`) adds a single run.
pub fn silhouette_svg(experiment: &CsvTable, overlay: Option<&CsvTable>) -> Result<String> {
    let gen = numbers(experiment, "generation")?;
    let series = [("h1", "H1", "#7570b3"), ("h0", "H0", "#999999")];
    let mut data = Vec::new();
    for (key, _, _) in series {
        data.push((numbers(experiment, &format!("{key}_sil_mean"))?, numbers(experiment, &format!("{key}_sil_std"))?));
    }
    let overlay = match overlay {
        Some(t) => Some((numbers(t, "generation")?, numbers(t, "silhouette")?)),
        None => None,
    };

    let (g0, g1) = extent(gen.iter().copied());
    let values = data.iter().flat_map(|(m, s)| m.iter().zip(s).flat_map(|(m, s)| [m - s, m + s]));
    let (lo, hi) = extent(values.chain(overlay.iter().flat_map(|(_, v)| v.iter().copied())).filter(|v| v.is_finite()));
    let (lo, hi) = (lo.min(0.0), hi.max(0.1));
    let h = 2.0 * PANEL_HEIGHT;
    let x = Scale { d0: g0, d1: g1, p0: MARGIN, p1: WIDTH - MARGIN };
    let y = Scale { d0: lo, d1: hi, p0: MARGIN + h, p1: MARGIN };
    let mut svg = Svg::new(WIDTH, h + 2.5 * MARGIN);
    axes(&mut svg, x, y, "generation", "silhouette score", &[lo, hi]);
    for ((key, label, colour), (m, s)) in series.iter().zip(&data) {
        let upper: Vec<(f64, f64)> = gen.iter().zip(m.iter().zip(s)).map(|(&g, (m, s))| (x.at(g), y.at(m + s))).collect();
        let lower: Vec<(f64, f64)> =
            gen.iter().zip(m.iter().zip(s)).rev().map(|(&g, (m, s))| (x.at(g), y.at(m - s))).collect();
        let band: Vec<(f64, f64)> = upper.into_iter().chain(lower).collect();
        svg.push(format!(
            r#"<polygon class="spread {key}" points="{}" fill="{colour}" fill-opacity="0.2" stroke="none"/>"#,
            polyline(&band)
        ));
        let line: Vec<(f64, f64)> = gen.iter().zip(m).map(|(&g, &m)| (x.at(g), y.at(m))).collect();
        svg.push(format!(
            r#"<polyline class="series {key}" points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            polyline(&line)
        ));
        let last = line.last().copied().unwrap_or((x.p1, y.p1));
        svg.text(last.0 - 4.0, last.1 - 6.0, "end", label);
    }
    if let Some((g, v)) = &overlay {
        let line: Vec<(f64, f64)> = g.iter().zip(v).map(|(&g, &v)| (x.at(g), y.at(v))).collect();
        svg.push(format!(
            r##"<polyline class="series overlay" points="{}" fill="none" stroke="#e7298a" stroke-width="1" stroke-dasharray="3 2"/>"##,
            polyline(&line)
        ));
    }
    Ok(svg.finish())
}

/// t-SNE scatter panels for the requested generations present in the
/// embedding CSV (`point_index,species,x,y,generation`).
pub fn clusters_svg(embedding: &CsvTable, generations: &[usize]) -> Result<String> {
    embedding.require(&["point_index", "species", "x", "y", "generation"])?;
    let species = embedding.strings("species")?;
    let xs = numbers(embedding, "x")?;
    let ys = numbers(embedding, "y")?;
    let gen = numbers(embedding, "generation")?;
    let mut panels: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (row, &g) in gen.iter().enumerate() {
        let g = g as usize;
        if generations.is_empty() || generations.contains(&g) {
            panels.entry(g).or_default().push(row);
        }
    }
    if panels.is_empty() {
        return Err(Error::Argument(format!("embedding has none of the generations {generations:?}")));
    }

    let side = 160.0;
    let gap = 24.0;
    let width = MARGIN + panels.len() as f64 * (side + gap);
    let mut svg = Svg::new(width.max(2.0 * MARGIN + side), side + 2.0 * MARGIN);
    for (k, (g, rows)) in panels.iter().enumerate() {
        let left = MARGIN / 2.0 + k as f64 * (side + gap);
        let (x0, x1) = extent(rows.iter().map(|&r| xs[r]));
        let (y0, y1) = extent(rows.iter().map(|&r| ys[r]));
        let x = Scale { d0: x0, d1: x1, p0: left + 4.0, p1: left + side - 4.0 };
        let y = Scale { d0: y0, d1: y1, p0: MARGIN + side - 4.0, p1: MARGIN + 4.0 };
        svg.push(format!(r#"<g class="panel" data-generation="{g}">"#));
        svg.push(format!(
            r#"<rect x="{left:.2}" y="{MARGIN:.2}" width="{side:.2}" height="{side:.2}" fill="none" stroke="black"/>"#
        ));
        svg.text(left + side / 2.0, MARGIN - 8.0, "middle", &format!("generation {g}"));
        for &r in rows {
            let colour = SPECIES_COLOURS.iter().find(|(n, _)| *n == species[r]).map_or("#000000", |c| c.1);
            svg.push(format!(
                r#"<circle class="point {}" cx="{:.2}" cy="{:.2}" r="1.6" fill="{colour}" fill-opacity="0.7"/>"#,
                escape(species[r]),
                x.at(xs[r]),
                y.at(ys[r])
            ));
        }
        svg.push("</g>");
    }
    Ok(svg.finish())
}

/// Species-ID, bit and message rates per generation, averaged over species.
/// Columns: `generation,species,species_id_rate,bit_rate,msg_rate`.
pub fn scores_svg(scores: &CsvTable) -> Result<String> {
    scores.require(&["generation", "species"])?;
    let gen = numbers(scores, "generation")?;
    let curves = [("species-id", "species_id_rate", "#e6ab02"), ("bit", "bit_rate", "#66a61e"), ("message", "msg_rate", "#7570b3")];
    let mut series = Vec::new();
    for (class, column, colour) in curves {
        let vals = scores.floats(column)?;
        let mut by_gen: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
        for (g, v) in gen.iter().zip(vals) {
            if let Some(v) = v {
                let e = by_gen.entry(*g as u64).or_insert((0.0, 0));
                e.0 += v;
                e.1 += 1;
            }
        }
        let points: Vec<(f64, f64)> = by_gen.into_iter().map(|(g, (s, n))| (g as f64, s / n as f64)).collect();
        series.push((class, colour, points));
    }

    let (g0, g1) = extent(gen.iter().copied());
    let h = 2.0 * PANEL_HEIGHT;
    let x = Scale { d0: g0, d1: g1, p0: MARGIN, p1: WIDTH - MARGIN };
    let y = Scale { d0: 0.0, d1: 1.0, p0: MARGIN + h, p1: MARGIN };
    let mut svg = Svg::new(WIDTH, h + 2.5 * MARGIN);
    axes(&mut svg, x, y, "generation", "rate", &[0.0, 0.5, 1.0]);
    for (k, (class, colour, points)) in series.iter().enumerate() {
        if points.is_empty() {
            continue;
        }
        let line: Vec<(f64, f64)> = points.iter().map(|&(g, v)| (x.at(g), y.at(v))).collect();
        svg.push(format!(
            r#"<polyline class="series {class}" points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            polyline(&line)
        ));
        svg.push(format!(
            r#"<text x="{:.2}" y="{:.2}" fill="{colour}">{class}</text>"#,
            x.p1 - 90.0,
            MARGIN + h - 40.0 + 12.0 * k as f64
        ));
    }
    Ok(svg.finish())
}
