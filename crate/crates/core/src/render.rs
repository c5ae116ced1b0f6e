//! SVG drawings of datasets in inline coordinates.
//!
//! Paired modes draw one polyline per case through its graph nodes. Pure
//! inline modes draw a chain of arcs along the baseline, each arc as high as
//! the difference between the two coordinates it joins. With `mirrored`, the
//! second class (and every other odd-indexed class) is drawn upside down so
//! that two classes do not hide each other.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::discovery::GridBox;
use crate::error::{Error, Result};
use crate::mapping::{arc_heights, encode, MappingMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxOverlay {
    pub grid_box: GridBox,
    pub label: Option<String>,
    pub color: String,
    /// Class the box belongs to; boxes of mirrored classes are mirrored too.
    pub class: Option<usize>,
}

impl BoxOverlay {
    pub fn new(grid_box: GridBox) -> Self {
        let label = Some(grid_box.id.clone());
        Self {
            grid_box,
            label,
            color: "black".into(),
            class: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderOptions {
    pub mode: MappingMode,
    pub mirrored: bool,
    pub boxes: Vec<BoxOverlay>,
    pub width: f64,
    pub height: f64,
    /// Overrides the dataset's class colors, by class index.
    pub colors: Option<Vec<String>>,
    /// Draws at most this many cases, in index order.
    pub sample_limit: Option<usize>,
    /// Cases drawn with a heavier stroke.
    pub highlight: Vec<usize>,
    /// Restricts drawing to these cases.
    pub cases: Option<Vec<usize>>,
    /// Arc height per unit of coordinate difference.
    pub arc_height_factor: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            mode: MappingMode::partial_dynamic(),
            mirrored: false,
            boxes: Vec::new(),
            width: 800.0,
            height: 600.0,
            colors: None,
            sample_limit: None,
            highlight: Vec::new(),
            cases: None,
            arc_height_factor: 0.5,
        }
    }
}

/// Uniform-scale map from graph space (y up) to screen space (y down).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewTransform {
    pub scale: f64,
    pub min: [f64; 2],
    pub origin: [f64; 2],
    pub height: f64,
}

impl ViewTransform {
    /// Fits `[min, max]` into the canvas with 5% margins, centered.
    pub fn fit(min: [f64; 2], max: [f64; 2], width: f64, height: f64) -> Self {
        let span = [(max[0] - min[0]).max(1e-9), (max[1] - min[1]).max(1e-9)];
        let scale = (0.9 * width / span[0]).min(0.9 * height / span[1]);
        let origin = [
            (width - span[0] * scale) / 2.0,
            (height - span[1] * scale) / 2.0,
        ];
        Self {
            scale,
            min,
            origin,
            height,
        }
    }

    pub fn to_screen(&self, p: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + (p[0] - self.min[0]) * self.scale,
            self.height - self.origin[1] - (p[1] - self.min[1]) * self.scale,
        ]
    }

    pub fn to_graph(&self, s: [f64; 2]) -> [f64; 2] {
        [
            (s[0] - self.origin[0]) / self.scale + self.min[0],
            (self.height - self.origin[1] - s[1]) / self.scale + self.min[1],
        ]
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

enum Shape {
    Polyline(Vec<[f64; 2]>),
    /// Baseline positions with signed arc heights.
    Arcs(Vec<[f64; 2]>, Vec<f64>),
}

struct Bounds {
    min: [f64; 2],
    max: [f64; 2],
}

impl Bounds {
    fn add(&mut self, p: [f64; 2]) {
        for (a, v) in p.into_iter().enumerate() {
            self.min[a] = self.min[a].min(v);
            self.max[a] = self.max[a].max(v);
        }
    }
}

pub fn render_scene(ds: &LabeledDataset, opts: &RenderOptions) -> Result<String> {
    if !(opts.width > 0.0 && opts.height > 0.0) {
        return Err(Error::Config("canvas size must be positive".into()));
    }
    let colors: Vec<String> = match &opts.colors {
        Some(c) => c.clone(),
        None => ds.classes.iter().map(|c| c.color.clone()).collect(),
    };
    if let Some(missing) = (0..ds.classes.len()).find(|&i| colors.get(i).is_none_or(|c| c.is_empty())) {
        return Err(Error::Invalid(format!(
            "no color for class `{}`",
            ds.classes[missing].name
        )));
    }
    let flip = |class: usize| if opts.mirrored && class % 2 == 1 { -1.0 } else { 1.0 };

    let mut cases: Vec<usize> = match &opts.cases {
        Some(c) => c.clone(),
        None => (0..ds.len()).collect(),
    };
    if let Some(limit) = opts.sample_limit {
        cases.truncate(limit);
    }

    let mut bounds = Bounds {
        min: [0.0, 0.0],
        max: [1.0, 1.0],
    };
    let mut shapes = Vec::with_capacity(cases.len());
    for &i in &cases {
        let s = flip(ds.labels[i]);
        let g = encode(&ds.points[i], &opts.mode)?;
        let shape = if opts.mode.kind.is_paired() {
            let nodes: Vec<[f64; 2]> = g.nodes.iter().map(|n| [n[0], s * n[1]]).collect();
            nodes.iter().for_each(|&n| bounds.add(n));
            Shape::Polyline(nodes)
        } else {
            let heights: Vec<f64> = arc_heights(&ds.points[i])
                .into_iter()
                .map(|h| s * h * opts.arc_height_factor)
                .collect();
            for (w, h) in g.nodes.windows(2).zip(&heights) {
                bounds.add(w[0]);
                bounds.add(w[1]);
                bounds.add([(w[0][0] + w[1][0]) / 2.0, *h]);
            }
            g.nodes.iter().for_each(|&n| bounds.add(n));
            Shape::Arcs(g.nodes, heights)
        };
        shapes.push((i, shape));
    }
    let box_rects: Vec<(&BoxOverlay, [f64; 4])> = opts
        .boxes
        .iter()
        .map(|o| {
            let b = &o.grid_box;
            let s = o.class.map_or(1.0, flip);
            let (y1, y2) = if s < 0.0 { (-b.y2, -b.y1) } else { (b.y1, b.y2) };
            bounds.add([b.x1, y1]);
            bounds.add([b.x2, y2]);
            (o, [b.x1, b.x2, y1, y2])
        })
        .collect();

    let view = ViewTransform::fit(bounds.min, bounds.max, opts.width, opts.height);
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = num(opts.width),
        h = num(opts.height)
    );
    let _ = writeln!(svg, "<title>{} cases, {}</title>", cases.len(), escape(&opts.mode.to_string()));
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#,
        num(opts.width),
        num(opts.height)
    );

    let _ = writeln!(svg, r##"<g id="axes" stroke="#888" stroke-width="1">"##);
    let a = view.to_screen([bounds.min[0], 0.0]);
    let b = view.to_screen([bounds.max[0], 0.0]);
    let _ = writeln!(svg, r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#, num(a[0]), num(a[1]), num(b[0]), num(b[1]));
    let a = view.to_screen([0.0, bounds.min[1]]);
    let b = view.to_screen([0.0, bounds.max[1]]);
    let _ = writeln!(svg, r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#, num(a[0]), num(a[1]), num(b[0]), num(b[1]));
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g id="cases" fill="none">"#);
    for (i, shape) in &shapes {
        let class = ds.labels[*i];
        let width = if opts.highlight.contains(i) { 3 } else { 1 };
        let attrs = format!(
            r#"data-case="{i}" data-class="{}" stroke="{}" stroke-width="{width}""#,
            escape(&ds.classes[class].name),
            escape(&colors[class])
        );
        match shape {
            Shape::Polyline(nodes) => {
                let pts: Vec<String> = nodes
                    .iter()
                    .map(|&n| {
                        let p = view.to_screen(n);
                        format!("{},{}", num(p[0]), num(p[1]))
                    })
                    .collect();
                let _ = writeln!(svg, r#"<polyline class="case" {attrs} points="{}"/>"#, pts.join(" "));
            }
            Shape::Arcs(nodes, heights) => {
                let mut d = String::new();
                let start = view.to_screen(nodes[0]);
                let _ = write!(d, "M {} {}", num(start[0]), num(start[1]));
                for (w, &h) in nodes.windows(2).zip(heights) {
                    let end = view.to_screen(w[1]);
                    let rx = (end[0] - view.to_screen(w[0])[0]).abs() / 2.0;
                    let ry = h.abs() * view.scale;
                    if rx == 0.0 || ry == 0.0 {
                        let _ = write!(d, " L {} {}", num(end[0]), num(end[1]));
                    } else {
                        // clockwise on screen bulges upward when moving right
                        let rightward = w[1][0] > w[0][0];
                        let sweep = u8::from(rightward == (h > 0.0));
                        let _ = write!(
                            d,
                            " A {} {} 0 0 {sweep} {} {}",
                            num(rx),
                            num(ry),
                            num(end[0]),
                            num(end[1])
                        );
                    }
                }
                let _ = writeln!(svg, r#"<path class="case" {attrs} d="{d}"/>"#);
            }
        }
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g id="boxes" fill="none" stroke-width="2">"#);
    for (o, [x1, x2, y1, y2]) in box_rects {
        let tl = view.to_screen([x1, y2]);
        let br = view.to_screen([x2, y1]);
        let _ = writeln!(
            svg,
            r#"<rect class="box" data-box="{}" x="{}" y="{}" width="{}" height="{}" stroke="{}"/>"#,
            escape(&o.grid_box.id),
            num(tl[0]),
            num(tl[1]),
            num(br[0] - tl[0]),
            num(br[1] - tl[1]),
            escape(&o.color)
        );
        if let Some(label) = &o.label {
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" font-size="12" fill="{}">{}</text>"#,
                num(tl[0] + 2.0),
                num(tl[1] - 2.0),
                escape(&o.color),
                escape(label)
            );
        }
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}
