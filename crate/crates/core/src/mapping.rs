//! Lossless maps from n-D points to 2-D polyline graphs.
//!
//! Pure inline modes put every coordinate on one horizontal baseline, one node
//! per coordinate. The paired (ILC2) modes consume coordinates two at a time:
//! odd-indexed values (x1, x3, ...) go along the horizontal axis and
//! even-indexed values (x2, x4, ...) along the vertical one, giving
//! `ceil(n / 2)` nodes. An odd dimension pads the last pair with a zero
//! vertical value and sets [`PolylineGraph::padded`].
//!
//! Dynamic modes accumulate: node k sits at the running sum of the values
//! mapped to that axis so far, so each node is placed relative to the previous
//! one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::NDPoint;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingKind {
    /// Coordinates laid one after another on the baseline at given offsets.
    IlcSequential,
    /// All coordinates share the origin of the baseline.
    IlcCollocated,
    /// Arbitrary per-coordinate baseline offsets.
    IlcGeneric,
    /// Node k is `(x_{2k-1}, x_{2k})`.
    Ilc2Static,
    /// Horizontal running sum, raw vertical value.
    Ilc2PartialDynamic,
    /// Running sums on both axes.
    Ilc2FullDynamic,
    /// Running sums of weighted values on both axes.
    Ilc2Weighted,
}

impl MappingKind {
    pub const ALL: [MappingKind; 7] = [
        MappingKind::IlcSequential,
        MappingKind::IlcCollocated,
        MappingKind::IlcGeneric,
        MappingKind::Ilc2Static,
        MappingKind::Ilc2PartialDynamic,
        MappingKind::Ilc2FullDynamic,
        MappingKind::Ilc2Weighted,
    ];

    pub fn is_paired(self) -> bool {
        matches!(
            self,
            MappingKind::Ilc2Static
                | MappingKind::Ilc2PartialDynamic
                | MappingKind::Ilc2FullDynamic
                | MappingKind::Ilc2Weighted
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            MappingKind::IlcSequential => "sequential",
            MappingKind::IlcCollocated => "collocated",
            MappingKind::IlcGeneric => "generic",
            MappingKind::Ilc2Static => "static",
            MappingKind::Ilc2PartialDynamic => "partial-dynamic",
            MappingKind::Ilc2FullDynamic => "full-dynamic",
            MappingKind::Ilc2Weighted => "weighted",
        }
    }
}

impl fmt::Display for MappingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MappingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        let norm = norm
            .strip_prefix("ilc2-")
            .or_else(|| norm.strip_prefix("ilc-"))
            .unwrap_or(&norm);
        MappingKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::Config(format!("unknown mapping mode `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingMode {
    pub kind: MappingKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl MappingMode {
    pub fn new(kind: MappingKind) -> Self {
        Self {
            kind,
            offsets: None,
            weights: None,
        }
    }

    pub fn partial_dynamic() -> Self {
        Self::new(MappingKind::Ilc2PartialDynamic)
    }

    pub fn full_dynamic() -> Self {
        Self::new(MappingKind::Ilc2FullDynamic)
    }

    pub fn weighted(weights: Vec<f64>) -> Self {
        Self {
            kind: MappingKind::Ilc2Weighted,
            offsets: None,
            weights: Some(weights),
        }
    }

    pub fn sequential(offsets: Vec<f64>) -> Self {
        Self {
            kind: MappingKind::IlcSequential,
            offsets: Some(offsets),
            weights: None,
        }
    }

    /// Sequential layout with coordinate i starting at `i * spacing`.
    pub fn sequential_spaced(dim: usize, spacing: f64) -> Self {
        Self::sequential((0..dim).map(|i| i as f64 * spacing).collect())
    }

    pub fn generic(offsets: Vec<f64>) -> Self {
        Self {
            kind: MappingKind::IlcGeneric,
            offsets: Some(offsets),
            weights: None,
        }
    }

    /// Node count of graphs produced for dimension `dim`.
    pub fn node_count(&self, dim: usize) -> usize {
        if self.kind.is_paired() {
            dim.div_ceil(2)
        } else {
            dim
        }
    }

    fn offsets_for(&self, dim: usize) -> Result<Vec<f64>> {
        match (self.kind, &self.offsets) {
            (MappingKind::IlcCollocated, None) => Ok(vec![0.0; dim]),
            (MappingKind::IlcSequential | MappingKind::IlcGeneric, None) => {
                Err(Error::NotInvertible(self.kind.name()))
            }
            (_, Some(o)) if o.len() != dim => Err(Error::ParameterLength {
                what: "offsets",
                expected: dim,
                found: o.len(),
            }),
            (_, Some(o)) => Ok(o.clone()),
            (_, None) => Ok(vec![0.0; dim]),
        }
    }

    fn weights_for(&self, dim: usize) -> Result<Vec<f64>> {
        match &self.weights {
            None => Err(Error::Config("weighted mode needs weights".into())),
            Some(w) if w.len() != dim => Err(Error::ParameterLength {
                what: "weights",
                expected: dim,
                found: w.len(),
            }),
            Some(w) => {
                if let Some(i) = w.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFinite(i));
                }
                Ok(w.clone())
            }
        }
    }

    /// Checks that the mode's parameters fit dimension `dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        match self.kind {
            MappingKind::IlcSequential | MappingKind::IlcGeneric | MappingKind::IlcCollocated => {
                self.offsets_for(dim).map(drop)
            }
            MappingKind::Ilc2Weighted => self.weights_for(dim).map(drop),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for MappingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)
    }
}

/// The 2-D image of an n-D point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolylineGraph {
    pub nodes: Vec<[f64; 2]>,
    /// Set when an odd dimension was padded with a zero vertical value.
    pub padded: bool,
    pub source_dim: usize,
}

impl PolylineGraph {
    pub fn endpoint(&self) -> [f64; 2] {
        *self.nodes.last().expect("graph has at least one node")
    }
}

pub fn encode(p: &NDPoint, mode: &MappingMode) -> Result<PolylineGraph> {
    let x = &p.values;
    let n = x.len();
    mode.validate(n)?;
    if !mode.kind.is_paired() {
        let offsets = mode.offsets_for(n)?;
        let nodes = x
            .iter()
            .zip(&offsets)
            .map(|(&v, &o)| [o + v, 0.0])
            .collect();
        return Ok(PolylineGraph {
            nodes,
            padded: false,
            source_dim: n,
        });
    }

    let weights = match mode.kind {
        MappingKind::Ilc2Weighted => Some(mode.weights_for(n)?),
        _ => None,
    };
    let value = |i: usize| -> f64 {
        let v = x.get(i).copied().unwrap_or(0.0);
        match &weights {
            Some(w) if i < n => w[i] * v,
            _ => v,
        }
    };
    let count = n.div_ceil(2);
    let mut nodes = Vec::with_capacity(count);
    let (mut sx, mut sy) = (0.0, 0.0);
    for k in 0..count {
        let (h, v) = (value(2 * k), value(2 * k + 1));
        sx += h;
        sy += v;
        let node = match mode.kind {
            MappingKind::Ilc2Static => [h, v],
            MappingKind::Ilc2PartialDynamic => [sx, v],
            MappingKind::Ilc2FullDynamic | MappingKind::Ilc2Weighted => [sx, sy],
            _ => unreachable!(),
        };
        nodes.push(node);
    }
    Ok(PolylineGraph {
        nodes,
        padded: n % 2 == 1,
        source_dim: n,
    })
}

/// Inverts [`encode`]; the pad value of an odd dimension is dropped.
pub fn decode(g: &PolylineGraph, mode: &MappingMode) -> Result<NDPoint> {
    let n = g.source_dim;
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    let expected = mode.node_count(n);
    if g.nodes.len() != expected {
        return Err(Error::NodeCount {
            expected,
            found: g.nodes.len(),
        });
    }
    if !mode.kind.is_paired() {
        let offsets = mode.offsets_for(n)?;
        let values = g.nodes.iter().zip(&offsets).map(|(nd, o)| nd[0] - o).collect();
        return NDPoint::new(values);
    }
    let weights = match mode.kind {
        MappingKind::Ilc2Weighted => {
            let w = mode.weights_for(n)?;
            if let Some(i) = w.iter().position(|&v| v == 0.0) {
                return Err(Error::ZeroWeight(i));
            }
            Some(w)
        }
        _ => None,
    };
    let mut values = Vec::with_capacity(2 * expected);
    let (mut px, mut py) = (0.0, 0.0);
    for node in &g.nodes {
        let [nx, ny] = *node;
        let (h, v) = match mode.kind {
            MappingKind::Ilc2Static => (nx, ny),
            MappingKind::Ilc2PartialDynamic => (nx - px, ny),
            _ => (nx - px, ny - py),
        };
        px = nx;
        py = ny;
        values.push(h);
        values.push(v);
    }
    values.truncate(n);
    if let Some(w) = weights {
        for (v, wi) in values.iter_mut().zip(&w) {
            *v /= wi;
        }
    }
    NDPoint::new(values)
}

/// `|x_i - x_{i+1}|` for consecutive coordinates; arc heights in pure inline
/// drawings.
pub fn arc_heights(p: &NDPoint) -> Vec<f64> {
    p.values.windows(2).map(|w| (w[0] - w[1]).abs()).collect()
}

pub fn encode_all(points: &[NDPoint], mode: &MappingMode) -> Result<Vec<PolylineGraph>> {
    points.iter().map(|p| encode(p, mode)).collect()
}
