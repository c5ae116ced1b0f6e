//! Line-delimited JSON interchange files.
//!
//! Every file starts with a header record and continues with one record per
//! line, each tagged by `"type"`:
//!
//! - graph dump: `header` (classes, mode, attributes), then `graph` records;
//! - trace: `trace` header (pitch, classes), then `step` records;
//! - rule set: `rules` header (classes), `box` records, then `rule` records.
//!   Else branches are separate `rule` records flagged `nested` and named by
//!   their parent's `else` field.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{ClassLabel, LabeledDataset};
use crate::discovery::{DiscoveryTrace, GridBox, Phase, TraceStep};
use crate::error::{Error, Result};
use crate::mapping::{encode, MappingMode, PolylineGraph};
use crate::rules::{Prediction, Reassignment, Rule, RuleSet};

fn write_line<W: Write, T: Serialize>(w: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io("<output>", e))
}

fn records<R: Read, T: for<'de> Deserialize<'de>>(r: R) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for line in BufReader::new(r).lines() {
        let line = line.map_err(|e| Error::io("<input>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

pub fn create(path: impl AsRef<Path>) -> Result<BufWriter<File>> {
    let path = path.as_ref();
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn open(path: impl AsRef<Path>) -> Result<File> {
    let path = path.as_ref();
    File::open(path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum GraphRecord {
    Header {
        classes: Vec<ClassLabel>,
        mode: MappingMode,
        attributes: Vec<String>,
    },
    Graph {
        id: String,
        label: String,
        nodes: Vec<[f64; 2]>,
        padded: bool,
        source_dim: usize,
    },
}

/// Graphs with their labels, as read back from a dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDump {
    pub classes: Vec<ClassLabel>,
    pub mode: MappingMode,
    pub attributes: Vec<String>,
    pub ids: Vec<String>,
    pub labels: Vec<usize>,
    pub graphs: Vec<PolylineGraph>,
}

impl GraphDump {
    pub fn from_dataset(ds: &LabeledDataset, mode: &MappingMode) -> Result<Self> {
        Ok(Self {
            classes: ds.classes.clone(),
            mode: mode.clone(),
            attributes: ds.attributes.clone(),
            ids: (0..ds.len()).map(|i| ds.case_id(i)).collect(),
            labels: ds.labels.clone(),
            graphs: ds
                .points
                .iter()
                .map(|p| encode(p, mode))
                .collect::<Result<_>>()?,
        })
    }

    pub fn class_names(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.name.clone()).collect()
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        write_line(
            &mut w,
            &GraphRecord::Header {
                classes: self.classes.clone(),
                mode: self.mode.clone(),
                attributes: self.attributes.clone(),
            },
        )?;
        for ((id, &label), g) in self.ids.iter().zip(&self.labels).zip(&self.graphs) {
            write_line(
                &mut w,
                &GraphRecord::Graph {
                    id: id.clone(),
                    label: self.classes[label].name.clone(),
                    nodes: g.nodes.clone(),
                    padded: g.padded,
                    source_dim: g.source_dim,
                },
            )?;
        }
        w.flush().map_err(|e| Error::io("<output>", e))
    }

    pub fn read<R: Read>(r: R) -> Result<Self> {
        let mut recs = records::<_, GraphRecord>(r)?.into_iter();
        let Some(GraphRecord::Header {
            classes,
            mode,
            attributes,
        }) = recs.next()
        else {
            return Err(Error::Invalid("graph dump must start with a header".into()));
        };
        let index: HashMap<String, usize> = classes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.name.clone(), i))
            .collect();
        let mut dump = Self {
            classes,
            mode,
            attributes,
            ids: Vec::new(),
            labels: Vec::new(),
            graphs: Vec::new(),
        };
        for rec in recs {
            let GraphRecord::Graph {
                id,
                label,
                nodes,
                padded,
                source_dim,
            } = rec
            else {
                return Err(Error::Invalid("repeated header in graph dump".into()));
            };
            let l = *index.get(&label).ok_or(Error::UnknownClass(label))?;
            dump.ids.push(id);
            dump.labels.push(l);
            dump.graphs.push(PolylineGraph {
                nodes,
                padded,
                source_dim,
            });
        }
        Ok(dump)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum TraceRecord {
    Trace {
        pitch: f64,
        classes: Vec<String>,
    },
    Step {
        #[serde(rename = "box")]
        grid_box: GridBox,
        class: String,
        counts: Vec<usize>,
        phase: Phase,
        /// Case positions.
        removed: Vec<usize>,
        removed_ids: Vec<String>,
    },
}

/// Writes a trace; `ids` names cases by position.
pub fn write_trace<W: Write>(mut w: W, trace: &DiscoveryTrace, ids: &[String]) -> Result<()> {
    write_line(
        &mut w,
        &TraceRecord::Trace {
            pitch: trace.pitch,
            classes: trace.class_names.clone(),
        },
    )?;
    for s in &trace.steps {
        write_line(
            &mut w,
            &TraceRecord::Step {
                grid_box: s.grid_box.clone(),
                class: trace.class_names[s.class].clone(),
                counts: s.counts.clone(),
                phase: s.phase,
                removed: s.removed.clone(),
                removed_ids: s.removed.iter().map(|&c| ids[c].clone()).collect(),
            },
        )?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))
}

pub fn read_trace<R: Read>(r: R) -> Result<DiscoveryTrace> {
    let mut recs = records::<_, TraceRecord>(r)?.into_iter();
    let Some(TraceRecord::Trace { pitch, classes }) = recs.next() else {
        return Err(Error::Invalid("trace must start with a header".into()));
    };
    let mut steps = Vec::new();
    for rec in recs {
        let TraceRecord::Step {
            grid_box,
            class,
            counts,
            phase,
            removed,
            ..
        } = rec
        else {
            return Err(Error::Invalid("repeated header in trace".into()));
        };
        let class = classes
            .iter()
            .position(|c| *c == class)
            .ok_or(Error::UnknownClass(class))?;
        steps.push(TraceStep {
            grid_box,
            class,
            counts,
            removed,
            phase,
        });
    }
    Ok(DiscoveryTrace {
        pitch,
        class_names: classes,
        steps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum RuleRecord {
    Rules {
        classes: Vec<String>,
    },
    Box(GridBox),
    Rule {
        id: String,
        target: String,
        positive: Vec<String>,
        negated: Vec<String>,
        #[serde(rename = "else", default, skip_serializing_if = "Option::is_none")]
        else_id: Option<String>,
        #[serde(default)]
        nested: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        provenance: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reassigned: Option<Reassignment>,
        /// Human-readable form; ignored on read.
        #[serde(default, skip_serializing_if = "String::is_empty")]
        text: String,
    },
}

fn rule_records(rule: &Rule, nested: bool, out: &mut Vec<RuleRecord>) {
    out.push(RuleRecord::Rule {
        id: rule.id.clone(),
        target: rule.target.clone(),
        positive: rule.positive.clone(),
        negated: rule.negated.clone(),
        else_id: rule.else_branch.as_ref().map(|e| e.id.clone()),
        nested,
        provenance: rule.provenance,
        reassigned: rule.reassigned.clone(),
        text: if nested { String::new() } else { rule.to_string() },
    });
    if let Some(e) = &rule.else_branch {
        rule_records(e, true, out);
    }
}

pub fn write_ruleset<W: Write>(mut w: W, rs: &RuleSet) -> Result<()> {
    write_line(
        &mut w,
        &RuleRecord::Rules {
            classes: rs.classes.clone(),
        },
    )?;
    for b in &rs.boxes {
        write_line(&mut w, &RuleRecord::Box(b.clone()))?;
    }
    let mut recs = Vec::new();
    for r in &rs.rules {
        rule_records(r, false, &mut recs);
    }
    for rec in &recs {
        write_line(&mut w, rec)?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))
}

pub fn read_ruleset<R: Read>(r: R) -> Result<RuleSet> {
    let mut recs = records::<_, RuleRecord>(r)?.into_iter();
    let Some(RuleRecord::Rules { classes }) = recs.next() else {
        return Err(Error::Invalid("rule set must start with a header".into()));
    };
    let mut boxes = Vec::new();
    let mut top = Vec::new();
    let mut nested: HashMap<String, (Rule, Option<String>)> = HashMap::new();
    for rec in recs {
        match rec {
            RuleRecord::Rules { .. } => {
                return Err(Error::Invalid("repeated header in rule set".into()))
            }
            RuleRecord::Box(b) => boxes.push(b),
            RuleRecord::Rule {
                id,
                target,
                positive,
                negated,
                else_id,
                nested: is_nested,
                provenance,
                reassigned,
                ..
            } => {
                let mut rule = Rule::new(id.clone(), target, positive).with_negated(negated);
                rule.provenance = provenance;
                rule.reassigned = reassigned;
                if is_nested {
                    if nested.insert(id.clone(), (rule, else_id)).is_some() {
                        return Err(Error::DuplicateRule(id));
                    }
                } else {
                    top.push((rule, else_id));
                }
            }
        }
    }
    fn attach(
        rule: &mut Rule,
        else_id: Option<String>,
        nested: &mut HashMap<String, (Rule, Option<String>)>,
    ) -> Result<()> {
        if let Some(id) = else_id {
            let (mut child, next) = nested
                .remove(&id)
                .ok_or_else(|| Error::Invalid(format!("missing else rule `{id}`")))?;
            attach(&mut child, next, nested)?;
            rule.else_branch = Some(Box::new(child));
        }
        Ok(())
    }
    let mut rules = Vec::with_capacity(top.len());
    for (mut rule, else_id) in top {
        attach(&mut rule, else_id, &mut nested)?;
        rules.push(rule);
    }
    if let Some(id) = nested.keys().next() {
        return Err(Error::Invalid(format!("unreferenced else rule `{id}`")));
    }
    RuleSet::new(classes, boxes, rules)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub label: Option<String>,
    pub prediction: Option<String>,
    pub fired: Option<String>,
}

pub fn write_predictions<W: Write>(
    mut w: W,
    ids: &[String],
    labels: Option<&[String]>,
    preds: &[Prediction],
) -> Result<()> {
    for (i, p) in preds.iter().enumerate() {
        write_line(
            &mut w,
            &PredictionRecord {
                id: ids[i].clone(),
                label: labels.map(|l| l[i].clone()),
                prediction: p.class().map(str::to_string),
                fired: p.fired.clone(),
            },
        )?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ruleset_round_trip_with_else() {
        let boxes = vec![
            GridBox::new("B1", 0.0, 1.0, 0.0, 1.0).unwrap(),
            GridBox::new("B3", 2.0, 3.0, 0.0, 1.0).unwrap(),
            GridBox::new("B5", 0.5, 2.5, 0.0, 1.0).unwrap(),
        ];
        let mut head = Rule::new("R1,3,5", "G", vec!["B1".into(), "B3".into()]);
        head.else_branch = Some(Box::new(
            Rule::new("R5", "R", vec!["B5".into()]).with_negated(vec!["B3".into()]),
        ));
        let rs = RuleSet::new(vec!["G".into(), "R".into()], boxes, vec![head]).unwrap();
        let mut buf = Vec::new();
        write_ruleset(&mut buf, &rs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains(r#""else":"R5""#));
        assert!(text.contains(r#""nested":true"#));
        assert_eq!(read_ruleset(buf.as_slice()).unwrap(), rs);
    }

    #[test]
    fn missing_header_is_rejected() {
        let line = br#"{"type":"box","id":"B1","x1":0.0,"x2":1.0,"y1":0.0,"y2":1.0}"#;
        assert!(read_ruleset(&line[..]).is_err());
    }
}
