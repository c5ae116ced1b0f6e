use std::fmt::Write as _;
use std::io::{BufReader, Write};
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use ilc_core::dataset::{load_csv, LoadOptions};
use ilc_core::discovery::{discover, DiscoveryConfig, TopSelector};
use ilc_core::evaluation::{run_cv, CvConfig, RuleConfig};
use ilc_core::formats::{self, read_ruleset, write_predictions, write_ruleset, write_trace, GraphDump};
use ilc_core::linear::{fit_model, LinearConfig, NodeSelector, ThresholdMode};
use ilc_core::mapping::{MappingKind, MappingMode};
use ilc_core::render::{render_scene, BoxOverlay, RenderOptions};
use ilc_core::rules::{evaluate, from_trace, join, prune, prune_rule, simplify_all, RuleMetrics, RuleSet};
use ilc_core::LabeledDataset;
use ilc_server::AppState;

macro_rules! out {
    ($($t:tt)*) => { write!(std::io::stdout().lock(), $($t)*)? };
}

macro_rules! outln {
    ($($t:tt)*) => { writeln!(std::io::stdout().lock(), $($t)*)? };
}

use crate::{BadFlag, Command, DataArgs, DiscoveryArgs, InputArgs, MappingArgs, Preset};

fn load_options(preset: Preset, label_column: &Option<String>, id_column: &Option<String>) -> LoadOptions {
    let mut opts = match preset {
        Preset::Plain => LoadOptions::default(),
        Preset::Wbc => LoadOptions::wbc(),
    };
    if let Some(c) = label_column {
        opts.label_column = c.clone();
    }
    if let Some(c) = id_column {
        opts.id_column = Some(c.clone());
    }
    opts
}

fn load_data(d: &DataArgs) -> Result<LabeledDataset> {
    Ok(load_csv(&d.data, &load_options(d.preset, &d.label_column, &d.id_column))?)
}

fn numbers(flag: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| BadFlag(format!("--{flag} `{v}`: {e}")).into()))
        .collect()
}

impl MappingArgs {
    /// The mode for data of dimension `dim`.
    fn mode(&self, dim: usize) -> Result<MappingMode> {
        let kind: MappingKind = self.mode.parse()?;
        let mut mode = MappingMode::new(kind);
        mode.weights = self.weights.as_deref().map(|w| numbers("weights", w)).transpose()?;
        mode.offsets = self.offsets.as_deref().map(|o| numbers("offsets", o)).transpose()?;
        if kind == MappingKind::IlcSequential && mode.offsets.is_none() {
            mode.offsets = MappingMode::sequential_spaced(dim, self.spacing).offsets;
        }
        if kind == MappingKind::Ilc2Weighted && mode.weights.is_none() {
            mode.weights = Some(vec![1.0; dim]);
        }
        mode.validate(dim)?;
        Ok(mode)
    }
}

fn dump_from(ds: &LabeledDataset, m: &MappingArgs) -> Result<GraphDump> {
    let mode = m.mode(ds.dim().unwrap_or(2))?;
    Ok(GraphDump::from_dataset(ds, &mode)?)
}

fn load_input(input: &InputArgs) -> Result<GraphDump> {
    match (&input.graphs, &input.data) {
        (Some(g), _) => Ok(GraphDump::read(BufReader::new(formats::open(g)?))?),
        (None, Some(d)) => {
            let ds = load_csv(d, &load_options(input.preset, &input.label_column, &input.id_column))?;
            dump_from(&ds, &input.mapping)
        }
        (None, None) => Err(BadFlag("one of --data, --graphs is required".into()).into()),
    }
}

fn load_rules(path: &Path) -> Result<RuleSet> {
    read_ruleset(BufReader::new(formats::open(path)?)).with_context(|| format!("reading {}", path.display()))
}

fn save_rules(path: &Path, rs: &RuleSet) -> Result<()> {
    write_ruleset(formats::create(path)?, rs)?;
    Ok(())
}

fn discovery_config(d: &DiscoveryArgs) -> Result<DiscoveryConfig> {
    let mut cfg = DiscoveryConfig::default();
    if let Some(v) = d.pitch {
        cfg.pitch = v;
    }
    if let Some(v) = d.max_box_cells_x {
        cfg.max_box_cells_x = v;
    }
    if let Some(v) = d.max_box_cells_y {
        cfg.max_box_cells_y = v;
    }
    if let Some(v) = d.min_pure_support {
        cfg.min_pure_support = v;
    }
    if let Some(v) = d.mini_threshold {
        cfg.mini_threshold = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn metrics_text(m: &RuleMetrics) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "rule\ttarget\tdecided\tcorrect");
    for r in &m.rules {
        let _ = writeln!(s, "{}\t{}\t{}\t{}", r.id, r.target, r.covered, r.correct);
    }
    let acc = m.accuracy.map_or("n/a".to_string(), |a| format!("{:.2}%", 100.0 * a));
    let _ = writeln!(
        s,
        "decided {}/{} ({:.2}%), correct {}, accuracy {acc}, refused {}",
        m.decided,
        m.total,
        100.0 * m.coverage,
        m.correct,
        m.total - m.decided
    );
    s
}

fn check_classes(rs: &RuleSet, dump: &GraphDump) -> Result<()> {
    let names = dump.class_names();
    if rs.classes != names {
        return Err(anyhow!("rules are for classes {:?}, data has {:?}", rs.classes, names));
    }
    Ok(())
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Map { data, mapping, out } => {
            let ds = load_data(&data)?;
            let dump = dump_from(&ds, &mapping)?;
            dump.write(formats::create(&out)?)?;
            outln!("{} graphs ({}) written to {}", dump.graphs.len(), dump.mode, out.display());
        }
        Command::Discover {
            input,
            discovery,
            rules_out,
            trace_out,
            simplify,
        } => {
            let dump = load_input(&input)?;
            let cfg = discovery_config(&discovery)?;
            let names = dump.class_names();
            let start = std::time::Instant::now();
            let trace = discover(&dump.graphs, &dump.labels, &names, &cfg, &mut TopSelector)?;
            log::info!("discovery took {:?}", start.elapsed());
            if let Some(p) = &trace_out {
                write_trace(formats::create(p)?, &trace, &dump.ids)?;
            }
            let mut rs = from_trace(&trace, &dump.graphs);
            if simplify {
                rs = simplify_all(&rs, &dump.graphs);
            }
            save_rules(&rules_out, &rs)?;
            let impure = trace.steps.iter().filter(|s| s.purity() < 1.0).count();
            outln!(
                "{} boxes ({} impure), {}/{} cases covered",
                trace.steps.len(),
                impure,
                trace.covered(),
                dump.graphs.len()
            );
            out!("{rs}");
        }
        Command::Classify {
            input,
            rules,
            out,
            metrics_out,
        } => {
            let dump = load_input(&input)?;
            let rs = load_rules(&rules)?;
            check_classes(&rs, &dump)?;
            let preds = rs.classify_all(&dump.graphs)?;
            if let Some(p) = &out {
                let names = dump.class_names();
                let labels: Vec<String> = dump.labels.iter().map(|&l| names[l].clone()).collect();
                write_predictions(formats::create(p)?, &dump.ids, Some(&labels), &preds)?;
            }
            let m = ilc_core::rules::metrics_from_predictions(&rs, &preds, &dump.labels, &dump.class_names())?;
            if let Some(p) = &metrics_out {
                let mut w = formats::create(p)?;
                serde_json::to_writer_pretty(&mut w, &m)?;
                writeln!(w)?;
                w.flush()?;
            }
            out!("{}", metrics_text(&m));
        }
        Command::Join { input, rules, out } => {
            let dump = load_input(&input)?;
            let rs = load_rules(&rules)?;
            check_classes(&rs, &dump)?;
            let report = join(&rs, &dump.graphs)?;
            for s in &report.steps {
                outln!("{:?}\t{}\t{}\t{} cases", s.kind, s.id, s.members.join(" + "), s.coverage);
            }
            save_rules(&out, &report.ruleset)?;
            out!("{}", report.ruleset);
        }
        Command::Prune {
            input,
            rules,
            strategy,
            tau,
            rule,
            out,
        } => {
            let dump = load_input(&input)?;
            let rs = load_rules(&rules)?;
            check_classes(&rs, &dump)?;
            let names = dump.class_names();
            let report = match &rule {
                Some(id) => prune_rule(&rs, id, strategy, &dump.graphs, &dump.labels, &names)?,
                None => prune(&rs, tau, strategy, &dump.graphs, &dump.labels, &names)?,
            };
            for p in &report.pruned {
                let counts: Vec<String> = p.counts.iter().map(|(c, n)| format!("{n} {c}")).collect();
                outln!(
                    "{} ({} cases): {:?} -> {} [{}], {} errors",
                    p.id,
                    p.coverage,
                    p.strategy,
                    p.replacement.as_deref().unwrap_or("removed"),
                    counts.join(" / "),
                    p.errors
                );
            }
            save_rules(&out, &report.ruleset)?;
            out!("{}", metrics_text(&evaluate(&report.ruleset, &dump.graphs, &dump.labels, &names)?));
        }
        Command::Cv {
            data,
            mapping,
            discovery,
            k,
            seed,
            stratified,
            adversarial,
            designated_fold,
            prune,
            tau,
            out,
            json,
        } => {
            let ds = load_data(&data)?;
            let mode = mapping.mode(ds.dim().unwrap_or(2))?;
            let dcfg = discovery_config(&discovery)?;
            let cv = CvConfig {
                k,
                seed,
                stratified,
                adversarial,
                designated_fold,
            };
            cv.validate(ds.len())?;
            let report = run_cv(&ds, &mode, &dcfg, &RuleConfig { prune, tau }, &cv)?;
            let text = if json {
                serde_json::to_string_pretty(&report)? + "\n"
            } else {
                report.to_text()
            };
            match &out {
                Some(p) => {
                    let mut w = formats::create(p)?;
                    w.write_all(text.as_bytes())?;
                    w.flush()?;
                }
                None => out!("{text}"),
            }
        }
        Command::Render {
            data,
            mapping,
            rules,
            mirrored,
            width,
            height,
            limit,
            arc_height,
            out,
        } => {
            let ds = load_data(&data)?;
            let mode = mapping.mode(ds.dim().unwrap_or(2))?;
            let boxes = match &rules {
                Some(p) => {
                    let rs = load_rules(p)?;
                    rs.boxes
                        .iter()
                        .map(|b| {
                            // color a box by the class of the first rule using it
                            let class = rs
                                .rules
                                .iter()
                                .find(|r| r.positive.contains(&b.id))
                                .and_then(|r| ds.class_index(&r.target));
                            BoxOverlay {
                                label: Some(b.id.clone()),
                                color: class.map_or("black".into(), |c| ds.classes[c].color.clone()),
                                class,
                                ..BoxOverlay::new(b.clone())
                            }
                        })
                        .collect()
                }
                None => Vec::new(),
            };
            let opts = RenderOptions {
                mode,
                mirrored,
                boxes,
                width,
                height,
                sample_limit: limit,
                arc_height_factor: arc_height,
                ..RenderOptions::default()
            };
            let svg = render_scene(&ds, &opts)?;
            let mut w = formats::create(&out)?;
            w.write_all(svg.as_bytes())?;
            w.flush()?;
        }
        Command::Linear {
            input,
            target,
            angles,
            node,
            threshold_mode,
            out,
        } => {
            let dump = load_input(&input)?;
            let names = dump.class_names();
            let t = names
                .iter()
                .position(|n| *n == target)
                .ok_or_else(|| BadFlag(format!("--target `{target}` is not one of {names:?}")))?;
            let cfg = LinearConfig {
                angles,
                selectors: node.iter().map(|n| n.parse::<NodeSelector>()).collect::<Result<_, _>>()?,
                mode: threshold_mode.parse::<ThresholdMode>()?,
            };
            let fit = fit_model(&dump.graphs, &dump.labels, &names, t, &cfg)?;
            outln!("{}", fit.model);
            outln!(
                "accuracy {:.2}% on {} decided of {} cases",
                100.0 * fit.accuracy,
                fit.decided,
                fit.total
            );
            if let Some(p) = &out {
                let mut w = formats::create(p)?;
                serde_json::to_writer_pretty(&mut w, &fit)?;
                writeln!(w)?;
                w.flush()?;
            }
        }
        Command::Serve {
            addr,
            data,
            preset,
            label_column,
            id_column,
        } => {
            let default = match &data {
                Some(p) => Some(load_csv(p, &load_options(preset.unwrap_or(Preset::Plain), &label_column, &id_column))?),
                None => None,
            };
            let rt = tokio::runtime::Runtime::new()?;
            eprintln!("serving on http://{addr}/api/v1/spec");
            rt.block_on(ilc_server::serve(addr, AppState::new(default)))?;
        }
    }
    Ok(())
}
