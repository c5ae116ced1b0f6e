use ilc_core::dataset::{ClassLabel, LabeledDataset, NDPoint};
use ilc_core::discovery::GridBox;
use ilc_core::mapping::{MappingKind, MappingMode};
use ilc_core::render::{render_scene, BoxOverlay, RenderOptions, ViewTransform};

fn two_points() -> LabeledDataset {
    LabeledDataset::new(
        vec![
            NDPoint::new(vec![3.0, 1.0, 4.0, 1.0, 5.0]).unwrap(),
            NDPoint::new(vec![2.0, 7.0, 1.0, 8.0, 2.0]).unwrap(),
        ],
        vec![0, 1],
        vec![ClassLabel::new("green", "green"), ClassLabel::new("red", "red")],
        (1..=5).map(|i| format!("x{i}")).collect(),
    )
    .unwrap()
}

fn parse(svg: &str) -> roxmltree::Document<'_> {
    roxmltree::Document::parse(svg).expect("well-formed SVG")
}

fn group<'a>(doc: &'a roxmltree::Document<'a>, id: &str) -> roxmltree::Node<'a, 'a> {
    doc.descendants().find(|n| n.attribute("id") == Some(id)).unwrap()
}

/// Screen y of the arc apex relative to the baseline, from the path's arc
/// sweep flag: 1 means the arc bulges upward for a rightward step.
fn sweeps(path: &str) -> Vec<&str> {
    let tokens: Vec<&str> = path.split_whitespace().collect();
    tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| **t == "A")
        .map(|(i, _)| tokens[i + 5])
        .collect()
}

#[test]
fn mirrored_arcs_sit_on_opposite_sides() {
    let ds = two_points();
    let opts = RenderOptions {
        mode: MappingMode::sequential_spaced(5, 10.0),
        mirrored: true,
        ..RenderOptions::default()
    };
    let svg = render_scene(&ds, &opts).unwrap();
    let doc = parse(&svg);
    let paths: Vec<_> = group(&doc, "cases").children().filter(|n| n.has_tag_name("path")).collect();
    assert_eq!(paths.len(), 2);
    let a = sweeps(paths[0].attribute("d").unwrap());
    let b = sweeps(paths[1].attribute("d").unwrap());
    assert!(!a.is_empty() && a.iter().all(|s| *s == "1"));
    assert!(!b.is_empty() && b.iter().all(|s| *s == "0"));
}

#[test]
fn one_polyline_per_case_and_boxes_drawn() {
    let ds = two_points();
    let opts = RenderOptions {
        boxes: vec![BoxOverlay::new(GridBox::new("B1", 2.0, 4.0, 0.5, 2.0).unwrap())],
        ..RenderOptions::default()
    };
    let svg = render_scene(&ds, &opts).unwrap();
    let doc = parse(&svg);
    let cases = group(&doc, "cases");
    let lines: Vec<_> = cases.children().filter(|n| n.has_tag_name("polyline")).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0].attribute("data-case"), Some("0"));
    assert_eq!(lines[1].attribute("data-class"), Some("red"));
    // five coordinates, zero-padded to three nodes
    assert_eq!(lines[0].attribute("points").unwrap().split(' ').count(), 3);
    let boxes: Vec<_> = group(&doc, "boxes").children().filter(|n| n.has_tag_name("rect")).collect();
    assert_eq!(boxes.len(), 1);
    assert_eq!(boxes[0].attribute("data-box"), Some("B1"));
}

#[test]
fn empty_dataset_renders_axes_only() {
    let ds = LabeledDataset::new(vec![], vec![], vec![ClassLabel::new("a", "blue")], vec![]).unwrap();
    let svg = render_scene(&ds, &RenderOptions::default()).unwrap();
    let doc = parse(&svg);
    assert_eq!(group(&doc, "axes").children().filter(|n| n.has_tag_name("line")).count(), 2);
    assert_eq!(group(&doc, "cases").children().filter(|n| n.is_element()).count(), 0);
}

#[test]
fn output_is_deterministic() {
    let ds = two_points();
    let opts = RenderOptions {
        mirrored: true,
        mode: MappingMode::new(MappingKind::Ilc2FullDynamic),
        ..RenderOptions::default()
    };
    assert_eq!(render_scene(&ds, &opts).unwrap(), render_scene(&ds, &opts).unwrap());
}

#[test]
fn missing_color_is_an_error() {
    let ds = two_points();
    let opts = RenderOptions {
        colors: Some(vec!["green".into()]),
        ..RenderOptions::default()
    };
    assert!(render_scene(&ds, &opts).is_err());
}

#[test]
fn polyline_vertices_invert_through_the_view() {
    let ds = two_points();
    let svg = render_scene(&ds, &RenderOptions::default()).unwrap();
    let doc = parse(&svg);
    let line = group(&doc, "cases").children().find(|n| n.has_tag_name("polyline")).unwrap();
    let screen: Vec<[f64; 2]> = line
        .attribute("points")
        .unwrap()
        .split(' ')
        .map(|p| {
            let (x, y) = p.split_once(',').unwrap();
            [x.parse().unwrap(), y.parse().unwrap()]
        })
        .collect();
    // partial dynamic nodes of (3,1,4,1,5): (3,1), (7,1), (12,0)
    let graph = [[3.0, 1.0], [7.0, 1.0], [12.0, 0.0]];
    let dx = (screen[1][0] - screen[0][0]) / (graph[1][0] - graph[0][0]);
    for (s, g) in screen.iter().zip(graph) {
        // screen positions are printed to 3 decimals
        assert!((s[0] - screen[0][0] - dx * (g[0] - graph[0][0])).abs() < 2e-3);
        assert!((s[1] - screen[0][1] + dx * (g[1] - graph[0][1])).abs() < 2e-3);
    }
    let v = ViewTransform::fit([0.0, 0.0], [12.0, 1.0], 800.0, 600.0);
    for g in graph {
        let back = v.to_graph(v.to_screen(g));
        assert!((back[0] - g[0]).abs() < 1e-6 && (back[1] - g[1]).abs() < 1e-6);
    }
}
