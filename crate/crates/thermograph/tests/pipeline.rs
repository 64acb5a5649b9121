use thermograph::cycles::{f_via_cycles, f_via_det, CycleComplex};
use thermograph::experiments::{run_experiment, run_verify, Experiment, ExperimentConfig, GraphSource, Suite};
use thermograph::graph::format::{emit_graph_file, parse_graph_file};
use thermograph::graph::{parse_family, standard_graph, Validation};
use thermograph::metrics::{barycentric_point, path_length, Metric, MetricPath, Profile};
use thermograph::spectral::{entropy, normalize_unit_entropy, MatrixKind};

const THETA_FILE: &str = "\
# three edges from v to w
graph theta
v v
v w
e e1 v w
e e2 v w
e e3 v w
len e1 0.5
len e2 1.5
len e3 2
";

#[test]
fn file_to_unit_entropy_surface() {
    let file = parse_graph_file(THETA_FILE, Validation::Strict).unwrap();
    let l = file.lengths.unwrap();
    let unit = normalize_unit_entropy(&file.graph, &l).unwrap();
    assert!((entropy(&file.graph, &unit).unwrap() - 1.0).abs() < 1e-12);
    for kind in [MatrixKind::Full, MatrixKind::Quotient] {
        let cx = CycleComplex::build(&file.graph, kind).unwrap();
        assert!(f_via_cycles(&cx, &unit).abs() < 1e-12);
        assert!(f_via_det(&file.graph, &unit, kind).abs() < 1e-12);
    }
    // The file describes the standard theta graph.
    let std = standard_graph(&parse_family("theta:2").unwrap()).unwrap().to_spec();
    assert_eq!((file.graph.to_spec().vertices, file.graph.to_spec().edges), (std.vertices, std.edges));
    let again = parse_graph_file(&emit_graph_file(&file.graph, Some(&unit)), Validation::Strict).unwrap();
    assert_eq!(again.lengths.unwrap().values(), unit.values());
}

#[test]
fn path_between_surface_points() {
    let g = standard_graph(&parse_family("theta:2").unwrap()).unwrap();
    let cx = CycleComplex::build(&g, MatrixKind::Quotient).unwrap();
    let p0 = barycentric_point(&cx).unwrap();
    let p = MetricPath::new(
        vec![Some(Profile::segment(p0[0], p0[0] + 0.3, 0.0, 1.0)), Some(Profile::Constant(p0[1])), None],
        0.0,
        1.0,
    )
    .unwrap();
    let e = path_length(&cx, &p, Metric::Entropy, 1e-10).unwrap();
    let q = path_length(&cx, &p, Metric::Pressure, 1e-10).unwrap();
    assert!(e > 0.0 && q > 0.0 && e.is_finite() && q.is_finite());
    let end = p.point(&cx, 1.0).unwrap();
    assert!(cx.value(&end).abs() < 1e-12);
}

#[test]
fn experiments_are_reproducible_in_process() {
    let cfg = ExperimentConfig { seed: 3, samples: Some(4), eps: Some(vec![0.25, 0.0625]), ..Default::default() };
    for exp in Experiment::ALL {
        let a = run_experiment(exp, &cfg).unwrap().to_csv().unwrap();
        let b = run_experiment(exp, &cfg).unwrap().to_csv().unwrap();
        assert_eq!(a, b, "{exp}");
    }
}

#[test]
fn verify_on_a_graph_file() {
    let cfg =
        ExperimentConfig { graph: Some(GraphSource::File(THETA_FILE.into())), samples: Some(3), ..Default::default() };
    let t = run_verify(Suite::Spectral, &cfg).unwrap();
    assert!(t.rows().iter().any(|r| r[2] == "theta".into()));
    let csv = t.to_csv().unwrap();
    assert!(!csv.contains(",fail,"), "{csv}");
    let other = run_verify(Suite::Spectral, &ExperimentConfig { samples: Some(3), ..Default::default() }).unwrap();
    assert_ne!(t.config_hash(), other.config_hash());
}
