#![no_main]

use libfuzzer_sys::fuzz_target;
use thermograph::graph::format::{emit_graph_file, parse_graph_file};
use thermograph::graph::Validation;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for v in [Validation::Strict, Validation::Connected, Validation::Relaxed] {
        if let Ok(f) = parse_graph_file(text, v) {
            let back = parse_graph_file(&emit_graph_file(&f.graph, f.lengths.as_ref()), Validation::Relaxed)
                .expect("emitted files parse");
            assert_eq!(back.graph.to_spec(), f.graph.to_spec());
            let (a, b) = (back.lengths.map(|l| l.into_values()), f.lengths.map(|l| l.into_values()));
            assert_eq!(
                a.map(|v| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>()),
                b.map(|v| v.iter().map(|x| x.to_bits()).collect())
            );
        }
    }
});
