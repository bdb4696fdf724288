use std::collections::BTreeMap;

use logloom::encoder::VectorTable;
use logloom::graph::{
    build_graph_set, partition, read_graph_set, write_graph_set, ChainRecurrence, SessionExtractor,
    WindowSpec,
};
use logloom::parser::{LogTemplate, StructuredLine, Token};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn line(line_no: usize, template_id: u32) -> StructuredLine {
    StructuredLine {
        line_no,
        template_id,
        label: None,
    }
}

#[test]
fn session_windows_match_a_group_by() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let blocks = ["blk_1", "blk_-2", "blk_33", "blk_4"];
    let mut contents = Vec::new();
    let mut records = Vec::new();
    for i in 0..200 {
        let c = if rng.random_bool(0.05) {
            "heartbeat".to_string()
        } else {
            format!("op on {}", blocks[rng.random_range(0..blocks.len())])
        };
        contents.push(c);
        records.push(line(i, rng.random_range(1..5)));
    }
    let ex = SessionExtractor::hdfs_block();
    let keys: Vec<Option<String>> = contents.iter().map(|c| ex.extract(c)).collect();
    let part = partition(&records, &WindowSpec::Session(ex), Some(&keys)).unwrap();

    // oracle: order of first appearance, members in line order
    let mut first: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (r, k) in records.iter().zip(&keys) {
        let Some(k) = k.as_deref() else { continue };
        if !first.contains(&k) {
            first.push(k);
        }
        groups.entry(k).or_default().push(r.line_no);
    }
    let want: Vec<Vec<usize>> = first
        .iter()
        .map(|k| groups[k].clone())
        .filter(|g| g.len() >= 2)
        .collect();
    let got: Vec<Vec<usize>> = part
        .windows
        .iter()
        .filter(|w| w.iter().all(|r| keys[r.line_no].is_some()))
        .map(|w| w.iter().map(|r| r.line_no).collect())
        .collect();
    assert_eq!(got, want);
    assert_eq!(part.unkeyed, keys.iter().filter(|k| k.is_none()).count());
}

#[test]
fn count_windows_cover_every_line_once() {
    let records: Vec<_> = (0..257).map(|i| line(i, (i % 3) as u32 + 1)).collect();
    let part = partition(&records, &WindowSpec::Count(50), None).unwrap();
    let covered: Vec<usize> = part.windows.iter().flatten().map(|r| r.line_no).collect();
    assert_eq!(covered.len() + part.dropped, 257);
    assert!(covered.windows(2).all(|p| p[0] < p[1]));
}

#[test]
fn graph_file_round_trips_a_built_set() {
    let templates: Vec<LogTemplate> = (1..=3)
        .map(|id| LogTemplate {
            template_id: id,
            tokens: vec![Token::Const(format!("event{id}")), Token::Wildcard],
            support_count: 1,
        })
        .collect();
    let vectors = VectorTable::builtin(&templates, 16).unwrap();
    let records: Vec<_> = (0..40).map(|i| line(i, [1, 2, 1, 3][i % 4])).collect();
    let part = partition(&records, &WindowSpec::Count(10), None).unwrap();
    let graphs = build_graph_set(&part, &vectors, &ChainRecurrence::default()).unwrap();
    let mut buf = Vec::new();
    write_graph_set(&mut buf, &graphs, 16).unwrap();
    let back = read_graph_set(&buf[..], &vectors).unwrap();
    assert_eq!(back, graphs);
}
