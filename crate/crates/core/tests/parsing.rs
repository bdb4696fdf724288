use std::collections::BTreeMap;

use logloom::datasets::{generate_synthetic, SyntheticSpec};
use logloom::parser::{
    line_tokens, numeric_premask, split_header, DrainConfig, HeaderFormat, LogParser, LogTemplate,
    ParseTree, RawLogRecord, Token, WILDCARD,
};
use proptest::prelude::*;

fn record(line_no: usize, content: &str) -> RawLogRecord {
    RawLogRecord {
        line_no,
        header_fields: BTreeMap::new(),
        content: content.to_string(),
    }
}

fn template_of(tree: &ParseTree, content: &str) -> String {
    let mut t = tree.clone();
    let id = t.parse(&record(0, content));
    t.template(id).unwrap().to_string()
}

#[test]
fn hdfs_lines_through_the_header_parser() {
    let lines = [
        "081109 204015 308 INFO dfs.DataNode$PacketResponder: PacketResponder 2 for block blk_8229193803249955061 terminating",
        "081109 203521 1438 INFO dfs.DataNode$DataXceiver: Received block blk_-1608999687919862906 src: /10.251.215.16:52002 dest: /10.251.215.16:50010 of size 911784",
    ];
    let mut p = LogParser::new(HeaderFormat::hdfs(), DrainConfig::default());
    let ids: Vec<_> = lines
        .iter()
        .enumerate()
        .map(|(i, l)| p.feed(i, l).unwrap().1)
        .collect();
    let tree = p.tree();
    assert_eq!(
        tree.template(ids[0]).unwrap().to_string(),
        "PacketResponder <*> for block blk_<*> terminating"
    );
    assert_eq!(
        tree.template(ids[1]).unwrap().to_string(),
        "Received block blk_<*> src: <*> dest: <*> of size <*>"
    );
    assert!(tree
        .template(ids[0])
        .unwrap()
        .to_string()
        .contains("PacketResponder <*> for block"));
}

/// Expected template of a synthetic line: its skeleton with numeric slots
/// masked.
fn masked(skeleton: &str) -> String {
    skeleton.replace('#', WILDCARD)
}

#[test]
fn synthetic_skeletons_are_recovered_exactly() {
    for seed in [7, 1, 2, 3] {
        let spec = SyntheticSpec {
            seed,
            total_lines: 3000,
            ..SyntheticSpec::default()
        };
        let corpus = generate_synthetic(&spec);
        let format = HeaderFormat::new(logloom::datasets::SYNTHETIC_FORMAT).unwrap();
        let mut tree = ParseTree::default();
        let mut seen = BTreeMap::new();
        for (i, line) in corpus.lines.iter().enumerate() {
            let r = split_header(i, line, &format).unwrap();
            let id = tree.parse(&r);
            seen.entry(id).or_insert_with(|| r.content.clone());
        }
        let mut got: Vec<String> = tree.templates().iter().map(|t| t.to_string()).collect();
        got.sort();
        // only skeletons that actually occur can be mined
        let mut want: Vec<String> = corpus
            .skeletons
            .iter()
            .filter(|s| {
                let head = s.split(' ').next().unwrap();
                seen.values().any(|c| c.split(' ').next() == Some(head))
            })
            .map(|s| masked(s))
            .collect();
        want.sort();
        assert_eq!(got, want, "seed {seed}");
    }
}

#[test]
fn premask_matches_a_token_rule_oracle() {
    // independent rule set for plain whitespace tokens
    fn oracle(content: &str) -> String {
        content
            .split_whitespace()
            .map(|t| {
                let bare = t.trim_start_matches('/');
                let (addr, port) = bare.split_once(':').unwrap_or((bare, ""));
                let is_ip = addr.split('.').count() == 4
                    && addr.split('.').all(|p| {
                        !p.is_empty() && p.len() <= 3 && p.bytes().all(|b| b.is_ascii_digit())
                    })
                    && port.bytes().all(|b| b.is_ascii_digit());
                if is_ip {
                    WILDCARD.to_string()
                } else if let Some(rest) = t.strip_prefix("blk_") {
                    let digits = rest.strip_prefix('-').unwrap_or(rest);
                    if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                        "blk_<*>".to_string()
                    } else {
                        t.to_string()
                    }
                } else if t.bytes().all(|b| b.is_ascii_digit()) {
                    WILDCARD.to_string()
                } else {
                    t.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
    let cases = [
        "Served block blk_-42 to /10.0.0.1",
        "took 15 ms on node7 port 50010",
        "from 192.168.1.20:8080 size 0",
        "x2 retry 3 of 10",
    ];
    for c in cases {
        assert_eq!(numeric_premask(c), oracle(c), "{c}");
    }
}

fn word() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z]{1,6}",
        (0u32..100_000).prop_map(|n| n.to_string()),
        Just("blk_123".to_string()),
    ]
}

fn content() -> impl Strategy<Value = String> {
    prop::collection::vec(word(), 1..8).prop_map(|w| w.join(" "))
}

fn matches(t: &LogTemplate, tokens: &[Token]) -> bool {
    t.tokens.len() == tokens.len()
        && t.tokens
            .iter()
            .zip(tokens)
            .all(|(a, b)| a.is_wildcard() || a == b)
}

proptest! {
    #[test]
    fn every_line_fits_its_final_template(lines in prop::collection::vec(content(), 1..40)) {
        let mut tree = ParseTree::default();
        let ids: Vec<_> = lines
            .iter()
            .enumerate()
            .map(|(i, l)| tree.parse(&record(i, l)))
            .collect();
        for (line, id) in lines.iter().zip(ids) {
            let t = tree.template(id).unwrap();
            prop_assert!(matches(t, &line_tokens(line)), "{line} vs {t}");
        }
        let total: u64 = tree.templates().iter().map(|t| t.support_count).sum();
        prop_assert_eq!(total as usize, lines.len());
    }

    #[test]
    fn reparsing_a_seen_line_changes_nothing(lines in prop::collection::vec(content(), 1..20)) {
        let mut tree = ParseTree::default();
        for (i, l) in lines.iter().enumerate() {
            tree.parse(&record(i, l));
        }
        let before: Vec<String> = tree.templates().iter().map(|t| t.to_string()).collect();
        for l in &lines {
            let t = template_of(&tree, l);
            prop_assert!(before.contains(&t));
        }
    }

    #[test]
    fn premask_is_idempotent(c in content()) {
        let once = numeric_premask(&c);
        prop_assert_eq!(numeric_premask(&once), once.clone());
        prop_assert_eq!(once.split(' ').count(), c.split_whitespace().count());
    }
}
