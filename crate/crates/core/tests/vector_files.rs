//! Files in the format an external embedding exporter writes.

use std::fmt::Write as _;

use logloom::encoder::{EncodeError, Provenance, VectorTable};
use logloom::parser::read_template_table;

const TEMPLATES: &str = "1\t40\tPacketResponder <*> for block blk_<*> terminating\n\
2\t12\tReceived block blk_<*> src: <*> dest: <*> of size <*>\n\
3\t3\tVerification succeeded for blk_<*>\n";

/// Deterministic stand-in for model output: 768 values per template.
fn exporter_file(ids: &[u32]) -> String {
    let mut out = String::from("#dim 768\n");
    for &id in ids {
        write!(out, "{id}").unwrap();
        for j in 0..768 {
            let v = ((id as f64) * 0.37 + j as f64 * 0.011).sin() * 0.5;
            write!(out, " {v:.8}").unwrap();
        }
        out.push('\n');
    }
    out
}

#[test]
fn exported_768_dim_vectors_import_and_cover_every_template() {
    let templates = read_template_table(TEMPLATES.as_bytes()).unwrap();
    let ids: Vec<u32> = templates.iter().map(|t| t.template_id).collect();
    let text = exporter_file(&ids);
    let table = VectorTable::import(text.as_bytes()).unwrap();
    assert_eq!(table.dim(), 768);
    assert_eq!(table.len(), templates.len());
    assert_eq!(table.provenance(), Provenance::ExternalImport);
    table.check_coverage(ids.iter().copied()).unwrap();
    let first = table.get(1).unwrap();
    assert_eq!(
        first[0],
        format!("{:.8}", (0.37f64).sin() * 0.5)
            .parse::<f64>()
            .unwrap()
    );
}

#[test]
fn written_file_reimports_identically() {
    let text = exporter_file(&[1, 2, 3]);
    let table = VectorTable::import(text.as_bytes()).unwrap();
    let mut buf = Vec::new();
    table.write(&mut buf).unwrap();
    let again = VectorTable::import(&buf[..]).unwrap();
    for id in 1..=3 {
        assert_eq!(table.get(id).unwrap(), again.get(id).unwrap());
    }
}

#[test]
fn short_row_and_missing_template_are_rejected() {
    let mut text = exporter_file(&[1, 2]);
    text.push_str("3 0.5 0.5\n");
    assert!(matches!(
        VectorTable::import(text.as_bytes()),
        Err(EncodeError::Format { line: 4, .. })
    ));
    let table = VectorTable::import(exporter_file(&[1, 2]).as_bytes()).unwrap();
    assert_eq!(
        table.check_coverage([1, 2, 3]),
        Err(EncodeError::MissingVector(3))
    );
}
