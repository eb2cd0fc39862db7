use std::fs;
use std::path::Path;

/// Every chapter linked from SUMMARY.md must be compiled as doc-tests.
#[test]
fn every_chapter_is_doc_tested() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let summary = fs::read_to_string(root.join("../../book/src/SUMMARY.md")).unwrap();
    let lib = fs::read_to_string(root.join("src/lib.rs")).unwrap();
    let chapters: Vec<&str> = summary
        .lines()
        .filter_map(|l| l.split_once("](").map(|(_, rest)| rest.trim_end_matches(')')))
        .collect();
    assert!(!chapters.is_empty());
    for chapter in chapters {
        assert!(root.join("../../book/src").join(chapter).exists(), "{chapter} missing");
        let include = format!("include_str!(\"../../../book/src/{chapter}\")");
        assert!(lib.contains(&include), "{chapter} is not included in src/lib.rs");
    }
}
