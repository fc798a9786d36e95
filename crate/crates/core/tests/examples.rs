use std::path::Path;

use lcasp::syntax::{parse_program, print_program};

fn bundled() -> Vec<std::path::PathBuf> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut files = Vec::new();
    for dir in ["yale", "paper", "bench"] {
        for entry in std::fs::read_dir(root.join(dir)).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "lp") {
                files.push(path);
            }
        }
    }
    files.sort();
    files
}

#[test]
fn printing_is_stable_after_one_pass() {
    let files = bundled();
    assert!(files.len() >= 10);
    for path in files {
        let text = std::fs::read_to_string(&path).unwrap();
        let once = print_program(&parse_program(&text).unwrap());
        let twice = print_program(&parse_program(&once).unwrap());
        assert_eq!(once, twice, "{}", path.display());
    }
}
