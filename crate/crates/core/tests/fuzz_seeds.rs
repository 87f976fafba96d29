//! Replays the checked-in fuzz corpora through the fuzz targets' invariants.

use std::fs;
use std::path::PathBuf;

use metapulse::scenario::{parse_config, parse_override, parse_sample_file};

fn corpus(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let text = fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "empty corpus {target}");
    out
}

#[test]
fn config_seeds_round_trip() {
    let mut accepted = 0;
    for (path, text) in corpus("parse_config") {
        if let Ok(config) = parse_config(&text) {
            let again = parse_config(&config.to_toml())
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(again.to_toml(), config.to_toml(), "{}", path.display());
            accepted += 1;
        }
    }
    assert!(accepted >= 9);
}

#[test]
fn sample_file_seeds_hold_invariants() {
    for (path, text) in corpus("parse_sample_file") {
        match parse_sample_file(&text) {
            Ok(samples) => {
                assert!(samples.len() >= 2, "{}", path.display());
                assert!(samples.windows(2).all(|w| w[0].0 < w[1].0), "{}", path.display());
            }
            Err(e) => assert!(path.ends_with("repeated_time.csv"), "{}: {e}", path.display()),
        }
    }
}

#[test]
fn override_seeds_parse() {
    for (path, text) in corpus("parse_override") {
        let o = parse_override(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(!o.path.is_empty());
    }
}
