//! Replays the checked-in fuzz seeds through the same round-trip checks
//! as the fuzz targets.

use std::fs;
use std::path::PathBuf;

use sepdim::io;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.display().to_string(), fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty());
    out
}

#[test]
fn state_seeds() {
    let mut parsed = 0;
    for (name, text) in seeds("parse_state") {
        if let Ok(state) = io::parse_state(&text) {
            let again = io::to_pretty(&io::any_state_to_value(&state));
            assert_eq!(io::parse_state(&again).unwrap(), state, "{name}");
            parsed += 1;
        }
    }
    assert!(parsed >= 2);
}

#[test]
fn decomposition_seeds() {
    for (name, text) in seeds("parse_decomposition") {
        let dec = io::parse_decomposition(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let again = io::to_pretty(&io::any_decomposition_to_value(&dec));
        assert_eq!(io::parse_decomposition(&again).unwrap(), dec, "{name}");
    }
}

#[test]
fn certificate_seeds() {
    for (name, text) in seeds("parse_certificate") {
        let cert = io::parse_certificate(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(cert.verify().unwrap(), "{name}");
        let again = io::to_pretty(&io::certificate_to_value(&cert));
        assert_eq!(io::parse_certificate(&again).unwrap(), cert, "{name}");
    }
}

#[test]
fn shape_seeds() {
    let results: Vec<bool> = seeds("parse_shape")
        .iter()
        .map(|(_, text)| io::parse_shape(text).is_ok())
        .collect();
    assert!(results.contains(&true) && results.contains(&false));
}

mod mutated {
    use super::*;
    use proptest::prelude::*;

    fn all_parsers(text: &str) {
        let _ = io::parse_state(text);
        let _ = io::parse_decomposition(text);
        let _ = io::parse_certificate(text);
        let _ = io::parse_shape(text);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        #[test]
        fn arbitrary_text_never_panics(text in ".{0,200}") {
            all_parsers(&text);
        }

        #[test]
        fn mutated_seeds_never_panic(pick in any::<prop::sample::Index>(), edits in prop::collection::vec((any::<prop::sample::Index>(), any::<u8>()), 1..8)) {
            let mut all: Vec<String> = ["parse_state", "parse_decomposition", "parse_certificate", "parse_shape"]
                .iter()
                .flat_map(|t| seeds(t).into_iter().map(|(_, s)| s))
                .collect();
            let mut bytes = all.swap_remove(pick.index(all.len())).into_bytes();
            for (at, b) in edits {
                let i = at.index(bytes.len());
                bytes[i] = b;
            }
            if let Ok(text) = std::str::from_utf8(&bytes) {
                all_parsers(text);
            }
        }
    }
}
