#![no_main]

use libfuzzer_sys::fuzz_target;
use sepdim::io;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(dec) = io::parse_decomposition(text) {
        let again = io::to_pretty(&io::any_decomposition_to_value(&dec));
        assert_eq!(io::parse_decomposition(&again).unwrap(), dec);
    }
});
