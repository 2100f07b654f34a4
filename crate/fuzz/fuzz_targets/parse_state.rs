#![no_main]

use libfuzzer_sys::fuzz_target;
use sepdim::io;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(state) = io::parse_state(text) {
        let again = io::to_pretty(&io::any_state_to_value(&state));
        assert_eq!(io::parse_state(&again).unwrap(), state);
    }
});
