#![no_main]

use libfuzzer_sys::fuzz_target;
use sepdim::io;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cert) = io::parse_certificate(text) {
        let again = io::to_pretty(&io::certificate_to_value(&cert));
        assert_eq!(io::parse_certificate(&again).unwrap(), cert);
    }
});
