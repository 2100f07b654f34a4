#![no_main]

use libfuzzer_sys::fuzz_target;
use sepdim::io;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(shape) = io::parse_shape(text) {
        let label: Vec<String> = shape.dims().iter().map(usize::to_string).collect();
        assert_eq!(io::parse_shape(&label.join("x")).unwrap(), shape);
    }
});
