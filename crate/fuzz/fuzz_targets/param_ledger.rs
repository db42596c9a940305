#![no_main]

use libfuzzer_sys::fuzz_target;
use sketchchain_core::params::Params;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = Params::from_toml_str(text) {
        assert_eq!(Params::from_toml_str(&p.to_toml_string()).unwrap(), p);
    }
});
