#![no_main]

use libfuzzer_sys::fuzz_target;
use sketchchain_core::corpus::{extract_record, ContourRecord};
use sketchchain_core::params::Params;

fuzz_target!(|data: &[u8]| {
    if data.len() > 8192 {
        return;
    }
    if let Ok(record) = serde_json::from_slice::<ContourRecord>(data) {
        let _ = extract_record(&record, &Params::default());
    }
});
