#![no_main]

use libfuzzer_sys::fuzz_target;
use sketchchain_core::corpus::{ingest_corpus, parse_line};
use sketchchain_core::params::Params;

fuzz_target!(|data: &[u8]| {
    if let Ok(line) = std::str::from_utf8(data) {
        let _ = parse_line(line);
    }
    // Whole-file ingestion also builds descriptors for every good line.
    let _ = ingest_corpus(data, &Params::default());
});
