#![no_main]

use libfuzzer_sys::fuzz_target;
use sketchchain_core::params::Params;
use sketchchain_core::retrieval::sketch_to_chains;
use sketchchain_core::wire::QueryRequest;

fuzz_target!(|data: &[u8]| {
    if data.len() > 4096 {
        return;
    }
    if let Ok(req) = QueryRequest::parse(data) {
        let _ = sketch_to_chains(&req.stroke_points(), (req.frame[0], req.frame[1]), &Params::default());
    }
});
