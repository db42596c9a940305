#![no_main]

use libfuzzer_sys::fuzz_target;
use sketchchain_core::index::{read_index, write_index};

fuzz_target!(|data: &[u8]| {
    if let Ok(tree) = read_index(data) {
        // Anything accepted must survive a rewrite unchanged.
        let bytes = write_index(&tree);
        assert_eq!(read_index(&bytes).unwrap(), tree);
    }
});
