#![no_main]

use bosehub::io::{read_kv, read_observables, write_observables};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = read_kv(text);
    if let Ok(obs) = read_observables(text) {
        // Anything accepted must survive a write/read cycle bit-exactly.
        let round = write_observables(&obs);
        let again = read_observables(&round).expect("re-parse of serialized observables");
        assert_eq!(again.energy_scaled.to_bits(), obs.energy_scaled.to_bits());
        assert_eq!(again.occupations_s.len(), obs.occupations_s.len());
    }
});
