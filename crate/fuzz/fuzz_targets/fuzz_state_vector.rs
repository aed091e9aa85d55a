#![no_main]

use bosehub::io::{read_state_vector, write_state_vector};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(state) = read_state_vector(data) {
        // Round-trip: accepted files re-serialize to the identical bytes.
        let mut bytes = Vec::new();
        write_state_vector(&mut bytes, state.l, state.n, state.boundary, &state.data)
            .expect("serializing an accepted state");
        assert_eq!(bytes, data);
    }
});
