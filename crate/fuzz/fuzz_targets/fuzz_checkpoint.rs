#![no_main]

use bosehub::io::{read_checkpoint, write_checkpoint_record};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(records) = read_checkpoint(text) {
        // Accepted records re-serialize and re-parse to the same payload.
        let mut round = String::new();
        for rec in &records {
            write_checkpoint_record(&mut round, rec.spec_hash, rec.cell_index, &rec.stats);
        }
        let again = read_checkpoint(&round).expect("re-parse of serialized records");
        assert_eq!(again.len(), records.len());
        for (a, b) in records.iter().zip(&again) {
            assert_eq!(a.cell_index, b.cell_index);
            assert_eq!(a.stats.ps.mean.to_bits(), b.stats.ps.mean.to_bits());
            assert_eq!(a.stats.skipped, b.stats.skipped);
        }
    }
});
