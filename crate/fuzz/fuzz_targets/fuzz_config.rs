#![no_main]

use bosehub::config::{Command, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    for command in [
        Command::GroundState,
        Command::PhaseDiagram,
        Command::CriticalTau,
        Command::ComparePt,
    ] {
        let mut cfg = RunConfig::new(command);
        if cfg.apply_file(text).is_ok() {
            // Validation must never panic, whatever the file said.
            let _ = cfg.validate();
            let _ = cfg.to_kv_pairs();
        }
    }
});
