#![no_main]

use bosehub::io::{
    read_compare_pt_csv, read_critical_tau_csv, read_curve_csv, read_occupation_csv,
    read_phase_grid_csv,
};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = read_phase_grid_csv(text);
    let _ = read_critical_tau_csv(text);
    let _ = read_curve_csv(text);
    let _ = read_occupation_csv(text);
    let _ = read_compare_pt_csv(text);
});
