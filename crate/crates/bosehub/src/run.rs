//! Command implementations behind the CLI: each one validates its config,
//! computes, and writes plot-ready files into a fresh run directory named
//! `<timestamp>-<confighash>` under the configured output root. Existing
//! directories are never overwritten; a numeric suffix is appended instead.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use crate::analysis::{occupation_density, occupation_density_reciprocal, overlap, ObservableSet};
use crate::config::{Command, RunConfig};
use crate::eigen::{ground_state, DEFAULT_MAX_RESTARTS, DEFAULT_TOL};
use crate::ensemble::{
    compare_pt_cell, critical_tau_sweep, phase_diagram_with_checkpoint, ComparePtCell,
};
use crate::error::{Error, Result};
use crate::fock::SectorBasis;
use crate::hamil::{build_hamiltonian, sample_disorder, ModelParams};
use crate::io;
use crate::pert::{
    boundary_loc_w, boundary_sf_loc, boundary_w_sf, disorder_minimum, localized_state, sf_state,
    w_state, Phase,
};
use crate::seeds::derive_seed;

/// Validate and execute a run; returns the created output directory.
pub fn execute(cfg: &RunConfig) -> Result<PathBuf> {
    cfg.validate()?;
    match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::config(format!("cannot build worker pool: {e}")))?
            .install(|| dispatch(cfg)),
        None => dispatch(cfg),
    }
}

fn dispatch(cfg: &RunConfig) -> Result<PathBuf> {
    match cfg.command {
        Command::GroundState => cmd_ground_state(cfg),
        Command::PhaseDiagram => cmd_phase_diagram(cfg),
        Command::CriticalTau => cmd_critical_tau(cfg),
        Command::ComparePt => cmd_compare_pt(cfg),
    }
}

/// Single-shot ground-state analysis: observables, occupation densities in
/// both spaces, and optionally the raw state vector.
pub fn cmd_ground_state(cfg: &RunConfig) -> Result<PathBuf> {
    let started = std::time::Instant::now();
    let tau = cfg.tau.expect("validated");
    let delta = cfg.delta.expect("validated");
    let nm1 = (cfg.n - 1) as f64;
    let unit = (cfg.n * (cfg.n - 1)) as f64;

    let basis = SectorBasis::new(cfg.l, cfg.n)?;
    // Seeded exactly like realization 0 of cell 0 of an ensemble run.
    let omega = sample_disorder(cfg.l, delta * nm1, derive_seed(cfg.seed, &[0, 0, 0]));
    let params = ModelParams::new(cfg.l, cfg.n, 1.0, tau * nm1, cfg.boundary, omega)?;
    let h = build_hamiltonian(&params, &basis)?;
    let gs = ground_state(&h, DEFAULT_TOL, DEFAULT_MAX_RESTARTS, derive_seed(cfg.seed, &[0, 0, 1]))?;

    let mut obs = ObservableSet::compute(&gs.vector, &basis, cfg.boundary, gs.energy / unit)?;
    // Best-effort fidelities; a resonant draw simply omits the entry.
    let mut fidelities = std::collections::BTreeMap::new();
    if let Ok(loc) = localized_state(&params, &basis, disorder_minimum(&params.omega)) {
        fidelities.insert(Phase::Localized, overlap(&gs.vector, &loc)?);
    }
    if let Ok(w) = w_state(&params, &basis) {
        fidelities.insert(Phase::W, overlap(&gs.vector, &w.vector)?);
    }
    if let Ok(sf) = sf_state(&params, &basis) {
        fidelities.insert(Phase::Superfluid, overlap(&gs.vector, &sf)?);
    }
    obs.fidelities = (!fidelities.is_empty()).then_some(fidelities);

    let dir = prepare_out_dir(cfg)?;
    std::fs::write(dir.join("observables.txt"), io::write_observables(&obs))?;

    let site_rows = density_rows(cfg.n, cfg.l, |site| occupation_density(&gs.vector, &basis, site))?;
    std::fs::write(
        dir.join("occupations_site.csv"),
        io::write_occupation_csv("site", &site_rows),
    )?;
    let mode_rows = density_rows(cfg.n, cfg.l, |mode| {
        occupation_density_reciprocal(&gs.vector, &basis, mode, cfg.boundary)
    })?;
    std::fs::write(
        dir.join("occupations_mode.csv"),
        io::write_occupation_csv("mode", &mode_rows),
    )?;

    if cfg.dump_state {
        let mut bytes = Vec::new();
        io::write_state_vector(&mut bytes, cfg.l as u32, cfg.n, cfg.boundary, &gs.vector)?;
        std::fs::write(dir.join("state.bhsv"), bytes)?;
    }

    let extras = [
        ("energy".to_string(), format!("{:.16e}", gs.energy)),
        ("residual".to_string(), format!("{:.3e}", gs.residual)),
        ("iterations".to_string(), gs.iterations.to_string()),
    ];
    write_metadata(&dir, cfg, started.elapsed().as_secs_f64(), &extras)?;
    Ok(dir)
}

/// Transpose per-column densities into rows over n = 0..=N.
fn density_rows(
    n: u32,
    cols: usize,
    density: impl Fn(usize) -> Result<Vec<f64>>,
) -> Result<Vec<Vec<f64>>> {
    let per_col: Vec<Vec<f64>> = (0..cols).map(density).collect::<Result<Vec<_>>>()?;
    Ok((0..=n as usize)
        .map(|level| per_col.iter().map(|p| p[level]).collect())
        .collect())
}

/// Full (tau, delta) scan with checkpointing, plus the three analytic
/// boundary curves as separate CSV polylines.
pub fn cmd_phase_diagram(cfg: &RunConfig) -> Result<PathBuf> {
    let started = std::time::Instant::now();
    let spec = cfg.ensemble_spec()?;
    let dir = prepare_out_dir(cfg)?;
    let grid = phase_diagram_with_checkpoint(&spec, Some(&dir.join("results.log")))?;
    std::fs::write(dir.join("phase_grid.csv"), io::write_phase_grid_csv(&grid))?;

    // Localized-to-W: delta = 2 (alpha tau)^N over the tau grid.
    let loc_w: Vec<(f64, f64)> = spec
        .tau_grid
        .iter()
        .filter_map(|&t| boundary_loc_w(t, spec.n).ok().map(|d| (t, d)))
        .collect();
    std::fs::write(dir.join("boundary_loc_w.csv"), io::write_curve_csv(&loc_w))?;

    // Energy-equality curves, where the root exists.
    let w_sf: Vec<(f64, f64)> = spec
        .delta_grid
        .iter()
        .filter_map(|&d| boundary_w_sf(d, spec.l, spec.n).ok().map(|t| (t, d)))
        .collect();
    std::fs::write(dir.join("boundary_w_sf.csv"), io::write_curve_csv(&w_sf))?;
    let sf_loc: Vec<(f64, f64)> = spec
        .delta_grid
        .iter()
        .filter_map(|&d| boundary_sf_loc(d, spec.l, spec.n).ok().map(|t| (t, d)))
        .collect();
    std::fs::write(dir.join("boundary_sf_loc.csv"), io::write_curve_csv(&sf_loc))?;

    let extras = [
        ("spec_hash".to_string(), format!("{:016x}", spec.spec_hash())),
        ("cells".to_string(), grid.cells.len().to_string()),
        (
            "skipped_total".to_string(),
            grid.cells.iter().map(|c| c.skipped as u64).sum::<u64>().to_string(),
        ),
    ];
    write_metadata(&dir, cfg, started.elapsed().as_secs_f64(), &extras)?;
    Ok(dir)
}

/// Critical-hopping table over boson numbers and disorder strengths.
pub fn cmd_critical_tau(cfg: &RunConfig) -> Result<PathBuf> {
    let started = std::time::Instant::now();
    let spec = cfg.ensemble_spec()?;
    let rows = critical_tau_sweep(&spec, &cfg.effective_n_list())?;
    let dir = prepare_out_dir(cfg)?;
    std::fs::write(dir.join("critical_tau.csv"), io::write_critical_tau_csv(&rows))?;
    let extras = [
        ("spec_hash".to_string(), format!("{:016x}", spec.spec_hash())),
        ("rows".to_string(), rows.len().to_string()),
    ];
    write_metadata(&dir, cfg, started.elapsed().as_secs_f64(), &extras)?;
    Ok(dir)
}

/// Perturbation-theory fidelity and energy-difference map over the grid.
pub fn cmd_compare_pt(cfg: &RunConfig) -> Result<PathBuf> {
    let started = std::time::Instant::now();
    let spec = cfg.ensemble_spec()?;
    let nt = spec.tau_grid.len();
    let indices: Vec<(usize, usize)> = (0..spec.delta_grid.len())
        .flat_map(|i_delta| (0..nt).map(move |i_tau| (i_delta, i_tau)))
        .collect();
    let cells: Vec<ComparePtCell> = indices
        .par_iter()
        .enumerate()
        .map(|(flat, &(i_delta, i_tau))| {
            compare_pt_cell(
                &spec,
                spec.tau_grid[i_tau],
                spec.delta_grid[i_delta],
                flat as u64,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let dir = prepare_out_dir(cfg)?;
    std::fs::write(dir.join("compare_pt.csv"), io::write_compare_pt_csv(&cells))?;
    let extras = [
        ("spec_hash".to_string(), format!("{:016x}", spec.spec_hash())),
        ("cells".to_string(), cells.len().to_string()),
    ];
    write_metadata(&dir, cfg, started.elapsed().as_secs_f64(), &extras)?;
    Ok(dir)
}

fn write_metadata(
    dir: &Path,
    cfg: &RunConfig,
    wall_time_s: f64,
    extras: &[(String, String)],
) -> Result<()> {
    let mut pairs = vec![
        (
            "code_version".to_string(),
            env!("CARGO_PKG_VERSION").to_string(),
        ),
        ("master_seed".to_string(), cfg.seed.to_string()),
        ("wall_time_s".to_string(), format!("{wall_time_s:.3}")),
    ];
    pairs.extend(cfg.to_kv_pairs());
    pairs.extend(extras.iter().cloned());
    let mut text = String::from("# bosehub run metadata\n");
    text.push_str(&io::write_kv(&pairs));
    std::fs::write(dir.join("metadata.txt"), text)?;
    Ok(())
}

/// `<out>/<YYYYMMDD-HHMMSSZ>-<confighash8>`, suffixed if taken.
fn prepare_out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let echo = io::write_kv(&cfg.to_kv_pairs());
    let hash = crate::seeds::fnv1a(echo.as_bytes()) as u32;
    let stamp = utc_timestamp();
    let base = cfg.out_dir.join(format!("{stamp}-{hash:08x}"));
    let mut dir = base.clone();
    let mut suffix = 0;
    while dir.exists() {
        suffix += 1;
        dir = PathBuf::from(format!("{}-{suffix}", base.display()));
    }
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn utc_timestamp() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let days = (secs / 86_400) as i64;
    let rem = secs % 86_400;
    let (y, m, d) = civil_from_days(days);
    format!(
        "{y:04}{m:02}{d:02}-{:02}{:02}{:02}Z",
        rem / 3600,
        (rem % 3600) / 60,
        rem % 60
    )
}

/// Days-since-epoch to (year, month, day), proleptic Gregorian.
fn civil_from_days(z: i64) -> (i64, u32, u32) {
    let z = z + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    (if m <= 2 { y + 1 } else { y }, m, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::GridSpec;

    fn out_in(dir: &tempfile::TempDir, cfg: &mut RunConfig) {
        cfg.out_dir = dir.path().to_path_buf();
    }

    #[test]
    fn civil_dates() {
        assert_eq!(civil_from_days(0), (1970, 1, 1));
        assert_eq!(civil_from_days(19_723), (2024, 1, 1));
        assert_eq!(civil_from_days(11_016), (2000, 2, 29));
    }

    #[test]
    fn ground_state_run_writes_files() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::new(Command::GroundState);
        cfg.l = 4;
        cfg.n = 3;
        cfg.tau = Some(0.1);
        cfg.delta = Some(0.01);
        cfg.dump_state = true;
        out_in(&tmp, &mut cfg);
        let dir = execute(&cfg).unwrap();
        for f in [
            "observables.txt",
            "occupations_site.csv",
            "occupations_mode.csv",
            "state.bhsv",
            "metadata.txt",
        ] {
            assert!(dir.join(f).exists(), "{f} missing");
        }
        // The observables file round-trips.
        let obs =
            io::read_observables(&std::fs::read_to_string(dir.join("observables.txt")).unwrap())
                .unwrap();
        assert!((obs.occupations_s.iter().sum::<f64>() - 3.0).abs() < 1e-10);
        // The occupation table columns are per-site distributions.
        let table =
            io::read_occupation_csv(&std::fs::read_to_string(dir.join("occupations_site.csv")).unwrap())
                .unwrap();
        assert_eq!(table.rows.len(), 4);
        for col in 0..4 {
            let total: f64 = table.rows.iter().map(|r| r[col]).sum();
            assert!((total - 1.0).abs() < 1e-10);
        }
        // The dumped state parses and is unit norm.
        let state =
            io::read_state_vector(std::fs::File::open(dir.join("state.bhsv")).unwrap()).unwrap();
        let norm: f64 = state.data.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn phase_diagram_run_writes_grid_and_curves() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::new(Command::PhaseDiagram);
        cfg.l = 4;
        cfg.n = 3;
        cfg.realizations = 3;
        cfg.workers = Some(2);
        cfg.tau_grid = Some(GridSpec::new(0.05, 0.5, 3, crate::config::GridScale::Log).unwrap());
        cfg.delta_grid = Some(GridSpec::new(1e-3, 0.3, 3, crate::config::GridScale::Log).unwrap());
        out_in(&tmp, &mut cfg);
        let dir = execute(&cfg).unwrap();
        let rows =
            io::read_phase_grid_csv(&std::fs::read_to_string(dir.join("phase_grid.csv")).unwrap())
                .unwrap();
        assert_eq!(rows.len(), 9);
        assert!(dir.join("results.log").exists());
        for f in ["boundary_loc_w.csv", "boundary_w_sf.csv", "boundary_sf_loc.csv"] {
            assert!(dir.join(f).exists());
        }
        let meta = std::fs::read_to_string(dir.join("metadata.txt")).unwrap();
        assert!(meta.contains("master_seed"));
    }

    #[test]
    fn critical_tau_run_writes_table() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::new(Command::CriticalTau);
        cfg.l = 5;
        cfg.n = 2;
        cfg.realizations = 2;
        cfg.tau_grid = Some(GridSpec::new(0.05, 0.8, 6, crate::config::GridScale::Log).unwrap());
        cfg.delta_grid = Some(GridSpec::new(1e-3, 1e-2, 2, crate::config::GridScale::Log).unwrap());
        out_in(&tmp, &mut cfg);
        let dir = execute(&cfg).unwrap();
        let rows = io::read_critical_tau_csv(
            &std::fs::read_to_string(dir.join("critical_tau.csv")).unwrap(),
        )
        .unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.n == 2));
    }

    #[test]
    fn compare_pt_run_writes_csv() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::new(Command::ComparePt);
        cfg.l = 4;
        cfg.n = 3;
        cfg.realizations = 2;
        cfg.tau_grid = Some(GridSpec::new(0.05, 1.0, 2, crate::config::GridScale::Log).unwrap());
        cfg.delta_grid = Some(GridSpec::new(1e-3, 0.3, 2, crate::config::GridScale::Log).unwrap());
        out_in(&tmp, &mut cfg);
        let dir = execute(&cfg).unwrap();
        let cells = io::read_compare_pt_csv(
            &std::fs::read_to_string(dir.join("compare_pt.csv")).unwrap(),
        )
        .unwrap();
        assert_eq!(cells.len(), 4);
        for c in &cells {
            assert!((0.0..=1.0 + 1e-12).contains(&c.overlap_localized.mean));
        }
    }

    #[test]
    fn run_directories_never_collide() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::new(Command::GroundState);
        cfg.l = 3;
        cfg.n = 2;
        cfg.tau = Some(0.1);
        cfg.delta = Some(0.0);
        out_in(&tmp, &mut cfg);
        let a = execute(&cfg).unwrap();
        let b = execute(&cfg).unwrap();
        assert_ne!(a, b);
    }
}
