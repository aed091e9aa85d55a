//! Disorder-ensemble orchestration: seeded sampling, parallel ground-state
//! solves, averaging with standard errors, and (tau, delta) phase-diagram
//! scans.
//!
//! Scans fix `U = 1` and derive `J = tau (N-1)`, `D = delta (N-1)`, matching
//! the scaled axes. Every disorder draw is keyed by
//! `(master_seed, cell_index, realization)` through [`crate::seeds`], so a
//! grid is bit-reproducible regardless of thread count or scheduling;
//! reduction happens in realization order.

use std::collections::HashMap;
use std::io::Write as _;
use std::path::Path;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::analysis::{overlap, ObservableSet};
use crate::eigen::{ground_state, DEFAULT_MAX_RESTARTS, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::fock::SectorBasis;
use crate::hamil::{build_hamiltonian, sample_disorder, Boundary, ModelParams};
use crate::pert::{
    disorder_minimum, localized_energy_realization, localized_state, sf_energy_avg, sf_state,
    w_energy, w_state,
};
use crate::seeds::derive_seed;

/// Which observables a scan records.
#[derive(Debug, Clone, Copy)]
pub struct ObservableFlags {
    pub ipr_s: bool,
    pub ipr_r: bool,
    pub energy: bool,
    pub fidelities: bool,
    pub tau_c: bool,
}

impl Default for ObservableFlags {
    fn default() -> Self {
        ObservableFlags {
            ipr_s: true,
            ipr_r: true,
            energy: true,
            fidelities: false,
            tau_c: false,
        }
    }
}

/// Full description of a disorder-ensemble scan.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub l: usize,
    pub n: u32,
    pub boundary: Boundary,
    pub tau_grid: Vec<f64>,
    pub delta_grid: Vec<f64>,
    pub realizations: u32,
    pub master_seed: u64,
    pub observables: ObservableFlags,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::domain("ensemble scans require N >= 2"));
        }
        if self.realizations < 1 {
            return Err(Error::domain("realizations must be >= 1"));
        }
        if self.tau_grid.is_empty() || self.delta_grid.is_empty() {
            return Err(Error::domain("grids must be non-empty"));
        }
        for grid in [&self.tau_grid, &self.delta_grid] {
            if grid.iter().any(|&x| x < 0.0 || !x.is_finite()) {
                return Err(Error::domain("grid values must be finite and >= 0"));
            }
            if grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::domain("grids must be strictly ascending"));
            }
        }
        Ok(())
    }

    /// Stable FNV-1a hash of the canonical spec encoding; keys checkpoint
    /// records.
    pub fn spec_hash(&self) -> u64 {
        let mut text = format!(
            "l={};n={};b={};r={};s={};obs={}{}{}{}{};tau=",
            self.l,
            self.n,
            self.boundary,
            self.realizations,
            self.master_seed,
            self.observables.ipr_s as u8,
            self.observables.ipr_r as u8,
            self.observables.energy as u8,
            self.observables.fidelities as u8,
            self.observables.tau_c as u8,
        );
        for t in &self.tau_grid {
            text.push_str(&format!("{t:.16e},"));
        }
        text.push_str(";delta=");
        for d in &self.delta_grid {
            text.push_str(&format!("{d:.16e},"));
        }
        crate::seeds::fnv1a(text.as_bytes())
    }
}

/// A disorder-averaged scalar with the standard error of its mean; the error
/// is unavailable for a single realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub se: Option<f64>,
}

fn reduce(values: &[f64]) -> MeanSe {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let se = if values.len() >= 2 {
        let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        Some((var / n).sqrt())
    } else {
        None
    };
    MeanSe { mean, se }
}

/// Disorder-averaged observables of one `(tau, delta)` cell.
#[derive(Debug, Clone)]
pub struct CellStats {
    pub tau: f64,
    pub delta: f64,
    pub ps: MeanSe,
    pub pr: MeanSe,
    pub eps: MeanSe,
    /// Mean squared overlaps with the three analytic states, when requested.
    pub fid_localized: Option<MeanSe>,
    pub fid_w: Option<MeanSe>,
    pub fid_superfluid: Option<MeanSe>,
    /// Realizations dropped due to resonant-disorder singularities.
    pub skipped: u32,
    /// Realizations that entered the averages.
    pub realizations: u32,
}

/// The assembled `(tau, delta)` grid with run metadata.
#[derive(Debug, Clone)]
pub struct PhaseGrid {
    pub spec: EnsembleSpec,
    /// Row-major cells: `cells[i_delta * tau_grid.len() + i_tau]`.
    pub cells: Vec<CellStats>,
    pub code_version: String,
    pub wall_time_s: f64,
}

impl PhaseGrid {
    pub fn cell(&self, i_delta: usize, i_tau: usize) -> &CellStats {
        &self.cells[i_delta * self.spec.tau_grid.len() + i_tau]
    }
}

struct RealizationOutcome {
    obs: ObservableSet,
    fidelities: Option<[f64; 3]>,
}

/// One disorder realization: sample, solve, measure. `Ok(None)` marks a
/// skipped (resonant) realization.
fn run_realization(
    spec: &EnsembleSpec,
    basis: &SectorBasis,
    tau: f64,
    delta: f64,
    cell_index: u64,
    r: u32,
) -> Result<Option<RealizationOutcome>> {
    let nm1 = (spec.n - 1) as f64;
    let disorder_seed = derive_seed(spec.master_seed, &[cell_index, r as u64, 0]);
    // The solver start vector is seeded per cell, not per realization, so a
    // zero-disorder cell yields bitwise identical realizations.
    let solver_seed = derive_seed(spec.master_seed, &[cell_index, 0, 1]);
    let omega = sample_disorder(spec.l, delta * nm1, disorder_seed);
    let params = ModelParams::new(spec.l, spec.n, 1.0, tau * nm1, spec.boundary, omega)?;
    let h = build_hamiltonian(&params, basis)?;
    let gs = ground_state(&h, DEFAULT_TOL, DEFAULT_MAX_RESTARTS, solver_seed)?;
    let unit = (spec.n * (spec.n - 1)) as f64;
    let obs = ObservableSet::compute(&gs.vector, basis, spec.boundary, gs.energy / unit)?;

    let fidelities = if spec.observables.fidelities {
        let ell0 = disorder_minimum(&params.omega);
        let loc = match localized_state(&params, basis, ell0) {
            Ok(v) => v,
            Err(Error::Singularity { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let w = w_state(&params, basis)?;
        let sf = sf_state(&params, basis)?;
        Some([
            overlap(&gs.vector, &loc)?,
            overlap(&gs.vector, &w.vector)?,
            overlap(&gs.vector, &sf)?,
        ])
    } else {
        None
    };
    Ok(Some(RealizationOutcome { obs, fidelities }))
}

fn run_cell_with_basis(
    spec: &EnsembleSpec,
    basis: &SectorBasis,
    tau: f64,
    delta: f64,
    cell_index: u64,
) -> Result<CellStats> {
    let outcomes: Vec<Option<RealizationOutcome>> = (0..spec.realizations)
        .into_par_iter()
        .map(|r| run_realization(spec, basis, tau, delta, cell_index, r))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Cell {
            tau,
            delta,
            source: Box::new(e),
        })?;

    let kept: Vec<&RealizationOutcome> = outcomes.iter().flatten().collect();
    let skipped = (outcomes.len() - kept.len()) as u32;
    if kept.is_empty() {
        return Err(Error::Cell {
            tau,
            delta,
            source: Box::new(Error::domain("every realization was skipped")),
        });
    }
    let collect =
        |f: &dyn Fn(&RealizationOutcome) -> f64| -> Vec<f64> { kept.iter().map(|o| f(o)).collect() };
    let fid = |idx: usize| -> Option<MeanSe> {
        spec.observables
            .fidelities
            .then(|| reduce(&collect(&|o| o.fidelities.expect("fidelities requested")[idx])))
    };
    Ok(CellStats {
        tau,
        delta,
        ps: reduce(&collect(&|o| o.obs.ipr_s)),
        pr: reduce(&collect(&|o| o.obs.ipr_r)),
        eps: reduce(&collect(&|o| o.obs.energy_scaled)),
        fid_localized: fid(0),
        fid_w: fid(1),
        fid_superfluid: fid(2),
        skipped,
        realizations: kept.len() as u32,
    })
}

/// Disorder-average one `(tau, delta)` cell. `cell_index` keys the seeds and
/// is ordinarily the row-major grid index.
pub fn run_cell(spec: &EnsembleSpec, tau: f64, delta: f64, cell_index: u64) -> Result<CellStats> {
    spec.validate()?;
    let basis = SectorBasis::new(spec.l, spec.n)?;
    run_cell_with_basis(spec, &basis, tau, delta, cell_index)
}

/// Compute the full phase grid.
pub fn phase_diagram(spec: &EnsembleSpec) -> Result<PhaseGrid> {
    phase_diagram_with_checkpoint(spec, None)
}

/// Compute the phase grid, appending every finished cell to a write-ahead
/// checkpoint file and skipping cells already recorded there for this exact
/// spec (matched by spec hash).
pub fn phase_diagram_with_checkpoint(
    spec: &EnsembleSpec,
    checkpoint: Option<&Path>,
) -> Result<PhaseGrid> {
    spec.validate()?;
    let started = std::time::Instant::now();
    let basis = SectorBasis::new(spec.l, spec.n)?;
    let spec_hash = spec.spec_hash();

    let mut done: HashMap<u64, CellStats> = HashMap::new();
    if let Some(path) = checkpoint {
        if path.exists() {
            for rec in crate::io::read_checkpoint(&std::fs::read_to_string(path)?)? {
                if rec.spec_hash == spec_hash {
                    done.insert(rec.cell_index, rec.stats);
                }
            }
        }
    }
    let appender: Option<Mutex<std::fs::File>> = match checkpoint {
        Some(path) => Some(Mutex::new(
            std::fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)?,
        )),
        None => None,
    };

    let nt = spec.tau_grid.len();
    let indices: Vec<(usize, usize)> = (0..spec.delta_grid.len())
        .flat_map(|i_delta| (0..nt).map(move |i_tau| (i_delta, i_tau)))
        .collect();

    let mut cells: Vec<Option<CellStats>> = vec![None; indices.len()];
    let pending: Vec<usize> = (0..indices.len())
        .filter(|flat| !done.contains_key(&(*flat as u64)))
        .collect();

    let computed: Vec<(usize, CellStats)> = pending
        .par_iter()
        .map(|&flat| {
            let (i_delta, i_tau) = indices[flat];
            let stats = run_cell_with_basis(
                spec,
                &basis,
                spec.tau_grid[i_tau],
                spec.delta_grid[i_delta],
                flat as u64,
            )?;
            if let Some(file) = &appender {
                let mut line = String::new();
                crate::io::write_checkpoint_record(&mut line, spec_hash, flat as u64, &stats);
                let mut guard = file.lock().expect("checkpoint appender poisoned");
                guard.write_all(line.as_bytes())?;
                guard.flush()?;
            }
            Ok((flat, stats))
        })
        .collect::<Result<Vec<_>>>()?;

    for (flat, stats) in computed {
        cells[flat] = Some(stats);
    }
    for (flat, stats) in done {
        cells[flat as usize] = Some(stats);
    }
    let cells: Vec<CellStats> = cells
        .into_iter()
        .map(|c| c.expect("every cell computed or restored"))
        .collect();

    Ok(PhaseGrid {
        spec: spec.clone(),
        cells,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// One row of a critical-hopping sweep.
#[derive(Debug, Clone, Copy)]
pub struct CriticalTauRow {
    pub n: u32,
    pub delta: f64,
    pub tau_c_s: f64,
    pub tau_c_r: f64,
}

/// For each boson number and disorder strength, average the IPR curves over
/// the tau grid and locate the steepest slopes.
pub fn critical_tau_sweep(base: &EnsembleSpec, n_values: &[u32]) -> Result<Vec<CriticalTauRow>> {
    base.validate()?;
    if base.tau_grid.len() < 5 {
        return Err(Error::domain("critical-tau sweeps need >= 5 tau points"));
    }
    if n_values.is_empty() {
        return Err(Error::domain("critical-tau sweeps need a boson-number list"));
    }
    let nt = base.tau_grid.len() as u64;
    let nd = base.delta_grid.len() as u64;
    let mut rows = Vec::new();
    for (ni, &n) in n_values.iter().enumerate() {
        let spec = EnsembleSpec { n, ..base.clone() };
        spec.validate()?;
        let basis = SectorBasis::new(spec.l, spec.n)?;
        for (i_delta, &delta) in spec.delta_grid.iter().enumerate() {
            let cells: Vec<CellStats> = spec
                .tau_grid
                .par_iter()
                .enumerate()
                .map(|(i_tau, &tau)| {
                    let cell_index = (ni as u64 * nd + i_delta as u64) * nt + i_tau as u64;
                    run_cell_with_basis(&spec, &basis, tau, delta, cell_index)
                })
                .collect::<Result<Vec<_>>>()?;
            let ps: Vec<f64> = cells.iter().map(|c| c.ps.mean).collect();
            let pr: Vec<f64> = cells.iter().map(|c| c.pr.mean).collect();
            rows.push(CriticalTauRow {
                n,
                delta,
                tau_c_s: crate::analysis::critical_tau(&spec.tau_grid, &ps)?,
                tau_c_r: crate::analysis::critical_tau(&spec.tau_grid, &pr)?,
            });
        }
    }
    Ok(rows)
}

/// Per-cell perturbation-theory comparison: mean squared overlaps with the
/// three analytic states and mean `|eps_exact - eps_analytic|` per analytic
/// energy.
#[derive(Debug, Clone)]
pub struct ComparePtCell {
    pub tau: f64,
    pub delta: f64,
    pub overlap_localized: MeanSe,
    pub overlap_w: MeanSe,
    pub overlap_superfluid: MeanSe,
    pub de_localized: MeanSe,
    pub de_w: MeanSe,
    pub de_superfluid: MeanSe,
    pub skipped: u32,
}

/// Disorder-averaged comparison of the exact ground state against all three
/// analytic constructions on one cell. The localized reference energy is the
/// per-realization second-order expression; the W and superfluid references
/// are the closed disorder-averaged forms.
pub fn compare_pt_cell(
    spec: &EnsembleSpec,
    tau: f64,
    delta: f64,
    cell_index: u64,
) -> Result<ComparePtCell> {
    spec.validate()?;
    let basis = SectorBasis::new(spec.l, spec.n)?;
    let nm1 = (spec.n - 1) as f64;
    let unit = (spec.n * (spec.n - 1)) as f64;
    let eps_w = w_energy(tau).epsilon;
    let eps_sf = sf_energy_avg(tau, delta, spec.l, spec.n, spec.boundary)?
        .energy
        .epsilon;

    type Sample = ([f64; 3], [f64; 3]);
    let per: Vec<Option<Sample>> = (0..spec.realizations)
        .into_par_iter()
        .map(|r| -> Result<Option<Sample>> {
            let disorder_seed = derive_seed(spec.master_seed, &[cell_index, r as u64, 0]);
            let solver_seed = derive_seed(spec.master_seed, &[cell_index, 0, 1]);
            let omega = sample_disorder(spec.l, delta * nm1, disorder_seed);
            let params = ModelParams::new(spec.l, spec.n, 1.0, tau * nm1, spec.boundary, omega)?;
            let h = build_hamiltonian(&params, &basis)?;
            let gs = ground_state(&h, DEFAULT_TOL, DEFAULT_MAX_RESTARTS, solver_seed)?;
            let eps_exact = gs.energy / unit;
            let ell0 = disorder_minimum(&params.omega);
            let (loc, eps_loc) = match (
                localized_state(&params, &basis, ell0),
                localized_energy_realization(&params, ell0),
            ) {
                (Ok(v), Ok(e)) => (v, e),
                (Err(Error::Singularity { .. }), _) | (_, Err(Error::Singularity { .. })) => {
                    return Ok(None)
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            };
            let w = w_state(&params, &basis)?;
            let sf = sf_state(&params, &basis)?;
            Ok(Some((
                [
                    overlap(&gs.vector, &loc)?,
                    overlap(&gs.vector, &w.vector)?,
                    overlap(&gs.vector, &sf)?,
                ],
                [
                    (eps_exact - eps_loc).abs(),
                    (eps_exact - eps_w).abs(),
                    (eps_exact - eps_sf).abs(),
                ],
            )))
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Cell {
            tau,
            delta,
            source: Box::new(e),
        })?;

    let kept: Vec<&Sample> = per.iter().flatten().collect();
    let skipped = (per.len() - kept.len()) as u32;
    if kept.is_empty() {
        return Err(Error::Cell {
            tau,
            delta,
            source: Box::new(Error::domain("every realization was skipped")),
        });
    }
    let col = |sel: &dyn Fn(&Sample) -> f64| -> MeanSe {
        reduce(&kept.iter().map(|o| sel(o)).collect::<Vec<_>>())
    };
    Ok(ComparePtCell {
        tau,
        delta,
        overlap_localized: col(&|o| o.0[0]),
        overlap_w: col(&|o| o.0[1]),
        overlap_superfluid: col(&|o| o.0[2]),
        de_localized: col(&|o| o.1[0]),
        de_w: col(&|o| o.1[1]),
        de_superfluid: col(&|o| o.1[2]),
        skipped,
    })
}
