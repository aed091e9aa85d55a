//! Observables on many-body state vectors.
//!
//! Localization is diagnosed by the inverse participation ratio
//!
//! ```text
//! P = [ N^2 / sum_m <n_m>^2  -  1 ] / (L - 1)
//! ```
//!
//! evaluated over spatial site occupations (`P_s`) or reciprocal mode
//! occupations (`P_r`): 0 for a single-site (single-mode) condensate, 1 for
//! uniform occupations. Reciprocal occupations come cheaply from the one-body
//! density matrix `rho(l, l') = <a†_l a_l'>` conjugated by the mode matrix;
//! the full reciprocal-Fock expansion is also available and is kept as an
//! independent route for cross-checks.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fock::{apply_hop, FockState, SectorBasis};
use crate::hamil::Boundary;
use crate::pert::{reciprocal_modes, ModeMatrix, Phase};

/// Dimension cap for dense reciprocal-Fock expansions.
pub const EXPANSION_DIMENSION_CAP: usize = 5000;

/// The per-state observable bundle of a phase-diagram cell.
#[derive(Debug, Clone)]
pub struct ObservableSet {
    /// Ground energy in units of `U N (N-1)`.
    pub energy_scaled: f64,
    /// Spatial inverse participation ratio.
    pub ipr_s: f64,
    /// Reciprocal inverse participation ratio.
    pub ipr_r: f64,
    /// `<n_l>` per site.
    pub occupations_s: Vec<f64>,
    /// `<eta_k>` per reciprocal mode.
    pub occupations_r: Vec<f64>,
    /// Squared overlaps with analytic states, when computed.
    pub fidelities: Option<BTreeMap<Phase, f64>>,
}

impl ObservableSet {
    /// Compute the bundle for a unit-norm state; fidelities start empty.
    pub fn compute(
        psi: &[f64],
        basis: &SectorBasis,
        boundary: Boundary,
        energy_scaled: f64,
    ) -> Result<ObservableSet> {
        let rho = one_body_density(psi, basis)?;
        let l = basis.sites();
        let occupations_s: Vec<f64> = (0..l).map(|s| rho[s * l + s]).collect();
        let modes = reciprocal_modes(l, boundary);
        let occupations_r = mode_occupations(&rho, &modes);
        let n = basis.bosons() as f64;
        Ok(ObservableSet {
            energy_scaled,
            ipr_s: ipr_from_occupations(&occupations_s, n)?,
            ipr_r: ipr_from_occupations(&occupations_r, n)?,
            occupations_s,
            occupations_r,
            fidelities: None,
        })
    }
}

fn check_unit_norm(psi: &[f64]) -> Result<()> {
    let norm2: f64 = psi.iter().map(|x| x * x).sum();
    if (norm2 - 1.0).abs() > 1e-8 {
        return Err(Error::domain(format!(
            "state is not unit-norm (|psi|^2 = {norm2})"
        )));
    }
    Ok(())
}

/// One-body density matrix `<a†_l a_l'>`, row-major `L x L`.
///
/// Symmetric for real states, trace `N`, positive semidefinite.
pub fn one_body_density(psi: &[f64], basis: &SectorBasis) -> Result<Vec<f64>> {
    if psi.len() != basis.dimension() {
        return Err(Error::domain("state length does not match basis dimension"));
    }
    check_unit_norm(psi)?;
    let l = basis.sites();
    let mut rho = vec![0.0; l * l];
    for (i, state) in basis.states().iter().enumerate() {
        let amp_i = psi[i];
        if amp_i == 0.0 {
            continue;
        }
        for site in 0..l {
            let n = state.n_at(site) as f64;
            if n == 0.0 {
                continue;
            }
            rho[site * l + site] += amp_i * amp_i * n;
            for target_site in 0..l {
                if target_site == site {
                    continue;
                }
                let (target, amp) = apply_hop(state, site, target_site)
                    .expect("occupied source site always hops");
                let j = basis.rank(&target).expect("hop stays in sector");
                rho[target_site * l + site] += psi[j] * amp * amp_i;
            }
        }
    }
    // Exact symmetrization kills summation-order noise.
    for a in 0..l {
        for b in (a + 1)..l {
            let m = 0.5 * (rho[a * l + b] + rho[b * l + a]);
            rho[a * l + b] = m;
            rho[b * l + a] = m;
        }
    }
    Ok(rho)
}

fn mode_occupations(rho: &[f64], modes: &ModeMatrix) -> Vec<f64> {
    let l = modes.sites();
    (0..l)
        .map(|k| {
            let mut acc = 0.0;
            for a in 0..l {
                let fka = modes.f(k, a);
                for b in 0..l {
                    acc += fka * rho[a * l + b] * modes.f(k, b);
                }
            }
            acc
        })
        .collect()
}

fn ipr_from_occupations(occ: &[f64], n: f64) -> Result<f64> {
    let l = occ.len();
    if l < 2 {
        return Err(Error::domain("IPR requires L >= 2"));
    }
    let sum_sq: f64 = occ.iter().map(|x| x * x).sum();
    Ok((n * n / sum_sq - 1.0) / (l as f64 - 1.0))
}

/// Which space an IPR is evaluated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IprSpace {
    Spatial,
    Reciprocal,
}

/// Inverse participation ratio of a unit-norm state.
pub fn ipr(psi: &[f64], basis: &SectorBasis, space: IprSpace, boundary: Boundary) -> Result<f64> {
    let rho = one_body_density(psi, basis)?;
    let l = basis.sites();
    let n = basis.bosons() as f64;
    let occ = match space {
        IprSpace::Spatial => (0..l).map(|s| rho[s * l + s]).collect::<Vec<_>>(),
        IprSpace::Reciprocal => mode_occupations(&rho, &reciprocal_modes(l, boundary)),
    };
    ipr_from_occupations(&occ, n)
}

/// Local occupation density `p_n = <n|rho_site|n>`, `n = 0..=N`.
pub fn occupation_density(psi: &[f64], basis: &SectorBasis, site: usize) -> Result<Vec<f64>> {
    if site >= basis.sites() {
        return Err(Error::domain(format!(
            "site {site} out of range 0..{}",
            basis.sites()
        )));
    }
    if psi.len() != basis.dimension() {
        return Err(Error::domain("state length does not match basis dimension"));
    }
    let mut p = vec![0.0; basis.bosons() as usize + 1];
    for (i, state) in basis.states().iter().enumerate() {
        p[state.n_at(site) as usize] += psi[i] * psi[i];
    }
    Ok(p)
}

/// Reciprocal-Fock machinery: mode creation operators applied to the vacuum,
/// expanded in the position basis. Level bases are built once and reused.
pub(crate) struct ReciprocalBasis {
    l: usize,
    n: u32,
    modes: ModeMatrix,
    levels: Vec<SectorBasis>,
}

impl ReciprocalBasis {
    pub(crate) fn new(l: usize, n: u32, boundary: Boundary) -> Result<Self> {
        let modes = reciprocal_modes(l, boundary);
        let levels = (0..=n)
            .map(|m| SectorBasis::new(l, m))
            .collect::<Result<Vec<_>>>()?;
        Ok(ReciprocalBasis { l, n, modes, levels })
    }

    pub(crate) fn sector(&self) -> &SectorBasis {
        &self.levels[self.n as usize]
    }

    /// `prod_k (c†_k)^{eta_k} / sqrt(eta_k!) |vac>` in the position basis.
    pub(crate) fn vector(&self, mode_occ: &[u8]) -> Result<Vec<f64>> {
        if mode_occ.len() != self.l {
            return Err(Error::domain("mode occupation length must be L"));
        }
        let total: u32 = mode_occ.iter().map(|&x| x as u32).sum();
        if total != self.n {
            return Err(Error::domain(format!(
                "mode occupations sum to {total}, sector holds {}",
                self.n
            )));
        }
        let mut v = vec![1.0f64];
        let mut level = 0usize;
        let mut norm_fact = 1.0f64;
        for (k, &eta) in mode_occ.iter().enumerate() {
            for rep in 0..eta {
                v = self.apply_mode_creation(&v, level, k);
                level += 1;
                norm_fact *= (rep as f64) + 1.0;
            }
        }
        let scale = 1.0 / norm_fact.sqrt();
        v.iter_mut().for_each(|x| *x *= scale);
        Ok(v)
    }

    /// `c†_k = sum_l f(k, l) a†_l` acting on a level-`m` vector.
    fn apply_mode_creation(&self, v: &[f64], level: usize, k: usize) -> Vec<f64> {
        let src = &self.levels[level];
        let dst = &self.levels[level + 1];
        let mut out = vec![0.0; dst.dimension()];
        for (i, state) in src.states().iter().enumerate() {
            let amp = v[i];
            if amp == 0.0 {
                continue;
            }
            for site in 0..self.l {
                let f = self.modes.f(k, site);
                if f == 0.0 {
                    continue;
                }
                let n_site = state.n_at(site);
                let mut occ = state.occupations().to_vec();
                occ[site] = (n_site + 1) as u8;
                let target = FockState::new(occ);
                let j = dst.rank(&target).expect("raised state stays in sector");
                out[j] += amp * f * ((n_site as f64) + 1.0).sqrt();
            }
        }
        out
    }

    /// Coefficients of `psi` over all reciprocal Fock states, ordered like
    /// the occupation-basis enumeration.
    pub(crate) fn expand(&self, psi: &[f64]) -> Result<Vec<f64>> {
        let sector = self.sector();
        if sector.dimension() > EXPANSION_DIMENSION_CAP {
            return Err(Error::capacity(format!(
                "reciprocal expansion capped at dimension {EXPANSION_DIMENSION_CAP}"
            )));
        }
        if psi.len() != sector.dimension() {
            return Err(Error::domain("state length does not match basis dimension"));
        }
        sector
            .states()
            .iter()
            .map(|eta| {
                let v = self.vector(eta.occupations())?;
                Ok(v.iter().zip(psi).map(|(&a, &b)| a * b).sum())
            })
            .collect()
    }
}

/// The normalized reciprocal Fock state `|eta_1, ..., eta_L>` expressed in
/// the position occupation basis.
pub fn reciprocal_fock_vector(
    basis: &SectorBasis,
    mode_occupations: &[u8],
    boundary: Boundary,
) -> Result<Vec<f64>> {
    let rb = ReciprocalBasis::new(basis.sites(), basis.bosons(), boundary)?;
    rb.vector(mode_occupations)
}

/// Occupation density of a reciprocal mode, via the full reciprocal-Fock
/// expansion. Capped at dimension [`EXPANSION_DIMENSION_CAP`].
pub fn occupation_density_reciprocal(
    psi: &[f64],
    basis: &SectorBasis,
    mode: usize,
    boundary: Boundary,
) -> Result<Vec<f64>> {
    if mode >= basis.sites() {
        return Err(Error::domain(format!(
            "mode {mode} out of range 0..{}",
            basis.sites()
        )));
    }
    let rb = ReciprocalBasis::new(basis.sites(), basis.bosons(), boundary)?;
    let coeffs = rb.expand(psi)?;
    let mut p = vec![0.0; basis.bosons() as usize + 1];
    for (eta, c) in rb.sector().states().iter().zip(&coeffs) {
        p[eta.n_at(mode) as usize] += c * c;
    }
    Ok(p)
}

/// Mode occupations `<eta_k>` via the full expansion; the independent route
/// cross-checking the one-body shortcut.
pub fn occupations_reciprocal_via_expansion(
    psi: &[f64],
    basis: &SectorBasis,
    boundary: Boundary,
) -> Result<Vec<f64>> {
    let rb = ReciprocalBasis::new(basis.sites(), basis.bosons(), boundary)?;
    let coeffs = rb.expand(psi)?;
    let mut occ = vec![0.0; basis.sites()];
    for (eta, c) in rb.sector().states().iter().zip(&coeffs) {
        for (k, o) in occ.iter_mut().enumerate() {
            *o += (eta.n_at(k) as f64) * c * c;
        }
    }
    Ok(occ)
}

/// Squared overlap `|<psi|phi>|^2` of two unit-norm states.
pub fn overlap(psi: &[f64], phi: &[f64]) -> Result<f64> {
    if psi.len() != phi.len() {
        return Err(Error::domain("overlap requires matching bases"));
    }
    check_unit_norm(psi)?;
    check_unit_norm(phi)?;
    let ov: f64 = psi.iter().zip(phi).map(|(&a, &b)| a * b).sum();
    Ok(ov * ov)
}

/// Critical hopping: the grid point of steepest `|dP/dtau|`.
///
/// Central three-point differences on a possibly non-uniform ascending grid;
/// one-sided slopes at the ends. Ties break toward smaller `tau`.
pub fn critical_tau(tau_grid: &[f64], p_values: &[f64]) -> Result<f64> {
    let m = tau_grid.len();
    if m < 5 {
        return Err(Error::domain("critical_tau needs at least 5 grid points"));
    }
    if p_values.len() != m {
        return Err(Error::domain("grid and values must have equal length"));
    }
    if tau_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("tau grid must be strictly ascending"));
    }
    let slope = |i: usize| -> f64 {
        if i == 0 {
            (p_values[1] - p_values[0]) / (tau_grid[1] - tau_grid[0])
        } else if i == m - 1 {
            (p_values[m - 1] - p_values[m - 2]) / (tau_grid[m - 1] - tau_grid[m - 2])
        } else {
            let h0 = tau_grid[i] - tau_grid[i - 1];
            let h1 = tau_grid[i + 1] - tau_grid[i];
            p_values[i + 1] * h0 / (h1 * (h0 + h1)) - p_values[i - 1] * h1 / (h0 * (h0 + h1))
                + p_values[i] * (h1 - h0) / (h0 * h1)
        }
    };
    let mut best_i = 0;
    let mut best = slope(0).abs();
    for i in 1..m {
        let s = slope(i).abs();
        if s > best {
            best = s;
            best_i = i;
        }
    }
    Ok(tau_grid[best_i])
}
