//! Perturbative states and disorder-averaged energies for the three ground
//! state regimes of the attractive chain: localized, W, and superfluid.
//!
//! Everything is emitted as a state vector in the [`SectorBasis`], so each
//! analytic construction can be compared overlap-for-overlap against the
//! exact ground state. Energies are returned in scaled units
//! `eps = E / U N (N-1)`.
//!
//! The W-state case analysis follows the degenerate-perturbation-theory
//! structure of the problem: boundary sites drop out of the degenerate
//! manifold in pairs (`ell_s = ceil(N/2) - 1` per end), and the shape of the
//! superposition over the remaining `L_d` sites is fixed only at order `N`,
//! where an effective tridiagonal coupling of strength `|b| = U N (N-1)
//! [alpha(N) tau]^N` appears. For even `N > 2` the corner correction `c`
//! makes the exact profile a shifted sine, solved here through its secular
//! angle `theta`; `c/|b| = (N-1)!/(N-1)^(N-1)` is already 2/9 at `N = 4`,
//! so the plain sine (`c = 0`) profile is also provided.

use crate::analysis::ReciprocalBasis;
use crate::error::{Error, Result};
use crate::fock::{FockState, SectorBasis};
use crate::hamil::{scale, Boundary, ModelParams};

/// Which analytic regime a state or energy belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    Localized,
    W,
    Superfluid,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Phase::Localized => write!(f, "localized"),
            Phase::W => write!(f, "w"),
            Phase::Superfluid => write!(f, "superfluid"),
        }
    }
}

/// A scaled analytic energy with its perturbation order.
#[derive(Debug, Clone, Copy)]
pub struct PhaseEnergy {
    /// `E / U N (N-1)`.
    pub epsilon: f64,
    /// Highest perturbation order included.
    pub order: u8,
    pub phase: Phase,
}

/// `alpha(N) = [(N-1)^(N-1) / (N-1)!]^(1/N)`, the N-boson hop coefficient.
///
/// Monotone increasing, approaching Euler's number for large `N`.
pub fn alpha(n: u32) -> Result<f64> {
    let ratio = alpha_ratio(n)?;
    Ok(ratio.powf(1.0 / n as f64))
}

/// `(N-1)^(N-1) / (N-1)! = alpha(N)^N`, as a stable product.
fn alpha_ratio(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain("alpha requires N >= 2"));
    }
    let m = (n - 1) as f64;
    let mut ratio = 1.0f64;
    for k in 1..n {
        ratio *= m / k as f64;
    }
    Ok(ratio)
}

/// Neighbor site instances of `site`; a periodic two-site ring legitimately
/// lists its single neighbor twice (both bonds land on it).
fn neighbor_instances(l: usize, boundary: Boundary, site: usize) -> Vec<usize> {
    let mut nb = Vec::with_capacity(2);
    match boundary {
        Boundary::Open => {
            if site > 0 {
                nb.push(site - 1);
            }
            if site + 1 < l {
                nb.push(site + 1);
            }
        }
        Boundary::Periodic => {
            nb.push((site + l - 1) % l);
            nb.push((site + 1) % l);
        }
    }
    nb
}

fn condensate_occ(l: usize, site: usize, n: u32) -> Vec<u8> {
    let mut occ = vec![0u8; l];
    occ[site] = n as u8;
    occ
}

fn normalize(v: &mut [f64]) {
    let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(n > 0.0, "cannot normalize the zero vector");
    v.iter_mut().for_each(|x| *x /= n);
}

/// First-order localized state pinned to `ell0`: `|n_ell0 = N>` plus the
/// single-boson spill `tau sqrt(N) / [(sigma_ell0 - sigma_nb) - 1]` onto each
/// neighbor, normalized.
///
/// Fails with [`Error::Singularity`] when a denominator vanishes (resonant
/// disorder); impossible when `ell0` is the disorder minimum, but the site is
/// a free argument here.
pub fn localized_state(
    params: &ModelParams,
    basis: &SectorBasis,
    ell0: usize,
) -> Result<Vec<f64>> {
    if params.n < 2 {
        return Err(Error::domain("localized_state requires N >= 2"));
    }
    if ell0 >= params.l {
        return Err(Error::domain(format!(
            "site {ell0} out of range 0..{}",
            params.l
        )));
    }
    if basis.sites() != params.l || basis.bosons() != params.n {
        return Err(Error::domain("basis does not match params"));
    }
    let sc = scale(params, 0.0)?;
    let mut psi = vec![0.0; basis.dimension()];
    let centre = basis.rank(&FockState::new(condensate_occ(params.l, ell0, params.n)))?;
    psi[centre] = 1.0;
    let root_n = (params.n as f64).sqrt();
    for nb in neighbor_instances(params.l, params.boundary, ell0) {
        let den = (sc.sigma[ell0] - sc.sigma[nb]) - 1.0;
        if den.abs() < 1e-12 {
            return Err(Error::Singularity {
                site: ell0,
                neighbor: nb,
            });
        }
        let mut occ = condensate_occ(params.l, ell0, params.n - 1);
        occ[nb] += 1;
        let idx = basis.rank(&FockState::new(occ))?;
        psi[idx] += sc.tau * root_n / den;
    }
    normalize(&mut psi);
    Ok(psi)
}

/// Per-realization second-order localized energy
/// `eps = -1/2 + sigma_ell0 + tau^2 sum_nb 1 / [(sigma_ell0 - sigma_nb) - 1]`
/// in scaled units, for the state pinned to `ell0`.
pub fn localized_energy_realization(params: &ModelParams, ell0: usize) -> Result<f64> {
    if ell0 >= params.l {
        return Err(Error::domain("site out of range"));
    }
    let sc = scale(params, 0.0)?;
    let mut eps = -0.5 + sc.sigma[ell0];
    // Group neighbor instances: a doubled bond doubles the matrix element,
    // hence a multiplicity-squared second-order weight.
    let instances = neighbor_instances(params.l, params.boundary, ell0);
    let mut seen: Vec<(usize, usize)> = Vec::new();
    for nb in instances {
        match seen.iter_mut().find(|(s, _)| *s == nb) {
            Some((_, m)) => *m += 1,
            None => seen.push((nb, 1)),
        }
    }
    for (nb, mult) in seen {
        let den = (sc.sigma[ell0] - sc.sigma[nb]) - 1.0;
        if den.abs() < 1e-12 {
            return Err(Error::Singularity {
                site: ell0,
                neighbor: nb,
            });
        }
        eps += (mult * mult) as f64 * sc.tau * sc.tau / den;
    }
    Ok(eps)
}

/// Site of the lowest on-site energy.
pub fn disorder_minimum(omega: &[f64]) -> usize {
    omega
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("nonempty omega")
}

/// Disorder-averaged second-order localized energy, as the expansion
///
/// `eps = -1/2 - delta (L-1)/(L+1)
///        - 2 tau^2 (L-1)/L * sum_{n=0}^{n_terms} (-1)^n L / [(n+1)(n+L)] (2 delta)^n`.
///
/// `n_terms = 1` reproduces the quoted second-order expression exactly. For
/// `2 delta >= 1` the series no longer converges; the truncated partial sum
/// is still returned and it is the caller's business to mind the regime.
pub fn localized_energy_avg(tau: f64, delta: f64, l: usize, n_terms: u32) -> Result<PhaseEnergy> {
    if delta < 0.0 {
        return Err(Error::domain("delta must be >= 0"));
    }
    if n_terms < 1 {
        return Err(Error::domain("n_terms must be >= 1"));
    }
    if l < 1 {
        return Err(Error::domain("L must be >= 1"));
    }
    let lf = l as f64;
    let mut series = 0.0;
    for n in 0..=n_terms {
        let nf = n as f64;
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        series += sign * lf / ((nf + 1.0) * (nf + lf)) * (2.0 * delta).powi(n as i32);
    }
    let epsilon =
        -0.5 - delta * (lf - 1.0) / (lf + 1.0) - 2.0 * tau * tau * (lf - 1.0) / lf * series;
    Ok(PhaseEnergy {
        epsilon,
        order: 2,
        phase: Phase::Localized,
    })
}

/// Mean second-order W-phase energy `eps = -1/2 - 2 tau^2`; the disorder
/// contribution averages away.
pub fn w_energy(tau: f64) -> PhaseEnergy {
    PhaseEnergy {
        epsilon: -0.5 - 2.0 * tau * tau,
        order: 2,
        phase: Phase::W,
    }
}

/// The `N`-th order effective coupling `(b, c)` of the open-chain degenerate
/// manifold: `b` couples neighbors, `c` corrects the two corner diagonals.
///
/// `b = -U N (N-1) (N-1)^(N-1)/(N-1)! tau^N`, `c = U N (N-1) tau^N`, so
/// `|b| = U N (N-1) [alpha(N) tau]^N` and `c/|b|` shrinks factorially
/// (1 at `N = 2`, 2/9 at `N = 4`). On a periodic chain the sign of `b`
/// flips to `(-1)^(N-1)`; the case analysis in [`w_state`] accounts for it.
pub fn kn_coefficients(n: u32, tau: f64, u: f64) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::domain("kn_coefficients requires N >= 2"));
    }
    if !(tau > 0.0) {
        return Err(Error::domain("kn_coefficients requires tau > 0"));
    }
    let scale = u * (n as f64) * (n as f64 - 1.0) * tau.powi(n as i32);
    let b = -scale * alpha_ratio(n)?;
    let c = scale;
    Ok((b, c))
}

/// Which branch of the W-state case analysis produced a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WCase {
    /// Dense chain, odd `L`: the single middlemost condensate.
    SingleSite,
    /// Dense chain, even `L`: the two middlemost condensates, sign `(-1)^N`.
    TwoSite,
    /// Odd `N`: alternating sine profile.
    OddSine,
    /// `N = 2` (`c = |b|`): half-shifted sine profile.
    HalfShiftedSine,
    /// Even `N > 2`, exact corner correction; `theta` is the secular root.
    EvenExact { theta: f64 },
    /// Even `N > 2` with the corner correction dropped.
    EvenCZero,
    /// Periodic, even `N`: uniform superposition.
    PeriodicUniform,
    /// Periodic, odd `N`, even `L`: alternating uniform superposition.
    PeriodicAlternating,
    /// Periodic, odd `N`, odd `L`: one real member of the degenerate pair.
    PeriodicPair,
}

/// The in-manifold profile of a W state.
#[derive(Debug, Clone)]
pub struct WShape {
    /// Number of sites excluded at each open end (`ceil(N/2) - 1` when the
    /// window case applies).
    pub ell_s: usize,
    /// Number of condensate sites participating.
    pub l_d: usize,
    /// Unit-norm amplitudes over sites `ell_s .. ell_s + l_d` (0-based).
    pub coefficients: Vec<f64>,
}

/// A W state: the profile, the branch taken, and the assembled vector.
#[derive(Debug, Clone)]
pub struct WState {
    pub vector: Vec<f64>,
    pub shape: WShape,
    pub case: WCase,
    /// True when the returned vector is one member of a degenerate pair.
    pub degenerate_pair: bool,
}

/// The W-state superposition of first-order localized states, built for the
/// disorder-free chain (`delta = 0` is assumed; `params.omega` is ignored).
/// Even `N > 2` open chains use the exact corner-corrected profile.
pub fn w_state(params: &ModelParams, basis: &SectorBasis) -> Result<WState> {
    w_state_with_profile(params, basis, true)
}

/// Same as [`w_state`] but with the `c = 0` sine approximation for even
/// `N > 2` open chains.
pub fn w_state_c_zero(params: &ModelParams, basis: &SectorBasis) -> Result<WState> {
    w_state_with_profile(params, basis, false)
}

fn w_state_with_profile(
    params: &ModelParams,
    basis: &SectorBasis,
    exact_corner: bool,
) -> Result<WState> {
    if params.n < 2 {
        return Err(Error::domain("w_state requires N >= 2"));
    }
    if basis.sites() != params.l || basis.bosons() != params.n {
        return Err(Error::domain("basis does not match params"));
    }
    let l = params.l;
    let n = params.n;
    let (ell_s, coeffs, case, degenerate_pair) = match params.boundary {
        Boundary::Open => open_w_profile(l, n, scale(params, 0.0)?.tau, exact_corner)?,
        Boundary::Periodic => periodic_w_profile(l, n),
    };
    let mut coefficients = coeffs;
    normalize(&mut coefficients);

    // Zero-disorder first-order localized states carry the superposition.
    let zero_disorder = ModelParams {
        omega: vec![0.0; l],
        ..params.clone()
    };
    let mut vector = vec![0.0; basis.dimension()];
    for (offset, &w) in coefficients.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let phi = localized_state(&zero_disorder, basis, ell_s + offset)?;
        for (v, &p) in vector.iter_mut().zip(&phi) {
            *v += w * p;
        }
    }
    normalize(&mut vector);
    Ok(WState {
        vector,
        shape: WShape {
            ell_s,
            l_d: coefficients.len(),
            coefficients,
        },
        case,
        degenerate_pair,
    })
}

fn open_w_profile(
    l: usize,
    n: u32,
    tau: f64,
    exact_corner: bool,
) -> Result<(usize, Vec<f64>, WCase, bool)> {
    let ell_s_formal = (n as usize).div_ceil(2) - 1;
    let l_d_formal = l as i64 - 2 * ell_s_formal as i64;
    if l_d_formal >= 3 {
        let ell_s = ell_s_formal;
        let l_d = l_d_formal as usize;
        let profile: (Vec<f64>, WCase) = if !n.is_multiple_of(2) {
            let c = (1..=l_d)
                .map(|j| {
                    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
                    sign * (std::f64::consts::PI * j as f64 / (l_d as f64 + 1.0)).sin()
                })
                .collect();
            (c, WCase::OddSine)
        } else if n == 2 {
            let c = (1..=l_d)
                .map(|j| {
                    (std::f64::consts::PI * (2.0 * j as f64 - 1.0) / (2.0 * l_d as f64)).sin()
                })
                .collect();
            (c, WCase::HalfShiftedSine)
        } else if exact_corner {
            // tau only sets the overall scale of b and c; the profile depends
            // on their ratio. Guard tau = 0 with a unit stand-in.
            let t = if tau > 0.0 { tau } else { 0.1 };
            let (b, c) = kn_coefficients(n, t, 1.0)?;
            let theta = corner_theta(l_d, (c / b).abs())?;
            let cvec = (1..=l_d)
                .map(|j| c * ((j as f64 - 1.0) * theta).sin() - b * (j as f64 * theta).sin())
                .collect();
            (cvec, WCase::EvenExact { theta })
        } else {
            let c = (1..=l_d)
                .map(|j| (std::f64::consts::PI * j as f64 / (l_d as f64 + 1.0)).sin())
                .collect();
            (c, WCase::EvenCZero)
        };
        Ok((ell_s, profile.0, profile.1, false))
    } else if !l.is_multiple_of(2) {
        Ok(((l - 1) / 2, vec![1.0], WCase::SingleSite, false))
    } else {
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok((l / 2 - 1, vec![1.0, sign], WCase::TwoSite, false))
    }
}

fn periodic_w_profile(l: usize, n: u32) -> (usize, Vec<f64>, WCase, bool) {
    if n.is_multiple_of(2) {
        (0, vec![1.0; l], WCase::PeriodicUniform, false)
    } else if l.is_multiple_of(2) {
        let c = (1..=l)
            .map(|j| if j.is_multiple_of(2) { 1.0 } else { -1.0 })
            .collect();
        (0, c, WCase::PeriodicAlternating, false)
    } else {
        // Degenerate pair exp(±i pi j / L); return the real cosine member.
        let c = (1..=l)
            .map(|j| {
                let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * (std::f64::consts::PI * j as f64 / l as f64).cos()
            })
            .collect();
        (0, c, WCase::PeriodicPair, true)
    }
}

/// Smallest positive root of
/// `cos((L_d+1) theta / 2) + ratio * cos((L_d-1) theta / 2) = 0`
/// on `(0, pi / L_d)`, by bisection.
fn corner_theta(l_d: usize, ratio: f64) -> Result<f64> {
    let f = |theta: f64| {
        ((l_d as f64 + 1.0) * theta / 2.0).cos() + ratio * ((l_d as f64 - 1.0) * theta / 2.0).cos()
    };
    let mut lo = 0.0f64;
    let mut hi = std::f64::consts::PI / l_d as f64;
    if f(lo) <= 0.0 || f(hi) >= 0.0 {
        return Err(Error::RootBracket { lo, hi });
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The orthogonal single-particle mode basis diagonalizing the hopping term.
///
/// Open chains use the sine transform `f(k, l) = sqrt(2/(L+1))
/// sin(pi (l+1)(k+1) / (L+1))` (0-based `k`, `l`). Periodic chains use the
/// real cos/sin recombination of the Fourier modes: index 0 is the uniform
/// mode, index `L/2` (even `L`) the alternating mode, and the pair
/// `(k, L-k)` holds the cosine and sine partners of wavenumber `k`. With
/// hopping `+J`, the hop eigenvalue of mode `k` is `2 J cos(pi (k+1)/(L+1))`
/// open and `2 J cos(2 pi k / L)` periodic, so the lowest mode sits at
/// `k = L-1` (open) and `k = L/2` (periodic even `L`).
#[derive(Debug, Clone)]
pub struct ModeMatrix {
    l: usize,
    boundary: Boundary,
    /// Row-major `f[k * l + site]`.
    data: Vec<f64>,
}

impl ModeMatrix {
    pub fn sites(&self) -> usize {
        self.l
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// `f(k, site)`.
    pub fn f(&self, k: usize, site: usize) -> f64 {
        self.data[k * self.l + site]
    }

    /// Hopping eigenvalue of mode `k` per unit `J`.
    pub fn hop_eigenvalue(&self, k: usize) -> f64 {
        match self.boundary {
            Boundary::Open => {
                2.0 * (std::f64::consts::PI * (k as f64 + 1.0) / (self.l as f64 + 1.0)).cos()
            }
            Boundary::Periodic => {
                2.0 * (2.0 * std::f64::consts::PI * k as f64 / self.l as f64).cos()
            }
        }
    }

    /// Index of the lowest hopping mode (the condensate mode of the
    /// superfluid). Periodic chains require even `L` for uniqueness.
    pub fn ground_mode(&self) -> Result<usize> {
        match self.boundary {
            Boundary::Open => Ok(self.l - 1),
            Boundary::Periodic => {
                if !self.l.is_multiple_of(2) {
                    Err(Error::Degeneracy(
                        "periodic odd-L lowest mode is doubly degenerate".into(),
                    ))
                } else {
                    Ok(self.l / 2)
                }
            }
        }
    }
}

/// Build the `L x L` orthogonal mode matrix for the given boundary.
pub fn reciprocal_modes(l: usize, boundary: Boundary) -> ModeMatrix {
    let mut data = vec![0.0; l * l];
    let lf = l as f64;
    match boundary {
        Boundary::Open => {
            let norm = (2.0 / (lf + 1.0)).sqrt();
            for k in 0..l {
                for s in 0..l {
                    data[k * l + s] = norm
                        * (std::f64::consts::PI * (s as f64 + 1.0) * (k as f64 + 1.0) / (lf + 1.0))
                            .sin();
                }
            }
        }
        Boundary::Periodic => {
            data[..l].fill(1.0 / lf.sqrt());
            if l.is_multiple_of(2) {
                let row = &mut data[(l / 2) * l..(l / 2 + 1) * l];
                for (s, v) in row.iter_mut().enumerate() {
                    *v = if s.is_multiple_of(2) { -1.0 } else { 1.0 } / lf.sqrt();
                }
            }
            let norm = (2.0 / lf).sqrt();
            for k in 1..l.div_ceil(2) {
                for s in 0..l {
                    let arg = 2.0 * std::f64::consts::PI * (s as f64 + 1.0) * k as f64 / lf;
                    data[k * l + s] = norm * arg.cos();
                    data[(l - k) * l + s] = norm * arg.sin();
                }
            }
        }
    }
    ModeMatrix { l, boundary, data }
}

/// First-order superfluid state: the condensate `|eta_k0 = N>` in the lowest
/// hopping mode plus the disorder correction (singly excited modes) and the
/// interaction correction (pair-scattered modes), expanded into the position
/// Fock basis and normalized.
///
/// Periodic chains require even `L`; the odd-`L` condensate mode is
/// degenerate and rejected.
pub fn sf_state(params: &ModelParams, basis: &SectorBasis) -> Result<Vec<f64>> {
    if !(params.j > 0.0) {
        return Err(Error::domain("sf_state requires J > 0"));
    }
    if basis.sites() != params.l || basis.bosons() != params.n {
        return Err(Error::domain("basis does not match params"));
    }
    let l = params.l;
    let n = params.n;
    let rb = ReciprocalBasis::new(l, n, params.boundary)?;
    let k0 = reciprocal_modes(l, params.boundary).ground_mode()?;

    // Mode-occupation vectors carrying the zeroth- plus first-order state.
    let mut terms: Vec<(Vec<u8>, f64)> = Vec::new();
    let mut add = |occ: Vec<u8>, w: f64| {
        if w == 0.0 {
            return;
        }
        match terms.iter_mut().find(|(o, _)| *o == occ) {
            Some((_, acc)) => *acc += w,
            None => terms.push((occ, w)),
        }
    };
    add(condensate_occ(l, k0, n), 1.0);

    match params.boundary {
        Boundary::Open => open_sf_corrections(params, &mut add)?,
        Boundary::Periodic => periodic_sf_corrections(params, &mut add)?,
    }

    let mut psi = vec![0.0; basis.dimension()];
    for (occ, w) in terms {
        let v = rb.vector(&occ)?;
        for (p, &x) in psi.iter_mut().zip(&v) {
            *p += w * x;
        }
    }
    normalize(&mut psi);
    Ok(psi)
}

fn open_sf_corrections(
    params: &ModelParams,
    add: &mut impl FnMut(Vec<u8>, f64),
) -> Result<()> {
    let l = params.l;
    let n = params.n;
    let lf = l as f64;
    let pi = std::f64::consts::PI;
    let cos0 = (pi / (lf + 1.0)).cos();
    let sin_f = |site: usize, k: usize| (pi * (site as f64 + 1.0) * (k as f64 + 1.0) / (lf + 1.0)).sin();
    let cos_k = |k: usize| (pi * (k as f64 + 1.0) / (lf + 1.0)).cos();
    let k0 = l - 1;
    let root_n = (n as f64).sqrt();

    // Disorder-scattered single excitations.
    for k in 0..l - 1 {
        let s_k: f64 = (0..l)
            .map(|site| params.omega[site] * sin_f(site, k) * sin_f(site, k0))
            .sum();
        if s_k != 0.0 {
            let mut occ = condensate_occ(l, k0, n - 1);
            occ[k] += 1;
            let w = -root_n / (params.j * (lf + 1.0)) * s_k / (cos0 + cos_k(k));
            add(occ, w);
        }
    }

    // Interaction-scattered pairs; all carry sqrt(N (N-1)).
    if n >= 2 {
        let pref =
            params.u * ((n as f64) * (n as f64 - 1.0)).sqrt() / (8.0 * params.j * (lf + 1.0));
        for k in 0..l - 1 {
            let kron = if k == 0 { 1.0 } else { 0.0 };
            let mut occ = condensate_occ(l, k0, n - 2);
            occ[k] += 2;
            let w = pref * 2f64.sqrt() * (2.0 + kron) / (2.0 * (cos0 + cos_k(k)));
            add(occ, w);
        }
        if l >= 3 {
            let mut occ = condensate_occ(l, k0, n - 1);
            occ[l - 3] += 1;
            let w = pref * (-2.0) * ((n as f64) - 1.0).sqrt() / (cos0 + cos_k(l - 3));
            add(occ, w);
        }
        for k in 0..l.saturating_sub(3) {
            let mut occ = condensate_occ(l, k0, n - 2);
            occ[k] += 1;
            occ[k + 2] += 1;
            let w = pref * (-2.0) / (2.0 * cos0 + cos_k(k) + cos_k(k + 2));
            add(occ, w);
        }
    }
    Ok(())
}

fn periodic_sf_corrections(
    params: &ModelParams,
    add: &mut impl FnMut(Vec<u8>, f64),
) -> Result<()> {
    let l = params.l;
    let n = params.n;
    let lf = l as f64;
    let two_pi = 2.0 * std::f64::consts::PI;
    let k0 = l / 2;
    let root_n = (n as f64).sqrt();
    let root2 = 2f64.sqrt();

    // Disorder part. Complex Fourier amplitudes z_k recombine pairwise into
    // the real cosine (+sqrt(2) Re z) and sine (-sqrt(2) Im z) modes.
    let staggered = |site: usize| if site.is_multiple_of(2) { -1.0 } else { 1.0 };

    // Uniform mode (complex k = L, self-conjugate).
    let s_uniform: f64 = (0..l).map(|s| params.omega[s] * staggered(s)).sum();
    if s_uniform != 0.0 {
        let mut occ = condensate_occ(l, k0, n - 1);
        occ[0] += 1;
        add(occ, -root_n / (2.0 * params.j * lf) * s_uniform / 2.0);
    }
    for k in 1..l / 2 {
        let denom = 1.0 + (two_pi * k as f64 / lf).cos();
        let (mut re, mut im) = (0.0, 0.0);
        for s in 0..l {
            let arg = two_pi * (s as f64 + 1.0) * k as f64 / lf;
            re += params.omega[s] * staggered(s) * arg.cos();
            im -= params.omega[s] * staggered(s) * arg.sin();
        }
        let z_scale = -root_n / (2.0 * params.j * lf * denom);
        let (re, im) = (z_scale * re, z_scale * im);
        let mut occ_cos = condensate_occ(l, k0, n - 1);
        occ_cos[k] += 1;
        add(occ_cos, root2 * re);
        let mut occ_sin = condensate_occ(l, k0, n - 1);
        occ_sin[l - k] += 1;
        add(occ_sin, -root2 * im);
    }

    // Interaction part.
    if n >= 2 {
        let pref = params.u * ((n as f64) * (n as f64 - 1.0)).sqrt() / (4.0 * params.j * lf);
        let mut occ = condensate_occ(l, k0, n - 2);
        occ[0] += 2;
        add(occ, pref / (2.0 * root2));
        for k in 1..l / 2 {
            let denom = 1.0 + (two_pi * k as f64 / lf).cos();
            // b†_k b†_{L-k} |0> = (|2_cos> + |2_sin>) / sqrt(2)
            let w = pref / denom / root2;
            let mut occ_cos = condensate_occ(l, k0, n - 2);
            occ_cos[k] += 2;
            add(occ_cos, w);
            let mut occ_sin = condensate_occ(l, k0, n - 2);
            occ_sin[l - k] += 2;
            add(occ_sin, w);
        }
    }
    Ok(())
}

/// The superfluid energy with its `(a, b)` disorder/interaction coefficients:
/// `eps = eps0(tau) - (a / tau) (delta^2 + b)` with
/// `eps0 = -2 tau cos(pi/(L+1)) - 3/(4(L+1))` open,
/// `eps0 = -2 tau - 1/(2L)` periodic.
#[derive(Debug, Clone, Copy)]
pub struct SfEnergy {
    pub energy: PhaseEnergy,
    /// Coefficient of `-delta^2 / tau`.
    pub a: f64,
    /// Interaction offset: the `1/tau` part equals `-(a/tau) b`.
    pub b: f64,
}

/// Disorder-averaged second-order superfluid energy.
pub fn sf_energy_avg(
    tau: f64,
    delta: f64,
    l: usize,
    n: u32,
    boundary: Boundary,
) -> Result<SfEnergy> {
    if !(tau > 0.0) {
        return Err(Error::domain("sf_energy_avg requires tau > 0"));
    }
    if n < 2 {
        return Err(Error::domain("sf_energy_avg requires N >= 2"));
    }
    let lf = l as f64;
    let nm1 = (n - 1) as f64;
    let (eps0, a, b) = match boundary {
        Boundary::Open => {
            if l < 2 {
                return Err(Error::domain("open superfluid energy requires L >= 2"));
            }
            let pi = std::f64::consts::PI;
            let c = (pi / (lf + 1.0)).cos();
            let s2 = (pi / (lf + 1.0)).sin().powi(2);
            let eps0 = -2.0 * tau * c - 3.0 / (4.0 * (lf + 1.0));
            let a = (5.0 * c * c + 1.0) / (24.0 * (lf + 1.0) * c * s2);
            let bracket = (15.0 + 4.0 * lf * (lf + 2.0)) / (6.0 * c)
                + (6.0 * c * c - 5.0) / (s2 * c)
                + 4.0 * nm1 / (c - (3.0 * pi / (lf + 1.0)).cos());
            let ab = bracket / (32.0 * (lf + 1.0).powi(2) * nm1);
            (eps0, a, ab / a)
        }
        Boundary::Periodic => {
            if !l.is_multiple_of(2) {
                return Err(Error::Degeneracy(
                    "periodic superfluid energy requires even L".into(),
                ));
            }
            let eps0 = -2.0 * tau - 1.0 / (2.0 * lf);
            let a = (lf * lf - 4.0) / (36.0 * lf);
            let ab = (lf * lf - 1.0) / (48.0 * nm1 * lf * lf);
            (eps0, a, ab / a)
        }
    };
    Ok(SfEnergy {
        energy: PhaseEnergy {
            epsilon: eps0 - a / tau * (delta * delta + b),
            order: 2,
            phase: Phase::Superfluid,
        },
        a,
        b,
    })
}

/// The fitted constant in the localized-to-W boundary `delta = (3A/2)
/// [alpha(N) tau]^N`; `A = 4/3` reproduces the plain factor 2.
pub const BOUNDARY_A_DEFAULT: f64 = 4.0 / 3.0;

/// Localized-to-W phase boundary `delta = 2 [alpha(N) tau]^N`.
pub fn boundary_loc_w(tau: f64, n: u32) -> Result<f64> {
    boundary_loc_w_with_constant(tau, n, BOUNDARY_A_DEFAULT)
}

/// Localized-to-W boundary with an explicit `A` constant.
pub fn boundary_loc_w_with_constant(tau: f64, n: u32, a_const: f64) -> Result<f64> {
    if tau < 0.0 {
        return Err(Error::domain("tau must be >= 0"));
    }
    Ok(1.5 * a_const * (alpha(n)? * tau).powi(n as i32))
}

/// W-to-superfluid boundary: the hopping where `eps_W(tau) = eps_SF(tau,
/// delta)` flips from W-favoured to SF-favoured, located inside
/// `tau ∈ [0.01, 10]` (open chain).
pub fn boundary_w_sf(delta: f64, l: usize, n: u32) -> Result<f64> {
    let g = |tau: f64| -> Result<f64> {
        Ok(w_energy(tau).epsilon - sf_energy_avg(tau, delta, l, n, Boundary::Open)?.energy.epsilon)
    };
    find_upward_crossing(&g, 0.01, 10.0)
}

/// W-to-superfluid boundary inside a caller-supplied bracket.
pub fn boundary_w_sf_in(delta: f64, l: usize, n: u32, lo: f64, hi: f64) -> Result<f64> {
    let g = |tau: f64| -> Result<f64> {
        Ok(w_energy(tau).epsilon - sf_energy_avg(tau, delta, l, n, Boundary::Open)?.energy.epsilon)
    };
    bisect(&g, lo, hi)
}

/// Superfluid-to-localized boundary: where `eps_loc(tau, delta) = eps_SF(tau,
/// delta)` flips from localized-favoured to SF-favoured (open chain; the
/// localized side uses the quoted second-order average). At strong disorder
/// the second-order energies never cross and a bracket error is returned.
pub fn boundary_sf_loc(delta: f64, l: usize, n: u32) -> Result<f64> {
    let g = |tau: f64| -> Result<f64> {
        Ok(localized_energy_avg(tau, delta, l, 1)?.epsilon
            - sf_energy_avg(tau, delta, l, n, Boundary::Open)?.energy.epsilon)
    };
    find_upward_crossing(&g, 0.01, 10.0)
}

/// Superfluid-to-localized boundary inside a caller-supplied bracket.
pub fn boundary_sf_loc_in(delta: f64, l: usize, n: u32, lo: f64, hi: f64) -> Result<f64> {
    let g = |tau: f64| -> Result<f64> {
        Ok(localized_energy_avg(tau, delta, l, 1)?.epsilon
            - sf_energy_avg(tau, delta, l, n, Boundary::Open)?.energy.epsilon)
    };
    bisect(&g, lo, hi)
}

/// First sign change from negative to positive over a log-spaced scan of
/// `[lo, hi]`, refined by bisection. The second-order energy differences
/// also cross spuriously where the expansions blow up (`1/tau` terms), so
/// the upward crossing out of the favoured region is the physical one.
fn find_upward_crossing(g: &dyn Fn(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<f64> {
    const SCAN: usize = 400;
    let ratio = (hi / lo).powf(1.0 / SCAN as f64);
    let mut x_prev = lo;
    let mut g_prev = g(lo)?;
    for i in 1..=SCAN {
        let x = lo * ratio.powi(i as i32);
        let gx = g(x)?;
        if g_prev < 0.0 && gx >= 0.0 {
            return bisect(g, x_prev, x);
        }
        x_prev = x;
        g_prev = gx;
    }
    Err(Error::RootBracket { lo, hi })
}

/// Plain bisection to an interval of 1e-12 (relative); requires a sign
/// change across the bracket.
fn bisect(g: &dyn Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut g_lo = g(lo)?;
    let g_hi = g(hi)?;
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::RootBracket { lo, hi });
    }
    while hi - lo > 1e-12 * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid)?;
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
