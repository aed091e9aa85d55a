//! The disordered attractive Bose-Hubbard Hamiltonian on a chain.
//!
//! In units of hbar, with `n_l = a†_l a_l`:
//!
//! ```text
//! H = sum_l [ omega_l n_l - (U/2) n_l (n_l - 1) + J (a†_{l+1} a_l + a†_l a_{l+1}) ]
//! ```
//!
//! The sign convention is implemented verbatim: the hopping term enters with
//! `+J`, and `U > 0` is attractive through the explicit minus sign. The mean
//! on-site energy is omitted entirely (it is a constant at fixed total boson
//! number). For an open chain `a_{L+1} = 0`; a periodic chain adds the
//! `(L, 1)` bond.
//!
//! Energies are measured against the characteristic scale `U N (N - 1)`:
//! `eps = E / U N (N-1)`, `tau = J / U (N-1)`, `delta = D / U (N-1)`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{apply_hop, SectorBasis};

/// Chain boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Open,
    Periodic,
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Boundary::Open => write!(f, "open"),
            Boundary::Periodic => write!(f, "periodic"),
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" => Ok(Boundary::Open),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::domain(format!(
                "unknown boundary '{other}' (expected open|periodic)"
            ))),
        }
    }
}

/// Physical model parameters, in angular-frequency units.
///
/// [`ModelParams::new`] enforces the physical ranges (`U > 0`, `J >= 0`).
/// The fields stay public so that algebraic identities (for example the
/// attractive/repulsive duality, which negates `U`) can be exercised in tests.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub l: usize,
    pub n: u32,
    pub u: f64,
    pub j: f64,
    pub boundary: Boundary,
    /// Per-site detunings `omega_l`; length `l`.
    pub omega: Vec<f64>,
}

impl ModelParams {
    pub fn new(
        l: usize,
        n: u32,
        u: f64,
        j: f64,
        boundary: Boundary,
        omega: Vec<f64>,
    ) -> Result<Self> {
        if l < 1 {
            return Err(Error::domain("L must be >= 1"));
        }
        if n < 1 {
            return Err(Error::domain("N must be >= 1"));
        }
        if !(u > 0.0) {
            return Err(Error::domain("U must be > 0"));
        }
        if !(j >= 0.0) {
            return Err(Error::domain("J must be >= 0"));
        }
        if omega.len() != l {
            return Err(Error::domain(format!(
                "omega has length {}, expected L = {l}",
                omega.len()
            )));
        }
        if boundary == Boundary::Periodic && l < 2 {
            return Err(Error::domain("a periodic chain requires L >= 2"));
        }
        Ok(ModelParams {
            l,
            n,
            u,
            j,
            boundary,
            omega,
        })
    }

    /// Build parameters directly from the scaled view with `U = 1`:
    /// `J = tau (N-1)` and `omega_l = sigma_l (N-1)`.
    pub fn from_scaled(
        l: usize,
        n: u32,
        boundary: Boundary,
        tau: f64,
        sigma: &[f64],
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("scaled parameters require N >= 2"));
        }
        let nm1 = (n - 1) as f64;
        let omega = sigma.iter().map(|s| s * nm1).collect();
        ModelParams::new(l, n, 1.0, tau * nm1, boundary, omega)
    }

    /// Undirected nearest-neighbour bonds, one entry per hopping term pair
    /// in the Hamiltonian sum. A periodic `L = 2` ring legitimately carries
    /// the `(0, 1)` bond twice.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut b: Vec<(usize, usize)> = (0..self.l.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic && self.l >= 2 {
            b.push((self.l - 1, 0));
        }
        b
    }
}

/// The dimensionless view of [`ModelParams`].
#[derive(Debug, Clone)]
pub struct ScaledParams {
    /// `J / U (N-1)`.
    pub tau: f64,
    /// `D / U (N-1)`.
    pub delta: f64,
    /// `omega_l / U (N-1)`.
    pub sigma: Vec<f64>,
    /// The characteristic energy `U N (N-1)` (units of hbar already folded in).
    pub epsilon_unit: f64,
}

impl ScaledParams {
    /// Scale an absolute energy to `eps = E / U N (N-1)`.
    pub fn scaled_energy(&self, e: f64) -> f64 {
        e / self.epsilon_unit
    }
}

/// Scaled view of `params` given the disorder strength `D`.
///
/// Fails for `N = 1`: the scaling divides by `N - 1`.
pub fn scale(params: &ModelParams, d: f64) -> Result<ScaledParams> {
    if params.n < 2 {
        return Err(Error::domain("scaling is undefined for N = 1"));
    }
    let denom = params.u * (params.n - 1) as f64;
    Ok(ScaledParams {
        tau: params.j / denom,
        delta: d / denom,
        sigma: params.omega.iter().map(|w| w / denom).collect(),
        epsilon_unit: params.u * (params.n as f64) * (params.n - 1) as f64,
    })
}

/// Draw `l` independent on-site energies uniformly from `[-d, d]`.
///
/// Deterministic for a fixed seed. The mean is not subtracted: at fixed total
/// boson number it only shifts the spectrum.
pub fn sample_disorder(l: usize, d: f64, seed: u64) -> Vec<f64> {
    assert!(d >= 0.0, "disorder strength must be >= 0");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..l)
        .map(|_| {
            if d == 0.0 {
                0.0
            } else {
                rng.random_range(-d..=d)
            }
        })
        .collect()
}

/// Real symmetric sparse matrix in compressed-row storage.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseOperator {
    /// Assemble from per-row `(column, value)` entry lists. Entries are
    /// sorted by column and duplicates summed; zero-valued entries are kept
    /// out of the structure.
    pub fn from_rows(rows: Vec<Vec<(u32, f64)>>) -> Self {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|&(c, _)| c);
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(row.len());
            for (c, v) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            for (c, v) in merged {
                if v != 0.0 {
                    debug_assert!((c as usize) < dim);
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseOperator {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let rows = diag
            .iter()
            .enumerate()
            .map(|(i, &v)| vec![(i as u32, v)])
            .collect();
        SparseOperator::from_rows(rows)
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Entries of row `i`, sorted by column.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.cols[lo..hi]
            .iter()
            .zip(&self.vals[lo..hi])
            .map(|(&c, &v)| (c as usize, v))
    }

    /// Entry `(i, j)`; zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.cols[lo..hi].binary_search(&(j as u32)) {
            Ok(k) => self.vals[lo + k],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (i, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *out = acc;
        }
    }

    pub fn matvec_alloc(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.matvec(x, &mut y);
        y
    }

    /// `-A`; shares the sparsity pattern.
    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v = -*v);
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// Largest `|a_ij - a_ji|` over the stored pattern.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Dense row-major copy; intended for small oracles.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim * self.dim];
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                m[i * self.dim + j] = v;
            }
        }
        m
    }
}

/// Assemble `H / hbar` in the given sector basis.
///
/// Row `i` holds the diagonal `sum_l [omega_l n_l - (U/2) n_l (n_l - 1)]` and
/// one entry `J sqrt(n_from (n_to + 1))` per directed nearest-neighbour hop.
pub fn build_hamiltonian(params: &ModelParams, basis: &SectorBasis) -> Result<SparseOperator> {
    if basis.sites() != params.l || basis.bosons() != params.n {
        return Err(Error::domain(format!(
            "basis is (L={}, N={}), params are (L={}, N={})",
            basis.sites(),
            basis.bosons(),
            params.l,
            params.n
        )));
    }
    if params.omega.len() != params.l {
        return Err(Error::domain("omega length does not match L"));
    }
    let bonds = params.bonds();
    let mut rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(basis.dimension());
    for (i, state) in basis.states().iter().enumerate() {
        let mut row = Vec::with_capacity(2 * bonds.len() + 1);
        let mut diag = 0.0;
        for (site, &occ) in state.occupations().iter().enumerate() {
            let n = occ as f64;
            diag += params.omega[site] * n - 0.5 * params.u * n * (n - 1.0);
        }
        row.push((i as u32, diag));
        if params.j != 0.0 {
            for &(a, b) in &bonds {
                for (from, to) in [(a, b), (b, a)] {
                    if let Some((target, amp)) = apply_hop(state, from, to) {
                        let j_col = basis
                            .rank(&target)
                            .expect("hop target stays in the sector");
                        row.push((j_col as u32, params.j * amp));
                    }
                }
            }
        }
        rows.push(row);
    }
    Ok(SparseOperator::from_rows(rows))
}

/// The diagonal number operator `n_site` in the sector basis.
pub fn number_operator(basis: &SectorBasis, site: usize) -> Result<SparseOperator> {
    if site >= basis.sites() {
        return Err(Error::domain(format!(
            "site {site} out of range 0..{}",
            basis.sites()
        )));
    }
    let diag: Vec<f64> = basis
        .states()
        .iter()
        .map(|s| s.n_at(site) as f64)
        .collect();
    Ok(SparseOperator::from_diagonal(&diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockState;

    #[test]
    fn single_particle_two_sites() {
        let params = ModelParams::new(2, 1, 1.0, 0.3, Boundary::Open, vec![0.5, -0.2]).unwrap();
        let basis = SectorBasis::new(2, 1).unwrap();
        let h = build_hamiltonian(&params, &basis).unwrap();
        // Basis order: (1,0), (0,1).
        assert_eq!(h.get(0, 0), 0.5);
        assert_eq!(h.get(1, 1), -0.2);
        assert_eq!(h.get(0, 1), 0.3);
        assert_eq!(h.get(1, 0), 0.3);
    }

    #[test]
    fn single_site_interaction() {
        let params = ModelParams::new(1, 5, 2.0, 0.0, Boundary::Open, vec![0.7]).unwrap();
        let basis = SectorBasis::new(1, 5).unwrap();
        let h = build_hamiltonian(&params, &basis).unwrap();
        assert_eq!(h.dimension(), 1);
        // 5*omega - U * 5*4/2 = 3.5 - 20
        assert!((h.get(0, 0) - (5.0 * 0.7 - 2.0 * 10.0)).abs() < 1e-14);
    }

    #[test]
    fn two_sites_two_bosons_matrix() {
        let u = 0.9;
        let j = 0.17;
        let params = ModelParams::new(2, 2, u, j, Boundary::Open, vec![0.0, 0.0]).unwrap();
        let basis = SectorBasis::new(2, 2).unwrap();
        let h = build_hamiltonian(&params, &basis).unwrap();
        // Order (2,0), (1,1), (0,2): diagonal (-U, 0, -U), hops J*sqrt(2).
        let s2 = 2f64.sqrt();
        for (i, j_col, want) in [
            (0, 0, -u),
            (1, 1, 0.0),
            (2, 2, -u),
            (0, 1, j * s2),
            (1, 0, j * s2),
            (1, 2, j * s2),
            (2, 1, j * s2),
            (0, 2, 0.0),
        ] {
            assert!(
                (h.get(i, j_col) - want).abs() < 1e-14,
                "entry ({i},{j_col})"
            );
        }
    }

    #[test]
    fn periodic_adds_wraparound_bond() {
        let basis = SectorBasis::new(3, 1).unwrap();
        let open =
            build_hamiltonian(
                &ModelParams::new(3, 1, 1.0, 0.4, Boundary::Open, vec![0.0; 3]).unwrap(),
                &basis,
            )
            .unwrap();
        let ring =
            build_hamiltonian(
                &ModelParams::new(3, 1, 1.0, 0.4, Boundary::Periodic, vec![0.0; 3]).unwrap(),
                &basis,
            )
            .unwrap();
        // Single particle: states (1,0,0),(0,1,0),(0,0,1). The ring couples
        // the first and last.
        assert_eq!(open.get(0, 2), 0.0);
        assert!((ring.get(0, 2) - 0.4).abs() < 1e-14);
        assert!((ring.get(2, 0) - 0.4).abs() < 1e-14);
    }

    #[test]
    fn symmetry_and_sparsity() {
        let omega = sample_disorder(6, 0.8, 11);
        let params = ModelParams::new(6, 3, 1.0, 0.35, Boundary::Periodic, omega).unwrap();
        let basis = SectorBasis::new(6, 3).unwrap();
        let h = build_hamiltonian(&params, &basis).unwrap();
        assert_eq!(h.symmetry_defect(), 0.0);
        // Nonzeros per row <= 2 * bonds + 1.
        let cap = basis.dimension() * (2 * params.bonds().len() + 1);
        assert!(h.nnz() <= cap);
    }

    /// Every stored matrix element connects states of equal total N.
    #[test]
    fn total_number_conservation_structural() {
        let params =
            ModelParams::new(5, 3, 1.0, 0.7, Boundary::Open, sample_disorder(5, 0.5, 3)).unwrap();
        let basis = SectorBasis::new(5, 3).unwrap();
        let h = build_hamiltonian(&params, &basis).unwrap();
        for i in 0..h.dimension() {
            for (j, _) in h.row(i) {
                assert_eq!(
                    basis.unrank(i).unwrap().total(),
                    basis.unrank(j).unwrap().total()
                );
            }
        }
    }

    #[test]
    fn number_operator_examples() {
        let basis = SectorBasis::new(2, 2).unwrap();
        let n0 = number_operator(&basis, 0).unwrap();
        assert_eq!(
            (0..3).map(|i| n0.get(i, i)).collect::<Vec<_>>(),
            vec![2.0, 1.0, 0.0]
        );
        // sum_l n_l = N * identity
        let n1 = number_operator(&basis, 1).unwrap();
        for i in 0..3 {
            assert_eq!(n0.get(i, i) + n1.get(i, i), 2.0);
        }
        assert!(number_operator(&basis, 2).is_err());

        // Expectation on an empty site vanishes.
        let b21 = SectorBasis::new(2, 1).unwrap();
        let idx = b21.rank(&FockState::new(vec![0, 1])).unwrap();
        let n_first = number_operator(&b21, 0).unwrap();
        assert_eq!(n_first.get(idx, idx), 0.0);
    }

    #[test]
    fn disorder_is_deterministic_and_zero_for_d0() {
        assert_eq!(sample_disorder(4, 0.0, 9), vec![0.0; 4]);
        assert_eq!(sample_disorder(10, 1.3, 42), sample_disorder(10, 1.3, 42));
        assert_ne!(sample_disorder(10, 1.3, 42), sample_disorder(10, 1.3, 43));
    }

    #[test]
    fn disorder_moments() {
        let draws = sample_disorder(100_000, 1.0, 2024);
        let n = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / n;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        // U(-1,1): mean 0 (4-sigma window), variance 1/3 (5%).
        let sigma_mean = (1.0 / 3.0f64 / n).sqrt();
        assert!(mean.abs() < 4.0 * sigma_mean, "mean {mean}");
        assert!((var - 1.0 / 3.0).abs() < 0.05 / 3.0, "var {var}");
    }

    #[test]
    fn scale_examples() {
        let p = ModelParams::new(4, 4, 1.0, 0.3, Boundary::Open, vec![0.0; 4]).unwrap();
        let s = scale(&p, 0.0).unwrap();
        assert!((s.tau - 0.1).abs() < 1e-15);

        // U = 200*2pi MHz, N = 2, J = 20*2pi MHz -> tau = 0.1
        let two_pi = std::f64::consts::TAU;
        let p = ModelParams::new(2, 2, 200.0 * two_pi, 20.0 * two_pi, Boundary::Open, vec![0.0; 2])
            .unwrap();
        let s = scale(&p, 0.0).unwrap();
        assert!((s.tau - 0.1).abs() < 1e-12);

        // E = -U N (N-1) / 2 -> eps = -1/2
        let e = -0.5 * p.u * (p.n as f64) * (p.n - 1) as f64;
        assert!((s.scaled_energy(e) + 0.5).abs() < 1e-15);

        let p1 = ModelParams::new(2, 1, 1.0, 0.1, Boundary::Open, vec![0.0; 2]).unwrap();
        assert!(scale(&p1, 0.0).is_err());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let params = ModelParams::new(3, 2, 1.0, 0.1, Boundary::Open, vec![0.0; 3]).unwrap();
        let wrong = SectorBasis::new(3, 3).unwrap();
        assert!(build_hamiltonian(&params, &wrong).is_err());
    }
}
