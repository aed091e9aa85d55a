//! Fixed-particle-number occupation basis for a bosonic chain.
//!
//! The sector with `L` sites and `N` bosons is spanned by the tensor product
//! states `|n_1, ..., n_L>` with `sum_l n_l = N`. States are ordered in
//! lexicographically *decreasing* order of their occupation vectors, so
//! `(N, 0, ..., 0)` comes first and `(0, ..., 0, N)` last. The ordering is
//! part of the on-disk contract: serialized state vectors index into it.
//!
//! Ranking is combinatorial (a perfect hash): no search, no hash map.

use crate::error::{Error, Result};

/// Largest supported sector dimension. The library fails loudly instead of
/// wrapping when a requested sector exceeds this.
pub const MAX_DIMENSION: u64 = 1 << 31;

/// Largest per-site occupation representable by [`FockState`].
pub const MAX_OCCUPATION: u32 = u8::MAX as u32;

/// One many-body basis element: bosons per site.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FockState {
    occ: Vec<u8>,
}

impl FockState {
    /// Wrap an occupation vector. The sector invariants (length `L`,
    /// total `N`) are checked by [`SectorBasis::rank`].
    pub fn new(occ: Vec<u8>) -> Self {
        FockState { occ }
    }

    /// Occupations per site.
    pub fn occupations(&self) -> &[u8] {
        &self.occ
    }

    /// Number of sites.
    pub fn len(&self) -> usize {
        self.occ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occ.is_empty()
    }

    /// Bosons on `site`.
    pub fn n_at(&self, site: usize) -> u32 {
        self.occ[site] as u32
    }

    /// Total boson number.
    pub fn total(&self) -> u32 {
        self.occ.iter().map(|&n| n as u32).sum()
    }
}

impl std::fmt::Debug for FockState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.occ.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ">")
    }
}

/// Matrix element of `a†_to a_from` on a basis state.
///
/// Returns the target state and the amplitude `sqrt(n_from * (n_to + 1))`,
/// or `None` when the source site is empty. Panics if the sites coincide or
/// are out of range (caller precondition).
pub fn apply_hop(state: &FockState, from: usize, to: usize) -> Option<(FockState, f64)> {
    assert!(from != to, "hop requires distinct sites");
    assert!(from < state.len() && to < state.len(), "site out of range");
    let n_from = state.occ[from];
    if n_from == 0 {
        return None;
    }
    let n_to = state.occ[to];
    let mut occ = state.occ.clone();
    occ[from] = n_from - 1;
    occ[to] = n_to + 1;
    let amp = ((n_from as f64) * (n_to as f64 + 1.0)).sqrt();
    Some((FockState::new(occ), amp))
}

/// Number of states in the `(L, N)` sector: `C(L + N - 1, N)`.
///
/// Fails with a capacity error if the count exceeds [`MAX_DIMENSION`].
pub fn basis_size(l: usize, n: u32) -> Result<usize> {
    if l == 0 {
        return Err(Error::domain("basis_size requires L >= 1"));
    }
    // C(L-1+N, N) via the exact stepwise product; partial results are
    // themselves binomials, hence monotone, so a single cap check suffices.
    let mut res: u128 = 1;
    for i in 1..=(n as u128) {
        res = res
            .checked_mul(l as u128 - 1 + i)
            .ok_or_else(|| Error::capacity(format!("binomial overflow for L={l}, N={n}")))?;
        res /= i;
        if res > MAX_DIMENSION as u128 {
            return Err(Error::capacity(format!(
                "sector (L={l}, N={n}) dimension exceeds {MAX_DIMENSION}"
            )));
        }
    }
    Ok(res as usize)
}

/// The ordered `(L, N)` sector basis with bidirectional index <-> state maps.
pub struct SectorBasis {
    l: usize,
    n: u32,
    dim: usize,
    states: Vec<FockState>,
    /// Rectangular Pascal table, `binom[a * (n + 1) + b] = C(a, b)` for
    /// `b <= n`. Entries that would overflow saturate; every entry the rank
    /// arithmetic reads is a sub-basis size <= `dim`, hence exact.
    binom: Vec<u64>,
}

impl SectorBasis {
    /// Enumerate the full sector in lexicographically decreasing order.
    pub fn new(l: usize, n: u32) -> Result<Self> {
        let dim = basis_size(l, n)?;
        if n > MAX_OCCUPATION {
            return Err(Error::capacity(format!(
                "occupations above {MAX_OCCUPATION} are not representable"
            )));
        }

        let mut states = Vec::with_capacity(dim);
        let mut occ = vec![0u8; l];
        occ[0] = n as u8;
        loop {
            states.push(FockState::new(occ.clone()));
            // Successor in lex-decreasing order: decrement the rightmost
            // movable site and dump everything to its right one site over.
            let Some(pivot) = (0..l - 1).rev().find(|&sl| occ[sl] > 0) else {
                break;
            };
            let tail: u32 = occ[pivot + 1..].iter().map(|&x| x as u32).sum();
            occ[pivot] -= 1;
            occ[pivot + 1..].iter_mut().for_each(|x| *x = 0);
            occ[pivot + 1] = (tail + 1) as u8;
        }
        debug_assert_eq!(states.len(), dim);

        let binom = pascal_table(l + n as usize + 1, n as usize);
        Ok(SectorBasis {
            l,
            n,
            dim,
            states,
            binom,
        })
    }

    pub fn sites(&self) -> usize {
        self.l
    }

    pub fn bosons(&self) -> u32 {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    fn choose(&self, a: usize, b: usize) -> u64 {
        if b > self.n as usize {
            unreachable!("rank arithmetic never needs C(a, b) with b > N");
        }
        self.binom[a * (self.n as usize + 1) + b]
    }

    /// Combinatorial rank of `state` in this basis; O(L) time.
    pub fn rank(&self, state: &FockState) -> Result<usize> {
        if state.len() != self.l {
            return Err(Error::domain(format!(
                "state has {} sites, basis has {}",
                state.len(),
                self.l
            )));
        }
        if state.total() != self.n {
            return Err(Error::domain(format!(
                "state holds {} bosons, sector has {}",
                state.total(),
                self.n
            )));
        }
        let mut rank: u64 = 0;
        let mut remaining = self.n;
        for site in 0..self.l {
            let n_here = state.occ[site] as u32;
            let d = (remaining - n_here) as usize;
            let k = self.l - 1 - site; // sites to the right
            if d > 0 && k > 0 {
                // States sharing the prefix but holding more bosons here:
                // sum over the larger choices collapses by the hockey-stick
                // identity to a single sub-basis count.
                rank += self.choose(k + d - 1, d - 1);
            }
            remaining -= n_here;
        }
        Ok(rank as usize)
    }

    /// State at `index`.
    pub fn unrank(&self, index: usize) -> Result<&FockState> {
        self.states
            .get(index)
            .ok_or_else(|| Error::domain(format!("index {index} out of range 0..{}", self.dim)))
    }

    /// Pure combinatorial inverse of [`rank`](Self::rank); used to cross-check
    /// the enumeration.
    #[cfg(test)]
    pub(crate) fn unrank_combinatorial(&self, index: usize) -> Result<FockState> {
        if index >= self.dim {
            return Err(Error::domain(format!(
                "index {index} out of range 0..{}",
                self.dim
            )));
        }
        let mut idx = index as u64;
        let mut occ = vec![0u8; self.l];
        let mut remaining = self.n;
        let sites = self.l;
        for (site, slot) in occ.iter_mut().enumerate() {
            let k = sites - 1 - site;
            if k == 0 {
                *slot = remaining as u8;
                break;
            }
            // Occupations are laid out in blocks of decreasing n_here.
            let mut placed = false;
            for m in (0..=remaining).rev() {
                let rest = (remaining - m) as usize;
                let block = self.choose(k - 1 + rest, rest);
                if idx < block {
                    *slot = m as u8;
                    remaining -= m;
                    placed = true;
                    break;
                }
                idx -= block;
            }
            debug_assert!(placed, "unrank walked past the basis");
        }
        Ok(FockState::new(occ))
    }
}

fn pascal_table(rows: usize, max_b: usize) -> Vec<u64> {
    let width = max_b + 1;
    let mut t = vec![0u64; rows * width];
    for a in 0..rows {
        t[a * width] = 1;
        for b in 1..=max_b.min(a) {
            let up = t[(a - 1) * width + b];
            let up_left = t[(a - 1) * width + b - 1];
            t[a * width + b] = up.saturating_add(up_left);
        }
    }
    t
}
