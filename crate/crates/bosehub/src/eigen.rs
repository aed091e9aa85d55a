//! Extremal eigenpairs of the sparse Hamiltonian.
//!
//! [`ground_state`] is a thick-restart Lanczos solver with full
//! reorthogonalization of the kept block: per cycle it grows a Krylov basis,
//! Rayleigh-Ritz projects, and restarts from the two lowest Ritz vectors plus
//! the residual direction. Dimensions here are desk scale, so correctness is
//! preferred over selective reorthogonalization tricks.
//!
//! [`dense_spectrum`] is the independent oracle: a full symmetric
//! eigendecomposition (LAPACK-style, via nalgebra) for dimensions small
//! enough to afford it.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hamil::SparseOperator;

/// Default residual tolerance, absolute, in the Hamiltonian's frequency units.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Krylov block size per restart cycle.
pub const DEFAULT_BLOCK: usize = 30;
/// Default restart budget.
pub const DEFAULT_MAX_RESTARTS: usize = 200;

/// Dimension cap for the dense oracle.
pub const DENSE_DIMENSION_CAP: usize = 4000;

/// A converged extremal eigenpair.
#[derive(Debug, Clone)]
pub struct EigenResult {
    /// Eigenvalue (units of hbar * angular frequency).
    pub energy: f64,
    /// Unit-norm eigenvector; global phase fixed by making the
    /// largest-magnitude component positive.
    pub vector: Vec<f64>,
    /// `||H psi - E psi||`, re-verified with an independent mat-vec.
    pub residual: f64,
    /// Total number of mat-vec applications spent.
    pub iterations: usize,
}

/// Smallest eigenpair of a symmetric sparse operator.
///
/// Deterministic for a fixed seed. Fails with [`Error::Convergence`]
/// carrying the best residual when the restart budget is exhausted.
pub fn ground_state(
    h: &SparseOperator,
    tol: f64,
    max_restarts: usize,
    seed: u64,
) -> Result<EigenResult> {
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let dim = h.dimension();
    if dim == 0 {
        return Err(Error::domain("empty operator"));
    }
    if dim == 1 {
        return Ok(EigenResult {
            energy: h.get(0, 0),
            vector: vec![1.0],
            residual: 0.0,
            iterations: 0,
        });
    }

    let block = DEFAULT_BLOCK.min(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matvecs = 0usize;

    let start = random_unit(&mut rng, dim);
    let mut basis: Vec<Vec<f64>> = vec![start.clone()];
    let mut h_basis: Vec<Vec<f64>> = vec![{
        matvecs += 1;
        h.matvec_alloc(&start)
    }];

    let mut prev_energy = f64::INFINITY;
    let mut prev_residual = f64::INFINITY;
    let mut best_residual = f64::INFINITY;
    let mut stagnant = 0usize;

    for _restart in 0..max_restarts {
        // Grow the Krylov chain under full reorthogonalization. A breakdown
        // means the accumulated space is invariant; the Ritz solve below is
        // then exact on it.
        let mut broke_down = false;
        while basis.len() < block {
            let mut w = h_basis.last().expect("nonempty basis").clone();
            orthogonalize(&mut w, &basis);
            let norm = norm2(&w);
            if norm < 1e-13 {
                broke_down = true;
                break;
            }
            w.iter_mut().for_each(|x| *x /= norm);
            matvecs += 1;
            h_basis.push(h.matvec_alloc(&w));
            basis.push(w);
        }

        // Rayleigh-Ritz on the collected block. Keeping a few of the lowest
        // Ritz vectors across restarts lets clustered quasi-degenerate
        // manifolds (the W band at small tau) resolve without thrashing.
        let k = basis.len();
        let mut t = vec![0.0; k * k];
        for i in 0..k {
            for j in i..k {
                let v = dot(&basis[i], &h_basis[j]);
                t[i * k + j] = v;
                t[j * k + i] = v;
            }
        }
        let (_, y) = jacobi_lowest_pairs(&mut t, k, 4);

        let x = combine(&basis, &y[0]);
        let x = normalized(x);
        matvecs += 1;
        let hx = h.matvec_alloc(&x);
        let energy = dot(&x, &hx);
        let mut res_vec: Vec<f64> = hx.iter().zip(&x).map(|(&a, &b)| a - energy * b).collect();
        let residual = norm2(&res_vec);
        best_residual = best_residual.min(residual);

        // Variational monotonicity: the restart space contains the previous
        // Ritz vector, so the energy never increases across restarts.
        debug_assert!(
            energy <= prev_energy + 1e-9 * (1.0 + energy.abs()),
            "Ritz energy increased across restarts: {prev_energy} -> {energy}"
        );
        prev_energy = energy;

        if residual <= tol {
            return Ok(finalize(h, x, matvecs));
        }

        // True stagnation means the residual stops moving entirely — the
        // start vector was (numerically) orthogonal to the target, or the
        // chain closed on an invariant subspace missing it.
        stagnant = if residual > 0.999 * prev_residual {
            stagnant + 1
        } else {
            0
        };
        prev_residual = residual;
        let inject_random = stagnant >= 6 || broke_down;
        if inject_random {
            stagnant = 0;
        }

        // Thick restart: the lowest Ritz vectors plus the residual
        // direction, plus a fresh random direction when stuck.
        let mut new_basis = vec![x];
        for yv in y.iter().skip(1) {
            new_basis.push(normalized(combine(&basis, yv)));
        }
        orthogonalize(&mut res_vec, &new_basis);
        let rn = norm2(&res_vec);
        if rn > 1e-13 {
            res_vec.iter_mut().for_each(|v| *v /= rn);
            new_basis.push(res_vec);
        }
        if inject_random {
            let mut fresh = random_unit(&mut rng, dim);
            orthogonalize(&mut fresh, &new_basis);
            let n = norm2(&fresh);
            if n > 1e-13 {
                fresh.iter_mut().for_each(|v| *v /= n);
                new_basis.push(fresh);
            }
        }
        h_basis = new_basis
            .iter()
            .map(|v| {
                matvecs += 1;
                h.matvec_alloc(v)
            })
            .collect();
        basis = new_basis;
    }

    Err(Error::Convergence {
        restarts: max_restarts,
        best_residual,
        tol,
    })
}

/// [`ground_state`] with the default tolerance and budgets.
pub fn ground_state_default(h: &SparseOperator, seed: u64) -> Result<EigenResult> {
    ground_state(h, DEFAULT_TOL, DEFAULT_MAX_RESTARTS, seed)
}

/// Largest eigenpair: [`ground_state`] applied to `-H`, energy re-negated.
pub fn most_excited_state(
    h: &SparseOperator,
    tol: f64,
    max_restarts: usize,
    seed: u64,
) -> Result<EigenResult> {
    let neg = h.negated();
    let mut r = ground_state(&neg, tol, max_restarts, seed)?;
    r.energy = -r.energy;
    Ok(r)
}

/// Full symmetric eigendecomposition, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    pub values: Vec<f64>,
    /// `vectors[j]` is the unit eigenvector of `values[j]`, when requested.
    pub vectors: Option<Vec<Vec<f64>>>,
}

/// Dense full-diagonalization oracle for dimensions up to
/// [`DENSE_DIMENSION_CAP`].
pub fn dense_spectrum(h: &SparseOperator, with_vectors: bool) -> Result<DenseSpectrum> {
    let dim = h.dimension();
    if dim > DENSE_DIMENSION_CAP {
        return Err(Error::capacity(format!(
            "dense oracle capped at dimension {DENSE_DIMENSION_CAP}, got {dim}"
        )));
    }
    let mut m = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for (j, v) in h.row(i) {
            m[(i, j)] = v;
        }
    }
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = with_vectors.then(|| {
        order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
            .collect()
    });
    Ok(DenseSpectrum { values, vectors })
}

fn finalize(h: &SparseOperator, mut x: Vec<f64>, matvecs: usize) -> EigenResult {
    fix_phase(&mut x);
    let hx = h.matvec_alloc(&x);
    let energy = dot(&x, &hx);
    let residual = hx
        .iter()
        .zip(&x)
        .map(|(&a, &b)| (a - energy * b) * (a - energy * b))
        .sum::<f64>()
        .sqrt();
    EigenResult {
        energy,
        vector: x,
        residual,
        iterations: matvecs + 1,
    }
}

/// Make the largest-magnitude component positive; first index wins ties.
pub(crate) fn fix_phase(x: &mut [f64]) {
    let mut idx = 0;
    let mut best = 0.0f64;
    for (i, &v) in x.iter().enumerate() {
        if v.abs() > best {
            best = v.abs();
            idx = i;
        }
    }
    if x[idx] < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
    normalized(v)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let n = norm2(&v);
    assert!(n > 0.0, "cannot normalize the zero vector");
    v.iter_mut().for_each(|x| *x /= n);
    v
}

fn combine(basis: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let dim = basis[0].len();
    let mut out = vec![0.0; dim];
    for (v, &w) in basis.iter().zip(weights) {
        for (o, &x) in out.iter_mut().zip(v) {
            *o += w * x;
        }
    }
    out
}

/// Two passes of classical Gram-Schmidt against an orthonormal set.
fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(w, b);
            for (wi, &bi) in w.iter_mut().zip(b) {
                *wi -= c * bi;
            }
        }
    }
}

/// Cyclic Jacobi eigensolver for the small projected matrix; returns the
/// `want` smallest eigenvalues with their eigenvectors. `a` is row-major
/// `k x k`, destroyed in place.
fn jacobi_lowest_pairs(a: &mut [f64], k: usize, want: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut v = vec![0.0; k * k];
    for i in 0..k {
        v[i * k + i] = 1.0;
    }
    let scale: f64 = (0..k * k).map(|i| a[i].abs()).fold(0.0, f64::max).max(1e-300);
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..k {
            for q in (p + 1)..k {
                off = off.max(a[p * k + q].abs());
            }
        }
        if off < 1e-15 * scale {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let apq = a[p * k + q];
                if apq.abs() < 1e-18 * scale {
                    continue;
                }
                let theta = (a[q * k + q] - a[p * k + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..k {
                    let aip = a[i * k + p];
                    let aiq = a[i * k + q];
                    a[i * k + p] = c * aip - s * aiq;
                    a[i * k + q] = s * aip + c * aiq;
                }
                for j in 0..k {
                    let apj = a[p * k + j];
                    let aqj = a[q * k + j];
                    a[p * k + j] = c * apj - s * aqj;
                    a[q * k + j] = s * apj + c * aqj;
                }
                for i in 0..k {
                    let vip = v[i * k + p];
                    let viq = v[i * k + q];
                    v[i * k + p] = c * vip - s * viq;
                    v[i * k + q] = s * vip + c * viq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| a[x * k + x].total_cmp(&a[y * k + y]));
    let take = want.min(k);
    let values: Vec<f64> = order[..take].iter().map(|&i| a[i * k + i]).collect();
    let vectors: Vec<Vec<f64>> = order[..take]
        .iter()
        .map(|&j| (0..k).map(|i| v[i * k + j]).collect())
        .collect();
    (values, vectors)
}
