//! Leading singular triplets by warm-started block subspace iteration.
//!
//! Iterative solvers call these once per iteration on slowly changing
//! matrices, so the right singular basis of the previous call is a good
//! starting block and a couple of sweeps usually suffice. Whenever the
//! iteration fails to converge, or the block would cover a large share of
//! the spectrum anyway, the full SVD is used instead.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::ops::SvtOutput;
use super::{svd, DenseMatrix, SvdFactors};
use crate::error::{invalid, Result};

/// Extra block columns beyond the requested `k`.
const OVERSAMPLE: usize = 6;
const MAX_SWEEPS: usize = 10;
/// Accept when every wanted pair has `‖M vᵢ − σᵢ uᵢ‖ ≤ RESIDUAL_TOL·σ₁`.
const RESIDUAL_TOL: f64 = 1e-13;
/// Past this share of `min(m, n)` the full SVD is cheaper.
const FULL_SHARE: f64 = 0.4;

/// Right singular basis carried from one call to the next.
///
/// Also remembers recent failures: after a call whose subspace iteration
/// did not converge, the next `skip` calls go straight to the full SVD, with
/// `skip` doubling on consecutive failures up to `MAX_BACKOFF`.
#[derive(Clone, Debug, Default)]
pub struct WarmStart {
    basis: Option<DMatrix<f64>>,
    /// Columns of `basis` that carried nonzero output last time.
    active: usize,
    skip: usize,
    backoff: usize,
}

const MAX_BACKOFF: usize = 16;

impl WarmStart {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of leading components kept by the previous call.
    pub fn active(&self) -> usize {
        self.active
    }

    fn store(&mut self, f: &SvdFactors, active: usize) {
        self.basis = Some(f.v.0.clone());
        self.active = active;
    }

    /// True when this call should skip the subspace iteration.
    fn cooling_down(&mut self) -> bool {
        if self.skip > 0 {
            self.skip -= 1;
            true
        } else {
            false
        }
    }

    fn converged(&mut self) {
        self.backoff = 0;
    }

    fn failed(&mut self) {
        self.backoff = (2 * self.backoff).clamp(1, MAX_BACKOFF);
        self.skip = self.backoff;
    }
}

/// Leading `k` singular triplets of `m`, same conventions as [`svd`].
///
/// The starting block is the stored basis padded with fixed pseudo-random
/// columns, so the result depends only on `m`, `k` and the warm start.
pub fn leading_svd(m: &DenseMatrix, k: usize, warm: &mut WarmStart) -> Result<SvdFactors> {
    check_count(m, k)?;
    let f = if warm.cooling_down() {
        svd(m)?.truncate(k)
    } else {
        match subspace_iteration(m, k, warm.basis.as_ref(), -1.0)? {
            Some(f) => {
                warm.converged();
                f
            }
            None => {
                warm.failed();
                svd(m)?.truncate(k)
            }
        }
    };
    warm.store(&f, k);
    Ok(f)
}

fn check_count(m: &DenseMatrix, k: usize) -> Result<()> {
    let (rows, cols) = m.shape();
    if k == 0 || k > rows.min(cols) {
        return invalid(format!(
            "requested {k} singular triplets of a {rows}x{cols} matrix"
        ));
    }
    m.ensure_finite()
}

/// Leading `k` triplets, or `None` when the pairs with `σᵢ > floor` fail
/// the residual test within `MAX_SWEEPS` sweeps.
fn subspace_iteration(
    m: &DenseMatrix,
    k: usize,
    start: Option<&DMatrix<f64>>,
    floor: f64,
) -> Result<Option<SvdFactors>> {
    let (rows, cols) = m.shape();
    let min_dim = rows.min(cols);
    let block = (k + OVERSAMPLE).min(min_dim);
    if block as f64 > FULL_SHARE * min_dim as f64 {
        return Ok(Some(svd(m)?.truncate(k)));
    }
    let a = &m.0;
    let omega = starting_block(cols, block, start);
    let mut q = orthonormal(&(a * &omega));
    for _ in 0..MAX_SWEEPS {
        // Rayleigh–Ritz on range(Q): QᵀM = Ũ Σ Vᵀ, so Mᵀ(QŨ) = VΣ exactly.
        let small = svd(&DenseMatrix(q.transpose() * a))?;
        let top = small.singular_values[0];
        if top == 0.0 {
            return Ok(Some(svd(m)?.truncate(k)));
        }
        let u = &q * &small.u.0;
        let mv = a * &small.v.0;
        let worst = (0..k)
            .filter(|&i| small.singular_values[i] > floor)
            .map(|i| (mv.column(i) - u.column(i) * small.singular_values[i]).norm())
            .fold(0.0, f64::max);
        if worst <= RESIDUAL_TOL * top {
            let mut f = SvdFactors {
                u: DenseMatrix(u),
                singular_values: small.singular_values,
                v: small.v,
            }
            .truncate(k);
            f.fix_signs();
            return Ok(Some(f));
        }
        q = orthonormal(&mv);
    }
    Ok(None)
}

fn starting_block(cols: usize, block: usize, start: Option<&DMatrix<f64>>) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(((cols as u64) << 32) | block as u64);
    let mut omega = DMatrix::from_fn(cols, block, |_, _| StandardNormal.sample(&mut rng));
    if let Some(s) = start.filter(|s| s.nrows() == cols) {
        let keep = s.ncols().min(block);
        omega.columns_mut(0, keep).copy_from(&s.columns(0, keep));
    }
    omega
}

fn orthonormal(y: &DMatrix<f64>) -> DMatrix<f64> {
    y.clone().qr().q()
}

/// Best rank-`r` approximation via [`leading_svd`].
pub fn truncate_rank_warm(m: &DenseMatrix, r: usize, warm: &mut WarmStart) -> Result<DenseMatrix> {
    Ok(leading_svd(m, r, warm)?.reconstruct())
}

/// [`super::svt_detailed`] computing only the triplets above `lambda`.
///
/// Starts from one more triplet than the previous call kept and doubles the
/// count until the smallest computed singular value is at most `lambda`.
/// Only the triplets above `lambda` have to pass the residual test.
/// `shrunk_singular_values` lists the computed triplets only.
pub fn svt_warm(z: &DenseMatrix, lambda: f64, warm: &mut WarmStart) -> Result<SvtOutput> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return invalid(format!(
            "svt threshold must be finite and >= 0, got {lambda}"
        ));
    }
    z.ensure_finite()?;
    let min_dim = z.rows().min(z.cols());
    if min_dim == 0 {
        return Ok(SvtOutput {
            matrix: z.clone(),
            shrunk_singular_values: Vec::new(),
        });
    }
    let f = if warm.cooling_down() {
        svd(z)?
    } else {
        let mut k = (warm.active + 1).min(min_dim);
        let mut start = warm.basis.clone();
        loop {
            match subspace_iteration(z, k, start.as_ref(), lambda)? {
                None => {
                    warm.failed();
                    break svd(z)?;
                }
                Some(f) => {
                    let smallest = *f.singular_values.last().unwrap_or(&0.0);
                    if smallest <= lambda || k == min_dim {
                        warm.converged();
                        break f;
                    }
                    start = Some(f.v.0);
                    k = (2 * k).min(min_dim);
                }
            }
        }
    };
    let shrunk: Vec<f64> = f
        .singular_values
        .iter()
        .map(|&s| (s - lambda).max(0.0))
        .collect();
    let active = shrunk.iter().filter(|&&s| s > 0.0).count();
    warm.store(&f, active);
    Ok(SvtOutput {
        matrix: f.reconstruct_with(&shrunk),
        shrunk_singular_values: shrunk,
    })
}
