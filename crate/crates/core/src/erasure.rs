//! Coherent information under erasures only.
//!
//! For a fixed set of erased qubits the CI is `k - b - 2c` where `b` counts
//! logical qubits degraded to classical bits (one logical generator
//! unrecoverable) and `c` counts fully lost logical qubits. Averages over
//! erasure configurations are taken exactly for small `n` and by stratified
//! Monte Carlo over the erasure weight otherwise: the per-weight stratum mean
//! does not depend on the erasure probability, so one set of strata serves an
//! entire probability grid.

use crate::analysis::{CiCurve, CiPoint};
use crate::codes::CssCode;
use crate::gf2::{BitMatrix, BitVec};
use crate::par::map_indexed;
use crate::rng;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ErasureError {
    #[error("instance too large: {0}")]
    TooLarge(String),
}

/// A set of erased qubits.
#[derive(Debug, Clone)]
pub struct ErasureConfig {
    mask: BitVec,
    m: usize,
}

impl ErasureConfig {
    pub fn new(mask: BitVec) -> Self {
        let m = mask.popcount();
        Self { mask, m }
    }

    pub fn empty(n: usize) -> Self {
        Self::new(BitVec::zeros(n))
    }

    pub fn from_indices(n: usize, erased: &[usize]) -> Self {
        Self::new(BitVec::from_indices(n, erased))
    }

    pub fn mask(&self) -> &BitVec {
        &self.mask
    }

    pub fn erased_count(&self) -> usize {
        self.m
    }

    pub fn is_erased(&self, q: usize) -> bool {
        self.mask.get(q)
    }

    /// Indices of the surviving qubits, ascending.
    pub fn active(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&q| !self.mask.get(q)).collect()
    }
}

/// Recoverability analysis of one erasure configuration.
///
/// `vx`/`vz` are bases (rows in `GF(2)^k`) of the logical combinations whose
/// X/Z representatives survive off the erased set; `rep_x`/`rep_z` hold one
/// such representative per basis row, supported entirely on active qubits.
/// `sx`/`sz` are bases of the stabilizer sub-groups supported off the erased
/// set (the super-plaquette/super-star operators), in qubit space.
pub struct ErasureAnalysis {
    pub k_prime: usize,
    pub b: usize,
    pub c: usize,
    pub vx: BitMatrix,
    pub vz: BitMatrix,
    pub sx: BitMatrix,
    pub sz: BitMatrix,
    pub rep_x: BitMatrix,
    pub rep_z: BitMatrix,
}

/// Basis of `{v in GF(2)^k : (v . logicals) restricted to the erased columns
/// lies in the row space of h restricted to the erased columns}`.
///
/// Recoverability of a combination is a linear condition on `v`, so the whole
/// subgroup comes out of one elimination instead of `2^k` membership checks.
pub fn recoverable_subgroup(logicals: &BitMatrix, h: &BitMatrix, cfg: &ErasureConfig) -> BitMatrix {
    let k = logicals.rows();
    if cfg.m == 0 {
        return BitMatrix::identity(k);
    }
    let h_e = h.select_columns(cfg.mask());
    let l_e = logicals.select_columns(cfg.mask());
    let (red, pivots) = h_e.rref();
    // residual of each logical row after eliminating against h|_E
    let mut residuals = BitMatrix::zeros(0, cfg.m);
    for row in l_e.row_iter() {
        let mut r = row;
        for (i, &p) in pivots.iter().enumerate() {
            if r.get(p) {
                r.xor_assign(&red.row(i));
            }
        }
        residuals.push_row(&r);
    }
    // v . residuals = 0  <=>  residuals^T v^T = 0
    residuals.transpose().null_space()
}

fn well_defined_stabilizers(h: &BitMatrix, cfg: &ErasureConfig) -> BitMatrix {
    if h.rows() == 0 {
        return BitMatrix::zeros(0, cfg.mask().len());
    }
    if cfg.m == 0 {
        return h.clone();
    }
    let h_e = h.select_columns(cfg.mask());
    let alpha = h_e.transpose().null_space();
    let mut out = BitMatrix::zeros(0, cfg.mask().len());
    for row in alpha.row_iter() {
        out.push_row(&h.vec_mul(&row));
    }
    out
}

/// Representative of each recoverable combination, corrected to avoid the
/// erased qubits.
fn representatives(
    v: &BitMatrix,
    logicals: &BitMatrix,
    h: &BitMatrix,
    cfg: &ErasureConfig,
) -> BitMatrix {
    let n = logicals.cols();
    let mut out = BitMatrix::zeros(0, n);
    for row in v.row_iter() {
        let mut op = logicals.vec_mul(&row);
        if cfg.m > 0 && h.rows() > 0 {
            let op_e = BitVec::from_bools(&cfg.mask().iter_ones().map(|q| op.get(q)).collect::<Vec<_>>());
            if !op_e.is_zero() {
                let h_e = h.select_columns(cfg.mask());
                let alpha = h_e
                    .solve_left(&op_e)
                    .expect("recoverable combination must clean off the erased set");
                op.xor_assign(&h.vec_mul(&alpha));
            }
        }
        debug_assert!(cfg.mask().iter_ones().all(|q| !op.get(q)));
        out.push_row(&op);
    }
    out
}

/// Counts `(k', b, c)` only; cheaper than [`analyze`] when stabilizers and
/// representatives are not needed (pure-erasure CI).
pub fn erasure_counts(code: &CssCode, cfg: &ErasureConfig) -> (usize, usize, usize) {
    let vx = recoverable_subgroup(&code.lx, &code.hx, cfg);
    let vz = recoverable_subgroup(&code.lz, &code.hz, cfg);
    let k_prime = if vx.rows() == 0 || vz.rows() == 0 {
        0
    } else {
        vx.mul_transpose(&vz).rank()
    };
    let b = (vx.rows() - k_prime) + (vz.rows() - k_prime);
    let c = code.k - k_prime - b;
    (k_prime, b, c)
}

/// Full recoverability analysis of one erasure configuration.
pub fn analyze(code: &CssCode, cfg: &ErasureConfig) -> ErasureAnalysis {
    let vx = recoverable_subgroup(&code.lx, &code.hx, cfg);
    let vz = recoverable_subgroup(&code.lz, &code.hz, cfg);
    let k_prime = if vx.rows() == 0 || vz.rows() == 0 {
        0
    } else {
        vx.mul_transpose(&vz).rank()
    };
    let b = (vx.rows() - k_prime) + (vz.rows() - k_prime);
    let c = code.k - k_prime - b;
    let rep_x = representatives(&vx, &code.lx, &code.hx, cfg);
    let rep_z = representatives(&vz, &code.lz, &code.hz, cfg);
    ErasureAnalysis {
        k_prime,
        b,
        c,
        sx: well_defined_stabilizers(&code.hx, cfg),
        sz: well_defined_stabilizers(&code.hz, cfg),
        vx,
        vz,
        rep_x,
        rep_z,
    }
}

/// CI of a single erasure configuration, `k - b - 2c`, in units of log 2.
pub fn ci_single(code: &CssCode, cfg: &ErasureConfig) -> f64 {
    let (_, b, c) = erasure_counts(code, cfg);
    code.k as f64 - b as f64 - 2.0 * c as f64
}

/// Exact erasure average `sum_l e^m (1-e)^(n-m) I_l` over all `2^n`
/// configurations; gated at `n <= 20`.
pub fn exact_ci(code: &CssCode, e: f64) -> Result<f64, ErasureError> {
    let n = code.n;
    if n > 20 {
        return Err(ErasureError::TooLarge(format!(
            "exact erasure average enumerates 2^{n} configurations"
        )));
    }
    let total: f64 = map_indexed(1usize << n, |bits| {
        let mask = BitVec::from_word(n, bits as u64);
        let m = mask.popcount();
        let w = e.powi(m as i32) * (1.0 - e).powi((n - m) as i32);
        if w == 0.0 {
            return 0.0;
        }
        w * ci_single(code, &ErasureConfig::new(mask))
    })
    .into_iter()
    .sum();
    Ok(total)
}

/// ln of the binomial weight `C(n, m) e^m (1-e)^(n-m)`, with the `e = 0, 1`
/// edge cases resolved by convention `0^0 = 1`.
fn binom_weight(n: usize, m: usize, e: f64, ln_fact: &[f64]) -> f64 {
    if e == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    if e == 1.0 {
        return if m == n { 1.0 } else { 0.0 };
    }
    let ln_c = ln_fact[n] - ln_fact[m] - ln_fact[n - m];
    (ln_c + m as f64 * e.ln() + (n - m) as f64 * (1.0 - e).ln()).exp()
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n + 1];
    for i in 1..=n {
        v[i] = v[i - 1] + (i as f64).ln();
    }
    v
}

/// Samples a uniform weight-`m` mask by partial Fisher-Yates selection.
pub(crate) fn sample_weight_mask<R: Rng>(n: usize, m: usize, rng: &mut R) -> BitVec {
    let mut idx: Vec<u32> = (0..n as u32).collect();
    for i in 0..m {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
    }
    BitVec::from_indices(n, &idx[..m].iter().map(|&i| i as usize).collect::<Vec<_>>())
}

/// Per-weight stratum statistics of the erasure CI.
pub struct Strata {
    pub n: usize,
    pub k: f64,
    /// mean CI per stratum, index = erased count
    pub mean: Vec<f64>,
    /// variance of the stratum mean estimate (0 for exact strata)
    pub var_of_mean: Vec<f64>,
}

impl Strata {
    /// `I(e) = sum_m C(n,m) e^m (1-e)^(n-m) mean_m` with the standard error
    /// propagated from the independent stratum estimates.
    pub fn evaluate(&self, e: f64) -> (f64, f64) {
        let ln_fact = ln_factorials(self.n);
        let mut ci = 0.0;
        let mut var = 0.0;
        for m in 0..=self.n {
            let w = binom_weight(self.n, m, e, &ln_fact);
            ci += w * self.mean[m];
            var += w * w * self.var_of_mean[m];
        }
        (ci, var.sqrt())
    }
}

/// Estimates the per-weight stratum means of the erasure-only CI.
///
/// Strata with `m < declared_distance` are exactly `k` (erasing fewer than
/// `d` qubits cannot measure a logical operator); strata with at most
/// `samples` configurations are enumerated exactly; the rest are sampled
/// uniformly over weight-`m` masks with one seeded stream per sample.
pub fn stratified_strata(code: &CssCode, samples: usize, seed: u64) -> Strata {
    assert!(samples >= 1, "need at least one sample per stratum");
    let n = code.n;
    let ln_fact = ln_factorials(n);
    let mut mean = vec![0.0; n + 1];
    let mut var_of_mean = vec![0.0; n + 1];
    for m in 0..=n {
        if m < code.declared_distance {
            mean[m] = code.k as f64;
            continue;
        }
        let ln_count = ln_fact[n] - ln_fact[m] - ln_fact[n - m];
        let exact = ln_count <= (samples as f64).ln();
        if exact {
            let masks = enumerate_weight_masks(n, m);
            let vals = map_indexed(masks.len(), |i| {
                ci_single(code, &ErasureConfig::new(masks[i].clone()))
            });
            mean[m] = vals.iter().sum::<f64>() / vals.len() as f64;
        } else {
            let vals = map_indexed(samples, |i| {
                let mut rng = rng::stream(seed, &[m as u64, i as u64]);
                let mask = sample_weight_mask(n, m, &mut rng);
                ci_single(code, &ErasureConfig::new(mask))
            });
            let mu = vals.iter().sum::<f64>() / samples as f64;
            let ss: f64 = vals.iter().map(|v| (v - mu) * (v - mu)).sum();
            mean[m] = mu;
            if samples > 1 {
                var_of_mean[m] = ss / (samples as f64 - 1.0) / samples as f64;
            }
        }
    }
    Strata {
        n,
        k: code.k as f64,
        mean,
        var_of_mean,
    }
}

fn enumerate_weight_masks(n: usize, m: usize) -> Vec<BitVec> {
    let mut out = Vec::new();
    let mut comb: Vec<usize> = (0..m).collect();
    loop {
        out.push(BitVec::from_indices(n, &comb));
        // next combination in lexicographic order
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if comb[i] != i + n - m {
                break;
            }
        }
        comb[i] += 1;
        for j in i + 1..m {
            comb[j] = comb[j - 1] + 1;
        }
    }
}

/// Stratified Monte Carlo estimate of the erasure-only CI over a probability
/// grid. The strata are computed once and reused for every grid point.
pub fn stratified_ci(code: &CssCode, e_grid: &[f64], samples: usize, seed: u64) -> CiCurve {
    let strata = stratified_strata(code, samples, seed);
    let points = e_grid
        .iter()
        .map(|&e| {
            let (ci, stderr) = strata.evaluate(e);
            CiPoint { x: e, ci, stderr }
        })
        .collect();
    CiCurve {
        label: code.name.clone(),
        distance: code.declared_distance,
        k: code.k,
        points,
    }
}
