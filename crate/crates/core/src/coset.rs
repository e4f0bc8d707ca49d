//! Exact coherent information under Pauli noise via coset probability tables.
//!
//! Errors are binned by (syndrome, logical class); the CI of the noisy state
//! is `base - H(class | syndrome)` in bits, with `base = k` when nothing is
//! erased and `base = k - b - 2c` for a fixed erasure configuration. The
//! enumerations record integer weight histograms, so one pass over the error
//! patterns serves an entire probability grid exactly.
//!
//! Class-bit ordering: commutation bits against the X-logical representatives
//! occupy the low bits, Z-logical bits follow, each in the basis order of the
//! erasure analysis. Syndrome bits likewise put the Z-type checks (detecting
//! X errors) low.

use crate::analysis::{CiCurve, CiPoint};
use crate::codes::CssCode;
use crate::erasure::{self, ErasureAnalysis, ErasureConfig};
use crate::gf2::{BitMatrix, BitVec};
use crate::noise::{ChannelKind, NoiseSpec, PauliChannel};
use crate::par::{map_indexed, split_ranges, task_count};
use crate::rng;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CosetError {
    #[error("instance too large: {0}")]
    TooLarge(String),
}

/// Probability mass per (syndrome, logical class).
#[derive(Debug, Clone)]
pub struct CosetTable {
    pub syndrome_bits: usize,
    pub class_bits: usize,
    pub table: BTreeMap<u64, Vec<f64>>,
}

impl CosetTable {
    pub fn total_mass(&self) -> f64 {
        self.table.values().flatten().sum()
    }

    /// Conditional Shannon entropy H(class | syndrome) in bits. Zero-mass
    /// cells contribute nothing; zero-mass syndromes are skipped.
    pub fn cond_entropy(&self) -> f64 {
        let mut h = 0.0;
        for masses in self.table.values() {
            let tot: f64 = masses.iter().sum();
            if tot <= 0.0 {
                continue;
            }
            for &m in masses {
                if m > 0.0 {
                    h -= m * (m.log2());
                }
            }
            h += tot * tot.log2();
        }
        h
    }
}

/// `base - H(class | syndrome)`.
pub fn ci_from_table(t: &CosetTable, base: f64) -> f64 {
    base - t.cond_entropy()
}

fn row_masks(m: &BitMatrix) -> Vec<u64> {
    (0..m.rows()).map(|r| m.row_mask(r)).collect()
}

/// Per-pattern integer histogram over (syndrome, class, weight) for one error
/// sector: X-type errors scored against Z-type checks and Z-logical
/// representatives (or the mirror image).
pub struct SectorHist {
    pub syn_bits: usize,
    pub cls_bits: usize,
    pub m: usize,
    counts: Vec<u32>,
}

impl SectorHist {
    /// Enumerates all `2^m` patterns on the active qubits by a Gray-code walk.
    pub fn build(h: &BitMatrix, l: &BitMatrix, active: &[usize]) -> Result<Self, CosetError> {
        let m = active.len();
        if m > 26 {
            return Err(CosetError::TooLarge(format!(
                "sector enumeration over 2^{m} patterns"
            )));
        }
        let syn_bits = h.rows();
        let cls_bits = l.rows();
        if syn_bits + cls_bits > 26 {
            return Err(CosetError::TooLarge(format!(
                "sector histogram with {} label bits",
                syn_bits + cls_bits
            )));
        }
        let hrows = row_masks(h);
        let lrows = row_masks(l);
        // label delta when the error flips active qubit j
        let delta: Vec<u32> = (0..m)
            .map(|j| {
                let q = active[j];
                let mut d = 0u32;
                for (i, &row) in hrows.iter().enumerate() {
                    d |= (((row >> q) & 1) as u32) << i;
                }
                for (i, &row) in lrows.iter().enumerate() {
                    d |= (((row >> q) & 1) as u32) << (syn_bits + i);
                }
                d
            })
            .collect();
        let cells = 1usize << (syn_bits + cls_bits);
        let total = 1u64 << m;
        let ranges = split_ranges(total, task_count() * 4);
        let partials = map_indexed(ranges.len(), |t| {
            let range = ranges[t].clone();
            let mut counts = vec![0u32; cells * (m + 1)];
            // state at the Gray code of the range start
            let start = range.start ^ (range.start >> 1);
            let mut label = 0u32;
            let mut w = 0i32;
            for j in 0..m {
                if (start >> j) & 1 == 1 {
                    label ^= delta[j];
                    w += 1;
                }
            }
            counts[label as usize * (m + 1) + w as usize] += 1;
            for i in range.start + 1..range.end {
                let j = i.trailing_zeros() as usize;
                let was = ((i ^ (i >> 1)) >> j) & 1; // bit value after the flip
                label ^= delta[j];
                w += if was == 1 { 1 } else { -1 };
                counts[label as usize * (m + 1) + w as usize] += 1;
            }
            counts
        });
        let mut counts = vec![0u32; cells * (m + 1)];
        for p in partials {
            for (a, b) in counts.iter_mut().zip(p) {
                *a += b;
            }
        }
        Ok(Self {
            syn_bits,
            cls_bits,
            m,
            counts,
        })
    }

    /// H(class | syndrome) for i.i.d. flip probability `p`.
    pub fn cond_entropy(&self, p: f64) -> f64 {
        let pw = weight_probs(p, self.m);
        cond_entropy_from_counts(&self.counts, self.syn_bits, self.cls_bits, self.m, &pw)
    }

    pub fn to_table(&self, p: f64) -> CosetTable {
        let pw = weight_probs(p, self.m);
        table_from_counts(&self.counts, self.syn_bits, self.cls_bits, self.m, &pw)
    }
}

/// `p^w (1-p)^(m-w)` for all weights.
fn weight_probs(p: f64, m: usize) -> Vec<f64> {
    (0..=m)
        .map(|w| p.powi(w as i32) * (1.0 - p).powi((m - w) as i32))
        .collect()
}

// label layout in the histograms: syndrome bits low, class bits above them
fn cond_entropy_from_counts(
    counts: &[u32],
    syn_bits: usize,
    cls_bits: usize,
    m: usize,
    pw: &[f64],
) -> f64 {
    let mut h = 0.0;
    let classes = 1usize << cls_bits;
    for s in 0..1usize << syn_bits {
        let mut tot = 0.0;
        let mut acc = 0.0;
        for c in 0..classes {
            let base = ((c << syn_bits) | s) * (m + 1);
            let mut mass = 0.0;
            for w in 0..=m {
                let n = counts[base + w];
                if n != 0 {
                    mass += n as f64 * pw[w];
                }
            }
            if mass > 0.0 {
                tot += mass;
                acc -= mass * mass.log2();
            }
        }
        if tot > 0.0 {
            h += acc + tot * tot.log2();
        }
    }
    h
}

fn table_from_counts(
    counts: &[u32],
    syn_bits: usize,
    cls_bits: usize,
    m: usize,
    pw: &[f64],
) -> CosetTable {
    let classes = 1usize << cls_bits;
    let mut table = BTreeMap::new();
    for s in 0..1u64 << syn_bits {
        let mut masses = vec![0.0; classes];
        let mut any = false;
        for (c, out) in masses.iter_mut().enumerate() {
            let base = ((c << syn_bits) | s as usize) * (m + 1);
            for w in 0..=m {
                let n = counts[base + w];
                if n != 0 {
                    *out += n as f64 * pw[w];
                    any = true;
                }
            }
        }
        if any {
            table.insert(s, masses);
        }
    }
    CosetTable {
        syndrome_bits: syn_bits,
        class_bits: cls_bits,
        table,
    }
}

/// Sector coset table for i.i.d. flips at `p` on the unmasked qubits.
pub fn build_sector_table(
    h: &BitMatrix,
    l: &BitMatrix,
    p: f64,
    active_mask: &BitVec,
) -> Result<CosetTable, CosetError> {
    let active: Vec<usize> = active_mask.iter_ones().collect();
    Ok(SectorHist::build(h, l, &active)?.to_table(p))
}

/// Joint (X,Z) histogram over total non-identity weight; exact for the
/// depolarizing channel where every Pauli carries probability `p/3`.
pub struct JointHist {
    pub syn_bits: usize,
    pub cls_bits: usize,
    pub m: usize,
    counts: Vec<u32>,
}

impl JointHist {
    /// `sz`/`sx`: checks detecting X / Z errors; `clz`/`clx`: Z- / X-logical
    /// representatives labelling X / Z error classes.
    pub fn build(
        sz: &BitMatrix,
        sx: &BitMatrix,
        clz: &BitMatrix,
        clx: &BitMatrix,
        active: &[usize],
    ) -> Result<Self, CosetError> {
        let m = active.len();
        let syn_bits = sz.rows() + sx.rows();
        let cls_bits = clx.rows() + clz.rows();
        if m > 15 {
            return Err(CosetError::TooLarge(format!(
                "joint enumeration over 4^{m} patterns"
            )));
        }
        if syn_bits + cls_bits > 21 {
            return Err(CosetError::TooLarge(format!(
                "joint histogram with {} label bits",
                syn_bits + cls_bits
            )));
        }
        let (nsz, nclx) = (sz.rows(), clx.rows());
        let szm = row_masks(sz);
        let sxm = row_masks(sx);
        let clzm = row_masks(clz);
        let clxm = row_masks(clx);
        // label = syndrome | class << syn_bits,
        // syndrome = sz-part | sx-part << nsz, class = clx-part | clz-part << nclx
        let label_bits = syn_bits + cls_bits;
        let dx: Vec<u32> = (0..m)
            .map(|j| {
                let q = active[j];
                let mut d = 0u32;
                for (i, &row) in szm.iter().enumerate() {
                    d |= (((row >> q) & 1) as u32) << i;
                }
                for (i, &row) in clzm.iter().enumerate() {
                    d |= (((row >> q) & 1) as u32) << (syn_bits + nclx + i);
                }
                d
            })
            .collect();
        let dz: Vec<u32> = (0..m)
            .map(|j| {
                let q = active[j];
                let mut d = 0u32;
                for (i, &row) in sxm.iter().enumerate() {
                    d |= (((row >> q) & 1) as u32) << (nsz + i);
                }
                for (i, &row) in clxm.iter().enumerate() {
                    d |= (((row >> q) & 1) as u32) << (syn_bits + i);
                }
                d
            })
            .collect();
        let cells = 1usize << label_bits;
        let outer = 1u64 << m;
        let ranges = split_ranges(outer, task_count());
        let partials = map_indexed(ranges.len(), |t| {
            let range = ranges[t].clone();
            let mut counts = vec![0u32; cells * (m + 1)];
            for ex in range {
                let mut xlabel = 0u32;
                let mut wx = 0u32;
                for j in 0..m {
                    if (ex >> j) & 1 == 1 {
                        xlabel ^= dx[j];
                        wx += 1;
                    }
                }
                // Gray walk over the Z pattern
                let mut label = xlabel;
                let mut w = wx as i32;
                counts[label as usize * (m + 1) + w as usize] += 1;
                for i in 1u64..1 << m {
                    let j = i.trailing_zeros() as usize;
                    let now_set = ((i ^ (i >> 1)) >> j) & 1 == 1;
                    label ^= dz[j];
                    if (ex >> j) & 1 == 0 {
                        w += if now_set { 1 } else { -1 };
                    }
                    counts[label as usize * (m + 1) + w as usize] += 1;
                }
            }
            counts
        });
        let mut counts = vec![0u32; cells * (m + 1)];
        for p in partials {
            for (a, b) in counts.iter_mut().zip(p) {
                *a += b;
            }
        }
        Ok(Self {
            syn_bits,
            cls_bits,
            m,
            counts,
        })
    }

    /// H(class | syndrome) for depolarizing rate `p` (each Pauli at `p/3`).
    pub fn cond_entropy(&self, p: f64) -> f64 {
        let pw: Vec<f64> = (0..=self.m)
            .map(|w| (p / 3.0).powi(w as i32) * (1.0 - p).powi((self.m - w) as i32))
            .collect();
        cond_entropy_from_counts(&self.counts, self.syn_bits, self.cls_bits, self.m, &pw)
    }

    pub fn to_table(&self, p: f64) -> CosetTable {
        let pw: Vec<f64> = (0..=self.m)
            .map(|w| (p / 3.0).powi(w as i32) * (1.0 - p).powi((self.m - w) as i32))
            .collect();
        table_from_counts(&self.counts, self.syn_bits, self.cls_bits, self.m, &pw)
    }
}

/// Joint coset table for a general Pauli channel by direct (non-histogram)
/// accumulation; gated tighter than the depolarizing path.
pub fn build_joint_table(
    sz: &BitMatrix,
    sx: &BitMatrix,
    clz: &BitMatrix,
    clx: &BitMatrix,
    channel: &PauliChannel,
    active_mask: &BitVec,
) -> Result<CosetTable, CosetError> {
    let active: Vec<usize> = active_mask.iter_ones().collect();
    if let ChannelKind::Depolarizing { p } = channel.kind {
        return Ok(JointHist::build(sz, sx, clz, clx, &active)?.to_table(p));
    }
    let m = active.len();
    if m > 12 {
        return Err(CosetError::TooLarge(format!(
            "general-channel joint enumeration over 4^{m} patterns"
        )));
    }
    let (nsz, nclx) = (sz.rows(), clx.rows());
    let syn_bits = nsz + sx.rows();
    let cls_bits = nclx + clz.rows();
    let szm = row_masks(sz);
    let sxm = row_masks(sx);
    let clzm = row_masks(clz);
    let clxm = row_masks(clx);
    let pi = channel.p_identity();
    let mut acc: Vec<f64> = vec![0.0; 1 << (syn_bits + cls_bits)];
    for ex in 0u64..1 << m {
        for ez in 0u64..1 << m {
            let mut prob = 1.0;
            for j in 0..m {
                let xb = (ex >> j) & 1 == 1;
                let zb = (ez >> j) & 1 == 1;
                prob *= match (xb, zb) {
                    (false, false) => pi,
                    (true, false) => channel.p_x,
                    (false, true) => channel.p_z,
                    (true, true) => channel.p_y,
                };
            }
            let mut label = 0u64;
            for (i, &row) in szm.iter().enumerate() {
                label |= (mask_parity(row, &active, ex) as u64) << i;
            }
            for (i, &row) in sxm.iter().enumerate() {
                label |= (mask_parity(row, &active, ez) as u64) << (nsz + i);
            }
            for (i, &row) in clxm.iter().enumerate() {
                label |= (mask_parity(row, &active, ez) as u64) << (syn_bits + i);
            }
            for (i, &row) in clzm.iter().enumerate() {
                label |= (mask_parity(row, &active, ex) as u64) << (syn_bits + nclx + i);
            }
            acc[label as usize] += prob;
        }
    }
    let mut table = BTreeMap::new();
    for s in 0..1u64 << syn_bits {
        let masses: Vec<f64> = (0..1usize << cls_bits)
            .map(|c| acc[((c as u64) << syn_bits | s) as usize])
            .collect();
        if masses.iter().any(|&x| x > 0.0) {
            table.insert(s, masses);
        }
    }
    Ok(CosetTable {
        syndrome_bits: syn_bits,
        class_bits: cls_bits,
        table,
    })
}

fn mask_parity(row: u64, active: &[usize], pattern: u64) -> u32 {
    let mut acc = 0u32;
    for (j, &q) in active.iter().enumerate() {
        acc ^= ((row >> q) & (pattern >> j) & 1) as u32;
    }
    acc
}

fn gate_word_width(code: &CssCode) -> Result<(), CosetError> {
    if code.n > 64 {
        return Err(CosetError::TooLarge(format!(
            "coset evaluators need n <= 64, got {}",
            code.n
        )));
    }
    Ok(())
}

/// Exact CI (in units of log 2) of `code` under `channel` with no erasures.
pub fn pauli_ci(code: &CssCode, channel: &PauliChannel) -> Result<f64, CosetError> {
    gate_word_width(code)?;
    let active: Vec<usize> = (0..code.n).collect();
    match channel.kind {
        ChannelKind::BitPhaseFlip { p1, p2 } => {
            let hx_sector = SectorHist::build(&code.hz, &code.lz, &active)?;
            let hz_sector = SectorHist::build(&code.hx, &code.lx, &active)?;
            Ok(code.k as f64 - hx_sector.cond_entropy(p1) - hz_sector.cond_entropy(p2))
        }
        ChannelKind::Depolarizing { p } => {
            let hist = JointHist::build(&code.hz, &code.hx, &code.lz, &code.lx, &active)?;
            Ok(code.k as f64 - hist.cond_entropy(p))
        }
        ChannelKind::General => {
            let t = build_joint_table(
                &code.hz,
                &code.hx,
                &code.lz,
                &code.lx,
                channel,
                &BitVec::ones(code.n),
            )?;
            Ok(ci_from_table(&t, code.k as f64))
        }
    }
}

/// Exact CI for one erasure configuration combined with a Pauli channel:
/// `(k - b - 2c) - H(class | syndrome)` over the active qubits, using the
/// well-defined stabilizers and logical representatives.
pub fn combined_ci_single(
    code: &CssCode,
    cfg: &ErasureConfig,
    channel: &PauliChannel,
) -> Result<f64, CosetError> {
    gate_word_width(code)?;
    let an = erasure::analyze(code, cfg);
    combined_ci_single_with(code, cfg, channel, &an)
}

/// Same as [`combined_ci_single`] reusing a precomputed analysis.
pub fn combined_ci_single_with(
    code: &CssCode,
    cfg: &ErasureConfig,
    channel: &PauliChannel,
    an: &ErasureAnalysis,
) -> Result<f64, CosetError> {
    let base = code.k as f64 - an.b as f64 - 2.0 * an.c as f64;
    let active = cfg.active();
    match channel.kind {
        ChannelKind::BitPhaseFlip { p1, p2 } => {
            let hx_sector = SectorHist::build(&an.sz, &an.rep_z, &active)?;
            let hz_sector = SectorHist::build(&an.sx, &an.rep_x, &active)?;
            Ok(base - hx_sector.cond_entropy(p1) - hz_sector.cond_entropy(p2))
        }
        ChannelKind::Depolarizing { p } => {
            let hist = JointHist::build(&an.sz, &an.sx, &an.rep_z, &an.rep_x, &active)?;
            Ok(base - hist.cond_entropy(p))
        }
        ChannelKind::General => {
            let mask = BitVec::from_indices(code.n, &active);
            let t = build_joint_table(&an.sz, &an.sx, &an.rep_z, &an.rep_x, channel, &mask)?;
            Ok(ci_from_table(&t, base))
        }
    }
}

fn exact_erasure_feasible(code: &CssCode, kind: &ChannelKind) -> bool {
    match kind {
        // sum over masks of 2 * 2^(n - m) = 2 * 3^n sector patterns
        ChannelKind::BitPhaseFlip { .. } => code.n <= 18,
        // 5^n joint patterns
        ChannelKind::Depolarizing { .. } => code.n <= 12,
        ChannelKind::General => code.n <= 10,
    }
}

/// CI under combined erasure + Pauli noise.
///
/// Uses the exact `2^n` erasure enumeration when feasible (stderr 0);
/// otherwise stratifies over the erasure weight, sampling `samples` masks per
/// stratum and evaluating each mask exactly.
pub fn combined_ci(
    code: &CssCode,
    spec: &NoiseSpec,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64), CosetError> {
    gate_word_width(code)?;
    let e = spec.erasure;
    if e == 0.0 {
        return Ok((pauli_ci(code, &spec.channel)?, 0.0));
    }
    let n = code.n;
    if exact_erasure_feasible(code, &spec.channel.kind) {
        let vals = map_indexed(1usize << n, |bits| {
            let mask = BitVec::from_word(n, bits as u64);
            let m = mask.popcount();
            let w = e.powi(m as i32) * (1.0 - e).powi((n - m) as i32);
            if w == 0.0 {
                return Ok(0.0);
            }
            Ok(w * combined_ci_single(code, &ErasureConfig::new(mask), &spec.channel)?)
        });
        let mut total = 0.0;
        for v in vals {
            total += v?;
        }
        return Ok((total, 0.0));
    }
    let strata = combined_strata(code, &spec.channel, samples, seed)?;
    Ok(strata.evaluate(e))
}

/// Per-erasure-weight strata of the combined CI (each mask evaluated exactly
/// in the Pauli part). Strata small enough to enumerate are exact.
pub struct CombinedStrata {
    inner: erasure::Strata,
}

impl CombinedStrata {
    pub fn evaluate(&self, e: f64) -> (f64, f64) {
        self.inner.evaluate(e)
    }
}

pub fn combined_strata(
    code: &CssCode,
    channel: &PauliChannel,
    samples: usize,
    seed: u64,
) -> Result<CombinedStrata, CosetError> {
    assert!(samples >= 1);
    let n = code.n;
    let mut mean = vec![0.0; n + 1];
    let mut var_of_mean = vec![0.0; n + 1];
    let ln_fact: Vec<f64> = {
        let mut v = vec![0.0; n + 1];
        for i in 1..=n {
            v[i] = v[i - 1] + (i as f64).ln();
        }
        v
    };
    for m in 0..=n {
        let ln_count = ln_fact[n] - ln_fact[m] - ln_fact[n - m];
        if ln_count <= (samples as f64).ln() {
            let masks = all_weight_masks(n, m);
            let vals = map_indexed(masks.len(), |i| {
                combined_ci_single(code, &ErasureConfig::new(masks[i].clone()), channel)
            });
            let mut sum = 0.0;
            for v in vals {
                sum += v?;
            }
            mean[m] = sum / binomial(n, m) as f64;
        } else {
            let vals = map_indexed(samples, |i| {
                let mut r = rng::stream(seed, &[0x636f6d62, m as u64, i as u64]);
                let mask = erasure::sample_weight_mask(n, m, &mut r);
                combined_ci_single(code, &ErasureConfig::new(mask), channel)
            });
            let mut ok = Vec::with_capacity(samples);
            for v in vals {
                ok.push(v?);
            }
            let mu = ok.iter().sum::<f64>() / samples as f64;
            let ss: f64 = ok.iter().map(|v| (v - mu) * (v - mu)).sum();
            mean[m] = mu;
            if samples > 1 {
                var_of_mean[m] = ss / (samples as f64 - 1.0) / samples as f64;
            }
        }
    }
    Ok(CombinedStrata {
        inner: erasure::Strata {
            n,
            k: code.k as f64,
            mean,
            var_of_mean,
        },
    })
}

fn binomial(n: usize, m: usize) -> u64 {
    let mut acc = 1u64;
    for i in 0..m.min(n - m) {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

fn all_weight_masks(n: usize, m: usize) -> Vec<BitVec> {
    let mut out = Vec::new();
    let mut comb: Vec<usize> = (0..m).collect();
    loop {
        out.push(BitVec::from_indices(n, &comb));
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

/// Exact CI curves over a probability grid for a list of erasure rates.
///
/// Enumerates every erasure configuration once, grouped by weight, computes
/// per-configuration weight histograms, and evaluates the whole grid from
/// them, so the cost is one enumeration regardless of grid size.
pub fn scan_combined_exact(
    code: &CssCode,
    kind: &ChannelKind,
    p_grid: &[f64],
    e_values: &[f64],
) -> Result<Vec<CiCurve>, CosetError> {
    gate_word_width(code)?;
    if !exact_erasure_feasible(code, kind) && e_values.iter().any(|&e| e > 0.0) {
        return Err(CosetError::TooLarge(format!(
            "exact erasure scan infeasible for {} under this channel",
            code.name
        )));
    }
    let n = code.n;
    let needs_erasure = e_values.iter().any(|&e| e > 0.0);
    let nmasks = if needs_erasure { 1usize << n } else { 1 };
    // per-weight sums of CI(p) over all masks of that weight
    let partial = map_indexed(nmasks, |bits| -> Result<(usize, Vec<f64>), CosetError> {
        let mask = BitVec::from_word(n, bits as u64);
        let m = mask.popcount();
        let cfg = ErasureConfig::new(mask);
        let an = erasure::analyze(code, &cfg);
        let base = code.k as f64 - an.b as f64 - 2.0 * an.c as f64;
        let active = cfg.active();
        let cis = match kind {
            ChannelKind::BitPhaseFlip { .. } => {
                let hx_sector = SectorHist::build(&an.sz, &an.rep_z, &active)?;
                let hz_sector = SectorHist::build(&an.sx, &an.rep_x, &active)?;
                p_grid
                    .iter()
                    .map(|&p| base - hx_sector.cond_entropy(p) - hz_sector.cond_entropy(p))
                    .collect::<Vec<f64>>()
            }
            ChannelKind::Depolarizing { .. } => {
                let hist = JointHist::build(&an.sz, &an.sx, &an.rep_z, &an.rep_x, &active)?;
                p_grid.iter().map(|&p| base - hist.cond_entropy(p)).collect()
            }
            ChannelKind::General => {
                return Err(CosetError::TooLarge(
                    "grid scan supports bit/phase-flip and depolarizing channels".into(),
                ))
            }
        };
        Ok((m, cis))
    });
    let mut sums: Vec<Vec<f64>> = vec![vec![0.0; p_grid.len()]; n + 1];
    for item in partial {
        let (m, cis) = item?;
        for (a, b) in sums[m].iter_mut().zip(cis) {
            *a += b;
        }
    }
    let curves = e_values
        .iter()
        .map(|&e| {
            let points = p_grid
                .iter()
                .enumerate()
                .map(|(ip, &p)| {
                    let mut ci = 0.0;
                    if needs_erasure {
                        for (m, sum) in sums.iter().enumerate() {
                            let w = e.powi(m as i32) * (1.0 - e).powi((n - m) as i32);
                            if w > 0.0 {
                                ci += w * sum[ip];
                            }
                        }
                    } else {
                        ci = sums[0][ip];
                    }
                    CiPoint {
                        x: p,
                        ci,
                        stderr: 0.0,
                    }
                })
                .collect();
            CiCurve {
                label: format!("{} e={e}", code.name),
                distance: code.declared_distance,
                k: code.k,
                points,
            }
        })
        .collect();
    Ok(curves)
}

/// `log2 [ p(s_C) / p(s_C, class_C) ]` for one explicit error, computed by
/// enumerating only the errors sharing its syndrome (the kernel of the
/// syndrome map shifted by the error). Independent of the partition-function
/// route: it never touches the spin models.
pub fn coset_log_ratio(
    code: &CssCode,
    cfg: &ErasureConfig,
    an: &ErasureAnalysis,
    channel: &PauliChannel,
    ex: &BitVec,
    ez: &BitVec,
) -> Result<f64, CosetError> {
    gate_word_width(code)?;
    let active = cfg.active();
    let m = active.len();
    // syndrome map rows over (ux | uz) in GF(2)^(2m)
    let mut stack = BitMatrix::zeros(0, 2 * m);
    for row in an.sz.row_iter() {
        let mut r = BitVec::zeros(2 * m);
        for (j, &q) in active.iter().enumerate() {
            if row.get(q) {
                r.set(j, true);
            }
        }
        stack.push_row(&r);
    }
    for row in an.sx.row_iter() {
        let mut r = BitVec::zeros(2 * m);
        for (j, &q) in active.iter().enumerate() {
            if row.get(q) {
                r.set(m + j, true);
            }
        }
        stack.push_row(&r);
    }
    let kernel = stack.null_space();
    let dim = kernel.rows();
    if dim > 26 {
        return Err(CosetError::TooLarge(format!(
            "syndrome slice has 2^{dim} elements"
        )));
    }
    // kernel basis as active-space word pairs plus their class-label deltas
    let nclx = an.rep_x.rows();
    let to_words = |r: &BitVec| -> (u64, u64) {
        let mut ux = 0u64;
        let mut uz = 0u64;
        for j in 0..m {
            if r.get(j) {
                ux |= 1 << j;
            }
            if r.get(m + j) {
                uz |= 1 << j;
            }
        }
        (ux, uz)
    };
    let class_of = |ux: u64, uz: u64| -> u32 {
        let mut c = 0u32;
        for (i, row) in an.rep_x.row_iter().enumerate() {
            c |= mask_parity_active(&row, &active, uz) << i;
        }
        for (i, row) in an.rep_z.row_iter().enumerate() {
            c |= mask_parity_active(&row, &active, ux) << (nclx + i);
        }
        c
    };
    let basis: Vec<(u64, u64, u32)> = kernel
        .row_iter()
        .map(|r| {
            let (ux, uz) = to_words(&r);
            (ux, uz, class_of(ux, uz))
        })
        .collect();
    // error restricted to the active qubits
    let mut ex0 = 0u64;
    let mut ez0 = 0u64;
    for (j, &q) in active.iter().enumerate() {
        if ex.get(q) {
            ex0 |= 1 << j;
        }
        if ez.get(q) {
            ez0 |= 1 << j;
        }
    }
    let cls0 = class_of(ex0, ez0);
    let pi = channel.p_identity();
    let lp = [pi.ln(), channel.p_x.ln(), channel.p_z.ln(), channel.p_y.ln()];
    let n_cls = 1usize << (nclx + an.rep_z.rows());
    let mut masses = vec![0.0f64; n_cls];
    let mut max_logp = f64::NEG_INFINITY;
    let mut logps: Vec<(usize, f64)> = Vec::with_capacity(1 << dim);
    let (mut ux, mut uz, mut cls) = (ex0, ez0, cls0);
    let logp_of = |ux: u64, uz: u64| -> f64 {
        let wy = (ux & uz).count_ones() as f64;
        let wx = (ux & !uz).count_ones() as f64;
        let wz = (uz & !ux).count_ones() as f64;
        let wi = m as f64 - wx - wy - wz;
        wi * lp[0] + wx * lp[1] + wz * lp[2] + wy * lp[3]
    };
    let lp0 = logp_of(ux, uz);
    logps.push((cls as usize, lp0));
    max_logp = max_logp.max(lp0);
    for i in 1u64..1 << dim {
        let j = i.trailing_zeros() as usize;
        ux ^= basis[j].0;
        uz ^= basis[j].1;
        cls ^= basis[j].2;
        let l = logp_of(ux, uz);
        logps.push((cls as usize, l));
        max_logp = max_logp.max(l);
    }
    for (c, l) in logps {
        masses[c] += (l - max_logp).exp();
    }
    let total: f64 = masses.iter().sum();
    Ok((total / masses[cls0 as usize]).log2())
}

fn mask_parity_active(row: &BitVec, active: &[usize], pattern: u64) -> u32 {
    let mut acc = 0u32;
    for (j, &q) in active.iter().enumerate() {
        if (pattern >> j) & 1 == 1 && row.get(q) {
            acc ^= 1;
        }
    }
    acc
}
