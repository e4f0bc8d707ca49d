//! Disordered spin models attached to a CSS code and the partition-function
//! route to the coherent information.
//!
//! One classical spin per independent stabilizer generator per sector. Each
//! qubit contributes the term
//! `eta_x (J_x - J_1/2) P_x/2 + eta_z (J_z - J_1/2) P_z/2 + eta_x eta_z J_1 P_x P_z / 4`
//! where `P_x` is the product of the X-check spins containing the qubit (and
//! likewise `P_z`). Erased qubits carry `eta = 0` and drop out as missing
//! links. Inserting a logical operator flips `eta` along one representative;
//! because spins sit on independent generators only, the partition sums equal
//! coset probability sums exactly, which the coset module cross-checks.

use crate::codes::CssCode;
use crate::erasure::{self, ErasureAnalysis, ErasureConfig};
use crate::gf2::BitVec;
use crate::noise::{ChannelKind, Couplings, NoiseError, NoiseSpec, PauliChannel};
use crate::par::map_indexed;
use crate::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatmechError {
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// Spin-index sets realizing `P_x` and `P_z` for one qubit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinTerm {
    pub x_spins: Vec<u16>,
    pub z_spins: Vec<u16>,
}

/// The disordered spin model of a code under a Pauli channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpinModel {
    pub code_name: String,
    pub n: usize,
    pub k: usize,
    pub x_spins: usize,
    pub z_spins: usize,
    /// one term per qubit, index order = qubit order
    pub terms: Vec<SpinTerm>,
    pub couplings: Couplings,
    /// chosen representative support of each X / Z logical generator
    pub defect_x: Vec<Vec<usize>>,
    pub defect_z: Vec<Vec<usize>>,
}

/// Per-qubit disorder variables; `0` marks an erased qubit.
#[derive(Debug, Clone)]
pub struct EtaConfig {
    pub x: Vec<i8>,
    pub z: Vec<i8>,
}

impl EtaConfig {
    pub fn clean(n: usize) -> Self {
        Self {
            x: vec![1; n],
            z: vec![1; n],
        }
    }

    pub fn erasure_mask(&self) -> BitVec {
        BitVec::from_bools(&self.x.iter().map(|&v| v == 0).collect::<Vec<_>>())
    }

    /// Sets `eta_x = -1` on the X support and `eta_z = -1` on the Z support.
    pub fn from_error(mask: &BitVec, ex: &BitVec, ez: &BitVec) -> Self {
        let n = mask.len();
        let mut eta = Self::clean(n);
        for q in 0..n {
            if mask.get(q) {
                eta.x[q] = 0;
                eta.z[q] = 0;
            } else {
                if ex.get(q) {
                    eta.x[q] = -1;
                }
                if ez.get(q) {
                    eta.z[q] = -1;
                }
            }
        }
        eta
    }
}

/// Builds the spin model of a code: spins on the (independent) rows of the
/// check matrices, term spin-sets read off the matrix columns.
pub fn build_spin_model(code: &CssCode, channel: &PauliChannel) -> Result<SpinModel, StatmechError> {
    let couplings = channel.couplings()?;
    let terms = (0..code.n)
        .map(|q| SpinTerm {
            x_spins: (0..code.hx.rows())
                .filter(|&r| code.hx.get(r, q))
                .map(|r| r as u16)
                .collect(),
            z_spins: (0..code.hz.rows())
                .filter(|&r| code.hz.get(r, q))
                .map(|r| r as u16)
                .collect(),
        })
        .collect();
    Ok(SpinModel {
        code_name: code.name.clone(),
        n: code.n,
        k: code.k,
        x_spins: code.hx.rows(),
        z_spins: code.hz.rows(),
        terms,
        couplings,
        defect_x: (0..code.k)
            .map(|i| code.lx.row(i).iter_ones().collect())
            .collect(),
        defect_z: (0..code.k)
            .map(|i| code.lz.row(i).iter_ones().collect())
            .collect(),
    })
}

/// Draws one i.i.d. disorder configuration from the physical distribution.
pub fn sample_eta<R: Rng>(spec: &NoiseSpec, n: usize, rng: &mut R) -> EtaConfig {
    let dist = spec.eta_distribution();
    let mut eta = EtaConfig::clean(n);
    for q in 0..n {
        let r: f64 = rng.gen();
        let mut acc = 0.0;
        let mut outcome = 4;
        for (i, &p) in dist.iter().enumerate() {
            acc += p;
            if r < acc {
                outcome = i;
                break;
            }
        }
        let (ex, ez) = match outcome {
            0 => (1, 1),
            1 => (-1, 1),
            2 => (-1, -1),
            3 => (1, -1),
            _ => (0, 0),
        };
        eta.x[q] = ex;
        eta.z[q] = ez;
    }
    eta
}

/// A defect: the subset of logical generators inserted into the partition
/// function, encoded as bit masks over `defect_x` / `defect_z`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DefectLabel {
    pub x_bits: u64,
    pub z_bits: u64,
}

fn spin_gate(model: &SpinModel) -> Result<(), StatmechError> {
    let total = model.x_spins + model.z_spins;
    if total > 26 {
        return Err(StatmechError::TooLarge(format!(
            "partition sum over 2^{total} spin configurations"
        )));
    }
    Ok(())
}

/// `log sum_spins exp H` with per-sum max-shift stabilization, for the given
/// disorder and defect. Erased qubits (eta 0) contribute nothing; the defect
/// flips eta along the stored representative supports.
pub fn log_partition(model: &SpinModel, eta: &EtaConfig, defect: DefectLabel) -> Result<f64, StatmechError> {
    spin_gate(model)?;
    let mut eta_x: Vec<f64> = eta.x.iter().map(|&v| v as f64).collect();
    let mut eta_z: Vec<f64> = eta.z.iter().map(|&v| v as f64).collect();
    apply_defect(model, defect, &mut eta_x, &mut eta_z);
    Ok(log_partition_signed(model, &eta_x, &eta_z))
}

fn apply_defect(model: &SpinModel, defect: DefectLabel, eta_x: &mut [f64], eta_z: &mut [f64]) {
    for (i, support) in model.defect_x.iter().enumerate() {
        if defect.x_bits >> i & 1 == 1 {
            for &q in support {
                eta_x[q] = -eta_x[q];
            }
        }
    }
    for (i, support) in model.defect_z.iter().enumerate() {
        if defect.z_bits >> i & 1 == 1 {
            for &q in support {
                eta_z[q] = -eta_z[q];
            }
        }
    }
}

/// Exact 2^N spin sum via a Gray-code walk with an incremental energy update.
fn log_partition_signed(model: &SpinModel, eta_x: &[f64], eta_z: &[f64]) -> f64 {
    let nx = model.x_spins;
    let nz = model.z_spins;
    let n_spins = nx + nz;
    let j = &model.couplings;
    // per-qubit coefficients; erased qubits have all three zero
    let ax: Vec<f64> = (0..model.n)
        .map(|q| eta_x[q] * (j.j_x - j.j_1 / 2.0) / 2.0)
        .collect();
    let az: Vec<f64> = (0..model.n)
        .map(|q| eta_z[q] * (j.j_z - j.j_1 / 2.0) / 2.0)
        .collect();
    let axz: Vec<f64> = (0..model.n)
        .map(|q| eta_x[q] * eta_z[q] * j.j_1 / 4.0)
        .collect();
    // qubits touched by each spin
    let mut touched: Vec<Vec<u32>> = vec![Vec::new(); n_spins];
    for (q, term) in model.terms.iter().enumerate() {
        for &s in &term.x_spins {
            touched[s as usize].push(q as u32);
        }
        for &s in &term.z_spins {
            touched[nx + s as usize].push(q as u32);
        }
    }
    let mut px: Vec<f64> = vec![1.0; model.n];
    let mut pz: Vec<f64> = vec![1.0; model.n];
    let mut h: f64 = (0..model.n).map(|q| ax[q] + az[q] + axz[q]).sum();
    let mut max_h = h;
    let mut sum = 1.0f64; // exp(h - max_h)
    for i in 1u64..1 << n_spins {
        let s = i.trailing_zeros() as usize;
        if s < nx {
            for &qu in &touched[s] {
                let q = qu as usize;
                h -= 2.0 * px[q] * (ax[q] + axz[q] * pz[q]);
                px[q] = -px[q];
            }
        } else {
            for &qu in &touched[s] {
                let q = qu as usize;
                h -= 2.0 * pz[q] * (az[q] + axz[q] * px[q]);
                pz[q] = -pz[q];
            }
        }
        if h > max_h {
            sum = sum * (max_h - h).exp() + 1.0;
            max_h = h;
        } else {
            sum += (h - max_h).exp();
        }
    }
    max_h + sum.ln()
}

/// One defect generator: an eta-flip pattern realizing one unit class shift.
#[derive(Debug, Clone)]
pub enum DefectGen {
    /// flips `eta_x` along the support (an X-type logical combination)
    X(Vec<usize>),
    /// flips `eta_z` along the support
    Z(Vec<usize>),
}

/// Defect generators for a given erasure analysis: one X-type pattern per
/// well-defined Z-logical basis vector (and vice versa), chosen as a dual
/// basis so the `2^(2k' + b)` subsets realize every class shift once.
pub fn defect_generators(code: &CssCode, an: &ErasureAnalysis) -> Vec<DefectGen> {
    let mut gens = Vec::new();
    let vz_t = an.vz.transpose();
    for i in 0..an.vz.rows() {
        let mut e = BitVec::zeros(an.vz.rows());
        e.set(i, true);
        let d = vz_t
            .solve_left(&e)
            .expect("vz rows are independent, dual basis exists");
        gens.push(DefectGen::X(code.lx.vec_mul(&d).iter_ones().collect()));
    }
    let vx_t = an.vx.transpose();
    for i in 0..an.vx.rows() {
        let mut e = BitVec::zeros(an.vx.rows());
        e.set(i, true);
        let d = vx_t
            .solve_left(&e)
            .expect("vx rows are independent, dual basis exists");
        gens.push(DefectGen::Z(code.lz.vec_mul(&d).iter_ones().collect()));
    }
    gens
}

/// `log2 sum_D exp(log Z_D - log Z_0)` over all subsets of the defect
/// generators. The identity subset contributes 1, so the result is >= 0.
pub fn statmech_log_ratio(
    model: &SpinModel,
    eta: &EtaConfig,
    gens: &[DefectGen],
) -> Result<f64, StatmechError> {
    spin_gate(model)?;
    if gens.len() > 20 {
        return Err(StatmechError::TooLarge(format!(
            "defect sum over 2^{} partition functions",
            gens.len()
        )));
    }
    let base_x: Vec<f64> = eta.x.iter().map(|&v| v as f64).collect();
    let base_z: Vec<f64> = eta.z.iter().map(|&v| v as f64).collect();
    let log_z0 = log_partition_signed(model, &base_x, &base_z);
    let mut total = 0.0f64;
    for bits in 0u64..1 << gens.len() {
        if bits == 0 {
            total += 1.0;
            continue;
        }
        let mut ex = base_x.clone();
        let mut ez = base_z.clone();
        for (i, gen) in gens.iter().enumerate() {
            if bits >> i & 1 == 1 {
                match gen {
                    DefectGen::X(support) => {
                        for &q in support {
                            ex[q] = -ex[q];
                        }
                    }
                    DefectGen::Z(support) => {
                        for &q in support {
                            ez[q] = -ez[q];
                        }
                    }
                }
            }
        }
        total += (log_partition_signed(model, &ex, &ez) - log_z0).exp();
    }
    Ok(total.log2())
}

/// CI by sampling disorder (erasures and error chains) from its physical
/// distribution: each draw contributes `(k - b - 2c) - log2 sum_D Z_D / Z_0`.
/// Returns the mean and its standard error.
pub fn ci_statmech(
    code: &CssCode,
    spec: &NoiseSpec,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64), StatmechError> {
    assert!(samples >= 1);
    let model = build_spin_model(code, &spec.channel)?;
    spin_gate(&model)?;
    let vals = map_indexed(samples, |i| -> Result<f64, StatmechError> {
        let mut r = rng::stream(seed, &[0x7374617421, i as u64]);
        let eta = sample_eta(spec, code.n, &mut r);
        let cfg = ErasureConfig::new(eta.erasure_mask());
        let an = erasure::analyze(code, &cfg);
        let base = code.k as f64 - an.b as f64 - 2.0 * an.c as f64;
        let gens = defect_generators(code, &an);
        Ok(base - statmech_log_ratio(&model, &eta, &gens)?)
    });
    let mut ok = Vec::with_capacity(samples);
    for v in vals {
        ok.push(v?);
    }
    let mu = ok.iter().sum::<f64>() / samples as f64;
    let var = if samples > 1 {
        ok.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (samples as f64 - 1.0)
            / samples as f64
    } else {
        0.0
    };
    Ok((mu, var.sqrt()))
}

/// Exact CI for a fixed erasure configuration with the error-chain average
/// enumerated instead of sampled. Bit/phase-flip channels factorize into two
/// sector sums; other channels enumerate all `4^m` chains on the active set.
pub fn ci_statmech_exact_chains(
    code: &CssCode,
    cfg: &ErasureConfig,
    channel: &PauliChannel,
) -> Result<f64, StatmechError> {
    let model = build_spin_model(code, channel)?;
    spin_gate(&model)?;
    let an = erasure::analyze(code, cfg);
    let base = code.k as f64 - an.b as f64 - 2.0 * an.c as f64;
    let gens = defect_generators(code, &an);
    let active = cfg.active();
    let m = active.len();
    if let ChannelKind::BitPhaseFlip { p1, p2 } = channel.kind {
        // J1 = 0: the X and Z sectors decouple exactly
        let x_gens: Vec<DefectGen> = gens
            .iter()
            .filter(|g| matches!(g, DefectGen::X(_)))
            .cloned()
            .collect();
        let z_gens: Vec<DefectGen> = gens
            .iter()
            .filter(|g| matches!(g, DefectGen::Z(_)))
            .cloned()
            .collect();
        if m > 22 {
            return Err(StatmechError::TooLarge(format!(
                "chain enumeration over 2^{m} patterns"
            )));
        }
        let mut avg = 0.0;
        for (gens_side, p, z_sector) in [(&x_gens, p1, false), (&z_gens, p2, true)] {
            let vals = map_indexed(1usize << m, |bits| -> Result<f64, StatmechError> {
                let mut eta = EtaConfig::from_error(
                    cfg.mask(),
                    &BitVec::zeros(code.n),
                    &BitVec::zeros(code.n),
                );
                let mut w = 0u32;
                for (j, &q) in active.iter().enumerate() {
                    if bits >> j & 1 == 1 {
                        if z_sector {
                            eta.z[q] = -1;
                        } else {
                            eta.x[q] = -1;
                        }
                        w += 1;
                    }
                }
                let prob = p.powi(w as i32) * (1.0 - p).powi((m as u32 - w) as i32);
                Ok(prob * statmech_log_ratio(&model, &eta, gens_side)?)
            });
            for v in vals {
                avg += v?;
            }
        }
        return Ok(base - avg);
    }
    if m > 10 {
        return Err(StatmechError::TooLarge(format!(
            "chain enumeration over 4^{m} patterns"
        )));
    }
    let pi = channel.p_identity();
    let probs = [pi, channel.p_x, channel.p_z, channel.p_y];
    let vals = map_indexed(1usize << (2 * m), |bits| -> Result<f64, StatmechError> {
        let mut eta = EtaConfig::from_error(cfg.mask(), &BitVec::zeros(code.n), &BitVec::zeros(code.n));
        let mut prob = 1.0;
        for (j, &q) in active.iter().enumerate() {
            let xb = bits >> (2 * j) & 1;
            let zb = bits >> (2 * j + 1) & 1;
            prob *= probs[xb + 2 * zb];
            if xb == 1 {
                eta.x[q] = -1;
            }
            if zb == 1 {
                eta.z[q] = -1;
            }
        }
        if prob == 0.0 {
            return Ok(0.0);
        }
        Ok(prob * statmech_log_ratio(&model, &eta, &gens)?)
    });
    let mut avg = 0.0;
    for v in vals {
        avg += v?;
    }
    Ok(base - avg)
}

/// Versioned JSON export of a spin model.
#[derive(Serialize, Deserialize)]
pub struct ModelExport {
    pub schema_version: u32,
    pub model: SpinModel,
}

pub fn export_model(model: &SpinModel) -> String {
    serde_json::to_string_pretty(&ModelExport {
        schema_version: 1,
        model: model.clone(),
    })
    .expect("spin model serializes")
}

pub fn import_model(json: &str) -> Result<SpinModel, serde_json::Error> {
    Ok(serde_json::from_str::<ModelExport>(json)?.model)
}
