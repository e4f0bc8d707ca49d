//! First-principles oracle: build the noisy mixed states as explicit density
//! matrices, diagonalize them, and compare S(rho_Q) - S(rho_RQ) against the
//! coset-table CI. This never touches syndromes, classes, or partition
//! functions, so it checks the whole analytic chain end to end.

use ci_lab_core::codes::{build_color_488, build_rotated_surface, single_qubit, CssCode};
use ci_lab_core::coset;
use ci_lab_core::erasure::ErasureConfig;
use ci_lab_core::gf2::BitVec;
use ci_lab_core::noise::PauliChannel;
use nalgebra::DMatrix;

/// Support of `w_e |psi_0>` as (reference, qubit-word, sign) triples.
/// `|psi_0>` is the generalized Bell pair between the reference system and
/// the code space; amplitudes are uniform, so only signs matter.
struct ErrorState {
    entries: Vec<(u64, u64, f64)>,
}

fn stabilizer_span(code: &CssCode) -> Vec<u64> {
    let rows: Vec<u64> = (0..code.hx.rows()).map(|r| code.hx.row_mask(r)).collect();
    let mut span = Vec::with_capacity(1 << rows.len());
    for bits in 0u64..1 << rows.len() {
        let mut v = 0u64;
        for (i, &row) in rows.iter().enumerate() {
            if bits >> i & 1 == 1 {
                v ^= row;
            }
        }
        span.push(v);
    }
    span
}

fn error_state(code: &CssCode, span: &[u64], ex: u64, ez: u64) -> ErrorState {
    let lx: Vec<u64> = (0..code.k).map(|i| code.lx.row_mask(i)).collect();
    let mut entries = Vec::with_capacity((1 << code.k) * span.len());
    for r in 0u64..1 << code.k {
        let mut q0 = 0u64;
        for (i, &row) in lx.iter().enumerate() {
            if r >> i & 1 == 1 {
                q0 ^= row;
            }
        }
        for &v in span {
            let q = q0 ^ v;
            // w|q> = (-1)^(ez . q) |q ^ ex>
            let sign = if (ez & q).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            entries.push((r, q ^ ex, sign));
        }
    }
    ErrorState { entries }
}

fn entropy_bits(m: &DMatrix<f64>) -> f64 {
    let eig = m.clone().symmetric_eigen();
    let mut s = 0.0;
    for &l in eig.eigenvalues.iter() {
        if l > 1e-14 {
            s -= l * l.log2();
        }
    }
    s
}

/// CI from explicit density matrices, with `erased` qubits traced out.
fn density_matrix_ci(code: &CssCode, channel: &PauliChannel, erased: &[usize]) -> f64 {
    let n = code.n;
    let k = code.k;
    let span = stabilizer_span(code);
    let amp2 = 1.0 / ((1u64 << (k + code.hx.rows())) as f64);
    let erased_mask: u64 = erased.iter().map(|&q| 1u64 << q).sum();
    let active: Vec<usize> = (0..n).filter(|q| !erased.contains(q)).collect();
    let m = active.len();
    // compress a qubit word to its kept bits
    let kept_bits = |q: u64| -> u64 {
        let mut out = 0u64;
        for (j, &a) in active.iter().enumerate() {
            out |= ((q >> a) & 1) << j;
        }
        out
    };
    let env_bits = |q: u64| q & erased_mask;

    let dim_rq = 1usize << (k + m);
    let dim_q = 1usize << m;
    let mut rho_rq = DMatrix::<f64>::zeros(dim_rq, dim_rq);
    let mut rho_q = DMatrix::<f64>::zeros(dim_q, dim_q);
    let probs = [channel.p_identity(), channel.p_x, channel.p_z, channel.p_y];
    for pattern in 0u64..1 << (2 * m) {
        let mut prob = 1.0;
        let mut ex = 0u64;
        let mut ez = 0u64;
        for (j, &q) in active.iter().enumerate() {
            let xb = pattern >> (2 * j) & 1;
            let zb = pattern >> (2 * j + 1) & 1;
            prob *= probs[(xb + 2 * zb) as usize];
            ex |= xb << q;
            ez |= zb << q;
        }
        if prob == 0.0 {
            continue;
        }
        let state = error_state(code, &span, ex, ez);
        // group by erased-qubit content: tracing out the environment keeps
        // only outer products within the same environment state
        let mut grouped: std::collections::HashMap<u64, Vec<(usize, usize, f64)>> =
            std::collections::HashMap::new();
        for &(r, q, sign) in &state.entries {
            let idx_rq = ((r as usize) << m) | kept_bits(q) as usize;
            let idx_q = kept_bits(q) as usize;
            grouped
                .entry(env_bits(q) | (0 << n))
                .or_default()
                .push((idx_rq, idx_q, sign));
        }
        for group in grouped.values() {
            for &(i_rq, _, si) in group {
                for &(j_rq, _, sj) in group {
                    rho_rq[(i_rq, j_rq)] += prob * si * sj * amp2;
                }
            }
            // rho_Q additionally traces out the reference: group by r
            for &(i_rq, i_q, si) in group {
                let ri = i_rq >> m;
                for &(j_rq, j_q, sj) in group {
                    if j_rq >> m == ri {
                        rho_q[(i_q, j_q)] += prob * si * sj * amp2;
                    }
                }
            }
        }
    }
    entropy_bits(&rho_q) - entropy_bits(&rho_rq)
}

#[test]
fn oracle_single_qubit() {
    let sq = single_qubit();
    for channel in [
        PauliChannel::depolarizing(0.2).unwrap(),
        PauliChannel::bit_phase_flip(0.1).unwrap(),
        PauliChannel::general(0.05, 0.02, 0.11).unwrap(),
    ] {
        let oracle = density_matrix_ci(&sq, &channel, &[]);
        let fast = coset::pauli_ci(&sq, &channel).unwrap();
        assert!((oracle - fast).abs() < 1e-10, "{oracle} vs {fast}");
    }
}

#[test]
fn oracle_steane_code() {
    let steane = build_color_488(3).unwrap();
    for channel in [
        PauliChannel::depolarizing(0.12).unwrap(),
        PauliChannel::bit_phase_flip(0.07).unwrap(),
    ] {
        let oracle = density_matrix_ci(&steane, &channel, &[]);
        let fast = coset::pauli_ci(&steane, &channel).unwrap();
        assert!((oracle - fast).abs() < 1e-10, "{oracle} vs {fast}");
    }
}

#[test]
fn oracle_steane_with_erasures() {
    let steane = build_color_488(3).unwrap();
    let channel = PauliChannel::depolarizing(0.15).unwrap();
    for erased in [vec![2usize], vec![0, 5], vec![1, 3, 6]] {
        let oracle = density_matrix_ci(&steane, &channel, &erased);
        let cfg = ErasureConfig::new(BitVec::from_indices(7, &erased));
        let fast = coset::combined_ci_single(&steane, &cfg, &channel).unwrap();
        assert!(
            (oracle - fast).abs() < 1e-10,
            "erased {erased:?}: {oracle} vs {fast}"
        );
    }
}

#[test]
fn oracle_surface_3_depolarizing() {
    let code = build_rotated_surface(3).unwrap();
    let channel = PauliChannel::depolarizing(0.18).unwrap();
    let oracle = density_matrix_ci(&code, &channel, &[]);
    let fast = coset::pauli_ci(&code, &channel).unwrap();
    assert!((oracle - fast).abs() < 1e-10, "{oracle} vs {fast}");
}
