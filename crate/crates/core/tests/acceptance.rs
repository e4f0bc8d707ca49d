//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Values, grids, seeds and tolerances are pinned here; reruns are
//! deterministic. Criterion 3 is the long pole (stratified erasure scans at
//! 1e4 samples per stratum for distances up to 17) and takes tens of minutes
//! on a small machine; everything else finishes in seconds to a few minutes.

use ci_lab_core::analysis::{self, CiCurve, CollapseOptions};
use ci_lab_core::codes::{build_color_488, build_lcs, build_rotated_surface, build_toric, single_qubit, CssCode};
use ci_lab_core::coset;
use ci_lab_core::erasure::{self, ErasureConfig};
use ci_lab_core::gf2::BitVec;
use ci_lab_core::noise::{ChannelKind, NoiseSpec, PauliChannel};
use ci_lab_core::rng;
use ci_lab_core::statmech;

fn report(criterion: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("acceptance {criterion}: {verdict} ({detail})");
    assert!(pass, "acceptance {criterion} failed: {detail}");
}

fn grid_around(center: f64, step: f64, halfwidth: usize) -> Vec<f64> {
    (0..=2 * halfwidth)
        .map(|i| center + (i as f64 - halfwidth as f64) * step)
        .collect()
}

fn normalize(curve: &CiCurve) -> CiCurve {
    let mut c = curve.clone();
    let k = c.k as f64;
    for p in &mut c.points {
        p.ci /= k;
        p.stderr /= k;
    }
    c
}

/// Crossing of the per-logical-qubit CI curves of two codes on a shared grid.
fn crossing_exact(
    a: &CssCode,
    b: &CssCode,
    kind: &ChannelKind,
    e: f64,
    grid: &[f64],
) -> f64 {
    let ca = coset::scan_combined_exact(a, kind, grid, &[e]).unwrap();
    let cb = coset::scan_combined_exact(b, kind, grid, &[e]).unwrap();
    analysis::find_crossing(&normalize(&ca[0]), &normalize(&cb[0]))
        .unwrap()
        .x
}

const BF: ChannelKind = ChannelKind::BitPhaseFlip { p1: 0.0, p2: 0.0 };
const DEPOL: ChannelKind = ChannelKind::Depolarizing { p: 0.0 };

#[test]
fn criterion_1_table_iii_surface_crossings() {
    let sq = single_qubit();
    let d3 = build_rotated_surface(3).unwrap();
    let cases_bf = [
        (0.0, 0.10913),
        (0.1, 0.09162),
        (0.2, 0.07230),
        (0.3, 0.05051),
        (0.4, 0.02561),
        (0.45, 0.01220),
    ];
    let cases_depol = [
        (0.0, 0.18605),
        (0.1, 0.15666),
        (0.2, 0.12397),
        (0.3, 0.08691),
        (0.4, 0.04444),
        (0.45, 0.02140),
    ];
    let mut worst = (0.0f64, "");
    for (e, expect) in cases_bf {
        let x = crossing_exact(&sq, &d3, &BF, e, &grid_around(expect, 0.002, 5));
        let err = (x - expect).abs();
        assert!(err <= 0.002, "BF e={e}: {x} vs {expect}");
        if err > worst.0 {
            worst = (err, "bf");
        }
    }
    for (e, expect) in cases_depol {
        let x = crossing_exact(&sq, &d3, &DEPOL, e, &grid_around(expect, 0.003, 5));
        let err = (x - expect).abs();
        assert!(err <= 0.003, "depol e={e}: {x} vs {expect}");
        if err > worst.0 {
            worst = (err, "depol");
        }
    }
    report(
        "1 (Table III surface pseudo-thresholds)",
        true,
        &format!("12 crossings, worst |err| = {:.5} ({})", worst.0, worst.1),
    );
}

#[test]
fn criterion_2_table_iv_color_crossings() {
    let sq = single_qubit();
    let steane = build_color_488(3).unwrap();
    let d5 = build_color_488(5).unwrap();

    let x = crossing_exact(&sq, &steane, &BF, 0.0, &grid_around(0.10853, 0.002, 5));
    let e1 = (x - 0.10853).abs();
    assert!(e1 <= 0.002, "color (1,3) BF: {x}");

    let x = crossing_exact(&sq, &steane, &DEPOL, 0.0, &grid_around(0.18570, 0.003, 5));
    let e2 = (x - 0.18570).abs();
    assert!(e2 <= 0.003, "color (1,3) depol: {x}");

    // (3,5) bit/phase flip via per-sector 2^17 enumeration
    let x = crossing_exact(&steane, &d5, &BF, 0.0, &grid_around(0.10842, 0.002, 5));
    let e3 = (x - 0.10842).abs();
    assert!(e3 <= 0.002, "color (3,5) BF: {x}");

    report(
        "2 (Table IV color pseudo-thresholds, e = 0)",
        true,
        &format!("errors {:.5} / {:.5} / {:.5}", e1, e2, e3),
    );
}

/// Stretch goal from criterion 2: the (3,5) depolarizing column at e > 0 via
/// the partition-function sampler. Run with `cargo test -- --ignored`.
#[test]
#[ignore = "stretch goal: ~hours of partition-function sampling"]
fn criterion_2_stretch_color_35_depol_with_erasure() {
    let steane = build_color_488(3).unwrap();
    let d5 = build_color_488(5).unwrap();
    // Table IV depol (3,5) values at e in {0.1, 0.2, 0.3, 0.4}
    for (e, expect, samples) in [
        (0.1, 0.1589, 60_000usize),
        (0.2, 0.1265, 60_000),
        (0.3, 0.0884, 80_000),
        (0.4, 0.044, 80_000),
    ] {
        let grid = grid_around(expect, 0.003, 4);
        let steane_curves = coset::scan_combined_exact(&steane, &DEPOL, &grid, &[e]).unwrap();
        let points = grid
            .iter()
            .map(|&p| {
                let spec = NoiseSpec::new(PauliChannel::depolarizing(p).unwrap(), e).unwrap();
                let (ci, stderr) = statmech::ci_statmech(&d5, &spec, samples, 17).unwrap();
                analysis::CiPoint { x: p, ci, stderr }
            })
            .collect();
        let d5_curve = CiCurve {
            label: d5.name.clone(),
            distance: 5,
            k: 1,
            points,
        };
        let x = analysis::find_crossing(&steane_curves[0], &d5_curve).unwrap().x;
        let err = (x - expect).abs();
        println!("acceptance 2-stretch e={e}: crossing {x:.4} vs {expect} (err {err:.4})");
        assert!(err <= 0.004, "color (3,5) depol e={e}: {x} vs {expect}");
    }
}

#[test]
fn criterion_3_erasure_threshold_collapse() {
    let samples = 10_000;
    let seed = 7;
    let e_grid: Vec<f64> = (0..=20).map(|i| 0.40 + 0.01 * i as f64).collect();
    let scan = |code: &CssCode| erasure::stratified_ci(code, &e_grid, samples, seed);

    let surface: Vec<CiCurve> = [5, 7, 9, 11, 13, 17]
        .iter()
        .map(|&d| scan(&build_rotated_surface(d).unwrap()))
        .collect();
    let color: Vec<CiCurve> = [5, 7, 9, 11, 13, 15, 17]
        .iter()
        .map(|&d| scan(&build_color_488(d).unwrap()))
        .collect();
    let lcs: Vec<CiCurve> = [(3, 1), (5, 2), (7, 3)]
        .iter()
        .map(|&(l, ell)| scan(&build_lcs(l, ell).unwrap()))
        .collect();

    let opts = CollapseOptions {
        eth_range: (0.45, 0.55),
        nu_range: (0.6, 2.2),
        grid: 40,
        bootstrap: 60,
        seed: 3,
        ..Default::default()
    };
    let fit_s = analysis::fss_collapse(&surface, &opts).unwrap();
    assert!(
        (fit_s.e_th - 0.5).abs() <= 0.010,
        "surface e_th = {}",
        fit_s.e_th
    );
    assert!((fit_s.nu - 1.33).abs() <= 0.15, "surface nu = {}", fit_s.nu);

    let fit_c = analysis::fss_collapse(&color, &opts).unwrap();
    assert!((fit_c.e_th - 0.5).abs() <= 0.010, "color e_th = {}", fit_c.e_th);
    assert!((fit_c.nu - 1.4).abs() <= 0.2, "color nu = {}", fit_c.nu);

    let lcs_opts = CollapseOptions {
        nu_range: (0.3, 1.6),
        ..opts.clone()
    };
    let fit_l = analysis::fss_collapse(&lcs, &lcs_opts).unwrap();
    assert!(
        (fit_l.e_th - 0.5).abs() <= 0.015,
        "lcs e_th = {}",
        fit_l.e_th
    );
    assert!((fit_l.nu - 0.75).abs() <= 0.2, "lcs nu = {}", fit_l.nu);

    report(
        "3 (erasure thresholds by scaling collapse)",
        true,
        &format!(
            "surface e_th {:.4} nu {:.3}; color e_th {:.4} nu {:.3}; lcs e_th {:.4} nu {:.3}",
            fit_s.e_th, fit_s.nu, fit_c.e_th, fit_c.nu, fit_l.e_th, fit_l.nu
        ),
    );
}

#[test]
fn criterion_4_evaluator_cross_validation() {
    let cases: Vec<PauliChannel> = vec![
        PauliChannel::bit_phase_flip(0.02).unwrap(),
        PauliChannel::bit_phase_flip(0.1).unwrap(),
        PauliChannel::bit_phase_flip(0.3).unwrap(),
        PauliChannel::depolarizing(0.05).unwrap(),
        PauliChannel::depolarizing(0.15).unwrap(),
    ];
    let codes: Vec<CssCode> = vec![
        build_rotated_surface(3).unwrap(),
        build_color_488(3).unwrap(),
        build_toric(2).unwrap(),
        build_lcs(3, 1).unwrap(),
    ];
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for code in &codes {
        for (ic, channel) in cases.iter().enumerate() {
            let model = statmech::build_spin_model(code, channel).unwrap();
            for draw in 0..100u64 {
                // alternate erasure-free and e = 0.25 draws
                let e = if draw % 2 == 0 { 0.0 } else { 0.25 };
                let spec = NoiseSpec::new(*channel, e).unwrap();
                let mut r = rng::stream(1000 + ic as u64, &[code.n as u64, draw]);
                let eta = statmech::sample_eta(&spec, code.n, &mut r);
                let cfg = ErasureConfig::new(eta.erasure_mask());
                let an = erasure::analyze(code, &cfg);
                let gens = statmech::defect_generators(code, &an);
                let a = statmech::statmech_log_ratio(&model, &eta, &gens).unwrap();
                let ex = BitVec::from_bools(&eta.x.iter().map(|&v| v == -1).collect::<Vec<_>>());
                let ez = BitVec::from_bools(&eta.z.iter().map(|&v| v == -1).collect::<Vec<_>>());
                let b = coset::coset_log_ratio(code, &cfg, &an, channel, &ex, &ez).unwrap();
                let err = (a - b).abs();
                worst = worst.max(err);
                checked += 1;
                assert!(
                    err <= 1e-9,
                    "{} channel {ic} draw {draw}: statmech {a} vs coset {b}",
                    code.name
                );
            }
        }
    }
    report(
        "4 (partition-function vs coset cross-validation)",
        true,
        &format!("{checked} draws, worst |log-ratio diff| = {worst:.2e}"),
    );
}

#[test]
fn criterion_5_lcs_spin_model_structure() {
    let code = build_lcs(3, 1).unwrap();
    let channel = PauliChannel::depolarizing(0.1).unwrap();
    let model = statmech::build_spin_model(&code, &channel).unwrap();

    // term-size multiset per sector: 6 one-spin, 6 two-spin, 3 three-spin
    let mut sizes_x = [0usize; 4];
    let mut sizes_z = [0usize; 4];
    for t in &model.terms {
        sizes_x[t.x_spins.len()] += 1;
        sizes_z[t.z_spins.len()] += 1;
    }
    assert_eq!(sizes_x, [0, 6, 6, 3], "X-sector term sizes");
    assert_eq!(sizes_z, [0, 6, 6, 3], "Z-sector term sizes");

    // Qubit labels in the reference term lists use position-major order
    // (upper-left corners of all sheets, then upper-right, lower-left,
    // lower-right, centers); this crate indexes sheet-major with the in-sheet
    // order LL, LR, UL, UR, C. `perm` maps reference label -> crate index.
    let perm: Vec<usize> = {
        let mut p = vec![0usize; 15];
        for q in 0..3 {
            p[q] = 5 * q + 2; // UL
            p[3 + q] = 5 * q + 3; // UR
            p[6 + q] = 5 * q; // LL
            p[9 + q] = 5 * q + 1; // LR
            p[12 + q] = 5 * q + 4; // C
        }
        p
    };
    // X-spin labels: sigma_{L,q} is the left in-sheet X check (crate row 2q),
    // sigma_{R,q} the right one (row 2q + 1).
    let sl = |q: usize| (2 * q) as u16;
    let sr = |q: usize| (2 * q + 1) as u16;
    let expected_x: Vec<(usize, Vec<u16>)> = vec![
        (0, vec![sl(0)]),
        (1, vec![sl(1)]),
        (2, vec![sl(2)]),
        (3, vec![sr(0)]),
        (4, vec![sr(1)]),
        (5, vec![sr(2)]),
        (6, vec![sl(0), sl(2)]),
        (7, vec![sl(0), sl(1)]),
        (8, vec![sl(1), sl(2)]),
        (9, vec![sr(0), sr(2)]),
        (10, vec![sr(0), sr(1)]),
        (11, vec![sr(1), sr(2)]),
        (12, vec![sl(0), sr(0), sr(1)]),
        (13, vec![sl(1), sr(1), sr(2)]),
        (14, vec![sl(2), sr(2), sr(0)]),
    ];
    for (label, mut want) in expected_x {
        let mut got = model.terms[perm[label]].x_spins.clone();
        got.sort();
        want.sort();
        assert_eq!(got, want, "X term of reference qubit {label}");
    }
    // Z-spin labels: tau_{L,q} (lower in-sheet Z check) is crate row 2q,
    // tau_{U,q} (upper) is row 2q + 1. The Z model is the 90-degree rotated
    // counterpart of the X model.
    let tl = |q: usize| (2 * q) as u16;
    let tu = |q: usize| (2 * q + 1) as u16;
    let expected_z: Vec<(usize, Vec<u16>)> = vec![
        (0, vec![tu(0)]),
        (1, vec![tu(1)]),
        (2, vec![tu(2)]),
        (6, vec![tl(0)]),
        (7, vec![tl(1)]),
        (8, vec![tl(2)]),
        (3, vec![tu(0), tu(2)]),
        (4, vec![tu(0), tu(1)]),
        (5, vec![tu(1), tu(2)]),
        (9, vec![tl(0), tl(2)]),
        (10, vec![tl(0), tl(1)]),
        (11, vec![tl(1), tl(2)]),
        (12, vec![tu(0), tl(0), tl(1)]),
        (13, vec![tu(1), tl(1), tl(2)]),
        (14, vec![tu(2), tl(2), tl(0)]),
    ];
    for (label, mut want) in expected_z {
        let mut got = model.terms[perm[label]].z_spins.clone();
        got.sort();
        want.sort();
        assert_eq!(got, want, "Z term of reference qubit {label}");
    }
    report(
        "5 ([[15,3,3]] spin-model structure)",
        true,
        "X terms {6x1, 6x2, 3x3} with exact index sets; Z sector is the rotated counterpart",
    );
}

#[test]
fn criterion_6_single_qubit_analytics() {
    let sq = single_qubit();
    let h2 = |p: f64| {
        if p == 0.0 || p == 1.0 {
            0.0
        } else {
            -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
        }
    };
    let mut worst = 0.0f64;
    for i in 0..50 {
        let e = i as f64 / 49.0;
        let err = (erasure::exact_ci(&sq, e).unwrap() - (1.0 - 2.0 * e)).abs();
        worst = worst.max(err);
        assert!(err <= 1e-12, "erasure e={e}");

        let p1 = 0.005 + 0.97 * i as f64 / 49.0;
        let ch = PauliChannel::bit_phase_flip(p1).unwrap();
        let err = (coset::pauli_ci(&sq, &ch).unwrap() - (1.0 - 2.0 * h2(p1))).abs();
        worst = worst.max(err);
        assert!(err <= 1e-12, "bf p1={p1}");

        let p = 0.005 + 0.97 * i as f64 / 49.0;
        let ch = PauliChannel::depolarizing(p).unwrap();
        let want = 1.0 + (1.0 - p) * (1.0 - p).log2() + p * (p / 3.0).log2();
        let err = (coset::pauli_ci(&sq, &ch).unwrap() - want).abs();
        worst = worst.max(err);
        assert!(err <= 1e-12, "depol p={p}");
    }
    report(
        "6 (single-qubit analytic suite)",
        true,
        &format!("150 points, worst |err| = {worst:.2e}"),
    );
}

#[test]
fn criterion_7_property_suites() {
    // The full property suites live in tests/props.rs (proptest) and the
    // per-module unit tests; this runs one deterministic representative of
    // each family so the acceptance run reports on them explicitly.
    use rand::Rng;

    // GF(2): recoverable subgroup vs brute force on the toric code
    let toric = build_toric(2).unwrap();
    let mut r = rng::stream(5, &[1]);
    for _ in 0..40 {
        let m = r.gen_range(0..=toric.n);
        let mask = BitVec::from_indices(
            toric.n,
            &{
                let mut idx: Vec<usize> = (0..toric.n).collect();
                for i in 0..m {
                    let j = r.gen_range(i..toric.n);
                    idx.swap(i, j);
                }
                idx[..m].to_vec()
            },
        );
        let cfg = ErasureConfig::new(mask);
        let (kp, b, c) = {
            let an = erasure::analyze(&toric, &cfg);
            (an.k_prime, an.b, an.c)
        };
        assert_eq!(kp + b + c, toric.k);
    }

    // stratified vs exact erasure CI on a small code
    let steane = build_color_488(3).unwrap();
    let curve = erasure::stratified_ci(&steane, &[0.3, 0.5], 3000, 11);
    for p in &curve.points {
        let exact = erasure::exact_ci(&steane, p.x).unwrap();
        assert!(
            (p.ci - exact).abs() <= 4.0 * p.stderr + 1e-9,
            "stratified vs exact at e={}",
            p.x
        );
    }

    // coset table normalization
    let ch = PauliChannel::depolarizing(0.11).unwrap();
    let t = coset::build_joint_table(
        &steane.hz,
        &steane.hx,
        &steane.lz,
        &steane.lx,
        &ch,
        &BitVec::ones(7),
    )
    .unwrap();
    assert!((t.total_mass() - 1.0).abs() < 1e-12);

    // gauge invariance of the partition function
    let surf = build_rotated_surface(3).unwrap();
    let model = statmech::build_spin_model(&surf, &ch).unwrap();
    let spec = NoiseSpec::new(ch, 0.2).unwrap();
    let mut r = rng::stream(6, &[2]);
    let eta = statmech::sample_eta(&spec, 9, &mut r);
    let z0 = statmech::log_partition(&model, &eta, statmech::DefectLabel::default()).unwrap();
    for row in 0..surf.hx.rows() {
        let mut flipped = eta.clone();
        for q in surf.hx.row(row).iter_ones() {
            flipped.x[q] = -flipped.x[q];
        }
        let z1 = statmech::log_partition(&model, &flipped, statmech::DefectLabel::default()).unwrap();
        assert!((z0 - z1).abs() < 1e-10);
    }

    // planted-parameter collapse recovery
    let mut curves = Vec::new();
    for &d in &[5usize, 9, 13] {
        let xs: Vec<f64> = (0..41).map(|i| 0.40 + 0.005 * i as f64).collect();
        let points = xs
            .iter()
            .map(|&x| {
                let u = (x - 0.5) * (d as f64).powf(1.0 / 1.33);
                analysis::CiPoint {
                    x,
                    ci: (-u).tanh(),
                    stderr: 0.0,
                }
            })
            .collect();
        curves.push(CiCurve {
            label: format!("planted:{d}"),
            distance: d,
            k: 1,
            points,
        });
    }
    let fit = analysis::fss_collapse(
        &curves,
        &CollapseOptions {
            grid: 25,
            bootstrap: 10,
            ..Default::default()
        },
    )
    .unwrap();
    assert!((fit.e_th - 0.5).abs() < 0.005 && (fit.nu - 1.33).abs() < 0.08);

    report(
        "7 (property suites)",
        true,
        "representatives of each invariant family (full suites in tests/props.rs)",
    );
}

#[test]
fn criterion_8_lcs_vs_surface_pseudo_thresholds() {
    let sq = single_qubit();
    let surf3 = build_rotated_surface(3).unwrap();
    let lcs = build_lcs(3, 1).unwrap();

    // surface reference crossings (exact)
    let surf_bf: Vec<(f64, f64)> = [(0.0, 0.10913), (0.1, 0.09162), (0.2, 0.07230)]
        .iter()
        .map(|&(e, guess)| {
            (
                e,
                crossing_exact(&sq, &surf3, &BF, e, &grid_around(guess, 0.002, 5)),
            )
        })
        .collect();
    let surf_depol: Vec<(f64, f64)> = [(0.0, 0.18605), (0.1, 0.15666), (0.2, 0.12397)]
        .iter()
        .map(|&(e, guess)| {
            (
                e,
                crossing_exact(&sq, &surf3, &DEPOL, e, &grid_around(guess, 0.003, 5)),
            )
        })
        .collect();

    let mut detail = String::new();

    // bit/phase flip: exact for the LCS code at every erasure rate
    for &(e, surf_x) in &surf_bf {
        let grid = grid_around(surf_x, 0.002, 7);
        let x = crossing_exact(&sq, &lcs, &BF, e, &grid);
        let diff = (x - surf_x).abs();
        detail.push_str(&format!("bf e={e}: |{x:.5} - {surf_x:.5}| = {diff:.4}; "));
        assert!(diff <= 0.015, "bf e={e}: lcs {x} vs surface {surf_x}");
    }

    // depolarizing: exact at e = 0, partition-function sampling at e > 0
    for &(e, surf_x) in &surf_depol {
        let grid = grid_around(surf_x, 0.003, 6);
        let lcs_curve = if e == 0.0 {
            coset::scan_combined_exact(&lcs, &DEPOL, &grid, &[0.0])
                .unwrap()
                .pop()
                .unwrap()
        } else {
            let points = grid
                .iter()
                .map(|&p| {
                    let spec = NoiseSpec::new(PauliChannel::depolarizing(p).unwrap(), e).unwrap();
                    let (ci, stderr) = statmech::ci_statmech(&lcs, &spec, 3000, 21).unwrap();
                    analysis::CiPoint { x: p, ci, stderr }
                })
                .collect();
            CiCurve {
                label: lcs.name.clone(),
                distance: 3,
                k: 3,
                points,
            }
        };
        let ref_curve = coset::scan_combined_exact(&sq, &DEPOL, &grid, &[e])
            .unwrap()
            .pop()
            .unwrap();
        let x = analysis::find_crossing(&normalize(&ref_curve), &normalize(&lcs_curve))
            .unwrap()
            .x;
        let diff = (x - surf_x).abs();
        detail.push_str(&format!("depol e={e}: |{x:.5} - {surf_x:.5}| = {diff:.4}; "));
        assert!(diff <= 0.015, "depol e={e}: lcs {x} vs surface {surf_x}");
    }

    report("8 (LCS vs surface pseudo-thresholds)", true, detail.trim_end());
}
