//! Pseudo-threshold crossings, finite-size-scaling collapse, and threshold
//! tables.

use crate::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One point of a CI curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CiPoint {
    pub x: f64,
    pub ci: f64,
    pub stderr: f64,
}

/// CI as a function of an error probability, for one code.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CiCurve {
    pub label: String,
    pub distance: usize,
    pub k: usize,
    pub points: Vec<CiPoint>,
}

impl CiCurve {
    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("curves do not share an x grid")]
    GridMismatch,
    #[error("no sign change in the scanned window")]
    NoCrossing,
    #[error("multiple sign changes at x = {0:?}")]
    MultipleCrossings(Vec<f64>),
    #[error("finite-size scaling needs at least 3 distances, got {0}")]
    TooFewCurves(usize),
}

/// A located curve crossing.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Crossing {
    pub x: f64,
    /// grid spacing combined in quadrature with the stderr-propagated shift
    pub uncertainty: f64,
}

/// Linear-interpolation crossing of two curves sharing an x grid.
///
/// The difference `a - b` must change sign exactly once in the window.
pub fn find_crossing(a: &CiCurve, b: &CiCurve) -> Result<Crossing, AnalysisError> {
    if a.points.len() != b.points.len()
        || a.points
            .iter()
            .zip(&b.points)
            .any(|(p, q)| (p.x - q.x).abs() > 1e-12)
    {
        return Err(AnalysisError::GridMismatch);
    }
    let diff: Vec<f64> = a
        .points
        .iter()
        .zip(&b.points)
        .map(|(p, q)| p.ci - q.ci)
        .collect();
    let mut crossings = Vec::new();
    for i in 0..diff.len() - 1 {
        let (d0, d1) = (diff[i], diff[i + 1]);
        if d0 == 0.0 {
            crossings.push((i, a.points[i].x));
        } else if d0 * d1 < 0.0 {
            let t = d0 / (d0 - d1);
            let x0 = a.points[i].x;
            let x1 = a.points[i + 1].x;
            crossings.push((i, x0 + t * (x1 - x0)));
        }
    }
    if diff.last() == Some(&0.0) {
        crossings.push((diff.len() - 1, a.points.last().unwrap().x));
    }
    match crossings.len() {
        0 => Err(AnalysisError::NoCrossing),
        1 => {
            let (i, x) = crossings[0];
            let j = (i + 1).min(diff.len() - 1);
            let dx = (a.points[j].x - a.points[i].x).abs().max(f64::EPSILON);
            let slope = ((diff[j] - diff[i]) / dx).abs().max(f64::EPSILON);
            let sigma_d = a.points[i]
                .stderr
                .hypot(b.points[i].stderr)
                .max(a.points[j].stderr.hypot(b.points[j].stderr));
            let uncertainty = dx.hypot(sigma_d / slope);
            Ok(Crossing { x, uncertainty })
        }
        _ => Err(AnalysisError::MultipleCrossings(
            crossings.into_iter().map(|(_, x)| x).collect(),
        )),
    }
}

/// Options for [`fss_collapse`].
#[derive(Debug, Clone, Serialize)]
pub struct CollapseOptions {
    pub eth_range: (f64, f64),
    pub nu_range: (f64, f64),
    /// coarse scan resolution per axis
    pub grid: usize,
    /// fraction of points the scaling window must retain
    pub retain_fraction: f64,
    /// local-regression bandwidth as a fraction of the u range
    pub bandwidth_fraction: f64,
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for CollapseOptions {
    fn default() -> Self {
        Self {
            eth_range: (0.40, 0.60),
            nu_range: (0.4, 2.5),
            grid: 40,
            retain_fraction: 0.6,
            bandwidth_fraction: 0.2,
            bootstrap: 100,
            seed: 1,
        }
    }
}

/// Result of a finite-size-scaling collapse.
#[derive(Debug, Clone, Serialize)]
pub struct CollapseResult {
    pub e_th: f64,
    pub nu: f64,
    pub residual: f64,
    pub sigma_eth: f64,
    pub sigma_nu: f64,
    /// set when the optimum sits on the scan boundary
    pub at_boundary: bool,
}

struct CollapsePoint {
    x: f64,
    y: f64,
    sigma: f64,
    d: f64,
}

fn collapse_points(curves: &[CiCurve]) -> Vec<CollapsePoint> {
    let mut pts = Vec::new();
    for c in curves {
        for p in &c.points {
            pts.push(CollapsePoint {
                x: p.x,
                y: p.ci / c.k as f64,
                sigma: p.stderr / c.k as f64,
                d: c.distance as f64,
            });
        }
    }
    pts
}

/// Mean squared deviation of the rescaled points from a local-linear master
/// curve, over the window that retains `retain_fraction` of the points.
fn collapse_objective(
    pts: &[CollapsePoint],
    ys: &[f64],
    e_th: f64,
    nu: f64,
    opts: &CollapseOptions,
) -> f64 {
    let mut us: Vec<(f64, f64)> = pts
        .iter()
        .zip(ys)
        .map(|(p, &y)| ((p.x - e_th) * p.d.powf(1.0 / nu), y))
        .collect();
    let mut abs: Vec<f64> = us.iter().map(|(u, _)| u.abs()).collect();
    abs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let keep = ((pts.len() as f64 * opts.retain_fraction).ceil() as usize).clamp(4, pts.len());
    let u_max = abs[keep - 1];
    us.retain(|(u, _)| u.abs() <= u_max);
    if us.len() < 4 {
        return f64::INFINITY;
    }
    let (u_lo, u_hi) = us
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (u, _)| {
            (lo.min(*u), hi.max(*u))
        });
    let h = ((u_hi - u_lo) * opts.bandwidth_fraction).max(1e-9);
    let mut sum = 0.0;
    let mut used = 0usize;
    for i in 0..us.len() {
        let u0 = us[i].0;
        // leave-one-out tricube-weighted local linear regression; excluding
        // the point itself keeps dense rescalings from shrinking their own
        // residuals
        let (mut sw, mut swu, mut swuu, mut swy, mut swuy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (j, &(u, y)) in us.iter().enumerate() {
            if j == i {
                continue;
            }
            let t = (u - u0).abs() / h;
            if t >= 1.0 {
                continue;
            }
            let w = (1.0 - t * t * t).powi(3);
            let du = u - u0;
            sw += w;
            swu += w * du;
            swuu += w * du * du;
            swy += w * y;
            swuy += w * du * y;
        }
        let det = sw * swuu - swu * swu;
        let yhat = if det.abs() > 1e-12 * sw.max(1.0) {
            (swuu * swy - swu * swuy) / det
        } else if sw > 0.0 {
            swy / sw
        } else {
            continue;
        };
        let r = us[i].1 - yhat;
        sum += r * r;
        used += 1;
    }
    if used == 0 {
        return f64::INFINITY;
    }
    sum / used as f64
}

fn nelder_mead_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    start: (f64, f64),
    scale: (f64, f64),
    bounds: ((f64, f64), (f64, f64)),
    iters: usize,
) -> (f64, f64, f64) {
    let clamp = |p: (f64, f64)| {
        (
            p.0.clamp(bounds.0 .0, bounds.0 .1),
            p.1.clamp(bounds.1 .0, bounds.1 .1),
        )
    };
    let mut simplex = vec![
        clamp(start),
        clamp((start.0 + scale.0, start.1)),
        clamp((start.0, start.1 + scale.1)),
    ];
    let mut vals: Vec<f64> = simplex.iter().map(|&(a, b)| f(a, b)).collect();
    for _ in 0..iters {
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap());
        let (best, mid, worst) = (order[0], order[1], order[2]);
        let centroid = (
            (simplex[best].0 + simplex[mid].0) / 2.0,
            (simplex[best].1 + simplex[mid].1) / 2.0,
        );
        let refl = clamp((
            centroid.0 + (centroid.0 - simplex[worst].0),
            centroid.1 + (centroid.1 - simplex[worst].1),
        ));
        let fr = f(refl.0, refl.1);
        if fr < vals[best] {
            let exp = clamp((
                centroid.0 + 2.0 * (centroid.0 - simplex[worst].0),
                centroid.1 + 2.0 * (centroid.1 - simplex[worst].1),
            ));
            let fe = f(exp.0, exp.1);
            if fe < fr {
                simplex[worst] = exp;
                vals[worst] = fe;
            } else {
                simplex[worst] = refl;
                vals[worst] = fr;
            }
        } else if fr < vals[mid] {
            simplex[worst] = refl;
            vals[worst] = fr;
        } else {
            let con = clamp((
                centroid.0 + 0.5 * (simplex[worst].0 - centroid.0),
                centroid.1 + 0.5 * (simplex[worst].1 - centroid.1),
            ));
            let fc = f(con.0, con.1);
            if fc < vals[worst] {
                simplex[worst] = con;
                vals[worst] = fc;
            } else {
                for i in 0..3 {
                    if i != best {
                        simplex[i] = clamp((
                            (simplex[i].0 + simplex[best].0) / 2.0,
                            (simplex[i].1 + simplex[best].1) / 2.0,
                        ));
                        vals[i] = f(simplex[i].0, simplex[i].1);
                    }
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..3 {
        if vals[i] < vals[best] {
            best = i;
        }
    }
    (simplex[best].0, simplex[best].1, vals[best])
}

fn fit_once(pts: &[CollapsePoint], ys: &[f64], opts: &CollapseOptions) -> (f64, f64, f64) {
    let (e_lo, e_hi) = opts.eth_range;
    let (n_lo, n_hi) = opts.nu_range;
    let g = opts.grid.max(4);
    let mut best = (e_lo, n_lo, f64::INFINITY);
    for i in 0..g {
        let e_th = e_lo + (e_hi - e_lo) * i as f64 / (g - 1) as f64;
        for j in 0..g {
            let nu = n_lo + (n_hi - n_lo) * j as f64 / (g - 1) as f64;
            let v = collapse_objective(pts, ys, e_th, nu, opts);
            if v < best.2 {
                best = (e_th, nu, v);
            }
        }
    }
    let scale = ((e_hi - e_lo) / g as f64, (n_hi - n_lo) / g as f64);
    nelder_mead_2d(
        |a, b| collapse_objective(pts, ys, a, b, opts),
        (best.0, best.1),
        scale,
        ((e_lo, e_hi), (n_lo, n_hi)),
        120,
    )
}

/// Finite-size-scaling collapse: rescales every point to
/// `u = (x - e_th) d^(1/nu)`, `y = ci / k`, and minimizes the mean squared
/// deviation from a tricube local-linear master curve (coarse grid scan, then
/// Nelder-Mead refinement). Parameter errors come from bootstrap over the
/// point noise.
pub fn fss_collapse(
    curves: &[CiCurve],
    opts: &CollapseOptions,
) -> Result<CollapseResult, AnalysisError> {
    let mut distances: Vec<usize> = curves.iter().map(|c| c.distance).collect();
    distances.sort();
    distances.dedup();
    if distances.len() < 3 {
        return Err(AnalysisError::TooFewCurves(distances.len()));
    }
    let pts = collapse_points(curves);
    let ys: Vec<f64> = pts.iter().map(|p| p.y).collect();
    let (e_th, nu, residual) = fit_once(&pts, &ys, opts);

    let replicas = crate::par::map_indexed(opts.bootstrap, |rep| {
        let mut rng = rng::stream(opts.seed, &[0x626f6f74, rep as u64]);
        let noisy: Vec<f64> = pts
            .iter()
            .map(|p| p.y + gaussian(&mut rng) * p.sigma)
            .collect();
        let (e, n, _) = fit_once(&pts, &noisy, opts);
        (e, n)
    });
    let bn = replicas.len() as f64;
    let (me, mn) = replicas
        .iter()
        .fold((0.0, 0.0), |(a, b), &(e, n)| (a + e / bn, b + n / bn));
    let (ve, vn) = replicas.iter().fold((0.0, 0.0), |(a, b), &(e, n)| {
        (a + (e - me) * (e - me) / bn, b + (n - mn) * (n - mn) / bn)
    });
    let eps = 1e-9;
    let at_boundary = e_th - opts.eth_range.0 < eps
        || opts.eth_range.1 - e_th < eps
        || nu - opts.nu_range.0 < eps
        || opts.nu_range.1 - nu < eps;
    Ok(CollapseResult {
        e_th,
        nu,
        residual,
        sigma_eth: ve.sqrt(),
        sigma_nu: vn.sqrt(),
        at_boundary,
    })
}

/// Standard normal via Box-Muller (keeps the dependency surface small).
fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen::<f64>();
        if u > 0.0 {
            let v: f64 = rng.gen();
            return (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos();
        }
    }
}

/// One pseudo-threshold table entry.
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub pair: String,
    pub e: f64,
    pub noise: String,
    pub crossing: f64,
    pub uncertainty: f64,
}
