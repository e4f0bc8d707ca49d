//! `ci-lab`: coherent-information calculators for CSS codes under erasure
//! and Pauli noise, with pseudo-threshold and scaling-collapse extraction.

mod manifest;

use anyhow::{anyhow, bail, Context, Result};
use ci_lab_core::analysis::{self, CiCurve, CollapseOptions};
use ci_lab_core::codes::{self, CodeExport, CssCode, Sector};
use ci_lab_core::coset;
use ci_lab_core::erasure;
use ci_lab_core::noise::{ChannelKind, NoiseSpec, PauliChannel};
use ci_lab_core::statmech;
use clap::{Args, Parser, Subcommand};
use manifest::RunManifest;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "ci-lab", version, about)]
struct Cli {
    /// Worker threads (default: available parallelism; env CI_LAB_WORKERS)
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect and export the built-in code families
    Codes {
        #[command(subcommand)]
        action: CodesAction,
    },
    /// Coherent-information calculators
    Ci {
        #[command(subcommand)]
        action: CiAction,
    },
    /// CI curve over a probability grid at fixed erasure rate
    Scan(ScanArgs),
    /// Crossing point of two CI curves
    Cross {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// divide each curve by its k before crossing
        #[arg(long)]
        normalize: bool,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Finite-size-scaling collapse of erasure CI curves
    Collapse(CollapseArgs),
    /// Pseudo-threshold table from a JSON job list
    Table {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Export the disordered spin model of a code
    ExportStatmech {
        #[arg(long)]
        code: String,
        #[arg(long)]
        noise: String,
        #[arg(long, default_value = "-")]
        out: String,
    },
}

#[derive(Subcommand)]
enum CodesAction {
    /// List the available code families
    List,
    /// Print [[n, k, d]] and structural facts for a code
    Info {
        #[arg(long)]
        code: String,
    },
    /// Run the validation report
    Check {
        #[arg(long)]
        code: String,
    },
    /// Export check and logical matrices (rows hex-packed, low bit first)
    Export {
        #[arg(long)]
        code: String,
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long, default_value = "-")]
        out: String,
    },
}

#[derive(Subcommand)]
enum CiAction {
    /// Erasure-only CI over an erasure-probability grid (stratified MC)
    Erasure {
        #[arg(long)]
        code: String,
        /// grid as start:stop:step
        #[arg(long, value_name = "A:B:STEP")]
        e_grid: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// use the exact 2^n average instead of sampling (small n)
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Exact Pauli-noise CI at zero erasure
    Pauli {
        #[arg(long)]
        code: String,
        /// bf:p1 | bf:p1,p2 | depol:p | general:px,py,pz
        #[arg(long)]
        noise: String,
        /// Monte Carlo samples for the partition-function fallback
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// CI under combined Pauli + erasure noise
    Combined {
        #[arg(long)]
        code: String,
        #[arg(long)]
        noise: String,
        #[arg(long)]
        erasure: f64,
        #[arg(long, default_value_t = 5_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "-")]
        out: String,
    },
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    code: String,
    /// bf | depol (sweep variable is p1 for bf, p for depol)
    #[arg(long)]
    noise_kind: String,
    #[arg(long, value_name = "A:B:STEP")]
    p_grid: String,
    #[arg(long, default_value_t = 0.0)]
    erasure: f64,
    /// auto | exact | statmech
    #[arg(long, default_value = "auto")]
    method: String,
    #[arg(long, default_value_t = 4_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct CollapseArgs {
    /// CSV curve files produced by `ci erasure`
    #[arg(long, num_args = 1.., required = true)]
    curves: Vec<PathBuf>,
    #[arg(long, value_name = "LO:HI", default_value = "0.40:0.60")]
    eth_range: String,
    #[arg(long, value_name = "LO:HI", default_value = "0.4:2.5")]
    nu_range: String,
    #[arg(long, default_value_t = 100)]
    bootstrap: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "-")]
    out: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli
        .workers
        .or_else(|| {
            std::env::var("CI_LAB_WORKERS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);
    if workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
        {
            eprintln!("ci-lab: failed to size worker pool: {e}");
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ci-lab: {e:#}");
            // usage-shaped problems exit 2, computation failures exit 1
            let msg = format!("{e:#}");
            if msg.contains("unknown code spec")
                || msg.contains("invalid grid")
                || msg.contains("invalid noise spec")
                || msg.contains("invalid code parameter")
            {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        bail!("invalid grid '{spec}' (expected start:stop:step)");
    }
    let a: f64 = parts[0].parse().map_err(|_| anyhow!("invalid grid '{spec}'"))?;
    let b: f64 = parts[1].parse().map_err(|_| anyhow!("invalid grid '{spec}'"))?;
    let step: f64 = parts[2].parse().map_err(|_| anyhow!("invalid grid '{spec}'"))?;
    if step <= 0.0 || b < a {
        bail!("invalid grid '{spec}'");
    }
    let n = ((b - a) / step + 1.5 * f64::EPSILON.max(1e-12) / step).floor() as usize + 1;
    Ok((0..n).map(|i| a + i as f64 * step).collect())
}

fn parse_noise(spec: &str) -> Result<PauliChannel> {
    let (kind, params) = spec
        .split_once(':')
        .ok_or_else(|| anyhow!("invalid noise spec '{spec}'"))?;
    let nums: Vec<f64> = params
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| anyhow!("invalid noise spec '{spec}'"))?;
    let ch = match (kind, nums.as_slice()) {
        ("bf", [p1]) => PauliChannel::bit_phase_flip(*p1),
        ("bf", [p1, p2]) => PauliChannel::bit_phase_flip_asym(*p1, *p2),
        ("depol", [p]) => PauliChannel::depolarizing(*p),
        ("general", [px, py, pz]) => PauliChannel::general(*px, *py, *pz),
        _ => bail!("invalid noise spec '{spec}'"),
    };
    ch.map_err(|e| anyhow!("invalid noise spec '{spec}': {e}"))
}

fn build_code(spec: &str) -> Result<CssCode> {
    codes::parse_spec(spec).map_err(|e| match e {
        codes::CodeError::UnknownSpec(s) => anyhow!("unknown code spec '{s}'"),
        other => anyhow!("{other}"),
    })
}

fn write_output(path: &str, contents: &str) -> Result<()> {
    if path == "-" {
        print!("{contents}");
        Ok(())
    } else {
        std::fs::write(path, contents).with_context(|| format!("writing {path}"))
    }
}

fn curve_to_csv(curve: &CiCurve, xname: &str, manifest: &RunManifest) -> String {
    let mut out = String::new();
    out.push_str(&format!("# manifest: {}\n", manifest.to_json(curve)));
    out.push_str(&format!("{xname},ci,stderr\n"));
    for p in &curve.points {
        out.push_str(&format!("{},{},{}\n", p.x, p.ci, p.stderr));
    }
    out
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Codes { action } => run_codes(action),
        Command::Ci { action } => run_ci(action),
        Command::Scan(args) => run_scan(args),
        Command::Cross { a, b, normalize, out } => run_cross(&a, &b, normalize, &out),
        Command::Collapse(args) => run_collapse(args),
        Command::Table { config, out } => run_table(&config, &out),
        Command::ExportStatmech { code, noise, out } => {
            let c = build_code(&code)?;
            let ch = parse_noise(&noise)?;
            let model = statmech::build_spin_model(&c, &ch)?;
            write_output(&out, &statmech::export_model(&model))
        }
    }
}

fn run_codes(action: CodesAction) -> Result<()> {
    match action {
        CodesAction::List => {
            println!("surface:d   rotated surface code [[d^2, 1, d]], odd d >= 1");
            println!("color:d     4.8.8 triangular color code [[(d^2-1)/2 + d, 1, d]], odd d >= 3");
            println!("toric:d     toric code [[2d^2, 2, d]], d >= 2");
            println!("lcs:L,ell   lift-connected surface code [[((ell+1)^2 + ell^2)L, L, min(L, 2ell+1)]]");
            Ok(())
        }
        CodesAction::Info { code } => {
            let c = build_code(&code)?;
            println!("{}: [[{}, {}, {}]]", c.name, c.n, c.k, c.declared_distance);
            println!("X checks: {} rows, Z checks: {} rows", c.hx.rows(), c.hz.rows());
            let report = codes::validate(&c);
            println!("valid: {}", report.is_valid());
            if c.hx.rows() + c.k <= 26 && c.n <= 64 {
                let dx = codes::distance_bruteforce(&c, Sector::X)
                    .map(|d| d.to_string())
                    .unwrap_or_else(|_| "-".into());
                let dz = codes::distance_bruteforce(&c, Sector::Z)
                    .map(|d| d.to_string())
                    .unwrap_or_else(|_| "-".into());
                println!("brute-force distance: X {dx}, Z {dz}");
            }
            Ok(())
        }
        CodesAction::Check { code } => {
            let c = build_code(&code)?;
            let report = codes::validate(&c);
            if report.is_valid() {
                println!("{}: all invariants hold", c.name);
                Ok(())
            } else {
                for f in &report.failures {
                    println!("{}: FAIL {f}", c.name);
                }
                bail!("validation failed");
            }
        }
        CodesAction::Export { code, format, out } => {
            if format != "json" {
                bail!("invalid grid: unsupported export format '{format}'");
            }
            let c = build_code(&code)?;
            let export = CodeExport::from_code(&c);
            write_output(&out, &serde_json::to_string_pretty(&export)?)
        }
    }
}

fn run_ci(action: CiAction) -> Result<()> {
    match action {
        CiAction::Erasure {
            code,
            e_grid,
            samples,
            seed,
            exact,
            out,
        } => {
            let start = Instant::now();
            let c = build_code(&code)?;
            let grid = parse_grid(&e_grid)?;
            let curve = if exact {
                let points = grid
                    .iter()
                    .map(|&e| {
                        erasure::exact_ci(&c, e).map(|ci| analysis::CiPoint { x: e, ci, stderr: 0.0 })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                CiCurve {
                    label: c.name.clone(),
                    distance: c.declared_distance,
                    k: c.k,
                    points,
                }
            } else {
                erasure::stratified_ci(&c, &grid, samples, seed)
            };
            let manifest = RunManifest::new("ci erasure")
                .code(&code)
                .grid(&e_grid)
                .samples(samples)
                .seed(seed)
                .wall_ms(start.elapsed().as_millis());
            write_output(&out, &curve_to_csv(&curve, "e", &manifest))
        }
        CiAction::Pauli {
            code,
            noise,
            samples,
            seed,
            out,
        } => {
            let start = Instant::now();
            let c = build_code(&code)?;
            let ch = parse_noise(&noise)?;
            let (ci, stderr, method) = match coset::pauli_ci(&c, &ch) {
                Ok(ci) => (ci, 0.0, "coset-exact"),
                Err(coset::CosetError::TooLarge(_)) => {
                    let spec = NoiseSpec::new(ch, 0.0)?;
                    let (ci, err) = statmech::ci_statmech(&c, &spec, samples, seed)?;
                    (ci, err, "statmech-mc")
                }
            };
            let manifest = RunManifest::new("ci pauli")
                .code(&code)
                .noise(&noise)
                .samples(samples)
                .seed(seed)
                .wall_ms(start.elapsed().as_millis());
            let doc = json!({
                "manifest": manifest.to_value(),
                "ci": ci,
                "stderr": stderr,
                "method": method,
                "runtime_ms": start.elapsed().as_millis() as u64,
            });
            write_output(&out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))
        }
        CiAction::Combined {
            code,
            noise,
            erasure: e,
            samples,
            seed,
            out,
        } => {
            let start = Instant::now();
            let c = build_code(&code)?;
            let ch = parse_noise(&noise)?;
            let spec = NoiseSpec::new(ch, e)?;
            let (ci, stderr, method) = match coset::combined_ci(&c, &spec, samples, seed) {
                Ok((ci, err)) => {
                    let m = if err == 0.0 { "coset-exact" } else { "coset-stratified" };
                    (ci, err, m)
                }
                Err(coset::CosetError::TooLarge(_)) => {
                    let (ci, err) = statmech::ci_statmech(&c, &spec, samples, seed)?;
                    (ci, err, "statmech-mc")
                }
            };
            let manifest = RunManifest::new("ci combined")
                .code(&code)
                .noise(&noise)
                .erasure(e)
                .samples(samples)
                .seed(seed)
                .wall_ms(start.elapsed().as_millis());
            let doc = json!({
                "manifest": manifest.to_value(),
                "ci": ci,
                "stderr": stderr,
                "method": method,
            });
            write_output(&out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))
        }
    }
}

fn scan_curve(
    code: &CssCode,
    kind: &ChannelKind,
    p_grid: &[f64],
    e: f64,
    method: &str,
    samples: usize,
    seed: u64,
) -> Result<(CiCurve, &'static str)> {
    let exact = coset::scan_combined_exact(code, kind, p_grid, &[e]);
    match (method, exact) {
        ("statmech", _) => {}
        ("auto", Ok(mut curves)) | ("exact", Ok(mut curves)) => {
            return Ok((curves.pop().unwrap(), "coset-exact"))
        }
        ("exact", Err(e)) => return Err(e.into()),
        ("auto", Err(_)) => {}
        (other, _) => bail!("invalid grid: unknown scan method '{other}'"),
    }
    // partition-function Monte Carlo per grid point
    let points = p_grid
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let ch = match kind {
                ChannelKind::BitPhaseFlip { .. } => PauliChannel::bit_phase_flip(p)?,
                ChannelKind::Depolarizing { .. } => PauliChannel::depolarizing(p)?,
                ChannelKind::General => bail!("statmech scan needs bf or depol"),
            };
            let spec = NoiseSpec::new(ch, e)?;
            let (ci, stderr) = statmech::ci_statmech(code, &spec, samples, seed.wrapping_add(i as u64))?;
            Ok(analysis::CiPoint { x: p, ci, stderr })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((
        CiCurve {
            label: format!("{} e={e}", code.name),
            distance: code.declared_distance,
            k: code.k,
            points,
        },
        "statmech-mc",
    ))
}

fn run_scan(args: ScanArgs) -> Result<()> {
    let start = Instant::now();
    let c = build_code(&args.code)?;
    let grid = parse_grid(&args.p_grid)?;
    let kind = match args.noise_kind.as_str() {
        "bf" => ChannelKind::BitPhaseFlip { p1: 0.0, p2: 0.0 },
        "depol" => ChannelKind::Depolarizing { p: 0.0 },
        other => bail!("invalid noise spec '{other}' (expected bf or depol)"),
    };
    let (curve, method) = scan_curve(&c, &kind, &grid, args.erasure, &args.method, args.samples, args.seed)?;
    let manifest = RunManifest::new("scan")
        .code(&args.code)
        .noise(&args.noise_kind)
        .erasure(args.erasure)
        .grid(&args.p_grid)
        .samples(args.samples)
        .seed(args.seed)
        .method(method)
        .wall_ms(start.elapsed().as_millis());
    write_output(&args.out, &curve_to_csv(&curve, "p", &manifest))
}

fn read_curve_csv(path: &PathBuf) -> Result<CiCurve> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path:?}"))?;
    manifest::parse_curve_csv(&text).ok_or_else(|| anyhow!("{path:?} is not a ci-lab curve CSV"))
}

fn run_cross(a: &PathBuf, b: &PathBuf, normalize: bool, out: &str) -> Result<()> {
    let mut ca = read_curve_csv(a)?;
    let mut cb = read_curve_csv(b)?;
    if normalize {
        for c in [&mut ca, &mut cb] {
            let k = c.k as f64;
            for p in &mut c.points {
                p.ci /= k;
                p.stderr /= k;
            }
        }
    }
    let crossing = analysis::find_crossing(&ca, &cb)?;
    let doc = json!({
        "a": ca.label,
        "b": cb.label,
        "normalized": normalize,
        "x": crossing.x,
        "uncertainty": crossing.uncertainty,
    });
    write_output(out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))
}

fn parse_range(spec: &str) -> Result<(f64, f64)> {
    let (lo, hi) = spec
        .split_once(':')
        .ok_or_else(|| anyhow!("invalid grid '{spec}' (expected lo:hi)"))?;
    Ok((lo.parse()?, hi.parse()?))
}

fn run_collapse(args: CollapseArgs) -> Result<()> {
    let curves = args
        .curves
        .iter()
        .map(read_curve_csv)
        .collect::<Result<Vec<_>>>()?;
    let opts = CollapseOptions {
        eth_range: parse_range(&args.eth_range)?,
        nu_range: parse_range(&args.nu_range)?,
        bootstrap: args.bootstrap,
        seed: args.seed,
        ..Default::default()
    };
    let fit = analysis::fss_collapse(&curves, &opts)?;
    let doc = json!({
        "curves": curves.iter().map(|c| c.label.clone()).collect::<Vec<_>>(),
        "options": opts,
        "e_th": fit.e_th,
        "nu": fit.nu,
        "residual": fit.residual,
        "sigma_eth": fit.sigma_eth,
        "sigma_nu": fit.sigma_nu,
        "at_boundary": fit.at_boundary,
    });
    write_output(&args.out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))
}

#[derive(serde::Deserialize)]
struct TableJob {
    pair: (String, String),
    noise: String,
    e: Vec<f64>,
    p_grid: String,
}

#[derive(serde::Deserialize)]
struct TableConfig {
    jobs: Vec<TableJob>,
}

fn run_table(config: &PathBuf, out: &str) -> Result<()> {
    let cfg: TableConfig = serde_json::from_str(
        &std::fs::read_to_string(config).with_context(|| format!("reading {config:?}"))?,
    )
    .context("invalid grid: bad table config")?;
    let mut rows = Vec::new();
    for job in &cfg.jobs {
        let code_a = build_code(&job.pair.0)?;
        let code_b = build_code(&job.pair.1)?;
        let grid = parse_grid(&job.p_grid)?;
        let kind = match job.noise.as_str() {
            "bf" => ChannelKind::BitPhaseFlip { p1: 0.0, p2: 0.0 },
            "depol" => ChannelKind::Depolarizing { p: 0.0 },
            other => bail!("invalid noise spec '{other}'"),
        };
        let curves_a = coset::scan_combined_exact(&code_a, &kind, &grid, &job.e)?;
        let curves_b = coset::scan_combined_exact(&code_b, &kind, &grid, &job.e)?;
        for (i, &e) in job.e.iter().enumerate() {
            let mut a = curves_a[i].clone();
            let mut b = curves_b[i].clone();
            for c in [&mut a, &mut b] {
                let k = c.k as f64;
                for p in &mut c.points {
                    p.ci /= k;
                }
            }
            let crossing = analysis::find_crossing(&a, &b)?;
            rows.push(analysis::TableRow {
                pair: format!("{} vs {}", job.pair.0, job.pair.1),
                e,
                noise: job.noise.clone(),
                crossing: crossing.x,
                uncertainty: crossing.uncertainty,
            });
        }
    }
    let mut csv = String::from("pair,noise,e,crossing,uncertainty\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.pair, r.noise, r.e, r.crossing, r.uncertainty
        ));
    }
    write_output(out, &csv)
}
