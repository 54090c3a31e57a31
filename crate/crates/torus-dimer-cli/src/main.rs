//! Batch front end for the torus dimer library.
//!
//! Every subcommand emits CSV with a header row and floats at 17 significant
//! digits, to stdout or to --out; file output gets a JSON manifest recording
//! the command line, seeds, version, wall time and a sha256 of each output.
//! Identical inputs and seeds produce byte-identical CSV. Exit codes: 0 on
//! success, 2 when a precondition is violated, 3 when a resource cap bites.

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;
use torus_dimer::config::{enumerate, enumerate_partition_function};
use torus_dimer::events::{alternating_event, chessboard_report, diamond_forcing_report};
use torus_dimer::kasteleyn::pfaffian_partition_function;
use torus_dimer::mcmc::{estimate, PlaquetteSampler};
use torus_dimer::refstate::ReferenceStateFamily;
use torus_dimer::suzuki::{ground_space, staggered_projector_expectation, SpinChainOperator, StaggeredPhase};
use torus_dimer::transfer::{efp_profile, partition_function};
use torus_dimer::{DimerConfig, Error, Limits, TorusLattice};

#[derive(Parser)]
#[command(name = "torus-dimer", version, about = "Torus dimer model: exact counts, EFP tables, samplers and the related spin chain")]
struct Cli {
    /// Write CSV to this file instead of stdout (a .manifest.json lands beside it)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Explicit manifest path (default: derived from --out)
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Cap on transfer-matrix row width in bits (state space is (2^width))
    #[arg(long, global = true, default_value_t = Limits::default().max_state_bits)]
    max_states: usize,
    /// Cap on exhaustively enumerated configurations
    #[arg(long, global = true, default_value_t = Limits::default().max_configs)]
    max_configs: u64,
    /// Cap on dense matrix dimension (Pfaffian, eigensolver)
    #[arg(long, global = true, default_value_t = Limits::default().max_matrix_dim)]
    max_dim: usize,
    /// Worker budget; the current computations are single-threaded
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ZfnMethod {
    All,
    Enumerate,
    Transfer,
    Kasteleyn,
}

#[derive(Clone, Copy, ValueEnum)]
enum Init {
    Horizontal,
    Vertical,
}

#[derive(Clone, Copy, ValueEnum)]
enum Observable {
    /// Vertical dimers per site
    VDensity,
    /// Indicator of the alternating row event of half-width --event-n
    Event,
}

#[derive(Clone, Copy, ValueEnum)]
enum Phase {
    Down,
    Up,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Partition function by every applicable method.
    /// CSV: width,height,z,method,value
    Zfn {
        #[arg(long = "N")]
        width: usize,
        #[arg(long = "M")]
        height: usize,
        #[arg(long)]
        z: f64,
        #[arg(long, value_enum, default_value_t = ZfnMethod::All)]
        method: ZfnMethod,
    },
    /// Exact alternating-event probabilities for a range of half-widths.
    /// CSV: width,height,z,n,ln_probability,probability,normalized_exponent
    Efp {
        #[arg(long = "N")]
        width: usize,
        #[arg(long = "M")]
        height: usize,
        #[arg(long)]
        z: f64,
        #[arg(long, default_value_t = 1)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
    },
    /// Dump every configuration with its weight.
    /// CSV: index,vertical_count,weight,labels (rows bottom to top, '/'-separated)
    Enumerate {
        #[arg(long = "N")]
        width: usize,
        #[arg(long = "M")]
        height: usize,
        #[arg(long, default_value_t = 1.0)]
        z: f64,
    },
    /// Exhaustive check of the event/diamond forcing claim.
    /// CSV: width,height,n,configs,event_count,diamond_count,event_without_diamond,diamond_without_event,corrected_mismatches
    LemmaCheck {
        #[arg(long = "N")]
        width: usize,
        #[arg(long = "M")]
        height: usize,
        #[arg(long)]
        n: usize,
    },
    /// Reflection bound for the alternating event after k width doublings.
    /// CSV: width,height,z,n,doublings,ln_lhs,ln_rhs,holds
    ChessboardCheck {
        #[arg(long = "N")]
        width: usize,
        #[arg(long = "M")]
        height: usize,
        #[arg(long)]
        z: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        doublings: u32,
    },
    /// Count and entropy of the block reference family.
    /// CSV: width,height,ell,count,ln_count,entropy_bits_per_site
    Refstate {
        #[arg(long = "N")]
        width: usize,
        #[arg(long = "M")]
        height: usize,
        #[arg(long)]
        ell: usize,
    },
    /// Metropolis plaquette sampling of an observable.
    /// CSV: chain,seed,sweeps,observable,mean,stderr
    Mcmc {
        #[arg(long = "N")]
        width: usize,
        #[arg(long = "M")]
        height: usize,
        #[arg(long)]
        z: f64,
        #[arg(long)]
        sweeps: u64,
        #[arg(long, default_value_t = 0)]
        burn_in: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        chains: u64,
        #[arg(long, default_value_t = 20)]
        batches: usize,
        #[arg(long, value_enum, default_value_t = Init::Horizontal)]
        init: Init,
        #[arg(long, value_enum, default_value_t = Observable::VDensity)]
        observable: Observable,
        #[arg(long, default_value_t = 1)]
        event_n: usize,
    },
    /// Ground-space staggered projector profile of the related spin chain.
    /// CSV: sites,z,n,phase,expectation,ln_expectation
    Suzuki {
        #[arg(long = "N")]
        sites: usize,
        #[arg(long)]
        z: f64,
        #[arg(long)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = Phase::Both)]
        phase: Phase,
    },
    /// Decay-exponent table with a least-squares fit of ln P against
    /// n*min(n,M). CSV: width,height,z,n,scale,ln_probability,exponent
    FitDecay {
        #[arg(long = "N")]
        width: usize,
        #[arg(long = "M")]
        height: usize,
        #[arg(long)]
        z: f64,
        #[arg(long, default_value_t = 1)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
    },
}

/// CSV payload plus manifest extras produced by one subcommand.
struct Output {
    header: &'static str,
    rows: Vec<String>,
    extra: BTreeMap<String, serde_json::Value>,
    notes: Vec<String>,
}

impl Output {
    fn new(header: &'static str) -> Self {
        Output { header, rows: Vec::new(), extra: BTreeMap::new(), notes: Vec::new() }
    }

    fn csv(&self) -> String {
        let mut s = String::from(self.header);
        s.push('\n');
        for r in &self.rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }
}

/// 17 significant digits, stable across runs.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn lattice(width: usize, height: usize) -> Result<TorusLattice, Error> {
    TorusLattice::new(width, height)
}

fn run(cli: &Cli) -> Result<Output, Error> {
    let limits = Limits {
        max_state_bits: cli.max_states,
        max_configs: cli.max_configs,
        max_matrix_dim: cli.max_dim,
    };
    match cli.command {
        Command::Zfn { width, height, z, method } => {
            let lat = lattice(width, height)?;
            let mut out = Output::new("width,height,z,method,value");
            let mut push = |name: &str, v: f64| {
                out.rows.push(format!("{width},{height},{},{name},{}", fmt(z), fmt(v)));
            };
            match method {
                ZfnMethod::All => {
                    push("enumerate", enumerate_partition_function(lat, z, limits.max_configs)?);
                    push("transfer", partition_function(lat, z, &limits)?);
                    if height >= 2 {
                        push("kasteleyn", pfaffian_partition_function(lat, z, &limits)?);
                    } else {
                        out.notes.push("kasteleyn skipped: no vertical edges at M=1".into());
                    }
                }
                ZfnMethod::Enumerate => push("enumerate", enumerate_partition_function(lat, z, limits.max_configs)?),
                ZfnMethod::Transfer => push("transfer", partition_function(lat, z, &limits)?),
                ZfnMethod::Kasteleyn => push("kasteleyn", pfaffian_partition_function(lat, z, &limits)?),
            }
            Ok(out)
        }
        Command::Efp { width, height, z, n_min, n_max } => {
            if n_min == 0 || n_min > n_max {
                return Err(Error::Precondition(format!("cli: need 1 <= n-min <= n-max, got {n_min}..{n_max}")));
            }
            let lat = lattice(width, height)?;
            let ns: Vec<usize> = (n_min..=n_max).collect();
            let recs = efp_profile(lat, z, &ns, &limits)?;
            let mut out = Output::new("width,height,z,n,ln_probability,probability,normalized_exponent");
            for r in &recs {
                out.rows.push(format!(
                    "{width},{height},{},{},{},{},{}",
                    fmt(z),
                    r.n,
                    fmt(r.ln_probability),
                    fmt(r.probability),
                    fmt(r.normalized_exponent)
                ));
            }
            Ok(out)
        }
        Command::Enumerate { width, height, z } => {
            let lat = lattice(width, height)?;
            let mut out = Output::new("index,vertical_count,weight,labels");
            let mut it = enumerate(lat, limits.max_configs);
            let mut idx = 0u64;
            while let Some(step) = it.advance() {
                step?;
                let c = it.current();
                out.rows.push(format!(
                    "{idx},{},{},{}",
                    c.vertical_count(),
                    fmt(z.powi(c.vertical_count() as i32)),
                    c.to_ascii().replace('\n', "/")
                ));
                idx += 1;
            }
            Ok(out)
        }
        Command::LemmaCheck { width, height, n } => {
            let lat = lattice(width, height)?;
            let rep = diamond_forcing_report(lat, n, limits.max_configs)?;
            let mut out = Output::new("width,height,n,configs,event_count,diamond_count,event_without_diamond,diamond_without_event,corrected_mismatches");
            out.rows.push(format!(
                "{width},{height},{n},{},{},{},{},{},{}",
                rep.configs,
                rep.event_count,
                rep.pattern_count,
                rep.event_without_pattern,
                rep.pattern_without_event,
                rep.corrected_equivalence_mismatches
            ));
            out.notes.push(format!(
                "forcing direction (event implies diamond): OK, {} counterexamples",
                rep.event_without_pattern
            ));
            if rep.pattern_without_event > 0 {
                out.notes.push(format!(
                    "converse direction: {} counterexamples; the diamond leaves column 2n-1 of row 0 free",
                    rep.pattern_without_event
                ));
                out.notes.push(format!(
                    "corrected statement (diamond and column 2n-1 not U): {} mismatches",
                    rep.corrected_equivalence_mismatches
                ));
            }
            if let Some(w) = &rep.first_pattern_without_event {
                out.extra.insert(
                    "first_diamond_without_event".into(),
                    serde_json::Value::String(w.clone()),
                );
            }
            Ok(out)
        }
        Command::ChessboardCheck { width, height, z, n, doublings } => {
            let lat = lattice(width, height)?;
            let rep: torus_dimer::ChessboardReport64 = chessboard_report(lat, z, n, doublings, &limits)?;
            let mut out = Output::new("width,height,z,n,doublings,ln_lhs,ln_rhs,holds");
            out.rows.push(format!(
                "{width},{height},{},{n},{doublings},{},{},{}",
                fmt(z),
                fmt(rep.ln_lhs),
                fmt(rep.ln_rhs),
                rep.holds
            ));
            Ok(out)
        }
        Command::Refstate { width, height, ell } => {
            let lat = lattice(width, height)?;
            let fam = ReferenceStateFamily::new(lat, ell)?;
            let mut out = Output::new("width,height,ell,count,ln_count,entropy_bits_per_site");
            out.rows.push(format!(
                "{width},{height},{ell},{},{},{}",
                fam.count()?,
                fmt(fam.ln_count()),
                fmt(fam.entropy_density_bits())
            ));
            Ok(out)
        }
        Command::Mcmc {
            width,
            height,
            z,
            sweeps,
            burn_in,
            seed,
            chains,
            batches,
            init,
            observable,
            event_n,
        } => {
            let lat = lattice(width, height)?;
            let mut out = Output::new("chain,seed,sweeps,observable,mean,stderr");
            let (label, event) = match observable {
                Observable::VDensity => ("v_density".to_string(), None),
                Observable::Event => (format!("event_n{event_n}"), Some(alternating_event(lat, event_n)?)),
            };
            let sites = lat.sites() as f64;
            let mut acceptance = Vec::new();
            for chain in 0..chains {
                let chain_seed = seed.wrapping_add(chain);
                let start = match init {
                    Init::Horizontal => DimerConfig::all_horizontal(lat),
                    Init::Vertical => DimerConfig::all_vertical(lat)?,
                };
                let rng = ChaCha8Rng::seed_from_u64(chain_seed);
                let mut sampler = PlaquetteSampler::new(start, z, rng)?;
                let summary = estimate(&mut sampler, burn_in, sweeps, batches, |c| match &event {
                    None => c.vertical_count() as f64 / sites,
                    Some(e) => {
                        if e.contains(c) {
                            1.0
                        } else {
                            0.0
                        }
                    }
                })?;
                out.rows.push(format!(
                    "{chain},{chain_seed},{},{label},{},{}",
                    summary.sweeps,
                    fmt(summary.mean),
                    fmt(summary.std_error)
                ));
                acceptance.push(serde_json::json!(summary.acceptance));
            }
            out.extra.insert("acceptance_rate_per_chain".into(), serde_json::Value::Array(acceptance));
            out.extra.insert("batches".into(), serde_json::json!(batches));
            Ok(out)
        }
        Command::Suzuki { sites, z, n_max, phase } => {
            if n_max > sites {
                return Err(Error::Precondition(format!("cli: n-max {n_max} exceeds chain length {sites}")));
            }
            let op = SpinChainOperator::build(sites, z, &limits)?;
            let gs = ground_space(&op, None)?;
            let mut out = Output::new("sites,z,n,phase,expectation,ln_expectation");
            let phases: &[(StaggeredPhase, &str)] = match phase {
                Phase::Down => &[(StaggeredPhase::DownFirst, "down")],
                Phase::Up => &[(StaggeredPhase::UpFirst, "up")],
                Phase::Both => &[(StaggeredPhase::DownFirst, "down"), (StaggeredPhase::UpFirst, "up")],
            };
            for n in 1..=n_max {
                for (p, name) in phases {
                    let v = staggered_projector_expectation(&gs, n, *p)?;
                    out.rows.push(format!(
                        "{sites},{},{n},{name},{},{}",
                        fmt(z),
                        fmt(v),
                        fmt(v.ln())
                    ));
                }
            }
            out.extra.insert("ground_energy".into(), serde_json::json!(gs.energy()));
            out.extra.insert("ground_degeneracy".into(), serde_json::json!(gs.degeneracy()));
            out.extra.insert("hermiticity_defect".into(), serde_json::json!(op.hermiticity_defect()));
            out.extra.insert("degeneracy_tolerance".into(), serde_json::json!(1e-8 * op.norm_bound()));
            Ok(out)
        }
        Command::FitDecay { width, height, z, n_min, n_max } => {
            if n_min == 0 || n_min > n_max {
                return Err(Error::Precondition(format!("cli: need 1 <= n-min <= n-max, got {n_min}..{n_max}")));
            }
            let lat = lattice(width, height)?;
            let ns: Vec<usize> = (n_min..=n_max).collect();
            let recs = efp_profile(lat, z, &ns, &limits)?;
            let mut out = Output::new("width,height,z,n,scale,ln_probability,exponent");
            let pts: Vec<(f64, f64)> = recs
                .iter()
                .map(|r| ((r.n * r.n.min(height)) as f64, r.ln_probability))
                .collect();
            for (r, (scale, _)) in recs.iter().zip(&pts) {
                out.rows.push(format!(
                    "{width},{height},{},{},{},{},{}",
                    fmt(z),
                    r.n,
                    fmt(*scale),
                    fmt(r.ln_probability),
                    fmt(r.normalized_exponent)
                ));
            }
            // Least squares of ln P against the scale variable.
            let m = pts.len() as f64;
            let sx: f64 = pts.iter().map(|p| p.0).sum();
            let sy: f64 = pts.iter().map(|p| p.1).sum();
            let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
            let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
            let denom = m * sxx - sx * sx;
            if denom.abs() > 1e-30 {
                let slope = (m * sxy - sx * sy) / denom;
                let intercept = (sy - slope * sx) / m;
                let max_residual = pts
                    .iter()
                    .map(|p| (p.1 - slope * p.0 - intercept).abs())
                    .fold(0.0f64, f64::max);
                out.extra.insert("fit_slope".into(), serde_json::json!(slope));
                out.extra.insert("fit_intercept".into(), serde_json::json!(intercept));
                out.extra.insert("fit_max_residual".into(), serde_json::json!(max_residual));
                out.notes.push(format!(
                    "ln P = {slope:.6} * scale + {intercept:.6}, max residual {max_residual:.3e}"
                ));
            }
            Ok(out)
        }
    }
}

#[derive(serde::Serialize)]
struct ManifestFile {
    path: String,
    bytes: usize,
    sha256: String,
}

#[derive(serde::Serialize)]
struct Manifest {
    command_line: Vec<String>,
    version: String,
    wall_ms: u128,
    outputs: Vec<ManifestFile>,
    extra: BTreeMap<String, serde_json::Value>,
}

fn emit(cli: &Cli, out: &Output, started: Instant) -> std::io::Result<()> {
    let csv = out.csv();
    for note in &out.notes {
        eprintln!("note: {note}");
    }
    let mut outputs = Vec::new();
    match &cli.out {
        None => {
            std::io::stdout().write_all(csv.as_bytes())?;
        }
        Some(path) => {
            std::fs::write(path, csv.as_bytes())?;
            outputs.push(ManifestFile {
                path: path.display().to_string(),
                bytes: csv.len(),
                sha256: hex::encode(Sha256::digest(csv.as_bytes())),
            });
        }
    }
    let manifest_path = cli.manifest.clone().or_else(|| {
        cli.out.as_ref().map(|p| {
            let mut q = p.clone();
            q.set_extension("manifest.json");
            q
        })
    });
    if let Some(path) = manifest_path {
        let manifest = Manifest {
            command_line: std::env::args().collect(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_ms: started.elapsed().as_millis(),
            outputs,
            extra: out.extra.clone(),
        };
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    }
    Ok(())
}

fn main() {
    let started = Instant::now();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if let Err(e) = emit(&cli, &out, started) {
                eprintln!("error: {e}");
                std::process::exit(1);
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Precondition(_) => 2,
                Error::Capacity(_) => 3,
                Error::Numerical(_) => 1,
            };
            std::process::exit(code);
        }
    }
}
