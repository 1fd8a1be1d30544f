use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use sodatlas::arithmetic::{dam_order, dp6_consistency, index_formula_check, is_rational_profile, is_rich_profile};
use sodatlas::catalog::{catalog_ids, standard_sod, verify_all, verify_link};
use sodatlas::equivariant::{
    atom_multiset, burnside_invariant, format_abelian, h1_picard, invariant_rank, minimality_proxy, orbits,
};
use sodatlas::format::{parse_action_file, parse_collection, parse_contraction, parse_group, parse_profiles, parse_steps, parse_surface};
use sodatlas::lattice::enumerate_r_classes;
use sodatlas::mutation::{apply_move_unchecked, check_collection, parse_script};
use sodatlas::{selftest, Error, SurfaceModel};

#[derive(Parser)]
#[command(name = "sodatlas", version, about = "Exact K-theory and lattice computations on rational surfaces")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the r-classes (D² = r, D·K = -2 - r) of a del Pezzo model.
    Classes {
        #[arg(long)]
        degree: i64,
        #[arg(long, allow_hyphen_values = true)]
        r: i64,
    },
    /// Standard collection and Gram matrix of a surface file.
    Sod {
        #[arg(long)]
        surface: PathBuf,
    },
    /// Replay a move script on a collection, checking every step.
    Mutate {
        #[arg(long)]
        collection: PathBuf,
        #[arg(long)]
        script: PathBuf,
    },
    /// Verify catalog links and print their certificates as JSON lines.
    VerifyLink(VerifyArgs),
    /// Invariant rank, orbits, H¹ and minimality of a group action.
    Group {
        #[arg(long)]
        action: PathBuf,
        /// Surface file, if the action file has no surface entries.
        #[arg(long)]
        surface: Option<PathBuf>,
    },
    /// Atom multiset of a G-surface with a chosen contraction.
    Atoms {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long)]
        action: PathBuf,
        #[arg(long)]
        contraction: PathBuf,
    },
    /// Burnside element of a sequence of blow-ups and blow-downs.
    Invariant {
        #[arg(long)]
        steps: PathBuf,
    },
    /// Index formula and consistency checks for atom profiles.
    Profile {
        #[arg(long)]
        file: PathBuf,
    },
    /// Run the embedded acceptance suite.
    Selftest,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, conflicts_with = "all", required_unless_present = "all")]
    id: Option<String>,
    #[arg(long)]
    all: bool,
    /// Also write one `<id>.jsonl` file per case into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A run that finished but found a failing check.
#[derive(Debug)]
struct Failed(String);

impl std::fmt::Display for Failed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Failed {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Failed>().is_some() {
        return 1;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::Verification(_)) => 1,
        _ => 2,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Classes { degree, r } => classes(degree, r),
        Cmd::Sod { surface } => sod(&surface),
        Cmd::Mutate { collection, script } => mutate(&collection, &script),
        Cmd::VerifyLink(args) => verify(args),
        Cmd::Group { action, surface } => group(&action, surface.as_deref()),
        Cmd::Atoms { surface, action, contraction } => atoms(&surface, &action, &contraction),
        Cmd::Invariant { steps } => {
            let steps = parse_steps(&read(&steps)?)?;
            println!("{}", burnside_invariant(&steps));
            Ok(())
        }
        Cmd::Profile { file } => profile(&file),
        Cmd::Selftest => {
            let results = selftest::run_all();
            for r in &results {
                println!("{}", r.line());
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                return Err(Failed(format!("{failed} criteria failed")).into());
            }
            Ok(())
        }
    }
}

/// Degree 8 uses P1 x P1, matching the del Pezzo table.
fn del_pezzo(degree: i64) -> Result<SurfaceModel> {
    match degree {
        8 => Ok(SurfaceModel::hirzebruch(0)),
        1..=9 => Ok(SurfaceModel::p2_blown_up((9 - degree) as usize)),
        _ => Err(Error::Input(format!("no del Pezzo surface of degree {degree}")).into()),
    }
}

fn classes(degree: i64, r: i64) -> Result<()> {
    let s = del_pezzo(degree)?;
    let found = enumerate_r_classes(&s, r)?;
    println!("surface: {s}");
    for d in &found {
        println!("  {}", s.format_class(d));
    }
    println!("count: {}", found.len());
    Ok(())
}

fn sod(path: &Path) -> Result<()> {
    let spec = parse_surface(&read(path)?)?;
    let c = standard_sod(&spec.mori_fibre_space())?;
    println!("surface: {}", spec.surface);
    println!("collection: {c}");
    println!("gram:\n{}", c.gram());
    Ok(())
}

fn mutate(collection: &Path, script: &Path) -> Result<()> {
    let mut c = parse_collection(&read(collection)?)?;
    let moves = parse_script(&read(script)?)?;
    let report = check_collection(&c);
    println!("step 0: {c}");
    if !report.ok {
        return Err(Failed(format!("step 0: {}", report.violations.join("; "))).into());
    }
    for (i, m) in moves.iter().enumerate() {
        c = apply_move_unchecked(&c, m).map_err(|e| Failed(format!("step {} ({m}): {e}", i + 1)))?;
        println!("step {} {m}: {c}", i + 1);
        let report = check_collection(&c);
        if !report.ok {
            return Err(Failed(format!("step {} ({m}): {}", i + 1, report.violations.join("; "))).into());
        }
    }
    println!("gram:\n{}", c.gram());
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<()> {
    let (ids, results) = if args.all {
        (catalog_ids(), verify_all())
    } else {
        let id = args.id.expect("clap requires --id or --all");
        let r = verify_link(&id);
        (vec![id], vec![r])
    };
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut failures = Vec::new();
    for (id, r) in ids.iter().zip(results) {
        let cert = r?;
        let lines = cert.to_json_lines();
        out.write_all(lines.as_bytes())?;
        if let Some(dir) = &args.out {
            let path = dir.join(format!("{id}.jsonl"));
            fs::write(&path, &lines).with_context(|| format!("writing {}", path.display()))?;
        }
        if !cert.passed() {
            failures.push(format!("{id}: {}", cert.failure.clone().unwrap_or_default()));
        }
    }
    out.flush()?;
    if !failures.is_empty() {
        return Err(Failed(failures.join("\n")).into());
    }
    Ok(())
}

fn group(action: &Path, surface: Option<&Path>) -> Result<()> {
    let text = read(action)?;
    let a = match surface {
        Some(p) => parse_group(&text, &parse_surface(&read(p)?)?.surface)?,
        None => parse_action_file(&text)?.1,
    };
    let s = a.surface();
    println!("surface: {s}");
    println!("group order: {}", a.order());
    println!("invariant rank: {}", invariant_rank(&a));
    let minus_one = enumerate_r_classes(s, -1)?;
    println!("orbits on (-1)-classes:");
    for o in orbits(&a, &minus_one)? {
        let names: Vec<String> = o.iter().map(|d| s.format_class(d)).collect();
        println!("  [{}] {}", o.len(), names.join(", "));
    }
    println!("H1(G, Pic): {}", format_abelian(&h1_picard(&a)?));
    let m = minimality_proxy(&a)?;
    println!("minimal ({}): {}", m.label, if m.minimal { "yes" } else { "no" });
    for o in &m.contractible_orbits {
        let names: Vec<String> = o.iter().map(|d| s.format_class(d)).collect();
        println!("  contractible: {}", names.join(", "));
    }
    Ok(())
}

fn atoms(surface: &Path, action: &Path, contraction: &Path) -> Result<()> {
    let spec = parse_surface(&read(surface)?)?;
    let a = parse_group(&read(action)?, &spec.surface)?;
    let c = parse_contraction(&read(contraction)?, &spec.surface)?;
    let atoms = atom_multiset(&spec.surface, &a, &c)?;
    let names: Vec<String> = atoms.iter().map(ToString::to_string).collect();
    println!("{{{}}}", names.join(", "));
    Ok(())
}

fn profile(path: &Path) -> Result<()> {
    let profiles = parse_profiles(&read(path)?)?;
    let mut failures = Vec::new();
    for p in &profiles {
        let atoms: Vec<String> = p.atoms.iter().map(ToString::to_string).collect();
        println!("{}: {{{}}}", p.name, atoms.join(", "));
        println!("  rational: {}  rich: {}", is_rational_profile(p), is_rich_profile(p));
        match dam_order(p) {
            Ok(d) => println!("  |DAm| = {d}"),
            Err(e) => println!("  |DAm| undefined: {e}"),
        }
        if let (Some(am), Some(ind)) = (p.amitsur_order, p.surface_index) {
            let ok = index_formula_check(p)?;
            println!("  ind * |Am| = {ind} * {am}: {}", if ok { "ok" } else { "FAIL" });
            if !ok {
                failures.push(format!("{}: index formula fails", p.name));
            }
        }
        // Only profiles of the minimal degree-6 shape get the extra checks.
        if let Ok(warnings) = dp6_consistency(p) {
            println!("  degree-6 consistency: {}", if warnings.is_empty() { "ok" } else { "warnings" });
            for w in warnings {
                println!("  warning: {w}");
            }
        }
    }
    if !failures.is_empty() {
        return Err(Failed(failures.join("; ")).into());
    }
    Ok(())
}
