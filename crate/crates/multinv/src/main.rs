use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use multinv::experiments;
use multinv::formats;
use multinv::report::Report;
use multinv::spec::{parse_specs, ExperimentSpec, Kind};
use multinv::Error;

/// Experiments on multiplicatively invariant integer sets.
///
/// Exit status: 0 when every assertion passed, 1 when one failed, 2 on a
/// usage or spec error.
#[derive(Parser)]
#[command(name = "multinv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Spec file of `key = value` entries; without it the built-in entries run.
    #[arg(long, global = true, value_name = "FILE")]
    spec: Option<PathBuf>,
    /// Directory for CSV and JSON reports.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides the seed recorded in every entry.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for independent entries.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Mass dimensions of subshift fixtures from exact language counts.
    Dims,
    /// Dimensions of floor sumsets over a λ, η grid.
    SumsetDim,
    /// The small-sumset counterexample pair and its counting bound.
    Counterexample,
    /// Closures under the four digit-deletion maps.
    Furstenberg,
    /// Iterated sumsets of one fixture.
    IteratedSumset,
    /// Integers with restricted digits in several bases at once.
    DigitIntersection,
    /// The projection pipeline at desk scale.
    Pipeline,
}

impl Command {
    fn kind(self) -> Kind {
        match self {
            Command::Dims => Kind::Dims,
            Command::SumsetDim => Kind::SumsetDim,
            Command::Counterexample => Kind::Counterexample,
            Command::Furstenberg => Kind::Furstenberg,
            Command::IteratedSumset => Kind::IteratedSumset,
            Command::DigitIntersection => Kind::DigitIntersection,
            Command::Pipeline => Kind::Pipeline,
        }
    }
}

fn load(cli: &Cli) -> Result<Vec<ExperimentSpec>, Error> {
    let kind = cli.command.kind();
    let mut specs = match &cli.spec {
        None => experiments::defaults(kind),
        Some(path) => {
            let text = fs::read_to_string(path)?;
            let specs = parse_specs(&text, Some(kind))?;
            if let Some(s) = specs.iter().find(|s| s.kind != kind) {
                return Err(Error::Spec { line: 0, message: format!("entry for {} in a {kind} run", s.kind) });
            }
            if specs.is_empty() {
                return Err(Error::Spec { line: 0, message: "no entries".into() });
            }
            specs
        }
    };
    if let Some(seed) = cli.seed {
        for s in &mut specs {
            s.seed = seed;
        }
    }
    Ok(specs)
}

fn write(dir: &Path, stem: &str, rep: &Report) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    let mut csv = Vec::new();
    formats::write_rows(&mut csv, &rep.rows)?;
    fs::write(dir.join(format!("{stem}.csv")), csv)?;
    fs::write(dir.join(format!("{stem}.json")), rep.to_json() + "\n")?;
    for (suffix, bytes) in &rep.artifacts {
        fs::write(dir.join(format!("{stem}-{suffix}")), bytes)?;
    }
    Ok(())
}

fn stem(spec: &ExperimentSpec, i: usize, n: usize) -> (Option<PathBuf>, String) {
    if let Some(p) = &spec.output {
        let dir = p.parent().map(|d| if d.as_os_str().is_empty() { PathBuf::from(".") } else { d.to_path_buf() });
        let s = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| spec.kind.to_string());
        return (dir, s);
    }
    if n == 1 {
        (None, spec.kind.to_string())
    } else {
        (None, format!("{}-{}", spec.kind, i + 1))
    }
}

fn main_inner(cli: &Cli) -> Result<bool, Error> {
    let specs = load(cli)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        pool = pool.num_threads(t.max(1));
    }
    let pool = pool.build().map_err(|e| Error::Core(e.to_string()))?;
    let results = pool.install(|| experiments::run_all(&specs));

    let mut ok = true;
    let n = specs.len();
    for (i, (spec, res)) in specs.iter().zip(results).enumerate() {
        let rep = res?;
        let verdict = if rep.passed() { "PASS" } else { "FAIL" };
        println!("{} #{}: {verdict}", spec.kind, i + 1);
        for a in &rep.assertions {
            let tag = if a.passed { "ok" } else { "FAILED" };
            let kind = if a.exact { "exact" } else { "band" };
            println!("  [{tag}] ({kind}) {}: {}", a.name, a.detail);
        }
        ok &= rep.passed();
        let (dir, stem) = stem(spec, i, n);
        // a relative `output` path is taken relative to --out when given
        let dir = match (&cli.out, dir) {
            (Some(out), Some(d)) if d.is_relative() => Some(out.join(d)),
            (_, Some(d)) => Some(d),
            (out, None) => out.clone(),
        };
        if let Some(dir) = dir {
            write(&dir, &stem, &rep)?;
        }
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("multinv: {e}");
            ExitCode::from(2)
        }
    }
}
