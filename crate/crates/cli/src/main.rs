use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use pdbundle::generators::{self, Image, IMAGE_ENCODING_NOTE};
use pdbundle::io;
use pdbundle::rational::{self, Rational};
use pdbundle::sheaf::{monodromy_scan, verify_edge_values};
use pdbundle::vineyard::vines_csv;
use pdbundle::{
    build_sheaf, build_stratification, diagram, enumerate_global_sections, induced_indexing, path_vineyard, reduce,
    Error, PLFibration, Point, Stratification,
};

/// Sections beyond this many are counted but not listed.
const SECTION_LIST_LIMIT: usize = 4096;

#[derive(Debug, Parser)]
#[command(name = "pdbundle", version, about = "Persistence diagram bundles over planar bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Input file; stdin when omitted.
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Homology degree.
    #[arg(long, global = true, default_value_t = 1)]
    degree: usize,

    /// Samples per cell for certificates, or per path segment for `vineyard`.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    samples: Option<u64>,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Merge adjacent cells that share a simplex order.
    #[arg(long, global = true)]
    merge_cells: bool,

    #[arg(long, global = true, default_value = "1/10")]
    epsilon: String,

    #[arg(long, global = true, default_value = "10")]
    gap: String,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Persistence diagrams of a filtered complex.
    Ph,
    /// Cells of the order-constant stratification of a fibration.
    Stratify,
    /// Cellular sheaf of degree-q pairs.
    Sheaf,
    /// Global sections of the pair sheaf.
    Sections,
    /// Monodromy around every interior vertex of the stratification.
    Monodromy,
    /// Vines along a polyline in the base, as CSV.
    Vineyard,
    /// The four-quadrant fibration without global sections.
    GenMonodromy,
    /// Two close filtrations with far-apart vines.
    GenInstability,
    /// RGB blend fibration of a plain-text PPM image.
    GenImage,
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let text = match cli.command {
        Command::GenMonodromy | Command::GenInstability => String::new(),
        _ => read_input(cli)?,
    };
    let out = match cli.command {
        Command::Ph => io::to_text(&ph(&text)?),
        Command::Stratify => {
            let (_, strat) = stratify(cli, &text)?;
            io::to_text(&io::stratification_json(&strat))
        }
        Command::Sheaf => {
            let (fib, strat) = stratify(cli, &text)?;
            let sheaf = build_sheaf(&strat, &fib, cli.degree)?;
            let checked = verify_edge_values(&sheaf, &strat, &fib, samples(cli, 5), cli.seed)?;
            let mut v = io::sheaf_json(&sheaf);
            v["certified_samples"] = json!(checked);
            io::to_text(&v)
        }
        Command::Sections => {
            let (fib, strat) = stratify(cli, &text)?;
            let sheaf = build_sheaf(&strat, &fib, cli.degree)?;
            let g = enumerate_global_sections(&sheaf)?;
            io::to_text(&io::sections_json(cli.degree, &g, SECTION_LIST_LIMIT))
        }
        Command::Monodromy => {
            let (fib, strat) = stratify(cli, &text)?;
            let sheaf = build_sheaf(&strat, &fib, cli.degree)?;
            let report = monodromy_scan(&sheaf, &strat)?;
            io::to_text(&io::monodromy_json(&report, &strat))
        }
        Command::Vineyard => vineyard(cli, &text)?,
        Command::GenMonodromy => io::to_text(&io::fibration_json(&generators::monodromy_fibration()?, None)),
        Command::GenInstability => {
            let eps = parse_arg("epsilon", &cli.epsilon)?;
            let gap = parse_arg("gap", &cli.gap)?;
            let report = generators::instability(&eps, &gap)?;
            if let Some(w) = &report.warning {
                eprintln!("warning: {w}");
            }
            io::to_text(&io::instability_json(&report))
        }
        Command::GenImage => {
            let image = Image::parse_ppm(&text)?;
            let fib = generators::image_fibration(&image)?;
            let meta = json!({
                "source": "ppm",
                "width": image.width,
                "height": image.height,
                "maxval": image.maxval,
                "encoding": IMAGE_ENCODING_NOTE,
                "base_vertices": {"red": [1, 0], "green": [0, 1], "blue": [0, 0]},
            });
            io::to_text(&io::fibration_json(&fib, Some(meta)))
        }
    };
    write_output(cli, &out)
}

fn read_input(cli: &Cli) -> Result<String, Failure> {
    match &cli.input {
        Some(path) => fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn write_output(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn samples(cli: &Cli, default: usize) -> usize {
    cli.samples.map_or(default, |s| s as usize)
}

fn parse_arg(name: &str, text: &str) -> Result<Rational, Failure> {
    rational::parse(text).map_err(|e| Failure::Lib(Error::InvalidArgument(format!("--{name}: {e}"))))
}

fn ph(text: &str) -> Result<Value, Failure> {
    let (k, f) = io::filtration_from_json(&io::parse_json(text)?)?;
    let idx = induced_indexing(&f, &k)?;
    let pairs = reduce(&k, &idx)?;
    let diagrams: Vec<_> = match k.max_dim() {
        Some(top) => (0..=top).map(|q| diagram(&pairs, &f, q, &k)).collect(),
        None => Vec::new(),
    };
    Ok(io::diagrams_json(&diagrams))
}

fn stratify(cli: &Cli, text: &str) -> Result<(PLFibration, Stratification), Failure> {
    let fib = io::fibration_from_json(&io::parse_json(text)?)?;
    let strat = build_stratification(&fib)?;
    let strat = if cli.merge_cells { strat.merge_equal_order() } else { strat };
    Ok((fib, strat))
}

fn vineyard(cli: &Cli, text: &str) -> Result<String, Failure> {
    let (fib, points, ts) = io::vineyard_input_from_json(&io::parse_json(text)?)?;
    if points.len() < 2 {
        return Err(Error::InvalidArgument("a path needs at least two points".into()).into());
    }
    let ts = match ts {
        Some(ts) if ts.len() != points.len() => {
            return Err(Error::Schema(format!("{} parameters for {} points", ts.len(), points.len())).into())
        }
        Some(ts) => ts,
        None => {
            let last = rational::int(points.len() as i64 - 1);
            (0..points.len()).map(|k| rational::int(k as i64) / &last).collect()
        }
    };
    let per = samples(cli, 1) as i64;
    let mut path: Vec<(Rational, Point)> = Vec::new();
    for i in 0..points.len() - 1 {
        for j in 0..per {
            let s = rational::ratio(j, per);
            path.push((&ts[i] + &s * (&ts[i + 1] - &ts[i]), points[i].lerp(&points[i + 1], &s)));
        }
    }
    path.push((ts[ts.len() - 1].clone(), points[points.len() - 1].clone()));
    let samples = path
        .into_iter()
        .map(|(t, p)| Ok((t, fib.filtration_at(&p)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    let vy = path_vineyard(&fib.complex, &samples)?;
    let degree = cli.degree;
    let k = &fib.complex;
    let moved = vy.loop_permutation.restrict(|p| k.dim(p.birth) == degree).moved();
    if moved.is_empty() {
        eprintln!("degree {degree} loop permutation: identity");
    } else {
        let parts: Vec<String> = moved.iter().map(|(x, y)| format!("{} -> {}", show(x), show(y))).collect();
        eprintln!("degree {degree} loop permutation: {}", parts.join(", "));
    }
    Ok(vines_csv(vy.vines.iter().filter(|v| v.degree == degree)))
}

fn show(p: &pdbundle::Pair) -> String {
    match p.death {
        Some(d) => format!("({}, {})", p.birth, d),
        None => format!("({}, inf)", p.birth),
    }
}
