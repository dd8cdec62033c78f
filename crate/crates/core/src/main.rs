use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use polycomplex::decomposition::{apex_triangulate, cohen_hickey, DecompositionMorphism, Label};
use polycomplex::intersect::{intersection_vertices, GeometricSimplex, Tolerances};
use polycomplex::io::{export_sql, parse_complex, write_complex};
use polycomplex::overlay::{overlay_intersection, OverlayOptions};
use polycomplex::{validate_complex, Error, RelationalComplex};

#[derive(Parser)]
#[command(name = "polycomplex", version, about = "Relational polytope complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Apex,
    CohenHickey,
}

#[derive(Subcommand)]
enum Command {
    /// Check the chain condition and edge shapes.
    Validate { file: PathBuf },
    /// Write the signed simplicial decomposition.
    Decompose {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "cohen-hickey")]
        method: MethodArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the total signed volume of the top cells.
    Volume { file: PathBuf },
    /// Print the winding number of every top cell around a point.
    Winding {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Vec<f64>,
    },
    /// Intersect the simplices spanned by the vertices of two files.
    IntersectSimplices { a: PathBuf, b: PathBuf },
    /// Intersection overlay of two complexes.
    Overlay {
        a: PathBuf,
        b: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        no_components: bool,
    },
    /// Print the boundary relation as SQL.
    ExportSql { file: PathBuf },
}

enum Failure {
    Invalid(String),
    Degenerate(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DegenerateIntersection(_)
            | Error::Singular
            | Error::BoundaryPoint
            | Error::AmbiguousMerge(_) => Failure::Degenerate(e.to_string()),
            Error::Parse { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

fn load(path: &Path) -> Result<RelationalComplex, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse_complex(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn require_valid(c: &RelationalComplex) -> Result<(), Failure> {
    let r = validate_complex(c);
    if r.is_valid() {
        Ok(())
    } else {
        Err(Failure::Invalid(r.to_string()))
    }
}

fn listing(m: &DecompositionMorphism) -> String {
    let mut out = String::new();
    for (l, p) in m.coords() {
        let name = m.vertex_name(*l).unwrap_or("apex");
        out.push_str(&format!("LABEL {l} {name}"));
        for x in p {
            out.push_str(&format!(" {x}"));
        }
        out.push('\n');
    }
    for (cell, s, coeff) in m.top_terms() {
        out.push_str(&format!("SIMPLEX {coeff}"));
        for v in s.vertices() {
            out.push_str(&format!(" {v}"));
        }
        out.push_str(&format!(" {cell}\n"));
    }
    out
}

fn simplex_of(c: &RelationalComplex, first: Label) -> Result<GeometricSimplex, Failure> {
    let names: Vec<String> = c.cells(0).map(|v| v.name).collect();
    let numeric: Option<Vec<Label>> = names.iter().map(|n| n.parse().ok()).collect();
    let labels = numeric.unwrap_or_else(|| (0..names.len() as Label).map(|i| first + i).collect());
    let pts = names
        .iter()
        .map(|n| c.coords(n).map(<[f64]>::to_vec))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Failure::Invalid("vertex without coordinates".into()))?;
    Ok(GeometricSimplex::new(labels, pts)?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { file } => {
            let c = load(&file)?;
            require_valid(&c)?;
            println!("valid");
        }
        Command::Decompose {
            file,
            method,
            output,
        } => {
            let c = load(&file)?;
            require_valid(&c)?;
            let m = match method {
                MethodArg::Apex => apex_triangulate(&c)?,
                MethodArg::CohenHickey => cohen_hickey(&c)?,
            };
            emit(output.as_deref(), &listing(&m))?;
        }
        Command::Volume { file } => {
            let c = load(&file)?;
            require_valid(&c)?;
            let m = cohen_hickey(&c)?;
            let mut total = 0.0;
            for cell in c.cells(c.dim()) {
                total += m.volume(&cell.name)?;
            }
            println!("{total:?}");
        }
        Command::Winding { file, point } => {
            let c = load(&file)?;
            require_valid(&c)?;
            let m = cohen_hickey(&c)?;
            let eps = m.boundary_tolerance();
            for cell in c.cells(c.dim()) {
                println!(
                    "{} {}",
                    cell.name,
                    m.winding_number(&cell.name, &point, eps)?
                );
            }
        }
        Command::IntersectSimplices { a, b } => {
            let (ca, cb) = (load(&a)?, load(&b)?);
            let sa = simplex_of(&ca, 1)?;
            let sb = simplex_of(&cb, sa.len() as Label + 1)?;
            for v in intersection_vertices(&sa, &sb, &Tolerances::default())? {
                let coords: Vec<String> = v.point.iter().map(f64::to_string).collect();
                println!("{} {}", v.set.name(&sa, &sb), coords.join(" "));
            }
        }
        Command::Overlay {
            a,
            b,
            output,
            no_components,
        } => {
            let (ca, cb) = (load(&a)?, load(&b)?);
            require_valid(&ca)?;
            require_valid(&cb)?;
            let opts = OverlayOptions {
                components: !no_components,
                ..OverlayOptions::default()
            };
            let o = overlay_intersection(&ca, &cb, opts)?;
            let mut text = String::new();
            for (cell, p) in &o.provenance {
                text.push_str(&format!(
                    "# PROVENANCE {cell} {} {} {}\n",
                    p.c, p.z, p.component
                ));
            }
            text.push_str(&write_complex(&o.complex));
            emit(output.as_deref(), &text)?;
        }
        Command::ExportSql { file } => {
            let c = load(&file)?;
            print!("{}", export_sql(&c));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(3),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(m)) => {
            eprintln!("invalid: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Degenerate(m)) => {
            eprintln!("degenerate: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
