//! `parity-gauss`: every stage of the pipeline as a subcommand.
//!
//! Exit codes: 0 success, 1 domain error (JSON on stderr), 2 usage error.

use std::io::{self, BufRead, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Deserialize;
use serde_json::{json, Value};

use parity_gauss::formulae::{
    builtin_formula, builtin_polynomial, decomposition_check, kauffman_vanishing_probe,
    solve_generator_system, virtualization_check, zero_index_invariant_checks, BUILTIN_NAMES,
};
use parity_gauss::moves::{apply_random_walk, WalkConstraint};
use parity_gauss::parity::{f_fixpoint, functorial_map_f, indices};
use parity_gauss::polyak::{
    evaluate, relation_matrix, FormalSum, Formula, Quotient, RelationOptions,
};
use parity_gauss::{Ambient, Error, GaussDiagram, ParityRule};

#[derive(Parser)]
#[command(
    name = "parity-gauss",
    version,
    about = "Parity-enhanced Gauss diagram formulae"
)]
struct Cli {
    /// Emit JSON (schema "1") instead of plain text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AmbientArg {
    Line,
    Loop,
}

impl From<AmbientArg> for Ambient {
    fn from(a: AmbientArg) -> Self {
        match a {
            AmbientArg::Line => Ambient::Line,
            AmbientArg::Loop => Ambient::Loop,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum QuotientArg {
    O,
    E,
    Gpv,
}

#[derive(Args)]
struct DiagramArgs {
    /// Gauss code, e.g. "O1+ O2- U1+ U2-".
    code: String,
    #[arg(long, value_enum, default_value = "line")]
    ambient: AmbientArg,
}

impl DiagramArgs {
    fn diagram(&self) -> Result<GaussDiagram, CliError> {
        Ok(GaussDiagram::parse(&self.code, self.ambient.into())?)
    }
}

#[derive(Args)]
struct QuotientArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, value_enum, default_value = "line")]
    ambient: AmbientArg,
    #[arg(long, value_enum, default_value = "o")]
    quotient: QuotientArg,
    /// Keep only all-plus top-degree variables.
    #[arg(long)]
    top_degree_plus_only: bool,
    /// Use the reduced all-ones presentation (O(n,1) only).
    #[arg(long)]
    reduced: bool,
}

impl QuotientArgs {
    fn quotient(&self) -> Result<Quotient, CliError> {
        let kind = match self.quotient {
            QuotientArg::O => "o",
            QuotientArg::E => "e",
            QuotientArg::Gpv => "gpv",
        };
        Ok(Quotient::new(kind, self.n, self.k)?)
    }

    fn options(&self) -> RelationOptions {
        RelationOptions {
            top_degree_plus_only: self.top_degree_plus_only,
            reduced_on1: self.reduced,
        }
    }
}

fn parse_parity(s: &str) -> Result<ParityRule, String> {
    match s {
        "gaussian" => Ok(ParityRule::Gaussian),
        "minus-sign" => Ok(ParityRule::MinusSign),
        "nonzero-index" => Ok(ParityRule::NonzeroIndex),
        _ => s
            .strip_prefix("hier:")
            .and_then(|t| t.parse().ok())
            .map(ParityRule::Hierarchy)
            .ok_or_else(|| {
                format!("unknown parity {s:?}; use gaussian, hier:<t>, minus-sign or nonzero-index")
            }),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate a Gauss code and print its canonical key.
    Parse(DiagramArgs),
    /// Parity marks of every arrow.
    Parity {
        #[command(flatten)]
        diagram: DiagramArgs,
        #[arg(long, value_parser = parse_parity, default_value = "gaussian")]
        parity: ParityRule,
    },
    /// Index of every arrow (line only).
    Index(DiagramArgs),
    /// Delete odd arrows, once or to a fixpoint.
    FMap {
        #[command(flatten)]
        diagram: DiagramArgs,
        #[arg(long, value_parser = parse_parity, default_value = "gaussian")]
        parity: ParityRule,
        #[arg(long)]
        fixpoint: bool,
    },
    /// Seeded random walk of Reidemeister moves.
    Walk {
        #[command(flatten)]
        diagram: DiagramArgs,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Only take moves that keep every index zero.
        #[arg(long)]
        zero_index: bool,
    },
    /// Dimension of the space of formulae.
    Dims(QuotientArgs),
    /// Integral basis of the space of formulae.
    Basis(QuotientArgs),
    /// Evaluate a formula on diagrams given as arguments or on stdin, one per line.
    Eval {
        /// Builtin name or path to a formula/basis JSON file.
        #[arg(long)]
        formula: String,
        /// Element of a basis file.
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, value_parser = parse_parity, default_value = "gaussian")]
        parity: ParityRule,
        /// Gauss codes; read from stdin when none are given.
        codes: Vec<String>,
    },
    /// Integer solution of the generator system for R^n1 L^n2.
    SolveGenerator { n1: usize, n2: usize },
    /// Print a builtin formula.
    Builtin { name: String },
    /// Alternating sum over switched subsets of the singular arrows.
    ProbeKauffman {
        #[arg(long)]
        formula: String,
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, value_parser = parse_parity, default_value = "gaussian")]
        parity: ParityRule,
        /// Comma-separated arrow indices.
        #[arg(long, value_delimiter = ',')]
        singular: Vec<usize>,
        code: String,
    },
    /// Compare values before and after reversing arrows.
    ProbeVirtualization {
        #[arg(long)]
        formula: String,
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, value_parser = parse_parity, default_value = "gaussian")]
        parity: ParityRule,
        #[arg(long, value_delimiter = ',')]
        flips: Vec<usize>,
        code: String,
    },
    /// v21 = v22 and rotation invariance on zero-index line diagrams.
    ZeroIndexReport {
        #[arg(long, default_value_t = 3)]
        bound: usize,
    },
    /// Check the even/odd decomposition of a homogeneous GPV formula.
    DecomposeCheck {
        #[arg(long)]
        formula: String,
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, value_parser = parse_parity, default_value = "gaussian")]
        parity: ParityRule,
        codes: Vec<String>,
    },
}

enum CliError {
    Domain(Error),
    Input { kind: &'static str, message: String },
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

impl CliError {
    fn to_json(&self) -> Value {
        let body = match self {
            CliError::Domain(e) => {
                let mut v = json!({ "kind": e.kind(), "message": e.to_string() });
                if let Error::Parse(p) = e {
                    v["position"] = json!(p.position());
                }
                v
            }
            CliError::Input { kind, message } => json!({ "kind": kind, "message": message }),
        };
        json!({ "schema": "1", "error": body })
    }
}

#[derive(Deserialize)]
struct TermFile {
    code: String,
    coefficient: String,
}

#[derive(Deserialize)]
struct FormulaFile {
    quotient: Quotient,
    ambient: Ambient,
    terms: Vec<TermFile>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FormulaSource {
    Basis { formulas: Vec<FormulaFile> },
    Single(FormulaFile),
}

fn formula_json(f: &Formula) -> Value {
    let terms: Vec<Value> = f
        .sum
        .terms()
        .iter()
        .map(|(k, v)| json!({ "code": k.as_str(), "coefficient": v.to_string() }))
        .collect();
    json!({
        "quotient": f.quotient,
        "ambient": f.ambient(),
        "decoration": f.sum.decoration(),
        "terms": terms,
    })
}

fn load_formula(source: &str, index: usize) -> Result<Formula, CliError> {
    if BUILTIN_NAMES.contains(&source) {
        return Ok(builtin_formula(source)?);
    }
    let text = std::fs::read_to_string(source).map_err(|e| CliError::Input {
        kind: "io",
        message: format!(
            "{source}: {e} (not a builtin either: {})",
            BUILTIN_NAMES.join(", ")
        ),
    })?;
    let bad = |message: String| CliError::Input {
        kind: "formula_file",
        message,
    };
    let file = match serde_json::from_str(&text).map_err(|e| bad(format!("{source}: {e}")))? {
        FormulaSource::Single(f) => f,
        FormulaSource::Basis { mut formulas } => {
            if index >= formulas.len() {
                return Err(bad(format!(
                    "{source} holds {} formulas, no index {index}",
                    formulas.len()
                )));
            }
            formulas.swap_remove(index)
        }
    };
    file.quotient.validate()?;
    let mut sum = FormalSum::new(file.ambient, file.quotient.decoration());
    for t in file.terms {
        let c: BigInt = t
            .coefficient
            .parse()
            .map_err(|_| bad(format!("bad coefficient {:?}", t.coefficient)))?;
        let d = parity_gauss::MarkedDiagram::parse(&t.code, file.ambient)?;
        sum.add(
            parity_gauss::polyak::key_of(&d, file.quotient.decoration()),
            c,
        );
    }
    let f = Formula {
        sum,
        quotient: file.quotient,
    };
    f.check_support()?;
    Ok(f)
}

fn read_codes(codes: &[String]) -> Result<Vec<String>, CliError> {
    if !codes.is_empty() {
        return Ok(codes.to_vec());
    }
    let mut out = Vec::new();
    for line in io::stdin().lock().lines() {
        let line = line.map_err(|e| CliError::Input {
            kind: "io",
            message: e.to_string(),
        })?;
        let line = line.trim();
        if !line.is_empty() && !line.starts_with('#') {
            out.push(line.to_string());
        }
    }
    Ok(out)
}

fn run(cli: &Cli, out: &mut impl Write) -> Result<(), CliError> {
    let json_mode = cli.json;
    // (json payload, human text)
    let (payload, text): (Value, String) = match &cli.command {
        Command::Parse(args) => {
            let d = args.diagram()?;
            let graph = d.intersection_graph();
            (
                json!({
                    "ambient": d.ambient(),
                    "code": d.to_gauss_code(),
                    "canonical_key": d.canonical_key(),
                    "arrows": d.len(),
                    "intersection_degrees": graph.degrees(),
                    "classical_candidate": d.is_classical_candidate(),
                }),
                format!(
                    "code: {}\nkey: {}\narrows: {}\nclassical candidate: {}",
                    d.to_gauss_code(),
                    d.canonical_key(),
                    d.len(),
                    d.is_classical_candidate()
                ),
            )
        }
        Command::Parity { diagram, parity } => {
            let d = diagram.diagram()?;
            let marks = parity.marks(&d)?;
            let text = marks
                .iter()
                .map(u8::to_string)
                .collect::<Vec<_>>()
                .join(" ");
            (json!({ "parity": parity, "marks": marks }), text)
        }
        Command::Index(args) => {
            let idx = indices(&args.diagram()?)?;
            let strs: Vec<String> = idx.iter().map(i64::to_string).collect();
            (json!({ "indices": strs }), strs.join(" "))
        }
        Command::FMap {
            diagram,
            parity,
            fixpoint,
        } => {
            let d = diagram.diagram()?;
            let (e, rounds) = if *fixpoint {
                f_fixpoint(&d, *parity)?
            } else {
                (functorial_map_f(&d, *parity)?, 1)
            };
            (
                json!({ "code": e.to_gauss_code(), "rounds": rounds }),
                e.to_gauss_code(),
            )
        }
        Command::Walk {
            diagram,
            steps,
            seed,
            zero_index,
        } => {
            let constraint = if *zero_index {
                WalkConstraint::ZeroIndex
            } else {
                WalkConstraint::None
            };
            let walk = apply_random_walk(&diagram.diagram()?, *steps, *seed, constraint)?;
            let codes: Vec<String> = walk
                .trajectory
                .iter()
                .map(GaussDiagram::to_gauss_code)
                .collect();
            (
                json!({ "seed": seed.to_string(), "trajectory": codes, "moves": walk.kinds, "stalled": walk.stalled }),
                codes.join("\n"),
            )
        }
        Command::Dims(q) => {
            let rel = relation_matrix(q.quotient()?, q.ambient.into(), q.options())?;
            let dim = rel.dimension();
            (
                json!({
                    "quotient": rel.quotient,
                    "ambient": rel.ambient,
                    "variables": rel.columns.len().to_string(),
                    "relations": rel.matrix.nrows().to_string(),
                    "dimension": dim.to_string(),
                }),
                dim.to_string(),
            )
        }
        Command::Basis(q) => {
            let rel = relation_matrix(q.quotient()?, q.ambient.into(), q.options())?;
            let basis = rel.formulas()?;
            let mut text = format!(
                "# {} on the {}: dimension {}",
                rel.quotient,
                rel.ambient,
                basis.len()
            );
            for (i, f) in basis.iter().enumerate() {
                text.push_str(&format!("\nformula {i}"));
                for (k, v) in f.sum.terms() {
                    text.push_str(&format!("\n  {v:>4}  {k}"));
                }
            }
            (
                json!({
                    "quotient": rel.quotient,
                    "ambient": rel.ambient,
                    "dimension": basis.len().to_string(),
                    "formulas": basis.iter().map(formula_json).collect::<Vec<_>>(),
                }),
                text,
            )
        }
        Command::Eval {
            formula,
            index,
            parity,
            codes,
        } => {
            let f = load_formula(formula, *index)?;
            let mut values = Vec::new();
            for code in read_codes(codes)? {
                let d = GaussDiagram::parse(&code, f.ambient())?;
                values.push((code, evaluate(&f, *parity, &d)?));
            }
            let text = values
                .iter()
                .map(|(_, v)| v.to_string())
                .collect::<Vec<_>>()
                .join("\n");
            let rows: Vec<Value> = values
                .iter()
                .map(|(c, v)| json!({ "code": c, "value": v.to_string() }))
                .collect();
            (json!({ "parity": parity, "values": rows }), text)
        }
        Command::SolveGenerator { n1, n2 } => {
            let s = solve_generator_system(*n1, *n2)?;
            let p = s.to_polynomial(Ambient::Line);
            (
                json!({ "solution": s, "polynomial": p.to_string() }),
                format!("c0 = {}\n{}", s.c0, p),
            )
        }
        Command::Builtin { name } => {
            let f = builtin_formula(name)?;
            let poly = builtin_polynomial(name).ok().map(|p| p.to_string());
            let mut text = String::new();
            if let Some(p) = &poly {
                text.push_str(&format!("# {p}\n"));
            }
            text.push_str(&format!("# {} on the {}", f.quotient, f.ambient()));
            for (k, v) in f.sum.terms() {
                text.push_str(&format!("\n  {v:>4}  {k}"));
            }
            let mut v = formula_json(&f);
            v["name"] = json!(name);
            v["polynomial"] = json!(poly);
            (v, text)
        }
        Command::ProbeKauffman {
            formula,
            index,
            parity,
            singular,
            code,
        } => {
            let f = load_formula(formula, *index)?;
            let d = GaussDiagram::parse(code, f.ambient())?;
            let v = kauffman_vanishing_probe(&f, *parity, &d, singular)?;
            (
                json!({ "singular": singular, "value": v.to_string() }),
                v.to_string(),
            )
        }
        Command::ProbeVirtualization {
            formula,
            index,
            parity,
            flips,
            code,
        } => {
            let f = load_formula(formula, *index)?;
            let d = GaussDiagram::parse(code, f.ambient())?;
            let ok = virtualization_check(&f, *parity, &d, flips)?;
            (json!({ "flips": flips, "invariant": ok }), ok.to_string())
        }
        Command::ZeroIndexReport { bound } => {
            let r = zero_index_invariant_checks(*bound)?;
            let mut text = format!(
                "checked {} diagrams, {} with zero index, {} violations",
                r.diagrams_checked,
                r.zero_index_diagrams,
                r.violations.len()
            );
            for v in &r.violations {
                text.push_str(&format!("\n{v}"));
            }
            (serde_json::to_value(&r).expect("report serializes"), text)
        }
        Command::DecomposeCheck {
            formula,
            index,
            parity,
            codes,
        } => {
            let f = load_formula(formula, *index)?;
            let mut rows = Vec::new();
            for code in read_codes(codes)? {
                let d = GaussDiagram::parse(&code, f.ambient())?;
                rows.push((code, decomposition_check(&f, *parity, &d)?));
            }
            let text = rows
                .iter()
                .map(|(_, ok)| ok.to_string())
                .collect::<Vec<_>>()
                .join("\n");
            let rows: Vec<Value> = rows
                .iter()
                .map(|(c, ok)| json!({ "code": c, "holds": ok }))
                .collect();
            (json!({ "parity": parity, "results": rows }), text)
        }
    };
    let written = if json_mode {
        let mut payload = payload;
        let obj = payload.as_object_mut().expect("payloads are objects");
        obj.insert("schema".into(), json!("1"));
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&payload).expect("serializable")
        )
    } else if text.is_empty() {
        Ok(())
    } else {
        writeln!(out, "{text}")
    };
    written.map_err(|e| CliError::Input {
        kind: "io",
        message: e.to_string(),
    })
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("PARITY_GAUSS_THREADS") else {
        return Ok(());
    };
    let n: usize =
        raw.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            format!("PARITY_GAUSS_THREADS must be a positive integer, got {raw:?}")
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(&cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(1)
        }
    }
}
