//! `msinv`: validate, expand, enumerate, and compare symbolic representations
//! of surface Morse-Smale diffeomorphisms.
//!
//! Exit codes: 0 on success (and for conjugate pairs), 1 for failed checks or
//! a not-conjugate verdict, 2 for usage and parse errors.

use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use msinv_core::{
    build_extended, check_accumulation, check_additivity, check_equivariance, check_injectivity,
    check_type1_finiteness, decide_conjugacy, enumerate_window, fixtures, parse, serialize,
    to_dot, validate_basic, CodingSet, Document, Sigma, Window,
};

#[derive(Parser)]
#[command(name = "msinv", version, about = "Distinguishing-graph invariants of surface Morse-Smale diffeomorphisms", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoName {
    /// Sphere diffeomorphism with 2 sources, 3 sinks, 3 saddles.
    Sphere,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural properties of a document.
    Validate {
        /// Input file, or `-` for standard input.
        file: String,
        /// Emit a dot rendering of the graph instead of a report.
        #[arg(long)]
        dot: bool,
    },
    /// Build the extended coding set and write the enriched document.
    Expand {
        file: String,
        /// Write to a file instead of standard output.
        #[arg(long)]
        out: Option<String>,
    },
    /// Instantiate the coding set over a finite window, one point per line.
    Enumerate {
        file: String,
        /// Trajectory-parameter range, `MIN:MAX`.
        #[arg(long = "t", value_name = "MIN:MAX")]
        t_range: String,
        /// Cap for every local parameter.
        #[arg(long = "k", value_name = "MAX")]
        k_max: i64,
        /// Restrict the listing to positions on one manifold, e.g. `u.1.x1`.
        #[arg(long)]
        manifold: Option<String>,
    },
    /// Decide whether two documents represent conjugate diffeomorphisms.
    Conjugate {
        file1: String,
        file2: String,
        /// After finding a witness, expand both sets and confirm that the
        /// witness maps one windowed cloud onto the other.
        #[arg(long)]
        crosscheck: bool,
    },
    /// Print a bundled example document.
    Demo {
        #[arg(value_enum)]
        name: DemoName,
    },
    /// Run the full invariant suite over finite windows.
    Check {
        file: String,
        #[arg(long = "t", value_name = "MIN:MAX", default_value = "-4:4")]
        t_range: String,
        #[arg(long = "k", value_name = "MAX", default_value_t = 4)]
        k_max: i64,
    },
}

fn read_input(path: &str) -> Result<String, String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| format!("cannot read standard input: {e}"))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))
    }
}

fn load(path: &str) -> Result<Document, String> {
    let text = read_input(path)?;
    parse(&text).map_err(|e| format!("{path}: {e}"))
}

fn parse_range(spec: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = spec
        .split_once(':')
        .ok_or_else(|| format!("range {spec:?} must look like MIN:MAX"))?;
    let lo: i64 = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad range bound {lo:?}"))?;
    let hi: i64 = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad range bound {hi:?}"))?;
    if lo > hi {
        return Err(format!("empty range {spec:?}"));
    }
    Ok((lo, hi))
}

fn fmt_point(p: &msinv_core::SimpleFormula, doc: &Document) -> String {
    let mid = |m: msinv_core::ManifoldId| {
        let name = doc
            .graph
            .vertex(m.saddle)
            .map(|v| v.name.clone())
            .unwrap_or_default();
        format!("{}.{}.{}", m.sigma, m.branch, name)
    };
    let vec = |v: &[i64]| {
        v.iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    };
    format!(
        "({}[{}], {}[{}], {})",
        mid(p.u.manifold),
        vec(&p.u.components),
        mid(p.s.manifold),
        vec(&p.s.components),
        p.d
    )
}

/// The coding set a read-only command works on: the stored extended section
/// when present, otherwise the expansion of the basic set.
fn working_set(doc: &Document) -> Result<CodingSet, String> {
    match &doc.extended {
        Some(ext) => Ok(ext.clone()),
        None => Ok(build_extended(&doc.basic, &doc.graph)
            .map_err(|e| e.to_string())?
            .extended),
    }
}

fn run() -> Result<ExitCode, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { file, dot } => {
            let doc = load(&file)?;
            let mut report = doc.graph.validate();
            report.merge(validate_basic(&doc.basic, &doc.graph));
            if dot {
                print!("{}", to_dot(&doc));
            }
            if report.is_valid() {
                if !dot {
                    println!("valid");
                }
                Ok(ExitCode::SUCCESS)
            } else {
                eprint!("{report}");
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Expand { file, out } => {
            let mut doc = load(&file)?;
            let state = build_extended(&doc.basic, &doc.graph).map_err(|e| e.to_string())?;
            doc.extended = Some(state.extended);
            let text = serialize(&doc);
            match out {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|e| format!("cannot write {path}: {e}"))?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Enumerate {
            file,
            t_range,
            k_max,
            manifold,
        } => {
            let doc = load(&file)?;
            let (t_min, t_max) = parse_range(&t_range)?;
            if k_max < 0 {
                return Err("the local-parameter cap must be nonnegative".into());
            }
            let cs = working_set(&doc)?;
            let cloud = enumerate_window(&cs, Window::new(t_min, t_max, k_max));
            match manifold {
                None => {
                    let mut lines: Vec<String> = cloud
                        .instances
                        .iter()
                        .map(|i| fmt_point(&i.point, &doc))
                        .collect();
                    lines.sort();
                    lines.dedup();
                    for l in lines {
                        println!("{l}");
                    }
                }
                Some(name) => {
                    let m = doc
                        .try_manifold(&name)
                        .ok_or_else(|| format!("unknown manifold {name:?}"))?;
                    let entries = cloud.by_manifold.get(&m).cloned().unwrap_or_default();
                    for e in entries {
                        let side = match e.side {
                            Sigma::U => "u",
                            Sigma::S => "s",
                        };
                        let vec = e
                            .vector
                            .iter()
                            .map(|c| c.to_string())
                            .collect::<Vec<_>>()
                            .join(", ");
                        println!(
                            "[{vec}] {side}-side of {}",
                            fmt_point(&cloud.instances[e.instance].point, &doc)
                        );
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Conjugate {
            file1,
            file2,
            crosscheck,
        } => {
            let a = load(&file1)?;
            let b = load(&file2)?;
            match decide_conjugacy(&a.graph, &a.basic, &b.graph, &b.basic)
                .map_err(|e| e.to_string())?
            {
                Some(w) => {
                    println!("conjugate");
                    println!("r = {}", w.r);
                    let vname = |d: &Document, v| {
                        d.graph
                            .vertex(v)
                            .map(|x| x.name.clone())
                            .unwrap_or_default()
                    };
                    let pairs: Vec<String> = w
                        .phi
                        .iter()
                        .map(|(&x, &y)| format!("{} -> {}", vname(&a, x), vname(&b, y)))
                        .collect();
                    println!("phi: {}", pairs.join(", "));
                    let mname = |d: &Document, m: msinv_core::ManifoldId| {
                        format!("{}.{}.{}", m.sigma, m.branch, vname(d, m.saddle))
                    };
                    let pairs: Vec<String> = w
                        .psi
                        .iter()
                        .map(|(&x, &y)| format!("{} -> {}", mname(&a, x), mname(&b, y)))
                        .collect();
                    println!("psi: {}", pairs.join(", "));
                    let pairs: Vec<String> = w
                        .shifts
                        .iter()
                        .map(|(&m, &s)| format!("{} {}{}", mname(&a, m), if s >= 0 { "+" } else { "" }, s))
                        .collect();
                    println!("shifts: {}", pairs.join(", "));
                    if crosscheck {
                        let window = Window::new(-4, 4, 4);
                        let ok = msinv_core::crosscheck_extended(
                            &a.graph, &a.basic, &b.graph, &b.basic, &w, window,
                        )
                        .map_err(|e| e.to_string())?;
                        if ok {
                            println!("crosscheck: extended clouds agree under the witness");
                        } else {
                            println!("crosscheck: FAILED");
                            return Ok(ExitCode::FAILURE);
                        }
                    }
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    println!("not conjugate");
                    Ok(ExitCode::FAILURE)
                }
            }
        }
        Command::Demo { name } => {
            match name {
                DemoName::Sphere => print!("{}", fixtures::SPHERE_TEXT),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { file, t_range, k_max } => {
            let doc = load(&file)?;
            let (t_min, t_max) = parse_range(&t_range)?;
            if k_max < 0 {
                return Err("the local-parameter cap must be nonnegative".into());
            }
            let w = Window::new(t_min, t_max, k_max);
            let mut failed = false;

            let graph_report = doc.graph.validate();
            check_line(
                "graph",
                graph_report.is_valid(),
                &violations_note(graph_report.violations.len()),
                &mut failed,
            );
            let basic_report = validate_basic(&doc.basic, &doc.graph);
            check_line(
                "basic",
                basic_report.is_valid(),
                &violations_note(basic_report.violations.len()),
                &mut failed,
            );
            if failed {
                eprint!("{graph_report}");
                eprint!("{basic_report}");
                return Ok(ExitCode::FAILURE);
            }

            let cs = working_set(&doc)?;
            let cloud = enumerate_window(&cs, w);
            check_line("expansion", true, &format!(" ({} formulas)", cs.len()), &mut failed);

            let inj = check_injectivity(&cloud);
            check_line(
                "injectivity",
                inj.is_clean(),
                &format!(" ({} instances)", cloud.len()),
                &mut failed,
            );
            for c in inj.collisions.iter().take(4) {
                eprintln!("  collision at {:?} on {:?}", c.vector, c.manifold);
            }

            let eq = check_equivariance(&cs, w, &doc.graph.manifolds);
            check_line("equivariance", eq.is_clean(), "", &mut failed);

            let add = check_additivity(&cs, w);
            check_line(
                "additivity",
                add.is_clean(),
                &format!(
                    " ({} edge warnings)",
                    add.u_edge_warnings + add.s_edge_warnings
                ),
                &mut failed,
            );

            let fin = check_type1_finiteness(&cs, &doc.graph.manifolds);
            check_line("type-1 residues", fin.is_clean(), "", &mut failed);

            let acc = check_accumulation(&cs, w);
            check_line("accumulation", acc.is_clean(), "", &mut failed);

            // Round trip of the document itself.
            let text = serialize(&doc);
            let rt = parse(&text)
                .map(|d| serialize(&d) == text)
                .unwrap_or(false);
            check_line("roundtrip", rt, "", &mut failed);

            Ok(if failed {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            })
        }
    }
}

fn violations_note(count: usize) -> String {
    if count == 0 {
        String::new()
    } else {
        format!(" ({count} violations)")
    }
}

fn check_line(name: &str, ok: bool, detail: &str, failed: &mut bool) {
    if ok {
        println!("{name}: ok{detail}");
    } else {
        println!("{name}: FAILED{detail}");
        *failed = true;
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
