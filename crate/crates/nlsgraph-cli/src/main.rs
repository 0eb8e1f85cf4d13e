//! Command-line harness: classify graph topology, solve the constrained
//! minimization, scan the ground-state energy level, estimate the GN
//! constant, apply transforms, and run the acceptance selftest.
//!
//! Every command echoes its fully resolved configuration into the output
//! record, so a run can be reproduced from its own report. Exit codes:
//! 0 success (solve: converged), 2 input/validation error, 3 iteration
//! budget exhausted, 4 blow-up detected.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use nlsgraph::function::{GraphFunction, PortableFunction};
use nlsgraph::gn::GnConfig;
use nlsgraph::graph::MetricGraph;
use nlsgraph::grid::{Discretization, GridSpec};
use nlsgraph::reference;
use nlsgraph::solver::{default_inits, energy_scan, minimize_at_mass, SolveStatus, SolverConfig};
use nlsgraph::transforms;
use nlsgraph::{CriticalMass, EdgeId};

use report::{svg_line_plot, Csv, CsvField};

#[derive(Parser)]
#[command(name = "nlsgraph", version, about = "Quintic NLS ground states on noncompact metric graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct NumericOpts {
    /// Target grid step on every edge.
    #[arg(long = "step-h", default_value_t = 1e-2)]
    step_h: f64,
    /// Computational truncation length for half-lines.
    #[arg(long = "trunc-L", default_value_t = 100.0)]
    trunc_l: f64,
    /// RNG seed for the random initial fields.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stationarity residual tolerance for convergence.
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    /// Iteration budget per start.
    #[arg(long, default_value_t = 20_000)]
    max_iters: usize,
    /// Cap on the number of initial functions per mass.
    #[arg(long, default_value_t = 14)]
    inits_cap: usize,
    /// Worker threads for scan points (1 = fully deterministic serial).
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

impl NumericOpts {
    fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            max_iters: self.max_iters,
            residual_tol: self.tol,
            seed: self.seed,
            inits_cap: self.inits_cap,
            workers: self.workers,
            ..SolverConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify the topology and report the implied critical mass.
    Classify {
        #[arg(long)]
        graph: PathBuf,
        /// "text" or "json".
        #[arg(long, default_value = "text")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize the energy at a prescribed mass.
    Solve {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        mass: f64,
        #[command(flatten)]
        num: NumericOpts,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also emit a profile plot (SVG) and profile CSV (requires --out).
        #[arg(long)]
        plot: bool,
    },
    /// Scan the ground-state energy level over a mass grid.
    Scan {
        #[arg(long)]
        graph: PathBuf,
        /// Either "start:stop:step" or a comma-separated list.
        #[arg(long = "mass-grid")]
        mass_grid: String,
        /// Floor for the "numerically zero" energy budget.
        #[arg(long, default_value_t = 1e-3)]
        scan_budget: f64,
        #[command(flatten)]
        num: NumericOpts,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        plot: bool,
    },
    /// Estimate the best GN constant by quotient ascent.
    Gn {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        num: NumericOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a transform: bridge-double, decreasing, or symmetric.
    Transform {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        transform: String,
        /// Function file (portable JSON). Defaults to a seeded smooth field.
        #[arg(long)]
        function: Option<PathBuf>,
        #[command(flatten)]
        num: NumericOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suite and print one line per criterion.
    Selftest {
        /// Comma-separated criterion ids to run (default: all).
        #[arg(long)]
        only: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Classify { graph, format, out } => cmd_classify(&graph, &format, out.as_deref()),
        Cmd::Solve {
            graph,
            mass,
            num,
            out,
            plot,
        } => cmd_solve(&graph, mass, &num, out.as_deref(), plot),
        Cmd::Scan {
            graph,
            mass_grid,
            scan_budget,
            num,
            out,
            plot,
        } => cmd_scan(&graph, &mass_grid, scan_budget, &num, out.as_deref(), plot),
        Cmd::Gn { graph, num, out } => cmd_gn(&graph, &num, out.as_deref()),
        Cmd::Transform {
            graph,
            transform,
            function,
            num,
            out,
        } => cmd_transform(&graph, &transform, function.as_deref(), &num, out.as_deref()),
        Cmd::Selftest { only } => cmd_selftest(only.as_deref()),
    }
}

fn load_graph(path: &Path) -> Result<MetricGraph> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading graph file {}", path.display()))?;
    MetricGraph::parse(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn constants_block() -> serde_json::Value {
    let c = reference::constants();
    json!({
        "mu_r": c.mu_r,
        "mu_r_plus": c.mu_r_plus,
        "k_r": c.k_r,
        "k_r_plus": c.k_r_plus,
    })
}

fn write_out(out: Option<&Path>, name: &str, contents: &str) -> Result<()> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(name), contents)?;
    }
    Ok(())
}

fn emit_record(out: Option<&Path>, name: &str, record: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(record)?;
    println!("{text}");
    write_out(out, name, &text)
}

fn cmd_classify(path: &Path, format: &str, out: Option<&Path>) -> Result<ExitCode> {
    let g = load_graph(path)?;
    let tc = g.classify();
    let cm = reference::critical_mass_exact(&tc);
    let record = json!({
        "schema": "nlsgraph.v1",
        "command": "classify",
        "config": { "graph": path.display().to_string() },
        "constants": constants_block(),
        "topology": {
            "case": tc.tag.case_letter().to_string(),
            "tag": tc.tag.to_string(),
            "terminal_points": tc.terminal_points.iter().map(|&v| g.vertex_name(v)).collect::<Vec<_>>(),
            "bridges": tc.bridges.iter().map(|&e| g.edge(e).name.clone()).collect::<Vec<_>>(),
            "half_line_count": tc.half_line_count,
        },
        "critical_mass": match cm {
            CriticalMass::Exact(m) => json!({ "kind": "exact", "value": m }),
            CriticalMass::Bracket(a, b) => json!({ "kind": "bracket", "lower": a, "upper": b }),
        },
    });
    if format == "json" {
        emit_record(out, "classify.json", &record)?;
    } else {
        println!("graph: {}", path.display());
        println!(
            "case ({}), {} | terminal points: [{}] | bridges: [{}] | half-lines: {}",
            tc.tag.case_letter(),
            tc.tag,
            tc.terminal_points
                .iter()
                .map(|&v| g.vertex_name(v).to_string())
                .collect::<Vec<_>>()
                .join(", "),
            tc.bridges
                .iter()
                .map(|&e| g.edge(e).name.clone())
                .collect::<Vec<_>>()
                .join(", "),
            tc.half_line_count
        );
        match cm {
            CriticalMass::Exact(m) => println!("critical mass: {m:.12} (exact by topology)"),
            CriticalMass::Bracket(a, b) => {
                println!("critical mass: in [{a:.12}, {b:.12}] (universal bracket)")
            }
        }
        write_out(out, "classify.json", &serde_json::to_string_pretty(&record)?)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn unrolled_profile(u: &GraphFunction) -> (Vec<(f64, f64)>, Vec<(String, f64)>) {
    let disc = u.disc();
    let mut pts = Vec::new();
    let mut marks = Vec::new();
    let mut at = 0.0;
    for (id, eg) in disc.edge_grids() {
        marks.push((disc.graph().edge(id).name.clone(), at));
        let vals = u.edge_values(id);
        for (k, v) in vals.iter().enumerate() {
            pts.push((at + k as f64 * eg.h, *v));
        }
        at += eg.comp_len;
    }
    (pts, marks)
}

fn status_exit(status: SolveStatus) -> ExitCode {
    match status {
        SolveStatus::Converged => ExitCode::SUCCESS,
        SolveStatus::MaxIters => ExitCode::from(3),
        SolveStatus::UnboundedBelowDetected => ExitCode::from(4),
    }
}

fn cmd_solve(path: &Path, mass: f64, num: &NumericOpts, out: Option<&Path>, plot: bool) -> Result<ExitCode> {
    let g = load_graph(path)?;
    let disc = Discretization::new(&g, GridSpec::new(num.step_h, num.trunc_l))
        .map_err(|e| anyhow!("{e}"))?;
    let cfg = num.solver_config();
    let inits = default_inits(&disc, mass, &cfg);
    let r = minimize_at_mass(&disc, mass, &cfg, &inits).map_err(|e| anyhow!("{e}"))?;
    let record = json!({
        "schema": "nlsgraph.v1",
        "command": "solve",
        "config": {
            "graph": path.display().to_string(),
            "mass": mass,
            "step_h": num.step_h,
            "trunc_L": num.trunc_l,
            "seed": num.seed,
            "tol": num.tol,
            "max_iters": num.max_iters,
            "inits_cap": num.inits_cap,
            "solver": serde_json::to_value(&cfg)?,
        },
        "constants": constants_block(),
        "result": {
            "status": format!("{:?}", r.status),
            "energy": r.energy,
            "omega": r.omega,
            "residual": r.residual,
            "mass": r.u.mass(),
            "init": r.init_label,
            "iterations": r.iterations.len(),
            "probe": r.probe,
        },
    });
    emit_record(out, "solve.json", &record)?;
    if let Some(dir) = out {
        let mut csv = Csv::new("iterations", &["iter", "energy", "tau", "residual"]);
        for it in &r.iterations {
            csv.row(&[
                CsvField::Int(it.iter as i64),
                CsvField::Float(it.energy),
                CsvField::Float(it.tau),
                CsvField::Float(it.residual.unwrap_or(f64::NAN)),
            ]);
        }
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("iterations.csv"), csv.finish())?;
        if plot {
            let (pts, _) = unrolled_profile(&r.u);
            let svg = svg_line_plot(
                "minimizer profile (edge-ordered arclength)",
                "arclength",
                "u",
                &[("u", &pts)],
            );
            std::fs::write(dir.join("profile.svg"), svg)?;
            let mut pcsv = Csv::new("profile", &["arclength", "value"]);
            for (x, v) in &pts {
                pcsv.row(&[CsvField::Float(*x), CsvField::Float(*v)]);
            }
            std::fs::write(dir.join("profile.csv"), pcsv.finish())?;
        }
        // portable function for downstream transforms
        let portable = serde_json::to_string(&r.u.to_portable())?;
        std::fs::write(dir.join("minimizer.function.json"), portable)?;
    }
    Ok(status_exit(r.status))
}

fn parse_mass_grid(spec: &str) -> Result<Vec<f64>> {
    let masses: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(anyhow!("mass grid '{spec}' must be start:stop:step"));
        }
        let (a, b, s): (f64, f64, f64) = (parts[0].parse()?, parts[1].parse()?, parts[2].parse()?);
        if !(s > 0.0 && b >= a) {
            return Err(anyhow!("degenerate mass grid '{spec}'"));
        }
        let n = ((b - a) / s).round() as usize;
        (0..=n).map(|i| a + s * i as f64).filter(|&m| m <= b + 1e-12).collect()
    } else {
        spec.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| anyhow!("bad mass '{t}': {e}")))
            .collect::<Result<_>>()?
    };
    if masses.is_empty() {
        return Err(anyhow!("empty mass grid"));
    }
    Ok(masses)
}

fn cmd_scan(
    path: &Path,
    grid_spec: &str,
    scan_budget: f64,
    num: &NumericOpts,
    out: Option<&Path>,
    plot: bool,
) -> Result<ExitCode> {
    let g = load_graph(path)?;
    let disc = Discretization::new(&g, GridSpec::new(num.step_h, num.trunc_l))
        .map_err(|e| anyhow!("{e}"))?;
    let masses = parse_mass_grid(grid_spec)?;
    let cfg = SolverConfig {
        scan_budget_floor: scan_budget,
        ..num.solver_config()
    };
    let scan = energy_scan(&disc, &masses, &cfg).map_err(|e| anyhow!("{e}"))?;
    let record = json!({
        "schema": "nlsgraph.v1",
        "command": "scan",
        "config": {
            "graph": path.display().to_string(),
            "mass_grid": masses,
            "step_h": num.step_h,
            "trunc_L": num.trunc_l,
            "seed": num.seed,
            "workers": num.workers,
            "scan_budget_floor": scan_budget,
            "solver": serde_json::to_value(&cfg)?,
        },
        "constants": constants_block(),
        "budget": scan.budget,
        "points": scan.points,
        "bracket": scan.bracket,
        "unbounded_onset": scan.unbounded_onset,
    });
    emit_record(out, "scan.json", &record)?;
    if let Some(dir) = out {
        let mut csv = Csv::new("scan", &["mass", "energy", "omega", "status", "residual"]);
        for p in &scan.points {
            csv.row(&[
                CsvField::Float(p.mass),
                CsvField::Float(p.energy),
                CsvField::Float(p.omega),
                CsvField::Str(&format!("{:?}", p.status)),
                CsvField::Float(p.residual),
            ]);
        }
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("scan.csv"), csv.finish())?;
        if plot {
            let pts: Vec<(f64, f64)> = scan.points.iter().map(|p| (p.mass, p.energy)).collect();
            let svg = svg_line_plot("ground-state energy level", "mass", "energy", &[("E", &pts)]);
            std::fs::write(dir.join("scan.svg"), svg)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_gn(path: &Path, num: &NumericOpts, out: Option<&Path>) -> Result<ExitCode> {
    let g = load_graph(path)?;
    let disc = Discretization::new(&g, GridSpec::new(num.step_h, num.trunc_l))
        .map_err(|e| anyhow!("{e}"))?;
    let cfg = GnConfig {
        seed: num.seed,
        inits_cap: num.inits_cap,
        ..GnConfig::default()
    };
    let est = nlsgraph::gn::maximize_quotient(&disc, &cfg).map_err(|e| anyhow!("{e}"))?;
    let report = nlsgraph::gn::consistency_report(&est, &g.classify(), 1e-3);
    let record = json!({
        "schema": "nlsgraph.v1",
        "command": "gn",
        "config": {
            "graph": path.display().to_string(),
            "step_h": num.step_h,
            "trunc_L": num.trunc_l,
            "seed": num.seed,
            "gn": serde_json::to_value(&cfg)?,
        },
        "constants": constants_block(),
        "estimate": {
            "k_lower": est.k_lower,
            "mu_upper": est.mu_upper,
            "exact_mass": est.exact,
            "diagnostics": est.diagnostics,
        },
        "consistency": report,
    });
    emit_record(out, "gn.json", &record)?;
    if let Some(dir) = out {
        let mut csv = Csv::new("gn-runs", &["init", "quotient"]);
        for (label, q) in &est.diagnostics.runs {
            csv.row(&[CsvField::Str(label), CsvField::Float(*q)]);
        }
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("gn_runs.csv"), csv.finish())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn default_transform_field(disc: &Arc<Discretization>, seed: u64) -> GraphFunction {
    // deterministic smooth positive field: a soliton bump on the first edge
    // plus a small modulation set by the seed
    let lam = 1.0 + (seed % 5) as f64 * 0.3;
    nlsgraph::function::soliton_on(disc, EdgeId(0), 0.25, lam)
        .rescaled_to_mass(1.0)
        .expect("nonzero default field")
}

fn cmd_transform(
    path: &Path,
    which: &str,
    function: Option<&Path>,
    num: &NumericOpts,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let g = load_graph(path)?;
    let disc = Discretization::new(&g, GridSpec::new(num.step_h, num.trunc_l))
        .map_err(|e| anyhow!("{e}"))?;
    let u = match function {
        Some(f) => {
            let text = std::fs::read_to_string(f)
                .with_context(|| format!("reading function file {}", f.display()))?;
            let portable: PortableFunction = serde_json::from_str(&text)?;
            if portable.graph != g {
                return Err(anyhow!("function file was discretized on a different graph"));
            }
            GraphFunction::from_portable(&portable).map_err(|e| anyhow!("{e}"))?
        }
        None => default_transform_field(&disc, num.seed),
    };
    let record = match which {
        "bridge-double" => {
            let bridges: Vec<EdgeId> = g.bridge_set().into_iter().collect();
            let d = transforms::bridge_double(&u).map_err(|e| anyhow!("{e}"))?;
            let bc = transforms::bridge_doubling_bound_check(&u);
            let mass_identity_err = (d.u.mass() - (u.mass() + 3.0 * u.lp_on_edges(2, &bridges))).abs();
            let sextic_identity_err =
                (d.u.lp_norm_p(6) - (u.lp_norm_p(6) + 3.0 * u.lp_on_edges(6, &bridges))).abs();
            let kinetic_identity_err = (d.u.kinetic() - u.kinetic()).abs();
            if let Some(dir) = out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(
                    dir.join("doubled.function.json"),
                    serde_json::to_string(&d.u.to_portable())?,
                )?;
                std::fs::write(dir.join("doubled.graph"), d.graph.to_description())?;
            }
            json!({
                "schema": "nlsgraph.v1",
                "command": "transform",
                "transform": "bridge-double",
                "config": { "graph": path.display().to_string(), "step_h": num.step_h, "trunc_L": num.trunc_l, "seed": num.seed },
                "doubled_edges": d.doubled,
                "identities": {
                    "mass_error": mass_identity_err,
                    "sextic_error": sextic_identity_err,
                    "kinetic_error": kinetic_identity_err,
                },
                "bound_check": bc,
                "covered_after": d.graph.has_cycle_covering(),
            })
        }
        "decreasing" | "symmetric" => {
            let r = if which == "decreasing" {
                transforms::decreasing_rearrangement(&u)
            } else {
                transforms::symmetric_rearrangement(&u)
            };
            let kin_in = u.kinetic();
            let kin_out = r.kinetic_reinterp();
            if let Some(dir) = out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("rearranged.json"), serde_json::to_string(&r)?)?;
            }
            json!({
                "schema": "nlsgraph.v1",
                "command": "transform",
                "transform": which,
                "config": { "graph": path.display().to_string(), "step_h": num.step_h, "trunc_L": num.trunc_l, "seed": num.seed },
                "checks": {
                    "l2_cells_in_vs_out": [u.mass(), r.lp_cells(2)],
                    "l6_cells_out": r.lp_cells(6),
                    "kinetic_in": kin_in,
                    "kinetic_out": kin_out,
                    "kinetic_nonincrease": kin_out <= kin_in * (1.0 + 5e-3),
                },
            })
        }
        other => return Err(anyhow!("unknown transform '{other}' (bridge-double|decreasing|symmetric)")),
    };
    emit_record(out, "transform.json", &record)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest(only: Option<&str>) -> Result<ExitCode> {
    let wanted: Option<Vec<usize>> = match only {
        Some(list) => Some(
            list.split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|e| anyhow!("bad id '{t}': {e}")))
                .collect::<Result<_>>()?,
        ),
        None => None,
    };
    let all: Vec<fn() -> nlsgraph::selftest::CriterionOutcome> = vec![
        nlsgraph::selftest::criterion_1,
        nlsgraph::selftest::criterion_2,
        nlsgraph::selftest::criterion_3,
        nlsgraph::selftest::criterion_4,
        nlsgraph::selftest::criterion_5,
        nlsgraph::selftest::criterion_6,
        nlsgraph::selftest::criterion_7,
        nlsgraph::selftest::criterion_8,
        nlsgraph::selftest::criterion_9,
        nlsgraph::selftest::criterion_10,
        nlsgraph::selftest::criterion_11,
        nlsgraph::selftest::criterion_12,
    ];
    let mut failed = false;
    for (i, f) in all.iter().enumerate() {
        let id = i + 1;
        if wanted.as_ref().map_or(false, |w| !w.contains(&id)) {
            continue;
        }
        let outcome = f();
        println!("{}", outcome.summary_line());
        for d in &outcome.details {
            println!("    {d}");
        }
        failed |= !outcome.passed;
    }
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}
