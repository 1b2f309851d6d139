use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qcorr::discord::{discord, discord_pure_bipartite};
use qcorr::entanglement::{pure_bipartite_ree, ree_closed_form, ree_upper_bound_seeded};
use qcorr::measures::{classical_correlation, total_mutual_information, von_neumann_entropy};
use qcorr::relations::{conjecture_campaign, evaluate, round12, write_campaign_csv, Measure, ZERO_TOL};
use qcorr::scan::{default_columns, find_crossing, linear_grid, scan, Column};
use qcorr::states::{load_state, named_state};
use qcorr::{Family, OptimizerConfig, Partition, QcorrError, SamplingMethod, State};

#[derive(Parser)]
#[command(name = "qcorr", version, about = "Relative-entropy correlation measures of multipartite states")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct GlobalOpts {
    /// Seed for optimizer starts and sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Random starts per discord search.
    #[arg(long, global = true)]
    starts: Option<usize>,
    /// Value tolerance of the local searches.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON file with optimizer settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct StateSource {
    /// State file (JSON).
    #[arg(long, conflicts_with = "family")]
    state: Option<PathBuf>,
    /// Named family, e.g. ghz, w, ghz_plus, counterexample.
    #[arg(long)]
    family: Option<String>,
    /// Family parameters as k=v pairs separated by commas.
    #[arg(long, default_value = "")]
    params: String,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate measures on one grouping of a state.
    Measure {
        #[command(flatten)]
        source: StateSource,
        /// Grouping such as A:B:C, AB:C or BC:A.
        #[arg(long)]
        partition: String,
        /// Comma-separated subset of T,D,E,C.
        #[arg(long, default_value = "T,D,E,C")]
        measures: String,
    },
    /// Evaluate all additivity relations of a 3-party state.
    Check {
        #[command(flatten)]
        source: StateSource,
        #[arg(long, default_value = "T,D,E")]
        measures: String,
    },
    /// Sweep a single-parameter family.
    #[command(after_help = scan_columns_help())]
    Scan {
        #[arg(long)]
        family: String,
        /// Grid as start:stop:points.
        #[arg(long, default_value = "0:1:51")]
        grid: String,
        /// Explicit comma-separated parameter values (overrides --grid).
        #[arg(long)]
        values: Option<String>,
        /// Comma-separated columns (default: every value column of --measures).
        #[arg(long)]
        columns: Option<String>,
        #[arg(long, default_value = "T,D")]
        measures: String,
        /// Report the first sign change of this column instead of a table.
        #[arg(long)]
        crossing: Option<String>,
        #[arg(long, default_value_t = 1e-3)]
        crossing_tol: f64,
    },
    /// Random-sample test of D(XY:Z) ≥ max{D(X:Z), D(Y:Z)} on pure states.
    Sample {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value = "acin_uniform")]
        method: String,
        /// Where to write the summary JSON (default: stderr, or stdout when
        /// --out holds the CSV).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

enum Failure {
    Usage(QcorrError),
    Gate(String),
}

impl From<QcorrError> for Failure {
    fn from(e: QcorrError) -> Self {
        Failure::Usage(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.into())
    }
}

fn config(g: &GlobalOpts) -> Result<OptimizerConfig, QcorrError> {
    let mut cfg = match &g.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| QcorrError::Format(format!("config {}: {e}", path.display())))?
        }
        None => OptimizerConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(s) = g.starts {
        cfg.starts = s;
    }
    if let Some(t) = g.tol {
        cfg.tol = t;
    }
    Ok(cfg)
}

fn parse_params(s: &str) -> Result<BTreeMap<String, f64>, QcorrError> {
    s.split(',')
        .map(str::trim)
        .filter(|kv| !kv.is_empty())
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| QcorrError::Param(format!("expected k=v, got {kv:?}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| QcorrError::Param(format!("{k}: not a number: {v:?}")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn load(src: &StateSource) -> Result<State, QcorrError> {
    match (&src.state, &src.family) {
        (Some(path), _) => load_state(path),
        (None, Some(f)) => named_state(f, &parse_params(&src.params)?),
        (None, None) => Err(QcorrError::Param("give --state FILE or --family NAME".into())),
    }
}

fn parse_list<T: std::str::FromStr<Err = QcorrError>>(s: &str) -> Result<Vec<T>, QcorrError> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(str::parse).collect()
}

/// Rounds every number to 12 significant digits.
fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64().filter(|_| n.is_f64()) {
                if let Some(m) = serde_json::Number::from_f64(round12(x)) {
                    *n = m;
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_numbers),
        Value::Object(o) => o.values_mut().for_each(round_numbers),
        _ => {}
    }
}

fn output(g: &GlobalOpts) -> io::Result<Box<dyn Write>> {
    Ok(match &g.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn emit_json(g: &GlobalOpts, mut v: Value) -> Result<(), Failure> {
    round_numbers(&mut v);
    let mut w = output(g)?;
    serde_json::to_writer_pretty(&mut w, &v).map_err(io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn measure(s: &State, part: &Partition, measures: &[Measure], cfg: &OptimizerConfig) -> Result<Value, QcorrError> {
    part.check_for(s.n_parties())?;
    let bipartite = part.blocks().len() == 2;
    let marginal_pure = s.restrict(part)?.0.is_pure();
    let mut out = serde_json::Map::new();
    out.insert("label".into(), json!(s.label()));
    out.insert("partition".into(), json!(part.to_string()));
    out.insert("purity".into(), json!(s.purity()));
    out.insert("S".into(), json!(von_neumann_entropy(s)?));
    if measures.contains(&Measure::T) {
        out.insert("T".into(), json!({"value": total_mutual_information(s, part)?, "flag": "exact"}));
    }
    let needs_search = measures.iter().any(|m| matches!(m, Measure::D | Measure::C))
        || (measures.contains(&Measure::E) && !(bipartite && marginal_pure));
    let d = if needs_search { Some(discord(s, part, cfg)?) } else { None };
    if measures.contains(&Measure::D) {
        let d = d.as_ref().expect("search ran");
        let mut entry = json!({
            "value": d.value,
            "flag": if d.value <= ZERO_TOL { "exact" } else { "upper_bound" },
            "consensus": d.consensus(),
            "local_minima": d.local_minima.len(),
            "starts_used": d.starts_used,
            "converged": d.converged,
        });
        if bipartite && marginal_pure {
            entry["value"] = json!(discord_pure_bipartite(s, part)?);
            entry["flag"] = json!("exact");
            entry["optimizer_value"] = json!(d.value);
        }
        out.insert("D".into(), entry);
    }
    if measures.contains(&Measure::E) {
        let catalog = s.origin().and_then(|o| ree_closed_form(o, part).ok());
        let entry = if let Some(v) = catalog {
            json!({"value": v, "flag": "exact", "source": "catalog"})
        } else if bipartite && marginal_pure {
            json!({"value": pure_bipartite_ree(s, part)?, "flag": "exact", "source": "pure_bipartite"})
        } else {
            let r = ree_upper_bound_seeded(s, part, cfg, d.as_ref())?;
            json!({
                "value": r.value,
                "flag": if r.value <= ZERO_TOL { "exact" } else { "upper_bound" },
                "source": "separable_ansatz",
                "seeded_from": r.seeded_from,
                "terms": r.ensemble.len(),
                "iterations": r.iterations,
                "gap": r.gap,
                "converged": r.converged,
            })
        };
        out.insert("E".into(), entry);
    }
    if measures.contains(&Measure::C) {
        let d = d.as_ref().expect("search ran");
        out.insert(
            "C".into(),
            json!({"value": classical_correlation(s, part, d)?, "flag": "optimizer"}),
        );
    }
    Ok(Value::Object(out))
}

fn parse_grid(grid: &str, values: Option<&str>) -> Result<Vec<f64>, QcorrError> {
    let bad = |s: &str| QcorrError::Param(format!("bad grid {s:?}"));
    if let Some(v) = values {
        return v
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| bad(v)))
            .collect();
    }
    let parts: Vec<&str> = grid.split(':').collect();
    if parts.len() != 3 {
        return Err(bad(grid));
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad(grid))?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad(grid))?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad(grid))?;
    Ok(linear_grid(start, stop, n))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    if let Some(n) = g.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| QcorrError::Param(format!("threads: {e}")))?;
    }
    let cfg = config(g)?;
    match &cli.cmd {
        Cmd::Measure {
            source,
            partition,
            measures,
        } => {
            let s = load(source)?;
            let part = Partition::parse(partition)?;
            let ms: Vec<Measure> = parse_list(measures)?;
            emit_json(g, measure(&s, &part, &ms, &cfg)?)
        }
        Cmd::Check { source, measures } => {
            let s = load(source)?;
            let ms: Vec<Measure> = parse_list(measures)?;
            let report = evaluate(&s, &ms, &cfg)?;
            let violations = report.gating_violations;
            emit_json(g, serde_json::to_value(&report).map_err(io::Error::from)?)?;
            if violations > 0 {
                return Err(Failure::Gate(format!("{violations} theorem relation(s) violated")));
            }
            Ok(())
        }
        Cmd::Scan {
            family,
            grid,
            values,
            columns,
            measures,
            crossing,
            crossing_tol,
        } => {
            let fam: Family = family.parse()?;
            let grid = parse_grid(grid, values.as_deref())?;
            if let Some(col) = crossing {
                let c = find_crossing(fam, &grid, col, *crossing_tol, &cfg)?;
                return emit_json(g, json!({"family": fam, "column": col, "crossing": c}));
            }
            let cols: Vec<String> = match columns {
                Some(c) => c.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect(),
                None => default_columns(&parse_list::<Measure>(measures)?),
            };
            for c in &cols {
                Column::parse(c)?;
            }
            let table = scan(fam, &grid, &cols, &cfg)?;
            if g.format == Some(Format::Json) {
                emit_json(g, serde_json::to_value(&table).map_err(io::Error::from)?)
            } else {
                let mut w = output(g)?;
                table.write_csv(&mut w)?;
                w.flush()?;
                Ok(())
            }
        }
        Cmd::Sample { n, method, summary } => {
            let method: SamplingMethod = method.parse()?;
            let t0 = Instant::now();
            let result = conjecture_campaign(*n, cfg.seed, method, &cfg)?;
            let wall = t0.elapsed().as_secs_f64();
            let mut info = json!({
                "n": result.n,
                "seed": result.seed,
                "method": result.method,
                "slack": result.slack,
                "violation_count": result.violation_count,
                "min_residual": result.min_residual,
                "wall_time_s": wall,
            });
            if g.format == Some(Format::Json) {
                info["samples"] = serde_json::to_value(&result.samples).map_err(io::Error::from)?;
                return emit_json(g, info);
            }
            let mut w = output(g)?;
            write_campaign_csv(&result, &mut w)?;
            w.flush()?;
            round_numbers(&mut info);
            let text = serde_json::to_string_pretty(&info).map_err(io::Error::from)?;
            match (summary, &g.out) {
                (Some(p), _) => std::fs::write(p, text + "\n")?,
                (None, Some(_)) => println!("{text}"),
                (None, None) => eprintln!("{text}"),
            }
            Ok(())
        }
    }
}

/// Runs one invocation and returns its exit status.
fn execute<I, S>(args: I) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(Failure::Gate(msg)) => {
            eprintln!("qcorr: {msg}");
            1
        }
        Err(Failure::Usage(e)) => {
            eprintln!("qcorr: {e}");
            2
        }
    }
}

fn scan_columns_help() -> String {
    let lines: Vec<String> = qcorr::scan::column_help()
        .into_iter()
        .map(|(k, v)| format!("  {k:<12} {v}"))
        .collect();
    format!("Columns:\n{}", lines.join("\n"))
}

fn main() -> ExitCode {
    ExitCode::from(execute(std::env::args_os()))
}

#[cfg(test)]
mod tests {
    use std::path::Path;

    use super::*;

    fn run_to(dir: &Path, name: &str, args: &[&str]) -> (u8, String) {
        let out = dir.join(name);
        let mut argv = vec!["qcorr".to_string()];
        argv.extend(args.iter().map(|s| s.to_string()));
        argv.push("--out".into());
        argv.push(out.display().to_string());
        let code = execute(argv);
        (code, std::fs::read_to_string(&out).unwrap_or_default())
    }

    fn json_of(text: &str) -> Value {
        serde_json::from_str(text).unwrap()
    }

    #[test]
    fn measure_ghz_and_counterexample() {
        let dir = tempfile::tempdir().unwrap();
        let (code, text) = run_to(dir.path(), "g.json", &["measure", "--family", "ghz", "--partition", "A:B:C"]);
        assert_eq!(code, 0);
        let v = json_of(&text);
        assert!((v["D"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
        assert!((v["E"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        let (code, text) = run_to(
            dir.path(),
            "c.json",
            &["measure", "--family", "counterexample", "--params", "p=0.5", "--partition", "BC:A", "--measures", "D"],
        );
        assert_eq!(code, 0);
        let v = json_of(&text);
        assert!(v["D"]["value"].as_f64().unwrap().abs() < 1e-6);
        assert_eq!(v["D"]["flag"], "exact");
    }

    #[test]
    fn bad_inputs_exit_two() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, "{\"dims\": [2], \"matrix\": 3}").unwrap();
        let path = bad.display().to_string();
        assert_eq!(run_to(dir.path(), "o", &["measure", "--state", &path, "--partition", "A:B"]).0, 2);
        assert_eq!(run_to(dir.path(), "o", &["measure", "--family", "nope", "--partition", "A:B"]).0, 2);
        assert_eq!(run_to(dir.path(), "o", &["sample", "--n", "0"]).0, 2);
        assert_eq!(
            run_to(dir.path(), "o", &["scan", "--family", "ghz_plus", "--grid", "0:1:2", "--columns", "p,Q_x"]).0,
            2
        );
        assert_eq!(run_to(dir.path(), "o", &["measure", "--bogus"]).0, 2);
    }

    #[test]
    fn check_exit_codes_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let (code, _) = run_to(dir.path(), "g.json", &["check", "--family", "ghz"]);
        assert_eq!(code, 0);
        let (code, text) = run_to(
            dir.path(),
            "c.json",
            &["check", "--family", "counterexample", "--params", "p=0.3", "--measures", "T,D"],
        );
        assert_eq!(code, 0);
        let v = json_of(&text);
        let rows = v["rows"].as_array().unwrap();
        assert!(rows.iter().any(|r| r["id"] == "R_D_CONJ" && r["verdict"] == "VIOLATED"));
        let (code, text) = run_to(
            dir.path(),
            "w.json",
            &["check", "--family", "w_asym", "--params", "p=0.9", "--measures", "T,D"],
        );
        assert_eq!(code, 0);
        let v = json_of(&text);
        let row = v["rows"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["id"] == "R_D_C2" && r["permutation"] == "BAC")
            .unwrap()
            .clone();
        assert_eq!(row["verdict"], "VIOLATED");
    }

    #[test]
    fn sample_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let args = ["sample", "--n", "4", "--seed", "11", "--starts", "6"];
        let (c1, a) = run_to(dir.path(), "a.csv", &args);
        let (c2, b) = run_to(dir.path(), "b.csv", &args);
        assert_eq!((c1, c2), (0, 0));
        assert_eq!(a, b);
        let mut lines = a.lines();
        assert_eq!(lines.next(), Some("# qcorr-csv v1"));
        assert_eq!(lines.next(), Some("index,lhs,rhs,residual,permutation"));
        assert_eq!(lines.count(), 4);
    }

    #[test]
    fn scan_matches_ghz_plus_closed_forms() {
        let dir = tempfile::tempdir().unwrap();
        let (code, text) = run_to(
            dir.path(),
            "s.csv",
            &["scan", "--family", "ghz_plus", "--values", "0.2,0.5,0.7", "--columns", "p,D_A_B_C,D_A_B,E_A_BC"],
        );
        assert_eq!(code, 0);
        for line in text.lines().skip(2) {
            let x: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            let (p, q) = (x[0], x[0].min(1.0 - x[0]));
            let h = |t: f64| -t * t.log2() - (1.0 - t) * (1.0 - t).log2();
            assert!((x[1] - (h(p) + q)).abs() < 1e-3, "{line}");
            assert!((x[2] - q).abs() < 1e-3, "{line}");
            let lp = 0.5 + (0.25 - p * (1.0 - p) / 2.0).sqrt();
            assert!((x[3] - h(lp)).abs() < 1e-9, "{line}");
        }
    }

    #[test]
    fn scan_w_general_near_equality() {
        let dir = tempfile::tempdir().unwrap();
        let (code, text) = run_to(
            dir.path(),
            "w.csv",
            &[
                "scan",
                "--family",
                "w_general",
                "--grid",
                "0.05:0.95:4",
                "--columns",
                "p,D_A_B_C,D_chain_min,res_R_D_T1_min",
            ],
        );
        assert_eq!(code, 0);
        for line in text.lines().skip(2) {
            let x: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert!((x[1] - x[2]).abs() <= 0.1 * x[1], "{line}");
            assert!(x[3] >= -1e-4, "{line}");
        }
    }

    #[test]
    fn config_file_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("cfg.json");
        std::fs::write(&cfg, "{\"starts\": 3}").unwrap();
        let c = cfg.display().to_string();
        let base = ["measure", "--family", "w", "--partition", "A:B", "--measures", "D", "--config", c.as_str()];
        let (_, a) = run_to(dir.path(), "a.json", &base);
        let mut with_flag = base.to_vec();
        with_flag.extend(["--starts", "5"]);
        let (_, b) = run_to(dir.path(), "b.json", &with_flag);
        let used = |t: &str| json_of(t)["D"]["starts_used"].as_u64().unwrap();
        assert_eq!(used(&b) - used(&a), 2);
        let (_, d) = run_to(dir.path(), "d.json", &base[..7]);
        assert_eq!(used(&d) - used(&a), 17);
    }

    #[test]
    fn crossing_output() {
        let dir = tempfile::tempdir().unwrap();
        let (code, text) = run_to(
            dir.path(),
            "x.json",
            &["scan", "--family", "ghz_general", "--grid", "0:0.5:3", "--crossing", "T_A_B_C"],
        );
        assert_eq!(code, 0);
        assert!(json_of(&text)["crossing"].is_null());
    }

    #[test]
    fn numbers_are_rounded() {
        let mut v = json!({"a": [1.0 / 3.0, 2], "b": {"c": 0.1 + 0.2}});
        round_numbers(&mut v);
        assert_eq!(v, json!({"a": [0.333333333333, 2], "b": {"c": 0.3}}));
    }
}
