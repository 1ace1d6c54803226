use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use torlab_core::gromov::{ConvergenceReport, DeltaOptions};
use torlab_core::*;

/// Exit code for errors; 0, 1 and 2 are verdicts.
const ERROR_EXIT: u8 = 3;

#[derive(Parser)]
#[command(name = "torlab", version, about = "Curve graph, electric Teichmüller space and boundary experiments for the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Farey graph (curve graph of the torus or four-punctured sphere).
    #[command(subcommand)]
    Farey(FareyCmd),
    /// Teichmüller space with thin regions coned off.
    #[command(subcommand)]
    Electric(ElectricCmd),
    /// Hyperbolicity tools on distance matrices.
    #[command(subcommand)]
    Gromov(GromovCmd),
    /// Experiments with verdicts; exit code 0 pass, 1 fail, 2 inconclusive.
    #[command(subcommand)]
    Lab(LabCmd),
}

#[derive(Args, Clone)]
struct FareyOpts {
    /// 1 for the torus, 2 for the four-punctured sphere.
    #[arg(long, default_value_t = 1)]
    threshold: u8,
    /// Largest slope height searched (default: enough for an exact answer).
    #[arg(long)]
    bound: Option<u64>,
}

#[derive(Subcommand)]
enum FareyCmd {
    /// Distance between two slopes such as 3/5 and 1/0.
    Dist {
        #[arg(allow_hyphen_values = true)]
        a: Slope,
        #[arg(allow_hyphen_values = true)]
        b: Slope,
        #[command(flatten)]
        opts: FareyOpts,
        /// Also print one shortest path.
        #[arg(long)]
        path: bool,
    },
    /// Ball around a slope, with optional CSV exports.
    Ball {
        #[arg(allow_hyphen_values = true)]
        center: Slope,
        #[arg(long)]
        radius: u32,
        #[command(flatten)]
        opts: FareyOpts,
        /// Edge list CSV (vertex1,vertex2).
        #[arg(long)]
        edges: Option<PathBuf>,
        /// Distance table CSV (vertex,dist).
        #[arg(long)]
        distances: Option<PathBuf>,
        /// Also run the four-point δ scan on the ball.
        #[arg(long)]
        delta: bool,
    },
}

#[derive(Args, Clone)]
struct LabOpts {
    /// Thin-region threshold on extremal length.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Teichmüller spacing of the net.
    #[arg(long)]
    grid: Option<f64>,
    /// Slope window for the quasi-isometry audit, as `lo,hi`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    window: Option<(f64, f64)>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON file with any `LabConfig` fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the JSON report (or CSV profile) here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ElectricCmd {
    /// Electric distance between two points `x,y` of the upper half-plane.
    Dist {
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        from: TeichPoint,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        to: TeichPoint,
        #[command(flatten)]
        lab: LabOpts,
    },
    /// `t,d_el` along the ray from i toward a continued fraction.
    Profile {
        #[arg(long = "ray")]
        target: ContinuedFraction,
        #[arg(long = "T", default_value_t = 12.0)]
        t_max: f64,
        #[command(flatten)]
        lab: LabOpts,
    },
    /// Weighted edge list of the coned-off net over a window.
    Edges {
        /// `x_min,x_max,y_min,y_max`
        #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
        region: [f64; 4],
        #[command(flatten)]
        lab: LabOpts,
    },
}

#[derive(Subcommand)]
enum GromovCmd {
    /// Four-point δ of a distance matrix CSV (header row of labels).
    Delta {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest sample scanned exhaustively.
        #[arg(long)]
        exact_limit: Option<usize>,
    },
    /// `(k, μ)` between two matrices over the same labels.
    QiFit {
        #[arg(long)]
        d0: PathBuf,
        #[arg(long)]
        d1: PathBuf,
    },
    /// Whether Gromov products along a sequence of rows tend to infinity.
    Converge {
        #[arg(long)]
        matrix: PathBuf,
        /// Row indices, comma separated.
        #[arg(long, value_delimiter = ',')]
        sequence: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        base: usize,
        #[arg(long, default_value_t = 2)]
        tail: usize,
        #[arg(long)]
        threshold: Option<f64>,
    },
}

#[derive(Subcommand)]
enum LabCmd {
    /// Electric profile along a Teichmüller ray.
    Ray {
        #[arg(long)]
        target: ContinuedFraction,
        #[arg(long = "T", default_value_t = 12.0)]
        t_max: f64,
        #[command(flatten)]
        lab: LabOpts,
    },
    /// Gromov products between rays toward two irrationals.
    Separate {
        #[arg(long)]
        f: ContinuedFraction,
        #[arg(long)]
        g: ContinuedFraction,
        #[arg(long, default_value_t = 48)]
        n: usize,
        #[command(flatten)]
        lab: LabOpts,
    },
    /// Curve graph versus thin regions, plus random geodesics.
    QiAudit {
        #[arg(long)]
        denom: i64,
        /// Compare with the fit at this smaller denominator bound instead.
        #[arg(long)]
        compare: Option<i64>,
        #[command(flatten)]
        lab: LabOpts,
    },
    /// Segments between two rays against the limiting geodesic.
    Segments {
        #[arg(long)]
        f: ContinuedFraction,
        #[arg(long)]
        g: ContinuedFraction,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[command(flatten)]
        lab: LabOpts,
    },
    /// Curve-graph Gromov products along a sequence of slopes.
    BoundaryMap {
        /// Use the convergents of this continued fraction.
        #[arg(long, conflicts_with = "slopes")]
        target: Option<ContinuedFraction>,
        #[arg(long, default_value_t = 1000)]
        max_denom: i64,
        /// Explicit slopes, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        slopes: Vec<Slope>,
        #[command(flatten)]
        lab: LabOpts,
    },
}

fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    match parse_floats(s)?[..] {
        [a, b] => Ok((a, b)),
        _ => Err(format!("expected two numbers, got {s:?}")),
    }
}

fn parse_point(s: &str) -> Result<TeichPoint, String> {
    let (x, y) = parse_pair(s)?;
    TeichPoint::new(x, y).map_err(|e| e.to_string())
}

fn parse_window(s: &str) -> Result<[f64; 4], String> {
    parse_floats(s)?
        .try_into()
        .map_err(|_| format!("expected x_min,x_max,y_min,y_max, got {s:?}"))
}

impl LabOpts {
    fn lab(&self) -> Result<Lab> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => LabConfig::default(),
        };
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        if let Some(g) = self.grid {
            cfg.spacing = g;
        }
        if let Some(w) = self.window {
            cfg.qi_window = w;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(Lab::new(cfg))
    }

    fn emit(&self, text: &str) -> Result<()> {
        let mut out = io::stdout().lock();
        out.write_all(text.as_bytes())?;
        if !text.ends_with('\n') {
            out.write_all(b"\n")?;
        }
        if let Some(path) = &self.out {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }

    fn report(&self, report: &ExperimentReport) -> Result<u8> {
        self.emit(&report.to_json())?;
        Ok(report.verdict.exit_code() as u8)
    }
}

fn read_matrix(path: &Path) -> Result<MetricSample> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let labels: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut values = Vec::with_capacity(labels.len() * labels.len());
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != labels.len() {
            bail!("row {} has {} entries, expected {}", r + 1, record.len(), labels.len());
        }
        for field in record.iter() {
            values.push(field.trim().parse::<f64>().with_context(|| format!("row {}: {field:?}", r + 1))?);
        }
    }
    Ok(MetricSample::from_matrix(labels, values)?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn print_json(value: serde_json::Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &value)?;
    writeln!(out)?;
    Ok(())
}

fn farey(cmd: FareyCmd) -> Result<u8> {
    match cmd {
        FareyCmd::Dist { a, b, opts, path } => {
            let params = FareyParams::new(opts.threshold)?;
            let bound = opts.bound.unwrap_or_else(|| farey::default_bound(a, b, params));
            println!("{}", farey_distance(a, b, params, bound)?);
            if path {
                let p = geodesic_path(a, b, params, bound)?;
                println!("{}", p.iter().map(Slope::to_string).collect::<Vec<_>>().join(" "));
            }
        }
        FareyCmd::Ball {
            center,
            radius,
            opts,
            edges,
            distances,
            delta,
        } => {
            let params = FareyParams::new(opts.threshold)?;
            let bound = opts.bound.unwrap_or(center.height().max(1) * 8);
            let b = ball(center, radius, params, bound)?;
            if let Some(path) = edges {
                b.write_edges_csv(create(&path)?)?;
            }
            if let Some(path) = distances {
                b.write_distances_csv(create(&path)?)?;
            }
            let mut summary = json!({
                "center": center.to_string(),
                "radius": radius,
                "bound": bound,
                "vertices": b.len(),
                "edges": b.edges.len(),
            });
            if delta {
                summary["delta"] = serde_json::to_value(delta_four_point(&b.metric_sample()?))?;
            }
            print_json(summary)?;
        }
    }
    Ok(0)
}

fn electric(cmd: ElectricCmd) -> Result<u8> {
    match cmd {
        ElectricCmd::Dist { from, to, lab: opts } => {
            let mut lab = opts.lab()?;
            let radius = lab.config.tube_radius;
            let cached = lab.net(&[Patch::segment_tube(from, to, radius)])?;
            let locate = |z: TeichPoint| {
                cached
                    .net
                    .locate(z)
                    .with_context(|| format!("no net node near {},{}", z.x, z.y))
            };
            let (i, j) = (locate(from)?, locate(to)?);
            let result = json!({
                "from": from,
                "to": to,
                "teich_distance": teich_distance(from, to),
                "d_el": cached.electric.d_el(i, j)?,
                "net_nodes": cached.net.len(),
                "cones": cached.electric.cones().len(),
            });
            opts.emit(&serde_json::to_string_pretty(&result)?)?;
        }
        ElectricCmd::Profile { target, t_max, lab: opts } => {
            let report = opts.lab()?.ray_profile(&target, t_max)?;
            let mut reader = csv::Reader::from_reader(report.profile_csv.as_bytes());
            let headers = reader.headers()?.clone();
            let col = |name: &str| headers.iter().position(|h| h == name).expect("ray profile columns");
            let (t, d) = (col("t"), col("d_el"));
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["t", "d_el"])?;
            for record in reader.records() {
                let record = record?;
                w.write_record([&record[t], &record[d]])?;
            }
            opts.emit(&String::from_utf8(w.into_inner()?)?)?;
        }
        ElectricCmd::Edges { region, lab: opts } => {
            let mut lab = opts.lab()?;
            let [x_min, x_max, y_min, y_max] = region;
            let cached = lab.net(&[Patch::Window {
                x_min,
                x_max,
                y_min,
                y_max,
            }])?;
            let mut buf = Vec::new();
            cached.electric.write_edges_csv(&mut buf)?;
            opts.emit(&String::from_utf8(buf)?)?;
        }
    }
    Ok(0)
}

fn gromov_cmd(cmd: GromovCmd) -> Result<u8> {
    match cmd {
        GromovCmd::Delta {
            matrix,
            seed,
            exact_limit,
        } => {
            let m = read_matrix(&matrix)?;
            let mut opts = DeltaOptions {
                seed,
                ..DeltaOptions::default()
            };
            if let Some(limit) = exact_limit {
                opts.exact_limit = limit;
            }
            print_json(serde_json::to_value(gromov::delta_four_point_with(&m, opts))?)?;
        }
        GromovCmd::QiFit { d0, d1 } => {
            let (a, b) = (read_matrix(&d0)?, read_matrix(&d1)?);
            if a.len() != b.len() {
                bail!("matrices have {} and {} points", a.len(), b.len());
            }
            let n = a.len();
            let pairs: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, i, j))).collect();
            if pairs.is_empty() {
                bail!("need at least two points");
            }
            print_json(serde_json::to_value(quasi_isometry_fit(&pairs, &a, &b)?)?)?;
        }
        GromovCmd::Converge {
            matrix,
            sequence,
            base,
            tail,
            threshold,
        } => {
            let m = read_matrix(&matrix)?;
            let report: ConvergenceReport = convergence_at_infinity(&sequence, &m, base, tail, threshold)?;
            print_json(serde_json::to_value(&report)?)?;
            return Ok(match report.verdict {
                Convergence::Inconclusive => 2,
                _ => 0,
            });
        }
    }
    Ok(0)
}

fn lab(cmd: LabCmd) -> Result<u8> {
    match cmd {
        LabCmd::Ray { target, t_max, lab } => lab.report(&lab.lab()?.ray_profile(&target, t_max)?),
        LabCmd::Separate { f, g, n, lab } => lab.report(&lab.lab()?.separation_profile(&f, &g, n)?),
        LabCmd::QiAudit { denom, compare, lab } => {
            let mut l = lab.lab()?;
            let report = match compare {
                Some(low) => l.qi_stability(low, denom)?,
                None => l.qi_audit(denom)?,
            };
            lab.report(&report)
        }
        LabCmd::Segments { f, g, n, lab } => lab.report(&lab.lab()?.segment_accumulation(&f, &g, n)?),
        LabCmd::BoundaryMap {
            target,
            max_denom,
            slopes,
            lab,
        } => {
            let seq = match target {
                Some(cf) => cf.convergents_up_to(max_denom),
                None if !slopes.is_empty() => slopes,
                None => bail!("give --target or --slopes"),
            };
            lab.report(&lab.lab()?.boundary_map_audit(&seq)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { ERROR_EXIT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Farey(c) => farey(c),
        Command::Electric(c) => electric(c),
        Command::Gromov(c) => gromov_cmd(c),
        Command::Lab(c) => lab(c),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(ERROR_EXIT)
        }
    }
}
