//! `wardsim` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use wardsim::sim::{load_scenario, render_svg, write_trace, Outcome, Scenario, ScenarioError, TraceReport};
use wardsim::vision::corpus::{accuracy, generate_corpus, CorpusGrid};
use wardsim::vision::{CardView, VisionParams};
use wardsim::{classify_ward, default_map, load_map, run_scenario, TemplateSet, Tier, TrackMap};

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "wardsim", version, about = "Ward-delivery cart simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run {
        scenario: PathBuf,
        /// Write the trace CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write map and trajectories as SVG here.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run every `.scn` file in a directory and print a summary table.
    Suite {
        dir: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Render and classify the labelled digit corpus.
    VisionCorpus {
        /// Per-sample output file.
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Restrict the pixel noise axis to this sigma.
        #[arg(long)]
        noise: Option<f64>,
        /// Restrict the distortion axis to this k1.
        #[arg(long)]
        k1: Option<f64>,
        /// Comma-separated digits to include.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        digits: Option<Vec<u8>>,
    },
    /// Draw a map as SVG.
    RenderMap {
        output: PathBuf,
        /// Map file; the built-in map if omitted.
        #[arg(long)]
        map: Option<PathBuf>,
    },
}

/// Flags that override scenario fields.
#[derive(Args, Clone, Default)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    max_ticks: Option<u64>,
    /// Pixel noise sigma.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    k1: Option<f64>,
    /// Link drop probability.
    #[arg(long)]
    drop: Option<f64>,
    /// Link latency in ticks.
    #[arg(long)]
    latency: Option<u64>,
}

impl Overrides {
    fn apply(&self, s: &mut Scenario) -> Result<(), String> {
        let c = &mut s.config;
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.dt {
            c.dt = v;
        }
        if let Some(v) = self.max_ticks {
            c.max_ticks = v;
        }
        if let Some(v) = self.noise {
            c.noise.sigma = v;
        }
        if let Some(v) = self.k1 {
            c.noise.k1 = v;
        }
        if let Some(v) = self.drop {
            c.link.drop_probability = v;
        }
        if let Some(v) = self.latency {
            c.link.latency_ticks = v;
        }
        c.validate().map_err(|e| e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { scenario, trace, svg, overrides } => cmd_run(&scenario, trace, svg, &overrides),
        Command::Suite { dir, overrides } => cmd_suite(&dir, &overrides),
        Command::VisionCorpus { output, seed, noise, k1, digits } => cmd_corpus(&output, seed, noise, k1, digits),
        Command::RenderMap { output, map } => cmd_render_map(&output, map.as_deref()),
    };
    match code {
        Ok(c) => ExitCode::from(c),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn load(path: &Path, overrides: &Overrides) -> Result<(Scenario, TrackMap), String> {
    let (mut s, map) = load_scenario(path).map_err(|e| match e {
        ScenarioError::NotFound(p) => format!("scenario not found: {}", p.display()),
        e => format!("{}: {e}", path.display()),
    })?;
    overrides.apply(&mut s).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((s, map))
}

/// A scenario passes when every cart ends with the expected outcome, or
/// delivered and returned if it names none.
fn passes(s: &Scenario, report: &TraceReport) -> bool {
    let want = s.expect.as_deref().unwrap_or("delivered_and_returned");
    report.carts.iter().all(|c| c.outcome.key() == want)
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn cmd_run(path: &Path, trace: Option<PathBuf>, svg: Option<PathBuf>, overrides: &Overrides) -> Result<u8, String> {
    let (s, map) = load(path, overrides)?;
    let report = run_scenario(&map, &s.config).map_err(|e| e.to_string())?;
    if let Some(p) = trace {
        write_file(&p, &write_trace(&report))?;
    }
    if let Some(p) = svg {
        write_file(&p, &render_svg(&map, Some(&report)))?;
    }
    println!("scenario {} ({} ticks)", s.name, report.ticks_run);
    for (i, (c, cfg)) in report.carts.iter().zip(&s.config.carts).enumerate() {
        println!(
            "cart{} ward {} recognized={} outcome={}{}",
            i + 1,
            cfg.target,
            c.recognized.map_or("-".to_string(), |d| d.to_string()),
            c.outcome,
            c.completion_tick.map_or(String::new(), |t| format!(" done@{t}")),
        );
    }
    println!("max line deviation {:.4} m", report.max_line_deviation);
    if s.expect.is_none() {
        return Ok(0);
    }
    Ok(if passes(&s, &report) { 0 } else { EXIT_MISMATCH })
}

struct Row {
    name: String,
    tier: Option<Tier>,
    ward: String,
    recognized: String,
    delivered: String,
    pass: bool,
    note: String,
}

fn suite_row(path: &Path, overrides: &Overrides) -> Row {
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("?").to_string();
    let failed = |note: String| Row {
        name: name.clone(),
        tier: None,
        ward: "-".into(),
        recognized: "-".into(),
        delivered: "-".into(),
        pass: false,
        note,
    };
    let (s, map) = match load(path, overrides) {
        Ok(v) => v,
        Err(e) => return failed(e),
    };
    let report = match run_scenario(&map, &s.config) {
        Ok(r) => r,
        Err(e) => return failed(e.to_string()),
    };
    let join = |f: &dyn Fn(usize) -> String| (0..report.carts.len()).map(f).collect::<Vec<_>>().join("/");
    let yes_no = |b: bool| if b { "yes" } else { "no" }.to_string();
    Row {
        name: s.name.clone(),
        tier: classify_ward(s.config.carts[0].target).ok(),
        ward: join(&|i| s.config.carts[i].target.to_string()),
        recognized: join(&|i| yes_no(report.carts[i].recognized == Some(s.config.carts[i].target))),
        delivered: join(&|i| {
            yes_no(matches!(report.carts[i].outcome, Outcome::DeliveredAndReturned | Outcome::Delivered))
        }),
        pass: passes(&s, &report),
        note: join(&|i| report.carts[i].outcome.to_string()),
    }
}

fn cmd_suite(dir: &Path, overrides: &Overrides) -> Result<u8, String> {
    let entries = fs::read_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "scn"))
        .collect();
    files.sort();
    let mut rows: Vec<Row> = files.par_iter().map(|p| suite_row(p, overrides)).collect();
    rows.sort_by(|a, b| a.name.cmp(&b.name));

    let groups = [(Some(Tier::Near), "near"), (Some(Tier::Mid), "mid"), (Some(Tier::Far), "far"), (None, "unclassified")];
    println!("{:<16} {:>5} {:>10} {:>10}  {:<4}  outcome", "scenario", "ward", "recognized", "delivered", "pass");
    for (tier, label) in groups {
        let group: Vec<&Row> = rows.iter().filter(|r| r.tier == tier).collect();
        if group.is_empty() {
            continue;
        }
        println!("[{label}]");
        for r in group {
            println!(
                "{:<16} {:>5} {:>10} {:>10}  {:<4}  {}",
                r.name,
                r.ward,
                r.recognized,
                r.delivered,
                if r.pass { "ok" } else { "FAIL" },
                r.note
            );
        }
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    println!("{passed}/{} passed", rows.len());
    Ok(if passed == rows.len() { 0 } else { EXIT_MISMATCH })
}

fn cmd_corpus(
    output: &Path,
    seed: u64,
    noise: Option<f64>,
    k1: Option<f64>,
    digits: Option<Vec<u8>>,
) -> Result<u8, String> {
    let mut grid = CorpusGrid::default();
    if let Some(s) = noise {
        grid.sigma = vec![s];
    }
    if let Some(k) = k1 {
        grid.k1 = vec![k];
    }
    if let Some(d) = digits {
        grid.digits = d;
    }
    let view = CardView::default();
    let samples = generate_corpus(&grid, seed, &view, &TemplateSet::default(), &VisionParams::default())
        .map_err(|e| e.to_string())?;
    let mut text = String::from("label,predicted,score,k1,brightness,noise\n");
    for s in &samples {
        text.push_str(&s.to_string());
        text.push('\n');
    }
    let acc = accuracy(&samples);
    text.push_str(&format!("# accuracy={acc:.4}\n"));
    write_file(output, &text)?;
    let clean: Vec<_> = samples.iter().copied().filter(|s| s.noise == 0.0 && s.k1 == 0.0).collect();
    println!("samples {}", samples.len());
    println!("accuracy {acc:.4}");
    if !clean.is_empty() {
        println!("clean accuracy {:.4} ({} samples)", accuracy(&clean), clean.len());
    }
    Ok(0)
}

fn cmd_render_map(output: &Path, map: Option<&Path>) -> Result<u8, String> {
    let map = match map {
        None => default_map(),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            load_map(&text).map_err(|e| format!("{}: {e}", p.display()))?
        }
    };
    write_file(output, &render_svg(&map, None))?;
    Ok(0)
}
