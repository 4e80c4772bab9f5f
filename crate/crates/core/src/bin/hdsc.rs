//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 data error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hdsc::detection::Connectivity;
use hdsc::pipeline::{self, Method, RunConfig};
use hdsc::segmentation::{DecisionMode, TransferVariant};
use hdsc::Error;

#[derive(Parser)]
#[command(name = "hdsc", version, about = "Illumination-invariant red/blue road sign segmentation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and baseline parameters from annotated pixels
    Train(Common),
    /// Segment one image; writes <stem>_mask.ppm and <stem>_overlay.ppm
    Segment {
        #[command(flatten)]
        common: Common,
        image: PathBuf,
    },
    /// Detect candidates in images; writes detections.csv
    Detect {
        #[command(flatten)]
        common: Common,
        #[arg(required = true, value_name = "IMAGE")]
        files: Vec<PathBuf>,
    },
    /// Evaluate against ground truth; writes report.txt and report.jsonl
    Eval(Common),
    /// Generate a seeded synthetic dataset
    Synth(Common),
    /// Evaluate all methods and sweep the hybrid-distance threshold
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// Key-value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// hdsc, hsv, red_enhance or log_chromatic
    #[arg(long)]
    method: Option<String>,
    /// Decision rule: literal or calibrated
    #[arg(long)]
    mode: Option<String>,
    /// Transfer function: literal or normalized
    #[arg(long)]
    variant: Option<String>,
    /// Minimum IoU for a true positive
    #[arg(long)]
    iou: Option<f64>,
    /// Worker threads, 0 = all cores
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    images: Option<PathBuf>,
    #[arg(long)]
    gt: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    baselines: Option<PathBuf>,
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Extra report rows: method;dataset;precision;recall
    #[arg(long)]
    external: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<String>,
    /// 4 or 8
    #[arg(long)]
    connectivity: Option<String>,
    #[arg(long)]
    epsilon_div: Option<f64>,
    /// Comma-separated threshold factors for a PR sweep
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long)]
    all_methods: bool,
}

fn usage(e: Error) -> Error {
    Error::Usage(e.to_string())
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p).map_err(|e| match e {
                Error::Usage(_) => e,
                other => usage(other),
            })?,
            None => RunConfig::default(),
        };
        if let Some(m) = &self.method {
            c.method = m.parse::<Method>()?;
        }
        if let Some(m) = &self.mode {
            c.decision_mode = Some(m.parse::<DecisionMode>().map_err(usage)?);
        }
        if let Some(v) = &self.variant {
            c.transfer_variant = Some(v.parse::<TransferVariant>().map_err(usage)?);
        }
        if let Some(v) = &self.connectivity {
            c.connectivity = v.parse::<Connectivity>().map_err(usage)?;
        }
        if let Some(s) = &self.sweep {
            c.sweep = s
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Usage(format!("invalid sweep value {v:?}"))))
                .collect::<Result<_, _>>()?;
        }
        let set = |dst: &mut Option<PathBuf>, src: &Option<PathBuf>| {
            if src.is_some() {
                dst.clone_from(src);
            }
        };
        set(&mut c.images_dir, &self.images);
        set(&mut c.ground_truth, &self.gt);
        set(&mut c.model, &self.model);
        set(&mut c.baselines, &self.baselines);
        set(&mut c.annotations, &self.annotations);
        set(&mut c.external_results, &self.external);
        if let Some(v) = self.iou {
            c.iou_min = v;
        }
        if let Some(v) = self.threads {
            c.threads = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = &self.out {
            c.out_dir.clone_from(v);
        }
        if let Some(v) = &self.dataset {
            c.dataset = Some(v.clone());
        }
        if self.epsilon_div.is_some() {
            c.epsilon_div = self.epsilon_div;
        }
        c.all_methods |= self.all_methods;
        c.validate()?;
        Ok(c)
    }
}

fn run(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Train(common) => {
            let out = pipeline::cmd_train(&common.resolve()?)?;
            print!("{}", out.model.to_kv().to_text());
            eprintln!("wrote {} and {}", out.model_path.display(), out.baselines_path.display());
        }
        Command::Segment { common, image } => {
            let out = pipeline::cmd_segment(&common.resolve()?, &image)?;
            for c in &out.candidates {
                let b = c.bbox;
                println!("{};{};{};{};{}", c.class.label().name(), b.left, b.top, b.right, b.bottom);
            }
            eprintln!("wrote {} and {}", out.mask_path.display(), out.overlay_path.display());
        }
        Command::Detect { common, files } => {
            let recs = pipeline::cmd_detect(&common.resolve()?, &files)?;
            print!("{}", hdsc::evaluation::format_ground_truth(&recs));
        }
        Command::Eval(common) => report(pipeline::cmd_eval(&common.resolve()?)?),
        Command::Compare(common) => report(pipeline::cmd_compare(&common.resolve()?)?),
        Command::Synth(common) => {
            let cfg = common.resolve()?;
            let ds = pipeline::cmd_synth(&cfg)?;
            eprintln!(
                "wrote {} images and {} boxes to {}",
                ds.images.len(),
                ds.ground_truth.len(),
                cfg.out_dir.display()
            );
        }
    }
    Ok(())
}

fn report(out: pipeline::EvalOutcome) {
    print!("{}", out.report.to_text());
    if let Some(c) = &out.pr_curve {
        print!("{}", c.to_text());
    }
    for f in &out.failures {
        eprintln!("failed {}: {}", f.image_id, f.message);
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::Usage(_)) { 1 } else { 2 })
        }
    }
}
