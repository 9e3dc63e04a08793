//! `sada`: train, evaluate, test and plot selective-augmentation agents.

mod manifest;
mod plot;
mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};
use sada_core::augment::{apply_draw, AugDraw};
use sada_core::checkpoint::Archive;
use sada_core::evalmetrics::{action_variance, collect_observations, evaluate_suite, export_embeddings};
use sada_core::rng::mix;
use sada_core::stats::{holm_bonferroni, welch_one_tailed_at, SampleSet};
use sada_core::trainer::load_agent_checkpoint;
use sada_core::{
    AugKind, AugPool, AugmentationSpec, DistractorBank, DistributionSpec, Error, EvalReport, Result, TrainConfig,
    Trainer, VarianceReport,
};
use serde::{Deserialize, Serialize};

use manifest::{Completion, RunManifest, COMPLETION, CONFIG};

const RUN_DIR_ENV: &str = "SADA_RUN_DIR";

fn flag(key: &str) -> String {
    key.replace('_', "-")
}

fn config_args(cmd: Command) -> Command {
    let cmd = cmd.arg(
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .value_parser(value_parser!(PathBuf))
            .help("key = value file; flags override it"),
    );
    TrainConfig::KEYS.iter().fold(cmd, |c, k| {
        c.arg(
            Arg::new(*k)
                .long(flag(k))
                .value_name("VALUE")
                .help_heading("Run settings"),
        )
    })
}

fn overrides(m: &ArgMatches) -> Vec<(&'static str, String)> {
    TrainConfig::KEYS
        .iter()
        .filter_map(|k| m.get_one::<String>(k).map(|v| (*k, v.clone())))
        .collect()
}

/// Defaults, then the config file, then flags.
fn build_config(m: &ArgMatches) -> Result<TrainConfig> {
    let base = match m.get_one::<PathBuf>("config") {
        Some(p) => TrainConfig::load(p).map_err(|e| match e {
            Error::Io(io) => Error::validation(p.display().to_string(), io.to_string()),
            other => other,
        })?,
        None => TrainConfig::default(),
    };
    base.with_overrides(overrides(m))
}

fn path_arg(name: &'static str, value: &'static str) -> Arg {
    Arg::new(name).long(name).value_name(value).value_parser(value_parser!(PathBuf))
}

fn cli() -> Command {
    Command::new("sada")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Selective data augmentation for pixel-based actor-critic agents")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(
            config_args(Command::new("train").about("Train one agent"))
                .arg(path_arg("out", "DIR").help("Run directory (default $SADA_RUN_DIR/<recipe>_<augs>_seed<seed>)"))
                .arg(path_arg("distractors-dir", "DIR").help("PNG/JPEG overlay images instead of procedural ones"))
                .arg(path_arg("resume", "CKPT").help("Continue from a checkpoint that holds the replay buffer"))
                .arg(Arg::new("quiet").long("quiet").action(ArgAction::SetTrue)),
        )
        .subcommand(
            Command::new("eval")
                .about("Zero-shot evaluation of a checkpoint")
                .arg(path_arg("checkpoint", "CKPT").required(true))
                .arg(
                    Arg::new("distributions")
                        .long("distributions")
                        .value_name("all|NAME,...")
                        .default_value("all"),
                )
                .arg(Arg::new("episodes").long("episodes").value_parser(value_parser!(usize)))
                .arg(Arg::new("seed").long("seed").value_parser(value_parser!(u64)).default_value("1000"))
                .arg(path_arg("out", "FILE").help("Report path (default <run>/reports/eval_step<step>.json)"))
                .arg(Arg::new("variance").long("variance").action(ArgAction::SetTrue).help("Add actor-prediction variance per augmentation"))
                .arg(Arg::new("draws").long("draws").value_parser(value_parser!(usize)).default_value("8"))
                .arg(Arg::new("observations").long("observations").value_parser(value_parser!(usize)).default_value("100"))
                .arg(path_arg("distractors-dir", "DIR"))
                .arg(path_arg("embeddings", "FILE").help("Also write encoder features as CSV"))
                .arg(Arg::new("samples").long("samples").value_parser(value_parser!(usize)).default_value("50")),
        )
        .subcommand(
            Command::new("stats")
                .about("One-tailed Welch tests per distribution with Holm correction")
                .arg(path_arg("treatment", "REPORT").num_args(1..).required(true))
                .arg(path_arg("baseline", "REPORT").num_args(1..).required(true))
                .arg(Arg::new("alpha").long("alpha").value_parser(value_parser!(f64)).default_value("0.05"))
                .arg(path_arg("out", "FILE")),
        )
        .subcommand(
            config_args(Command::new("render-augs").about("PNG of an observation under every augmentation"))
                .arg(path_arg("out", "DIR").required(true))
                .arg(path_arg("distractors-dir", "DIR"))
                .arg(Arg::new("scale").long("scale").value_parser(value_parser!(u32)).default_value("3")),
        )
        .subcommand(
            config_args(Command::new("render-testsets").about("PNG of one observation per distribution"))
                .arg(path_arg("out", "DIR").required(true))
                .arg(Arg::new("scale").long("scale").value_parser(value_parser!(u32)).default_value("3")),
        )
        .subcommand(
            Command::new("plot")
                .about("Training curves and zero-shot bar charts")
                .arg(path_arg("runs", "DIR").num_args(1..).required(true))
                .arg(path_arg("out", "DIR").required(true)),
        )
        .subcommand(
            Command::new("oracle")
                .about("Check fast paths against reference implementations")
                .arg(Arg::new("filter").long("filter").default_value("")),
        )
}

fn run_root() -> PathBuf {
    std::env::var_os(RUN_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"))
}

fn bank_for(cfg: &TrainConfig, dir: Option<&PathBuf>) -> Result<DistractorBank> {
    match dir {
        Some(d) => render::load_distractors(d, cfg.image_size),
        None => Ok(DistractorBank::procedural(cfg.distractors, cfg.image_size, cfg.image_size, mix(cfg.seed, 77))),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(p) = path.parent() {
        std::fs::create_dir_all(p)?;
    }
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn train(m: &ArgMatches) -> Result<()> {
    let quiet = m.get_flag("quiet");
    let (mut trainer, dir) = if let Some(ckpt) = m.get_one::<PathBuf>("resume") {
        if m.contains_id("config") {
            return Err(Error::validation("config", "cannot be combined with --resume; pass single flags instead"));
        }
        let archive = Archive::load(ckpt)?;
        let t = Trainer::resume(&archive, overrides(m))?;
        let dir = match m.get_one::<PathBuf>("out") {
            Some(d) => d.clone(),
            None => run_dir_of(ckpt),
        };
        if !dir.join(manifest::MANIFEST).exists() {
            RunManifest::new(&t.cfg, Some(ckpt.display().to_string())).write_new(&dir)?;
        }
        let mut log = std::fs::read_to_string(dir.join("resumes.log")).unwrap_or_default();
        log.push_str(&format!("{} step={} from={}\n", manifest::unix_now(), t.step(), ckpt.display()));
        std::fs::write(dir.join("resumes.log"), log)?;
        (t, dir)
    } else {
        let cfg = build_config(m)?;
        let dir = match m.get_one::<PathBuf>("out") {
            Some(d) => d.clone(),
            None => run_root().join(format!("{}_{}_seed{}", cfg.recipe, cfg.augs.name(), cfg.seed)),
        };
        let bank = m
            .get_one::<PathBuf>("distractors-dir")
            .map(|d| render::load_distractors(d, cfg.image_size))
            .transpose()?;
        let t = Trainer::new(cfg, bank)?;
        RunManifest::new(&t.cfg, None).write_new(&dir)?;
        std::fs::write(dir.join(CONFIG), t.cfg.serialize())?;
        (t, dir)
    };
    trainer = trainer.with_output(&dir)?;
    if !quiet {
        eprintln!(
            "training {} ({} augs, seed {}) for {} steps into {}",
            trainer.cfg.recipe,
            trainer.cfg.augs.name(),
            trainer.cfg.seed,
            trainer.cfg.total_steps,
            dir.display()
        );
    }
    let summary = trainer.run_with(|r| {
        if !quiet {
            eprintln!(
                "step {:>7} episode {:>5} reward {:>9.3} alpha {:.4}",
                r.step, r.episode, r.episode_reward, r.alpha
            );
        }
    })?;
    write_json(
        &dir.join(COMPLETION),
        &Completion {
            ended_unix: manifest::unix_now(),
            steps: summary.steps,
            episodes: summary.episodes,
            updates: summary.updates,
        },
    )?;
    println!("{}", dir.display());
    Ok(())
}

/// `<run>/checkpoints/x.safetensors` -> `<run>`.
fn run_dir_of(ckpt: &Path) -> PathBuf {
    let parent = ckpt.parent().unwrap_or(Path::new("."));
    if parent.file_name().is_some_and(|n| n == "checkpoints") {
        parent.parent().unwrap_or(Path::new(".")).to_path_buf()
    } else {
        parent.to_path_buf()
    }
}

fn parse_distributions(s: &str) -> Result<Vec<DistributionSpec>> {
    match s {
        "all" => Ok(DistributionSpec::all()),
        "tests" => Ok(DistributionSpec::tests()),
        list => list
            .split(',')
            .map(|n| n.trim().parse::<DistributionSpec>().map_err(|e| Error::validation("distributions", e.to_string())))
            .collect(),
    }
}

#[derive(Serialize, Deserialize)]
struct FullReport {
    step: u64,
    #[serde(flatten)]
    report: EvalReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    variance: Option<VarianceReport>,
}

fn eval(m: &ArgMatches) -> Result<()> {
    let ckpt = m.get_one::<PathBuf>("checkpoint").expect("required");
    let (agent, cfg, step) = load_agent_checkpoint(ckpt)?;
    let cfg = cfg.ok_or_else(|| Error::validation("checkpoint", "holds no run configuration"))?;
    let specs = parse_distributions(m.get_one::<String>("distributions").expect("default"))?;
    let episodes = m.get_one::<usize>("episodes").copied().unwrap_or(cfg.eval_episodes);
    let seed = *m.get_one::<u64>("seed").expect("default");
    let env_cfg = cfg.env_config();
    let report = evaluate_suite(&agent, &env_cfg, &specs, episodes, seed, &ckpt.display().to_string())?;
    let variance = if m.get_flag("variance") {
        let bank = bank_for(&cfg, m.get_one::<PathBuf>("distractors-dir"))?;
        let n = *m.get_one::<usize>("observations").expect("default");
        let obs = collect_observations(&env_cfg, DistributionSpec::train(), n, seed)?;
        let families = AugPool::All.specs(cfg.aug_params());
        Some(action_variance(&agent, &obs, &families, &bank, seed, *m.get_one::<usize>("draws").expect("default"))?)
    } else {
        None
    };
    if let Some(path) = m.get_one::<PathBuf>("embeddings") {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        let samples = *m.get_one::<usize>("samples").expect("default");
        export_embeddings(&agent, &env_cfg, &specs, samples, seed, &mut f)?;
    }
    for d in &report.distributions {
        println!(
            "{:<22} mean {:>9.3} std {:>8.3} success {:.2}",
            d.distribution,
            d.mean_reward,
            d.std_reward,
            d.success_rate.unwrap_or(0.0)
        );
    }
    if let Some(v) = &variance {
        for e in &v.entries {
            println!("variance {:<14} {:.6}", e.family, e.variance);
        }
    }
    let out = match m.get_one::<PathBuf>("out") {
        Some(p) => p.clone(),
        None => run_dir_of(ckpt).join("reports").join(format!("eval_step{step:08}.json")),
    };
    write_json(&out, &FullReport { step, report, variance })?;
    println!("{}", out.display());
    Ok(())
}

fn read_report(path: &Path) -> Result<EvalReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::validation(path.display().to_string(), e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| Error::validation(path.display().to_string(), format!("corrupt report: {e}")))
}

#[derive(Serialize)]
struct StatRow {
    distribution: String,
    treatment_mean: f64,
    baseline_mean: f64,
    t: f64,
    dof: f64,
    p: f64,
    adjusted_alpha: f64,
    reject: bool,
}

fn stats_cmd(m: &ArgMatches) -> Result<()> {
    let load = |id: &str| -> Result<Vec<EvalReport>> {
        m.get_many::<PathBuf>(id).expect("required").map(|p| read_report(p)).collect()
    };
    let (treat, base) = (load("treatment")?, load("baseline")?);
    let alpha = *m.get_one::<f64>("alpha").expect("default");
    let names: Vec<String> = treat[0]
        .distributions
        .iter()
        .map(|d| d.distribution.clone())
        .filter(|n| treat.iter().chain(&base).all(|r| r.get(n).is_some()))
        .collect();
    if names.is_empty() {
        return Err(Error::validation("treatment", "no distribution is present in every report"));
    }
    let samples = |rs: &[EvalReport], label: &str, n: &str| {
        SampleSet::new(format!("{label}:{n}"), rs.iter().map(|r| r.get(n).expect("filtered").mean_reward).collect())
    };
    let mut tests = Vec::with_capacity(names.len());
    for n in &names {
        let (a, b) = (samples(&treat, "treatment", n)?, samples(&base, "baseline", n)?);
        tests.push((a.mean(), b.mean(), welch_one_tailed_at(&a, &b, alpha)?));
    }
    let p: Vec<f64> = tests.iter().map(|t| t.2.p).collect();
    let holm = holm_bonferroni(&p, alpha)?;
    let rows: Vec<StatRow> = names
        .into_iter()
        .zip(tests)
        .zip(holm)
        .map(|((distribution, (tm, bm, t)), h)| StatRow {
            distribution,
            treatment_mean: tm,
            baseline_mean: bm,
            t: t.t,
            dof: t.dof,
            p: t.p,
            adjusted_alpha: h.adjusted_alpha,
            reject: h.reject,
        })
        .collect();
    println!("{:<22} {:>10} {:>10} {:>8} {:>7} {:>9} {:>9}  reject", "distribution", "treatment", "baseline", "t", "dof", "p", "alpha");
    for r in &rows {
        println!(
            "{:<22} {:>10.3} {:>10.3} {:>8.3} {:>7.2} {:>9.4} {:>9.4}  {}",
            r.distribution, r.treatment_mean, r.baseline_mean, r.t, r.dof, r.p, r.adjusted_alpha, r.reject
        );
    }
    if let Some(out) = m.get_one::<PathBuf>("out") {
        write_json(out, &rows)?;
    }
    Ok(())
}

fn render_augs(m: &ArgMatches) -> Result<()> {
    let cfg = build_config(m)?;
    let out = m.get_one::<PathBuf>("out").expect("required");
    let scale = *m.get_one::<u32>("scale").expect("default");
    let bank = bank_for(&cfg, m.get_one::<PathBuf>("distractors-dir"))?;
    let obs = collect_observations(&cfg.env_config(), DistributionSpec::train(), 1, cfg.seed)?.remove(0);
    let params = cfg.aug_params();
    let mut tiles = vec![render::upscale(&render::newest_frame(&obs), scale)];
    render::save_png(&tiles[0], &out.join("original.png"))?;
    let kinds = std::iter::once(AugKind::WeakShift).chain(AugKind::STRONG);
    for (i, kind) in kinds.enumerate() {
        let spec = AugmentationSpec { kind, params };
        let draw = AugDraw::from_seed(spec, mix(cfg.seed, i as u64 + 1), bank.len())?;
        let img = render::upscale(&render::newest_frame(&apply_draw(&obs, &draw, &bank)?), scale);
        render::save_png(&img, &out.join(format!("{}.png", kind.name())))?;
        tiles.push(img);
    }
    render::save_png(&render::strip(&tiles), &out.join("all.png"))?;
    println!("{}", out.display());
    Ok(())
}

fn render_testsets(m: &ArgMatches) -> Result<()> {
    let cfg = build_config(m)?;
    let out = m.get_one::<PathBuf>("out").expect("required");
    let scale = *m.get_one::<u32>("scale").expect("default");
    let mut tiles = Vec::new();
    for spec in DistributionSpec::all() {
        let obs = collect_observations(&cfg.env_config(), spec, 1, cfg.seed)?.remove(0);
        let img = render::upscale(&render::newest_frame(&obs), scale);
        render::save_png(&img, &out.join(format!("{}.png", spec.name())))?;
        tiles.push(img);
    }
    render::save_png(&render::strip(&tiles), &out.join("all.png"))?;
    println!("{}", out.display());
    Ok(())
}

fn plot_cmd(m: &ArgMatches) -> Result<()> {
    let runs: Vec<PathBuf> = m.get_many::<PathBuf>("runs").expect("required").cloned().collect();
    for p in plot::plot_runs(&runs, m.get_one::<PathBuf>("out").expect("required"))? {
        println!("{}", p.display());
    }
    Ok(())
}

fn oracle(m: &ArgMatches) -> Result<bool> {
    let report = sada_core::oracles::run_oracle_suite(m.get_one::<String>("filter").expect("default"));
    println!("{report}");
    Ok(report.passed())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation { .. } | Error::InvalidSpec(_) | Error::Range(_) => 2,
        Error::NonFinite { .. } => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let m = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match m.subcommand() {
        Some(("train", s)) => train(s).map(|_| true),
        Some(("eval", s)) => eval(s).map(|_| true),
        Some(("stats", s)) => stats_cmd(s).map(|_| true),
        Some(("render-augs", s)) => render_augs(s).map(|_| true),
        Some(("render-testsets", s)) => render_testsets(s).map(|_| true),
        Some(("plot", s)) => plot_cmd(s).map(|_| true),
        Some(("oracle", s)) => oracle(s),
        _ => unreachable!("subcommand required"),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
