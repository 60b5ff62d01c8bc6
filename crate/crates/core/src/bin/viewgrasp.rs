use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use viewgrasp::geometry::ShapeClass;
use viewgrasp::harness::{
    build_corpus, build_map, emit_report, emit_sequence_report, footer_line, render_view, run_offline_eval,
    run_sequence_orders, ClassMaps, ExperimentConfig, HarnessError, ObjectScene, SequenceOrder,
};
use viewgrasp::seeds::derive_seed;
use viewgrasp::selection::StrategyKind;
use viewgrasp::simcam::ViewpointSpec;
use viewgrasp::viewmap::{load_map, save_map, ViewMapGrid};

/// Seed-path tag for one-off renders from the command line.
const RENDER_TAG: u64 = 4;

#[derive(Parser, Debug)]
#[command(name = "viewgrasp", version, about = "Viewpoint selection for grasp detection, in simulation")]
struct Cli {
    /// Experiment config (TOML). Defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides master_seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads. Outputs do not depend on this.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the corpus meshes as OBJ files plus an index CSV.
    BuildCorpus,
    /// Build viewpoint maps and save them.
    BuildMap(BuildMapArgs),
    /// Compare viewpoint strategies offline.
    EvalOffline(EvalOfflineArgs),
    /// Simulate multi-view grasp sequences.
    EvalSequence(EvalSequenceArgs),
    /// Render one corpus object to a PLY cloud.
    Render(RenderArgs),
    /// Export a saved map as CSV.
    ExportMap(ExportMapArgs),
}

#[derive(Args, Debug)]
struct BuildMapArgs {
    /// Only build the map for this class (box or cylinder). By default the
    /// box map is built, plus the cylinder map when per_class_maps is set.
    #[arg(long)]
    class: Option<ShapeClass>,
}

#[derive(Args, Debug)]
struct MapArgs {
    /// Saved box map; built from the config when absent.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Saved cylinder map, used for cylinder-like objects.
    #[arg(long)]
    cylinder_map: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalOfflineArgs {
    #[command(flatten)]
    maps: MapArgs,
    /// Comma-separated strategies; defaults to the config's list.
    #[arg(long, value_delimiter = ',')]
    strategies: Option<Vec<StrategyKind>>,
}

#[derive(Args, Debug)]
struct EvalSequenceArgs {
    #[command(flatten)]
    maps: MapArgs,
    /// Comma-separated viewing orders; defaults to all four.
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<SequenceOrder>>,
    /// Overrides sequence.trials.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args, Debug)]
struct RenderArgs {
    /// Corpus object id.
    #[arg(long, default_value_t = 0)]
    object: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    azimuth: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    elevation: f64,
    /// Camera distance; defaults to view_sphere.radius.
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(Args, Debug)]
struct ExportMapArgs {
    #[arg(long)]
    map: PathBuf,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_toml(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn mkdir(path: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(path).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn load_maps(config: &ExperimentConfig, args: &MapArgs) -> Result<ClassMaps, Failure> {
    let load = |p: &PathBuf| load_map(p).map_err(|e| runtime(format!("{}: {e}", p.display())));
    match &args.map {
        Some(p) => Ok(ClassMaps {
            box_like: load(p)?,
            cylinder_like: args.cylinder_map.as_ref().map(load).transpose()?,
        }),
        None => {
            info!("building maps from the config");
            let mut maps = ClassMaps::build(config)?;
            if let Some(p) = &args.cylinder_map {
                maps.cylinder_like = Some(load(p)?);
            }
            Ok(maps)
        }
    }
}

fn save_class_map(map: &ViewMapGrid, class: ShapeClass, out: &Path, footer: &str) -> Result<(), Failure> {
    let bin = out.join(format!("map_{}.gvmap", class.as_str()));
    save_map(map, &bin).map_err(runtime)?;
    write(&out.join(format!("map_{}.csv", class.as_str())), &(map.to_csv() + footer))?;
    info!("wrote {}", bin.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let config = load_config(cli)?;
    let hash = config.hash();
    let footer = footer_line(&hash, config.master_seed);
    mkdir(&cli.out)?;
    info!("config sha256 {hash}");

    match &cli.command {
        Command::BuildCorpus => {
            let corpus = build_corpus(&config.corpus)?;
            let dir = cli.out.join("corpus");
            mkdir(&dir)?;
            let mut index = String::from("id,shape_class,file,size_x,size_y,size_z,triangles\n");
            for obj in &corpus {
                let name = format!("object_{:03}_{}.obj", obj.id, obj.shape_class().as_str());
                write(&dir.join(&name), &(obj.mesh.to_obj() + &footer))?;
                let (lo, hi) = obj.mesh.bounds();
                let d = hi - lo;
                let _ = writeln!(
                    index,
                    "{},{},{name},{:?},{:?},{:?},{}",
                    obj.id,
                    obj.shape_class().as_str(),
                    d.x,
                    d.y,
                    d.z,
                    obj.mesh.triangles().len()
                );
            }
            index.push_str(&footer);
            write(&cli.out.join("corpus.csv"), &index)?;
            println!("{} objects", corpus.len());
        }
        Command::BuildMap(args) => {
            let classes: Vec<ShapeClass> = match args.class {
                Some(c) => vec![c],
                None if config.per_class_maps => ShapeClass::ALL.to_vec(),
                None => vec![ShapeClass::BoxLike],
            };
            for class in classes {
                let map = build_map(&config, class)?;
                save_class_map(&map, class, &cli.out, &footer)?;
                println!("{}: {} samples", class.as_str(), map.sample_count);
            }
        }
        Command::EvalOffline(args) => {
            let maps = load_maps(&config, &args.maps)?;
            let strategies = args.strategies.clone().unwrap_or_else(|| config.offline.strategies.clone());
            let report = run_offline_eval(&config, &maps, &strategies)?;
            emit_report(&report, Some(&maps.box_like), &cli.out, &hash, config.master_seed)?;
            for r in &report.rows {
                println!(
                    "{:<8} {:<13} positives {:>6}  tp {:>6}  accuracy {}",
                    r.strategy.as_str(),
                    r.shape_class.as_str(),
                    r.positives,
                    r.true_positives,
                    r.accuracy.map_or("-".to_string(), |a| format!("{a:.3}"))
                );
            }
        }
        Command::EvalSequence(args) => {
            let maps = load_maps(&config, &args.maps)?;
            let orders = args.orders.clone().unwrap_or_else(|| SequenceOrder::ALL.to_vec());
            let trials = args.trials.unwrap_or(config.sequence.trials);
            let results = run_sequence_orders(&config, &maps, &orders, trials)?;
            emit_sequence_report(&results, &cli.out, &hash, config.master_seed)?;
            for r in &results {
                println!("{:<9} {}/{} = {:.3}", r.order.as_str(), r.successes, r.trials, r.success_rate());
            }
        }
        Command::Render(args) => {
            let corpus = build_corpus(&config.corpus)?;
            let obj = corpus
                .get(args.object)
                .ok_or_else(|| Failure::Config(format!("object {} not in a corpus of {}", args.object, corpus.len())))?;
            let scene = ObjectScene::at_origin(obj);
            let radius = args.radius.unwrap_or(config.view_sphere.radius);
            let view = ViewpointSpec::new(args.azimuth, args.elevation, radius, scene.center());
            view.validate(Some(&config.camera)).map_err(|e| Failure::Config(e.to_string()))?;
            let seed = derive_seed(config.master_seed, &[RENDER_TAG, args.object as u64]);
            let cloud = render_view(&scene, &config, &view, seed)?;
            let path = cli.out.join(format!("render_object_{:03}.ply", args.object));
            let comments = [footer.trim_start_matches("# ").trim_end().to_string()];
            cloud.save_ply(&path, &comments).map_err(runtime)?;
            println!("{} points -> {}", cloud.len(), path.display());
        }
        Command::ExportMap(args) => {
            let map = load_map(&args.map).map_err(|e| runtime(format!("{}: {e}", args.map.display())))?;
            write(&cli.out.join("map_export.csv"), &(map.to_csv() + &footer))?;
            let n = map.dims();
            println!("{n}x{n} grid, {} samples", map.sample_count);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .format_timestamp(None)
        .init();
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
