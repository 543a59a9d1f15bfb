use std::fs;
use std::path::{Path, PathBuf};

use comix::attrib::{
    attribution_map, render_panel, segment_dominant, segmentation_legend, segmentation_to_rgb,
    MapSource,
};
use comix::bcos::{load_model, model_hash, save_model, train as train_net, TrainConfig};
use comix::cdf::{build_feature_bank, load_bank, load_cdf_table, save_bank, save_cdf_table, select_cdfs};
use comix::comix::{
    classify as classify_input, counterfactual_explain, explain as explain_record,
    record_document, ClassifyOptions, Neighborhood,
};
use comix::data::{
    encode_input, generate_synthetic, load_dataset_dir, read_pnm, save_dataset_dir, InputSpec,
};
use comix::evaluate::{EvalContext, EvalOptions, Metric};
use comix::{Bank, CdfTable, Dataset, Network, Real};
use rayon::prelude::*;

use crate::fail::{CliError, CliResult, Kind};
use crate::settings::{require, Settings};

const DEFAULT_M: usize = 8;
const DEFAULT_K: usize = 3;
const DEFAULT_BINS: usize = 16;
const DEFAULT_STEPS: usize = 100;
const DEFAULT_SCALE: usize = 8;
const DEFAULT_WIDTHS: &str = "256,64";

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, bytes)?;
    Ok(())
}

fn output_path(s: &Settings, key: &str, default_name: &str) -> CliResult<PathBuf> {
    match s.raw(key) {
        Some(p) => Ok(PathBuf::from(p)),
        None => Ok(s.path("out")?.join(default_name)),
    }
}

fn load_data(s: &Settings, key: &str) -> CliResult<Dataset> {
    let dir = s.existing(key)?;
    Ok(load_dataset_dir(&dir)?)
}

fn load_net(s: &Settings) -> CliResult<(Network, String)> {
    let net: Network = load_model(&s.existing("model")?)?;
    let hash = model_hash(&net);
    Ok((net, hash))
}

fn load_cdfs(s: &Settings, hash: &str) -> CliResult<CdfTable> {
    Ok(load_cdf_table(&s.existing("cdf")?, hash)?)
}

fn load_bank_file(s: &Settings, hash: &str) -> CliResult<Bank> {
    Ok(load_bank(&s.existing("bank")?, hash)?)
}

/// `DIR#N` selects sample `N` of a dataset directory; anything else is read
/// as a PGM/PPM file.
fn load_input(s: &Settings, spec: &InputSpec) -> CliResult<Vec<Real>> {
    let arg = s.raw("input").ok_or_else(|| CliError::flag("--input is required"))?;
    let image = match arg.rsplit_once('#') {
        Some((dir, index)) => {
            let n: usize = index
                .parse()
                .map_err(|_| CliError::flag(format!("invalid sample index in --input '{arg}'")))?;
            let dir = Path::new(dir);
            require(dir)?;
            let data: Dataset = load_dataset_dir(dir)?;
            if n >= data.len() {
                return Err(CliError::flag(format!(
                    "--input index {n} out of range for {} samples",
                    data.len()
                )));
            }
            if data.spec() != *spec {
                return Err(shape_error(&data.spec(), spec));
            }
            data.image(n).to_vec()
        }
        None => {
            let path = Path::new(arg);
            require(path)?;
            let (found, values) = read_pnm::<Real>(path)?;
            if found != *spec {
                return Err(shape_error(&found, spec));
            }
            values
        }
    };
    Ok(image)
}

fn shape_error(found: &InputSpec, expected: &InputSpec) -> CliError {
    CliError::new(
        Kind::InvalidInput,
        format!(
            "input is {}x{}x{}, model expects {}x{}x{}",
            found.height,
            found.width,
            found.raw_channels,
            expected.height,
            expected.width,
            expected.raw_channels
        ),
    )
}

fn classify_options(s: &Settings) -> CliResult<ClassifyOptions> {
    let mut opts = ClassifyOptions::new(s.parse_or("M", DEFAULT_M)?, s.parse_or("K", DEFAULT_K)?);
    if s.flag("joint-l2")? {
        opts.neighborhood = Neighborhood::JointCdf;
    }
    Ok(opts)
}

pub fn generate_data(s: &Settings) -> CliResult<()> {
    let cfg = s.synthetic_config()?;
    let out = s.path("out")?;
    let (train, test) = generate_synthetic::<Real>(&cfg)?;
    save_dataset_dir(&train, &out.join("train"))?;
    save_dataset_dir(&test, &out.join("test"))?;
    write(&out.join("synthetic.cfg"), cfg.to_text())?;
    println!(
        "generated {} train and {} test samples in {}",
        train.len(),
        test.len(),
        out.display()
    );
    Ok(())
}

fn train_config(s: &Settings) -> CliResult<TrainConfig> {
    let d = TrainConfig::default();
    let cfg = TrainConfig {
        learning_rate: s.parse_or("lr", d.learning_rate)?,
        batch_size: s.parse_or("batch", d.batch_size)?,
        max_epochs: s.parse_or("epochs", d.max_epochs)?,
        exponent: s.parse_or("B", d.exponent)?,
        dropout: s.parse_or("dropout", d.dropout)?,
        patience: s.parse_or("patience", d.patience)?,
        validation_fraction: s.parse_or("validation", d.validation_fraction)?,
        seed: s.parse_or("seed", d.seed)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn widths(s: &Settings) -> CliResult<Vec<usize>> {
    let text = s.raw("widths").unwrap_or(DEFAULT_WIDTHS);
    text.split(',')
        .map(|w| {
            w.trim()
                .parse::<usize>()
                .ok()
                .filter(|&w| w > 0)
                .ok_or_else(|| CliError::flag(format!("invalid value '{text}' for --widths")))
        })
        .collect()
}

pub fn train(s: &Settings) -> CliResult<()> {
    let data = load_data(s, "data")?;
    let cfg = train_config(s)?;
    let out = s.path("out")?;
    let net = Network::random(data.spec(), &widths(s)?, data.class_count(), cfg.exponent, cfg.seed)?;
    let (net, report) = train_net(net, &data, &cfg)?;
    fs::create_dir_all(&out)?;
    save_model(&net, &out.join("model.bin"))?;
    write(&out.join("loss.csv"), report.to_csv())?;
    println!(
        "trained {} epochs (best {}), model {}",
        report.history.len(),
        report.best_epoch,
        model_hash(&net)
    );
    Ok(())
}

pub fn build_bank(s: &Settings) -> CliResult<()> {
    let (net, _) = load_net(s)?;
    let data = load_data(s, "data")?;
    let m = s.parse_or("M", DEFAULT_M)?;
    let bins = s.parse_or("bins", DEFAULT_BINS)?;
    let bank = build_feature_bank(&net, &data)?;
    let cdfs = select_cdfs(&bank, m, bins)?;
    let bank_path = output_path(s, "bank", "bank.bin")?;
    let cdf_path = output_path(s, "cdf", "cdf.txt")?;
    for p in [&bank_path, &cdf_path] {
        if let Some(parent) = p.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
    }
    save_bank(&bank, &bank_path)?;
    save_cdf_table(&cdfs, &cdf_path)?;
    println!(
        "bank of {} rows x {} features, {} CDFs per class",
        bank.len(),
        bank.dim(),
        m
    );
    Ok(())
}

pub fn classify(s: &Settings) -> CliResult<()> {
    let (net, hash) = load_net(s)?;
    let bank = load_bank_file(s, &hash)?;
    let cdfs = load_cdfs(s, &hash)?;
    let image = load_input(s, &net.input_spec())?;
    let x = encode_input(&image, &net.input_spec())?;
    let record = classify_input(&net, &bank, &cdfs, &x, &classify_options(s)?)?;
    let doc = record_document(&record, None);
    match s.raw("out") {
        Some(p) => write(Path::new(p), doc)?,
        None => print!("{doc}"),
    }
    Ok(())
}

pub fn explain(s: &Settings) -> CliResult<()> {
    let (net, hash) = load_net(s)?;
    let bank = load_bank_file(s, &hash)?;
    let cdfs = load_cdfs(s, &hash)?;
    let reference = load_data(s, "data")?;
    let out = s.path("out")?;
    let scale = s.parse_or("scale", DEFAULT_SCALE)?;
    let spec = net.input_spec();
    let image = load_input(s, &spec)?;
    let x = encode_input(&image, &spec)?;
    let opts = classify_options(s)?;
    let record = classify_input(&net, &bank, &cdfs, &x, &opts)?;
    let panel = match s.parse::<usize>("counterfactual")? {
        Some(target) => counterfactual_explain(&net, &bank, &reference, &cdfs, &x, target, &opts)?,
        None => explain_record(&net, &reference, &record, &x)?,
    };
    let files = render_panel(&panel, &image, &reference, &out, scale)?;
    write(&out.join("record.json"), record_document(&record, Some(&panel)))?;
    println!(
        "predicted class {}, panel for class {} with {} entries, {} files in {}",
        record.aggregated_label,
        panel.target_class,
        panel.entries.len(),
        files.len() + 1,
        out.display()
    );
    Ok(())
}

pub fn segment(s: &Settings) -> CliResult<()> {
    let (net, hash) = load_net(s)?;
    let cdfs = load_cdfs(s, &hash)?;
    let out = s.path("out")?;
    let scale = s.parse_or("scale", DEFAULT_SCALE)?;
    let spec = net.input_spec();
    let image = load_input(s, &spec)?;
    let x = encode_input(&image, &spec)?;
    let class = net.predict(&x)?;
    let features = cdfs.features(class, s.parse_or("M", DEFAULT_M)?)?;
    let collapsed = net.collapse(&x)?;
    let maps = features
        .iter()
        .map(|&f| attribution_map(collapsed.attribution_row(f), &x, &spec, f, MapSource::Test))
        .collect::<comix::Result<Vec<_>>>()?;
    let seg = segment_dominant(&maps)?;
    write(&out, segmentation_to_rgb(&seg).upscale(scale).to_ppm())?;
    write(&out.with_extension("legend.tsv"), segmentation_legend(&seg))?;
    println!(
        "class {class}: {} segments from {} CDFs",
        seg.segment_count(),
        features.len()
    );
    Ok(())
}

pub fn eval(s: &Settings) -> CliResult<()> {
    let (net, hash) = load_net(s)?;
    let bank = load_bank_file(s, &hash)?;
    let cdfs = load_cdfs(s, &hash)?;
    let test = load_data(s, "data")?;
    let reference = match s.raw("reference") {
        Some(_) => load_data(s, "reference")?,
        None => test.clone(),
    };
    let out = s.path("out")?;
    let mut opts = EvalOptions::new(s.parse_or("M", DEFAULT_M)?, s.parse_or("K", DEFAULT_K)?);
    opts.classify = classify_options(s)?;
    opts.steps = s.parse_or("steps", DEFAULT_STEPS)?;
    opts.fraction = s.parse_or("fraction", opts.fraction)?;
    if let Some(list) = s.raw("metrics") {
        opts.metrics = Metric::parse_set(list)?;
    }
    let ctx = EvalContext::new(&net, &bank, &cdfs, &test, &reference, opts)?;
    let samples = (0..test.len())
        .into_par_iter()
        .map(|i| ctx.evaluate_sample(i))
        .collect::<comix::Result<Vec<_>>>()?;
    let output = ctx.summarize(&samples)?;
    fs::create_dir_all(&out)?;
    write(&out.join("report.tsv"), output.report.to_text())?;
    if let Some(c) = &output.insertion {
        write(&out.join("c_insertion.csv"), c.to_csv())?;
    }
    if let Some(c) = &output.deletion {
        write(&out.join("c_deletion.csv"), c.to_csv())?;
    }
    print!("{}", output.report.to_text());
    Ok(())
}
