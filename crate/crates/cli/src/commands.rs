use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use assim_core::analysis::{
    correlate_regions, load_region_csv, parse_size_spec, subset_stability_with,
    write_stability_csv, StabilityConfig, DEFAULT_STABILITY_FLOOR,
};
use assim_core::ingestion::{
    load_audience_csv, write_audience_csv, AudienceProvider, ProviderConfig, UreqTransport,
};
use assim_core::synth::{generate_triple, write_synth, SynthConfig};
use assim_core::{
    score_triple_with, AudienceTable, Error, InterestId, PopulationSpec, Result, ScoreOptions,
};

use crate::config::{
    self, FetchFile, Populations, RobustnessFile, ScoreFile, SynthFile, ValidateFile,
};
use crate::{FetchArgs, RobustnessArgs, ScoreArgs, SynthArgs, ValidateArgs};

pub const PROVIDER_URL_ENV: &str = "ASSIM_PROVIDER_URL";
const DEFAULT_K: f64 = 50.0;
const DEFAULT_SIZES: &str = "100:2900:100";

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::InvalidConfig(format!("missing --{flag}")))
}

fn check_k(k: f64) -> Result<f64> {
    if k > 0.0 && k <= 100.0 {
        Ok(k)
    } else {
        Err(Error::InvalidK(k))
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.to_owned(),
        source: e,
    }
}

/// Writes `text` (plus a newline) to `path`, or stdout.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, format!("{text}\n")).map_err(io_err(path)),
        None => {
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "{text}").map_err(io_err(Path::new("<stdout>")))
        }
    }
}

fn load_triple(
    dest: Option<PathBuf>,
    target: Option<PathBuf>,
    home: Option<PathBuf>,
    populations: Populations,
) -> Result<(AudienceTable, AudienceTable, AudienceTable)> {
    let (dest_pop, target_pop, home_pop) = populations.resolve();
    Ok((
        load_audience_csv(required(dest, "dest")?, dest_pop)?,
        load_audience_csv(required(target, "target")?, target_pop)?,
        load_audience_csv(required(home, "home")?, home_pop)?,
    ))
}

pub fn score(args: ScoreArgs) -> Result<()> {
    let file: ScoreFile = config::load(args.config.as_deref())?;
    let k = check_k(args.k.or(file.k).unwrap_or(DEFAULT_K))?;
    let cap = args.cap.or(file.cap);
    if let Some(c) = cap {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "cap must be positive, got {c}"
            )));
        }
    }
    let out = args.out.or(file.out);
    let (dest, target, home) = load_triple(
        args.dest.or(file.dest),
        args.target.or(file.target),
        args.home.or(file.home),
        file.populations,
    )?;
    let report = score_triple_with(&dest, &target, &home, k, ScoreOptions { cap })?;
    emit(out.as_deref(), &report.to_json())
}

pub fn robustness(args: RobustnessArgs) -> Result<()> {
    let file: RobustnessFile = config::load(args.config.as_deref())?;
    let k = check_k(args.k.or(file.k).unwrap_or(DEFAULT_K))?;
    let sizes = parse_size_spec(
        args.sizes
            .or(file.sizes)
            .as_deref()
            .unwrap_or(DEFAULT_SIZES),
    )?;
    let config = StabilityConfig {
        k_percent: k,
        sizes,
        trials: args.trials.or(file.trials).unwrap_or(1),
        seed: args.seed.or(file.seed).unwrap_or(0),
        stability_floor: args.floor.or(file.floor).unwrap_or(DEFAULT_STABILITY_FLOOR),
    };
    let out = args.out.or(file.out);
    let summary_path = args.summary.or(file.summary);
    let (dest, target, home) = load_triple(
        args.dest.or(file.dest),
        args.target.or(file.target),
        args.home.or(file.home),
        file.populations,
    )?;

    let series = subset_stability_with(&dest, &target, &home, &config)?;
    match &out {
        Some(path) => {
            let f = File::create(path).map_err(io_err(path))?;
            write_stability_csv(&series, f).map_err(io_err(path))?;
        }
        None => write_stability_csv(&series, io::stdout().lock())
            .map_err(io_err(Path::new("<stdout>")))?,
    }
    let summary = serde_json::to_string_pretty(&series.summary()).expect("summary serializes");
    match (summary_path, out) {
        (Some(path), _) => emit(Some(&path), &summary),
        (None, Some(_)) => emit(None, &summary),
        (None, None) => Ok(()),
    }
}

pub fn validate(args: ValidateArgs) -> Result<()> {
    let file: ValidateFile = config::load(args.config.as_deref())?;
    let a = load_region_csv(required(args.a.or(file.a), "a")?)?;
    let b = load_region_csv(required(args.b.or(file.b), "b")?)?;
    let per_area = args.per_area || file.per_area.unwrap_or(false);
    let summary = correlate_regions(&a, &b, per_area)?;
    emit(
        args.out.or(file.out).as_deref(),
        &serde_json::to_string(&summary).expect("summary serializes"),
    )
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let file: SynthFile = config::load(args.config.as_deref())?;
    let defaults = SynthConfig::default();
    let config = SynthConfig {
        n_interests: args
            .interests
            .or(file.interests)
            .unwrap_or(defaults.n_interests),
        alpha: required(args.alpha.or(file.alpha), "alpha")?,
        dest_total: args
            .dest_total
            .or(file.dest_total)
            .unwrap_or(defaults.dest_total),
        home_total: args
            .home_total
            .or(file.home_total)
            .unwrap_or(defaults.home_total),
        target_total: args
            .target_total
            .or(file.target_total)
            .unwrap_or(defaults.target_total),
        activity_scale: args
            .activity_scale
            .or(file.activity_scale)
            .unwrap_or(defaults.activity_scale),
        activity_population: args
            .activity_population
            .or(file.activity_population)
            .unwrap_or(defaults.activity_population),
        dirichlet_concentration: args
            .concentration
            .or(file.concentration)
            .unwrap_or(defaults.dirichlet_concentration),
        k_percent: check_k(args.k.or(file.k).unwrap_or(DEFAULT_K))?,
        seed: args.seed.or(file.seed).unwrap_or(defaults.seed),
    };
    config.validate()?;
    let out_dir = required(args.out_dir.or(file.out_dir), "out-dir")?;
    let triple = generate_triple(&config)?;
    let truth = write_synth(&triple, &config, &out_dir)?;
    emit(
        None,
        &serde_json::to_string(&truth).expect("ground truth serializes"),
    )
}

pub fn fetch(args: FetchArgs) -> Result<()> {
    let file: FetchFile = config::load(args.config.as_deref())?;
    let population: PopulationSpec = match args.population {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?
        }
        None => required(file.population, "population")?,
    };
    let interests = read_interest_list(&required(args.interests.or(file.interests), "interests")?)?;

    let env_url = std::env::var(PROVIDER_URL_ENV)
        .ok()
        .filter(|u| !u.is_empty());
    let mut provider = file.provider.unwrap_or_else(|| ProviderConfig::new(""));
    if let Some(url) = args.base_url.or(env_url) {
        provider.base_url = url;
    }
    if provider.base_url.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "no provider url: pass --base-url or set {PROVIDER_URL_ENV}"
        )));
    }
    if let Some(v) = args.max_requests {
        provider.max_requests_per_window = v;
    }
    if let Some(v) = args.window {
        provider.window_secs = v;
    }
    if let Some(v) = args.retries {
        provider.max_retries = v;
    }
    if let Some(v) = args.cache_ttl {
        provider.cache_ttl_secs = v;
    }

    let client = AudienceProvider::new(provider, UreqTransport::default())?;
    let table = client.fetch_audience(&population, &interests)?;
    match args.out.or(file.out) {
        Some(path) => write_audience_csv(&table, path),
        None => assim_core::ingestion::write_audience(&table, io::stdout().lock())
            .map_err(io_err(Path::new("<stdout>"))),
    }
}

/// Reads the `interest_id` and `interest_name` columns of a CSV; other
/// columns are ignored, so audience files can be reused as interest lists.
fn read_interest_list(path: &Path) -> Result<Vec<InterestId>> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.display().to_string(),
        line,
        message,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io {
            path: path.to_owned(),
            source: io,
        },
        other => parse_err(0, format!("{other:?}")),
    })?;
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(1, format!("missing column {name}")))
    };
    let (id_col, name_col) = (column("interest_id")?, column("interest_name")?);
    let mut interests = Vec::new();
    for record in rdr.records() {
        let record =
            record.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        interests.push(InterestId::new(record[id_col].trim(), &record[name_col]));
    }
    Ok(interests)
}
