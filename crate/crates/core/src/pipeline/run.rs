use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use log::info;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{InputPaths, PipelineConfig, SynthConfig};
use super::report;
use crate::counterfactual::{
    run_monte_carlo, tapes_from_fills, write_investor_replicas, write_replica_summary,
    MonteCarloOutput, ReplicaContext,
};
use crate::error::{Diagnostic, Error, Result};
use crate::ledger::{
    compute_ledger, period_end_prices, write_performances, LedgerContext, LedgerOutput,
};
use crate::matching::{replay_period, write_fills, ReplayOutput};
use crate::orderflow::{
    load_dividends, load_index_series, load_stock_meta, parse_order_events, write_order_events,
    write_stock_meta, DividendEvent, InvestorClass, Market, OrderEvent, OrderSchema, ParseOptions,
    StockId, StockMeta, TradingCalendar,
};
use crate::spectro::{
    analyze_cell, classify_investors, fit_cell, one_over_n_benchmark, BinKind, CellAnalysis,
    CellFits, Observation, OneOverN,
};
use crate::synth::{generate_orderflow, generate_population, GroundTruth};

/// Which stages to run and which files to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Ingest and replay; emits fills, daily closes and call-auction openings.
    Replay,
    /// Through the ledger and spectro stages on real investors.
    Analyze,
    /// Through the random-timing benchmark.
    Counterfactual,
    /// All stages, emitting only the figure and fit reports.
    Report,
    /// All stages, emitting every intermediate and report file.
    Run,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Replay => "replay",
            Command::Analyze => "analyze",
            Command::Counterfactual => "counterfactual",
            Command::Report => "report",
            Command::Run => "run",
        }
    }

    fn needs_ledger(self) -> bool {
        self != Command::Replay
    }

    fn needs_counterfactual(self) -> bool {
        matches!(
            self,
            Command::Counterfactual | Command::Report | Command::Run
        )
    }

    fn needs_spectro(self) -> bool {
        matches!(self, Command::Analyze | Command::Report | Command::Run)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses every core. Outputs do not depend on it.
    pub workers: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub files: Vec<String>,
    pub diagnostics: usize,
}

/// An ingested or generated corpus.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub events: Vec<OrderEvent>,
    pub metas: BTreeMap<StockId, StockMeta>,
    pub calendar: TradingCalendar,
    pub dividends: Vec<DividendEvent>,
    pub index: BTreeMap<Market, BTreeMap<NaiveDate, f64>>,
    pub truth: Option<GroundTruth>,
    pub diagnostics: Vec<Diagnostic>,
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Input {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

fn load_inputs(input: &InputPaths) -> Result<Corpus> {
    let calendar = with_path(
        &input.calendar,
        TradingCalendar::from_csv(open(&input.calendar)?),
    )?;
    let metas = with_path(&input.stock_meta, load_stock_meta(open(&input.stock_meta)?))?;
    let parsed = with_path(
        &input.orders,
        parse_order_events(
            open(&input.orders)?,
            &OrderSchema::default(),
            ParseOptions {
                resort: input.resort,
            },
        ),
    )?;
    let mut diagnostics = parsed.rejected;
    let dividends = match &input.dividends {
        Some(p) => {
            let known: BTreeSet<StockId> = metas.keys().cloned().collect();
            let (d, diags) = with_path(p, load_dividends(open(p)?, Some(&known)))?;
            diagnostics.extend(diags);
            d
        }
        None => Vec::new(),
    };
    let index = match &input.index {
        Some(p) => with_path(p, load_index_series(open(p)?))?,
        None => BTreeMap::new(),
    };
    Ok(Corpus {
        events: parsed.events,
        metas,
        calendar,
        dividends,
        index,
        truth: None,
        diagnostics,
    })
}

/// Generate the synthetic corpus described by `synth`.
pub fn synthesize(synth: &SynthConfig, seed: u64) -> Result<Corpus> {
    let calendar = TradingCalendar::weekdays(synth.start_date, synth.population.days);
    let agents = generate_population(&synth.population, seed)?;
    let market = generate_orderflow(&agents, &synth.population, &calendar, seed)?;
    Ok(Corpus {
        events: market.events,
        metas: market
            .metas
            .into_iter()
            .map(|m| (m.stock_id.clone(), m))
            .collect(),
        calendar,
        dividends: Vec::new(),
        index: BTreeMap::new(),
        truth: Some(market.truth),
        diagnostics: Vec::new(),
    })
}

pub fn load_corpus(config: &PipelineConfig) -> Result<Corpus> {
    match (&config.input, &config.synth) {
        (Some(input), None) => load_inputs(input).map_err(|e| e.in_stage("ingest")),
        (None, Some(synth)) => {
            synthesize(synth, config.synth_seed()).map_err(|e| e.in_stage("synth"))
        }
        _ => Err(Error::Config(
            "configure exactly one of [input] or [synth]".into(),
        )),
    }
}

type Cell = (Market, InvestorClass);

fn observations(ledger: &LedgerOutput) -> BTreeMap<Cell, Vec<Observation>> {
    let mut out: BTreeMap<Cell, Vec<Observation>> = BTreeMap::new();
    for p in &ledger.performances {
        out.entry((p.market, p.class)).or_default().push(p.into());
    }
    out
}

fn benchmark(
    corpus: &Corpus,
    replay: &ReplayOutput,
    diagnostics: &mut Vec<Diagnostic>,
) -> BTreeMap<Market, OneOverN> {
    let days: Vec<NaiveDate> = corpus.calendar.days().map(|(d, _)| d).collect();
    let mut out = BTreeMap::new();
    for market in Market::ALL {
        let mut prices: BTreeMap<StockId, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
        for meta in corpus.metas.values().filter(|m| m.market == market) {
            let mut path: BTreeMap<NaiveDate, f64> = replay
                .daily_close
                .get(&meta.stock_id)
                .map(|d| d.iter().map(|(k, v)| (*k, v.to_f64())).collect())
                .unwrap_or_default();
            if let Some(&first) = days.first() {
                if let std::collections::btree_map::Entry::Vacant(slot) = path.entry(first) {
                    diagnostics.push(Diagnostic::new(
                        "spectro",
                        format!(
                            "1/N: `{}` did not trade on {first}; using its reference price",
                            meta.stock_id
                        ),
                    ));
                    slot.insert(meta.reference_price.to_f64());
                }
            }
            prices.insert(meta.stock_id.clone(), path);
        }
        if prices.is_empty() {
            continue;
        }
        let series = one_over_n_benchmark(&prices, &days, 1.0, corpus.index.get(&market));
        diagnostics.extend(series.diagnostics.iter().cloned());
        out.insert(market, series);
    }
    out
}

fn write_openings(replay: &ReplayOutput) -> String {
    let mut out = String::from("stock,date,price,volume,imbalance\n");
    for (stock, days) in &replay.openings {
        for (date, c) in days {
            let _ = writeln!(
                out,
                "{stock},{date},{},{},{}",
                c.price, c.volume, c.imbalance
            );
        }
    }
    out
}

/// Run the stages of `command` and return the bundle as file name → contents.
pub fn build_bundle(config: &PipelineConfig, command: Command) -> Result<BTreeMap<String, String>> {
    let mut files = BTreeMap::new();
    let corpus = load_corpus(config)?;
    let mut diagnostics = corpus.diagnostics.clone();
    info!(
        "corpus: {} orders, {} stocks, {} days",
        corpus.events.len(),
        corpus.metas.len(),
        corpus.calendar.len()
    );

    let replay = replay_period(&corpus.events, &corpus.calendar, &corpus.metas)
        .map_err(|e| e.in_stage("replay"))?;
    diagnostics.extend(replay.diagnostics.iter().cloned());
    info!("replay: {} fills", replay.fills.len());
    if matches!(command, Command::Replay | Command::Run) {
        files.insert("fills.csv".into(), write_fills(&replay.fills));
        files.insert(
            "daily_close.csv".into(),
            report::write_daily_close(&replay.daily_close),
        );
        files.insert("openings.csv".into(), write_openings(&replay));
    }

    if command.needs_ledger() {
        let fees = config.fees.to_fee_config()?;
        let grids = config.binning.grids()?;
        let period_end = corpus.calendar.period_end().ok_or_else(|| {
            Error::Config("calendar has no trading days".into()).in_stage("ledger")
        })?;
        let end_prices = period_end_prices(&corpus.metas, &replay.daily_close);
        let ctx = LedgerContext {
            metas: &corpus.metas,
            period_end,
            period_end_prices: &end_prices,
            dividends: &corpus.dividends,
            fees: &fees,
            policy: config.ledger,
        };
        let ledger = compute_ledger(&replay.fills, &ctx).map_err(|e| e.in_stage("ledger"))?;
        diagnostics.extend(ledger.diagnostics.iter().cloned());
        info!("ledger: {} investors", ledger.performances.len());
        if command != Command::Report {
            files.insert(
                "performance.csv".into(),
                write_performances(&ledger.performances),
            );
        }

        let mc: Option<MonteCarloOutput> = command.needs_counterfactual().then(|| {
            let tapes = tapes_from_fills(&replay.fills);
            let rctx = ReplicaContext {
                tapes: &tapes,
                fees: &fees,
                dividends: &corpus.dividends,
                policy: config.ledger,
            };
            run_monte_carlo(&ledger.activities, &config.counterfactual, &grids, &rctx)
        });
        let mut random_fits: BTreeMap<Cell, CellFits> = BTreeMap::new();
        if let Some(mc) = &mc {
            diagnostics.extend(mc.diagnostics.iter().cloned());
            info!(
                "counterfactual: {} investors x {} replicas",
                mc.investors.len(),
                config.counterfactual.replicas
            );
            for (&(market, class), pools) in &mc.pooled {
                if command != Command::Report {
                    files.insert(
                        format!("replica_summary_{market}_{}.csv", class.code()),
                        write_replica_summary(pools, &grids),
                    );
                }
                random_fits.insert(
                    (market, class),
                    fit_cell(|k, p| pools.series(k, p, &grids), &config.fit),
                );
            }
            if command != Command::Report {
                files.insert(
                    "investor_replicas.csv".into(),
                    write_investor_replicas(&mc.investors),
                );
            }
            let rows: Vec<_> = random_fits.iter().map(|(c, f)| (*c, f)).collect();
            files.insert("fits_random.csv".into(), report::write_fits(&rows));
            files.insert(
                "consistency_random.csv".into(),
                report::write_consistency(&rows),
            );
        }

        if command.needs_spectro() {
            let cells: Vec<CellAnalysis> = observations(&ledger)
                .into_par_iter()
                .map(|((market, class), obs)| {
                    analyze_cell(market, class, &obs, &grids, &config.fit)
                })
                .collect();
            for cell in &cells {
                diagnostics.extend(cell.diagnostics.iter().cloned());
            }
            let rows: Vec<_> = cells
                .iter()
                .map(|c| ((c.market, c.class), &c.fits))
                .collect();
            files.insert(
                "pools.csv".into(),
                report::write_pools(&classify_investors(&ledger.performances)),
            );
            files.insert("fits.csv".into(), report::write_fits(&rows));
            files.insert("consistency.csv".into(), report::write_consistency(&rows));
            files.insert("boxstats.csv".into(), report::write_boxstats(&cells));
            let random = mc.as_ref().map(|m| &m.pooled);
            files.insert(
                "fig3_R_vs_J.csv".into(),
                report::write_return_figure(BinKind::Frequency, &cells, random, &grids),
            );
            files.insert(
                "fig4_R_vs_dt.csv".into(),
                report::write_return_figure(BinKind::HoldingTime, &cells, random, &grids),
            );
            files.insert(
                "fig5_power_laws.csv".into(),
                report::write_power_law_figure(&cells),
            );
            if command != Command::Report {
                files.insert("binned_series.csv".into(), report::write_binned(&cells));
            }
            let bench = benchmark(&corpus, &replay, &mut diagnostics);
            files.insert("one_over_n.csv".into(), report::write_one_over_n(&bench));
        }
    }

    let mut text = String::new();
    for d in &diagnostics {
        let _ = writeln!(text, "{d}");
    }
    files.insert("diagnostics.txt".into(), text);
    files.insert(
        "manifest.json".into(),
        manifest(config, command, &corpus, &files)?,
    );
    Ok(files)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

#[derive(Serialize)]
struct ManifestFile {
    name: String,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    synth_seed: Option<u64>,
    config_sha256: String,
    config: String,
    inputs: Vec<ManifestFile>,
    ground_truth: Option<&'a GroundTruth>,
    files: Vec<ManifestFile>,
}

/// The configuration as it determines outputs: the output directory is
/// left out so bundles written to different places compare equal.
pub fn effective_config(config: &PipelineConfig) -> String {
    let mut c = config.clone();
    c.output.dir = PathBuf::new();
    c.to_toml()
}

fn manifest(
    config: &PipelineConfig,
    command: Command,
    corpus: &Corpus,
    files: &BTreeMap<String, String>,
) -> Result<String> {
    let config_text = effective_config(config);
    let mut inputs = Vec::new();
    if let Some(input) = &config.input {
        let paths = [
            Some(&input.orders),
            Some(&input.stock_meta),
            Some(&input.calendar),
        ]
        .into_iter()
        .chain([input.dividends.as_ref(), input.index.as_ref()])
        .flatten();
        for p in paths {
            let bytes = fs::read(p).map_err(|source| Error::File {
                path: p.clone(),
                source,
            })?;
            inputs.push(ManifestFile {
                name: p.display().to_string(),
                bytes: bytes.len(),
                sha256: sha256_hex(&bytes),
            });
        }
    }
    let m = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: command.name(),
        seed: config.counterfactual.seed,
        synth_seed: config.synth.as_ref().map(|_| config.synth_seed()),
        config_sha256: sha256_hex(config_text.as_bytes()),
        config: config_text,
        inputs,
        ground_truth: corpus.truth.as_ref(),
        files: files
            .iter()
            .map(|(name, body)| ManifestFile {
                name: name.clone(),
                bytes: body.len(),
                sha256: sha256_hex(body.as_bytes()),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&m)? + "\n")
}

/// Write `files` into `out` atomically: contents go to a sibling staging
/// directory that replaces `out` only once everything is written. An
/// existing `out` is replaced only if it is empty or holds a previous bundle.
pub fn write_bundle(out: &Path, files: &BTreeMap<String, String>) -> Result<()> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::File { path, source }
    };
    if out.exists() {
        let empty = fs::read_dir(out).map_err(io(out))?.next().is_none();
        if !empty && !out.join("manifest.json").is_file() {
            return Err(Error::Config(format!(
                "{} exists and is not a report bundle; refusing to overwrite",
                out.display()
            )));
        }
    }
    let name = out.file_name().ok_or_else(|| {
        Error::Config(format!(
            "output path {} has no final component",
            out.display()
        ))
    })?;
    let staging = out.with_file_name(format!(".{}.partial", name.to_string_lossy()));
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(io(&staging))?;
    }
    let written = (|| {
        fs::create_dir_all(&staging).map_err(io(&staging))?;
        for (file, body) in files {
            let path = staging.join(file);
            fs::write(&path, body).map_err(io(&path))?;
        }
        if out.exists() {
            fs::remove_dir_all(out).map_err(io(out))?;
        }
        fs::rename(&staging, out).map_err(io(out))
    })();
    if written.is_err() {
        let _ = fs::remove_dir_all(&staging);
    }
    written
}

fn with_workers<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(f)
}

/// Run `command` and write its bundle to the configured output directory.
pub fn execute(config: &PipelineConfig, command: Command, opts: &RunOptions) -> Result<RunSummary> {
    config.validate()?;
    let files = with_workers(opts.workers, || build_bundle(config, command))?;
    write_bundle(&config.output.dir, &files).map_err(|e| e.in_stage("report"))?;
    let diagnostics = files["diagnostics.txt"].lines().count();
    info!(
        "wrote {} files to {}",
        files.len(),
        config.output.dir.display()
    );
    Ok(RunSummary {
        out_dir: config.output.dir.clone(),
        files: files.into_keys().collect(),
        diagnostics,
    })
}

/// All stages, full bundle.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunSummary> {
    execute(config, Command::Run, &RunOptions::default())
}

/// Files of a synthetic corpus in the ingest formats, plus a configuration
/// that runs the pipeline on them.
pub fn synth_corpus_files(
    config: &PipelineConfig,
    workers: Option<usize>,
) -> Result<BTreeMap<String, String>> {
    let synth = config
        .synth
        .as_ref()
        .ok_or_else(|| Error::Config("the synth command needs a [synth] section".into()))?;
    let corpus = with_workers(workers, || synthesize(synth, config.synth_seed()))?;
    let mut files = BTreeMap::new();
    files.insert("orders.csv".to_string(), write_order_events(&corpus.events));
    files.insert(
        "stocks.csv".to_string(),
        write_stock_meta(corpus.metas.values()),
    );
    files.insert("calendar.csv".to_string(), corpus.calendar.to_csv());
    let truth = corpus
        .truth
        .as_ref()
        .expect("synthetic corpus carries ground truth");
    files.insert(
        "ground_truth.json".to_string(),
        serde_json::to_string_pretty(truth)? + "\n",
    );
    let mut replay_cfg = config.clone();
    replay_cfg.synth = None;
    replay_cfg.input = Some(InputPaths {
        orders: "orders.csv".into(),
        stock_meta: "stocks.csv".into(),
        calendar: "calendar.csv".into(),
        dividends: None,
        index: None,
        resort: false,
    });
    replay_cfg.output.dir = PathBuf::from("report");
    files.insert("config.toml".to_string(), replay_cfg.to_toml());
    files.insert("manifest.json".to_string(), {
        let m = serde_json::json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": "synth",
            "seed": config.synth_seed(),
            "config_sha256": sha256_hex(effective_config(config).as_bytes()),
        });
        serde_json::to_string_pretty(&m)? + "\n"
    });
    Ok(files)
}
