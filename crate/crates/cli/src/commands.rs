use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};

use emergence_core::analysis::{
    bilinear_fit, collapse_scan, curves_from_tables, powerlaw_fit, rescale, write_long_csv, Curve,
};
use emergence_core::bridge::{predict_for_params, write_transition_csv};
use emergence_core::config::{Config, ConfigError};
use emergence_core::corpus::{write_examples, CorpusStream, TaskExample, Vocabulary};
use emergence_core::eval::{
    build_probes, generation_stats, oracle_respond, read_generations, read_metric_csv,
    read_probe_requests, read_probe_responses, score_generations, score_probes, write_metric_csv,
    write_probe_requests, write_probe_responses, MetricReport, MetricTable, ProbeFamily,
    ProbeResponse,
};
use emergence_core::grammar::default_grammar;
use emergence_core::percolation::{
    simulate_percolation, susceptibility_peak, Base, BipartiteGraph, PercolationError,
};
use emergence_core::typegraph::{build_typegraph, write_typegraph, TypeGraph, TypeGraphParams};

use crate::run::RunDir;
use crate::settings::{self, GRAPH_KEYS, STREAM_KEYS};

pub const GRAPH_FILE: &str = "graph.emtg";
pub const VOCAB_FILE: &str = "vocab.txt";
pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const METRICS_FILE: &str = "metrics.csv";
pub const CURVE_FILE: &str = "curve.csv";
pub const TRANSITIONS_FILE: &str = "transitions.csv";
const DEFAULT_METRIC: &str = "free/type_check_descriptive";

const PROBE_KEYS: [&str; 3] = ["n_probes", "families", "oracle_responses"];
const EVAL_KEYS: [&str; 4] = ["generations", "probe_requests", "probe_responses", "label"];
const PERCOLATE_KEYS: [&str; 7] = [
    "base",
    "n_left",
    "n_right",
    "degree_left",
    "degree_right",
    "p_grid",
    "trials",
];
const BRIDGE_KEYS: [&str; 2] = ["k_values", "calibration_iterations"];
const ANALYSIS_KEYS: [&str; 3] = ["metric", "alpha_grid", "beta_grid"];

/// One config file may serve several subcommands, so a key is rejected only
/// when no subcommand reads it.
pub fn check_keys(cfg: &Config) -> Result<(), ConfigError> {
    let groups: [&[&str]; 7] = [
        &GRAPH_KEYS,
        &STREAM_KEYS,
        &PROBE_KEYS,
        &EVAL_KEYS,
        &PERCOLATE_KEYS,
        &BRIDGE_KEYS,
        &ANALYSIS_KEYS,
    ];
    let all: Vec<&str> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    cfg.check_known(&all)
}

fn write_graph_files(run: &mut RunDir, graph: &TypeGraph, vocab: &Vocabulary) -> Result<()> {
    run.write_output(GRAPH_FILE, |w| Ok(write_typegraph(graph, w)?))?;
    run.write_output(VOCAB_FILE, |w| Ok(vocab.write(w)?))
}

pub fn gen_graph(cfg: &Config, run: &mut RunDir) -> Result<()> {
    let params = settings::graph_params(cfg)?;
    let graph = build_typegraph(&params)?;
    write_graph_files(run, &graph, &Vocabulary::new(&params))?;
    println!("{}", graph.summary());
    Ok(())
}

pub fn gen_corpus(cfg: &Config, run: &mut RunDir) -> Result<()> {
    let params = settings::graph_params(cfg)?;
    let stream_cfg = settings::stream_config(cfg)?;
    let iterations: u64 = cfg.get_or("iterations", 100)?;
    let graph = build_typegraph(&params)?;
    let vocab = Vocabulary::new(&params);
    let grammar = default_grammar();
    let stream = CorpusStream::new(&grammar, &graph, &vocab, &stream_cfg)?;
    let n = iterations * stream_cfg.batch_size as u64;
    let examples: Vec<TaskExample> = stream.items(0, n)?.into_iter().map(|(_, e)| e).collect();
    write_graph_files(run, &graph, &vocab)?;
    run.write_output(CORPUS_FILE, |w| Ok(write_examples(w, &vocab, &examples)?))?;
    println!(
        "{n} examples ({iterations} batches of {})",
        stream_cfg.batch_size
    );
    Ok(())
}

fn families(cfg: &Config) -> Result<Vec<ProbeFamily>, ConfigError> {
    Ok(cfg
        .get_list::<ProbeFamily>("families")?
        .unwrap_or_else(|| ProbeFamily::ALL.to_vec()))
}

pub fn probes(cfg: &Config, run: &mut RunDir) -> Result<()> {
    let params = settings::graph_params(cfg)?;
    let n: usize = cfg.get_or("n_probes", 1000)?;
    let families = families(cfg)?;
    let oracle: bool = cfg.get_or("oracle_responses", false)?;
    let graph = build_typegraph(&params)?;
    let vocab = Vocabulary::new(&params);
    let grammar = default_grammar();
    for family in families {
        let requests = build_probes(&graph, &grammar, &vocab, n, settings::seed(cfg)?, family)?;
        run.write_output(&format!("probes_{}.jsonl", family.name()), |w| {
            Ok(write_probe_requests(w, &requests)?)
        })?;
        if oracle {
            let responses: Vec<ProbeResponse> = requests
                .iter()
                .map(|r| oracle_respond(r, &graph, &grammar, &vocab, 0))
                .collect::<Result<_, _>>()?;
            run.write_output(&format!("responses_{}.jsonl", family.name()), |w| {
                Ok(write_probe_responses(w, &responses)?)
            })?;
        }
        println!("{}: {n} probes", family.name());
    }
    Ok(())
}

fn merge(into: &mut BTreeMap<u64, MetricReport>, reports: Vec<MetricReport>) {
    for r in reports {
        into.entry(r.iteration)
            .or_insert_with(|| MetricReport::new(r.iteration))
            .metrics
            .extend(r.metrics);
    }
}

pub fn eval(cfg: &Config, run: &mut RunDir) -> Result<()> {
    let params = settings::graph_params(cfg)?;
    let generations: Vec<String> = cfg.get_list("generations")?.unwrap_or_default();
    let requests: Vec<String> = cfg.get_list("probe_requests")?.unwrap_or_default();
    let responses: Vec<String> = cfg.get_list("probe_responses")?.unwrap_or_default();
    if requests.len() != responses.len() {
        return Err(ConfigError::Invalid {
            key: "probe_responses".into(),
            value: responses.join(","),
            message: format!(
                "{} files for {} probe_requests files",
                responses.len(),
                requests.len()
            ),
        }
        .into());
    }
    if generations.is_empty() && requests.is_empty() {
        return Err(ConfigError::Missing("generations".into()).into());
    }
    let graph = build_typegraph(&params)?;
    let vocab = Vocabulary::new(&params);
    let grammar = default_grammar();

    let mut reports = BTreeMap::new();
    for name in &generations {
        let records =
            read_generations(&run.read_input(name)?[..]).with_context(|| format!("in {name}"))?;
        merge(
            &mut reports,
            score_generations(&records, &grammar, &graph, &vocab)?,
        );
        let stats = generation_stats(&records, &grammar, &vocab)?;
        println!(
            "{name}: {} of {} outputs grammatical",
            stats.grammatical, stats.total
        );
    }
    for (req, resp) in requests.iter().zip(&responses) {
        let rq =
            read_probe_requests(&run.read_input(req)?[..]).with_context(|| format!("in {req}"))?;
        let rs = read_probe_responses(&run.read_input(resp)?[..])
            .with_context(|| format!("in {resp}"))?;
        merge(&mut reports, score_probes(&rq, &rs, &vocab)?);
    }
    let table = MetricTable {
        label: cfg.raw("label").map(str::to_string),
        reports: reports.into_values().collect(),
    };
    run.write_output(METRICS_FILE, |w| Ok(write_metric_csv(w, &table)?))?;
    println!("{} iterations scored", table.reports.len());
    Ok(())
}

pub fn percolate(cfg: &Config, run: &mut RunDir) -> Result<()> {
    let base = match cfg.raw("base").unwrap_or("complete") {
        "complete" => Base::Complete {
            n_left: cfg.require("n_left")?,
            n_right: cfg.require("n_right")?,
        },
        "configuration" => Base::Configuration {
            n_left: cfg.require("n_left")?,
            n_right: cfg.require("n_right")?,
            left: settings::degree_distribution(cfg, "degree_left")?,
            right: settings::degree_distribution(cfg, "degree_right")?,
        },
        "seen" => Base::Graph(BipartiteGraph::from_seen_descriptors(&build_typegraph(
            &settings::graph_params(cfg)?,
        )?)),
        other => {
            return Err(ConfigError::Invalid {
                key: "base".into(),
                value: other.into(),
                message: "expected `complete`, `configuration` or `seen`".into(),
            }
            .into())
        }
    };
    let grid = match settings::log_grid(cfg, "p_grid")? {
        Some(g) => g,
        None => {
            let p = base
                .reference_threshold()
                .context("no reference threshold; set p_grid")?;
            settings::log_grid(
                &Config::parse(&format!("p_grid = {}:{}:41", 0.3 * p, (3.0 * p).min(1.0)))?,
                "p_grid",
            )?
            .expect("grid was just set")
        }
    };
    if grid.iter().any(|&p| p > 1.0) {
        return Err(ConfigError::Invalid {
            key: "p_grid".into(),
            value: cfg.raw("p_grid").unwrap_or("").into(),
            message: "probabilities must not exceed 1".into(),
        }
        .into());
    }
    let trials: usize = cfg.get_or("trials", 20)?;
    let curve = simulate_percolation(&base, &grid, trials, settings::seed(cfg)?)?;
    run.write_output(CURVE_FILE, |w| Ok(curve.write_csv(w)?))?;
    match (susceptibility_peak(&curve), curve.reference_threshold) {
        (Ok(peak), Some(r)) => {
            println!("susceptibility peak at p = {peak:.4e} (reference threshold {r:.4e})")
        }
        (Ok(peak), None) => println!("susceptibility peak at p = {peak:.4e}"),
        (Err(PercolationError::NoTransition(_)), _) => {
            println!("no interior susceptibility peak on this grid")
        }
        (Err(e), _) => return Err(e.into()),
    }
    Ok(())
}

fn read_tables(run: &mut RunDir, files: &[PathBuf]) -> Result<Vec<MetricTable>> {
    files
        .iter()
        .map(|f| {
            let bytes = run.read_external(f)?;
            read_metric_csv(&bytes[..]).with_context(|| format!("in {}", f.display()))
        })
        .collect()
}

/// Curves of the configured metric, one per metric file, sorted by label.
fn metric_curves(cfg: &Config, run: &mut RunDir, files: &[PathBuf]) -> Result<Vec<Curve>> {
    if files.is_empty() {
        bail!("no metric files given");
    }
    let metric = cfg.raw("metric").unwrap_or(DEFAULT_METRIC);
    let mut curves = curves_from_tables(&read_tables(run, files)?, metric)?;
    curves.sort_by(|a, b| a.label().total_cmp(&b.label()));
    Ok(curves)
}

pub fn bridge(cfg: &Config, run: &mut RunDir, observed: &[PathBuf]) -> Result<()> {
    let base = settings::graph_params(cfg)?;
    let ks: Vec<usize> = cfg
        .get_list("k_values")?
        .unwrap_or_else(|| vec![14800, 18000, 21200, 27600, 32400, 38800]);
    let batch: usize = cfg.get_or("batch_size", 128)?;
    let calibration: u64 = cfg.get_or("calibration_iterations", 100)?;
    let mut breakpoints = BTreeMap::new();
    if !observed.is_empty() {
        for c in metric_curves(cfg, run, observed)? {
            breakpoints.insert(c.label().to_bits(), bilinear_fit(&c)?.breakpoint);
        }
    }
    let grammar = default_grammar();
    let mut rows = Vec::new();
    for k in ks {
        let params = TypeGraphParams {
            n_desc_props: k,
            ..base.clone()
        };
        params.validate().map_err(|e| ConfigError::Invalid {
            key: "k_values".into(),
            value: k.to_string(),
            message: e.to_string(),
        })?;
        let p = predict_for_params(&params, &grammar, batch, calibration, settings::seed(cfg)?)?;
        println!(
            "K = {k}: p_c = {:.4e}, predicted transition at iteration {:.1}",
            p.p_c, p.t_star
        );
        rows.push((p, breakpoints.get(&(k as f64).to_bits()).copied()));
    }
    run.write_output(TRANSITIONS_FILE, |w| Ok(write_transition_csv(w, &rows)?))
}

pub fn bilinear(cfg: &Config, run: &mut RunDir, files: &[PathBuf]) -> Result<()> {
    let curves = metric_curves(cfg, run, files)?;
    let fits = curves
        .iter()
        .map(|c| Ok((c.label(), bilinear_fit(c)?)))
        .collect::<Result<Vec<_>>>()?;
    run.write_output("bilinear.csv", |w| {
        writeln!(w, "label,breakpoint,level,left_slope,right_slope,mse")?;
        for (label, f) in &fits {
            writeln!(
                w,
                "{label},{},{},{},{},{}",
                f.breakpoint, f.level, f.left_slope, f.right_slope, f.mse
            )?;
        }
        Ok(())
    })?;
    for (label, f) in &fits {
        println!("{label}: breakpoint {:.1}", f.breakpoint);
    }
    Ok(())
}

pub fn powerlaw(cfg: &Config, run: &mut RunDir, files: &[PathBuf]) -> Result<()> {
    let curves = metric_curves(cfg, run, files)?;
    let points = curves
        .iter()
        .map(|c| Ok((c.label(), bilinear_fit(c)?.breakpoint)))
        .collect::<Result<Vec<_>>>()?;
    let fit = powerlaw_fit(&points)?;
    run.write_output("powerlaw.csv", |w| {
        writeln!(w, "exponent,prefactor,residual")?;
        writeln!(w, "{},{},{}", fit.exponent, fit.prefactor, fit.residual)?;
        Ok(())
    })?;
    println!("breakpoint ∝ label^{:.3}", fit.exponent);
    Ok(())
}

pub fn collapse(cfg: &Config, run: &mut RunDir, files: &[PathBuf]) -> Result<()> {
    let alpha = settings::step_grid(cfg, "alpha_grid")?
        .unwrap_or(emergence_core::analysis::exponent_grid(0.0, 2.5, 0.05)?);
    let beta = settings::step_grid(cfg, "beta_grid")?;
    let curves = metric_curves(cfg, run, files)?;
    let result = collapse_scan(&curves, &alpha, beta.as_deref())?;
    run.write_output("collapse.csv", |w| Ok(result.write_csv(w)?))?;
    run.write_output("collapsed.csv", |w| {
        Ok(write_long_csv(
            w,
            &rescale(&curves, result.alpha, result.beta),
        )?)
    })?;
    println!(
        "best collapse at alpha = {}, beta = {} (score {:.3e})",
        result.alpha, result.beta, result.score
    );
    Ok(())
}
