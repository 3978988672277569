//! From corpus statistics to percolation predictions: which entity-descriptor
//! pairs a training stream has shown, how fast pairs get covered, and when
//! the seen-pair graph is predicted to percolate.

use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{CorpusError, CorpusStream, StreamConfig, Vocabulary};
use crate::grammar::GrammarSpec;
use crate::percolation::{
    threshold_analytic, BipartiteGraph, ConceptDensityMatrix, DegreeDistribution, PercolationError,
};
use crate::typegraph::{build_typegraph, TypeGraph, TypeGraphError, TypeGraphParams};
use crate::SCHEMA_VERSION;

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Percolation(#[from] PercolationError),
    #[error(transparent)]
    Graph(#[from] TypeGraphError),
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("exposure saturates at {saturation} and never reaches the threshold {p_c}")]
    UnreachableThreshold { p_c: f64, saturation: f64 },
}

/// Sentences generated per parallel chunk.
const CHUNK: u64 = 1 << 14;

/// Binary entity × descriptor matrix of the pairs bound together in the
/// first `iterations × batch_size` sentences of the training stream.
pub fn density_from_stream(
    graph: &TypeGraph,
    grammar: &GrammarSpec,
    iterations: u64,
    batch_size: usize,
    seed: u64,
) -> Result<ConceptDensityMatrix, BridgeError> {
    let vocab = Vocabulary::new(graph.params());
    let config = StreamConfig {
        seed,
        batch_size,
        ..StreamConfig::default()
    };
    let stream = CorpusStream::new(grammar, graph, &vocab, &config)?;
    let total = iterations * batch_size as u64;
    let mut d = ConceptDensityMatrix::zeros(graph.n_entities(), graph.n_descriptors())?;
    let mut start = 0;
    while start < total {
        let end = (start + CHUNK).min(total);
        let pairs: Vec<Vec<(u32, u32)>> = (start..end)
            .into_par_iter()
            .map(|i| stream.item(i).map(|(s, _)| s.descriptor_pairs(&vocab)))
            .collect::<Result<_, _>>()?;
        for (e, k) in pairs.into_iter().flatten() {
            d.set(e as usize, k as usize, 1.0)?;
        }
        start = end;
    }
    Ok(d)
}

/// Probability that a given seen pair has appeared by iteration `t`,
/// `saturation · (1 − exp(−rate·t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExposureModel {
    pub rate: f64,
    pub saturation: f64,
}

impl ExposureModel {
    pub fn probability(&self, t: f64) -> f64 {
        self.saturation * -(-self.rate * t).exp_m1()
    }

    /// Iteration at which the exposure probability reaches `p`.
    pub fn iteration_for(&self, p: f64) -> Result<f64, BridgeError> {
        if p >= self.saturation {
            return Err(BridgeError::UnreachableThreshold {
                p_c: p,
                saturation: self.saturation,
            });
        }
        Ok(-(-p / self.saturation).ln_1p() / self.rate)
    }
}

/// Fits the exposure rate from the fraction `f` of seen pairs covered after
/// `iterations`: `rate = −ln(1 − f) / iterations`, saturation 1.
pub fn calibrate_exposure(
    graph: &TypeGraph,
    grammar: &GrammarSpec,
    iterations: u64,
    batch_size: usize,
    seed: u64,
) -> Result<ExposureModel, BridgeError> {
    if iterations == 0 {
        return Err(BridgeError::Calibration(
            "need at least one iteration".into(),
        ));
    }
    let d = density_from_stream(graph, grammar, iterations, batch_size, seed)?;
    let f = d.nnz() as f64 / graph.n_seen_descriptor_edges() as f64;
    if f <= 0.0 || f >= 1.0 {
        return Err(BridgeError::Calibration(format!(
            "covered fraction {f} after {iterations} iterations"
        )));
    }
    Ok(ExposureModel {
        rate: -(-f).ln_1p() / iterations as f64,
        saturation: 1.0,
    })
}

/// Percolation threshold of the seen entity-descriptor graph from its
/// degree distributions.
pub fn seen_graph_threshold(graph: &TypeGraph) -> Result<f64, BridgeError> {
    let g = BipartiteGraph::from_seen_descriptors(graph);
    let left = DegreeDistribution::from_degrees(&g.left_degrees())?;
    let right = DegreeDistribution::from_degrees(&g.right_degrees())?;
    Ok(threshold_analytic(&left, &right)?)
}

/// Iteration at which the exposure probability reaches `p_c`.
pub fn predicted_transition(p_c: f64, model: &ExposureModel) -> Result<f64, BridgeError> {
    model.iteration_for(p_c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub n_desc_props: usize,
    pub p_c: f64,
    pub exposure: ExposureModel,
    pub t_star: f64,
}

/// Builds the type graph for `params`, calibrates exposure over
/// `calibration_iterations` and predicts the transition iteration.
pub fn predict_for_params(
    params: &TypeGraphParams,
    grammar: &GrammarSpec,
    batch_size: usize,
    calibration_iterations: u64,
    seed: u64,
) -> Result<Prediction, BridgeError> {
    let graph = build_typegraph(params)?;
    let p_c = seen_graph_threshold(&graph)?;
    let exposure = calibrate_exposure(&graph, grammar, calibration_iterations, batch_size, seed)?;
    let t_star = predicted_transition(p_c, &exposure)?;
    Ok(Prediction {
        n_desc_props: params.n_desc_props,
        p_c,
        exposure,
        t_star,
    })
}

/// Rows `K,p_c,rate,predicted,observed`; `observed` is empty when unknown.
pub fn write_transition_csv<W: Write>(
    mut w: W,
    rows: &[(Prediction, Option<f64>)],
) -> io::Result<()> {
    writeln!(w, "# schema=transitions version={SCHEMA_VERSION}")?;
    writeln!(w, "K,p_c,rate,predicted,observed")?;
    for (p, observed) in rows {
        let obs = observed.map(|o| o.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{obs}",
            p.n_desc_props, p.p_c, p.exposure.rate, p.t_star
        )?;
    }
    Ok(())
}
