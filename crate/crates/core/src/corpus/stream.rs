use rayon::prelude::*;

use super::{
    make_example, sample_sentence, CorpusError, Sentence, TaskExample, TaskMix, Vocabulary,
};
use crate::grammar::GrammarSpec;
use crate::rng::{item_rng, stream};
use crate::typegraph::{Level, TypeGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct StreamConfig {
    pub seed: u64,
    pub batch_size: usize,
    pub mix: TaskMix,
    pub level: Level,
}

impl Default for StreamConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            batch_size: 128,
            mix: TaskMix::default(),
            level: Level::Seen,
        }
    }
}

/// Deterministic example stream. Example `i` depends only on the seed and
/// `i`, so batches can be generated in any order and on any number of
/// threads.
#[derive(Debug, Clone, Copy)]
pub struct CorpusStream<'a> {
    grammar: &'a GrammarSpec,
    graph: &'a TypeGraph,
    vocab: &'a Vocabulary,
    config: &'a StreamConfig,
}

impl<'a> CorpusStream<'a> {
    pub fn new(
        grammar: &'a GrammarSpec,
        graph: &'a TypeGraph,
        vocab: &'a Vocabulary,
        config: &'a StreamConfig,
    ) -> Result<Self, CorpusError> {
        vocab.check_compatible(graph.params())?;
        let m = config.mix;
        TaskMix::new(m.free, m.unscramble, m.conditional)?;
        if config.batch_size == 0 {
            return Err(CorpusError::BadMix("batch_size must be positive".into()));
        }
        Ok(Self {
            grammar,
            graph,
            vocab,
            config,
        })
    }

    pub fn config(&self) -> &StreamConfig {
        self.config
    }

    /// Sentence and task example at global position `index`.
    pub fn item(&self, index: u64) -> Result<(Sentence, TaskExample), CorpusError> {
        let mut rng = item_rng(self.config.seed, stream::CORPUS, index);
        let task = self.config.mix.sample(&mut rng);
        let sentence = sample_sentence(
            self.grammar,
            self.graph,
            self.vocab,
            self.config.level,
            &mut rng,
        )?;
        let example = make_example(&sentence, task, &mut rng);
        Ok((sentence, example))
    }

    /// Items `start..end`, generated in parallel, in index order.
    pub fn items(&self, start: u64, end: u64) -> Result<Vec<(Sentence, TaskExample)>, CorpusError> {
        (start..end).into_par_iter().map(|i| self.item(i)).collect()
    }

    pub fn batch(&self, b: u64) -> Result<Vec<TaskExample>, CorpusError> {
        let bs = self.config.batch_size as u64;
        Ok(self
            .items(b * bs, (b + 1) * bs)?
            .into_iter()
            .map(|(_, e)| e)
            .collect())
    }

    /// Endless iterator over batches 0, 1, 2, ...
    pub fn batches(self) -> impl Iterator<Item = Result<Vec<TaskExample>, CorpusError>> + 'a {
        (0u64..).map(move |b| self.batch(b))
    }
}
