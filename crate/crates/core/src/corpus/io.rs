use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{CorpusError, Task, TaskExample, Vocabulary};
use crate::jsonl::{read_numbered, write_records, JsonlError};

/// Schema name in the header line of corpus files.
pub const CORPUS_SCHEMA: &str = "corpus";

/// One line of a corpus file. Tokens are written as strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleRecord {
    pub task: Task,
    pub input: Vec<String>,
    pub target: Vec<String>,
}

impl ExampleRecord {
    pub fn new(example: &TaskExample, vocab: &Vocabulary) -> Self {
        Self {
            task: example.task,
            input: vocab.texts(&example.input),
            target: vocab.texts(&example.target),
        }
    }

    pub fn resolve(&self, vocab: &Vocabulary) -> Result<TaskExample, CorpusError> {
        Ok(TaskExample {
            task: self.task,
            input: vocab.ids(&self.input)?,
            target: vocab.ids(&self.target)?,
        })
    }
}

pub fn write_examples<W: Write>(
    w: W,
    vocab: &Vocabulary,
    examples: &[TaskExample],
) -> Result<(), CorpusError> {
    let records: Vec<ExampleRecord> = examples
        .iter()
        .map(|e| ExampleRecord::new(e, vocab))
        .collect();
    write_records(w, CORPUS_SCHEMA, &records)?;
    Ok(())
}

pub fn read_examples<R: BufRead>(
    r: R,
    vocab: &Vocabulary,
) -> Result<Vec<TaskExample>, CorpusError> {
    let records: Vec<(usize, ExampleRecord)> = read_numbered(r, CORPUS_SCHEMA)?;
    records
        .iter()
        .map(|(line, rec)| {
            rec.resolve(vocab).map_err(|e| {
                CorpusError::Jsonl(JsonlError::Malformed {
                    line: *line,
                    message: e.to_string(),
                })
            })
        })
        .collect()
}
