use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CorpusError, Sentence, Special};
use crate::grammar::Role;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Free,
    Unscramble,
    Conditional,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Free, Task::Unscramble, Task::Conditional];

    pub fn name(self) -> &'static str {
        match self {
            Task::Free => "free",
            Task::Unscramble => "unscramble",
            Task::Conditional => "conditional",
        }
    }

    pub fn marker(self) -> Special {
        match self {
            Task::Free => Special::Free,
            Task::Unscramble => Special::Unscramble,
            Task::Conditional => Special::Cond,
        }
    }
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown task `{s}`"))
    }
}

/// Fractions of free, unscramble and conditional examples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskMix {
    pub free: f64,
    pub unscramble: f64,
    pub conditional: f64,
}

impl Default for TaskMix {
    fn default() -> Self {
        Self {
            free: 0.8,
            unscramble: 0.1,
            conditional: 0.1,
        }
    }
}

impl TaskMix {
    pub fn new(free: f64, unscramble: f64, conditional: f64) -> Result<Self, CorpusError> {
        let parts = [free, unscramble, conditional];
        if parts.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(CorpusError::BadMix(format!(
                "fractions must lie in [0, 1], got {parts:?}"
            )));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CorpusError::BadMix(format!(
                "fractions sum to {sum}, not 1"
            )));
        }
        Ok(Self {
            free,
            unscramble,
            conditional,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Task {
        let u: f64 = rng.random();
        if u < self.free {
            Task::Free
        } else if u < self.free + self.unscramble {
            Task::Unscramble
        } else {
            Task::Conditional
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskExample {
    pub task: Task,
    /// Task marker followed by the task's conditioning tokens.
    pub input: Vec<u32>,
    /// The sentence followed by `<eos>`.
    pub target: Vec<u32>,
}

impl TaskExample {
    /// What the model sees: input, separator, target.
    pub fn model_sequence(&self) -> Vec<u32> {
        let mut s = self.input.clone();
        s.push(Special::Sep.id());
        s.extend_from_slice(&self.target);
        s
    }

    /// The sentence tokens of the target, without `<eos>`.
    pub fn sentence_tokens(&self) -> &[u32] {
        self.target
            .strip_suffix(&[Special::Eos.id()])
            .unwrap_or(&self.target)
    }
}

pub fn make_example<R: Rng + ?Sized>(sentence: &Sentence, task: Task, rng: &mut R) -> TaskExample {
    let mut input = vec![task.marker().id()];
    match task {
        Task::Free => {}
        Task::Unscramble => {
            let n = sentence.tokens.len();
            let mut order: Vec<usize> = (0..n).collect();
            if n > 1 {
                while order.iter().enumerate().all(|(i, &j)| i == j) {
                    order.shuffle(rng);
                }
            }
            input.extend(order.iter().map(|&i| sentence.tokens[i]));
        }
        Task::Conditional => {
            let content: Vec<u32> = sentence
                .tokens
                .iter()
                .zip(&sentence.roles)
                .filter(|(_, r)| matches!(r, Role::Subj | Role::Obj | Role::Verb | Role::Desc))
                .map(|(&t, _)| t)
                .collect();
            if !content.is_empty() {
                let mut chosen: Vec<u32> = Vec::new();
                while chosen.is_empty() {
                    chosen = content
                        .iter()
                        .copied()
                        .filter(|_| rng.random_bool(0.5))
                        .collect();
                }
                chosen.shuffle(rng);
                input.extend(chosen);
            }
        }
    }
    let mut target = sentence.tokens.clone();
    target.push(Special::Eos.id());
    TaskExample {
        task,
        input,
        target,
    }
}
