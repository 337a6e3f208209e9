//! Human-trial sessions: show an image, take a class, reveal the truth,
//! stop after `k_consecutive` correct answers in a row or `max_trials`.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use super::human::HumanCohortStats;
use crate::dataset::{per_image_seed, Split};
use crate::problems::{ClassLabel, ProblemId, ProblemSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionParams {
    pub k_consecutive: usize,
    pub max_trials: usize,
    pub image_size: u32,
}

impl Default for SessionParams {
    fn default() -> Self {
        Self {
            k_consecutive: 10,
            max_trials: 50,
            image_size: 128,
        }
    }
}

impl SessionParams {
    pub fn validate(&self) -> Result<()> {
        if self.k_consecutive == 0 || self.max_trials < self.k_consecutive {
            return Err(Error::InvalidArgument(
                "need 1 <= k_consecutive <= max_trials".into(),
            ));
        }
        if !crate::dataset::SUPPORTED_SIZES.contains(&self.image_size) {
            return Err(Error::InvalidArgument(format!(
                "unsupported image size {}",
                self.image_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionStatus {
    Active,
    Solved,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trial {
    pub index: usize,
    pub per_image_seed: u64,
    pub true_label: ClassLabel,
    pub given_label: Option<ClassLabel>,
    pub correct: Option<bool>,
}

/// Raw 8-bit grayscale pixels, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerOutcome {
    pub correct: bool,
    pub true_label: ClassLabel,
    pub status: SessionStatus,
    /// Answered trials so far.
    pub trials: usize,
}

#[derive(Debug, Clone)]
pub struct TrialSession {
    id: String,
    spec: ProblemSpec,
    params: SessionParams,
    seed: u64,
    plan: Vec<ClassLabel>,
    trials: Vec<Trial>,
    consecutive: usize,
    status: SessionStatus,
}

/// `n` labels, as balanced as `n` allows, in random order.
fn balanced_plan(n: usize, rng: &mut impl Rng) -> Vec<ClassLabel> {
    let ones = n / 2 + (n % 2) * usize::from(rng.gen::<bool>());
    let mut plan: Vec<ClassLabel> = (0..n)
        .map(|i| if i < ones { ClassLabel::ONE } else { ClassLabel::ZERO })
        .collect();
    plan.shuffle(rng);
    plan
}

impl TrialSession {
    pub fn new(id: String, problem: ProblemId, params: SessionParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(2);
        Ok(Self {
            id,
            spec: ProblemSpec::original(problem),
            params,
            seed,
            plan: balanced_plan(params.max_trials, &mut rng),
            trials: Vec::new(),
            consecutive: 0,
            status: SessionStatus::Active,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn problem(&self) -> ProblemId {
        self.spec.id
    }

    pub fn params(&self) -> SessionParams {
        self.params
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn consecutive(&self) -> usize {
        self.consecutive
    }

    /// Answered trials, oldest first.
    pub fn history(&self) -> &[Trial] {
        let answered = self.trials.iter().take_while(|t| t.given_label.is_some()).count();
        &self.trials[..answered]
    }

    pub fn answered(&self) -> usize {
        self.history().len()
    }

    fn conflict(&self, reason: &str) -> Error {
        Error::SessionConflict {
            session: self.id.clone(),
            reason: reason.into(),
        }
    }

    fn pending(&self) -> Option<&Trial> {
        self.trials.last().filter(|t| t.given_label.is_none())
    }

    /// The open trial, opening a new one if the last was answered. Asking
    /// again before answering returns the same trial.
    pub fn next_trial(&mut self) -> Result<Trial> {
        if self.status != SessionStatus::Active {
            return Err(self.conflict("session is finished"));
        }
        if let Some(t) = self.pending() {
            return Ok(t.clone());
        }
        let index = self.trials.len();
        let true_label = self.plan[index];
        let trial = Trial {
            index,
            per_image_seed: per_image_seed(self.seed, Split::Test, true_label, index),
            true_label,
            given_label: None,
            correct: None,
        };
        self.trials.push(trial.clone());
        Ok(trial)
    }

    pub fn image(&self, trial: &Trial) -> Result<TrialImage> {
        let mut rng = ChaCha8Rng::seed_from_u64(trial.per_image_seed);
        let b = self
            .spec
            .sample(trial.true_label, &mut rng, self.params.image_size)?
            .render()?;
        Ok(TrialImage {
            width: b.width,
            height: b.height,
            pixels: b.pixels,
        })
    }

    pub fn answer(&mut self, label: ClassLabel) -> Result<AnswerOutcome> {
        if self.status != SessionStatus::Active {
            return Err(self.conflict("session is finished"));
        }
        let Some(trial) = self.trials.last_mut().filter(|t| t.given_label.is_none()) else {
            return Err(self.conflict("no open trial; it was already answered or never shown"));
        };
        let correct = label == trial.true_label;
        trial.given_label = Some(label);
        trial.correct = Some(correct);
        let true_label = trial.true_label;
        self.consecutive = if correct { self.consecutive + 1 } else { 0 };
        let trials = self.trials.len();
        if self.consecutive >= self.params.k_consecutive {
            self.status = SessionStatus::Solved;
        } else if trials >= self.params.max_trials {
            self.status = SessionStatus::Failed;
        }
        Ok(AnswerOutcome {
            correct,
            true_label,
            status: self.status,
            trials,
        })
    }
}

#[derive(Serialize)]
struct LogLine<'a> {
    session: &'a str,
    problem: ProblemId,
    trial: &'a Trial,
    status: SessionStatus,
}

/// All sessions of a running service. Each session sits behind its own
/// lock, so requests for one session are serialized while different
/// sessions proceed independently.
pub struct SessionRegistry {
    params: SessionParams,
    problems: Vec<ProblemId>,
    sessions: RwLock<HashMap<String, Arc<Mutex<TrialSession>>>>,
    rng: Mutex<ChaCha8Rng>,
    log: Option<Mutex<File>>,
}

impl SessionRegistry {
    /// `problems` are the ones sessions may be opened for.
    pub fn new(problems: Vec<ProblemId>, params: SessionParams, seed: u64) -> Result<Self> {
        params.validate()?;
        if problems.is_empty() {
            return Err(Error::InvalidArgument("bind at least one problem".into()));
        }
        Ok(Self {
            params,
            problems,
            sessions: RwLock::new(HashMap::new()),
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(seed)),
            log: None,
        })
    }

    /// Append every answered trial as a JSON line to `path`.
    pub fn with_log(mut self, path: &Path) -> Result<Self> {
        let f = OpenOptions::new().create(true).append(true).open(path)?;
        self.log = Some(Mutex::new(f));
        Ok(self)
    }

    pub fn params(&self) -> SessionParams {
        self.params
    }

    pub fn problems(&self) -> &[ProblemId] {
        &self.problems
    }

    pub fn create(&self, problem: ProblemId) -> Result<String> {
        if !self.problems.contains(&problem) {
            return Err(Error::InvalidArgument(format!(
                "problem {} is not served here",
                problem.get()
            )));
        }
        let (id, seed) = {
            let mut rng = self.rng.lock().expect("rng lock");
            (format!("{:016x}", rng.next_u64()), rng.next_u64())
        };
        let session = TrialSession::new(id.clone(), problem, self.params, seed)?;
        self.sessions
            .write()
            .expect("registry lock")
            .insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok(id)
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<TrialSession>>> {
        self.sessions
            .read()
            .expect("registry lock")
            .get(id)
            .cloned()
            .ok_or_else(|| Error::UnknownSession(id.to_string()))
    }

    /// Run `f` with exclusive access to one session.
    pub fn with_session<R>(&self, id: &str, f: impl FnOnce(&mut TrialSession) -> Result<R>) -> Result<R> {
        let session = self.get(id)?;
        let mut guard = session.lock().expect("session lock");
        f(&mut guard)
    }

    pub fn answer(&self, id: &str, label: ClassLabel) -> Result<AnswerOutcome> {
        self.with_session(id, |s| {
            let outcome = s.answer(label)?;
            if let Some(log) = &self.log {
                let line = LogLine {
                    session: s.id(),
                    problem: s.problem(),
                    trial: s.history().last().expect("just answered"),
                    status: outcome.status,
                };
                let mut f = log.lock().expect("log lock");
                serde_json::to_writer(&mut *f, &line)?;
                f.write_all(b"\n")?;
            }
            Ok(outcome)
        })
    }

    /// Finished sessions of one problem; active ones are not counted.
    pub fn cohort(&self, problem: ProblemId) -> HumanCohortStats {
        let sessions: Vec<_> = self.sessions.read().expect("registry lock").values().cloned().collect();
        let (mut solved, mut failed) = (0, 0);
        for s in sessions {
            let s = s.lock().expect("session lock");
            if s.problem() != problem {
                continue;
            }
            match s.status() {
                SessionStatus::Solved => solved += 1,
                SessionStatus::Failed => failed += 1,
                SessionStatus::Active => {}
            }
        }
        HumanCohortStats::new(solved, failed)
    }
}
