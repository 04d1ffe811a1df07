//! External matcher processes and multi-worker pair scoring.
//!
//! A command matcher wraps any executable that takes two image paths and
//! prints one similarity score on stdout. The harness never trusts it:
//! non-zero exits, unparsable output, and hangs all surface as errors naming
//! the offending pair.

use std::io::Read;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use fptarget_core::interop::{
    pair_plan, score_task, tar_far, CellStats, Impression, ImpressionSet, InteropError,
    MatchError, Matcher, ScoreMatrix, ScoreSets,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("matcher command is empty")]
    EmptyCommand,
    #[error("failed to spawn '{program}': {source}")]
    Spawn {
        program: String,
        #[source]
        source: std::io::Error,
    },
    #[error("matcher exited with {status}: {stderr}")]
    NonZeroExit { status: String, stderr: String },
    #[error("matcher timed out after {}.{:03} s", timeout.as_secs(), timeout.subsec_millis())]
    Timeout { timeout: Duration },
    #[error("matcher printed {output:?}, expected a single decimal score")]
    Unparsable { output: String },
}

/// A matcher backed by a subprocess.
///
/// The command template is split on whitespace; `{a}` and `{b}` inside any
/// token are replaced by the two image paths. A template without placeholders
/// gets the paths appended as two extra arguments.
#[derive(Clone, Debug)]
pub struct CommandMatcher {
    argv: Vec<String>,
    timeout: Duration,
}

impl CommandMatcher {
    pub fn new(template: &str, timeout: Duration) -> Result<Self, CommandError> {
        let argv: Vec<String> = template.split_whitespace().map(String::from).collect();
        if argv.is_empty() {
            return Err(CommandError::EmptyCommand);
        }
        Ok(CommandMatcher { argv, timeout })
    }

    fn argv_for(&self, path_a: &str, path_b: &str) -> Vec<String> {
        let mut argv: Vec<String> = self
            .argv
            .iter()
            .map(|tok| tok.replace("{a}", path_a).replace("{b}", path_b))
            .collect();
        if !self.argv.iter().any(|tok| tok.contains("{a}") || tok.contains("{b}")) {
            argv.push(path_a.to_string());
            argv.push(path_b.to_string());
        }
        argv
    }

    /// Run the matcher on two image files and parse its score.
    pub fn run(&self, path_a: &str, path_b: &str) -> Result<f64, CommandError> {
        let argv = self.argv_for(path_a, path_b);
        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|source| CommandError::Spawn { program: argv[0].clone(), source })?;

        // Drain the pipes on threads so a chatty matcher can never deadlock
        // against a full pipe while we poll for exit.
        let mut stdout_pipe = child.stdout.take().expect("stdout was piped");
        let mut stderr_pipe = child.stderr.take().expect("stderr was piped");
        let out_thread = std::thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = stdout_pipe.read_to_end(&mut buf);
            buf
        });
        let err_thread = std::thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = stderr_pipe.read_to_end(&mut buf);
            buf
        });

        let deadline = Instant::now() + self.timeout;
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) => {
                    if Instant::now() >= deadline {
                        let _ = child.kill();
                        let _ = child.wait();
                        // Deliberately not joining the reader threads: a
                        // grandchild that inherited the pipes can hold them
                        // open past the kill, and the threads exit on their
                        // own once every writer is gone.
                        return Err(CommandError::Timeout { timeout: self.timeout });
                    }
                    std::thread::sleep(Duration::from_millis(5));
                }
                Err(source) => {
                    return Err(CommandError::Spawn { program: argv[0].clone(), source })
                }
            }
        };

        let stdout = out_thread.join().unwrap_or_default();
        let stderr = err_thread.join().unwrap_or_default();
        if !status.success() {
            return Err(CommandError::NonZeroExit {
                status: status.to_string(),
                stderr: String::from_utf8_lossy(&stderr).trim().to_string(),
            });
        }
        let text = String::from_utf8_lossy(&stdout);
        let trimmed = text.trim();
        trimmed
            .parse::<f64>()
            .map_err(|_| CommandError::Unparsable { output: trimmed.to_string() })
    }
}

/// [`Matcher`] adapter: scores impressions through their backing files.
/// In-memory impressions (no source path) cannot be matched externally.
#[derive(Clone, Debug)]
pub struct ExternalMatcher {
    command: CommandMatcher,
}

impl ExternalMatcher {
    pub fn new(template: &str, timeout: Duration) -> Result<Self, CommandError> {
        Ok(ExternalMatcher { command: CommandMatcher::new(template, timeout)? })
    }
}

impl Matcher for ExternalMatcher {
    fn score(&self, a: &Impression, b: &Impression) -> Result<f64, MatchError> {
        let path = |imp: &Impression| {
            imp.source.clone().ok_or_else(|| MatchError::Backend {
                message: format!(
                    "impression {}/{} has no backing file for an external matcher",
                    imp.target_id, imp.index
                ),
            })
        };
        let (pa, pb) = (path(a)?, path(b)?);
        self.command
            .run(&pa, &pb)
            .map_err(|e| MatchError::Backend { message: e.to_string() })
    }
}

/// [`score_pairs`](fptarget_core::interop::score_pairs) across `workers`
/// threads. The plan is split into contiguous chunks; results are merged back
/// in plan order, so output and error selection are independent of scheduling.
pub fn score_pairs_parallel<M: Matcher + Sync>(
    enroll: &ImpressionSet,
    probe: &ImpressionSet,
    matcher: &M,
    include_identical: bool,
    workers: usize,
) -> Result<ScoreSets, InteropError> {
    let plan = pair_plan(enroll, probe, include_identical);
    if plan.is_empty() {
        return Err(InteropError::NoPairs);
    }
    let workers = workers.max(1).min(plan.len());

    let mut slots: Vec<Option<Result<f64, InteropError>>> = Vec::new();
    slots.resize_with(plan.len(), || None);
    let chunk = plan.len().div_ceil(workers);
    std::thread::scope(|scope| {
        for (tasks, out) in plan.chunks(chunk).zip(slots.chunks_mut(chunk)) {
            scope.spawn(move || {
                for (task, slot) in tasks.iter().zip(out.iter_mut()) {
                    let result = score_task(enroll, probe, *task, matcher);
                    let failed = result.is_err();
                    *slot = Some(result);
                    // An error ends this chunk; the merge below reaches it
                    // before any slot left unfilled behind it.
                    if failed {
                        break;
                    }
                }
            });
        }
    });

    let mut sets = ScoreSets::default();
    for (task, slot) in plan.iter().zip(slots) {
        let score = slot.expect("merge cannot pass an error, so this slot was filled")?;
        if task.genuine {
            sets.genuine.push(score);
        } else {
            sets.imposter.push(score);
        }
    }
    Ok(sets)
}

/// [`evaluate_matrix`](fptarget_core::interop::evaluate_matrix) with
/// multi-worker pair scoring inside each cell. Cell statistics use the same
/// sorted reduction as the sequential version, so the two agree exactly.
pub fn evaluate_matrix_parallel<M: Matcher + Sync>(
    sets: &[ImpressionSet],
    matcher: &M,
    threshold: f64,
    include_identical: bool,
    workers: usize,
) -> Result<ScoreMatrix, InteropError> {
    for (i, a) in sets.iter().enumerate() {
        if sets[..i].iter().any(|b| b.reader_id == a.reader_id) {
            return Err(InteropError::DuplicateReader { reader_id: a.reader_id.clone() });
        }
    }
    let mut cells = Vec::with_capacity(sets.len() * sets.len());
    for enroll in sets {
        for probe in sets {
            let scores =
                score_pairs_parallel(enroll, probe, matcher, include_identical, workers)?;
            if scores.genuine.is_empty() {
                return Err(InteropError::EmptyGenuine);
            }
            if scores.imposter.is_empty() {
                return Err(InteropError::EmptyImposter);
            }
            let (tar, far) = tar_far(&scores.genuine, &scores.imposter, threshold)?;
            let mean = |s: &[f64]| {
                let mut sorted = s.to_vec();
                sorted.sort_by(f64::total_cmp);
                sorted.iter().sum::<f64>() / sorted.len() as f64
            };
            cells.push(CellStats {
                enroll_reader: enroll.reader_id.clone(),
                probe_reader: probe.reader_id.clone(),
                mean_genuine: mean(&scores.genuine),
                mean_imposter: mean(&scores.imposter),
                genuine: scores.genuine,
                imposter: scores.imposter,
                tar,
                far,
            });
        }
    }
    Ok(ScoreMatrix {
        readers: sets.iter().map(|s| s.reader_id.clone()).collect(),
        threshold,
        cells,
    })
}
