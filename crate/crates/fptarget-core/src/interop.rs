//! Cross-reader genuine/imposter score statistics behind a pluggable matcher.
//!
//! An [`ImpressionSet`] holds one reader's captures of a target collection.
//! Scoring every enrollment image against every probe image yields genuine
//! scores (same target) and imposter scores (different targets); TAR and FAR
//! summarize them at an operating threshold. The built-in matcher is a
//! translation-searched normalized cross-correlation, good enough to
//! separate synthetic impressions; it makes no claim of biometric accuracy.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use thiserror::Error;

use crate::pattern::GrayscaleImage;

#[allow(unused_imports)]
use num_traits::Float;

/// Operating threshold of the scoring scale used by default in reports.
pub const DEFAULT_THRESHOLD: f64 = 49.0;
/// Documented alternative operating point; some commercial matchers sit
/// near this value at FAR = 0.01 %.
pub const SECONDARY_THRESHOLD: f64 = 33.0;

const MIN_OVERLAP_PX: i64 = 8;
const COARSE_RANGE_PX: i64 = 32;
const COARSE_STEP_PX: i64 = 4;
const REFINE_RANGE_PX: i64 = 3;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum MatchError {
    #[error("resolution mismatch: {a_ppi} ppi vs {b_ppi} ppi")]
    PpiMismatch { a_ppi: f64, b_ppi: f64 },
    #[error("matcher backend failed: {message}")]
    Backend { message: String },
}

#[derive(Debug, Error)]
pub enum InteropError {
    #[error("impression set '{reader_id}' is empty")]
    EmptySet { reader_id: String },
    #[error("duplicate impression in set '{reader_id}': target '{target_id}' index {index}")]
    DuplicateEntry { reader_id: String, target_id: String, index: u32 },
    #[error("duplicate reader id '{reader_id}'")]
    DuplicateReader { reader_id: String },
    #[error("no pairs to score after exclusions")]
    NoPairs,
    #[error("no genuine scores (sets share no target ids)")]
    EmptyGenuine,
    #[error("no imposter scores (sets need at least two targets)")]
    EmptyImposter,
    #[error("matcher failed on pair {enroll_target}/{enroll_index} vs {probe_target}/{probe_index}")]
    MatchFailed {
        enroll_target: String,
        enroll_index: u32,
        probe_target: String,
        probe_index: u32,
        #[source]
        source: MatchError,
    },
    #[error("non-finite score on pair {enroll_target}/{enroll_index} vs {probe_target}/{probe_index}")]
    NonFiniteScore {
        enroll_target: String,
        enroll_index: u32,
        probe_target: String,
        probe_index: u32,
    },
}

/// One captured impression of one target.
#[derive(Clone, Debug)]
pub struct Impression {
    pub target_id: String,
    pub index: u32,
    pub image: GrayscaleImage,
    /// Originating file, when the impression was loaded from disk. Two plan
    /// entries naming the same file are treated as the identical impression.
    pub source: Option<String>,
}

/// All impressions captured by one reader, sorted by (target_id, index).
#[derive(Clone, Debug)]
pub struct ImpressionSet {
    pub reader_id: String,
    entries: Vec<Impression>,
}

impl ImpressionSet {
    pub fn new(reader_id: &str, mut entries: Vec<Impression>) -> Result<Self, InteropError> {
        if entries.is_empty() {
            return Err(InteropError::EmptySet { reader_id: String::from(reader_id) });
        }
        entries.sort_by(|a, b| (&a.target_id, a.index).cmp(&(&b.target_id, b.index)));
        for pair in entries.windows(2) {
            if pair[0].target_id == pair[1].target_id && pair[0].index == pair[1].index {
                return Err(InteropError::DuplicateEntry {
                    reader_id: String::from(reader_id),
                    target_id: pair[0].target_id.clone(),
                    index: pair[0].index,
                });
            }
        }
        Ok(ImpressionSet { reader_id: String::from(reader_id), entries })
    }

    pub fn entries(&self) -> &[Impression] {
        &self.entries
    }
}

/// Scores any two impressions on a nonnegative similarity scale.
pub trait Matcher {
    fn score(&self, a: &Impression, b: &Impression) -> Result<f64, MatchError>;
}

/// One enrollment-probe pairing from a scoring plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairTask {
    pub enroll: usize,
    pub probe: usize,
    pub genuine: bool,
}

/// Enumerate every enrollment x probe pairing in deterministic lexicographic
/// order. Pairs whose two impressions name the same source file are the same
/// physical capture and are excluded unless `include_identical` is set.
pub fn pair_plan(
    enroll: &ImpressionSet,
    probe: &ImpressionSet,
    include_identical: bool,
) -> Vec<PairTask> {
    let mut plan = Vec::with_capacity(enroll.entries.len() * probe.entries.len());
    for (i, e) in enroll.entries.iter().enumerate() {
        for (j, p) in probe.entries.iter().enumerate() {
            if !include_identical {
                if let (Some(a), Some(b)) = (&e.source, &p.source) {
                    if a == b {
                        continue;
                    }
                }
            }
            plan.push(PairTask { enroll: i, probe: j, genuine: e.target_id == p.target_id });
        }
    }
    plan
}

/// Score a single planned pair, wrapping failures with the pair identity.
pub fn score_task(
    enroll: &ImpressionSet,
    probe: &ImpressionSet,
    task: PairTask,
    matcher: &dyn Matcher,
) -> Result<f64, InteropError> {
    let e = &enroll.entries[task.enroll];
    let p = &probe.entries[task.probe];
    let named = |source| InteropError::MatchFailed {
        enroll_target: e.target_id.clone(),
        enroll_index: e.index,
        probe_target: p.target_id.clone(),
        probe_index: p.index,
        source,
    };
    let score = matcher.score(e, p).map_err(named)?;
    if !score.is_finite() {
        return Err(InteropError::NonFiniteScore {
            enroll_target: e.target_id.clone(),
            enroll_index: e.index,
            probe_target: p.target_id.clone(),
            probe_index: p.index,
        });
    }
    Ok(score)
}

/// Genuine and imposter score lists from one enrollment/probe sweep, in plan
/// order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoreSets {
    pub genuine: Vec<f64>,
    pub imposter: Vec<f64>,
}

/// Score every enrollment image against every probe image.
pub fn score_pairs(
    enroll: &ImpressionSet,
    probe: &ImpressionSet,
    matcher: &dyn Matcher,
    include_identical: bool,
) -> Result<ScoreSets, InteropError> {
    let plan = pair_plan(enroll, probe, include_identical);
    if plan.is_empty() {
        return Err(InteropError::NoPairs);
    }
    let mut sets = ScoreSets::default();
    for task in plan {
        let score = score_task(enroll, probe, task, matcher)?;
        if task.genuine {
            sets.genuine.push(score);
        } else {
            sets.imposter.push(score);
        }
    }
    Ok(sets)
}

/// True accept rate and false accept rate at a threshold: the fractions of
/// genuine and imposter scores at or above it.
pub fn tar_far(genuine: &[f64], imposter: &[f64], threshold: f64) -> Result<(f64, f64), InteropError> {
    if genuine.is_empty() {
        return Err(InteropError::EmptyGenuine);
    }
    if imposter.is_empty() {
        return Err(InteropError::EmptyImposter);
    }
    let frac = |scores: &[f64]| {
        scores.iter().filter(|&&s| s >= threshold).count() as f64 / scores.len() as f64
    };
    Ok((frac(genuine), frac(imposter)))
}

/// One (enroll reader, probe reader) cell of the interoperability matrix.
#[derive(Clone, Debug)]
pub struct CellStats {
    pub enroll_reader: String,
    pub probe_reader: String,
    pub mean_genuine: f64,
    pub mean_imposter: f64,
    pub genuine: Vec<f64>,
    pub imposter: Vec<f64>,
    pub tar: f64,
    pub far: f64,
}

/// Full cross-reader matrix: cells in row-major order, enroll reader as the
/// row, probe reader as the column.
#[derive(Clone, Debug)]
pub struct ScoreMatrix {
    pub readers: Vec<String>,
    pub threshold: f64,
    pub cells: Vec<CellStats>,
}

impl ScoreMatrix {
    pub fn cell(&self, enroll: usize, probe: usize) -> &CellStats {
        &self.cells[enroll * self.readers.len() + probe]
    }
}

/// Evaluate every reader pair, including self-pairs, with one matcher.
pub fn evaluate_matrix(
    sets: &[ImpressionSet],
    matcher: &dyn Matcher,
    threshold: f64,
    include_identical: bool,
) -> Result<ScoreMatrix, InteropError> {
    for (i, a) in sets.iter().enumerate() {
        if sets[..i].iter().any(|b| b.reader_id == a.reader_id) {
            return Err(InteropError::DuplicateReader { reader_id: a.reader_id.clone() });
        }
    }
    let mut cells = Vec::with_capacity(sets.len() * sets.len());
    for enroll in sets {
        for probe in sets {
            let scores = score_pairs(enroll, probe, matcher, include_identical)?;
            if scores.genuine.is_empty() {
                return Err(InteropError::EmptyGenuine);
            }
            if scores.imposter.is_empty() {
                return Err(InteropError::EmptyImposter);
            }
            let (tar, far) = tar_far(&scores.genuine, &scores.imposter, threshold)?;
            // Sorted reduction keeps cell statistics independent of scoring
            // order, so transposed cells of a symmetric matcher agree exactly
            // and parallel executors can aggregate in completion order.
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

impl fmt::Display for ScoreMatrix {
    /// Aligned text grid: enroll readers as rows, probe readers as columns,
    /// four statistics per cell.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.readers.len();
        let cell_lines = |c: &CellStats| {
            [
                alloc::format!("muG {:.2}", c.mean_genuine),
                alloc::format!("muI {:.2}", c.mean_imposter),
                alloc::format!("TAR {:.2}%", 100.0 * c.tar),
                alloc::format!("FAR {:.2}%", 100.0 * c.far),
            ]
        };
        let mut widths: Vec<usize> = self.readers.iter().map(|r| r.len()).collect();
        for (k, cell) in self.cells.iter().enumerate() {
            let col = k % n;
            for line in cell_lines(cell) {
                widths[col] = widths[col].max(line.len());
            }
        }
        let head = "enroll \\ probe";
        let row_width = self.readers.iter().map(|r| r.len()).max().unwrap_or(0).max(head.len());

        writeln!(f, "threshold {}", self.threshold)?;
        write!(f, "{:row_width$}", head)?;
        for (r, w) in self.readers.iter().zip(&widths) {
            write!(f, "  {:w$}", r)?;
        }
        writeln!(f)?;
        for (row, enroll) in self.readers.iter().enumerate() {
            let lines: Vec<[String; 4]> =
                (0..n).map(|col| cell_lines(self.cell(row, col))).collect();
            for part in 0..4 {
                let label = if part == 0 { enroll.as_str() } else { "" };
                write!(f, "{:row_width$}", label)?;
                for (col, w) in widths.iter().enumerate() {
                    write!(f, "  {:w$}", lines[col][part])?;
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

/// Mean-removed pixel grid prepared for correlation.
struct Prepared {
    w: i64,
    h: i64,
    vals: Vec<f64>,
    sum_sq: f64,
}

impl Prepared {
    fn new(image: &GrayscaleImage) -> Self {
        let (w, h) = (image.width() as i64, image.height() as i64);
        let mut vals: Vec<f64> = image.pixels().iter().map(|&p| p as f64).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let mut sum_sq = 0.0;
        for v in &mut vals {
            *v -= mean;
            sum_sq += *v * *v;
        }
        Prepared { w, h, vals, sum_sq }
    }

    fn at(&self, x: i64, y: i64) -> f64 {
        self.vals[(y * self.w + x) as usize]
    }
}

/// Correlation of `a` against `b` shifted by (dx, dy), over the overlap, or
/// None when the overlap is too small or flat.
fn ncc_at(a: &Prepared, b: &Prepared, dx: i64, dy: i64) -> Option<f64> {
    let x0 = 0.max(dx);
    let x1 = a.w.min(b.w + dx);
    let y0 = 0.max(dy);
    let y1 = a.h.min(b.h + dy);
    if x1 - x0 < MIN_OVERLAP_PX || y1 - y0 < MIN_OVERLAP_PX {
        return None;
    }
    let (mut num, mut asq, mut bsq) = (0.0, 0.0, 0.0);
    for y in y0..y1 {
        for x in x0..x1 {
            let av = a.at(x, y);
            let bv = b.at(x - dx, y - dy);
            num += av * bv;
            asq += av * av;
            bsq += bv * bv;
        }
    }
    if asq <= 0.0 || bsq <= 0.0 {
        return None;
    }
    Some(num / (asq * bsq).sqrt())
}

/// Translation-searched normalized cross-correlation on [0, 1000].
///
/// The arguments are ordered canonically before searching, so the score is
/// exactly symmetric. A zero-variance image scores 0 against anything.
pub fn baseline_match(a: &GrayscaleImage, b: &GrayscaleImage) -> Result<f64, MatchError> {
    if a.ppi != b.ppi {
        return Err(MatchError::PpiMismatch { a_ppi: a.ppi, b_ppi: b.ppi });
    }
    let swap = (b.width(), b.height(), b.pixels()) < (a.width(), a.height(), a.pixels());
    let (first, second) = if swap { (b, a) } else { (a, b) };
    let pa = Prepared::new(first);
    let pb = Prepared::new(second);
    if pa.sum_sq <= 0.0 || pb.sum_sq <= 0.0 {
        return Ok(0.0);
    }

    let mut best = f64::NEG_INFINITY;
    let mut best_shift = (0i64, 0i64);
    let mut dy = -COARSE_RANGE_PX;
    while dy <= COARSE_RANGE_PX {
        let mut dx = -COARSE_RANGE_PX;
        while dx <= COARSE_RANGE_PX {
            if let Some(ncc) = ncc_at(&pa, &pb, dx, dy) {
                if ncc > best {
                    best = ncc;
                    best_shift = (dx, dy);
                }
            }
            dx += COARSE_STEP_PX;
        }
        dy += COARSE_STEP_PX;
    }
    for dy in best_shift.1 - REFINE_RANGE_PX..=best_shift.1 + REFINE_RANGE_PX {
        for dx in best_shift.0 - REFINE_RANGE_PX..=best_shift.0 + REFINE_RANGE_PX {
            if let Some(ncc) = ncc_at(&pa, &pb, dx, dy) {
                best = best.max(ncc);
            }
        }
    }
    if best.is_finite() {
        Ok(1000.0 * best.clamp(0.0, 1.0))
    } else {
        Ok(0.0)
    }
}

/// [`Matcher`] wrapper around [`baseline_match`].
#[derive(Clone, Copy, Debug, Default)]
pub struct BaselineMatcher;

impl Matcher for BaselineMatcher {
    fn score(&self, a: &Impression, b: &Impression) -> Result<f64, MatchError> {
        baseline_match(&a.image, &b.image)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{sine_grating, synth_impression, GratingKind, SplitMix64};
    use alloc::string::ToString;
    use alloc::vec;

    fn imp(target: &str, index: u32, image: GrayscaleImage) -> Impression {
        Impression { target_id: target.to_string(), index, image, source: None }
    }

    fn noise_image(w: u32, h: u32, seed: u64) -> GrayscaleImage {
        let mut rng = SplitMix64::new(seed);
        let pixels = (0..w as usize * h as usize)
            .map(|_| (rng.next_u64() % 256) as u8)
            .collect();
        GrayscaleImage::from_pixels(w, h, 500.0, pixels).unwrap()
    }

    /// Constant-score matcher for combinatorics tests.
    struct Fixed(f64);
    impl Matcher for Fixed {
        fn score(&self, _: &Impression, _: &Impression) -> Result<f64, MatchError> {
            Ok(self.0)
        }
    }

    #[test]
    fn identical_images_score_exactly_one_thousand() {
        let img = sine_grating(GratingKind::Vertical, 9.0, 64, 64, 500.0).unwrap();
        assert_eq!(baseline_match(&img, &img).unwrap(), 1000.0);
    }

    #[test]
    fn translation_search_recovers_a_shifted_copy() {
        let src = noise_image(96, 64, 5);
        let crop = |x0: u32| {
            let pixels = (0..64u32)
                .flat_map(|y| (0..64u32).map(move |x| (x, y)))
                .map(|(x, y)| src.get(x0 + x, y))
                .collect();
            GrayscaleImage::from_pixels(64, 64, 500.0, pixels).unwrap()
        };
        let a = crop(0);
        let b = crop(8);
        let score = baseline_match(&a, &b).unwrap();
        assert!(score > 900.0, "score {}", score);
    }

    #[test]
    fn score_is_exactly_symmetric() {
        let a = noise_image(64, 64, 11);
        let b = synth_impression(&a, 1.05, 8.0, 12).unwrap();
        let ab = baseline_match(&a, &b).unwrap();
        let ba = baseline_match(&b, &a).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn unrelated_noise_scores_low() {
        let grating = sine_grating(GratingKind::Vertical, 9.0, 64, 64, 500.0).unwrap();
        let noise = noise_image(64, 64, 99);
        let score = baseline_match(&grating, &noise).unwrap();
        assert!(score < 100.0, "score {}", score);
    }

    #[test]
    fn flat_images_score_zero_and_ppi_must_agree() {
        let flat = GrayscaleImage::new(64, 64, 500.0, 128).unwrap();
        let img = noise_image(64, 64, 3);
        assert_eq!(baseline_match(&flat, &img).unwrap(), 0.0);
        assert_eq!(baseline_match(&flat, &flat).unwrap(), 0.0);

        let other = GrayscaleImage::new(64, 64, 1000.0, 128).unwrap();
        assert!(matches!(
            baseline_match(&flat, &other),
            Err(MatchError::PpiMismatch { .. })
        ));
    }

    #[test]
    fn six_by_ten_sets_make_six_hundred_genuine_pairs() {
        let img = GrayscaleImage::new(8, 8, 500.0, 0).unwrap();
        let build = |reader: &str| {
            let entries = (0..6)
                .flat_map(|t| {
                    let img = img.clone();
                    (0..10).map(move |i| imp(&alloc::format!("t{}", t), i, img.clone()))
                })
                .collect();
            ImpressionSet::new(reader, entries).unwrap()
        };
        let enroll = build("r1");
        let probe = build("r2");
        let sets = score_pairs(&enroll, &probe, &Fixed(10.0), false).unwrap();
        assert_eq!(sets.genuine.len(), 600);
        assert_eq!(sets.imposter.len(), 3000);
        assert_eq!(
            sets.genuine.len() + sets.imposter.len(),
            enroll.entries().len() * probe.entries().len()
        );
    }

    #[test]
    fn identical_sources_are_excluded_unless_asked() {
        let img = GrayscaleImage::new(8, 8, 500.0, 0).unwrap();
        let entries = |reader: &str| {
            (0..4u32)
                .map(|i| {
                    let mut e = imp("t0", i, img.clone());
                    e.source = Some(alloc::format!("{}/t0/{}.pgm", reader, i));
                    e
                })
                .collect::<Vec<_>>()
        };
        let set = ImpressionSet::new("r1", entries("r1")).unwrap();
        let plan = pair_plan(&set, &set, false);
        assert_eq!(plan.len(), 12, "the four self-pairs drop out");
        let plan = pair_plan(&set, &set, true);
        assert_eq!(plan.len(), 16);

        // Distinct files, same reader: nothing is excluded.
        let other = ImpressionSet::new("r2", entries("r2")).unwrap();
        assert_eq!(pair_plan(&set, &other, false).len(), 16);
    }

    #[test]
    fn in_memory_self_pairs_hit_the_matcher_maximum() {
        let mut entries = Vec::new();
        for t in 0..2 {
            let base = sine_grating(
                if t == 0 { GratingKind::Vertical } else { GratingKind::Horizontal },
                8.0 + t as f64,
                64,
                64,
                500.0,
            )
            .unwrap();
            for i in 0..2u32 {
                entries.push(imp(
                    &alloc::format!("t{}", t),
                    i,
                    synth_impression(&base, 1.0, 4.0, (t * 10 + i as usize) as u64).unwrap(),
                ));
            }
        }
        let set = ImpressionSet::new("r", entries).unwrap();
        let sets = score_pairs(&set, &set, &BaselineMatcher, false).unwrap();
        // Four of the genuine pairs compare an impression with itself.
        let perfect = sets.genuine.iter().filter(|&&s| s == 1000.0).count();
        assert!(perfect >= 4, "self-pairs {}", perfect);
    }

    #[test]
    fn swapping_roles_with_a_symmetric_matcher_permutes_the_scores() {
        let mut entries_a = Vec::new();
        let mut entries_b = Vec::new();
        for t in 0..2 {
            let base = sine_grating(GratingKind::Circular, 7.0 + 2.0 * t as f64, 48, 48, 500.0)
                .unwrap();
            for i in 0..2u32 {
                let seed = (t * 100 + i as usize) as u64;
                entries_a.push(imp(
                    &alloc::format!("t{}", t),
                    i,
                    synth_impression(&base, 0.98, 6.0, seed).unwrap(),
                ));
                entries_b.push(imp(
                    &alloc::format!("t{}", t),
                    i,
                    synth_impression(&base, 1.02, 6.0, seed + 7).unwrap(),
                ));
            }
        }
        let a = ImpressionSet::new("a", entries_a).unwrap();
        let b = ImpressionSet::new("b", entries_b).unwrap();
        let ab = score_pairs(&a, &b, &BaselineMatcher, false).unwrap();
        let ba = score_pairs(&b, &a, &BaselineMatcher, false).unwrap();
        let sorted = |mut v: Vec<f64>| {
            v.sort_by(|x, y| x.partial_cmp(y).unwrap());
            v
        };
        assert_eq!(sorted(ab.genuine), sorted(ba.genuine));
        assert_eq!(sorted(ab.imposter), sorted(ba.imposter));
    }

    #[test]
    fn synthetic_targets_separate_cleanly_at_low_noise() {
        let kinds = [GratingKind::Vertical, GratingKind::Horizontal, GratingKind::Circular];
        let build = |reader: &str, scale: f64| {
            let mut entries = Vec::new();
            for (t, &kind) in kinds.iter().enumerate() {
                let base = sine_grating(kind, 9.0 + t as f64, 64, 64, 500.0).unwrap();
                for i in 0..3u32 {
                    let seed = reader.len() as u64 * 1000 + t as u64 * 10 + i as u64;
                    entries.push(imp(
                        &alloc::format!("t{}", t),
                        i,
                        synth_impression(&base, scale, 10.0, seed).unwrap(),
                    ));
                }
            }
            ImpressionSet::new(reader, entries).unwrap()
        };
        let a = build("aa", 0.99);
        let b = build("bbb", 1.01);
        let sets = score_pairs(&a, &b, &BaselineMatcher, false).unwrap();
        let min_genuine = sets.genuine.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_imposter = sets.imposter.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(
            min_genuine > max_imposter,
            "min genuine {} vs max imposter {}",
            min_genuine,
            max_imposter
        );
    }

    #[test]
    fn tar_far_counts_by_brute_force() {
        let (tar, far) = tar_far(&[100.0, 50.0, 40.0], &[10.0, 49.0], 49.0).unwrap();
        assert_eq!(tar, 2.0 / 3.0);
        assert_eq!(far, 1.0 / 2.0);

        let (tar, far) = tar_far(&[1.0], &[0.5], f64::NEG_INFINITY).unwrap();
        assert_eq!((tar, far), (1.0, 1.0));

        let (_, far) = tar_far(&[60.0], &[1.0, 2.0, 3.0], 49.0).unwrap();
        assert_eq!(far, 0.0);

        assert!(matches!(tar_far(&[], &[1.0], 0.0), Err(InteropError::EmptyGenuine)));
        assert!(matches!(tar_far(&[1.0], &[], 0.0), Err(InteropError::EmptyImposter)));
    }

    #[test]
    fn tar_and_far_never_increase_with_threshold() {
        let mut rng = SplitMix64::new(8);
        let scores: Vec<f64> = (0..50).map(|_| (rng.next_u64() % 1000) as f64).collect();
        let (genuine, imposter) = scores.split_at(20);
        let mut prev = (1.0f64, 1.0f64);
        for t in 0..100 {
            let now = tar_far(genuine, imposter, t as f64 * 10.0).unwrap();
            assert!(now.0 <= prev.0 && now.1 <= prev.1, "threshold {}", t);
            prev = now;
        }
    }

    #[test]
    fn matrix_is_symmetric_for_a_symmetric_matcher() {
        let img = |seed| noise_image(32, 32, seed);
        let build = |reader: &str, s0: u64| {
            ImpressionSet::new(
                reader,
                vec![
                    imp("t0", 0, img(s0)),
                    imp("t0", 1, img(s0 + 1)),
                    imp("t1", 0, img(s0 + 2)),
                    imp("t1", 1, img(s0 + 3)),
                ],
            )
            .unwrap()
        };
        let sets = [build("r1", 100), build("r2", 200)];
        let matrix = evaluate_matrix(&sets, &BaselineMatcher, DEFAULT_THRESHOLD, false).unwrap();
        assert_eq!(matrix.cells.len(), 4);
        let (ab, ba) = (matrix.cell(0, 1), matrix.cell(1, 0));
        assert_eq!(ab.mean_genuine, ba.mean_genuine);
        assert_eq!(ab.mean_imposter, ba.mean_imposter);
        for cell in &matrix.cells {
            assert!((0.0..=1.0).contains(&cell.tar));
            assert!((0.0..=1.0).contains(&cell.far));
            assert_eq!(cell.genuine.len(), 8);
            assert_eq!(cell.imposter.len(), 8);
        }
        let text = matrix.to_string();
        assert!(text.contains("r1") && text.contains("muG") && text.contains("FAR"));
    }

    #[test]
    fn set_construction_enforces_the_unique_triple() {
        let img = GrayscaleImage::new(8, 8, 500.0, 0).unwrap();
        let dup = vec![imp("t0", 0, img.clone()), imp("t0", 0, img.clone())];
        assert!(matches!(
            ImpressionSet::new("r", dup),
            Err(InteropError::DuplicateEntry { .. })
        ));
        assert!(matches!(
            ImpressionSet::new("r", Vec::new()),
            Err(InteropError::EmptySet { .. })
        ));

        let set = ImpressionSet::new(
            "r",
            vec![imp("t1", 1, img.clone()), imp("t0", 2, img.clone()), imp("t0", 0, img)],
        )
        .unwrap();
        let order: Vec<(&str, u32)> =
            set.entries().iter().map(|e| (e.target_id.as_str(), e.index)).collect();
        assert_eq!(order, vec![("t0", 0), ("t0", 2), ("t1", 1)]);
    }

    #[test]
    fn failures_name_the_offending_pair() {
        struct Broken;
        impl Matcher for Broken {
            fn score(&self, _: &Impression, _: &Impression) -> Result<f64, MatchError> {
                Err(MatchError::Backend { message: "boom".to_string() })
            }
        }
        let img = GrayscaleImage::new(8, 8, 500.0, 0).unwrap();
        let set = ImpressionSet::new("r", vec![imp("t7", 3, img)]).unwrap();
        let err = score_pairs(&set, &set, &Broken, true).unwrap_err();
        match err {
            InteropError::MatchFailed { enroll_target, probe_index, .. } => {
                assert_eq!(enroll_target, "t7");
                assert_eq!(probe_index, 3);
            }
            other => panic!("unexpected error {:?}", other),
        }

        struct Nan;
        impl Matcher for Nan {
            fn score(&self, _: &Impression, _: &Impression) -> Result<f64, MatchError> {
                Ok(f64::NAN)
            }
        }
        let img = GrayscaleImage::new(8, 8, 500.0, 0).unwrap();
        let set = ImpressionSet::new("r", vec![imp("t0", 0, img)]).unwrap();
        assert!(matches!(
            score_pairs(&set, &set, &Nan, true),
            Err(InteropError::NonFiniteScore { .. })
        ));
    }
}
