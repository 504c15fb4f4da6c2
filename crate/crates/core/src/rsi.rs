//! The Review-Satisfaction-Index: a reviewer checklist worth 50 points plus
//! productivity worth 50 points, totalled against 100 and read on a 0–10
//! scale. 6.5 is the pass benchmark; the pass check runs on the exact total
//! (display rounding to one decimal happens last, so the boundary is stable).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum RsiError {
    #[error("missing review category `{0}`")]
    MissingCategory(&'static str),
    #[error("{file}:{line}: malformed scorecard ({reason})")]
    MalformedScorecard {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("benchmark `{0}` is missing")]
    MissingBenchmarks(&'static str),
    #[error("benchmark `{0}` must be strictly positive")]
    InvalidBenchmark(&'static str),
    #[error("participant has no RSI history")]
    EmptyHistory,
    #[error("cannot read {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}

/// The eight code-review proforma categories, each scored 0..=5.
pub const CATEGORY_KEYS: [&str; 8] = [
    "implementation",
    "dependencies",
    "security",
    "logic_errors",
    "error_handling",
    "usability_accessibility",
    "performance",
    "readability",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryScores {
    pub implementation: u8,
    pub dependencies: u8,
    pub security: u8,
    pub logic_errors: u8,
    pub error_handling: u8,
    pub usability_accessibility: u8,
    pub performance: u8,
    pub readability: u8,
}

impl CategoryScores {
    /// Build from a key→score map; every category must be present and ≤ 5.
    pub fn from_map(map: &BTreeMap<String, u8>) -> Result<CategoryScores, RsiError> {
        let get = |key: &'static str| -> Result<u8, RsiError> {
            let v = *map.get(key).ok_or(RsiError::MissingCategory(key))?;
            if v > 5 {
                return Err(RsiError::MalformedScorecard {
                    file: "<map>".into(),
                    line: 0,
                    reason: format!("score.{key} is {v}, must be 0..=5"),
                });
            }
            Ok(v)
        };
        Ok(CategoryScores {
            implementation: get("implementation")?,
            dependencies: get("dependencies")?,
            security: get("security")?,
            logic_errors: get("logic_errors")?,
            error_handling: get("error_handling")?,
            usability_accessibility: get("usability_accessibility")?,
            performance: get("performance")?,
            readability: get("readability")?,
        })
    }

    pub fn uniform(score: u8) -> CategoryScores {
        CategoryScores {
            implementation: score,
            dependencies: score,
            security: score,
            logic_errors: score,
            error_handling: score,
            usability_accessibility: score,
            performance: score,
            readability: score,
        }
    }

    pub fn sum(&self) -> u32 {
        [
            self.implementation,
            self.dependencies,
            self.security,
            self.logic_errors,
            self.error_handling,
            self.usability_accessibility,
            self.performance,
            self.readability,
        ]
        .iter()
        .map(|&v| v as u32)
        .sum()
    }
}

/// Equal category weights: (Σ scores / 40) × 50, i.e. Σ × 1.25.
pub fn review_points(scores: &CategoryScores) -> f64 {
    scores.sum() as f64 * 1.25
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnippetUse {
    AppropriateSnippet,
    InappropriateSnippet,
    NoSnippetUsed,
}

impl std::str::FromStr for SnippetUse {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "appropriate" => Ok(SnippetUse::AppropriateSnippet),
            "inappropriate" => Ok(SnippetUse::InappropriateSnippet),
            "none" => Ok(SnippetUse::NoSnippetUsed),
            other => Err(format!(
                "unknown snippet_use `{other}` (want appropriate|inappropriate|none)"
            )),
        }
    }
}

/// One reviewer's scorecard for one contribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scorecard {
    pub contribution_id: String,
    pub reviewer_id: String,
    pub category_scores: CategoryScores,
    /// Reviewer-entered or computed via [`productivity_points`]; 0..=50.
    pub productivity_points: f64,
    pub snippet_use: SnippetUse,
    pub notes: String,
}

impl Scorecard {
    /// Parse the `.rsi` key/value file format.
    pub fn parse(text: &str, source_name: &str) -> Result<Scorecard, RsiError> {
        let bad = |line: usize, reason: String| RsiError::MalformedScorecard {
            file: source_name.to_string(),
            line,
            reason,
        };
        let mut contribution = None;
        let mut reviewer = None;
        let mut scores: BTreeMap<String, u8> = BTreeMap::new();
        let mut productivity: Option<f64> = None;
        let mut snippet_use: Option<SnippetUse> = None;
        let mut notes = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| bad(line_no, format!("expected `key: value`, got `{line}`")))?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "contribution" => contribution = Some(value.to_string()),
                "reviewer" => reviewer = Some(value.to_string()),
                "productivity" => {
                    let v: f64 = value
                        .parse()
                        .map_err(|e| bad(line_no, format!("productivity: {e}")))?;
                    if !(0.0..=50.0).contains(&v) {
                        return Err(bad(line_no, format!("productivity {v} outside 0..=50")));
                    }
                    productivity = Some(v);
                }
                "snippet_use" => {
                    snippet_use = Some(value.parse().map_err(|e: String| bad(line_no, e))?)
                }
                "notes" => notes = value.to_string(),
                k if k.starts_with("score.") => {
                    let cat = &k["score.".len()..];
                    if !CATEGORY_KEYS.contains(&cat) {
                        return Err(bad(line_no, format!("unknown category `{cat}`")));
                    }
                    let v: u8 = value
                        .parse()
                        .map_err(|e| bad(line_no, format!("score.{cat}: {e}")))?;
                    if v > 5 {
                        return Err(bad(line_no, format!("score.{cat} is {v}, must be 0..=5")));
                    }
                    scores.insert(cat.to_string(), v);
                }
                other => return Err(bad(line_no, format!("unknown field `{other}`"))),
            }
        }
        Ok(Scorecard {
            contribution_id: contribution
                .ok_or_else(|| bad(0, "missing field `contribution`".into()))?,
            reviewer_id: reviewer.ok_or_else(|| bad(0, "missing field `reviewer`".into()))?,
            category_scores: CategoryScores::from_map(&scores)?,
            productivity_points: productivity
                .ok_or_else(|| bad(0, "missing field `productivity`".into()))?,
            snippet_use: snippet_use.ok_or_else(|| bad(0, "missing field `snippet_use`".into()))?,
            notes,
        })
    }

    pub fn parse_file(path: &Path) -> Result<Scorecard, RsiError> {
        let text = std::fs::read_to_string(path).map_err(|source| RsiError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Scorecard::parse(&text, &path.display().to_string())
    }
}

/// Per-indicator targets used to turn raw metrics into productivity points.
/// All strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductivityBenchmarks {
    pub dt_per_sprint: f64,
    pub lc_per_sprint: f64,
    pub max_nested_block_depth: f64,
    pub max_wacc: f64,
    pub lead_time_days: f64,
}

impl ProductivityBenchmarks {
    pub fn validate(&self) -> Result<(), RsiError> {
        for (name, v) in [
            ("dt_per_sprint", self.dt_per_sprint),
            ("lc_per_sprint", self.lc_per_sprint),
            ("max_nested_block_depth", self.max_nested_block_depth),
            ("max_wacc", self.max_wacc),
            ("lead_time_days", self.lead_time_days),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(RsiError::InvalidBenchmark(name));
            }
        }
        Ok(())
    }

    /// Parse `benchmarks.cfg`: one `key: value` per line.
    pub fn parse(text: &str) -> Result<ProductivityBenchmarks, RsiError> {
        let mut map: BTreeMap<&str, f64> = BTreeMap::new();
        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((k, v)) = line.split_once(':') {
                if let Ok(parsed) = v.trim().parse::<f64>() {
                    map.insert(k.trim_matches(|c: char| c.is_whitespace()), parsed);
                }
            }
        }
        let get = |k: &'static str| map.get(k).copied().ok_or(RsiError::MissingBenchmarks(k));
        let bench = ProductivityBenchmarks {
            dt_per_sprint: get("dt_per_sprint")?,
            lc_per_sprint: get("lc_per_sprint")?,
            max_nested_block_depth: get("max_nested_block_depth")?,
            max_wacc: get("max_wacc")?,
            lead_time_days: get("lead_time_days")?,
        };
        bench.validate()?;
        Ok(bench)
    }

    pub fn parse_file(path: &Path) -> Result<ProductivityBenchmarks, RsiError> {
        let text = std::fs::read_to_string(path).map_err(|source| RsiError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        ProductivityBenchmarks::parse(&text)
    }
}

/// Raw indicator values for a contribution window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductivityInputs {
    /// Approved contributions in the window (throughput-type).
    pub dt: f64,
    /// Lines changed in the window (throughput-type).
    pub lc: f64,
    /// Max nested block depth observed (cost-type).
    pub max_nested_block_depth: f64,
    /// Tree-wide WACC (cost-type).
    pub wacc: f64,
    /// Mean lead time in working days (cost-type).
    pub lead_time_days: f64,
}

fn indicator_score(ratio: f64) -> f64 {
    (5.0 * ratio).clamp(0.0, 10.0)
}

/// Each indicator scores `5 × ratio` clamped to [0, 10] — `actual/target`
/// for throughput indicators, `target/actual` for cost indicators (a zero
/// cost scores the full 10). Points are the indicator sum, clamped to
/// [0, 50]; everything exactly on target yields 25.
pub fn productivity_points(
    actual: &ProductivityInputs,
    bench: &ProductivityBenchmarks,
) -> Result<f64, RsiError> {
    bench.validate()?;
    let cost = |value: f64, target: f64| {
        if value <= 0.0 {
            10.0
        } else {
            indicator_score(target / value)
        }
    };
    let scores = [
        indicator_score(actual.dt / bench.dt_per_sprint),
        indicator_score(actual.lc / bench.lc_per_sprint),
        cost(actual.max_nested_block_depth, bench.max_nested_block_depth),
        cost(actual.wacc, bench.max_wacc),
        cost(actual.lead_time_days, bench.lead_time_days),
    ];
    Ok(scores.iter().sum::<f64>().clamp(0.0, 50.0))
}

/// The pass benchmark on the 0–10 scale.
pub const RSI_BENCHMARK: f64 = 6.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RsiScore {
    pub review_points: f64,
    pub productivity_points: f64,
    pub total_100: f64,
    /// `total_100 / 10` rounded half-up to one decimal, for display.
    pub value_10: f64,
    pub pass: bool,
}

impl RsiScore {
    /// The exact 0–10 value before display rounding.
    pub fn value_10_unrounded(&self) -> f64 {
        self.total_100 / 10.0
    }
}

fn round_half_up_to_tenths(value_100: f64) -> f64 {
    (value_100 + 0.5).floor() / 10.0
}

/// Combine review and productivity points. The pass check compares the exact
/// total against 65 (= 6.5 × 10); rounding is presentation only, so a 64.9
/// total fails even though it displays as 6.5.
pub fn compute_rsi(card: &Scorecard) -> RsiScore {
    let review = review_points(&card.category_scores);
    score_from_points(review, card.productivity_points)
}

pub fn score_from_points(review_points: f64, productivity_points: f64) -> RsiScore {
    let total = review_points + productivity_points;
    RsiScore {
        review_points,
        productivity_points,
        total_100: total,
        value_10: round_half_up_to_tenths(total),
        pass: total >= RSI_BENCHMARK * 10.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Exceptional,
    Moderate,
    Underperformer,
}

impl Classification {
    pub fn recommendation(&self) -> &'static str {
        match self {
            Classification::Exceptional => {
                "recommend early production transition (ref: 14-week average)"
            }
            Classification::Moderate => "continue probation (ref: 18–24 weeks)",
            Classification::Underperformer => "review for non-development role or exit",
        }
    }
}

/// Probation classification thresholds; the defaults drive the standard
/// buckets but are configuration, not constants of nature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub exceptional_mean: f64,
    pub exceptional_pass_rate: f64,
    pub underperformer_mean: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            exceptional_mean: 8.5,
            exceptional_pass_rate: 0.9,
            underperformer_mean: RSI_BENCHMARK,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantSummary {
    pub participant_id: String,
    pub scorecards: usize,
    pub mean_rsi: f64,
    pub pass_rate: f64,
    /// Fraction of contributions backed by the snippet bank, when known.
    pub reliance_rate: Option<f64>,
    pub classification: Classification,
    pub recommendation: String,
}

/// Classify a participant over their score history: Exceptional needs both a
/// high mean and a high pass rate, Underperformer is a mean below the 6.5
/// benchmark, everything else is Moderate. Order-independent.
pub fn classify_participant(
    participant_id: &str,
    history: &[RsiScore],
    reliance_rate: Option<f64>,
    cfg: &ClassifyConfig,
) -> Result<ParticipantSummary, RsiError> {
    if history.is_empty() {
        return Err(RsiError::EmptyHistory);
    }
    // sum in sorted order so the mean is independent of history order
    let mut values: Vec<f64> = history.iter().map(|s| s.value_10).collect();
    values.sort_by(f64::total_cmp);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let pass_rate = history.iter().filter(|s| s.pass).count() as f64 / history.len() as f64;
    let classification = if mean >= cfg.exceptional_mean && pass_rate >= cfg.exceptional_pass_rate {
        Classification::Exceptional
    } else if mean < cfg.underperformer_mean {
        Classification::Underperformer
    } else {
        Classification::Moderate
    };
    Ok(ParticipantSummary {
        participant_id: participant_id.to_string(),
        scorecards: history.len(),
        mean_rsi: mean,
        pass_rate,
        reliance_rate,
        classification,
        recommendation: classification.recommendation().to_string(),
    })
}
