//! Report files: run manifest, per-episode traces, score table and CV curves.
//!
//! Files carry no wall-clock data so identical inputs give identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::cv::TrajectoryCv;
use super::{EpisodeResult, HarnessError};
use crate::agents::Usage;
use crate::world::Difficulty;

#[derive(Serialize)]
struct ManifestEpisode<'a> {
    layout: &'a str,
    difficulty: Difficulty,
    seed: u64,
    policy: &'a str,
    final_value: i64,
    normalized_score: Option<f64>,
    invalid_actions: u32,
    days: u32,
    usage: Usage,
    trace: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    standard_deviation: &'static str,
    episodes: Vec<ManifestEpisode<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cv: Option<&'a TrajectoryCv>,
}

fn trace_name(i: usize, r: &EpisodeResult) -> String {
    format!("traces/{i:03}-{}-{}-{}.jsonl", r.layout, r.difficulty, r.seed)
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn score_cell(v: Option<f64>) -> String {
    v.map(|s| format!("{s:.2}")).unwrap_or_default()
}

/// The score table: one row per episode, then mean and population std rows per
/// (layout, difficulty, policy) group.
pub fn scores_csv(results: &[EpisodeResult]) -> String {
    let mut out = String::from("layout,difficulty,policy,seed,final_value,normalized_score\n");
    let mut groups: BTreeMap<(&str, Difficulty, &str), Vec<&EpisodeResult>> = BTreeMap::new();
    for r in results {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.layout,
            r.difficulty,
            r.policy,
            r.seed,
            r.final_value,
            score_cell(r.normalized_score)
        );
        groups.entry((&r.layout, r.difficulty, &r.policy)).or_default().push(r);
    }
    for ((layout, difficulty, policy), rs) in groups {
        let values: Vec<f64> = rs.iter().map(|r| r.final_value as f64).collect();
        let (vm, vs) = mean_std(&values);
        let scores: Option<Vec<f64>> = rs.iter().map(|r| r.normalized_score).collect();
        let (sm, ss) = match scores {
            Some(s) => {
                let (m, d) = mean_std(&s);
                (Some(m), Some(d))
            }
            None => (None, None),
        };
        let _ = writeln!(out, "{layout},{difficulty},{policy},mean,{vm:.2},{}", score_cell(sm));
        let _ = writeln!(out, "{layout},{difficulty},{policy},std,{vs:.2},{}", score_cell(ss));
    }
    out
}

pub fn cv_csv(cv: &TrajectoryCv) -> String {
    let mut out = String::from("day,revenue_cv,money_cv,value_cv,mean_revenue,mean_value,mean_guests\n");
    for d in &cv.days {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.2},{:.2},{:.2}",
            d.day, d.cv.revenue, d.cv.money, d.cv.value, d.mean_revenue, d.mean_value, d.mean_guests
        );
    }
    out
}

/// Writes `manifest.json`, `traces/`, `scores.csv` and, when given, `cv.csv`.
pub fn emit_report(dir: &Path, results: &[EpisodeResult], cv: Option<&TrajectoryCv>) -> Result<(), HarnessError> {
    fs::create_dir_all(dir.join("traces"))?;
    let mut episodes = Vec::with_capacity(results.len());
    for (i, r) in results.iter().enumerate() {
        let name = trace_name(i, r);
        fs::write(dir.join(&name), &r.trace)?;
        episodes.push(ManifestEpisode {
            layout: &r.layout,
            difficulty: r.difficulty,
            seed: r.seed,
            policy: &r.policy,
            final_value: r.final_value,
            normalized_score: r.normalized_score,
            invalid_actions: r.invalid_actions,
            days: r.days,
            usage: r.usage,
            trace: name,
        });
    }
    let manifest = Manifest { standard_deviation: "population", episodes, cv };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(dir.join("manifest.json"), text)?;
    if !results.is_empty() {
        fs::write(dir.join("scores.csv"), scores_csv(results))?;
    }
    if let Some(cv) = cv {
        fs::write(dir.join("cv.csv"), cv_csv(cv))?;
    }
    Ok(())
}
