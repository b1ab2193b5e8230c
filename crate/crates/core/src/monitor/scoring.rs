use serde::{Deserialize, Serialize};

/// Recall weight of the takeover F-score.
pub const F_BETA: f64 = 3.0;

/// Takeover and violation timestamps in seconds, one entry per event.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TakeoverLabels {
    pub takeovers: Vec<f64>,
    pub violations: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TakeoverScore {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
}

/// A takeover is a true positive when a violation follows it within `window`
/// seconds; a violation is missed when no takeover precedes it within
/// `window` seconds. Empty denominators score 1 for precision and recall;
/// P = R = 0 scores F = 0.
pub fn score_takeovers(labels: &TakeoverLabels, window: f64) -> TakeoverScore {
    let within = |from: f64, to: f64| to >= from && to - from <= window;
    let tp = labels
        .takeovers
        .iter()
        .filter(|&&t| labels.violations.iter().any(|&v| within(t, v)))
        .count();
    let fp = labels.takeovers.len() - tp;
    let fn_ = labels
        .violations
        .iter()
        .filter(|&&v| !labels.takeovers.iter().any(|&t| within(t, v)))
        .count();
    let precision = if tp + fp == 0 { 1.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = if tp + fn_ == 0 { 1.0 } else { tp as f64 / (tp + fn_) as f64 };
    TakeoverScore {
        tp,
        fp,
        fn_,
        precision,
        recall,
        f_beta: f_beta(precision, recall, F_BETA),
    }
}

pub fn f_beta(precision: f64, recall: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    if denom == 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / denom
    }
}
