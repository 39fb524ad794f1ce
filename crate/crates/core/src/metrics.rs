//! Confusion matrices, per-class reports and micro-averaged ROC curves.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// `K×K` counts; rows are true classes, columns predicted classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        Self {
            classes,
            counts: vec![0; classes * classes],
        }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::Dimension("confusion matrix must be square".into()));
        }
        Ok(Self {
            classes: k,
            counts: rows.concat(),
        })
    }

    pub fn from_pairs(classes: usize, truth: &[usize], predicted: &[usize]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::Dimension(format!(
                "{} truths but {} predictions",
                truth.len(),
                predicted.len()
            )));
        }
        let mut cm = Self::new(classes);
        for (&t, &p) in truth.iter().zip(predicted) {
            cm.record(t, p)?;
        }
        Ok(cm)
    }

    pub fn record(&mut self, truth: usize, predicted: usize) -> Result<()> {
        if truth >= self.classes || predicted >= self.classes {
            return Err(Error::Parameter(format!(
                "pair ({truth}, {predicted}) outside {} classes",
                self.classes
            )));
        }
        self.counts[truth * self.classes + predicted] += 1;
        Ok(())
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.classes + predicted]
    }

    pub fn row_sum(&self, truth: usize) -> u64 {
        (0..self.classes).map(|p| self.get(truth, p)).sum()
    }

    pub fn col_sum(&self, predicted: usize) -> u64 {
        (0..self.classes).map(|t| self.get(t, predicted)).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes).map(|k| self.get(k, k)).sum()
    }

    /// Relabels so that old class `perm[i]` becomes new class `i`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let k = self.classes;
        let mut out = Self::new(k);
        for t in 0..k {
            for p in 0..k {
                out.counts[t * k + p] = self.get(perm[t], perm[p]);
            }
        }
        out
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.classes.max(1)).map(<[u64]>::to_vec).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Set when any of the three ratios had a zero denominator and was
    /// reported as 0.
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassReport {
    pub scores: Vec<ClassScore>,
}

impl ClassReport {
    pub fn macro_precision(&self) -> f64 {
        self.mean(|s| s.precision)
    }

    pub fn macro_recall(&self) -> f64 {
        self.mean(|s| s.recall)
    }

    pub fn macro_f1(&self) -> f64 {
        self.mean(|s| s.f1)
    }

    fn mean(&self, f: impl Fn(&ClassScore) -> f64) -> f64 {
        if self.scores.is_empty() {
            return 0.0;
        }
        self.scores.iter().map(f).sum::<f64>() / self.scores.len() as f64
    }
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

pub fn class_report(cm: &ConfusionMatrix) -> ClassReport {
    let scores = (0..cm.classes())
        .map(|k| {
            let tp = cm.get(k, k);
            let (precision, dp) = ratio(tp, cm.col_sum(k));
            let (recall, dr) = ratio(tp, cm.row_sum(k));
            let (f1, df) = if precision + recall > 0.0 {
                (2.0 * precision * recall / (precision + recall), false)
            } else {
                (0.0, true)
            };
            ClassScore {
                precision,
                recall,
                f1,
                support: cm.row_sum(k),
                degenerate: dp || dr || df,
            }
        })
        .collect();
    ClassReport { scores }
}

/// Fraction of samples on the diagonal (0 for an empty matrix).
pub fn accuracy(cm: &ConfusionMatrix) -> f64 {
    ratio(cm.trace(), cm.total()).0
}

#[derive(Clone, Debug, PartialEq)]
pub struct RocCurve {
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// Micro-averaged one-vs-rest ROC over every `(sample, class)` score.
pub fn roc_micro(scores: &[Vec<f64>], labels: &[usize]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} score rows but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let mut pool = Vec::new();
    for (row, &label) in scores.iter().zip(labels) {
        if label >= row.len() {
            return Err(Error::Parameter(format!(
                "label {label} outside {} score columns",
                row.len()
            )));
        }
        for (k, &s) in row.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::Parameter("non-finite score".into()));
            }
            pool.push((s, k == label));
        }
    }
    roc_binary(&pool)
}

/// ROC for pooled `(score, is_positive)` decisions. Thresholds sweep the
/// distinct scores from high to low; tied scores move together.
pub fn roc_binary(pool: &[(f64, bool)]) -> Result<RocCurve> {
    let positives = pool.iter().filter(|p| p.1).count() as u64;
    let negatives = pool.len() as u64 - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Data(
            "ROC needs at least one positive and one negative decision".into(),
        ));
    }
    let mut sorted = pool.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0u64, 0u64);
    // twice the area in units of one (positive, negative) cell
    let mut area2: u128 = 0;
    let mut i = 0;
    while i < sorted.len() {
        let (prev_tp, prev_fp) = (tp, fp);
        let s = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == s {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        area2 += u128::from(fp - prev_fp) * u128::from(tp + prev_tp);
        points.push((fp as f64 / negatives as f64, tp as f64 / positives as f64));
    }
    let auc = area2 as f64 / (2.0 * positives as f64 * negatives as f64);
    Ok(RocCurve { points, auc })
}

/// `class,precision,recall,f1,support` rows plus a `macro_avg` row.
pub fn metrics_csv(report: &ClassReport, class_names: &[String]) -> String {
    let mut out = String::from("class,precision,recall,f1,support\n");
    let mut support = 0;
    for (s, name) in report.scores.iter().zip(class_names) {
        support += s.support;
        let _ = writeln!(
            out,
            "{name},{:.6},{:.6},{:.6},{}",
            s.precision, s.recall, s.f1, s.support
        );
    }
    let _ = writeln!(
        out,
        "macro_avg,{:.6},{:.6},{:.6},{support}",
        report.macro_precision(),
        report.macro_recall(),
        report.macro_f1()
    );
    out
}

/// Header row of predicted-class names, then one labelled row per true class.
pub fn confusion_csv(cm: &ConfusionMatrix, class_names: &[String]) -> String {
    let mut out = String::from("true\\predicted");
    for name in class_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (t, name) in class_names.iter().enumerate() {
        out.push_str(name);
        for p in 0..cm.classes() {
            let _ = write!(out, ",{}", cm.get(t, p));
        }
        out.push('\n');
    }
    out
}

/// Inverse of [`confusion_csv`].
pub fn parse_confusion_csv(text: &str) -> Result<(Vec<String>, ConfusionMatrix)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Data("empty confusion csv".into()))?;
    let names: Vec<String> = header.split(',').skip(1).map(str::to_owned).collect();
    let mut rows = Vec::with_capacity(names.len());
    for (i, line) in lines.enumerate() {
        let mut cells = line.split(',');
        let label = cells.next().unwrap_or_default();
        if names.get(i).map(String::as_str) != Some(label) {
            return Err(Error::Data(format!("unexpected row label `{label}`")));
        }
        let row = cells
            .map(|c| {
                c.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Data(format!("bad count `{c}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.len() != names.len() {
        return Err(Error::Data(format!(
            "{} rows for {} classes",
            rows.len(),
            names.len()
        )));
    }
    Ok((names, ConfusionMatrix::from_rows(&rows)?))
}

/// `fpr,tpr` rows followed by `auc,<value>`.
pub fn roc_csv(curve: &RocCurve) -> String {
    let mut out = String::from("fpr,tpr\n");
    for (f, t) in &curve.points {
        let _ = writeln!(out, "{f:.6},{t:.6}");
    }
    let _ = writeln!(out, "auc,{:.6}", curve.auc);
    out
}
