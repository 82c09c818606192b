use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::cv::DetectionStats;
use crate::error::{Error, Result};
use crate::simulator::GestureKind;

const CORNER: &str = "true\\pred";
const NA: &str = "NA";

/// 5 x 5 gesture confusion counts (rows true, columns predicted) in
/// [`GestureKind::GESTURES`] order. Gestures predicted as `NoGesture` are
/// kept in `rejected`; `NoGesture` ground truth is not tallied here.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 5]; 5],
    pub rejected: [u64; 5],
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, truth: GestureKind, predicted: GestureKind) {
        let Some(t) = truth.class_index() else { return };
        match predicted.class_index() {
            Some(p) => self.counts[t][p] += 1,
            None => self.rejected[t] += 1,
        }
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for i in 0..5 {
            for j in 0..5 {
                self.counts[i][j] += other.counts[i][j];
            }
            self.rejected[i] += other.rejected[i];
        }
    }

    pub fn row_total(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn total(&self) -> u64 {
        (0..5).map(|i| self.row_total(i) + self.rejected[i]).sum()
    }

    /// Row-normalized grid; rows without samples are `None`.
    pub fn normalized(&self) -> Vec<Vec<Option<f64>>> {
        (0..5)
            .map(|i| {
                let n = self.row_total(i);
                (0..5).map(|j| (n > 0).then(|| self.counts[i][j] as f64 / n as f64)).collect()
            })
            .collect()
    }

    /// Diagonal of the normalized grid.
    pub fn recall(&self, i: usize) -> Option<f64> {
        let n = self.row_total(i);
        (n > 0).then(|| self.counts[i][i] as f64 / n as f64)
    }

    /// Correct predictions over every example of the class, rejections included.
    pub fn end_to_end_recall(&self, i: usize) -> Option<f64> {
        let n = self.row_total(i) + self.rejected[i];
        (n > 0).then(|| self.counts[i][i] as f64 / n as f64)
    }

    pub fn precision(&self, j: usize) -> Option<f64> {
        let n: u64 = (0..5).map(|i| self.counts[i][j]).sum();
        (n > 0).then(|| self.counts[j][j] as f64 / n as f64)
    }

    /// Mean of the normalized diagonal over classes that have samples.
    pub fn average_accuracy(&self) -> Option<f64> {
        let diag: Vec<f64> = (0..5).filter_map(|i| self.recall(i)).collect();
        (!diag.is_empty()).then(|| diag.iter().sum::<f64>() / diag.len() as f64)
    }

    pub fn to_normalized_matrix(&self) -> NormalizedMatrix {
        NormalizedMatrix { labels: labels(), rows: self.normalized() }
    }

    pub fn write_counts_csv(&self, path: &Path) -> Result<()> {
        let mut s = format!("{CORNER},{},rejected\n", labels().join(","));
        for (i, label) in labels().iter().enumerate() {
            let cells: Vec<String> = self.counts[i].iter().map(u64::to_string).collect();
            writeln!(s, "{label},{},{}", cells.join(","), self.rejected[i]).expect("write to string");
        }
        fs::write(path, s)?;
        Ok(())
    }

    pub fn read_counts_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::MalformedData("empty counts file".into()))?;
        let expected = format!("{CORNER},{},rejected", labels().join(","));
        if header.trim() != expected {
            return Err(Error::MalformedData(format!("unexpected header '{header}'")));
        }
        let mut cm = Self::new();
        for (i, label) in labels().iter().enumerate() {
            let line = lines.next().ok_or_else(|| Error::MalformedData("missing confusion row".into()))?;
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 7 || cells[0] != label {
                return Err(Error::MalformedData(format!("bad confusion row '{line}'")));
            }
            let parse = |c: &str| c.trim().parse::<u64>().map_err(|e| Error::MalformedData(format!("{c}: {e}")));
            for j in 0..5 {
                cm.counts[i][j] = parse(cells[j + 1])?;
            }
            cm.rejected[i] = parse(cells[6])?;
        }
        Ok(cm)
    }
}

fn labels() -> Vec<String> {
    GestureKind::GESTURES.iter().map(|g| g.label().to_string()).collect()
}

/// Labelled, row-normalized matrix as stored in `confusion.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedMatrix {
    pub labels: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl NormalizedMatrix {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{CORNER},{}\n", self.labels.join(","));
        for (label, row) in self.labels.iter().zip(&self.rows) {
            let cells: Vec<String> = row.iter().map(|v| v.map_or_else(|| NA.to_string(), |x| x.to_string())).collect();
            writeln!(s, "{label},{}", cells.join(",")).expect("write to string");
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::MalformedData("empty confusion file".into()))?;
        let labels: Vec<String> = header.split(',').skip(1).map(str::to_string).collect();
        let rows = lines
            .map(|line| {
                let cells: Vec<&str> = line.split(',').skip(1).collect();
                if cells.len() != labels.len() {
                    return Err(Error::MalformedData(format!("bad confusion row '{line}'")));
                }
                cells
                    .iter()
                    .map(|c| match c.trim() {
                        NA => Ok(None),
                        v => v.parse::<f64>().map(Some).map_err(|e| Error::MalformedData(format!("{v}: {e}"))),
                    })
                    .collect()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { labels, rows })
    }
}

#[derive(Debug, Serialize)]
struct ClassMetrics {
    class: &'static str,
    precision: Option<f64>,
    recall: Option<f64>,
    end_to_end_recall: Option<f64>,
    support: u64,
    rejected: u64,
}

#[derive(Debug, Serialize)]
struct Metrics {
    average_accuracy: Option<f64>,
    per_class: Vec<ClassMetrics>,
    false_accept_rate: Option<f64>,
    false_reject_rate: Option<f64>,
    detection: Option<DetectionStats>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), |x| format!("{x:.4}"))
}

/// Writes `confusion.csv`, `confusion_counts.csv`, `per_class.csv`,
/// `metrics.json` and `table.txt` into `dir`.
pub fn write_report(cm: &ConfusionMatrix, detection: Option<&DetectionStats>, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut out = |name: &str| {
        let p = dir.join(name);
        written.push(p.clone());
        p
    };

    cm.to_normalized_matrix().write_csv(&out("confusion.csv"))?;
    cm.write_counts_csv(&out("confusion_counts.csv"))?;

    let per_class: Vec<ClassMetrics> = GestureKind::GESTURES
        .iter()
        .enumerate()
        .map(|(i, g)| ClassMetrics {
            class: g.label(),
            precision: cm.precision(i),
            recall: cm.recall(i),
            end_to_end_recall: cm.end_to_end_recall(i),
            support: cm.row_total(i) + cm.rejected[i],
            rejected: cm.rejected[i],
        })
        .collect();
    let mut csv = String::from("class,precision,recall,end_to_end_recall,support,rejected\n");
    for m in &per_class {
        let opt = |v: Option<f64>| v.map_or_else(|| NA.to_string(), |x| x.to_string());
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            m.class,
            opt(m.precision),
            opt(m.recall),
            opt(m.end_to_end_recall),
            m.support,
            m.rejected
        )
        .expect("write to string");
    }
    fs::write(out("per_class.csv"), csv)?;

    let metrics = Metrics {
        average_accuracy: cm.average_accuracy(),
        false_accept_rate: detection.and_then(DetectionStats::false_accept_rate),
        false_reject_rate: detection.and_then(DetectionStats::false_reject_rate),
        detection: detection.copied(),
        per_class,
    };
    fs::write(out("metrics.json"), serde_json::to_string_pretty(&metrics)?)?;

    let mut table = format!("{:<12}", "true\\pred");
    for g in GestureKind::GESTURES {
        write!(table, "{:>12}", g.label()).expect("write to string");
    }
    table.push_str(&format!("{:>10}\n", "recall"));
    for (i, row) in cm.normalized().iter().enumerate() {
        write!(table, "{:<12}", GestureKind::GESTURES[i].label()).expect("write to string");
        for v in row {
            write!(table, "{:>12}", fmt_opt(*v)).expect("write to string");
        }
        writeln!(table, "{:>10}", fmt_opt(cm.recall(i))).expect("write to string");
    }
    write!(table, "{:<12}", "precision").expect("write to string");
    for j in 0..5 {
        write!(table, "{:>12}", fmt_opt(cm.precision(j))).expect("write to string");
    }
    writeln!(table, "\n\naverage accuracy: {}", fmt_opt(cm.average_accuracy())).expect("write to string");
    if let Some(d) = detection {
        writeln!(table, "false accept rate: {}", fmt_opt(d.false_accept_rate())).expect("write to string");
        writeln!(table, "false reject rate: {}", fmt_opt(d.false_reject_rate())).expect("write to string");
    }
    fs::write(out("table.txt"), table)?;
    Ok(written)
}
