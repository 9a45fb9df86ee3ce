use railseg_core::metrics::{improvement, ConfusionMatrix, IoUReport};
use railseg_core::{ClassId, ClassSet};
use serde::{Deserialize, Serialize};

use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    /// Ground-truth class names, one per row.
    pub rows: Vec<String>,
    /// Predicted class names; the last column counts `UNLABELED` predictions.
    pub columns: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl From<&ConfusionMatrix> for MatrixJson {
    fn from(cm: &ConfusionMatrix) -> Self {
        let set = ClassSet::railway();
        let name = |c: ClassId| set.get(c).map_or_else(|| c.to_string(), |i| i.name.to_string());
        let rows: Vec<String> = ClassId::all_3d().map(name).collect();
        let mut columns = rows.clone();
        columns.push(name(ClassId::UNLABELED));
        MatrixJson {
            rows,
            columns,
            counts: cm.rows().iter().map(|r| r.to_vec()).collect(),
        }
    }
}

/// Relative change against an earlier run, in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub baseline: String,
    pub miou_percent: f64,
    pub fwiou_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_name: Option<String>,
    pub scans: Vec<String>,
    #[serde(flatten)]
    pub scores: IoUReport,
    pub confusion_matrix: MatrixJson,
    #[serde(default)]
    pub improvements: Vec<Improvement>,
}

impl EvaluationReport {
    pub fn new(run_name: Option<String>, scans: Vec<String>, cm: &ConfusionMatrix) -> Result<Self> {
        Ok(EvaluationReport {
            run_name,
            scores: cm.report(scans.len())?,
            scans,
            confusion_matrix: cm.into(),
            improvements: Vec::new(),
        })
    }

    pub fn compare_with(&mut self, name: &str, baseline: &EvaluationReport) -> Result<()> {
        self.improvements.push(Improvement {
            baseline: name.into(),
            miou_percent: improvement(baseline.scores.miou, self.scores.miou)?,
            fwiou_percent: improvement(baseline.scores.fwiou, self.scores.fwiou)?,
        });
        Ok(())
    }
}
