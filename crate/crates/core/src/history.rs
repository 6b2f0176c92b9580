//! Per-iteration convergence records.

/// Cumulative time spent in the phases of a fixed-point map.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimes {
    pub rhs_s: f64,
    pub mg_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based count of map evaluations so far.
    pub iter: usize,
    pub relative_residual: f64,
    pub l2_error: Option<f64>,
    /// Wall time since the start of the run.
    pub elapsed_s: f64,
    pub rhs_s: f64,
    pub mg_s: f64,
    pub extrapolation_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationHistory {
    pub records: Vec<IterationRecord>,
}

impl IterationHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: IterationRecord) {
        debug_assert!(self.records.last().map_or(true, |r| r.iter < record.iter));
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn iterations(&self) -> usize {
        self.last().map_or(0, |r| r.iter)
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.last().map(|r| r.relative_residual)
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.relative_residual).collect()
    }
}
