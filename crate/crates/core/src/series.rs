//! Sample-path containers shared by the simulators.

/// Regularly spaced observations `X_1..X_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub values: Vec<f64>,
    /// Sampling interval in model time units.
    pub step: f64,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values, step: 1.0 }
    }

    pub fn with_step(values: Vec<f64>, step: f64) -> Self {
        Self { values, step }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

impl From<Vec<f64>> for TimeSeries {
    fn from(values: Vec<f64>) -> Self {
        Self::new(values)
    }
}
