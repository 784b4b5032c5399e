//! Per-iteration record of a reconstruction run.

use std::fmt::Write;

/// Why an iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIter,
    /// The data was identically zero.
    ZeroData,
    Diverged,
}

/// Entry m describes the iterate f_m, starting with f_0 = P d.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    /// ‖d − N f_m‖ / ‖d‖.
    pub residual: Vec<f64>,
    /// ‖f_m − f_true‖ / ‖f_true‖, present when the truth is known.
    pub error: Option<Vec<f64>>,
    pub sobolev_t: Vec<f64>,
    /// sobolev[m][k] = ‖f_m‖_{H^{t_k}}.
    pub sobolev: Vec<Vec<f64>>,
    pub stop: StopReason,
}

impl IterationTrace {
    pub fn new(sobolev_t: Vec<f64>, with_truth: bool) -> Self {
        Self {
            residual: Vec::new(),
            error: with_truth.then(Vec::new),
            sobolev_t,
            sobolev: Vec::new(),
            stop: StopReason::MaxIter,
        }
    }

    pub fn len(&self) -> usize {
        self.residual.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residual.is_empty()
    }

    /// Number of corrections applied after f_0.
    pub fn iterations(&self) -> usize {
        self.len().saturating_sub(1)
    }

    pub fn final_residual(&self) -> f64 {
        self.residual.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_error(&self) -> Option<f64> {
        self.error.as_ref().and_then(|e| e.last().copied())
    }

    /// Longest run of consecutive residual increases ending at the last entry.
    pub fn trailing_increases(&self, jitter: f64) -> usize {
        self.residual.windows(2).rev().take_while(|w| w[1] > w[0] + jitter).count()
    }

    /// Largest increase between consecutive residuals (zero when monotone).
    pub fn max_residual_increase(&self) -> f64 {
        self.residual.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    pub(crate) fn push(&mut self, residual: f64, error: Option<f64>, sobolev: Vec<f64>) {
        self.residual.push(residual);
        if let (Some(e), Some(v)) = (self.error.as_mut(), error) {
            e.push(v);
        }
        self.sobolev.push(sobolev);
    }

    /// Header `iteration,residual,error,H^t...`; the error column is empty without truth.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,residual,error");
        for t in &self.sobolev_t {
            let _ = write!(s, ",h{t}");
        }
        s.push('\n');
        for m in 0..self.len() {
            let _ = write!(s, "{m},{:.12e},", self.residual[m]);
            if let Some(e) = &self.error {
                let _ = write!(s, "{:.12e}", e[m]);
            }
            for v in &self.sobolev[m] {
                let _ = write!(s, ",{v:.12e}");
            }
            s.push('\n');
        }
        s
    }
}
