//! Sample-size driven choice of the half-width `a`, node count `N` and
//! regularisation `lambda`.

use crate::error::{Error, Result};
use crate::lattice::{next_prime, prev_prime};

/// Decay prior and rate slack feeding [`ScheduleConfig::resolve`].
///
/// The target density is assumed to decay like `exp(-beta |x|^q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleConfig {
    pub alpha: usize,
    pub beta: f64,
    pub q: f64,
    pub epsilon: f64,
    pub eta: f64,
    /// Upper bound on the node count.
    pub n_max: u64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            alpha: 2,
            beta: 1.0,
            q: 2.0,
            epsilon: 0.1,
            eta: 1.0,
            n_max: 4001,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub a: f64,
    pub n: u64,
    pub lambda: f64,
}

impl ScheduleConfig {
    fn validate(&self, m: usize) -> Result<()> {
        let alpha = self.alpha as f64;
        let checks = [
            (m >= 2, format!("sample count M = {m} must be >= 2")),
            (self.alpha >= 1, "alpha must be >= 1".to_string()),
            (
                self.epsilon > 0.0 && self.epsilon < 2.0 - 1.0 / alpha,
                format!(
                    "epsilon = {} must lie in (0, 2 - 1/alpha) = (0, {})",
                    self.epsilon,
                    2.0 - 1.0 / alpha
                ),
            ),
            (self.beta > 0.0, format!("beta = {} must be > 0", self.beta)),
            (self.q >= 1.0, format!("q = {} must be >= 1", self.q)),
            (self.eta > 0.0, format!("eta = {} must be > 0", self.eta)),
            (self.n_max >= 2, "n_max must be >= 2".to_string()),
        ];
        match checks.into_iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::InvalidParameter(msg)),
            None => Ok(()),
        }
    }

    /// `a = ((ln M + ln eta) / (2 beta))^(1/q)`,
    /// `lambda = 0.1 M^(-1 / (1 + 1/(2 alpha) + epsilon/2))` and `N` the
    /// smallest prime `>= 3 M^(1/(alpha - epsilon))`, capped at `n_max`.
    pub fn resolve(&self, m: usize) -> Result<Schedule> {
        self.validate(m)?;
        let mf = m as f64;
        let alpha = self.alpha as f64;

        let base = (mf.ln() + self.eta.ln()) / (2.0 * self.beta);
        let a = if base > 0.0 {
            base.powf(1.0 / self.q)
        } else {
            0.0
        };
        let bound = self.beta.powf(-1.0 / self.q).max(0.5);
        if !(a > bound) {
            return Err(Error::ScheduleUnderflow { a, bound });
        }

        let lambda = 0.1 * mf.powf(-1.0 / (1.0 + 1.0 / (2.0 * alpha) + self.epsilon / 2.0));

        let target = (3.0 * mf.powf(1.0 / (alpha - self.epsilon))).ceil();
        let n = if target >= self.n_max as f64 {
            prev_prime(self.n_max).expect("n_max >= 2")
        } else {
            next_prime(target as u64).min(prev_prime(self.n_max).expect("n_max >= 2"))
        };
        Ok(Schedule { a, n, lambda })
    }
}
