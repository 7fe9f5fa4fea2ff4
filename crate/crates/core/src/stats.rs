//! Sample statistics shared by reports and tests.

/// Mean and standard error of the mean over a set of trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator) over sqrt(n). Zero for a
    /// single sample.
    pub stderr: f64,
    pub count: usize,
}

impl Summary {
    pub fn from_samples(samples: &[f64]) -> Self {
        let count = samples.len();
        if count == 0 {
            return Summary {
                mean: 0.0,
                stderr: 0.0,
                count,
            };
        }
        let mean = mean(samples);
        let stderr = if count < 2 {
            0.0
        } else {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        };
        Summary {
            mean,
            stderr,
            count,
        }
    }

    /// True when the standard error is a placeholder because fewer than two
    /// samples were available.
    pub fn stderr_is_placeholder(&self) -> bool {
        self.count < 2
    }
}

pub fn mean(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Index of the largest value; ties go to the lowest index. NaN never wins.
pub fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}
