use super::SimulationEstimate;

/// Count, mean and centered sum of squares, merged with Chan's update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
    pub truncated: u64,
}

impl RunningStats {
    pub fn push(&mut self, y: f64, truncated: bool) {
        self.count += 1;
        let delta = y - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (y - self.mean);
        self.truncated += u64::from(truncated);
    }

    pub fn merge(&self, other: &RunningStats) -> RunningStats {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let count = self.count + other.count;
        let (na, nb) = (self.count as f64, other.count as f64);
        let delta = other.mean - self.mean;
        RunningStats {
            count,
            mean: self.mean + delta * nb / count as f64,
            m2: self.m2 + other.m2 + delta * delta * na * nb / count as f64,
            truncated: self.truncated + other.truncated,
        }
    }

    /// Pairwise merge in index order; the result depends only on `parts`.
    pub fn merge_tree(parts: &[RunningStats]) -> RunningStats {
        match parts.len() {
            0 => RunningStats::default(),
            1 => parts[0],
            len => {
                let (a, b) = parts.split_at(len / 2);
                Self::merge_tree(a).merge(&Self::merge_tree(b))
            }
        }
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn estimate(&self, seed: u64) -> SimulationEstimate {
        let stderr = if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        };
        SimulationEstimate {
            mean: self.mean,
            stderr,
            n_paths: self.count,
            seed,
            truncations: self.truncated,
        }
    }
}
