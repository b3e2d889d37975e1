use serde::Serialize;

/// Sample mean with its standard error `sd / sqrt(count)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: u64,
}

impl Estimate {
    /// Two-pass mean and unbiased standard deviation. Samples are reduced in
    /// the order given, so the result is reproducible bit for bit.
    pub fn from_samples<I>(samples: I) -> Option<Self>
    where
        I: IntoIterator<Item = f64>,
        I::IntoIter: Clone,
    {
        let iter = samples.into_iter();
        let (count, sum) = iter.clone().fold((0u64, 0.0), |(n, s), x| (n + 1, s + x));
        if count == 0 {
            return None;
        }
        let mean = sum / count as f64;
        let std_error = if count > 1 {
            let ss: f64 = iter.map(|x| (x - mean) * (x - mean)).sum();
            (ss / (count - 1) as f64).sqrt() / (count as f64).sqrt()
        } else {
            0.0
        };
        Some(Self {
            mean,
            std_error,
            count,
        })
    }

    /// `(mean - target) / std_error`; infinite when the error is zero and
    /// the mean misses.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = self.mean - target;
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_error
        }
    }

    /// True when `target` lies within `k` standard errors of the mean.
    pub fn covers(&self, target: f64, k: f64) -> bool {
        self.z_score(target).abs() <= k
    }

    /// True when the two `k`-standard-error intervals intersect.
    pub fn overlaps(&self, other: &Estimate, k: f64) -> bool {
        (self.mean - other.mean).abs() <= k * (self.std_error + other.std_error)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_error() {
        let e = Estimate::from_samples([1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(e.mean, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((e.std_error - sd / 2.0).abs() < 1e-15);
        assert_eq!(e.count, 4);
    }

    #[test]
    fn empty_and_single() {
        assert!(Estimate::from_samples(Vec::<f64>::new()).is_none());
        let e = Estimate::from_samples([7.0]).unwrap();
        assert_eq!((e.mean, e.std_error), (7.0, 0.0));
        assert!(e.covers(7.0, 3.0));
        assert!(!e.covers(7.5, 3.0));
    }

    #[test]
    fn interval_overlap() {
        let a = Estimate {
            mean: 1.0,
            std_error: 0.1,
            count: 10,
        };
        let b = Estimate {
            mean: 1.5,
            std_error: 0.1,
            count: 10,
        };
        assert!(a.overlaps(&b, 3.0));
        assert!(!a.overlaps(&b, 2.0));
    }
}
