use rand::Rng;

use crate::error::{Error, Result};

/// Inverse-CDF sampler over a fixed discrete distribution.
#[derive(Debug, Clone)]
pub struct DiscreteSampler {
    cumulative: Vec<f64>,
}

impl DiscreteSampler {
    /// `p` must be strictly positive and sum to one within `1e-9`.
    pub fn from_probabilities(p: &[f64]) -> Result<Self> {
        check_probabilities(p)?;
        Ok(Self::build(p))
    }

    /// Positive, not necessarily normalized weights.
    pub fn from_weights(w: &[f64]) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidProbabilities("empty distribution".into()));
        }
        if let Some(i) = w.iter().position(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidProbabilities(format!("weight {i} is {}", w[i])));
        }
        Ok(Self::build(w))
    }

    fn build(w: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = w
            .iter()
            .map(|&x| {
                acc += x;
                acc
            })
            .collect();
        Self { cumulative }
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().unwrap();
        let u = rng.random::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

pub fn check_probabilities(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidProbabilities("empty distribution".into()));
    }
    if let Some(i) = p.iter().position(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidProbabilities(format!("p[{i}] = {} is not positive", p[i])));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbabilities(format!("probabilities sum to {total}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empirical_frequencies() {
        let s = DiscreteSampler::from_probabilities(&[0.1, 0.2, 0.7]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts = [0usize; 3];
        let draws = 200_000;
        for _ in 0..draws {
            counts[s.sample(&mut rng)] += 1;
        }
        for (c, p) in counts.iter().zip([0.1, 0.2, 0.7]) {
            assert!((*c as f64 / draws as f64 - p).abs() < 0.005);
        }
    }

    #[test]
    fn rejects_invalid() {
        assert!(DiscreteSampler::from_probabilities(&[0.5, 0.4]).is_err());
        assert!(DiscreteSampler::from_probabilities(&[1.0, 0.0]).is_err());
        assert!(DiscreteSampler::from_probabilities(&[]).is_err());
        assert!(DiscreteSampler::from_weights(&[2.0, -1.0]).is_err());
        assert!(DiscreteSampler::from_weights(&[2.0, 6.0]).is_ok());
    }
}
