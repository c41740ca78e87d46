use rand::Rng;
use serde::Serialize;

/// Coupon index sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    /// Binary search over the cumulative distribution.
    Inversion,
    /// Walker/Vose alias table, O(1) per draw.
    Alias,
}

/// Below this many coupons the cumulative table is used.
pub const ALIAS_THRESHOLD: usize = 64;

#[derive(Debug, Clone)]
pub enum Sampler {
    Inversion { cumulative: Vec<f64> },
    Alias { prob: Vec<f64>, alias: Vec<u32> },
}

impl Sampler {
    pub fn new(p: &[f64]) -> Self {
        if p.len() < ALIAS_THRESHOLD {
            Self::inversion(p)
        } else {
            Self::alias(p)
        }
    }

    pub fn inversion(p: &[f64]) -> Self {
        let total: f64 = p.iter().sum();
        let mut acc = 0.0;
        let cumulative = p
            .iter()
            .map(|&v| {
                acc += v / total;
                acc
            })
            .collect();
        Sampler::Inversion { cumulative }
    }

    /// Vose's construction.
    pub fn alias(p: &[f64]) -> Self {
        let n = p.len();
        let total: f64 = p.iter().sum();
        let mut scaled: Vec<f64> = p.iter().map(|&v| v * n as f64 / total).collect();
        let mut prob = vec![0.0; n];
        let mut alias = vec![0u32; n];
        let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| scaled[i] < 1.0);
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            prob[s] = scaled[s];
            alias[s] = l as u32;
            scaled[l] -= 1.0 - scaled[s];
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // leftovers are 1 up to rounding
        for i in large.into_iter().chain(small) {
            prob[i] = 1.0;
            alias[i] = i as u32;
        }
        Sampler::Alias { prob, alias }
    }

    pub fn kind(&self) -> SamplerKind {
        match self {
            Sampler::Inversion { .. } => SamplerKind::Inversion,
            Sampler::Alias { .. } => SamplerKind::Alias,
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            Sampler::Inversion { cumulative } => {
                let u: f64 = rng.gen();
                cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
            }
            Sampler::Alias { prob, alias } => {
                let i = rng.gen_range(0..prob.len());
                if rng.gen::<f64>() < prob[i] {
                    i
                } else {
                    alias[i] as usize
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn frequencies(s: &Sampler, n: usize, draws: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts = vec![0usize; n];
        for _ in 0..draws {
            counts[s.sample(&mut rng)] += 1;
        }
        counts.into_iter().map(|c| c as f64 / draws as f64).collect()
    }

    #[test]
    fn alias_table_reconstructs_distribution() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let Sampler::Alias { prob, alias } = Sampler::alias(&p) else {
            unreachable!()
        };
        let mut mass = [0.0; 4];
        for i in 0..4 {
            mass[i] += prob[i] / 4.0;
            mass[alias[i] as usize] += (1.0 - prob[i]) / 4.0;
        }
        for (m, q) in mass.iter().zip(p) {
            assert!((m - q).abs() < 1e-12);
        }
    }

    #[test]
    fn both_samplers_match_frequencies() {
        let p = [0.05, 0.15, 0.3, 0.5];
        let draws = 200_000;
        for s in [Sampler::inversion(&p), Sampler::alias(&p)] {
            let f = frequencies(&s, 4, draws);
            for (fi, pi) in f.iter().zip(p) {
                let sd = (pi * (1.0 - pi) / draws as f64).sqrt();
                assert!((fi - pi).abs() < 6.0 * sd, "{:?}: {fi} vs {pi}", s.kind());
            }
        }
    }

    #[test]
    fn threshold_picks_kind() {
        assert_eq!(Sampler::new(&[0.5, 0.5]).kind(), SamplerKind::Inversion);
        assert_eq!(Sampler::new(&vec![1.0 / 64.0; 64]).kind(), SamplerKind::Alias);
    }
}
