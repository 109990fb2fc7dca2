use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{check_points, distinct_points, nearest, sse_to_nearest, ClusterError};

const TOURNAMENT_SIZE: usize = 3;

/// Settings of the genetic search for initial centroids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    /// Mutation standard deviation as a fraction of each dimension's spread.
    pub mutation_scale: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 20,
            generations: 50,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            mutation_scale: 0.1,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), ClusterError> {
        let bad = |msg: &str| Err(ClusterError::GaConfig(msg.to_string()));
        if self.population < 2 {
            return bad("population must be at least 2");
        }
        if self.generations < 1 {
            return bad("generations must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return bad("crossover_rate must be in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad("mutation_rate must be in [0, 1]");
        }
        if !(self.mutation_scale > 0.0 && self.mutation_scale.is_finite()) {
            return bad("mutation_scale must be positive");
        }
        Ok(())
    }
}

/// k centroids flattened into one vector.
#[derive(Debug, Clone)]
struct Genome {
    genes: Vec<f64>,
    sse: f64,
}

fn centroids_of(genes: &[f64], dim: usize) -> Vec<Vec<f64>> {
    genes.chunks_exact(dim).map(<[f64]>::to_vec).collect()
}

fn evaluate(genes: Vec<f64>, dim: usize, data: &[Vec<f64>]) -> Genome {
    let sse = sse_to_nearest(&centroids_of(&genes, dim), data);
    Genome { genes, sse }
}

fn tournament<'a>(population: &'a [Genome], rng: &mut ChaCha8Rng) -> &'a Genome {
    let mut best = &population[rng.random_range(0..population.len())];
    for _ in 1..TOURNAMENT_SIZE {
        let challenger = &population[rng.random_range(0..population.len())];
        if challenger.sse < best.sse {
            best = challenger;
        }
    }
    best
}

/// Replaces repeated centroids by the data point farthest from its nearest
/// centroid, so the result holds k distinct centers.
fn make_distinct(mut centroids: Vec<Vec<f64>>, distinct: &[Vec<f64>]) -> Vec<Vec<f64>> {
    for i in 1..centroids.len() {
        if centroids[..i].contains(&centroids[i]) {
            let mut best: Option<(usize, f64)> = None;
            for (j, p) in distinct.iter().enumerate() {
                if centroids.contains(p) {
                    continue;
                }
                let d = nearest(&centroids, p).1;
                if best.is_none_or(|(_, bd)| d > bd) {
                    best = Some((j, d));
                }
            }
            let (j, _) = best.expect("k <= distinct points leaves a free point");
            centroids[i] = distinct[j].clone();
        }
    }
    centroids
}

/// Searches for k initial centroids minimizing the SSE of the induced
/// nearest-centroid partition.
///
/// Each genome concatenates k centroids, first drawn as k distinct data
/// points. Parents come from size-3 tournaments; crossover cuts between
/// whole centroids; mutation adds Gaussian noise per coordinate, scaled by
/// that dimension's standard deviation. The best genome always survives to
/// the next generation. The outcome depends only on `data`, `k` and `cfg`.
pub fn ga_init_centroids(
    data: &[Vec<f64>],
    k: usize,
    cfg: &GaConfig,
) -> Result<Vec<Vec<f64>>, ClusterError> {
    cfg.validate()?;
    let dim = check_points(data)?;
    if k == 0 {
        return Err(ClusterError::ZeroK);
    }
    let distinct = distinct_points(data);
    if k > distinct.len() {
        return Err(ClusterError::TooFewDistinct {
            k,
            distinct: distinct.len(),
        });
    }

    let n = data.len() as f64;
    let spread: Vec<f64> = (0..dim)
        .map(|d| {
            let m = data.iter().map(|p| p[d]).sum::<f64>() / n;
            (data.iter().map(|p| (p[d] - m).powi(2)).sum::<f64>() / n).sqrt()
        })
        .collect();
    let noise: Vec<Option<Normal<f64>>> = spread
        .iter()
        .map(|&s| {
            Normal::new(0.0, cfg.mutation_scale * s)
                .ok()
                .filter(|_| s > 0.0)
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut population: Vec<Genome> = (0..cfg.population)
        .map(|_| {
            let genes = index::sample(&mut rng, distinct.len(), k)
                .into_iter()
                .flat_map(|i| distinct[i].iter().copied())
                .collect();
            evaluate(genes, dim, data)
        })
        .collect();

    let best_of = |pop: &[Genome]| -> Genome {
        pop.iter()
            .min_by(|a, b| a.sse.total_cmp(&b.sse))
            .expect("population is non-empty")
            .clone()
    };

    for _ in 0..cfg.generations {
        let mut next = Vec::with_capacity(cfg.population);
        next.push(best_of(&population));
        while next.len() < cfg.population {
            let mother = tournament(&population, &mut rng);
            let father = tournament(&population, &mut rng);
            let mut genes = mother.genes.clone();
            if k > 1 && rng.random::<f64>() < cfg.crossover_rate {
                let cut = rng.random_range(1..k) * dim;
                genes[cut..].copy_from_slice(&father.genes[cut..]);
            }
            for (i, g) in genes.iter_mut().enumerate() {
                if rng.random::<f64>() < cfg.mutation_rate {
                    if let Some(normal) = &noise[i % dim] {
                        *g += normal.sample(&mut rng);
                    }
                }
            }
            next.push(evaluate(genes, dim, data));
        }
        population = next;
    }

    let best = best_of(&population);
    Ok(make_distinct(centroids_of(&best.genes, dim), &distinct))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::squared_distance;

    fn blob(seed: u64, n: usize, dim: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        (0..n)
            .map(|_| (0..dim).map(|_| normal.sample(&mut rng)).collect())
            .collect()
    }

    fn sse_about_mean(data: &[Vec<f64>]) -> f64 {
        let n = data.len() as f64;
        let dim = data[0].len();
        let mean: Vec<f64> = (0..dim)
            .map(|d| data.iter().map(|p| p[d]).sum::<f64>() / n)
            .collect();
        data.iter().map(|p| squared_distance(p, &mean)).sum()
    }

    #[test]
    fn single_centroid_approaches_the_mean() {
        let data = blob(7, 200, 5);
        let centroids = ga_init_centroids(&data, 1, &GaConfig::default()).unwrap();
        let found = sse_to_nearest(&centroids, &data);
        let optimum = sse_about_mean(&data);
        assert!(found <= optimum * 1.01, "{found} vs optimum {optimum}");
    }

    #[test]
    fn repeated_points_are_recovered_exactly() {
        let sites = [vec![0.0, 0.0], vec![5.0, 0.0], vec![0.0, 5.0]];
        let data: Vec<Vec<f64>> = sites
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.clone(), 4))
            .collect();
        let mut centroids = ga_init_centroids(&data, 3, &GaConfig::default()).unwrap();
        assert!(sse_to_nearest(&centroids, &data) <= 1e-9);
        centroids.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expected = sites.to_vec();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(centroids, expected);
    }

    #[test]
    fn seeded_runs_agree() {
        let data = blob(3, 60, 5);
        let cfg = GaConfig {
            seed: 99,
            ..GaConfig::default()
        };
        let a = ga_init_centroids(&data, 4, &cfg).unwrap();
        let b = ga_init_centroids(&data, 4, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn centroids_are_distinct() {
        let data = blob(11, 30, 2);
        let c = ga_init_centroids(&data, 6, &GaConfig::default()).unwrap();
        for i in 0..c.len() {
            for j in 0..i {
                assert_ne!(c[i], c[j]);
            }
        }
    }

    #[test]
    fn too_few_distinct_points() {
        let data = vec![vec![1.0], vec![1.0], vec![2.0]];
        assert!(matches!(
            ga_init_centroids(&data, 3, &GaConfig::default()),
            Err(ClusterError::TooFewDistinct { k: 3, distinct: 2 })
        ));
    }

    #[test]
    fn rejects_bad_config() {
        let data = vec![vec![1.0], vec![2.0]];
        for cfg in [
            GaConfig {
                population: 1,
                ..GaConfig::default()
            },
            GaConfig {
                generations: 0,
                ..GaConfig::default()
            },
            GaConfig {
                crossover_rate: 1.5,
                ..GaConfig::default()
            },
            GaConfig {
                mutation_rate: -0.1,
                ..GaConfig::default()
            },
            GaConfig {
                mutation_scale: 0.0,
                ..GaConfig::default()
            },
        ] {
            assert!(matches!(
                ga_init_centroids(&data, 1, &cfg),
                Err(ClusterError::GaConfig(_))
            ));
        }
    }
}
