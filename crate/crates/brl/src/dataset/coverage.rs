//! Occupied-bin coverage diagnostic.
//!
//! Observations are discretized on a uniform grid; out-of-bounds values
//! clamp to the edge bins. Up to 3 observation dimensions the full grid is
//! counted; above that the count is the average over all dimension pairs
//! (a full 14-dim grid is vacuously sparse).

use super::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct PairHistogram {
    /// Observation dimensions this histogram covers (full list or a pair).
    pub dims: Vec<usize>,
    /// Row-major counts, `bins_per_dim^dims.len()` entries.
    pub counts: Vec<u64>,
}

impl PairHistogram {
    pub fn occupied(&self) -> usize {
        self.counts.iter().filter(|c| **c > 0).count()
    }
}

#[derive(Debug, Clone)]
pub struct Coverage {
    pub bins_per_dim: usize,
    pub total_points: usize,
    /// Occupied-bin count: exact for the full-grid mode, averaged over
    /// dimension pairs otherwise.
    pub occupied: f64,
    pub histograms: Vec<PairHistogram>,
}

pub fn coverage(
    dataset: &Dataset,
    bins_per_dim: usize,
    bounds: &(Vec<f64>, Vec<f64>),
) -> Result<Coverage> {
    let d = dataset.meta().obs_dim;
    let (lo, hi) = bounds;
    if bins_per_dim < 1 {
        return Err(Error::Config("bins_per_dim must be >= 1".to_string()));
    }
    if lo.len() != d || hi.len() != d {
        return Err(Error::Config(format!(
            "coverage bounds have {} / {} dims, observations have {d}",
            lo.len(),
            hi.len()
        )));
    }
    if lo.iter().chain(hi).any(|b| !b.is_finite()) {
        return Err(Error::Config("coverage bounds must be finite".to_string()));
    }

    let bin_of = |x: f64, dim: usize| -> usize {
        let (l, h) = (lo[dim], hi[dim]);
        if h <= l {
            return 0;
        }
        let u = ((x - l) / (h - l) * bins_per_dim as f64).floor();
        (u.max(0.0) as usize).min(bins_per_dim - 1)
    };

    let mut histograms = Vec::new();
    if d <= 3 {
        let total_bins = bins_per_dim.pow(d as u32);
        let mut counts = vec![0u64; total_bins];
        for t in dataset.transitions() {
            let mut idx = 0;
            for dim in 0..d {
                idx = idx * bins_per_dim + bin_of(t.obs[dim], dim);
            }
            counts[idx] += 1;
        }
        histograms.push(PairHistogram {
            dims: (0..d).collect(),
            counts,
        });
    } else {
        for i in 0..d {
            for j in i + 1..d {
                let mut counts = vec![0u64; bins_per_dim * bins_per_dim];
                for t in dataset.transitions() {
                    let idx = bin_of(t.obs[i], i) * bins_per_dim + bin_of(t.obs[j], j);
                    counts[idx] += 1;
                }
                histograms.push(PairHistogram {
                    dims: vec![i, j],
                    counts,
                });
            }
        }
    }

    let occupied = histograms.iter().map(|h| h.occupied() as f64).sum::<f64>()
        / histograms.len() as f64;
    Ok(Coverage {
        bins_per_dim,
        total_points: dataset.len(),
        occupied,
        histograms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Dataset, DatasetMeta, Transition};

    fn dataset_with_obs(obs: &[Vec<f64>]) -> Dataset {
        let d = obs[0].len();
        let mut ds = Dataset::new(DatasetMeta {
            env: "synthetic".to_string(),
            method: "test".to_string(),
            seed: 0,
            obs_dim: d,
            act_dim: 1,
            config_hash: String::new(),
        });
        for o in obs {
            ds.push(Transition {
                obs: o.clone(),
                action: vec![0.0],
                next_obs: o.clone(),
                done: false,
                timeout: false,
            })
            .unwrap();
        }
        ds
    }

    #[test]
    fn identical_observations_occupy_one_bin() {
        let ds = dataset_with_obs(&vec![vec![0.3, 0.3]; 50]);
        let cov = coverage(&ds, 10, &(vec![0.0, 0.0], vec![1.0, 1.0])).unwrap();
        assert_eq!(cov.occupied, 1.0);
    }

    #[test]
    fn four_quadrant_centers_occupy_four_bins() {
        let ds = dataset_with_obs(&[
            vec![-0.5, -0.5],
            vec![-0.5, 0.5],
            vec![0.5, -0.5],
            vec![0.5, 0.5],
        ]);
        let cov = coverage(&ds, 2, &(vec![-1.0, -1.0], vec![1.0, 1.0])).unwrap();
        assert_eq!(cov.occupied, 4.0);
    }

    #[test]
    fn counts_sum_to_the_number_of_transitions() {
        let mut rng = crate::rng_from_seed(4);
        use rand::Rng as _;
        let obs: Vec<Vec<f64>> = (0..777)
            .map(|_| (0..5).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let ds = dataset_with_obs(&obs);
        let cov = coverage(&ds, 4, &(vec![-1.0; 5], vec![1.0; 5])).unwrap();
        for h in &cov.histograms {
            assert_eq!(h.counts.iter().sum::<u64>(), 777);
        }
        // 5 dims -> C(5,2) = 10 pair histograms.
        assert_eq!(cov.histograms.len(), 10);
    }

    #[test]
    fn matches_brute_force_binning_oracle() {
        let mut rng = crate::rng_from_seed(9);
        use rand::Rng as _;
        let obs: Vec<Vec<f64>> = (0..1000)
            .map(|_| (0..2).map(|_| rng.random_range(-2.5..2.5)).collect())
            .collect();
        let ds = dataset_with_obs(&obs);
        let bins = 7;
        let (lo, hi) = (vec![-2.0, -2.0], vec![2.0, 2.0]);
        let cov = coverage(&ds, bins, &(lo.clone(), hi.clone())).unwrap();

        // Oracle: nested loops over bins, recount from scratch.
        let mut occupied_oracle = 0;
        for bi in 0..bins {
            for bj in 0..bins {
                let mut any = false;
                for o in &obs {
                    let f = |x: f64, l: f64, h: f64| -> usize {
                        let u = ((x - l) / (h - l) * bins as f64).floor();
                        (u.max(0.0) as usize).min(bins - 1)
                    };
                    if f(o[0], lo[0], hi[0]) == bi && f(o[1], lo[1], hi[1]) == bj {
                        any = true;
                        break;
                    }
                }
                if any {
                    occupied_oracle += 1;
                }
            }
        }
        assert_eq!(cov.occupied, occupied_oracle as f64);
    }

    #[test]
    fn out_of_bounds_values_clamp_to_edge_bins() {
        let ds = dataset_with_obs(&[vec![-100.0, 100.0]]);
        let cov = coverage(&ds, 4, &(vec![-1.0, -1.0], vec![1.0, 1.0])).unwrap();
        assert_eq!(cov.histograms[0].counts[3], 1); // row 0 (clamped low), col 3 (clamped high)
        assert_eq!(cov.occupied, 1.0);
    }

    #[test]
    fn invalid_bins_is_a_config_error() {
        let ds = dataset_with_obs(&[vec![0.0, 0.0]]);
        assert!(matches!(
            coverage(&ds, 0, &(vec![0.0, 0.0], vec![1.0, 1.0])),
            Err(Error::Config(_))
        ));
    }
}
