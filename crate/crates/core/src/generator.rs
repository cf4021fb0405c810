//! Seeded random instances and the benchmark series presets.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Instance, Product, Technology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TriangleMode {
    /// Setups are drawn independently and may violate the triangle inequality.
    Raw,
    /// Drawn setups are replaced by their shortest-path closure.
    MetricClosure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub products: usize,
    pub machines: usize,
    /// Maximum number of technologies per product.
    pub max_techs: usize,
    pub max_volume: f64,
    pub max_setup: f64,
    /// Event points to use when the instance is solved; not used by generation.
    pub event_points: usize,
    pub seed: u64,
    pub triangle: TriangleMode,
}

#[derive(Debug, Error, PartialEq)]
pub enum GeneratorError {
    #[error("counts must be at least 1 (k={k}, m={m}, U_max={u_max}, n_max={n_max})")]
    ZeroCount {
        k: usize,
        m: usize,
        u_max: usize,
        n_max: usize,
    },
    #[error("V_max must be at least 1, got {0}")]
    VolumeRange(f64),
    #[error("s_max must be non-negative and finite, got {0}")]
    SetupRange(f64),
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        if self.products == 0 || self.machines == 0 || self.max_techs == 0 || self.event_points == 0
        {
            return Err(GeneratorError::ZeroCount {
                k: self.products,
                m: self.machines,
                u_max: self.max_techs,
                n_max: self.event_points,
            });
        }
        if !(self.max_volume.is_finite() && self.max_volume >= 1.0) {
            return Err(GeneratorError::VolumeRange(self.max_volume));
        }
        if !(self.max_setup.is_finite() && self.max_setup >= 0.0) {
            return Err(GeneratorError::SetupRange(self.max_setup));
        }
        Ok(())
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        lo
    } else {
        lo + (hi - lo) * rng.random::<f64>()
    }
}

/// Draws an instance. The same configuration always yields the same instance.
///
/// Sampling order: per product the technology count and volume; per
/// technology the machine count, the machines, and the rate; then per machine
/// the off-diagonal setups in row-major order.
pub fn generate_instance(cfg: &GeneratorConfig) -> Result<Instance, GeneratorError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let m = cfg.machines;

    let mut products = Vec::with_capacity(cfg.products);
    let mut technologies = Vec::new();
    for i in 0..cfg.products {
        let count = rng.random_range(1..=cfg.max_techs);
        let volume = uniform(&mut rng, 1.0, cfg.max_volume);
        let mut owned = Vec::with_capacity(count);
        for _ in 0..count {
            let width = rng.random_range(1..=m);
            let mut machines = sample(&mut rng, m, width).into_vec();
            machines.sort_unstable();
            // The upper end drops below 1 when V_i < 2.
            let rate = uniform(&mut rng, 1.0, (volume / 2.0).max(1.0));
            owned.push(technologies.len());
            technologies.push(Technology {
                product: i,
                machines,
                rate,
            });
        }
        products.push(Product {
            volume,
            technologies: owned,
        });
    }

    let d = technologies.len();
    let mut setups = vec![vec![0.0; d * d]; m];
    for (l, matrix) in setups.iter_mut().enumerate() {
        let on: Vec<usize> = (0..d)
            .filter(|&u| technologies[u].machines.contains(&l))
            .collect();
        for &u in &on {
            for &q in &on {
                if u != q {
                    matrix[u * d + q] = uniform(&mut rng, 0.0, cfg.max_setup);
                }
            }
        }
    }

    let inst = Instance::new(m, products, technologies, setups)
        .expect("generator output satisfies instance invariants");
    Ok(match cfg.triangle {
        TriangleMode::Raw => inst,
        TriangleMode::MetricClosure => inst.metric_closure(),
    })
}

/// Benchmark series parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Series {
    S1,
    S2,
    S3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPreset {
    pub series: Series,
    pub count: usize,
    pub products: usize,
    pub machines: usize,
    pub max_techs: usize,
    pub max_volume: f64,
    pub max_setup: f64,
    pub event_points: usize,
}

impl Series {
    pub const ALL: [Series; 3] = [Series::S1, Series::S2, Series::S3];

    pub fn name(self) -> &'static str {
        match self {
            Series::S1 => "S1",
            Series::S2 => "S2",
            Series::S3 => "S3",
        }
    }

    /// Full-size parameters: (k, m, U_max, V_max, s_max, n_max), 10 instances each.
    pub fn full(self) -> SeriesPreset {
        let (k, m, u, v, s, n) = match self {
            Series::S1 => (4, 4, 3, 10.0, 5.0, 4),
            Series::S2 => (5, 7, 5, 12.0, 7.0, 5),
            Series::S3 => (7, 9, 6, 15.0, 9.0, 7),
        };
        SeriesPreset {
            series: self,
            count: 10,
            products: k,
            machines: m,
            max_techs: u,
            max_volume: v,
            max_setup: s,
            event_points: n,
        }
    }

    /// Shrunk parameters that branch-and-bound without cuts can close in
    /// seconds. Value ranges (V_max, s_max) are kept; sizes are reduced.
    pub fn desk(self) -> SeriesPreset {
        let (k, m, u, n) = match self {
            Series::S1 => (2, 2, 2, 3),
            Series::S2 => (3, 3, 2, 3),
            Series::S3 => (3, 4, 2, 3),
        };
        SeriesPreset {
            products: k,
            machines: m,
            max_techs: u,
            event_points: n,
            ..self.full()
        }
    }
}

impl std::str::FromStr for Series {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(Series::S1),
            "S2" => Ok(Series::S2),
            "S3" => Ok(Series::S3),
            other => Err(format!("unknown series '{other}' (expected S1, S2 or S3)")),
        }
    }
}

impl SeriesPreset {
    pub fn config(&self, seed: u64, triangle: TriangleMode) -> GeneratorConfig {
        GeneratorConfig {
            products: self.products,
            machines: self.machines,
            max_techs: self.max_techs,
            max_volume: self.max_volume,
            max_setup: self.max_setup,
            event_points: self.event_points,
            seed,
            triangle,
        }
    }

    /// Seeds of the series members: `base_seed, base_seed + 1, ...`.
    pub fn configs(&self, base_seed: u64, triangle: TriangleMode) -> Vec<GeneratorConfig> {
        (0..self.count as u64)
            .map(|i| self.config(base_seed.wrapping_add(i), triangle))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s1(seed: u64) -> GeneratorConfig {
        Series::S1.full().config(seed, TriangleMode::Raw)
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(
            generate_instance(&s1(7)).unwrap(),
            generate_instance(&s1(7)).unwrap()
        );
        assert_ne!(
            generate_instance(&s1(7)).unwrap(),
            generate_instance(&s1(8)).unwrap()
        );
    }

    #[test]
    fn s1_ranges() {
        for seed in 0..200 {
            let inst = generate_instance(&s1(seed)).unwrap();
            assert_eq!(inst.num_products(), 4);
            assert_eq!(inst.num_machines(), 4);
            let d = inst.num_technologies();
            assert!((4..=12).contains(&d), "d = {d}");
            for p in inst.products() {
                assert!((1.0..=10.0).contains(&p.volume));
                assert!((1..=3).contains(&p.technologies.len()));
                for &u in &p.technologies {
                    let rate = inst.technologies()[u].rate;
                    assert!(rate >= 1.0 && rate <= (p.volume / 2.0).max(1.0));
                }
            }
            for l in 0..4 {
                for &u in inst.machine_techs(l) {
                    for &q in inst.machine_techs(l) {
                        let s = inst.setup(l, u, q);
                        assert!((0.0..=5.0).contains(&s));
                        if u == q {
                            assert_eq!(s, 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn closure_mode_is_metric() {
        for seed in 0..50 {
            let cfg = Series::S2.full().config(seed, TriangleMode::MetricClosure);
            assert!(generate_instance(&cfg).unwrap().satisfies_triangle());
        }
    }

    #[test]
    fn degenerate_ranges() {
        let cfg = GeneratorConfig {
            products: 1,
            machines: 1,
            max_techs: 1,
            max_volume: 1.0,
            max_setup: 0.0,
            event_points: 1,
            seed: 3,
            triangle: TriangleMode::Raw,
        };
        let inst = generate_instance(&cfg).unwrap();
        assert_eq!(inst.num_technologies(), 1);
        assert_eq!(inst.products()[0].volume, 1.0);
        assert_eq!(inst.technologies()[0].rate, 1.0);
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = s1(0);
        cfg.machines = 0;
        assert!(matches!(
            generate_instance(&cfg),
            Err(GeneratorError::ZeroCount { .. })
        ));
        let mut cfg = s1(0);
        cfg.max_volume = 0.5;
        assert_eq!(
            generate_instance(&cfg),
            Err(GeneratorError::VolumeRange(0.5))
        );
        let mut cfg = s1(0);
        cfg.max_setup = -1.0;
        assert_eq!(
            generate_instance(&cfg),
            Err(GeneratorError::SetupRange(-1.0))
        );
    }
}
