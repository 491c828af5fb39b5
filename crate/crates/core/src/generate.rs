//! Seeded instance generators and small named fixtures.
//!
//! Random instances use dyadic link lengths and local delays (multiples of
//! 1/4 and 1/8), so every objective is an exactly representable float and
//! different summation orders agree bit for bit. The cloud delay follows the
//! reference rule `lambda = 10 * max xi`.

use std::ops::RangeInclusive;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{floor_count, AccessPoint, Link, NetworkTopology, ResourceProfile, ScenarioInstance};
use crate::partition::Regime;

#[derive(Debug, Clone)]
pub struct RandomConfig {
    pub aps: RangeInclusive<usize>,
    pub servers: RangeInclusive<usize>,
    pub theta_max: u64,
    /// Probability of each extra (non-tree) link.
    pub extra_link_probability: f64,
    /// Target regime; `None` picks one uniformly per seed.
    pub regime: Option<Regime>,
    pub lambda_factor: f64,
}

impl RandomConfig {
    /// At most 6 APs, 3 servers and 5 requests per AP.
    pub fn small() -> Self {
        RandomConfig {
            aps: 1..=6,
            servers: 1..=3,
            theta_max: 5,
            extra_link_probability: 0.3,
            regime: None,
            lambda_factor: 10.0,
        }
    }

    /// At most 30 APs and 8 servers.
    pub fn medium() -> Self {
        RandomConfig {
            aps: 2..=30,
            servers: 1..=8,
            theta_max: 20,
            extra_link_probability: 0.1,
            regime: None,
            lambda_factor: 10.0,
        }
    }

    pub fn in_regime(mut self, regime: Regime) -> Self {
        self.regime = Some(regime);
        self
    }
}

const MAX_ATTEMPTS: usize = 10_000;

/// A valid random instance; deterministic in `seed`.
///
/// Panics if no instance of the requested regime turns up within a large
/// number of attempts, which only happens for degenerate configurations.
pub fn random_instance(config: &RandomConfig, seed: u64) -> ScenarioInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = config.regime.unwrap_or_else(|| Regime::ALL[rng.gen_range(0..4)]);
    for _ in 0..MAX_ATTEMPTS {
        if let Some(instance) = attempt(config, target, &mut rng) {
            debug_assert!(crate::model::validate_instance(&instance).is_empty());
            return instance;
        }
    }
    panic!("no {target} instance found for {config:?} (seed {seed})");
}

fn smallest_k(from: u64, mut ok: impl FnMut(u64) -> bool) -> Option<u64> {
    (from.max(1)..=from.max(1) + 100_000).find(|&k| ok(k))
}

fn attempt(config: &RandomConfig, target: Regime, rng: &mut ChaCha8Rng) -> Option<ScenarioInstance> {
    let n = rng.gen_range(config.aps.clone());
    let m_hi = (*config.servers.end()).min(n);
    let m_lo = (*config.servers.start()).clamp(1, m_hi);
    let m = rng.gen_range(m_lo..=m_hi);

    let aps: Vec<AccessPoint> = (1..=n)
        .map(|id| AccessPoint {
            id,
            x: rng.gen_range(0..40) as f64 / 4.0,
            y: rng.gen_range(0..40) as f64 / 4.0,
        })
        .collect();
    let mut links = Vec::new();
    for b in 2..=n {
        let a = rng.gen_range(1..b);
        links.push(Link { a, b, length: rng.gen_range(1..=16) as f64 / 4.0 });
    }
    for a in 1..=n {
        for b in (a + 2)..=n {
            if rng.gen_bool(config.extra_link_probability) {
                links.push(Link { a, b, length: rng.gen_range(1..=16) as f64 / 4.0 });
            }
        }
    }
    let theta: Vec<u64> = (0..n).map(|_| rng.gen_range(0..=config.theta_max)).collect();
    let pi: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=8) as f64 / 8.0).collect();
    let mut placement = vec![false; n];
    for i in sample(rng, n, m).into_iter() {
        placement[i] = true;
    }
    let alpha = rng.gen_range(1..=9) as f64 / 10.0;
    let beta = rng.gen_range(0..=5) as f64 / 10.0;

    let private = |i: usize| floor_count(beta * theta[i] as f64).max(0) as u64;
    let theta_max = *theta.iter().max().unwrap();
    let private_all = (0..n).map(private).max().unwrap();
    let private_servers = (0..n).filter(|&i| placement[i]).map(private).max().unwrap();

    let w = if target.blocks() {
        let lo = private_all.max(1);
        if theta_max < 1 || lo > theta_max - 1 {
            return None;
        }
        rng.gen_range(lo..=theta_max - 1)
    } else {
        theta_max.max(1) + rng.gen_range(0..=2)
    };

    let pu: u64 = (0..n)
        .map(|i| {
            let chi = theta[i].min(w);
            if placement[i] {
                floor_count(chi as f64 - beta * theta[i] as f64).max(0) as u64
            } else {
                chi
            }
        })
        .sum();
    let public_cap = |k: u64| floor_count((1.0 - alpha) * k as f64).max(0) as u64;
    let k_private = smallest_k(1, |k| floor_count(alpha * k as f64) as u64 >= private_servers)?;
    let k_sufficient = smallest_k(1, |k| m as u64 * public_cap(k) >= pu)?;
    let k = if target.uses_cloud() {
        if k_private >= k_sufficient {
            return None;
        }
        rng.gen_range(k_private..k_sufficient)
    } else {
        k_private.max(k_sufficient) + rng.gen_range(0..=3)
    };

    let topology = NetworkTopology::new(aps, links).ok()?;
    let lambda = config.lambda_factor * topology.delays().max();
    let profile = ResourceProfile {
        k: k as f64,
        w: w as f64,
        alpha,
        beta,
        lambda,
    };
    let instance = ScenarioInstance::new(topology, profile, theta, pi, placement);
    let descriptor = crate::partition::classify(&instance).ok()?;
    (descriptor.regime == target).then_some(instance)
}

/// The same instance with AP `i` relabelled to `(i + shift) mod n`.
pub fn rotate_labels(instance: &ScenarioInstance, shift: usize) -> ScenarioInstance {
    let n = instance.len();
    let to = |i: usize| (i + shift) % n;
    let mut aps = vec![AccessPoint { id: 0, x: 0.0, y: 0.0 }; n];
    let mut theta = vec![0; n];
    let mut pi = vec![0.0; n];
    let mut placement = vec![false; n];
    for (i, ap) in instance.topology.aps().iter().enumerate() {
        aps[to(i)] = AccessPoint { id: to(i) + 1, ..*ap };
        theta[to(i)] = instance.theta[i];
        pi[to(i)] = instance.pi[i];
        placement[to(i)] = instance.placement[i];
    }
    let links = instance
        .topology
        .links()
        .iter()
        .map(|l| Link {
            a: to(l.a - 1) + 1,
            b: to(l.b - 1) + 1,
            length: l.length,
        })
        .collect();
    let topology = NetworkTopology::new(aps, links).expect("relabelling keeps connectivity");
    ScenarioInstance::new(topology, instance.profile, theta, pi, placement)
}

/// Hand-built instances with known answers.
pub mod fixtures {
    use super::*;

    fn line_topology(n: usize) -> NetworkTopology {
        let aps = (1..=n).map(|id| AccessPoint { id, x: (id - 1) as f64, y: 0.0 }).collect();
        let links = (1..n).map(|a| Link { a, b: a + 1, length: 1.0 }).collect();
        NetworkTopology::new(aps, links).expect("line is connected")
    }

    /// One AP with a server and no load.
    pub fn single_ap_zero_load() -> ScenarioInstance {
        single_ap(0, 5.0, 0.1)
    }

    /// One AP with a server, K = 20, alpha = 0.3.
    pub fn single_ap(theta: u64, w: f64, beta: f64) -> ScenarioInstance {
        let profile = ResourceProfile {
            k: 20.0,
            w,
            alpha: 0.3,
            beta,
            lambda: 20.0,
        };
        ScenarioInstance::new(line_topology(1), profile, vec![theta], vec![0.0], vec![true])
    }

    /// `n` APs on a unit-length line, one server at AP 1, no load.
    pub fn zero_load(n: usize) -> ScenarioInstance {
        let mut placement = vec![false; n];
        placement[0] = true;
        ScenarioInstance::new(
            line_topology(n),
            ResourceProfile::reference(10.0, 5.0, 20.0),
            vec![0; n],
            vec![0.1; n],
            placement,
        )
    }

    /// Three APs on a unit line with the only server at AP 2:
    /// K = 10, W = 5, alpha = 0.3, beta = 0.5, lambda = 20, theta = [4, 4, 4],
    /// pi = 0.1 everywhere. Public demand [4, 2, 4] against a capacity of 7,
    /// so three requests go to the cloud.
    pub fn t3() -> ScenarioInstance {
        let profile = ResourceProfile {
            k: 10.0,
            w: 5.0,
            alpha: 0.3,
            beta: 0.5,
            lambda: 20.0,
        };
        ScenarioInstance::new(line_topology(3), profile, vec![4, 4, 4], vec![0.1; 3], vec![false, true, false])
    }

    /// T3 with K = 40: capacity 28 covers demand 10.
    pub fn t3_sksw() -> ScenarioInstance {
        let mut instance = t3();
        instance.profile.k = 40.0;
        instance
    }

    /// T3 with W = 3 and K = 40.
    pub fn t3_skiw() -> ScenarioInstance {
        let mut instance = t3();
        instance.profile.w = 3.0;
        instance.profile.k = 40.0;
        instance
    }

    /// T3 with W = 3 and K = 7: demand 7 against capacity 4.
    pub fn t3_ikiw() -> ScenarioInstance {
        let mut instance = t3();
        instance.profile.w = 3.0;
        instance.profile.k = 7.0;
        instance
    }

    /// Two APs, both with servers, unit link, theta = [2, 2], beta = 0.
    pub fn two_servers_symmetric() -> ScenarioInstance {
        let profile = ResourceProfile {
            k: 10.0,
            w: 5.0,
            alpha: 0.3,
            beta: 0.0,
            lambda: 10.0,
        };
        ScenarioInstance::new(line_topology(2), profile, vec![2, 2], vec![0.25; 2], vec![true, true])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_instance;
    use crate::partition::classify;

    #[test]
    fn generator_hits_every_regime() {
        for config in [RandomConfig::small(), RandomConfig::medium()] {
            for regime in Regime::ALL {
                for seed in 0..20 {
                    let instance = random_instance(&config.clone().in_regime(regime), seed);
                    assert!(validate_instance(&instance).is_empty());
                    assert_eq!(classify(&instance).unwrap().regime, regime);
                    assert!(instance.len() <= *config.aps.end());
                    assert!(instance.servers <= *config.servers.end());
                }
            }
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let config = RandomConfig::medium();
        assert_eq!(random_instance(&config, 42), random_instance(&config, 42));
    }

    #[test]
    fn fixtures_are_valid() {
        for instance in [
            fixtures::single_ap_zero_load(),
            fixtures::zero_load(4),
            fixtures::t3(),
            fixtures::t3_sksw(),
            fixtures::t3_skiw(),
            fixtures::t3_ikiw(),
            fixtures::two_servers_symmetric(),
        ] {
            assert!(validate_instance(&instance).is_empty(), "{instance:?}");
        }
    }
}
