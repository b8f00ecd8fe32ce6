//! Seeded synthetic flow records drawn from per-class log-normal marginals.

use std::collections::BTreeMap;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::LogNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{Cell, Column, FlowRecord, FlowTable, Role, BOTNET, LABEL_COLUMN, NORMAL};
use crate::error::{Error, Result};

/// Features sampled directly; `pkts` and `bytes` are sums of their parts.
pub const SAMPLED_FEATURES: [&str; 8] = [
    "spkts", "dpkts", "sbytes", "dbytes", "dur", "rate", "srate", "drate",
];

/// Sampled features that hold integer counts (stochastically rounded).
const INTEGER_FEATURES: [&str; 4] = ["spkts", "dpkts", "sbytes", "dbytes"];

pub const DEFAULT_PROFILE: &str = include_str!("../assets/paper-fig13.profile");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassProfile {
    pub means: BTreeMap<String, f64>,
    /// Per-feature coefficient of variation overriding the profile default.
    #[serde(default)]
    pub dispersion: BTreeMap<String, f64>,
    pub proto: BTreeMap<String, f64>,
    pub state: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficProfile {
    pub row_count: usize,
    /// Fraction of botnet rows.
    pub class_ratio: f64,
    pub seed: u64,
    /// Default coefficient of variation.
    #[serde(default = "default_dispersion")]
    pub dispersion: f64,
    pub normal: ClassProfile,
    pub botnet: ClassProfile,
}

fn default_dispersion() -> f64 {
    1.0
}

impl TrafficProfile {
    pub fn bundled() -> Self {
        TrafficProfile::from_toml(DEFAULT_PROFILE).expect("bundled profile is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let profile: TrafficProfile =
            toml::from_str(text).map_err(|e| Error::Profile(e.to_string()))?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TrafficProfile::from_toml(&text)
    }

    pub fn class(&self, label: u8) -> &ClassProfile {
        if label == BOTNET {
            &self.botnet
        } else {
            &self.normal
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.class_ratio > 0.0 && self.class_ratio < 1.0) {
            return Err(Error::Profile(format!(
                "class_ratio must lie in (0, 1), got {}",
                self.class_ratio
            )));
        }
        if self.row_count == 0 {
            return Err(Error::Profile("row_count must be positive".into()));
        }
        if !(self.dispersion >= 0.0 && self.dispersion.is_finite()) {
            return Err(Error::Profile("dispersion must be finite and >= 0".into()));
        }
        for (name, class) in [("normal", &self.normal), ("botnet", &self.botnet)] {
            for feature in SAMPLED_FEATURES {
                match class.means.get(feature) {
                    Some(m) if *m > 0.0 && m.is_finite() => {}
                    Some(m) => {
                        return Err(Error::Profile(format!(
                            "{name} mean of {feature} must be positive, got {m}"
                        )))
                    }
                    None => return Err(Error::Profile(format!("{name} lacks a mean for {feature}"))),
                }
            }
            if let Some(extra) = class.means.keys().find(|k| !SAMPLED_FEATURES.contains(&k.as_str())) {
                return Err(Error::Profile(format!("{name}: unknown feature `{extra}`")));
            }
            if class.dispersion.values().any(|v| !(*v >= 0.0 && v.is_finite())) {
                return Err(Error::Profile(format!("{name}: dispersion must be >= 0")));
            }
            for (field, weights) in [("proto", &class.proto), ("state", &class.state)] {
                if weights.is_empty() || weights.values().any(|w| !(*w > 0.0 && w.is_finite())) {
                    return Err(Error::Profile(format!(
                        "{name}.{field} needs positive weights"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dispersion_of(&self, label: u8, feature: &str) -> f64 {
        self.class(label)
            .dispersion
            .get(feature)
            .copied()
            .unwrap_or(self.dispersion)
    }

    /// Configured mean of a feature, including the derived `pkts` and `bytes`.
    pub fn expected_mean(&self, label: u8, feature: &str) -> Option<f64> {
        let means = &self.class(label).means;
        match feature {
            "pkts" => Some(means["spkts"] + means["dpkts"]),
            "bytes" => Some(means["sbytes"] + means["dbytes"]),
            f => means.get(f).copied(),
        }
    }

    /// Upper bound on the per-row standard deviation of a feature: the
    /// log-normal spread plus at most 1/4 variance from integer rounding.
    pub fn expected_sd(&self, label: u8, feature: &str) -> Option<f64> {
        let var = |f: &str| -> Option<f64> {
            let m = self.class(label).means.get(f)?;
            let sd = self.dispersion_of(label, f) * m;
            let rounding = if INTEGER_FEATURES.contains(&f) { 0.25 } else { 0.0 };
            Some(sd * sd + rounding)
        };
        match feature {
            "pkts" => Some((var("spkts")? + var("dpkts")?).sqrt()),
            "bytes" => Some((var("sbytes")? + var("dbytes")?).sqrt()),
            f => var(f).map(f64::sqrt),
        }
    }

    /// Exact number of botnet rows: `round(row_count * class_ratio)`.
    pub fn botnet_rows(&self) -> usize {
        (self.row_count as f64 * self.class_ratio).round() as usize
    }
}

struct ClassSampler {
    features: Vec<(&'static str, LogNormal<f64>, bool)>,
    proto: (Vec<String>, WeightedIndex<f64>),
    state: (Vec<String>, WeightedIndex<f64>),
}

fn tokens(weights: &BTreeMap<String, f64>) -> Result<(Vec<String>, WeightedIndex<f64>)> {
    let names = weights.keys().cloned().collect();
    let dist = WeightedIndex::new(weights.values().copied()).map_err(|e| Error::Profile(e.to_string()))?;
    Ok((names, dist))
}

impl ClassSampler {
    fn new(profile: &TrafficProfile, label: u8) -> Result<Self> {
        let class = profile.class(label);
        let features = SAMPLED_FEATURES
            .iter()
            .map(|&f| {
                let mean = class.means[f];
                let cv = profile.dispersion_of(label, f);
                // log-normal with the requested mean and coefficient of variation
                let sigma2 = (1.0 + cv * cv).ln();
                let mu = mean.ln() - sigma2 / 2.0;
                let dist = LogNormal::new(mu, sigma2.sqrt()).map_err(|e| Error::Profile(e.to_string()))?;
                Ok((f, dist, INTEGER_FEATURES.contains(&f)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ClassSampler {
            features,
            proto: tokens(&class.proto)?,
            state: tokens(&class.state)?,
        })
    }

    fn sample(&self, rng: &mut ChaCha8Rng, label: u8) -> FlowRecord {
        let mut record = FlowRecord {
            attack: Some(label),
            ..Default::default()
        };
        for (name, dist, integer) in &self.features {
            let mut v = dist.sample(rng);
            if *integer {
                // unbiased rounding: floor plus a Bernoulli of the fraction
                let floor = v.floor();
                v = floor + f64::from(u8::from(rng.random::<f64>() < v - floor));
            }
            record.set(name, Cell::Number(v));
        }
        record.pkts = Some(record.spkts.unwrap_or(0.0) + record.dpkts.unwrap_or(0.0));
        record.bytes = Some(record.sbytes.unwrap_or(0.0) + record.dbytes.unwrap_or(0.0));
        record.proto = Cell::Token(self.proto.0[self.proto.1.sample(rng)].clone());
        record.state = Cell::Token(self.state.0[self.state.1.sample(rng)].clone());
        record
    }
}

/// Streaming generator. Labels use selection sampling so the botnet count
/// is exactly [`TrafficProfile::botnet_rows`].
pub struct FlowGenerator {
    rng: ChaCha8Rng,
    samplers: [ClassSampler; 2],
    rows_left: usize,
    botnet_left: usize,
}

impl FlowGenerator {
    pub fn new(profile: &TrafficProfile) -> Result<Self> {
        profile.validate()?;
        Ok(FlowGenerator {
            rng: ChaCha8Rng::seed_from_u64(profile.seed),
            samplers: [ClassSampler::new(profile, NORMAL)?, ClassSampler::new(profile, BOTNET)?],
            rows_left: profile.row_count,
            botnet_left: profile.botnet_rows(),
        })
    }
}

impl Iterator for FlowGenerator {
    type Item = FlowRecord;

    fn next(&mut self) -> Option<FlowRecord> {
        if self.rows_left == 0 {
            return None;
        }
        let botnet = self.rng.random_range(0..self.rows_left) < self.botnet_left;
        self.rows_left -= 1;
        let label = if botnet {
            self.botnet_left -= 1;
            BOTNET
        } else {
            NORMAL
        };
        Some(self.samplers[label as usize].sample(&mut self.rng, label))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.rows_left, Some(self.rows_left))
    }
}

pub fn generate(profile: &TrafficProfile) -> Result<Vec<FlowRecord>> {
    Ok(FlowGenerator::new(profile)?.collect())
}

/// Column layout of generated tables (the bundled schema's feature order).
pub fn generated_columns() -> Vec<Column> {
    [
        "pkts", "bytes", "dur", "proto", "state", "spkts", "dpkts", "sbytes", "dbytes", "rate",
        "srate", "drate",
    ]
    .iter()
    .map(|&name| Column {
        name: name.to_string(),
        role: if name == "proto" || name == "state" {
            Role::Categorical
        } else {
            Role::Numeric
        },
    })
    .collect()
}

pub fn generate_table(profile: &TrafficProfile) -> Result<FlowTable> {
    Ok(FlowTable {
        columns: generated_columns(),
        label: LABEL_COLUMN.to_string(),
        records: generate(profile)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n: usize, ratio: f64, seed: u64) -> TrafficProfile {
        TrafficProfile {
            row_count: n,
            class_ratio: ratio,
            seed,
            ..TrafficProfile::bundled()
        }
    }

    #[test]
    fn bundled_means() {
        let p = TrafficProfile::bundled();
        let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
        assert!(close(p.expected_mean(NORMAL, "pkts").unwrap(), 1509.39));
        assert!(close(p.expected_mean(BOTNET, "pkts").unwrap(), 3.61));
        assert_eq!(p.expected_mean(NORMAL, "rate"), Some(31.23));
        assert_eq!(p.expected_mean(BOTNET, "rate"), Some(7.45e3));
        assert_eq!(p.expected_mean(NORMAL, "dur"), Some(72.85));
        assert_eq!(p.expected_mean(BOTNET, "dur"), Some(6.79));
        assert_eq!(p.expected_mean(NORMAL, "srate"), Some(84.1));
        assert_eq!(p.expected_mean(BOTNET, "srate"), Some(598.38));
        assert_eq!(p.expected_mean(NORMAL, "drate"), Some(0.40));
        assert_eq!(p.expected_mean(BOTNET, "drate"), Some(440.84));
        assert_eq!(p.expected_mean(NORMAL, "spkts"), Some(1106.28));
        assert_eq!(p.expected_mean(BOTNET, "spkts"), Some(2.15));
        assert_eq!(p.expected_mean(NORMAL, "dpkts"), Some(403.11));
        assert_eq!(p.expected_mean(BOTNET, "dpkts"), Some(1.46));
    }

    #[test]
    fn exact_class_counts() {
        let records = generate(&small(10_000, 0.995, 1)).unwrap();
        let botnet = records.iter().filter(|r| r.attack == Some(BOTNET)).count();
        assert_eq!(records.len(), 10_000);
        assert_eq!(botnet, 9_950);
    }

    #[test]
    fn records_satisfy_invariants() {
        for r in generate(&small(2_000, 0.5, 2)).unwrap() {
            r.check().unwrap();
            assert!(r.numeric_values().all(|(_, v)| v >= 0.0));
        }
    }

    #[test]
    fn seeds_matter() {
        let a = generate(&small(50, 0.5, 3)).unwrap();
        assert_eq!(a, generate(&small(50, 0.5, 3)).unwrap());
        assert_ne!(a, generate(&small(50, 0.5, 4)).unwrap());
    }

    #[test]
    fn invalid_profiles() {
        let mut p = small(10, 1.0, 0);
        assert!(matches!(p.validate(), Err(Error::Profile(_))));
        p.class_ratio = 0.5;
        p.normal.means.insert("rate".into(), -1.0);
        assert!(p.validate().is_err());
        p.normal.means.insert("rate".into(), 1.0);
        p.botnet.proto.clear();
        assert!(p.validate().is_err());
        assert!(TrafficProfile::from_toml("row_count = 3").is_err());
    }
}
