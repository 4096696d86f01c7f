//! Node attributes, the software catalog, and the per-hop compromise rule.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};

/// Vulnerabilities of the default seven packages.
pub const DEFAULT_SV: [f64; 7] = [0.41, 0.35, 0.48, 0.22, 0.16, 0.19, 0.12];

/// Upper bound on catalog size so learned-package sets fit in a `u64`.
pub const MAX_PACKAGES: usize = 64;

/// Zero-based package index. Text formats print it one-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PackageId(pub u8);

impl PackageId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PackageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0 as usize + 1)
    }
}

/// Set of packages whose vulnerabilities an attacker has learned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PackageSet(u64);

impl PackageSet {
    pub fn empty() -> Self {
        Self(0)
    }

    /// Every package of a catalog with `ns` entries.
    pub fn all(ns: usize) -> Self {
        if ns >= 64 {
            Self(u64::MAX)
        } else {
            Self((1 << ns) - 1)
        }
    }

    pub fn contains(self, p: PackageId) -> bool {
        self.0 & (1 << p.0) != 0
    }

    pub fn insert(&mut self, p: PackageId) {
        self.0 |= 1 << p.0;
    }

    pub fn union(self, other: PackageSet) -> PackageSet {
        Self(self.0 | other.0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftwareCatalog {
    sv: Vec<f64>,
}

impl SoftwareCatalog {
    pub fn new(sv: Vec<f64>) -> Result<Self> {
        if sv.is_empty() || sv.len() > MAX_PACKAGES {
            return Err(Error::Catalog(format!(
                "need 1..={MAX_PACKAGES} packages, got {}",
                sv.len()
            )));
        }
        if let Some(bad) = sv.iter().find(|&&v| !(v > 0.0 && v <= 1.0)) {
            return Err(Error::Catalog(format!("vulnerability {bad} outside (0, 1]")));
        }
        Ok(Self { sv })
    }

    /// The default vector truncated to its first `ns` entries.
    pub fn default_with(ns: usize) -> Result<Self> {
        if ns == 0 || ns > DEFAULT_SV.len() {
            return Err(Error::Catalog(format!(
                "default catalog holds 1..={} packages, asked for {ns}",
                DEFAULT_SV.len()
            )));
        }
        Self::new(DEFAULT_SV[..ns].to_vec())
    }

    pub fn ns(&self) -> usize {
        self.sv.len()
    }

    pub fn sv(&self, p: PackageId) -> f64 {
        self.sv[p.index()]
    }

    pub fn vulnerabilities(&self) -> &[f64] {
        &self.sv
    }
}

/// `ns` on the first line, then the vulnerabilities separated by spaces.
impl fmt::Display for SoftwareCatalog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.ns())?;
        let values: Vec<String> = self.sv.iter().map(|v| v.to_string()).collect();
        writeln!(f, "{}", values.join(" "))
    }
}

impl FromStr for SoftwareCatalog {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut tokens = s.split_whitespace();
        let ns: usize = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Catalog("missing package count".into()))?;
        let sv = tokens
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Catalog(format!("bad vulnerability {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if sv.len() != ns {
            return Err(Error::Catalog(format!(
                "header says {ns} packages, found {}",
                sv.len()
            )));
        }
        Self::new(sv)
    }
}

/// Per-node attributes during a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub active: bool,
    pub compromised: bool,
    pub package: PackageId,
    pub diversity: f64,
    pub learned: PackageSet,
}

impl NodeState {
    pub fn healthy(package: PackageId) -> Self {
        Self {
            active: true,
            compromised: false,
            package,
            diversity: 1.0,
            learned: PackageSet::empty(),
        }
    }

    pub fn vulnerability(&self, cat: &SoftwareCatalog) -> f64 {
        cat.sv(self.package)
    }

    /// Marks the node compromised; an attacker always knows its own package.
    pub fn compromise(&mut self) {
        self.compromised = true;
        self.learned.insert(self.package);
    }

    /// Compromise by an attacker whose knowledge the node takes over.
    pub fn compromise_from(&mut self, infector_knows: PackageSet) {
        self.learned = self.learned.union(infector_knows);
        self.compromise();
    }
}

pub fn initial_states(packages: &[PackageId]) -> Vec<NodeState> {
    packages.iter().map(|&p| NodeState::healthy(p)).collect()
}

/// Draws each node's package uniformly from the catalog.
pub fn assign_packages<R: Rng + ?Sized>(
    n: usize,
    cat: &SoftwareCatalog,
    rng: &mut R,
) -> Vec<PackageId> {
    (0..n)
        .map(|_| PackageId(rng.gen_range(0..cat.ns()) as u8))
        .collect()
}

/// One-based ids separated by spaces.
pub fn format_packages(packages: &[PackageId]) -> String {
    let ids: Vec<String> = packages.iter().map(PackageId::to_string).collect();
    ids.join(" ")
}

pub fn parse_packages(text: &str, cat: &SoftwareCatalog) -> Result<Vec<PackageId>> {
    text.split_whitespace()
        .map(|t| match t.parse::<usize>() {
            Ok(id) if (1..=cat.ns()).contains(&id) => Ok(PackageId((id - 1) as u8)),
            _ => Err(Error::Catalog(format!("bad package id {t:?}"))),
        })
        .collect()
}

/// Probability that an attacker running `attacker` compromises `target`.
///
/// Certain when both run the same package or when `learned` already covers the
/// target's package; otherwise the target package's vulnerability.
pub fn hop_vulnerability(
    attacker: PackageId,
    target: PackageId,
    cat: &SoftwareCatalog,
    learned: Option<PackageSet>,
) -> f64 {
    if attacker == target || learned.is_some_and(|set| set.contains(target)) {
        1.0
    } else {
        cat.sv(target)
    }
}

/// Number of initial attackers for fraction `pa` of `n` nodes, rounding half up.
pub fn seed_count(pa: f64, n: usize) -> usize {
    ((pa * n as f64 + 0.5 + 1e-9).floor() as usize).min(n)
}

/// Compromises `seed_count(pa, n)` distinct nodes chosen uniformly at random.
/// Returns the chosen indices in ascending order.
pub fn seed_attackers<R: Rng + ?Sized>(
    states: &mut [NodeState],
    pa: f64,
    rng: &mut R,
) -> Vec<usize> {
    assert!((0.0..=1.0).contains(&pa), "attacker fraction {pa} outside [0, 1]");
    let n = states.len();
    let mut seeds = sample(rng, n, seed_count(pa, n)).into_vec();
    seeds.sort_unstable();
    for &i in &seeds {
        states[i].active = true;
        states[i].compromise();
    }
    seeds
}
