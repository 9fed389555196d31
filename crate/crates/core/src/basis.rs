//! Fixed-charge sectors of non-interacting spin chains.
//!
//! A configuration is a sequence of local levels, one per site. Spin-1/2 sites
//! use levels `0 = down`, `1 = up` and the sector charge is the number of up
//! spins. Spin-1 sites use levels `0, 1, 2` for `m = -1, 0, +1` and the charge
//! is the total magnetization.
//!
//! Configurations are packed into a `u64` word with site 0 as the most
//! significant digit (base 2 or base 3), so lexicographic order over level
//! sequences coincides with numeric order over packed words. Ranking uses a
//! table of suffix counts indexed by (suffix length, remaining level sum); for
//! spin-1/2 this is the combinatorial number system.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest sector dimension accepted by [`enumerate_sector`].
pub const MAX_SECTOR_DIMENSION: u64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BasisError {
    #[error("chain length must be at least 1")]
    EmptyChain,
    #[error("unsupported local dimension {0}, expected 2 or 3")]
    UnsupportedLocalDimension(usize),
    #[error("chain length {chain_length} exceeds the packed-word limit of {limit} sites")]
    ChainTooLong { chain_length: usize, limit: usize },
    #[error("charge {charge} is not achievable on {chain_length} sites of local dimension {local_dimension}")]
    EmptySector {
        chain_length: usize,
        local_dimension: usize,
        charge: i64,
    },
    #[error("sector dimension {dimension} exceeds the capacity bound {limit}")]
    Capacity { dimension: u64, limit: u64 },
    #[error("configuration {0} does not belong to this sector")]
    NotMember(String),
    #[error("index {index} out of range for a sector of dimension {dimension}")]
    IndexOutOfRange { index: usize, dimension: usize },
    #[error("site {site} out of range for a chain of length {chain_length}")]
    SiteOutOfRange { site: usize, chain_length: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
}

/// Number of levels per site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub enum LocalDimension {
    SpinHalf,
    SpinOne,
}

impl LocalDimension {
    pub fn from_value(value: usize) -> Result<Self, BasisError> {
        match value {
            2 => Ok(Self::SpinHalf),
            3 => Ok(Self::SpinOne),
            other => Err(BasisError::UnsupportedLocalDimension(other)),
        }
    }

    pub fn value(self) -> usize {
        match self {
            Self::SpinHalf => 2,
            Self::SpinOne => 3,
        }
    }

    /// Longest chain whose configurations fit in a `u64` word.
    pub fn max_chain_length(self) -> usize {
        match self {
            Self::SpinHalf => 63,
            Self::SpinOne => 40,
        }
    }

    /// Charge carried by one site at `level`.
    pub fn charge_of(self, level: SiteLevel) -> i64 {
        match self {
            Self::SpinHalf => level.value() as i64,
            Self::SpinOne => level.value() as i64 - 1,
        }
    }

    /// Offset between the per-site charge and the level index.
    fn level_offset(self) -> i64 {
        match self {
            Self::SpinHalf => 0,
            Self::SpinOne => 1,
        }
    }
}

impl TryFrom<usize> for LocalDimension {
    type Error = BasisError;
    fn try_from(value: usize) -> Result<Self, Self::Error> {
        Self::from_value(value)
    }
}

impl From<LocalDimension> for usize {
    fn from(d: LocalDimension) -> usize {
        d.value()
    }
}

/// Local level index of one site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteLevel(u8);

impl SiteLevel {
    pub fn new(value: u8, local_dimension: LocalDimension) -> Result<Self, BasisError> {
        if (value as usize) < local_dimension.value() {
            Ok(Self(value))
        } else {
            Err(BasisError::InvalidConfiguration(format!(
                "level {value} out of range for local dimension {}",
                local_dimension.value()
            )))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

/// A product-basis state: one level per site, site 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    levels: Vec<SiteLevel>,
}

impl Configuration {
    /// Builds a configuration from raw level indices. Levels are checked against
    /// the largest supported local dimension only; sector membership is checked
    /// by [`SectorBasis::rank`].
    pub fn from_levels(levels: &[u8]) -> Result<Self, BasisError> {
        let levels = levels
            .iter()
            .map(|&l| SiteLevel::new(l, LocalDimension::SpinOne))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[SiteLevel] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn charge(&self, local_dimension: LocalDimension) -> i64 {
        self.levels
            .iter()
            .map(|&l| local_dimension.charge_of(l))
            .sum()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.levels {
            write!(f, "{}", l.0)?;
        }
        Ok(())
    }
}

impl FromStr for Configuration {
    type Err = BasisError;

    /// Parses a digit string such as `"0110"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let levels = s
            .chars()
            .map(|c| {
                c.to_digit(10).map(|d| d as u8).ok_or_else(|| {
                    BasisError::InvalidConfiguration(format!("non-digit character {c:?} in {s:?}"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_levels(&levels)
    }
}

/// Identity of a sector, without its configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SectorInfo {
    pub chain_length: usize,
    pub local_dimension: LocalDimension,
    pub charge: i64,
    pub dimension: usize,
}

/// All configurations of one fixed-charge sector, in strict lexicographic order.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    chain_length: usize,
    local_dimension: LocalDimension,
    charge: i64,
    level_sum: usize,
    words: Vec<u64>,
    // place_values[site] = d^(N - 1 - site)
    place_values: Vec<u64>,
    // suffix_counts[k * (level_sum + 1) + s]: number of length-k level
    // sequences with level sum s, saturating at u64::MAX.
    suffix_counts: Vec<u64>,
}

/// Enumerates the sector of `chain_length` sites with local dimension
/// `local_dimension` (2 or 3) and the given conserved charge.
pub fn enumerate_sector(
    chain_length: usize,
    local_dimension: usize,
    charge: i64,
) -> Result<SectorBasis, BasisError> {
    SectorBasis::new(
        chain_length,
        LocalDimension::from_value(local_dimension)?,
        charge,
    )
}

impl SectorBasis {
    pub fn new(
        chain_length: usize,
        local_dimension: LocalDimension,
        charge: i64,
    ) -> Result<Self, BasisError> {
        if chain_length == 0 {
            return Err(BasisError::EmptyChain);
        }
        if chain_length > local_dimension.max_chain_length() {
            return Err(BasisError::ChainTooLong {
                chain_length,
                limit: local_dimension.max_chain_length(),
            });
        }
        let d = local_dimension.value();
        let level_sum = charge + local_dimension.level_offset() * chain_length as i64;
        let max_sum = ((d - 1) * chain_length) as i64;
        if !(0..=max_sum).contains(&level_sum) {
            return Err(BasisError::EmptySector {
                chain_length,
                local_dimension: d,
                charge,
            });
        }
        let level_sum = level_sum as usize;

        let width = level_sum + 1;
        let mut suffix_counts = vec![0u64; (chain_length + 1) * width];
        suffix_counts[0] = 1;
        for k in 1..=chain_length {
            for s in 0..width {
                let mut total = 0u64;
                for l in 0..d.min(s + 1) {
                    total = total.saturating_add(suffix_counts[(k - 1) * width + s - l]);
                }
                suffix_counts[k * width + s] = total;
            }
        }
        let dimension = suffix_counts[chain_length * width + level_sum];
        if dimension > MAX_SECTOR_DIMENSION {
            return Err(BasisError::Capacity {
                dimension,
                limit: MAX_SECTOR_DIMENSION,
            });
        }

        let mut place_values = vec![1u64; chain_length];
        for site in (0..chain_length.saturating_sub(1)).rev() {
            place_values[site] = place_values[site + 1] * d as u64;
        }

        let mut basis = Self {
            chain_length,
            local_dimension,
            charge,
            level_sum,
            words: Vec::new(),
            place_values,
            suffix_counts,
        };
        let mut words = Vec::with_capacity(dimension as usize);
        basis.fill(0, level_sum, 0, &mut words);
        debug_assert_eq!(words.len() as u64, dimension);
        basis.words = words;
        Ok(basis)
    }

    fn ways(&self, suffix_len: usize, sum: usize) -> u64 {
        if sum > self.level_sum {
            return 0;
        }
        self.suffix_counts[suffix_len * (self.level_sum + 1) + sum]
    }

    // Depth-first generation in lexicographic order, pruned by the suffix counts.
    fn fill(&self, site: usize, remaining: usize, prefix: u64, out: &mut Vec<u64>) {
        if site == self.chain_length {
            out.push(prefix);
            return;
        }
        let d = self.local_dimension.value();
        for l in 0..d.min(remaining + 1) {
            if self.ways(self.chain_length - site - 1, remaining - l) > 0 {
                self.fill(
                    site + 1,
                    remaining - l,
                    prefix + l as u64 * self.place_values[site],
                    out,
                );
            }
        }
    }

    pub fn chain_length(&self) -> usize {
        self.chain_length
    }

    pub fn local_dimension(&self) -> LocalDimension {
        self.local_dimension
    }

    pub fn charge(&self) -> i64 {
        self.charge
    }

    pub fn dimension(&self) -> usize {
        self.words.len()
    }

    pub fn info(&self) -> SectorInfo {
        SectorInfo {
            chain_length: self.chain_length,
            local_dimension: self.local_dimension,
            charge: self.charge,
            dimension: self.dimension(),
        }
    }

    /// Packed words of all configurations, ascending.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// `d^(N - 1 - site)`: the weight of `site` in a packed word.
    pub fn place_value(&self, site: usize) -> u64 {
        self.place_values[site]
    }

    /// Level of `site` in a packed word.
    #[inline]
    pub fn level_at(&self, word: u64, site: usize) -> u8 {
        match self.local_dimension {
            LocalDimension::SpinHalf => ((word >> (self.chain_length - 1 - site)) & 1) as u8,
            LocalDimension::SpinOne => ((word / self.place_values[site]) % 3) as u8,
        }
    }

    /// Unpacks a word into per-site levels, site 0 first.
    pub fn unpack_into(&self, word: u64, levels: &mut [u8]) {
        debug_assert_eq!(levels.len(), self.chain_length);
        match self.local_dimension {
            LocalDimension::SpinHalf => {
                for (site, l) in levels.iter_mut().enumerate() {
                    *l = ((word >> (self.chain_length - 1 - site)) & 1) as u8;
                }
            }
            LocalDimension::SpinOne => {
                let mut w = word;
                for l in levels.iter_mut().rev() {
                    *l = (w % 3) as u8;
                    w /= 3;
                }
            }
        }
    }

    pub fn configuration_of_word(&self, word: u64) -> Configuration {
        let mut raw = vec![0u8; self.chain_length];
        self.unpack_into(word, &mut raw);
        Configuration {
            levels: raw.into_iter().map(SiteLevel).collect(),
        }
    }

    /// Packs a configuration; fails on wrong length or out-of-range levels.
    pub fn word_of(&self, config: &Configuration) -> Result<u64, BasisError> {
        if config.len() != self.chain_length {
            return Err(BasisError::NotMember(config.to_string()));
        }
        let d = self.local_dimension.value();
        let mut word = 0u64;
        for (site, l) in config.levels.iter().enumerate() {
            if l.0 as usize >= d {
                return Err(BasisError::NotMember(config.to_string()));
            }
            word += l.0 as u64 * self.place_values[site];
        }
        Ok(word)
    }

    /// Lexicographic index of a packed word, or `None` if it is not in the sector.
    pub fn rank_word(&self, word: u64) -> Option<usize> {
        let d = self.local_dimension.value() as u64;
        let mut remaining = self.level_sum;
        let mut index = 0u64;
        let mut w = word;
        for site in 0..self.chain_length {
            let place = self.place_values[site];
            let level = w / place;
            if level >= d {
                return None;
            }
            w -= level * place;
            let level = level as usize;
            if level > remaining {
                return None;
            }
            let suffix = self.chain_length - site - 1;
            for lower in 0..level {
                index += self.ways(suffix, remaining - lower);
            }
            remaining -= level;
        }
        if remaining != 0 {
            return None;
        }
        Some(index as usize)
    }

    /// Lexicographic index of `config` within the sector.
    pub fn rank(&self, config: &Configuration) -> Result<usize, BasisError> {
        let word = self.word_of(config)?;
        self.rank_word(word)
            .ok_or_else(|| BasisError::NotMember(config.to_string()))
    }

    /// Packed word of the `index`-th configuration, computed from the count table.
    pub fn unrank_word(&self, index: usize) -> Result<u64, BasisError> {
        if index >= self.dimension() {
            return Err(BasisError::IndexOutOfRange {
                index,
                dimension: self.dimension(),
            });
        }
        let d = self.local_dimension.value();
        let mut remaining = self.level_sum;
        let mut rest = index as u64;
        let mut word = 0u64;
        for site in 0..self.chain_length {
            let suffix = self.chain_length - site - 1;
            let mut level = 0;
            while level < d && level <= remaining {
                let block = self.ways(suffix, remaining - level);
                if rest < block {
                    break;
                }
                rest -= block;
                level += 1;
            }
            word += level as u64 * self.place_values[site];
            remaining -= level;
        }
        Ok(word)
    }

    /// The `index`-th configuration in lexicographic order.
    pub fn unrank(&self, index: usize) -> Result<Configuration, BasisError> {
        self.unrank_word(index)
            .map(|w| self.configuration_of_word(w))
    }

    fn check_site(&self, site: usize) -> Result<(), BasisError> {
        if site < self.chain_length {
            Ok(())
        } else {
            Err(BasisError::SiteOutOfRange {
                site,
                chain_length: self.chain_length,
            })
        }
    }

    /// `counts[m]`: number of sector configurations with level `m` at `site`.
    ///
    /// Independent of `site`: the remaining `N - 1` sites must carry the rest of
    /// the level sum.
    pub fn site_level_counts(&self, site: usize) -> Result<Vec<u64>, BasisError> {
        self.check_site(site)?;
        let d = self.local_dimension.value();
        Ok((0..d)
            .map(|l| {
                if l > self.level_sum {
                    0
                } else {
                    self.ways(self.chain_length - 1, self.level_sum - l)
                }
            })
            .collect())
    }

    /// Row-major `D x N` table of levels, for hot loops over all configurations.
    pub fn level_table(&self) -> Vec<u8> {
        let n = self.chain_length;
        let mut table = vec![0u8; self.dimension() * n];
        for (row, &word) in table.chunks_exact_mut(n).zip(&self.words) {
            self.unpack_into(word, row);
        }
        table
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(s: &str) -> Configuration {
        s.parse().unwrap()
    }

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
    }

    // Independent oracle: every d^N sequence, filtered by charge, sorted.
    fn brute_force(n: usize, d: usize, charge: i64) -> Vec<Vec<u8>> {
        let ld = LocalDimension::from_value(d).unwrap();
        let total = (d as u64).pow(n as u32);
        let mut out = Vec::new();
        for code in 0..total {
            let mut levels = vec![0u8; n];
            let mut c = code;
            for l in levels.iter_mut().rev() {
                *l = (c % d as u64) as u8;
                c /= d as u64;
            }
            let q: i64 = levels.iter().map(|&l| ld.charge_of(SiteLevel(l))).sum();
            if q == charge {
                out.push(levels);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn four_sites_two_up() {
        let basis = enumerate_sector(4, 2, 2).unwrap();
        let listed: Vec<String> = (0..basis.dimension())
            .map(|i| basis.unrank(i).unwrap().to_string())
            .collect();
        assert_eq!(listed, ["0011", "0101", "0110", "1001", "1010", "1100"]);
        assert_eq!(basis.rank(&cfg("0011")).unwrap(), 0);
        assert_eq!(basis.rank(&cfg("1100")).unwrap(), 5);
        assert_eq!(basis.rank(&cfg("0110")).unwrap(), 2);
        assert_eq!(basis.site_level_counts(0).unwrap(), vec![3, 3]);
    }

    #[test]
    fn ten_sites_half_filling() {
        assert_eq!(enumerate_sector(10, 2, 5).unwrap().dimension(), 252);
    }

    #[test]
    fn spin_one_zero_magnetization_matches_brute_force() {
        let basis = enumerate_sector(6, 3, 0).unwrap();
        let oracle = brute_force(6, 3, 0);
        assert_eq!(oracle.len(), 141);
        assert_eq!(basis.dimension(), 141);
        for (i, levels) in oracle.iter().enumerate() {
            let c = basis.unrank(i).unwrap();
            let got: Vec<u8> = c.levels().iter().map(|l| l.value()).collect();
            assert_eq!(&got, levels);
        }
        // smallest zero-magnetization configuration: m = (-1,-1,-1,+1,+1,+1)
        assert_eq!(basis.unrank(0).unwrap().to_string(), "000222");
    }

    #[test]
    fn spin_one_counts_are_symmetric() {
        let basis = enumerate_sector(6, 3, 0).unwrap();
        let oracle = brute_force(6, 3, 0);
        for site in 0..6 {
            let mut counts = [0u64; 3];
            for levels in &oracle {
                counts[levels[site] as usize] += 1;
            }
            let got = basis.site_level_counts(site).unwrap();
            assert_eq!(got, counts.to_vec());
            assert_eq!(got[0], got[2]);
            assert_eq!(got.iter().sum::<u64>(), 141);
        }
    }

    #[test]
    fn spin_one_two_site_order() {
        let basis = enumerate_sector(2, 3, 0).unwrap();
        let listed: Vec<String> = (0..3)
            .map(|i| basis.unrank(i).unwrap().to_string())
            .collect();
        assert_eq!(listed, ["02", "11", "20"]);
    }

    #[test]
    fn matches_brute_force_for_small_chains() {
        for d in [2usize, 3] {
            for n in 1..=7usize {
                let ld = LocalDimension::from_value(d).unwrap();
                let (lo, hi) = match ld {
                    LocalDimension::SpinHalf => (0, n as i64),
                    LocalDimension::SpinOne => (-(n as i64), n as i64),
                };
                for q in lo..=hi {
                    let basis = enumerate_sector(n, d, q).unwrap();
                    let oracle = brute_force(n, d, q);
                    assert_eq!(basis.dimension(), oracle.len());
                    for (i, &w) in basis.words().iter().enumerate() {
                        let c = basis.configuration_of_word(w);
                        let got: Vec<u8> = c.levels().iter().map(|l| l.value()).collect();
                        assert_eq!(got, oracle[i]);
                        assert_eq!(basis.rank_word(w), Some(i));
                        assert_eq!(basis.unrank_word(i).unwrap(), w);
                        assert_eq!(c.charge(ld), q);
                    }
                }
            }
        }
    }

    #[test]
    fn strictly_ordered() {
        let basis = enumerate_sector(12, 3, 1).unwrap();
        assert!(basis.words().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn dimension_is_binomial() {
        for n in 1..=20usize {
            for m in 0..=n {
                let basis = enumerate_sector(n, 2, m as i64).unwrap();
                assert_eq!(
                    basis.dimension() as u64,
                    binomial(n as u64, m as u64),
                    "N={n} M={m}"
                );
            }
        }
    }

    #[test]
    fn up_count_is_shifted_binomial() {
        for n in 2..=16u64 {
            for m in 1..n {
                let basis = enumerate_sector(n as usize, 2, m as i64).unwrap();
                let counts = basis.site_level_counts(3.min(n as usize - 1)).unwrap();
                assert_eq!(counts[1], binomial(n - 1, m - 1));
                // counts[up] / D = M / N, cross-multiplied
                assert_eq!(
                    counts[1] as u128 * n as u128,
                    basis.dimension() as u128 * m as u128
                );
            }
        }
    }

    #[test]
    fn errors() {
        assert_eq!(enumerate_sector(0, 2, 0), Err(BasisError::EmptyChain));
        assert_eq!(
            enumerate_sector(4, 4, 0),
            Err(BasisError::UnsupportedLocalDimension(4))
        );
        assert!(matches!(
            enumerate_sector(4, 2, 5),
            Err(BasisError::EmptySector { .. })
        ));
        assert!(matches!(
            enumerate_sector(4, 2, -1),
            Err(BasisError::EmptySector { .. })
        ));
        assert!(matches!(
            enumerate_sector(4, 3, -5),
            Err(BasisError::EmptySector { .. })
        ));
        assert!(matches!(
            enumerate_sector(40, 2, 20),
            Err(BasisError::Capacity { .. })
        ));
        assert!(matches!(
            enumerate_sector(64, 2, 1),
            Err(BasisError::ChainTooLong { .. })
        ));

        let basis = enumerate_sector(4, 2, 2).unwrap();
        assert!(matches!(
            basis.rank(&cfg("0111")),
            Err(BasisError::NotMember(_))
        ));
        assert!(matches!(
            basis.rank(&cfg("011")),
            Err(BasisError::NotMember(_))
        ));
        assert!(matches!(
            basis.rank(&cfg("0120")),
            Err(BasisError::NotMember(_))
        ));
        assert!(matches!(
            basis.unrank(6),
            Err(BasisError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            basis.site_level_counts(4),
            Err(BasisError::SiteOutOfRange { .. })
        ));
        assert!("01a".parse::<Configuration>().is_err());
    }

    #[test]
    fn capacity_bound_is_inclusive() {
        // C(34,17) = 2_333_606_220 > 2^31; C(33,16) = 1_166_803_110 < 2^31
        let err = SectorBasis::new(34, LocalDimension::SpinHalf, 17).unwrap_err();
        assert_eq!(
            err,
            BasisError::Capacity {
                dimension: 2_333_606_220,
                limit: MAX_SECTOR_DIMENSION
            }
        );
    }

    #[test]
    fn level_table_matches_words() {
        let basis = enumerate_sector(5, 3, 1).unwrap();
        let table = basis.level_table();
        for (i, &w) in basis.words().iter().enumerate() {
            for site in 0..5 {
                assert_eq!(table[i * 5 + site], basis.level_at(w, site));
            }
        }
    }
}
