//! Set partitions of subsystem indices.
//!
//! Partitions are enumerated as restricted growth strings (`a_0 = 0`,
//! `a_i <= 1 + max(a_0..a_{i-1})`), which yields each partition exactly once with
//! blocks ordered by their smallest element.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_SUBSYSTEMS: usize = 6;

/// Blocks of a set partition of `{0, .., n-1}`; each block sorted, blocks ordered by first element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition(pub Vec<Vec<usize>>);

impl Partition {
    pub fn finest(n: usize) -> Self {
        Partition((0..n).map(|i| vec![i]).collect())
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.0
    }

    pub fn num_parts(&self) -> usize {
        self.0.len()
    }

    pub fn max_part_size(&self) -> usize {
        self.0.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.0
            .iter()
            .all(|b| coarser.0.iter().any(|c| b.iter().all(|x| c.contains(x))))
    }

    fn from_rgs(rgs: &[usize]) -> Self {
        let k = rgs.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); k];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(i);
        }
        Partition(blocks)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|b| b.iter().map(|i| (i + 1).to_string()).collect())
            .collect();
        write!(f, "{}", parts.join("|"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionFilter {
    ExactlyKParts(usize),
    MaxPartSize(usize),
}

impl PartitionFilter {
    pub fn accepts(&self, p: &Partition) -> bool {
        match *self {
            PartitionFilter::ExactlyKParts(k) => p.num_parts() == k,
            PartitionFilter::MaxPartSize(k) => p.max_part_size() <= k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSet {
    pub n: usize,
    pub partitions: Vec<Partition>,
}

/// All partitions of `n` elements (n ≤ 6) passing `filter`.
pub fn enumerate_partitions(n: usize, filter: PartitionFilter) -> Result<PartitionSet> {
    if n > MAX_SUBSYSTEMS {
        return Err(Error::NTooLarge(n));
    }
    let k = match filter {
        PartitionFilter::ExactlyKParts(k) | PartitionFilter::MaxPartSize(k) => k,
    };
    if n == 0 || k == 0 || k > n {
        return Err(Error::KOutOfRange(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let mut partitions = Vec::new();
    let mut rgs = vec![0usize; n];
    loop {
        let p = Partition::from_rgs(&rgs);
        if filter.accepts(&p) {
            partitions.push(p);
        }
        // next restricted growth string
        let mut i = n;
        loop {
            if i <= 1 {
                return Ok(PartitionSet { n, partitions });
            }
            i -= 1;
            let prefix_max = rgs[..i].iter().copied().max().unwrap_or(0);
            if rgs[i] <= prefix_max {
                rgs[i] += 1;
                rgs[i + 1..].iter_mut().for_each(|x| *x = 0);
                break;
            }
        }
    }
}

/// Size-`k` subsets of `0..d` in lexicographic order.
pub fn subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > d {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < d - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Stirling numbers of the second kind by the recurrence S(n,k) = k S(n-1,k) + S(n-1,k-1).
    fn stirling2(n: usize, k: usize) -> usize {
        let mut s = vec![vec![0usize; n + 1]; n + 1];
        s[0][0] = 1;
        for i in 1..=n {
            for j in 1..=i {
                s[i][j] = j * s[i - 1][j] + s[i - 1][j - 1];
            }
        }
        s[n][k]
    }

    #[test]
    fn three_elements_two_parts() {
        let set = enumerate_partitions(3, PartitionFilter::ExactlyKParts(2)).unwrap();
        let shown: Vec<String> = set.partitions.iter().map(|p| p.to_string()).collect();
        assert_eq!(shown.len(), 3);
        for want in ["1|23", "2|13", "3|12"] {
            let found = set.partitions.iter().any(|p| {
                let mut blocks: Vec<String> = p
                    .blocks()
                    .iter()
                    .map(|b| b.iter().map(|i| (i + 1).to_string()).collect())
                    .collect();
                blocks.sort();
                let mut w: Vec<String> = want.split('|').map(str::to_string).collect();
                w.sort();
                blocks == w
            });
            assert!(found, "missing {want}, got {shown:?}");
        }
    }

    #[test]
    fn max_part_size_two_of_three() {
        let set = enumerate_partitions(3, PartitionFilter::MaxPartSize(2)).unwrap();
        assert_eq!(set.partitions.len(), 4);
        assert!(set.partitions.iter().all(|p| p.num_parts() >= 2));
    }

    #[test]
    fn exactly_n_parts_is_finest() {
        for n in 1..=6 {
            let set = enumerate_partitions(n, PartitionFilter::ExactlyKParts(n)).unwrap();
            assert_eq!(set.partitions, vec![Partition::finest(n)]);
        }
    }

    #[test]
    fn counts_match_stirling_numbers() {
        for n in 1..=6 {
            let mut total = 0;
            for k in 1..=n {
                let set = enumerate_partitions(n, PartitionFilter::ExactlyKParts(k)).unwrap();
                assert_eq!(set.partitions.len(), stirling2(n, k), "S({n},{k})");
                total += set.partitions.len();
            }
            let all = enumerate_partitions(n, PartitionFilter::MaxPartSize(n)).unwrap();
            assert_eq!(all.partitions.len(), total);
        }
    }

    #[test]
    fn partitions_are_disjoint_covers_without_duplicates() {
        let set = enumerate_partitions(5, PartitionFilter::MaxPartSize(5)).unwrap();
        let mut seen = std::collections::HashSet::new();
        for p in &set.partitions {
            let mut all: Vec<usize> = p.blocks().iter().flatten().copied().collect();
            all.sort();
            assert_eq!(all, (0..5).collect::<Vec<_>>());
            assert!(seen.insert(p.clone()));
        }
    }

    #[test]
    fn too_many_subsystems() {
        assert_eq!(
            enumerate_partitions(7, PartitionFilter::ExactlyKParts(2)),
            Err(Error::NTooLarge(7))
        );
    }

    #[test]
    fn subsets_are_binomial() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(5, 3).len(), 10);
        assert_eq!(subsets(3, 1), vec![vec![0], vec![1], vec![2]]);
    }
}
