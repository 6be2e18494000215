use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Disjoint labeled parts plus an exceptional set covering `0..universe`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPartition", into = "RawPartition")]
pub struct Partition {
    universe: usize,
    parts: Vec<Vec<u32>>,
    exceptional: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct RawPartition {
    universe: usize,
    parts: Vec<Vec<u32>>,
    #[serde(default)]
    exceptional: Vec<u32>,
}

impl TryFrom<RawPartition> for Partition {
    type Error = Error;
    fn try_from(r: RawPartition) -> Result<Self> {
        Partition::new(r.universe, r.parts, r.exceptional)
    }
}

impl From<Partition> for RawPartition {
    fn from(p: Partition) -> Self {
        RawPartition {
            universe: p.universe,
            parts: p.parts,
            exceptional: p.exceptional,
        }
    }
}

impl Partition {
    /// Validates disjointness and coverage; parts and their contents are
    /// kept in the given order apart from sorting each set.
    pub fn new(universe: usize, mut parts: Vec<Vec<u32>>, mut exceptional: Vec<u32>) -> Result<Self> {
        let mut seen = vec![false; universe];
        for set in parts.iter_mut().chain(std::iter::once(&mut exceptional)) {
            set.sort_unstable();
            for &v in set.iter() {
                let slot = seen.get_mut(v as usize).ok_or_else(|| {
                    Error::InvalidPartition(format!("element {v} outside universe {universe}"))
                })?;
                if *slot {
                    return Err(Error::InvalidPartition(format!("element {v} repeated")));
                }
                *slot = true;
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("element {v} uncovered")));
        }
        Ok(Partition {
            universe,
            parts,
            exceptional,
        })
    }

    /// Contiguous blocks of near-equal size.
    pub fn balanced(universe: usize, t: usize) -> Result<Self> {
        if t == 0 || t > universe.max(1) {
            return Err(Error::InvalidPartition(format!(
                "cannot split {universe} elements into {t} parts"
            )));
        }
        let parts = (0..t)
            .map(|i| {
                let lo = i * universe / t;
                let hi = (i + 1) * universe / t;
                (lo as u32..hi as u32).collect()
            })
            .collect();
        Partition::new(universe, parts, Vec::new())
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn parts(&self) -> &[Vec<u32>] {
        &self.parts
    }

    pub fn exceptional(&self) -> &[u32] {
        &self.exceptional
    }

    pub fn part_count(&self) -> usize {
        self.parts.len()
    }

    /// `label[v] = Some(i)` when `v` lies in part `i`, `None` for the exceptional set.
    pub fn labels(&self) -> Vec<Option<usize>> {
        let mut label = vec![None; self.universe];
        for (i, part) in self.parts.iter().enumerate() {
            for &v in part {
                label[v as usize] = Some(i);
            }
        }
        label
    }

    /// Non-exceptional part sizes differ by at most one.
    pub fn is_equitable(&self) -> bool {
        let sizes = self.parts.iter().map(Vec::len);
        match (sizes.clone().min(), sizes.max()) {
            (Some(lo), Some(hi)) => hi - lo <= 1,
            _ => true,
        }
    }
}

/// A [`Partition`] whose non-exceptional parts differ in size by at most one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Partition", into = "Partition")]
pub struct Equipartition(Partition);

impl Equipartition {
    pub fn new(partition: Partition) -> Result<Self> {
        if partition.is_equitable() {
            Ok(Equipartition(partition))
        } else {
            Err(Error::InvalidPartition("part sizes differ by more than one".into()))
        }
    }

    pub fn balanced(universe: usize, t: usize) -> Result<Self> {
        Partition::balanced(universe, t).map(Equipartition)
    }

    pub fn partition(&self) -> &Partition {
        &self.0
    }

    pub fn into_partition(self) -> Partition {
        self.0
    }
}

impl TryFrom<Partition> for Equipartition {
    type Error = Error;
    fn try_from(p: Partition) -> Result<Self> {
        Equipartition::new(p)
    }
}

impl From<Equipartition> for Partition {
    fn from(e: Equipartition) -> Self {
        e.0
    }
}

impl std::ops::Deref for Equipartition {
    type Target = Partition;
    fn deref(&self) -> &Partition {
        &self.0
    }
}
