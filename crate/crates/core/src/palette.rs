use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered triple of colors. Colors are 0-based in the library API.
pub type Pattern = [u32; 3];

/// Largest color count accepted by [`Palette::canonical_form`].
pub const CANONICAL_COLOR_LIMIT: usize = 8;

/// A finite palette: `color_count` colors and a set of ordered patterns.
///
/// Patterns are kept sorted and deduplicated so equality, hashing and
/// iteration are deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawPalette", into = "RawPalette")]
pub struct Palette {
    color_count: usize,
    patterns: Vec<Pattern>,
}

#[derive(Serialize, Deserialize)]
struct RawPalette {
    color_count: usize,
    patterns: Vec<Pattern>,
}

impl TryFrom<RawPalette> for Palette {
    type Error = Error;
    fn try_from(raw: RawPalette) -> Result<Self> {
        Palette::new(raw.color_count, raw.patterns)
    }
}

impl From<Palette> for RawPalette {
    fn from(p: Palette) -> Self {
        RawPalette {
            color_count: p.color_count,
            patterns: p.patterns,
        }
    }
}

/// Class map returned by [`Palette::blow_up`]: `class_of[v]` is the color of
/// the original palette that new color `v` came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlowUp {
    pub palette: Palette,
    pub class_of: Vec<u32>,
}

impl Palette {
    pub fn new(color_count: usize, patterns: impl IntoIterator<Item = Pattern>) -> Result<Self> {
        let set: BTreeSet<Pattern> = patterns.into_iter().collect();
        for p in &set {
            for &x in p {
                if x as usize >= color_count {
                    return Err(Error::ColorOutOfRange {
                        color: x,
                        color_count,
                    });
                }
            }
        }
        Ok(Palette {
            color_count,
            patterns: set.into_iter().collect(),
        })
    }

    pub fn empty(color_count: usize) -> Self {
        Palette {
            color_count,
            patterns: Vec::new(),
        }
    }

    /// All `c^3` patterns on `c` colors.
    pub fn full(color_count: usize) -> Self {
        let c = color_count as u32;
        let patterns = (0..c)
            .flat_map(|a| (0..c).flat_map(move |b| (0..c).map(move |d| [a, b, d])))
            .collect();
        Palette {
            color_count,
            patterns,
        }
    }

    /// The palette with pattern set `{ all patterns p : bit i of mask is set }`
    /// where patterns are indexed lexicographically. Requires `c^3 <= 64`.
    pub fn from_mask(color_count: usize, mask: u64) -> Self {
        let all = Palette::full(color_count);
        let patterns = all
            .patterns
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, p)| *p)
            .collect();
        Palette {
            color_count,
            patterns,
        }
    }

    pub fn color_count(&self) -> usize {
        self.color_count
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn pattern_count(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn contains(&self, p: &Pattern) -> bool {
        self.patterns.binary_search(p).is_ok()
    }

    /// Colors that appear in at least one pattern.
    pub fn used_colors(&self) -> BTreeSet<u32> {
        self.patterns.iter().flatten().copied().collect()
    }

    /// Exact density `e(P) / c(P)^3`.
    pub fn density(&self) -> Result<Ratio<u64>> {
        if self.color_count == 0 {
            return Err(Error::Degenerate("palette has no colors".into()));
        }
        let c = self.color_count as u64;
        Ok(Ratio::new(self.patterns.len() as u64, c * c * c))
    }

    pub fn reverse(&self) -> Palette {
        let patterns: BTreeSet<Pattern> = self.patterns.iter().map(|&[a, b, c]| [c, b, a]).collect();
        Palette {
            color_count: self.color_count,
            patterns: patterns.into_iter().collect(),
        }
    }

    /// Subpalette induced on `colors`, relabeled to `0..|U|` in increasing order.
    pub fn induced(&self, colors: &BTreeSet<u32>) -> Result<Palette> {
        if let Some(&x) = colors.iter().find(|&&x| x as usize >= self.color_count) {
            return Err(Error::ColorOutOfRange {
                color: x,
                color_count: self.color_count,
            });
        }
        let mut relabel = vec![u32::MAX; self.color_count];
        for (i, &x) in colors.iter().enumerate() {
            relabel[x as usize] = i as u32;
        }
        let patterns = self
            .patterns
            .iter()
            .filter(|p| p.iter().all(|&x| relabel[x as usize] != u32::MAX))
            .map(|p| p.map(|x| relabel[x as usize]));
        Palette::new(colors.len(), patterns)
    }

    /// Applies a color map `map[old] = new` into a palette on `color_count` colors.
    pub fn relabel(&self, map: &[u32], color_count: usize) -> Result<Palette> {
        if map.len() != self.color_count {
            return Err(Error::DimensionMismatch {
                expected: self.color_count,
                got: map.len(),
            });
        }
        Palette::new(
            color_count,
            self.patterns.iter().map(|p| p.map(|x| map[x as usize])),
        )
    }

    /// Blow-up replacing color `i` by `sizes[i]` copies.
    pub fn blow_up(&self, sizes: &[usize]) -> Result<BlowUp> {
        if sizes.len() != self.color_count {
            return Err(Error::DimensionMismatch {
                expected: self.color_count,
                got: sizes.len(),
            });
        }
        let class_of: Vec<u32> = sizes
            .iter()
            .enumerate()
            .flat_map(|(i, &s)| std::iter::repeat_n(i as u32, s))
            .collect();
        let mut members: Vec<Vec<u32>> = vec![Vec::new(); self.color_count];
        for (v, &cls) in class_of.iter().enumerate() {
            members[cls as usize].push(v as u32);
        }
        let mut patterns = Vec::new();
        for &[i, j, k] in &self.patterns {
            for &x in &members[i as usize] {
                for &y in &members[j as usize] {
                    for &z in &members[k as usize] {
                        patterns.push([x, y, z]);
                    }
                }
            }
        }
        let palette = Palette::new(class_of.len(), patterns)?;
        Ok(BlowUp { palette, class_of })
    }

    /// Lexicographically least sorted pattern set over all color permutations.
    pub fn canonical_form(&self) -> Result<Palette> {
        let c = self.color_count;
        if c > CANONICAL_COLOR_LIMIT {
            return Err(Error::TooLarge {
                what: "canonical_form",
                limit: CANONICAL_COLOR_LIMIT,
                got: c,
            });
        }
        let mut best: Option<Vec<Pattern>> = None;
        let mut perm: Vec<u32> = (0..c as u32).collect();
        let mut buf = Vec::with_capacity(self.patterns.len());
        for_each_permutation(&mut perm, &mut |perm| {
            buf.clear();
            buf.extend(self.patterns.iter().map(|p| p.map(|x| perm[x as usize])));
            buf.sort_unstable();
            if best.as_ref().is_none_or(|b| buf < *b) {
                best = Some(buf.clone());
            }
        });
        Ok(Palette {
            color_count: c,
            patterns: best.unwrap_or_default(),
        })
    }

    /// True when every pattern uses three distinct colors.
    pub fn is_nondegenerate(&self) -> bool {
        self.patterns.iter().all(|&p| is_nondegenerate_pattern(p))
    }
}

pub fn is_nondegenerate_pattern([a, b, c]: Pattern) -> bool {
    a != b && a != c && b != c
}

/// Calls `f` on every permutation of `items` (Heap's algorithm).
pub fn for_each_permutation<T, F: FnMut(&[T])>(items: &mut [T], f: &mut F) {
    let n = items.len();
    let mut c = vec![0usize; n];
    f(items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            f(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

impl fmt::Display for Palette {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::format::write_palette(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pal(c: usize, ps: &[[u32; 3]]) -> Palette {
        Palette::new(c, ps.iter().copied()).unwrap()
    }

    #[test]
    fn density_basics() {
        assert_eq!(Palette::full(2).density().unwrap(), Ratio::new(1, 1));
        assert_eq!(Palette::empty(3).density().unwrap(), Ratio::new(0, 1));
        assert_eq!(pal(3, &[[0, 1, 2]]).density().unwrap(), Ratio::new(1, 27));
        assert!(Palette::empty(0).density().is_err());
    }

    #[test]
    fn reverse_example() {
        let p = pal(3, &[[0, 1, 2], [0, 2, 1]]);
        assert_eq!(p.reverse(), pal(3, &[[2, 1, 0], [1, 2, 0]]));
        assert_eq!(p.reverse().reverse(), p);
        let q = pal(1, &[[0, 0, 0]]);
        assert_eq!(q.reverse(), q);
    }

    #[test]
    fn induced_examples() {
        let p = pal(3, &[[0, 1, 2], [0, 0, 1]]);
        let u: BTreeSet<u32> = [0, 1].into();
        assert_eq!(p.induced(&u).unwrap(), pal(2, &[[0, 0, 1]]));
        assert_eq!(p.induced(&BTreeSet::new()).unwrap(), Palette::empty(0));
        assert_eq!(p.induced(&(0..3).collect()).unwrap(), p);
        assert!(p.induced(&[7].into()).is_err());
    }

    #[test]
    fn blow_up_single_loop() {
        let p = pal(1, &[[0, 0, 0]]);
        let b = p.blow_up(&[2]).unwrap();
        assert_eq!(b.palette, Palette::full(2));
        assert_eq!(b.class_of, vec![0, 0]);
    }

    #[test]
    fn blow_up_zero_size_deletes_class() {
        let p = pal(2, &[[0, 1, 1], [0, 0, 0]]);
        let b = p.blow_up(&[2, 0]).unwrap();
        assert_eq!(b.palette, Palette::full(2));
    }

    #[test]
    fn single_pattern_classes_on_two_colors() {
        let classes: BTreeSet<Palette> = Palette::full(2)
            .patterns()
            .iter()
            .map(|&p| pal(2, &[p]).canonical_form().unwrap())
            .collect();
        assert_eq!(classes.len(), 4);
    }

    #[test]
    fn canonical_rejects_large() {
        assert!(Palette::empty(9).canonical_form().is_err());
    }

    #[test]
    fn heap_permutations_count() {
        let mut v: Vec<u32> = (0..5).collect();
        let mut seen = BTreeSet::new();
        for_each_permutation(&mut v, &mut |p| {
            seen.insert(p.to_vec());
        });
        assert_eq!(seen.len(), 120);
    }

    #[test]
    fn serde_validates() {
        let bad = r#"{"color_count":1,"patterns":[[0,0,1]]}"#;
        assert!(serde_json::from_str::<Palette>(bad).is_err());
        let p = pal(2, &[[0, 1, 1]]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<Palette>(&s).unwrap(), p);
    }
}
