use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::MapParams;

/// A shuffle of a deck of `a` cards with a deck of `b` cards.
///
/// `perm[i]` is the (0-based) output position of the `i`-th entry of the
/// unsorted image `(x_1, ..., x_a, x_{a+1} - x_s, ..., x_{a+b} - x_s)`, so
/// both decks keep their internal order: `perm[0] < ... < perm[a-1]` and
/// `perm[a] < ... < perm[a+b-1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shuffle {
    perm: Vec<usize>,
    a: usize,
}

impl Shuffle {
    /// Builds a shuffle from 1-based images `(pi(1), ..., pi(a+b))`.
    pub fn from_one_based(images: &[usize], p: MapParams) -> Result<Self> {
        let perm = images
            .iter()
            .map(|&v| {
                v.checked_sub(1).ok_or_else(|| Error::Parameter("shuffle images are 1-based".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(perm, p)
    }

    /// Builds a shuffle from 0-based images.
    pub fn new(perm: Vec<usize>, p: MapParams) -> Result<Self> {
        let n = p.dim();
        if perm.len() != n {
            return Err(Error::Parameter(format!("shuffle of length {} for a+b = {n}", perm.len())));
        }
        let mut seen = vec![false; n];
        for &v in &perm {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(Error::Parameter(format!("{perm:?} is not a permutation")));
            }
        }
        let a = p.a();
        let increasing = |s: &[usize]| s.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&perm[..a]) || !increasing(&perm[a..]) {
            return Err(Error::Parameter(format!("{perm:?} does not preserve the two decks")));
        }
        Ok(Shuffle { perm, a })
    }

    pub(crate) fn from_raw(perm: Vec<usize>, a: usize) -> Self {
        Shuffle { perm, a }
    }

    pub fn identity(p: MapParams) -> Self {
        Shuffle { perm: (0..p.dim()).collect(), a: p.a() }
    }

    /// All `binomial(a+b, a)` shuffles in lexicographic order of the
    /// positions taken by the first deck.
    pub fn all(p: MapParams) -> Vec<Shuffle> {
        let n = p.dim();
        let a = p.a();
        let mut out = Vec::new();
        let mut chosen: Vec<usize> = (0..a).collect();
        loop {
            let mut perm = Vec::with_capacity(n);
            perm.extend_from_slice(&chosen);
            perm.extend((0..n).filter(|v| !chosen.contains(v)));
            out.push(Shuffle { perm, a });
            // next a-combination of 0..n
            let Some(i) = (0..a).rev().find(|&i| chosen[i] < n - a + i) else {
                break;
            };
            chosen[i] += 1;
            for j in i + 1..a {
                chosen[j] = chosen[j - 1] + 1;
            }
        }
        out
    }

    /// 0-based output positions.
    pub fn positions(&self) -> &[usize] {
        &self.perm
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.perm.iter().map(|v| v + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn deck_one(&self) -> usize {
        self.a
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &v)| i == v)
    }
}

impl Serialize for Shuffle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.one_based())
    }
}

impl std::fmt::Display for Shuffle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.one_based().iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_binomially_many() {
        for (a, b) in [(1, 1), (1, 2), (2, 1), (2, 2), (2, 3), (3, 2), (4, 4)] {
            let p = MapParams::new(a, b).unwrap();
            let all = Shuffle::all(p);
            assert_eq!(all.len(), binomial(a + b, a));
            for s in &all {
                assert!(Shuffle::new(s.positions().to_vec(), p).is_ok());
            }
            let mut dedup = all.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), all.len());
        }
    }

    #[test]
    fn rejects_deck_breaking_permutations() {
        let p = MapParams::new(2, 1).unwrap();
        assert!(Shuffle::from_one_based(&[2, 3, 1], p).is_ok());
        assert!(Shuffle::from_one_based(&[3, 1, 2], p).is_err());
        assert!(Shuffle::from_one_based(&[1, 1, 2], p).is_err());
        assert!(Shuffle::from_one_based(&[1, 2], p).is_err());
        assert!(Shuffle::from_one_based(&[0, 1, 2], p).is_err());
    }

    #[test]
    fn displays_one_based() {
        let p = MapParams::new(2, 1).unwrap();
        let s = Shuffle::from_one_based(&[2, 3, 1], p).unwrap();
        assert_eq!(s.to_string(), "(2,3,1)");
    }
}
