use smallvec::SmallVec;

use super::{encoding_error, Group, GroupSpec, RadialModel};
use crate::error::Result;

/// Reduced word. Letter `2i` is generator `i`, letter `2i + 1` its inverse.
pub type Word = SmallVec<[u8; 16]>;

/// Free group on `rank` generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FreeGroup {
    rank: u32,
}

#[inline]
fn inverse_letter(l: u8) -> u8 {
    l ^ 1
}

impl FreeGroup {
    pub fn new(rank: u32) -> Self {
        assert!((1..=127).contains(&rank), "free group rank must lie in 1..=127");
        Self { rank }
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    /// Parses words like `"a b A"`: lowercase letters are generators, uppercase inverses.
    pub fn word(&self, text: &str) -> Word {
        let letters: Vec<u8> = text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| {
                let i = c.to_ascii_lowercase() as u8 - b'a';
                assert!((i as u32) < self.rank, "letter {c} outside rank {}", self.rank);
                2 * i + u8::from(c.is_ascii_uppercase())
            })
            .collect();
        letters.iter().fold(Word::new(), |acc, &l| {
            self.multiply(&acc, &Word::from_slice(&[l]))
        })
    }
}

impl Group for FreeGroup {
    type Elem = Word;

    fn spec(&self) -> GroupSpec {
        GroupSpec::Free { rank: self.rank }
    }

    fn identity(&self) -> Word {
        Word::new()
    }

    fn multiply(&self, a: &Word, b: &Word) -> Word {
        let mut cancel = 0;
        while cancel < a.len().min(b.len())
            && a[a.len() - 1 - cancel] == inverse_letter(b[cancel])
        {
            cancel += 1;
        }
        let mut out = Word::with_capacity(a.len() + b.len() - 2 * cancel);
        out.extend_from_slice(&a[..a.len() - cancel]);
        out.extend_from_slice(&b[cancel..]);
        out
    }

    fn inverse(&self, a: &Word) -> Word {
        a.iter().rev().map(|&l| inverse_letter(l)).collect()
    }

    fn generators(&self) -> Vec<Word> {
        (0..2 * self.rank as u8).map(|l| Word::from_slice(&[l])).collect()
    }

    fn word_length(&self, g: &Word) -> Option<u32> {
        Some(g.len() as u32)
    }

    fn encode(&self, g: &Word, out: &mut Vec<u8>) {
        out.extend_from_slice(g);
    }

    fn decode(&self, bytes: &[u8]) -> Result<Word> {
        if bytes.iter().any(|&l| l as u32 >= 2 * self.rank) {
            return Err(encoding_error(self, "letter outside alphabet"));
        }
        if bytes.windows(2).any(|w| w[1] == inverse_letter(w[0])) {
            return Err(encoding_error(self, "word is not reduced"));
        }
        Ok(Word::from_slice(bytes))
    }

    fn abelianize(&self, g: &Word) -> Vec<i64> {
        let mut v = vec![0; self.rank as usize];
        for &l in g {
            v[(l / 2) as usize] += if l % 2 == 0 { 1 } else { -1 };
        }
        v
    }

    fn abelian_orders(&self) -> Vec<Option<u32>> {
        vec![None; self.rank as usize]
    }

    fn radial_model(&self) -> Option<RadialModel> {
        let degree = 2 * self.rank;
        Some(RadialModel {
            outward: (degree as f64 - 1.0) / degree as f64,
            degree,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_on_multiply() {
        let f2 = FreeGroup::new(2);
        assert_eq!(f2.multiply(&f2.word("ab"), &f2.word("Ba")), f2.word("aa"));
        assert_eq!(f2.word("aA"), Word::new());
    }

    #[test]
    fn inverse_reverses_and_flips() {
        let f2 = FreeGroup::new(2);
        assert_eq!(f2.inverse(&f2.word("ab")), f2.word("BA"));
    }

    #[test]
    fn decode_rejects_unreduced() {
        let f2 = FreeGroup::new(2);
        assert!(f2.decode(&[0, 1]).is_err());
        assert!(f2.decode(&[4]).is_err());
        assert_eq!(f2.decode(&[0, 2]).unwrap(), f2.word("ab"));
    }

    #[test]
    fn abelianization_counts_exponents() {
        let f2 = FreeGroup::new(2);
        assert_eq!(f2.abelianize(&f2.word("abAb")), vec![0, 2]);
    }
}
