use smallvec::SmallVec;

use super::{encoding_error, read_i64, Group, GroupSpec};
use crate::error::Result;

/// Element of `L ≀ ℤ`: a cursor and a finitely supported lamp configuration.
///
/// Lamps are `(position, value)` pairs sorted by position with no zero values,
/// so structural equality is group equality. Positions and values are kept in
/// `i16`; desk-scale walks stay far inside that range and overflow panics.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LampElem {
    pub cursor: i16,
    pub lamps: SmallVec<[(i16, i16); 6]>,
}

impl LampElem {
    pub fn new(cursor: i16, lamps: &[(i16, i16)]) -> Self {
        Self {
            cursor,
            lamps: SmallVec::from_slice(lamps),
        }
    }
}

/// Wreath product of a cyclic lamp group (finite order or ℤ) with ℤ.
///
/// Generators: cursor steps `t^{±1}` and lamp increments `a^{±1}` at the
/// cursor, acting by right multiplication. For `ℤ_2` the lamp toggle is an
/// involution, leaving three generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Wreath {
    lamp_order: Option<u16>,
}

fn shift(p: i16, by: i16) -> i16 {
    p.checked_add(by).expect("lamp position outside i16 range")
}

impl Wreath {
    /// `ℤ_m ≀ ℤ`.
    pub fn lamplighter(m: u32) -> Self {
        assert!((2..=i16::MAX as u32).contains(&m), "lamp order must lie in 2..=32767");
        Self { lamp_order: Some(m as u16) }
    }

    /// `ℤ ≀ ℤ`.
    pub fn integer_lamps() -> Self {
        Self { lamp_order: None }
    }

    pub fn lamp_order(&self) -> Option<u16> {
        self.lamp_order
    }

    fn add_values(&self, a: i16, b: i16) -> i16 {
        match self.lamp_order {
            Some(m) => ((a as i32 + b as i32).rem_euclid(m as i32)) as i16,
            None => a.checked_add(b).expect("lamp value outside i16 range"),
        }
    }

    fn negate_value(&self, a: i16) -> i16 {
        match self.lamp_order {
            Some(m) => ((-(a as i32)).rem_euclid(m as i32)) as i16,
            None => -a,
        }
    }

    fn lamp_cost(&self, v: i16) -> u32 {
        match self.lamp_order {
            Some(m) => (v as u32).min(m as u32 - v as u32),
            None => v.unsigned_abs() as u32,
        }
    }

    fn valid_value(&self, v: i64) -> bool {
        match self.lamp_order {
            Some(m) => v > 0 && v < m as i64,
            None => v != 0 && (i16::MIN as i64..=i16::MAX as i64).contains(&v),
        }
    }
}

impl Group for Wreath {
    type Elem = LampElem;

    fn spec(&self) -> GroupSpec {
        match self.lamp_order {
            Some(m) => GroupSpec::Lamplighter { lamp_order: m as u32 },
            None => GroupSpec::WreathZZ,
        }
    }

    fn identity(&self) -> LampElem {
        LampElem::default()
    }

    fn multiply(&self, a: &LampElem, b: &LampElem) -> LampElem {
        let mut lamps = SmallVec::with_capacity(a.lamps.len() + b.lamps.len());
        let (mut i, mut j) = (0, 0);
        while i < a.lamps.len() || j < b.lamps.len() {
            let left = a.lamps.get(i).copied();
            let right = b.lamps.get(j).map(|&(p, v)| (shift(p, a.cursor), v));
            match (left, right) {
                (Some(l), Some(r)) if l.0 == r.0 => {
                    let v = self.add_values(l.1, r.1);
                    if v != 0 {
                        lamps.push((l.0, v));
                    }
                    i += 1;
                    j += 1;
                }
                (Some(l), Some(r)) if l.0 < r.0 => {
                    lamps.push(l);
                    i += 1;
                }
                (Some(l), None) => {
                    lamps.push(l);
                    i += 1;
                }
                (_, Some(r)) => {
                    lamps.push(r);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        LampElem {
            cursor: shift(a.cursor, b.cursor),
            lamps,
        }
    }

    fn inverse(&self, a: &LampElem) -> LampElem {
        let back = a.cursor.checked_neg().expect("cursor outside i16 range");
        LampElem {
            cursor: back,
            lamps: a
                .lamps
                .iter()
                .map(|&(p, v)| (shift(p, back), self.negate_value(v)))
                .collect(),
        }
    }

    fn generators(&self) -> Vec<LampElem> {
        let mut gens = vec![
            LampElem::new(1, &[]),
            LampElem::new(-1, &[]),
            LampElem::new(0, &[(0, 1)]),
            LampElem::new(0, &[(0, self.negate_value(1))]),
        ];
        gens.sort();
        gens.dedup();
        gens
    }

    /// Lamp costs plus the shortest tour from 0 covering every lit lamp and ending at the cursor.
    fn word_length(&self, g: &LampElem) -> Option<u32> {
        let lamps: u32 = g.lamps.iter().map(|&(_, v)| self.lamp_cost(v)).sum();
        let c = g.cursor as i32;
        let lo = g.lamps.first().map_or(0, |&(p, _)| p as i32).min(0).min(c);
        let hi = g.lamps.last().map_or(0, |&(p, _)| p as i32).max(0).max(c);
        let travel = 2 * (hi - lo) - c.abs();
        Some(lamps + travel as u32)
    }

    fn encode(&self, g: &LampElem, out: &mut Vec<u8>) {
        out.extend_from_slice(&(g.cursor as i64).to_be_bytes());
        for &(p, v) in &g.lamps {
            out.extend_from_slice(&(p as i64).to_be_bytes());
            out.extend_from_slice(&(v as i64).to_be_bytes());
        }
    }

    fn decode(&self, bytes: &[u8]) -> Result<LampElem> {
        if bytes.len() < 8 || (bytes.len() - 8) % 16 != 0 {
            return Err(encoding_error(self, "length must be 8 + 16k bytes"));
        }
        let in_range = |x: i64| (i16::MIN as i64..=i16::MAX as i64).contains(&x);
        let cursor = read_i64(bytes, 0).unwrap();
        if !in_range(cursor) {
            return Err(encoding_error(self, "cursor out of range"));
        }
        let mut lamps = SmallVec::new();
        let mut last: Option<i64> = None;
        for k in 0..(bytes.len() - 8) / 16 {
            let p = read_i64(bytes, 8 + 16 * k).unwrap();
            let v = read_i64(bytes, 16 + 16 * k).unwrap();
            if !in_range(p) || last.is_some_and(|q| q >= p) {
                return Err(encoding_error(self, "lamp positions must be sorted and distinct"));
            }
            if !self.valid_value(v) {
                return Err(encoding_error(self, format!("invalid lamp value {v}")));
            }
            last = Some(p);
            lamps.push((p as i16, v as i16));
        }
        Ok(LampElem {
            cursor: cursor as i16,
            lamps,
        })
    }

    fn abelianize(&self, g: &LampElem) -> Vec<i64> {
        let total: i64 = g.lamps.iter().map(|&(_, v)| v as i64).sum();
        let total = match self.lamp_order {
            Some(m) => total.rem_euclid(m as i64),
            None => total,
        };
        vec![g.cursor as i64, total]
    }

    fn abelian_orders(&self) -> Vec<Option<u32>> {
        vec![None, self.lamp_order.map(u32::from)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lamplighter_inverse_example() {
        let l2 = Wreath::lamplighter(2);
        let g = LampElem::new(3, &[(0, 1)]);
        let inv = l2.inverse(&g);
        assert_eq!(inv, LampElem::new(-3, &[(-3, 1)]));
        assert_eq!(l2.multiply(&g, &inv), l2.identity());
    }

    #[test]
    fn toggle_is_an_involution() {
        let l2 = Wreath::lamplighter(2);
        assert_eq!(l2.generators().len(), 3);
        assert_eq!(Wreath::lamplighter(3).generators().len(), 4);
        assert_eq!(Wreath::integer_lamps().generators().len(), 4);
    }

    #[test]
    fn right_multiplication_acts_at_cursor() {
        let w = Wreath::integer_lamps();
        let t = LampElem::new(1, &[]);
        let a = LampElem::new(0, &[(0, 1)]);
        let g = [&t, &t, &a, &a, &t].iter().fold(w.identity(), |acc, s| w.multiply(&acc, s));
        assert_eq!(g, LampElem::new(3, &[(2, 2)]));
        assert_eq!(w.word_length(&g), Some(5));
    }

    #[test]
    fn lamps_cancel_to_canonical_form() {
        let l3 = Wreath::lamplighter(3);
        let a = LampElem::new(0, &[(0, 1)]);
        let a3 = l3.multiply(&l3.multiply(&a, &a), &a);
        assert_eq!(a3, l3.identity());
    }

    #[test]
    fn closed_form_length_examples() {
        let l2 = Wreath::lamplighter(2);
        assert_eq!(l2.word_length(&LampElem::new(-1, &[(2, 1)])), Some(6));
        assert_eq!(l2.word_length(&LampElem::new(3, &[])), Some(3));
    }

    #[test]
    fn decode_rejects_noncanonical() {
        let l2 = Wreath::lamplighter(2);
        let g = LampElem::new(-2, &[(-1, 1), (4, 1)]);
        assert_eq!(l2.decode(&l2.encode_to_vec(&g)).unwrap(), g);
        let zero = LampElem::new(0, &[(1, 0)]);
        assert!(l2.decode(&l2.encode_to_vec(&zero)).is_err());
        let unsorted = LampElem::new(0, &[(2, 1), (1, 1)]);
        assert!(l2.decode(&l2.encode_to_vec(&unsorted)).is_err());
    }
}
