use smallvec::SmallVec;

use super::{encoding_error, read_i64, Group, GroupSpec};
use crate::error::Result;

/// Integer vector; canonical as-is.
pub type Lattice = SmallVec<[i64; 4]>;

/// ℤ^d with the ±unit-vector generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FreeAbelian {
    dim: u32,
}

impl FreeAbelian {
    pub fn new(dim: u32) -> Self {
        assert!(dim >= 1, "ℤ^d needs d >= 1");
        Self { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn point(&self, coords: &[i64]) -> Lattice {
        assert_eq!(coords.len(), self.dim());
        Lattice::from_slice(coords)
    }
}

impl Group for FreeAbelian {
    type Elem = Lattice;

    fn spec(&self) -> GroupSpec {
        GroupSpec::FreeAbelian { dim: self.dim }
    }

    fn identity(&self) -> Lattice {
        smallvec::smallvec![0; self.dim()]
    }

    fn multiply(&self, a: &Lattice, b: &Lattice) -> Lattice {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    fn inverse(&self, a: &Lattice) -> Lattice {
        a.iter().map(|x| -x).collect()
    }

    fn generators(&self) -> Vec<Lattice> {
        let mut gens = Vec::with_capacity(2 * self.dim());
        for i in 0..self.dim() {
            for sign in [-1, 1] {
                let mut v = self.identity();
                v[i] = sign;
                gens.push(v);
            }
        }
        gens.sort();
        gens
    }

    fn word_length(&self, g: &Lattice) -> Option<u32> {
        Some(g.iter().map(|x| x.unsigned_abs()).sum::<u64>() as u32)
    }

    fn encode(&self, g: &Lattice, out: &mut Vec<u8>) {
        for x in g {
            out.extend_from_slice(&x.to_be_bytes());
        }
    }

    fn decode(&self, bytes: &[u8]) -> Result<Lattice> {
        if bytes.len() != 8 * self.dim() {
            return Err(encoding_error(self, format!("expected {} bytes", 8 * self.dim())));
        }
        Ok((0..self.dim()).map(|i| read_i64(bytes, 8 * i).unwrap()).collect())
    }

    fn abelianize(&self, g: &Lattice) -> Vec<i64> {
        g.to_vec()
    }

    fn abelian_orders(&self) -> Vec<Option<u32>> {
        vec![None; self.dim()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn addition_and_inverse() {
        let z2 = FreeAbelian::new(2);
        assert_eq!(z2.multiply(&z2.point(&[1, 0]), &z2.point(&[0, 1])), z2.point(&[1, 1]));
        assert_eq!(z2.inverse(&z2.point(&[2, -1])), z2.point(&[-2, 1]));
    }

    #[test]
    fn generators_are_unit_vectors() {
        let z2 = FreeAbelian::new(2);
        let gens = z2.generators();
        assert_eq!(gens.len(), 4);
        for g in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
            assert!(gens.contains(&z2.point(&g)));
        }
    }

    #[test]
    fn encoding_round_trip_and_rejects_bad_length() {
        let z3 = FreeAbelian::new(3);
        let p = z3.point(&[-5, 0, 7]);
        assert_eq!(z3.decode(&z3.encode_to_vec(&p)).unwrap(), p);
        assert!(z3.decode(&[0u8; 16]).is_err());
    }
}
