use super::{encoding_error, read_i64, Group, GroupSpec};
use crate::error::Result;

/// `[x, y, z]` with product `(x,y,z)(x',y',z') = (x+x', y+y', z+z'+x·y')`.
pub type HeisenbergElem = [i64; 3];

/// Integer Heisenberg group, generated by ±(1,0,0) and ±(0,1,0).
///
/// No closed-form word length is provided; lengths come from a BFS ball.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Heisenberg;

impl Group for Heisenberg {
    type Elem = HeisenbergElem;

    fn spec(&self) -> GroupSpec {
        GroupSpec::Heisenberg
    }

    fn identity(&self) -> HeisenbergElem {
        [0; 3]
    }

    #[inline]
    fn multiply(&self, a: &HeisenbergElem, b: &HeisenbergElem) -> HeisenbergElem {
        [a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1]]
    }

    fn inverse(&self, a: &HeisenbergElem) -> HeisenbergElem {
        [-a[0], -a[1], -a[2] + a[0] * a[1]]
    }

    fn generators(&self) -> Vec<HeisenbergElem> {
        let mut gens = vec![[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0]];
        gens.sort();
        gens
    }

    fn encode(&self, g: &HeisenbergElem, out: &mut Vec<u8>) {
        for x in g {
            out.extend_from_slice(&x.to_be_bytes());
        }
    }

    fn decode(&self, bytes: &[u8]) -> Result<HeisenbergElem> {
        if bytes.len() != 24 {
            return Err(encoding_error(self, "expected 24 bytes"));
        }
        Ok([0, 1, 2].map(|i| read_i64(bytes, 8 * i).unwrap()))
    }

    fn abelianize(&self, g: &HeisenbergElem) -> Vec<i64> {
        vec![g[0], g[1]]
    }

    fn abelian_orders(&self) -> Vec<Option<u32>> {
        vec![None, None]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_form_product() {
        let h = Heisenberg;
        assert_eq!(h.multiply(&[1, 0, 0], &[0, 1, 0]), [1, 1, 1]);
        assert_eq!(h.multiply(&[0, 1, 0], &[1, 0, 0]), [1, 1, 0]);
    }

    #[test]
    fn commutator_is_central_generator() {
        let h = Heisenberg;
        let (x, y) = ([1, 0, 0], [0, 1, 0]);
        let c = h.multiply(
            &h.multiply(&x, &y),
            &h.multiply(&h.inverse(&x), &h.inverse(&y)),
        );
        assert_eq!(c, [0, 0, 1]);
    }

    #[test]
    fn inverse_law() {
        let h = Heisenberg;
        let g = [3, -2, 7];
        assert_eq!(h.multiply(&g, &h.inverse(&g)), [0, 0, 0]);
        assert_eq!(h.multiply(&h.inverse(&g), &g), [0, 0, 0]);
    }
}
