//! Boolean terms as truth tables over a fixed list of atoms.

use std::hash::{Hash, Hasher};

use bitvec::prelude::*;

/// A Boolean combination of `m` atoms, stored as the set of minterms it covers.
/// Bit `i` of a minterm index says whether atom `i` appears positively.
#[derive(Clone, Debug, PartialOrd, Ord)]
pub struct Table {
    m: usize,
    bits: BitVec<u64, Lsb0>,
}

impl PartialEq for Table {
    fn eq(&self, o: &Table) -> bool {
        self.m == o.m && self.words().eq(o.words())
    }
}

impl Eq for Table {}

impl Hash for Table {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.m.hash(h);
        for w in self.words() {
            w.hash(h);
        }
    }
}

// Bit `j` set when bit `i` of `j` is clear, repeated across a word.
const LOW_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0f0f_0f0f_0f0f_0f0f,
    0x00ff_00ff_00ff_00ff,
    0x0000_ffff_0000_ffff,
    0x0000_0000_ffff_ffff,
];

impl Table {
    pub fn bot(m: usize) -> Table {
        Table {
            m,
            bits: bitvec![u64, Lsb0; 0; 1 << m],
        }
    }

    pub fn top(m: usize) -> Table {
        Table {
            m,
            bits: bitvec![u64, Lsb0; 1; 1 << m],
        }
    }

    pub fn atom(m: usize, i: usize) -> Table {
        let mut t = Table::bot(m);
        for idx in 0..1usize << m {
            if idx >> i & 1 == 1 {
                t.bits.set(idx, true);
            }
        }
        t
    }

    // Raw storage with the unused high bits of a short table cleared.
    fn words(&self) -> impl Iterator<Item = u64> + '_ {
        let live = if self.m < 6 { (1u64 << (1 << self.m)) - 1 } else { u64::MAX };
        self.bits.as_raw_slice().iter().map(move |w| w & live)
    }

    pub fn arity(&self) -> usize {
        self.m
    }

    pub fn is_bot(&self) -> bool {
        self.bits.not_any()
    }

    pub fn is_top(&self) -> bool {
        self.bits.all()
    }

    pub fn covers(&self, minterm: usize) -> bool {
        self.bits[minterm]
    }

    pub fn meet(&self, o: &Table) -> Table {
        let mut bits = self.bits.clone();
        bits &= &o.bits;
        Table { m: self.m, bits }
    }

    pub fn join(&self, o: &Table) -> Table {
        let mut bits = self.bits.clone();
        bits |= &o.bits;
        Table { m: self.m, bits }
    }

    pub fn complement(&self) -> Table {
        Table {
            m: self.m,
            bits: !self.bits.clone(),
        }
    }

    /// Symmetric difference.
    pub fn xor(&self, o: &Table) -> Table {
        let mut bits = self.bits.clone();
        bits ^= &o.bits;
        Table { m: self.m, bits }
    }

    /// The table with atom `i` fixed to `value`; the result no longer depends on `i`.
    pub fn cofactor(&self, i: usize, value: bool) -> Table {
        let mut out = self.clone();
        let words = out.bits.as_raw_mut_slice();
        if i < 6 {
            // Within a word: bit idx pairs with idx ^ (1 << i).
            let s = 1u32 << i;
            let low = LOW_MASKS[i];
            for w in words.iter_mut() {
                *w = if value {
                    let hi = *w & !low;
                    hi | (hi >> s)
                } else {
                    let lo = *w & low;
                    lo | (lo << s)
                };
            }
        } else {
            let stride = 1usize << (i - 6);
            for block in words.chunks_mut(2 * stride) {
                let (lo, hi) = block.split_at_mut(stride);
                if value {
                    lo.copy_from_slice(hi);
                } else {
                    hi.copy_from_slice(lo);
                }
            }
        }
        out
    }

    pub fn depends_on(&self, i: usize) -> bool {
        self.cofactor(i, true) != self.cofactor(i, false)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.m).filter(|&i| self.depends_on(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cofactors() {
        let x = Table::atom(2, 0);
        let y = Table::atom(2, 1);
        let t = x.meet(&y.complement());
        assert_eq!(t.cofactor(0, true), y.complement());
        assert!(t.cofactor(0, false).is_bot());
        assert_eq!(t.support(), vec![0, 1]);
        assert!(!x.depends_on(1));
        assert!(x.join(&x.complement()).is_top());
        assert_eq!(x.xor(&y), x.meet(&y.complement()).join(&y.meet(&x.complement())));
    }

    #[test]
    fn cofactor_matches_minterm_definition() {
        for m in 1..=8 {
            let mut t = Table::bot(m);
            let mut state = 0x9e37_79b9_7f4a_7c15u64 ^ m as u64;
            for idx in 0..1usize << m {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                t.bits.set(idx, state >> 63 == 1);
            }
            for i in 0..m {
                for value in [false, true] {
                    let c = t.cofactor(i, value);
                    for idx in 0..1usize << m {
                        let src = if value { idx | 1 << i } else { idx & !(1 << i) };
                        assert_eq!(c.covers(idx), t.covers(src), "m={m} i={i}");
                    }
                }
                let naive = (0..1usize << m).any(|idx| t.covers(idx) != t.covers(idx ^ 1 << i));
                assert_eq!(t.depends_on(i), naive);
            }
        }
    }
}
