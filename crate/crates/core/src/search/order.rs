//! The fixed order in which pairs of subsets are decided.

/// Which block of the order a pair belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    /// A singleton against a 2-subset.
    OneTwo,
    /// Two 2-subsets.
    TwoTwo,
    /// Everything else.
    Rest,
}

/// All unordered pairs of distinct nonempty masks: singleton against
/// 2-subset first, then 2-subset pairs, then the rest. Within a block pairs
/// are sorted by (larger mask, smaller mask).
#[derive(Clone, Debug)]
pub struct PairOrder {
    pairs: Vec<(u16, u16)>,
    /// End of the `OneTwo` block and of the `TwoTwo` block.
    ends: [usize; 2],
}

impl PairOrder {
    pub fn new(k: usize) -> Self {
        let n = 1u16 << k;
        let mut blocks: [Vec<(u16, u16)>; 3] = Default::default();
        for hi in 1..n {
            for lo in 1..hi {
                let sizes = (hi.count_ones().min(lo.count_ones()), hi.count_ones().max(lo.count_ones()));
                let stage = match sizes {
                    (1, 2) => 0,
                    (2, 2) => 1,
                    _ => 2,
                };
                blocks[stage].push((hi, lo));
            }
        }
        let ends = [blocks[0].len(), blocks[0].len() + blocks[1].len()];
        let pairs = blocks.concat();
        PairOrder { pairs, ends }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `(larger mask, smaller mask)` at a position.
    #[inline]
    pub fn pair(&self, pos: usize) -> (u16, u16) {
        self.pairs[pos]
    }

    pub fn stage(&self, pos: usize) -> Stage {
        if pos < self.ends[0] {
            Stage::OneTwo
        } else if pos < self.ends[1] {
            Stage::TwoTwo
        } else {
            Stage::Rest
        }
    }

    /// Position of a pair given in either orientation.
    pub fn position(&self, a: u16, b: u16) -> Option<usize> {
        let key = (a.max(b), a.min(b));
        self.pairs.iter().position(|&p| p == key)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k3_order() {
        let o = PairOrder::new(3);
        assert_eq!(o.len(), 21);
        // singleton/2-subset pairs by (larger, smaller)
        assert_eq!(&o.pairs[..o.ends[0]], &[(3, 1), (3, 2), (4, 3), (5, 1), (5, 2), (5, 4), (6, 1), (6, 2), (6, 4)]);
        assert_eq!(o.stage(0), Stage::OneTwo);
        assert_eq!(o.stage(o.len() - 1), Stage::Rest);
    }

    #[test]
    fn covers_every_pair_once() {
        for k in 1..=5 {
            let o = PairOrder::new(k);
            let m = (1usize << k) - 1;
            assert_eq!(o.len(), m * (m - 1) / 2);
        }
    }
}
