use super::table::{BOT, TOP};

/// Dense `G x S x L` body-index tensor of one rule.
///
/// Rows of heads without groundings hold ⊥ everywhere; unused substitution
/// slots hold ⊥ and unused body positions hold ⊤.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexTensor {
    pub rule: usize,
    pub g: usize,
    pub s: usize,
    pub l: usize,
    pub data: Vec<u32>,
}

impl IndexTensor {
    /// `groundings` are `(head index, body indices)` pairs in substitution
    /// order. Body lists shorter than `l` are padded with ⊤.
    pub fn build(rule: usize, g: usize, s: usize, l: usize, groundings: &[(usize, Vec<usize>)]) -> IndexTensor {
        let s = s.max(1);
        let l = l.max(1);
        let mut data = vec![BOT as u32; g * s * l];
        let mut used = vec![0usize; g];
        for (head, body) in groundings {
            let k = used[*head];
            assert!(k < s, "substitution count for head {head} exceeds S={s}");
            used[*head] += 1;
            let base = (head * s + k) * l;
            for pos in 0..l {
                data[base + pos] = body.get(pos).map(|&b| b as u32).unwrap_or(TOP as u32);
            }
        }
        IndexTensor { rule, g, s, l, data }
    }

    pub fn get(&self, j: usize, k: usize, pos: usize) -> usize {
        self.data[(j * self.s + k) * self.l + pos] as usize
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Number of live substitutions for head `j`.
    pub fn live(&self, j: usize) -> usize {
        (0..self.s).filter(|&k| self.get(j, k, 0) != BOT).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn padding_and_shape() {
        let t = IndexTensor::build(0, 20, 3, 2, &[(5, vec![7])]);
        assert_eq!(t.len(), 120);
        assert_eq!((t.get(5, 0, 0), t.get(5, 0, 1)), (7, TOP));
        assert_eq!((t.get(5, 1, 0), t.get(5, 1, 1)), (BOT, BOT));
        assert!((0..3).all(|k| t.get(4, k, 0) == BOT && t.get(4, k, 1) == BOT));
        assert_eq!(t.live(5), 1);
    }
}
