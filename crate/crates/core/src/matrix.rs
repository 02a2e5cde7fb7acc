//! Square boolean matrices, i.e. binary relations over `0..n`.

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub(crate) fn empty(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitMatrix {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub(crate) fn identity(n: usize) -> Self {
        let mut m = BitMatrix::empty(n);
        for i in 0..n {
            m.set(i, i);
        }
        m
    }

    pub(crate) fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut m = BitMatrix::empty(n);
        for (i, j) in pairs {
            m.set(i, j);
        }
        m
    }

    pub(crate) fn size(&self) -> usize {
        self.n
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.bits[i * self.words..(i + 1) * self.words]
    }

    pub(crate) fn get(&self, i: usize, j: usize) -> bool {
        self.row(i)[j / 64] >> (j % 64) & 1 == 1
    }

    pub(crate) fn set(&mut self, i: usize, j: usize) {
        self.row_mut(i)[j / 64] |= 1 << (j % 64);
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub(crate) fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub(crate) fn is_subset(&self, other: &BitMatrix) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    fn cols(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i).iter().enumerate().flat_map(|(w, &bits)| {
            (0..64)
                .filter(move |b| bits >> b & 1 == 1)
                .map(move |b| w * 64 + b)
        })
    }

    /// Pairs in row-major order.
    pub(crate) fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.cols(i).map(move |j| (i, j)))
    }

    pub(crate) fn union(&self, other: &BitMatrix) -> BitMatrix {
        self.zip(other, |a, b| a | b)
    }

    pub(crate) fn intersection(&self, other: &BitMatrix) -> BitMatrix {
        self.zip(other, |a, b| a & b)
    }

    pub(crate) fn difference(&self, other: &BitMatrix) -> BitMatrix {
        self.zip(other, |a, b| a & !b)
    }

    fn zip(&self, other: &BitMatrix, op: impl Fn(u64, u64) -> u64) -> BitMatrix {
        assert_eq!(self.n, other.n, "relations over different domains");
        BitMatrix {
            n: self.n,
            words: self.words,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        }
    }

    /// Relational composition `{(i, k) | (i, j) in self, (j, k) in other}`.
    pub(crate) fn compose(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.n, other.n, "relations over different domains");
        let mut out = BitMatrix::empty(self.n);
        for i in 0..self.n {
            for j in self.cols(i).collect::<Vec<_>>() {
                let (src, dst) = (other.row(j).to_vec(), out.row_mut(i));
                for (d, s) in dst.iter_mut().zip(src) {
                    *d |= s;
                }
            }
        }
        out
    }

    pub(crate) fn transpose(&self) -> BitMatrix {
        BitMatrix::from_pairs(self.n, self.pairs().map(|(i, j)| (j, i)))
    }

    /// Diagonal of the rows that have at least one successor.
    pub(crate) fn domain_identity(&self) -> BitMatrix {
        BitMatrix::from_pairs(
            self.n,
            (0..self.n)
                .filter(|&i| self.row(i).iter().any(|&w| w != 0))
                .map(|i| (i, i)),
        )
    }

    /// `self^k` by repeated squaring, with `self^0` the identity.
    pub(crate) fn power(&self, mut k: u64) -> BitMatrix {
        let mut acc = BitMatrix::identity(self.n);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.compose(&base);
            }
            k >>= 1;
            if k > 0 {
                let squared = base.compose(&base);
                if squared == base {
                    // idempotent: every remaining bit multiplies by `base`
                    acc = acc.compose(&base);
                    break;
                }
                base = squared;
            }
        }
        acc
    }

    /// `self^m ∪ … ∪ self^n`, computed as `self^m ∘ (I ∪ self)^(n-m)`.
    pub(crate) fn power_range(&self, m: u64, n: u64) -> BitMatrix {
        assert!(m <= n, "empty repetition range");
        let reflexive = self.union(&BitMatrix::identity(self.n));
        self.power(m).compose(&reflexive.power(n - m))
    }

    /// Reflexive-transitive closure by Warshall's algorithm.
    pub(crate) fn warshall(&self) -> BitMatrix {
        let mut m = self.union(&BitMatrix::identity(self.n));
        for k in 0..self.n {
            let row_k = m.row(k).to_vec();
            for i in 0..self.n {
                if m.get(i, k) {
                    for (d, s) in m.row_mut(i).iter_mut().zip(&row_k) {
                        *d |= s;
                    }
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_power(m: &BitMatrix, k: u64) -> BitMatrix {
        (0..k).fold(BitMatrix::identity(m.size()), |acc, _| acc.compose(m))
    }

    #[test]
    fn power_agrees_with_iteration() {
        let m = BitMatrix::from_pairs(5, [(0, 1), (1, 2), (2, 0), (3, 3), (3, 4)]);
        for k in 0..12 {
            assert_eq!(m.power(k), brute_power(&m, k), "k = {k}");
        }
        let idem = BitMatrix::from_pairs(3, [(0, 0), (0, 1), (1, 1)]);
        for k in 0..7 {
            assert_eq!(idem.power(k), brute_power(&idem, k), "k = {k}");
        }
    }

    #[test]
    fn warshall_is_union_of_powers() {
        let m = BitMatrix::from_pairs(4, [(0, 1), (1, 2), (3, 0)]);
        let brute = (0..=4).fold(BitMatrix::empty(4), |acc, k| acc.union(&brute_power(&m, k)));
        assert_eq!(m.warshall(), brute);
        assert_eq!(m.power_range(0, 4), brute);
    }

    #[test]
    fn wide_rows() {
        let mut m = BitMatrix::empty(130);
        m.set(0, 129);
        m.set(129, 64);
        assert_eq!(m.compose(&m).pairs().collect::<Vec<_>>(), [(0, 64)]);
        assert_eq!(m.transpose().pairs().count(), 2);
        assert_eq!(m.domain_identity().count(), 2);
    }
}
