//! Set partition enumeration as restricted growth strings.
//!
//! A partition of `{0..n-1}` is encoded by `a` with `a[0] = 0` and
//! `a[i] <= max(a[..i]) + 1`; enumeration is in lexicographic order of
//! `a`, visiting each partition exactly once (Bell(n) in total).

/// In-place iterator over restricted growth strings.
pub struct SetPartitions {
    a: Vec<u8>,
    b: Vec<u8>, // b[i] = max(a[..i]) + 1
    fresh: bool,
    prefix: usize,
}

impl SetPartitions {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1 && n <= u8::MAX as usize);
        SetPartitions { a: vec![0; n], b: vec![1; n], fresh: true, prefix: 1 }
    }

    /// Enumerate only the partitions extending a fixed assignment of the
    /// first `prefix.len()` elements (used to split work across threads).
    pub fn with_prefix(n: usize, prefix: &[u8]) -> Self {
        assert!(!prefix.is_empty() && prefix.len() <= n);
        let mut a = vec![0; n];
        a[..prefix.len()].copy_from_slice(prefix);
        let mut b = vec![1; n];
        for i in 1..n {
            b[i] = b[i - 1].max(a[i - 1] + 1);
        }
        SetPartitions { a, b, fresh: true, prefix: prefix.len() }
    }

    /// The current string; valid after `advance` returned true (or before
    /// the first `advance` via `first`).
    pub fn current(&self) -> &[u8] {
        &self.a
    }

    /// Move to the next partition; false when exhausted.
    pub fn advance(&mut self) -> bool {
        if self.fresh {
            self.fresh = false;
            return true;
        }
        let n = self.a.len();
        let mut i = n;
        while i > self.prefix {
            i -= 1;
            if self.a[i] < self.b[i] {
                self.a[i] += 1;
                // reset the suffix to zeros and recompute maxima
                let mut m = self.b[i].max(self.a[i] + 1);
                for j in i + 1..n {
                    self.a[j] = 0;
                    self.b[j] = m;
                    m = m.max(1);
                }
                return true;
            }
        }
        false
    }

    /// Number of blocks of the current partition.
    pub fn block_count(&self) -> usize {
        self.a.iter().copied().max().unwrap() as usize + 1
    }
}

/// Bell numbers by the Bell triangle.
pub fn bell_numbers(up_to: usize) -> Vec<u128> {
    let mut out = vec![1u128];
    let mut row = vec![1u128];
    for _ in 1..=up_to {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &v in &row {
            let last = *next.last().unwrap();
            next.push(last + v);
        }
        out.push(next[0]);
        row = next;
    }
    out
}

/// All restricted-growth prefixes of length `k` over `n` elements, for
/// splitting an enumeration into independent ranges.
pub fn prefixes(n: usize, k: usize) -> Vec<Vec<u8>> {
    let k = k.min(n).max(1);
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<u8>, u8)> = vec![(vec![0], 1)];
    while let Some((p, m)) = stack.pop() {
        if p.len() == k {
            out.push(p);
            continue;
        }
        for v in (0..=m).rev() {
            let mut q = p.clone();
            q.push(v);
            stack.push((q, m.max(v + 1)));
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(n: usize) -> usize {
        let mut it = SetPartitions::new(n);
        let mut c = 0;
        while it.advance() {
            c += 1;
        }
        c
    }

    #[test]
    fn counts_match_bell_numbers() {
        let bell = bell_numbers(12);
        assert_eq!(bell[3], 5);
        assert_eq!(bell[8], 4140);
        assert_eq!(bell[12], 4213597);
        for n in 1..=9 {
            assert_eq!(count(n) as u128, bell[n], "n={n}");
        }
    }

    #[test]
    fn single_element() {
        assert_eq!(count(1), 1);
    }

    #[test]
    fn enumerates_each_exactly_once() {
        let mut seen = std::collections::HashSet::new();
        let mut it = SetPartitions::new(6);
        while it.advance() {
            assert!(seen.insert(it.current().to_vec()));
        }
        assert_eq!(seen.len(), 203);
    }

    #[test]
    fn prefix_split_is_a_partition_of_the_space() {
        let n = 7;
        let mut total = 0usize;
        let mut seen = std::collections::HashSet::new();
        for p in prefixes(n, 3) {
            let mut it = SetPartitions::with_prefix(n, &p);
            while it.advance() {
                assert!(seen.insert(it.current().to_vec()));
                total += 1;
            }
        }
        assert_eq!(total as u128, bell_numbers(n)[n]);
    }

    #[test]
    fn block_count_tracks_maximum() {
        let mut it = SetPartitions::new(4);
        let mut by_blocks = [0usize; 5];
        while it.advance() {
            by_blocks[it.block_count()] += 1;
        }
        // Stirling numbers of the second kind for n=4: 1, 7, 6, 1
        assert_eq!(&by_blocks[1..], &[1, 7, 6, 1]);
    }
}
