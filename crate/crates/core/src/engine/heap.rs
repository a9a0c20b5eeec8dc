//! Binary max-heap over `(rank, contract)` entries that counts key comparisons.

use crate::model::ContractId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Entry {
    pub rank: usize,
    pub id: ContractId,
}

#[derive(Debug, Default)]
pub(crate) struct CountingHeap {
    data: Vec<Entry>,
}

impl CountingHeap {
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn peek(&self) -> Option<Entry> {
        self.data.first().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Entry> {
        self.data.iter()
    }

    pub fn push(&mut self, e: Entry, cmps: &mut u64) {
        self.data.push(e);
        let mut i = self.data.len() - 1;
        while i > 0 {
            let parent = (i - 1) / 2;
            *cmps += 1;
            if self.data[parent].rank >= self.data[i].rank {
                break;
            }
            self.data.swap(parent, i);
            i = parent;
        }
    }

    pub fn pop(&mut self, cmps: &mut u64) -> Option<Entry> {
        let last = self.data.pop()?;
        if self.data.is_empty() {
            return Some(last);
        }
        let top = std::mem::replace(&mut self.data[0], last);
        let n = self.data.len();
        let mut i = 0;
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let mut child = l;
            if l + 1 < n {
                *cmps += 1;
                if self.data[l + 1].rank > self.data[l].rank {
                    child = l + 1;
                }
            }
            *cmps += 1;
            if self.data[i].rank >= self.data[child].rank {
                break;
            }
            self.data.swap(i, child);
            i = child;
        }
        Some(top)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn pops_in_descending_rank(ranks in proptest::collection::hash_set(0usize..1000, 0..60)) {
            let mut h = CountingHeap::default();
            let mut c = 0;
            for &r in &ranks {
                h.push(Entry { rank: r, id: ContractId(r) }, &mut c);
            }
            let mut out = Vec::new();
            while let Some(e) = h.pop(&mut c) {
                out.push(e.rank);
            }
            let mut expected: Vec<_> = ranks.into_iter().collect();
            expected.sort_unstable_by(|a, b| b.cmp(a));
            prop_assert_eq!(out, expected);
        }
    }
}
