use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionScheme {
    /// Cell `i` takes every `n`-th view starting at `i`.
    Equidistant,
    /// Contiguous blocks of views, sizes differing by at most one.
    Sequential,
}

/// Disjoint cover of the view indices; each cell defines one data term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    scheme: PartitionScheme,
    cells: Vec<Vec<usize>>,
}

impl Partition {
    pub fn n_subsets(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> &[usize] {
        &self.cells[i]
    }

    pub fn scheme(&self) -> PartitionScheme {
        self.scheme
    }

    pub fn num_views(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }
}

pub fn partition_views(num_views: usize, n: usize, scheme: PartitionScheme) -> Result<Partition> {
    if n == 0 {
        return Err(Error::InvalidArgument("number of subsets must be at least 1".into()));
    }
    if n > num_views {
        return Err(Error::TooManySubsets { subsets: n, views: num_views });
    }
    let cells = match scheme {
        PartitionScheme::Equidistant => (0..n).map(|i| (i..num_views).step_by(n).collect()).collect(),
        PartitionScheme::Sequential => {
            let (base, extra) = (num_views / n, num_views % n);
            let mut start = 0;
            (0..n)
                .map(|i| {
                    let len = base + usize::from(i < extra);
                    let cell = (start..start + len).collect();
                    start += len;
                    cell
                })
                .collect()
        }
    };
    Ok(Partition { scheme, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn equidistant_examples() {
        let p = partition_views(6, 2, PartitionScheme::Equidistant).unwrap();
        assert_eq!(p.cells(), &[vec![0, 2, 4], vec![1, 3, 5]]);
        let p = partition_views(6, 1, PartitionScheme::Equidistant).unwrap();
        assert_eq!(p.cells(), &[vec![0, 1, 2, 3, 4, 5]]);
        let p = partition_views(7, 3, PartitionScheme::Equidistant).unwrap();
        assert_eq!(p.cells(), &[vec![0, 3, 6], vec![1, 4], vec![2, 5]]);
    }

    #[test]
    fn sequential_blocks() {
        let p = partition_views(7, 3, PartitionScheme::Sequential).unwrap();
        assert_eq!(p.cells(), &[vec![0, 1, 2], vec![3, 4], vec![5, 6]]);
    }

    #[test]
    fn too_many_subsets() {
        let err = partition_views(4, 5, PartitionScheme::Equidistant).unwrap_err();
        assert!(err.to_string().contains("more subsets than views"));
        assert!(partition_views(4, 0, PartitionScheme::Equidistant).is_err());
    }

    proptest! {
        #[test]
        fn cells_form_a_set_partition(views in 1usize..200, n_raw in 1usize..200, seq in any::<bool>()) {
            let n = 1 + (n_raw - 1) % views;
            let scheme = if seq { PartitionScheme::Sequential } else { PartitionScheme::Equidistant };
            let p = partition_views(views, n, scheme).unwrap();
            prop_assert_eq!(p.n_subsets(), n);
            let mut all: Vec<usize> = p.cells().iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..views).collect::<Vec<_>>());
            prop_assert!(p.cells().iter().all(|c| !c.is_empty()));
        }
    }
}
