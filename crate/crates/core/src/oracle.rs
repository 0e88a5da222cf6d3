//! Exact ground truth for small matrices: permanents and matching enumeration.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matching::{Matching, MatchingClass};
use crate::matrix::BinaryMatrix;

pub const RYSER_MAX_N: usize = 30;
pub const ENUMERATION_MAX_N: usize = 9;
/// Completed graph: `n! + n^2 (n-1)!` states.
pub const COMPLETED_ENUMERATION_MAX_N: usize = 7;
pub const GRAPH_ENUMERATION_MAX_N: usize = 9;

/// Exact permanent by Ryser's inclusion-exclusion formula with Gray-code
/// column updates: `O(2^n n)`.
///
/// Products of row sums are formed in `u128` and the alternating sum in
/// `i128`; either spills into a big integer only when it would overflow.
pub fn permanent_exact_ryser(a: &BinaryMatrix) -> Result<BigUint> {
    let n = a.n();
    Error::guard("permanent_exact_ryser", n, RYSER_MAX_N)?;

    let mut row_sums = vec![0u32; n];
    let mut acc: i128 = 0;
    let mut spill = BigInt::zero();
    let mut members = 0usize;
    for k in 1u64..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        let gray = k ^ (k >> 1);
        let added = gray & (1 << j) != 0;
        if added {
            members += 1;
        } else {
            members -= 1;
        }
        for (i, s) in row_sums.iter_mut().enumerate() {
            if a.get(i, j) {
                if added {
                    *s += 1;
                } else {
                    *s -= 1;
                }
            }
        }
        if row_sums.contains(&0) {
            continue;
        }
        let negative = members % 2 == 1;
        match row_sums
            .iter()
            .try_fold(1u128, |p, &s| p.checked_mul(s as u128))
            .and_then(|p| i128::try_from(p).ok())
        {
            Some(p) => {
                let term = if negative { -p } else { p };
                match acc.checked_add(term) {
                    Some(v) => acc = v,
                    None => {
                        spill += BigInt::from(acc);
                        acc = term;
                    }
                }
            }
            None => {
                let p: BigUint = row_sums.iter().map(|&s| BigUint::from(s)).product();
                let sign = if negative { Sign::Minus } else { Sign::Plus };
                spill += BigInt::from_biguint(sign, p);
            }
        }
    }
    spill += BigInt::from(acc);
    if n % 2 == 1 {
        spill = -spill;
    }
    spill
        .to_biguint()
        .ok_or_else(|| Error::invalid("Ryser sum came out negative"))
}

/// Exact permanent by summing `prod a[i][sigma(i)]` over all of `S_n`
/// (Heap's algorithm). Deliberately naive: it is the oracle for Ryser.
pub fn permanent_exact_enumeration(a: &BinaryMatrix) -> Result<BigUint> {
    let n = a.n();
    Error::guard("permanent_exact_enumeration", n, ENUMERATION_MAX_N)?;
    let mut count: u64 = 0;
    for_each_permutation(n, |sigma| {
        if sigma.iter().enumerate().all(|(i, &j)| a.get(i, j)) {
            count += 1;
        }
    });
    Ok(BigUint::from(count))
}

/// Visits every permutation of `0..n` (Heap's algorithm, iterative).
pub(crate) fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&perm);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            f(&perm);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Enumerated matchings with per-class tallies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingList {
    pub items: Vec<Matching>,
    pub class_counts: BTreeMap<MatchingClass, usize>,
}

impl MatchingList {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn count(&self, class: MatchingClass) -> usize {
        self.class_counts.get(&class).copied().unwrap_or(0)
    }

    pub fn perfect_count(&self) -> usize {
        self.count(MatchingClass::Perfect)
    }
}

/// Lists the state space.
///
/// With `completed = true` every perfect and near-perfect matching of
/// `K_{n,n}` is returned (`n! + n^2 (n-1)!` items); otherwise only those whose
/// pairs are all edges of `a`. Order: perfect matchings first, then hole
/// classes row-major; lexicographic by row within a class.
pub fn enumerate_matchings(a: &BinaryMatrix, completed: bool) -> Result<MatchingList> {
    let n = a.n();
    if completed {
        Error::guard("enumerate_matchings (completed)", n, COMPLETED_ENUMERATION_MAX_N)?;
    } else {
        Error::guard("enumerate_matchings", n, GRAPH_ENUMERATION_MAX_N)?;
    }
    let allowed = |u: usize, v: usize| completed || a.get(u, v);

    let mut items = Vec::new();
    let mut class_counts = BTreeMap::new();
    let mut push = |m: Matching| {
        *class_counts.entry(m.class()).or_insert(0) += 1;
        items.push(m);
    };
    backtrack_matchings(n, None, &allowed, &mut |map| {
        push(Matching::from_row_map(map.to_vec(), None))
    });
    for u in 0..n {
        for v in 0..n {
            backtrack_matchings(n, Some((u, v)), &allowed, &mut |map| {
                push(Matching::from_row_map(map.to_vec(), Some((u as u16, v as u16))))
            });
        }
    }
    Ok(MatchingList {
        items,
        class_counts,
    })
}

/// Depth-first over rows, trying columns in increasing order. `hole` removes
/// one row and one column from the problem.
fn backtrack_matchings(
    n: usize,
    hole: Option<(usize, usize)>,
    allowed: &dyn Fn(usize, usize) -> bool,
    emit: &mut dyn FnMut(&[u16]),
) {
    fn go(
        row: usize,
        n: usize,
        hole: Option<(usize, usize)>,
        map: &mut Vec<u16>,
        used: &mut Vec<bool>,
        allowed: &dyn Fn(usize, usize) -> bool,
        emit: &mut dyn FnMut(&[u16]),
    ) {
        if row == n {
            emit(map);
            return;
        }
        if hole.is_some_and(|(u, _)| u == row) {
            go(row + 1, n, hole, map, used, allowed, emit);
            return;
        }
        for col in 0..n {
            if used[col] || !allowed(row, col) {
                continue;
            }
            used[col] = true;
            map[row] = col as u16;
            go(row + 1, n, hole, map, used, allowed, emit);
            map[row] = u16::MAX;
            used[col] = false;
        }
    }
    let mut map = vec![u16::MAX; n];
    let mut used = vec![false; n];
    if let Some((_, v)) = hole {
        used[v] = true;
    }
    go(0, n, hole, &mut map, &mut used, allowed, emit);
}

/// Convenience for callers that want the permanent as a float.
pub fn permanent_f64(a: &BinaryMatrix) -> Result<f64> {
    Ok(permanent_exact_ryser(a)?.to_f64().unwrap_or(f64::INFINITY))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::parse_matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy() -> BinaryMatrix {
        parse_matrix("3\n1 1 0\n0 1 1\n1 1 0").unwrap()
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize, density: f64) -> BinaryMatrix {
        BinaryMatrix::from_fn(n, |_, _| rng.gen_bool(density)).unwrap()
    }

    #[test]
    fn toy_permanent_is_two() {
        assert_eq!(permanent_exact_ryser(&toy()).unwrap(), BigUint::from(2u32));
        assert_eq!(permanent_exact_enumeration(&toy()).unwrap(), BigUint::from(2u32));
    }

    #[test]
    fn identity_and_all_ones() {
        for n in 1..=8 {
            let id = BinaryMatrix::identity(n).unwrap();
            assert_eq!(permanent_exact_ryser(&id).unwrap(), BigUint::from(1u32));
        }
        let ones = BinaryMatrix::ones(4).unwrap();
        assert_eq!(permanent_exact_ryser(&ones).unwrap(), BigUint::from(24u32));
        assert_eq!(permanent_exact_enumeration(&ones).unwrap(), BigUint::from(24u32));
    }

    #[test]
    fn zero_matrix() {
        let z = BinaryMatrix::zeros(3).unwrap();
        assert!(permanent_exact_enumeration(&z).unwrap().is_zero());
        assert!(permanent_exact_ryser(&z).unwrap().is_zero());
    }

    #[test]
    fn ryser_needs_big_integers_for_dense_n() {
        // per(J_25) = 25! which overflows u64
        let ones = BinaryMatrix::ones(25).unwrap();
        let expected: BigUint = (1u32..=25).map(BigUint::from).product();
        assert_eq!(permanent_exact_ryser(&ones).unwrap(), expected);
    }

    #[test]
    fn ryser_agrees_with_enumeration_on_random_6x6() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let a = random_matrix(&mut rng, 6, 0.6);
            assert_eq!(
                permanent_exact_ryser(&a).unwrap(),
                permanent_exact_enumeration(&a).unwrap()
            );
        }
    }

    #[test]
    fn size_guards() {
        let big = BinaryMatrix::ones(10).unwrap();
        assert!(matches!(
            permanent_exact_enumeration(&big),
            Err(Error::SizeGuard { max: 9, .. })
        ));
        assert!(permanent_exact_ryser(&BinaryMatrix::ones(31).unwrap()).is_err());
        assert!(enumerate_matchings(&BinaryMatrix::ones(8).unwrap(), true).is_err());
    }

    #[test]
    fn completed_enumeration_sizes() {
        let mut fact = 1usize;
        for n in 1..=6 {
            fact *= n;
            let list = enumerate_matchings(&BinaryMatrix::zeros(n).unwrap(), true).unwrap();
            assert_eq!(list.len(), fact + n * n * (fact / n));
            assert_eq!(list.perfect_count(), fact);
            assert_eq!(list.count(MatchingClass::Hole(0, n - 1)), fact / n);
            assert_eq!(list.class_counts.values().sum::<usize>(), list.len());
        }
    }

    #[test]
    fn n3_completed_has_24_states() {
        let list = enumerate_matchings(&toy(), true).unwrap();
        assert_eq!(list.len(), 24);
        assert_eq!(list.perfect_count(), 6);
        assert_eq!(list.class_counts.len(), 10);
    }

    #[test]
    fn n1_completed() {
        let list = enumerate_matchings(&BinaryMatrix::ones(1).unwrap(), true).unwrap();
        assert_eq!(list.len(), 2);
        assert!(list.items[0].is_perfect());
        assert!(list.items[1].is_empty());
        assert_eq!(list.items[1].class(), MatchingClass::Hole(0, 0));
    }

    #[test]
    fn toy_graph_has_two_perfect_matchings() {
        let list = enumerate_matchings(&toy(), false).unwrap();
        assert_eq!(list.perfect_count(), 2);
        for m in &list.items {
            assert!(m.pairs().all(|(u, v)| toy().get(u, v)));
        }
    }

    #[test]
    fn enumeration_has_no_duplicates() {
        let mut items = enumerate_matchings(&toy(), true).unwrap().items;
        let len = items.len();
        items.sort();
        items.dedup();
        assert_eq!(items.len(), len);
    }
}
