use crate::cost::Schedule;
use crate::network::SinkTree;

/// `∏_t |A_t|!`, or `None` when it does not fit in a `u64`.
pub fn schedule_count(t: &SinkTree) -> Option<u64> {
    t.subtrees().iter().try_fold(1u64, |acc, s| {
        let f = (1..=s.len() as u64).try_fold(1u64, |f, k| f.checked_mul(k))?;
        acc.checked_mul(f)
    })
}

/// Every schedule of the tree: each subtree sequence runs through its
/// permutations in lexicographic order, the last subtree varying fastest.
pub fn enumerate_schedules(t: &SinkTree) -> impl Iterator<Item = Schedule> {
    let mut cur: Option<Vec<Vec<usize>>> = Some(t.subtrees().to_vec());
    std::iter::from_fn(move || {
        let out = cur.take()?;
        let mut next = out.clone();
        let mut advanced = false;
        for seq in next.iter_mut().rev() {
            if next_permutation(seq) {
                advanced = true;
                break;
            }
            // Wrapped around to the sorted sequence; carry.
        }
        if advanced {
            cur = Some(next);
        }
        Some(Schedule::new(out))
    })
}

/// The `index`-th schedule of [`enumerate_schedules`].
pub fn unrank_schedule(t: &SinkTree, mut index: u64) -> Schedule {
    let subtrees = t.subtrees();
    let mut orders = vec![Vec::new(); subtrees.len()];
    for (k, members) in subtrees.iter().enumerate().rev() {
        let f = factorial(members.len());
        orders[k] = nth_permutation(members, index % f);
        index /= f;
    }
    Schedule::new(orders)
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Lexicographic successor in place; on the last permutation, resets to the
/// first and returns false.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        v.reverse();
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn nth_permutation(sorted: &[usize], mut k: u64) -> Vec<usize> {
    let mut pool = sorted.to_vec();
    let mut out = Vec::with_capacity(pool.len());
    while !pool.is_empty() {
        let f = factorial(pool.len() - 1);
        let idx = (k / f) as usize;
        k %= f;
        out.push(pool.remove(idx));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_walk() {
        let mut v = vec![1, 2, 3];
        let mut seen = vec![v.clone()];
        while next_permutation(&mut v) {
            seen.push(v.clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(v, vec![1, 2, 3]);
        for (k, p) in seen.iter().enumerate() {
            assert_eq!(&nth_permutation(&[1, 2, 3], k as u64), p);
        }
    }
}
