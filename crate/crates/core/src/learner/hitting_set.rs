use std::collections::BTreeSet;

/// A minimum-cardinality set meeting every member of `family`. Among
/// minimum sets the lexicographically smallest (by sorted element list) is
/// returned. Members must be non-empty; an empty member makes the problem
/// infeasible and yields `None`.
pub fn minimal_hitting_set<T: Ord + Clone>(family: &[BTreeSet<T>]) -> Option<BTreeSet<T>> {
    if family.iter().any(BTreeSet::is_empty) {
        return None;
    }
    let universe: Vec<T> = family.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let masks: Vec<u64> = if universe.len() <= 64 {
        family
            .iter()
            .map(|set| {
                set.iter()
                    .map(|x| 1u64 << universe.binary_search(x).expect("in universe"))
                    .fold(0, |a, b| a | b)
            })
            .collect()
    } else {
        return Some(greedy_fallback(family, &universe));
    };
    for k in 0..=universe.len() {
        let mut chosen = Vec::with_capacity(k);
        if search(&masks, universe.len(), k, 0, 0, &mut chosen) {
            return Some(chosen.into_iter().map(|i| universe[i].clone()).collect());
        }
    }
    unreachable!("the whole universe hits every member")
}

/// Depth-first enumeration of `k`-subsets in lexicographic order, pruning
/// branches that can no longer cover a member.
fn search(masks: &[u64], n: usize, k: usize, start: usize, picked: u64, chosen: &mut Vec<usize>) -> bool {
    if chosen.len() == k {
        return masks.iter().all(|m| m & picked != 0);
    }
    let remaining = k - chosen.len();
    // every member not yet hit must still contain an index >= start
    let tail = if start >= 64 { 0 } else { u64::MAX << start };
    if masks.iter().any(|m| m & picked == 0 && m & tail == 0) {
        return false;
    }
    for i in start..=n.saturating_sub(remaining) {
        chosen.push(i);
        if search(masks, n, k, i + 1, picked | 1 << i, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

fn greedy_fallback<T: Ord + Clone>(family: &[BTreeSet<T>], universe: &[T]) -> BTreeSet<T> {
    let mut out = BTreeSet::new();
    let mut open: Vec<&BTreeSet<T>> = family.iter().collect();
    while !open.is_empty() {
        let best = universe
            .iter()
            .max_by_key(|x| (open.iter().filter(|s| s.contains(x)).count(), std::cmp::Reverse(*x)))
            .expect("non-empty universe")
            .clone();
        open.retain(|s| !s.contains(&best));
        out.insert(best);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(sets: &[&[&str]]) -> Vec<BTreeSet<String>> {
        sets.iter()
            .map(|s| s.iter().map(|x| x.to_string()).collect())
            .collect()
    }

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn examples() {
        assert_eq!(minimal_hitting_set(&fam(&[&["room"]])), Some(set(&["room"])));
        assert_eq!(minimal_hitting_set(&fam(&[&["a", "b"], &["b", "c"]])), Some(set(&["b"])));
        assert_eq!(minimal_hitting_set(&fam(&[&["a"], &["b"]])), Some(set(&["a", "b"])));
        assert_eq!(minimal_hitting_set(&fam(&[&["b", "c"], &["a", "c"], &["a", "b"]])), Some(set(&["a", "b"])));
        assert_eq!(minimal_hitting_set::<String>(&[]), Some(BTreeSet::new()));
        assert_eq!(minimal_hitting_set(&fam(&[&["a"], &[]])), None);
    }
}
