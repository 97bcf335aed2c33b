use crate::domain::{Assignment, DomainModel};

/// Similarity of two assignments: a per-variable factor equal to 1 where
/// they agree and shrinking towards 0 where they differ, as `delta` goes
/// from 0 to 1.
pub fn sim(s: &Assignment, t: &Assignment, delta: f64, m: &DomainModel) -> f64 {
    s.values()
        .iter()
        .zip(t.values())
        .enumerate()
        .map(|(v, (a, b))| {
            let k = m.domain_size(v) as f64 - 1.0;
            let num = if a == b { 1.0 + delta * k } else { 1.0 - delta };
            num / (1.0 + delta * k)
        })
        .product()
}
