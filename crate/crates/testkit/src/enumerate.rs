//! Exhaustive enumeration of small straight-line raw programs.

use cohere::decl::{Decl, Layout};
use cohere::syntax::{name, Site, Statement, Target};
use cohere::EffectKind;

/// Every effect form on scalar `x`: five kinds at two sites.
pub fn effect_forms() -> Vec<Statement> {
    let x = Target::Scalar(name("x"));
    [Site::Local, Site::Remote]
        .into_iter()
        .flat_map(|site| {
            let x = x.clone();
            EffectKind::ALL
                .into_iter()
                .map(move |kind| Statement::Effect {
                    kind,
                    site,
                    target: x.clone(),
                })
        })
        .collect()
}

/// The layout enumerated programs run in: the single scalar `x`.
pub fn raw_layout() -> Layout {
    Layout::new(vec![Decl::Scalar(name("x"))]).unwrap()
}

/// Sequences of at most `max_len` effect forms, shortest first; the empty
/// program comes first. There are `sum(10^n, n <= max_len)` of them.
pub fn enumerate_raw_programs(max_len: usize) -> impl Iterator<Item = Statement> {
    let forms = effect_forms();
    (0..=max_len).flat_map(move |len| {
        let forms = forms.clone();
        let total = forms.len().pow(len as u32);
        (0..total).map(move |mut code| {
            let mut parts = Vec::with_capacity(len);
            for _ in 0..len {
                parts.push(forms[code % forms.len()].clone());
                code /= forms.len();
            }
            Statement::block(parts)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn counts() {
        assert_eq!(enumerate_raw_programs(0).count(), 1);
        assert_eq!(enumerate_raw_programs(1).count(), 11);
        assert_eq!(enumerate_raw_programs(2).count(), 111);
    }

    #[test]
    fn duplicate_free_and_contains_the_stuck_example() {
        let all: Vec<Statement> = enumerate_raw_programs(4).collect();
        let distinct: HashSet<&Statement> = all.iter().collect();
        assert_eq!(all.len(), 11_111);
        assert_eq!(distinct.len(), all.len());
        assert!(all.iter().any(|p| p.to_string() == "w x; gr x;"));
    }
}
