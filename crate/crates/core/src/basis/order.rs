use std::cmp::Ordering;

use serde::Serialize;

use crate::algebra::Monomial;

/// Monomial orders. `Greater` from [`MonomialOrder::cmp`] means "leads".
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MonomialOrder {
    DegRevLex,
    Lex,
    /// Local: lower total degree leads, ties broken by reverse lex.
    NegDegRevLex,
    /// Blocks of consecutive variables compared left to right; the first
    /// block is eliminated. Inner orders must be global.
    Block { sizes: Vec<usize>, inner: Vec<MonomialOrder> },
}

impl MonomialOrder {
    /// Elimination order for the first `drop` of `nvars` variables.
    pub fn elimination(drop: usize, nvars: usize) -> Self {
        assert!(drop <= nvars);
        MonomialOrder::Block {
            sizes: vec![drop, nvars - drop],
            inner: vec![MonomialOrder::DegRevLex, MonomialOrder::DegRevLex],
        }
    }

    /// Global orders have `1` as the smallest monomial.
    pub fn is_global(&self) -> bool {
        match self {
            MonomialOrder::DegRevLex | MonomialOrder::Lex => true,
            MonomialOrder::NegDegRevLex => false,
            MonomialOrder::Block { inner, .. } => inner.iter().all(MonomialOrder::is_global),
        }
    }

    pub fn is_local(&self) -> bool {
        matches!(self, MonomialOrder::NegDegRevLex)
    }

    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        self.cmp_exps(a.exps(), b.exps())
    }

    fn cmp_exps(&self, a: &[u32], b: &[u32]) -> Ordering {
        match self {
            MonomialOrder::Lex => a.cmp(b),
            MonomialOrder::DegRevLex => {
                let (da, db): (u32, u32) = (a.iter().sum(), b.iter().sum());
                da.cmp(&db).then_with(|| revlex(a, b))
            }
            MonomialOrder::NegDegRevLex => {
                let (da, db): (u32, u32) = (a.iter().sum(), b.iter().sum());
                db.cmp(&da).then_with(|| revlex(a, b))
            }
            MonomialOrder::Block { sizes, inner } => {
                let mut start = 0;
                for (size, ord) in sizes.iter().zip(inner) {
                    let r = start..start + size;
                    match ord.cmp_exps(&a[r.clone()], &b[r]) {
                        Ordering::Equal => start += size,
                        other => return other,
                    }
                }
                Ordering::Equal
            }
        }
    }
}

/// Reverse-lex tie break: the monomial with the smaller exponent in the last
/// differing variable is the larger one.
fn revlex(a: &[u32], b: &[u32]) -> Ordering {
    for (x, y) in a.iter().zip(b).rev() {
        if x != y {
            return y.cmp(x);
        }
    }
    Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(e: &[u32]) -> Monomial {
        Monomial::new(e.to_vec())
    }

    #[test]
    fn degrevlex_basics() {
        let o = MonomialOrder::DegRevLex;
        assert_eq!(o.cmp(&m(&[2, 0, 0]), &m(&[1, 1, 0])), Ordering::Greater);
        // x*z vs y^2: last variable z has exponent 1 vs 0, so y^2 leads
        assert_eq!(o.cmp(&m(&[1, 0, 1]), &m(&[0, 2, 0])), Ordering::Less);
        assert_eq!(o.cmp(&m(&[0, 0, 3]), &m(&[1, 0, 0])), Ordering::Greater);
    }

    #[test]
    fn local_order_prefers_low_degree() {
        let o = MonomialOrder::NegDegRevLex;
        assert!(!o.is_global());
        assert_eq!(o.cmp(&m(&[1, 0]), &m(&[2, 0])), Ordering::Greater);
        assert_eq!(o.cmp(&m(&[0, 0]), &m(&[0, 1])), Ordering::Greater);
        assert_eq!(o.cmp(&m(&[1, 0]), &m(&[0, 1])), Ordering::Greater);
    }

    #[test]
    fn block_eliminates_first_block() {
        let o = MonomialOrder::elimination(1, 3);
        assert!(o.is_global());
        // any power of z beats anything free of z
        assert_eq!(o.cmp(&m(&[1, 0, 0]), &m(&[0, 5, 7])), Ordering::Greater);
        assert_eq!(o.cmp(&m(&[0, 2, 0]), &m(&[0, 1, 0])), Ordering::Greater);
    }
}
