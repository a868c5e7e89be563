//! Finite linearly ordered MTL-algebras.
//!
//! Elements of an `n`-element chain are the indices `0..n`, ordered numerically:
//! `0` is bottom and `n - 1` is top. The monoidal operation (t-norm) is stored as a
//! dense table and the residuum is always derived from it, so adjunction holds by
//! construction.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A truth value: an index into a [`Chain`].
pub type Degree = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("invalid chain size {0}: an algebra needs distinct bottom and top")]
    InvalidSize(usize),
    #[error("chain of size {0} has no coatom")]
    NoCoatom(usize),
    #[error("t-norm table must be {expected}x{expected}, got {rows} rows (or a ragged row)")]
    TableShape { expected: usize, rows: usize },
    #[error("table entry tnorm({0}, {1}) = {2} is not an element of the chain")]
    EntryOutOfRange(Degree, Degree, Degree),
    #[error("element {0} is out of range for a chain of size {1}")]
    OutOfRange(Degree, usize),
    #[error("not commutative: tnorm({0}, {1}) != tnorm({1}, {0})")]
    NotCommutative(Degree, Degree),
    #[error("not monotone: tnorm({x}, {y}) > tnorm({x}, {y_next})")]
    NotMonotone {
        x: Degree,
        y: Degree,
        y_next: Degree,
    },
    #[error("not associative at ({0}, {1}, {2})")]
    NotAssociative(Degree, Degree, Degree),
    #[error("top is not a unit: tnorm({0}, {1}) != {1}")]
    UnitLaw(Degree, Degree),
    #[error("bottom is not absorbing: tnorm(0, {0}) != 0")]
    ZeroLaw(Degree),
}

/// Which family a chain was built from; used when writing algebra descriptions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainKind {
    Lukasiewicz,
    Godel,
    Custom,
}

/// A finite MTL-chain.
#[derive(Clone, PartialEq, Eq)]
pub struct Chain {
    kind: ChainKind,
    size: usize,
    tnorm: Vec<Degree>,
    residuum: Vec<Degree>,
    labels: Vec<String>,
}

impl fmt::Debug for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chain")
            .field("kind", &self.kind)
            .field("size", &self.size)
            .finish()
    }
}

impl Chain {
    /// The `n`-element Łukasiewicz chain: `tnorm(i, j) = max(0, i + j - (n - 1))`.
    pub fn lukasiewicz(n: usize) -> Result<Chain, AlgebraError> {
        check_size(n)?;
        let top = n - 1;
        Ok(Chain::from_fn(ChainKind::Lukasiewicz, n, |x, y| {
            (x + y).saturating_sub(top)
        }))
    }

    /// The `n`-element Gödel chain: `tnorm(i, j) = min(i, j)`.
    pub fn godel(n: usize) -> Result<Chain, AlgebraError> {
        check_size(n)?;
        Ok(Chain::from_fn(ChainKind::Godel, n, |x, y| x.min(y)))
    }

    /// Builds a chain from an arbitrary t-norm table, validating every MTL-chain law.
    ///
    /// Checks run in the order commutativity, monotonicity, associativity, unit,
    /// absorbing bottom; the first failure is reported with its witness.
    pub fn custom(n: usize, table: &[Vec<Degree>]) -> Result<Chain, AlgebraError> {
        check_size(n)?;
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(AlgebraError::TableShape {
                expected: n,
                rows: table.len(),
            });
        }
        for (x, row) in table.iter().enumerate() {
            for (y, &v) in row.iter().enumerate() {
                if v >= n {
                    return Err(AlgebraError::EntryOutOfRange(x, y, v));
                }
            }
        }
        let t = |x: Degree, y: Degree| table[x][y];
        for x in 0..n {
            for y in x + 1..n {
                if t(x, y) != t(y, x) {
                    return Err(AlgebraError::NotCommutative(x, y));
                }
            }
        }
        for x in 0..n {
            for y in 0..n - 1 {
                if t(x, y) > t(x, y + 1) {
                    return Err(AlgebraError::NotMonotone {
                        x,
                        y,
                        y_next: y + 1,
                    });
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if t(t(x, y), z) != t(x, t(y, z)) {
                        return Err(AlgebraError::NotAssociative(x, y, z));
                    }
                }
            }
        }
        let top = n - 1;
        for x in 0..n {
            if t(top, x) != x {
                return Err(AlgebraError::UnitLaw(top, x));
            }
        }
        for x in 0..n {
            if t(0, x) != 0 {
                return Err(AlgebraError::ZeroLaw(x));
            }
        }
        Ok(Chain::from_fn(ChainKind::Custom, n, t))
    }

    fn from_fn(kind: ChainKind, n: usize, t: impl Fn(Degree, Degree) -> Degree) -> Chain {
        let mut tnorm = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                tnorm.push(t(x, y));
            }
        }
        // residuum(x, y) = max { z : tnorm(x, z) <= y }; z = 0 always qualifies.
        let mut residuum = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                let z = (0..n).rev().find(|&z| tnorm[x * n + z] <= y).unwrap_or(0);
                residuum.push(z);
            }
        }
        let labels = (0..n).map(|k| rational_label(k, n - 1)).collect();
        Chain {
            kind,
            size: n,
            tnorm,
            residuum,
            labels,
        }
    }

    pub fn kind(&self) -> ChainKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn bottom(&self) -> Degree {
        0
    }

    pub fn top(&self) -> Degree {
        self.size - 1
    }

    /// The largest element strictly below top.
    pub fn coatom(&self) -> Result<Degree, AlgebraError> {
        if self.size < 2 {
            return Err(AlgebraError::NoCoatom(self.size));
        }
        Ok(self.size - 2)
    }

    pub fn contains(&self, x: Degree) -> bool {
        x < self.size
    }

    pub fn check(&self, x: Degree) -> Result<Degree, AlgebraError> {
        if self.contains(x) {
            Ok(x)
        } else {
            Err(AlgebraError::OutOfRange(x, self.size))
        }
    }

    /// Strong conjunction. Panics on out-of-range elements; see [`Chain::try_tnorm`].
    #[inline]
    pub fn tnorm(&self, x: Degree, y: Degree) -> Degree {
        self.tnorm[x * self.size + y]
    }

    #[inline]
    pub fn residuum(&self, x: Degree, y: Degree) -> Degree {
        self.residuum[x * self.size + y]
    }

    pub fn try_tnorm(&self, x: Degree, y: Degree) -> Result<Degree, AlgebraError> {
        Ok(self.tnorm(self.check(x)?, self.check(y)?))
    }

    pub fn try_residuum(&self, x: Degree, y: Degree) -> Result<Degree, AlgebraError> {
        Ok(self.residuum(self.check(x)?, self.check(y)?))
    }

    /// Weak conjunction (lattice meet).
    #[inline]
    pub fn meet(&self, x: Degree, y: Degree) -> Degree {
        x.min(y)
    }

    /// Weak disjunction (lattice join).
    #[inline]
    pub fn join(&self, x: Degree, y: Degree) -> Degree {
        x.max(y)
    }

    pub fn label(&self, x: Degree) -> &str {
        &self.labels[x]
    }

    /// The t-norm as nested rows.
    pub fn tnorm_rows(&self) -> Vec<Vec<Degree>> {
        self.tnorm.chunks(self.size).map(<[_]>::to_vec).collect()
    }

    pub fn elements(&self) -> std::ops::Range<Degree> {
        0..self.size
    }
}

fn check_size(n: usize) -> Result<(), AlgebraError> {
    if n < 2 {
        Err(AlgebraError::InvalidSize(n))
    } else {
        Ok(())
    }
}

fn rational_label(k: usize, denom: usize) -> String {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    if k == 0 {
        return "0".to_string();
    }
    if k == denom {
        return "1".to_string();
    }
    let g = gcd(k, denom);
    format!("{}/{}", k / g, denom / g)
}

/// The algebra fragment of a structure file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraSpec {
    pub kind: ChainKind,
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tnorm: Option<Vec<Vec<Degree>>>,
}

impl AlgebraSpec {
    pub fn build(&self) -> Result<Chain, AlgebraError> {
        match self.kind {
            ChainKind::Lukasiewicz => Chain::lukasiewicz(self.size),
            ChainKind::Godel => Chain::godel(self.size),
            ChainKind::Custom => {
                let table = self.tnorm.as_ref().ok_or(AlgebraError::TableShape {
                    expected: self.size,
                    rows: 0,
                })?;
                Chain::custom(self.size, table)
            }
        }
    }
}

impl From<&Chain> for AlgebraSpec {
    fn from(chain: &Chain) -> Self {
        AlgebraSpec {
            kind: chain.kind,
            size: chain.size,
            tnorm: (chain.kind == ChainKind::Custom).then(|| chain.tnorm_rows()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adjunction_holds(c: &Chain) -> bool {
        let n = c.size();
        (0..n).all(|x| {
            (0..n).all(|y| (0..n).all(|z| (c.tnorm(x, z) <= y) == (z <= c.residuum(x, y))))
        })
    }

    #[test]
    fn lukasiewicz_small() {
        let b = Chain::lukasiewicz(2).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(b.tnorm(x, y), x & y);
            }
        }
        let l3 = Chain::lukasiewicz(3).unwrap();
        assert_eq!(l3.tnorm(1, 1), 0);
        assert_eq!(l3.residuum(1, 0), 1);
        assert_eq!(l3.label(1), "1/2");
        assert_eq!(Chain::lukasiewicz(1), Err(AlgebraError::InvalidSize(1)));
    }

    #[test]
    fn godel_small() {
        let g = Chain::godel(3).unwrap();
        assert_eq!(g.tnorm(1, 2), 1);
        assert_eq!(g.residuum(1, 2), 2);
        // max z with min(2, z) <= 1
        let oracle = (0..3).filter(|&z| 2.min(z) <= 1).max().unwrap();
        assert_eq!(g.residuum(2, 1), oracle);
        assert_eq!(oracle, 1);
        assert!(Chain::godel(0).is_err());
    }

    #[test]
    fn residuum_identities() {
        for c in [Chain::lukasiewicz(5).unwrap(), Chain::godel(4).unwrap()] {
            for x in c.elements() {
                assert_eq!(c.residuum(x, x), c.top());
                assert_eq!(c.residuum(c.top(), x), x);
                for y in c.elements() {
                    if x <= y {
                        assert_eq!(c.residuum(x, y), c.top());
                    }
                    assert_eq!(c.join(c.residuum(x, y), c.residuum(y, x)), c.top());
                }
            }
        }
        let c = Chain::lukasiewicz(3).unwrap();
        assert_eq!(c.try_residuum(3, 0), Err(AlgebraError::OutOfRange(3, 3)));
    }

    #[test]
    fn coatom() {
        assert_eq!(Chain::lukasiewicz(3).unwrap().coatom(), Ok(1));
        assert_eq!(Chain::godel(2).unwrap().coatom(), Ok(0));
    }

    #[test]
    fn custom_reproduces_builtins() {
        for n in 2..=7 {
            let l = Chain::lukasiewicz(n).unwrap();
            let c = Chain::custom(n, &l.tnorm_rows()).unwrap();
            assert_eq!(c.tnorm, l.tnorm);
            assert_eq!(c.residuum, l.residuum);
            assert_eq!(c.labels, l.labels);
            let g = Chain::godel(n).unwrap();
            let c = Chain::custom(n, &g.tnorm_rows()).unwrap();
            assert_eq!(c.residuum, g.residuum);
        }
    }

    #[test]
    fn custom_unit_law_witness() {
        let mut table = Chain::lukasiewicz(3).unwrap().tnorm_rows();
        table[2][1] = 0;
        table[1][2] = 0;
        assert_eq!(Chain::custom(3, &table), Err(AlgebraError::UnitLaw(2, 1)));
    }

    #[test]
    fn custom_associativity_witness() {
        // Brute force over 3x3 commutative monotone tables for one that is not associative.
        let mut found = None;
        'search: for code in 0..3usize.pow(6) {
            let mut digits = [0usize; 6];
            let mut c = code;
            for d in digits.iter_mut() {
                *d = c % 3;
                c /= 3;
            }
            // upper triangle (0,0),(0,1),(0,2),(1,1),(1,2),(2,2)
            let [a, b, cc, d, e, f] = digits;
            let table = vec![vec![a, b, cc], vec![b, d, e], vec![cc, e, f]];
            let monotone = (0..3).all(|x| (0..2).all(|y| table[x][y] <= table[x][y + 1]));
            if !monotone {
                continue;
            }
            for x in 0..3 {
                for y in 0..3 {
                    for z in 0..3 {
                        if table[table[x][y]][z] != table[x][table[y][z]] {
                            found = Some((table, (x, y, z)));
                            break 'search;
                        }
                    }
                }
            }
        }
        let (table, (x, y, z)) = found.expect("a non-associative monotone table exists");
        assert_eq!(
            Chain::custom(3, &table),
            Err(AlgebraError::NotAssociative(x, y, z))
        );
    }

    #[test]
    fn custom_rejects_bad_shapes() {
        assert!(matches!(
            Chain::custom(3, &[vec![0, 0], vec![0, 1]]),
            Err(AlgebraError::TableShape { .. })
        ));
        assert!(matches!(
            Chain::custom(2, &[vec![0, 5], vec![5, 1]]),
            Err(AlgebraError::EntryOutOfRange(0, 1, 5))
        ));
        assert!(matches!(
            Chain::custom(2, &[vec![0, 1], vec![0, 1]]),
            Err(AlgebraError::NotCommutative(0, 1))
        ));
    }

    #[test]
    fn adjunction_exhaustive() {
        for n in 2..=8 {
            assert!(adjunction_holds(&Chain::lukasiewicz(n).unwrap()));
            assert!(adjunction_holds(&Chain::godel(n).unwrap()));
        }
    }

    #[test]
    fn spec_round_trip() {
        let c = Chain::custom(3, &Chain::godel(3).unwrap().tnorm_rows()).unwrap();
        let spec = AlgebraSpec::from(&c);
        assert_eq!(spec.build().unwrap(), c);
        let l = Chain::lukasiewicz(4).unwrap();
        assert_eq!(AlgebraSpec::from(&l).tnorm, None);
    }
}
