//! Direct products and weak direct products of finite families of structures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::morphisms::{check_compatible, Mapping, MorphismError};
use crate::structures::{tuples, Element, Structure, StructureError};

const RESERVED: [char; 3] = ['(', ')', '|'];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProductError {
    #[error("a product needs at least one factor")]
    NoFactors,
    #[error("factor {index} does not match factor 0: {source}")]
    Mismatch { index: usize, source: MorphismError },
    #[error("element name `{0}` uses a character reserved for product names")]
    ReservedName(String),
    #[error("factor index {index} out of range for {count} factors")]
    BadIndex { index: usize, count: usize },
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// How a weak product fills in values below top.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeakPolicy {
    /// Minimum over coordinates: the direct product itself.
    Min,
    /// A seeded pseudo-random element below top wherever some coordinate is below top.
    Scrambled { seed: u64 },
}

/// A product structure together with the coordinates of its elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Product {
    structure: Structure,
    coords: Vec<Vec<Element>>,
    factor_sizes: Vec<usize>,
}

impl Product {
    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn into_structure(self) -> Structure {
        self.structure
    }

    pub fn factor_count(&self) -> usize {
        self.factor_sizes.len()
    }

    /// Coordinates of a product element, one per factor.
    pub fn coords(&self, e: Element) -> &[Element] {
        &self.coords[e]
    }

    /// The product element with the given coordinates.
    pub fn element_at(&self, coords: &[Element]) -> Element {
        coords
            .iter()
            .zip(&self.factor_sizes)
            .fold(0, |acc, (&c, &n)| acc * n + c)
    }
}

/// The canonical product: predicate values are minima over coordinates.
pub fn direct_product(factors: &[Structure]) -> Result<Product, ProductError> {
    weak_product(factors, WeakPolicy::Min)
}

/// A member of the weak product family: value top exactly where every coordinate is
/// top, other values chosen by `policy`. Domain, functions and constants are the
/// componentwise ones in every case.
pub fn weak_product(factors: &[Structure], policy: WeakPolicy) -> Result<Product, ProductError> {
    let first = factors.first().ok_or(ProductError::NoFactors)?;
    for (index, f) in factors.iter().enumerate().skip(1) {
        check_compatible(first, f).map_err(|source| ProductError::Mismatch { index, source })?;
        if f.language() != first.language() {
            return Err(ProductError::Mismatch {
                index,
                source: MorphismError::LanguageMismatch,
            });
        }
    }
    for f in factors {
        if let Some(bad) = f.domain().iter().find(|n| n.contains(RESERVED)) {
            return Err(ProductError::ReservedName(bad.clone()));
        }
    }

    let factor_sizes: Vec<usize> = factors.iter().map(Structure::size).collect();
    let coords: Vec<Vec<Element>> = cartesian(&factor_sizes);
    let names = coords
        .iter()
        .map(|c| {
            let parts: Vec<&str> = c
                .iter()
                .zip(factors)
                .map(|(&e, f)| f.element_name(e))
                .collect();
            format!("({})", parts.join("|"))
        })
        .collect();
    let mut s = Structure::new(first.chain().clone(), first.language().clone(), names)?;
    let size = s.size();
    let top = first.chain().top();
    let mut rng = match policy {
        WeakPolicy::Min => None,
        WeakPolicy::Scrambled { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
    };

    let index_of = |c: &[Element]| -> Element {
        c.iter()
            .zip(&factor_sizes)
            .fold(0, |acc, (&x, &n)| acc * n + x)
    };

    let pred_names: Vec<(String, usize)> = first
        .predicates()
        .map(|(p, t)| (p.to_string(), t.arity()))
        .collect();
    for (p, arity) in &pred_names {
        for args in tuples(size, *arity) {
            let min = factors
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let local: Vec<Element> = args.iter().map(|&a| coords[a][i]).collect();
                    f.predicate(p).expect("shared language").get(&local)
                })
                .min()
                .expect("nonempty family");
            let value = match rng.as_mut() {
                Some(r) if min < top => r.gen_range(0..top),
                _ => min,
            };
            if value != 0 {
                s.set_predicate(p, &args, value)?;
            }
        }
    }

    let func_names: Vec<(String, usize)> = first
        .functions()
        .map(|(f, t)| (f.to_string(), t.arity()))
        .collect();
    for (f, arity) in &func_names {
        for args in tuples(size, *arity) {
            let image: Vec<Element> = factors
                .iter()
                .enumerate()
                .map(|(i, fac)| {
                    let local: Vec<Element> = args.iter().map(|&a| coords[a][i]).collect();
                    fac.function(f)
                        .expect("shared language")
                        .get(&local, fac.size())
                })
                .collect();
            s.set_function(f, &args, index_of(&image))?;
        }
    }

    Ok(Product {
        structure: s,
        coords,
        factor_sizes,
    })
}

fn cartesian(sizes: &[usize]) -> Vec<Vec<Element>> {
    sizes.iter().fold(vec![Vec::new()], |acc, &n| {
        acc.into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |e| {
                    let mut next = prefix.clone();
                    next.push(e);
                    next
                })
            })
            .collect()
    })
}

/// The coordinate map onto factor `i`.
pub fn projection(product: &Product, i: usize) -> Result<Mapping, ProductError> {
    if i >= product.factor_count() {
        return Err(ProductError::BadIndex {
            index: i,
            count: product.factor_count(),
        });
    }
    Ok(Mapping(product.coords.iter().map(|c| c[i]).collect()))
}
