//! Exact frequency arithmetic over a declared basis of real symbols.
//!
//! A [`Frequency`] is a rational combination of the symbols of a
//! [`SymbolBasis`]. The symbols are treated as free generators: two
//! frequencies are equal only when their coefficient vectors are equal, and
//! rational independence is decided exactly inside that model. Whether the
//! real values attached to the symbols are actually independent over the
//! rationals is an assumption made by the caller.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Reserved name of the unit symbol, whose real value is exactly 1.
pub const UNIT_SYMBOL: &str = "1";

#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    pub name: String,
    pub value: f64,
}

impl Symbol {
    pub fn new(name: impl Into<String>, value: f64) -> Self {
        Symbol {
            name: name.into(),
            value,
        }
    }
}

/// Ordered, immutable list of named generators.
#[derive(Debug, Clone)]
pub struct SymbolBasis {
    symbols: Vec<Symbol>,
    index: HashMap<String, usize>,
}

impl PartialEq for SymbolBasis {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
    }
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl SymbolBasis {
    pub fn new(symbols: Vec<Symbol>) -> Result<Arc<Self>> {
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if s.name.is_empty() {
                return Err(Error::InvalidBasis("empty symbol name".into()));
            }
            if s.name == UNIT_SYMBOL {
                if s.value != 1.0 {
                    return Err(Error::InvalidBasis(
                        "the unit symbol must have value 1".into(),
                    ));
                }
            } else if !is_identifier(&s.name) {
                return Err(Error::InvalidBasis(format!(
                    "symbol name `{}` is not an identifier",
                    s.name
                )));
            }
            if !s.value.is_finite() || s.value == 0.0 {
                return Err(Error::InvalidBasis(format!(
                    "symbol `{}` has non-finite or zero value {}",
                    s.name, s.value
                )));
            }
            if index.insert(s.name.clone(), i).is_some() {
                return Err(Error::InvalidBasis(format!(
                    "duplicate symbol `{}`",
                    s.name
                )));
            }
        }
        Ok(Arc::new(SymbolBasis { symbols, index }))
    }

    /// Basis whose first symbol is the unit, followed by `others`.
    pub fn with_unit<I, S>(others: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut symbols = vec![Symbol::new(UNIT_SYMBOL, 1.0)];
        symbols.extend(others.into_iter().map(|(n, v)| Symbol::new(n, v)));
        Self::new(symbols)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn unit_index(&self) -> Option<usize> {
        self.index_of(UNIT_SYMBOL)
    }
}

pub(crate) fn same_basis(a: &Arc<SymbolBasis>, b: &Arc<SymbolBasis>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Sparse rational vector: strictly increasing indices, no zero entries.
pub(crate) type SparseVec = Vec<(usize, Rational)>;

/// `y + a * x` for sparse vectors.
fn axpy(y: &[(usize, Rational)], a: &Rational, x: &[(usize, Rational)]) -> SparseVec {
    let mut out = Vec::with_capacity(y.len() + x.len());
    let (mut i, mut j) = (0, 0);
    while i < y.len() || j < x.len() {
        let take_y = j >= x.len() || (i < y.len() && y[i].0 < x[j].0);
        let take_x = i >= y.len() || (j < x.len() && x[j].0 < y[i].0);
        if take_y {
            out.push(y[i].clone());
            i += 1;
        } else if take_x {
            out.push((x[j].0, a * &x[j].1));
            j += 1;
        } else {
            let v = &y[i].1 + a * &x[j].1;
            if !v.is_zero() {
                out.push((y[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn cmp_sparse(a: &[(usize, Rational)], b: &[(usize, Rational)]) -> Ordering {
    let zero = Rational::zero();
    let (mut i, mut j) = (0, 0);
    loop {
        match (a.get(i), b.get(j)) {
            (None, None) => return Ordering::Equal,
            (Some((_, va)), None) => return va.cmp(&zero),
            (None, Some((_, vb))) => return zero.cmp(vb),
            (Some((ia, va)), Some((ib, vb))) => {
                let ord = match ia.cmp(ib) {
                    Ordering::Less => va.cmp(&zero),
                    Ordering::Greater => zero.cmp(vb),
                    Ordering::Equal => va.cmp(vb),
                };
                if ord != Ordering::Equal {
                    return ord;
                }
                if ia <= ib {
                    i += 1;
                }
                if ib <= ia {
                    j += 1;
                }
            }
        }
    }
}

/// Exact rational combination of basis symbols.
///
/// Equality and ordering look only at the coefficient vector; operations that
/// combine two frequencies check the basis separately. The ordering is
/// lexicographic on the dense coefficient vectors.
#[derive(Clone)]
pub struct Frequency {
    basis: Arc<SymbolBasis>,
    coeffs: SparseVec,
}

impl Frequency {
    pub fn zero(basis: &Arc<SymbolBasis>) -> Self {
        Frequency {
            basis: basis.clone(),
            coeffs: Vec::new(),
        }
    }

    /// The frequency equal to the single symbol at `index`.
    pub fn generator(basis: &Arc<SymbolBasis>, index: usize) -> Result<Self> {
        if index >= basis.len() {
            return Err(Error::IndexOutOfRange {
                what: "symbol",
                index,
                limit: basis.len(),
            });
        }
        Ok(Frequency {
            basis: basis.clone(),
            coeffs: vec![(index, Rational::one())],
        })
    }

    pub fn symbol(basis: &Arc<SymbolBasis>, name: &str) -> Result<Self> {
        let idx = basis
            .index_of(name)
            .ok_or_else(|| Error::Parse(format!("unknown symbol `{name}`")))?;
        Self::generator(basis, idx)
    }

    /// The unit frequency `1`; requires the basis to declare the unit symbol.
    pub fn unit(basis: &Arc<SymbolBasis>) -> Result<Self> {
        let idx = basis
            .unit_index()
            .ok_or_else(|| Error::InvalidBasis("basis has no unit symbol".into()))?;
        Self::generator(basis, idx)
    }

    pub fn from_dense(basis: &Arc<SymbolBasis>, coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::BasisMismatch);
        }
        Ok(Frequency {
            basis: basis.clone(),
            coeffs: coeffs
                .into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        })
    }

    /// Builds from `(symbol index, coefficient)` pairs; repeated indices add up.
    pub fn from_terms<I>(basis: &Arc<SymbolBasis>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, Rational)>,
    {
        let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
        for (i, c) in terms {
            if i >= basis.len() {
                return Err(Error::IndexOutOfRange {
                    what: "symbol",
                    index: i,
                    limit: basis.len(),
                });
            }
            *acc.entry(i).or_insert_with(Rational::zero) += c;
        }
        Ok(Frequency {
            basis: basis.clone(),
            coeffs: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    pub fn basis(&self) -> &Arc<SymbolBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, index: usize) -> Rational {
        self.coeffs
            .binary_search_by_key(&index, |(i, _)| *i)
            .map(|k| self.coeffs[k].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    /// Nonzero `(symbol index, coefficient)` pairs in index order.
    pub fn terms(&self) -> &[(usize, Rational)] {
        &self.coeffs
    }

    pub fn to_dense(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.basis.len()];
        for (i, c) in &self.coeffs {
            out[*i] = c.clone();
        }
        out
    }

    pub fn first_nonzero(&self) -> Option<usize> {
        self.coeffs.first().map(|(i, _)| *i)
    }

    pub fn same_basis(&self, other: &Frequency) -> bool {
        same_basis(&self.basis, &other.basis)
    }

    pub fn try_add(&self, other: &Frequency) -> Result<Frequency> {
        if !self.same_basis(other) {
            return Err(Error::BasisMismatch);
        }
        Ok(self.add_unchecked(other))
    }

    pub fn try_sub(&self, other: &Frequency) -> Result<Frequency> {
        if !self.same_basis(other) {
            return Err(Error::BasisMismatch);
        }
        Ok(self.sub_unchecked(other))
    }

    pub(crate) fn add_unchecked(&self, other: &Frequency) -> Frequency {
        Frequency {
            basis: self.basis.clone(),
            coeffs: axpy(&self.coeffs, &Rational::one(), &other.coeffs),
        }
    }

    pub(crate) fn sub_unchecked(&self, other: &Frequency) -> Frequency {
        Frequency {
            basis: self.basis.clone(),
            coeffs: axpy(&self.coeffs, &-Rational::one(), &other.coeffs),
        }
    }

    pub fn neg(&self) -> Frequency {
        Frequency {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|(i, c)| (*i, -c)).collect(),
        }
    }

    pub fn scale(&self, factor: &Rational) -> Frequency {
        if factor.is_zero() {
            return Frequency::zero(&self.basis);
        }
        Frequency {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|(i, c)| (*i, c * factor)).collect(),
        }
    }

    pub fn scale_int(&self, factor: i64) -> Frequency {
        self.scale(&Rational::from_integer(BigInt::from(factor)))
    }

    /// Floating-point value of the combination using the symbol values.
    pub fn real_value(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(i, c)| c.to_f64().unwrap_or(f64::NAN) * self.basis.symbols[*i].value)
            .sum()
    }

    /// Parses the canonical text form, e.g. `3/2*a + -1/4*b`.
    ///
    /// A bare rational refers to the unit symbol; a bare name has coefficient
    /// one. Whitespace is ignored and `a - b` is accepted as `a + -1*b`.
    pub fn parse(basis: &Arc<SymbolBasis>, text: &str) -> Result<Frequency> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::Parse("empty frequency".into()));
        }
        let mut normalized = String::with_capacity(compact.len() + 4);
        let mut prev: Option<char> = None;
        for c in compact.chars() {
            if c == '-' && !matches!(prev, None | Some('+') | Some('*')) {
                normalized.push('+');
            }
            normalized.push(c);
            prev = Some(c);
        }
        let mut terms = Vec::new();
        for raw in normalized.split('+') {
            if raw.is_empty() {
                return Err(Error::Parse(format!("empty term in `{text}`")));
            }
            let (coef, name) = match raw.split_once('*') {
                Some((c, n)) => (parse_rational(c)?, Some(n)),
                None => {
                    if let Ok(c) = parse_rational(raw) {
                        (c, None)
                    } else if let Some(n) = raw.strip_prefix('-') {
                        (-Rational::one(), Some(n))
                    } else {
                        (Rational::one(), Some(raw))
                    }
                }
            };
            let idx = match name {
                Some(n) => basis
                    .index_of(n)
                    .ok_or_else(|| Error::Parse(format!("unknown symbol `{n}`")))?,
                None => basis.unit_index().ok_or_else(|| {
                    Error::Parse(format!("bare number `{raw}` but basis has no unit symbol"))
                })?,
            };
            terms.push((idx, coef));
        }
        Frequency::from_terms(basis, terms)
    }
}

pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("invalid rational `{text}`"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let valid_int = |s: &str, signed: bool| {
        let digits = if signed {
            s.strip_prefix('-').unwrap_or(s)
        } else {
            s
        };
        !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit())
    };
    if !valid_int(num, true) {
        return Err(bad());
    }
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = match den {
        Some(d) if valid_int(d, false) => d.parse().map_err(|_| bad())?,
        Some(_) => return Err(bad()),
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{text}`")));
    }
    Ok(Rational::new(n, d))
}

impl PartialEq for Frequency {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl Eq for Frequency {}

impl Hash for Frequency {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

impl PartialOrd for Frequency {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frequency {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_sparse(&self.coeffs, &other.coeffs)
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        for (k, (i, c)) in self.coeffs.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            let name = &self.basis.symbols[*i].name;
            if name == UNIT_SYMBOL {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}*{name}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Frequency({self})")
    }
}

pub fn freq_add(a: &Frequency, b: &Frequency) -> Result<Frequency> {
    a.try_add(b)
}

pub fn real_value(f: &Frequency) -> f64 {
    f.real_value()
}

fn check_shared(freqs: &[Frequency]) -> Result<()> {
    let first = freqs.first().ok_or(Error::Empty("frequency set"))?;
    if freqs.iter().any(|f| !f.same_basis(first)) {
        return Err(Error::BasisMismatch);
    }
    Ok(())
}

/// Incremental row echelon form over the rationals.
///
/// Each stored row is pivoted on its highest nonzero column. Rows are
/// optionally tracked as combinations of the *inputs* that were accepted as
/// independent, which gives coordinates of every later input in terms of
/// those inputs.
struct Echelon {
    rows: Vec<SparseVec>,
    pivot_row: HashMap<usize, usize>,
    track: bool,
    transforms: Vec<BTreeMap<usize, Rational>>,
}

enum Inserted {
    Independent(usize),
    Dependent(BTreeMap<usize, Rational>),
}

impl Echelon {
    fn new(track: bool) -> Self {
        Echelon {
            rows: Vec::new(),
            pivot_row: HashMap::new(),
            track,
            transforms: Vec::new(),
        }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn insert(&mut self, v: &[(usize, Rational)]) -> Inserted {
        let mut r: SparseVec = v.to_vec();
        let mut used: Vec<(usize, Rational)> = Vec::new();
        while let Some((col, val)) = r.last() {
            let Some(&k) = self.pivot_row.get(col) else {
                break;
            };
            let pivot = &self.rows[k];
            let factor = val / &pivot.last().expect("nonempty row").1;
            r = axpy(&r, &-&factor, pivot);
            if self.track {
                used.push((k, factor));
            }
        }
        // v = r + sum(factor_k * row_k)
        let mut combo: BTreeMap<usize, Rational> = BTreeMap::new();
        if self.track {
            for (k, factor) in &used {
                for (b, t) in &self.transforms[*k] {
                    let e = combo.entry(*b).or_insert_with(Rational::zero);
                    *e += factor * t;
                }
            }
            combo.retain(|_, c| !c.is_zero());
        }
        if r.is_empty() {
            return Inserted::Dependent(combo);
        }
        let new_index = self.rows.len();
        self.pivot_row.insert(r.last().expect("nonempty").0, new_index);
        self.rows.push(r);
        if self.track {
            // row_new = v - combo, with v the new basis element.
            let mut t: BTreeMap<usize, Rational> =
                combo.into_iter().map(|(b, c)| (b, -c)).collect();
            t.insert(new_index, Rational::one());
            self.transforms.push(t);
        }
        Inserted::Independent(new_index)
    }
}

/// Rank over the rationals of the coefficient matrix of `freqs`.
pub fn rational_rank(freqs: &[Frequency]) -> Result<usize> {
    check_shared(freqs)?;
    let mut ech = Echelon::new(false);
    for f in freqs {
        ech.insert(&f.coeffs);
    }
    Ok(ech.rank())
}

pub fn is_rationally_independent(freqs: &[Frequency]) -> Result<bool> {
    Ok(rational_rank(freqs)? == freqs.len())
}

/// Integer coordinates of a finite frequency set on a `d`-dimensional torus.
#[derive(Debug, Clone)]
pub struct TorusReduction {
    reduced_basis: Vec<Frequency>,
    exponents: Vec<Vec<BigInt>>,
}

impl TorusReduction {
    pub fn dim(&self) -> usize {
        self.reduced_basis.len()
    }

    pub fn reduced_basis(&self) -> &[Frequency] {
        &self.reduced_basis
    }

    /// One row per input frequency, `dim()` columns.
    pub fn exponents(&self) -> &[Vec<BigInt>] {
        &self.exponents
    }

    /// Integer combination of the reduced basis given by row `i`.
    pub fn reconstruct(&self, i: usize) -> Frequency {
        let basis = self.reduced_basis[0].basis().clone();
        let mut acc = Frequency::zero(&basis);
        for (e, b) in self.exponents[i].iter().zip(&self.reduced_basis) {
            if !e.is_zero() {
                acc = acc.add_unchecked(&b.scale(&Rational::from_integer(e.clone())));
            }
        }
        acc
    }

    /// Exponent rows as sparse `(dimension, exponent)` lists.
    pub fn sparse_exponents_i64(&self) -> Result<Vec<Vec<(usize, i64)>>> {
        self.exponents
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, e)| !e.is_zero())
                    .map(|(j, e)| e.to_i64().map(|v| (j, v)).ok_or(Error::ExponentOverflow))
                    .collect()
            })
            .collect()
    }
}

/// Reduces a frequency list to integer exponent vectors over `d` rationally
/// independent frequencies, `d` being the rational rank of the list.
///
/// The reduced basis is built from the first maximal independent subset of
/// the inputs, each element rescaled by the gcd of the rational coordinates
/// along it so that exponents are coprime integers. Basis elements are
/// ordered by first nonzero coordinate, then lexicographically. An all-zero
/// input list reduces to `d = 0`.
pub fn torus_reduce(freqs: &[Frequency]) -> Result<TorusReduction> {
    check_shared(freqs)?;
    let mut ech = Echelon::new(true);
    let mut chosen: Vec<usize> = Vec::new();
    let mut coords: Vec<BTreeMap<usize, Rational>> = Vec::with_capacity(freqs.len());
    for (i, f) in freqs.iter().enumerate() {
        match ech.insert(&f.coeffs) {
            Inserted::Independent(k) => {
                debug_assert_eq!(k, chosen.len());
                chosen.push(i);
                coords.push(BTreeMap::from([(k, Rational::one())]));
            }
            Inserted::Dependent(c) => coords.push(c),
        }
    }
    let d = chosen.len();

    let mut denom_lcm = vec![BigInt::one(); d];
    for row in &coords {
        for (k, c) in row {
            denom_lcm[*k] = denom_lcm[*k].lcm(c.denom());
        }
    }
    let mut num_gcd = vec![BigInt::zero(); d];
    for row in &coords {
        for (k, c) in row {
            let scaled = (c * Rational::from_integer(denom_lcm[*k].clone())).to_integer();
            num_gcd[*k] = num_gcd[*k].gcd(&scaled);
        }
    }
    // The chosen input has coordinate 1, so every gcd is positive.
    let multipliers: Vec<Rational> = (0..d)
        .map(|k| Rational::new(num_gcd[k].clone(), denom_lcm[k].clone()))
        .collect();
    let scaled_basis: Vec<Frequency> = (0..d)
        .map(|k| freqs[chosen[k]].scale(&multipliers[k]))
        .collect();

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        let fa = &scaled_basis[a];
        let fb = &scaled_basis[b];
        fa.first_nonzero()
            .cmp(&fb.first_nonzero())
            .then_with(|| fa.cmp(fb))
    });
    let mut position = vec![0; d];
    for (pos, &k) in order.iter().enumerate() {
        position[k] = pos;
    }

    let exponents = coords
        .iter()
        .map(|row| {
            let mut e = vec![BigInt::zero(); d];
            for (k, c) in row {
                let q = c / &multipliers[*k];
                debug_assert!(q.is_integer());
                e[position[*k]] = q.to_integer();
            }
            e
        })
        .collect();
    let reduced_basis = order.iter().map(|&k| scaled_basis[k].clone()).collect();
    Ok(TorusReduction {
        reduced_basis,
        exponents,
    })
}

/// Convenience for building rationals in code and tests.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ab() -> Arc<SymbolBasis> {
        SymbolBasis::new(vec![Symbol::new("a", 1.0), Symbol::new("b", 2f64.sqrt())]).unwrap()
    }

    fn f(basis: &Arc<SymbolBasis>, c: &[(i64, i64)]) -> Frequency {
        Frequency::from_dense(basis, c.iter().map(|&(n, d)| rat(n, d)).collect()).unwrap()
    }

    #[test]
    fn add_examples() {
        let b = ab();
        assert_eq!(
            freq_add(&f(&b, &[(1, 1), (0, 1)]), &f(&b, &[(0, 1), (1, 1)])).unwrap(),
            f(&b, &[(1, 1), (1, 1)])
        );
        let x = f(&b, &[(3, 7), (-2, 5)]);
        assert_eq!(freq_add(&x, &Frequency::zero(&b)).unwrap(), x);
        assert_eq!(
            freq_add(&f(&b, &[(1, 2), (1, 3)]), &f(&b, &[(1, 4), (1, 6)])).unwrap(),
            f(&b, &[(3, 4), (1, 2)])
        );
    }

    #[test]
    fn add_rejects_other_basis() {
        let b1 = ab();
        let b2 = SymbolBasis::new(vec![Symbol::new("c", 1.0), Symbol::new("d", 3.0)]).unwrap();
        let err = freq_add(&Frequency::generator(&b1, 0).unwrap(), &Frequency::generator(&b2, 0).unwrap());
        assert_eq!(err, Err(Error::BasisMismatch));
    }

    #[test]
    fn rank_examples() {
        let b = ab();
        assert_eq!(rational_rank(&[f(&b, &[(1, 1), (0, 1)]), f(&b, &[(0, 1), (1, 1)])]).unwrap(), 2);
        assert_eq!(rational_rank(&[f(&b, &[(1, 1), (0, 1)]), f(&b, &[(2, 1), (0, 1)])]).unwrap(), 1);
        assert_eq!(rational_rank(&[f(&b, &[(1, 2), (1, 3)]), f(&b, &[(1, 4), (1, 6)])]).unwrap(), 1);
        assert_eq!(rational_rank(&[]), Err(Error::Empty("frequency set")));
    }

    #[test]
    fn independence_examples() {
        let b = ab();
        let e1 = f(&b, &[(1, 1), (0, 1)]);
        let e2 = f(&b, &[(0, 1), (1, 1)]);
        let s = f(&b, &[(1, 1), (1, 1)]);
        assert!(is_rationally_independent(&[e1.clone(), e2.clone()]).unwrap());
        assert!(!is_rationally_independent(&[s.clone(), s.scale_int(2)]).unwrap());
        assert!(!is_rationally_independent(&[e1, e2, s]).unwrap());
    }

    #[test]
    fn torus_reduce_examples() {
        let b = ab();
        let e1 = f(&b, &[(1, 1), (0, 1)]);
        let e2 = f(&b, &[(0, 1), (1, 1)]);
        let t = torus_reduce(&[e1.clone(), e2.clone()]).unwrap();
        assert_eq!(t.dim(), 2);
        assert_eq!(t.reduced_basis(), &[e1.clone(), e2.clone()]);
        let big = |v: i64| BigInt::from(v);
        assert_eq!(t.exponents(), &[vec![big(1), big(0)], vec![big(0), big(1)]]);

        let t = torus_reduce(&[f(&b, &[(1, 2), (0, 1)]), f(&b, &[(1, 3), (0, 1)])]).unwrap();
        assert_eq!(t.dim(), 1);
        assert_eq!(t.reduced_basis(), &[f(&b, &[(1, 6), (0, 1)])]);
        assert_eq!(t.exponents(), &[vec![big(3)], vec![big(2)]]);

        let s = f(&b, &[(1, 1), (1, 1)]);
        let t = torus_reduce(&[s.clone()]).unwrap();
        assert_eq!(t.reduced_basis(), &[s]);
        assert_eq!(t.exponents(), &[vec![big(1)]]);
    }

    #[test]
    fn torus_reduce_orders_basis_canonically() {
        let b = ab();
        // b is listed first but a has the earlier first nonzero position
        let t = torus_reduce(&[f(&b, &[(0, 1), (1, 1)]), f(&b, &[(1, 1), (0, 1)])]).unwrap();
        assert_eq!(t.reduced_basis()[0], f(&b, &[(1, 1), (0, 1)]));
        let big = |v: i64| BigInt::from(v);
        assert_eq!(t.exponents(), &[vec![big(0), big(1)], vec![big(1), big(0)]]);
    }

    #[test]
    fn torus_reduce_zero_only() {
        let b = ab();
        let t = torus_reduce(&[Frequency::zero(&b)]).unwrap();
        assert_eq!(t.dim(), 0);
        assert_eq!(t.exponents(), &[Vec::<BigInt>::new()]);
    }

    #[test]
    fn real_value_examples() {
        let b = SymbolBasis::new(vec![Symbol::new("a", 1.0), Symbol::new("b", 1.41421356)]).unwrap();
        assert_eq!(Frequency::zero(&b).real_value(), 0.0);
        assert_eq!(f(&b, &[(1, 1), (0, 1)]).real_value(), 1.0);
        assert!((f(&b, &[(1, 1), (2, 1)]).real_value() - 3.82842712).abs() < 1e-12);
    }

    #[test]
    fn text_form() {
        let b = ab();
        let x = Frequency::parse(&b, " 3/2 * a + -1/4*b ").unwrap();
        assert_eq!(x, f(&b, &[(3, 2), (-1, 4)]));
        assert_eq!(x.to_string(), "3/2*a + -1/4*b");
        assert_eq!(Frequency::parse(&b, "b").unwrap(), f(&b, &[(0, 1), (1, 1)]));
        assert_eq!(Frequency::parse(&b, "a - b").unwrap(), f(&b, &[(1, 1), (-1, 1)]));
        assert_eq!(Frequency::parse(&b, "a + a").unwrap(), f(&b, &[(2, 1), (0, 1)]));
        assert_eq!(Frequency::zero(&b).to_string(), "0");
        assert!(Frequency::parse(&b, "c").is_err());
        assert!(Frequency::parse(&b, "1/0*a").is_err());
        assert!(Frequency::parse(&b, "a++b").is_err());
        assert!(Frequency::parse(&b, "2").is_err());

        let u = SymbolBasis::with_unit([("s", 0.5)]).unwrap();
        let y = Frequency::parse(&u, "2 + 3*s").unwrap();
        assert_eq!(y.to_string(), "2 + 3*s");
        assert_eq!(y.real_value(), 3.5);
        assert_eq!(Frequency::parse(&u, &y.to_string()).unwrap(), y);
    }

    #[test]
    fn basis_validation() {
        assert!(SymbolBasis::new(vec![Symbol::new("a", 1.0), Symbol::new("a", 2.0)]).is_err());
        assert!(SymbolBasis::new(vec![Symbol::new("", 1.0)]).is_err());
        assert!(SymbolBasis::new(vec![Symbol::new("a", 0.0)]).is_err());
        assert!(SymbolBasis::new(vec![Symbol::new("a", f64::INFINITY)]).is_err());
        assert!(SymbolBasis::new(vec![Symbol::new("1", 2.0)]).is_err());
        assert!(SymbolBasis::new(vec![Symbol::new("2x", 2.0)]).is_err());
    }

    #[test]
    fn ordering_is_dense_lexicographic() {
        let b = ab();
        let mut v = vec![
            f(&b, &[(0, 1), (1, 1)]),
            f(&b, &[(-1, 1), (5, 1)]),
            f(&b, &[(0, 1), (-1, 1)]),
            f(&b, &[(1, 2), (0, 1)]),
            Frequency::zero(&b),
        ];
        v.sort();
        let dense: Vec<Vec<Rational>> = v.iter().map(|x| x.to_dense()).collect();
        let mut expected = dense.clone();
        expected.sort();
        assert_eq!(dense, expected);
    }

    /// Dense Gauss-Jordan elimination pivoting on the first column, used as an
    /// independent rank oracle.
    fn oracle_rank(rows: &[Vec<Rational>]) -> usize {
        let mut m: Vec<Vec<Rational>> = rows.to_vec();
        let ncols = m.first().map_or(0, |r| r.len());
        let mut rank = 0;
        for col in 0..ncols {
            let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
                continue;
            };
            m.swap(rank, p);
            for r in 0..m.len() {
                if r != rank && !m[r][col].is_zero() {
                    let factor = &m[r][col] / &m[rank][col];
                    for c in 0..ncols {
                        let delta = &factor * &m[rank][c];
                        m[r][c] -= delta;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    fn basis4() -> Arc<SymbolBasis> {
        SymbolBasis::new(
            ["a", "b", "c", "d"]
                .iter()
                .enumerate()
                .map(|(i, n)| Symbol::new(*n, 1.0 + i as f64))
                .collect(),
        )
        .unwrap()
    }

    fn small_matrix() -> impl Strategy<Value = Vec<Vec<(i64, i64)>>> {
        prop::collection::vec(
            prop::collection::vec((-3i64..=3, 1i64..=4), 4),
            1..6,
        )
    }

    fn to_freqs(b: &Arc<SymbolBasis>, m: &[Vec<(i64, i64)>]) -> Vec<Frequency> {
        m.iter().map(|r| f(b, r)).collect()
    }

    proptest! {
        #[test]
        fn rank_matches_oracle_and_is_invariant(m in small_matrix(), scales in prop::collection::vec((1i64..=5, 1i64..=5, any::<bool>()), 6), seed in any::<u64>()) {
            let b = basis4();
            let freqs = to_freqs(&b, &m);
            let dense: Vec<Vec<Rational>> = freqs.iter().map(|x| x.to_dense()).collect();
            let r = rational_rank(&freqs).unwrap();
            prop_assert_eq!(r, oracle_rank(&dense));

            let scaled: Vec<Frequency> = freqs.iter().zip(&scales).map(|(x, &(n, d, neg))| {
                x.scale(&rat(if neg { -n } else { n }, d))
            }).collect();
            prop_assert_eq!(rational_rank(&scaled).unwrap(), r);

            let mut permuted = freqs.clone();
            let len = permuted.len();
            permuted.rotate_left((seed as usize) % len);
            permuted.reverse();
            prop_assert_eq!(rational_rank(&permuted).unwrap(), r);
        }

        #[test]
        fn torus_reduce_round_trip(m in small_matrix()) {
            let b = basis4();
            let freqs = to_freqs(&b, &m);
            let t = torus_reduce(&freqs).unwrap();
            prop_assert_eq!(t.dim(), rational_rank(&freqs).unwrap());
            if t.dim() > 0 {
                prop_assert!(is_rationally_independent(t.reduced_basis()).unwrap());
            }
            for (i, x) in freqs.iter().enumerate() {
                if t.dim() == 0 {
                    prop_assert!(x.is_zero());
                } else {
                    prop_assert_eq!(&t.reconstruct(i), x);
                }
            }
        }

        #[test]
        fn adding_a_combination_breaks_independence(m in small_matrix(), q in prop::collection::vec((-4i64..=4, 1i64..=3), 6)) {
            let b = basis4();
            let freqs = to_freqs(&b, &m);
            let mut combo = Frequency::zero(&b);
            for (x, &(n, d)) in freqs.iter().zip(&q) {
                combo = combo.add_unchecked(&x.scale(&rat(n, d)));
            }
            let mut extended = freqs.clone();
            extended.push(combo);
            prop_assert!(!is_rationally_independent(&extended).unwrap());
        }

        #[test]
        fn text_round_trip(row in prop::collection::vec((-9i64..=9, 1i64..=9), 4)) {
            let b = basis4();
            let x = f(&b, &row);
            prop_assert_eq!(Frequency::parse(&b, &x.to_string()).unwrap(), x);
        }
    }
}
