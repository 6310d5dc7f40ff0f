//! Sparse almost-periodic trigonometric polynomials `sum a_xi e^{i xi t}`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeff::{Coefficient, ExactComplex};
use crate::error::{Error, Result};
use crate::freqspace::{same_basis, Frequency, SymbolBasis};

/// Relative magnitude below which floating coefficients are dropped.
pub const FLOAT_PRUNE_RELATIVE: f64 = 1e-15;

/// Convolutions with more term pairs than this are split across threads.
const PARALLEL_MUL_PAIRS: usize = 1 << 16;
const MUL_BLOCK: usize = 64;

/// Trigonometric polynomial with exact frequencies and coefficients in `C`.
///
/// Terms are kept in canonical sparse form: ordered by frequency, with no
/// zero coefficient stored.
#[derive(Clone, PartialEq)]
pub struct APPoly<C: Coefficient = Complex64> {
    basis: Arc<SymbolBasis>,
    terms: BTreeMap<Frequency, C>,
}

pub type ExactPoly = APPoly<ExactComplex>;

impl<C: Coefficient> APPoly<C> {
    pub fn zero(basis: &Arc<SymbolBasis>) -> Self {
        APPoly {
            basis: basis.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(basis: &Arc<SymbolBasis>, c: C) -> Self {
        Self::monomial(Frequency::zero(basis), c)
    }

    pub fn one(basis: &Arc<SymbolBasis>) -> Self {
        Self::constant(basis, C::one())
    }

    /// `c * e^{i xi t}`.
    pub fn monomial(freq: Frequency, c: C) -> Self {
        let basis = freq.basis().clone();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(freq, c);
        }
        APPoly { basis, terms }
    }

    /// Sums coefficients of repeated frequencies.
    pub fn from_terms<I>(basis: &Arc<SymbolBasis>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Frequency, C)>,
    {
        let mut map: BTreeMap<Frequency, C> = BTreeMap::new();
        for (f, c) in terms {
            if !same_basis(f.basis(), basis) {
                return Err(Error::BasisMismatch);
            }
            accumulate(&mut map, f, &c);
        }
        Ok(Self::from_map(basis.clone(), map))
    }

    fn from_map(basis: Arc<SymbolBasis>, terms: BTreeMap<Frequency, C>) -> Self {
        let mut p = APPoly { basis, terms };
        p.prune();
        p
    }

    fn prune(&mut self) {
        if C::EXACT {
            self.terms.retain(|_, c| !c.is_zero());
        } else {
            let max = self
                .terms
                .values()
                .map(Coefficient::magnitude)
                .fold(0.0, f64::max);
            let threshold = FLOAT_PRUNE_RELATIVE * max;
            self.terms
                .retain(|_, c| !c.is_zero() && c.magnitude() >= threshold);
        }
    }

    fn check_basis(&self, other: &Self) -> Result<()> {
        if same_basis(&self.basis, &other.basis) {
            Ok(())
        } else {
            Err(Error::BasisMismatch)
        }
    }

    pub fn basis(&self) -> &Arc<SymbolBasis> {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Frequency, &C)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Frequency> {
        self.terms.keys()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_basis(other)?;
        let mut terms = self.terms.clone();
        for (f, c) in &other.terms {
            accumulate(&mut terms, f.clone(), c);
        }
        Ok(Self::from_map(self.basis.clone(), terms))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        APPoly {
            basis: self.basis.clone(),
            terms: self.terms.iter().map(|(f, c)| (f.clone(), c.neg())).collect(),
        }
    }

    pub fn scale(&self, factor: &C) -> Self {
        Self::from_map(
            self.basis.clone(),
            self.terms
                .iter()
                .map(|(f, c)| (f.clone(), c.mul(factor)))
                .collect(),
        )
    }

    /// Convolution of the coefficient sequences: frequencies add,
    /// coefficients multiply, colliding frequencies accumulate.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_basis(other)?;
        let left: Vec<(&Frequency, &C)> = self.terms.iter().collect();
        let right: Vec<(&Frequency, &C)> = other.terms.iter().collect();
        let block_product = |block: &[(&Frequency, &C)]| {
            let mut acc: BTreeMap<Frequency, C> = BTreeMap::new();
            for (fa, ca) in block {
                for (fb, cb) in &right {
                    accumulate(&mut acc, fa.add_unchecked(fb), &ca.mul(cb));
                }
            }
            acc
        };
        let terms = if left.len() * right.len() < PARALLEL_MUL_PAIRS {
            block_product(&left)
        } else {
            // Fixed block partition and in-order merge keep the result
            // independent of the thread schedule.
            let partials: Vec<BTreeMap<Frequency, C>> =
                left.par_chunks(MUL_BLOCK).map(block_product).collect();
            let mut merged = BTreeMap::new();
            for part in partials {
                for (f, c) in part {
                    accumulate(&mut merged, f, &c);
                }
            }
            merged
        };
        Ok(Self::from_map(self.basis.clone(), terms))
    }

    pub fn conj(&self) -> Self {
        APPoly {
            basis: self.basis.clone(),
            terms: self
                .terms
                .iter()
                .map(|(f, c)| (f.neg(), c.conj()))
                .collect(),
        }
    }

    /// `P * conj(P)`, i.e. `|P|^2`.
    ///
    /// Each unordered pair of terms is visited once and written to both
    /// `xi` and `-xi`, so the result is Hermitian to the last bit.
    pub fn abs2(&self) -> Self {
        let terms: Vec<(&Frequency, &C)> = self.terms.iter().collect();
        let mut acc: BTreeMap<Frequency, C> = BTreeMap::new();
        let mut diag = C::zero();
        for (_, c) in &terms {
            diag = diag.add(&c.norm_sqr());
        }
        if !terms.is_empty() {
            acc.insert(Frequency::zero(&self.basis), diag);
        }
        for (i, (fi, ci)) in terms.iter().enumerate() {
            for (fj, cj) in &terms[i + 1..] {
                let c = ci.mul(&cj.conj());
                let xi = fi.sub_unchecked(fj);
                accumulate(&mut acc, xi.neg(), &c.conj());
                accumulate(&mut acc, xi, &c);
            }
        }
        Self::from_map(self.basis.clone(), acc)
    }

    /// Haar mean: the coefficient at the zero frequency.
    pub fn mean(&self) -> C {
        self.terms
            .get(&Frequency::zero(&self.basis))
            .cloned()
            .unwrap_or_else(C::zero)
    }

    /// Fourier coefficient at `lambda`, the mean of `P e^{-i lambda t}`.
    pub fn fourier_coeff(&self, lambda: &Frequency) -> Result<C> {
        if !same_basis(lambda.basis(), &self.basis) {
            return Err(Error::BasisMismatch);
        }
        Ok(self.terms.get(lambda).cloned().unwrap_or_else(C::zero))
    }

    /// `sum |a_xi|^2`, exact for the exact coefficient field.
    pub fn l2_norm_sqr(&self) -> C {
        self.terms
            .values()
            .fold(C::zero(), |acc, c| acc.add(&c.norm_sqr()))
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sqr().to_complex().re.sqrt()
    }

    /// Largest `|xi|` over the support, in floating point.
    pub fn degree(&self) -> Result<f64> {
        if self.terms.is_empty() {
            return Err(Error::Empty("polynomial"));
        }
        Ok(self
            .terms
            .keys()
            .map(|f| f.real_value().abs())
            .fold(0.0, f64::max))
    }

    /// `(real frequency, coefficient)` pairs for evaluation on the real line.
    pub fn real_line_terms(&self) -> Vec<(f64, Complex64)> {
        self.terms
            .iter()
            .map(|(f, c)| (f.real_value(), c.to_complex()))
            .collect()
    }

    pub fn eval_real(&self, t: f64) -> Complex64 {
        eval_terms(&self.real_line_terms(), t)
    }

    pub fn to_complex_poly(&self) -> APPoly<Complex64> {
        APPoly::from_map(
            self.basis.clone(),
            self.terms
                .iter()
                .map(|(f, c)| (f.clone(), c.to_complex()))
                .collect(),
        )
    }

    pub fn to_record(&self) -> PolyRecord {
        PolyRecord {
            terms: self
                .terms
                .iter()
                .map(|(f, c)| {
                    let z = c.to_complex();
                    TermRecord {
                        frequency: f.to_string(),
                        coefficient: [z.re, z.im],
                    }
                })
                .collect(),
        }
    }
}

fn accumulate<C: Coefficient>(map: &mut BTreeMap<Frequency, C>, f: Frequency, c: &C) {
    match map.get_mut(&f) {
        Some(v) => *v = v.add(c),
        None => {
            map.insert(f, c.clone());
        }
    }
}

pub fn eval_terms(terms: &[(f64, Complex64)], t: f64) -> Complex64 {
    terms
        .iter()
        .map(|(w, c)| c * Complex64::cis(w * t))
        .sum()
}

impl APPoly<Complex64> {
    pub fn from_record(basis: &Arc<SymbolBasis>, record: &PolyRecord) -> Result<Self> {
        let terms = record
            .terms
            .iter()
            .map(|t| {
                Ok((
                    Frequency::parse(basis, &t.frequency)?,
                    Complex64::new(t.coefficient[0], t.coefficient[1]),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(basis, terms)
    }
}

/// JSON shape of a polynomial: canonical frequency text and `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyRecord {
    pub terms: Vec<TermRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub frequency: String,
    pub coefficient: [f64; 2],
}

impl<C: Coefficient> fmt::Display for APPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (freq, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            let z = c.to_complex();
            write!(f, "({}{:+}i) * exp(i*({})*t)", z.re, z.im, freq)?;
        }
        Ok(())
    }
}

impl<C: Coefficient> fmt::Debug for APPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "APPoly[{self}]")
    }
}

pub fn poly_add<C: Coefficient>(p: &APPoly<C>, q: &APPoly<C>) -> Result<APPoly<C>> {
    p.add(q)
}

pub fn poly_mul<C: Coefficient>(p: &APPoly<C>, q: &APPoly<C>) -> Result<APPoly<C>> {
    p.mul(q)
}

pub fn poly_conj<C: Coefficient>(p: &APPoly<C>) -> APPoly<C> {
    p.conj()
}

pub fn abs2<C: Coefficient>(p: &APPoly<C>) -> APPoly<C> {
    p.abs2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freqspace::{rat, rational_rank, Symbol};
    use proptest::prelude::*;

    fn basis() -> Arc<SymbolBasis> {
        SymbolBasis::with_unit([("alpha", 2f64.sqrt()), ("beta", 3f64.sqrt())]).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mono(b: &Arc<SymbolBasis>, text: &str, z: Complex64) -> APPoly {
        APPoly::monomial(Frequency::parse(b, text).unwrap(), z)
    }

    #[test]
    fn add_examples() {
        let b = basis();
        let p = mono(&b, "alpha", c(1.0, 2.0)).add(&APPoly::one(&b)).unwrap();
        assert_eq!(p.add(&APPoly::zero(&b)).unwrap(), p);
        let a = mono(&b, "alpha", c(1.0, 0.0));
        assert!(a.add(&a.neg()).unwrap().is_empty());
        let s = APPoly::one(&b).add(&a).unwrap();
        let support: Vec<String> = s.support().map(|f| f.to_string()).collect();
        assert_eq!(support, vec!["0", "1*alpha"]);
        assert!(s.terms().all(|(_, z)| *z == c(1.0, 0.0)));
    }

    #[test]
    fn mul_examples() {
        let b = basis();
        let ea = mono(&b, "alpha", c(1.0, 0.0));
        let eb = mono(&b, "beta", c(1.0, 0.0));
        assert_eq!(ea.mul(&eb).unwrap(), mono(&b, "alpha + beta", c(1.0, 0.0)));

        let one = APPoly::one(&b);
        let lhs = one.add(&ea).unwrap().mul(&one.sub(&ea).unwrap()).unwrap();
        let rhs = one.sub(&mono(&b, "2*alpha", c(1.0, 0.0))).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn abs2_of_two_term_rank_one_polynomial() {
        // (1/sqrt2)(1 + e^{i h t}) times its conjugate
        let b = SymbolBasis::with_unit(Vec::<(String, f64)>::new()).unwrap();
        let h = Frequency::unit(&b).unwrap().scale_int(2);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let p0 = APPoly::from_terms(&b, [(Frequency::zero(&b), c(r, 0.0)), (h.clone(), c(r, 0.0))]).unwrap();
        let q = p0.mul(&p0.conj()).unwrap();
        assert_eq!(q.len(), 3);
        assert!((q.mean() - c(1.0, 0.0)).norm() < 1e-15);
        assert!((q.fourier_coeff(&h).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
        assert!((q.fourier_coeff(&h.neg()).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(q, p0.abs2());
    }

    #[test]
    fn conj_examples() {
        let b = basis();
        let one = APPoly::<Complex64>::one(&b);
        assert_eq!(one.conj(), one);
        let p = mono(&b, "alpha", c(1.0, -2.0));
        assert_eq!(p.conj(), mono(&b, "-1*alpha", c(1.0, 2.0)));
        let q = p.add(&mono(&b, "beta - alpha", c(0.5, 0.25))).unwrap();
        assert_eq!(q.conj().conj(), q);
    }

    #[test]
    fn abs2_and_mean_examples() {
        let b = basis();
        assert_eq!(mono(&b, "alpha", c(0.0, 1.0)).abs2(), APPoly::one(&b));
        assert!(APPoly::<Complex64>::zero(&b).abs2().is_empty());
        assert_eq!(APPoly::<Complex64>::one(&b).mean(), c(1.0, 0.0));
        assert_eq!(mono(&b, "alpha", c(1.0, 0.0)).mean(), c(0.0, 0.0));
    }

    #[test]
    fn fourier_coeff_examples() {
        let b = basis();
        let a = Frequency::parse(&b, "alpha").unwrap();
        let p = APPoly::monomial(a.clone(), c(1.0, 0.0));
        assert_eq!(p.fourier_coeff(&a).unwrap(), c(1.0, 0.0));
        assert_eq!(p.fourier_coeff(&Frequency::parse(&b, "beta").unwrap()).unwrap(), c(0.0, 0.0));
        let other = SymbolBasis::new(vec![Symbol::new("z", 1.0)]).unwrap();
        assert_eq!(
            p.fourier_coeff(&Frequency::zero(&other)),
            Err(Error::BasisMismatch)
        );
    }

    #[test]
    fn norm_and_degree_examples() {
        let b = basis();
        let a = mono(&b, "alpha", c(1.0, 0.0));
        assert_eq!(a.l2_norm(), 1.0);
        let s = APPoly::one(&b).add(&a).unwrap();
        assert!((s.l2_norm() - 2f64.sqrt()).abs() < 1e-15);
        assert!((mono(&b, "-2*alpha", c(1.0, 0.0)).degree().unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(APPoly::<Complex64>::one(&b).degree().unwrap(), 0.0);
        assert_eq!(APPoly::<Complex64>::zero(&b).degree(), Err(Error::Empty("polynomial")));
    }

    #[test]
    fn float_pruning_drops_roundoff_only() {
        let b = basis();
        let p = APPoly::from_terms(
            &b,
            [
                (Frequency::zero(&b), c(1.0, 0.0)),
                (Frequency::parse(&b, "alpha").unwrap(), c(1e-17, 0.0)),
                (Frequency::parse(&b, "beta").unwrap(), c(1e-12, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn exact_field_keeps_tiny_terms() {
        let b = basis();
        let p = ExactPoly::from_terms(
            &b,
            [
                (Frequency::zero(&b), ExactComplex::real(rat(1, 1))),
                (Frequency::parse(&b, "alpha").unwrap(), ExactComplex::real(rat(1, 1_000_000_000_000_000_000))),
            ],
        )
        .unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.abs2().mean(), ExactComplex::real(rat(1, 1) + rat(1, 1_000_000_000_000_000_000) * rat(1, 1_000_000_000_000_000_000)));
    }

    #[test]
    fn json_record_round_trip() {
        let b = basis();
        let p = mono(&b, "3/2*alpha + -1/4*beta", c(0.5, -1.5)).add(&APPoly::one(&b)).unwrap();
        let json = serde_json::to_string(&p.to_record()).unwrap();
        let back: PolyRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(APPoly::from_record(&b, &back).unwrap(), p);
        assert!(p.to_string().contains("exp(i*(3/2*alpha + -1/4*beta)*t)"));
    }

    fn small_exact_poly(b: Arc<SymbolBasis>) -> impl Strategy<Value = ExactPoly> {
        prop::collection::vec(((-2i64..=2, -2i64..=2, -2i64..=2), (-3i64..=3, -3i64..=3)), 0..5).prop_map(
            move |terms| {
                ExactPoly::from_terms(
                    &b,
                    terms.into_iter().map(|((u, x, y), (re, im))| {
                        (
                            Frequency::from_dense(&b, vec![rat(u, 1), rat(x, 2), rat(y, 1)]).unwrap(),
                            ExactComplex::new(rat(re, 1), rat(im, 2)),
                        )
                    }),
                )
                .unwrap()
            },
        )
    }

    /// Polynomial whose support lies in the span of the given symbol indices.
    fn poly_on(b: Arc<SymbolBasis>, dims: Vec<usize>) -> impl Strategy<Value = ExactPoly> {
        prop::collection::vec((prop::collection::vec(-2i64..=2, dims.len()), (-3i64..=3, -3i64..=3)), 0..4).prop_map(
            move |terms| {
                ExactPoly::from_terms(
                    &b,
                    terms.into_iter().map(|(e, (re, im))| {
                        let f = Frequency::from_terms(&b, dims.iter().zip(&e).map(|(&d, &k)| (d, rat(k, 1)))).unwrap();
                        (f, ExactComplex::new(rat(re, 1), rat(im, 1)))
                    }),
                )
                .unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn mul_commutative_associative(p in small_exact_poly(basis()), q in small_exact_poly(basis()), r in small_exact_poly(basis())) {
            prop_assert_eq!(p.mul(&q).unwrap(), q.mul(&p).unwrap());
            prop_assert_eq!(p.mul(&q).unwrap().mul(&r).unwrap(), p.mul(&q.mul(&r).unwrap()).unwrap());
        }

        #[test]
        fn parseval_and_hermitian(p in small_exact_poly(basis())) {
            let q = p.abs2();
            prop_assert_eq!(q.mean(), p.l2_norm_sqr());
            prop_assert_eq!(&q, &p.mul(&p.conj()).unwrap());
            for (f, c) in q.terms() {
                prop_assert_eq!(q.fourier_coeff(&f.neg()).unwrap(), c.conj());
            }
        }

        #[test]
        fn coefficients_vanish_off_support(p in small_exact_poly(basis()), k in -5i64..5) {
            let b = p.basis().clone();
            let lambda = Frequency::from_dense(&b, vec![rat(k, 1), rat(7, 3), rat(0, 1)]).unwrap();
            prop_assume!(p.support().all(|f| *f != lambda));
            prop_assert!(p.fourier_coeff(&lambda).unwrap().is_zero());
        }

        // Kac factorization in the symbol model: independent supports multiply means.
        #[test]
        fn mean_factorizes_on_independent_spans(p in poly_on(basis(), vec![0, 1]), q in poly_on(basis(), vec![2])) {
            let supp_p: Vec<Frequency> = p.support().cloned().collect();
            let supp_q: Vec<Frequency> = q.support().cloned().collect();
            let rank = |s: &[Frequency]| if s.is_empty() { 0 } else { rational_rank(s).unwrap() };
            let joint: Vec<Frequency> = supp_p.iter().chain(&supp_q).cloned().collect();
            prop_assume!(rank(&joint) == rank(&supp_p) + rank(&supp_q));
            prop_assert_eq!(p.mul(&q).unwrap().mean(), p.mean().mul(&q.mean()));
        }
    }
}
