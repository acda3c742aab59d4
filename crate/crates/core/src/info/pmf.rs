use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense joint probability mass function over named finite variables.
///
/// Storage is row-major with the last variable varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf<T> {
    names: Vec<String>,
    cards: Vec<usize>,
    probs: Vec<T>,
}

/// Tolerance on the total mass.
pub const MASS_TOL: f64 = 1e-12;

fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

/// Advances a mixed-radix counter; false once it wraps.
pub(crate) fn next_index(idx: &mut [usize], cards: &[usize]) -> bool {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < cards[i] {
            return true;
        }
        idx[i] = 0;
    }
    false
}

impl<T: Real> JointPmf<T> {
    pub fn new(names: Vec<String>, cards: Vec<usize>, probs: Vec<T>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Pmf("no variables".into()));
        }
        if names.len() != cards.len() {
            return Err(Error::Pmf(format!("{} names but {} cardinalities", names.len(), cards.len())));
        }
        let mut seen = HashSet::new();
        for n in &names {
            if n.is_empty() || !seen.insert(n.as_str()) {
                return Err(Error::Pmf(format!("variable name {n:?} empty or repeated")));
            }
        }
        if cards.iter().any(|&c| c == 0) {
            return Err(Error::Pmf("cardinalities must be positive".into()));
        }
        let size: usize = cards.iter().product();
        if probs.len() != size {
            return Err(Error::Pmf(format!("expected {size} probabilities, got {}", probs.len())));
        }
        let mut total = T::zero();
        for &p in &probs {
            if !(p >= T::zero()) || !p.is_finite() {
                return Err(Error::Pmf(format!("entry {p} is not a probability")));
            }
            total = total + p;
        }
        if (total - T::one()).abs() > T::tol(MASS_TOL) {
            return Err(Error::Pmf(format!("total mass {total} differs from 1")));
        }
        Ok(Self { names, cards, probs })
    }

    /// Builds a pmf by evaluating `f` on every outcome tuple.
    pub fn from_fn<S: AsRef<str>>(names: &[S], cards: &[usize], mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        let size: usize = cards.iter().product();
        let mut probs = Vec::with_capacity(size);
        let mut idx = vec![0; cards.len()];
        if size > 0 {
            loop {
                probs.push(f(&idx));
                if !next_index(&mut idx, cards) {
                    break;
                }
            }
        }
        Self::new(names.iter().map(|s| s.as_ref().to_string()).collect(), cards.to_vec(), probs)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn card(&self, name: &str) -> Result<usize> {
        Ok(self.cards[self.position(name)?])
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Usage(format!("unknown variable {name:?}; have {:?}", self.names)))
    }

    /// Probability of a full outcome tuple.
    pub fn prob(&self, idx: &[usize]) -> T {
        let st = strides(&self.cards);
        self.probs[idx.iter().zip(&st).map(|(i, s)| i * s).sum::<usize>()]
    }

    fn positions<S: AsRef<str>>(&self, vars: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(vars.len());
        for v in vars {
            let p = self.position(v.as_ref())?;
            if out.contains(&p) {
                return Err(Error::Usage(format!("variable {:?} listed twice", v.as_ref())));
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Marginal over `vars`, in the order given.
    pub fn marginal<S: AsRef<str>>(&self, vars: &[S]) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::Usage("marginal over an empty set".into()));
        }
        let pos = self.positions(vars)?;
        let cards: Vec<usize> = pos.iter().map(|&p| self.cards[p]).collect();
        let st = strides(&cards);
        let mut out = vec![T::zero(); cards.iter().product()];
        let mut idx = vec![0; self.cards.len()];
        for &p in &self.probs {
            let k: usize = pos.iter().zip(&st).map(|(&q, s)| idx[q] * s).sum();
            out[k] = out[k] + p;
            next_index(&mut idx, &self.cards);
        }
        Ok(Self { names: pos.iter().map(|&p| self.names[p].clone()).collect(), cards, probs: out })
    }

    /// Joint entropy in bits of the listed variables; zero for an empty list.
    pub fn entropy<S: AsRef<str>>(&self, vars: &[S]) -> Result<T> {
        if vars.is_empty() {
            return Ok(T::zero());
        }
        let m = self.marginal(vars)?;
        Ok(m.probs.iter().filter(|p| **p > T::zero()).fold(T::zero(), |h, &p| h - p * p.log2()))
    }

    /// `I(A;B|C)` in bits.
    pub fn conditional_mutual_information<S: AsRef<str>>(&self, a: &[S], b: &[S], c: &[S]) -> Result<T> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::Usage("mutual information needs nonempty groups".into()));
        }
        let mut seen = HashSet::new();
        for v in a.iter().chain(b).chain(c) {
            if !seen.insert(v.as_ref()) {
                return Err(Error::Usage(format!("variable {:?} appears in more than one group", v.as_ref())));
            }
        }
        let join = |x: &[S], y: &[S]| -> Vec<String> { x.iter().chain(y).map(|s| s.as_ref().to_string()).collect() };
        let ac = join(a, c);
        let bc = join(b, c);
        let abc: Vec<String> = ac.iter().cloned().chain(b.iter().map(|s| s.as_ref().to_string())).collect();
        let cs: Vec<String> = c.iter().map(|s| s.as_ref().to_string()).collect();
        let i = self.entropy(&ac)? + self.entropy(&bc)? - self.entropy(&abc)? - self.entropy(&cs)?;
        Ok(i.max(T::zero()))
    }

    /// `I(A;B)` in bits.
    pub fn mutual_information<S: AsRef<str>>(&self, a: &[S], b: &[S]) -> Result<T> {
        self.conditional_mutual_information::<S>(a, b, &[])
    }

    /// Conditional law `P(out | inp)` as rows indexed by the mixed-radix value of `inp`.
    /// Rows of zero-probability inputs are filled uniformly.
    pub fn conditional<S: AsRef<str>>(&self, out: &[S], inp: &[S]) -> Result<super::Stochastic<T>> {
        let all: Vec<&str> = inp.iter().map(|s| s.as_ref()).chain(out.iter().map(|s| s.as_ref())).collect();
        let m = self.marginal(&all)?;
        let n_in: usize = m.cards[..inp.len()].iter().product();
        let n_out: usize = m.cards[inp.len()..].iter().product();
        let mut rows = Vec::with_capacity(n_in);
        for r in 0..n_in {
            let row = &m.probs[r * n_out..(r + 1) * n_out];
            let mass = row.iter().fold(T::zero(), |a, &b| a + b);
            if mass > T::zero() {
                rows.push(row.iter().map(|&p| p / mass).collect());
            } else {
                rows.push(vec![T::one() / T::from_usize(n_out).unwrap(); n_out]);
            }
        }
        super::Stochastic::new(rows)
    }

    /// Reads a pmf from CSV: header of variable names then `p`; one row per
    /// outcome tuple of zero-based indices. A header cell `name:k` fixes the
    /// cardinality, otherwise it is the largest index plus one. Missing tuples
    /// have probability zero.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::Pmf(format!("bad header: {e}")))?.clone();
        if header.len() < 2 || &header[header.len() - 1] != "p" {
            return Err(Error::Pmf("header must list variables followed by a final `p` column".into()));
        }
        let nv = header.len() - 1;
        let mut names = Vec::with_capacity(nv);
        let mut fixed = Vec::with_capacity(nv);
        for cell in header.iter().take(nv) {
            match cell.split_once(':') {
                Some((n, k)) => {
                    let k: usize = k.parse().map_err(|_| Error::Pmf(format!("bad cardinality in {cell:?}")))?;
                    names.push(n.to_string());
                    fixed.push(Some(k));
                }
                None => {
                    names.push(cell.to_string());
                    fixed.push(None);
                }
            }
        }
        let mut rows: Vec<(Vec<usize>, T)> = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Pmf(format!("row {}: {e}", line + 1)))?;
            if rec.len() != nv + 1 {
                return Err(Error::Pmf(format!("row {} has {} cells, expected {}", line + 1, rec.len(), nv + 1)));
            }
            let mut idx = Vec::with_capacity(nv);
            for cell in rec.iter().take(nv) {
                idx.push(cell.parse::<usize>().map_err(|_| Error::Pmf(format!("row {}: bad index {cell:?}", line + 1)))?);
            }
            let p: f64 = rec[nv].parse().map_err(|_| Error::Pmf(format!("row {}: bad probability {:?}", line + 1, &rec[nv])))?;
            rows.push((idx, T::lit(p)));
        }
        let mut cards = vec![0usize; nv];
        for (idx, _) in &rows {
            for (c, &i) in cards.iter_mut().zip(idx) {
                *c = (*c).max(i + 1);
            }
        }
        for (i, f) in fixed.iter().enumerate() {
            if let Some(k) = f {
                if cards[i] > *k {
                    return Err(Error::Pmf(format!("index of {} exceeds declared cardinality {k}", names[i])));
                }
                cards[i] = *k;
            }
        }
        let st = strides(&cards);
        let size: usize = cards.iter().product();
        let mut probs = vec![T::zero(); size];
        let mut filled = vec![false; size];
        for (idx, p) in rows {
            let k: usize = idx.iter().zip(&st).map(|(i, s)| i * s).sum();
            if filled[k] {
                return Err(Error::Pmf(format!("duplicate outcome {idx:?}")));
            }
            filled[k] = true;
            probs[k] = p;
        }
        Self::new(names, cards, probs)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(f)
    }

    /// Writes the pmf in the format read by [`Self::from_csv_reader`], with
    /// declared cardinalities and zero rows omitted.
    pub fn to_csv_writer<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = self.names.iter().zip(&self.cards).map(|(n, k)| format!("{n}:{k}")).collect();
        header.push("p".into());
        w.write_record(&header)?;
        let mut idx = vec![0; self.cards.len()];
        for &p in &self.probs {
            if p > T::zero() {
                let mut rec: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
                rec.push(format!("{}", p.as_f64()));
                w.write_record(&rec)?;
            }
            next_index(&mut idx, &self.cards);
        }
        w.flush()?;
        Ok(())
    }
}

/// `I(A;B)` in bits.
pub fn mutual_information<T: Real, S: AsRef<str>>(p: &JointPmf<T>, a: &[S], b: &[S]) -> Result<T> {
    p.mutual_information(a, b)
}

/// `I(A;B|C)` in bits.
pub fn conditional_mutual_information<T: Real, S: AsRef<str>>(p: &JointPmf<T>, a: &[S], b: &[S], c: &[S]) -> Result<T> {
    p.conditional_mutual_information(a, b, c)
}

/// Binary entropy in bits.
pub fn binary_entropy<T: Real>(q: T) -> T {
    let f = |x: T| if x > T::zero() { -x * x.log2() } else { T::zero() };
    f(q) + f(T::one() - q)
}
