//! Finite sets, stochastic and nonnegative matrices, and the symmetric
//! monoidal operations on them.
//!
//! A [`Morphism`] is a dense `cod × dom` matrix whose entry `(j, i)` is the
//! weight of output `j` given input `i`. Composition is left matrix
//! multiplication, so `compose(g, f)` runs `f` first. Multi-wire objects are
//! flattened big-endian: over wires of sizes `(n_1, …, n_k)` the tuple
//! `(x_1, …, x_k)` sits at `x_1·n_2·…·n_k + … + x_k`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance used when nothing else is configured.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FinStochError {
    #[error("finite sets must be nonempty")]
    EmptySet,
    #[error("expected {expected} labels, got {found}")]
    LabelCount { expected: usize, found: usize },
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("{context}: wire {position} has size {found}, expected {expected}")]
    WireMismatch {
        context: &'static str,
        position: usize,
        expected: usize,
        found: usize,
    },
    #[error("{context}: expected {expected} wires, found {found}")]
    WireCount {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("matrix has {found} entries, shape requires {expected}")]
    MatrixSize { expected: usize, found: usize },
    #[error("entry ({row}, {col}) is negative or not finite: {value}")]
    BadEntry { row: usize, col: usize, value: f64 },
    #[error("column {col} sums to {sum}, not 1")]
    NotStochastic { col: usize, sum: f64 },
    #[error("point index {index} out of range for a set of size {size}")]
    PointOutOfRange { index: usize, size: usize },
    #[error("{0:?} is not a permutation of the wire positions")]
    NotPermutation(Vec<usize>),
}

pub type Result<T, E = FinStochError> = std::result::Result<T, E>;

/// Comparison tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub eps: f64,
}

impl Tolerance {
    pub fn new(eps: f64) -> Self {
        assert!(eps >= 0.0 && eps.is_finite(), "tolerance must be >= 0");
        Tolerance { eps }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { eps: DEFAULT_TOL }
    }
}

/// A nonempty finite set, optionally with element labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FinSet {
    size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl FinSet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(FinStochError::EmptySet);
        }
        Ok(FinSet { size, labels: None })
    }

    pub fn labelled<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(FinStochError::EmptySet);
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(FinStochError::DuplicateLabel(l.clone()));
            }
        }
        Ok(FinSet {
            size: labels.len(),
            labels: Some(labels),
        })
    }

    pub fn with_labels(self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.size {
            return Err(FinStochError::LabelCount {
                expected: self.size,
                found: labels.len(),
            });
        }
        FinSet::labelled(labels)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.as_ref()?.iter().position(|l| l == label)
    }

    pub fn label(&self, index: usize) -> String {
        match &self.labels {
            Some(ls) => ls[index].clone(),
            None => index.to_string(),
        }
    }
}

/// An ordered list of wires; the empty list is the tensor unit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WireList(Vec<FinSet>);

impl WireList {
    pub fn unit() -> Self {
        WireList(Vec::new())
    }

    pub fn new(wires: Vec<FinSet>) -> Self {
        WireList(wires)
    }

    pub fn single(set: FinSet) -> Self {
        WireList(vec![set])
    }

    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        sizes
            .iter()
            .map(|&n| FinSet::new(n))
            .collect::<Result<Vec<_>>>()
            .map(WireList)
    }

    pub fn wires(&self) -> &[FinSet] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.0.iter().map(FinSet::size).collect()
    }

    pub fn total_size(&self) -> usize {
        self.0.iter().map(FinSet::size).product()
    }

    pub fn concat(&self, other: &WireList) -> WireList {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        WireList(v)
    }

    pub fn push(&mut self, set: FinSet) {
        self.0.push(set);
    }

    /// Wires `range` as a new list.
    pub fn slice(&self, range: std::ops::Range<usize>) -> WireList {
        WireList(self.0[range].to_vec())
    }

    /// Wire-by-wire size comparison; labels are cosmetic and ignored.
    pub fn check_matches(&self, other: &WireList, context: &'static str) -> Result<()> {
        if self.len() != other.len() {
            return Err(FinStochError::WireCount {
                context,
                expected: self.len(),
                found: other.len(),
            });
        }
        for (position, (a, b)) in self.0.iter().zip(&other.0).enumerate() {
            if a.size != b.size {
                return Err(FinStochError::WireMismatch {
                    context,
                    position,
                    expected: a.size,
                    found: b.size,
                });
            }
        }
        Ok(())
    }

    pub fn same_shape(&self, other: &WireList) -> bool {
        self.check_matches(other, "shape").is_ok()
    }
}

impl FromIterator<FinSet> for WireList {
    fn from_iter<T: IntoIterator<Item = FinSet>>(iter: T) -> Self {
        WireList(iter.into_iter().collect())
    }
}

impl fmt::Display for WireList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "I");
        }
        let parts: Vec<String> = self.0.iter().map(|s| s.size.to_string()).collect();
        write!(f, "{}", parts.join("⊗"))
    }
}

/// Flat big-endian index of `digits` over wires of the given sizes.
pub fn flat_index(sizes: &[usize], digits: &[usize]) -> usize {
    debug_assert_eq!(sizes.len(), digits.len());
    sizes.iter().zip(digits).fold(0, |acc, (&n, &d)| acc * n + d)
}

/// Inverse of [`flat_index`].
pub fn unflatten(sizes: &[usize], mut flat: usize) -> Vec<usize> {
    let mut digits = vec![0; sizes.len()];
    for (d, &n) in digits.iter_mut().zip(sizes).rev() {
        *d = flat % n;
        flat /= n;
    }
    digits
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Stochastic,
    Nonneg,
}

/// Generators available on any wire list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Structural {
    Identity,
    /// Exchange the two wires of a two-wire list.
    Swap,
    Copy,
    Delete,
    Point(usize),
    Uniform,
    /// Output wire `j` carries input wire `perm[j]`.
    Permute(Vec<usize>),
}

/// A nonnegative matrix between two wire lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Morphism {
    dom: WireList,
    cod: WireList,
    /// Row-major, `cod.total_size()` rows by `dom.total_size()` columns.
    matrix: Vec<f64>,
    flavor: Flavor,
}

impl Morphism {
    pub fn new(dom: WireList, cod: WireList, matrix: Vec<f64>, flavor: Flavor) -> Result<Self> {
        let rows = cod.total_size();
        let cols = dom.total_size();
        if matrix.len() != rows * cols {
            return Err(FinStochError::MatrixSize {
                expected: rows * cols,
                found: matrix.len(),
            });
        }
        for (k, &v) in matrix.iter().enumerate() {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(FinStochError::BadEntry {
                    row: k / cols,
                    col: k % cols,
                    value: v,
                });
            }
        }
        let m = Morphism {
            dom,
            cod,
            matrix,
            flavor,
        };
        if flavor == Flavor::Stochastic {
            m.check_stochastic(DEFAULT_TOL)?;
        }
        Ok(m)
    }

    pub fn stochastic(dom: WireList, cod: WireList, matrix: Vec<f64>) -> Result<Self> {
        Morphism::new(dom, cod, matrix, Flavor::Stochastic)
    }

    pub fn nonneg(dom: WireList, cod: WireList, matrix: Vec<f64>) -> Result<Self> {
        Morphism::new(dom, cod, matrix, Flavor::Nonneg)
    }

    /// Builds the matrix entrywise from `weight(row, col)`.
    pub fn from_fn(
        dom: WireList,
        cod: WireList,
        flavor: Flavor,
        mut weight: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let rows = cod.total_size();
        let cols = dom.total_size();
        let mut matrix = vec![0.0; rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                matrix[r * cols + c] = weight(r, c);
            }
        }
        Morphism::new(dom, cod, matrix, flavor)
    }

    /// The 0/1 matrix of a function on flat indices.
    pub fn deterministic(dom: WireList, cod: WireList, mut func: impl FnMut(usize) -> usize) -> Result<Self> {
        let rows = cod.total_size();
        let cols = dom.total_size();
        let mut matrix = vec![0.0; rows * cols];
        for c in 0..cols {
            let r = func(c);
            if r >= rows {
                return Err(FinStochError::PointOutOfRange { index: r, size: rows });
            }
            matrix[r * cols + c] = 1.0;
        }
        Morphism::new(dom, cod, matrix, Flavor::Stochastic)
    }

    /// Skips validation; used for intermediate results of operations that
    /// preserve it.
    pub(crate) fn from_parts(dom: WireList, cod: WireList, matrix: Vec<f64>, flavor: Flavor) -> Self {
        debug_assert_eq!(matrix.len(), dom.total_size() * cod.total_size());
        Morphism {
            dom,
            cod,
            matrix,
            flavor,
        }
    }

    pub fn dom(&self) -> &WireList {
        &self.dom
    }

    pub fn cod(&self) -> &WireList {
        &self.cod
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.cod.total_size()
    }

    pub fn cols(&self) -> usize {
        self.dom.total_size()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.cols() + col]
    }

    /// Entry addressed by per-wire digits.
    pub fn entry(&self, out: &[usize], inp: &[usize]) -> f64 {
        let r = flat_index(&self.cod.sizes(), out);
        let c = flat_index(&self.dom.sizes(), inp);
        self.get(r, c)
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows()).map(|r| self.get(r, col)).collect()
    }

    pub fn check_stochastic(&self, tol: f64) -> Result<()> {
        let cols = self.cols();
        for c in 0..cols {
            let sum: f64 = (0..self.rows()).map(|r| self.matrix[r * cols + c]).sum();
            if (sum - 1.0).abs() > tol {
                return Err(FinStochError::NotStochastic { col: c, sum });
            }
        }
        Ok(())
    }

    pub fn is_stochastic(&self, tol: f64) -> bool {
        self.check_stochastic(tol).is_ok()
    }

    /// Whether every column is a point mass.
    pub fn is_deterministic(&self, tol: f64) -> bool {
        (0..self.cols()).all(|c| {
            let col = self.column(c);
            let ones = col.iter().filter(|&&v| (v - 1.0).abs() <= tol).count();
            let zeros = col.iter().filter(|&&v| v.abs() <= tol).count();
            ones == 1 && ones + zeros == col.len()
        })
    }

    /// Same matrix, relabelled interface (sizes must agree wire-by-wire).
    pub fn retyped(&self, dom: WireList, cod: WireList) -> Result<Self> {
        self.dom.check_matches(&dom, "retype domain")?;
        self.cod.check_matches(&cod, "retype codomain")?;
        Ok(Morphism::from_parts(dom, cod, self.matrix.clone(), self.flavor))
    }

    /// Same matrix over the given interface, which only needs to agree in
    /// total size.
    pub fn reshaped(&self, dom: WireList, cod: WireList) -> Result<Self> {
        if dom.total_size() != self.cols() || cod.total_size() != self.rows() {
            return Err(FinStochError::MatrixSize {
                expected: self.matrix.len(),
                found: dom.total_size() * cod.total_size(),
            });
        }
        Ok(Morphism::from_parts(dom, cod, self.matrix.clone(), self.flavor))
    }

    pub fn as_nonneg(&self) -> Morphism {
        Morphism {
            flavor: Flavor::Nonneg,
            ..self.clone()
        }
    }

    /// `(1 - weight)·self + weight·other`.
    pub fn mix(&self, other: &Morphism, weight: f64) -> Result<Morphism> {
        self.dom.check_matches(&other.dom, "mix domain")?;
        self.cod.check_matches(&other.cod, "mix codomain")?;
        let matrix = self
            .matrix
            .iter()
            .zip(&other.matrix)
            .map(|(a, b)| (1.0 - weight) * a + weight * b)
            .collect();
        let flavor = if self.flavor == Flavor::Stochastic && other.flavor == Flavor::Stochastic {
            Flavor::Stochastic
        } else {
            Flavor::Nonneg
        };
        Morphism::new(self.dom.clone(), self.cod.clone(), matrix, flavor)
    }

    /// Reorders the codomain: output wire `j` of the result is wire `perm[j]`
    /// of `self`.
    pub fn permute_cod(&self, perm: &[usize]) -> Result<Morphism> {
        let p = Morphism::structural(&Structural::Permute(perm.to_vec()), &self.cod)?;
        Ok(compose_unchecked(&p, self))
    }

    /// Reorders the domain: input wire `j` of the result is wire `perm[j]`
    /// of `self`.
    pub fn permute_dom(&self, perm: &[usize]) -> Result<Morphism> {
        let k = self.dom.len();
        let mut inv = vec![usize::MAX; k];
        for (j, &p) in perm.iter().enumerate() {
            if p >= k || inv[p] != usize::MAX {
                return Err(FinStochError::NotPermutation(perm.to_vec()));
            }
            inv[p] = j;
        }
        if perm.len() != k {
            return Err(FinStochError::NotPermutation(perm.to_vec()));
        }
        let new_dom: WireList = perm.iter().map(|&p| self.dom.wires()[p].clone()).collect();
        let q = Morphism::structural(&Structural::Permute(inv), &new_dom)?;
        Ok(compose_unchecked(self, &q))
    }

    /// `(id_left ⊗ f ⊗ id_right) ∘ self`, where `f` acts on codomain wires
    /// starting at `at`. Avoids materialising the padded matrix.
    pub fn then_at(&self, f: &Morphism, at: usize) -> Result<Morphism> {
        let k = f.dom.len();
        if at + k > self.cod.len() {
            return Err(FinStochError::WireCount {
                context: "then_at",
                expected: at + k,
                found: self.cod.len(),
            });
        }
        self.cod.slice(at..at + k).check_matches(&f.dom, "then_at")?;
        let left: usize = self.cod.wires()[..at].iter().map(FinSet::size).product();
        let right: usize = self.cod.wires()[at + k..].iter().map(FinSet::size).product();
        let fin = f.cols();
        let fout = f.rows();
        let cols = self.cols();
        let new_rows = left * fout * right;
        let mut out = vec![0.0; new_rows * cols];
        for l in 0..left {
            for i in 0..fin {
                for r in 0..right {
                    let src_row = (l * fin + i) * right + r;
                    let src = &self.matrix[src_row * cols..(src_row + 1) * cols];
                    if src.iter().all(|&v| v == 0.0) {
                        continue;
                    }
                    for o in 0..fout {
                        let w = f.matrix[o * fin + i];
                        if w == 0.0 {
                            continue;
                        }
                        let dst_row = (l * fout + o) * right + r;
                        let dst = &mut out[dst_row * cols..(dst_row + 1) * cols];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += w * s;
                        }
                    }
                }
            }
        }
        let mut wires: Vec<FinSet> = self.cod.wires()[..at].to_vec();
        wires.extend(f.cod.wires().iter().cloned());
        wires.extend(self.cod.wires()[at + k..].iter().cloned());
        let flavor = if self.flavor == Flavor::Stochastic && f.flavor == Flavor::Stochastic {
            Flavor::Stochastic
        } else {
            Flavor::Nonneg
        };
        Ok(Morphism::from_parts(
            self.dom.clone(),
            WireList::new(wires),
            out,
            flavor,
        ))
    }

    /// Builds a structural morphism on the given wires.
    pub fn structural(kind: &Structural, on: &WireList) -> Result<Morphism> {
        let n = on.total_size();
        match kind {
            Structural::Identity => Morphism::deterministic(on.clone(), on.clone(), |x| x),
            Structural::Swap => {
                if on.len() != 2 {
                    return Err(FinStochError::WireCount {
                        context: "swap",
                        expected: 2,
                        found: on.len(),
                    });
                }
                Morphism::structural(&Structural::Permute(vec![1, 0]), on)
            }
            Structural::Permute(perm) => {
                let k = on.len();
                let mut seen = vec![false; k];
                if perm.len() != k || perm.iter().any(|&p| p >= k || std::mem::replace(&mut seen[p], true)) {
                    return Err(FinStochError::NotPermutation(perm.clone()));
                }
                let sizes = on.sizes();
                let out_sizes: Vec<usize> = perm.iter().map(|&p| sizes[p]).collect();
                let cod: WireList = perm.iter().map(|&p| on.wires()[p].clone()).collect();
                Morphism::deterministic(on.clone(), cod, |x| {
                    let d = unflatten(&sizes, x);
                    let od: Vec<usize> = perm.iter().map(|&p| d[p]).collect();
                    flat_index(&out_sizes, &od)
                })
            }
            Structural::Copy => Morphism::deterministic(on.clone(), on.concat(on), |x| x * n + x),
            Structural::Delete => Morphism::deterministic(on.clone(), WireList::unit(), |_| 0),
            Structural::Point(x) => {
                if *x >= n {
                    return Err(FinStochError::PointOutOfRange { index: *x, size: n });
                }
                Morphism::deterministic(WireList::unit(), on.clone(), |_| *x)
            }
            Structural::Uniform => Morphism::new(
                WireList::unit(),
                on.clone(),
                vec![1.0 / n as f64; n],
                Flavor::Stochastic,
            ),
        }
    }

    pub fn identity(on: &WireList) -> Morphism {
        Morphism::structural(&Structural::Identity, on).expect("identity is always valid")
    }

    pub fn delete(on: &WireList) -> Morphism {
        Morphism::structural(&Structural::Delete, on).expect("delete is always valid")
    }

    pub fn copy(on: &WireList) -> Morphism {
        Morphism::structural(&Structural::Copy, on).expect("copy is always valid")
    }

    pub fn uniform(on: &WireList) -> Morphism {
        Morphism::structural(&Structural::Uniform, on).expect("uniform is always valid")
    }

    pub fn point(on: &WireList, x: usize) -> Result<Morphism> {
        Morphism::structural(&Structural::Point(x), on)
    }
}

impl fmt::Display for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} -> {} ({:?})", self.dom, self.cod, self.flavor)?;
        let cols = self.cols();
        for r in 0..self.rows() {
            let row: Vec<String> = self.matrix[r * cols..(r + 1) * cols]
                .iter()
                .map(|v| format!("{v:.4}"))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

fn compose_unchecked(g: &Morphism, f: &Morphism) -> Morphism {
    let n = g.rows();
    let k = f.rows();
    let m = f.cols();
    let mut out = vec![0.0; n * m];
    for i in 0..n {
        let orow = &mut out[i * m..(i + 1) * m];
        for j in 0..k {
            let w = g.matrix[i * k + j];
            if w == 0.0 {
                continue;
            }
            let frow = &f.matrix[j * m..(j + 1) * m];
            for (o, v) in orow.iter_mut().zip(frow) {
                *o += w * v;
            }
        }
    }
    let flavor = if g.flavor == Flavor::Stochastic && f.flavor == Flavor::Stochastic {
        Flavor::Stochastic
    } else {
        Flavor::Nonneg
    };
    Morphism::from_parts(f.dom.clone(), g.cod.clone(), out, flavor)
}

/// `g ∘ f`: run `f`, then `g`.
pub fn compose(g: &Morphism, f: &Morphism) -> Result<Morphism> {
    f.cod.check_matches(&g.dom, "compose")?;
    Ok(compose_unchecked(g, f))
}

/// Folds `compose` over a sequence given in execution order.
pub fn compose_all<'a>(steps: impl IntoIterator<Item = &'a Morphism>) -> Result<Option<Morphism>> {
    let mut acc: Option<Morphism> = None;
    for s in steps {
        acc = Some(match acc {
            None => s.clone(),
            Some(a) => compose(s, &a)?,
        });
    }
    Ok(acc)
}

/// `f ⊗ g` as a Kronecker product with `f` most significant.
pub fn tensor(f: &Morphism, g: &Morphism) -> Morphism {
    let (fr, fc) = (f.rows(), f.cols());
    let (gr, gc) = (g.rows(), g.cols());
    let cols = fc * gc;
    let mut out = vec![0.0; fr * gr * cols];
    for i in 0..fr {
        for j in 0..fc {
            let a = f.matrix[i * fc + j];
            if a == 0.0 {
                continue;
            }
            for k in 0..gr {
                let row = i * gr + k;
                for l in 0..gc {
                    out[row * cols + j * gc + l] = a * g.matrix[k * gc + l];
                }
            }
        }
    }
    let flavor = if f.flavor == Flavor::Stochastic && g.flavor == Flavor::Stochastic {
        Flavor::Stochastic
    } else {
        Flavor::Nonneg
    };
    Morphism::from_parts(f.dom.concat(&g.dom), f.cod.concat(&g.cod), out, flavor)
}

/// Tensor of a list, left to right. The empty list gives the identity on `I`.
pub fn tensor_all<'a>(parts: impl IntoIterator<Item = &'a Morphism>) -> Morphism {
    parts
        .into_iter()
        .fold(Morphism::identity(&WireList::unit()), |acc, m| tensor(&acc, m))
}

/// Largest entrywise absolute difference.
pub fn max_abs_diff(a: &Morphism, b: &Morphism) -> Result<f64> {
    a.dom.check_matches(&b.dom, "max_abs_diff domain")?;
    a.cod.check_matches(&b.cod, "max_abs_diff codomain")?;
    Ok(a.matrix
        .iter()
        .zip(&b.matrix)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Worst-case total variation over deterministic inputs.
pub fn tv_distance(r: &Morphism, s: &Morphism) -> Result<f64> {
    r.dom.check_matches(&s.dom, "tv_distance domain")?;
    r.cod.check_matches(&s.cod, "tv_distance codomain")?;
    let cols = r.cols();
    let mut worst: f64 = 0.0;
    for c in 0..cols {
        let mut l1 = 0.0;
        for row in 0..r.rows() {
            l1 += (r.matrix[row * cols + c] - s.matrix[row * cols + c]).abs();
        }
        worst = worst.max(0.5 * l1);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wl(sizes: &[usize]) -> WireList {
        WireList::from_sizes(sizes).unwrap()
    }

    #[test]
    fn counit_law_on_two_elements() {
        let g = wl(&[2]);
        let copy = Morphism::copy(&g);
        let partial = tensor(&Morphism::identity(&g), &Morphism::delete(&g));
        let r = compose(&partial, &copy).unwrap();
        assert_eq!(r.matrix(), Morphism::identity(&g).matrix());
    }

    #[test]
    fn delete_after_uniform_is_one() {
        let g = wl(&[2]);
        let r = compose(&Morphism::delete(&g), &Morphism::uniform(&g)).unwrap();
        assert_eq!(r.matrix(), &[1.0]);
        assert_eq!(r.rows(), 1);
        assert_eq!(r.cols(), 1);
    }

    #[test]
    fn compose_reports_wire_position() {
        let f = Morphism::identity(&wl(&[2, 3]));
        let g = Morphism::identity(&wl(&[2, 4]));
        match compose(&g, &f) {
            Err(FinStochError::WireMismatch {
                position,
                expected,
                found,
                ..
            }) => {
                assert_eq!((position, expected, found), (1, 3, 4));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn identity_tensor_identity() {
        let r = tensor(&Morphism::identity(&wl(&[2])), &Morphism::identity(&wl(&[3])));
        assert_eq!(r.matrix(), Morphism::identity(&wl(&[6])).matrix());
        assert_eq!(r.cod().sizes(), vec![2, 3]);
    }

    #[test]
    fn tensor_of_points_uses_big_endian_index() {
        for x in 0..2 {
            for y in 0..3 {
                let p = tensor(
                    &Morphism::point(&wl(&[2]), x).unwrap(),
                    &Morphism::point(&wl(&[3]), y).unwrap(),
                );
                let col = p.column(0);
                assert_eq!(col.iter().position(|&v| v == 1.0), Some(x * 3 + y));
            }
        }
    }

    #[test]
    fn copy_on_bits() {
        let c = Morphism::copy(&wl(&[2]));
        assert_eq!(c.rows(), 4);
        assert_eq!(c.cols(), 2);
        assert_eq!(c.get(0, 0), 1.0);
        assert_eq!(c.get(3, 1), 1.0);
        assert_eq!(c.matrix().iter().sum::<f64>(), 2.0);
    }

    #[test]
    fn swap_two_three() {
        let s = Morphism::structural(&Structural::Swap, &wl(&[2, 3])).unwrap();
        assert_eq!(s.cod().sizes(), vec![3, 2]);
        for x in 0..2 {
            for y in 0..3 {
                assert_eq!(s.get(y * 2 + x, x * 3 + y), 1.0);
            }
        }
    }

    #[test]
    fn uniform_on_four() {
        assert_eq!(Morphism::uniform(&wl(&[4])).matrix(), &[0.25; 4]);
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(
            Morphism::point(&wl(&[3]), 3),
            Err(FinStochError::PointOutOfRange { .. })
        ));
        assert!(matches!(
            Morphism::structural(&Structural::Permute(vec![0, 0]), &wl(&[2, 2])),
            Err(FinStochError::NotPermutation(_))
        ));
        assert!(FinSet::new(0).is_err());
        assert!(FinSet::labelled(["a", "a"]).is_err());
    }

    #[test]
    fn tv_examples() {
        let u4 = Morphism::uniform(&wl(&[4]));
        assert_eq!(tv_distance(&u4, &u4).unwrap(), 0.0);
        let p0 = Morphism::point(&wl(&[2]), 0).unwrap();
        let p1 = Morphism::point(&wl(&[2]), 1).unwrap();
        assert_eq!(tv_distance(&p0, &p1).unwrap(), 1.0);
        // (1/2)(|1/2 - 1| + |1/2 - 0|)
        let u2 = Morphism::uniform(&wl(&[2]));
        assert!((tv_distance(&u2, &p0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_stochastic() {
        let r = Morphism::stochastic(wl(&[2]), wl(&[2]), vec![0.5, 0.5, 0.6, 0.5]);
        assert!(matches!(r, Err(FinStochError::NotStochastic { col: 0, .. })));
        assert!(Morphism::nonneg(wl(&[2]), wl(&[2]), vec![0.5, 0.5, 0.6, 0.5]).is_ok());
        assert!(Morphism::nonneg(wl(&[1]), wl(&[1]), vec![-0.1]).is_err());
    }

    #[test]
    fn then_at_matches_padded_compose() {
        let mut v: Vec<f64> = (0..24).map(|k| ((k / 2 * 7 + k % 2 * 3) % 5) as f64 + 1.0).collect();
        for c in 0..2 {
            let s: f64 = (0..12).map(|r| v[r * 2 + c]).sum();
            for r in 0..12 {
                v[r * 2 + c] /= s;
            }
        }
        let m = Morphism::stochastic(wl(&[2]), wl(&[2, 3, 2]), v).unwrap();
        let f = Morphism::stochastic(wl(&[3]), wl(&[2]), vec![0.1, 0.5, 1.0, 0.9, 0.5, 0.0]).unwrap();
        let fast = m.then_at(&f, 1).unwrap();
        let pad = tensor(
            &tensor(&Morphism::identity(&wl(&[2])), &f),
            &Morphism::identity(&wl(&[2])),
        );
        let slow = compose(&pad, &m).unwrap();
        assert!(max_abs_diff(&fast, &slow).unwrap() < 1e-15);
    }

    #[test]
    fn permute_dom_reorders_inputs() {
        let f = Morphism::deterministic(wl(&[2, 3]), wl(&[6]), |c| c).unwrap();
        let g = f.permute_dom(&[1, 0]).unwrap();
        assert_eq!(g.dom().sizes(), vec![3, 2]);
        for x in 0..2 {
            for y in 0..3 {
                assert_eq!(g.get(x * 3 + y, y * 2 + x), 1.0);
            }
        }
    }

    #[test]
    fn flat_index_roundtrip() {
        let sizes = [3, 1, 4, 2];
        for k in 0..24 {
            assert_eq!(flat_index(&sizes, &unflatten(&sizes, k)), k);
        }
    }
}
