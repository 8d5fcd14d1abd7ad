//! Dense two-phase simplex and the distance programs built on it.
//!
//! [`LpProblem`] is in standard form: minimise `c·x` subject to `A x = b`,
//! `x ≥ 0`. [`DistanceLp`] assembles the programs that appear everywhere
//! else in the crate: choose stochastic matrices (plus linear side
//! constraints) to minimise the worst total-variation distance of a family
//! of affine kernels from zero.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::finstoch::{Flavor, Morphism, WireList};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("constraint {row} refers to variable {var}, but only {n} exist")]
    VariableOutOfRange { row: usize, var: usize, n: usize },
    #[error("objective has {found} coefficients for {expected} variables")]
    ObjectiveSize { expected: usize, found: usize },
    #[error("non-finite data in constraint {0}")]
    NonFinite(usize),
    #[error("affine map has {found} entries, shape requires {expected}")]
    MapShape { expected: usize, found: usize },
    #[error("target shape does not match the affine map: {0}")]
    TargetShape(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Entering-variable rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PivotRule {
    /// Smallest-index entering and leaving variables; never cycles.
    Bland,
    /// Most negative reduced cost, switching to Bland after a run of
    /// degenerate pivots.
    #[default]
    DantzigBland,
}

/// `min c·x` subject to sparse equality rows and `x ≥ 0`.
#[derive(Clone, Debug, Default)]
pub struct LpProblem {
    n: usize,
    objective: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    names: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
}

impl LpProblem {
    pub fn new(n_vars: usize) -> Self {
        LpProblem {
            n: n_vars,
            objective: vec![0.0; n_vars],
            ..Default::default()
        }
    }

    /// Dense constructor: `a` is row-major with `c.len()` columns.
    pub fn from_dense(c: Vec<f64>, a: &[f64], b: Vec<f64>) -> Result<Self, LpError> {
        let n = c.len();
        let mut p = LpProblem::new(n);
        p.objective = c;
        for (r, &rhs) in b.iter().enumerate() {
            let row: Vec<(usize, f64)> = a[r * n..(r + 1) * n]
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, &v)| (j, v))
                .collect();
            p.add_eq(row, rhs)?;
        }
        Ok(p)
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_var(&mut self, cost: f64) -> usize {
        self.n += 1;
        self.objective.push(cost);
        self.n - 1
    }

    pub fn set_cost(&mut self, var: usize, cost: f64) {
        self.objective[var] = cost;
    }

    pub fn set_objective(&mut self, c: Vec<f64>) -> Result<(), LpError> {
        if c.len() != self.n {
            return Err(LpError::ObjectiveSize {
                expected: self.n,
                found: c.len(),
            });
        }
        self.objective = c;
        Ok(())
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    /// Adds `Σ coeff·x_var = rhs`; repeated variables are summed.
    pub fn add_eq(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) -> Result<(), LpError> {
        let row = self.rows.len();
        if !rhs.is_finite() {
            return Err(LpError::NonFinite(row));
        }
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        for (var, v) in coeffs {
            if var >= self.n {
                return Err(LpError::VariableOutOfRange { row, var, n: self.n });
            }
            if !v.is_finite() {
                return Err(LpError::NonFinite(row));
            }
            match merged.iter_mut().find(|(u, _)| *u == var) {
                Some(e) => e.1 += v,
                None => merged.push((var, v)),
            }
        }
        merged.retain(|(_, v)| *v != 0.0);
        self.rows.push(merged);
        self.rhs.push(rhs);
        Ok(())
    }

    pub fn set_names(&mut self, names: Vec<String>) {
        self.names = names;
    }

    pub fn name(&self, var: usize) -> String {
        self.names.get(var).cloned().unwrap_or_else(|| format!("x{var}"))
    }

    /// Largest violation of `A x = b` and `x ≥ 0`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let eq = self
            .rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, &b)| (row.iter().map(|&(j, v)| v * x[j]).sum::<f64>() - b).abs())
            .fold(0.0, f64::max);
        let neg = x.iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max);
        eq.max(neg)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

const PIVOT_EPS: f64 = 1e-9;
const COST_EPS: f64 = 1e-10;
const PRUNE_EPS: f64 = 1e-10;
const DEGENERATE_RUN: usize = 64;

/// Solves with the default pivot rule.
pub fn solve(p: &LpProblem) -> LpSolution {
    solve_with(p, PivotRule::default())
}

pub fn solve_with(p: &LpProblem, rule: PivotRule) -> LpSolution {
    let n = p.n;
    // sign-normalise rows so that b >= 0
    let mut rows: Vec<Vec<(usize, f64)>> = p.rows.clone();
    let mut rhs = p.rhs.clone();
    for (row, b) in rows.iter_mut().zip(rhs.iter_mut()) {
        if *b < 0.0 {
            *b = -*b;
            for e in row.iter_mut() {
                e.1 = -e.1;
            }
        }
    }

    let keep = match prune_rows(n, &rows, &rhs) {
        Some(k) => k,
        None => return infeasible(n),
    };
    let rows: Vec<Vec<(usize, f64)>> = keep.iter().map(|&r| rows[r].clone()).collect();
    let rhs: Vec<f64> = keep.iter().map(|&r| rhs[r]).collect();
    let m = rows.len();

    // crash basis: a column that is nonzero only in this row, positive
    let mut col_count = vec![0usize; n];
    for row in &rows {
        for &(j, _) in row {
            col_count[j] += 1;
        }
    }
    let mut used = vec![false; n];
    let mut basis_hint: Vec<Option<usize>> = vec![None; m];
    for (r, row) in rows.iter().enumerate() {
        let cand = row
            .iter()
            .filter(|&&(j, v)| col_count[j] == 1 && v > 0.0 && !used[j])
            .min_by_key(|&&(j, _)| j);
        if let Some(&(j, _)) = cand {
            used[j] = true;
            basis_hint[r] = Some(j);
        }
    }
    let arts: Vec<usize> = (0..m).filter(|&r| basis_hint[r].is_none()).collect();
    let n_art = arts.len();
    let width = n + n_art + 1;
    let mut t = Tableau {
        m,
        width,
        data: vec![0.0; (m + 1) * width],
        basis: vec![0; m],
    };
    for (r, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            t.data[r * width + j] = v;
        }
        t.data[r * width + width - 1] = rhs[r];
    }
    for (r, hint) in basis_hint.iter().enumerate() {
        if let Some(j) = *hint {
            let scale = t.data[r * width + j];
            for v in &mut t.data[r * width..(r + 1) * width] {
                *v /= scale;
            }
            t.basis[r] = j;
        }
    }
    for (k, &r) in arts.iter().enumerate() {
        t.data[r * width + n + k] = 1.0;
        t.basis[r] = n + k;
    }

    let mut iterations = 0;
    if n_art > 0 {
        // phase 1: minimise the sum of artificials
        let obj = m * width;
        for j in n..n + n_art {
            t.data[obj + j] = 1.0;
        }
        for &r in &arts {
            for j in 0..width {
                t.data[obj + j] -= t.data[r * width + j];
            }
        }
        let status = t.run(n + n_art, rule, &mut iterations);
        debug_assert_ne!(status, LpStatus::Unbounded);
        let phase1 = -t.data[obj + width - 1];
        let scale = 1.0 + rhs.iter().fold(0.0f64, |a, &b| a.max(b));
        if phase1 > 1e-9 * scale {
            return LpSolution {
                iterations,
                ..infeasible(n)
            };
        }
        // drive remaining artificials out of the basis
        let mut drop_rows = Vec::new();
        for r in 0..m {
            if t.basis[r] >= n {
                let col = (0..n)
                    .filter(|&j| t.data[r * width + j].abs() > PIVOT_EPS)
                    .max_by(|&a, &b| t.data[r * width + a].abs().total_cmp(&t.data[r * width + b].abs()));
                match col {
                    Some(j) => t.pivot(r, j),
                    None => drop_rows.push(r),
                }
            }
        }
        t.remove_rows(&drop_rows);
        t.truncate_columns(n);
    }

    // phase 2
    let width = t.width;
    let obj = t.m * width;
    for j in 0..width {
        t.data[obj + j] = 0.0;
    }
    for j in 0..n {
        t.data[obj + j] = p.objective[j];
    }
    for r in 0..t.m {
        let cb = p.objective[t.basis[r]];
        if cb != 0.0 {
            for j in 0..width {
                t.data[obj + j] -= cb * t.data[r * width + j];
            }
        }
    }
    let status = t.run(n, rule, &mut iterations);
    let mut x = vec![0.0; n];
    for r in 0..t.m {
        x[t.basis[r]] = t.data[r * width + width - 1].max(0.0);
    }
    let objective_value = p.value(&x);
    LpSolution {
        status,
        x,
        objective_value: if status == LpStatus::Unbounded {
            f64::NEG_INFINITY
        } else {
            objective_value
        },
        iterations,
    }
}

fn infeasible(n: usize) -> LpSolution {
    LpSolution {
        status: LpStatus::Infeasible,
        x: vec![0.0; n],
        objective_value: f64::INFINITY,
        iterations: 0,
    }
}

/// Indices of a maximal independent subset of rows, or `None` when a
/// dependent row contradicts the others. Rows owning a column that no other
/// row touches are independent of everything and skip the elimination.
fn prune_rows(n: usize, rows: &[Vec<(usize, f64)>], rhs: &[f64]) -> Option<Vec<usize>> {
    let mut col_count = vec![0usize; n];
    for row in rows {
        for &(j, _) in row {
            col_count[j] += 1;
        }
    }
    let mut keep = Vec::new();
    // reduced rows stored densely with their pivot column
    let mut echelon: Vec<(usize, Vec<f64>, f64)> = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        if row.iter().any(|&(j, _)| col_count[j] == 1) {
            keep.push(r);
            continue;
        }
        let mut dense = vec![0.0; n];
        for &(j, v) in row {
            dense[j] = v;
        }
        let mut b = rhs[r];
        for (pc, prow, pb) in &echelon {
            let f = dense[*pc];
            if f != 0.0 {
                for (d, &pv) in dense.iter_mut().zip(prow) {
                    *d -= f * pv;
                }
                b -= f * pb;
            }
        }
        let (pc, pv) = dense.iter().enumerate().fold(
            (0, 0.0f64),
            |acc, (j, &v)| if v.abs() > acc.1.abs() { (j, v) } else { acc },
        );
        if pv.abs() <= PRUNE_EPS {
            if b.abs() > 1e-8 {
                return None;
            }
            continue;
        }
        for d in dense.iter_mut() {
            *d /= pv;
        }
        echelon.push((pc, dense, b / pv));
        keep.push(r);
    }
    keep.sort_unstable();
    Some(keep)
}

struct Tableau {
    m: usize,
    width: usize,
    /// `m` constraint rows followed by the reduced-cost row; last column is
    /// the right-hand side.
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let pv = self.data[r * w + c];
        for v in &mut self.data[r * w..(r + 1) * w] {
            *v /= pv;
        }
        let pivot_row: Vec<f64> = self.data[r * w..(r + 1) * w].to_vec();
        let nz: Vec<usize> = (0..w).filter(|&j| pivot_row[j] != 0.0).collect();
        for i in 0..=self.m {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[i * w..(i + 1) * w];
            for &j in &nz {
                row[j] -= f * pivot_row[j];
            }
            row[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Simplex iterations over columns `0..ncols`.
    fn run(&mut self, ncols: usize, rule: PivotRule, iterations: &mut usize) -> LpStatus {
        let w = self.width;
        let obj = self.m * w;
        let mut degenerate = 0usize;
        loop {
            let bland = rule == PivotRule::Bland || degenerate >= DEGENERATE_RUN;
            let entering = if bland {
                (0..ncols).find(|&j| self.data[obj + j] < -COST_EPS)
            } else {
                (0..ncols)
                    .filter(|&j| self.data[obj + j] < -COST_EPS)
                    .min_by(|&a, &b| self.data[obj + a].total_cmp(&self.data[obj + b]))
            };
            let Some(c) = entering else {
                return LpStatus::Optimal;
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.data[r * w + c];
                if a > PIVOT_EPS {
                    let ratio = self.data[r * w + w - 1] / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            if ratio < bratio - 1e-12 || (ratio <= bratio + 1e-12 && self.basis[r] < self.basis[br]) {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else {
                return LpStatus::Unbounded;
            };
            if ratio.abs() <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
            *iterations += 1;
        }
    }

    fn remove_rows(&mut self, rows: &[usize]) {
        if rows.is_empty() {
            return;
        }
        let w = self.width;
        let mut data = Vec::with_capacity(self.data.len());
        let mut basis = Vec::with_capacity(self.m);
        for i in 0..=self.m {
            if i < self.m && rows.contains(&i) {
                continue;
            }
            data.extend_from_slice(&self.data[i * w..(i + 1) * w]);
            if i < self.m {
                basis.push(self.basis[i]);
            }
        }
        self.m = basis.len();
        self.data = data;
        self.basis = basis;
    }

    /// Keeps the first `n` columns and the right-hand side.
    fn truncate_columns(&mut self, n: usize) {
        let w = self.width;
        let nw = n + 1;
        let mut data = Vec::with_capacity((self.m + 1) * nw);
        for i in 0..=self.m {
            data.extend_from_slice(&self.data[i * w..i * w + n]);
            data.push(self.data[i * w + w - 1]);
        }
        self.width = nw;
        self.data = data;
    }
}

/// A kernel whose entries are affine in a parameter vector:
/// `entry[k] = constant[k] + Σ_j coeff[k][j]·x_j`, laid out row-major over
/// `cod × dom`.
#[derive(Clone, Debug)]
pub struct AffineKernel {
    pub dom: WireList,
    pub cod: WireList,
    pub n_params: usize,
    pub constant: Vec<f64>,
    /// Sparse coefficients per entry.
    pub coeff: Vec<Vec<(usize, f64)>>,
}

impl AffineKernel {
    pub fn new(dom: WireList, cod: WireList, n_params: usize) -> Self {
        let len = dom.total_size() * cod.total_size();
        AffineKernel {
            dom,
            cod,
            n_params,
            constant: vec![0.0; len],
            coeff: vec![Vec::new(); len],
        }
    }

    /// From a dense coefficient matrix (`len × n_params`) and no constant.
    pub fn from_dense_linear(dom: WireList, cod: WireList, n_params: usize, dense: &[f64]) -> Result<Self, LpError> {
        let mut k = AffineKernel::new(dom, cod, n_params);
        let len = k.constant.len();
        if dense.len() != len * n_params {
            return Err(LpError::MapShape {
                expected: len * n_params,
                found: dense.len(),
            });
        }
        for (e, c) in k.coeff.iter_mut().enumerate() {
            *c = dense[e * n_params..(e + 1) * n_params]
                .iter()
                .enumerate()
                .filter(|(_, v)| v.abs() > 1e-15)
                .map(|(j, &v)| (j, v))
                .collect();
        }
        Ok(k)
    }

    pub fn constant_kernel(m: &Morphism, n_params: usize) -> Self {
        let mut k = AffineKernel::new(m.dom().clone(), m.cod().clone(), n_params);
        k.constant = m.matrix().to_vec();
        k
    }

    pub fn rows(&self) -> usize {
        self.cod.total_size()
    }

    pub fn cols(&self) -> usize {
        self.dom.total_size()
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.constant
            .iter()
            .zip(&self.coeff)
            .map(|(c, row)| c + row.iter().map(|&(j, v)| v * x[j]).sum::<f64>())
            .collect()
    }

    pub fn eval_morphism(&self, x: &[f64]) -> Morphism {
        let v: Vec<f64> = self.eval(x).into_iter().map(|e| e.max(0.0)).collect();
        Morphism::from_parts(self.dom.clone(), self.cod.clone(), v, Flavor::Nonneg)
    }

    /// `self − other` (shapes must agree).
    pub fn minus(&self, other: &AffineKernel) -> Result<AffineKernel, LpError> {
        if self.constant.len() != other.constant.len() || self.cols() != other.cols() {
            return Err(LpError::TargetShape(format!(
                "{} -> {} vs {} -> {}",
                self.dom, self.cod, other.dom, other.cod
            )));
        }
        let mut out = self.clone();
        out.n_params = self.n_params.max(other.n_params);
        for (k, (c, row)) in out.constant.iter_mut().zip(out.coeff.iter_mut()).enumerate() {
            *c -= other.constant[k];
            for &(j, v) in &other.coeff[k] {
                match row.iter_mut().find(|(u, _)| *u == j) {
                    Some(e) => e.1 -= v,
                    None => row.push((j, -v)),
                }
            }
        }
        Ok(out)
    }

    /// The kernel on the listed input columns only, over an anonymous
    /// domain.
    pub fn restrict_cols(&self, keep: &[usize]) -> AffineKernel {
        let cols = self.cols();
        let dom = WireList::from_sizes(&[keep.len().max(1)]).expect("nonempty");
        let mut out = AffineKernel::new(dom, self.cod.clone(), self.n_params);
        for r in 0..self.rows() {
            for (k, &c) in keep.iter().enumerate() {
                out.constant[r * keep.len() + k] = self.constant[r * cols + c];
                out.coeff[r * keep.len() + k] = self.coeff[r * cols + c].clone();
            }
        }
        out
    }

    /// Same kernel with parameter `j` renamed to `j + offset` in a space of
    /// `n_params` parameters.
    pub fn shifted(&self, offset: usize, n_params: usize) -> AffineKernel {
        let mut out = self.clone();
        out.n_params = n_params;
        for row in out.coeff.iter_mut() {
            for e in row.iter_mut() {
                e.0 += offset;
            }
        }
        out
    }

    /// Worst-case total variation of the kernel from zero at `x`.
    pub fn tv_norm(&self, x: &[f64]) -> f64 {
        let v = self.eval(x);
        let cols = self.cols();
        (0..cols)
            .map(|c| 0.5 * (0..self.rows()).map(|r| v[r * cols + c].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// A block of parameters forming a column-stochastic matrix.
#[derive(Clone, Debug)]
pub struct StochBlock {
    pub dom: WireList,
    pub cod: WireList,
    pub offset: usize,
}

impl StochBlock {
    pub fn len(&self) -> usize {
        self.dom.total_size() * self.cod.total_size()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parameter index of entry `(row, col)`.
    pub fn var(&self, row: usize, col: usize) -> usize {
        self.offset + row * self.dom.total_size() + col
    }

    pub fn extract(&self, x: &[f64]) -> Morphism {
        let v: Vec<f64> = x[self.offset..self.offset + self.len()].to_vec();
        let cols = self.dom.total_size();
        let rows = self.cod.total_size();
        let mut v: Vec<f64> = v.into_iter().map(|e| e.max(0.0)).collect();
        for c in 0..cols {
            let s: f64 = (0..rows).map(|r| v[r * cols + c]).sum();
            if s > 0.0 {
                for r in 0..rows {
                    v[r * cols + c] /= s;
                }
            }
        }
        Morphism::new(self.dom.clone(), self.cod.clone(), v, Flavor::Stochastic).unwrap_or_else(|_| {
            Morphism::from_parts(
                self.dom.clone(),
                self.cod.clone(),
                x[self.offset..self.offset + self.len()].to_vec(),
                Flavor::Nonneg,
            )
        })
    }
}

/// Minimise, over parameters constrained to stochastic blocks and extra
/// linear equalities, the maximum total-variation norm of a family of affine
/// kernels.
#[derive(Clone, Debug, Default)]
pub struct DistanceLp {
    n_params: usize,
    blocks: Vec<StochBlock>,
    extra: Vec<(Vec<(usize, f64)>, f64)>,
    free: Vec<(usize, usize)>,
    terms: Vec<AffineKernel>,
}

#[derive(Clone, Debug)]
pub struct DistanceSolution {
    pub status: LpStatus,
    /// LP optimum.
    pub value: f64,
    /// The objective recomputed from `params`.
    pub resubstituted: f64,
    pub params: Vec<f64>,
    pub lp_rows: usize,
    pub lp_vars: usize,
}

impl DistanceLp {
    pub fn new() -> Self {
        DistanceLp::default()
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// Adds a stochastic block with domain `dom` and codomain `cod`.
    pub fn add_block(&mut self, dom: WireList, cod: WireList) -> StochBlock {
        let b = StochBlock {
            dom,
            cod,
            offset: self.n_params,
        };
        self.n_params += b.len();
        self.blocks.push(b.clone());
        b
    }

    /// Adds `count` nonnegative parameters constrained only by extra rows.
    pub fn add_free(&mut self, count: usize) -> usize {
        let off = self.n_params;
        self.n_params += count;
        self.free.push((off, count));
        off
    }

    pub fn add_eq(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) {
        self.extra.push((coeffs, rhs));
    }

    /// Adds a kernel whose TV norm joins the maximum.
    pub fn add_term(&mut self, k: AffineKernel) {
        self.terms.push(k);
    }

    pub fn blocks(&self) -> &[StochBlock] {
        &self.blocks
    }

    /// `max_k tv_norm(term_k, x)`.
    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.tv_norm(x)).fold(0.0, f64::max)
    }

    /// Whether some admissible parameter vector makes every term vanish.
    pub fn solve_exact(&self) -> LpStatus {
        let mut lp = self.base_problem();
        for term in &self.terms {
            for (k, row) in term.coeff.iter().enumerate() {
                let coeffs: Vec<(usize, f64)> = row.iter().copied().filter(|(_, v)| v.abs() > 1e-14).collect();
                if coeffs.is_empty() {
                    if term.constant[k].abs() > 1e-12 {
                        return LpStatus::Infeasible;
                    }
                    continue;
                }
                lp.add_eq(coeffs, -term.constant[k]).expect("vars in range");
            }
        }
        solve(&lp).status
    }

    fn base_problem(&self) -> LpProblem {
        let mut lp = LpProblem::new(self.n_params);
        for b in &self.blocks {
            let rows = b.cod.total_size();
            for c in 0..b.dom.total_size() {
                let coeffs = (0..rows).map(|r| (b.var(r, c), 1.0)).collect();
                lp.add_eq(coeffs, 1.0).expect("block vars in range");
            }
        }
        for (coeffs, rhs) in &self.extra {
            lp.add_eq(coeffs.clone(), *rhs).expect("extra vars in range");
        }
        lp
    }

    /// Builds the epigraph program and solves it.
    pub fn solve(&self) -> DistanceSolution {
        let p = self.n_params;
        let mut lp = self.base_problem();

        // group rows by (term, input column) and merge duplicates
        struct Group {
            constant: f64,
            rows: Vec<(Vec<(usize, f64)>, f64, f64)>,
        }
        let mut groups: Vec<Group> = Vec::new();
        for term in &self.terms {
            let cols = term.cols();
            for c in 0..cols {
                let mut g = Group {
                    constant: 0.0,
                    rows: Vec::new(),
                };
                let mut index: HashMap<(Vec<(usize, i64)>, i64), usize> = HashMap::new();
                for r in 0..term.rows() {
                    let e = r * cols + c;
                    let mut coeff: Vec<(usize, f64)> =
                        term.coeff[e].iter().copied().filter(|(_, v)| v.abs() > 1e-14).collect();
                    let k = term.constant[e];
                    if coeff.is_empty() {
                        g.constant += k.abs();
                        continue;
                    }
                    coeff.sort_by_key(|&(j, _)| j);
                    let key = (
                        coeff.iter().map(|&(j, v)| (j, quantise(v))).collect::<Vec<_>>(),
                        quantise(k),
                    );
                    match index.get(&key) {
                        Some(&i) => g.rows[i].2 += 1.0,
                        None => {
                            index.insert(key, g.rows.len());
                            g.rows.push((coeff, k, 1.0));
                        }
                    }
                }
                groups.push(g);
            }
        }

        let use_epigraph = groups.len() > 1;
        let t = if use_epigraph { Some(lp.add_var(1.0)) } else { None };
        let mut constant_floor: f64 = 0.0;
        for g in &groups {
            let mut epi: Vec<(usize, f64)> = Vec::new();
            for (coeff, k, w) in &g.rows {
                let pos = lp.add_var(0.0);
                let neg = lp.add_var(0.0);
                // pos − neg − Σ coeff·x = k
                let mut row = vec![(pos, 1.0), (neg, -1.0)];
                row.extend(coeff.iter().map(|&(j, v)| (j, -v)));
                lp.add_eq(row, *k).expect("vars in range");
                epi.push((pos, 0.5 * w));
                epi.push((neg, 0.5 * w));
            }
            match t {
                Some(t) => {
                    // t − ½Σw(p+n) − s = ½·constant
                    let s = lp.add_var(0.0);
                    let mut row = vec![(t, 1.0), (s, -1.0)];
                    row.extend(epi.iter().map(|&(j, v)| (j, -v)));
                    lp.add_eq(row, 0.5 * g.constant).expect("vars in range");
                }
                None => {
                    for (j, v) in epi {
                        lp.set_cost(j, v);
                    }
                    constant_floor = 0.5 * g.constant;
                }
            }
        }
        let sol = solve(&lp);
        let params: Vec<f64> = sol.x[..p].to_vec();
        let value = match sol.status {
            LpStatus::Optimal => sol.objective_value + constant_floor,
            LpStatus::Infeasible => f64::INFINITY,
            LpStatus::Unbounded => f64::NEG_INFINITY,
        };
        let resubstituted = if sol.status == LpStatus::Optimal {
            self.objective_at(&params)
        } else {
            f64::INFINITY
        };
        DistanceSolution {
            status: sol.status,
            value,
            resubstituted,
            params,
            lp_rows: lp.num_rows(),
            lp_vars: lp.num_vars(),
        }
    }
}

fn quantise(v: f64) -> i64 {
    (v * 1e12).round() as i64
}

/// Shape of a simulator to synthesise, with optional linear side
/// constraints on its entries (indexed as `row * cols + col`).
#[derive(Clone, Debug)]
pub struct SimulatorShape {
    pub dom: WireList,
    pub cod: WireList,
    pub extra_eqs: Vec<(Vec<(usize, f64)>, f64)>,
}

impl SimulatorShape {
    pub fn new(dom: WireList, cod: WireList) -> Self {
        SimulatorShape {
            dom,
            cod,
            extra_eqs: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub simulator: Morphism,
    pub residual: f64,
    pub status: LpStatus,
}

/// Finds the stochastic `b` of the given shape minimising the channel TV
/// distance between `map(b)` and `target`. `map` must be linear in the
/// entries of `b` (row-major).
pub fn min_tv_fit(map: &AffineKernel, target: &Morphism, shape: &SimulatorShape) -> Result<FitResult, LpError> {
    let n = shape.dom.total_size() * shape.cod.total_size();
    if map.n_params != n {
        return Err(LpError::MapShape {
            expected: n,
            found: map.n_params,
        });
    }
    if map.rows() != target.rows() || map.cols() != target.cols() {
        return Err(LpError::TargetShape(format!(
            "map is {} -> {}, target is {} -> {}",
            map.dom,
            map.cod,
            target.dom(),
            target.cod()
        )));
    }
    let mut lp = DistanceLp::new();
    let block = lp.add_block(shape.dom.clone(), shape.cod.clone());
    for (coeffs, rhs) in &shape.extra_eqs {
        lp.add_eq(coeffs.iter().map(|&(j, v)| (block.offset + j, v)).collect(), *rhs);
    }
    lp.add_term(map.minus(&AffineKernel::constant_kernel(target, n))?);
    let sol = lp.solve();
    let simulator = block.extract(&sol.params);
    let residual = if sol.status == LpStatus::Optimal {
        lp.objective_at(simulator.matrix())
    } else {
        f64::INFINITY
    };
    Ok(FitResult {
        simulator,
        residual,
        status: sol.status,
    })
}
