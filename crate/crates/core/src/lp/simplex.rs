//! Two-phase tableau simplex over a generic scalar.
//!
//! The same pivoting code runs in `f64` (with absolute tolerances) and in
//! exact rationals (tolerance zero). Bland's rule picks the smallest
//! improving column and breaks ratio-test ties toward the smallest basic
//! variable index, so the solver cannot cycle and is fully deterministic.
//!
//! Preprocessing substitutes fixed variables (`lo == hi`), shifts the
//! rest to `y = x - lo >= 0`, and turns upper bounds into explicit rows,
//! which keeps the tableau in the plain nonnegative form.

use super::{LinearProgram, LpError, LpSolution, Rel};
use crate::num::Rat;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

pub(super) trait Scalar: Clone + PartialOrd + Sized + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg_of(&self) -> Self;
    fn abs_of(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn is_valid(&self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg_of(&self) -> Self {
        -self
    }
    fn abs_of(&self) -> Self {
        self.abs()
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn is_valid(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Rat {
    fn zero() -> Self {
        <Rat as Zero>::zero()
    }
    fn one() -> Self {
        <Rat as num_traits::One>::one()
    }
    fn from_f64(x: f64) -> Self {
        <Rat as FromPrimitive>::from_f64(x).expect("finite float")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg_of(&self) -> Self {
        -self
    }
    fn abs_of(&self) -> Self {
        Signed::abs(self)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_valid(&self) -> bool {
        true
    }
}

struct ReducedRow<S> {
    coeffs: Vec<S>,
    rel: Rel,
    rhs: S,
}

struct Work<S> {
    tab: Vec<Vec<S>>,
    rhs: Vec<S>,
    basis: Vec<usize>,
    is_art: Vec<bool>,
    banned: Vec<bool>,
    eps: S,
    pivots: usize,
    cap: usize,
}

impl<S: Scalar> Work<S> {
    fn ncols(&self) -> usize {
        self.is_art.len()
    }

    fn pivot(&mut self, r: usize, jc: usize, zrow: Option<&mut Vec<S>>) -> Result<(), LpError> {
        self.pivots += 1;
        if self.pivots > self.cap {
            return Err(LpError::Numerical("pivot iteration cap exhausted".into()));
        }
        let ncols = self.ncols();
        let p = self.tab[r][jc].clone();
        if p.is_zero() || !p.is_valid() {
            return Err(LpError::Numerical("degenerate pivot element".into()));
        }
        for j in 0..ncols {
            if !self.tab[r][j].is_zero() {
                self.tab[r][j] = self.tab[r][j].div(&p);
            }
        }
        self.rhs[r] = self.rhs[r].div(&p);
        self.tab[r][jc] = S::one();
        let prow = self.tab[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.tab.len() {
            if i == r {
                continue;
            }
            let f = self.tab[i][jc].clone();
            if f.is_zero() {
                continue;
            }
            for (j, p) in prow.iter().enumerate() {
                if !p.is_zero() {
                    self.tab[i][j] = self.tab[i][j].sub(&f.mul(p));
                }
            }
            self.rhs[i] = self.rhs[i].sub(&f.mul(&prhs));
            self.tab[i][jc] = S::zero();
        }
        if let Some(z) = zrow {
            let f = z[jc].clone();
            if !f.is_zero() {
                for j in 0..ncols {
                    if !prow[j].is_zero() {
                        z[j] = z[j].sub(&f.mul(&prow[j]));
                    }
                }
                z[jc] = S::zero();
            }
        }
        if !self.rhs[r].is_valid() {
            return Err(LpError::Numerical("non-finite tableau entry".into()));
        }
        self.basis[r] = jc;
        Ok(())
    }

    /// Runs Bland-rule simplex for the given column costs (maximize).
    fn run_phase(&mut self, cost: &[S]) -> Result<(), LpError> {
        let ncols = self.ncols();
        let neg_eps = S::zero().sub(&self.eps);
        let mut zrow = vec![S::zero(); ncols];
        for (j, z) in zrow.iter_mut().enumerate() {
            let mut acc = S::zero();
            for i in 0..self.tab.len() {
                let cb = &cost[self.basis[i]];
                if !cb.is_zero() && !self.tab[i][j].is_zero() {
                    acc = acc.add(&cb.mul(&self.tab[i][j]));
                }
            }
            *z = acc.sub(&cost[j]);
        }
        loop {
            let mut entering = None;
            for (j, z) in zrow.iter().enumerate() {
                if !self.banned[j] && *z < neg_eps {
                    entering = Some(j);
                    break;
                }
            }
            let Some(jc) = entering else {
                return Ok(());
            };
            let mut leaving: Option<(S, usize, usize)> = None;
            for i in 0..self.tab.len() {
                let a = &self.tab[i][jc];
                if *a > self.eps {
                    let numer = if self.rhs[i] < S::zero() {
                        S::zero()
                    } else {
                        self.rhs[i].clone()
                    };
                    let ratio = numer.div(a);
                    let better = match &leaving {
                        None => true,
                        Some((best, best_basis, _)) => {
                            ratio < *best || (ratio == *best && self.basis[i] < *best_basis)
                        }
                    };
                    if better {
                        leaving = Some((ratio, self.basis[i], i));
                    }
                }
            }
            let Some((_, _, row)) = leaving else {
                return Err(LpError::Numerical(
                    "unbounded direction in a bounded program".into(),
                ));
            };
            self.pivot(row, jc, Some(&mut zrow))?;
        }
    }

    /// Total infeasibility left in basic artificial variables.
    fn artificial_mass(&self) -> S {
        let mut total = S::zero();
        for i in 0..self.tab.len() {
            if self.is_art[self.basis[i]] && self.rhs[i] > S::zero() {
                total = total.add(&self.rhs[i]);
            }
        }
        total
    }

    /// Drives remaining artificial variables out of the basis, dropping
    /// rows that turn out to be redundant, then bans their columns.
    fn retire_artificials(&mut self) -> Result<(), LpError> {
        let ncols = self.ncols();
        let mut i = 0;
        while i < self.tab.len() {
            if self.is_art[self.basis[i]] {
                let mut replacement = None;
                for j in 0..ncols {
                    if !self.is_art[j] && !self.banned[j] && self.tab[i][j].abs_of() > self.eps {
                        replacement = Some(j);
                        break;
                    }
                }
                match replacement {
                    Some(j) => {
                        self.pivot(i, j, None)?;
                        i += 1;
                    }
                    None => {
                        self.tab.remove(i);
                        self.rhs.remove(i);
                        self.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        for j in 0..ncols {
            if self.is_art[j] {
                self.banned[j] = true;
            }
        }
        Ok(())
    }
}

pub(super) fn solve<S: Scalar>(lp: &LinearProgram, eps_f: f64) -> Result<LpSolution, LpError> {
    let eps = S::from_f64(eps_f);
    let n = lp.n();
    let lo: Vec<S> = lp.bounds().iter().map(|b| S::from_f64(b.0)).collect();
    let hi: Vec<S> = lp.bounds().iter().map(|b| S::from_f64(b.1)).collect();
    let c: Vec<S> = lp.objective().iter().map(|&v| S::from_f64(v)).collect();

    // Free variables keep a position; fixed ones are substituted away.
    let mut free = Vec::new();
    let mut pos = vec![usize::MAX; n];
    for j in 0..n {
        if lo[j] < hi[j] {
            pos[j] = free.len();
            free.push(j);
        }
    }
    let nf = free.len();

    let mut reduced: Vec<ReducedRow<S>> = Vec::new();
    for row in lp.rows() {
        let mut rhs = S::from_f64(row.rhs);
        for (a, lo_j) in row.coeffs.iter().zip(&lo) {
            if *a != 0.0 {
                rhs = rhs.sub(&S::from_f64(*a).mul(lo_j));
            }
        }
        let coeffs: Vec<S> = free.iter().map(|&j| S::from_f64(row.coeffs[j])).collect();
        if coeffs.iter().all(|a| a.is_zero()) {
            let consistent = match row.rel {
                Rel::Le => S::zero() <= rhs.add(&eps),
                Rel::Ge => S::zero() >= rhs.sub(&eps),
                Rel::Eq => rhs.abs_of() <= eps,
            };
            if !consistent {
                return Ok(LpSolution::Infeasible);
            }
        } else {
            reduced.push(ReducedRow {
                coeffs,
                rel: row.rel,
                rhs,
            });
        }
    }
    for (k, &j) in free.iter().enumerate() {
        let mut coeffs = vec![S::zero(); nf];
        coeffs[k] = S::one();
        reduced.push(ReducedRow {
            coeffs,
            rel: Rel::Le,
            rhs: hi[j].sub(&lo[j]),
        });
    }

    // Nonnegative right-hand sides simplify the initial basis.
    for row in &mut reduced {
        if row.rhs < S::zero() {
            row.rhs = row.rhs.neg_of();
            for a in &mut row.coeffs {
                *a = a.neg_of();
            }
            row.rel = match row.rel {
                Rel::Le => Rel::Ge,
                Rel::Ge => Rel::Le,
                Rel::Eq => Rel::Eq,
            };
        }
    }

    let m = reduced.len();
    let mut ncols = nf;
    for row in &reduced {
        ncols += match row.rel {
            Rel::Le | Rel::Eq => 1,
            Rel::Ge => 2,
        };
    }

    let mut work = Work {
        tab: Vec::with_capacity(m),
        rhs: Vec::with_capacity(m),
        basis: vec![0; m],
        is_art: vec![false; ncols],
        banned: vec![false; ncols],
        eps,
        pivots: 0,
        cap: 2_000 + 200 * (m + ncols),
    };
    let mut next_col = nf;
    let mut any_artificial = false;
    for (i, row) in reduced.iter().enumerate() {
        let mut tab_row = vec![S::zero(); ncols];
        tab_row[..nf].clone_from_slice(&row.coeffs);
        match row.rel {
            Rel::Le => {
                tab_row[next_col] = S::one();
                work.basis[i] = next_col;
                next_col += 1;
            }
            Rel::Ge => {
                tab_row[next_col] = S::one().neg_of();
                next_col += 1;
                tab_row[next_col] = S::one();
                work.is_art[next_col] = true;
                work.basis[i] = next_col;
                next_col += 1;
                any_artificial = true;
            }
            Rel::Eq => {
                tab_row[next_col] = S::one();
                work.is_art[next_col] = true;
                work.basis[i] = next_col;
                next_col += 1;
                any_artificial = true;
            }
        }
        work.tab.push(tab_row);
        work.rhs.push(row.rhs.clone());
    }

    if any_artificial {
        let mut cost1 = vec![S::zero(); ncols];
        for (j, flag) in work.is_art.iter().enumerate() {
            if *flag {
                cost1[j] = S::one().neg_of();
            }
        }
        work.run_phase(&cost1)?;
        if work.artificial_mass() > work.eps {
            return Ok(LpSolution::Infeasible);
        }
        work.retire_artificials()?;
    }

    let mut cost2 = vec![S::zero(); ncols];
    for (k, &j) in free.iter().enumerate() {
        cost2[k] = c[j].clone();
    }
    work.run_phase(&cost2)?;

    let mut y = vec![S::zero(); ncols];
    for i in 0..work.tab.len() {
        y[work.basis[i]] = work.rhs[i].clone();
    }
    let mut x = Vec::with_capacity(n);
    for j in 0..n {
        let xj = if pos[j] == usize::MAX {
            lo[j].clone()
        } else {
            y[pos[j]].add(&lo[j])
        };
        x.push(xj);
    }
    let mut value = S::zero();
    for j in 0..n {
        if !c[j].is_zero() {
            value = value.add(&c[j].mul(&x[j]));
        }
    }
    if !value.is_valid() || x.iter().any(|v| !v.is_valid()) {
        return Err(LpError::Numerical("non-finite solution".into()));
    }
    Ok(LpSolution::Optimal {
        x: x.iter().map(|v| v.to_f64()).collect(),
        value: value.to_f64(),
    })
}
