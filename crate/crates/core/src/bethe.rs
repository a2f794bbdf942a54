//! Nested Bethe equations in a representation-independent form and a damped
//! Newton solver on their logarithmic form.
//!
//! Level k (0-based) of the system reads
//!
//!   prod_{m in k-1} f_{-1}(l_n, l_m) prod_{m in k, m != n} f_2(l_n, l_m) prod_{m in k+1} f_{-1}(l_n, l_m) = RHS_k(l_n)
//!
//! with f_x(a,b) = e_x(a-b) for closed chains and e_x(a-b) e_x(a+b) for open
//! ones; RHS_k is a rational function stored by zeros and poles.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c64, real, C64};
use crate::par;

/// Twist used to unfold coinciding roots at exceptional parameter values.
const TWIST: f64 = 1e-4;
const OPEN_SEED_FACTOR: usize = 6;

/// e_x(l) = (l - hbar x / 2) / (l + hbar x / 2)
pub fn e_fn(x: f64, lambda: C64, hbar: C64) -> C64 {
    let h = hbar * (x / 2.0);
    (lambda - h) / (lambda + h)
}

/// Same with a complex index (boundary factors carry x = -M - 2 xi / hbar).
pub fn e_fn_c(x: C64, lambda: C64, hbar: C64) -> C64 {
    let h = hbar * x / 2.0;
    (lambda - h) / (lambda + h)
}

/// c prod (l - z) / prod (l - p)
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RationalFn {
    pub constant: C64,
    pub zeros: Vec<C64>,
    pub poles: Vec<C64>,
}

impl RationalFn {
    pub fn one() -> Self {
        RationalFn { constant: real(1.0), zeros: Vec::new(), poles: Vec::new() }
    }

    pub fn eval(&self, l: C64) -> C64 {
        let mut v = self.constant;
        for z in &self.zeros {
            v *= l - z;
        }
        for p in &self.poles {
            v /= l - p;
        }
        v
    }

    pub fn mul(mut self, other: &RationalFn) -> Self {
        self.constant *= other.constant;
        self.zeros.extend_from_slice(&other.zeros);
        self.poles.extend_from_slice(&other.poles);
        self
    }

    pub fn inv(self) -> Self {
        RationalFn { constant: real(1.0) / self.constant, zeros: self.poles, poles: self.zeros }
    }

    /// Cancel zero/pole pairs that coincide to within `tol`.
    pub fn reduced(mut self, tol: f64) -> Self {
        let mut keep_poles = Vec::new();
        for p in self.poles.drain(..) {
            if let Some(i) = self.zeros.iter().position(|z| (z - p).norm() <= tol) {
                self.zeros.swap_remove(i);
            } else {
                keep_poles.push(p);
            }
        }
        self.poles = keep_poles;
        self
    }

    /// Distinct zeros (or poles) with multiplicities.
    pub fn grouped(points: &[C64], tol: f64) -> Vec<(C64, usize)> {
        let mut out: Vec<(C64, usize)> = Vec::new();
        for &p in points {
            match out.iter_mut().find(|(q, _)| (q - p).norm() <= tol) {
                Some(e) => e.1 += 1,
                None => out.push((p, 1)),
            }
        }
        out
    }
}

/// One factor e_x(l - center)^power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EFactor {
    pub x: C64,
    pub center: C64,
    pub power: usize,
}

impl RationalFn {
    /// Rewrites the function as constant * prod e_x(l - c)^p. With `mirrored` every zero z is
    /// paired with the pole -z (open chains). Otherwise any pairing is a valid factorization;
    /// pairs are picked greedily preferring integer x, then small |x|.
    /// None if some zero or pole is left unpaired.
    pub fn e_factors(&self, hbar: C64, mirrored: bool, tol: f64) -> Option<Vec<EFactor>> {
        if self.zeros.len() != self.poles.len() {
            return None;
        }
        let pairs: Vec<(C64, C64)> = if mirrored {
            let mut poles = self.poles.clone();
            let mut v = Vec::with_capacity(self.zeros.len());
            for &z in &self.zeros {
                let idx = poles.iter().position(|p| (p + z).norm() <= tol)?;
                v.push((z, poles.swap_remove(idx)));
            }
            v
        } else {
            let cost = |z: C64, p: C64| {
                let x = (z - p) / hbar;
                let k = match x.re.round() {
                    0.0 => x.re.signum(),
                    k => k,
                };
                ((x - k).norm(), x.norm())
            };
            let mut cand: Vec<(usize, usize, (f64, f64))> = (0..self.zeros.len())
                .flat_map(|i| (0..self.poles.len()).map(move |j| (i, j)))
                .map(|(i, j)| (i, j, cost(self.zeros[i], self.poles[j])))
                .collect();
            cand.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
            let (mut zu, mut pu) = (vec![false; self.zeros.len()], vec![false; self.poles.len()]);
            let mut v = Vec::with_capacity(self.zeros.len());
            for (i, j, _) in cand {
                if !zu[i] && !pu[j] {
                    zu[i] = true;
                    pu[j] = true;
                    v.push((self.zeros[i], self.poles[j]));
                }
            }
            v
        };
        let mut out: Vec<EFactor> = Vec::new();
        for (z, p) in pairs {
            let x = (z - p) / hbar;
            let center = (z + p) / 2.0;
            match out.iter_mut().find(|f| (f.x - x).norm() <= tol && (f.center - center).norm() <= tol) {
                Some(f) => f.power += 1,
                None => out.push(EFactor { x, center, power: 1 }),
            }
        }
        out.sort_by(|a, b| (a.x.re, a.center.re).partial_cmp(&(b.x.re, b.center.re)).unwrap());
        Some(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChainKind {
    Closed,
    Open,
}

/// Bethe equations of one magnon sector.
#[derive(Debug, Clone, Serialize)]
pub struct BetheEquations {
    pub kind: ChainKind,
    pub hbar: C64,
    /// M^(1..N-1)
    pub magnons: Vec<usize>,
    /// RHS_k for each level.
    pub rhs: Vec<RationalFn>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetheRoots {
    pub magnons: Vec<usize>,
    pub roots: Vec<Vec<C64>>,
}

impl BetheRoots {
    pub fn empty(magnons: &[usize]) -> Self {
        BetheRoots { magnons: magnons.to_vec(), roots: magnons.iter().map(|_| Vec::new()).collect() }
    }

    pub fn total(&self) -> usize {
        self.magnons.iter().sum()
    }

    pub fn flat(&self) -> Vec<C64> {
        self.roots.iter().flatten().copied().collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Solution {
    pub roots: BetheRoots,
    /// max |LHS/RHS - 1| over all equations.
    pub max_residual: f64,
    /// Contains an exact string l, l - hbar, ... running from a zero to a pole of the right-hand side.
    pub singular: bool,
    /// Contains coinciding roots; only produced as the zero-twist limit of a regular solution.
    pub coincident: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    pub seed: u64,
    pub random_seeds: usize,
    pub max_iter: usize,
    /// Acceptance threshold on max |LHS/RHS - 1|.
    pub tol: f64,
    pub dedup_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { seed: 7, random_seeds: 96, max_iter: 120, tol: 1e-9, dedup_tol: 1e-7 }
    }
}

/// Root at a fixed position (part of a singular pair) excluded from the unknowns.
#[derive(Debug, Clone, Copy)]
struct Pinned {
    level: usize,
    value: C64,
}

fn wrap(z: C64) -> C64 {
    let k = (z.im / (2.0 * PI)).round();
    c64(z.re, z.im - 2.0 * PI * k)
}

impl BetheEquations {
    pub fn levels(&self) -> usize {
        self.magnons.len()
    }

    fn mutual_factors(&self, a: C64, b: C64, x: f64) -> C64 {
        match self.kind {
            ChainKind::Closed => e_fn(x, a - b, self.hbar),
            ChainKind::Open => e_fn(x, a - b, self.hbar) * e_fn(x, a + b, self.hbar),
        }
    }

    /// (log f, d/da log f, d/db log f)
    fn mutual_log(&self, a: C64, b: C64, x: f64) -> (C64, C64, C64) {
        let h = self.hbar * (x / 2.0);
        let term = |u: C64| -> (C64, C64) { (((u - h) / (u + h)).ln(), real(1.0) / (u - h) - real(1.0) / (u + h)) };
        match self.kind {
            ChainKind::Closed => {
                let (l, d) = term(a - b);
                (l, d, -d)
            }
            ChainKind::Open => {
                let (l1, d1) = term(a - b);
                let (l2, d2) = term(a + b);
                (l1 + l2, d1 + d2, d2 - d1)
            }
        }
    }

    /// LHS/RHS for every equation, level-major.
    pub fn ratios(&self, roots: &BetheRoots) -> Result<Vec<C64>> {
        let mut out = Vec::new();
        for k in 0..self.levels() {
            for (n, &l) in roots.roots[k].iter().enumerate() {
                let mut lhs = real(1.0);
                for (kk, x) in self.neighbours(k) {
                    for (m, &o) in roots.roots[kk].iter().enumerate() {
                        if kk == k && m == n {
                            continue;
                        }
                        lhs *= self.mutual_factors(l, o, x);
                    }
                }
                let rhs = self.rhs[k].eval(l);
                let r = lhs / rhs;
                if !r.is_finite() || rhs.norm() == 0.0 {
                    return Err(Error::Pole(format!("equation level {} root {}", k + 1, n + 1)));
                }
                out.push(r);
            }
        }
        Ok(out)
    }

    /// LHS/RHS - 1 for each equation.
    pub fn residuals(&self, roots: &BetheRoots) -> Result<Vec<C64>> {
        Ok(self.ratios(roots)?.into_iter().map(|r| r - real(1.0)).collect())
    }

    fn neighbours(&self, k: usize) -> Vec<(usize, f64)> {
        let mut v = Vec::with_capacity(3);
        if k > 0 {
            v.push((k - 1, -1.0));
        }
        v.push((k, 2.0));
        if k + 1 < self.levels() {
            v.push((k + 1, -1.0));
        }
        v
    }

    /// Wrapped log residuals and Jacobian for the free roots; pinned roots enter as constants.
    fn log_system(&self, free: &[Vec<C64>], pinned: &[Pinned]) -> Option<(DVector<C64>, DMatrix<C64>)> {
        let offsets: Vec<usize> = free
            .iter()
            .scan(0, |acc, r| {
                let o = *acc;
                *acc += r.len();
                Some(o)
            })
            .collect();
        let dim: usize = free.iter().map(Vec::len).sum();
        let mut f = DVector::<C64>::zeros(dim);
        let mut jac = DMatrix::<C64>::zeros(dim, dim);
        for k in 0..self.levels() {
            for (n, &l) in free[k].iter().enumerate() {
                let row = offsets[k] + n;
                let mut acc = real(0.0);
                for (kk, x) in self.neighbours(k) {
                    for (m, &o) in free[kk].iter().enumerate() {
                        if kk == k && m == n {
                            continue;
                        }
                        let (lg, da, db) = self.mutual_log(l, o, x);
                        acc += lg;
                        jac[(row, row)] += da;
                        jac[(row, offsets[kk] + m)] += db;
                    }
                    for p in pinned.iter().filter(|p| p.level == kk) {
                        let (lg, da, _) = self.mutual_log(l, p.value, x);
                        acc += lg;
                        jac[(row, row)] += da;
                    }
                }
                let rhs = &self.rhs[k];
                acc -= rhs.constant.ln();
                for z in &rhs.zeros {
                    acc -= (l - z).ln();
                    jac[(row, row)] -= real(1.0) / (l - z);
                }
                for p in &rhs.poles {
                    acc += (l - p).ln();
                    jac[(row, row)] += real(1.0) / (l - p);
                }
                f[row] = wrap(acc);
            }
        }
        if f.iter().all(|z| z.is_finite()) && jac.iter().all(|z| z.is_finite()) {
            Some((f, jac))
        } else {
            None
        }
    }

    fn newton(&self, mut free: Vec<Vec<C64>>, pinned: &[Pinned], max_iter: usize) -> Option<Vec<Vec<C64>>> {
        let merit = |f: &DVector<C64>| f.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let (mut f, mut jac) = self.log_system(&free, pinned)?;
        let scale = self.hbar.norm();
        for _ in 0..max_iter {
            let m0 = merit(&f);
            if m0 < 1e-13 {
                return Some(free);
            }
            let step = jac.clone().lu().solve(&(-&f))?;
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1.0 / 256.0 {
                let mut trial = free.clone();
                let mut idx = 0;
                for level in trial.iter_mut() {
                    for r in level.iter_mut() {
                        *r += step[idx] * t;
                        idx += 1;
                    }
                }
                if let Some((f2, j2)) = self.log_system(&trial, pinned) {
                    if merit(&f2) < m0 {
                        free = trial;
                        f = f2;
                        jac = j2;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                // stalled at the rounding floor (large Jacobians next to poles)
                return (m0 < 1e-11).then_some(free);
            }
            if free.iter().flatten().any(|z| z.norm() > 1e6 * scale) {
                return None;
            }
        }
        (merit(&f) < 1e-11).then_some(free)
    }

    /// Candidate exact strings per level, top to bottom: u, u - hbar, ..., u - (L-1) hbar with u a
    /// zero and the bottom a pole of RHS_k of equal multiplicity.
    fn singular_strings(&self, k: usize) -> Vec<Vec<C64>> {
        let tol = 1e-9 * self.hbar.norm();
        let zeros = RationalFn::grouped(&self.rhs[k].zeros, tol);
        let poles = RationalFn::grouped(&self.rhs[k].poles, tol);
        let mut out = Vec::new();
        for &(z, mz) in &zeros {
            for len in 2..=self.magnons[k] {
                let w = z - self.hbar * (len - 1) as f64;
                if poles.iter().any(|&(p, mp)| (p - w).norm() <= tol && mp == mz) {
                    let string: Vec<C64> = (0..len).map(|j| z - self.hbar * j as f64).collect();
                    // on open chains a string through the origin pairs a root with its own reflection
                    let reflected = self.kind == ChainKind::Open
                        && string.iter().enumerate().any(|(i, a)| a.norm() <= tol || string[i + 1..].iter().any(|b| (a + b).norm() <= tol));
                    if !reflected {
                        out.push(string);
                    }
                }
            }
        }
        out
    }

    /// Product of the equations of a pinned string with mutual factors inside the string and
    /// the coinciding top-zero/bottom-pole factors removed; zero when the singular solution
    /// is physical.
    fn string_product_residual(&self, k: usize, string: &[C64], roots: &BetheRoots) -> f64 {
        let tol = 1e-9 * self.hbar.norm();
        let top = string[0];
        let bottom = string[string.len() - 1];
        let mut log = real(0.0);
        for &l in string {
            for (kk, x) in self.neighbours(k) {
                let mut skip = if kk == k { string.to_vec() } else { Vec::new() };
                for &o in &roots.roots[kk] {
                    if let Some(i) = skip.iter().position(|s| (s - o).norm() <= tol) {
                        skip.swap_remove(i);
                        continue;
                    }
                    log += self.mutual_log(l, o, x).0;
                }
            }
            let rhs = &self.rhs[k];
            log -= rhs.constant.ln();
            for z in &rhs.zeros {
                if !((l - top).norm() <= tol && (l - z).norm() <= tol) {
                    log -= (l - z).ln();
                }
            }
            for p in &rhs.poles {
                if !((l - bottom).norm() <= tol && (l - p).norm() <= tol) {
                    log += (l - p).ln();
                }
            }
        }
        (wrap(log).exp() - real(1.0)).norm()
    }

    /// Regular configurations: no exact strings, no roots on zeros/poles of the RHS and no
    /// coalescing roots (Newton drives spurious coincident pairs to arbitrarily small
    /// separations, so coincidence uses a much looser threshold).
    fn validate_regular(&self, roots: &BetheRoots) -> bool {
        let h = self.hbar.norm();
        let eps = 1e-6 * h;
        let coincide = 1e-3 * h;
        for (k, level) in roots.roots.iter().enumerate() {
            for (i, &a) in level.iter().enumerate() {
                for &b in &level[i + 1..] {
                    let mut near = vec![(a - b).norm() / coincide, (a - b - self.hbar).norm() / eps, (a - b + self.hbar).norm() / eps];
                    if self.kind == ChainKind::Open {
                        near.extend([(a + b).norm() / coincide, (a + b - self.hbar).norm() / eps, (a + b + self.hbar).norm() / eps]);
                    }
                    if near.iter().any(|&r| r < 1.0) {
                        return false;
                    }
                }
                if self.kind == ChainKind::Open && a.norm() < coincide {
                    return false;
                }
                let rhs = &self.rhs[k];
                if rhs.zeros.iter().chain(&rhs.poles).any(|z| (a - z).norm() < eps) {
                    return false;
                }
            }
        }
        true
    }

    fn canonical(&self, mut roots: BetheRoots) -> BetheRoots {
        for level in roots.roots.iter_mut() {
            if self.kind == ChainKind::Open {
                for r in level.iter_mut() {
                    if r.re < -1e-12 || (r.re.abs() <= 1e-12 && r.im < 0.0) {
                        *r = -*r;
                    }
                }
            }
            level.sort_by(|a, b| {
                let ka = ((a.re * 1e6).round(), (a.im * 1e6).round());
                let kb = ((b.re * 1e6).round(), (b.im * 1e6).round());
                ka.partial_cmp(&kb).unwrap()
            });
        }
        roots
    }

    fn seeds(&self, cfg: &SolverConfig, extra_fixed: &[(usize, usize)]) -> Vec<Vec<Vec<C64>>> {
        // free counts per level
        let counts: Vec<usize> = self
            .magnons
            .iter()
            .enumerate()
            .map(|(k, &m)| m - extra_fixed.iter().filter(|(l, _)| *l == k).map(|(_, c)| c).sum::<usize>())
            .collect();
        let h = self.hbar;
        let ih = h * c64(0.0, 1.0);
        let mut centers: Vec<C64> = Vec::with_capacity(self.levels());
        for k in 0..self.levels() {
            let pts: Vec<C64> = self.rhs[k].zeros.iter().chain(&self.rhs[k].poles).copied().collect();
            let c = if pts.is_empty() {
                centers.last().map(|&c| c + h * 0.5).unwrap_or(real(0.0))
            } else {
                pts.iter().sum::<C64>() / real(pts.len() as f64)
            };
            centers.push(c);
        }
        if self.kind == ChainKind::Open {
            centers.iter_mut().for_each(|c| *c = real(0.0));
        }
        let mut out: Vec<Vec<Vec<C64>>> = Vec::new();
        let line = |c: C64, m: usize, spacing: f64, offset: f64| -> Vec<C64> {
            (0..m).map(|j| c + ih * ((j as f64 - (m as f64 - 1.0) / 2.0) * spacing + offset) + h * 0.013 * j as f64).collect()
        };
        for &spacing in &[0.35, 0.7, 1.3] {
            for &off in &[0.0, 0.21, -0.37] {
                out.push(counts.iter().zip(&centers).map(|(&m, &c)| line(c, m, spacing, off)).collect());
            }
        }
        // strings: pairs l +- hbar/2 (slightly detuned) on the line
        for &u in &[0.0, 0.4, -0.8, 1.1] {
            out.push(
                counts
                    .iter()
                    .zip(&centers)
                    .map(|(&m, &c)| {
                        (0..m)
                            .map(|j| {
                                let pair = (j / 2) as f64;
                                let sign = if j % 2 == 0 { 0.5 } else { -0.5 };
                                c + ih * (u + 1.2 * pair) + h * (sign * 1.02) + ih * 0.01
                            })
                            .collect()
                    })
                    .collect(),
            );
        }
        // detuned long strings l_j = c + hbar j (1 + d)
        for &d in &[0.008, 0.03, -0.03, 0.1] {
            for &off in &[0.0, 0.25, -0.6] {
                out.push(
                    counts
                        .iter()
                        .zip(&centers)
                        .map(|(&m, &c)| (0..m).map(|j| c + h * ((j as f64 - (m as f64 - 1.0) / 2.0) * (1.0 + d)) + ih * off).collect())
                        .collect(),
                );
            }
        }
        if self.kind == ChainKind::Open {
            // p roots on the imaginary axis, the rest on the positive real axis
            let top = counts.iter().copied().max().unwrap_or(0);
            for &spacing in &[0.3, 0.5, 0.8] {
                for p in 0..=top {
                    out.push(
                        counts
                            .iter()
                            .map(|&m| {
                                let q = p.min(m);
                                (0..m)
                                    .map(|j| if j < q { ih * (0.25 + spacing * j as f64) } else { h * (0.35 + spacing * (j - q) as f64) + ih * 0.02 })
                                    .collect()
                            })
                            .collect(),
                    );
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (self.magnons.iter().fold(17u64, |a, &m| a * 31 + m as u64)));
        // open-chain basins are narrower (roots pile up against the reflection images)
        let random = if self.kind == ChainKind::Open { cfg.random_seeds * OPEN_SEED_FACTOR } else { cfg.random_seeds };
        for s in 0..random {
            let sigma = [0.4, 0.9, 1.8][s % 3];
            out.push(
                counts
                    .iter()
                    .zip(&centers)
                    .enumerate()
                    .map(|(k, (&m, &c))| {
                        (0..m)
                            .map(|_| {
                                let a: f64 = rng.random::<f64>() * 2.0 - 1.0;
                                let b: f64 = rng.random::<f64>() * 2.0 - 1.0;
                                // nested open levels sit roughly hbar/2 further out per level
                                let re = if self.kind == ChainKind::Open { a.abs() * sigma * 1.2 + 0.5 * k as f64 } else { a * sigma * 0.6 };
                                c + h * re + ih * (b * sigma)
                            })
                            .collect()
                    })
                    .collect(),
            );
        }
        if self.kind == ChainKind::Open {
            // fold into the half plane Re > 0 so +-l pairs don't collapse onto each other
            for seed in out.iter_mut() {
                for level in seed.iter_mut() {
                    for (j, r) in level.iter_mut().enumerate() {
                        let f = if r.re < 0.0 { -*r } else { *r };
                        *r = f + h * (0.05 + 0.023 * j as f64);
                    }
                }
            }
        }
        out
    }

    fn same(a: &BetheRoots, b: &BetheRoots, tol: f64) -> bool {
        a.roots.iter().zip(&b.roots).all(|(x, y)| {
            let mut used = vec![false; y.len()];
            x.iter().all(|p| {
                if let Some(i) = (0..y.len()).find(|&i| !used[i] && (y[i] - p).norm() <= tol) {
                    used[i] = true;
                    true
                } else {
                    false
                }
            })
        })
    }

    fn push_unique(list: &mut Vec<Solution>, s: Solution, tol: f64) {
        if !list.iter().any(|o| Self::same(&o.roots, &s.roots, tol)) {
            list.push(s);
        }
    }

    fn regular_search(&self, cfg: &SolverConfig) -> Vec<Solution> {
        let mut found: Vec<Solution> = Vec::new();
        let attempt = |seed: &Vec<Vec<C64>>| -> Option<Solution> {
            let free = self.newton(seed.clone(), &[], cfg.max_iter)?;
            let roots = self.canonical(BetheRoots { magnons: self.magnons.clone(), roots: free });
            if !self.validate_regular(&roots) {
                return None;
            }
            let res = self.residuals(&roots).ok()?;
            let max = res.iter().map(|r| r.norm()).fold(0.0, f64::max);
            (max <= cfg.tol).then_some(Solution { roots, max_residual: max, singular: false, coincident: false })
        };
        let mut seeds = self.seeds(cfg, &[]);
        // reseed from the images of new solutions under l -> conj(l), -l, -conj(l)
        for _round in 0..4 {
            let before = found.len();
            for s in par::map(&seeds, attempt).into_iter().flatten() {
                Self::push_unique(&mut found, s, cfg.dedup_tol);
            }
            if found.len() == before {
                break;
            }
            let maps: [fn(C64) -> C64; 3] = [|z| z.conj(), |z| -z, |z| -z.conj()];
            seeds = found[before..]
                .iter()
                .flat_map(|s| maps.iter().map(move |f| s.roots.roots.iter().map(|l| l.iter().map(|&z| f(z)).collect()).collect()))
                .collect();
        }
        found
    }

    /// Same equations with every right-hand side constant multiplied by exp(i delta).
    pub fn twisted(&self, delta: f64) -> BetheEquations {
        let mut out = self.clone();
        for r in out.rhs.iter_mut() {
            r.constant *= C64::from_polar(1.0, delta);
        }
        out
    }

    /// Configurations with coinciding roots that are limits of regular solutions of the
    /// twisted equations as the twist goes to zero. These appear at exceptional parameter
    /// values where two regular solutions of nearby chains merge into one eigenvector.
    fn coincident_limits(&self, cfg: &SolverConfig) -> Vec<Solution> {
        let h = self.hbar.norm();
        let mut out = Vec::new();
        for s in self.twisted(TWIST).regular_search(cfg) {
            let vars: Vec<Vec<(C64, usize)>> = s.roots.roots.iter().map(|l| RationalFn::grouped(l, 0.05 * h)).collect();
            if vars.iter().flatten().all(|&(_, m)| m == 1) {
                continue;
            }
            if let Some(sol) = self.reduced_newton(vars, cfg) {
                Self::push_unique(&mut out, sol, cfg.dedup_tol);
            }
        }
        out
    }

    /// Newton on the system where each variable stands for `m` coinciding roots; the
    /// equation of a variable is the one of its first copy.
    fn reduced_newton(&self, mut vars: Vec<Vec<(C64, usize)>>, cfg: &SolverConfig) -> Option<Solution> {
        let h = self.hbar.norm();
        let expand = |v: &Vec<Vec<(C64, usize)>>| BetheRoots {
            magnons: self.magnons.clone(),
            roots: v.iter().map(|l| l.iter().flat_map(|&(z, m)| std::iter::repeat(z).take(m)).collect()).collect(),
        };
        let eqs = |v: &Vec<Vec<(C64, usize)>>| -> Option<DVector<C64>> {
            let r = self.ratios(&expand(v)).ok()?;
            let mut out = Vec::new();
            let mut idx = 0;
            for &(_, m) in v.iter().flatten() {
                out.push(wrap(r[idx].ln()));
                idx += m;
            }
            out.iter().all(|z| z.is_finite()).then(|| DVector::from_vec(out))
        };
        let merit = |f: &DVector<C64>| f.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let n: usize = vars.iter().map(Vec::len).sum();
        let mut f = eqs(&vars)?;
        for _ in 0..60 {
            if merit(&f) < 1e-13 {
                break;
            }
            // forward differences; the equations are holomorphic in every variable
            let dz = 1e-7 * h;
            let mut jac = DMatrix::<C64>::zeros(n, n);
            let mut col = 0;
            for k in 0..vars.len() {
                for i in 0..vars[k].len() {
                    let mut p = vars.clone();
                    p[k][i].0 += dz;
                    let fp = eqs(&p)?;
                    for row in 0..n {
                        jac[(row, col)] = wrap(fp[row] - f[row]) / dz;
                    }
                    col += 1;
                }
            }
            let step = jac.lu().solve(&(-&f))?;
            let mut t = 1.0;
            loop {
                let mut trial = vars.clone();
                for (idx, v) in trial.iter_mut().flatten().enumerate() {
                    v.0 += step[idx] * t;
                }
                if let Some(f2) = eqs(&trial) {
                    if merit(&f2) < merit(&f) {
                        vars = trial;
                        f = f2;
                        break;
                    }
                }
                t *= 0.5;
                if t < 1.0 / 256.0 {
                    return None;
                }
            }
        }
        let roots = self.canonical(expand(&vars));
        let eps = 1e-6 * h;
        for (k, level) in vars.iter().enumerate() {
            let rhs = &self.rhs[k];
            for &(a, _) in level {
                if rhs.zeros.iter().chain(&rhs.poles).any(|z| (a - z).norm() < eps) {
                    return None;
                }
                if self.kind == ChainKind::Open && a.norm() < 1e-3 * h {
                    return None;
                }
            }
            // distinct variables must stay apart
            for (i, &(a, _)) in level.iter().enumerate() {
                if level[i + 1..].iter().any(|&(b, _)| (a - b).norm() < 1e-3 * h || (self.kind == ChainKind::Open && (a + b).norm() < 1e-3 * h)) {
                    return None;
                }
            }
        }
        let max = self.residuals(&roots).ok()?.iter().map(|r| r.norm()).fold(0.0, f64::max);
        (max <= cfg.tol).then_some(Solution { roots, max_residual: max, singular: false, coincident: true })
    }

    /// All solutions reachable from the seed set: regular ones (pairwise distinct roots, no
    /// exact strings) and singular ones (one exact string from a zero to a pole of the RHS,
    /// accepted only when the product of the string's equations holds after cancellation).
    pub fn solve(&self, cfg: &SolverConfig) -> Vec<Solution> {
        if self.magnons.iter().all(|&m| m == 0) {
            return vec![Solution { roots: BetheRoots::empty(&self.magnons), max_residual: 0.0, singular: false, coincident: false }];
        }
        let mut found = self.regular_search(cfg);

        for k in 0..self.levels() {
            if self.magnons[k] < 2 {
                continue;
            }
            for string in self.singular_strings(k) {
                let pinned: Vec<Pinned> = string.iter().map(|&value| Pinned { level: k, value }).collect();
                let seeds = self.seeds(cfg, &[(k, string.len())]);
                let sols: Vec<Option<Solution>> = par::map(&seeds, |seed| {
                    let free = if seed.iter().all(Vec::is_empty) {
                        seed.clone()
                    } else {
                        self.newton(seed.clone(), &pinned, cfg.max_iter)?
                    };
                    let mut all = free.clone();
                    all[k].extend_from_slice(&string);
                    let roots = BetheRoots { magnons: self.magnons.clone(), roots: all };
                    // the free roots must themselves be regular
                    let free_roots = BetheRoots { magnons: free.iter().map(Vec::len).collect(), roots: free };
                    if !self.validate_regular(&free_roots) {
                        return None;
                    }
                    let product = self.string_product_residual(k, &string, &roots);
                    let others = self.free_residual(&roots, k, &string)?;
                    let max = product.max(others);
                    (max <= cfg.tol).then(|| Solution { roots: self.canonical(roots), max_residual: max, singular: true, coincident: false })
                });
                for s in sols.into_iter().flatten() {
                    Self::push_unique(&mut found, s, cfg.dedup_tol);
                }
            }
        }
        for s in self.coincident_limits(cfg) {
            Self::push_unique(&mut found, s, cfg.dedup_tol);
        }
        found.sort_by(|a, b| {
            let ka: Vec<(i64, i64)> = a.roots.flat().iter().map(|z| ((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64)).collect();
            let kb: Vec<(i64, i64)> = b.roots.flat().iter().map(|z| ((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64)).collect();
            ka.cmp(&kb)
        });
        found
    }

    /// max |LHS/RHS - 1| over the equations of roots outside the pinned string.
    fn free_residual(&self, roots: &BetheRoots, k: usize, string: &[C64]) -> Option<f64> {
        let tol = 1e-9 * self.hbar.norm();
        let mut worst: f64 = 0.0;
        for kk in 0..self.levels() {
            for (n, &l) in roots.roots[kk].iter().enumerate() {
                if kk == k && string.iter().any(|s| (l - s).norm() <= tol) {
                    continue;
                }
                let mut lhs = real(1.0);
                for (k2, x) in self.neighbours(kk) {
                    for (m, &o) in roots.roots[k2].iter().enumerate() {
                        if k2 == kk && m == n {
                            continue;
                        }
                        lhs *= self.mutual_factors(l, o, x);
                    }
                }
                let r = lhs / self.rhs[kk].eval(l) - real(1.0);
                if !r.is_finite() {
                    return None;
                }
                worst = worst.max(r.norm());
            }
        }
        Some(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gl2_fundamental(ell: usize, m: usize) -> BetheEquations {
        // RHS = e_1(l)^ell = ((l - 1/2)/(l + 1/2))^ell at hbar = 1
        BetheEquations {
            kind: ChainKind::Closed,
            hbar: real(1.0),
            magnons: vec![m],
            rhs: vec![RationalFn { constant: real(1.0), zeros: vec![real(0.5); ell], poles: vec![real(-0.5); ell] }],
        }
    }

    #[test]
    fn e_function_values() {
        assert!((e_fn(1.0, real(0.0), real(1.0)) + real(1.0)).norm() < 1e-15);
        assert!((e_fn(2.0, real(1.0), real(1.0))).norm() < 1e-15);
    }

    #[test]
    fn two_sites_single_magnon() {
        let eqs = gl2_fundamental(2, 1);
        let sols = eqs.solve(&SolverConfig::default());
        assert_eq!(sols.len(), 1);
        assert!(sols[0].roots.roots[0][0].norm() < 1e-9);
        let bad = BetheRoots { magnons: vec![1], roots: vec![vec![real(1.0)]] };
        assert!(eqs.residuals(&bad).unwrap()[0].norm() > 0.1);
    }

    #[test]
    fn singular_pair_physical_only_for_even_length() {
        for (ell, expect_singular) in [(4, true), (5, false), (6, true)] {
            let sols = gl2_fundamental(ell, 2).solve(&SolverConfig::default());
            let n_singular = sols.iter().filter(|s| s.singular).count();
            assert_eq!(n_singular, usize::from(expect_singular), "ell={ell}");
        }
    }

    #[test]
    fn sector_counts_gl2() {
        fn binom(n: usize, k: usize) -> usize {
            (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
        }
        for ell in 2..=6 {
            for m in 0..=ell / 2 {
                let sols = gl2_fundamental(ell, m).solve(&SolverConfig::default());
                let expect = binom(ell, m) - if m > 0 { binom(ell, m - 1) } else { 0 };
                assert_eq!(sols.len(), expect, "ell={ell} M={m}: {:?}", sols.iter().map(|s| s.roots.flat()).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn rational_reduction() {
        let r = RationalFn { constant: real(2.0), zeros: vec![real(1.0), real(3.0)], poles: vec![real(1.0)] }.reduced(1e-12);
        assert_eq!(r.zeros.len(), 1);
        assert!(r.poles.is_empty());
    }
}
