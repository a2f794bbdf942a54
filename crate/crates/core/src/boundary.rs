//! Open chains with a diagonal reflection matrix K(l) = diag(l + xi (x M), -l + xi (x N-M)).

use serde::{Deserialize, Serialize};

use crate::bethe::{e_fn_c, BetheEquations, BetheRoots, ChainKind, RationalFn, Solution, SolverConfig};
use crate::diag::{match_spectrum, sample_points, SolvedSector, SpectralReport};
use crate::error::{Error, Result};
use crate::linalg::{self, condition_number, eye, kron, permutation, real, CMat, C64};
use crate::rep_gl::{tensor_irreducible, weyl_dimension, HighestWeight};
use crate::spectrum::{drinfeld, DrinfeldPolys, VerifyConfig};
use crate::yangian::{BlockOp, Chain, ChainSpec};

const POLE_EPS: f64 = 1e-8;
const COND_GUARD: f64 = 1e12;
/// Step for the symmetric Richardson limit at removable singular points.
const LIMIT_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionSpec {
    /// Number M of (l + xi) entries.
    pub block: usize,
    pub xi: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpenChainSpec {
    pub bulk: ChainSpec,
    pub boundary: ReflectionSpec,
}

impl OpenChainSpec {
    pub fn new(bulk: ChainSpec, boundary: ReflectionSpec) -> Result<Self> {
        if boundary.block > bulk.rank {
            return Err(Error::OutOfRange { what: "block", value: boundary.block });
        }
        Ok(OpenChainSpec { bulk, boundary })
    }

    pub fn rank(&self) -> usize {
        self.bulk.rank
    }

    pub fn hbar(&self) -> C64 {
        self.bulk.hbar
    }
}

/// K(l) entries.
pub fn k_entries(spec: &ReflectionSpec, n: usize, lambda: C64) -> Vec<C64> {
    (0..n).map(|i| if i < spec.block { lambda + spec.xi } else { -lambda + spec.xi }).collect()
}

pub fn k_matrix_hat(spec: &ReflectionSpec, n: usize, lambda: C64) -> CMat {
    CMat::from_diagonal(&nalgebra::DVector::from_vec(k_entries(spec, n, lambda)))
}

/// lambda R(lambda) = lambda - hbar P; the reflection equation is homogeneous in each R
/// factor so the polynomial form can be used at every point.
fn r_poly(lambda: C64, hbar: C64, n: usize) -> CMat {
    eye(n * n) * lambda - permutation(n) * hbar
}

/// Relative residual of R_ab(la-lb) K_a(la) R_ba(la+lb) K_b(lb) = K_b(lb) R_ab(la+lb) K_a(la) R_ba(la-lb).
pub fn reflection_eq_residual(spec: &ReflectionSpec, la: C64, lb: C64, hbar: C64, n: usize) -> f64 {
    let ka = kron(&k_matrix_hat(spec, n, la), &eye(n));
    let kb = kron(&eye(n), &k_matrix_hat(spec, n, lb));
    let rm = r_poly(la - lb, hbar, n);
    let rp = r_poly(la + lb, hbar, n);
    let lhs = &rm * &ka * &rp * &kb;
    let rhs = &kb * &rp * &ka * &rm;
    let scale = rm.norm() * rp.norm() * ka.norm() * kb.norm();
    linalg::rel_residual(&lhs, &rhs, scale)
}

/// Zeros of c(l) = prod_k P_k(-l + (k-1) hbar), where T(-l) is singular.
pub fn inverse_singular_points(p: &DrinfeldPolys, hbar: C64) -> Vec<C64> {
    (1..=p.rank())
        .flat_map(|k| p.roots[k - 1].iter().map(move |r| hbar * (k - 1) as f64 - r).collect::<Vec<_>>())
        .collect()
}

/// T(mu)^{-1} = L_ell(mu)^{-1} ... L_1(mu)^{-1}, each local factor inverted by LU.
pub fn inverse_monodromy(chain: &Chain, mu: C64) -> Result<BlockOp> {
    let n = chain.rank();
    let h = chain.hbar();
    let mut acc = BlockOp::identity(n, chain.dim);
    for site in (0..chain.len()).rev() {
        let local = crate::yangian::lax_hat(&chain.reps[site], chain.shift(site), mu, h);
        if condition_number(&local) > COND_GUARD {
            return Err(Error::Singular(format!("{mu} (site {})", site + 1)));
        }
        let inv = local.clone().lu().try_inverse().ok_or_else(|| Error::Singular(format!("{mu}")))?;
        let factor = BlockOp::from_local(&inv, n, &chain.dims, site);
        // acc currently holds L_ell^{-1} ... L_{site+2}^{-1}
        acc = acc.mul(&factor);
    }
    Ok(acc)
}

/// Open chain: bulk chain plus boundary.
#[derive(Debug, Clone)]
pub struct OpenChain {
    pub chain: Chain,
    pub boundary: ReflectionSpec,
    drinfeld: DrinfeldPolys,
}

impl OpenChain {
    pub fn new(spec: OpenChainSpec) -> Result<Self> {
        let chain = Chain::new(spec.bulk.clone())?;
        Self::from_chain(chain, spec.boundary)
    }

    pub fn from_chain(chain: Chain, boundary: ReflectionSpec) -> Result<Self> {
        if boundary.block > chain.rank() {
            return Err(Error::OutOfRange { what: "block", value: boundary.block });
        }
        let drinfeld = drinfeld(&chain.spec);
        Ok(OpenChain { chain, boundary, drinfeld })
    }

    pub fn spec(&self) -> OpenChainSpec {
        OpenChainSpec { bulk: self.chain.spec.clone(), boundary: self.boundary.clone() }
    }

    pub fn rank(&self) -> usize {
        self.chain.rank()
    }

    pub fn hbar(&self) -> C64 {
        self.chain.hbar()
    }

    /// c(l) = prod_k P_k(-l + (k-1) hbar)
    fn normalization(&self, lambda: C64) -> C64 {
        let h = self.hbar();
        (1..=self.rank()).map(|k| self.drinfeld.eval(k, -lambda + h * (k - 1) as f64)).product()
    }

    fn b_direct(&self, lambda: C64) -> Result<BlockOp> {
        let n = self.rank();
        let t = self.chain.monodromy_hat(lambda);
        let tinv = inverse_monodromy(&self.chain, -lambda)?;
        let k = k_entries(&self.boundary, n, lambda);
        let c = self.normalization(lambda);
        let tk = BlockOp { n, d: t.d, blocks: t.blocks.iter().enumerate().map(|(idx, b)| b * (k[idx % n] * c)).collect() };
        Ok(tk.mul(&tinv))
    }

    /// B(l) = T(l) K(l) c(l) T(-l)^{-1}, analytic; near the zeros of c it is evaluated as a
    /// Richardson-extrapolated symmetric limit.
    pub fn b_monodromy_hat(&self, lambda: C64) -> Result<BlockOp> {
        let h = self.hbar();
        let near = inverse_singular_points(&self.drinfeld, h).iter().any(|z| (lambda - z).norm() < 1e-6 * h.norm());
        if !near {
            if let Ok(b) = self.b_direct(lambda) {
                return Ok(b);
            }
        }
        let d = h * LIMIT_STEP;
        let avg = |s: C64| -> Result<BlockOp> {
            let p = self.b_direct(lambda + s)?;
            let m = self.b_direct(lambda - s)?;
            Ok(BlockOp { n: p.n, d: p.d, blocks: p.blocks.iter().zip(&m.blocks).map(|(a, b)| (a + b) * real(0.5)).collect() })
        };
        let a1 = avg(d)?;
        let a2 = avg(d * 2.0)?;
        Ok(BlockOp {
            n: a1.n,
            d: a1.d,
            blocks: a1.blocks.iter().zip(&a2.blocks).map(|(x, y)| (x * real(4.0) - y) * real(1.0 / 3.0)).collect(),
        })
    }

    pub fn b_transfer_hat(&self, lambda: C64) -> Result<CMat> {
        Ok(self.b_monodromy_hat(lambda)?.trace())
    }

    /// Relative residual of the reflection algebra relation for B on two auxiliary copies.
    pub fn reflection_algebra_residual(&self, la: C64, lb: C64) -> Result<f64> {
        let n = self.rank();
        let h = self.hbar();
        let id = eye(self.chain.dim);
        let rm = kron(&r_poly(la - lb, h, n), &id);
        let rp = kron(&r_poly(la + lb, h, n), &id);
        let ba = self.b_monodromy_hat(la)?.embed_aux(2, 0);
        let bb = self.b_monodromy_hat(lb)?.embed_aux(2, 1);
        let lhs = &rm * &ba * &rp * &bb;
        let rhs = &bb * &rp * &ba * &rm;
        Ok(linalg::rel_residual(&lhs, &rhs, rm.norm() * rp.norm() * ba.norm() * bb.norm()))
    }

    /// Generators T^(1)_ij split into those inside the gl(M) + gl(N-M) blocks and the rest.
    pub fn symmetry_generators(&self) -> OpenSymmetry {
        let n = self.rank();
        let m = self.boundary.block;
        let all = self.chain.symmetry_generators();
        let mut block = Vec::new();
        let mut off_block = Vec::new();
        for (k, g) in all.into_iter().enumerate() {
            let (i, j) = (k / n, k % n);
            if (i < m) == (j < m) {
                block.push(((i, j), g));
            } else {
                off_block.push(((i, j), g));
            }
        }
        OpenSymmetry { block, off_block }
    }

    /// Largest violation of the recursion linking B_kk v+ to T_kk(l) T'_kk(-l) v+.
    pub fn relk_residual(&self, lambda: C64) -> Result<f64> {
        let n = self.rank();
        let h = self.hbar();
        let m = self.boundary.block;
        let v = self.chain.vacuum();
        let vi = self.chain.vacuum_index();
        let t = self.chain.monodromy_hat(lambda);
        let tinv = inverse_monodromy(&self.chain, -lambda)?;
        // unnormalized B = T K T(-l)^{-1}
        let c = self.normalization(lambda);
        let b = self.b_monodromy_hat(lambda)?.scale(real(1.0) / c);
        let mut worst: f64 = 0.0;
        let mut partial = nalgebra::DVector::<C64>::zeros(self.chain.dim);
        for k in 0..n {
            let kk = (k + 1) as f64;
            let bkk = b.get(k, k) * &v;
            let lhs = &bkk * ((lambda * 2.0 - h * kk + h) / (lambda * 2.0)) + &partial * (h / (lambda * 2.0));
            let factor = if k < m { lambda + self.boundary.xi } else { -lambda + self.boundary.xi + h * m as f64 };
            let tt = (t.get(k, k) * (tinv.get(k, k) * &v))[vi];
            let rhs = &v * (factor * tt);
            worst = worst.max((&lhs - &rhs).norm() / rhs.norm().max(1e-300));
            partial += bkk;
        }
        Ok(worst)
    }

    /// Largest deviation of B_kk v+ from sum_{j<k} a_j kappa_j beta_j + 2l/(2l - k hbar + hbar) kappa_k beta_k,
    /// and of B_jk v+ (j > k) from zero.
    pub fn highest_weight_residual(&self, lambda: C64) -> Result<f64> {
        let n = self.rank();
        let h = self.hbar();
        let v = self.chain.vacuum();
        let b = self.b_monodromy_hat(lambda)?;
        let mut worst: f64 = 0.0;
        let scale = self.open_vacuum_terms(lambda).iter().map(|z| z.norm()).fold(1.0, f64::max);
        for k in 0..n {
            let kk = (k + 1) as f64;
            let mut expect = self.kappa(k + 1, lambda) * self.beta(k + 1, lambda) * (lambda * 2.0 / (lambda * 2.0 - h * kk + h));
            for j in 0..k {
                let jj = (j + 1) as f64;
                let a = -(lambda * 2.0) / ((lambda * 2.0 - h * jj + h) * (lambda * 2.0 - h * jj));
                expect += a * self.kappa(j + 1, lambda) * self.beta(j + 1, lambda);
            }
            worst = worst.max((b.get(k, k) * &v - &v * expect).norm() / scale);
            for j in k + 1..n {
                worst = worst.max((b.get(j, k) * &v).norm() / scale);
            }
        }
        Ok(worst)
    }

    fn open_vacuum_terms(&self, lambda: C64) -> Vec<C64> {
        (1..=self.rank()).map(|k| self.kappa(k, lambda) * self.beta(k, lambda)).collect()
    }

    /// kappa_k = l + xi (k <= M), -l + xi + M hbar otherwise.
    pub fn kappa(&self, k: usize, lambda: C64) -> C64 {
        kappa(&self.boundary, self.hbar(), k, lambda)
    }

    pub fn beta(&self, k: usize, lambda: C64) -> C64 {
        beta(&self.drinfeld, self.hbar(), k, lambda)
    }

    pub fn g(&self, k: usize, lambda: C64) -> C64 {
        g_fn(&self.boundary, self.rank(), self.hbar(), k, lambda)
    }
}

pub struct OpenSymmetry {
    pub block: Vec<((usize, usize), CMat)>,
    pub off_block: Vec<((usize, usize), CMat)>,
}

fn kappa(b: &ReflectionSpec, hbar: C64, k: usize, lambda: C64) -> C64 {
    if k <= b.block {
        lambda + b.xi
    } else {
        -lambda + b.xi + hbar * b.block as f64
    }
}

/// g_k(l) = 2l (2l - N hbar) / ((2l - k hbar + hbar)(2l - k hbar)) kappa_k(l)
pub fn g_fn(b: &ReflectionSpec, n: usize, hbar: C64, k: usize, lambda: C64) -> C64 {
    let kk = k as f64;
    let l2 = lambda * 2.0;
    l2 * (l2 - hbar * n as f64) / ((l2 - hbar * kk + hbar) * (l2 - hbar * kk)) * kappa(b, hbar, k, lambda)
}

/// beta_k(l) = P_1(-l + hbar) ... P_{k-1}(-l + (k-1) hbar) P_k(l) P_{k+1}(-l + k hbar) ... P_N(-l + (N-1) hbar)
pub fn beta(p: &DrinfeldPolys, hbar: C64, k: usize, lambda: C64) -> C64 {
    let mut v = p.eval(k, lambda);
    for j in 1..=p.rank() {
        if j < k {
            v *= p.eval(j, -lambda + hbar * j as f64);
        } else if j > k {
            v *= p.eval(j, -lambda + hbar * (j - 1) as f64);
        }
    }
    v
}

fn near_removable(lambda: C64, n: usize, hbar: C64) -> bool {
    (0..=n).any(|k| (lambda - hbar * (k as f64 / 2.0)).norm() < 1e-7 * hbar.norm())
}

/// Symmetric Richardson limit of f at a removable point.
fn limit<F: Fn(C64) -> Result<C64>>(f: F, lambda: C64, hbar: C64) -> Result<C64> {
    let d = hbar * LIMIT_STEP;
    let a1 = (f(lambda + d)? + f(lambda - d)?) * 0.5;
    let a2 = (f(lambda + d * 2.0)? + f(lambda - d * 2.0)?) * 0.5;
    Ok((a1 * 4.0 - a2) / 3.0)
}

/// Lambda^0(l) = sum_k g_k(l) beta_k(l), with limits at l = k hbar / 2.
pub fn open_vacuum_eigenvalue(spec: &OpenChainSpec, lambda: C64) -> C64 {
    let p = drinfeld(&spec.bulk);
    let n = spec.rank();
    let h = spec.hbar();
    let raw = |l: C64| -> Result<C64> { Ok((1..=n).map(|k| g_fn(&spec.boundary, n, h, k, l) * beta(&p, h, k, l)).sum()) };
    if near_removable(lambda, n, h) {
        limit(raw, lambda, h).unwrap_or(real(f64::NAN))
    } else {
        raw(lambda).unwrap_or(real(f64::NAN))
    }
}

/// Residue of the unsimplified sum sum_k g_k beta_k at `z`, from the trapezoid rule on a small
/// circle (exact up to terms of order radius^16).
pub fn open_vacuum_residue(spec: &OpenChainSpec, z: C64) -> C64 {
    let p = drinfeld(&spec.bulk);
    let n = spec.rank();
    let h = spec.hbar();
    let r = 1e-3 * h.norm();
    let count = 16;
    (0..count)
        .map(|j| {
            let e = C64::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / count as f64);
            let l = z + e;
            e * (1..=n).map(|k| g_fn(&spec.boundary, n, h, k, l) * beta(&p, h, k, l)).sum::<C64>()
        })
        .sum::<C64>()
        / count as f64
}

fn level(roots: &BetheRoots, k: usize) -> &[C64] {
    if k == 0 || k > roots.roots.len() {
        &[]
    } else {
        &roots.roots[k - 1]
    }
}

/// Open D_k(l) with paired factors for l + l_n and l - l_n.
pub fn open_dressing(roots: &BetheRoots, k: usize, lambda: C64, hbar: C64) -> Result<C64> {
    let kf = k as f64;
    let mut v = real(1.0);
    for &r in level(roots, k - 1) {
        for s in [r, -r] {
            let den = lambda - s - hbar * ((kf - 1.0) / 2.0);
            if den.norm() < POLE_EPS {
                return Err(Error::Pole(format!("{lambda} (open D_{k}, level {})", k - 1)));
            }
            v *= (lambda - s - hbar * ((kf + 1.0) / 2.0)) / den;
        }
    }
    for &r in level(roots, k) {
        for s in [r, -r] {
            let den = lambda - s - hbar * (kf / 2.0);
            if den.norm() < POLE_EPS {
                return Err(Error::Pole(format!("{lambda} (open D_{k}, level {k})")));
            }
            v *= (lambda - s - hbar * (kf / 2.0) + hbar) / den;
        }
    }
    Ok(v)
}

/// Lambda(l) = sum_k g_k beta_k D_k
pub fn open_eigenvalue(spec: &OpenChainSpec, roots: &BetheRoots, lambda: C64) -> Result<C64> {
    open_eigenvalue_with(&drinfeld(&spec.bulk), &spec.boundary, spec.hbar(), roots, lambda)
}

fn open_eigenvalue_with(p: &DrinfeldPolys, b: &ReflectionSpec, hbar: C64, roots: &BetheRoots, lambda: C64) -> Result<C64> {
    let n = p.rank();
    let raw = |l: C64| -> Result<C64> {
        let mut v = real(0.0);
        for k in 1..=n {
            v += g_fn(b, n, hbar, k, l) * beta(p, hbar, k, l) * open_dressing(roots, k, l, hbar)?;
        }
        Ok(v)
    };
    if near_removable(lambda, n, hbar) {
        limit(raw, lambda, hbar)
    } else {
        raw(lambda)
    }
}

/// Apparent poles +-l^(k)_n + hbar k / 2 of the open eigenvalue.
pub fn open_eigenvalue_poles(roots: &BetheRoots, hbar: C64) -> Vec<C64> {
    roots
        .roots
        .iter()
        .enumerate()
        .flat_map(|(k, lv)| lv.iter().flat_map(move |&r| [r + hbar * ((k + 1) as f64 / 2.0), -r + hbar * ((k + 1) as f64 / 2.0)]))
        .collect()
}

/// Open Bethe equations: RHS_k = beta_k / beta_{k+1} at l + hbar k / 2, times
/// -e_{-M - 2 xi / hbar}(l) on level k = M.
pub fn open_equations(spec: &OpenChainSpec, magnons: &[usize]) -> Result<BetheEquations> {
    let n = spec.rank();
    if magnons.len() + 1 != n {
        return Err(Error::RankMismatch { rank: n - 1, got: magnons.len() });
    }
    let p = drinfeld(&spec.bulk);
    let h = spec.hbar();
    let tol = 1e-12 * h.norm();
    let rhs = (1..n)
        .map(|k| {
            let s = h * (k as f64 / 2.0);
            // P_k(l + s) P_{k+1}(-l + s) / (P_k(-l + s) P_{k+1}(l + s)); the (-1)^ell signs cancel
            let mut zeros: Vec<C64> = p.roots[k - 1].iter().map(|r| r - s).collect();
            zeros.extend(p.roots[k].iter().map(|r| s - r));
            let mut poles: Vec<C64> = p.roots[k - 1].iter().map(|r| s - r).collect();
            poles.extend(p.roots[k].iter().map(|r| r - s));
            let mut f = RationalFn { constant: real(1.0), zeros, poles };
            if k == spec.boundary.block {
                let x = -(real(spec.boundary.block as f64)) - spec.boundary.xi * 2.0 / h;
                let half = h * x / 2.0;
                f = f.mul(&RationalFn { constant: real(-1.0), zeros: vec![half], poles: vec![-half] });
            }
            f.reduced(tol)
        })
        .collect();
    Ok(BetheEquations { kind: ChainKind::Open, hbar: h, magnons: magnons.to_vec(), rhs })
}

pub fn bethe_residuals_open(spec: &OpenChainSpec, roots: &BetheRoots) -> Result<Vec<C64>> {
    open_equations(spec, &roots.magnons)?.residuals(roots)
}

/// The boundary factor -e_x(l) with x = -M - 2 xi / hbar.
pub fn boundary_factor(spec: &OpenChainSpec, lambda: C64) -> C64 {
    let h = spec.hbar();
    let x = -(real(spec.boundary.block as f64)) - spec.boundary.xi * 2.0 / h;
    -e_fn_c(x, lambda, h)
}

pub fn solve_bethe_open(spec: &OpenChainSpec, magnons: &[usize], cfg: &SolverConfig) -> Result<Vec<Solution>> {
    Ok(open_equations(spec, magnons)?.solve(cfg))
}

fn total_weight(spec: &ChainSpec) -> Vec<i64> {
    (0..spec.rank).map(|k| spec.sites.iter().map(|s| s.weight.alpha()[k]).sum()).collect()
}

/// Dimension of the gl(M) + gl(N-M) multiplet with Cartan weight `w`; zero unless both
/// blocks are dominant.
pub fn open_multiplet_dimension(weight: &[i64], block: usize) -> usize {
    let part = |w: &[i64]| -> usize {
        if w.is_empty() {
            return 1;
        }
        match HighestWeight::new(w.to_vec()) {
            Ok(hw) => weyl_dimension(&hw) as usize,
            Err(_) => 0,
        }
    };
    part(&weight[..block]) * part(&weight[block..])
}

/// Sectors whose Bethe-state weight is dominant for gl(M) + gl(N-M).
pub fn enumerate_open_sectors(spec: &OpenChainSpec) -> Vec<Vec<usize>> {
    let n = spec.rank();
    let a = total_weight(&spec.bulk);
    // sum_{j<=k} w_j is at least the sum over sites of the k smallest weight entries
    let bounds: Vec<usize> = (1..n)
        .map(|k| {
            let partial: i64 = a[..k].iter().sum();
            let least: i64 = spec.bulk.sites.iter().map(|s| s.weight.alpha()[n - k..].iter().sum::<i64>()).sum();
            (partial - least).max(0) as usize
        })
        .collect();
    let mut out = Vec::new();
    let mut cur = vec![0usize; n - 1];
    loop {
        let w = crate::spectrum::sector_weight(&spec.bulk, &cur);
        if open_multiplet_dimension(&w, spec.boundary.block) > 0 {
            out.push(cur.clone());
        }
        // odometer
        let mut i = 0;
        loop {
            if i == cur.len() {
                return out;
            }
            if cur[i] < bounds[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = 0;
            i += 1;
        }
    }
}

pub fn verify_spectrum_open(open: &OpenChain, cfg: &VerifyConfig) -> Result<SpectralReport> {
    let spec = open.spec();
    let h = spec.hbar();
    let n = spec.rank();
    let sectors = cfg.sectors.clone().unwrap_or_else(|| enumerate_open_sectors(&spec));
    let mut solved = Vec::new();
    let mut poles: Vec<C64> = (0..=n).map(|k| h * (k as f64 / 2.0)).collect();
    poles.extend(inverse_singular_points(&open.drinfeld, h));
    for m in sectors {
        let solutions = solve_bethe_open(&spec, &m, &cfg.solver)?;
        for s in &solutions {
            poles.extend(open_eigenvalue_poles(&s.roots, h));
        }
        let weight = crate::spectrum::sector_weight(&spec.bulk, &m);
        solved.push(SolvedSector {
            multiplet_dimension: open_multiplet_dimension(&weight, spec.boundary.block),
            magnons: m,
            weight,
            solutions,
        });
    }
    let count = cfg.samples.max(spec.bulk.len() + 1);
    let points = sample_points(h, count, &poles, 0.05, cfg.solver.seed);
    let irreducible = tensor_irreducible(
        &spec.bulk.sites.iter().map(|s| (s.weight.clone(), s.shift)).collect::<Vec<_>>(),
        h,
    )
    .irreducible;
    let p = open.drinfeld.clone();
    let b = spec.boundary.clone();
    match_spectrum(
        ChainKind::Open,
        irreducible,
        solved,
        points,
        |l| open.b_transfer_hat(l),
        |s, l| open_eigenvalue_with(&p, &b, h, &s.roots, l),
        cfg.match_tol,
        cfg.solver.seed,
    )
}
