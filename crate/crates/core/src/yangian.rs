//! R-matrix, evaluation Lax operators, normalized monodromy and transfer
//! matrices, antisymmetrizer and quantum determinant.
//!
//! Operators on aux (x) quantum are kept as N x N blocks of quantum-space
//! matrices ([`BlockOp`]); the dense form orders indices as aux-major.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, chebyshev_nodes, eye, interpolate_matrices, kron, permutation, real, CMat, C64};
use crate::par;
use crate::rep_gl::{build_irrep, HighestWeight, RepMatrices, DEFAULT_SITE_CAP};

pub const DEFAULT_TOTAL_CAP: usize = 4096;
/// Largest dense dimension allowed for the N-fold auxiliary products of the quantum determinant.
pub const QDET_CAP: usize = 8192;

const POLE_EPS: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub weight: HighestWeight,
    pub shift: C64,
}

impl Site {
    pub fn new(weight: HighestWeight, shift: C64) -> Self {
        Site { weight, shift }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Caps {
    pub site: usize,
    pub total: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { site: DEFAULT_SITE_CAP, total: DEFAULT_TOTAL_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub rank: usize,
    pub hbar: C64,
    pub sites: Vec<Site>,
}

impl ChainSpec {
    pub fn new(rank: usize, hbar: C64, sites: Vec<Site>) -> Result<Self> {
        if rank == 0 {
            return Err(Error::ZeroRank);
        }
        if sites.is_empty() {
            return Err(Error::EmptyChain);
        }
        if hbar.norm() == 0.0 {
            return Err(Error::ZeroHbar);
        }
        for s in &sites {
            if s.weight.rank() != rank {
                return Err(Error::RankMismatch { rank, got: s.weight.rank() });
            }
        }
        Ok(ChainSpec { rank, hbar, sites })
    }

    /// ell sites of the same weight, all shifts zero.
    pub fn uniform(weight: HighestWeight, ell: usize, hbar: C64) -> Result<Self> {
        let rank = weight.rank();
        Self::new(rank, hbar, vec![Site::new(weight, real(0.0)); ell])
    }

    pub fn fundamental(rank: usize, ell: usize, hbar: C64) -> Result<Self> {
        Self::uniform(HighestWeight::fundamental(rank), ell, hbar)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn max_shift(&self) -> f64 {
        self.sites.iter().map(|s| s.shift.norm()).fold(0.0, f64::max)
    }

    pub fn all_fundamental(&self) -> bool {
        self.sites.iter().all(|s| s.weight.is_fundamental())
    }
}

/// N x N array of quantum-space operators.
#[derive(Debug, Clone)]
pub struct BlockOp {
    pub n: usize,
    pub d: usize,
    pub blocks: Vec<CMat>,
}

impl BlockOp {
    pub fn identity(n: usize, d: usize) -> Self {
        let blocks = (0..n * n).map(|k| if k / n == k % n { eye(d) } else { CMat::zeros(d, d) }).collect();
        BlockOp { n, d, blocks }
    }

    pub fn get(&self, i: usize, j: usize) -> &CMat {
        &self.blocks[i * self.n + j]
    }

    /// Product in the auxiliary space (quantum operators multiplied in order).
    pub fn mul(&self, other: &BlockOp) -> BlockOp {
        let n = self.n;
        let blocks = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                let mut acc = CMat::zeros(self.d, self.d);
                for m in 0..n {
                    acc += self.get(i, m) * other.get(m, j);
                }
                acc
            })
            .collect();
        BlockOp { n, d: self.d, blocks }
    }

    pub fn trace(&self) -> CMat {
        let mut acc = CMat::zeros(self.d, self.d);
        for i in 0..self.n {
            acc += self.get(i, i);
        }
        acc
    }

    pub fn to_full(&self) -> CMat {
        let (n, d) = (self.n, self.d);
        let mut out = CMat::zeros(n * d, n * d);
        for i in 0..n {
            for j in 0..n {
                out.view_mut((i * d, j * d), (d, d)).copy_from(self.get(i, j));
            }
        }
        out
    }

    pub fn from_full(n: usize, full: &CMat) -> BlockOp {
        let d = full.nrows() / n;
        let blocks = (0..n * n)
            .map(|k| full.view(((k / n) * d, (k % n) * d), (d, d)).into_owned())
            .collect();
        BlockOp { n, d, blocks }
    }

    /// Blocks of a local operator on aux (x) site `site`, given aux-major as an (n d_site)^2 matrix.
    pub fn from_local(local: &CMat, n: usize, dims: &[usize], site: usize) -> BlockOp {
        let d = dims[site];
        let left: usize = dims[..site].iter().product();
        let right: usize = dims[site + 1..].iter().product();
        let blocks = (0..n * n)
            .map(|k| linalg::embed(&local.view(((k / n) * d, (k % n) * d), (d, d)).into_owned(), left, right))
            .collect();
        BlockOp { n, d: left * d * right, blocks }
    }

    pub fn scale(&self, c: C64) -> BlockOp {
        BlockOp { n: self.n, d: self.d, blocks: self.blocks.iter().map(|b| b * c).collect() }
    }

    /// Embed as an operator on (C^N)^{(x) copies} (x) quantum acting on auxiliary copy `pos`.
    pub fn embed_aux(&self, copies: usize, pos: usize) -> CMat {
        let n = self.n;
        let left = n.pow(pos as u32);
        let right = n.pow((copies - pos - 1) as u32);
        let dim = n.pow(copies as u32) * self.d;
        let mut out = CMat::zeros(dim, dim);
        for i in 0..n {
            for j in 0..n {
                let b = self.get(i, j);
                if b.iter().all(|z| z.norm() == 0.0) {
                    continue;
                }
                let aux = linalg::embed(&linalg::elementary(n, i, j), left, right);
                out += kron(&aux, b);
            }
        }
        out
    }
}

/// Polynomial in lambda with matrix coefficients, lowest degree first.
#[derive(Debug, Clone)]
pub struct OperatorPoly {
    pub coeffs: Vec<CMat>,
}

impl OperatorPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, lambda: C64) -> CMat {
        let mut acc = self.coeffs.last().unwrap().clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc * lambda + c;
        }
        acc
    }

    pub fn derivative(&self) -> OperatorPoly {
        if self.coeffs.len() == 1 {
            return OperatorPoly { coeffs: vec![self.coeffs[0].scale(0.0)] };
        }
        OperatorPoly {
            coeffs: self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c * real(k as f64)).collect(),
        }
    }
}

/// R(lambda) = I - hbar P / lambda on C^N (x) C^N.
pub fn r_matrix(lambda: C64, hbar: C64, n: usize) -> Result<CMat> {
    if lambda.norm() < POLE_EPS {
        return Err(Error::Pole(format!("R-matrix at {lambda}")));
    }
    Ok(eye(n * n) - permutation(n) * (hbar / lambda))
}

/// Relative residual of R_ab(la-lb) R_ac(la) R_bc(lb) = R_bc(lb) R_ac(la) R_ab(la-lb).
pub fn yang_baxter_residual(la: C64, lb: C64, hbar: C64, n: usize) -> Result<f64> {
    let rab = kron(&r_matrix(la - lb, hbar, n)?, &eye(n));
    let rbc = kron(&eye(n), &r_matrix(lb, hbar, n)?);
    let swap_bc = linalg::permutation_in(n, 3, 1, 2);
    let rac = &swap_bc * kron(&r_matrix(la, hbar, n)?, &eye(n)) * &swap_bc;
    let lhs = &rab * &rac * &rbc;
    let rhs = &rbc * &rac * &rab;
    Ok(linalg::rel_residual(&lhs, &rhs, rab.norm() * rac.norm() * rbc.norm()))
}

/// zeta(lambda) = (1 - hbar/lambda)(1 + hbar/lambda)
pub fn zeta(lambda: C64, hbar: C64) -> C64 {
    (real(1.0) - hbar / lambda) * (real(1.0) + hbar / lambda)
}

/// Relative residual of R_ab(lambda) R_ba(-lambda) = zeta(lambda) I.
pub fn unitarity_residual(lambda: C64, hbar: C64, n: usize) -> Result<f64> {
    let p = permutation(n);
    let r = r_matrix(lambda, hbar, n)?;
    let rba = &p * r_matrix(-lambda, hbar, n)? * &p;
    let lhs = &r * &rba;
    let rhs = eye(n * n) * zeta(lambda, hbar);
    Ok(linalg::rel_residual(&lhs, &rhs, r.norm() * rba.norm()))
}

/// Single-site L(lambda) = (lambda + a) I - hbar sum E_ij (x) e_ji as a dense aux (x) site matrix.
pub fn lax_hat(rep: &RepMatrices, shift: C64, lambda: C64, hbar: C64) -> CMat {
    let n = rep.rank;
    let d = rep.dim;
    let mut blocks = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut b = rep.gen(j, i) * (-hbar);
            if i == j {
                b += eye(d) * (lambda + shift);
            }
            blocks.push(b);
        }
    }
    BlockOp { n, d, blocks }.to_full()
}

/// The represented chain: irreps per site and their generators embedded in the full quantum space.
#[derive(Debug, Clone)]
pub struct Chain {
    pub spec: ChainSpec,
    pub reps: Vec<RepMatrices>,
    pub dims: Vec<usize>,
    pub dim: usize,
    site_gens: Vec<Vec<CMat>>,
}

impl Chain {
    pub fn new(spec: ChainSpec) -> Result<Self> {
        Self::with_caps(spec, Caps::default())
    }

    pub fn with_caps(spec: ChainSpec, caps: Caps) -> Result<Self> {
        let mut reps: Vec<RepMatrices> = Vec::with_capacity(spec.len());
        for s in &spec.sites {
            match reps.iter().find(|r| r.weight == s.weight) {
                Some(r) => reps.push(r.clone()),
                None => reps.push(build_irrep(&s.weight, caps.site)?),
            }
        }
        let dims: Vec<usize> = reps.iter().map(|r| r.dim).collect();
        let total: u128 = dims.iter().map(|&d| d as u128).product();
        if total > caps.total as u128 {
            return Err(Error::QuantumCap { dim: total, cap: caps.total });
        }
        let dim = total as usize;
        let n = spec.rank;
        let site_gens = (0..reps.len())
            .map(|s| {
                let left: usize = dims[..s].iter().product();
                let right: usize = dims[s + 1..].iter().product();
                (0..n * n).map(|k| linalg::embed(&reps[s].gens[k], left, right)).collect()
            })
            .collect();
        Ok(Chain { spec, reps, dims, dim, site_gens })
    }

    pub fn rank(&self) -> usize {
        self.spec.rank
    }

    pub fn len(&self) -> usize {
        self.spec.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spec.is_empty()
    }

    pub fn hbar(&self) -> C64 {
        self.spec.hbar
    }

    pub fn shift(&self, site: usize) -> C64 {
        self.spec.sites[site].shift
    }

    /// e_ij acting on `site`, embedded in the full quantum space.
    pub fn site_gen(&self, site: usize, i: usize, j: usize) -> &CMat {
        &self.site_gens[site][i * self.rank() + j]
    }

    /// Index of the pseudo-vacuum v+ (tensor product of local highest-weight vectors).
    pub fn vacuum_index(&self) -> usize {
        self.reps.iter().zip(&self.dims).fold(0, |acc, (r, &d)| acc * d + r.hw_index)
    }

    pub fn vacuum(&self) -> DVector<C64> {
        let mut v = DVector::zeros(self.dim);
        v[self.vacuum_index()] = real(1.0);
        v
    }

    /// Lax operator of one site as blocks on the full quantum space.
    pub fn lax_block(&self, site: usize, lambda: C64) -> BlockOp {
        let n = self.rank();
        let h = self.hbar();
        let c = lambda + self.shift(site);
        let blocks = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                let mut b = self.site_gen(site, j, i) * (-h);
                if i == j {
                    for q in 0..self.dim {
                        b[(q, q)] += c;
                    }
                }
                b
            })
            .collect();
        BlockOp { n, d: self.dim, blocks }
    }

    /// T(lambda) = L_1(lambda) ... L_ell(lambda).
    pub fn monodromy_hat(&self, lambda: C64) -> BlockOp {
        let n = self.rank();
        let h = self.hbar();
        let mut t = BlockOp::identity(n, self.dim);
        for site in 0..self.len() {
            let c = lambda + self.shift(site);
            // T'_ij = c T_ij - hbar sum_k T_ik e_jk
            let blocks = (0..n * n)
                .map(|idx| {
                    let (i, j) = (idx / n, idx % n);
                    let mut acc = t.get(i, j) * c;
                    for k in 0..n {
                        acc -= t.get(i, k) * self.site_gen(site, j, k) * h;
                    }
                    acc
                })
                .collect();
            t = BlockOp { n, d: self.dim, blocks };
        }
        t
    }

    pub fn transfer_hat(&self, lambda: C64) -> CMat {
        self.monodromy_hat(lambda).trace()
    }

    /// Interpolation scale for polynomial recovery.
    pub fn node_scale(&self) -> f64 {
        self.len() as f64 + self.spec.max_shift() / self.hbar().norm() + 1.0
    }

    /// Coefficients of the degree-ell operator polynomial t(lambda).
    pub fn transfer_polynomial(&self) -> OperatorPoly {
        let ell = self.len();
        let scale = self.node_scale() * self.hbar().norm();
        let nodes: Vec<C64> = chebyshev_nodes(ell + 1, scale).into_iter().map(real).collect();
        let samples = par::map(&nodes, |&x| self.transfer_hat(x));
        OperatorPoly { coeffs: interpolate_matrices(&nodes, &samples) }
    }

    /// Relative residual of R_ab(la-lb) T_a(la) T_b(lb) = T_b(lb) T_a(la) R_ab(la-lb).
    pub fn rtt_residual(&self, la: C64, lb: C64) -> Result<f64> {
        let n = self.rank();
        let r = kron(&r_matrix(la - lb, self.hbar(), n)?, &eye(self.dim));
        let ta = self.monodromy_hat(la).embed_aux(2, 0);
        let tb = self.monodromy_hat(lb).embed_aux(2, 1);
        let lhs = &r * &ta * &tb;
        let rhs = &tb * &ta * &r;
        Ok(linalg::rel_residual(&lhs, &rhs, r.norm() * ta.norm() * tb.norm()))
    }

    /// T^(1)_ij = -sum_n e^(n)_ji.
    pub fn symmetry_generators(&self) -> Vec<CMat> {
        let n = self.rank();
        (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                let mut acc = CMat::zeros(self.dim, self.dim);
                for s in 0..self.len() {
                    acc -= self.site_gen(s, j, i);
                }
                acc
            })
            .collect()
    }

    fn aux_product_dim(&self, copies: usize) -> Result<usize> {
        let dim = (self.rank() as u128).pow(copies as u32) * self.dim as u128;
        if dim > QDET_CAP as u128 {
            return Err(Error::QuantumCap { dim, cap: QDET_CAP });
        }
        Ok(dim as usize)
    }

    /// T_m(lambda - m hbar + hbar) ... T_1(lambda) on (C^N)^{(x) m} (x) quantum.
    pub fn descending_product(&self, lambda: C64, m: usize) -> Result<CMat> {
        let dim = self.aux_product_dim(m)?;
        let h = self.hbar();
        let mut acc = CMat::identity(dim, dim);
        for k in 0..m {
            let t = self.monodromy_hat(lambda - h * real(k as f64)).embed_aux(m, k);
            acc = t * acc;
        }
        Ok(acc)
    }

    /// T_1(lambda) ... T_m(lambda - m hbar + hbar).
    pub fn ascending_product(&self, lambda: C64, m: usize) -> Result<CMat> {
        let dim = self.aux_product_dim(m)?;
        let h = self.hbar();
        let mut acc = CMat::identity(dim, dim);
        for k in 0..m {
            let t = self.monodromy_hat(lambda - h * real(k as f64)).embed_aux(m, k);
            acc *= t;
        }
        Ok(acc)
    }

    /// Quantum determinant through the rank-one antisymmetrizer.
    pub fn qdet_antisym(&self, lambda: C64) -> Result<Qdet> {
        let n = self.rank();
        let q = self.descending_product(lambda, n)?;
        let eps = antisymmetric_vector(n);
        let d = self.dim;
        // (eps (x) I) as a (N^N d) x d isometry
        let mut iso = CMat::zeros(eps.len() * d, d);
        for (a, &e) in eps.iter().enumerate() {
            if e.norm() == 0.0 {
                continue;
            }
            for r in 0..d {
                iso[(a * d + r, r)] = e;
            }
        }
        let qe = &q * &iso;
        let c_op = iso.adjoint() * &qe;
        let v = self.vacuum_index();
        let value = c_op[(v, v)];
        let leak = (&qe - &iso * &c_op).norm();
        let nonscalar = (&c_op - eye(d) * value).norm();
        let scale = q.norm().max(value.norm()).max(f64::MIN_POSITIVE);
        Ok(Qdet { value, centrality_residual: (leak + nonscalar) / scale })
    }

    /// Fused transfer matrix tr_{a_1..a_N} T_N(lambda - N hbar + hbar) ... T_1(lambda) (1 - A_N).
    pub fn fused_transfer(&self, lambda: C64) -> Result<CMat> {
        let n = self.rank();
        let q = self.descending_product(lambda, n)?;
        let a = kron(&antisymmetrizer(n, n)?, &eye(self.dim));
        let m = &q - &q * &a;
        Ok(partial_trace_front(&m, n.pow(n as u32), self.dim))
    }

    /// Residuals of A T_1...T_m A = T_m...T_1 A = A T_1...T_m.
    pub fn antisymmetrizer_ordering_residual(&self, lambda: C64, m: usize) -> Result<f64> {
        let n = self.rank();
        let a = kron(&antisymmetrizer(m, n)?, &eye(self.dim));
        let asc = self.ascending_product(lambda, m)?;
        let desc = self.descending_product(lambda, m)?;
        let lhs = &a * &asc * &a;
        let mid = &desc * &a;
        let right = &a * &asc;
        let scale = asc.norm().max(f64::MIN_POSITIVE);
        Ok(((&lhs - &mid).norm() + (&mid - &right).norm()) / scale)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Qdet {
    pub value: C64,
    /// Relative deviation of the product from (scalar) x A_N on the full space.
    pub centrality_residual: f64,
}

/// Trace over the leading factor of dimension `a` in C^a (x) C^d.
pub fn partial_trace_front(m: &CMat, a: usize, d: usize) -> CMat {
    let mut out = CMat::zeros(d, d);
    for k in 0..a {
        out += m.view((k * d, k * d), (d, d));
    }
    out
}

fn permutation_sign(p: &[usize]) -> f64 {
    let mut seen = vec![false; p.len()];
    let mut sign = 1.0;
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = p[x];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

/// A_m on (C^n)^{(x) m}: (1/m!) sum sgn(s) of the factor permutations.
pub fn antisymmetrizer(m: usize, n: usize) -> Result<CMat> {
    if m == 0 || m > n {
        return Err(Error::OutOfRange { what: "antisymmetrizer order", value: m });
    }
    let dim = n.pow(m as u32);
    let perms = permutations(m);
    let mut out = CMat::zeros(dim, dim);
    let mut digits = vec![0usize; m];
    for idx in 0..dim {
        let mut r = idx;
        for k in (0..m).rev() {
            digits[k] = r % n;
            r /= n;
        }
        for p in &perms {
            let mut target = 0;
            for k in 0..m {
                target = target * n + digits[p[k]];
            }
            out[(target, idx)] += real(permutation_sign(p));
        }
    }
    let fact: f64 = (1..=m).map(|k| k as f64).product();
    Ok(out / real(fact))
}

/// Normalized vector spanning the image of A_n on (C^n)^{(x) n}.
pub fn antisymmetric_vector(n: usize) -> Vec<C64> {
    let dim = n.pow(n as u32);
    let mut v = vec![real(0.0); dim];
    let perms = permutations(n);
    let norm = (perms.len() as f64).sqrt();
    for p in &perms {
        let idx = p.iter().fold(0, |acc, &x| acc * n + x);
        v[idx] = real(permutation_sign(p) / norm);
    }
    v
}
