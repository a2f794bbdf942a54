//! Example Hamiltonians: logarithmic derivative of the closed transfer matrix, the XXX,
//! impurity, spin-s and alternating displays, the open-chain derivative and the chain with
//! spin-1/2 ends and a spin-1 bulk built from fused R-matrices.

use serde::Serialize;

use crate::bethe::{BetheRoots, EFactor};
use crate::boundary::{open_equations, open_eigenvalue, OpenChain, OpenChainSpec, ReflectionSpec};
use crate::diag::SpectralReport;
use crate::error::{Error, Result};
use crate::linalg::{c64, condition_number, eigenvalues, eye, fro, kron, real, CMat, C64};
use crate::rep_gl::{build_irrep, HighestWeight, RepMatrices, DEFAULT_SITE_CAP};
use crate::spectrum::{eigenvalue_closed, verify_spectrum_closed, VerifyConfig};
use crate::yangian::{BlockOp, Chain, ChainSpec, Site};

/// Finite-difference step (in units of |hbar|) for derivatives of open transfer matrices.
pub const DERIVATIVE_STEP: f64 = 1e-5;
const COND_GUARD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Source {
    LogDerivative,
    XxxDisplay,
    ImpurityDisplay,
    ImpurityCorrected,
    SpinS,
    AlternatingDisplay,
    OpenDerivative,
    Zarembo,
}

#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    pub matrix: CMat,
    pub source: Source,
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues sorted by real part.
    pub fn spectrum(&self) -> Vec<C64> {
        let mut ev = eigenvalues(&self.matrix);
        ev.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        ev
    }
}

/// target ~ scale * source + offset * I in the least-squares sense.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AffineFit {
    pub scale: C64,
    pub offset: C64,
    /// |target - scale source - offset| / |target|
    pub residual: f64,
}

pub fn affine_fit(target: &CMat, source: &CMat) -> AffineFit {
    let d = target.nrows() as f64;
    let ss: C64 = source.iter().map(|z| real(z.norm_sqr())).sum();
    let tr_s = source.trace();
    let st: C64 = source.iter().zip(target.iter()).map(|(a, b)| a.conj() * b).sum();
    let tr_t = target.trace();
    // [ss, conj(tr_s); tr_s, d] (scale, offset) = (st, tr_t)
    let det = ss * d - tr_s.conj() * tr_s;
    let (scale, offset) = if det.norm() <= 1e-14 * ss.norm() * d {
        (real(0.0), tr_t / d)
    } else {
        ((st * d - tr_s.conj() * tr_t) / det, (ss * tr_t - tr_s * st) / det)
    };
    let r = target - source * scale - eye(target.nrows()) * offset;
    AffineFit { scale, offset, residual: fro(&r) / fro(target).max(1e-300) }
}

/// Symmetric difference quotient at `at` with one Richardson step: (4 D(h) - D(2h)) / 3.
pub fn richardson_derivative<F>(f: F, at: C64, step: C64) -> Result<CMat>
where
    F: Fn(C64) -> Result<CMat>,
{
    let quotient = |h: C64| -> Result<CMat> { Ok((f(at + h)? - f(at - h)?) / (h * 2.0)) };
    let d1 = quotient(step)?;
    let d2 = quotient(step * 2.0)?;
    Ok((d1 * real(4.0) - d2) / real(3.0))
}

/// Scalar version of [`richardson_derivative`].
pub fn richardson_derivative_scalar<F>(f: F, at: C64, step: C64) -> Result<C64>
where
    F: Fn(C64) -> Result<C64>,
{
    let quotient = |h: C64| -> Result<C64> { Ok((f(at + h)? - f(at - h)?) / (h * 2.0)) };
    Ok((quotient(step)? * 4.0 - quotient(step * 2.0)?) / 3.0)
}

/// t(l) and t'(l), exact (every Lax operator is linear in l with unit slope).
pub fn transfer_with_derivative(chain: &Chain, lambda: C64) -> (CMat, CMat) {
    let (n, d) = (chain.rank(), chain.dim);
    let mut v = BlockOp::identity(n, d);
    let mut w = BlockOp { n, d, blocks: vec![CMat::zeros(d, d); n * n] };
    for site in 0..chain.len() {
        let l = chain.lax_block(site, lambda);
        let wl = w.mul(&l);
        w = BlockOp { n, d, blocks: wl.blocks.iter().zip(&v.blocks).map(|(a, b)| a + b).collect() };
        v = v.mul(&l);
    }
    (v.trace(), w.trace())
}

/// t(at)^{-1} t'(at) for any chain with t(at) invertible.
pub fn transfer_log_derivative(chain: &Chain, at: C64) -> Result<HamiltonianMatrix> {
    let (t, dt) = transfer_with_derivative(chain, at);
    if condition_number(&t) > COND_GUARD {
        return Err(Error::Singular(format!("t({at})")));
    }
    let matrix = t.lu().solve(&dt).ok_or_else(|| Error::Singular(format!("t({at})")))?;
    Ok(HamiltonianMatrix { matrix, source: Source::LogDerivative })
}

/// d/dl ln t(l) at l = 0; defined for fundamental sites, where t(0) is invertible.
pub fn closed_log_derivative_hamiltonian(chain: &Chain) -> Result<HamiltonianMatrix> {
    if !chain.spec.all_fundamental() {
        return Err(Error::Unsupported("log-derivative Hamiltonian needs fundamental sites".into()));
    }
    transfer_log_derivative(chain, real(0.0))
}

/// P_pq = sum_ij e_ij^(p) e_ji^(q); the permutation when both sites are fundamental.
pub fn site_permutation(chain: &Chain, p: usize, q: usize) -> CMat {
    let n = chain.rank();
    let mut acc = CMat::zeros(chain.dim, chain.dim);
    for i in 0..n {
        for j in 0..n {
            acc += chain.site_gen(p, i, j) * chain.site_gen(q, j, i);
        }
    }
    acc
}

/// A.B = 2 A+ B- + 2 A- B+ + Az Bz with A+ = e12, A- = e21, Az = e11 - e22, so that A = 2s
/// for spin-s generators s.
pub fn pauli_dot(chain: &Chain, p: usize, q: usize) -> CMat {
    let g = |s: usize, i: usize, j: usize| chain.site_gen(s, i, j);
    let zp = g(p, 0, 0) - g(p, 1, 1);
    let zq = g(q, 0, 0) - g(q, 1, 1);
    (g(p, 0, 1) * g(q, 1, 0) + g(p, 1, 0) * g(q, 0, 1)) * real(2.0) + zp * zq
}

/// s_p . s_q with the usual spin normalization.
pub fn spin_dot(chain: &Chain, p: usize, q: usize) -> CMat {
    pauli_dot(chain, p, q) * real(0.25)
}

/// Site index (0-based) of the 1-based periodic position n.
fn wrap(n: i64, ell: usize) -> usize {
    (n - 1).rem_euclid(ell as i64) as usize
}

/// 1/2 sum_n (sigma_{n-1}.sigma_n + 1) on the fundamental gl(2) chain.
pub fn xxx_display(ell: usize, hbar: C64) -> Result<HamiltonianMatrix> {
    let chain = Chain::new(ChainSpec::fundamental(2, ell, hbar)?)?;
    let mut h = CMat::zeros(chain.dim, chain.dim);
    for n in 1..=ell as i64 {
        h += (pauli_dot(&chain, wrap(n - 1, ell), wrap(n, ell)) + eye(chain.dim)) * real(0.5);
    }
    Ok(HamiltonianMatrix { matrix: h, source: Source::XxxDisplay })
}

/// Fundamental chain with shift `a_p` on site p (1-based), all other shifts zero.
pub fn impurity_chain(rank: usize, ell: usize, p: usize, a_p: C64, hbar: C64) -> Result<ChainSpec> {
    if p == 0 || p > ell {
        return Err(Error::OutOfRange { what: "impurity site", value: p });
    }
    let mut spec = ChainSpec::fundamental(rank, ell, hbar)?;
    spec.sites[p - 1].shift = a_p;
    Ok(spec)
}

struct ImpurityTerms {
    chain: Chain,
    bulk: CMat,
    p_prev_next: CMat,
    p_prev_p: CMat,
    p_next_p: CMat,
    d: C64,
}

fn impurity_terms(ell: usize, p: usize, a_p: C64, hbar: C64) -> Result<ImpurityTerms> {
    if ell < 3 {
        return Err(Error::Invalid("impurity Hamiltonian needs at least 3 sites".into()));
    }
    let chain = Chain::new(impurity_chain(2, ell, p, a_p, hbar)?)?;
    let d = a_p * a_p - hbar * hbar;
    if d.norm() < 1e-12 * hbar.norm_sqr() {
        return Err(Error::Pole(format!("a_p = {a_p}")));
    }
    let pi = p as i64;
    let mut bulk = CMat::zeros(chain.dim, chain.dim);
    for n in 1..=ell as i64 {
        let site = wrap(n, ell);
        if site == wrap(pi, ell) || site == wrap(pi + 1, ell) {
            continue;
        }
        bulk += site_permutation(&chain, wrap(n - 1, ell), site);
    }
    let (prev, cur, next) = (wrap(pi - 1, ell), wrap(pi, ell), wrap(pi + 1, ell));
    Ok(ImpurityTerms {
        p_prev_next: site_permutation(&chain, prev, next),
        p_prev_p: site_permutation(&chain, prev, cur),
        p_next_p: site_permutation(&chain, next, cur),
        chain,
        bulk,
        d,
    })
}

/// The displayed one-impurity Hamiltonian, taken literally:
/// sum' P_{n-1,n} - hbar/(a-hbar) + (a^2 P_{p-1,p+1} - hbar^2 P_{p+1,p})/d
/// + hbar a/d P_{p-1,p+1}(P_{p-1,p} - P_{p+1,p}), d = a^2 - hbar^2.
pub fn impurity_hamiltonian_display(ell: usize, p: usize, a_p: C64, hbar: C64) -> Result<HamiltonianMatrix> {
    let t = impurity_terms(ell, p, a_p, hbar)?;
    let id = eye(t.chain.dim);
    let m = &t.bulk - id * (hbar / (a_p - hbar))
        + (&t.p_prev_next * (a_p * a_p) - &t.p_next_p * (hbar * hbar)) / t.d
        + &t.p_prev_next * (&t.p_prev_p - &t.p_next_p) * (hbar * a_p / t.d);
    Ok(HamiltonianMatrix { matrix: m, source: Source::ImpurityDisplay })
}

/// Same expansion with the constant -hbar^2/d replaced by -hbar^2/d P_{p-1,p}; this one
/// equals -hbar times the logarithmic derivative of the transfer matrix.
pub fn impurity_hamiltonian_corrected(ell: usize, p: usize, a_p: C64, hbar: C64) -> Result<HamiltonianMatrix> {
    let t = impurity_terms(ell, p, a_p, hbar)?;
    let id = eye(t.chain.dim);
    let m = &t.bulk - id * (hbar * a_p / t.d) - &t.p_prev_p * (hbar * hbar / t.d)
        + (&t.p_prev_next * (a_p * a_p) - &t.p_next_p * (hbar * hbar)) / t.d
        + &t.p_prev_next * (&t.p_prev_p - &t.p_next_p) * (hbar * a_p / t.d);
    Ok(HamiltonianMatrix { matrix: m, source: Source::ImpurityCorrected })
}

/// Nodes (x_l, h_l) of Q_{2s}: x_l = (l(l+1) - 2s(s+1))/2, h_l = sum_{k<=l} 1/k.
pub fn q_nodes(two_s: usize) -> Vec<(f64, f64)> {
    let s = two_s as f64 / 2.0;
    let mut h = 0.0;
    (0..=two_s)
        .map(|l| {
            if l > 0 {
                h += 1.0 / l as f64;
            }
            let lf = l as f64;
            (0.5 * (lf * (lf + 1.0) - 2.0 * s * (s + 1.0)), h)
        })
        .collect()
}

/// Q_{2s}(x) by Lagrange interpolation through [`q_nodes`].
pub fn q_eval(two_s: usize, x: f64) -> f64 {
    let nodes = q_nodes(two_s);
    nodes
        .iter()
        .enumerate()
        .map(|(j, &(xj, hj))| {
            hj * nodes.iter().enumerate().filter(|&(l, _)| l != j).map(|(_, &(xl, _))| (x - xl) / (xj - xl)).product::<f64>()
        })
        .sum()
}

fn q_matrix(two_s: usize, x: &CMat) -> CMat {
    let nodes = q_nodes(two_s);
    let d = x.nrows();
    let mut acc = CMat::zeros(d, d);
    for (j, &(xj, hj)) in nodes.iter().enumerate() {
        if hj == 0.0 {
            continue;
        }
        let mut term = eye(d) * real(hj);
        for (l, &(xl, _)) in nodes.iter().enumerate() {
            if l != j {
                term = term * (x - eye(d) * real(xl)) / real(xj - xl);
            }
        }
        acc += term;
    }
    acc
}

/// sum_n Q_{2s}(s_{n-1}.s_n) on ell sites of spin s = two_s/2, periodic.
pub fn spin_s_hamiltonian(ell: usize, two_s: usize, hbar: C64) -> Result<HamiltonianMatrix> {
    if two_s == 0 {
        return Err(Error::Invalid("2s must be a positive integer".into()));
    }
    let chain = Chain::new(ChainSpec::uniform(HighestWeight::spin(two_s as i64), ell, hbar)?)?;
    let mut h = CMat::zeros(chain.dim, chain.dim);
    for n in 1..=ell as i64 {
        h += q_matrix(two_s, &spin_dot(&chain, wrap(n - 1, ell), wrap(n, ell)));
    }
    Ok(HamiltonianMatrix { matrix: h, source: Source::SpinS })
}

/// E = -sum_j s / (u_j^2 + s^2) with u_j = (l_j + hbar (1 - 2s)/2) / (i hbar), the rapidity in
/// which the spin-s Bethe equations take the form ((u + i s)/(u - i s))^ell.
///
/// Roots sitting exactly at u = +-i s (singular strings) are regularized symmetrically: the
/// divergent parts of a +i s / -i s pair cancel and each contributes its finite part 1/(4s).
/// An unpaired pole root gives NaN.
pub fn spin_s_energy(roots: &[C64], two_s: usize, hbar: C64) -> C64 {
    let s = two_s as f64 / 2.0;
    let ih = c64(0.0, 1.0) * hbar;
    let tol = 1e-6;
    let (mut up, mut down) = (0usize, 0usize);
    let mut e = real(0.0);
    for &l in roots {
        let u = (l + hbar * ((1.0 - 2.0 * s) / 2.0)) / ih;
        if (u - c64(0.0, s)).norm() < tol {
            up += 1;
            e -= real(1.0 / (4.0 * s));
        } else if (u + c64(0.0, s)).norm() < tol {
            down += 1;
            e -= real(1.0 / (4.0 * s));
        } else {
            e -= real(s) / (u * u + s * s);
        }
    }
    if up != down {
        return c64(f64::NAN, f64::NAN);
    }
    e
}

/// Bethe energies paired with the Hamiltonian's value on the matched eigenspace.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyCheck {
    /// (predicted energy, Hamiltonian eigenvalue)
    pub pairs: Vec<(C64, C64)>,
    pub scale: C64,
    pub offset: C64,
    /// max |scale E + offset - h| over all pairs
    pub max_error: f64,
    /// Matched solutions whose energy is not finite (roots at the poles of E).
    pub skipped: usize,
}

/// (roots, value of H on the branch) for every matched solution of a report.
pub fn branch_values(report: &SpectralReport, h: &CMat) -> Vec<(BetheRoots, C64)> {
    let mut out = Vec::new();
    for sector in &report.sectors {
        for sol in &sector.solutions {
            if let Some(b) = sol.branch {
                let v = &report.bases[b];
                let val = (v.adjoint() * h * v).trace() / real(v.ncols() as f64);
                out.push((BetheRoots { magnons: sector.magnons.clone(), roots: sol.roots.clone() }, val));
            }
        }
    }
    out
}

fn fit_pairs(pairs: Vec<(C64, C64)>, skipped: usize, affine: bool) -> EnergyCheck {
    let (scale, offset) = if !affine || pairs.len() < 2 {
        (real(1.0), real(0.0))
    } else {
        // the two levels with the most distant energies fix the map
        let lo = pairs.iter().min_by(|a, b| a.0.re.partial_cmp(&b.0.re).unwrap()).unwrap();
        let hi = pairs.iter().max_by(|a, b| a.0.re.partial_cmp(&b.0.re).unwrap()).unwrap();
        let scale = (hi.1 - lo.1) / (hi.0 - lo.0);
        (scale, lo.1 - scale * lo.0)
    };
    let max_error = pairs.iter().map(|(e, h)| (scale * e + offset - h).norm()).fold(0.0, f64::max);
    EnergyCheck { pairs, scale, offset, max_error, skipped }
}

/// Affine consistency between the spin-s energy formula and the Q_{2s} Hamiltonian.
pub fn spin_s_energy_check(ell: usize, two_s: usize, hbar: C64, cfg: &VerifyConfig) -> Result<EnergyCheck> {
    let chain = Chain::new(ChainSpec::uniform(HighestWeight::spin(two_s as i64), ell, hbar)?)?;
    let report = verify_spectrum_closed(&chain, cfg)?;
    let h = spin_s_hamiltonian(ell, two_s, hbar)?;
    let mut skipped = 0;
    let mut pairs = Vec::new();
    for (roots, val) in branch_values(&report, &h.matrix) {
        let e = spin_s_energy(&roots.flat(), two_s, hbar);
        if e.is_finite() && e.norm() < 1e8 {
            pairs.push((e, val));
        } else {
            skipped += 1;
        }
    }
    Ok(fit_pairs(pairs, skipped, true))
}

/// Lambda'(0)/Lambda(0) of a closed-chain Bethe state.
pub fn closed_energy(spec: &ChainSpec, roots: &BetheRoots) -> Result<C64> {
    let step = spec.hbar * DERIVATIVE_STEP;
    let l0 = eigenvalue_closed(spec, roots, real(0.0))?;
    Ok(richardson_derivative_scalar(|l| eigenvalue_closed(spec, roots, l), real(0.0), step)? / l0)
}

/// Closed log-derivative Hamiltonian against the Bethe energies, without any fit.
pub fn closed_energy_check(chain: &Chain, cfg: &VerifyConfig) -> Result<EnergyCheck> {
    let report = verify_spectrum_closed(chain, cfg)?;
    let h = closed_log_derivative_hamiltonian(chain)?;
    let mut pairs = Vec::new();
    let mut skipped = 0;
    for (roots, val) in branch_values(&report, &h.matrix) {
        // singular strings put a pole of the dressing at 0
        match closed_energy(&chain.spec, &roots) {
            Ok(e) if e.is_finite() => pairs.push((e, val)),
            _ => skipped += 1,
        }
    }
    Ok(fit_pairs(pairs, skipped, false))
}

/// Sites n = 1..2 ell_tilde: fundamental for even n, weight (2, 0, ..) for odd n, no shifts.
pub fn alternating_chain(rank: usize, ell_tilde: usize, hbar: C64) -> Result<ChainSpec> {
    if ell_tilde == 0 {
        return Err(Error::EmptyChain);
    }
    let mut two = vec![0i64; rank];
    two[0] = 2;
    let odd = HighestWeight::with_rank(rank, two)?;
    let sites = (1..=2 * ell_tilde)
        .map(|n| Site::new(if n % 2 == 0 { HighestWeight::fundamental(rank) } else { odd.clone() }, real(0.0)))
        .collect();
    ChainSpec::new(rank, hbar, sites)
}

/// The displayed alternating gl(2) Hamiltonian, taken literally (sigma Pauli on even sites,
/// s spin-1 on odd sites, periodic).
pub fn alternating_hamiltonian_gl2(ell_tilde: usize, hbar: C64) -> Result<HamiltonianMatrix> {
    let chain = Chain::new(alternating_chain(2, ell_tilde, hbar)?)?;
    let ell = 2 * ell_tilde;
    let id = eye(chain.dim);
    // sigma.s = 2 (s_1/2 . s), s.s between spin-1 sites as is
    let sig_s = |p: i64, q: i64| pauli_dot(&chain, wrap(p, ell), wrap(q, ell)) * real(0.5);
    let s_s = |p: i64, q: i64| spin_dot(&chain, wrap(p, ell), wrap(q, ell));
    let mut h = CMat::zeros(chain.dim, chain.dim);
    for j in 1..=ell_tilde as i64 {
        let a = sig_s(2 * j, 2 * j + 1) * real(2.0) + &id;
        let b = sig_s(2 * j + 2, 2 * j + 1) * real(2.0) + &id * real(3.0);
        let c = sig_s(2 * j, 2 * j - 1) * real(2.0) + &id;
        let inner = (s_s(2 * j - 1, 2 * j + 1) + &id) * &a + &id * real(2.0);
        h += &a * b + c * inner;
    }
    Ok(HamiltonianMatrix { matrix: h, source: Source::AlternatingDisplay })
}

/// Log-derivative Hamiltonian of the alternating chain (t(0) is invertible there).
pub fn alternating_log_derivative(ell_tilde: usize, hbar: C64) -> Result<HamiltonianMatrix> {
    let chain = Chain::new(alternating_chain(2, ell_tilde, hbar)?)?;
    transfer_log_derivative(&chain, real(0.0))
}

/// H = -1/2 b'(0) by Richardson-extrapolated central differences.
pub fn open_hamiltonian(open: &OpenChain) -> Result<HamiltonianMatrix> {
    let step = open.hbar() * DERIVATIVE_STEP;
    let d = richardson_derivative(|l| open.b_transfer_hat(l), real(0.0), step)?;
    Ok(HamiltonianMatrix { matrix: d * real(-0.5), source: Source::OpenDerivative })
}

/// -1/2 Lambda'(0) for an open Bethe state.
pub fn open_energy(spec: &OpenChainSpec, roots: &BetheRoots) -> Result<C64> {
    let step = spec.hbar() * DERIVATIVE_STEP;
    Ok(richardson_derivative_scalar(|l| open_eigenvalue(spec, roots, l), real(0.0), step)? * -0.5)
}

/// Open Hamiltonian against -1/2 Lambda'(0) of every matched solution, without any fit.
pub fn open_energy_check(open: &OpenChain, cfg: &VerifyConfig) -> Result<EnergyCheck> {
    let report = crate::boundary::verify_spectrum_open(open, cfg)?;
    let h = open_hamiltonian(open)?;
    let spec = open.spec();
    let mut pairs = Vec::new();
    for (roots, val) in branch_values(&report, &h.matrix) {
        pairs.push((open_energy(&spec, &roots)?, val));
    }
    Ok(fit_pairs(pairs, 0, false))
}

/// Scalar prefactor (l + hbar)(l - 2 hbar) / (2 hbar^2) of the fused spin-1 R-matrix.
pub fn r_one_prefactor(lambda: C64, hbar: C64) -> C64 {
    (lambda + hbar) * (lambda - hbar * 2.0) / (hbar * hbar * 2.0)
}

/// Chain with spin-1/2 sites at both ends and spin-1 sites in between, K = identity.
#[derive(Debug, Clone)]
pub struct Zarembo {
    pub ell: usize,
    pub hbar: C64,
    pub hamiltonian: HamiltonianMatrix,
    /// Weights as listed and all shifts zero.
    pub spec: OpenChainSpec,
    /// The same quantum spaces with every shift hbar/2; b(l) of this chain commutes with H.
    pub shifted_spec: OpenChainSpec,
    pub chain: Chain,
    aux: RepMatrices,
}

fn local_dot(a: &RepMatrices, b: &RepMatrices) -> CMat {
    let za = a.gen(0, 0) - a.gen(1, 1);
    let zb = b.gen(0, 0) - b.gen(1, 1);
    (kron(a.gen(0, 1), b.gen(1, 0)) + kron(a.gen(1, 0), b.gen(0, 1))) * real(2.0) + kron(&za, &zb)
}

fn boundary_identity(hbar: C64) -> ReflectionSpec {
    ReflectionSpec { block: 2, xi: hbar }
}

pub fn zarembo_chain(ell: usize, hbar: C64) -> Result<Zarembo> {
    if ell < 4 {
        return Err(Error::Invalid(format!("needs at least 4 sites, got {ell}")));
    }
    let site = |n: usize, shift: C64| {
        let w = if n == 0 || n == ell - 1 { HighestWeight::fundamental(2) } else { HighestWeight::spin(2) };
        Site::new(w, shift)
    };
    let bulk = ChainSpec::new(2, hbar, (0..ell).map(|n| site(n, real(0.0))).collect())?;
    let shifted = ChainSpec::new(2, hbar, (0..ell).map(|n| site(n, hbar * 0.5)).collect())?;
    let chain = Chain::new(bulk.clone())?;
    let mut h = (pauli_dot(&chain, 0, 1) + pauli_dot(&chain, ell - 2, ell - 1)) * real(2.0);
    for i in 1..ell - 2 {
        let x = pauli_dot(&chain, i, i + 1);
        h += &x - &x * &x * real(0.25);
    }
    Ok(Zarembo {
        ell,
        hbar,
        hamiltonian: HamiltonianMatrix { matrix: h, source: Source::Zarembo },
        spec: OpenChainSpec::new(bulk, boundary_identity(hbar))?,
        shifted_spec: OpenChainSpec::new(shifted, boundary_identity(hbar))?,
        aux: build_irrep(&HighestWeight::spin(2), DEFAULT_SITE_CAP)?,
        chain,
    })
}

impl Zarembo {
    /// R^(1,1/2)(l) = l - hbar/2 S_a.sigma_j on aux (x) site.
    pub fn r_half(&self, lambda: C64) -> CMat {
        let dot = local_dot(&self.aux, &self.chain.reps[0]);
        eye(dot.nrows()) * lambda - dot * (self.hbar * 0.5)
    }

    /// R^(1,1)(l) = p(l) - (l - hbar)/(4 hbar) S_a.S_j + (S_a.S_j)^2 / 16.
    pub fn r_one(&self, lambda: C64) -> CMat {
        let h = self.hbar;
        let dot = local_dot(&self.aux, &self.chain.reps[1]);
        eye(dot.nrows()) * r_one_prefactor(lambda, h) - &dot * ((lambda - h) / (h * 4.0)) + &dot * &dot * real(1.0 / 16.0)
    }

    fn local(&self, site: usize, lambda: C64) -> CMat {
        if site == 0 || site == self.ell - 1 {
            self.r_half(lambda)
        } else {
            self.r_one(lambda)
        }
    }

    /// T(l) = R_{a ell}(l) ... R_{a1}(l) with a spin-1 auxiliary space.
    pub fn fused_monodromy(&self, lambda: C64) -> BlockOp {
        let mut acc = BlockOp::identity(3, self.chain.dim);
        for site in (0..self.ell).rev() {
            acc = acc.mul(&BlockOp::from_local(&self.local(site, lambda), 3, &self.chain.dims, site));
        }
        acc
    }

    /// T(mu)^{-1} = R_{a1}(mu)^{-1} ... R_{a ell}(mu)^{-1}
    pub fn fused_inverse(&self, mu: C64) -> Result<BlockOp> {
        let mut acc = BlockOp::identity(3, self.chain.dim);
        for site in 0..self.ell {
            let r = self.local(site, mu);
            if condition_number(&r) > COND_GUARD {
                return Err(Error::Singular(format!("{mu} (site {})", site + 1)));
            }
            let inv = r.lu().try_inverse().ok_or_else(|| Error::Singular(format!("{mu}")))?;
            acc = acc.mul(&BlockOp::from_local(&inv, 3, &self.chain.dims, site));
        }
        Ok(acc)
    }

    /// b~(l) = Tr_a T(l) T(-l)^{-1}
    pub fn fused_transfer(&self, lambda: C64) -> Result<CMat> {
        Ok(self.fused_monodromy(lambda).mul(&self.fused_inverse(-lambda)?).trace())
    }

    /// d b~/dl at 0.
    pub fn fused_derivative(&self) -> Result<CMat> {
        richardson_derivative(|l| self.fused_transfer(l), real(0.0), self.hbar * DERIVATIVE_STEP)
    }

    /// e-factor form of the level-1 open Bethe equations of `spec` with one magnon.
    pub fn bethe_factors(spec: &OpenChainSpec) -> Result<Vec<EFactor>> {
        let eqs = open_equations(spec, &[1])?;
        let tol = 1e-9 * spec.hbar().norm();
        eqs.rhs[0]
            .clone()
            .reduced(tol)
            .e_factors(spec.hbar(), true, tol)
            .ok_or_else(|| Error::Invalid("right-hand side is not a product of e-functions".into()))
    }
}

/// Exponent of e_x (centered at 0) in a factor list, 0 if absent.
pub fn exponent_of(factors: &[EFactor], x: f64) -> usize {
    factors
        .iter()
        .filter(|f| (f.x - real(x)).norm() < 1e-9 && f.center.norm() < 1e-9)
        .map(|f| f.power)
        .sum()
}

/// Largest relative commutator of `h` with the operators of a family.
pub fn family_commutator(h: &CMat, family: &[CMat]) -> f64 {
    family.iter().map(|t| crate::linalg::rel_commutator(h, t)).fold(0.0, f64::max)
}
