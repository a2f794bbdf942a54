//! Closed chains: Drinfel'd polynomials, dressing functions, Bethe equations and
//! the comparison of Bethe eigenvalues with exact diagonalization.

use serde::Serialize;

use crate::bethe::{BetheEquations, BetheRoots, ChainKind, RationalFn, Solution, SolverConfig};
use crate::diag::{match_spectrum, sample_points, SolvedSector, SpectralReport};
use crate::error::{Error, Result};
use crate::linalg::{poly_from_roots, real, CMat, C64};
use crate::rep_gl::{tensor_irreducible, weyl_dimension, HighestWeight};
use crate::yangian::{Chain, ChainSpec};

const POLE_EPS: f64 = 1e-8;

/// P_k(l) = prod_n (l + a_n - hbar alpha^n_k), stored by roots hbar alpha^n_k - a_n.
#[derive(Debug, Clone, Serialize)]
pub struct DrinfeldPolys {
    pub roots: Vec<Vec<C64>>,
}

impl DrinfeldPolys {
    pub fn rank(&self) -> usize {
        self.roots.len()
    }

    /// P_k with k = 1..N.
    pub fn eval(&self, k: usize, lambda: C64) -> C64 {
        self.roots[k - 1].iter().map(|r| lambda - r).product()
    }

    /// Monic coefficients of P_k, lowest degree first.
    pub fn coefficients(&self, k: usize) -> Vec<C64> {
        poly_from_roots(&self.roots[k - 1])
    }

    /// Zeros of P_k(l + shift) as a function of l.
    pub fn shifted_zeros(&self, k: usize, shift: C64) -> Vec<C64> {
        self.roots[k - 1].iter().map(|r| r - shift).collect()
    }

    /// prod_k P_k(l - hbar N + hbar k)
    pub fn qdet(&self, lambda: C64, hbar: C64) -> C64 {
        let n = self.rank() as f64;
        (1..=self.rank()).map(|k| self.eval(k, lambda - hbar * n + hbar * k as f64)).product()
    }
}

pub fn drinfeld(spec: &ChainSpec) -> DrinfeldPolys {
    let roots = (0..spec.rank)
        .map(|k| spec.sites.iter().map(|s| spec.hbar * s.weight.alpha()[k] as f64 - s.shift).collect())
        .collect();
    DrinfeldPolys { roots }
}

/// Lambda^0(l) = sum_k P_k(l)
pub fn vacuum_eigenvalue(spec: &ChainSpec, lambda: C64) -> C64 {
    let p = drinfeld(spec);
    (1..=spec.rank).map(|k| p.eval(k, lambda)).sum()
}

fn level(roots: &BetheRoots, k: usize) -> &[C64] {
    // levels 0 and N are empty
    if k == 0 || k > roots.roots.len() {
        &[]
    } else {
        &roots.roots[k - 1]
    }
}

/// D_k(l), k = 1..N.
pub fn dressing_closed(roots: &BetheRoots, k: usize, lambda: C64, hbar: C64) -> Result<C64> {
    let kf = k as f64;
    let mut v = real(1.0);
    for &r in level(roots, k - 1) {
        let den = lambda - r - hbar * ((kf - 1.0) / 2.0);
        if den.norm() < POLE_EPS {
            return Err(Error::Pole(format!("{lambda} (D_{k}, level {})", k - 1)));
        }
        v *= (lambda - r - hbar * ((kf + 1.0) / 2.0)) / den;
    }
    for &r in level(roots, k) {
        let den = lambda - r - hbar * (kf / 2.0);
        if den.norm() < POLE_EPS {
            return Err(Error::Pole(format!("{lambda} (D_{k}, level {k})")));
        }
        v *= (lambda - r - hbar * ((kf - 2.0) / 2.0)) / den;
    }
    Ok(v)
}

/// Lambda(l) = sum_k P_k(l) D_k(l)
pub fn eigenvalue_closed(spec: &ChainSpec, roots: &BetheRoots, lambda: C64) -> Result<C64> {
    eigenvalue_with(&drinfeld(spec), spec.hbar, roots, lambda)
}

fn eigenvalue_with(p: &DrinfeldPolys, hbar: C64, roots: &BetheRoots, lambda: C64) -> Result<C64> {
    let mut v = real(0.0);
    for k in 1..=p.rank() {
        v += p.eval(k, lambda) * dressing_closed(roots, k, lambda, hbar)?;
    }
    Ok(v)
}

/// Apparent poles l^(k)_n + hbar k / 2 of the eigenvalue.
pub fn eigenvalue_poles(roots: &BetheRoots, hbar: C64) -> Vec<C64> {
    roots
        .roots
        .iter()
        .enumerate()
        .flat_map(|(k, lv)| lv.iter().map(move |&r| r + hbar * ((k + 1) as f64 / 2.0)))
        .collect()
}

/// Bethe equations of sector `magnons` (length N-1).
pub fn closed_equations(spec: &ChainSpec, magnons: &[usize]) -> Result<BetheEquations> {
    if magnons.len() + 1 != spec.rank {
        return Err(Error::RankMismatch { rank: spec.rank - 1, got: magnons.len() });
    }
    let p = drinfeld(spec);
    let tol = 1e-12 * spec.hbar.norm();
    let rhs = (1..spec.rank)
        .map(|k| {
            let shift = spec.hbar * (k as f64 / 2.0);
            RationalFn { constant: real(1.0), zeros: p.shifted_zeros(k, shift), poles: p.shifted_zeros(k + 1, shift) }
                .reduced(tol)
        })
        .collect();
    Ok(BetheEquations { kind: ChainKind::Closed, hbar: spec.hbar, magnons: magnons.to_vec(), rhs })
}

/// LHS/RHS - 1 per equation.
pub fn bethe_residuals_closed(spec: &ChainSpec, roots: &BetheRoots) -> Result<Vec<C64>> {
    closed_equations(spec, &roots.magnons)?.residuals(roots)
}

pub fn solve_bethe_closed(spec: &ChainSpec, magnons: &[usize], cfg: &SolverConfig) -> Result<Vec<Solution>> {
    Ok(closed_equations(spec, magnons)?.solve(cfg))
}

fn total_weight(spec: &ChainSpec) -> Vec<i64> {
    (0..spec.rank).map(|k| spec.sites.iter().map(|s| s.weight.alpha()[k]).sum()).collect()
}

/// Cartan weight of Bethe states: sum_n alpha^n_k - M^(k) + M^(k-1).
pub fn sector_weight(spec: &ChainSpec, magnons: &[usize]) -> Vec<i64> {
    let a = total_weight(spec);
    let m = |k: usize| -> i64 {
        if k == 0 || k >= spec.rank {
            0
        } else {
            magnons[k - 1] as i64
        }
    };
    (0..spec.rank).map(|k| a[k] - m(k + 1) + m(k)).collect()
}

/// Dimension of the gl(N) multiplet of a Bethe state; zero for non-dominant weights.
pub fn multiplet_dimension(weight: &[i64]) -> usize {
    match HighestWeight::new(weight.to_vec()) {
        Ok(w) => weyl_dimension(&w) as usize,
        Err(_) => 0,
    }
}

/// All sectors whose Bethe-state weight is dominant.
pub fn enumerate_sectors(spec: &ChainSpec) -> Vec<Vec<usize>> {
    let n = spec.rank;
    let a = total_weight(spec);
    let total: i64 = a.iter().sum();
    let bounds: Vec<usize> = (1..n)
        .map(|k| {
            let partial: i64 = a[..k].iter().sum();
            // partial sums of a decreasing weight are at least k/N of the total
            (partial - (k as i64 * total).div_euclid(n as i64)).max(0) as usize
        })
        .collect();
    let mut out = Vec::new();
    let mut cur = vec![0usize; n - 1];
    fn rec(k: usize, bounds: &[usize], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, ok: &dyn Fn(&[usize]) -> bool) {
        if k == bounds.len() {
            if ok(cur) {
                out.push(cur.clone());
            }
            return;
        }
        for m in 0..=bounds[k] {
            cur[k] = m;
            rec(k + 1, bounds, cur, out, ok);
        }
    }
    let ok = |m: &[usize]| multiplet_dimension(&sector_weight(spec, m)) > 0;
    rec(0, &bounds, &mut cur, &mut out, &ok);
    out
}

/// Lambda(l - hbar N + hbar) ... Lambda(l) - prod_k P_k(l - hbar N + hbar k) - Lambda_f(l), with
/// Lambda_f the eigenvalue of the fused transfer matrix on the span of `basis`.
pub fn fusion_residual(chain: &Chain, lambda: C64, roots: &BetheRoots, basis: &CMat) -> Result<C64> {
    let spec = &chain.spec;
    let p = drinfeld(spec);
    let hbar = spec.hbar;
    let n = spec.rank;
    let mut prod = real(1.0);
    for j in 0..n {
        prod *= eigenvalue_with(&p, hbar, roots, lambda - hbar * (n - 1 - j) as f64)?;
    }
    let tf = chain.fused_transfer(lambda)?;
    let lf = (basis.adjoint() * tf * basis).trace() / real(basis.ncols() as f64);
    Ok(prod - p.qdet(lambda, hbar) - lf)
}

/// D_1(l - hbar N + hbar) D_2(l - hbar N + 2 hbar) ... D_N(l)
pub fn telescoping_product(roots: &BetheRoots, rank: usize, lambda: C64, hbar: C64) -> Result<C64> {
    let mut v = real(1.0);
    for k in 1..=rank {
        v *= dressing_closed(roots, k, lambda - hbar * (rank - k) as f64, hbar)?;
    }
    Ok(v)
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub solver: SolverConfig,
    /// Absolute tolerance on |Lambda_pred - Lambda_diag|.
    pub match_tol: f64,
    /// At least this many sample points (and never fewer than ell + 1).
    pub samples: usize,
    /// Restrict to these sectors; all dominant sectors when None.
    pub sectors: Option<Vec<Vec<usize>>>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { solver: SolverConfig::default(), match_tol: 1e-7, samples: 5, sectors: None }
    }
}

pub fn verify_spectrum_closed(chain: &Chain, cfg: &VerifyConfig) -> Result<SpectralReport> {
    let spec = &chain.spec;
    let sectors = cfg.sectors.clone().unwrap_or_else(|| enumerate_sectors(spec));
    let mut solved = Vec::new();
    let mut poles = Vec::new();
    for m in sectors {
        let solutions = solve_bethe_closed(spec, &m, &cfg.solver)?;
        for s in &solutions {
            poles.extend(eigenvalue_poles(&s.roots, spec.hbar));
        }
        let weight = sector_weight(spec, &m);
        solved.push(SolvedSector { multiplet_dimension: multiplet_dimension(&weight), magnons: m, weight, solutions });
    }
    let count = cfg.samples.max(spec.len() + 1);
    let points = sample_points(spec.hbar, count, &poles, 0.05, cfg.solver.seed);
    let irreducible = tensor_irreducible(
        &spec.sites.iter().map(|s| (s.weight.clone(), s.shift)).collect::<Vec<_>>(),
        spec.hbar,
    )
    .irreducible;
    let p = drinfeld(spec);
    match_spectrum(
        ChainKind::Closed,
        irreducible,
        solved,
        points,
        |l| Ok(chain.transfer_hat(l)),
        |s, l| eigenvalue_with(&p, spec.hbar, &s.roots, l),
        cfg.match_tol,
        cfg.solver.seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, fro};
    use crate::yangian::Site;

    fn h() -> C64 {
        real(1.0)
    }

    #[test]
    fn drinfeld_fundamental_and_spin() {
        let spec = ChainSpec::fundamental(3, 2, h()).unwrap();
        let p = drinfeld(&spec);
        let l = c64(0.3, 0.2);
        assert!((p.eval(1, l) - (l - 1.0).powi(2)).norm() < 1e-14);
        assert!((p.eval(2, l) - l.powi(2)).norm() < 1e-14);
        assert!((p.eval(3, l) - l.powi(2)).norm() < 1e-14);
        let spin = ChainSpec::uniform(HighestWeight::spin(2), 3, h()).unwrap();
        let p = drinfeld(&spin);
        assert!((p.eval(1, l) - (l - 2.0).powi(3)).norm() < 1e-13);
    }

    #[test]
    fn vacuum_matches_transfer_on_vacuum() {
        for spec in [
            ChainSpec::fundamental(2, 1, h()).unwrap(),
            ChainSpec::fundamental(2, 2, h()).unwrap(),
            ChainSpec::fundamental(3, 1, h()).unwrap(),
            ChainSpec::new(
                3,
                c64(0.7, 0.2),
                vec![
                    Site::new(HighestWeight::new(vec![2, 1, 0]).unwrap(), c64(0.3, 0.0)),
                    Site::new(HighestWeight::fundamental(3), c64(-0.1, 0.4)),
                ],
            )
            .unwrap(),
        ] {
            let chain = Chain::new(spec.clone()).unwrap();
            let l = c64(0.37, -0.81);
            let v = chain.vacuum();
            let tv = chain.transfer_hat(l) * &v;
            let expect = vacuum_eigenvalue(&spec, l);
            assert!((&tv - &v * expect).norm() < 1e-10 * (1.0 + expect.norm()));
        }
        let l = c64(1.1, 0.4);
        let spec = ChainSpec::fundamental(2, 2, h()).unwrap();
        assert!((vacuum_eigenvalue(&spec, l) - ((l - 1.0).powi(2) + l * l)).norm() < 1e-12);
    }

    #[test]
    fn dressing_examples() {
        let roots = BetheRoots { magnons: vec![1], roots: vec![vec![real(0.0)]] };
        let l = c64(0.8, 0.3);
        assert!((dressing_closed(&roots, 1, l, h()).unwrap() - (l + 0.5) / (l - 0.5)).norm() < 1e-14);
        assert!((dressing_closed(&BetheRoots::empty(&[0]), 1, l, h()).unwrap() - 1.0).norm() < 1e-15);
        let far = dressing_closed(&roots, 2, real(1e8), h()).unwrap();
        assert!((far - 1.0).norm() < 1e-6);
        assert!(dressing_closed(&roots, 1, real(0.5), h()).is_err());
    }

    #[test]
    fn eigenvalue_example_two_sites() {
        let spec = ChainSpec::fundamental(2, 2, h()).unwrap();
        let roots = BetheRoots { magnons: vec![1], roots: vec![vec![real(0.0)]] };
        let l = c64(0.4, 0.9);
        let expect = (l - 1.0).powi(2) * (l + 0.5) / (l - 0.5) + l * l * (l - 1.5) / (l - 0.5);
        assert!((eigenvalue_closed(&spec, &roots, l).unwrap() - expect).norm() < 1e-12);
        assert!(bethe_residuals_closed(&spec, &roots).unwrap()[0].norm() < 1e-14);
        let bad = BetheRoots { magnons: vec![1], roots: vec![vec![real(1.0)]] };
        assert!(bethe_residuals_closed(&spec, &bad).unwrap()[0].norm() > 0.1);
    }

    #[test]
    fn sectors_and_weights() {
        let spec = ChainSpec::fundamental(3, 2, h()).unwrap();
        let s = enumerate_sectors(&spec);
        assert_eq!(s, vec![vec![0, 0], vec![1, 0]]);
        let dims: Vec<usize> = s.iter().map(|m| multiplet_dimension(&sector_weight(&spec, m))).collect();
        assert_eq!(dims, vec![6, 3]);
        assert_eq!(sector_weight(&spec, &[1, 1]), vec![1, 0, 1]);
        assert_eq!(multiplet_dimension(&[1, 0, 1]), 0);
    }

    #[test]
    fn spectrum_two_site_gl2() {
        let chain = Chain::new(ChainSpec::fundamental(2, 2, h()).unwrap()).unwrap();
        let rep = verify_spectrum_closed(&chain, &VerifyConfig::default()).unwrap();
        assert_eq!(rep.branches.len(), 2);
        assert!(rep.all_covered());
        assert_eq!(rep.coverage, 1.0);
        assert!(rep.max_residual < 1e-8);
    }

    #[test]
    fn spectrum_gl3_two_sites() {
        let chain = Chain::new(ChainSpec::fundamental(3, 2, h()).unwrap()).unwrap();
        let rep = verify_spectrum_closed(&chain, &VerifyConfig::default()).unwrap();
        assert!(rep.all_covered(), "{:?}", rep.branches);
        assert_eq!(rep.coverage, 1.0);
    }

    #[test]
    fn fusion_on_vacuum_single_site() {
        let chain = Chain::new(ChainSpec::fundamental(2, 1, h()).unwrap()).unwrap();
        let v = chain.vacuum();
        let basis = CMat::from_column_slice(v.len(), 1, v.as_slice());
        let r = fusion_residual(&chain, c64(0.3, 0.7), &BetheRoots::empty(&[0]), &basis).unwrap();
        assert!(r.norm() < 1e-10);
    }

    #[test]
    fn fused_transfer_commutes() {
        let chain = Chain::new(ChainSpec::fundamental(2, 3, h()).unwrap()).unwrap();
        let tf = chain.fused_transfer(c64(0.2, 0.5)).unwrap();
        let t = chain.transfer_hat(c64(-0.7, 0.1));
        assert!(fro(&(&tf * &t - &t * &tf)) <= 1e-10 * fro(&tf) * fro(&t));
    }
}
