//! Joint eigenbranches of a commuting operator family and matching against
//! Bethe predictions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bethe::{ChainKind, Solution};
use crate::error::Result;
use crate::linalg::{c64, cluster, eigenvalues, fro, null_space, CMat, C64};

/// One joint eigenspace: `basis` is D x m orthonormal, `values[s]` the eigenvalue of the
/// family member at sample point s.
#[derive(Debug, Clone)]
pub struct Branch {
    pub basis: CMat,
    pub values: Vec<C64>,
    /// max_s |op_s V - V (V^dag op_s V)| / |op_s|
    pub invariance_residual: f64,
}

impl Branch {
    pub fn multiplicity(&self) -> usize {
        self.basis.ncols()
    }
}

/// Splits the space into joint eigenspaces of `ops` using a random combination.
pub fn joint_branches(ops: &[CMat], seed: u64) -> Vec<Branch> {
    let d = ops[0].nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = CMat::zeros(d, d);
    for op in ops {
        let c = c64(rng.random::<f64>() + 0.5, rng.random::<f64>() - 0.5);
        x += op * (c / fro(op).max(1e-300));
    }
    let ev = eigenvalues(&x);
    let scale = ev.iter().map(|z| z.norm()).fold(1e-300, f64::max);
    let groups = cluster(&ev, 1e-6 * scale);
    let mut out: Vec<Branch> = groups
        .into_iter()
        .map(|g| {
            let mu = g.iter().map(|&i| ev[i]).sum::<C64>() / c64(g.len() as f64, 0.0);
            let shifted = &x - CMat::identity(d, d) * mu;
            let basis = null_space(&shifted, g.len());
            let mut res: f64 = 0.0;
            let values = ops
                .iter()
                .map(|op| {
                    let proj = basis.adjoint() * op * &basis;
                    let r = op * &basis - &basis * &proj;
                    res = res.max(fro(&r) / fro(op).max(1e-300));
                    proj.trace() / c64(g.len() as f64, 0.0)
                })
                .collect();
            Branch { basis, values, invariance_residual: res }
        })
        .collect();
    out.sort_by(|a, b| {
        let ka = (a.values[0].re, a.values[0].im);
        let kb = (b.values[0].re, b.values[0].im);
        ka.partial_cmp(&kb).unwrap()
    });
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionReport {
    pub roots: Vec<Vec<C64>>,
    pub bethe_residual: f64,
    pub singular: bool,
    pub coincident: bool,
    /// Lambda at the sample points.
    pub predicted: Vec<C64>,
    pub branch: Option<usize>,
    /// max_s |Lambda_pred - Lambda_diag| against the nearest branch.
    pub match_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorReport {
    pub magnons: Vec<usize>,
    /// Cartan weight of the Bethe states (closed: gl(N); open: concatenated gl(M)+gl(N-M)).
    pub weight: Vec<i64>,
    pub multiplet_dimension: usize,
    pub solutions: Vec<SolutionReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchReport {
    pub multiplicity: usize,
    pub values: Vec<C64>,
    pub predicted_multiplicity: usize,
    pub covered: bool,
    pub invariance_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub kind: ChainKind,
    pub dimension: usize,
    pub irreducible: bool,
    pub sample_points: Vec<C64>,
    pub sectors: Vec<SectorReport>,
    pub branches: Vec<BranchReport>,
    /// Fraction of states lying in branches whose multiplicity is exactly accounted for.
    pub coverage: f64,
    /// Largest match residual over matched solutions.
    pub max_residual: f64,
    pub unmatched_solutions: usize,
    pub match_tol: f64,
    #[serde(skip)]
    pub bases: Vec<CMat>,
}

impl SpectralReport {
    pub fn all_covered(&self) -> bool {
        self.branches.iter().all(|b| b.covered)
    }
}

/// One solved sector ready for matching.
pub struct SolvedSector {
    pub magnons: Vec<usize>,
    pub weight: Vec<i64>,
    pub multiplet_dimension: usize,
    pub solutions: Vec<Solution>,
}

/// Picks `count` sample points hbar (u + i v) at least `clearance |hbar|` away from all `poles`.
pub fn sample_points(hbar: C64, count: usize, poles: &[C64], clearance: f64, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut pts = Vec::with_capacity(count);
    let mut tries = 0;
    while pts.len() < count {
        let u = rng.random::<f64>() * 3.0 - 1.5;
        let v = rng.random::<f64>() * 3.0 - 1.5;
        let p = hbar * c64(u, v);
        tries += 1;
        let c = if tries > 10_000 { 0.0 } else { clearance };
        let far = poles.iter().chain(pts.iter()).all(|q| (p - q).norm() >= c * hbar.norm());
        if far {
            pts.push(p);
        }
    }
    pts
}

/// Diagonalizes the family at the sample points and matches every Bethe solution.
pub fn match_spectrum<F, P>(
    kind: ChainKind,
    irreducible: bool,
    sectors: Vec<SolvedSector>,
    points: Vec<C64>,
    op_at: F,
    predict: P,
    match_tol: f64,
    seed: u64,
) -> Result<SpectralReport>
where
    F: Fn(C64) -> Result<CMat> + Sync + Send,
    P: Fn(&Solution, C64) -> Result<C64>,
{
    let ops = crate::par::map(&points, |&p| op_at(p)).into_iter().collect::<Result<Vec<_>>>()?;
    let dimension = ops[0].nrows();
    let branches = joint_branches(&ops, seed);
    let mut predicted_mult = vec![0usize; branches.len()];
    let mut max_residual: f64 = 0.0;
    let mut unmatched = 0;
    let mut sector_reports = Vec::new();
    for sector in sectors {
        let mut sols = Vec::new();
        for s in &sector.solutions {
            let predicted: Vec<C64> = points.iter().map(|&p| predict(s, p)).collect::<Result<_>>()?;
            let (best, dist) = branches
                .iter()
                .enumerate()
                .map(|(i, b)| (i, predicted.iter().zip(&b.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap_or((0, f64::INFINITY));
            let branch = (dist <= match_tol).then_some(best);
            match branch {
                Some(i) => {
                    predicted_mult[i] += sector.multiplet_dimension;
                    max_residual = max_residual.max(dist);
                }
                None => unmatched += 1,
            }
            sols.push(SolutionReport {
                roots: s.roots.roots.clone(),
                bethe_residual: s.max_residual,
                singular: s.singular,
                coincident: s.coincident,
                predicted,
                branch,
                match_residual: dist,
            });
        }
        sector_reports.push(SectorReport {
            magnons: sector.magnons,
            weight: sector.weight,
            multiplet_dimension: sector.multiplet_dimension,
            solutions: sols,
        });
    }
    let branch_reports: Vec<BranchReport> = branches
        .iter()
        .zip(&predicted_mult)
        .map(|(b, &pm)| BranchReport {
            multiplicity: b.multiplicity(),
            values: b.values.clone(),
            predicted_multiplicity: pm,
            covered: pm == b.multiplicity(),
            invariance_residual: b.invariance_residual,
        })
        .collect();
    let covered: usize = branch_reports.iter().filter(|b| b.covered).map(|b| b.multiplicity).sum();
    Ok(SpectralReport {
        kind,
        dimension,
        irreducible,
        sample_points: points,
        sectors: sector_reports,
        coverage: covered as f64 / dimension as f64,
        branches: branch_reports,
        max_residual,
        unmatched_solutions: unmatched,
        match_tol,
        bases: branches.into_iter().map(|b| b.basis).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;

    #[test]
    fn branches_of_diagonal_family() {
        let a = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![real(1.0), real(1.0), real(2.0)]));
        let b = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![real(3.0), real(3.0), real(-1.0)]));
        let br = joint_branches(&[a, b], 1);
        assert_eq!(br.len(), 2);
        let mults: Vec<usize> = br.iter().map(Branch::multiplicity).collect();
        assert!(mults.contains(&2) && mults.contains(&1));
        assert!(br.iter().all(|b| b.invariance_residual < 1e-12));
    }

    #[test]
    fn sample_points_avoid_poles() {
        let poles = vec![real(0.0), c64(0.5, 0.5)];
        let pts = sample_points(real(1.0), 6, &poles, 0.1, 3);
        assert_eq!(pts.len(), 6);
        assert!(pts.iter().all(|p| poles.iter().all(|q| (p - q).norm() >= 0.1)));
    }
}
