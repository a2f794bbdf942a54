//! Finite-dimensional irreducible gl(N) representations and the
//! irreducibility test for tensor products of evaluation modules.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{commutator, real, CMat, C64};

pub const DEFAULT_SITE_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct HighestWeight {
    alpha: Vec<i64>,
}

impl HighestWeight {
    pub fn new(alpha: Vec<i64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::ZeroRank);
        }
        if alpha.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::NotDecreasing);
        }
        Ok(HighestWeight { alpha })
    }

    pub fn with_rank(rank: usize, alpha: Vec<i64>) -> Result<Self> {
        if alpha.len() != rank {
            return Err(Error::RankMismatch { rank, got: alpha.len() });
        }
        Self::new(alpha)
    }

    /// (1,0,...,0)
    pub fn fundamental(rank: usize) -> Self {
        let mut alpha = vec![0; rank];
        alpha[0] = 1;
        HighestWeight { alpha }
    }

    /// gl(2) weight (2s, 0) for spin s = two_s / 2.
    pub fn spin(two_s: i64) -> Self {
        HighestWeight { alpha: vec![two_s, 0] }
    }

    pub fn rank(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[i64] {
        &self.alpha
    }

    pub fn is_fundamental(&self) -> bool {
        self.alpha[0] == 1 && self.alpha[1..].iter().all(|&a| a == 0)
    }
}

impl TryFrom<Vec<i64>> for HighestWeight {
    type Error = Error;
    fn try_from(v: Vec<i64>) -> Result<Self> {
        HighestWeight::new(v)
    }
}

impl From<HighestWeight> for Vec<i64> {
    fn from(w: HighestWeight) -> Vec<i64> {
        w.alpha
    }
}

/// prod_{i<j} (a_i - a_j + j - i) / (j - i)
pub fn weyl_dimension(w: &HighestWeight) -> u128 {
    let a = w.alpha();
    let n = a.len();
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..n {
        for j in i + 1..n {
            num *= (a[i] - a[j] + (j - i) as i64) as u128;
            den *= (j - i) as u128;
            let g = gcd(num, den);
            num /= g;
            den /= g;
        }
    }
    num / den
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A Gelfand-Tsetlin pattern; `rows[k]` is row k+1 (length k+1), the last row is the weight.
pub type GtPattern = Vec<Vec<i64>>;

/// All patterns with top row `w`, highest-weight pattern first, then in
/// descending lexicographic order of the weight.
pub fn gt_patterns(w: &HighestWeight) -> Vec<GtPattern> {
    let n = w.rank();
    let mut out = Vec::new();
    let mut rows: Vec<Vec<i64>> = vec![Vec::new(); n];
    rows[n - 1] = w.alpha().to_vec();
    fill_rows(&mut rows, n - 1, &mut out);
    out.sort_by(|a, b| pattern_weight(b).cmp(&pattern_weight(a)).then_with(|| b.cmp(a)));
    out
}

fn fill_rows(rows: &mut Vec<Vec<i64>>, k: usize, out: &mut Vec<GtPattern>) {
    if k == 0 {
        out.push(rows.clone());
        return;
    }
    // row k-1 has k entries interlacing row k
    let upper = rows[k].clone();
    let mut cur = vec![0i64; k];
    fn rec(i: usize, upper: &[i64], cur: &mut Vec<i64>, rows: &mut Vec<Vec<i64>>, k: usize, out: &mut Vec<GtPattern>) {
        if i == cur.len() {
            rows[k - 1] = cur.clone();
            fill_rows(rows, k - 1, out);
            return;
        }
        for v in upper[i + 1]..=upper[i] {
            cur[i] = v;
            rec(i + 1, upper, cur, rows, k, out);
        }
    }
    rec(0, &upper, &mut cur, rows, k, out);
}

/// Cartan weight of a pattern: row sums differences.
pub fn pattern_weight(p: &GtPattern) -> Vec<i64> {
    let mut prev = 0;
    p.iter()
        .map(|row| {
            let s: i64 = row.iter().sum();
            let w = s - prev;
            prev = s;
            w
        })
        .collect()
}

/// Matrices of the generators e_ij of one irrep.
#[derive(Debug, Clone)]
pub struct RepMatrices {
    pub rank: usize,
    pub dim: usize,
    /// `gens[i * rank + j]` represents e_ij (0-based indices).
    pub gens: Vec<CMat>,
    pub hw_index: usize,
    pub weight: HighestWeight,
}

impl RepMatrices {
    pub fn gen(&self, i: usize, j: usize) -> &CMat {
        &self.gens[i * self.rank + j]
    }

    /// max over (i,j,k,l) of ||[e_ij,e_kl] - d_jk e_il + d_li e_kj||
    pub fn commutator_residual(&self) -> f64 {
        let n = self.rank;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut r = commutator(self.gen(i, j), self.gen(k, l));
                        if j == k {
                            r -= self.gen(i, l);
                        }
                        if l == i {
                            r += self.gen(k, j);
                        }
                        worst = worst.max(r.norm());
                    }
                }
            }
        }
        worst
    }

    /// Largest violation of e_ij v = 0 (i<j) and e_kk v = alpha_k v.
    pub fn highest_weight_residual(&self) -> f64 {
        let n = self.rank;
        let mut v = nalgebra::DVector::<C64>::zeros(self.dim);
        v[self.hw_index] = real(1.0);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let w = self.gen(i, j) * &v;
                if i < j {
                    worst = worst.max(w.norm());
                } else if i == j {
                    worst = worst.max((w - &v * real(self.weight.alpha()[i] as f64)).norm());
                }
            }
        }
        worst
    }
}

/// Gelfand-Tsetlin construction, rescaled to the orthonormal basis in which
/// every generator is real and e_ji is the transpose of e_ij.
pub fn build_irrep(w: &HighestWeight, cap: usize) -> Result<RepMatrices> {
    let dim = weyl_dimension(w);
    if dim > cap as u128 {
        return Err(Error::DimensionCap { dim, cap });
    }
    let n = w.rank();
    let pats = gt_patterns(w);
    let d = pats.len();
    debug_assert_eq!(d as u128, dim);
    let index: HashMap<&GtPattern, usize> = pats.iter().enumerate().map(|(i, p)| (p, i)).collect();

    // unnormalized raising/lowering simple generators
    let mut raise: Vec<CMat> = vec![CMat::zeros(d, d); n.saturating_sub(1)];
    let mut lower: Vec<CMat> = vec![CMat::zeros(d, d); n.saturating_sub(1)];
    let mut diag: Vec<CMat> = vec![CMat::zeros(d, d); n];
    for (col, p) in pats.iter().enumerate() {
        let wt = pattern_weight(p);
        for (k, &x) in wt.iter().enumerate() {
            diag[k][(col, col)] = real(x as f64);
        }
        // l_{k,i} = lambda_{k,i} - i (0-based i), rows 1-based k <-> p[k-1]
        let l = |row: usize, i: usize| -> f64 { (p[row][i] - i as i64) as f64 };
        for k in 0..n - 1 {
            // generators e_{k,k+1}, e_{k+1,k} move entries of row k (0-based, length k+1)
            let len = k + 1;
            for i in 0..len {
                let mut den = 1.0;
                for j in 0..len {
                    if j != i {
                        den *= l(k, i) - l(k, j);
                    }
                }
                // raising
                let mut up = p.clone();
                up[k][i] += 1;
                if let Some(&row) = index.get(&up) {
                    let mut num = 1.0;
                    for j in 0..len + 1 {
                        num *= l(k, i) - l(k + 1, j);
                    }
                    raise[k][(row, col)] = real(-num / den);
                }
                let mut down = p.clone();
                down[k][i] -= 1;
                if let Some(&row) = index.get(&down) {
                    let mut num = 1.0;
                    if k > 0 {
                        for j in 0..k {
                            num *= l(k, i) - l(k - 1, j);
                        }
                    }
                    lower[k][(row, col)] = real(num / den);
                }
            }
        }
    }

    // diagonal rescaling making lower = raise^T with positive entries, by BFS from the hw vector
    let mut scale: Vec<Option<C64>> = vec![None; d];
    scale[0] = Some(real(1.0));
    let mut queue = VecDeque::from([0usize]);
    while let Some(a) = queue.pop_front() {
        let da = scale[a].unwrap();
        for k in 0..n - 1 {
            for b in 0..d {
                let lo = lower[k][(b, a)];
                if lo.norm() == 0.0 || scale[b].is_some() {
                    continue;
                }
                let up = raise[k][(a, b)];
                let mut r = (lo / up).sqrt();
                if (lo * da / (da * r)).re < 0.0 {
                    r = -r;
                }
                scale[b] = Some(da * r);
                queue.push_back(b);
            }
        }
    }
    let s: Vec<C64> = scale.into_iter().map(|x| x.expect("irrep is connected")).collect();
    let conj = |m: &CMat| -> CMat {
        let mut out = m.clone();
        for r in 0..d {
            for c in 0..d {
                if out[(r, c)].norm() != 0.0 {
                    out[(r, c)] = out[(r, c)] * s[c] / s[r];
                }
            }
        }
        out
    };
    let raise: Vec<CMat> = raise.iter().map(conj).collect();
    let lower: Vec<CMat> = lower.iter().map(conj).collect();

    let mut gens: Vec<Option<CMat>> = vec![None; n * n];
    for k in 0..n {
        gens[k * n + k] = Some(diag[k].clone());
    }
    for k in 0..n - 1 {
        gens[k * n + k + 1] = Some(raise[k].clone());
        gens[(k + 1) * n + k] = Some(lower[k].clone());
    }
    for span in 2..n {
        for i in 0..n - span {
            let j = i + span;
            let up = commutator(gens[i * n + i + 1].as_ref().unwrap(), gens[(i + 1) * n + j].as_ref().unwrap());
            let down = commutator(gens[j * n + j - 1].as_ref().unwrap(), gens[(j - 1) * n + i].as_ref().unwrap());
            gens[i * n + j] = Some(up);
            gens[j * n + i] = Some(down);
        }
    }
    Ok(RepMatrices {
        rank: n,
        dim: d,
        gens: gens.into_iter().map(Option::unwrap).collect(),
        hw_index: 0,
        weight: w.clone(),
    })
}

/// X_alpha = {alpha_k - k + 1}, shifted by an integer offset.
pub fn crossing_set(w: &HighestWeight, offset: i64) -> Vec<i64> {
    w.alpha().iter().enumerate().map(|(k, &a)| a - k as i64 + offset).collect()
}

/// Whether two disjoint integer sets interleave as x1<y1<x2<y2 or y1<x1<y2<x2.
pub fn sets_cross(x: &[i64], y: &[i64]) -> bool {
    let mut tagged: Vec<(i64, bool)> = x.iter().map(|&v| (v, true)).chain(y.iter().map(|&v| (v, false))).collect();
    tagged.sort();
    // crossing iff the merged sequence has at least three alternations (pattern abab)
    let mut runs = 0;
    let mut last: Option<bool> = None;
    for &(_, t) in &tagged {
        if last != Some(t) {
            runs += 1;
            last = Some(t);
        }
    }
    runs >= 4
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Irreducibility {
    pub irreducible: bool,
    /// First offending pair of site indices (0-based), if reducible.
    pub witness: Option<(usize, usize)>,
}

/// Relative offset (a_p - a_q)/hbar when it is an integer.
fn integer_offset(a_p: C64, a_q: C64, hbar: C64) -> Option<i64> {
    let d = (a_p - a_q) / hbar;
    let r = d.re.round();
    if (d - real(r)).norm() < 1e-9 {
        Some(r as i64)
    } else {
        None
    }
}

/// Pairwise crossing-set criterion on the shift-absorbed weights
/// alpha^n - (a_n/hbar)(1,...,1). Only relative shifts matter: a pair whose
/// relative shift is not an integer multiple of hbar never crosses.
pub fn tensor_irreducible(sites: &[(HighestWeight, C64)], hbar: C64) -> Irreducibility {
    for p in 0..sites.len() {
        for q in p + 1..sites.len() {
            if !pair_irreducible(&sites[p], &sites[q], hbar) {
                return Irreducibility { irreducible: false, witness: Some((p, q)) };
            }
        }
    }
    Irreducibility { irreducible: true, witness: None }
}

pub fn pair_irreducible(p: &(HighestWeight, C64), q: &(HighestWeight, C64), hbar: C64) -> bool {
    let Some(off) = integer_offset(p.1, q.1, hbar) else {
        return true;
    };
    // alpha^p - a_p/hbar vs alpha^q - a_q/hbar, translated so q has offset 0
    let xp = crossing_set(&p.0, -off);
    let xq = crossing_set(&q.0, 0);
    let only_p: Vec<i64> = xp.iter().copied().filter(|v| !xq.contains(v)).collect();
    let only_q: Vec<i64> = xq.iter().copied().filter(|v| !xp.contains(v)).collect();
    !sets_cross(&only_p, &only_q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{elementary, CMat};

    fn hw(v: &[i64]) -> HighestWeight {
        HighestWeight::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_increasing() {
        assert_eq!(HighestWeight::new(vec![0, 1]).unwrap_err(), Error::NotDecreasing);
    }

    #[test]
    fn weyl_examples() {
        assert_eq!(weyl_dimension(&hw(&[1, 0])), 2);
        assert_eq!(weyl_dimension(&hw(&[2, 0])), 3);
        assert_eq!(weyl_dimension(&hw(&[1, 1, 0])), 3);
        assert_eq!(weyl_dimension(&hw(&[2, 1, 0])), 8);
        assert_eq!(weyl_dimension(&hw(&[3, 1, -1])), 27);
    }

    #[test]
    fn fundamental_is_elementary() {
        for n in 2..=4 {
            let r = build_irrep(&HighestWeight::fundamental(n), 64).unwrap();
            for i in 0..n {
                for j in 0..n {
                    assert!((r.gen(i, j) - elementary(n, i, j)).norm() < 1e-12, "n={n} ({i},{j})");
                }
            }
            assert_eq!(r.hw_index, 0);
        }
    }

    #[test]
    fn spin_one_highest_weight() {
        let r = build_irrep(&hw(&[2, 0]), 64).unwrap();
        assert_eq!(r.dim, 3);
        assert!((r.gen(0, 0)[(0, 0)] - real(2.0)).norm() < 1e-14);
        assert!(r.gen(1, 1)[(0, 0)].norm() < 1e-14);
        assert!(r.highest_weight_residual() < 1e-12);
    }

    #[test]
    fn generators_satisfy_gl_relations_and_transpose() {
        for w in [vec![2, 0], vec![3, 0], vec![1, 1, 0], vec![2, 1, 0], vec![2, 0, -1], vec![1, 0, 0, 0], vec![2, 1, 1, 0]] {
            let r = build_irrep(&hw(&w), 64).unwrap();
            assert!(r.commutator_residual() < 1e-10, "{w:?}");
            assert!(r.highest_weight_residual() < 1e-10, "{w:?}");
            for i in 0..r.rank {
                for j in 0..r.rank {
                    let t: CMat = r.gen(j, i).transpose();
                    assert!((r.gen(i, j) - t).norm() < 1e-10, "{w:?}");
                }
            }
        }
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(build_irrep(&hw(&[8, 4, 0]), 64), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn crossing_examples() {
        assert!(sets_cross(&[1, -1], &[0, -2]));
        assert!(!sets_cross(&[1], &[-3]));
        assert!(!sets_cross(&[5, 4], &[1, 0]));
        assert!(!sets_cross(&[5, 0], &[3, 2]));
    }

    #[test]
    fn shifted_fundamental_pair_is_reducible() {
        let h = real(1.0);
        let f = HighestWeight::fundamental(2);
        let r = tensor_irreducible(&[(f.clone(), real(0.0)), (f.clone(), h)], h);
        assert!(!r.irreducible);
        assert_eq!(r.witness, Some((0, 1)));
        let g = tensor_irreducible(&[(f.clone(), real(0.0)), (f.clone(), real(0.5))], h);
        assert!(g.irreducible);
        let same = tensor_irreducible(&vec![(f, real(0.0)); 4], h);
        assert!(same.irreducible);
    }
}
