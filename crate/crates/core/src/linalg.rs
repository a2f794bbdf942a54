//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

/// Elementary matrix E_ij of size n.
pub fn elementary(n: usize, i: usize, j: usize) -> CMat {
    let mut m = zeros(n);
    m[(i, j)] = real(1.0);
    m
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Permutation P = sum E_ij (x) E_ji on C^n (x) C^n.
pub fn permutation(n: usize) -> CMat {
    let mut p = zeros(n * n);
    for i in 0..n {
        for j in 0..n {
            p[(i * n + j, j * n + i)] = real(1.0);
        }
    }
    p
}

/// Swap of two tensor factors inside (C^n)^{(x) m}, acting on factor positions a and b.
pub fn permutation_in(n: usize, m: usize, a: usize, b: usize) -> CMat {
    let dim = n.pow(m as u32);
    let mut p = zeros(dim);
    let mut digits = vec![0usize; m];
    for idx in 0..dim {
        let mut r = idx;
        for k in (0..m).rev() {
            digits[k] = r % n;
            r /= n;
        }
        digits.swap(a, b);
        let mut out = 0;
        for &d in &digits {
            out = out * n + d;
        }
        digits.swap(a, b);
        p[(out, idx)] = real(1.0);
    }
    p
}

/// I_left (x) op (x) I_right.
pub fn embed(op: &CMat, left: usize, right: usize) -> CMat {
    let mut out = op.clone();
    if left > 1 {
        out = kron(&eye(left), &out);
    }
    if right > 1 {
        out = kron(&out, &eye(right));
    }
    out
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn fro(a: &CMat) -> f64 {
    a.norm()
}

/// ||a - b|| / max(scale, tiny).
pub fn rel_residual(a: &CMat, b: &CMat, scale: f64) -> f64 {
    (a - b).norm() / scale.max(f64::MIN_POSITIVE)
}

/// ||[a,b]|| / (||a|| ||b||), zero when either operand vanishes.
pub fn rel_commutator(a: &CMat, b: &CMat) -> f64 {
    let s = a.norm() * b.norm();
    if s == 0.0 {
        return 0.0;
    }
    commutator(a, b).norm() / s
}

/// Eigenvalues of a complex matrix: Hermitian solver when applicable, complex Schur form otherwise.
///
/// nalgebra's unbounded Schur iteration can stall on exactly structured inputs, so it is
/// bounded and retried after a fixed unitary similarity.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let scale = m.norm().max(1e-300);
    if (m - m.adjoint()).norm() <= 1e-13 * scale {
        let herm = (m + m.adjoint()) * real(0.5);
        if let Some(e) = nalgebra::SymmetricEigen::try_new(herm, f64::EPSILON, 1000 * n) {
            return e.eigenvalues.iter().map(|&x| real(x)).collect();
        }
    }
    let mut a = m.clone();
    for attempt in 0..4 {
        if let Some(schur) = a.clone().try_schur(f64::EPSILON, 1000 * n) {
            let (_, t) = schur.unpack();
            return (0..n).map(|i| t[(i, i)]).collect();
        }
        let q = mixing_unitary(n, attempt);
        a = q.adjoint() * a * q;
    }
    panic!("complex Schur iteration did not converge for a {n}x{n} matrix");
}

/// Deterministic dense unitary, the Q factor of a fixed pseudo-random matrix.
fn mixing_unitary(n: usize, salt: usize) -> CMat {
    let g = CMat::from_fn(n, n, |i, j| {
        let t = (i * 7919 + j * 104_729 + salt * 1_299_709) as f64;
        c64((t * 0.618_033_988_7).fract() - 0.5, (t * 0.414_213_562_3).fract() - 0.5)
    });
    g.qr().q()
}

/// Right singular vectors for the `k` smallest singular values (orthonormal columns).
pub fn null_space(m: &CMat, k: usize) -> CMat {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    // a wide svd only yields min(rows, cols) vectors; rows >= cols here
    let mut out = CMat::zeros(n, k);
    for (c, &idx) in order.iter().take(k).enumerate() {
        for r in 0..n {
            out[(r, c)] = vt[(idx, r)].conj();
        }
    }
    out
}

/// Singular values in ascending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(f64::total_cmp);
    s
}

pub fn condition_number(m: &CMat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&lo), Some(&hi)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Single-linkage clustering of complex values with absolute tolerance `tol`.
pub fn cluster(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut label = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if label[r] == usize::MAX {
            label[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[label[r]].push(i);
    }
    groups
}

/// Chebyshev nodes of the first kind on [-scale, scale].
pub fn chebyshev_nodes(count: usize, scale: f64) -> Vec<f64> {
    (0..count)
        .map(|k| scale * ((2 * k + 1) as f64 * std::f64::consts::PI / (2 * count) as f64).cos())
        .collect()
}

/// Monomial coefficients c_0..c_d of the polynomial through (x_s, y_s), applied entrywise to
/// matrix samples. Uses a Vandermonde solve, adequate for the low degrees used here.
pub fn interpolate_matrices(points: &[C64], samples: &[CMat]) -> Vec<CMat> {
    let n = points.len();
    assert_eq!(n, samples.len());
    let mut v = CMat::zeros(n, n);
    for (r, &x) in points.iter().enumerate() {
        let mut p = real(1.0);
        for c in 0..n {
            v[(r, c)] = p;
            p *= x;
        }
    }
    let inv = v.try_inverse().expect("distinct interpolation nodes");
    let (rows, cols) = samples[0].shape();
    (0..n)
        .map(|deg| {
            let mut acc = CMat::zeros(rows, cols);
            for (s, sample) in samples.iter().enumerate() {
                let w = inv[(deg, s)];
                if w != C64::new(0.0, 0.0) {
                    acc += sample * w;
                }
            }
            acc
        })
        .collect()
}

/// Horner evaluation of a scalar polynomial given monomial coefficients.
pub fn poly_eval(coeffs: &[C64], x: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

/// Multiply a list of linear factors (x - r_k) into monomial coefficients.
pub fn poly_from_roots(roots: &[C64]) -> Vec<C64> {
    let mut c = vec![real(1.0)];
    for &r in roots {
        let mut next = vec![C64::new(0.0, 0.0); c.len() + 1];
        for (k, &a) in c.iter().enumerate() {
            next[k + 1] += a;
            next[k] -= a * r;
        }
        c = next;
    }
    c
}

/// Orthonormalize columns (modified Gram-Schmidt), dropping numerically dependent ones.
pub fn orthonormal_columns(cols: &[nalgebra::DVector<C64>], tol: f64) -> Vec<nalgebra::DVector<C64>> {
    let mut basis: Vec<nalgebra::DVector<C64>> = Vec::new();
    for v in cols {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&w);
                w -= b * proj;
            }
        }
        let nrm = w.norm();
        if nrm > tol {
            basis.push(w / real(nrm));
        }
    }
    basis
}
