//! Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion and exits non-zero if any
//! criterion fails.

use std::time::Instant;

use bethelab_core::boundary::{
    open_vacuum_residue, reflection_eq_residual, verify_spectrum_open, OpenChain, OpenChainSpec, ReflectionSpec,
};
use bethelab_core::bethe::BetheRoots;
use bethelab_core::hamiltonians::{
    affine_fit, closed_log_derivative_hamiltonian, exponent_of, impurity_chain, impurity_hamiltonian_corrected,
    impurity_hamiltonian_display, spin_s_energy_check, zarembo_chain, Zarembo,
};
use bethelab_core::linalg::{c64, eigenvalues, fro, real, rel_commutator, CMat, C64};
use bethelab_core::rep_gl::{tensor_irreducible, HighestWeight};
use bethelab_core::spectrum::{drinfeld, fusion_residual, telescoping_product, verify_spectrum_closed, VerifyConfig};
use bethelab_core::yangian::{unitarity_residual, yang_baxter_residual, Chain, ChainSpec, Site};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn run(n: usize, name: &str, budget_s: f64, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let secs = start.elapsed().as_secs_f64();
    let ok = o.pass && secs <= budget_s;
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {n} ({name}): {verdict} [{}; {secs:.1} s, budget {budget_s} s]", o.detail);
    ok
}

fn note(s: String) {
    println!("    {s}");
}

fn h() -> C64 {
    real(1.0)
}

fn random_points(rng: &mut ChaCha8Rng, count: usize) -> Vec<C64> {
    (0..count).map(|_| c64(rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0)).collect()
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn algebraic_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = [0.0f64; 4];
    for n in 2..=3 {
        let pts = random_points(&mut rng, 20);
        let others = random_points(&mut rng, 20);
        let chain = Chain::new(ChainSpec::new(
            n,
            h(),
            vec![Site::new(HighestWeight::fundamental(n), c64(0.2, 0.1)), Site::new(HighestWeight::fundamental(n), real(-0.4))],
        )
        .unwrap())
        .unwrap();
        for (&a, &b) in pts.iter().zip(&others) {
            worst[0] = worst[0].max(yang_baxter_residual(a, b, h(), n).unwrap());
            worst[1] = worst[1].max(unitarity_residual(a, h(), n).unwrap());
            worst[2] = worst[2].max(chain.rtt_residual(a, b).unwrap());
            for block in 0..=n {
                let k = ReflectionSpec { block, xi: c64(0.7, -0.3) };
                worst[3] = worst[3].max(reflection_eq_residual(&k, a, b, h(), n));
            }
        }
    }
    let max = worst.iter().copied().fold(0.0, f64::max);
    outcome(
        max <= 1e-10,
        format!("YBE {:.1e}, unitarity {:.1e}, RTT {:.1e}, reflection {:.1e}", worst[0], worst[1], worst[2], worst[3]),
    )
}

fn quantum_determinant() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut chains: Vec<ChainSpec> = (1..=3).map(|ell| ChainSpec::fundamental(2, ell, h()).unwrap()).collect();
    chains.push(ChainSpec::uniform(HighestWeight::spin(2), 2, h()).unwrap());
    chains.extend((1..=2).map(|ell| ChainSpec::fundamental(3, ell, h()).unwrap()));
    let mut worst: f64 = 0.0;
    let mut centrality: f64 = 0.0;
    for spec in chains {
        let chain = Chain::new(spec.clone()).unwrap();
        let p = drinfeld(&spec);
        for l in random_points(&mut rng, 5) {
            let q = chain.qdet_antisym(l).unwrap();
            let expect = p.qdet(l, h());
            worst = worst.max((q.value - expect).norm() / expect.norm().max(1e-300));
            centrality = centrality.max(q.centrality_residual);
        }
    }
    outcome(worst <= 1e-9, format!("max relative deviation {worst:.1e}, centrality {centrality:.1e}"))
}

fn closed_spectrum() -> Outcome {
    let cfg = VerifyConfig::default();
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut count_ok = true;
    let mut l4m2 = 0;
    for ell in 2..=5 {
        let chain = Chain::new(ChainSpec::fundamental(2, ell, h()).unwrap()).unwrap();
        let r = verify_spectrum_closed(&chain, &cfg).unwrap();
        pass &= r.all_covered() && r.unmatched_solutions == 0 && r.max_residual <= 1e-7 && r.sample_points.len() >= 5;
        worst = worst.max(r.max_residual);
        for s in &r.sectors {
            let m = s.magnons[0];
            let expect = binom(ell, m) - if m > 0 { binom(ell, m - 1) } else { 0 };
            if s.solutions.len() != expect {
                count_ok = false;
                note(format!("ell={ell} M={m}: {} solutions, expected {expect}", s.solutions.len()));
            }
            if ell == 4 && m == 2 {
                l4m2 = s.solutions.len();
            }
        }
        if !r.all_covered() {
            note(format!("ell={ell}: coverage {:.3}", r.coverage));
        }
    }
    pass &= count_ok && l4m2 == 2;
    outcome(pass, format!("max |Lambda_pred - Lambda_diag| {worst:.1e}, sector counts ok {count_ok}, ell=4 M=2 has {l4m2}"))
}

fn non_fundamental() -> Outcome {
    let cfg = VerifyConfig { match_tol: 1e-6, ..VerifyConfig::default() };
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, spec) in [
        ("spin-1 ell=3", ChainSpec::uniform(HighestWeight::spin(2), 3, h()).unwrap()),
        ("gl(3) ell=3", ChainSpec::fundamental(3, 3, h()).unwrap()),
    ] {
        let chain = Chain::new(spec).unwrap();
        let r = verify_spectrum_closed(&chain, &cfg).unwrap();
        pass &= r.all_covered() && r.max_residual <= 1e-6;
        parts.push(format!("{label}: coverage {:.3}, residual {:.1e}", r.coverage, r.max_residual));
    }
    outcome(pass, parts.join(", "))
}

fn fusion() -> Outcome {
    let cfg = VerifyConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut fus: f64 = 0.0;
    let mut tel: f64 = 0.0;
    let mut vectors = 0;
    for ell in 2..=5 {
        let chain = Chain::new(ChainSpec::fundamental(2, ell, h()).unwrap()).unwrap();
        let r = verify_spectrum_closed(&chain, &cfg).unwrap();
        let lam = random_points(&mut rng, 5);
        let p = drinfeld(&chain.spec);
        for sector in &r.sectors {
            for sol in &sector.solutions {
                let roots = BetheRoots { magnons: sector.magnons.clone(), roots: sol.roots.clone() };
                for &l in &lam {
                    tel = tel.max((telescoping_product(&roots, 2, l, h()).unwrap() - 1.0).norm());
                }
                let Some(b) = sol.branch else { continue };
                let basis = &r.bases[b];
                for c in 0..basis.ncols() {
                    let v = basis.columns(c, 1).into_owned();
                    let l = lam[c % lam.len()];
                    let res = fusion_residual(&chain, l, &roots, &v).unwrap();
                    fus = fus.max(res.norm() / (1.0 + p.qdet(l, h()).norm()));
                    vectors += 1;
                }
            }
        }
    }
    outcome(
        fus <= 1e-8 && tel <= 1e-8,
        format!("fusion residual {fus:.1e} over {vectors} eigenvectors, telescoping {tel:.1e}"),
    )
}

fn open_spectrum() -> Outcome {
    let cfg = VerifyConfig { match_tol: 1e-6, ..VerifyConfig::default() };
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut residue: f64 = 0.0;
    let mut worst_cov: f64 = 1.0;
    for ell in 2..=3 {
        for block in 0..=2 {
            for xi in [real(0.5), c64(1.0, 0.3)] {
                let spec = OpenChainSpec::new(ChainSpec::fundamental(2, ell, h()).unwrap(), ReflectionSpec { block, xi }).unwrap();
                let open = OpenChain::new(spec.clone()).unwrap();
                let r = verify_spectrum_open(&open, &cfg).unwrap();
                if !r.all_covered() || r.max_residual > 1e-6 {
                    pass = false;
                    note(format!("ell={ell} M={block} xi={xi}: coverage {:.3}, residual {:.1e}", r.coverage, r.max_residual));
                }
                worst = worst.max(r.max_residual);
                worst_cov = worst_cov.min(r.coverage);
                for k in 0..=2 {
                    residue = residue.max(open_vacuum_residue(&spec, h() * (k as f64 / 2.0)).norm());
                }
            }
        }
    }
    pass &= residue <= 1e-8;
    outcome(pass, format!("min coverage {worst_cov:.3}, max residual {worst:.1e}, vacuum residues {residue:.1e}"))
}

fn symmetry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut closed: f64 = 0.0;
    let specs = [
        ChainSpec::fundamental(2, 3, h()).unwrap(),
        ChainSpec::fundamental(3, 2, h()).unwrap(),
        ChainSpec::uniform(HighestWeight::spin(2), 2, h()).unwrap(),
    ];
    for spec in specs {
        let chain = Chain::new(spec).unwrap();
        let gens = chain.symmetry_generators();
        for l in random_points(&mut rng, 3) {
            let t = chain.transfer_hat(l);
            for g in &gens {
                closed = closed.max(rel_commutator(g, &t));
            }
        }
    }
    let mut block_worst: f64 = 0.0;
    let mut off_ok = true;
    for (rank, ell, block) in [(2, 2, 0), (2, 2, 1), (2, 3, 1), (2, 2, 2), (3, 2, 1), (3, 2, 2)] {
        let spec = OpenChainSpec::new(ChainSpec::fundamental(rank, ell, h()).unwrap(), ReflectionSpec { block, xi: c64(0.6, 0.2) }).unwrap();
        let open = OpenChain::new(spec).unwrap();
        let sym = open.symmetry_generators();
        let mut off_max: f64 = 0.0;
        for l in random_points(&mut rng, 3) {
            let b = open.b_transfer_hat(l).unwrap();
            for (_, g) in &sym.block {
                block_worst = block_worst.max(rel_commutator(g, &b));
            }
            for (_, g) in &sym.off_block {
                off_max = off_max.max(rel_commutator(g, &b));
            }
        }
        if block > 0 && block < rank && off_max < 1e-3 {
            off_ok = false;
        }
    }
    outcome(
        closed <= 1e-10 && block_worst <= 1e-9 && off_ok,
        format!("closed {closed:.1e}, open block {block_worst:.1e}, off-block generators break symmetry {off_ok}"),
    )
}

fn hamiltonians() -> Outcome {
    // impurity display against the log-derivative, l = 3, a_p = 0.4
    let (ell, a) = (3, real(0.4));
    let mut display_res: f64 = 0.0;
    let mut corrected_res: f64 = 0.0;
    for p in 1..=ell {
        let chain = Chain::new(impurity_chain(2, ell, p, a, h()).unwrap()).unwrap();
        let log = closed_log_derivative_hamiltonian(&chain).unwrap();
        let disp = impurity_hamiltonian_display(ell, p, a, h()).unwrap();
        display_res = display_res.max(affine_fit(&disp.matrix, &log.matrix).residual);
        let cor = impurity_hamiltonian_corrected(ell, p, a, h()).unwrap();
        corrected_res = corrected_res.max(fro(&(&cor.matrix + log.matrix * h())) / fro(&cor.matrix));
    }
    let impurity_ok = display_res <= 1e-9;
    note(format!("impurity display vs log-derivative (affine): {display_res:.2e}"));
    note(format!("impurity display with the constant -hbar^2/d replaced by -hbar^2/d P_(p-1,p): {corrected_res:.1e}"));

    // chain with spin-1/2 ends and spin-1 bulk, l = 4
    let z = zarembo_chain(4, h()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let pts = random_points(&mut rng, 3);
    let commutator = |spec: &OpenChainSpec| -> f64 {
        let open = OpenChain::new(spec.clone()).unwrap();
        pts.iter().map(|&l| rel_commutator(&z.hamiltonian.matrix, &open.b_transfer_hat(l).unwrap())).fold(0.0, f64::max)
    };
    let plain_comm = commutator(&z.spec);
    let plain = Zarembo::bethe_factors(&z.spec).unwrap();
    let plain_exp = (exponent_of(&plain, 1.0), exponent_of(&plain, 3.0));
    let shifted_comm = commutator(&z.shifted_spec);
    let shifted = Zarembo::bethe_factors(&z.shifted_spec).unwrap();
    let shifted_exp = (exponent_of(&shifted, 1.0), exponent_of(&shifted, 3.0));
    let fused = pts.iter().map(|&l| rel_commutator(&z.hamiltonian.matrix, &z.fused_transfer(l).unwrap())).fold(0.0, f64::max);
    note(format!("H vs fused transfer: {fused:.1e}"));
    note(format!("shifts 0: [H, b] {plain_comm:.2e}, exponents (e_1, e_3) = {plain_exp:?}"));
    note(format!(
        "shifts hbar/2: [H, b] {shifted_comm:.1e}, exponents (e_1, e_3) = {shifted_exp:?}, e_2 exponent {}",
        exponent_of(&shifted, 2.0)
    ));
    let zarembo_ok = [(plain_comm, plain_exp), (shifted_comm, shifted_exp)].iter().any(|&(c, e)| c <= 1e-8 && e == (6, 2));

    // spin-s energy formula, (l, s) = (3, 1)
    let check = spin_s_energy_check(3, 2, h(), &VerifyConfig::default()).unwrap();
    let spin_ok = check.max_error <= 1e-7 && check.skipped == 0;
    note(format!(
        "spin-1 l=3 energies: {} levels, scale {:.6}, offset {:.6}, max error {:.1e}",
        check.pairs.len(),
        check.scale,
        check.offset,
        check.max_error
    ));
    outcome(
        impurity_ok && zarembo_ok && spin_ok,
        format!("impurity display {impurity_ok}, boundary spin-1 chain {zarembo_ok}, spin-s energies {spin_ok}"),
    )
}

/// dim of {X : [X, A] = 0 for all A}
fn commutant_dimension(ops: &[CMat]) -> usize {
    let d = ops[0].nrows();
    let dd = d * d;
    let mut gram = CMat::zeros(dd, dd);
    for a in ops {
        // vec(XA - AX) = (A^T (x) I - I (x) A) vec(X), column-major
        let id = CMat::identity(d, d);
        let k = a.transpose().kronecker(&id) - id.kronecker(a);
        gram += k.adjoint() * &k;
    }
    let ev = eigenvalues(&gram);
    let top = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
    ev.iter().filter(|z| z.norm() <= 1e-10 * top).count()
}

/// Dimension of the unital algebra generated by `ops`.
fn algebra_dimension(ops: &[CMat]) -> usize {
    let d = ops[0].nrows();
    let mut basis: Vec<CMat> = Vec::new();
    let add = |m: CMat, basis: &mut Vec<CMat>| -> bool {
        let mut v = m;
        for b in basis.iter() {
            let c = b.dotc(&v);
            v -= b * c;
        }
        let n = v.norm();
        if n > 1e-9 {
            basis.push(v / real(n));
            true
        } else {
            false
        }
    };
    add(CMat::identity(d, d), &mut basis);
    let mut frontier: Vec<CMat> = Vec::new();
    for a in ops {
        let scaled = a / real(a.norm().max(1e-300));
        if add(scaled.clone(), &mut basis) {
            frontier.push(basis.last().unwrap().clone());
        }
    }
    while let Some(m) = frontier.pop() {
        if basis.len() == d * d {
            break;
        }
        for a in ops {
            let p = &m * a / real(a.norm().max(1e-300));
            if add(p, &mut basis) {
                frontier.push(basis.last().unwrap().clone());
            }
        }
    }
    basis.len()
}

fn irreducibility() -> Outcome {
    let f2 = HighestWeight::fundamental(2);
    let s1 = HighestWeight::spin(2);
    let f3 = HighestWeight::fundamental(3);
    let a3 = HighestWeight::new(vec![1, 1, 0]).unwrap();
    let s3 = HighestWeight::new(vec![2, 0, 0]).unwrap();
    let cases: Vec<Vec<(HighestWeight, C64)>> = vec![
        vec![(f2.clone(), real(0.0)), (f2.clone(), real(0.0))],
        vec![(f2.clone(), real(0.0)), (f2.clone(), real(1.0))],
        vec![(f2.clone(), real(0.0)), (f2.clone(), real(-1.0))],
        vec![(f2.clone(), real(0.0)), (f2.clone(), real(0.5))],
        vec![(f2.clone(), real(0.0)), (f2.clone(), c64(2.0, 0.0))],
        vec![(s1.clone(), real(0.0)), (f2.clone(), real(0.0))],
        vec![(s1.clone(), real(0.0)), (f2.clone(), real(1.0))],
        vec![(s1.clone(), real(0.0)), (f2.clone(), real(-2.0))],
        vec![(s1.clone(), real(0.0)), (s1.clone(), real(1.0))],
        vec![(f2.clone(), real(0.0)), (f2.clone(), c64(0.3, 0.4)), (f2.clone(), real(0.7))],
        vec![(f3.clone(), real(0.0)), (f3.clone(), real(0.0))],
        vec![(f3.clone(), real(0.0)), (f3.clone(), real(1.0))],
        vec![(a3.clone(), real(0.0)), (f3.clone(), real(0.0))],
        vec![(f3.clone(), real(0.0)), (a3.clone(), real(2.0))],
        vec![(s3.clone(), real(0.0)), (f3.clone(), c64(0.5, 0.5))],
    ];
    let mut agree = 0;
    let mut burnside_agree = 0;
    for sites in &cases {
        let rank = sites[0].0.rank();
        let spec = ChainSpec::new(rank, h(), sites.iter().map(|(w, a)| Site::new(w.clone(), *a)).collect()).unwrap();
        let chain = Chain::new(spec).unwrap();
        let claim = tensor_irreducible(sites, h()).irreducible;
        // T(l) at len+1 distinct points spans the same operators as its coefficients
        let mut ops = Vec::new();
        for s in 0..=chain.len() {
            let t = chain.monodromy_hat(c64(0.37 + 0.83 * s as f64, 0.21 * s as f64));
            ops.extend(t.blocks.iter().cloned());
        }
        let commutant = commutant_dimension(&ops);
        let algebra = algebra_dimension(&ops);
        let oracle = commutant == 1;
        let burnside = algebra == chain.dim * chain.dim;
        agree += usize::from(oracle == claim);
        burnside_agree += usize::from(burnside == claim);
        if oracle != claim || burnside != claim {
            let desc: Vec<String> = sites.iter().map(|(w, a)| format!("{:?}@{a}", w.alpha())).collect();
            note(format!(
                "{}: criterion says irreducible={claim}, commutant dim {commutant}, algebra dim {algebra} of {}",
                desc.join(" "),
                chain.dim * chain.dim
            ));
        }
    }
    note(format!("algebra-dimension (Burnside) oracle agrees on {burnside_agree}/{}", cases.len()));
    outcome(agree == cases.len(), format!("commutant oracle agrees on {agree}/{}", cases.len()))
}

fn main() {
    let results = [
        run(1, "algebraic identities", 10.0, algebraic_identities),
        run(2, "quantum determinant", 30.0, quantum_determinant),
        run(3, "closed spectrum, fundamental gl(2)", 120.0, closed_spectrum),
        run(4, "non-fundamental closed chains", 300.0, non_fundamental),
        run(5, "fusion identity", f64::INFINITY, fusion),
        run(6, "open spectrum", 300.0, open_spectrum),
        run(7, "symmetry", f64::INFINITY, symmetry),
        run(8, "Hamiltonian cross-checks", f64::INFINITY, hamiltonians),
        run(9, "irreducibility", 60.0, irreducibility),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
