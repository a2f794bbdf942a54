//! Instantiated Bethe equations as LaTeX lines or JSON factor descriptors.

use bethelab_core::bethe::{BetheEquations, ChainKind, RationalFn};
use bethelab_core::linalg::C64;
use serde::Serialize;

/// Which roots enter a factor: lambda^(level)_n combined with lambda^(other_level)_m.
#[derive(Debug, Clone, Serialize)]
pub struct PairOperand {
    pub level: usize,
    pub other_level: usize,
    /// "difference" or "sum"
    pub combination: &'static str,
    pub skip_self: bool,
}

/// lambda^(level)_n + shift
#[derive(Debug, Clone, Serialize)]
pub struct RootOperand {
    pub level: usize,
    pub shift: C64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Operand {
    Pair(PairOperand),
    Root(RootOperand),
}

#[derive(Debug, Clone, Serialize)]
pub struct Factor {
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub x: C64,
    pub operand: Operand,
    pub exponent: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Rhs {
    pub constant: C64,
    /// e-function factors; None when the right-hand side does not factor that way.
    pub factors: Option<Vec<Factor>>,
    pub zeros: Vec<C64>,
    pub poles: Vec<C64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelEquation {
    pub level: usize,
    pub count: usize,
    pub lhs: Vec<Factor>,
    pub rhs: Rhs,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquationSet {
    pub kind: ChainKind,
    pub hbar: C64,
    pub magnons: Vec<usize>,
    pub levels: Vec<LevelEquation>,
}

fn pair(level: usize, other: usize, combination: &'static str, x: f64) -> Factor {
    Factor {
        kind: "e",
        x: C64::new(x, 0.0),
        operand: Operand::Pair(PairOperand { level, other_level: other, combination, skip_self: level == other }),
        exponent: 1,
    }
}

fn rhs_of(r: &RationalFn, level: usize, hbar: C64, kind: ChainKind) -> Rhs {
    let tol = 1e-9 * hbar.norm();
    let reduced = r.clone().reduced(tol);
    let factors = reduced.e_factors(hbar, kind == ChainKind::Open, tol).map(|fs| {
        fs.into_iter()
            .map(|f| Factor { kind: "e", x: f.x, operand: Operand::Root(RootOperand { level, shift: -f.center }), exponent: f.power })
            .collect()
    });
    Rhs { constant: reduced.constant, factors, zeros: reduced.zeros, poles: reduced.poles }
}

pub fn describe(eqs: &BetheEquations) -> EquationSet {
    let levels = eqs.magnons.len();
    let out = (0..levels)
        .map(|k| {
            let level = k + 1;
            let mut lhs = Vec::new();
            let mut push = |other: usize, x: f64| {
                lhs.push(pair(level, other, "difference", x));
                if eqs.kind == ChainKind::Open {
                    lhs.push(pair(level, other, "sum", x));
                }
            };
            push(level, 2.0);
            if level > 1 {
                push(level - 1, -1.0);
            }
            if level < levels {
                push(level + 1, -1.0);
            }
            LevelEquation { level, count: eqs.magnons[k], lhs, rhs: rhs_of(&eqs.rhs[k], level, eqs.hbar, eqs.kind) }
        })
        .collect();
    EquationSet { kind: eqs.kind, hbar: eqs.hbar, magnons: eqs.magnons.clone(), levels: out }
}

/// Compact decimal: integers without a fractional part, complex values as (a+bi).
pub fn fmt_num(z: C64) -> String {
    let clean = |x: f64| {
        let r = (x * 1e10).round() / 1e10;
        if r == 0.0 {
            0.0
        } else {
            r
        }
    };
    let (re, im) = (clean(z.re), clean(z.im));
    if im == 0.0 {
        format!("{re}")
    } else if re == 0.0 {
        format!("{im}i")
    } else {
        let sign = if im < 0.0 { '-' } else { '+' };
        format!("({re}{sign}{}i)", im.abs())
    }
}

fn root(level: usize, idx: char) -> String {
    format!("\\lambda^{{({level})}}_{idx}")
}

fn shift_tex(shift: C64, hbar: C64) -> String {
    let s = shift / hbar;
    if s.norm() < 1e-12 {
        return String::new();
    }
    if s.im.abs() < 1e-12 {
        let v = fmt_num(C64::new(s.re.abs(), 0.0));
        let sign = if s.re < 0.0 { '-' } else { '+' };
        let coeff = if v == "1" { String::new() } else { v };
        format!("{sign}{coeff}\\hbar")
    } else {
        format!("+{}\\hbar", fmt_num(s))
    }
}

fn factor_tex(f: &Factor, hbar: C64, magnons: &[usize]) -> String {
    let x = fmt_num(f.x);
    let body = match &f.operand {
        Operand::Pair(p) => {
            let op = if p.combination == "sum" { '+' } else { '-' };
            format!("e_{{{x}}}\\left({}{op}{}\\right)", root(p.level, 'n'), root(p.other_level, 'm'))
        }
        Operand::Root(r) => format!("e_{{{x}}}\\left({}{}\\right)", root(r.level, 'n'), shift_tex(r.shift, hbar)),
    };
    match &f.operand {
        Operand::Pair(p) => {
            let upper = magnons.get(p.other_level - 1).copied().unwrap_or(0);
            let under = if p.skip_self { "m=1,\\,m\\neq n".to_string() } else { "m=1".to_string() };
            format!("\\prod_{{{under}}}^{{{upper}}}{body}")
        }
        Operand::Root(_) if f.exponent != 1 => format!("\\left[{body}\\right]^{{{}}}", f.exponent),
        Operand::Root(_) => body,
    }
}

/// One equation per level: LHS = RHS, for 1 <= n <= M^(k).
pub fn to_latex(set: &EquationSet) -> String {
    let mut lines = Vec::new();
    for lv in &set.levels {
        let lhs: Vec<String> = lv.lhs.iter().map(|f| factor_tex(f, set.hbar, &set.magnons)).collect();
        let lhs = if lhs.is_empty() { "1".to_string() } else { lhs.join(" ") };
        let mut rhs = Vec::new();
        let c = lv.rhs.constant;
        match &lv.rhs.factors {
            Some(fs) => {
                if (c - 1.0).norm() > 1e-12 || fs.is_empty() {
                    rhs.push(fmt_num(c));
                }
                rhs.extend(fs.iter().map(|f| factor_tex(f, set.hbar, &set.magnons)));
            }
            None => {
                let poly = |pts: &[C64]| -> String {
                    if pts.is_empty() {
                        return "1".into();
                    }
                    pts.iter().map(|p| format!("({}-{})", root(lv.level, 'n'), fmt_num(*p))).collect::<Vec<_>>().join("")
                };
                rhs.push(format!("{}\\frac{{{}}}{{{}}}", fmt_num(c), poly(&lv.rhs.zeros), poly(&lv.rhs.poles)));
            }
        }
        lines.push(format!("{lhs} = {} \\quad (1\\leq n\\leq {})", rhs.join(" "), lv.count));
    }
    lines.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use bethelab_core::linalg::real;
    use bethelab_core::rep_gl::HighestWeight;
    use bethelab_core::spectrum::closed_equations;
    use bethelab_core::yangian::{ChainSpec, Site};

    #[test]
    fn fundamental_rhs_is_e1_power() {
        let spec = ChainSpec::fundamental(2, 3, real(1.0)).unwrap();
        let set = describe(&closed_equations(&spec, &[1]).unwrap());
        let fs = set.levels[0].rhs.factors.as_ref().unwrap();
        assert_eq!(fs.len(), 1);
        assert_eq!(fs[0].exponent, 3);
        let tex = to_latex(&set);
        assert!(tex.contains("\\left[e_{1}\\left(\\lambda^{(1)}_n\\right)\\right]^{3}"), "{tex}");
    }

    #[test]
    fn shifted_sites_render_shifts() {
        let w = HighestWeight::fundamental(2);
        let spec = ChainSpec::new(2, real(1.0), vec![Site::new(w.clone(), real(0.0)), Site::new(w, real(0.4))]).unwrap();
        let tex = to_latex(&describe(&closed_equations(&spec, &[1]).unwrap()));
        assert!(tex.contains("e_{1}\\left(\\lambda^{(1)}_n+0.4\\hbar\\right)"), "{tex}");
    }

    #[test]
    fn spin_one_rhs() {
        let spec = ChainSpec::uniform(HighestWeight::spin(2), 3, real(1.0)).unwrap();
        let tex = to_latex(&describe(&closed_equations(&spec, &[2]).unwrap()));
        assert!(tex.contains("\\left[e_{2}\\left(\\lambda^{(1)}_n-0.5\\hbar\\right)\\right]^{3}"), "{tex}");
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(real(2.0)), "2");
        assert_eq!(fmt_num(C64::new(0.5, -0.25)), "(0.5-0.25i)");
    }
}
