//! Concrete syntax output. The parser reads back everything printed here
//! except `RatScale`, which is shown as `(p/q)*t` for debugging only.

use super::{Formula, Term};

// Term precedence levels, loosest first.
const T_ADD: u8 = 1;
const T_LAT: u8 = 2;
const T_SCALE: u8 = 3;
const T_UNARY: u8 = 4;
const T_ATOM: u8 = 5;

fn term_prec(t: &Term) -> u8 {
    match t {
        Term::Add(..) => T_ADD,
        Term::GMeet(..) | Term::GJoin(..) | Term::LMeet(..) | Term::LJoin(..) => T_LAT,
        Term::IntScale(..) | Term::RatScale(..) => T_SCALE,
        Term::Neg(..) => T_UNARY,
        _ => T_ATOM,
    }
}

fn term_at(t: &Term, min: u8, out: &mut String) {
    if term_prec(t) < min {
        out.push('(');
        write_term(t, out);
        out.push(')');
    } else {
        write_term(t, out);
    }
}

fn write_term(t: &Term, out: &mut String) {
    match t {
        Term::GVar(v) | Term::LVar(v) => out.push_str(v),
        Term::Zero => out.push('0'),
        Term::Bot => out.push_str("bot"),
        Term::Top => out.push_str("top"),
        Term::Add(a, b) => {
            term_at(a, T_ADD, out);
            match &**b {
                Term::Neg(inner) => {
                    out.push_str(" - ");
                    term_at(inner, T_LAT, out);
                }
                _ => {
                    out.push_str(" + ");
                    term_at(b, T_LAT, out);
                }
            }
        }
        Term::GMeet(a, b) | Term::GJoin(a, b) | Term::LMeet(a, b) | Term::LJoin(a, b) => {
            let op = match t {
                Term::GMeet(..) => "meet",
                Term::GJoin(..) => "join",
                Term::LMeet(..) => "cap",
                _ => "cup",
            };
            term_at(a, T_LAT, out);
            out.push(' ');
            out.push_str(op);
            out.push(' ');
            term_at(b, T_SCALE, out);
        }
        Term::IntScale(n, a) => {
            out.push_str(&n.to_string());
            out.push('*');
            term_at(a, T_SCALE, out);
        }
        Term::RatScale(q, a) => {
            out.push_str(&format!("({q})*"));
            term_at(a, T_SCALE, out);
        }
        Term::Neg(a) => {
            out.push('-');
            // `-(-x)` and `-(2*x)` keep their structure under re-parsing.
            let starts_with_minus = matches!(&**a, Term::Neg(_))
                || matches!(&**a, Term::IntScale(n, _) if n.sign() == num_bigint::Sign::Minus);
            if starts_with_minus {
                out.push('(');
                write_term(a, out);
                out.push(')');
            } else {
                term_at(a, T_UNARY, out);
            }
        }
        Term::Compl(a) => {
            out.push_str("compl(");
            write_term(a, out);
            out.push(')');
        }
        Term::Val(a) => {
            out.push_str("P(");
            write_term(a, out);
            out.push(')');
        }
    }
}

pub(super) fn term_to_string(t: &Term) -> String {
    let mut s = String::new();
    write_term(t, &mut s);
    s
}

const F_QUANT: u8 = 0;
const F_IMPL: u8 = 1;
const F_OR: u8 = 2;
const F_AND: u8 = 3;
const F_NOT: u8 = 4;
const F_ATOM: u8 = 5;

fn formula_prec(f: &Formula) -> u8 {
    match f {
        Formula::Exists(..) | Formula::Forall(..) => F_QUANT,
        Formula::Implies(..) => F_IMPL,
        Formula::Or(..) => F_OR,
        Formula::And(..) => F_AND,
        Formula::Not(..) => F_NOT,
        _ => F_ATOM,
    }
}

fn formula_at(f: &Formula, min: u8, out: &mut String) {
    if formula_prec(f) < min {
        out.push('(');
        write_formula(f, out);
        out.push(')');
    } else {
        write_formula(f, out);
    }
}

fn write_formula(f: &Formula, out: &mut String) {
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::GLeq(a, b) | Formula::GEq(a, b) | Formula::LBelow(a, b) | Formula::LEq(a, b) => {
            let rel = match f {
                Formula::GLeq(..) => "<=",
                Formula::LBelow(..) => "<<",
                _ => "=",
            };
            write_term(a, out);
            out.push(' ');
            out.push_str(rel);
            out.push(' ');
            write_term(b, out);
        }
        Formula::Not(a) => {
            out.push('~');
            if a.is_atom() {
                out.push('(');
                write_formula(a, out);
                out.push(')');
            } else {
                formula_at(a, F_NOT, out);
            }
        }
        Formula::And(a, b) => {
            formula_at(a, F_AND, out);
            out.push_str(" & ");
            formula_at(b, F_NOT, out);
        }
        Formula::Or(a, b) => {
            formula_at(a, F_OR, out);
            out.push_str(" | ");
            formula_at(b, F_AND, out);
        }
        Formula::Implies(a, b) => {
            formula_at(a, F_OR, out);
            out.push_str(" -> ");
            formula_at(b, F_IMPL, out);
        }
        Formula::Exists(v, s, a) | Formula::Forall(v, s, a) => {
            let q = if matches!(f, Formula::Exists(..)) {
                "exists"
            } else {
                "forall"
            };
            out.push_str(&format!("{q} {v}:{s}. "));
            write_formula(a, out);
        }
    }
}

pub(super) fn formula_to_string(f: &Formula) -> String {
    let mut s = String::new();
    write_formula(f, &mut s);
    s
}

#[cfg(test)]
mod tests {
    use super::super::{Sort, Term};
    use super::*;

    #[test]
    fn terms() {
        let x = || Term::gvar("x");
        let y = || Term::gvar("y");
        assert_eq!(Term::sub(y(), x()).to_string(), "y - x");
        assert_eq!(Term::neg(Term::scale(2, x())).to_string(), "-(2*x)");
        assert_eq!(Term::scale(-2, x()).to_string(), "-2*x");
        assert_eq!(
            Term::add(x(), Term::add(y(), x())).to_string(),
            "x + (y + x)"
        );
        assert_eq!(Term::gmeet(Term::add(x(), y()), y()).to_string(), "(x + y) meet y");
        assert_eq!(Term::val(Term::neg(x())).to_string(), "P(-x)");
    }

    #[test]
    fn formulas() {
        let a = Formula::LEq(Term::lvar("l"), Term::Top);
        let b = Formula::LEq(Term::lvar("m"), Term::Bot);
        assert_eq!(
            Formula::and(Formula::exists("k", Sort::L, a.clone()), b.clone()).to_string(),
            "(exists k:L. l = top) & m = bot"
        );
        assert_eq!(Formula::not(a.clone()).to_string(), "~(l = top)");
        assert_eq!(
            Formula::implies(Formula::implies(a.clone(), b.clone()), a.clone()).to_string(),
            "(l = top -> m = bot) -> l = top"
        );
    }
}
