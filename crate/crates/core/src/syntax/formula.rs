use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::{Term, Var, EQ};
use crate::dynamics::ActionModel;

/// Handle on the action model a dynamic modality refers to.
pub type ActionRef = Arc<ActionModel>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub rel: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(rel: &str, args: Vec<Term>) -> Self {
        Atom {
            rel: rel.to_string(),
            args,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn is_free(&self) -> bool {
        self.args.iter().all(Term::is_free)
    }

    pub fn is_equality(&self) -> bool {
        self.rel == EQ
    }
}

/// Formulas of the static and dynamic languages.
///
/// `Bottom`, `Or`, `Implies`, `Iff`, `Exists` and `Neq` are abbreviations;
/// [`Formula::normalize`] rewrites them into the core connectives.
#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    Top,
    Bottom,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Knows(Term, Box<Formula>),
    Forall(Var, Box<Formula>),
    Exists(Var, Box<Formula>),
    Neq(Term, Term),
    Dyn(ActionRef, String, Box<Formula>),
}

impl Formula {
    pub fn atom(rel: &str, args: Vec<Term>) -> Formula {
        Formula::Atom(Atom::new(rel, args))
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::atom(EQ, vec![a, b])
    }

    pub fn neq(a: Term, b: Term) -> Formula {
        Formula::Neq(a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    /// Conjunction; collapses the empty and singleton cases.
    pub fn and(mut fs: Vec<Formula>) -> Formula {
        match fs.len() {
            0 => Formula::Top,
            1 => fs.pop().unwrap(),
            _ => Formula::And(fs),
        }
    }

    pub fn and2(a: Formula, b: Formula) -> Formula {
        Formula::And(vec![a, b])
    }

    pub fn or(mut fs: Vec<Formula>) -> Formula {
        match fs.len() {
            0 => Formula::Bottom,
            1 => fs.pop().unwrap(),
            _ => Formula::Or(fs),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn knows(t: Term, f: Formula) -> Formula {
        Formula::Knows(t, Box::new(f))
    }

    pub fn forall(v: Var, f: Formula) -> Formula {
        Formula::Forall(v, Box::new(f))
    }

    pub fn exists(v: Var, f: Formula) -> Formula {
        Formula::Exists(v, Box::new(f))
    }

    pub fn dynamic(a: ActionRef, event: &str, f: Formula) -> Formula {
        Formula::Dyn(a, event.to_string(), Box::new(f))
    }

    /// Rewrites abbreviations into `Top`, `Atom`, `Not`, `And`, `Knows`,
    /// `Forall` and `Dyn`. Action models under `Dyn` are left untouched.
    pub fn normalize(&self) -> Formula {
        use Formula::*;
        match self {
            Top => Top,
            Bottom => Formula::not(Top),
            Atom(a) => Atom(a.clone()),
            Not(f) => Formula::not(f.normalize()),
            And(fs) => Formula::and(fs.iter().map(Formula::normalize).collect()),
            Or(fs) => match fs.len() {
                0 => Formula::not(Top),
                1 => fs[0].normalize(),
                _ => Formula::not(And(
                    fs.iter().map(|f| Formula::not(f.normalize())).collect(),
                )),
            },
            Implies(a, b) => Formula::not(And(vec![a.normalize(), Formula::not(b.normalize())])),
            Iff(a, b) => {
                let (a, b) = (a.normalize(), b.normalize());
                And(vec![
                    Formula::not(And(vec![a.clone(), Formula::not(b.clone())])),
                    Formula::not(And(vec![b, Formula::not(a)])),
                ])
            }
            Knows(t, f) => Formula::knows(t.clone(), f.normalize()),
            Forall(v, f) => Formula::forall(v.clone(), f.normalize()),
            Exists(v, f) => Formula::not(Formula::forall(v.clone(), Formula::not(f.normalize()))),
            Neq(a, b) => Formula::not(Formula::eq(a.clone(), b.clone())),
            Dyn(a, e, f) => Dyn(a.clone(), e.clone(), Box::new(f.normalize())),
        }
    }

    /// Immediate subformulas, not including formulas inside action models.
    pub fn children(&self) -> Vec<&Formula> {
        use Formula::*;
        match self {
            Top | Bottom | Atom(_) | Neq(..) => vec![],
            Not(f) | Knows(_, f) | Forall(_, f) | Exists(_, f) | Dyn(_, _, f) => vec![f],
            And(fs) | Or(fs) => fs.iter().collect(),
            Implies(a, b) | Iff(a, b) => vec![a, b],
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a Var>, out: &mut BTreeSet<Var>) {
        use Formula::*;
        let mut term = |t: &Term, bound: &Vec<&Var>| {
            for v in t.vars() {
                if !bound.contains(&&v) {
                    out.insert(v);
                }
            }
        };
        match self {
            Top | Bottom => {}
            Atom(a) => a.args.iter().for_each(|t| term(t, bound)),
            Neq(a, b) => {
                term(a, bound);
                term(b, bound);
            }
            Knows(t, f) => {
                term(t, bound);
                f.collect_free(bound, out);
            }
            Forall(v, f) | Exists(v, f) => {
                bound.push(v);
                f.collect_free(bound, out);
                bound.pop();
            }
            _ => {
                for c in self.children() {
                    c.collect_free(bound, out);
                }
            }
        }
    }

    /// Every variable occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Atom(a) => a.args.iter().for_each(|t| t.collect_vars(&mut out)),
            Formula::Neq(a, b) => {
                a.collect_vars(&mut out);
                b.collect_vars(&mut out);
            }
            Formula::Knows(t, _) => t.collect_vars(&mut out),
            Formula::Forall(v, _) | Formula::Exists(v, _) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    /// Pre-order traversal, not descending into action models.
    pub fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn is_static(&self) -> bool {
        let mut stat = true;
        self.visit(&mut |f| {
            if matches!(f, Formula::Dyn(..)) {
                stat = false;
            }
        });
        stat
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Whether `x` occurs free somewhere in the scope of a `Knows` or `Dyn`.
    pub fn free_under_modality(&self, x: &Var) -> bool {
        fn go(f: &Formula, x: &Var, under: bool) -> bool {
            use Formula::*;
            match f {
                Top | Bottom => false,
                Atom(a) => under && a.args.iter().any(|t| t.mentions(x)),
                Neq(a, b) => under && (a.mentions(x) || b.mentions(x)),
                Knows(t, g) => (under && t.mentions(x)) || go(g, x, true),
                Dyn(_, _, g) => go(g, x, true),
                Forall(v, g) | Exists(v, g) => v != x && go(g, x, under),
                _ => f.children().into_iter().any(|c| go(c, x, under)),
            }
        }
        go(self, x, false)
    }

    /// Number of nodes, not counting action models.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    fn open_ended(&self) -> bool {
        match self {
            Formula::Forall(..) | Formula::Exists(..) => true,
            Formula::Not(f) | Formula::Knows(_, f) | Formula::Dyn(_, _, f) => f.open_ended(),
            _ => false,
        }
    }
}

fn operand(f: &mut fmt::Formatter<'_>, g: &Formula) -> fmt::Result {
    if g.open_ended() {
        write!(f, "({g})")
    } else {
        write!(f, "{g}")
    }
}

fn joined(f: &mut fmt::Formatter<'_>, fs: &[Formula], op: &str) -> fmt::Result {
    f.write_str("(")?;
    for (i, g) in fs.iter().enumerate() {
        if i > 0 {
            write!(f, " {op} ")?;
        }
        operand(f, g)?;
    }
    f.write_str(")")
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_equality() && self.args.len() == 2 {
            return write!(f, "{} = {}", self.args[0], self.args[1]);
        }
        f.write_str(&self.rel)?;
        if self.args.is_empty() {
            return Ok(());
        }
        f.write_str("(")?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// Infix rendering, readable back by the infix parser in `dsl`.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Formula::*;
        match self {
            Top => f.write_str("true"),
            Bottom => f.write_str("false"),
            Atom(a) if a.is_equality() => write!(f, "({a})"),
            Atom(a) => write!(f, "{a}"),
            Neq(a, b) => write!(f, "({a} != {b})"),
            Not(g) => {
                f.write_str("~")?;
                operand(f, g)
            }
            And(fs) => joined(f, fs, "&"),
            Or(fs) => joined(f, fs, "|"),
            Implies(a, b) => joined(f, &[(**a).clone(), (**b).clone()], "->"),
            Iff(a, b) => joined(f, &[(**a).clone(), (**b).clone()], "<->"),
            Knows(t, g) => {
                write!(f, "K[{t}] ")?;
                operand(f, g)
            }
            Forall(v, g) => write!(f, "forall {}:{}. {g}", v.name, v.sort),
            Exists(v, g) => write!(f, "exists {}:{}. {g}", v.name, v.sort),
            Dyn(a, e, g) => {
                write!(f, "[{}@{e}] ", a.name)?;
                operand(f, g)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorpusConfig, Generator};
    use crate::oracle::{self, Env};
    use crate::syntax::Sort;
    use proptest::prelude::*;

    fn x() -> Var {
        Var::new("x", Sort::Agt)
    }

    fn qx() -> Formula {
        Formula::atom("q", vec![Term::Var(x())])
    }

    #[test]
    fn free_and_bound() {
        let f = Formula::and2(qx(), Formula::forall(x(), qx()));
        assert_eq!(f.free_vars(), BTreeSet::from([x()]));
        assert!(!Formula::forall(x(), f.clone()).free_vars().contains(&x()));
        assert_eq!(f.all_vars(), BTreeSet::from([x()]));
        assert_eq!(f.size(), 4);
    }

    #[test]
    fn under_modality() {
        let a = Term::constant("a");
        assert!(!qx().free_under_modality(&x()));
        assert!(Formula::knows(a.clone(), qx()).free_under_modality(&x()));
        assert!(!Formula::knows(Term::Var(x()), Formula::Top).free_under_modality(&x()));
        assert!(Formula::knows(a.clone(), Formula::knows(Term::Var(x()), Formula::Top)).free_under_modality(&x()));
        assert!(!Formula::knows(a, Formula::forall(x(), qx())).free_under_modality(&x()));
    }

    #[test]
    fn normal_form_connectives() {
        let f = Formula::or(vec![Formula::Bottom, Formula::iff(qx(), Formula::exists(x(), qx()))]);
        let mut seen = true;
        f.normalize().visit(&mut |g| {
            if !matches!(g, Formula::Top | Formula::Atom(_) | Formula::Not(_) | Formula::And(_) | Formula::Forall(..)) {
                seen = false;
            }
        });
        assert!(seen);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn normalize_preserves_truth(seed in any::<u64>()) {
            let mut g = Generator::new(seed, CorpusConfig::default());
            let m = g.model();
            let f = g.formula(3, 1);
            let n = f.normalize();
            prop_assert_eq!(n.normalize(), n.clone());
            for w in 0..m.num_worlds() {
                prop_assert_eq!(oracle::holds(&m, w, &Env::new(), &f), oracle::holds(&m, w, &Env::new(), &n));
            }
        }
    }
}
