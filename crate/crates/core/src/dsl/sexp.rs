use std::fmt;

use crate::error::{Error, Result};

/// Parenthesized expression with the position of its first character.
#[derive(Clone, Debug, PartialEq)]
pub enum Sexp {
    Atom { text: String, line: usize, col: usize },
    List { items: Vec<Sexp>, line: usize, col: usize },
}

impl Sexp {
    pub fn pos(&self) -> (usize, usize) {
        match self {
            Sexp::Atom { line, col, .. } | Sexp::List { line, col, .. } => (*line, *col),
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom { text, .. } => Some(text),
            Sexp::List { .. } => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List { items, .. } => Some(items),
            Sexp::Atom { .. } => None,
        }
    }

    pub fn is_atom(&self, s: &str) -> bool {
        self.atom().is_some_and(|a| a.eq_ignore_ascii_case(s))
    }

    /// Head symbol of a non-empty list.
    pub fn head(&self) -> Option<&str> {
        self.list().and_then(|l| l.first()).and_then(Sexp::atom)
    }

    pub fn err(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.pos();
        Error::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    pub fn expect_atom(&self, what: &str) -> Result<&str> {
        self.atom().ok_or_else(|| self.err(format!("expected {what}")))
    }

    pub fn expect_list(&self, what: &str) -> Result<&[Sexp]> {
        self.list().ok_or_else(|| self.err(format!("expected {what}")))
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom { text, .. } => f.write_str(text),
            Sexp::List { items, .. } => {
                f.write_str("(")?;
                for (i, s) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{s}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Reads every top-level expression. `;` starts a comment to end of line.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>> {
    let mut stack: Vec<(Vec<Sexp>, usize, usize)> = Vec::new();
    let mut top = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    chars.next();
                }
            }
            '(' => {
                chars.next();
                stack.push((Vec::new(), line, col));
                col += 1;
            }
            ')' => {
                chars.next();
                let Some((items, l, c)) = stack.pop() else {
                    return Err(Error::Syntax {
                        line,
                        col,
                        msg: "unbalanced `)`".into(),
                    });
                };
                col += 1;
                let s = Sexp::List { items, line: l, col: c };
                match stack.last_mut() {
                    Some((parent, _, _)) => parent.push(s),
                    None => top.push(s),
                }
            }
            _ => {
                let (l, c0) = (line, col);
                let mut text = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    text.push(c);
                    chars.next();
                    col += 1;
                }
                let s = Sexp::Atom { text, line: l, col: c0 };
                match stack.last_mut() {
                    Some((parent, _, _)) => parent.push(s),
                    None => top.push(s),
                }
            }
        }
    }
    if let Some((_, l, c)) = stack.last() {
        return Err(Error::Syntax {
            line: *l,
            col: *c,
            msg: "unclosed `(`".into(),
        });
    }
    Ok(top)
}

pub fn parse_one(text: &str) -> Result<Sexp> {
    let mut all = parse_all(text)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        0 => Err(Error::Syntax {
            line: 1,
            col: 1,
            msg: "empty input".into(),
        }),
        _ => Err(all[1].err("trailing input after the first expression")),
    }
}

/// Splits `a b - t c - u d` into `(names, type)` groups. Untyped trailing
/// names get `default`. A `-type` token without the space is accepted.
pub fn typed_list(items: &[Sexp], default: &str) -> Result<Vec<(Vec<String>, String)>> {
    let mut out = Vec::new();
    let mut pending = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let s = items[i].expect_atom("a name")?;
        if s == "-" {
            let ty = items
                .get(i + 1)
                .ok_or_else(|| items[i].err("`-` without a type"))?
                .expect_atom("a type")?;
            out.push((std::mem::take(&mut pending), ty.to_string()));
            i += 2;
        } else if let Some(ty) = s.strip_prefix('-').filter(|t| !t.is_empty()) {
            out.push((std::mem::take(&mut pending), ty.to_string()));
            i += 1;
        } else {
            pending.push(s.to_string());
            i += 1;
        }
    }
    if !pending.is_empty() {
        out.push((pending, default.to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_and_comments() {
        let all = parse_all(";; head\n(a (b c)\n  d) e").unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all[0].pos(), (2, 1));
        let inner = &all[0].list().unwrap()[1];
        assert_eq!(inner.pos(), (2, 4));
        assert_eq!(all[0].list().unwrap()[2].pos(), (3, 3));
        assert_eq!(all[1].to_string(), "e");
    }

    #[test]
    fn unbalanced() {
        assert!(matches!(parse_all("(a (b)"), Err(Error::Syntax { line: 1, col: 1, .. })));
        assert!(matches!(parse_all("a)"), Err(Error::Syntax { line: 1, col: 2, .. })));
    }

    #[test]
    fn typed_lists() {
        let s = parse_one("(a b - t c -u d)").unwrap();
        let g = typed_list(s.list().unwrap(), "object").unwrap();
        assert_eq!(
            g,
            vec![
                (vec!["a".into(), "b".into()], "t".into()),
                (vec!["c".into()], "u".into()),
                (vec!["d".into()], "object".into())
            ]
        );
    }
}
