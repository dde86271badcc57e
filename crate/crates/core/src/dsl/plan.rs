use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One plan line, `Name(c1,...,cn)@event`. Without `@event` the schema's
/// designated event is meant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlanStep {
    pub action: String,
    pub args: Vec<String>,
    pub event: Option<String>,
}

impl PlanStep {
    pub fn new(action: &str, args: &[&str], event: Option<&str>) -> Self {
        PlanStep {
            action: action.to_string(),
            args: args.iter().map(|s| s.to_string()).collect(),
            event: event.map(str::to_string),
        }
    }

    /// `Name(c1,...,cn)`, the name ground instances carry.
    pub fn ground_name(&self) -> String {
        format!("{}({})", self.action, self.args.join(","))
    }
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.ground_name())?;
        if let Some(e) = &self.event {
            write!(f, "@{e}")?;
        }
        Ok(())
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '\'' | '*'))
}

pub fn parse_step(text: &str) -> Result<PlanStep> {
    parse_step_at(text.trim(), 1)
}

fn parse_step_at(s: &str, line: usize) -> Result<PlanStep> {
    let err = |msg: String| Error::Syntax { line, col: 1, msg };
    let (head, event) = match s.rsplit_once('@') {
        Some((h, e)) if is_ident(e.trim()) => (h.trim(), Some(e.trim().to_string())),
        Some(_) => return Err(err(format!("bad event in `{s}`"))),
        None => (s, None),
    };
    let (name, args) = match head.split_once('(') {
        Some((n, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| err(format!("missing `)` in `{s}`")))?;
            let args: Vec<String> = if inner.trim().is_empty() {
                vec![]
            } else {
                inner.split(',').map(|a| a.trim().to_string()).collect()
            };
            (n.trim(), args)
        }
        None => (head, vec![]),
    };
    if !is_ident(name) || !args.iter().all(|a| is_ident(a)) {
        return Err(err(format!("expected `Name(args)@event`, got `{s}`")));
    }
    Ok(PlanStep {
        action: name.to_string(),
        args,
        event,
    })
}

/// One step per line, `;` or `#` comments; `()` alone is the empty plan.
/// A JSON array of step strings is accepted too.
pub fn parse_plan(text: &str) -> Result<Vec<PlanStep>> {
    let trimmed = text.trim();
    if trimmed.starts_with('[') {
        let items: Vec<String> = serde_json::from_str(trimmed).map_err(|e| Error::Syntax {
            line: e.line(),
            col: e.column(),
            msg: e.to_string(),
        })?;
        return items.iter().map(|s| parse_step(s)).collect();
    }
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let l = raw.split([';', '#']).next().unwrap_or("").trim();
        if l.is_empty() || (l == "()" && out.is_empty()) {
            continue;
        }
        out.push(parse_step_at(l, i + 1)?);
    }
    Ok(out)
}

pub fn serialize_plan(plan: &[PlanStep]) -> String {
    if plan.is_empty() {
        return "()\n".into();
    }
    plan.iter().map(|s| format!("{s}\n")).collect()
}

pub fn plan_json(plan: &[PlanStep]) -> serde_json::Value {
    serde_json::Value::Array(plan.iter().map(|s| s.to_string().into()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steps() {
        let s = parse_step("Reboot(a1, sn1)@er1").unwrap();
        assert_eq!(s, PlanStep::new("Reboot", &["a1", "sn1"], Some("er1")));
        assert_eq!(s.to_string(), "Reboot(a1,sn1)@er1");
        assert_eq!(parse_step("Skip").unwrap(), PlanStep::new("Skip", &[], None));
        assert!(parse_step("Reboot(a1").is_err());
    }

    #[test]
    fn empty_plan_is_parens() {
        assert_eq!(serialize_plan(&[]), "()\n");
        assert!(parse_plan("()\n").unwrap().is_empty());
    }

    #[test]
    fn round_trip_text_and_json() {
        let p = vec![
            PlanStep::new("Malfunction", &["m1", "box"], Some("em")),
            PlanStep::new("Reboot", &["a1", "sn1"], Some("er1")),
        ];
        assert_eq!(parse_plan(&serialize_plan(&p)).unwrap(), p);
        assert_eq!(parse_plan(&plan_json(&p).to_string()).unwrap(), p);
        let with_comments = "; pi\nMalfunction(m1,box)@em\n\nReboot(a1,sn1)@er1 # last\n";
        assert_eq!(parse_plan(with_comments).unwrap(), p);
    }
}
