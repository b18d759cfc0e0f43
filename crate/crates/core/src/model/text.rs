//! Line-oriented text formats.
//!
//! ```text
//! workers: w1 w2
//! firms:   f1 f2
//! pref w1: f2 f1   # most preferred first
//! pref f1: w1
//! ```
//!
//! A matching is one `worker firm` pair per line. A family is a sequence of
//! `instance <name> { ... }` blocks.

use std::fmt::Write as _;

use thiserror::Error;

use super::{
    Edge, FamilyError, Instance, InstanceBuilder, InstanceError, InstanceFamily, Matching,
    MatchingError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Instance { line: usize, source: InstanceError },
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, message: message.into() }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(k) => &line[..k],
        None => line,
    }
    .trim()
}

fn check_label(line: usize, label: &str) -> Result<(), ParseError> {
    if label.contains([':', '{', '}']) {
        return Err(syntax(line, format!("invalid label `{label}`")));
    }
    Ok(())
}

/// Parses numbered lines (1-based line numbers of the enclosing document).
fn parse_instance_lines<'a, I>(lines: I, end_line: usize) -> Result<Instance, ParseError>
where
    I: IntoIterator<Item = (usize, &'a str)>,
{
    let mut builder = InstanceBuilder::default();
    let mut have_workers = false;
    let mut have_firms = false;
    // line of each pref declaration, to attribute instance errors
    let mut pref_lines: Vec<(String, usize)> = Vec::new();

    for (n, raw) in lines {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let (head, rest) = line
            .split_once(':')
            .ok_or_else(|| syntax(n, "expected `workers:`, `firms:` or `pref <agent>:`"))?;
        let head = head.trim();
        let items: Vec<&str> = rest.split_whitespace().collect();
        for l in &items {
            check_label(n, l)?;
        }
        match head.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["workers"] => {
                if have_workers {
                    return Err(syntax(n, "duplicate `workers:` line"));
                }
                have_workers = true;
                builder.workers(items);
            }
            ["firms"] => {
                if have_firms {
                    return Err(syntax(n, "duplicate `firms:` line"));
                }
                have_firms = true;
                builder.firms(items);
            }
            ["pref", agent] => {
                if pref_lines.iter().any(|(a, _)| a == agent) {
                    return Err(syntax(n, format!("second `pref` line for `{agent}`")));
                }
                pref_lines.push((agent.to_string(), n));
                builder.prefs(*agent, items);
            }
            _ => return Err(syntax(n, format!("unrecognized directive `{head}`"))),
        }
    }

    builder.build().map_err(|source| {
        let culprit = match &source {
            InstanceError::UnknownLabel(l) => pref_lines
                .iter()
                .find(|(a, _)| a == l)
                .map(|&(_, n)| n),
            InstanceError::DuplicateEntry { agent, .. }
            | InstanceError::SameSide { agent, .. } => {
                pref_lines.iter().find(|(a, _)| a == agent).map(|&(_, n)| n)
            }
            InstanceError::Asymmetric { from, .. } => {
                pref_lines.iter().find(|(a, _)| a == from).map(|&(_, n)| n)
            }
            _ => None,
        };
        // Unknown labels inside a list: point at the first list mentioning it.
        let culprit = culprit.or_else(|| match &source {
            InstanceError::UnknownLabel(_) => pref_lines.first().map(|&(_, n)| n),
            _ => None,
        });
        ParseError::Instance { line: culprit.unwrap_or(end_line), source }
    })
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let count = text.lines().count();
    parse_instance_lines(text.lines().enumerate().map(|(k, l)| (k + 1, l)), count.max(1))
}

pub fn serialize_instance(instance: &Instance) -> String {
    let mut out = String::new();
    out.push_str("workers:");
    for l in instance.worker_labels() {
        let _ = write!(out, " {l}");
    }
    out.push_str("\nfirms:");
    for l in instance.firm_labels() {
        let _ = write!(out, " {l}");
    }
    out.push('\n');
    for agent in instance.agents() {
        let _ = write!(out, "pref {}:", instance.label(agent));
        for other in instance.neighbors(agent) {
            let _ = write!(out, " {}", instance.label(other));
        }
        out.push('\n');
    }
    out
}

/// Parses `worker firm` lines against `instance`. Pairs must be edges.
pub fn parse_matching(text: &str, instance: &Instance) -> Result<Matching, ParseError> {
    let mut m = Matching::empty_for(instance);
    for (k, raw) in text.lines().enumerate() {
        let n = k + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [x, y] = parts.as_slice() else {
            return Err(syntax(n, "expected `worker firm`"));
        };
        let e = instance
            .edge_by_labels(x, y)
            .map_err(|source| ParseError::Instance { line: n, source })?;
        m.insert(e).map_err(|err| syntax(n, err.to_string()))?;
    }
    Ok(m)
}

pub fn serialize_matching(m: &Matching, instance: &Instance) -> String {
    let mut out = String::new();
    for Edge { worker, firm } in m.edges() {
        let _ = writeln!(
            out,
            "{} {}",
            instance.worker_labels()[worker],
            instance.firm_labels()[firm]
        );
    }
    out
}

pub fn parse_family(text: &str) -> Result<InstanceFamily, ParseError> {
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(k, l)| (k + 1, l)).collect();
    let mut instances = Vec::new();
    let mut names = Vec::new();
    let mut k = 0;
    while k < lines.len() {
        let (n, raw) = lines[k];
        let line = strip_comment(raw);
        k += 1;
        if line.is_empty() {
            continue;
        }
        let header: Vec<&str> = line.split_whitespace().collect();
        let name = match header.as_slice() {
            ["instance", name, "{"] => name.to_string(),
            ["instance", rest] if rest.ends_with('{') && rest.len() > 1 => {
                rest[..rest.len() - 1].to_string()
            }
            _ => return Err(syntax(n, "expected `instance <name> {`")),
        };
        let start = k;
        while k < lines.len() && strip_comment(lines[k].1) != "}" {
            k += 1;
        }
        if k == lines.len() {
            return Err(syntax(n, format!("instance `{name}` is not closed")));
        }
        let end_line = lines[k].0;
        instances.push(parse_instance_lines(lines[start..k].iter().copied(), end_line)?);
        names.push(name);
        k += 1;
    }
    Ok(InstanceFamily::with_names(instances, names)?)
}

pub fn serialize_family(family: &InstanceFamily) -> String {
    let mut out = String::new();
    for (name, inst) in family.names().iter().zip(family.instances()) {
        let _ = writeln!(out, "instance {name} {{");
        for line in serialize_instance(inst).lines() {
            let _ = writeln!(out, "  {line}");
        }
        out.push_str("}\n");
    }
    out
}
