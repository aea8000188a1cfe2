//! CPLEX LP text writer.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::num::Scalar;

use super::model::{LinearProgram, Relation, Sense, VarId};
use super::LpError;

const LINE_LIMIT: usize = 250;

/// Maps a model name onto the LP-format identifier alphabet.
///
/// Brackets become braces, `:` becomes `|`, anything else outside the
/// allowed set becomes `_`. Names that could be read as a number get a
/// leading underscore.
pub fn sanitize_name(name: &str) -> String {
    let mut out = String::with_capacity(name.len() + 1);
    for ch in name.chars() {
        let mapped = match ch {
            '[' => '{',
            ']' => '}',
            ':' => '|',
            c if c.is_ascii_alphanumeric() => c,
            c if "!\"#$%&()/,.;?@_`'{}|~".contains(c) => c,
            _ => '_',
        };
        out.push(mapped);
    }
    match out.chars().next() {
        None => "_".to_string(),
        Some(c) if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' => format!("_{out}"),
        _ => out,
    }
}

fn unique_names<'a>(raw: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut taken = HashSet::new();
    raw.map(|n| {
        let base = sanitize_name(n);
        let mut name = base.clone();
        let mut k = 1;
        while !taken.insert(name.clone()) {
            name = format!("{base}#{k}");
            k += 1;
        }
        name
    })
    .collect()
}

fn number<T: Scalar>(v: &T) -> String {
    format!("{}", v.to_f64_value())
}

struct Line {
    text: String,
    out: String,
}

impl Line {
    fn new(head: String) -> Self {
        Self {
            text: head,
            out: String::new(),
        }
    }

    fn push(&mut self, piece: &str) {
        if self.text.len() + piece.len() > LINE_LIMIT {
            self.out.push_str(&self.text);
            self.out.push('\n');
            self.text = String::from(" ");
        }
        self.text.push_str(piece);
    }

    fn finish(mut self) -> String {
        self.out.push_str(&self.text);
        self.out.push('\n');
        self.out
    }
}

fn expression<T: Scalar>(line: &mut Line, terms: &[(VarId, T)], names: &[String]) {
    for (k, (v, c)) in terms.iter().enumerate() {
        let neg = *c < T::zero();
        let mag = c.abs();
        let coef = if mag == T::one() {
            String::new()
        } else {
            format!("{} ", number(&mag))
        };
        let piece = match (k, neg) {
            (0, false) => format!(" {coef}{}", names[v.index()]),
            (0, true) => format!(" - {coef}{}", names[v.index()]),
            (_, false) => format!(" + {coef}{}", names[v.index()]),
            (_, true) => format!(" - {coef}{}", names[v.index()]),
        };
        line.push(&piece);
    }
}

/// Renders `lp` in CPLEX LP format. Variables and constraints appear in
/// declaration order.
pub fn to_lp_string<T: Scalar>(lp: &LinearProgram<T>) -> String {
    let names = unique_names(lp.variables().map(|(_, n, _)| n));
    let raw_rows: Vec<String> = lp
        .constraints()
        .iter()
        .enumerate()
        .map(|(i, c)| if c.name.is_empty() { format!("c{i}") } else { c.name.clone() })
        .collect();
    let row_names = unique_names(raw_rows.iter().map(String::as_str));

    let mut s = String::new();
    let _ = writeln!(s, "\\ {}", lp.name());
    s.push_str(match lp.sense() {
        Sense::Maximize => "Maximize\n",
        Sense::Minimize => "Minimize\n",
    });
    let mut obj = Line::new(" obj:".to_string());
    expression(&mut obj, lp.objective(), &names);
    s.push_str(&obj.finish());

    s.push_str("Subject To\n");
    for (c, name) in lp.constraints().iter().zip(&row_names) {
        let mut line = Line::new(format!(" {name}:"));
        if c.terms.is_empty() {
            // LP format needs a variable on the left; pin to the first one.
            line.push(" 0 ");
            line.push(names.first().map(String::as_str).unwrap_or("_"));
        }
        expression(&mut line, &c.terms, &names);
        let rel = match c.relation {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        };
        line.push(&format!(" {rel} {}", number(&c.rhs)));
        s.push_str(&line.finish());
    }

    let mut bounds = String::new();
    let mut binaries = Vec::new();
    let mut generals = Vec::new();
    for (v, _, var) in lp.variables() {
        let name = &names[v.index()];
        let zero = T::zero();
        let binary = var.integer && var.lower.as_ref() == Some(&zero) && var.upper.as_ref() == Some(&T::one());
        if var.integer {
            if binary {
                binaries.push(name.clone());
                continue;
            }
            generals.push(name.clone());
        }
        match (&var.lower, &var.upper) {
            (Some(l), None) if l.is_zero() => {}
            (Some(l), None) => {
                let _ = writeln!(bounds, " {name} >= {}", number(l));
            }
            (None, None) => {
                let _ = writeln!(bounds, " {name} free");
            }
            (None, Some(u)) => {
                let _ = writeln!(bounds, " -inf <= {name} <= {}", number(u));
            }
            (Some(l), Some(u)) if l == u => {
                let _ = writeln!(bounds, " {name} = {}", number(l));
            }
            (Some(l), Some(u)) => {
                let _ = writeln!(bounds, " {} <= {name} <= {}", number(l), number(u));
            }
        }
    }
    if !bounds.is_empty() {
        s.push_str("Bounds\n");
        s.push_str(&bounds);
    }
    for (title, list) in [("Binaries", binaries), ("Generals", generals)] {
        if list.is_empty() {
            continue;
        }
        s.push_str(title);
        s.push('\n');
        let mut line = Line::new(String::new());
        for n in list {
            line.push(&format!(" {n}"));
        }
        s.push_str(&line.finish());
    }
    s.push_str("End\n");
    s
}

pub fn write_lp<T: Scalar, W: Write>(lp: &LinearProgram<T>, out: &mut W) -> Result<(), LpError> {
    out.write_all(to_lp_string(lp).as_bytes())?;
    Ok(())
}

pub fn export_lp_file<T: Scalar>(lp: &LinearProgram<T>, path: impl AsRef<Path>) -> Result<(), LpError> {
    std::fs::write(path, to_lp_string(lp))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_constraint_file() {
        let mut lp = LinearProgram::<f64>::new("t");
        let x = lp.add_nonneg("x").unwrap();
        lp.add_constraint("", vec![(x, 1.0)], Relation::Le, 3.0).unwrap();
        lp.set_objective(Sense::Maximize, vec![(x, 1.0)]).unwrap();
        let s = to_lp_string(&lp);
        assert!(s.contains("Maximize\n"));
        assert!(s.contains(" obj: x\n"));
        assert!(s.contains("Subject To\n"));
        assert!(s.contains(" c0: x <= 3\n"));
        assert!(s.ends_with("End\n"));
    }

    #[test]
    fn empty_objective() {
        let mut lp = LinearProgram::<f64>::new("t");
        let x = lp.add_nonneg("x").unwrap();
        lp.add_constraint("", vec![(x, 1.0)], Relation::Le, 3.0).unwrap();
        let s = to_lp_string(&lp);
        assert!(s.contains(" obj:\n"));
        assert!(!s.contains("x0"));
    }

    #[test]
    fn names_are_mapped() {
        assert_eq!(sanitize_name("y@r/i/u[C0;w]"), "y@r/i/u{C0;w}");
        assert_eq!(sanitize_name("a@r/cpu:u"), "a@r/cpu|u");
        assert_eq!(sanitize_name("1x"), "_1x");
        assert_eq!(sanitize_name("e1"), "_e1");
        assert_eq!(sanitize_name("a b"), "a_b");
    }

    #[test]
    fn collisions_and_long_lines() {
        let mut lp = LinearProgram::<f64>::new("t");
        let a = lp.add_nonneg("a b").unwrap();
        let b = lp.add_nonneg("a_b").unwrap();
        let mut terms = Vec::new();
        for i in 0..200 {
            terms.push((lp.add_unit(format!("v{i}"), true).unwrap(), -2.5));
        }
        terms.push((a, 1.0));
        terms.push((b, 1.0));
        lp.add_constraint("big", terms, Relation::Ge, -1.0).unwrap();
        let s = to_lp_string(&lp);
        assert!(s.contains("a_b#1"));
        assert!(s.lines().all(|l| l.len() < 255));
        assert!(s.contains("Binaries\n"));
    }
}
