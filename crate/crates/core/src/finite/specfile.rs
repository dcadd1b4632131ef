//! Text format for structure specifications.
//!
//! Either a single declaration
//!
//! ```text
//! ring mod 6
//! ```
//!
//! or explicit tables:
//!
//! ```text
//! structure mylabel
//! sort ring 2
//! fn + 2
//! 0 1
//! 1 0
//! fn - 2
//! 0 1
//! 1 0
//! fn * 2
//! 0 0
//! 0 1
//! const 0 0
//! const 1 1
//! ```
//!
//! `#` starts a comment. A `fn NAME ARITY` block is followed by
//! `size^ARITY` integers in row-major order; `pred NAME ARITY` blocks take
//! 0/1 entries.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{ring_signature, FiniteStructure};
use crate::error::{Error, Result};
use crate::formula::{IndexRule, Signature, SurfaceOps};

pub fn parse_structure_spec(text: &str) -> Result<FiniteStructure> {
    let mut words: Vec<&str> = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        words.extend(line.split_whitespace());
    }
    if words.is_empty() {
        return Err(Error::Invalid("empty structure spec".into()));
    }
    if words[0] == "ring" {
        if words.len() == 3 && words[1] == "mod" {
            let n: u64 = words[2]
                .parse()
                .map_err(|_| Error::Invalid(format!("bad modulus {}", words[2])))?;
            return FiniteStructure::ring_mod(n);
        }
        return Err(Error::Invalid("expected 'ring mod N'".into()));
    }

    let mut it = words.into_iter().peekable();
    let kw = it.next().unwrap();
    if kw != "structure" {
        return Err(Error::Invalid(format!(
            "expected 'ring mod N' or 'structure LABEL', found {kw}"
        )));
    }
    let label = it
        .next()
        .ok_or_else(|| Error::Invalid("missing structure label".into()))?
        .to_string();

    let mut sort_name: Option<String> = None;
    let mut size: usize = 0;
    let mut fns: Vec<(String, usize, Vec<usize>)> = Vec::new();
    let mut preds: Vec<(String, usize, Vec<bool>)> = Vec::new();
    let mut consts: Vec<(String, usize)> = Vec::new();

    let parse_num = |w: Option<&str>, what: &str| -> Result<usize> {
        w.ok_or_else(|| Error::Invalid(format!("missing {what}")))?
            .parse::<usize>()
            .map_err(|_| Error::Invalid(format!("bad {what}")))
    };

    while let Some(kw) = it.next() {
        match kw {
            "sort" => {
                if sort_name.is_some() {
                    return Err(Error::Invalid("only one sort supported in spec files".into()));
                }
                let name = it
                    .next()
                    .ok_or_else(|| Error::Invalid("missing sort name".into()))?;
                sort_name = Some(name.to_string());
                size = parse_num(it.next(), "sort size")?;
            }
            "fn" | "pred" => {
                let is_fn = kw == "fn";
                let name = it
                    .next()
                    .ok_or_else(|| Error::Invalid("missing symbol name".into()))?
                    .to_string();
                let arity = parse_num(it.next(), "arity")?;
                if size == 0 {
                    return Err(Error::Invalid("declare the sort before tables".into()));
                }
                let count = size.pow(arity as u32);
                let mut entries = Vec::with_capacity(count);
                for _ in 0..count {
                    entries.push(parse_num(it.next(), &format!("table entry for {name}"))?);
                }
                if is_fn {
                    fns.push((name, arity, entries));
                } else {
                    let bools = entries
                        .iter()
                        .map(|&v| match v {
                            0 => Ok(false),
                            1 => Ok(true),
                            _ => Err(Error::Invalid(format!(
                                "predicate table for {name} must be 0/1"
                            ))),
                        })
                        .collect::<Result<Vec<bool>>>()?;
                    preds.push((name, arity, bools));
                }
            }
            "const" => {
                let name = it
                    .next()
                    .ok_or_else(|| Error::Invalid("missing constant name".into()))?
                    .to_string();
                let v = parse_num(it.next(), "constant value")?;
                consts.push((name, v));
            }
            other => {
                return Err(Error::Invalid(format!("unknown spec keyword {other}")));
            }
        }
    }

    let sort = sort_name.ok_or_else(|| Error::Invalid("missing sort declaration".into()))?;

    // A spec matching the ring profile reuses the shared ring signature so
    // that ring-specific operations apply.
    let ring_profile = sort == "ring"
        && fns.iter().map(|(n, a, _)| (n.as_str(), *a)).collect::<std::collections::BTreeSet<_>>()
            == [("+", 2), ("-", 2), ("*", 2)].into_iter().collect()
        && consts.iter().map(|(n, _)| n.as_str()).collect::<std::collections::BTreeSet<_>>()
            == ["0", "1"].into_iter().collect()
        && preds.is_empty();

    let sig: Arc<Signature> = if ring_profile {
        ring_signature()
    } else {
        let mut sig = Signature::new(format!("custom:{label}"), vec![sort.clone()]);
        for (name, arity, _) in &fns {
            sig.add_function(name.clone(), vec![sort.clone(); *arity], sort.clone())?;
        }
        for (name, arity, _) in &preds {
            sig.add_predicate(name.clone(), IndexRule::None, vec![sort.clone(); *arity])?;
        }
        for (name, _) in &consts {
            sig.add_constant(name.clone(), sort.clone())?;
        }
        let names: std::collections::BTreeSet<&str> =
            fns.iter().map(|(n, _, _)| n.as_str()).collect();
        let pick = |n: &str| {
            if names.contains(n) {
                Some(n.to_string())
            } else {
                None
            }
        };
        *sig_surface_mut(&mut sig) = SurfaceOps {
            add: pick("+"),
            sub: pick("-"),
            mul: pick("*"),
            and: pick("meet"),
            or: pick("join"),
            not: pick("compl"),
        };
        Arc::new(sig)
    };

    let mut carrier_sizes = BTreeMap::new();
    carrier_sizes.insert(sort, size);
    let functions = fns.into_iter().map(|(n, _, t)| (n, t)).collect();
    let predicates = preds
        .into_iter()
        .map(|(n, _, t)| ((n, Vec::new()), t))
        .collect();
    let constants = consts.into_iter().collect();
    FiniteStructure::from_tables(sig, carrier_sizes, functions, predicates, constants, label)
}

// Surface ops live behind the signature builder API; spec files are the one
// place that assembles a signature from loose parts.
fn sig_surface_mut(sig: &mut Signature) -> &mut SurfaceOps {
    sig.surface_mut()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_mod_spec() {
        let m = parse_structure_spec("ring mod 6\n").unwrap();
        assert_eq!(m.size(), 6);
        assert!(m.is_ring());
    }

    #[test]
    fn explicit_z2_is_recognized_as_ring() {
        let text = "structure z2\nsort ring 2\n\
                    fn + 2\n0 1\n1 0\n\
                    fn - 2\n0 1\n1 0\n\
                    fn * 2\n0 0\n0 1\n\
                    const 0 0\nconst 1 1\n";
        let m = parse_structure_spec(text).unwrap();
        assert_eq!(m.size(), 2);
        assert!(m.is_ring());
        assert_eq!(m.mul(1, 1), 1);
    }

    #[test]
    fn broken_tables_rejected() {
        let text = "structure bad\nsort ring 2\nfn + 2\n0 1\n1 9\n";
        assert!(parse_structure_spec(text).is_err());
    }
}
