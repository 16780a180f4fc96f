//! CPLEX LP text: writer and a reader for the subset the writer emits
//! (plus the common spellings other tools use for the same sections).

use std::fmt::Write as _;

use super::{Cmp, MilpError, MilpModel, VarId, VarKind};

const TERMS_PER_LINE: usize = 6;

fn write_terms(out: &mut String, model: &MilpModel, terms: &[(VarId, f64)]) {
    for (k, (v, c)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if *c < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", c.abs(), model.variable(*v).name);
    }
}

fn fmt_bound(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

/// Deterministic LP text: variables keep insertion order, rows keep
/// insertion order, numbers use the shortest round-tripping decimal.
pub fn write_model(model: &MilpModel) -> Result<String, MilpError> {
    model.validate()?;
    let mut out = String::new();
    let _ = writeln!(out, "\\ Problem: {}", model.name);
    let _ = writeln!(out, "\\ Offset: {}", model.objective_offset);
    for name in model.infeasible_rows() {
        let _ = writeln!(out, "\\ Infeasible: {name}");
    }
    out.push_str("Minimize\n obj:");
    write_terms(&mut out, model, model.objective());
    out.push('\n');
    out.push_str("Subject To\n");
    for row in model.rows() {
        let _ = write!(out, " {}:", row.name);
        write_terms(&mut out, model, &row.terms);
        let _ = writeln!(out, " {} {}", row.cmp, row.rhs);
    }
    out.push_str("Bounds\n");
    // Every variable is listed, binaries included, so the Bounds section
    // also records declaration order.
    for var in model.variables() {
        if var.lower == f64::NEG_INFINITY && var.upper == f64::INFINITY {
            let _ = writeln!(out, " {} free", var.name);
        } else {
            let _ = writeln!(out, " {} <= {} <= {}", fmt_bound(var.lower), var.name, fmt_bound(var.upper));
        }
    }
    let binaries: Vec<&str> = model
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    let generals: Vec<&str> = model
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Integer)
        .map(|v| v.name.as_str())
        .collect();
    for (header, names) in [("Binaries", binaries), ("Generals", generals)] {
        if names.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{header}");
        for chunk in names.chunks(TERMS_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    Generals,
    End,
}

fn section_header(line: &str) -> Option<Section> {
    let l = line.trim().to_ascii_lowercase();
    match l.as_str() {
        "minimize" | "minimise" | "minimum" | "min" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        "generals" | "general" | "gen" | "integers" => Some(Section::Generals),
        "end" => Some(Section::End),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Sign(f64),
    Cmp(Cmp),
    Colon,
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Tok>, MilpError> {
    let err = |msg: String| MilpError::Parse { line, msg };
    let mut toks = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '+' || c == '-' {
            toks.push(Tok::Sign(if c == '-' { -1.0 } else { 1.0 }));
            i += 1;
        } else if c == ':' {
            toks.push(Tok::Colon);
            i += 1;
        } else if c == '<' || c == '>' || c == '=' {
            let mut j = i + 1;
            while j < chars.len() && "<>=".contains(chars[j]) {
                j += 1;
            }
            let op: String = chars[i..j].iter().collect();
            let cmp = match op.as_str() {
                "<=" | "=<" | "<" => Cmp::Le,
                ">=" | "=>" | ">" => Cmp::Ge,
                "=" => Cmp::Eq,
                _ => return Err(err(format!("bad operator `{op}`"))),
            };
            toks.push(Tok::Cmp(cmp));
            i = j;
        } else if c.is_ascii_digit() || c == '.' {
            let mut j = i;
            while j < chars.len()
                && (chars[j].is_ascii_digit()
                    || chars[j] == '.'
                    || ((chars[j] == 'e' || chars[j] == 'E')
                        && j + 1 < chars.len()
                        && (chars[j + 1].is_ascii_digit() || chars[j + 1] == '-' || chars[j + 1] == '+'))
                    || ((chars[j] == '-' || chars[j] == '+') && j > i && (chars[j - 1] == 'e' || chars[j - 1] == 'E')))
            {
                j += 1;
            }
            let s: String = chars[i..j].iter().collect();
            let v: f64 = s.parse().map_err(|_| err(format!("bad number `{s}`")))?;
            toks.push(Tok::Num(v));
            i = j;
        } else {
            let mut j = i;
            while j < chars.len() && !chars[j].is_whitespace() && !"+-:<>=".contains(chars[j]) {
                j += 1;
            }
            let s: String = chars[i..j].iter().collect();
            match s.to_ascii_lowercase().as_str() {
                "inf" | "infinity" => toks.push(Tok::Num(f64::INFINITY)),
                _ => toks.push(Tok::Name(s)),
            }
            i = j;
        }
    }
    Ok(toks)
}

/// Reads `[sign] [coef] name` terms until a comparison or the end.
fn read_terms(toks: &[Tok], line: usize) -> Result<(Vec<(String, f64)>, usize), MilpError> {
    let mut terms = Vec::new();
    let mut k = 0;
    while k < toks.len() {
        let mut coef = 1.0;
        let mut saw = false;
        while let Some(Tok::Sign(s)) = toks.get(k) {
            coef *= s;
            k += 1;
            saw = true;
        }
        if let Some(Tok::Num(n)) = toks.get(k) {
            coef *= n;
            k += 1;
            saw = true;
        }
        match toks.get(k) {
            Some(Tok::Name(n)) => {
                terms.push((n.clone(), coef));
                k += 1;
            }
            Some(Tok::Cmp(_)) | None if !saw => break,
            Some(Tok::Cmp(_)) | None => {
                return Err(MilpError::Parse { line, msg: "constant terms on the left side are not supported".into() })
            }
            Some(t) => return Err(MilpError::Parse { line, msg: format!("unexpected token {t:?}") }),
        }
    }
    Ok((terms, k))
}

fn signed_number(toks: &[Tok], line: usize) -> Result<f64, MilpError> {
    let mut sign = 1.0;
    let mut k = 0;
    while let Some(Tok::Sign(s)) = toks.get(k) {
        sign *= s;
        k += 1;
    }
    match (toks.get(k), toks.len() == k + 1) {
        (Some(Tok::Num(n)), true) => Ok(sign * n),
        _ => Err(MilpError::Parse { line, msg: "expected a number".into() }),
    }
}

struct Pending {
    name: Option<String>,
    toks: Vec<Tok>,
    line: usize,
}

/// Parses LP text into a model. Variables are declared in order of first
/// appearance; integrality comes from the Binaries/Generals sections and
/// everything else is continuous.
pub fn parse_model(text: &str) -> Result<MilpModel, MilpError> {
    let mut model = MilpModel::new("");
    let mut section = Section::Preamble;
    let mut objective: Vec<(String, f64)> = Vec::new();
    let mut rows: Vec<(String, Vec<(String, f64)>, Cmp, f64, usize)> = Vec::new();
    let mut order: Vec<String> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut bounds: std::collections::HashMap<String, (f64, f64)> = Default::default();
    let mut binaries = std::collections::HashSet::new();
    let mut generals = std::collections::HashSet::new();
    let mut pending: Option<Pending> = None;
    let mut infeasible = Vec::new();
    let mut bound_order: Vec<String> = Vec::new();
    let mut bound_seen = std::collections::HashSet::new();

    let mut note = |name: &str, order: &mut Vec<String>| {
        if seen.insert(name.to_string()) {
            order.push(name.to_string());
        }
    };

    let flush = |p: Pending,
                 section: Section,
                 objective: &mut Vec<(String, f64)>,
                 rows: &mut Vec<(String, Vec<(String, f64)>, Cmp, f64, usize)>|
     -> Result<(), MilpError> {
        match section {
            Section::Objective => {
                let (terms, used) = read_terms(&p.toks, p.line)?;
                if used != p.toks.len() {
                    return Err(MilpError::Parse { line: p.line, msg: "objective has a comparison".into() });
                }
                objective.extend(terms);
            }
            Section::Constraints => {
                let (terms, used) = read_terms(&p.toks, p.line)?;
                let Some(Tok::Cmp(cmp)) = p.toks.get(used) else {
                    return Err(MilpError::Parse { line: p.line, msg: "constraint without comparison".into() });
                };
                let rhs = signed_number(&p.toks[used + 1..], p.line)?;
                let name = p.name.unwrap_or_else(|| format!("r{}", rows.len()));
                rows.push((name, terms, *cmp, rhs, p.line));
            }
            _ => {}
        }
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let (body, comment) = match raw.find('\\') {
            Some(p) => (&raw[..p], Some(&raw[p + 1..])),
            None => (raw, None),
        };
        if let Some(c) = comment {
            let c = c.trim();
            if let Some(v) = c.strip_prefix("Problem:") {
                model.name = v.trim().to_string();
            } else if let Some(v) = c.strip_prefix("Offset:") {
                model.objective_offset = v
                    .trim()
                    .parse()
                    .map_err(|_| MilpError::Parse { line: line_no, msg: "bad offset".into() })?;
            } else if let Some(v) = c.strip_prefix("Infeasible:") {
                infeasible.push(v.trim().to_string());
            }
        }
        if body.trim().is_empty() {
            continue;
        }
        if let Some(next) = section_header(body) {
            if let Some(p) = pending.take() {
                flush(p, section, &mut objective, &mut rows)?;
            }
            section = next;
            continue;
        }
        match section {
            Section::Preamble | Section::End => {
                return Err(MilpError::Parse { line: line_no, msg: "text outside any section".into() })
            }
            Section::Objective | Section::Constraints => {
                let toks = tokenize(body, line_no)?;
                // A new `name:` label starts a new row; otherwise a line
                // continues the previous one.
                let starts_row = matches!(toks.as_slice(), [Tok::Name(_), Tok::Colon, ..]);
                if starts_row || pending.is_none() {
                    if let Some(p) = pending.take() {
                        flush(p, section, &mut objective, &mut rows)?;
                    }
                    let (name, rest) = if starts_row {
                        let Tok::Name(n) = &toks[0] else { unreachable!() };
                        (Some(n.clone()), toks[2..].to_vec())
                    } else {
                        (None, toks)
                    };
                    pending = Some(Pending { name, toks: rest, line: line_no });
                } else if let Some(p) = pending.as_mut() {
                    p.toks.extend(toks);
                }
                // A constraint is complete once it has its right-hand side.
                if section == Section::Constraints {
                    if let Some(p) = &pending {
                        let has_cmp = p.toks.iter().position(|t| matches!(t, Tok::Cmp(_)));
                        if let Some(pos) = has_cmp {
                            if pos + 1 < p.toks.len() && matches!(p.toks.last(), Some(Tok::Num(_))) {
                                let p = pending.take().unwrap();
                                flush(p, section, &mut objective, &mut rows)?;
                            }
                        }
                    }
                }
            }
            Section::Bounds => {
                let toks = tokenize(body, line_no)?;
                parse_bound(&toks, line_no, &mut bounds, &mut |n| {
                    if bound_seen.insert(n.to_string()) {
                        bound_order.push(n.to_string());
                    }
                })?;
            }
            Section::Binaries | Section::Generals => {
                for name in body.split_whitespace() {
                    note(name, &mut order);
                    if section == Section::Binaries {
                        binaries.insert(name.to_string());
                    } else {
                        generals.insert(name.to_string());
                    }
                }
            }
        }
    }
    if let Some(p) = pending.take() {
        flush(p, section, &mut objective, &mut rows)?;
    }

    // Declaration order: the Bounds section (our writer lists every
    // variable there), then first appearance in objective and rows, then
    // the integrality sections.
    let mut decl_order = Vec::new();
    let mut declared = std::collections::HashSet::new();
    let listed = bound_order
        .iter()
        .chain(objective.iter().chain(rows.iter().flat_map(|r| r.1.iter())).map(|(n, _)| n))
        .chain(order.iter());
    for n in listed {
        if declared.insert(n.clone()) {
            decl_order.push(n.clone());
        }
    }
    for name in decl_order {
        let kind = if binaries.contains(&name) {
            VarKind::Binary
        } else if generals.contains(&name) {
            VarKind::Integer
        } else {
            VarKind::Continuous
        };
        let (lo, hi) = bounds.get(&name).copied().unwrap_or((0.0, f64::INFINITY));
        model.add_var(name, kind, lo, hi)?;
    }
    for (name, coef) in &objective {
        let v = model.var(name).expect("declared");
        model.add_objective(v, *coef);
    }
    for (name, terms, cmp, rhs, line) in rows {
        let terms: Vec<(VarId, f64)> = terms
            .iter()
            .map(|(n, c)| (model.var(n).expect("declared"), *c))
            .collect();
        if terms.is_empty() {
            return Err(MilpError::Parse { line, msg: format!("row {name} has no variables") });
        }
        model.add_named_row(name, "", terms, cmp, rhs)?;
    }
    for name in infeasible {
        model.add_named_row(name, "", [], Cmp::Le, -1.0)?;
    }
    Ok(model)
}

fn parse_bound(
    toks: &[Tok],
    line: usize,
    bounds: &mut std::collections::HashMap<String, (f64, f64)>,
    note: &mut dyn FnMut(&str),
) -> Result<(), MilpError> {
    let err = |msg: &str| MilpError::Parse { line, msg: msg.to_string() };
    // Split on comparison operators.
    let mut parts: Vec<Vec<Tok>> = vec![Vec::new()];
    let mut cmps = Vec::new();
    for t in toks {
        match t {
            Tok::Cmp(c) => {
                cmps.push(*c);
                parts.push(Vec::new());
            }
            other => parts.last_mut().unwrap().push(other.clone()),
        }
    }
    let name_of = |p: &[Tok]| match p {
        [Tok::Name(n)] => Some(n.clone()),
        _ => None,
    };
    let entry = |bounds: &mut std::collections::HashMap<String, (f64, f64)>, n: &str| {
        *bounds.entry(n.to_string()).or_insert((0.0, f64::INFINITY))
    };
    match (parts.len(), cmps.as_slice()) {
        (1, []) => match parts[0].as_slice() {
            [Tok::Name(n), Tok::Name(f)] if f.eq_ignore_ascii_case("free") => {
                note(n);
                bounds.insert(n.clone(), (f64::NEG_INFINITY, f64::INFINITY));
            }
            _ => return Err(err("bad bound line")),
        },
        (2, [cmp]) => {
            if let Some(n) = name_of(&parts[0]) {
                note(&n);
                let v = signed_number(&parts[1], line)?;
                let (mut lo, mut hi) = entry(bounds, &n);
                match cmp {
                    Cmp::Le => hi = v,
                    Cmp::Ge => lo = v,
                    Cmp::Eq => {
                        lo = v;
                        hi = v;
                    }
                }
                bounds.insert(n, (lo, hi));
            } else if let Some(n) = name_of(&parts[1]) {
                note(&n);
                let v = signed_number(&parts[0], line)?;
                let (mut lo, mut hi) = entry(bounds, &n);
                match cmp {
                    Cmp::Le => lo = v,
                    Cmp::Ge => hi = v,
                    Cmp::Eq => {
                        lo = v;
                        hi = v;
                    }
                }
                bounds.insert(n, (lo, hi));
            } else {
                return Err(err("bad bound line"));
            }
        }
        (3, [Cmp::Le, Cmp::Le]) => {
            let n = name_of(&parts[1]).ok_or_else(|| err("bad bound line"))?;
            note(&n);
            let lo = signed_number(&parts[0], line)?;
            let hi = signed_number(&parts[2], line)?;
            bounds.insert(n, (lo, hi));
        }
        _ => return Err(err("bad bound line")),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_var() -> MilpModel {
        let mut m = MilpModel::new("one");
        let x = m.add_integer("x", f64::INFINITY).unwrap();
        m.add_row("demo", [(x, 1.0)], Cmp::Ge, 3.0).unwrap();
        m.add_objective(x, 1.0);
        m
    }

    #[test]
    fn one_variable_model() {
        let text = write_model(&one_var()).unwrap();
        assert!(text.contains(" obj: + 1 x\n"), "{text}");
        assert_eq!(text.matches(">=").count(), 1);
        assert!(text.contains("Generals\n x\n"));
        assert!(text.contains(" 0 <= x <= +inf\n"));
        assert_eq!(parse_model(&text).unwrap(), one_var().without_tags());
    }

    #[test]
    fn empty_model() {
        let m = MilpModel::new("empty");
        let text = write_model(&m).unwrap();
        assert!(text.contains("Minimize\n obj:\nSubject To\nBounds\nEnd\n"), "{text}");
        assert_eq!(parse_model(&text).unwrap(), m);
    }

    #[test]
    fn writing_is_deterministic() {
        let a = write_model(&one_var()).unwrap();
        let b = write_model(&one_var()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn long_rows_wrap_and_parse() {
        let mut m = MilpModel::new("wide");
        let vars: Vec<VarId> = (0..20).map(|k| m.add_binary(format!("y_{k}")).unwrap()).collect();
        m.add_row("t", vars.iter().map(|v| (*v, -0.25)), Cmp::Ge, -3.5).unwrap();
        for v in &vars {
            m.add_objective(*v, 1.5);
        }
        m.objective_offset = -4.0;
        let text = write_model(&m).unwrap();
        assert!(text.lines().all(|l| l.len() < 255));
        assert_eq!(parse_model(&text).unwrap(), m.without_tags());
    }

    #[test]
    fn reads_foreign_spellings() {
        let text = "\\ hand written\nMINIMIZE\n obj: 2 a + 3 b\nST\n c1: a + b >= 1\n c2: a - b = 0\nBOUNDS\n b <= 4\nBINARY\n a\nGENERAL\n b\nEND\n";
        let m = parse_model(text).unwrap();
        assert_eq!(m.variables().len(), 2);
        assert_eq!(m.variable(m.var("a").unwrap()).kind, VarKind::Binary);
        assert_eq!(m.variable(m.var("b").unwrap()).upper, 4.0);
        assert_eq!(m.rows()[1].cmp, Cmp::Eq);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_model("Minimize\n obj: x\nSubject To\n c: x <\nEnd\n").is_err());
        assert!(parse_model("hello\n").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_model() -> impl Strategy<Value = MilpModel> {
            (
                proptest::collection::vec((any::<bool>(), 0u32..5), 1..12),
                proptest::collection::vec(
                    (proptest::collection::vec((0usize..12, -50i32..50), 1..6), 0u8..3, -20i32..20),
                    0..10,
                ),
                proptest::collection::vec(-9i32..9, 12),
                -10i32..10,
            )
                .prop_map(|(vars, rows, obj, offset)| {
                    let mut m = MilpModel::new("prop");
                    let ids: Vec<VarId> = vars
                        .iter()
                        .enumerate()
                        .map(|(k, (bin, ub))| {
                            if *bin {
                                m.add_binary(format!("b_{k}")).unwrap()
                            } else {
                                m.add_integer(format!("n_{k}"), if *ub == 0 { f64::INFINITY } else { *ub as f64 })
                                    .unwrap()
                            }
                        })
                        .collect();
                    for (terms, cmp, rhs) in rows {
                        let cmp = [Cmp::Le, Cmp::Eq, Cmp::Ge][cmp as usize];
                        let terms: Vec<(VarId, f64)> = terms
                            .into_iter()
                            .map(|(v, c)| (ids[v % ids.len()], c as f64 / 4.0))
                            .collect();
                        m.add_row("", terms, cmp, rhs as f64 / 8.0).unwrap();
                    }
                    for (k, v) in ids.iter().enumerate() {
                        m.add_objective(*v, obj[k] as f64 * 0.1);
                    }
                    m.objective_offset = offset as f64;
                    m
                })
        }

        proptest! {
            #[test]
            fn write_parse_is_identity(m in arb_model()) {
                let text = write_model(&m).unwrap();
                let back = parse_model(&text).unwrap();
                prop_assert_eq!(&back, &m.without_tags());
                prop_assert_eq!(write_model(&back).unwrap(), text);
            }
        }
    }
}
