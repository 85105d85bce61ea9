//! Concrete syntax: parsing and rendering of terms, signatures and specs.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::recursion::RecSpec;
use crate::term::{canonicalize, is_reserved, EventInstance, Label, Signature, SignatureError, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("{line}:{col}: syntax error, expected {}", expected.join(" or "))]
    Syntax { line: usize, col: usize, expected: Vec<String> },
    #[error("{line}:{col}: unknown label `{name}`")]
    UnknownLabel { line: usize, col: usize, name: String },
    #[error("undefined variable `{0}`")]
    UndefinedVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("{line}:{col}: unknown specification `{name}`")]
    UnknownSpec { line: usize, col: usize, name: String },
    #[error("{line}:{col}: {source}")]
    Signature { line: usize, col: usize, source: SignatureError },
    #[error("{line}:{col}: {msg}")]
    Section { line: usize, col: usize, msg: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u32),
    Plus,
    Dot,
    ParBar,
    Bar,
    Amp,
    Unless,
    LAngle,
    RAngle,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    Comma,
    Eq,
    Semi,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(_) => "identifier".into(),
            Tok::Num(_) => "number".into(),
            Tok::Plus => "`+`".into(),
            Tok::Dot => "`.`".into(),
            Tok::ParBar => "`||`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Unless => "`<|`".into(),
            Tok::LAngle => "`<`".into(),
            Tok::RAngle => "`>`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str, line0: usize, col0: usize) -> Result<Vec<Spanned>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, line0, col0);
    while i < chars.len() {
        let c = chars[i];
        let (l, cl) = (line, col);
        let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, line: l, col: cl });
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            push(&mut out, Tok::Ident(s));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let n = s.parse::<u32>().map_err(|_| SyntaxError::Syntax {
                line: l,
                col: cl,
                expected: vec!["number below 2^32".into()],
            })?;
            push(&mut out, Tok::Num(n));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, width) = match (c, next) {
            ('|', Some('|')) => (Tok::ParBar, 2),
            ('<', Some('|')) => (Tok::Unless, 2),
            ('|', _) => (Tok::Bar, 1),
            ('+', _) => (Tok::Plus, 1),
            ('.', _) => (Tok::Dot, 1),
            ('&', _) => (Tok::Amp, 1),
            ('<', _) => (Tok::LAngle, 1),
            ('>', _) => (Tok::RAngle, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('[', _) => (Tok::LBrack, 1),
            (']', _) => (Tok::RBrack, 1),
            (',', _) => (Tok::Comma, 1),
            ('=', _) => (Tok::Eq, 1),
            (';', _) => (Tok::Semi, 1),
            _ => {
                return Err(SyntaxError::Syntax { line: l, col: cl, expected: vec!["a term token".into()] });
            }
        };
        push(&mut out, tok);
        i += width;
        col += width;
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

/// How identifiers that are not labels are resolved.
struct Scope<'a> {
    sig: &'a Signature,
    /// Variables of the spec being parsed, mapped to the spec name.
    vars: Option<(&'a BTreeSet<String>, &'a str)>,
    /// Known spec names for `<X|E>` references; `None` accepts any.
    specs: Option<&'a BTreeMap<String, RecSpec>>,
    used_vars: BTreeSet<String>,
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    scope: Scope<'a>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        (self.toks[self.pos].line, self.toks[self.pos].col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, SyntaxError> {
        let (line, col) = self.here();
        Err(SyntaxError::Syntax { line, col, expected: expected.iter().map(|s| s.to_string()).collect() })
    }

    fn expect(&mut self, t: Tok) -> Result<(), SyntaxError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            let d = t.describe();
            self.fail(&[d.as_str()])
        }
    }

    fn sum(&mut self) -> Result<Term, SyntaxError> {
        let mut items = vec![self.unless()?];
        while *self.peek() == Tok::Plus {
            self.bump();
            items.push(self.unless()?);
        }
        Ok(Term::choice(items))
    }

    fn unless(&mut self) -> Result<Term, SyntaxError> {
        let mut left = self.par()?;
        while *self.peek() == Tok::Unless {
            self.bump();
            let right = self.par()?;
            left = Term::unless(left, right);
        }
        Ok(left)
    }

    fn par(&mut self) -> Result<Term, SyntaxError> {
        let mut left = self.seq()?;
        loop {
            match self.peek() {
                Tok::ParBar => {
                    self.bump();
                    let r = self.seq()?;
                    left = Term::Par(vec![left, r]);
                }
                Tok::Bar => {
                    self.bump();
                    let r = self.seq()?;
                    left = Term::comm(left, r);
                }
                Tok::Amp => {
                    self.bump();
                    let r = self.seq()?;
                    left = Term::between(left, r);
                }
                _ => return Ok(left),
            }
        }
    }

    fn seq(&mut self) -> Result<Term, SyntaxError> {
        let mut items = vec![self.unary()?];
        while *self.peek() == Tok::Dot {
            self.bump();
            items.push(self.unary()?);
        }
        Ok(Term::seq(items))
    }

    fn label_set(&mut self) -> Result<BTreeSet<Label>, SyntaxError> {
        self.expect(Tok::LBrace)?;
        let mut set = BTreeSet::new();
        if *self.peek() == Tok::RBrace {
            self.bump();
            return Ok(set);
        }
        loop {
            let (line, col) = self.here();
            match self.bump() {
                Tok::Ident(name) => set.insert(self.label(&name, line, col)?),
                _ => {
                    self.pos -= 1;
                    return self.fail(&["label"]);
                }
            };
            match self.bump() {
                Tok::Comma => continue,
                Tok::RBrace => return Ok(set),
                _ => {
                    self.pos -= 1;
                    return self.fail(&["`,`", "`}`"]);
                }
            }
        }
    }

    fn label(&self, name: &str, line: usize, col: usize) -> Result<Label, SyntaxError> {
        let unknown = || SyntaxError::UnknownLabel { line, col, name: name.to_string() };
        let l = Label::new(name).map_err(|_| unknown())?;
        if self.scope.sig.alphabet.contains(&l) {
            Ok(l)
        } else {
            Err(unknown())
        }
    }

    fn key(&mut self) -> Result<Option<u32>, SyntaxError> {
        if *self.peek() != Tok::LBrack {
            return Ok(None);
        }
        self.bump();
        let k = match self.bump() {
            Tok::Num(n) if n >= 1 => n,
            _ => {
                self.pos -= 1;
                return self.fail(&["positive key"]);
            }
        };
        self.expect(Tok::RBrack)?;
        Ok(Some(k))
    }

    fn unary(&mut self) -> Result<Term, SyntaxError> {
        let (line, col) = self.here();
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let t = self.sum()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::LAngle => {
                self.bump();
                let var = match self.bump() {
                    Tok::Ident(v) => v,
                    _ => {
                        self.pos -= 1;
                        return self.fail(&["variable"]);
                    }
                };
                self.expect(Tok::Bar)?;
                let (sl, sc) = self.here();
                let spec = match self.bump() {
                    Tok::Ident(s) => s,
                    _ => {
                        self.pos -= 1;
                        return self.fail(&["specification name"]);
                    }
                };
                self.expect(Tok::RAngle)?;
                if let Some(specs) = self.scope.specs {
                    match specs.get(&spec) {
                        None => return Err(SyntaxError::UnknownSpec { line: sl, col: sc, name: spec }),
                        Some(s) if s.body(&var).is_none() => return Err(SyntaxError::UndefinedVariable(var)),
                        _ => {}
                    }
                }
                Ok(Term::RecRef(var, spec))
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "delta" => Ok(Term::Delta),
                    "tau" => Ok(Term::Tau(self.key()?)),
                    "theta" if *self.peek() == Tok::LParen => {
                        self.bump();
                        let t = self.sum()?;
                        self.expect(Tok::RParen)?;
                        Ok(Term::theta(t))
                    }
                    "enc" | "hide" if *self.peek() == Tok::LBrace => {
                        let set = self.label_set()?;
                        self.expect(Tok::LParen)?;
                        let t = self.sum()?;
                        self.expect(Tok::RParen)?;
                        Ok(if name == "enc" { Term::encap(set, t) } else { Term::hide(set, t) })
                    }
                    _ => {
                        if let Some((vars, spec)) = self.scope.vars {
                            if vars.contains(&name) {
                                self.scope.used_vars.insert(name.clone());
                                return Ok(Term::RecRef(name, spec.to_string()));
                            }
                        }
                        if is_reserved(&name) {
                            return Err(SyntaxError::Syntax { line, col, expected: vec!["`(` or `{`".into()] });
                        }
                        let l = self.label(&name, line, col).map_err(|e| match (&self.scope.vars, e) {
                            (Some(_), SyntaxError::UnknownLabel { name, .. })
                                if name.chars().next().is_some_and(|c| c.is_ascii_uppercase()) =>
                            {
                                SyntaxError::UndefinedVariable(name)
                            }
                            (_, e) => e,
                        })?;
                        let key = self.key()?;
                        Ok(Term::Event(EventInstance { label: l, key }))
                    }
                }
            }
            _ => self.fail(&["event", "`delta`", "`tau`", "`(`", "`theta`", "`enc`", "`hide`", "`<`"]),
        }
    }
}

fn parse_with(text: &str, scope: Scope<'_>, line0: usize) -> Result<Term, SyntaxError> {
    parse_raw(text, scope, line0).map(|t| canonicalize(&t))
}

fn parse_raw(text: &str, scope: Scope<'_>, line0: usize) -> Result<Term, SyntaxError> {
    let toks = lex(text, line0, 1)?;
    let mut p = Parser { toks, pos: 0, scope };
    let t = p.sum()?;
    if *p.peek() != Tok::Eof {
        return p.fail(&["`+`", "`.`", "`||`", "`|`", "`&`", "`<|`", "end of input"]);
    }
    Ok(t)
}

/// Parses a closed or recursion-referencing term; spec names are not checked.
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, SyntaxError> {
    parse_with(text, Scope { sig, vars: None, specs: None, used_vars: BTreeSet::new() }, 1)
}

/// Parses a rule pattern; the listed names become metavariables `RecRef(name, "?")`.
pub(crate) fn parse_pattern(text: &str, sig: &Signature, vars: &[&str]) -> Result<Term, SyntaxError> {
    let set: BTreeSet<String> = vars.iter().map(|v| v.to_string()).collect();
    parse_raw(text, Scope { sig, vars: Some((&set, "?")), specs: None, used_vars: BTreeSet::new() }, 1)
}

/// Parses a term whose `<X|E>` references must resolve in `specs`.
pub fn parse_term_in(text: &str, sig: &Signature, specs: &BTreeMap<String, RecSpec>) -> Result<Term, SyntaxError> {
    parse_with(text, Scope { sig, vars: None, specs: Some(specs), used_vars: BTreeSet::new() }, 1)
}

/// Parses equations `X = t` separated by `;` or newlines.
pub fn parse_spec(text: &str, sig: &Signature) -> Result<RecSpec, SyntaxError> {
    parse_spec_named("E", text, sig)
}

pub fn parse_spec_named(name: &str, text: &str, sig: &Signature) -> Result<RecSpec, SyntaxError> {
    parse_spec_at(name, text, sig, 1)
}

fn parse_spec_at(name: &str, text: &str, sig: &Signature, line0: usize) -> Result<RecSpec, SyntaxError> {
    let mut eqs: Vec<(String, String, usize)> = Vec::new();
    let mut line = line0;
    for raw_line in text.split('\n') {
        let stripped = raw_line.split('#').next().unwrap_or("");
        for part in stripped.split(';') {
            if part.trim().is_empty() {
                continue;
            }
            let Some((lhs, rhs)) = part.split_once('=') else {
                let col = raw_line.find(part.trim()).map(|c| c + 1).unwrap_or(1);
                return Err(SyntaxError::Syntax { line, col, expected: vec!["`=`".into()] });
            };
            let var = lhs.trim().to_string();
            if Label::new(&var).is_err() {
                let col = raw_line.find(lhs.trim()).map(|c| c + 1).unwrap_or(1);
                return Err(SyntaxError::Syntax { line, col, expected: vec!["variable name".into()] });
            }
            if eqs.iter().any(|(v, _, _)| *v == var) {
                return Err(SyntaxError::DuplicateVariable(var));
            }
            eqs.push((var, rhs.to_string(), line));
        }
        line += 1;
    }
    let vars: BTreeSet<String> = eqs.iter().map(|(v, _, _)| v.clone()).collect();
    let mut bodies = Vec::new();
    for (var, rhs, l) in &eqs {
        let scope = Scope { sig, vars: Some((&vars, name)), specs: None, used_vars: BTreeSet::new() };
        let body = parse_with(rhs, scope, *l)?;
        bodies.push((var.clone(), body));
    }
    Ok(RecSpec::new(name, bodies))
}

/// A parsed `.rapt` file.
#[derive(Clone, Debug, Default)]
pub struct SourceFile {
    pub signature: Signature,
    pub specs: BTreeMap<String, RecSpec>,
    pub terms: Vec<(String, Term)>,
}

impl SourceFile {
    pub fn term(&self, name: &str) -> Option<&Term> {
        self.terms.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

enum Section {
    None,
    Signature,
    Spec(String, usize, String),
    Terms,
}

/// Parses a `.rapt` file with `[signature]`, `[spec NAME]` and `[terms]` sections.
pub fn parse_file(text: &str) -> Result<SourceFile, SyntaxError> {
    let mut file = SourceFile::default();
    let mut section = Section::None;
    let mut pending_terms: Vec<(String, String, usize, usize)> = Vec::new();
    let mut specs_src: Vec<(String, String, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.starts_with('[') {
            if let Section::Spec(name, start, body) = std::mem::replace(&mut section, Section::None) {
                specs_src.push((name, body, start));
            }
            let inner = line.trim_start_matches('[').trim_end_matches(']').trim();
            section = if inner == "signature" {
                Section::Signature
            } else if inner == "terms" {
                Section::Terms
            } else if let Some(name) = inner.strip_prefix("spec") {
                let name = name.trim();
                if Label::new(name).is_err() {
                    return Err(SyntaxError::Section { line: lineno, col: 1, msg: format!("bad spec name `{name}`") });
                }
                Section::Spec(name.to_string(), lineno + 1, String::new())
            } else {
                return Err(SyntaxError::Section { line: lineno, col: 1, msg: format!("unknown section `{inner}`") });
            };
            continue;
        }
        match &mut section {
            Section::Spec(_, _, body) => {
                body.push_str(raw);
                body.push('\n');
                continue;
            }
            _ if line.is_empty() => continue,
            Section::None => {
                return Err(SyntaxError::Section { line: lineno, col: 1, msg: "content outside a section".into() })
            }
            Section::Signature => signature_line(&mut file.signature, line, lineno)?,
            Section::Terms => {
                let Some((name, rhs)) = line.split_once('=') else {
                    return Err(SyntaxError::Syntax { line: lineno, col: 1, expected: vec!["`name = term`".into()] });
                };
                let col = raw.find('=').map(|c| c + 2).unwrap_or(1);
                pending_terms.push((name.trim().to_string(), rhs.to_string(), lineno, col));
            }
        }
    }
    if let Section::Spec(name, start, body) = section {
        specs_src.push((name, body, start));
    }
    for (name, body, start) in specs_src {
        if file.specs.contains_key(&name) {
            return Err(SyntaxError::DuplicateVariable(name));
        }
        let spec = parse_spec_at(&name, &body, &file.signature, start)?;
        file.specs.insert(name, spec);
    }
    for (name, rhs, line, col) in pending_terms {
        let toks_scope =
            Scope { sig: &file.signature, vars: None, specs: Some(&file.specs), used_vars: BTreeSet::new() };
        let t = parse_with(&rhs, toks_scope, line).map_err(|e| shift_col(e, line, col - 1))?;
        file.terms.push((name, t));
    }
    Ok(file)
}

fn shift_col(e: SyntaxError, line: usize, by: usize) -> SyntaxError {
    match e {
        SyntaxError::Syntax { line: l, col, expected } if l == line => {
            SyntaxError::Syntax { line: l, col: col + by, expected }
        }
        SyntaxError::UnknownLabel { line: l, col, name } if l == line => {
            SyntaxError::UnknownLabel { line: l, col: col + by, name }
        }
        SyntaxError::UnknownSpec { line: l, col, name } if l == line => {
            SyntaxError::UnknownSpec { line: l, col: col + by, name }
        }
        other => other,
    }
}

fn signature_line(sig: &mut Signature, line: &str, lineno: usize) -> Result<(), SyntaxError> {
    let words: Vec<&str> = line.split_whitespace().collect();
    let lab = |w: &str| {
        Label::new(w).map_err(|_| SyntaxError::Syntax { line: lineno, col: 1, expected: vec!["label".into()] })
    };
    let wrap =
        |r: Result<(), SignatureError>| r.map_err(|source| SyntaxError::Signature { line: lineno, col: 1, source });
    match words.as_slice() {
        ["alphabet", rest @ ..] => {
            for w in rest {
                for part in w.split(',').filter(|p| !p.is_empty()) {
                    sig.alphabet.insert(lab(part)?);
                }
            }
            Ok(())
        }
        ["gamma", a, b, "=", c] => wrap(sig.add_gamma(lab(a)?, lab(b)?, lab(c)?)),
        ["conflict", a, b] => wrap(sig.add_conflict(lab(a)?, lab(b)?)),
        ["prio", a, "<", b] => wrap(sig.add_prio(lab(a)?, lab(b)?)),
        _ => Err(SyntaxError::Syntax {
            line: lineno,
            col: 1,
            expected: vec![
                "`alphabet`".into(),
                "`gamma a b = c`".into(),
                "`conflict a b`".into(),
                "`prio a < b`".into(),
            ],
        }),
    }
}

/// Renders a signature back to its section text.
pub fn render_signature(sig: &Signature) -> String {
    let mut out = String::from("[signature]\nalphabet");
    for l in &sig.alphabet {
        out.push(' ');
        out.push_str(l.as_str());
    }
    out.push('\n');
    for (a, b, c) in sig.gamma_entries() {
        out.push_str(&format!("gamma {a} {b} = {c}\n"));
    }
    for (a, b) in sig.conflict_pairs() {
        out.push_str(&format!("conflict {a} {b}\n"));
    }
    for (a, b) in sig.prio_pairs() {
        out.push_str(&format!("prio {a} < {b}\n"));
    }
    out
}

fn level(t: &Term) -> u8 {
    match t {
        Term::Choice(_) => 0,
        Term::Unless(..) => 1,
        Term::Par(_) | Term::Comm(..) | Term::Between(..) => 2,
        Term::Seq(_) => 3,
        _ => 4,
    }
}

fn wrap(t: &Term, min: u8, out: &mut String) {
    if level(t) < min {
        out.push('(');
        render_into(t, out);
        out.push(')');
    } else {
        render_into(t, out);
    }
}

fn render_set(set: &BTreeSet<Label>, out: &mut String) {
    out.push('{');
    for (i, l) in set.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(l.as_str());
    }
    out.push('}');
}

fn render_into(t: &Term, out: &mut String) {
    match t {
        Term::Event(e) => {
            out.push_str(e.label.as_str());
            if let Some(k) = e.key {
                out.push_str(&format!("[{k}]"));
            }
        }
        Term::Delta => out.push_str("delta"),
        Term::Tau(k) => {
            out.push_str("tau");
            if let Some(k) = k {
                out.push_str(&format!("[{k}]"));
            }
        }
        Term::Choice(v) => {
            for (i, c) in v.iter().enumerate() {
                if i > 0 {
                    out.push_str(" + ");
                }
                wrap(c, 1, out);
            }
        }
        Term::Seq(v) => {
            for (i, c) in v.iter().enumerate() {
                if i > 0 {
                    out.push_str(" . ");
                }
                wrap(c, 4, out);
            }
        }
        Term::Par(v) => {
            for (i, c) in v.iter().enumerate() {
                if i > 0 {
                    out.push_str(" || ");
                }
                // a `|` or `&` operand would re-associate, so only Seq and tighter go bare
                wrap(c, if matches!(c, Term::Par(_)) { 2 } else { 3 }, out);
            }
        }
        Term::Comm(x, y) | Term::Between(x, y) => {
            wrap(x, 2, out);
            out.push_str(if matches!(t, Term::Comm(..)) { " | " } else { " & " });
            wrap(y, 3, out);
        }
        Term::Unless(x, y) => {
            wrap(x, 1, out);
            out.push_str(" <| ");
            wrap(y, 2, out);
        }
        Term::ConflictElim(x) => {
            out.push_str("theta(");
            render_into(x, out);
            out.push(')');
        }
        Term::Encap(h, x) | Term::Abstract(h, x) => {
            out.push_str(if matches!(t, Term::Encap(..)) { "enc" } else { "hide" });
            render_set(h, out);
            out.push('(');
            render_into(x, out);
            out.push(')');
        }
        Term::RecRef(v, e) => out.push_str(&format!("<{v}|{e}>")),
    }
}

/// Renders with minimal parentheses.
pub fn render(t: &Term) -> String {
    let mut out = String::new();
    render_into(t, &mut out);
    out
}

/// Renders a spec body with bare variable names.
pub fn render_body(t: &Term) -> String {
    let mut s = String::new();
    render_body_into(t, &mut s);
    s
}

fn render_body_into(t: &Term, out: &mut String) {
    // reuse the term renderer, substituting bare names for references
    let r = render(t);
    let mut rest = r.as_str();
    while let Some(start) = rest.find('<') {
        if rest[start..].starts_with("<|") {
            out.push_str(&rest[..start + 2]);
            rest = &rest[start + 2..];
            continue;
        }
        out.push_str(&rest[..start]);
        let end = rest[start..].find('>').map(|e| start + e).unwrap_or(rest.len() - 1);
        let inner = &rest[start + 1..end];
        out.push_str(inner.split('|').next().unwrap_or(inner));
        rest = &rest[end + 1..];
    }
    out.push_str(rest);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        Signature::from_names(&["a", "b", "c", "i"])
    }

    fn p(s: &str) -> Term {
        parse_term(s, &sig()).unwrap()
    }

    #[test]
    fn precedence_examples() {
        assert_eq!(p("a . b + c"), Term::Choice(vec![Term::ev("c"), Term::seq(vec![Term::ev("a"), Term::ev("b")])]));
        assert_eq!(p("a[1] || b[1]"), Term::Par(vec![Term::hist("a", 1), Term::hist("b", 1)]));
        let h: BTreeSet<Label> = [Label::new("a").unwrap()].into_iter().collect();
        assert_eq!(p("enc{a}(a + b)"), Term::encap(h, Term::Choice(vec![Term::ev("a"), Term::ev("b")])));
    }

    #[test]
    fn render_examples() {
        assert_eq!(render(&p("a + b")), "a + b");
        assert_eq!(render(&p("a . (b + c)")), "a . (b + c)");
        assert_eq!(render(&p("hide{i}(a || i)")), "hide{i}(a || i)");
    }

    #[test]
    fn errors_have_positions() {
        match parse_term("a + + b", &sig()) {
            Err(SyntaxError::Syntax { line: 1, col: 5, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_term("a . zz", &sig()) {
            Err(SyntaxError::UnknownLabel { line: 1, col: 5, name }) => assert_eq!(name, "zz"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spec_examples() {
        let e = parse_spec("X = a . X + b", &sig()).unwrap();
        assert_eq!(e.vars(), vec!["X".to_string()]);
        let e = parse_spec("X = a . Y; Y = b . X", &sig()).unwrap();
        assert_eq!(e.vars().len(), 2);
        assert_eq!(parse_spec("X = a . Z", &sig()), Err(SyntaxError::UndefinedVariable("Z".into())));
        assert_eq!(parse_spec("X = a; X = b", &sig()), Err(SyntaxError::DuplicateVariable("X".into())));
    }

    #[test]
    fn operators_round_trip() {
        for s in [
            "a | b . c",
            "(a | b) | c",
            "a | (b | c)",
            "a & b || c",
            "(a & b) || c",
            "a <| b <| c",
            "a <| (b <| c)",
            "theta(a + b) . c",
            "(a || b) . c + tau[2] . delta",
            "<X|E> + a",
        ] {
            let t = p(s);
            assert_eq!(p(&render(&t)), t, "{s} -> {}", render(&t));
        }
    }

    #[test]
    fn file_sections() {
        let src = "[signature]\nalphabet a b c\ngamma a b = c\nconflict a b\nprio b < c\n[spec E]\nX = a . X + b\n[terms]\nt1 = <X|E> || c\nt2 = a & b\n";
        let f = parse_file(src).unwrap();
        assert_eq!(f.terms.len(), 2);
        assert!(f.specs.contains_key("E"));
        assert!(f.signature.in_conflict(&Label::new("a").unwrap(), &Label::new("b").unwrap()));
        let bad = "[signature]\nalphabet a\n[terms]\nt = a + + a\n";
        match parse_file(bad) {
            Err(SyntaxError::Syntax { line: 4, col: 9, .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
