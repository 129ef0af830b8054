//! Line-oriented model description language.
//!
//! ```text
//! model cp2
//! generator x1 : 1
//! generator x2 : 3
//! d x2 = 1/2 [x1, x1]
//! sub M = { x1 }
//! filtration {
//!   V1 = { x2 }
//! }
//! truncate 6
//! wedge 6
//! window -2..8
//! ```

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::free_lie::{mul_trunc, FreeLie, Generator, LieElem, Presentation, Word};
use crate::graded::linalg::SVec;
use crate::graded::scalar::{parse_q, sign, Q};
use crate::graded::DegreeWindow;

pub const DEFAULT_TRUNCATION: usize = 6;
pub const DEFAULT_WINDOW: (i64, i64) = (-2, 8);

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Gen { name: String, line: usize, col: usize },
    Bracket(Box<Expr>, Box<Expr>),
    Sum(Vec<(Q, Expr)>),
    Zero,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelScript {
    pub name: Option<String>,
    pub provenance: Option<String>,
    pub generators: Vec<(String, i64)>,
    pub differentials: Vec<(String, Expr, usize)>,
    pub sub: Option<(String, Vec<String>)>,
    /// V¹, V², … listed in order; V⁰ is everything.
    pub filtration: Option<Vec<Vec<String>>>,
    pub truncate: Option<usize>,
    pub wedge: Option<usize>,
    pub window: Option<(i64, i64)>,
    pub runs: Vec<String>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub truncate: Option<usize>,
    pub wedge: Option<usize>,
    pub window: Option<(i64, i64)>,
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col0: usize,
    _src: &'a str,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(char),
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, line: usize, col0: usize) -> Self {
        Lexer { chars: src.chars().collect(), pos: 0, line, col0, _src: src }
    }

    fn col(&self) -> usize {
        self.col0 + self.pos + 1
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Syntax { line: self.line, col: self.col(), msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<(Tok, usize)> {
        let save = self.pos;
        let r = self.next();
        self.pos = save;
        r
    }

    fn next(&mut self) -> Option<(Tok, usize)> {
        self.skip_ws();
        let start = self.pos;
        let c = *self.chars.get(self.pos)?;
        let col = self.col();
        if c.is_alphabetic() || c == '_' {
            while self.pos < self.chars.len()
                && (self.chars[self.pos].is_alphanumeric() || self.chars[self.pos] == '_' || self.chars[self.pos] == '\'')
            {
                self.pos += 1;
            }
            return Some((Tok::Ident(self.chars[start..self.pos].iter().collect()), col));
        }
        if c.is_ascii_digit() {
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            return Some((Tok::Num(self.chars[start..self.pos].iter().collect()), col));
        }
        self.pos += 1;
        Some((Tok::Sym(c), col))
    }

    fn expect_sym(&mut self, s: char) -> Result<()> {
        match self.next() {
            Some((Tok::Sym(c), _)) if c == s => Ok(()),
            _ => Err(self.err(format!("expected `{s}`"))),
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.chars.len()
    }

    fn rational(&mut self) -> Result<Option<Q>> {
        let Some((Tok::Num(n), _)) = self.peek() else { return Ok(None) };
        self.next();
        let mut text = n;
        if let Some((Tok::Sym('/'), _)) = self.peek() {
            self.next();
            match self.next() {
                Some((Tok::Num(d), _)) => {
                    text.push('/');
                    text.push_str(&d);
                }
                _ => return Err(self.err("expected denominator")),
            }
        }
        parse_q(&text).map(Some).ok_or_else(|| self.err("invalid rational"))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = Vec::new();
        let mut first = true;
        loop {
            let mut c = Q::one();
            match self.peek() {
                Some((Tok::Sym('+'), _)) if !first => {
                    self.next();
                }
                Some((Tok::Sym('-'), _)) => {
                    self.next();
                    c = -c;
                }
                _ if !first => break,
                _ => {}
            }
            first = false;
            let (coef, atom) = self.term()?;
            match atom {
                Some(a) => terms.push((c * coef, a)),
                None => {
                    if !coef.is_zero() {
                        return Err(self.err("a scalar must multiply a bracket or generator"));
                    }
                }
            }
        }
        Ok(if terms.is_empty() { Expr::Zero } else { Expr::Sum(terms) })
    }

    fn term(&mut self) -> Result<(Q, Option<Expr>)> {
        let coef = self.rational()?;
        if coef.is_some() {
            if let Some((Tok::Sym('*'), _)) = self.peek() {
                self.next();
            }
        }
        let coef_v = coef.clone().unwrap_or_else(Q::one);
        match self.peek() {
            Some((Tok::Ident(name), col)) => {
                self.next();
                Ok((coef_v, Some(Expr::Gen { name, line: self.line, col })))
            }
            Some((Tok::Sym('['), _)) => {
                self.next();
                let a = self.expr()?;
                self.expect_sym(',')?;
                let b = self.expr()?;
                self.expect_sym(']')?;
                Ok((coef_v, Some(Expr::Bracket(Box::new(a), Box::new(b)))))
            }
            Some((Tok::Sym('('), _)) => {
                self.next();
                let a = self.expr()?;
                self.expect_sym(')')?;
                Ok((coef_v, Some(a)))
            }
            _ if coef.is_some() => Ok((coef_v, None)),
            _ => Err(self.err("expected generator, bracket or scalar")),
        }
    }
}

fn parse_name_set(lx: &mut Lexer) -> Result<Vec<String>> {
    lx.expect_sym('{')?;
    let mut names = Vec::new();
    loop {
        match lx.next() {
            Some((Tok::Sym('}'), _)) => break,
            Some((Tok::Ident(n), _)) => {
                names.push(n);
                match lx.next() {
                    Some((Tok::Sym(','), _)) => {}
                    Some((Tok::Sym('}'), _)) => break,
                    _ => return Err(lx.err("expected `,` or `}`")),
                }
            }
            _ => return Err(lx.err("expected generator name or `}`")),
        }
    }
    Ok(names)
}

fn parse_int(lx: &mut Lexer) -> Result<i64> {
    let mut neg = false;
    if let Some((Tok::Sym('-'), _)) = lx.peek() {
        lx.next();
        neg = true;
    }
    match lx.next() {
        Some((Tok::Num(n), _)) => {
            let v: i64 = n.parse().map_err(|_| lx.err("integer out of range"))?;
            Ok(if neg { -v } else { v })
        }
        _ => Err(lx.err("expected integer")),
    }
}

pub fn parse_model(text: &str) -> Result<ModelScript> {
    let mut s = ModelScript {
        name: None,
        provenance: None,
        generators: Vec::new(),
        differentials: Vec::new(),
        sub: None,
        filtration: None,
        truncate: None,
        wedge: None,
        window: None,
        runs: Vec::new(),
    };
    let mut in_filtration = false;
    for (li, raw) in text.lines().enumerate() {
        let line_no = li + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let indent = line.len() - line.trim_start().len();
        let body = line.trim();
        let mut lx = Lexer::new(body, line_no, indent);
        if in_filtration {
            if body == "}" {
                in_filtration = false;
                continue;
            }
            let Some((Tok::Ident(v), _)) = lx.next() else { return Err(lx.err("expected `V<i> = { … }` or `}`")) };
            let idx: usize = v
                .strip_prefix('V')
                .and_then(|r| r.parse().ok())
                .ok_or_else(|| lx.err("filtration levels are named V1, V2, …"))?;
            let levels = s.filtration.as_mut().unwrap();
            if idx != levels.len() + 1 {
                return Err(lx.err(format!("expected V{}", levels.len() + 1)));
            }
            lx.expect_sym('=')?;
            levels.push(parse_name_set(&mut lx)?);
            if !lx.at_end() {
                return Err(lx.err("trailing input"));
            }
            continue;
        }
        let Some((Tok::Ident(kw), _)) = lx.next() else { return Err(lx.err("expected a directive")) };
        match kw.as_str() {
            "model" => {
                let rest = body[5..].trim();
                if rest.is_empty() {
                    return Err(lx.err("model needs a name"));
                }
                s.name = Some(rest.to_string());
                continue;
            }
            "source" => {
                s.provenance = Some(body[6..].trim().to_string());
                continue;
            }
            "run" => {
                s.runs.push(body[3..].trim().to_string());
                continue;
            }
            "generator" => {
                let Some((Tok::Ident(name), _)) = lx.next() else { return Err(lx.err("expected generator name")) };
                lx.expect_sym(':')?;
                let deg = parse_int(&mut lx)?;
                if s.generators.iter().any(|(n, _)| *n == name) {
                    return Err(lx.err(format!("generator `{name}` declared twice")));
                }
                s.generators.push((name, deg));
            }
            "d" => {
                let Some((Tok::Ident(name), col)) = lx.next() else { return Err(lx.err("expected generator name")) };
                if !s.generators.iter().any(|(n, _)| *n == name) {
                    return Err(Error::UnknownGenerator { name, line: line_no, col });
                }
                lx.expect_sym('=')?;
                let e = lx.expr()?;
                check_names(&e, &s.generators)?;
                if s.differentials.iter().any(|(n, _, _)| *n == name) {
                    return Err(lx.err(format!("d {name} assigned twice")));
                }
                s.differentials.push((name, e, line_no));
            }
            "sub" => {
                let Some((Tok::Ident(label), _)) = lx.next() else { return Err(lx.err("expected sub-dgl name")) };
                lx.expect_sym('=')?;
                let names = parse_name_set(&mut lx)?;
                for n in &names {
                    if !s.generators.iter().any(|(g, _)| g == n) {
                        return Err(Error::UnknownGenerator { name: n.clone(), line: line_no, col: indent + 1 });
                    }
                }
                s.sub = Some((label, names));
            }
            "filtration" => {
                lx.expect_sym('{')?;
                s.filtration = Some(Vec::new());
                if let Some((Tok::Sym('}'), _)) = lx.peek() {
                    lx.next();
                } else {
                    in_filtration = true;
                }
            }
            "truncate" => s.truncate = Some(parse_int(&mut lx)?.max(0) as usize),
            "wedge" => s.wedge = Some(parse_int(&mut lx)?.max(0) as usize),
            "window" => {
                let a = parse_int(&mut lx)?;
                lx.expect_sym('.')?;
                lx.expect_sym('.')?;
                let b = parse_int(&mut lx)?;
                s.window = Some((a, b));
            }
            other => return Err(Error::Syntax { line: line_no, col: indent + 1, msg: format!("unknown directive `{other}`") }),
        }
        if !lx.at_end() {
            return Err(lx.err("trailing input"));
        }
    }
    if in_filtration {
        return Err(Error::Syntax { line: text.lines().count(), col: 1, msg: "unterminated filtration block".into() });
    }
    if let Some(levels) = &s.filtration {
        for lvl in levels {
            for n in lvl {
                if !s.generators.iter().any(|(g, _)| g == n) {
                    return Err(Error::UnknownGenerator { name: n.clone(), line: 0, col: 0 });
                }
            }
        }
    }
    Ok(s)
}

fn check_names(e: &Expr, gens: &[(String, i64)]) -> Result<()> {
    match e {
        Expr::Gen { name, line, col } => {
            if gens.iter().any(|(n, _)| n == name) {
                Ok(())
            } else {
                Err(Error::UnknownGenerator { name: name.clone(), line: *line, col: *col })
            }
        }
        Expr::Bracket(a, b) => {
            check_names(a, gens)?;
            check_names(b, gens)
        }
        Expr::Sum(ts) => ts.iter().try_for_each(|(_, t)| check_names(t, gens)),
        Expr::Zero => Ok(()),
    }
}

/// Evaluates an expression in the truncated tensor algebra. `None` degree
/// means the expression is zero without a determined degree.
fn eval(e: &Expr, gens: &[(String, i64)], n: usize) -> Result<(Option<i64>, SVec<Word>)> {
    match e {
        Expr::Zero => Ok((None, SVec::new())),
        Expr::Gen { name, .. } => {
            let g = gens.iter().position(|(m, _)| m == name).unwrap();
            Ok((Some(gens[g].1), SVec::unit(vec![g as u16])))
        }
        Expr::Bracket(a, b) => {
            let (da, ta) = eval(a, gens, n)?;
            let (db, tb) = eval(b, gens, n)?;
            match (da, db) {
                (Some(x), Some(y)) => {
                    let mut t = mul_trunc(&ta, &tb, n);
                    t.add_scaled(&mul_trunc(&tb, &ta, n), &-sign(x * y));
                    Ok((Some(x + y), t))
                }
                _ => Ok((None, SVec::new())),
            }
        }
        Expr::Sum(ts) => {
            let mut deg = None;
            let mut acc = SVec::new();
            for (c, t) in ts {
                let (d, v) = eval(t, gens, n)?;
                if let Some(d) = d {
                    if let Some(d0) = deg {
                        if d0 != d {
                            return Err(Error::Validation(format!("sum mixes degrees {d0} and {d}")));
                        }
                    }
                    deg = Some(d);
                }
                acc.add_scaled(&v, c);
            }
            Ok((deg, acc))
        }
    }
}

impl ModelScript {
    pub fn to_presentation(&self, o: &Overrides) -> Result<Presentation> {
        let n = o.truncate.or(self.truncate).unwrap_or(DEFAULT_TRUNCATION);
        let wedge = o.wedge.or(self.wedge).unwrap_or(n);
        let (a, b) = o.window.or(self.window).unwrap_or(DEFAULT_WINDOW);
        let window = DegreeWindow::new(a, b)?;
        let gens: Vec<Generator> =
            self.generators.iter().map(|(name, degree)| Generator { name: name.clone(), degree: *degree }).collect();
        let mut differential: Vec<LieElem> = gens.iter().map(|g| LieElem::zero(g.degree - 1)).collect();
        for (name, e, line) in &self.differentials {
            let g = self.generators.iter().position(|(m, _)| m == name).unwrap();
            let (deg, terms) = eval(e, &self.generators, n)
                .map_err(|err| Error::Validation(format!("line {line}: {err}")))?;
            if let Some(d) = deg {
                if d != gens[g].degree - 1 && !terms.is_zero() {
                    return Err(Error::Validation(format!(
                        "line {line}: d {name} has degree {d}, expected {}",
                        gens[g].degree - 1
                    )));
                }
                if d != gens[g].degree - 1 && terms.is_zero() {
                    return Err(Error::Validation(format!(
                        "line {line}: d {name} is a degree {d} expression, expected degree {}",
                        gens[g].degree - 1
                    )));
                }
            }
            differential[g] = LieElem { degree: gens[g].degree - 1, terms };
        }
        let filtration = self.filtration.as_ref().map(|levels| {
            let mut lvl = vec![0usize; gens.len()];
            for (i, names) in levels.iter().enumerate() {
                for nm in names {
                    let g = self.generators.iter().position(|(m, _)| m == nm).unwrap();
                    lvl[g] = lvl[g].max(i + 1);
                }
            }
            lvl
        });
        if let Some(levels) = &self.filtration {
            for i in 1..levels.len() {
                for nm in &levels[i] {
                    if !levels[i - 1].contains(nm) {
                        return Err(Error::Validation(format!(
                            "filtration is not descending: {nm} ∈ V{} but not V{}",
                            i + 1,
                            i
                        )));
                    }
                }
            }
        }
        let sub = self.sub.as_ref().map(|(_, names)| {
            let mut v: Vec<usize> =
                names.iter().map(|nm| self.generators.iter().position(|(m, _)| m == nm).unwrap()).collect();
            v.sort_unstable();
            v.dedup();
            v
        });
        Ok(Presentation {
            name: self.name.clone().unwrap_or_else(|| "model".into()),
            generators: gens,
            differential,
            truncation: n,
            wedge,
            window,
            filtration,
            sub,
        })
    }

    pub fn build(&self, o: &Overrides) -> Result<Arc<FreeLie>> {
        FreeLie::new(self.to_presentation(o)?)
    }
}

/// Canonical text of a validated model.
pub fn render_model(l: &FreeLie, provenance: Option<&str>) -> String {
    let p = &l.pres;
    let mut out = String::new();
    out.push_str(&format!("model {}\n", p.name));
    if let Some(s) = provenance {
        out.push_str(&format!("source {s}\n"));
    }
    for g in &p.generators {
        out.push_str(&format!("generator {} : {}\n", g.name, g.degree));
    }
    for (i, g) in p.generators.iter().enumerate() {
        let d = &p.differential[i];
        if !d.is_zero() {
            out.push_str(&format!("d {} = {}\n", g.name, l.render(d)));
        }
    }
    if let Some(u) = &p.sub {
        let names: Vec<&str> = u.iter().map(|&g| p.generators[g].name.as_str()).collect();
        out.push_str(&format!("sub M = {{ {} }}\n", names.join(", ")));
    }
    if let Some(f) = &p.filtration {
        let top = f.iter().copied().max().unwrap_or(0);
        if top == 0 {
            out.push_str("filtration { }\n");
        } else {
            out.push_str("filtration {\n");
            for i in 1..=top {
                let names: Vec<&str> =
                    (0..f.len()).filter(|&g| f[g] >= i).map(|g| p.generators[g].name.as_str()).collect();
                out.push_str(&format!("  V{} = {{ {} }}\n", i, names.join(", ")));
            }
            out.push_str("}\n");
        }
    }
    out.push_str(&format!("truncate {}\n", p.truncation));
    out.push_str(&format!("wedge {}\n", p.wedge));
    out.push_str(&format!("window {}..{}\n", p.window.min, p.window.max));
    out
}
