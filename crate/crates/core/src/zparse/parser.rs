use super::ast::*;
use super::lexer::{strip_comments, syntax_error, tokenize, Tok, Token};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParaKind {
    Schema(String),
    Axdef,
    Zed,
}

/// A formal paragraph located in the source; `start..end` is its body.
#[derive(Clone, Debug)]
pub struct Para {
    pub kind: ParaKind,
    pub start: usize,
    pub end: usize,
}

fn find_from(hay: &str, pat: &str, from: usize) -> Option<usize> {
    hay.get(from..)?.find(pat).map(|i| i + from)
}

/// Finds the formal paragraphs; everything else is ignored.
pub fn paragraphs(src: &str) -> Result<Vec<Para>> {
    let mut out = Vec::new();
    let mut i = 0;
    let b = src.as_bytes();
    while i < src.len() {
        let begin = find_from(src, "\\begin{", i);
        let display = {
            let mut j = i;
            loop {
                match find_from(src, "\\[", j) {
                    Some(k) if k > 0 && b[k - 1] == b'\\' => j = k + 2,
                    other => break other,
                }
            }
        };
        let next = match (begin, display) {
            (Some(x), Some(y)) => x.min(y),
            (Some(x), None) | (None, Some(x)) => x,
            (None, None) => break,
        };
        if Some(next) == display {
            let start = next + 2;
            let end = find_from(src, "\\]", start)
                .ok_or_else(|| syntax_error(src, next, "`\\]` closing the display"))?;
            out.push(Para {
                kind: ParaKind::Zed,
                start,
                end,
            });
            i = end + 2;
            continue;
        }
        let name_start = next + "\\begin{".len();
        let name_end = find_from(src, "}", name_start)
            .ok_or_else(|| syntax_error(src, next, "`}` after environment name"))?;
        let env = &src[name_start..name_end];
        let mut body = name_end + 1;
        let kind = match env {
            "schema" => {
                let rest = &src[body..];
                let trimmed = rest.trim_start();
                let skip = rest.len() - trimmed.len();
                if trimmed.starts_with('[') {
                    return Err(Error::Unsupported("generic schema".into()));
                }
                if !trimmed.starts_with('{') {
                    return Err(syntax_error(src, body + skip, "`{name}` after \\begin{schema}"));
                }
                let open = body + skip;
                let close = matching_brace(src, open)
                    .ok_or_else(|| syntax_error(src, open, "`}` closing the schema name"))?;
                let name: String = src[open + 1..close]
                    .chars()
                    .filter(|c| !matches!(c, '\\' | '{' | '}' | ' '))
                    .collect();
                body = close + 1;
                ParaKind::Schema(name)
            }
            "axdef" => ParaKind::Axdef,
            "zed" => ParaKind::Zed,
            "gendef" => return Err(Error::Unsupported("generic definition".into())),
            _ => {
                i = name_end + 1;
                continue;
            }
        };
        let end_tag = format!("\\end{{{env}}}");
        let end = find_from(src, &end_tag, body)
            .ok_or_else(|| syntax_error(src, next, format!("`{end_tag}`")))?;
        out.push(Para {
            kind,
            start: body,
            end,
        });
        i = end + end_tag.len();
    }
    Ok(out)
}

fn matching_brace(src: &str, open: usize) -> Option<usize> {
    let mut depth = 0;
    for (k, c) in src[open..].char_indices() {
        match c {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(open + k);
                }
            }
            _ => {}
        }
    }
    None
}

/// Declaration-part entry before inclusion expansion.
#[derive(Clone, Debug, PartialEq)]
pub enum DeclItem {
    Include(Inclusion),
    Vars {
        names: Vec<(String, Decoration)>,
        ty: TypeExpr,
        injective: bool,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawSchema {
    pub name: String,
    pub items: Vec<DeclItem>,
    pub pred: ZExpr,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Given(Vec<String>),
    Free(FreeTypeDef),
    Axdef(Vec<AxDef>),
    Schema(RawSchema),
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, start: usize, end: usize) -> Result<Self> {
        Ok(Parser {
            src,
            toks: tokenize(src, start, end)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: &str) -> Error {
        syntax_error(self.src, self.toks[self.pos].offset, expected)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<()> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.err(what))
        }
    }

    fn is_cmd(&self, words: &[&str]) -> bool {
        matches!(self.peek(), Tok::Cmd(w) if words.contains(&w.as_str()))
    }

    fn eat_cmd(&mut self, words: &[&str]) -> bool {
        if self.is_cmd(words) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn plain_name(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Name(n, Decoration::Plain) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.err(what)),
        }
    }

    fn unsupported_cmd(&self) -> Error {
        match self.peek() {
            Tok::Cmd(w) => Error::Unsupported(format!("\\{w}")),
            _ => self.err("an expression"),
        }
    }

    // ---- types ----

    fn ty(&mut self) -> Result<(TypeExpr, bool)> {
        let (lhs, inj) = self.ty_product()?;
        if self.is_cmd(&["pfun", "fun", "rel"]) {
            let Tok::Cmd(w) = self.bump() else { unreachable!() };
            let (rhs, _) = self.ty()?;
            let t = if w == "rel" {
                TypeExpr::Rel(Box::new(lhs), Box::new(rhs))
            } else {
                TypeExpr::Func {
                    total: w == "fun",
                    dom: Box::new(lhs),
                    ran: Box::new(rhs),
                }
            };
            return Ok((t, false));
        }
        Ok((lhs, inj))
    }

    fn ty_product(&mut self) -> Result<(TypeExpr, bool)> {
        let (first, inj) = self.ty_atom()?;
        if !self.is_cmd(&["cross"]) {
            return Ok((first, inj));
        }
        let mut parts = vec![first];
        while self.eat_cmd(&["cross"]) {
            parts.push(self.ty_atom()?.0);
        }
        Ok((TypeExpr::Product(parts), false))
    }

    fn ty_atom(&mut self) -> Result<(TypeExpr, bool)> {
        match self.peek().clone() {
            Tok::Cmd(w) if w == "nat" => {
                self.bump();
                Ok((TypeExpr::Nat, false))
            }
            Tok::Cmd(w) if w == "pset" => {
                self.bump();
                let (t, _) = self.ty_atom()?;
                Ok((TypeExpr::Power(Box::new(t)), false))
            }
            Tok::Cmd(w) if w == "seq" || w == "iseq" => {
                self.bump();
                let (t, _) = self.ty_atom()?;
                Ok((TypeExpr::Seq(Box::new(t)), w == "iseq"))
            }
            Tok::Name(n, Decoration::Plain) if n == "seq" || n == "iseq" => {
                self.bump();
                let (t, _) = self.ty_atom()?;
                Ok((TypeExpr::Seq(Box::new(t)), n == "iseq"))
            }
            Tok::Name(n, Decoration::Plain) => {
                self.bump();
                Ok((TypeExpr::Named(n), false))
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(&Tok::RParen, "`)` closing the type")?;
                Ok(t)
            }
            Tok::Cmd(_) => Err(self.unsupported_cmd()),
            _ => Err(self.err("a type")),
        }
    }

    // ---- declarations ----

    fn at_decl_end(&self) -> bool {
        matches!(self.peek(), Tok::Eof | Tok::Bar | Tok::RBrack)
            || self.is_cmd(&["ST", "where", "bbar"])
    }

    fn decl_part(&mut self) -> Result<Vec<DeclItem>> {
        let mut items = Vec::new();
        while !self.at_decl_end() {
            if self.eat(&Tok::Newline) || self.eat(&Tok::Semi) {
                continue;
            }
            items.push(self.decl_item()?);
            if !self.at_decl_end() && !matches!(self.peek(), Tok::Newline | Tok::Semi) {
                return Err(self.err("`\\\\`, `;` or `\\where` after a declaration"));
            }
        }
        Ok(items)
    }

    fn decl_item(&mut self) -> Result<DeclItem> {
        if self.eat_cmd(&["Delta"]) {
            let schema = self.plain_name("a schema name after \\Delta")?;
            return Ok(DeclItem::Include(Inclusion {
                schema,
                delta: true,
                primed: false,
            }));
        }
        if self.is_cmd(&["Xi"]) {
            return Err(Error::Unsupported("\\Xi schema inclusion".into()));
        }
        let Tok::Name(first, deco) = self.peek().clone() else {
            return Err(self.err("a declaration"));
        };
        if !matches!(self.peek_at(1), Tok::Colon | Tok::Comma) {
            self.bump();
            return match deco {
                Decoration::Plain | Decoration::Primed => Ok(DeclItem::Include(Inclusion {
                    schema: first,
                    delta: false,
                    primed: deco == Decoration::Primed,
                })),
                _ => Err(self.err("`:` after the declared name")),
            };
        }
        let mut names = Vec::new();
        loop {
            match self.bump() {
                Tok::Name(n, d) => names.push((n, d)),
                _ => return Err(self.err("a declared name")),
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(&Tok::Colon, "`:` in declaration")?;
        let (ty, injective) = self.ty()?;
        Ok(DeclItem::Vars {
            names,
            ty,
            injective,
        })
    }

    // ---- expressions ----

    /// Predicate: lines separated by `\\` are conjoined.
    fn pred(&mut self) -> Result<ZExpr> {
        let mut lines = Vec::new();
        loop {
            while self.eat(&Tok::Newline) {}
            if matches!(self.peek(), Tok::Eof | Tok::RBrack) {
                break;
            }
            lines.push(self.implies()?);
            if !matches!(self.peek(), Tok::Newline | Tok::Eof | Tok::RBrack) {
                return Err(self.err("`\\\\` or end of predicate"));
            }
        }
        Ok(ZExpr::and(lines))
    }

    fn implies(&mut self) -> Result<ZExpr> {
        let lhs = self.land()?;
        if self.eat_cmd(&["implies"]) {
            let rhs = self.implies()?;
            return Ok(ZExpr::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn land(&mut self) -> Result<ZExpr> {
        let mut parts = vec![self.rel()?];
        while self.eat_cmd(&["land"]) {
            parts.push(self.rel()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            ZExpr::and(parts)
        })
    }

    fn relop(&self) -> Option<RelOp> {
        match self.peek() {
            Tok::Eq => Some(RelOp::Eq),
            Tok::Lt => Some(RelOp::Lt),
            Tok::Cmd(w) => match w.as_str() {
                "neq" => Some(RelOp::Neq),
                "leq" => Some(RelOp::Le),
                "mem" | "in" => Some(RelOp::In),
                "nmem" | "notin" => Some(RelOp::NotIn),
                _ => None,
            },
            _ => None,
        }
    }

    fn rel(&mut self) -> Result<ZExpr> {
        let lhs = self.setexpr()?;
        if let Some(op) = self.relop() {
            self.bump();
            let rhs = self.setexpr()?;
            if self.relop().is_some() {
                return Err(Error::Unsupported("chained relation".into()));
            }
            return Ok(ZExpr::Rel(op, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn setexpr(&mut self) -> Result<ZExpr> {
        let mut lhs = self.filter()?;
        loop {
            let op = match self.peek() {
                Tok::Cmd(w) if w == "cup" || w == "union" => BinOp::Union,
                Tok::Cmd(w) if w == "setminus" => BinOp::SetMinus,
                Tok::Cmd(w) if w == "cat" => BinOp::Cat,
                _ => break,
            };
            self.bump();
            let rhs = self.filter()?;
            lhs = ZExpr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn filter(&mut self) -> Result<ZExpr> {
        let mut lhs = self.prefix()?;
        while self.eat_cmd(&["filter"]) {
            let rhs = self.prefix()?;
            lhs = ZExpr::Bin(BinOp::Filter, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<ZExpr> {
        match self.peek() {
            Tok::Cmd(w) if w == "#" => {
                self.bump();
                Ok(ZExpr::Card(Box::new(self.prefix()?)))
            }
            Tok::Cmd(w) if w == "ran" => {
                self.bump();
                Ok(ZExpr::Ran(Box::new(self.prefix()?)))
            }
            Tok::Cmd(w) if w == "dom" => {
                self.bump();
                Ok(ZExpr::Dom(Box::new(self.prefix()?)))
            }
            _ => self.primary(),
        }
    }

    fn list_until(&mut self, close: &Tok, what: &str) -> Result<Vec<ZExpr>> {
        let mut xs = Vec::new();
        if self.eat(close) {
            return Ok(xs);
        }
        loop {
            xs.push(self.setexpr()?);
            if self.eat(close) {
                return Ok(xs);
            }
            self.expect(&Tok::Comma, what)?;
        }
    }

    fn primary(&mut self) -> Result<ZExpr> {
        match self.peek().clone() {
            Tok::Name(n, d) => {
                self.bump();
                if d == Decoration::Plain && (n == "true" || n == "false") {
                    return Ok(ZExpr::Bool(n == "true"));
                }
                if d == Decoration::Plain && self.eat(&Tok::Inverse) {
                    self.expect(&Tok::LParen, "`(` after an inverse")?;
                    let arg = self.implies()?;
                    self.expect(&Tok::RParen, "`)`")?;
                    return Ok(ZExpr::Inverse(n, Box::new(arg)));
                }
                if d == Decoration::Plain && self.eat(&Tok::LParen) {
                    let arg = self.implies()?;
                    self.expect(&Tok::RParen, "`)`")?;
                    return Ok(ZExpr::Apply(n, Box::new(arg)));
                }
                if d == Decoration::Plain && self.eat_cmd(&["lang", "ldata"]) {
                    let arg = self.implies()?;
                    if !self.eat_cmd(&["rang", "rdata"]) {
                        return Err(self.err("`\\rang`"));
                    }
                    return Ok(ZExpr::Apply(n, Box::new(arg)));
                }
                Ok(ZExpr::Ident(n, d))
            }
            Tok::Num(k) => {
                self.bump();
                Ok(ZExpr::Num(k))
            }
            Tok::LParen => {
                self.bump();
                let e = self.implies()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::SetOpen => {
                self.bump();
                let xs = self.list_until(&Tok::SetClose, "`,` or `\\}` in set display")?;
                Ok(if xs.is_empty() {
                    ZExpr::EmptySet
                } else {
                    ZExpr::SetDisplay(xs)
                })
            }
            Tok::Cmd(w) => match w.as_str() {
                "emptyset" => {
                    self.bump();
                    Ok(ZExpr::EmptySet)
                }
                "emptyseq" => {
                    self.bump();
                    Ok(ZExpr::EmptySeq)
                }
                "lseq" | "langle" => {
                    self.bump();
                    let close = if w == "lseq" { "rseq" } else { "rangle" };
                    let mut xs = Vec::new();
                    if !self.eat_cmd(&[close]) {
                        loop {
                            xs.push(self.setexpr()?);
                            if self.eat_cmd(&[close]) {
                                break;
                            }
                            self.expect(&Tok::Comma, "`,` or `\\rseq`")?;
                        }
                    }
                    Ok(if xs.is_empty() {
                        ZExpr::EmptySeq
                    } else {
                        ZExpr::SeqDisplay(xs)
                    })
                }
                _ => Err(self.unsupported_cmd()),
            },
            _ => Err(self.err("an expression")),
        }
    }

    // ---- paragraphs ----

    fn schema_body(&mut self, name: String) -> Result<RawSchema> {
        let items = self.decl_part()?;
        let pred = if self.eat_cmd(&["ST", "where", "bbar"]) || self.eat(&Tok::Bar) {
            self.pred()?
        } else {
            ZExpr::Bool(true)
        };
        Ok(RawSchema { name, items, pred })
    }

    fn zed_items(&mut self) -> Result<Vec<Item>> {
        let mut out = Vec::new();
        loop {
            while self.eat(&Tok::Newline) || self.eat(&Tok::Semi) {}
            if self.eat(&Tok::Eof) || matches!(self.peek(), Tok::Eof) {
                return Ok(out);
            }
            out.push(self.zed_item()?);
        }
    }

    fn zed_item(&mut self) -> Result<Item> {
        if self.eat(&Tok::LBrack) {
            let mut names = vec![self.plain_name("a given-type name")?];
            while self.eat(&Tok::Comma) {
                names.push(self.plain_name("a given-type name")?);
            }
            self.expect(&Tok::RBrack, "`]` closing the given types")?;
            return Ok(Item::Given(names));
        }
        let name = self.plain_name("a definition")?;
        if self.eat(&Tok::FreeEq) {
            let mut branches = Vec::new();
            loop {
                let b = self.plain_name("a free-type branch")?;
                let arg = if self.eat_cmd(&["lang", "ldata"]) {
                    let (t, _) = self.ty()?;
                    if !self.eat_cmd(&["rang", "rdata"]) {
                        return Err(self.err("`\\rang`"));
                    }
                    Some(t)
                } else {
                    None
                };
                branches.push((b, arg));
                if !(self.eat_cmd(&["bbar"]) || self.eat(&Tok::Bar)) {
                    break;
                }
            }
            return Ok(Item::Free(FreeTypeDef { name, branches }));
        }
        if self.eat(&Tok::Eq) || self.eat(&Tok::DefEq) || self.eat_cmd(&["defs", "sdef"]) {
            if !self.eat(&Tok::LBrack) {
                return Err(Error::Unsupported(format!("abbreviation {name}")));
            }
            let s = self.schema_body(name)?;
            self.expect(&Tok::RBrack, "`]` closing the schema text")?;
            return Ok(Item::Schema(s));
        }
        Err(self.err("`::=`, `==` or `=`"))
    }

    fn axdef(&mut self) -> Result<Item> {
        let items = self.decl_part()?;
        let pred = if self.eat_cmd(&["where", "ST"]) || self.eat(&Tok::Bar) {
            Some(self.pred()?)
        } else {
            None
        };
        if !matches!(self.peek(), Tok::Eof) {
            return Err(self.err("end of axiomatic definition"));
        }
        let mut defs = Vec::new();
        for it in items {
            match it {
                DeclItem::Vars { names, ty, .. } => {
                    for (n, d) in names {
                        if d != Decoration::Plain {
                            return Err(Error::Unsupported(format!(
                                "decorated constant {n}{}",
                                d.suffix()
                            )));
                        }
                        defs.push(AxDef {
                            name: n,
                            ty: ty.clone(),
                            pred: None,
                        });
                    }
                }
                DeclItem::Include(i) => {
                    return Err(Error::Unsupported(format!(
                        "schema inclusion {} in axiomatic definition",
                        i.schema
                    )))
                }
            }
        }
        if let (Some(p), Some(last)) = (pred, defs.last_mut()) {
            if p != ZExpr::Bool(true) {
                last.pred = Some(p);
            }
        }
        Ok(Item::Axdef(defs))
    }
}

/// Parses every formal paragraph of `src` into raw items.
pub fn parse_items(src: &str) -> Result<Vec<Item>> {
    let clean = strip_comments(src);
    let mut out = Vec::new();
    for para in paragraphs(&clean)? {
        let mut p = Parser::new(&clean, para.start, para.end)?;
        match para.kind {
            ParaKind::Schema(name) => {
                let s = p.schema_body(name)?;
                if !matches!(p.peek(), Tok::Eof) {
                    return Err(p.err("end of schema"));
                }
                out.push(Item::Schema(s));
            }
            ParaKind::Axdef => out.push(p.axdef()?),
            ParaKind::Zed => out.extend(p.zed_items()?),
        }
    }
    Ok(out)
}

/// Parses a standalone predicate (used by tests and the Python bindings).
pub fn parse_predicate(src: &str) -> Result<ZExpr> {
    let clean = strip_comments(src);
    let mut p = Parser::new(&clean, 0, clean.len())?;
    let e = p.pred()?;
    if !matches!(p.peek(), Tok::Eof) {
        return Err(p.err("end of predicate"));
    }
    Ok(e)
}
