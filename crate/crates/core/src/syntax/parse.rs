use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

use super::{Call, Definition, Expr, Item, Pattern, Program, Rule, Sort, Symbol, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    /// Identifier; the flag is set when `(` follows with no space.
    Ident(String, bool),
    Var(Sort, String),
    Chars(Vec<char>),
    LParen,
    RParen,
    Nil,
    Colon,
    Concat,
    Comma,
    Arrow,
    Semi,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, message: String| ParseError { line, col, message };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                out.push(Token { tok: Tok::LParen, line: tl, col: tc });
                advance(1, &mut i, &mut col);
            }
            ')' => {
                out.push(Token { tok: Tok::RParen, line: tl, col: tc });
                advance(1, &mut i, &mut col);
            }
            ',' => {
                out.push(Token { tok: Tok::Comma, line: tl, col: tc });
                advance(1, &mut i, &mut col);
            }
            ';' => {
                out.push(Token { tok: Tok::Semi, line: tl, col: tc });
                advance(1, &mut i, &mut col);
            }
            ':' => {
                out.push(Token { tok: Tok::Colon, line: tl, col: tc });
                advance(1, &mut i, &mut col);
            }
            '\u{21d2}' => {
                out.push(Token { tok: Tok::Arrow, line: tl, col: tc });
                advance(1, &mut i, &mut col);
            }
            '[' if chars.get(i + 1) == Some(&']') => {
                out.push(Token { tok: Tok::Nil, line: tl, col: tc });
                advance(2, &mut i, &mut col);
            }
            '+' if chars.get(i + 1) == Some(&'+') => {
                out.push(Token { tok: Tok::Concat, line: tl, col: tc });
                advance(2, &mut i, &mut col);
            }
            '=' if chars.get(i + 1) == Some(&'>') => {
                out.push(Token { tok: Tok::Arrow, line: tl, col: tc });
                advance(2, &mut i, &mut col);
            }
            '\'' => {
                let mut j = i + 1;
                let mut text = Vec::new();
                loop {
                    match chars.get(j) {
                        None | Some('\n') => {
                            return Err(err(tl, tc, "unterminated character literal".into()))
                        }
                        Some('\\') => {
                            let esc = match chars.get(j + 1) {
                                Some('n') => '\n',
                                Some('t') => '\t',
                                Some(&other) => other,
                                None => {
                                    return Err(err(tl, tc, "unterminated character literal".into()))
                                }
                            };
                            text.push(esc);
                            j += 2;
                        }
                        Some('\'') => break,
                        Some(&ch) => {
                            text.push(ch);
                            j += 1;
                        }
                    }
                }
                if text.is_empty() {
                    return Err(err(tl, tc, "empty character literal".into()));
                }
                out.push(Token { tok: Tok::Chars(text), line: tl, col: tc });
                let n = j + 1 - i;
                advance(n, &mut i, &mut col);
            }
            c if is_name_char(c) => {
                let mut j = i;
                while j < chars.len() && is_name_char(chars[j]) {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                if (word == "e" || word == "s") && chars.get(j) == Some(&'.') {
                    let mut k = j + 1;
                    while k < chars.len() && is_name_char(chars[k]) {
                        k += 1;
                    }
                    if k == j + 1 {
                        return Err(err(tl, tc, "variable name expected after '.'".into()));
                    }
                    let name: String = chars[j + 1..k].iter().collect();
                    let sort = if word == "e" { Sort::E } else { Sort::S };
                    out.push(Token { tok: Tok::Var(sort, name), line: tl, col: tc });
                    advance(k - i, &mut i, &mut col);
                } else {
                    let call = chars.get(j) == Some(&'(');
                    out.push(Token { tok: Tok::Ident(word, call), line: tl, col: tc });
                    advance(j - i, &mut i, &mut col);
                }
            }
            other => return Err(err(tl, tc, format!("unexpected character {other:?}"))),
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, t: &Token, message: impl Into<String>) -> ParseError {
        ParseError {
            line: t.line,
            col: t.col,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, ParseError> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            Err(self.error_at(&t, format!("expected {what}")))
        }
    }

    fn starts_item(tok: &Tok) -> bool {
        matches!(
            tok,
            Tok::Ident(..) | Tok::Var(..) | Tok::Chars(_) | Tok::LParen | Tok::Nil
        )
    }

    /// A flat sequence joined by `:`, `++` or juxtaposition.
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut items: Vec<Item> = Vec::new();
        if !Self::starts_item(&self.peek().tok) {
            return Ok(Expr::nil());
        }
        let mut last_is_term = self.item(&mut items)?;
        loop {
            match self.peek().tok.clone() {
                Tok::Colon => {
                    let t = self.next();
                    if !last_is_term {
                        return Err(self.error_at(&t, "left operand of ':' must be a term"));
                    }
                    last_is_term = self.item_required(&mut items)?;
                }
                Tok::Concat => {
                    self.next();
                    last_is_term = self.item_required(&mut items)?;
                }
                ref t if Self::starts_item(t) => {
                    last_is_term = self.item(&mut items)?;
                }
                _ => break,
            }
        }
        Ok(Expr(items))
    }

    fn item_required(&mut self, items: &mut Vec<Item>) -> Result<bool, ParseError> {
        if !Self::starts_item(&self.peek().tok) {
            let t = self.peek().clone();
            return Err(self.error_at(&t, "expression expected"));
        }
        self.item(items)
    }

    /// Parses one operand, pushing its items; returns whether it is a
    /// single term.
    fn item(&mut self, items: &mut Vec<Item>) -> Result<bool, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Nil => Ok(false),
            Tok::Var(sort, name) => {
                items.push(Item::Var(Var::new(sort, &name)));
                Ok(sort == Sort::S)
            }
            Tok::Chars(cs) => {
                let single = cs.len() == 1;
                items.extend(cs.into_iter().map(|c| Item::Sym(Symbol::Char(c))));
                Ok(single)
            }
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                items.push(Item::Paren(inner));
                Ok(true)
            }
            Tok::Ident(name, true) => {
                self.expect(Tok::LParen, "'('")?;
                let args = self.args()?;
                items.push(Item::Call(Call {
                    name: Arc::from(name.as_str()),
                    args,
                }));
                Ok(false)
            }
            Tok::Ident(name, false) => {
                items.push(Item::Sym(Symbol::Ident(Arc::from(name.as_str()))));
                Ok(true)
            }
            _ => Err(self.error_at(&t, "expression expected")),
        }
    }

    /// Comma-separated list up to and including the closing parenthesis.
    fn args(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut args = Vec::new();
        if self.peek().tok == Tok::RParen {
            self.next();
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            let t = self.next();
            match t.tok {
                Tok::Comma => continue,
                Tok::RParen => return Ok(args),
                _ => return Err(self.error_at(&t, "expected ',' or ')'")),
            }
        }
    }
}

/// Parses a whole program and checks its static well-formedness.
pub fn parse_program(source: &str) -> Result<Program, ParseError> {
    let mut p = Parser {
        toks: lex(source)?,
        pos: 0,
    };
    let mut defs: Vec<Definition> = Vec::new();
    let mut finished: HashMap<String, usize> = HashMap::new();
    let mut call_sites: Vec<(Call, usize, usize)> = Vec::new();
    while p.peek().tok != Tok::Eof {
        let head = p.next();
        let name = match &head.tok {
            Tok::Ident(name, true) => name.clone(),
            _ => return Err(p.error_at(&head, "rule must start with `name(`")),
        };
        p.expect(Tok::LParen, "'('")?;
        let arg_toks = p.pos;
        let raw = p.args()?;
        let mut patterns = Vec::with_capacity(raw.len());
        for e in raw {
            match Pattern::new(e) {
                Ok(pat) => patterns.push(pat),
                Err(msg) => {
                    let t = p.toks[arg_toks].clone();
                    return Err(p.error_at(&t, format!("invalid pattern: {msg}")));
                }
            }
        }
        p.expect(Tok::Arrow, "'=>'")?;
        let rhs_tok = p.peek().clone();
        let rhs = p.expr()?;
        p.expect(Tok::Semi, "';'")?;

        let bound: BTreeSet<Var> = patterns.iter().flat_map(|pat| pat.expr().vars()).collect();
        if let Some(free) = rhs.vars().into_iter().find(|v| !bound.contains(v)) {
            return Err(p.error_at(&rhs_tok, format!("{free} is free in the right-hand side")));
        }
        collect_calls(&rhs, rhs_tok.line, rhs_tok.col, &mut call_sites);

        let rule = Rule {
            fname: Arc::from(name.as_str()),
            patterns,
            rhs,
        };
        match defs.last_mut() {
            Some(def) if *def.name == *name => {
                if def.arity != rule.patterns.len() {
                    return Err(p.error_at(
                        &head,
                        format!(
                            "arity mismatch: {name} was declared with {} argument(s), this rule has {}",
                            def.arity,
                            rule.patterns.len()
                        ),
                    ));
                }
                def.rules.push(rule);
            }
            _ => {
                if finished.contains_key(&name) {
                    return Err(p.error_at(&head, format!("duplicate function name {name}")));
                }
                finished.insert(name.clone(), defs.len());
                defs.push(Definition {
                    name: rule.fname.clone(),
                    arity: rule.patterns.len(),
                    rules: vec![rule],
                });
            }
        }
    }
    for (call, line, col) in call_sites {
        if let Some(&idx) = finished.get(&*call.name) {
            let arity = defs[idx].arity;
            if arity != call.args.len() {
                return Err(ParseError {
                    line,
                    col,
                    message: format!(
                        "arity mismatch: {} takes {arity} argument(s), called with {}",
                        call.name,
                        call.args.len()
                    ),
                });
            }
        }
    }
    Ok(Program { defs })
}

fn collect_calls(e: &Expr, line: usize, col: usize, out: &mut Vec<(Call, usize, usize)>) {
    for item in &e.0 {
        match item {
            Item::Call(c) => {
                out.push((c.clone(), line, col));
                for a in &c.args {
                    collect_calls(a, line, col, out);
                }
            }
            Item::Paren(inner) => collect_calls(inner, line, col, out),
            _ => {}
        }
    }
}

/// Parses a standalone expression (data literals, call templates).
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(source)?,
        pos: 0,
    };
    let e = p.expr()?;
    let t = p.peek().clone();
    if t.tok != Tok::Eof {
        return Err(p.error_at(&t, "unexpected trailing input"));
    }
    Ok(e)
}

pub fn parse_pattern(source: &str) -> Result<Pattern, ParseError> {
    let e = parse_expr(source)?;
    Pattern::new(e).map_err(|message| ParseError {
        line: 1,
        col: 1,
        message,
    })
}
