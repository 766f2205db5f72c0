//! Programs as data: the encoding of the unary, append-free fragment.
//!
//! | source       | encoding             |
//! |--------------|----------------------|
//! | `e.x`, `s.x` | `(Var 'e' x)`, `(Var 's' x)` |
//! | `(exp)`      | `('*' exp)`          |
//! | `f(exp)`     | `(Call f exp)`       |
//! | rule         | `((pattern) '=' (exp))` |
//! | function     | `(f rule1 rule2 ...)` |
//! | program      | `(function1 function2 ...)` |

use thiserror::Error;

use crate::syntax::{Call, Expr, Item, Name, Pattern, Program, Rule, Sort, Symbol, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodingError {
    #[error("outside the encodable fragment: {0}")]
    NotInFragment(String),
    #[error("not in the image of the encoding at `{subterm}`: {reason}")]
    NotInImage { subterm: Expr, reason: String },
}

fn not_in_image(subterm: &[Item], reason: &str) -> EncodingError {
    EncodingError::NotInImage {
        subterm: Expr(subterm.to_vec()),
        reason: reason.to_string(),
    }
}

const STAR: Symbol = Symbol::Char('*');
const EQ: Symbol = Symbol::Char('=');

fn sort_char(s: Sort) -> Symbol {
    Symbol::Char(s.prefix())
}

/// Checks that `e` uses no `++`: e-variables and calls may only close a
/// sequence, and every call is unary.
fn check_fragment(e: &Expr) -> Result<(), EncodingError> {
    let n = e.len();
    for (i, item) in e.items().iter().enumerate() {
        match item {
            Item::Var(v) if v.sort == Sort::E && i + 1 != n => {
                return Err(EncodingError::NotInFragment(format!("`{v}` is followed by more items (append)")))
            }
            Item::Call(c) => {
                if i + 1 != n {
                    return Err(EncodingError::NotInFragment(format!("call to {} is followed by more items (append)", c.name)));
                }
                if c.args.len() != 1 {
                    return Err(EncodingError::NotInFragment(format!("call to {} is not unary", c.name)));
                }
                check_fragment(&c.args[0])?;
            }
            Item::Paren(inner) => check_fragment(inner)?,
            _ => {}
        }
    }
    Ok(())
}

pub fn encode_expression(e: &Expr) -> Result<Expr, EncodingError> {
    check_fragment(e)?;
    Ok(encode_unchecked(e))
}

fn encode_unchecked(e: &Expr) -> Expr {
    Expr(e.items().iter().map(encode_item).collect())
}

fn encode_item(item: &Item) -> Item {
    match item {
        Item::Sym(s) => Item::Sym(s.clone()),
        Item::Var(v) => Item::Paren(Expr(vec![
            Item::Sym(Symbol::ident("Var")),
            Item::Sym(sort_char(v.sort)),
            Item::Sym(Symbol::Ident(v.name.clone())),
        ])),
        Item::Paren(inner) => {
            let mut items = vec![Item::Sym(STAR)];
            items.extend(encode_unchecked(inner).0);
            Item::Paren(Expr(items))
        }
        Item::Call(c) => {
            let mut items = vec![Item::Sym(Symbol::ident("Call")), Item::Sym(Symbol::Ident(c.name.clone()))];
            items.extend(encode_unchecked(&c.args[0]).0);
            Item::Paren(Expr(items))
        }
    }
}

/// The function entries `(f rules...) ...` without the enclosing
/// parentheses; this is what the interpreter's `Prog` returns.
pub fn encode_entries(p: &Program) -> Result<Expr, EncodingError> {
    let mut entries = Vec::with_capacity(p.defs.len());
    for def in &p.defs {
        if def.arity != 1 {
            return Err(EncodingError::NotInFragment(format!(
                "{} has arity {}, only unary functions are encodable",
                def.name, def.arity
            )));
        }
        let mut entry = vec![Item::Sym(Symbol::Ident(def.name.clone()))];
        for rule in &def.rules {
            let pat = encode_expression(rule.patterns[0].expr())?;
            let rhs = encode_expression(&rule.rhs)?;
            entry.push(Item::Paren(Expr(vec![Item::Paren(pat), Item::Sym(EQ), Item::Paren(rhs)])));
        }
        entries.push(Item::Paren(Expr(entry)));
    }
    Ok(Expr(entries))
}

pub fn encode_program(p: &Program) -> Result<Expr, EncodingError> {
    Ok(Expr::paren(encode_entries(p)?))
}

/// A decoded datum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded {
    Program(Program),
    Expression(Expr),
}

pub fn decode_data(d: &Expr) -> Result<Decoded, EncodingError> {
    match decode_expression(d) {
        Ok(e) => Ok(Decoded::Expression(e)),
        Err(expr_err) => match decode_program(d) {
            Ok(p) => Ok(Decoded::Program(p)),
            Err(_) => Err(expr_err),
        },
    }
}

pub fn decode_expression(d: &Expr) -> Result<Expr, EncodingError> {
    let e = decode_seq(d.items())?;
    check_fragment(&e).map_err(|_| not_in_image(d.items(), "e-variable or call before the end of a sequence"))?;
    Ok(e)
}

fn decode_seq(items: &[Item]) -> Result<Expr, EncodingError> {
    items.iter().map(decode_item).collect::<Result<Vec<_>, _>>().map(Expr)
}

fn decode_item(item: &Item) -> Result<Item, EncodingError> {
    let inner = match item {
        Item::Sym(s) => return Ok(Item::Sym(s.clone())),
        Item::Paren(inner) => inner.items(),
        Item::Var(_) | Item::Call(_) => return Err(not_in_image(std::slice::from_ref(item), "not ground data")),
    };
    let whole = std::slice::from_ref(item);
    match inner {
        [Item::Sym(STAR), rest @ ..] => Ok(Item::Paren(decode_seq(rest)?)),
        [Item::Sym(Symbol::Ident(tag)), rest @ ..] if &**tag == "Var" => match rest {
            [Item::Sym(Symbol::Char(c)), Item::Sym(Symbol::Ident(name))] => {
                let sort = match c {
                    'e' => Sort::E,
                    's' => Sort::S,
                    _ => return Err(not_in_image(whole, &format!("'{c}' is not a variable sort"))),
                };
                Ok(Item::Var(Var::new(sort, name)))
            }
            _ => Err(not_in_image(whole, "malformed variable")),
        },
        [Item::Sym(Symbol::Ident(tag)), rest @ ..] if &**tag == "Call" => match rest {
            [Item::Sym(Symbol::Ident(f)), arg @ ..] => Ok(Item::Call(Call {
                name: f.clone(),
                args: vec![decode_seq(arg)?],
            })),
            _ => Err(not_in_image(whole, "malformed call")),
        },
        _ => Err(not_in_image(whole, "parenthesis without a '*', Var or Call tag")),
    }
}

pub fn decode_program(d: &Expr) -> Result<Program, EncodingError> {
    let [Item::Paren(entries)] = d.items() else {
        return Err(not_in_image(d.items(), "a program is one parenthesized list"));
    };
    let mut prog = Program::default();
    for entry in entries.items() {
        let Item::Paren(entry_items) = entry else {
            return Err(not_in_image(std::slice::from_ref(entry), "function entry must be parenthesized"));
        };
        let [Item::Sym(Symbol::Ident(fname)), rules @ ..] = entry_items.items() else {
            return Err(not_in_image(std::slice::from_ref(entry), "function entry must start with its name"));
        };
        if prog.get(fname).is_some() {
            return Err(not_in_image(std::slice::from_ref(entry), "duplicate function"));
        }
        for rule in rules {
            prog.push_rule(decode_rule(fname, rule)?);
        }
        if rules.is_empty() {
            return Err(not_in_image(std::slice::from_ref(entry), "function without rules"));
        }
    }
    Ok(prog)
}

fn decode_rule(fname: &Name, rule: &Item) -> Result<Rule, EncodingError> {
    let whole = std::slice::from_ref(rule);
    let Item::Paren(parts) = rule else {
        return Err(not_in_image(whole, "rule must be parenthesized"));
    };
    let [Item::Paren(pat), Item::Sym(EQ), Item::Paren(rhs)] = parts.items() else {
        return Err(not_in_image(whole, "rule must have the shape ((pattern) '=' (exp))"));
    };
    let pat = decode_expression(pat)?;
    let rhs = decode_expression(rhs)?;
    let pattern = Pattern::new(pat).map_err(|m| not_in_image(whole, &m))?;
    let pvars = pattern.expr().vars();
    if let Some(v) = rhs.vars().into_iter().find(|v| !pvars.contains(v)) {
        return Err(not_in_image(whole, &format!("{v} is free in the right-hand side")));
    }
    Ok(Rule {
        fname: fname.clone(),
        patterns: vec![pattern],
        rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_expr, parse_program};

    #[test]
    fn one_rule_program() {
        let p = parse_program("F(e.x) => e.x;").unwrap();
        let enc = encode_program(&p).unwrap();
        // Each rule sits in its own parentheses, as the interpreter's Matching expects.
        assert_eq!(enc.to_string(), "((F (((Var 'e' x)) : '=' ((Var 'e' x)))))");
        assert_eq!(decode_program(&enc).unwrap(), p);
    }

    #[test]
    fn table_entries() {
        assert_eq!(encode_expression(&Expr::nil()).unwrap(), Expr::nil());
        assert_eq!(encode_expression(&parse_expr("e.name").unwrap()).unwrap(), parse_expr("(Var 'e' name)").unwrap());
        assert_eq!(encode_expression(&parse_expr("(A)").unwrap()).unwrap(), parse_expr("('*' A)").unwrap());
        assert_eq!(encode_expression(&parse_expr("True").unwrap()).unwrap(), parse_expr("True").unwrap());
        assert_eq!(encode_expression(&parse_expr("s.x : F(A)").unwrap()).unwrap(), parse_expr("(Var 's' x) (Call F A)").unwrap());
    }

    #[test]
    fn fragment_is_enforced() {
        assert!(encode_expression(&parse_expr("e.x ++ A").unwrap()).is_err());
        assert!(encode_expression(&parse_expr("F(A) ++ e.x").unwrap()).is_err());
        let binary = parse_program("F(e.x, e.y) => e.x;").unwrap();
        assert!(matches!(encode_program(&binary), Err(EncodingError::NotInFragment(_))));
    }

    #[test]
    fn image_is_proper() {
        let q = parse_expr("(Var 'q' name)").unwrap();
        assert!(matches!(decode_data(&q), Err(EncodingError::NotInImage { .. })));
        assert!(decode_expression(&parse_expr("(A B)").unwrap()).is_err());
        assert_eq!(decode_data(&Expr::nil()).unwrap(), Decoded::Expression(Expr::nil()));
    }

    #[test]
    fn program_and_expression_decode_apart() {
        let p = parse_program("G(A : e.x) => (e.x) : B;\nH(s.y) => G(s.y);").unwrap();
        let enc = encode_program(&p).unwrap();
        assert_eq!(decode_data(&enc).unwrap(), Decoded::Program(p));
    }
}
