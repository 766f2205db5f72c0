use std::fmt::Write;

use super::{Expr, Item, Program, Rule, Sort, Symbol};

/// Canonical concrete syntax. Symbols are juxtaposed, other terms are
/// joined by ` : ` and e-variables or calls by ` ++ `; an explicit `[]`
/// appears only for the empty expression.
pub fn render_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

fn write_expr(out: &mut String, e: &Expr) {
    if e.0.is_empty() {
        out.push_str("[]");
        return;
    }
    for (i, item) in e.0.iter().enumerate() {
        if i > 0 {
            out.push_str(match &e.0[i - 1] {
                Item::Sym(_) => " ",
                Item::Paren(_) => " : ",
                Item::Var(v) if v.sort == Sort::S && !v.is_hole() => " : ",
                Item::Var(_) | Item::Call(_) => " ++ ",
            });
        }
        write_item(out, item);
    }
}

fn write_item(out: &mut String, item: &Item) {
    match item {
        Item::Sym(Symbol::Ident(name)) => out.push_str(name),
        Item::Sym(Symbol::Char(c)) => {
            out.push('\'');
            match c {
                '\'' => out.push_str("\\'"),
                '\\' => out.push_str("\\\\"),
                '\n' => out.push_str("\\n"),
                '\t' => out.push_str("\\t"),
                c => out.push(*c),
            }
            out.push('\'');
        }
        Item::Var(v) => {
            let _ = write!(out, "{v}");
        }
        Item::Paren(inner) => {
            out.push('(');
            write_expr(out, inner);
            out.push(')');
        }
        Item::Call(c) => {
            out.push_str(&c.name);
            out.push('(');
            for (i, a) in c.args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a);
            }
            out.push(')');
        }
    }
}

pub fn render_rule(rule: &Rule) -> String {
    let mut out = String::new();
    out.push_str(&rule.fname);
    out.push('(');
    for (i, p) in rule.patterns.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(&mut out, p.expr());
    }
    out.push_str(") => ");
    write_expr(&mut out, &rule.rhs);
    out.push(';');
    out
}

pub fn render_program(p: &Program) -> String {
    let mut out = String::new();
    for def in &p.defs {
        for rule in &def.rules {
            out.push_str(&render_rule(rule));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_expr, Var};

    #[test]
    fn nil_and_single_symbol() {
        assert_eq!(render_expr(&Expr::nil()), "[]");
        let e = Expr::cons(Item::Sym(Symbol::ident("I")), Expr::nil());
        assert_eq!(render_expr(&e), "I");
    }

    #[test]
    fn mixed_separators() {
        let e = parse_expr("(e.time) : (Invalid I e.is) : s.x : e.y ++ F(e.y, 'a') ++ ([])").unwrap();
        assert_eq!(
            render_expr(&e),
            "(e.time) : (Invalid I e.is) : s.x : e.y ++ F(e.y, 'a') ++ ([])"
        );
        assert_eq!(parse_expr(&render_expr(&e)).unwrap(), e);
    }

    #[test]
    fn symbol_before_paren_stays_a_symbol() {
        let e = Expr(vec![
            Item::Sym(Symbol::ident("A")),
            Item::Paren(Expr::var(Var::e("x"))),
        ]);
        let text = render_expr(&e);
        assert_eq!(text, "A (e.x)");
        assert_eq!(parse_expr(&text).unwrap(), e);
    }

    #[test]
    fn quoted_characters_escape() {
        let e = Expr(vec![Item::Sym(Symbol::Char('\'')), Item::Sym(Symbol::Char('*'))]);
        assert_eq!(parse_expr(&render_expr(&e)).unwrap(), e);
    }
}
