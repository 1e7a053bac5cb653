//! Lexer and recursive-descent parser for algebra scripts.

use crate::algebra::ast::{AlgebraProgram, CondExpr, OpCall, Pos, Statement, SubjectPath};
use crate::error::{Error, Result};
use crate::model::condition::CmpOp;
use crate::model::value::{AttrValue, Num};

/// Parse a whole script.
pub fn parse_program(text: &str) -> Result<AlgebraProgram> {
    let tokens = lex(text, 0)?;
    TokenStream::new(tokens).program()
}

/// Parse a condition on its own. `#name` is always a measure reference
/// here; comments do not exist inside conditions.
pub fn parse_condition(text: &str) -> Result<CondExpr> {
    let tokens = lex(text, 1)?;
    let mut ts = TokenStream::new(tokens);
    let cond = ts.condition()?;
    ts.skip_newlines();
    if let Some(t) = ts.peek() {
        return err(t.pos, format!("unexpected `{}` after condition", t.tok));
    }
    Ok(cond)
}

// ---------------------------------------------------------------------------
// Tokens
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    HashIdent(String),
    Number(String),
    Str(String),
    Cmp(CmpOp),
    Assign, // `=` doubles as comparison; the parser decides from context
    LParen,
    RParen,
    Comma,
    Dot,
    Newline,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::HashIdent(s) => write!(f, "#{s}"),
            Tok::Number(s) => write!(f, "{s}"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Cmp(op) => write!(f, "{}", op.sparql()),
            Tok::Assign => write!(f, "="),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::Comma => write!(f, ","),
            Tok::Dot => write!(f, "."),
            Tok::Newline => write!(f, "end of line"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    pos: Pos,
}

fn err<T>(pos: Pos, detail: impl Into<String>) -> Result<T> {
    Err(Error::Syntax {
        line: pos.line,
        col: pos.col,
        detail: detail.into(),
    })
}

/// Tokenize. `depth` is the starting parenthesis depth: at depth 0 a `#`
/// starts a comment, inside parentheses it is the measure sigil — so a
/// whole script comments with `#`, while `DICE(.., #applications > 80)`
/// still reads naturally.
fn lex(text: &str, depth: usize) -> Result<Vec<Spanned>> {
    Lexer {
        chars: text.chars().collect(),
        at: 0,
        line: 1,
        col: 1,
        depth,
    }
    .run()
}

struct Lexer {
    chars: Vec<char>,
    at: usize,
    line: usize,
    col: usize,
    depth: usize,
}

impl Lexer {
    fn look(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.at + ahead).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.at).copied()?;
        self.at += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn take_name(&mut self) -> String {
        let mut name = String::new();
        while matches!(self.look(0), Some(n) if is_ident_char(n)) {
            name.push(self.bump().unwrap());
        }
        name
    }

    fn run(mut self) -> Result<Vec<Spanned>> {
        let mut out = Vec::new();
        loop {
            let start = Pos {
                line: self.line,
                col: self.col,
            };
            let mut push = |tok: Tok| {
                out.push(Spanned { tok, pos: start });
            };
            let Some(c) = self.look(0) else { break };
            match c {
                '\n' => {
                    self.bump();
                    if self.depth == 0 {
                        push(Tok::Newline);
                    }
                }
                c if c.is_whitespace() => {
                    self.bump();
                }
                '#' => {
                    let named = matches!(self.look(1), Some(n) if is_ident_start(n));
                    if self.depth > 0 && named {
                        self.bump();
                        push(Tok::HashIdent(self.take_name()));
                    } else if self.depth == 0 {
                        while !matches!(self.look(0), None | Some('\n')) {
                            self.bump();
                        }
                    } else {
                        return err(start, "`#` must be followed by a measure name here");
                    }
                }
                '(' => {
                    self.bump();
                    self.depth += 1;
                    push(Tok::LParen);
                }
                ')' => {
                    self.bump();
                    self.depth = self.depth.saturating_sub(1);
                    push(Tok::RParen);
                }
                ',' => {
                    self.bump();
                    push(Tok::Comma);
                }
                '.' => {
                    self.bump();
                    push(Tok::Dot);
                }
                '=' => {
                    self.bump();
                    push(Tok::Assign);
                }
                '!' => {
                    self.bump();
                    if self.look(0) == Some('=') {
                        self.bump();
                        push(Tok::Cmp(CmpOp::Ne));
                    } else {
                        return err(start, "expected `!=`");
                    }
                }
                '<' | '>' => {
                    self.bump();
                    let eq = self.look(0) == Some('=');
                    if eq {
                        self.bump();
                    }
                    push(Tok::Cmp(match (c, eq) {
                        ('<', false) => CmpOp::Lt,
                        ('<', true) => CmpOp::Le,
                        (_, false) => CmpOp::Gt,
                        (_, true) => CmpOp::Ge,
                    }));
                }
                '≠' | '≤' | '≥' => {
                    self.bump();
                    push(Tok::Cmp(match c {
                        '≠' => CmpOp::Ne,
                        '≤' => CmpOp::Le,
                        _ => CmpOp::Ge,
                    }));
                }
                '"' => {
                    self.bump();
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            None | Some('\n') => return err(start, "unterminated string"),
                            Some('"') => break,
                            Some('\\') => match self.bump() {
                                Some('"') => s.push('"'),
                                Some('\\') => s.push('\\'),
                                Some('n') => s.push('\n'),
                                Some('t') => s.push('\t'),
                                other => {
                                    let shown =
                                        other.map_or("end of input".to_string(), |c| c.to_string());
                                    return err(
                                        start,
                                        format!("unknown string escape `\\{shown}`"),
                                    );
                                }
                            },
                            Some(c) => s.push(c),
                        }
                    }
                    push(Tok::Str(s));
                }
                c if c.is_ascii_digit()
                    || (c == '-' && matches!(self.look(1), Some(d) if d.is_ascii_digit())) =>
                {
                    let mut num = String::new();
                    if c == '-' {
                        num.push('-');
                        self.bump();
                    }
                    let mut dotted = false;
                    while let Some(d) = self.look(0) {
                        if d.is_ascii_digit() {
                            num.push(d);
                            self.bump();
                        } else if d == '.'
                            && !dotted
                            && matches!(self.look(1), Some(n) if n.is_ascii_digit())
                        {
                            dotted = true;
                            num.push('.');
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    push(Tok::Number(num));
                }
                c if is_ident_start(c) => push(Tok::Ident(self.take_name())),
                other => return err(start, format!("unexpected character `{other}`")),
            }
        }
        Ok(out)
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

const KEYWORDS: [&str; 7] = ["ROLLUP", "DRILLDOWN", "SLICE", "DICE", "AND", "OR", "NOT"];

fn keyword(name: &str) -> Option<&'static str> {
    let upper = name.to_ascii_uppercase();
    KEYWORDS.into_iter().find(|k| *k == upper)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct TokenStream {
    tokens: Vec<Spanned>,
    at: usize,
}

impl TokenStream {
    fn new(tokens: Vec<Spanned>) -> TokenStream {
        TokenStream { tokens, at: 0 }
    }

    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.at)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.tokens.get(self.at).cloned();
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn here(&self) -> Pos {
        self.peek()
            .map(|t| t.pos)
            .or_else(|| self.tokens.last().map(|t| t.pos))
            .unwrap_or_default()
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<Pos> {
        match self.next() {
            Some(t) if t.tok == *want => Ok(t.pos),
            Some(t) => err(t.pos, format!("expected {what}, found `{}`", t.tok)),
            None => err(self.here(), format!("expected {what}, found end of input")),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos)> {
        match self.next() {
            Some(Spanned {
                tok: Tok::Ident(name),
                pos,
            }) => {
                if let Some(k) = keyword(&name) {
                    return err(pos, format!("`{k}` is a keyword and cannot name {what}"));
                }
                Ok((name, pos))
            }
            Some(t) => err(t.pos, format!("expected {what}, found `{}`", t.tok)),
            None => err(self.here(), format!("expected {what}, found end of input")),
        }
    }

    fn skip_newlines(&mut self) {
        while matches!(self.peek(), Some(t) if t.tok == Tok::Newline) {
            self.at += 1;
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Spanned { tok: Tok::Ident(n), .. }) if keyword(n) == Some(kw))
    }

    fn program(mut self) -> Result<AlgebraProgram> {
        let mut prog = AlgebraProgram::default();
        loop {
            self.skip_newlines();
            if self.peek().is_none() {
                break;
            }
            let stmt = self.statement()?;
            if prog.statements.iter().any(|s| s.name == stmt.name) {
                return err(stmt.pos, format!("`{}` is bound twice", stmt.name));
            }
            prog.statements.push(stmt);
            match self.next() {
                None => break,
                Some(t) if t.tok == Tok::Newline => {}
                Some(t) => {
                    return err(t.pos, format!("expected end of line, found `{}`", t.tok))
                }
            }
        }
        if prog.statements.is_empty() {
            return err(Pos { line: 1, col: 1 }, "empty program");
        }
        Ok(prog)
    }

    fn statement(&mut self) -> Result<Statement> {
        let (name, pos) = self.ident("a binding")?;
        self.expect(&Tok::Assign, "`=`")?;
        let (op_name, op_pos) = match self.next() {
            Some(Spanned {
                tok: Tok::Ident(n),
                pos,
            }) => (n, pos),
            Some(t) => return err(t.pos, format!("expected an operator, found `{}`", t.tok)),
            None => return err(self.here(), "expected an operator, found end of input"),
        };
        let op = match keyword(&op_name) {
            Some("ROLLUP") => self.rollup_like(true)?,
            Some("DRILLDOWN") => self.rollup_like(false)?,
            Some("SLICE") => self.slice()?,
            Some("DICE") => self.dice()?,
            _ => {
                return err(
                    op_pos,
                    format!("`{op_name}` is not an operator (ROLLUP, DRILLDOWN, SLICE, DICE)"),
                )
            }
        };
        Ok(Statement { name, op, pos })
    }

    fn rollup_like(&mut self, rollup: bool) -> Result<OpCall> {
        self.expect(&Tok::LParen, "`(`")?;
        let (source, _) = self.ident("a source")?;
        self.expect(&Tok::Comma, "`,`")?;
        let (role, _) = self.ident("a dimension role")?;
        self.expect(&Tok::Comma, "`,`")?;
        let (level, _) = self.ident("a level")?;
        let hierarchy = if matches!(self.peek(), Some(t) if t.tok == Tok::Comma) {
            self.at += 1;
            Some(self.ident("a hierarchy")?.0)
        } else {
            None
        };
        self.expect(&Tok::RParen, "`)`")?;
        Ok(if rollup {
            OpCall::Rollup {
                source,
                role,
                level,
                hierarchy,
            }
        } else {
            OpCall::Drilldown {
                source,
                role,
                level,
                hierarchy,
            }
        })
    }

    fn slice(&mut self) -> Result<OpCall> {
        self.expect(&Tok::LParen, "`(`")?;
        let (source, _) = self.ident("a source")?;
        self.expect(&Tok::Comma, "`,`")?;
        let (target, sigil) = match self.next() {
            Some(Spanned {
                tok: Tok::Ident(n),
                pos,
            }) => {
                if let Some(k) = keyword(&n) {
                    return err(pos, format!("`{k}` is a keyword"));
                }
                (n, false)
            }
            Some(Spanned {
                tok: Tok::HashIdent(n),
                ..
            }) => (n, true),
            Some(t) => {
                return err(
                    t.pos,
                    format!("expected a role or measure, found `{}`", t.tok),
                )
            }
            None => return err(self.here(), "expected a role or measure"),
        };
        self.expect(&Tok::RParen, "`)`")?;
        Ok(OpCall::Slice {
            source,
            target,
            sigil,
        })
    }

    fn dice(&mut self) -> Result<OpCall> {
        self.expect(&Tok::LParen, "`(`")?;
        let (source, _) = self.ident("a source")?;
        self.expect(&Tok::Comma, "`,`")?;
        let condition = self.condition()?;
        self.expect(&Tok::RParen, "`)`")?;
        Ok(OpCall::Dice { source, condition })
    }

    // Conditions: OR < AND < NOT < comparison, parentheses override.

    fn condition(&mut self) -> Result<CondExpr> {
        let mut left = self.cond_and()?;
        while self.at_keyword("OR") {
            self.at += 1;
            let right = self.cond_and()?;
            left = CondExpr::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn cond_and(&mut self) -> Result<CondExpr> {
        let mut left = self.cond_unary()?;
        while self.at_keyword("AND") {
            self.at += 1;
            let right = self.cond_unary()?;
            left = CondExpr::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn cond_unary(&mut self) -> Result<CondExpr> {
        if self.at_keyword("NOT") {
            self.at += 1;
            return Ok(CondExpr::Not(Box::new(self.cond_unary()?)));
        }
        self.cond_primary()
    }

    fn cond_primary(&mut self) -> Result<CondExpr> {
        if matches!(self.peek(), Some(t) if t.tok == Tok::LParen) {
            self.at += 1;
            let inner = self.condition()?;
            self.expect(&Tok::RParen, "`)`")?;
            return Ok(inner);
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<CondExpr> {
        let pos = self.here();
        let first = self.operand()?;
        let op1 = self.cmp_op()?;
        let second = self.operand()?;

        // Range chains: `lo <= subject <= hi` (or the `>=` mirror).
        let chain = matches!(self.peek(), Some(t) if matches!(t.tok, Tok::Cmp(_)));
        if chain {
            let op2 = self.cmp_op()?;
            let third = self.operand()?;
            let compatible = matches!(
                (op1, op2),
                (CmpOp::Lt | CmpOp::Le, CmpOp::Lt | CmpOp::Le)
                    | (CmpOp::Gt | CmpOp::Ge, CmpOp::Gt | CmpOp::Ge)
            );
            if !compatible {
                return err(pos, "range bounds must point the same way");
            }
            let (Operand::Literal(left), Operand::Subject(subject), Operand::Literal(right)) =
                (first, second, third)
            else {
                return err(pos, "a range needs literal bounds around one subject");
            };
            // Each bound keeps its textual side: `1 < x <= 9` becomes
            // `x > 1 AND x <= 9`, `9 >= x > 1` becomes `x <= 9 AND x > 1`.
            return Ok(CondExpr::And(
                Box::new(CondExpr::Cmp {
                    subject: subject.clone(),
                    op: flip(op1),
                    value: left,
                }),
                Box::new(CondExpr::Cmp {
                    subject,
                    op: op2,
                    value: right,
                }),
            ));
        }

        match (first, second) {
            (Operand::Subject(subject), Operand::Literal(value)) => Ok(CondExpr::Cmp {
                subject,
                op: op1,
                value,
            }),
            (Operand::Literal(value), Operand::Subject(subject)) => Ok(CondExpr::Cmp {
                subject,
                op: flip(op1),
                value,
            }),
            (Operand::Literal(_), Operand::Literal(_)) => {
                err(pos, "comparison needs an attribute or measure on one side")
            }
            (Operand::Subject(_), Operand::Subject(_)) => {
                err(pos, "comparison needs a literal on one side")
            }
        }
    }

    fn cmp_op(&mut self) -> Result<CmpOp> {
        match self.next() {
            Some(Spanned {
                tok: Tok::Cmp(op), ..
            }) => Ok(op),
            Some(Spanned {
                tok: Tok::Assign, ..
            }) => Ok(CmpOp::Eq),
            Some(t) => err(t.pos, format!("expected a comparison, found `{}`", t.tok)),
            None => err(self.here(), "expected a comparison, found end of input"),
        }
    }

    fn operand(&mut self) -> Result<Operand> {
        match self.next() {
            Some(Spanned {
                tok: Tok::Number(raw),
                pos,
            }) => {
                let num = raw
                    .parse::<i64>()
                    .map(Num::Int)
                    .or_else(|_| raw.parse::<f64>().map(Num::Dec))
                    .map_err(|_| Error::Syntax {
                        line: pos.line,
                        col: pos.col,
                        detail: format!("bad number `{raw}`"),
                    })?;
                Ok(Operand::Literal(AttrValue::Num(num)))
            }
            Some(Spanned {
                tok: Tok::Str(s), ..
            }) => Ok(Operand::Literal(AttrValue::Str(s))),
            Some(Spanned {
                tok: Tok::HashIdent(name),
                ..
            }) => Ok(Operand::Subject(SubjectPath::Measure { name, sigil: true })),
            Some(Spanned {
                tok: Tok::Ident(name),
                pos,
            }) => {
                if let Some(k) = keyword(&name) {
                    return err(pos, format!("expected an operand, found `{k}`"));
                }
                if matches!(self.peek(), Some(t) if t.tok == Tok::Dot) {
                    self.at += 1;
                    let (level, _) = self.ident("a level")?;
                    self.expect(&Tok::Dot, "`.`")?;
                    let (attribute, _) = self.ident("an attribute")?;
                    Ok(Operand::Subject(SubjectPath::Attr {
                        role: name,
                        level,
                        attribute,
                    }))
                } else {
                    Ok(Operand::Subject(SubjectPath::Measure {
                        name,
                        sigil: false,
                    }))
                }
            }
            Some(t) => err(t.pos, format!("expected an operand, found `{}`", t.tok)),
            None => err(self.here(), "expected an operand, found end of input"),
        }
    }
}

enum Operand {
    Subject(SubjectPath),
    Literal(AttrValue),
}

fn flip(op: CmpOp) -> CmpOp {
    match op {
        CmpOp::Lt => CmpOp::Gt,
        CmpOp::Le => CmpOp::Ge,
        CmpOp::Gt => CmpOp::Lt,
        CmpOp::Ge => CmpOp::Le,
        CmpOp::Eq => CmpOp::Eq,
        CmpOp::Ne => CmpOp::Ne,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ast::{render_program, OpCall};

    #[test]
    fn statements_keywords_any_case() {
        let p = parse_program(
            "c0 = rollup(Asylum, Citizenship, Continent)\nC1 = Slice(c0, #applications)\n",
        )
        .unwrap();
        assert_eq!(p.statements.len(), 2);
        assert!(matches!(
            &p.statements[0].op,
            OpCall::Rollup { source, role, level, hierarchy: None }
                if source == "Asylum" && role == "Citizenship" && level == "Continent"
        ));
        assert!(matches!(
            &p.statements[1].op,
            OpCall::Slice { target, sigil: true, .. } if target == "applications"
        ));
    }

    #[test]
    fn comments_skip_but_measure_sigils_do_not() {
        let text = "# whole-line comment\nC0 = DICE(Asylum, #applications > 80)\n# trailing\n";
        let p = parse_program(text).unwrap();
        assert_eq!(p.statements.len(), 1);
        let OpCall::Dice { condition, .. } = &p.statements[0].op else {
            panic!("expected a dice");
        };
        assert_eq!(condition.to_string(), "#applications > 80");
    }

    #[test]
    fn condition_precedence_not_and_or() {
        let c = parse_condition("NOT a.b.c = 1 AND d.e.f = 2 OR #m > 3").unwrap();
        let CondExpr::Or(l, r) = &c else {
            panic!("OR should bind loosest");
        };
        assert!(matches!(**l, CondExpr::And(..)));
        assert!(matches!(**r, CondExpr::Cmp { .. }));
        let CondExpr::And(ll, _) = &**l else {
            unreachable!()
        };
        assert!(matches!(**ll, CondExpr::Not(..)));
        // The precedence-aware printer needs no parentheses here.
        assert_eq!(c.to_string(), "NOT a.b.c = 1 AND d.e.f = 2 OR #m > 3");
    }

    #[test]
    fn parentheses_override_precedence() {
        let c = parse_condition("a.b.c = 1 AND (d.e.f = 2 OR #m > 3)").unwrap();
        let CondExpr::And(_, r) = &c else {
            panic!("expected AND at the top");
        };
        assert!(matches!(**r, CondExpr::Or(..)));
        assert_eq!(c.to_string(), "a.b.c = 1 AND (d.e.f = 2 OR #m > 3)");
    }

    #[test]
    fn range_sugar_expands_to_a_conjunction() {
        let c = parse_condition(
            "(201303 <= Time.month.yearMonthNum <= 201307) OR (#applications > 80)",
        )
        .unwrap();
        let CondExpr::Or(l, _) = &c else {
            panic!("expected OR at the top");
        };
        let CondExpr::And(lo, hi) = &**l else {
            panic!("range should become a conjunction");
        };
        assert!(matches!(
            &**lo,
            CondExpr::Cmp { op: CmpOp::Ge, value: AttrValue::Num(Num::Int(201303)), .. }
        ));
        assert!(matches!(
            &**hi,
            CondExpr::Cmp { op: CmpOp::Le, value: AttrValue::Num(Num::Int(201307)), .. }
        ));
    }

    #[test]
    fn descending_range_keeps_each_bound_on_its_side() {
        let c = parse_condition("9 >= x.l.a > 1").unwrap();
        let CondExpr::And(l, r) = &c else {
            panic!("expected a conjunction");
        };
        assert!(matches!(
            &**l,
            CondExpr::Cmp { op: CmpOp::Le, value: AttrValue::Num(Num::Int(9)), .. }
        ));
        assert!(matches!(
            &**r,
            CondExpr::Cmp { op: CmpOp::Gt, value: AttrValue::Num(Num::Int(1)), .. }
        ));
    }

    #[test]
    fn literal_first_comparison_is_flipped() {
        let c = parse_condition("80 < #applications").unwrap();
        assert!(matches!(
            c,
            CondExpr::Cmp { op: CmpOp::Gt, value: AttrValue::Num(Num::Int(80)), .. }
        ));
    }

    #[test]
    fn unicode_comparison_operators() {
        let c = parse_condition("x.l.a ≠ 1 AND x.l.a ≤ 2 AND x.l.a ≥ 0").unwrap();
        assert_eq!(c.to_string(), "x.l.a != 1 AND x.l.a <= 2 AND x.l.a >= 0");
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse_program("C0 = ROLLUP(X,").unwrap_err();
        assert_eq!(e.code(), "E_SYNTAX");
        let Error::Syntax { line, col, .. } = e else {
            unreachable!()
        };
        assert_eq!((line, col), (1, 14));

        assert_eq!(parse_condition("a AND").unwrap_err().code(), "E_SYNTAX");
        assert_eq!(
            parse_condition("1 <= x.l.a >= 2").unwrap_err().code(),
            "E_SYNTAX"
        );
        assert_eq!(
            parse_program("C0 = ROLLUP(X, R, L)\nC0 = SLICE(C0, m)\n")
                .unwrap_err()
                .code(),
            "E_SYNTAX"
        );
        assert_eq!(
            parse_condition("\"a\" = \"b\"").unwrap_err().code(),
            "E_SYNTAX"
        );
    }

    #[test]
    fn rendering_then_parsing_is_identity() {
        let text = r#"
# quarterly roll-up with a guard
C0 = ROLLUP(Asylum, Time, Year, calendar)
C1 = DICE(C0, NOT (Destination.country.countryName = "Belgium" OR #applications <= 10) AND 1 <= Time.year.num <= 9)
C2 = DRILLDOWN(C1, Time, Month)
C3 = SLICE(C2, Destination)
C4 = SLICE(C3, #applications)
"#;
        let once = parse_program(text).unwrap();
        let again = parse_program(&render_program(&once)).unwrap();
        assert_eq!(once, again);
    }
}
