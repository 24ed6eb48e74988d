//! Integer constant expressions for `#if` / `#elif`.
//!
//! Operands have already been macro expanded, `defined` has been replaced
//! and leftover identifiers are treated as `0`.

use crate::lex::{Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Value {
    Signed(i64),
    Unsigned(u64),
}

impl Value {
    fn is_true(self) -> bool {
        match self {
            Value::Signed(v) => v != 0,
            Value::Unsigned(v) => v != 0,
        }
    }

    fn bits(self) -> u64 {
        match self {
            Value::Signed(v) => v as u64,
            Value::Unsigned(v) => v,
        }
    }

    fn from_bool(b: bool) -> Value {
        Value::Signed(b as i64)
    }
}

pub(crate) fn evaluate(tokens: &[Token]) -> Result<bool, String> {
    if tokens.is_empty() {
        return Err("#if with no expression".into());
    }
    let mut p = ExprParser { toks: tokens, pos: 0 };
    let v = p.comma(true)?;
    if p.pos != tokens.len() {
        return Err(format!(
            "missing binary operator before token \"{}\"",
            tokens[p.pos].text
        ));
    }
    Ok(v.is_true())
}

struct ExprParser<'a> {
    toks: &'a [Token],
    pos: usize,
}

fn binary_prec(op: &str) -> Option<u8> {
    Some(match op {
        "*" | "/" | "%" => 10,
        "+" | "-" => 9,
        "<<" | ">>" => 8,
        "<" | ">" | "<=" | ">=" => 7,
        "==" | "!=" => 6,
        "&" => 5,
        "^" => 4,
        "|" => 3,
        "&&" => 2,
        "||" => 1,
        _ => return None,
    })
}

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn peek_punct(&self) -> Option<&'a str> {
        self.peek()
            .filter(|t| t.kind == TokenKind::Punct)
            .map(|t| &*t.text)
    }

    fn expect(&mut self, p: &str) -> Result<(), String> {
        if self.peek_punct() == Some(p) {
            self.pos += 1;
            Ok(())
        } else {
            Err(format!("expected '{p}' in preprocessor expression"))
        }
    }

    fn comma(&mut self, eval: bool) -> Result<Value, String> {
        let mut v = self.conditional(eval)?;
        while self.peek_punct() == Some(",") {
            self.pos += 1;
            v = self.conditional(eval)?;
        }
        Ok(v)
    }

    fn conditional(&mut self, eval: bool) -> Result<Value, String> {
        let cond = self.binary(1, eval)?;
        if self.peek_punct() != Some("?") {
            return Ok(cond);
        }
        self.pos += 1;
        let c = cond.is_true();
        let a = self.comma(eval && c)?;
        self.expect(":")?;
        let b = self.conditional(eval && !c)?;
        let unsigned = matches!(a, Value::Unsigned(_)) || matches!(b, Value::Unsigned(_));
        let picked = if c { a } else { b };
        Ok(if unsigned {
            Value::Unsigned(picked.bits())
        } else {
            picked
        })
    }

    fn binary(&mut self, min_prec: u8, eval: bool) -> Result<Value, String> {
        let mut lhs = self.unary(eval)?;
        while let Some(op) = self.peek_punct() {
            let Some(prec) = binary_prec(op) else { break };
            if prec < min_prec {
                break;
            }
            self.pos += 1;
            lhs = match op {
                "&&" => {
                    let l = lhs.is_true();
                    let r = self.binary(prec + 1, eval && l)?;
                    Value::from_bool(l && r.is_true())
                }
                "||" => {
                    let l = lhs.is_true();
                    let r = self.binary(prec + 1, eval && !l)?;
                    Value::from_bool(l || r.is_true())
                }
                _ => {
                    let rhs = self.binary(prec + 1, eval)?;
                    apply(op, lhs, rhs, eval)?
                }
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self, eval: bool) -> Result<Value, String> {
        if let Some(op) = self.peek_punct() {
            match op {
                "+" | "-" | "~" | "!" => {
                    self.pos += 1;
                    let v = self.unary(eval)?;
                    return Ok(match (op, v) {
                        ("+", v) => v,
                        ("-", Value::Signed(x)) => Value::Signed(x.wrapping_neg()),
                        ("-", Value::Unsigned(x)) => Value::Unsigned(x.wrapping_neg()),
                        ("~", Value::Signed(x)) => Value::Signed(!x),
                        ("~", Value::Unsigned(x)) => Value::Unsigned(!x),
                        _ => Value::from_bool(!v.is_true()),
                    });
                }
                "(" => {
                    self.pos += 1;
                    let v = self.comma(eval)?;
                    self.expect(")")?;
                    return Ok(v);
                }
                _ => {}
            }
        }
        let Some(tok) = self.peek() else {
            return Err("#if expression ends unexpectedly".into());
        };
        self.pos += 1;
        match tok.kind {
            TokenKind::Number => parse_number(&tok.text),
            TokenKind::Char => parse_char(&tok.text),
            TokenKind::Identifier => Ok(Value::Signed(0)),
            _ => Err(format!(
                "token \"{}\" is not valid in preprocessor expressions",
                tok.text
            )),
        }
    }
}

fn apply(op: &str, a: Value, b: Value, eval: bool) -> Result<Value, String> {
    let unsigned = matches!(a, Value::Unsigned(_)) || matches!(b, Value::Unsigned(_));
    if matches!(op, "<<" | ">>") {
        // Result type follows the left operand only.
        let count = b.bits() as i64;
        return Ok(match a {
            Value::Signed(x) => Value::Signed(shift_signed(x, op, count)),
            Value::Unsigned(x) => Value::Unsigned(shift_unsigned(x, op, count)),
        });
    }
    if unsigned {
        let (x, y) = (a.bits(), b.bits());
        Ok(match op {
            "*" => Value::Unsigned(x.wrapping_mul(y)),
            "/" | "%" => {
                if y == 0 {
                    if !eval {
                        return Ok(Value::Unsigned(0));
                    }
                    return Err("division by zero in #if".into());
                }
                Value::Unsigned(if op == "/" { x / y } else { x % y })
            }
            "+" => Value::Unsigned(x.wrapping_add(y)),
            "-" => Value::Unsigned(x.wrapping_sub(y)),
            "<" => Value::from_bool(x < y),
            ">" => Value::from_bool(x > y),
            "<=" => Value::from_bool(x <= y),
            ">=" => Value::from_bool(x >= y),
            "==" => Value::from_bool(x == y),
            "!=" => Value::from_bool(x != y),
            "&" => Value::Unsigned(x & y),
            "^" => Value::Unsigned(x ^ y),
            "|" => Value::Unsigned(x | y),
            _ => unreachable!("operator {op}"),
        })
    } else {
        let (x, y) = (a.bits() as i64, b.bits() as i64);
        Ok(match op {
            "*" => Value::Signed(x.wrapping_mul(y)),
            "/" | "%" => {
                if y == 0 {
                    if !eval {
                        return Ok(Value::Signed(0));
                    }
                    return Err("division by zero in #if".into());
                }
                Value::Signed(if op == "/" {
                    x.wrapping_div(y)
                } else {
                    x.wrapping_rem(y)
                })
            }
            "+" => Value::Signed(x.wrapping_add(y)),
            "-" => Value::Signed(x.wrapping_sub(y)),
            "<" => Value::from_bool(x < y),
            ">" => Value::from_bool(x > y),
            "<=" => Value::from_bool(x <= y),
            ">=" => Value::from_bool(x >= y),
            "==" => Value::from_bool(x == y),
            "!=" => Value::from_bool(x != y),
            "&" => Value::Signed(x & y),
            "^" => Value::Signed(x ^ y),
            "|" => Value::Signed(x | y),
            _ => unreachable!("operator {op}"),
        })
    }
}

fn shift_signed(x: i64, op: &str, count: i64) -> i64 {
    let left = (op == "<<") == (count >= 0);
    let n = count.unsigned_abs();
    if left {
        if n >= 64 {
            0
        } else {
            ((x as u64) << n) as i64
        }
    } else if n >= 64 {
        if x < 0 {
            -1
        } else {
            0
        }
    } else {
        x >> n
    }
}

fn shift_unsigned(x: u64, op: &str, count: i64) -> u64 {
    let left = (op == "<<") == (count >= 0);
    let n = count.unsigned_abs();
    if n >= 64 {
        0
    } else if left {
        x << n
    } else {
        x >> n
    }
}

pub(crate) fn parse_number(text: &str) -> Result<Value, String> {
    let lower = text.to_ascii_lowercase();
    let digits_end = lower
        .trim_end_matches(['u', 'l'])
        .len();
    let (body, suffix) = lower.split_at(digits_end);
    if !matches!(suffix, "" | "u" | "l" | "ul" | "lu" | "ll" | "ull" | "llu") {
        return Err(format!("invalid integer suffix in \"{text}\""));
    }
    let (radix, digits) = if let Some(h) = body.strip_prefix("0x") {
        (16, h)
    } else if let Some(b) = body.strip_prefix("0b") {
        (2, b)
    } else if body.len() > 1 && body.starts_with('0') {
        (8, &body[1..])
    } else {
        (10, body)
    };
    if digits.is_empty() && radix != 8 {
        return Err(format!("invalid integer constant \"{text}\" in #if"));
    }
    let v = if digits.is_empty() {
        0
    } else {
        u64::from_str_radix(digits, radix)
            .map_err(|_| format!("invalid integer constant \"{text}\" in #if"))?
    };
    if suffix.contains('u') || v > i64::MAX as u64 {
        Ok(Value::Unsigned(v))
    } else {
        Ok(Value::Signed(v as i64))
    }
}

/// Decode the characters of a char or string literal body.
pub(crate) fn decode_escapes(body: &str) -> Result<Vec<u32>, String> {
    let mut out = Vec::new();
    let mut chars = body.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c as u32);
            continue;
        }
        let e = chars.next().ok_or("incomplete escape sequence")?;
        let v = match e {
            'n' => 10,
            't' => 9,
            'r' => 13,
            'a' => 7,
            'b' => 8,
            'f' => 12,
            'v' => 11,
            'e' | 'E' => 27,
            '\\' | '\'' | '"' | '?' => e as u32,
            'x' => {
                let mut v: u32 = 0;
                let mut any = false;
                while let Some(d) = chars.peek().and_then(|c| c.to_digit(16)) {
                    v = v.wrapping_mul(16).wrapping_add(d);
                    chars.next();
                    any = true;
                }
                if !any {
                    return Err("\\x used with no following hex digits".into());
                }
                v
            }
            '0'..='7' => {
                let mut v = e.to_digit(8).unwrap_or(0);
                for _ in 0..2 {
                    match chars.peek().and_then(|c| c.to_digit(8)) {
                        Some(d) => {
                            v = v * 8 + d;
                            chars.next();
                        }
                        None => break,
                    }
                }
                v
            }
            other => other as u32,
        };
        out.push(v);
    }
    Ok(out)
}

fn parse_char(text: &str) -> Result<Value, String> {
    let wide = !text.starts_with('\'');
    let start = text.find('\'').ok_or("malformed character constant")?;
    let body = &text[start + 1..text.len() - 1];
    let units = decode_escapes(body)?;
    if units.is_empty() {
        return Err("empty character constant".into());
    }
    if wide {
        return Ok(Value::Signed(*units.last().unwrap_or(&0) as i64));
    }
    if units.len() == 1 {
        // Plain char is signed on the targets we model.
        return Ok(Value::Signed(units[0] as u8 as i8 as i64));
    }
    let mut v: i64 = 0;
    for u in units {
        v = (v << 8) | (u as u8 as i64);
    }
    Ok(Value::Signed(v as i32 as i64))
}
