use crate::ast::{Builtin, Span};

use super::lexer::{tokenize, Tok, Token};
use super::syntax::*;
use super::SurfaceError;

/// Parse program text into a [`SurfaceAst`].
pub fn parse_program(source: &str) -> Result<SurfaceAst, SurfaceError> {
    let toks = tokenize(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        newline_significant: vec![true],
    };
    p.skip_separators();
    if p.peek() == &Tok::Eof {
        return Err(SurfaceError::Parse {
            span: p.span(),
            message: "empty program".into(),
        });
    }
    let body = p.items(Tok::Eof, Span::new(1, 1))?;
    Ok(SurfaceAst { body })
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Inside parentheses newlines are whitespace; inside blocks they separate items.
    newline_significant: Vec<bool>,
}

type PResult<T> = Result<T, SurfaceError>;

impl Parser {
    fn skip_insignificant(&mut self) {
        if !self.newline_significant.last().copied().unwrap_or(true) {
            while self.toks[self.pos].tok == Tok::Newline {
                self.pos += 1;
            }
        }
    }

    fn peek(&mut self) -> &Tok {
        self.skip_insignificant();
        &self.toks[self.pos].tok
    }

    fn peek_at(&mut self, offset: usize) -> &Tok {
        self.skip_insignificant();
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&mut self) -> Span {
        self.skip_insignificant();
        self.toks[self.pos].span
    }

    fn next(&mut self) -> Token {
        self.skip_insignificant();
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn skip_newlines(&mut self) {
        while self.toks[self.pos].tok == Tok::Newline {
            self.pos += 1;
        }
    }

    fn skip_separators(&mut self) {
        while matches!(self.toks[self.pos].tok, Tok::Newline | Tok::Semi) {
            self.pos += 1;
        }
    }

    fn error<T>(&mut self, expected: &str) -> PResult<T> {
        let span = self.span();
        let found = self.toks[self.pos].tok.describe();
        Err(SurfaceError::Parse {
            span,
            message: format!("expected {expected}, found {found}"),
        })
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.next())
        } else {
            self.error(expected)
        }
    }

    fn binder(&mut self) -> PResult<(String, Span)> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Ident(name) => {
                if RESERVED_CALLS.contains(&name.as_str()) {
                    return Err(SurfaceError::Parse {
                        span,
                        message: format!("`{name}` is reserved and cannot be bound"),
                    });
                }
                self.next();
                Ok((name, span))
            }
            _ => self.error("a name"),
        }
    }

    /// Items up to (not including) `end`.
    fn items(&mut self, end: Tok, span: Span) -> PResult<Block> {
        let mut items = Vec::new();
        self.skip_separators();
        while self.toks[self.pos].tok != end {
            items.push(self.item()?);
            let here = &self.toks[self.pos].tok;
            if matches!(here, Tok::Newline | Tok::Semi) {
                self.skip_separators();
            } else if *here != end {
                return self.error("end of line");
            }
        }
        Ok(Block { items, span })
    }

    fn block(&mut self) -> PResult<Block> {
        let open = self.expect(Tok::LBrace, "`{`")?;
        self.newline_significant.push(true);
        let block = self.items(Tok::RBrace, open.span);
        self.newline_significant.pop();
        let block = block?;
        self.expect(Tok::RBrace, "`}`")?;
        Ok(block)
    }

    fn item(&mut self) -> PResult<Item> {
        let span = self.span();
        if *self.peek() == Tok::Function && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.next();
            let (name, _) = self.binder()?;
            let params = self.params()?;
            let body = self.block()?;
            return Ok(Item::Function {
                name,
                params,
                body,
                span,
            });
        }
        if matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Assign {
            let (name, _) = self.binder()?;
            self.next();
            self.skip_newlines();
            let value = self.expr()?;
            return Ok(Item::Let { name, value, span });
        }
        Ok(Item::Expr(self.expr()?))
    }

    fn params(&mut self) -> PResult<Vec<String>> {
        self.expect(Tok::LParen, "`(`")?;
        self.newline_significant.push(false);
        let r = (|| {
            let mut params = Vec::new();
            if *self.peek() != Tok::RParen {
                loop {
                    params.push(self.binder()?.0);
                    if *self.peek() == Tok::Comma {
                        self.next();
                    } else {
                        break;
                    }
                }
            }
            Ok(params)
        })();
        let params = r?;
        self.expect(Tok::RParen, "`)` or `,`")?;
        self.newline_significant.pop();
        Ok(params)
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect(Tok::LParen, "`(`")?;
        self.newline_significant.push(false);
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.expr()?);
                if *self.peek() == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)` or `,`")?;
        self.newline_significant.pop();
        Ok(args)
    }

    fn expr(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::If {
            return self.if_expr();
        }
        self.comparison()
    }

    fn if_expr(&mut self) -> PResult<Expr> {
        let span = self.expect(Tok::If, "`if`")?.span;
        let cond = self.expr()?;
        self.skip_newlines();
        self.expect(Tok::Then, "`then`")?;
        self.skip_newlines();
        let then_branch = self.expr()?;
        let save = self.pos;
        self.skip_newlines();
        if *self.peek() != Tok::Else {
            self.pos = save;
            return self.error("`else`");
        }
        self.next();
        self.skip_newlines();
        let else_branch = self.expr()?;
        Ok(Expr::new(
            ExprKind::If {
                cond: Box::new(cond),
                then_branch: Box::new(then_branch),
                else_branch: Box::new(else_branch),
            },
            span,
        ))
    }

    fn binary(op: Builtin, lhs: Expr, rhs: Expr) -> Expr {
        let span = lhs.span;
        Expr::new(
            ExprKind::Builtin {
                op,
                args: vec![lhs, rhs],
            },
            span,
        )
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Tok::Le => Builtin::Le,
            Tok::Lt => Builtin::Lt,
            _ => return Ok(lhs),
        };
        self.next();
        self.skip_newlines();
        let rhs = self.additive()?;
        Ok(Self::binary(op, lhs, rhs))
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => Builtin::Add,
                Tok::Minus => Builtin::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            self.skip_newlines();
            let rhs = self.multiplicative()?;
            lhs = Self::binary(op, lhs, rhs);
        }
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => Builtin::Mul,
                Tok::Slash => Builtin::Div,
                _ => return Ok(lhs),
            };
            self.next();
            self.skip_newlines();
            let rhs = self.unary()?;
            lhs = Self::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::Minus {
            let span = self.next().span;
            let inner = self.unary()?;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), span));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while *self.peek() == Tok::LParen {
            let args = self.args()?;
            let span = e.span;
            e = Expr::new(
                ExprKind::Call {
                    callee: Box::new(e),
                    args,
                },
                span,
            );
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Number(x) => {
                self.next();
                Ok(Expr::new(ExprKind::Number(x), span))
            }
            Tok::True | Tok::False => {
                let b = self.next().tok == Tok::True;
                Ok(Expr::new(ExprKind::Bool(b), span))
            }
            Tok::LParen => {
                self.next();
                self.newline_significant.push(false);
                if *self.peek() == Tok::RParen {
                    self.next();
                    self.newline_significant.pop();
                    return Ok(Expr::new(ExprKind::Unit, span));
                }
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                self.newline_significant.pop();
                Ok(e)
            }
            Tok::LBrace => {
                let b = self.block()?;
                Ok(Expr::new(ExprKind::Block(b), span))
            }
            Tok::Function => {
                self.next();
                let params = self.params()?;
                let body = self.block()?;
                Ok(Expr::new(ExprKind::Lambda { params, body }, span))
            }
            Tok::If => self.if_expr(),
            Tok::Ident(name) => {
                self.next();
                if RESERVED_CALLS.contains(&name.as_str()) {
                    if *self.peek() != Tok::LParen {
                        return Err(SurfaceError::Parse {
                            span,
                            message: format!("`{name}` must be called with arguments"),
                        });
                    }
                    let args = self.args()?;
                    return special_call(&name, args, span);
                }
                Ok(Expr::new(ExprKind::Var(name), span))
            }
            _ => self.error("an expression"),
        }
    }
}

fn special_call(name: &str, mut args: Vec<Expr>, span: Span) -> PResult<Expr> {
    let arity = match name {
        "flip" => 0,
        "sample" | "weight" | "dweight" | "fix" => 1,
        other => Builtin::from_call_name(other).map(Builtin::arity).unwrap_or(0),
    };
    if args.len() != arity {
        return Err(SurfaceError::Parse {
            span,
            message: format!(
                "`{name}` takes {arity} argument{}, found {}",
                if arity == 1 { "" } else { "s" },
                args.len()
            ),
        });
    }
    let kind = match name {
        "flip" => ExprKind::Flip,
        "sample" => ExprKind::Sample(Box::new(args.remove(0))),
        "weight" => ExprKind::Weight(Box::new(args.remove(0))),
        "dweight" => ExprKind::DWeight(Box::new(args.remove(0))),
        "fix" => ExprKind::Fix(Box::new(args.remove(0))),
        other => ExprKind::Builtin {
            op: Builtin::from_call_name(other).expect("reserved builtin"),
            args,
        },
    };
    Ok(Expr::new(kind, span))
}
