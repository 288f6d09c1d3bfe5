//! The meta-path expression language: `users -chosen-> items -chosen^T-> users`.
//!
//! Names are runs of characters other than whitespace, `-`, `>` and `^`. Whitespace between
//! tokens is ignored. Offsets in errors count characters from the start of the expression.

use crate::error::{Error, Result};
use crate::hin::{EdgeStep, Hin};
use crate::walk::{validate_metapath, MetaPath};

struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    text: &'a str,
}

fn is_name_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '-' | '>' | '^')
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            chars: text.char_indices().collect(),
            pos: 0,
            text,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.chars.len()
    }

    fn error(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::MetaPathExpr {
            offset,
            message: message.into(),
        }
    }

    /// Returns the name and its character offset.
    fn name(&mut self, what: &str) -> Result<(&'a str, usize)> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(is_name_char) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error(start, format!("expected {what}")));
        }
        let begin = self.chars[start].0;
        let end = self.chars.get(self.pos).map_or(self.text.len(), |c| c.0);
        Ok((&self.text[begin..end], start))
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        self.skip_ws();
        let start = self.pos;
        for expected in token.chars() {
            if self.peek() != Some(expected) {
                return Err(self.error(start, format!("expected `{token}`")));
            }
            self.pos += 1;
        }
        Ok(())
    }
}

/// Parses and resolves a meta-path expression against the names of `h`.
pub fn parse_metapath_expr(h: &Hin, expr: &str) -> Result<MetaPath> {
    let mut cur = Cursor::new(expr);
    if cur.at_end() {
        return Err(cur.error(0, "empty meta path expression"));
    }
    let (first, offset) = cur.name("a vertex type name")?;
    let mut current = h
        .vertex_type_by_name(first)
        .ok_or_else(|| cur.error(offset, format!("unknown vertex type `{first}`")))?;
    let vertex_name = |t: crate::hin::VertexTypeId| h.vertex_types()[t.0 as usize].name.as_str();
    let mut steps = Vec::new();
    while !cur.at_end() {
        cur.expect("-")?;
        let (edge, edge_offset) = cur.name("an edge type name")?;
        let e = h
            .edge_type_by_name(edge)
            .ok_or_else(|| cur.error(edge_offset, format!("unknown edge type `{edge}`")))?;
        cur.skip_ws();
        let step = if cur.peek() == Some('^') {
            cur.pos += 1;
            cur.expect("T")?;
            EdgeStep::transposed(e)
        } else {
            EdgeStep::forward(e)
        };
        cur.expect("->")?;
        let (next, next_offset) = cur.name("a vertex type name")?;
        let next_ty = h
            .vertex_type_by_name(next)
            .ok_or_else(|| cur.error(next_offset, format!("unknown vertex type `{next}`")))?;
        if h.step_source(step) != current {
            return Err(cur.error(
                edge_offset,
                format!(
                    "`{edge}` leaves from `{}`, not from `{}`",
                    vertex_name(h.step_source(step)),
                    vertex_name(current)
                ),
            ));
        }
        if h.step_target(step) != next_ty {
            return Err(cur.error(
                next_offset,
                format!("`{edge}` leads to `{}`, not to `{next}`", vertex_name(h.step_target(step))),
            ));
        }
        steps.push(step);
        current = next_ty;
    }
    if steps.is_empty() {
        return Err(cur.error(expr.chars().count(), "a meta path needs at least one step"));
    }
    validate_metapath(h, steps)
}
