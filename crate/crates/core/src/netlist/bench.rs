// SPDX-License-Identifier: Apache-2.0

//! ISCAS `.bench` reader and writer.
//!
//! Besides the classic gate kinds the writer emits reconfigurable cells as
//! `LUT<m>`, optionally followed by a `_MUX`/`_SRAM`/`_SOT` kind tag and a
//! `[<hex>]` mask. The attacker view carries neither.

use std::fmt::Write as _;

use super::{GateKind, Netlist, NetlistBuilder, NetlistError, Pos};
use crate::cells::LutKind;
use crate::lut::LutMask;

/// Parse a `.bench` file and cut any flip-flops into pseudo inputs/outputs.
pub fn parse_bench(text: &str, name: &str) -> Result<Netlist, NetlistError> {
    let raw = parse_bench_raw(text, name)?;
    super::extract_combinational_core(&raw)
}

/// Parse a `.bench` file keeping flip-flops in place.
pub fn parse_bench_raw(text: &str, name: &str) -> Result<Netlist, NetlistError> {
    let mut b = NetlistBuilder::new(name);
    let mut statements = 0usize;
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw_line.find('#') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        };
        if content.trim().is_empty() {
            continue;
        }
        statements += 1;
        let mut cur = Cursor {
            text: content,
            pos: 0,
            line,
        };
        cur.skip_ws();
        let start = cur.pos;
        let first = cur.ident()?;
        cur.skip_ws();
        match cur.peek() {
            Some('(') => {
                let decl = first.to_ascii_uppercase();
                cur.expect('(')?;
                cur.skip_ws();
                let at = cur.here();
                let net = cur.ident()?.to_string();
                cur.skip_ws();
                cur.expect(')')?;
                cur.end()?;
                match decl.as_str() {
                    "INPUT" => b.input_at(net, at),
                    "OUTPUT" => b.output_at(net, at),
                    _ => {
                        return Err(cur.error_at(
                            start,
                            &format!("expected INPUT or OUTPUT, found `{first}`"),
                        ));
                    }
                }
            }
            Some('=') => {
                let output = first.to_string();
                cur.expect('=')?;
                cur.skip_ws();
                let kind_at = cur.pos;
                let kind_tok = cur.ident()?;
                let (kind, wants_mask) = parse_kind(kind_tok).ok_or_else(|| {
                    cur.error_at(kind_at, &format!("unknown gate kind `{kind_tok}`"))
                })?;
                cur.skip_ws();
                let mut mask = None;
                if cur.peek() == Some('[') {
                    let mask_at = cur.pos;
                    cur.expect('[')?;
                    let hex = cur.take_while(|c| c.is_ascii_hexdigit());
                    cur.expect(']')?;
                    let arity = match wants_mask {
                        Some(a) => a,
                        None => return Err(cur.error_at(mask_at, "only LUT gates carry a mask")),
                    };
                    mask = Some(
                        LutMask::from_hex(arity, hex)
                            .map_err(|e| cur.error_at(mask_at, &e.to_string()))?,
                    );
                    cur.skip_ws();
                }
                cur.expect('(')?;
                let mut fanin = Vec::new();
                loop {
                    cur.skip_ws();
                    fanin.push(cur.ident()?.to_string());
                    cur.skip_ws();
                    match cur.peek() {
                        Some(',') => cur.pos += 1,
                        Some(')') => {
                            cur.pos += 1;
                            break;
                        }
                        _ => return Err(cur.error_at(cur.pos, "expected `,` or `)`")),
                    }
                }
                cur.end()?;
                b.gate_at(
                    output,
                    kind,
                    fanin,
                    mask,
                    Pos {
                        line,
                        column: start + 1,
                    },
                );
            }
            _ => return Err(cur.error_at(cur.pos, "expected `(` or `=`")),
        }
    }
    if statements == 0 {
        return Err(NetlistError::Syntax {
            line: 1,
            column: 1,
            msg: "empty netlist: no INPUT, OUTPUT or gate lines".into(),
        });
    }
    b.build()
}

/// Gate kind token, plus the LUT arity when the kind is a LUT.
fn parse_kind(tok: &str) -> Option<(GateKind, Option<usize>)> {
    let upper = tok.to_ascii_uppercase();
    if let Some(rest) = upper.strip_prefix("LUT") {
        let (arity_str, tag) = match rest.split_once('_') {
            Some((a, t)) => (a, Some(t)),
            None => (rest, None),
        };
        let arity: u8 = arity_str.parse().ok()?;
        if !(2..=5).contains(&arity) {
            return None;
        }
        let kind = match tag {
            None => None,
            Some(t) => Some(t.parse::<LutKind>().ok()?),
        };
        return Some((GateKind::Lut { kind, arity }, Some(arity as usize)));
    }
    GateKind::from_bench_name(&upper).map(|k| (k, None))
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn here(&self) -> Pos {
        Pos {
            line: self.line,
            column: self.pos + 1,
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if f(c)) {
            self.pos += 1;
        }
        &self.text[start..self.pos]
    }

    fn ident(&mut self) -> Result<&'a str, NetlistError> {
        let at = self.pos;
        let s = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
        if s.is_empty() {
            return Err(self.error_at(at, "expected an identifier"));
        }
        Ok(s)
    }

    fn expect(&mut self, c: char) -> Result<(), NetlistError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error_at(self.pos, &format!("expected `{c}`")))
        }
    }

    fn end(&mut self) -> Result<(), NetlistError> {
        self.skip_ws();
        if self.pos < self.text.len() {
            return Err(self.error_at(self.pos, "unexpected trailing text"));
        }
        Ok(())
    }

    fn error_at(&self, pos: usize, msg: &str) -> NetlistError {
        NetlistError::Syntax {
            line: self.line,
            column: pos + 1,
            msg: msg.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EmitOptions {
    /// Append `_MUX`/`_SRAM`/`_SOT` to LUT kinds.
    pub show_kind: bool,
    /// Write inline LUT masks as `[<hex>]`.
    pub include_masks: bool,
}

impl EmitOptions {
    /// What a reverse engineer recovers: LUT arity and wiring only.
    pub fn attacker_view() -> Self {
        EmitOptions {
            show_kind: false,
            include_masks: false,
        }
    }

    pub fn defender_view() -> Self {
        EmitOptions {
            show_kind: true,
            include_masks: true,
        }
    }
}

pub fn emit_bench(n: &Netlist, opts: &EmitOptions) -> String {
    let mut out = String::new();
    let s = n.stats();
    let _ = writeln!(out, "# {}", n.name());
    let _ = writeln!(out, "# {} inputs", s.pi_count);
    let _ = writeln!(out, "# {} outputs", s.po_count);
    let _ = writeln!(out, "# {} gates", s.gate_count);
    out.push('\n');
    for &i in n.inputs() {
        let _ = writeln!(out, "INPUT({})", n.net_name(i));
    }
    out.push('\n');
    for &o in n.outputs() {
        let _ = writeln!(out, "OUTPUT({})", n.net_name(o));
    }
    out.push('\n');
    for g in n.gates() {
        let kind = match g.kind {
            GateKind::Lut { kind, arity } => {
                let mut k = format!("LUT{arity}");
                if let (true, Some(lk)) = (opts.show_kind, kind) {
                    k.push('_');
                    k.push_str(&lk.tag().to_uppercase());
                }
                if let (true, Some(m)) = (opts.include_masks, g.mask) {
                    let _ = write!(k, "[{}]", m.to_hex());
                }
                k
            }
            other => other.bench_name().to_string(),
        };
        let fanin: Vec<&str> = g.fanin.iter().map(|&f| n.net_name(f)).collect();
        let _ = writeln!(
            out,
            "{} = {}({})",
            n.net_name(g.output),
            kind,
            fanin.join(", ")
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syntax_error_position() {
        let err = parse_bench("INPUT(a)\nOUTPUT(f)\nf = NAND(a b)\n", "e").unwrap_err();
        assert_eq!(
            err,
            NetlistError::Syntax {
                line: 3,
                column: 12,
                msg: "expected `,` or `)`".into()
            }
        );
        let err = parse_bench("INPUT(a)\nf = FOO(a)\n", "e").unwrap_err();
        assert!(matches!(
            err,
            NetlistError::Syntax {
                line: 2,
                column: 5,
                ..
            }
        ));
    }

    #[test]
    fn empty_file_rejected() {
        for text in ["", "# only a comment\n\n"] {
            let err = parse_bench(text, "empty").unwrap_err();
            assert!(
                matches!(
                    err,
                    NetlistError::Syntax {
                        line: 1,
                        column: 1,
                        ..
                    }
                ),
                "{err}"
            );
        }
    }

    #[test]
    fn lut_tokens() {
        let text =
            "INPUT(a)\nINPUT(b)\nOUTPUT(f)\nOUTPUT(g)\nf = LUT2_SOT[e](a, b)\ng = LUT2(a, b)\n";
        let n = parse_bench(text, "l").unwrap();
        assert_eq!(
            n.gate(0).kind,
            GateKind::Lut {
                kind: Some(LutKind::SotLut),
                arity: 2
            }
        );
        assert_eq!(n.gate(0).mask.unwrap().to_bits(), "1110");
        assert_eq!(
            n.gate(1).kind,
            GateKind::Lut {
                kind: None,
                arity: 2
            }
        );
        assert_eq!(n.gate(1).mask, None);
        let shown = emit_bench(&n, &EmitOptions::defender_view());
        assert!(shown.contains("f = LUT2_SOT[e](a, b)"));
        let hidden = emit_bench(&n, &EmitOptions::attacker_view());
        assert!(hidden.contains("f = LUT2(a, b)"));
        assert!(parse_bench("INPUT(a)\nOUTPUT(f)\nf = NOT[1](a)\n", "x").is_err());
        assert!(parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = LUT3(a, b)\n", "x").is_err());
    }

    #[test]
    fn comments_and_whitespace() {
        let text = "# header\n  INPUT( a )  # trailing\nOUTPUT(f)\n\nf=NOT(a)\n";
        let n = parse_bench(text, "w").unwrap();
        assert_eq!(n.stats().gate_count, 1);
    }
}
