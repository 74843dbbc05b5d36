//! Scenario description language.
//!
//! ```text
//! // CCRs at 50 km/h, target shifted 0.5 m to the left
//! scenario ccrs "c50" {
//!     vut { speed: 50 kmh; mass: 1500 kg }
//!     target { speed: 0 kmh; lateral_offset: 0.5 m }
//!     road { friction: 0.9 ratio }
//!     initial_gap: auto
//!     decision { full_decel: 9 ms2; latch_full_brake: "true" }
//! }
//! sweep grid seed 7 {
//!     target.lateral_offset: -0.5 .. 0.5 step 0.25 m
//!     vut.speed: 49 .. 51 kmh step 1 kmh
//! }
//! ```
//!
//! Every number carries a unit. Blocks are `vut`, `target`, `road`,
//! `sensor`, `decision` and `brake`; the only top-level field is
//! `initial_gap` (`auto` or a length). Flags and modes are strings
//! (`"true"`, `"noisy"`); `"unlimited"` and `"none"` are accepted where a
//! parameter allows them. The optional sweep header names the strategy
//! (`grid`, `montecarlo`, `oat`) and a seed; without a strategy, `step`
//! ranges mean a full grid and `samples` ranges mean Monte Carlo.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::perception::SensorMode;
use crate::DEFAULT_SEED;

use super::sweep::{ParameterRange, Spacing, SweepPlan, SweepStrategy};
use super::{unit_info, Dim, InitialGap, OverrideValue, Param, ScenarioKind, ScenarioSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DslErrorKind {
    Syntax,
    Semantic,
    Unit,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind_name} error at {line}:{column}: {message}", kind_name = self.kind_name())]
pub struct DslError {
    pub kind: DslErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl DslError {
    fn kind_name(&self) -> &'static str {
        match self.kind {
            DslErrorKind::Syntax => "syntax",
            DslErrorKind::Semantic => "semantic",
            DslErrorKind::Unit => "unit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    LBrace,
    RBrace,
    Colon,
    Semi,
    Dot,
    DotDot,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number {s}"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Dot => "`.`".into(),
            Tok::DotDot => "`..`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn err(kind: DslErrorKind, pos: Pos, message: impl Into<String>) -> DslError {
    DslError { kind, line: pos.line, column: pos.column, message: message.into() }
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, DslError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                let c = chars[i];
                advance(&mut i, &mut line, &mut col, c);
            }
            continue;
        }
        let single = match c {
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ':' => Some(Tok::Colon),
            ';' => Some(Tok::Semi),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((tok, pos));
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '.' {
            if chars.get(i + 1) == Some(&'.') {
                out.push((Tok::DotDot, pos));
                advance(&mut i, &mut line, &mut col, c);
            } else {
                out.push((Tok::Dot, pos));
            }
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '"' {
            advance(&mut i, &mut line, &mut col, c);
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => return Err(err(DslErrorKind::Syntax, pos, "unterminated string")),
                    Some('"') => {
                        advance(&mut i, &mut line, &mut col, '"');
                        break;
                    }
                    Some('\\') => {
                        let esc = chars.get(i + 1).copied();
                        match esc {
                            Some(e @ ('"' | '\\')) => s.push(e),
                            _ => {
                                return Err(err(
                                    DslErrorKind::Syntax,
                                    Pos { line, column: col },
                                    "unknown escape in string",
                                ))
                            }
                        }
                        advance(&mut i, &mut line, &mut col, '\\');
                        advance(&mut i, &mut line, &mut col, 'x');
                    }
                    Some(&ch) => {
                        s.push(ch);
                        advance(&mut i, &mut line, &mut col, ch);
                    }
                }
            }
            out.push((Tok::Str(s), pos));
            continue;
        }
        let signed = (c == '-' || c == '+') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit());
        if c.is_ascii_digit() || signed {
            let start = i;
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            if chars.get(j) == Some(&'.') && chars.get(j + 1).is_some_and(|d| d.is_ascii_digit()) {
                j += 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
            }
            if matches!(chars.get(j), Some('e' | 'E')) {
                let mut k = j + 1;
                if matches!(chars.get(k), Some('+' | '-')) {
                    k += 1;
                }
                if chars.get(k).is_some_and(|d| d.is_ascii_digit()) {
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    j = k;
                }
            }
            let text: String = chars[start..j].iter().collect();
            for &ch in &chars[start..j] {
                advance(&mut i, &mut line, &mut col, ch);
            }
            out.push((Tok::Number(text), pos));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                let c = chars[i];
                advance(&mut i, &mut line, &mut col, c);
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        return Err(err(DslErrorKind::Syntax, pos, format!("unexpected character `{c}`")));
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

/// A scalar as written in the source, before it is matched to a parameter.
enum RawValue {
    Quantity { value: f64, unit: String, unit_pos: Pos },
    Auto,
    Text(String),
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn syntax<T>(&self, expected: &str) -> Result<T, DslError> {
        Err(err(
            DslErrorKind::Syntax,
            self.pos(),
            format!("expected {expected}, found {}", self.peek().describe()),
        ))
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<Pos, DslError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            self.syntax(expected)
        }
    }

    fn ident(&mut self, expected: &str) -> Result<(String, Pos), DslError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let pos = self.bump().1;
                Ok((s, pos))
            }
            _ => self.syntax(expected),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<Pos, DslError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => Ok(self.bump().1),
            _ => self.syntax(&format!("`{kw}`")),
        }
    }

    fn number(&mut self, expected: &str) -> Result<(f64, String, Pos), DslError> {
        match self.peek().clone() {
            Tok::Number(text) => {
                let pos = self.bump().1;
                let v: f64 = text
                    .parse()
                    .map_err(|_| err(DslErrorKind::Syntax, pos, format!("malformed number `{text}`")))?;
                if !v.is_finite() {
                    return Err(err(DslErrorKind::Syntax, pos, format!("number `{text}` out of range")));
                }
                Ok((v, text, pos))
            }
            _ => self.syntax(expected),
        }
    }

    fn optional_unit(&mut self) -> Option<(String, Pos)> {
        match self.peek() {
            Tok::Ident(s) if unit_info(s).is_some() || !is_sweep_keyword(s) && looks_like_unit(s) => {
                let s = s.clone();
                Some((s, self.bump().1))
            }
            _ => None,
        }
    }

    fn skip_semi(&mut self) {
        if *self.peek() == Tok::Semi {
            self.bump();
        }
    }

    fn value(&mut self) -> Result<(RawValue, Pos), DslError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Number(_) => {
                let (value, _, npos) = self.number("a number")?;
                match self.peek().clone() {
                    Tok::Ident(unit) => {
                        let unit_pos = self.bump().1;
                        Ok((RawValue::Quantity { value, unit, unit_pos }, pos))
                    }
                    _ => Err(err(DslErrorKind::Unit, npos, "missing unit after number")),
                }
            }
            Tok::Ident(s) if s == "auto" => {
                self.bump();
                Ok((RawValue::Auto, pos))
            }
            Tok::Str(s) => {
                self.bump();
                Ok((RawValue::Text(s), pos))
            }
            _ => self.syntax("a value (number with unit, `auto` or string)"),
        }
    }

    fn path(&mut self) -> Result<(String, Pos), DslError> {
        let (mut path, pos) = self.ident("a parameter path")?;
        while *self.peek() == Tok::Dot {
            self.bump();
            let (part, _) = self.ident("a path segment after `.`")?;
            path.push('.');
            path.push_str(&part);
        }
        Ok((path, pos))
    }
}

fn is_sweep_keyword(s: &str) -> bool {
    matches!(s, "step" | "samples")
}

fn looks_like_unit(s: &str) -> bool {
    s.len() <= 6 && s.chars().all(|c| c.is_ascii_alphanumeric())
}

/// Convert a quantity to SI for the parameter's dimension.
fn quantity(param: &Param, value: f64, unit: &str, unit_pos: Pos) -> Result<f64, DslError> {
    let (dim, conv) =
        unit_info(unit).ok_or_else(|| err(DslErrorKind::Unit, unit_pos, format!("unknown unit `{unit}`")))?;
    if dim != param.dim {
        return Err(err(
            DslErrorKind::Unit,
            unit_pos,
            format!("unit `{unit}` does not fit `{}` ({:?} expected)", param.path, param.dim),
        ));
    }
    Ok(conv(value))
}

fn lookup(path: &str, pos: Pos) -> Result<&'static Param, DslError> {
    Param::lookup(path).ok_or_else(|| err(DslErrorKind::Semantic, pos, format!("unknown parameter `{path}`")))
}

fn assign(spec: &mut ScenarioSpec, param: &Param, raw: RawValue, pos: Pos) -> Result<(), DslError> {
    let semantic = |m: String| err(DslErrorKind::Semantic, pos, m);
    if param.path == "initial_gap" || param.path == "target.headway" {
        spec.initial_gap = match raw {
            RawValue::Auto => InitialGap::Auto,
            RawValue::Quantity { value, unit, unit_pos } => InitialGap::Fixed(quantity(param, value, &unit, unit_pos)?),
            RawValue::Text(_) => return Err(semantic(format!("`{}` takes a length or `auto`", param.path))),
        };
        return Ok(());
    }
    let value = match (param.dim, raw) {
        (_, RawValue::Auto) => return Err(semantic(format!("`{}` does not accept `auto`", param.path))),
        (Dim::Flag, RawValue::Text(t)) => match t.as_str() {
            "true" => OverrideValue::Flag(true),
            "false" => OverrideValue::Flag(false),
            _ => return Err(semantic(format!("`{}` takes \"true\" or \"false\"", param.path))),
        },
        (Dim::Mode, RawValue::Text(t)) => match t.as_str() {
            "ideal" => OverrideValue::Mode(SensorMode::Ideal),
            "noisy" => OverrideValue::Mode(SensorMode::Noisy),
            _ => return Err(semantic(format!("`{}` takes \"ideal\" or \"noisy\"", param.path))),
        },
        (_, RawValue::Text(t)) if t == "unlimited" && param.unlimited => OverrideValue::Number(f64::INFINITY),
        (_, RawValue::Text(t)) if t == "none" && param.optional => OverrideValue::Unset,
        (_, RawValue::Text(t)) => return Err(semantic(format!("`{}` does not accept \"{t}\"", param.path))),
        (Dim::Flag | Dim::Mode, RawValue::Quantity { .. }) => {
            return Err(semantic(format!("`{}` takes a string", param.path)))
        }
        (_, RawValue::Quantity { value, unit, unit_pos }) => {
            OverrideValue::Number(quantity(param, value, &unit, unit_pos)?)
        }
    };
    if param.is_override() {
        spec.overrides.insert(param.path.to_string(), value);
        return Ok(());
    }
    let OverrideValue::Number(v) = value else {
        return Err(semantic(format!("`{}` takes a number", param.path)));
    };
    spec.set_param(param.path, v).map_err(semantic)
}

/// Parse a scenario document and its optional sweep.
pub fn parse_scenario(text: &str) -> Result<(ScenarioSpec, Option<SweepPlan>), DslError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let scenario_pos = p.keyword("scenario")?;
    let (kind_word, kind_pos) = p.ident("a scenario kind (ccrs, ccrm, ccrb)")?;
    let kind = ScenarioKind::from_keyword(&kind_word).ok_or_else(|| {
        err(DslErrorKind::Syntax, kind_pos, format!("unknown scenario kind `{kind_word}`"))
    })?;
    let id = match p.peek().clone() {
        Tok::Str(s) => {
            p.bump();
            s
        }
        _ => return p.syntax("a quoted scenario name"),
    };
    if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.')) {
        return Err(err(
            DslErrorKind::Semantic,
            scenario_pos,
            format!("scenario name \"{id}\" must be non-empty and use only [A-Za-z0-9_.-]"),
        ));
    }
    let mut spec = ScenarioSpec::new(id, kind, 0.0, 0.0);
    let mut seen: BTreeMap<String, Pos> = BTreeMap::new();
    let mut note = |path: &str, pos: Pos| -> Result<(), DslError> {
        let key = if path == "target.headway" { "initial_gap" } else { path };
        if seen.insert(key.to_string(), pos).is_some() {
            return Err(err(DslErrorKind::Semantic, pos, format!("`{path}` assigned twice")));
        }
        Ok(())
    };
    p.expect(Tok::LBrace, "`{`")?;
    while *p.peek() != Tok::RBrace {
        let (name, name_pos) = p.ident("a block name or field")?;
        match p.peek() {
            Tok::LBrace => {
                if !matches!(name.as_str(), "vut" | "target" | "road" | "sensor" | "decision" | "brake") {
                    return Err(err(DslErrorKind::Semantic, name_pos, format!("unknown block `{name}`")));
                }
                p.bump();
                while *p.peek() != Tok::RBrace {
                    let (field, field_pos) = p.ident("a field name")?;
                    p.expect(Tok::Colon, "`:`")?;
                    let path = format!("{name}.{field}");
                    let param = lookup(&path, field_pos)?;
                    let (raw, _) = p.value()?;
                    note(&path, field_pos)?;
                    assign(&mut spec, param, raw, field_pos)?;
                    p.skip_semi();
                }
                p.bump();
            }
            Tok::Colon => {
                p.bump();
                let param = lookup(&name, name_pos)?;
                if param.path.contains('.') {
                    return Err(err(DslErrorKind::Semantic, name_pos, format!("`{name}` must be inside a block")));
                }
                let (raw, _) = p.value()?;
                note(&name, name_pos)?;
                assign(&mut spec, param, raw, name_pos)?;
                p.skip_semi();
            }
            _ => return p.syntax("`{` or `:`"),
        }
    }
    p.bump();
    spec.validate().map_err(|m| err(DslErrorKind::Semantic, scenario_pos, m))?;

    let plan = match p.peek() {
        Tok::Ident(s) if s == "sweep" => Some(parse_sweep(&mut p, &spec)?),
        Tok::Eof => None,
        _ => return p.syntax("`sweep` or end of input"),
    };
    if *p.peek() != Tok::Eof {
        return p.syntax("end of input");
    }
    Ok((spec, plan))
}

fn parse_sweep(p: &mut Parser, base: &ScenarioSpec) -> Result<SweepPlan, DslError> {
    let sweep_pos = p.keyword("sweep")?;
    let mut strategy = None;
    let mut seed = DEFAULT_SEED;
    loop {
        match p.peek().clone() {
            Tok::Ident(s) if s == "seed" => {
                p.bump();
                let (_, text, pos) = p.number("an integer seed")?;
                seed = text
                    .parse::<u64>()
                    .map_err(|_| err(DslErrorKind::Syntax, pos, format!("seed `{text}` is not an unsigned integer")))?;
            }
            Tok::Ident(s) if strategy.is_none() => {
                let pos = p.bump().1;
                strategy = Some(match s.as_str() {
                    "grid" => SweepStrategy::FullGrid,
                    "montecarlo" => SweepStrategy::MonteCarlo,
                    "oat" => SweepStrategy::OneAtATime,
                    _ => return Err(err(DslErrorKind::Syntax, pos, format!("unknown sweep strategy `{s}`"))),
                });
            }
            _ => break,
        }
    }
    p.expect(Tok::LBrace, "`{`")?;
    let mut ranges = Vec::new();
    let mut positions = Vec::new();
    while *p.peek() != Tok::RBrace {
        let (path, path_pos) = p.path()?;
        let param = lookup(&path, path_pos)?;
        if !param.dim.is_numeric() {
            return Err(err(DslErrorKind::Semantic, path_pos, format!("`{path}` is not a numeric parameter")));
        }
        if ranges.iter().any(|r: &ParameterRange| r.path == path) {
            return Err(err(DslErrorKind::Semantic, path_pos, format!("duplicate sweep path `{path}`")));
        }
        p.expect(Tok::Colon, "`:`")?;
        let (lo, _, _) = p.number("a lower bound")?;
        p.expect(Tok::DotDot, "`..`")?;
        let (hi, _, hi_pos) = p.number("an upper bound")?;
        let mut units = Vec::new();
        units.extend(p.optional_unit());
        let (spacing_raw, spacing_pos) = match p.peek().clone() {
            Tok::Ident(s) if s == "step" => {
                p.bump();
                let (v, _, pos) = p.number("a step size")?;
                (Ok(v), pos)
            }
            Tok::Ident(s) if s == "samples" => {
                p.bump();
                let (_, text, pos) = p.number("a sample count")?;
                let n = text
                    .parse::<u32>()
                    .map_err(|_| err(DslErrorKind::Syntax, pos, format!("sample count `{text}` is not an integer")))?;
                (Err(n), pos)
            }
            _ => return p.syntax("`step` or `samples`"),
        };
        units.extend(p.optional_unit());
        let Some((unit, unit_pos)) = units.first().cloned() else {
            return Err(err(DslErrorKind::Unit, hi_pos, format!("missing unit on sweep range `{path}`")));
        };
        if units.iter().any(|(u, _)| *u != unit) {
            return Err(err(DslErrorKind::Unit, units[1].1, "conflicting units in one sweep range"));
        }
        let lo = quantity(param, lo, &unit, unit_pos)?;
        let hi = quantity(param, hi, &unit, unit_pos)?;
        let spacing = match spacing_raw {
            Ok(step) => {
                // a step is a difference, so no offset applies; every unit here is linear
                Spacing::Step(quantity(param, step, &unit, unit_pos)?)
            }
            Err(n) => Spacing::Samples(n),
        };
        let range = ParameterRange { path, lo, hi, spacing };
        range.validate().map_err(|m| err(DslErrorKind::Semantic, spacing_pos, m))?;
        ranges.push(range);
        positions.push(path_pos);
        p.skip_semi();
    }
    p.bump();
    let strategy = match strategy {
        Some(s) => s,
        None if ranges.iter().all(|r| matches!(r.spacing, Spacing::Samples(_))) && !ranges.is_empty() => {
            SweepStrategy::MonteCarlo
        }
        None => SweepStrategy::FullGrid,
    };
    let plan = SweepPlan { base: base.clone(), ranges, strategy, seed };
    plan.validate().map_err(|m| err(DslErrorKind::Semantic, sweep_pos, m))?;
    Ok(plan)
}

fn num(v: f64) -> String {
    // Display prints the shortest string that parses back to the same f64.
    let s = format!("{v}");
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn render_override(param: &Param, value: &OverrideValue) -> String {
    match value {
        OverrideValue::Flag(b) => quote(if *b { "true" } else { "false" }),
        OverrideValue::Mode(SensorMode::Ideal) => quote("ideal"),
        OverrideValue::Mode(SensorMode::Noisy) => quote("noisy"),
        OverrideValue::Unset => quote("none"),
        OverrideValue::Number(v) if v.is_infinite() => quote("unlimited"),
        OverrideValue::Number(v) => format!("{} {}", num(*v), param.dim.canonical_unit()),
    }
}

/// Render a spec in canonical form; parsing the output yields the same spec.
pub fn render_scenario(spec: &ScenarioSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario {} {} {{", spec.kind, quote(&spec.id));
    let _ = writeln!(
        out,
        "    vut {{ speed: {} mps; mass: {} kg; width: {} m }}",
        num(spec.vut_speed),
        num(spec.vut_mass),
        num(spec.vut_width)
    );
    let _ = writeln!(
        out,
        "    target {{ speed: {} mps; decel: {} ms2; lateral_offset: {} m; width: {} m }}",
        num(spec.target_speed),
        num(spec.target_decel),
        num(spec.lateral_offset),
        num(spec.target_width)
    );
    let _ = writeln!(out, "    road {{ friction: {} ratio }}", num(spec.road_friction));
    match spec.initial_gap {
        InitialGap::Auto => out.push_str("    initial_gap: auto\n"),
        InitialGap::Fixed(g) => {
            let _ = writeln!(out, "    initial_gap: {} m", num(g));
        }
    }
    for block in ["sensor", "decision", "brake"] {
        let fields: Vec<String> = spec
            .overrides
            .iter()
            .filter_map(|(path, value)| {
                let field = path.strip_prefix(block)?.strip_prefix('.')?;
                let param = Param::lookup(path)?;
                Some(format!("{field}: {}", render_override(param, value)))
            })
            .collect();
        if !fields.is_empty() {
            let _ = writeln!(out, "    {block} {{ {} }}", fields.join("; "));
        }
    }
    out.push_str("}\n");
    out
}

/// Render a spec plus sweep plan.
pub fn render_document(spec: &ScenarioSpec, plan: Option<&SweepPlan>) -> String {
    let mut out = render_scenario(spec);
    if let Some(plan) = plan {
        let strategy = match plan.strategy {
            SweepStrategy::FullGrid => "grid",
            SweepStrategy::MonteCarlo => "montecarlo",
            SweepStrategy::OneAtATime => "oat",
        };
        let _ = writeln!(out, "sweep {strategy} seed {} {{", plan.seed);
        for r in &plan.ranges {
            let unit = Param::lookup(&r.path).map(|p| p.dim.canonical_unit()).unwrap_or("");
            let spacing = match r.spacing {
                Spacing::Step(s) => format!("step {} {unit}", num(s)),
                Spacing::Samples(n) => format!("{unit} samples {n}"),
            };
            let _ = writeln!(out, "    {}: {} .. {} {spacing}", r.path, num(r.lo), num(r.hi));
        }
        out.push_str("}\n");
    }
    out
}
