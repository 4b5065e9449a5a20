use std::collections::HashMap;
use std::f64::consts::PI;

use super::config::{
    CircuitConfig, ElementDecl, PlateAmplitude, SamplerDecl, Side, SourceDecl, SweepDecl, SweepVariable, System,
};
use super::validate::{validate, Severity, Target};
use super::ParseDiagnostic;
use crate::optics::BeamSplitterParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    pos: Pos,
}

fn tokenize(line: &str, line_no: usize) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut col = 0;
    for (byte, ch) in line.char_indices() {
        col += 1;
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                out.push(Token {
                    text: &line[b..byte],
                    pos: Pos { line: line_no, column: c },
                });
            }
        } else if start.is_none() {
            start = Some((byte, col));
        }
    }
    if let Some((b, c)) = start {
        out.push(Token {
            text: &line[b..],
            pos: Pos { line: line_no, column: c },
        });
    }
    out
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_number(s: &str) -> Option<f64> {
    let ok = !s.is_empty()
        && s.chars().any(|c| c.is_ascii_digit())
        && s.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | '+' | '-' | 'e' | 'E'));
    if !ok {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// `1.2`, `0.5pi`, `-pi`, `pi`
fn parse_phase(s: &str) -> Option<f64> {
    match s.strip_suffix("pi") {
        Some("") | Some("+") => Some(PI),
        Some("-") => Some(-PI),
        Some(prefix) => parse_number(prefix).map(|k| k * PI).filter(|v| v.is_finite()),
        None => parse_number(s),
    }
}

fn parse_plate_amplitude(s: &str) -> Option<PlateAmplitude> {
    match s.split_once('@') {
        Some((m, ph)) => Some(PlateAmplitude {
            magnitude: parse_number(m)?,
            phase: parse_phase(ph)?,
        }),
        None => Some(PlateAmplitude::real(parse_number(s)?)),
    }
}

/// `key=value` arguments of one statement.
struct Args<'a> {
    keyword: Token<'a>,
    values: HashMap<&'a str, Token<'a>>,
}

#[derive(Default)]
struct Spans {
    system: Option<Pos>,
    source: Option<Pos>,
    side_a: Vec<Pos>,
    side_b: Vec<Pos>,
    sweep: Option<Pos>,
    sampler: Option<Pos>,
}

impl Spans {
    fn of(&self, target: Target) -> Option<Pos> {
        match target {
            Target::System => self.system,
            Target::Source => self.source,
            Target::Element(Side::A, i) => self.side_a.get(i).copied(),
            Target::Element(Side::B, i) => self.side_b.get(i).copied(),
            Target::Sweep => self.sweep,
            Target::Sampler => self.sampler,
        }
    }
}

struct Parser<'a> {
    diags: Vec<ParseDiagnostic>,
    spans: Spans,
    system: Option<System>,
    source: Option<SourceDecl>,
    side_a: Vec<ElementDecl>,
    side_b: Vec<ElementDecl>,
    seen_sides: Vec<Side>,
    sweep: Option<SweepDecl>,
    sampler: Option<SamplerDecl>,
    open_side: Option<(Side, Pos)>,
    saw_statement: bool,
    _text: std::marker::PhantomData<&'a str>,
}


impl<'a> Parser<'a> {
    fn new() -> Self {
        Self {
            diags: Vec::new(),
            spans: Spans::default(),
            system: None,
            source: None,
            side_a: Vec::new(),
            side_b: Vec::new(),
            seen_sides: Vec::new(),
            sweep: None,
            sampler: None,
            open_side: None,
            saw_statement: false,
            _text: std::marker::PhantomData,
        }
    }

    fn error(&mut self, pos: Pos, message: impl Into<String>) {
        self.diags.push(ParseDiagnostic {
            line: pos.line,
            column: pos.column,
            message: message.into(),
            severity: Severity::Error,
        });
    }

    fn warning(&mut self, pos: Pos, message: impl Into<String>) {
        self.diags.push(ParseDiagnostic {
            line: pos.line,
            column: pos.column,
            message: message.into(),
            severity: Severity::Warning,
        });
    }

    fn args(&mut self, keyword: Token<'a>, rest: &[Token<'a>], allowed: &[&str]) -> Option<Args<'a>> {
        let mut values = HashMap::new();
        let mut ok = true;
        for tok in rest {
            let Some((key, value)) = tok.text.split_once('=') else {
                self.error(tok.pos, format!("expected key=value, found `{}`", tok.text));
                ok = false;
                continue;
            };
            if !allowed.contains(&key) {
                self.error(tok.pos, format!("unknown key `{key}` for `{}`", keyword.text));
                ok = false;
                continue;
            }
            if values.contains_key(key) {
                self.error(tok.pos, format!("duplicate key `{key}`"));
                ok = false;
                continue;
            }
            let value_pos = Pos {
                line: tok.pos.line,
                column: tok.pos.column + key.chars().count() + 1,
            };
            values.insert(key, Token { text: value, pos: value_pos });
        }
        ok.then_some(Args { keyword, values })
    }

    fn value<T>(
        &mut self,
        args: &Args<'a>,
        key: &str,
        what: &str,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Option<Option<T>> {
        match args.values.get(key) {
            None => Some(None),
            Some(tok) => match parse(tok.text) {
                Some(v) => Some(Some(v)),
                None => {
                    self.error(tok.pos, format!("invalid {what} `{}` for `{key}`", tok.text));
                    None
                }
            },
        }
    }

    fn required<T>(
        &mut self,
        args: &Args<'a>,
        key: &str,
        what: &str,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Option<T> {
        match self.value(args, key, what, parse)? {
            Some(v) => Some(v),
            None => {
                self.error(args.keyword.pos, format!("`{}` requires `{key}`", args.keyword.text));
                None
            }
        }
    }

    fn optional<T>(
        &mut self,
        args: &Args<'a>,
        key: &str,
        what: &str,
        default: T,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Option<T> {
        Some(self.value(args, key, what, parse)?.unwrap_or(default))
    }

    fn statement(&mut self, tokens: &[Token<'a>]) {
        let head = tokens[0];
        let rest = &tokens[1..];
        if let Some((side, _)) = self.open_side {
            match head.text {
                "}" => {
                    if let Some(extra) = rest.first() {
                        self.error(extra.pos, "unexpected text after `}`");
                    }
                    self.open_side = None;
                }
                "ap" | "phase" | "bs" | "bloch" => {
                    if let Some(el) = self.element(head, rest) {
                        let (list, spans) = match side {
                            Side::A => (&mut self.side_a, &mut self.spans.side_a),
                            Side::B => (&mut self.side_b, &mut self.spans.side_b),
                        };
                        list.push(el);
                        spans.push(head.pos);
                    }
                }
                other => self.error(head.pos, format!("unknown element `{other}` inside side block")),
            }
            return;
        }

        if head.text != "version" {
            self.saw_statement = true;
        }
        match head.text {
            "version" => {
                if self.saw_statement {
                    self.warning(head.pos, "`version` should be the first statement");
                }
                match rest {
                    [v] if v.text == "1" => {}
                    [v] => self.error(v.pos, format!("unsupported version `{}`", v.text)),
                    _ => self.error(head.pos, "expected `version 1`"),
                }
            }
            "system" => {
                if self.system.is_some() {
                    self.error(head.pos, "duplicate `system` statement");
                    return;
                }
                match rest {
                    [v] => match v.text {
                        "photon" => self.system = Some(System::Photon),
                        "fermion" => self.system = Some(System::Fermion),
                        other => self.error(v.pos, format!("unknown system `{other}`")),
                    },
                    _ => self.error(head.pos, "expected `system photon` or `system fermion`"),
                }
                if self.system.is_some() {
                    self.spans.system = Some(head.pos);
                }
            }
            "source" => {
                if self.source.is_some() {
                    self.error(head.pos, "duplicate `source` statement");
                    return;
                }
                if let Some(src) = self.source_statement(head, rest) {
                    self.source = Some(src);
                    self.spans.source = Some(head.pos);
                }
            }
            "side" => match rest {
                [label, brace] if brace.text == "{" => {
                    let side = match label.text {
                        "A" => Side::A,
                        "B" => Side::B,
                        other => {
                            self.error(label.pos, format!("unknown side `{other}`, expected A or B"));
                            return;
                        }
                    };
                    if self.seen_sides.contains(&side) {
                        self.error(label.pos, format!("duplicate block for side {}", side.label()));
                    }
                    self.seen_sides.push(side);
                    self.open_side = Some((side, head.pos));
                }
                _ => self.error(head.pos, "expected `side A {` or `side B {`"),
            },
            "sweep" => {
                if self.sweep.is_some() {
                    self.error(head.pos, "duplicate `sweep` statement");
                    return;
                }
                let Some((var, rest)) = rest.split_first() else {
                    self.error(head.pos, "`sweep` requires a variable (w, phi or alpha)");
                    return;
                };
                let Some(variable) = SweepVariable::from_keyword(var.text) else {
                    self.error(var.pos, format!("unknown sweep variable `{}`", var.text));
                    return;
                };
                let Some(args) = self.args(head, rest, &["points"]) else { return };
                let Some(points) =
                    self.optional(&args, "points", "integer", SweepDecl::DEFAULT_POINTS, |s| s.parse().ok())
                else {
                    return;
                };
                self.sweep = Some(SweepDecl { variable, points });
                self.spans.sweep = Some(head.pos);
            }
            "sample" => {
                if self.sampler.is_some() {
                    self.error(head.pos, "duplicate `sample` statement");
                    return;
                }
                let Some(args) = self.args(head, rest, &["n", "seed"]) else { return };
                let n = self.required(&args, "n", "integer", |s| s.parse().ok());
                let seed = self.required(&args, "seed", "integer", |s| s.parse().ok());
                if let (Some(n), Some(seed)) = (n, seed) {
                    self.sampler = Some(SamplerDecl { n, seed });
                    self.spans.sampler = Some(head.pos);
                }
            }
            "}" => self.error(head.pos, "`}` without an open side block"),
            "ap" | "phase" | "bs" | "bloch" => {
                self.error(head.pos, format!("`{}` must appear inside a side block", head.text))
            }
            other => self.error(head.pos, format!("unknown statement `{other}`")),
        }
    }

    fn source_statement(&mut self, head: Token<'a>, rest: &[Token<'a>]) -> Option<SourceDecl> {
        let Some((kind, rest)) = rest.split_first() else {
            self.error(head.pos, "`source` requires a kind (entangled, product or plates)");
            return None;
        };
        match kind.text {
            "entangled" => {
                let args = self.args(head, rest, &["p", "q", "alpha"])?;
                let p = self.required(&args, "p", "number", parse_number);
                let q = self.required(&args, "q", "number", parse_number);
                let alpha = self.optional(&args, "alpha", "phase", 0.0, parse_phase);
                Some(SourceDecl::Entangled {
                    p: p?,
                    q: q?,
                    alpha: alpha?,
                })
            }
            "product" => {
                let args = self.args(head, rest, &["mu", "nu", "mu_p", "nu_p", "phi_a", "phi_b"])?;
                let mu = self.required(&args, "mu", "number", parse_number);
                let nu = self.required(&args, "nu", "number", parse_number);
                let mu_p = self.required(&args, "mu_p", "number", parse_number);
                let nu_p = self.required(&args, "nu_p", "number", parse_number);
                let phi_a = self.optional(&args, "phi_a", "phase", 0.0, parse_phase);
                let phi_b = self.optional(&args, "phi_b", "phase", 0.0, parse_phase);
                Some(SourceDecl::Product {
                    mu: mu?,
                    nu: nu?,
                    mu_p: mu_p?,
                    nu_p: nu_p?,
                    phi_a: phi_a?,
                    phi_b: phi_b?,
                })
            }
            "plates" => {
                let args = self.args(head, rest, &["T1", "T2"])?;
                let t1 = self.required(&args, "T1", "plate amplitude", parse_plate_amplitude);
                let t2 = self.required(&args, "T2", "plate amplitude", parse_plate_amplitude);
                Some(SourceDecl::Plates { t1: t1?, t2: t2? })
            }
            other => {
                self.error(kind.pos, format!("unknown source kind `{other}`"));
                None
            }
        }
    }

    fn element(&mut self, head: Token<'a>, rest: &[Token<'a>]) -> Option<ElementDecl> {
        match head.text {
            "ap" => {
                let args = self.args(head, rest, &["T1", "T2"])?;
                let t1 = self.required(&args, "T1", "plate amplitude", parse_plate_amplitude);
                let t2 = self.required(&args, "T2", "plate amplitude", parse_plate_amplitude);
                Some(ElementDecl::Plate { t1: t1?, t2: t2? })
            }
            "phase" => {
                let args = self.args(head, rest, &["path", "phi"])?;
                let path = self.required(&args, "path", "path index", |s| s.parse::<u8>().ok());
                let phi = self.required(&args, "phi", "phase", parse_phase);
                Some(ElementDecl::Phase { path: path?, phi: phi? })
            }
            "bs" => {
                let args = self.args(head, rest, &["t", "tau", "rho", "tau_p", "rho_p"])?;
                let t = self.required(&args, "t", "number", parse_number);
                let tau = self.optional(&args, "tau", "phase", BeamSplitterParams::DEFAULT_TAU, parse_phase);
                let rho = self.optional(&args, "rho", "phase", BeamSplitterParams::DEFAULT_RHO, parse_phase);
                let tau_p = self.optional(&args, "tau_p", "phase", BeamSplitterParams::DEFAULT_TAU_P, parse_phase);
                let rho_p = self.optional(&args, "rho_p", "phase", BeamSplitterParams::DEFAULT_RHO_P, parse_phase);
                Some(ElementDecl::BeamSplitter {
                    t: t?,
                    tau: tau?,
                    rho: rho?,
                    tau_p: tau_p?,
                    rho_p: rho_p?,
                })
            }
            "bloch" => {
                let args = self.args(head, rest, &["chi", "delta"])?;
                let chi = self.required(&args, "chi", "phase", parse_phase);
                let delta = self.optional(&args, "delta", "phase", 0.0, parse_phase);
                Some(ElementDecl::Bloch {
                    chi: chi?,
                    delta: delta?,
                })
            }
            _ => unreachable!("caller dispatches element keywords only"),
        }
    }

    fn finish(mut self, end: Pos) -> Result<(CircuitConfig, Vec<ParseDiagnostic>), Vec<ParseDiagnostic>> {
        if let Some((side, pos)) = self.open_side {
            self.error(pos, format!("side {} block is never closed", side.label()));
        }
        if self.system.is_none() {
            self.error(end, "missing `system` statement");
        }
        if self.source.is_none() {
            self.error(end, "missing `source` statement");
        }
        let (Some(system), Some(source)) = (self.system, self.source) else {
            return Err(self.diags);
        };
        let config = CircuitConfig {
            system,
            source,
            side_a: std::mem::take(&mut self.side_a),
            side_b: std::mem::take(&mut self.side_b),
            sweep: self.sweep,
            sampler: self.sampler,
        };
        for finding in validate(&config) {
            let pos = self.spans.of(finding.target).unwrap_or(end);
            self.diags.push(ParseDiagnostic {
                line: pos.line,
                column: pos.column,
                message: finding.message,
                severity: finding.severity,
            });
        }
        if self.diags.iter().any(|d| d.severity == Severity::Error) {
            Err(self.diags)
        } else {
            Ok((config, self.diags))
        }
    }
}

/// Parses circuit text; on failure returns every diagnostic found.
pub fn parse(text: &str) -> Result<CircuitConfig, Vec<ParseDiagnostic>> {
    parse_with_warnings(text).map(|(config, _)| config)
}

/// Like [`parse`], also returning warnings on success.
pub fn parse_with_warnings(text: &str) -> Result<(CircuitConfig, Vec<ParseDiagnostic>), Vec<ParseDiagnostic>> {
    let mut parser = Parser::new();
    let mut last = Pos { line: 1, column: 1 };
    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        last = Pos {
            line: line_no,
            column: line.chars().count() + 1,
        };
        let tokens = tokenize(strip_comment(line), line_no);
        if !tokens.is_empty() {
            parser.statement(&tokens);
        }
    }
    parser.finish(last)
}

/// Parses raw bytes, reporting invalid UTF-8 as a diagnostic.
pub fn parse_bytes(bytes: &[u8]) -> Result<CircuitConfig, Vec<ParseDiagnostic>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let text = std::str::from_utf8(valid).expect("prefix is valid");
            let line = text.matches('\n').count() + 1;
            let column = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            Err(vec![ParseDiagnostic {
                line,
                column,
                message: "input is not valid UTF-8".into(),
                severity: Severity::Error,
            }])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_and_phases() {
        assert_eq!(parse_number("0.5"), Some(0.5));
        assert_eq!(parse_number("-1e-3"), Some(-1e-3));
        assert_eq!(parse_number("inf"), None);
        assert_eq!(parse_number("NaN"), None);
        assert_eq!(parse_number("1e999"), None);
        assert_eq!(parse_number(""), None);
        assert_eq!(parse_number("."), None);
        assert_eq!(parse_phase("pi"), Some(PI));
        assert_eq!(parse_phase("-pi"), Some(-PI));
        assert_eq!(parse_phase("0.5pi"), Some(0.5 * PI));
        assert_eq!(parse_phase("-0.25pi"), Some(-0.25 * PI));
        assert_eq!(parse_phase("1.25"), Some(1.25));
        assert_eq!(parse_phase("xpi"), None);
        assert_eq!(
            parse_plate_amplitude("0.9@0.5pi"),
            Some(PlateAmplitude { magnitude: 0.9, phase: 0.5 * PI })
        );
        assert_eq!(parse_plate_amplitude("0.9"), Some(PlateAmplitude::real(0.9)));
        assert_eq!(parse_plate_amplitude("0.9@"), None);
    }

    #[test]
    fn tokenize_tracks_columns() {
        let toks = tokenize("  bs  t=0.5", 3);
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[0].pos, Pos { line: 3, column: 3 });
        assert_eq!(toks[1].pos, Pos { line: 3, column: 7 });
        assert_eq!(toks[1].text, "t=0.5");
    }
}
