//! Line-oriented text form of a profile.
//!
//! ```text
//! cuspforge-profile
//! kind = profile
//! offset = 0.0000000000000000e0
//! segment lo=0.0000000000000000e0 hi=inf form=exp c=1.0000000000000000e0 k=1.0000000000000000e0 t0=0.0000000000000000e0
//! ```
//!
//! Numbers carry 17 significant digits, enough to round-trip every `f64`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Form, ProfileError, ProfileFunction, Segment};
use thiserror::Error;

const HEADER: &str = "cuspforge-profile";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseProfileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Invalid(#[from] ProfileError),
}

pub(crate) fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn form_fields(form: &Form) -> Vec<(&'static str, f64)> {
    match *form {
        Form::Cosh { c, k, t0 } | Form::Sinh { c, k, t0 } | Form::Exp { c, k, t0 } | Form::Softplus { c, k, t0 } => {
            vec![("c", c), ("k", k), ("t0", t0)]
        }
        Form::Power { c, s, t0 } => vec![("c", c), ("s", s), ("t0", t0)],
        Form::Constant { c } => vec![("c", c)],
        Form::Quintic { t0, coeffs } => {
            const NAMES: [&str; 6] = ["c0", "c1", "c2", "c3", "c4", "c5"];
            let mut v = vec![("t0", t0)];
            v.extend(NAMES.iter().copied().zip(coeffs));
            v
        }
    }
}

pub(super) fn write_profile(p: &ProfileFunction) -> String {
    let generator = p.is_generator();
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "kind = {}", if generator { "generator" } else { "profile" });
    let _ = writeln!(out, "offset = {}", num(p.offset()));
    for s in p.segments() {
        let _ = write!(out, "segment lo={} hi={} form={}", num(s.lo), num(s.hi), s.form.tag());
        for (k, v) in form_fields(&s.form) {
            let _ = write!(out, " {k}={}", num(v));
        }
        out.push('\n');
    }
    out
}

fn build_form(tag: &str, fields: &BTreeMap<&str, f64>, line: usize) -> Result<Form, ParseProfileError> {
    let get = |k: &str| {
        fields.get(k).copied().ok_or_else(|| ParseProfileError::Syntax {
            line,
            message: format!("form `{tag}` needs field `{k}`"),
        })
    };
    let form = match tag {
        "cosh" => Form::Cosh { c: get("c")?, k: get("k")?, t0: get("t0")? },
        "sinh" => Form::Sinh { c: get("c")?, k: get("k")?, t0: get("t0")? },
        "exp" => Form::Exp { c: get("c")?, k: get("k")?, t0: get("t0")? },
        "softplus" => Form::Softplus { c: get("c")?, k: get("k")?, t0: get("t0")? },
        "power" => Form::Power { c: get("c")?, s: get("s")?, t0: get("t0")? },
        "constant" => Form::Constant { c: get("c")? },
        "quintic" => Form::Quintic {
            t0: get("t0")?,
            coeffs: [get("c0")?, get("c1")?, get("c2")?, get("c3")?, get("c4")?, get("c5")?],
        },
        other => {
            return Err(ParseProfileError::Syntax {
                line,
                message: format!("unknown form `{other}`"),
            })
        }
    };
    let expected = form_fields(&form).len();
    if fields.len() != expected {
        let known: Vec<&str> = form_fields(&form).iter().map(|(k, _)| *k).collect();
        let extra: Vec<&&str> = fields.keys().filter(|k| !known.contains(k)).collect();
        return Err(ParseProfileError::Syntax {
            line,
            message: format!("unexpected fields {extra:?} for form `{tag}`"),
        });
    }
    Ok(form)
}

/// Parse the text produced by [`ProfileFunction::to_text`].
pub fn parse_profile(text: &str) -> Result<ProfileFunction, ParseProfileError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, HEADER)) => {}
        Some((line, other)) => {
            return Err(ParseProfileError::Syntax {
                line,
                message: format!("expected `{HEADER}`, found `{other}`"),
            })
        }
        None => return Err(ProfileError::Empty.into()),
    }
    let mut generator = false;
    let mut offset = 0.0;
    let mut segments = Vec::new();
    for (line, l) in lines {
        let syntax = |message: String| ParseProfileError::Syntax { line, message };
        let parse_num = |s: &str| s.parse::<f64>().map_err(|_| syntax(format!("not a number: `{s}`")));
        if let Some(rest) = l.strip_prefix("segment ") {
            let mut lo = None;
            let mut hi = None;
            let mut tag = None;
            let mut fields = BTreeMap::new();
            for tok in rest.split_whitespace() {
                let (k, v) = tok
                    .split_once('=')
                    .ok_or_else(|| syntax(format!("expected key=value, found `{tok}`")))?;
                match k {
                    "lo" => lo = Some(parse_num(v)?),
                    "hi" => hi = Some(parse_num(v)?),
                    "form" => tag = Some(v),
                    _ => {
                        if fields.insert(k, parse_num(v)?).is_some() {
                            return Err(syntax(format!("duplicate field `{k}`")));
                        }
                    }
                }
            }
            let lo = lo.ok_or_else(|| syntax("segment needs `lo`".into()))?;
            let hi = hi.ok_or_else(|| syntax("segment needs `hi`".into()))?;
            let tag = tag.ok_or_else(|| syntax("segment needs `form`".into()))?;
            segments.push(Segment::new(lo, hi, build_form(tag, &fields, line)?));
        } else if let Some((k, v)) = l.split_once('=') {
            match (k.trim(), v.trim()) {
                ("kind", "profile") => generator = false,
                ("kind", "generator") => generator = true,
                ("kind", other) => return Err(syntax(format!("unknown kind `{other}`"))),
                ("offset", v) => offset = parse_num(v)?,
                (k, _) => return Err(syntax(format!("unknown key `{k}`"))),
            }
        } else {
            return Err(syntax(format!("unrecognised line `{l}`")));
        }
    }
    Ok(ProfileFunction::rebuild(segments, offset, generator)?)
}
