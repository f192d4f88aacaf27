//! Text form of states: comma-separated `vertex:amplitude` terms.
//!
//! Amplitudes are integers (`-3`), rationals (`2/3`), exact sines
//! (`sin(a)` or `-sin(a)`, meaning `sin(a pi / (n + 1))`) or decimals
//! (`0.25`, `1e-3`). Any decimal makes the whole state numeric.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::cyclo::CycloElement;
use crate::error::{Error, Result};
use crate::spectrum::sin_pi_frac;
use crate::state::PureState;

#[derive(Clone, Debug, PartialEq)]
pub enum Amplitude {
    /// `num / den` in lowest terms with `den > 0`.
    Rational {
        num: BigInt,
        den: BigInt,
    },
    /// `sign * sin(a pi / m)`.
    Sin {
        negative: bool,
        a: i64,
    },
    Decimal(f64),
}

impl Amplitude {
    pub fn is_exact(&self) -> bool {
        !matches!(self, Amplitude::Decimal(_))
    }

    fn rational(num: BigInt, den: BigInt) -> Self {
        let g = num.gcd(&den);
        let (mut num, mut den) = if g.is_zero() {
            (num, den)
        } else {
            (num / &g, den / &g)
        };
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        Amplitude::Rational { num, den }
    }

    fn numeric(&self, m: u64) -> f64 {
        match self {
            Amplitude::Rational { num, den } => {
                let (n, d): (f64, f64) = (num.to_string().parse().unwrap(), den.to_string().parse().unwrap());
                n / d
            }
            Amplitude::Sin { negative, a } => {
                let s = sin_pi_frac(*a, m);
                if *negative {
                    -s
                } else {
                    s
                }
            }
            Amplitude::Decimal(x) => *x,
        }
    }

    /// Exact value in `Q(zeta_modulus)`, with `4m | modulus` whenever a sine occurs.
    fn exact(&self, modulus: u64, m: u64) -> CycloElement {
        match self {
            Amplitude::Rational { num, den } => CycloElement::rational(modulus, num.clone(), den.clone()),
            Amplitude::Sin { negative, a } => {
                // sin(a pi/m) = cos((m - 2a) pi / 2m) = (z^k + z^-k) / 2 with z = zeta_{4m}.
                let stride = (modulus / (4 * m)) as i64;
                let k = (m as i64 - 2 * a) * stride;
                let sign = if *negative { -1 } else { 1 };
                let sum = CycloElement::from_exponents(
                    modulus,
                    [(k, BigInt::from(sign)), (-k, BigInt::from(sign))],
                );
                sum.scale(&BigInt::from(1), &BigInt::from(2))
            }
            Amplitude::Decimal(_) => unreachable!("decimal amplitudes are numeric"),
        }
    }
}

impl fmt::Display for Amplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Amplitude::Rational { num, den } if *den == BigInt::from(1) => write!(f, "{num}"),
            Amplitude::Rational { num, den } => write!(f, "{num}/{den}"),
            Amplitude::Sin { negative, a } => write!(f, "{}sin({a})", if *negative { "-" } else { "" }),
            Amplitude::Decimal(x) => {
                let s = format!("{x:?}");
                f.write_str(&s)
            }
        }
    }
}

/// A parsed state literal for a fixed path length.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpec {
    pub n: usize,
    pub terms: Vec<(usize, Amplitude)>,
}

fn parse_error(column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        column,
        message: message.into(),
    }
}

fn parse_int(text: &str, column: usize, what: &str) -> Result<BigInt> {
    let digits = text.strip_prefix(['-', '+']).unwrap_or(text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(parse_error(column, format!("expected {what}, found {text:?}")));
    }
    text.parse()
        .map_err(|_| parse_error(column, format!("bad {what} {text:?}")))
}

fn parse_amplitude(text: &str, column: usize) -> Result<Amplitude> {
    if text.is_empty() {
        return Err(parse_error(column, "missing amplitude"));
    }
    let (negative, body) = match text.as_bytes()[0] {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    if let Some(inner) = body.strip_prefix("sin(") {
        let arg_col = column + (text.len() - body.len()) + 4;
        let arg = inner
            .strip_suffix(')')
            .ok_or_else(|| parse_error(column + text.len(), "expected ')' after sine argument"))?;
        let a = parse_int(arg.trim(), arg_col, "integer sine argument")?;
        let a = i64::try_from(a).map_err(|_| parse_error(arg_col, "sine argument too large"))?;
        return Ok(Amplitude::Sin { negative, a });
    }
    if body.bytes().all(|b| b.is_ascii_digit() || b == b'/') && !body.is_empty() {
        let sign_len = text.len() - body.len();
        let (num_text, den) = match body.split_once('/') {
            Some((n, d)) => {
                let den_col = column + sign_len + n.len() + 1;
                let den = parse_int(d, den_col, "denominator")?;
                if den.is_zero() {
                    return Err(parse_error(den_col, "zero denominator"));
                }
                (n, den)
            }
            None => (body, BigInt::from(1)),
        };
        let num = parse_int(num_text, column + sign_len, "numerator")?;
        let num = if negative { -num } else { num };
        return Ok(Amplitude::rational(num, den));
    }
    match text.parse::<f64>() {
        Ok(x)
            if x.is_finite()
                && body
                    .bytes()
                    .next()
                    .is_some_and(|b| b.is_ascii_digit() || b == b'.') =>
        {
            Ok(Amplitude::Decimal(x))
        }
        _ => Err(parse_error(column, format!("unrecognised amplitude {text:?}"))),
    }
}

impl StateSpec {
    /// Parse `text` as a state of `P_n`. Columns in errors are 1-based.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        let mut terms: Vec<(usize, Amplitude)> = Vec::new();
        let mut offset = 0;
        for raw in text.split(',') {
            let start = offset + 1;
            offset += raw.len() + 1;
            let lead = raw.len() - raw.trim_start().len();
            let term = raw.trim();
            let col = start + lead;
            if term.is_empty() {
                return Err(parse_error(col, "empty term"));
            }
            let (vertex_text, amp_text) = term
                .split_once(':')
                .ok_or_else(|| parse_error(col, format!("expected 'vertex:amplitude', found {term:?}")))?;
            let vt = vertex_text.trim_end();
            let vertex = vt
                .parse::<usize>()
                .ok()
                .filter(|_| vt.bytes().all(|b| b.is_ascii_digit()))
                .ok_or_else(|| parse_error(col, format!("expected vertex number, found {vt:?}")))?;
            if !(1..=n).contains(&vertex) {
                return Err(parse_error(col, format!("vertex {vertex} out of range 1..={n}")));
            }
            if terms.iter().any(|(v, _)| *v == vertex) {
                return Err(parse_error(col, format!("duplicate vertex {vertex}")));
            }
            let amp_lead = amp_text.len() - amp_text.trim_start().len();
            let amp_col = col + vertex_text.len() + 1 + amp_lead;
            terms.push((vertex, parse_amplitude(amp_text.trim(), amp_col)?));
        }
        Ok(Self { n, terms })
    }

    pub fn m(&self) -> u64 {
        self.n as u64 + 1
    }

    pub fn is_exact(&self) -> bool {
        self.terms.iter().all(|(_, a)| a.is_exact())
    }

    /// Canonical text; `parse(render(s), s.n) == s`.
    pub fn render(&self) -> String {
        self.to_string()
    }

    /// Build the state, exact when every literal is exact.
    pub fn to_state(&self) -> Result<PureState> {
        let m = self.m();
        if self.is_exact() {
            let has_sine = self.terms.iter().any(|(_, a)| matches!(a, Amplitude::Sin { .. }));
            let modulus = if has_sine { 4 * m } else { 2 * m };
            let mut amps = vec![CycloElement::zero(modulus); self.n];
            for (x, a) in &self.terms {
                amps[x - 1] = a.exact(modulus, m);
            }
            PureState::exact(amps)
        } else {
            let mut amps = vec![Complex64::new(0.0, 0.0); self.n];
            for (x, a) in &self.terms {
                amps[x - 1] = Complex64::new(a.numeric(m), 0.0);
            }
            PureState::numeric(amps)
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}:{a}")?;
        }
        Ok(())
    }
}

/// Parse and build in one step.
pub fn parse_state(text: &str, n: usize) -> Result<PureState> {
    StateSpec::parse(text, n)?.to_state()
}
