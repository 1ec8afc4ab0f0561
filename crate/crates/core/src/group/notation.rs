//! Text forms of elements: `a b A` (upper case = inverse), `x27` for large
//! generator indices, `a^5` runs, and `[p,m,q]` triples for `BS(1,n)`.

use num_bigint::BigInt;
use num_traits::Signed;

use super::{free_letter_name, BsWord, Element, Letter, MarkedGroup};
use crate::error::{Error, Result};

const MAX_RUN: u64 = 1 << 20;

fn bs_name(l: Letter) -> String {
    let c = if l.index() == 1 { 's' } else { 't' };
    if l.is_inverse() {
        c.to_ascii_uppercase().to_string()
    } else {
        c.to_string()
    }
}

pub(super) fn parse_element(group: &MarkedGroup, text: &str) -> Result<Element> {
    let text = text.trim();
    if text.is_empty() || text == "1" {
        return Ok(group.identity());
    }
    if let MarkedGroup::BaumslagSolitar { n } = group {
        if text.starts_with('[') {
            return parse_triple(*n, text).map(Element::Bs);
        }
    }
    let is_bs = matches!(group, MarkedGroup::BaumslagSolitar { .. });
    let chars: Vec<char> = text.chars().collect();
    let mut letters = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        i += 1;
        if c.is_whitespace() || c == '*' || c == '.' {
            continue;
        }
        if !c.is_ascii_alphabetic() {
            return Err(Error::Parse(format!("unexpected character {c:?} in {text:?}")));
        }
        let inverse = c.is_ascii_uppercase();
        let lower = c.to_ascii_lowercase();
        let index = if is_bs {
            match lower {
                's' => 1,
                't' => 2,
                _ => return Err(Error::Parse(format!("BS letters are s and t, got {c:?}"))),
            }
        } else if lower == 'x' && i < chars.len() && chars[i].is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            digits
                .parse::<u32>()
                .ok()
                .filter(|&k| k >= 1)
                .ok_or_else(|| Error::Parse(format!("bad generator index {digits}")))?
        } else {
            (lower as u8 - b'a' + 1) as u32
        };
        let mut exp: i64 = 1;
        if i < chars.len() && chars[i] == '^' {
            i += 1;
            let start = i;
            if i < chars.len() && chars[i] == '-' {
                i += 1;
            }
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            exp = digits
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent {digits:?}")))?;
        }
        if exp.unsigned_abs() > MAX_RUN {
            return Err(Error::Parse(format!("exponent {exp} too large")));
        }
        let l = Letter::new(index, inverse != (exp < 0));
        letters.extend(std::iter::repeat(l).take(exp.unsigned_abs() as usize));
    }
    group.from_letters(&letters)
}

fn parse_triple(n: u32, text: &str) -> Result<BsWord> {
    let inner = text
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("bad triple {text:?}")))?;
    let parts: Vec<&str> = inner.split(';').flat_map(|p| p.split(',')).map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("triple needs three entries: {text:?}")));
    }
    let bad = |_| Error::Parse(format!("bad triple {text:?}"));
    let p: u32 = parts[0].parse().map_err(bad)?;
    let m: BigInt = parts[1].parse().map_err(|_| Error::Parse(format!("bad triple {text:?}")))?;
    let q: u32 = parts[2].parse().map_err(bad)?;
    BsWord::from_triple(n, p, m, q)
}

pub(super) fn format_element(group: &MarkedGroup, e: &Element) -> String {
    if e.is_identity() {
        return "1".to_string();
    }
    if let (MarkedGroup::BaumslagSolitar { .. }, Element::Bs(w)) = (group, e) {
        return w.to_string();
    }
    let runs = match group.runs(e) {
        Ok(r) => r,
        Err(_) => return format!("{e:?}"),
    };
    let is_bs = matches!(group, MarkedGroup::BaumslagSolitar { .. });
    let name = |l: Letter| if is_bs { bs_name(l) } else { free_letter_name(l) };
    let mut parts = Vec::new();
    for (i, exp) in runs {
        let count = exp.abs();
        if count <= BigInt::from(3) {
            let l = Letter::new(i, exp.is_negative());
            let k: usize = count.try_into().unwrap_or(0);
            parts.extend(std::iter::repeat(name(l)).take(k));
        } else {
            parts.push(format!("{}^{}", name(Letter::gen(i)), exp));
        }
    }
    parts.join(" ")
}
