//! Bound identifiers with `key=value` parameters, e.g. `b2 q=10` or
//! `classic:GMD1 alpha=1 beta=2`.

use std::collections::BTreeMap;

use errbound::{BoundSpec, ClassicBound, HolderBound, PExponent, TermClass};

/// Parse a real number; `a/b` fractions are accepted.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| format!("bad number `{s}`"))?;
            let den: f64 = den.trim().parse().map_err(|_| format!("bad number `{s}`"))?;
            if den == 0.0 {
                return Err(format!("zero denominator in `{s}`"));
            }
            num / den
        }
        None => s.parse().map_err(|_| format!("bad number `{s}`"))?,
    };
    if value.is_nan() {
        return Err(format!("bad number `{s}`"));
    }
    Ok(value)
}

pub fn is_assignment(token: &str) -> bool {
    token.contains('=')
}

pub fn parse_assignment(token: &str) -> Result<(String, f64), String> {
    let (k, v) = token
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{token}`"))?;
    let key = k.trim();
    if key.is_empty() {
        return Err(format!("missing key in `{token}`"));
    }
    Ok((key.to_string(), parse_number(v)?))
}

/// Split leading `key=value` tokens (example parameters) from the bound list.
pub fn split_leading_assignments(tokens: &[String]) -> Result<(Vec<(String, f64)>, &[String]), String> {
    let n = tokens.iter().take_while(|t| is_assignment(t)).count();
    let params = tokens[..n]
        .iter()
        .map(|t| parse_assignment(t))
        .collect::<Result<_, _>>()?;
    Ok((params, &tokens[n..]))
}

/// Parse a sequence of bound tokens into bound specifications.
pub fn parse_bounds(tokens: &[String]) -> Result<Vec<BoundSpec>, String> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let id = &tokens[i];
        if is_assignment(id) {
            return Err(format!("parameter `{id}` does not follow a bound name"));
        }
        i += 1;
        let mut params = BTreeMap::new();
        while i < tokens.len() && is_assignment(&tokens[i]) {
            let (k, v) = parse_assignment(&tokens[i])?;
            if params.insert(k.clone(), v).is_some() {
                return Err(format!("parameter `{k}` given twice for `{id}`"));
            }
            i += 1;
        }
        out.push(parse_bound(id, params)?);
    }
    Ok(out)
}

fn parse_bound(id: &str, mut params: BTreeMap<String, f64>) -> Result<BoundSpec, String> {
    let lower = id.to_ascii_lowercase();
    let spec = if let Some(name) = lower.strip_prefix("classic:") {
        BoundSpec::Classic(parse_classic(name, &mut params)?)
    } else if let Some(kind) = holder_kind(&lower) {
        BoundSpec::Holder {
            kind,
            p: take_exponent(id, &mut params)?,
        }
    } else {
        match lower.as_str() {
            "map" => BoundSpec::Map,
            "zeta1" => BoundSpec::Zeta {
                class: TermClass::First,
                p: take_exponent(id, &mut params)?,
            },
            "zeta2" => BoundSpec::Zeta {
                class: TermClass::Second,
                p: take_exponent(id, &mut params)?,
            },
            _ => return Err(format!("unknown bound `{id}`")),
        }
    };
    if let Some(k) = params.keys().next() {
        return Err(format!("unexpected parameter `{k}` for `{id}`"));
    }
    Ok(spec)
}

fn holder_kind(id: &str) -> Option<HolderBound> {
    HolderBound::ALL.into_iter().find(|k| k.name() == id)
}

fn take_exponent(id: &str, params: &mut BTreeMap<String, f64>) -> Result<PExponent, String> {
    match (params.remove("p"), params.remove("q")) {
        (Some(_), Some(_)) => Err(format!("`{id}` takes p= or q=, not both")),
        (Some(p), None) => PExponent::new(p).map_err(|e| format!("{id}: {e}")),
        (None, Some(q)) => PExponent::from_q(q).map_err(|e| format!("{id}: {e}")),
        (None, None) => Err(format!("`{id}` needs p= or q=")),
    }
}

fn parse_classic(name: &str, params: &mut BTreeMap<String, f64>) -> Result<ClassicBound, String> {
    use ClassicBound::*;
    if let Some(l) = params.remove("L") {
        params.insert("l".into(), l);
    }
    let mut take = |key: &str, default: f64| params.remove(key).unwrap_or(default);
    let spec = match name {
        "divergence" => Divergence,
        "blb1" => Blb1,
        "blb2" => Blb2,
        "fdiv" => FDiv { l: take("l", 1.0) },
        "harmonic" => Harmonic,
        "jalpha" => JAlpha { alpha: take("alpha", 1.0) },
        "gausssin" => GaussSin,
        "atlb" => Atlb { alpha: take("alpha", 5.0) },
        "bayes1" => Bayes1,
        "bayes2" => Bayes2,
        "bayes3" => Bayes3,
        "quad" => Quad,
        "matusita" => Matusita,
        "gmd1" => Gmd1 {
            alpha: take("alpha", 1.0),
            beta: take("beta", 2.0),
        },
        "gmd2" => Gmd2 {
            alpha: take("alpha", 0.5),
            beta: take("beta", 2.0),
        },
        _ => return Err(format!("unknown classic bound `{name}`")),
    };
    spec.check_params().map_err(|e| format!("classic:{}: {e}", spec.name()))?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn numbers_and_fractions() {
        assert_eq!(parse_number("15/28").unwrap(), 15.0 / 28.0);
        assert_eq!(parse_number(" 0.5 ").unwrap(), 0.5);
        assert!(parse_number("1/0").is_err());
        assert!(parse_number("abc").is_err());
    }

    #[test]
    fn bound_lists() {
        let b = parse_bounds(&toks("b1 q=2 b2 p=1.5 map classic:GMD1 alpha=1 beta=2")).unwrap();
        assert_eq!(b.len(), 4);
        assert_eq!(b[0].to_string(), "b1 p=2");
        assert_eq!(b[1].to_string(), "b2 p=1.5");
        assert_eq!(b[2], BoundSpec::Map);
        assert_eq!(b[3].to_string(), "classic:GMD1 alpha=1 beta=2");
    }

    #[test]
    fn bound_errors() {
        assert!(parse_bounds(&toks("b1")).is_err());
        assert!(parse_bounds(&toks("b1 p=2 q=2")).is_err());
        assert!(parse_bounds(&toks("b1 p=0.5")).is_err());
        assert!(parse_bounds(&toks("b1 p=2 alpha=1")).is_err());
        assert!(parse_bounds(&toks("bogus")).is_err());
        assert!(parse_bounds(&toks("classic:JAlpha alpha=0.5")).is_err());
        assert!(parse_bounds(&toks("p=2")).is_err());
    }

    #[test]
    fn leading_assignments() {
        let t = toks("lambda2=1 map");
        let (params, rest) = split_leading_assignments(&t).unwrap();
        assert_eq!(params, vec![("lambda2".to_string(), 1.0)]);
        assert_eq!(rest, &t[1..]);
    }

    #[test]
    fn fdiv_key() {
        let b = parse_bounds(&toks("classic:FDiv L=2")).unwrap();
        assert_eq!(b[0], BoundSpec::Classic(ClassicBound::FDiv { l: 2.0 }));
    }
}
