//! Flag values that need more than clap's built-in parsing.

use std::str::FromStr;

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub enum ZeroSpec {
    List(Vec<usize>),
    Enumerate(usize),
    Random(u64),
}

impl FromStr for ZeroSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(k) = s.strip_prefix("enumerate:") {
            return k
                .parse()
                .map(ZeroSpec::Enumerate)
                .map_err(|_| format!("bad enumeration count `{k}`"));
        }
        if let Some(seed) = s.strip_prefix("random:") {
            return seed
                .parse()
                .map(ZeroSpec::Random)
                .map_err(|_| format!("bad seed `{seed}`"));
        }
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("bad node id `{t}`"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(ZeroSpec::List)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinArg {
    pub node: usize,
    pub value: Complex64,
}

impl FromStr for PinArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("expected node=re,im, got `{s}`");
        let (node, value) = s.split_once('=').ok_or_else(bad)?;
        let (re, im) = value.split_once(',').ok_or_else(bad)?;
        let parse = |t: &str| t.trim().parse::<f64>().ok().filter(|v| v.is_finite());
        Ok(PinArg {
            node: node.trim().parse().map_err(|_| bad())?,
            value: Complex64::new(parse(re).ok_or_else(bad)?, parse(im).ok_or_else(bad)?),
        })
    }
}

/// A search budget, written either as an integer or as `base^exp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetArg(pub u64);

impl FromStr for BudgetArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("bad budget `{s}`");
        let value = match s.split_once('^') {
            Some((base, exp)) => {
                let base: u64 = base.trim().parse().map_err(|_| bad())?;
                let exp: u32 = exp.trim().parse().map_err(|_| bad())?;
                base.checked_pow(exp).ok_or_else(bad)?
            }
            None => s.trim().parse().map_err(|_| bad())?,
        };
        Ok(BudgetArg(value))
    }
}
