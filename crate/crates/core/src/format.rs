//! The line-oriented text format for markets and raw instances, and the
//! command-line allocation and price specs.
//!
//! Agents and items are 1-indexed in text and 0-indexed in memory. `#`
//! starts a comment. A file may open with `format 1` and a
//! `prng <tag> <seed>` line recording how it was generated; serialization
//! always writes the `format` line.
//!
//! ```text
//! format 1
//! market 2 3
//! agent 1 unit-demand 3 5 0
//! agent 2 k-demand 2 2
//!   bundle 1 4
//!   bundle 2 3 7
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Signed;

use crate::bundle::ItemSet;
use crate::error::{Error, Result};
use crate::market::{Allocation, Market, Pricing, Valuation, Value};
use crate::reductions::{ThreeDm3Instance, ThreePartitionInstance};

pub const FORMAT_VERSION: u32 = 1;

/// The generator that produced a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrngHeader {
    pub tag: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceFile {
    pub version: u32,
    pub prng: Option<PrngHeader>,
    pub market: Market,
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    line: usize,
    column: usize,
    text: &'a str,
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Non-empty lines as token lists, comments stripped.
struct Lines<'a> {
    lines: Vec<Vec<Token<'a>>>,
    pos: usize,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Lines<'a> {
        let mut lines = Vec::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            last_line = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            let mut tokens = Vec::new();
            let mut start = None;
            for (col, ch) in content.char_indices().chain([(content.len(), ' ')]) {
                match (ch.is_whitespace(), start) {
                    (false, None) => start = Some(col),
                    (true, Some(s)) => {
                        tokens.push(Token {
                            line: idx + 1,
                            column: s + 1,
                            text: &content[s..col],
                        });
                        start = None;
                    }
                    _ => {}
                }
            }
            if !tokens.is_empty() {
                lines.push(tokens);
            }
        }
        Lines {
            lines,
            pos: 0,
            last_line,
        }
    }

    fn peek(&self) -> Option<&[Token<'a>]> {
        self.lines.get(self.pos).map(Vec::as_slice)
    }

    fn next_line(&mut self, what: &str) -> Result<Vec<Token<'a>>> {
        match self.lines.get(self.pos) {
            Some(line) => {
                self.pos += 1;
                Ok(line.clone())
            }
            None => Err(parse_error(
                self.last_line + 1,
                1,
                format!("unexpected end of input, expected {what}"),
            )),
        }
    }

    fn expect_end(&self) -> Result<()> {
        match self.peek() {
            Some(line) => Err(parse_error(line[0].line, line[0].column, "unexpected trailing content")),
            None => Ok(()),
        }
    }
}

/// A cursor over the tokens of one line.
struct Fields<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
}

impl<'a> Fields<'a> {
    fn new(tokens: Vec<Token<'a>>) -> Fields<'a> {
        Fields { tokens, pos: 0 }
    }

    fn end_position(&self) -> (usize, usize) {
        let last = self.tokens.last().expect("lines are non-empty");
        (last.line, last.column + last.text.len())
    }

    fn next(&mut self, what: &str) -> Result<Token<'a>> {
        match self.tokens.get(self.pos) {
            Some(&t) => {
                self.pos += 1;
                Ok(t)
            }
            None => {
                let (line, column) = self.end_position();
                Err(parse_error(line, column, format!("missing {what}")))
            }
        }
    }

    fn keyword(&mut self, expected: &str) -> Result<()> {
        let t = self.next(&format!("`{expected}`"))?;
        if t.text != expected {
            return Err(parse_error(
                t.line,
                t.column,
                format!("expected `{expected}`, found `{}`", t.text),
            ));
        }
        Ok(())
    }

    fn number(&mut self, what: &str) -> Result<u64> {
        let t = self.next(what)?;
        t.text.parse::<u64>().map_err(|_| {
            parse_error(
                t.line,
                t.column,
                format!("expected {what} as a nonnegative integer, found `{}`", t.text),
            )
        })
    }

    fn count(&mut self, what: &str) -> Result<usize> {
        let t = self.tokens.get(self.pos).copied();
        let n = self.number(what)?;
        usize::try_from(n).map_err(|_| {
            let t = t.unwrap();
            parse_error(t.line, t.column, format!("{what} too large"))
        })
    }

    /// A 1-indexed position in `[1, limit]`, returned 0-indexed.
    fn index(&mut self, what: &str, limit: usize) -> Result<usize> {
        let t = self.tokens.get(self.pos).copied();
        let n = self.number(what)?;
        if n == 0 || n > limit as u64 {
            let t = t.unwrap();
            return Err(parse_error(
                t.line,
                t.column,
                format!("{what} {n} outside [1, {limit}]"),
            ));
        }
        Ok(n as usize - 1)
    }

    fn numbers(&mut self, what: &str, count: usize) -> Result<Vec<u64>> {
        (0..count).map(|_| self.number(what)).collect()
    }

    fn remaining(&self) -> usize {
        self.tokens.len() - self.pos
    }

    fn end(&self) -> Result<()> {
        match self.tokens.get(self.pos) {
            Some(t) => Err(parse_error(
                t.line,
                t.column,
                format!("unexpected `{}`", t.text),
            )),
            None => Ok(()),
        }
    }
}

fn parse_header(lines: &mut Lines<'_>) -> Result<(u32, Option<PrngHeader>)> {
    let mut version = FORMAT_VERSION;
    if lines.peek().is_some_and(|l| l[0].text == "format") {
        let mut f = Fields::new(lines.next_line("format line")?);
        f.keyword("format")?;
        let t = f.tokens[f.pos.min(f.tokens.len() - 1)];
        let v = f.number("format version")?;
        if v != u64::from(FORMAT_VERSION) {
            return Err(parse_error(
                t.line,
                t.column,
                format!("unsupported format version {v}"),
            ));
        }
        f.end()?;
        version = v as u32;
    }
    let mut prng = None;
    if lines.peek().is_some_and(|l| l[0].text == "prng") {
        let mut f = Fields::new(lines.next_line("prng line")?);
        f.keyword("prng")?;
        let tag = f.next("generator tag")?.text.to_string();
        let seed = f.number("seed")?;
        f.end()?;
        prng = Some(PrngHeader { tag, seed });
    }
    Ok((version, prng))
}

fn write_header(out: &mut String, prng: &Option<PrngHeader>) {
    writeln!(out, "format {FORMAT_VERSION}").unwrap();
    if let Some(p) = prng {
        writeln!(out, "prng {} {}", p.tag, p.seed).unwrap();
    }
}

fn parse_agent<'a>(
    lines: &mut Lines<'a>,
    mut f: Fields<'a>,
    m: usize,
) -> Result<Valuation> {
    let class = f.next("valuation class")?;
    let valuation = match class.text {
        "unit-demand" => Valuation::UnitDemand(f.numbers("value", m)?),
        "additive" => Valuation::Additive(f.numbers("value", m)?),
        "budget-additive" => {
            let budget = f.number("budget")?;
            Valuation::BudgetAdditive {
                budget,
                values: f.numbers("value", m)?,
            }
        }
        "single-minded" => {
            let value = f.number("value")?;
            f.keyword(":")?;
            let count = f.remaining();
            let bundle = parse_bundle(&mut f, m, count)?;
            if bundle.is_empty() {
                let (line, column) = f.end_position();
                return Err(parse_error(line, column, "single-minded bundle is empty"));
            }
            Valuation::SingleMinded { bundle, value }
        }
        "pair" => {
            let a = f.index("item", m)?;
            let b = f.index("item", m)?;
            let value_a = f.number("value")?;
            let value_b = f.number("value")?;
            let value_ab = f.number("value")?;
            Valuation::pair(a, b, value_a, value_b, value_ab)
        }
        "k-demand" => {
            let k = f.count("k")?;
            let t = f.count("entry count")?;
            f.end()?;
            let mut entries = BTreeMap::new();
            for _ in 0..t {
                let mut e = Fields::new(lines.next_line("bundle line")?);
                e.keyword("bundle")?;
                let first = e.tokens[0];
                if e.remaining() < 2 {
                    let (line, column) = e.end_position();
                    return Err(parse_error(line, column, "bundle needs items and a value"));
                }
                let count = e.remaining() - 1;
                let bundle = parse_bundle(&mut e, m, count)?;
                let value = e.number("value")?;
                if entries.insert(bundle, value).is_some() {
                    return Err(parse_error(first.line, first.column, "duplicate bundle"));
                }
            }
            return Ok(Valuation::KDemandTable { k, entries });
        }
        "xos" => {
            let r = f.count("row count")?;
            f.end()?;
            let mut rows = Vec::with_capacity(r);
            for _ in 0..r {
                let mut row = Fields::new(lines.next_line("xos row")?);
                rows.push(row.numbers("value", m)?);
                row.end()?;
            }
            return Ok(Valuation::Xos { rows });
        }
        other => {
            return Err(parse_error(
                class.line,
                class.column,
                format!("unknown valuation class `{other}`"),
            ))
        }
    };
    f.end()?;
    Ok(valuation)
}

fn parse_bundle(f: &mut Fields<'_>, m: usize, count: usize) -> Result<ItemSet> {
    let mut bundle = ItemSet::EMPTY;
    for _ in 0..count {
        let t = f.tokens[f.pos];
        let item = f.index("item", m)?;
        if bundle.contains(item) {
            return Err(parse_error(t.line, t.column, format!("item {} repeated", item + 1)));
        }
        bundle.insert(item);
    }
    Ok(bundle)
}

/// Parses a market file, header included.
pub fn parse_instance(text: &str) -> Result<InstanceFile> {
    let mut lines = Lines::new(text);
    let (version, prng) = parse_header(&mut lines)?;
    let mut f = Fields::new(lines.next_line("`market` line")?);
    f.keyword("market")?;
    let n = f.count("agent count")?;
    let m_token = f.tokens.get(f.pos).copied();
    let m = f.count("item count")?;
    f.end()?;
    if m > crate::bundle::MAX_ITEMS {
        let t = m_token.unwrap();
        return Err(parse_error(
            t.line,
            t.column,
            format!("at most {} items are supported", crate::bundle::MAX_ITEMS),
        ));
    }
    let mut valuations: Vec<Option<Valuation>> = vec![None; n];
    for _ in 0..n {
        let mut f = Fields::new(lines.next_line("`agent` line")?);
        f.keyword("agent")?;
        let t = f.tokens[f.pos.min(f.tokens.len() - 1)];
        let agent = f.index("agent", n)?;
        if valuations[agent].is_some() {
            return Err(parse_error(
                t.line,
                t.column,
                format!("agent {} defined twice", agent + 1),
            ));
        }
        valuations[agent] = Some(parse_agent(&mut lines, f, m)?);
    }
    lines.expect_end()?;
    let market = Market::new(m, valuations.into_iter().map(Option::unwrap).collect())?;
    Ok(InstanceFile {
        version,
        prng,
        market,
    })
}

pub fn parse_market(text: &str) -> Result<Market> {
    parse_instance(text).map(|f| f.market)
}

fn join(values: impl IntoIterator<Item = impl ToString>) -> String {
    values
        .into_iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn items_1(bundle: ItemSet) -> String {
    join(bundle.iter().map(|j| j + 1))
}

/// Canonical text of a market file.
pub fn serialize_instance(file: &InstanceFile) -> String {
    let mut out = String::new();
    write_header(&mut out, &file.prng);
    let market = &file.market;
    writeln!(out, "market {} {}", market.agent_count(), market.item_count()).unwrap();
    for (idx, v) in market.valuations().iter().enumerate() {
        let agent = idx + 1;
        match v {
            Valuation::UnitDemand(values) => {
                writeln!(out, "agent {agent} unit-demand {}", join(values)).unwrap()
            }
            Valuation::Additive(values) => {
                writeln!(out, "agent {agent} additive {}", join(values)).unwrap()
            }
            Valuation::BudgetAdditive { values, budget } => writeln!(
                out,
                "agent {agent} budget-additive {budget} {}",
                join(values)
            )
            .unwrap(),
            Valuation::SingleMinded { bundle, value } => writeln!(
                out,
                "agent {agent} single-minded {value} : {}",
                items_1(*bundle)
            )
            .unwrap(),
            Valuation::MultiMindedPair {
                a,
                b,
                value_a,
                value_b,
                value_ab,
            } => writeln!(
                out,
                "agent {agent} pair {} {} {value_a} {value_b} {value_ab}",
                a + 1,
                b + 1
            )
            .unwrap(),
            Valuation::KDemandTable { k, entries } => {
                writeln!(out, "agent {agent} k-demand {k} {}", entries.len()).unwrap();
                for (bundle, value) in entries {
                    writeln!(out, "  bundle {} {value}", items_1(*bundle)).unwrap();
                }
            }
            Valuation::Xos { rows } => {
                writeln!(out, "agent {agent} xos {}", rows.len()).unwrap();
                for row in rows {
                    writeln!(out, "  {}", join(row)).unwrap();
                }
            }
        }
    }
    out
}

pub fn serialize_market(market: &Market) -> String {
    serialize_instance(&InstanceFile {
        version: FORMAT_VERSION,
        prng: None,
        market: market.clone(),
    })
}

/// ```text
/// 3dm3 <q> <t>
/// triple <x> <y> <z>
/// ```
pub fn parse_3dm3(text: &str) -> Result<(ThreeDm3Instance, Option<PrngHeader>)> {
    let mut lines = Lines::new(text);
    let (_, prng) = parse_header(&mut lines)?;
    let mut f = Fields::new(lines.next_line("`3dm3` line")?);
    f.keyword("3dm3")?;
    let q = f.count("q")?;
    let t = f.count("triple count")?;
    f.end()?;
    if q == 0 {
        let (line, column) = f.end_position();
        return Err(parse_error(line, column, "q must be positive"));
    }
    let mut triples = Vec::with_capacity(t.min(1024));
    for _ in 0..t {
        let mut f = Fields::new(lines.next_line("`triple` line")?);
        f.keyword("triple")?;
        let x = f.index("x", q)?;
        let y = f.index("y", q)?;
        let z = f.index("z", q)?;
        f.end()?;
        triples.push([x, y, z]);
    }
    lines.expect_end()?;
    Ok((ThreeDm3Instance::new(q, triples)?, prng))
}

pub fn serialize_3dm3(instance: &ThreeDm3Instance, prng: &Option<PrngHeader>) -> String {
    let mut out = String::new();
    write_header(&mut out, prng);
    writeln!(out, "3dm3 {} {}", instance.q(), instance.triples().len()).unwrap();
    for t in instance.triples() {
        writeln!(out, "triple {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
    }
    out
}

/// ```text
/// 3partition <n> [strict]
/// values <a_1> ... <a_3n>
/// ```
pub fn parse_3partition(text: &str) -> Result<(ThreePartitionInstance, Option<PrngHeader>)> {
    let mut lines = Lines::new(text);
    let (_, prng) = parse_header(&mut lines)?;
    let mut f = Fields::new(lines.next_line("`3partition` line")?);
    f.keyword("3partition")?;
    let n = f.count("n")?;
    let strict = if f.remaining() > 0 {
        f.keyword("strict")?;
        true
    } else {
        false
    };
    f.end()?;
    let mut f = Fields::new(lines.next_line("`values` line")?);
    f.keyword("values")?;
    let count = f.remaining();
    let values = f.numbers("value", count)?;
    lines.expect_end()?;
    Ok((ThreePartitionInstance::new(values, n, strict)?, prng))
}

pub fn serialize_3partition(
    instance: &ThreePartitionInstance,
    prng: &Option<PrngHeader>,
) -> String {
    let mut out = String::new();
    write_header(&mut out, prng);
    let strict = if instance.is_strict() { " strict" } else { "" };
    writeln!(out, "3partition {}{strict}", instance.n()).unwrap();
    writeln!(out, "values {}", join(instance.values())).unwrap();
    out
}

fn spec_error(spec: &str, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line: 1,
        column,
        message: format!("in `{spec}`: {}", message.into()),
    }
}

/// `1:2,3;2:1` gives agent 1 items 2 and 3 and agent 2 item 1. Agents not
/// listed, or listed as `3:`, get nothing.
pub fn parse_allocation(spec: &str, agent_count: usize, item_count: usize) -> Result<Allocation> {
    let mut bundles: Vec<Option<ItemSet>> = vec![None; agent_count];
    let mut offset = 0;
    for part in spec.split(';') {
        let column = offset + 1;
        offset += part.len() + 1;
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (agent, items) = part
            .split_once(':')
            .ok_or_else(|| spec_error(spec, column, format!("`{part}` is not agent:items")))?;
        let agent: usize = agent
            .trim()
            .parse()
            .ok()
            .filter(|a| (1..=agent_count).contains(a))
            .ok_or_else(|| spec_error(spec, column, format!("bad agent `{agent}`")))?;
        if bundles[agent - 1].is_some() {
            return Err(spec_error(spec, column, format!("agent {agent} listed twice")));
        }
        let mut bundle = ItemSet::EMPTY;
        for item in items.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let j: usize = item
                .parse()
                .ok()
                .filter(|j| (1..=item_count).contains(j))
                .ok_or_else(|| spec_error(spec, column, format!("bad item `{item}`")))?;
            bundle.insert(j - 1);
        }
        bundles[agent - 1] = Some(bundle);
    }
    Allocation::new(
        item_count,
        bundles.into_iter().map(Option::unwrap_or_default).collect(),
    )
}

/// Inverse of [`parse_allocation`], listing every agent.
pub fn format_allocation(allocation: &Allocation) -> String {
    allocation
        .bundles()
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let items: Vec<String> = b.iter().map(|j| (j + 1).to_string()).collect();
            format!("{}:{}", i + 1, items.join(","))
        })
        .collect::<Vec<_>>()
        .join(";")
}

/// `0,3/2,1`: one nonnegative rational per item.
pub fn parse_prices(spec: &str, item_count: usize) -> Result<Pricing> {
    let mut prices = Vec::new();
    let mut offset = 0;
    for part in spec.split(',') {
        let column = offset + 1;
        offset += part.len() + 1;
        prices.push(parse_rational(part.trim()).ok_or_else(|| {
            spec_error(spec, column, format!("`{part}` is not a nonnegative rational"))
        })?);
    }
    if prices.len() != item_count {
        return Err(spec_error(
            spec,
            1,
            format!("{} prices for {item_count} items", prices.len()),
        ));
    }
    Pricing::new(prices)
}

fn parse_rational(text: &str) -> Option<Value> {
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, d),
        None => (text, "1"),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(num) || !digits(den) {
        return None;
    }
    let den: BigInt = den.parse().ok()?;
    if den.is_positive() {
        Some(Value::new(num.parse().ok()?, den))
    } else {
        None
    }
}

/// `num/den` in lowest terms with a positive denominator.
pub fn format_value(value: &Value) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

pub fn format_prices(pricing: &Pricing) -> String {
    pricing
        .prices()
        .iter()
        .map(format_value)
        .collect::<Vec<_>>()
        .join(",")
}
