//! Temporal expressions resolved against the article's publication date.
//!
//! Absolute: `6/7/2015`, `2015-06-07`, `October 5, 2006`, `5 October 2006`,
//! `October 2006`, bare years. Anchored: `October 5`, `in October`,
//! `yesterday`, `two days ago`, `last year`, `this month`, `next week`.
//! Dates without a day are stored on the first day of their month or year
//! along with their granularity.

use chrono::{Datelike, Days, Months, NaiveDate};
use serde::{Deserialize, Serialize};

use super::money::parse_amount;
use super::tokens::{Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Year,
    Month,
    Day,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DateMention {
    pub date: NaiveDate,
    pub granularity: Granularity,
    pub char_span: (usize, usize),
    pub is_relative: bool,
}

/// Truncate a date to the given granularity.
pub fn truncate(date: NaiveDate, granularity: Granularity) -> NaiveDate {
    match granularity {
        Granularity::Day => date,
        Granularity::Month => date.with_day(1).expect("day 1 exists"),
        Granularity::Year => NaiveDate::from_ymd_opt(date.year(), 1, 1).expect("Jan 1 exists"),
    }
}

/// Reading order for ambiguous numeric dates such as 6/7/2015.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NumericDateOrder {
    #[default]
    MonthFirst,
    DayFirst,
}

#[derive(Debug, Default)]
pub struct DateScan {
    pub mentions: Vec<DateMention>,
    pub diagnostics: Vec<String>,
}

const MONTHS: &[(&str, u32)] = &[
    ("january", 1),
    ("jan", 1),
    ("february", 2),
    ("feb", 2),
    ("march", 3),
    ("mar", 3),
    ("april", 4),
    ("apr", 4),
    ("may", 5),
    ("june", 6),
    ("jun", 6),
    ("july", 7),
    ("jul", 7),
    ("august", 8),
    ("aug", 8),
    ("september", 9),
    ("sept", 9),
    ("sep", 9),
    ("october", 10),
    ("oct", 10),
    ("november", 11),
    ("nov", 11),
    ("december", 12),
    ("dec", 12),
];

/// Words that make a bare month name temporal ("in May", "since March").
const MONTH_CONTEXT: &[&str] = &[
    "in", "since", "until", "till", "by", "during", "last", "this", "next", "early", "late", "mid", "of", "from",
    "through", "to", "before", "after", "on", "around",
];

const SCALE_WORDS: &[&str] = &[
    "thousand",
    "million",
    "billion",
    "trillion",
    "bn",
    "bln",
    "mln",
    "mn",
    "m",
    "percent",
    "shares",
    "employees",
    "jobs",
    "workers",
    "people",
];

fn month_of(token: &Token) -> Option<u32> {
    if !token.is_capitalized() {
        return None;
    }
    MONTHS.iter().find(|(n, _)| *n == token.lower).map(|&(_, m)| m)
}

fn number(token: Option<&Token>) -> Option<u32> {
    let t = token?;
    if t.kind != TokenKind::Number || t.text.contains(['.', ',']) {
        return None;
    }
    t.text.parse().ok()
}

fn year_of(token: Option<&Token>) -> Option<i32> {
    let t = token?;
    let n = number(Some(t))?;
    (t.text.len() == 4 && (1900..=2099).contains(&n)).then_some(n as i32)
}

fn glued(tokens: &[Token], from: usize, to: usize) -> bool {
    (from..to).all(|k| tokens.get(k + 1).is_some_and(|n| n.start == tokens[k].end))
}

struct Scanner<'a> {
    tokens: &'a [Token],
    anchor: NaiveDate,
    order: NumericDateOrder,
    scan: DateScan,
}

/// A match: resolved date (or a reason it failed), granularity, relative flag, end index.
type Hit = (Result<NaiveDate, String>, Granularity, bool, usize);

impl<'a> Scanner<'a> {
    fn tok(&self, i: usize) -> Option<&'a Token> {
        self.tokens.get(i)
    }

    fn word_is(&self, i: usize, words: &[&str]) -> bool {
        self.tok(i).is_some_and(|t| words.contains(&t.lower.as_str()))
    }

    /// skips an abbreviation period after a month name
    fn after_month(&self, i: usize) -> usize {
        if self.tok(i).is_some_and(|t| t.text == ".") {
            i + 1
        } else {
            i
        }
    }

    fn ymd(y: i32, m: u32, d: u32) -> Result<NaiveDate, String> {
        NaiveDate::from_ymd_opt(y, m, d).ok_or_else(|| format!("invalid calendar date {y}-{m:02}-{d:02}"))
    }

    /// latest (year, month) not after the anchor
    fn nearest_month(&self, month: u32) -> Result<NaiveDate, String> {
        let year = if month <= self.anchor.month() {
            self.anchor.year()
        } else {
            self.anchor.year() - 1
        };
        Self::ymd(year, month, 1)
    }

    fn numeric(&self, i: usize) -> Option<Hit> {
        let t = self.tokens;
        // M/D/YYYY, M/D/YY
        if t.get(i + 1).is_some_and(|s| s.text == "/")
            && t.get(i + 3).is_some_and(|s| s.text == "/")
            && glued(t, i, i + 4)
        {
            let a = number(t.get(i))?;
            let b = number(t.get(i + 2))?;
            let y = number(t.get(i + 4))?;
            let year = match t[i + 4].text.len() {
                4 => y as i32,
                2 if y < 50 => 2000 + y as i32,
                2 => 1900 + y as i32,
                _ => return None,
            };
            let (m, d) = match self.order {
                NumericDateOrder::MonthFirst => (a, b),
                NumericDateOrder::DayFirst => (b, a),
            };
            return Some((Self::ymd(year, m, d), Granularity::Day, false, i + 5));
        }
        // YYYY-MM-DD
        if t.get(i + 1).is_some_and(|s| s.text == "-")
            && t.get(i + 3).is_some_and(|s| s.text == "-")
            && glued(t, i, i + 4)
        {
            let y = year_of(t.get(i))?;
            let m = number(t.get(i + 2))?;
            let d = number(t.get(i + 4))?;
            return Some((Self::ymd(y, m, d), Granularity::Day, false, i + 5));
        }
        None
    }

    fn month_first(&self, i: usize) -> Option<Hit> {
        let month = month_of(self.tok(i)?)?;
        let j = self.after_month(i + 1);
        if let Some(day) = number(self.tok(j)).filter(|d| (1..=31).contains(d)) {
            let mut k = j + 1;
            if self.tok(k).is_some_and(|t| t.text == ",") {
                k += 1;
            }
            if let Some(year) = year_of(self.tok(k)) {
                return Some((Self::ymd(year, month, day), Granularity::Day, false, k + 1));
            }
            // no year: nearest such day not after the anchor
            let this_year = Self::ymd(self.anchor.year(), month, day);
            let date = match this_year {
                Ok(d) if d <= self.anchor => Ok(d),
                _ => Self::ymd(self.anchor.year() - 1, month, day),
            };
            return Some((date, Granularity::Day, true, j + 1));
        }
        if let Some(year) = year_of(self.tok(j)) {
            return Some((Self::ymd(year, month, 1), Granularity::Month, false, j + 1));
        }
        let ambiguous = matches!(month, 3 | 5) && self.tok(i).is_some_and(|t| !t.text.contains('.'));
        let has_context = i > 0 && self.word_is(i - 1, MONTH_CONTEXT);
        if ambiguous && !has_context {
            return None;
        }
        if !has_context && !self.word_is(i.wrapping_sub(1), &[]) && i > 0 && self.tokens[i - 1].is_capitalized() {
            // part of a name such as "October Films"
            return None;
        }
        let date = if i > 0 && self.word_is(i - 1, &["next"]) {
            let year = if month >= self.anchor.month() {
                self.anchor.year()
            } else {
                self.anchor.year() + 1
            };
            Self::ymd(year, month, 1)
        } else {
            self.nearest_month(month)
        };
        Some((date, Granularity::Month, true, self.after_month(i + 1)))
    }

    fn day_first(&self, i: usize) -> Option<Hit> {
        let day = number(self.tok(i)).filter(|d| (1..=31).contains(d))?;
        let month = month_of(self.tok(i + 1)?)?;
        let mut k = self.after_month(i + 2);
        if self.tok(k).is_some_and(|t| t.text == ",") {
            k += 1;
        }
        let year = year_of(self.tok(k))?;
        Some((Self::ymd(year, month, day), Granularity::Day, false, k + 1))
    }

    fn relative(&self, i: usize) -> Option<Hit> {
        let t = self.tok(i)?;
        let a = self.anchor;
        let day = |d: Option<NaiveDate>| d.ok_or_else(|| "date out of range".to_string());
        match t.lower.as_str() {
            "yesterday" => return Some((day(a.checked_sub_days(Days::new(1))), Granularity::Day, true, i + 1)),
            "today" => return Some((Ok(a), Granularity::Day, true, i + 1)),
            "tomorrow" => return Some((day(a.checked_add_days(Days::new(1))), Granularity::Day, true, i + 1)),
            "last" | "this" | "next" => {
                let unit = self.tok(i + 1)?.lower.as_str();
                let shift: i32 = match t.lower.as_str() {
                    "last" => -1,
                    "this" => 0,
                    _ => 1,
                };
                return self.shift(unit, shift).map(|(d, g)| (d, g, true, i + 2));
            }
            _ => {}
        }
        // N units ago
        let (n, j) = if t.is("a") || t.is("an") {
            (1u32, i + 1)
        } else {
            let (amount, j) = parse_amount(self.tokens, i)?;
            if amount.fract() != rust_decimal::Decimal::ZERO || amount > rust_decimal::Decimal::from(1000) {
                return None;
            }
            (u32::try_from(amount.mantissa()).ok()?, j)
        };
        let unit = self.tok(j)?.lower.as_str();
        if !self.word_is(j + 1, &["ago"]) {
            return None;
        }
        self.shift(unit, -(n as i32)).map(|(d, g)| (d, g, true, j + 2))
    }

    fn shift(&self, unit: &str, n: i32) -> Option<(Result<NaiveDate, String>, Granularity)> {
        let a = self.anchor;
        let out_of_range = || "date out of range".to_string();
        let months = |m: i32| {
            let base = truncate(a, Granularity::Month);
            if m >= 0 {
                base.checked_add_months(Months::new(m as u32))
            } else {
                base.checked_sub_months(Months::new((-m) as u32))
            }
        };
        let days = |d: i64| {
            if d >= 0 {
                a.checked_add_days(Days::new(d as u64))
            } else {
                a.checked_sub_days(Days::new((-d) as u64))
            }
        };
        let (date, g) = match unit {
            "day" | "days" => (days(n as i64), Granularity::Day),
            "week" | "weeks" => (days(7 * n as i64), Granularity::Day),
            "month" | "months" => (months(n), Granularity::Month),
            "quarter" | "quarters" => (months(3 * n), Granularity::Month),
            "year" | "years" => (NaiveDate::from_ymd_opt(a.year() + n, 1, 1), Granularity::Year),
            _ => return None,
        };
        Some((date.ok_or_else(out_of_range), g))
    }

    fn bare_year(&self, i: usize) -> Option<Hit> {
        let year = year_of(self.tok(i))?;
        if i > 0
            && matches!(self.tokens[i - 1].kind, TokenKind::Symbol)
            && self.tokens[i - 1].text != "("
            && self.tokens[i - 1].text != ","
        {
            // "$2004", "#2004"
            return None;
        }
        if self.word_is(i + 1, SCALE_WORDS) || self.tok(i + 1).is_some_and(|t| t.text == "%") {
            return None;
        }
        Some((Self::ymd(year, 1, 1), Granularity::Year, false, i + 1))
    }

    fn run(mut self) -> DateScan {
        let mut i = 0;
        while i < self.tokens.len() {
            let hit = self
                .numeric(i)
                .or_else(|| self.month_first(i))
                .or_else(|| self.day_first(i))
                .or_else(|| self.relative(i))
                .or_else(|| self.bare_year(i));
            match hit {
                Some((date, granularity, is_relative, end)) => {
                    let span = (self.tokens[i].start, self.tokens[end - 1].end);
                    match date {
                        Ok(date) => self.scan.mentions.push(DateMention {
                            date: truncate(date, granularity),
                            granularity,
                            char_span: span,
                            is_relative,
                        }),
                        Err(why) => self
                            .scan
                            .diagnostics
                            .push(format!("bytes {}..{}: {why}", span.0, span.1)),
                    }
                    i = end;
                }
                None => i += 1,
            }
        }
        self.scan
    }
}

pub fn extract_dates(tokens: &[Token], publication_date: NaiveDate, order: NumericDateOrder) -> DateScan {
    Scanner {
        tokens,
        anchor: publication_date,
        order,
        scan: DateScan::default(),
    }
    .run()
}
