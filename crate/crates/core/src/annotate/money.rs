//! Monetary value recognition and normalization.
//!
//! Accepted shapes, over tokens:
//!
//! ```text
//! money    = prefix amount | amount postfix
//! prefix   = symbol | country "$" | code            ($, US$, €, USD ...)
//! postfix  = name | code                            (euros, US dollars, yen, EUR ...)
//! amount   = numeral [hundred] [scale] | words
//! words    = number words up to the trillions ("two billion", "forty-five
//!            million", "one hundred and twenty thousand", "a billion")
//! ```

use std::str::FromStr;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::tokens::{Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonetaryValue {
    #[serde(with = "rust_decimal::serde::str")]
    pub amount: Decimal,
    pub currency: String,
    pub char_span: (usize, usize),
    pub raw_text: String,
}

pub struct Currency {
    pub code: &'static str,
    pub symbols: &'static [&'static str],
    /// lowercase, space-separated token sequences
    pub names: &'static [&'static str],
}

pub const CURRENCIES: &[Currency] = &[
    Currency {
        code: "USD",
        symbols: &["$", "US$", "U.S.$"],
        names: &[
            "dollar",
            "dollars",
            "us dollar",
            "us dollars",
            "u.s. dollar",
            "u.s. dollars",
            "american dollars",
        ],
    },
    Currency {
        code: "EUR",
        symbols: &["€"],
        names: &["euro", "euros"],
    },
    Currency {
        code: "GBP",
        symbols: &["£"],
        names: &[
            "pound",
            "pounds",
            "pound sterling",
            "pounds sterling",
            "british pound",
            "british pounds",
            "sterling",
        ],
    },
    Currency {
        code: "JPY",
        symbols: &["¥"],
        names: &["yen", "japanese yen"],
    },
    Currency {
        code: "CNY",
        symbols: &[],
        names: &["yuan", "renminbi", "chinese yuan"],
    },
    Currency {
        code: "CHF",
        symbols: &[],
        names: &["swiss franc", "swiss francs"],
    },
    Currency {
        code: "CAD",
        symbols: &["C$"],
        names: &["canadian dollar", "canadian dollars"],
    },
    Currency {
        code: "AUD",
        symbols: &["A$"],
        names: &["australian dollar", "australian dollars"],
    },
    Currency {
        code: "NZD",
        symbols: &["NZ$"],
        names: &["new zealand dollar", "new zealand dollars"],
    },
    Currency {
        code: "HKD",
        symbols: &["HK$"],
        names: &["hong kong dollar", "hong kong dollars"],
    },
    Currency {
        code: "SGD",
        symbols: &["S$"],
        names: &["singapore dollar", "singapore dollars"],
    },
    Currency {
        code: "INR",
        symbols: &["₹"],
        names: &["rupee", "rupees", "indian rupee", "indian rupees"],
    },
    Currency {
        code: "RUB",
        symbols: &["₽"],
        names: &["ruble", "rubles", "rouble", "roubles"],
    },
    Currency {
        code: "KRW",
        symbols: &["₩"],
        names: &["korean won", "south korean won"],
    },
    Currency {
        code: "BRL",
        symbols: &["R$"],
        names: &["reais", "brazilian real", "brazilian reais"],
    },
    Currency {
        code: "MXN",
        symbols: &[],
        names: &["peso", "pesos", "mexican peso", "mexican pesos"],
    },
    Currency {
        code: "SEK",
        symbols: &[],
        names: &["kronor", "swedish krona", "swedish kronor"],
    },
    Currency {
        code: "NOK",
        symbols: &[],
        names: &["norwegian krone", "norwegian kroner"],
    },
    Currency {
        code: "DKK",
        symbols: &[],
        names: &["danish krone", "danish kroner"],
    },
    Currency {
        code: "ZAR",
        symbols: &[],
        names: &["south african rand", "south african rands"],
    },
    Currency {
        code: "ILS",
        symbols: &["₪"],
        names: &["shekel", "shekels", "israeli shekel", "israeli shekels"],
    },
];

pub fn currency(code: &str) -> Option<&'static Currency> {
    CURRENCIES.iter().find(|c| c.code == code)
}

fn unit_value(word: &str) -> Option<u32> {
    const UNITS: &[&str] = &[
        "zero",
        "one",
        "two",
        "three",
        "four",
        "five",
        "six",
        "seven",
        "eight",
        "nine",
        "ten",
        "eleven",
        "twelve",
        "thirteen",
        "fourteen",
        "fifteen",
        "sixteen",
        "seventeen",
        "eighteen",
        "nineteen",
    ];
    UNITS.iter().position(|w| *w == word).map(|v| v as u32)
}

fn tens_value(word: &str) -> Option<u32> {
    const TENS: &[&str] = &[
        "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
    ];
    TENS.iter().position(|w| *w == word).map(|v| (v as u32 + 2) * 10)
}

/// thousand and up; the abbreviations only follow a numeral
fn scale_value(word: &str, after_numeral: bool) -> Option<u32> {
    let exp = match word {
        "thousand" => 3,
        "million" => 6,
        "billion" => 9,
        "trillion" => 12,
        "bn" | "bln" | "b" if after_numeral => 9,
        "mln" | "mn" | "m" if after_numeral => 6,
        "k" if after_numeral => 3,
        "tn" if after_numeral => 12,
        _ => return None,
    };
    Some(exp)
}

fn pow10(exp: u32) -> Decimal {
    Decimal::from_i128_with_scale(10i128.pow(exp), 0)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Last {
    Start,
    Article,
    Unit,
    Tens,
    Hundred,
    Scale,
    And,
}

/// A small number word or a hyphenated compound such as "forty-five".
fn small_word(word: &str) -> Option<(u32, Last)> {
    if let Some(v) = unit_value(word) {
        return Some((v, Last::Unit));
    }
    if let Some(v) = tens_value(word) {
        return Some((v, Last::Tens));
    }
    let (t, u) = word.split_once('-')?;
    let (t, u) = (tens_value(t)?, unit_value(u)?);
    (1..10).contains(&u).then_some((t + u, Last::Unit))
}

/// Parses an amount starting at `i`; returns the value and the index past it.
pub(crate) fn parse_amount(tokens: &[Token], i: usize) -> Option<(Decimal, usize)> {
    let first = tokens.get(i)?;
    if first.kind == TokenKind::Number {
        let mut value = Decimal::from_str(&first.text.replace(',', "")).ok()?;
        let mut j = i + 1;
        if tokens.get(j).is_some_and(|t| t.is("hundred")) {
            value *= Decimal::from(100);
            j += 1;
        }
        if let Some(t) = tokens.get(j) {
            let glued = t.start == tokens[j - 1].end;
            let abbrev = matches!(t.lower.as_str(), "m" | "k" | "b");
            if let Some(exp) = scale_value(&t.lower, true) {
                if glued || !abbrev {
                    value *= pow10(exp);
                    j += 1;
                }
            }
        }
        return Some((value, j));
    }
    parse_number_words(tokens, i)
}

fn parse_number_words(tokens: &[Token], i: usize) -> Option<(Decimal, usize)> {
    let mut total = Decimal::ZERO;
    let mut current: u64 = 0;
    let mut last = Last::Start;
    let mut last_scale = u32::MAX;
    let mut j = i;
    let mut end = i;
    while let Some(t) = tokens.get(j) {
        let w = t.lower.as_str();
        let next_is_number_word = || tokens.get(j + 1).is_some_and(|n| small_word(&n.lower).is_some());
        let step = if let Some((v, kind)) = small_word(w) {
            let ok = match kind {
                Last::Unit if v < 10 => {
                    matches!(last, Last::Start | Last::Tens | Last::Hundred | Last::Scale | Last::And)
                }
                _ => matches!(last, Last::Start | Last::Hundred | Last::Scale | Last::And),
            };
            if !ok {
                break;
            }
            current += v as u64;
            kind
        } else if w == "hundred" {
            if !matches!(last, Last::Unit | Last::Article) || current >= 100 {
                break;
            }
            current = current.max(1) * 100;
            Last::Hundred
        } else if let Some(exp) = scale_value(w, false) {
            if !matches!(last, Last::Unit | Last::Tens | Last::Hundred | Last::Article) || exp >= last_scale {
                break;
            }
            total += Decimal::from(current.max(1)) * pow10(exp);
            current = 0;
            last_scale = exp;
            Last::Scale
        } else if (w == "a" || w == "an") && last == Last::Start {
            let next = tokens.get(j + 1).map(|n| n.lower.as_str());
            if !matches!(next, Some("hundred" | "thousand" | "million" | "billion" | "trillion")) {
                break;
            }
            current = 1;
            Last::Article
        } else if w == "and" && last == Last::Hundred && next_is_number_word() {
            Last::And
        } else {
            break;
        };
        last = step;
        j += 1;
        if step != Last::And && step != Last::Article {
            end = j;
        }
    }
    if end == i {
        return None;
    }
    Some((total + Decimal::from(current), end))
}

fn adjacent(a: &Token, b: &Token) -> bool {
    a.end == b.start
}

/// Matches a currency prefix at `i`: a symbol, a country-qualified dollar
/// sign such as "US$" (split across tokens), or a code.
fn match_prefix(tokens: &[Token], i: usize) -> Option<(&'static str, usize)> {
    let t = tokens.get(i)?;
    if t.kind == TokenKind::Word {
        if let Some(dollar) = tokens.get(i + 1) {
            if dollar.text == "$" && adjacent(t, dollar) {
                let joined = format!("{}$", t.text);
                for c in CURRENCIES {
                    if c.symbols.iter().any(|s| *s == joined) {
                        return Some((c.code, i + 2));
                    }
                }
            }
        }
        if t.text.len() == 3 && t.text.chars().all(|c| c.is_ascii_uppercase()) {
            if let Some(c) = currency(&t.text) {
                return Some((c.code, i + 1));
            }
        }
        return None;
    }
    CURRENCIES
        .iter()
        .find(|c| c.symbols.contains(&t.text.as_str()))
        .map(|c| (c.code, i + 1))
}

/// Longest currency name or a code starting at `i`.
fn match_postfix(tokens: &[Token], i: usize) -> Option<(&'static str, usize)> {
    let mut best: Option<(&'static str, usize)> = None;
    for c in CURRENCIES {
        for name in c.names {
            let parts: Vec<&str> = name.split(' ').collect();
            let matches = parts
                .iter()
                .enumerate()
                .all(|(k, p)| tokens.get(i + k).is_some_and(|t| t.lower == *p));
            if matches && best.is_none_or(|(_, end)| i + parts.len() > end) {
                best = Some((c.code, i + parts.len()));
            }
        }
    }
    if best.is_none() {
        let t = tokens.get(i)?;
        if t.text.len() == 3 && t.text.chars().all(|c| c.is_ascii_uppercase()) {
            if let Some(c) = currency(&t.text) {
                return Some((c.code, i + 1));
            }
        }
    }
    best
}

pub fn recognize_monetary_values(text: &str, tokens: &[Token]) -> Vec<MonetaryValue> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let found = match_prefix(tokens, i)
            .and_then(|(code, j)| parse_amount(tokens, j).map(|(amount, end)| (code, amount, end)))
            .or_else(|| {
                let (amount, j) = parse_amount(tokens, i)?;
                let (code, end) = match_postfix(tokens, j)?;
                Some((code, amount, end))
            });
        match found {
            Some((code, amount, end)) if amount > Decimal::ZERO => {
                let span = (tokens[i].start, tokens[end - 1].end);
                out.push(MonetaryValue {
                    amount: amount.normalize(),
                    currency: code.to_string(),
                    char_span: span,
                    raw_text: text[span.0..span.1].to_string(),
                });
                i = end;
            }
            _ => i += 1,
        }
    }
    out
}

/// Parses a whole string; handy in tests and for CLI lookups.
pub fn parse_money(text: &str) -> Vec<MonetaryValue> {
    recognize_monetary_values(text, &super::tokens::tokenize(text))
}
