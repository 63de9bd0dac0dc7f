//! Datetime layouts accepted by type inference and converted to epoch
//! seconds for the numeric metadata statistics.
//!
//! Parsing is deliberately lenient about the calendar: `1970-02-31` is a
//! date-shaped token and is accepted, with the day clamped to the last day
//! of the month when converting to a timestamp.

use chrono::{NaiveDate, NaiveDateTime, NaiveTime};
use once_cell::sync::Lazy;
use regex::{Captures, Regex};

/// Alternation of English month names and their abbreviations.
pub const MONTH_NAME: &str = "Jan(?:uary)?|Feb(?:ruary)?|Mar(?:ch)?|Apr(?:il)?|May|Jun(?:e)?|Jul(?:y)?|Aug(?:ust)?|Sep(?:t(?:ember)?)?|Oct(?:ober)?|Nov(?:ember)?|Dec(?:ember)?";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DateLayout {
    /// `YYYY-MM-DD`
    IsoDash,
    /// `YYYY/MM/DD`
    IsoSlash,
    /// `MM/DD/YYYY`
    MonthDayYear,
    /// `DD/MM/YYYY`
    DayMonthYear,
    /// `MM/DD/YY`
    MonthDayShortYear,
    /// `MM-DD-YYYY`
    MonthDayYearDash,
    /// `YYYY-MM-DD hh:mm:ss`
    IsoDateTime,
    /// `MonthName DD YYYY`
    MonthNameDayYear,
    /// `Mon. YYYY`
    MonthNameYear,
    /// `MM/YYYY`
    MonthYear,
}

impl DateLayout {
    /// Layouts in the order they are tried.
    pub const ALL: [DateLayout; 10] = [
        DateLayout::IsoDash,
        DateLayout::IsoSlash,
        DateLayout::MonthDayYear,
        DateLayout::DayMonthYear,
        DateLayout::MonthDayShortYear,
        DateLayout::MonthDayYearDash,
        DateLayout::IsoDateTime,
        DateLayout::MonthNameDayYear,
        DateLayout::MonthNameYear,
        DateLayout::MonthYear,
    ];
}

struct LayoutRule {
    layout: DateLayout,
    re: Regex,
}

fn rule(layout: DateLayout, src: &str) -> LayoutRule {
    LayoutRule {
        layout,
        re: Regex::new(src).expect("datetime layout regex"),
    }
}

static RULES: Lazy<Vec<LayoutRule>> = Lazy::new(|| {
    let mn = MONTH_NAME;
    vec![
        rule(DateLayout::IsoDash, r"^(?P<y>\d{4})-(?P<m>\d{1,2})-(?P<d>\d{1,2})$"),
        rule(DateLayout::IsoSlash, r"^(?P<y>\d{4})/(?P<m>\d{1,2})/(?P<d>\d{1,2})$"),
        rule(DateLayout::MonthDayYear, r"^(?P<m>\d{1,2})/(?P<d>\d{1,2})/(?P<y>\d{4})$"),
        rule(DateLayout::DayMonthYear, r"^(?P<d>\d{1,2})/(?P<m>\d{1,2})/(?P<y>\d{4})$"),
        rule(DateLayout::MonthDayShortYear, r"^(?P<m>\d{1,2})/(?P<d>\d{1,2})/(?P<yy>\d{2})$"),
        rule(DateLayout::MonthDayYearDash, r"^(?P<m>\d{1,2})-(?P<d>\d{1,2})-(?P<y>\d{4})$"),
        rule(
            DateLayout::IsoDateTime,
            r"^(?P<y>\d{4})-(?P<m>\d{1,2})-(?P<d>\d{1,2})[ T](?P<hh>\d{1,2}):(?P<mi>\d{2})(?::(?P<ss>\d{2}))?$",
        ),
        rule(
            DateLayout::MonthNameDayYear,
            &format!(r"(?i)^(?P<mn>{mn})\.?\s+(?P<d>\d{{1,2}}),?\s+(?P<y>\d{{4}})$"),
        ),
        rule(
            DateLayout::MonthNameYear,
            &format!(r"(?i)^(?P<mn>{mn})\.?,?\s+(?P<y>\d{{4}})$"),
        ),
        rule(DateLayout::MonthYear, r"^(?P<m>\d{1,2})/(?P<y>\d{4})$"),
    ]
});

fn month_from_name(name: &str) -> Option<u32> {
    let lower = name.to_ascii_lowercase();
    let idx = [
        "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec",
    ]
    .iter()
    .position(|m| lower.starts_with(m))?;
    Some(idx as u32 + 1)
}

fn num(caps: &Captures<'_>, name: &str) -> Option<u32> {
    caps.name(name).and_then(|m| m.as_str().parse().ok())
}

/// Two-digit years at or below this pivot are taken as 20xx.
const SHORT_YEAR_PIVOT: u32 = 29;

fn build(caps: &Captures<'_>) -> Option<NaiveDateTime> {
    let year = match num(caps, "y") {
        Some(y) => y as i32,
        None => {
            let yy = num(caps, "yy")?;
            if yy <= SHORT_YEAR_PIVOT {
                2000 + yy as i32
            } else {
                1900 + yy as i32
            }
        }
    };
    let month = match caps.name("mn") {
        Some(m) => month_from_name(m.as_str())?,
        None => num(caps, "m")?,
    };
    let day = num(caps, "d").unwrap_or(1);
    if !(1..=12).contains(&month) || !(1..=31).contains(&day) {
        return None;
    }
    // Clamp impossible days such as Feb 31 to the end of the month.
    let date = (28..=day.max(28))
        .rev()
        .find_map(|d| NaiveDate::from_ymd_opt(year, month, d.min(day)))?;
    let hh = num(caps, "hh").unwrap_or(0);
    let mi = num(caps, "mi").unwrap_or(0);
    let ss = num(caps, "ss").unwrap_or(0);
    let time = NaiveTime::from_hms_opt(hh, mi, ss)?;
    Some(date.and_time(time))
}

/// Parse a token against the accepted layouts in order, returning the first
/// layout that yields a valid timestamp.
pub fn parse_datetime(token: &str) -> Option<(DateLayout, NaiveDateTime)> {
    let token = token.trim();
    if token.len() < 6 || token.len() > 32 {
        return None;
    }
    RULES.iter().find_map(|r| {
        let caps = r.re.captures(token)?;
        build(&caps).map(|dt| (r.layout, dt))
    })
}

pub fn is_datetime(token: &str) -> bool {
    parse_datetime(token).is_some()
}

/// Seconds since the Unix epoch (negative before 1970).
pub fn epoch_seconds(token: &str) -> Option<f64> {
    parse_datetime(token).map(|(_, dt)| dt.and_utc().timestamp() as f64)
}
