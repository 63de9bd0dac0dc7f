use chrono::{Datelike, Duration, NaiveDate};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma, LogNormal, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::pools::*;
use crate::category::PhiCategory;

/// Value generator for one column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    GivenName,
    FullName,
    Address,
    PostalCode,
    EventDate,
    BirthDate,
    Age,
    Phone,
    Fax,
    Email,
    Ssn,
    Mrn,
    HealthPlanId,
    AccountNumber,
    Url,
    IpAddress,
    Sex,
    Race,
    Ethnicity,
    LabGaussian,
    LabLognormal,
    Dosage,
    Flag,
    VisitCount,
    Vital,
    Category,
}

const DATE_FORMATS: &[&str] = &[
    "iso",
    "iso_slash",
    "us",
    "eu",
    "us_short",
    "us_dash",
    "month_name",
    "month_year_abbrev",
    "month_year_numeric",
    "iso_datetime",
];
const PHONE_FORMATS: &[&str] = &["paren_space", "paren", "dash", "dot", "plain"];

impl Generator {
    pub const PHI: [Generator; 19] = [
        Generator::GivenName,
        Generator::FullName,
        Generator::Address,
        Generator::PostalCode,
        Generator::EventDate,
        Generator::BirthDate,
        Generator::Age,
        Generator::Phone,
        Generator::Fax,
        Generator::Email,
        Generator::Ssn,
        Generator::Mrn,
        Generator::HealthPlanId,
        Generator::AccountNumber,
        Generator::Url,
        Generator::IpAddress,
        Generator::Sex,
        Generator::Race,
        Generator::Ethnicity,
    ];

    pub const NON_PHI: [Generator; 7] = [
        Generator::LabGaussian,
        Generator::LabLognormal,
        Generator::Dosage,
        Generator::Flag,
        Generator::VisitCount,
        Generator::Vital,
        Generator::Category,
    ];

    pub fn category(self) -> Option<PhiCategory> {
        use Generator::*;
        use PhiCategory as C;
        Some(match self {
            GivenName | FullName => C::Names,
            Address | PostalCode => C::Geographic,
            EventDate | BirthDate | Age => C::Dates,
            Phone => C::Telephone,
            Fax => C::Fax,
            Email => C::Email,
            Ssn => C::SocialSecurity,
            Mrn => C::MedicalRecord,
            HealthPlanId => C::HealthPlan,
            AccountNumber => C::Account,
            Url => C::Url,
            IpAddress => C::IpAddress,
            Sex | Race | Ethnicity => C::OtherUnique,
            _ => return None,
        })
    }

    pub fn is_phi(self) -> bool {
        self.category().is_some()
    }

    /// Relative share of this generator among PHI or non-PHI columns.
    pub fn weight(self) -> f64 {
        use Generator::*;
        match self {
            GivenName => 3.0,
            FullName => 5.0,
            Address => 4.0,
            PostalCode => 3.0,
            EventDate => 5.0,
            BirthDate => 4.0,
            Age => 8.0,
            Phone => 4.0,
            Fax => 2.0,
            Email => 3.0,
            Ssn => 3.0,
            Mrn => 4.0,
            HealthPlanId => 2.0,
            AccountNumber => 2.0,
            Url => 1.0,
            IpAddress => 1.0,
            Sex => 10.0,
            Race => 14.0,
            Ethnicity => 3.0,
            LabGaussian => 28.0,
            LabLognormal => 18.0,
            Dosage => 10.0,
            Flag => 16.0,
            VisitCount => 10.0,
            Vital => 8.0,
            Category => 10.0,
        }
    }

    /// Formats used in ordinary datasets. Repeated entries weight the draw.
    pub fn formats(self) -> &'static [&'static str] {
        use Generator::*;
        match self {
            GivenName => &["first"],
            FullName => &["first_last", "last_comma_first", "first_mi_last", "title_first_last"],
            Address => &["number_street", "number_street_unit"],
            PostalCode => &["zip5"],
            EventDate | BirthDate => DATE_FORMATS,
            Age => &["int", "int", "int", "years"],
            Phone | Fax => PHONE_FORMATS,
            Email => &["first_dot_last", "initial_last_digits"],
            Ssn => &["dashed", "plain"],
            Mrn => &["digits8", "digits7"],
            HealthPlanId => &["prefix_dash_digits"],
            AccountNumber => &["prefix_digits"],
            Url => &["https_www_path", "www"],
            IpAddress => &["v4"],
            Sex => &["mf", "male_female", "coded01", "coded01"],
            Race => &["text", "coded", "coded", "coded"],
            Ethnicity => &["text"],
            LabGaussian | LabLognormal | Dosage | VisitCount | Vital | Category => &["default"],
            Flag => &["coded01", "coded01", "coded01", "yes_no"],
        }
    }

    /// Format reserved for the held-out dataset, if any.
    pub fn held_out_format(self) -> Option<&'static str> {
        use Generator::*;
        Some(match self {
            FullName => "upper_last_comma_first",
            Address => "po_box",
            PostalCode => "zip9",
            EventDate | BirthDate => "compact",
            Age => "yo",
            Phone | Fax => "intl",
            Ssn => "spaced",
            Mrn => "digits10",
            Sex => "lower_mf",
            _ => return None,
        })
    }

    /// Pattern id the regex screen should fire on for values in `format`;
    /// `None` for formats deliberately invisible to the screen.
    pub fn expected_pattern(self, format: &str) -> Option<&'static str> {
        use Generator::*;
        Some(match (self, format) {
            (GivenName, _) => "name_single",
            (FullName, "title_first_last") => "name_title",
            (FullName, "upper_last_comma_first") => return None,
            (FullName, _) => "name_full",
            (Address, "po_box") => return None,
            (Address, _) => "address_keywords",
            (PostalCode, _) => "postal_code",
            (EventDate | BirthDate, f) => match f {
                "iso" | "iso_slash" | "iso_datetime" => "date_iso",
                "us" | "eu" | "us_short" | "us_dash" => "date_numeric",
                "month_name" | "month_year_abbrev" => "date_month_name",
                "month_year_numeric" => "date_month_year",
                "compact" => "digit_identifier",
                _ => return None,
            },
            (Age, "years" | "yo") => "age",
            (Age, _) => return None,
            (Phone | Fax, _) => "phone",
            (Email, _) => "email",
            (Ssn, _) => "ssn",
            (Mrn, _) => "digit_identifier",
            (HealthPlanId | AccountNumber, _) => "alnum_identifier",
            (Url, _) => "url",
            (IpAddress, _) => "ip_address",
            (Sex, "mf") => "middle_initial",
            (Sex, "male_female") => "gender",
            (Race, "text") => "race",
            (Ethnicity, "text") => "ethnicity",
            _ => return None,
        })
    }

    pub fn slug(self) -> &'static str {
        use Generator::*;
        match self {
            GivenName => "first_name",
            FullName => "patient_name",
            Address => "address",
            PostalCode => "zip",
            EventDate => "event_date",
            BirthDate => "birth_date",
            Age => "age",
            Phone => "phone",
            Fax => "fax",
            Email => "email",
            Ssn => "ssn",
            Mrn => "mrn",
            HealthPlanId => "plan_id",
            AccountNumber => "account",
            Url => "homepage",
            IpAddress => "ip",
            Sex => "sex",
            Race => "race",
            Ethnicity => "ethnicity",
            LabGaussian => "lab",
            LabLognormal => "assay",
            Dosage => "dose",
            Flag => "dx_flag",
            VisitCount => "visits",
            Vital => "vital",
            Category => "note_code",
        }
    }
}

const MONTHS: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September",
    "October", "November", "December",
];

fn random_date<R: Rng>(rng: &mut R, from_year: i32, to_year: i32) -> NaiveDate {
    let start = NaiveDate::from_ymd_opt(from_year, 1, 1).unwrap();
    let end = NaiveDate::from_ymd_opt(to_year, 12, 31).unwrap();
    let span = (end - start).num_days();
    start + Duration::days(rng.random_range(0..=span))
}

fn format_date<R: Rng>(rng: &mut R, d: NaiveDate, format: &str) -> String {
    let (y, m, day) = (d.year(), d.month(), d.day());
    let month = MONTHS[m as usize - 1];
    match format {
        "iso" => format!("{y:04}-{m:02}-{day:02}"),
        "iso_slash" => format!("{y:04}/{m:02}/{day:02}"),
        "us" => format!("{m:02}/{day:02}/{y:04}"),
        "eu" => format!("{day:02}/{m:02}/{y:04}"),
        "us_short" => format!("{m:02}/{day:02}/{:02}", y % 100),
        "us_dash" => format!("{m:02}-{day:02}-{y:04}"),
        "month_name" => {
            if rng.random_bool(0.5) {
                format!("{month} {day} {y}")
            } else {
                format!("{} {day}, {y}", &month[..3])
            }
        }
        "month_year_abbrev" => format!("{}. {y}", &month[..3]),
        "month_year_numeric" => format!("{m:02}/{y:04}"),
        "iso_datetime" => format!(
            "{y:04}-{m:02}-{day:02} {:02}:{:02}:{:02}",
            rng.random_range(0..24),
            rng.random_range(0..60),
            rng.random_range(0..60)
        ),
        "compact" => format!("{y:04}{m:02}{day:02}"),
        other => unreachable!("unknown date format {other}"),
    }
}

/// Labs are reported to about three significant digits of their typical
/// magnitude.
fn lab_decimals(typical: f64) -> usize {
    (2 - typical.log10().floor() as i64).clamp(0, 3) as usize
}

fn pick<'a, R: Rng>(rng: &mut R, pool: &'a [&'a str]) -> &'a str {
    pool.choose(rng).copied().unwrap_or_default()
}

fn weighted<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

fn phone<R: Rng>(rng: &mut R, format: &str) -> String {
    let a = rng.random_range(201..=989);
    let e = rng.random_range(200..=999);
    let l = rng.random_range(0..=9999);
    match format {
        "paren_space" => format!("({a}) {e}-{l:04}"),
        "paren" => format!("({a}){e}-{l:04}"),
        "dash" => format!("{a}-{e}-{l:04}"),
        "dot" => format!("{a}.{e}.{l:04}"),
        "plain" => format!("{a}{e}{l:04}"),
        "intl" => format!("+1 {a} {e} {l:04}"),
        other => unreachable!("unknown phone format {other}"),
    }
}

fn email_local(s: &str) -> String {
    s.chars()
        .filter(char::is_ascii_alphanumeric)
        .collect::<String>()
        .to_lowercase()
}

fn fixed(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    // Avoid "-0.0" style tokens.
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Per-column distribution parameters, drawn once so every row of a column
/// shares them.
enum Params {
    None,
    Gaussian { mu: f64, sd: f64, decimals: usize },
    Lognormal { dist: LogNormal<f64>, decimals: usize },
    Dosage { zero: f64, amount: LogNormal<f64> },
    Flag { prevalence: f64 },
    /// Overdispersed counts: a gamma-mixed Poisson.
    Counts(Gamma<f64>),
    Vital { mu: f64, sd: f64, decimals: usize, lo: f64, hi: f64 },
    Category { labels: Vec<String>, weights: Vec<f64> },
    Balanced { p: f64 },
    /// Categorical column with one output token per category.
    Coded { weights: Vec<f64>, codes: Vec<String> },
}

/// Integer code per race group. The common groups take the end codes, as
/// in registries that append rarer groups to an existing list.
const RACE_CODES: [u32; 6] = [1, 6, 2, 5, 3, 4];

/// Jittered group shares; every group keeps at least a few percent.
fn group_weights<R: Rng>(base: &[f64], rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = base.iter().map(|w| w * rng.random_range(0.9..1.1)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|w| (w / total).max(0.04)).collect()
}

fn draw_params<R: Rng>(g: Generator, format: &str, rng: &mut R) -> Params {
    use Generator::*;
    match g {
        LabGaussian => {
            let mu = 10f64.powf(rng.random_range(0.0..2.5));
            let sd = mu * rng.random_range(0.03..0.2);
            Params::Gaussian {
                mu,
                sd,
                decimals: lab_decimals(mu),
            }
        }
        LabLognormal => {
            let median: f64 = 10f64.powf(rng.random_range(-1.0..2.0));
            Params::Lognormal {
                dist: LogNormal::new(median.ln(), rng.random_range(0.3..1.0)).unwrap(),
                decimals: lab_decimals(median),
            }
        }
        Dosage => {
            let median: f64 = *[5.0, 10.0, 25.0, 50.0, 100.0, 250.0].choose(rng).unwrap();
            Params::Dosage {
                zero: rng.random_range(0.3..0.7),
                amount: LogNormal::new(median.ln(), rng.random_range(0.3..0.8)).unwrap(),
            }
        }
        Flag => Params::Flag {
            prevalence: rng.random_range(0.02..0.3),
        },
        VisitCount => {
            let mean = rng.random_range(1.5..8.0);
            let shape = rng.random_range(1.0..5.0);
            Params::Counts(Gamma::new(shape, mean / shape).unwrap())
        }
        Vital => {
            let (mu, sd, decimals, lo, hi) = *[
                (78.0, 13.0, 0, 30.0, 200.0),
                (128.0, 18.0, 0, 70.0, 240.0),
                (78.0, 11.0, 0, 40.0, 140.0),
                (17.0, 3.0, 0, 8.0, 40.0),
                (36.9, 0.5, 1, 34.0, 41.0),
                (80.0, 18.0, 1, 35.0, 200.0),
                (168.0, 10.0, 0, 130.0, 210.0),
                (27.0, 5.0, 1, 14.0, 60.0),
            ]
            .choose(rng)
            .unwrap();
            Params::Vital {
                mu,
                sd,
                decimals,
                lo,
                hi,
            }
        }
        Category => {
            let n = rng.random_range(15..=40);
            let mut labels: Vec<String> = Vec::with_capacity(n);
            while labels.len() < n {
                let w1 = pick(rng, CLINICAL_WORDS);
                let label = if rng.random_bool(0.6) {
                    let w2 = pick(rng, CLINICAL_WORDS);
                    let sep = if rng.random_bool(0.5) { " " } else { "_" };
                    format!("{w1}{sep}{w2}")
                } else {
                    w1.to_string()
                };
                if !labels.contains(&label) {
                    labels.push(label);
                }
            }
            let s = rng.random_range(0.5..1.5);
            let weights = (0..n).map(|i| 1.0 / ((i + 1) as f64).powf(s)).collect();
            Params::Category { labels, weights }
        }
        Sex => Params::Balanced {
            p: rng.random_range(0.45..0.55),
        },
        Race if format == "text" => Params::Coded {
            weights: group_weights(RACE_WEIGHTS, rng),
            codes: RACES.iter().map(|r| r.to_string()).collect(),
        },
        Race => Params::Coded {
            weights: group_weights(RACE_WEIGHTS, rng),
            codes: RACE_CODES.iter().map(|c| c.to_string()).collect(),
        },
        Ethnicity => Params::Coded {
            weights: vec![0.12, 0.8, 0.05, 0.03],
            codes: ETHNICITIES.iter().map(|e| e.to_string()).collect(),
        },
        _ => Params::None,
    }
}

fn value<R: Rng>(g: Generator, format: &str, params: &Params, rng: &mut R) -> String {
    use Generator::*;
    match (g, params) {
        (GivenName, _) => pick(rng, GIVEN_NAMES).to_string(),
        (FullName, _) => {
            let (f, l) = (pick(rng, GIVEN_NAMES), pick(rng, SURNAMES));
            match format {
                "first_last" => format!("{f} {l}"),
                "last_comma_first" => format!("{l}, {f}"),
                "first_mi_last" => {
                    let mi = (b'A' + rng.random_range(0..26u8)) as char;
                    format!("{f} {mi}. {l}")
                }
                "title_first_last" => {
                    let t = pick(rng, &["Dr.", "Mr.", "Mrs.", "Ms."]);
                    format!("{t} {f} {l}")
                }
                "upper_last_comma_first" => format!("{}, {}", l.to_uppercase(), f.to_uppercase()),
                other => unreachable!("unknown name format {other}"),
            }
        }
        (Address, _) => {
            let n = rng.random_range(1..=9999);
            let street = pick(rng, STREET_NAMES);
            let suffix = pick(rng, STREET_SUFFIXES);
            match format {
                "number_street" => format!("{n} {street} {suffix}"),
                "number_street_unit" => {
                    format!("{n} {street} {suffix} Apt {}", rng.random_range(1..=40))
                }
                "po_box" => format!("PO Box {}", rng.random_range(100..=99999)),
                other => unreachable!("unknown address format {other}"),
            }
        }
        (PostalCode, _) => {
            let z = rng.random_range(1001..=99950);
            match format {
                "zip5" => format!("{z:05}"),
                _ => format!("{z:05}-{:04}", rng.random_range(0..=9999)),
            }
        }
        (EventDate, _) => {
            let d = random_date(rng, 2005, 2023);
            format_date(rng, d, format)
        }
        (BirthDate, _) => {
            let d = random_date(rng, 1921, 2018);
            format_date(rng, d, format)
        }
        (Age, _) => {
            let a = rng.random_range(0..=100);
            match format {
                "int" => a.to_string(),
                "years" => {
                    if rng.random_bool(0.5) {
                        format!("{a} years")
                    } else {
                        format!("{a} yrs")
                    }
                }
                _ => format!("{a} y.o."),
            }
        }
        (Phone | Fax, _) => phone(rng, format),
        (Email, _) => {
            let (f, l) = (pick(rng, GIVEN_NAMES), pick(rng, SURNAMES));
            let domain = pick(rng, EMAIL_DOMAINS);
            match format {
                "first_dot_last" => format!("{}.{}@{domain}", email_local(f), email_local(l)),
                _ => format!(
                    "{}{}{}@{domain}",
                    email_local(&f[..1]),
                    email_local(l),
                    rng.random_range(1..=999)
                ),
            }
        }
        (Ssn, _) => {
            let mut area = rng.random_range(1..=899);
            if area == 666 {
                area = 667;
            }
            let group = rng.random_range(1..=99);
            let serial = rng.random_range(1..=9999);
            match format {
                "dashed" => format!("{area:03}-{group:02}-{serial:04}"),
                "plain" => format!("{area:03}{group:02}{serial:04}"),
                _ => format!("{area:03} {group:02} {serial:04}"),
            }
        }
        (Mrn, _) => match format {
            "digits8" => format!("{:08}", rng.random_range(0..100_000_000u64)),
            "digits7" => format!("{:07}", rng.random_range(0..10_000_000u64)),
            _ => format!("{:010}", rng.random_range(0..10_000_000_000u64)),
        },
        (HealthPlanId, _) => {
            let prefix = pick(rng, &["HP", "BCB", "AET", "UHC", "MCD"]);
            format!("{prefix}-{:07}", rng.random_range(0..10_000_000u64))
        }
        (AccountNumber, _) => format!("AC{:08}", rng.random_range(0..100_000_000u64)),
        (Url, _) => {
            let w = pick(rng, URL_WORDS);
            let tld = pick(rng, TLDS);
            match format {
                "https_www_path" => format!(
                    "https://www.{w}{}.{tld}/profile/{}",
                    rng.random_range(1..=999),
                    rng.random_range(1..=99999)
                ),
                _ => format!("www.{w}{}.{tld}", rng.random_range(1..=9999)),
            }
        }
        (IpAddress, _) => format!(
            "{}.{}.{}.{}",
            rng.random_range(1..=223),
            rng.random_range(0..=255),
            rng.random_range(0..=255),
            rng.random_range(1..=254)
        ),
        (Sex, Params::Balanced { p }) => {
            let female = rng.random_bool(*p);
            match format {
                "mf" => if female { "F" } else { "M" }.to_string(),
                "male_female" => if female { "Female" } else { "Male" }.to_string(),
                "coded01" => if female { "1" } else { "0" }.to_string(),
                _ => if female { "f" } else { "m" }.to_string(),
            }
        }
        (Race | Ethnicity, Params::Coded { weights, codes }) => codes[weighted(rng, weights)].clone(),
        (LabGaussian, Params::Gaussian { mu, sd, decimals }) => {
            let v = Normal::new(*mu, *sd).unwrap().sample(rng);
            fixed(v, *decimals)
        }
        (LabLognormal, Params::Lognormal { dist, decimals }) => {
            fixed(dist.sample(rng).min(9999.0), *decimals)
        }
        (Dosage, Params::Dosage { zero, amount }) => {
            if rng.random_bool(*zero) {
                "0".to_string()
            } else {
                // Doses are charted to the nearest half unit.
                let d = (amount.sample(rng) * 2.0).round().max(1.0) / 2.0;
                fixed(d.min(5000.0), 1)
            }
        }
        (Flag, Params::Flag { prevalence }) => {
            let on = rng.random_bool(*prevalence);
            match format {
                "yes_no" => if on { "yes" } else { "no" }.to_string(),
                _ => if on { "1" } else { "0" }.to_string(),
            }
        }
        (VisitCount, Params::Counts(rate)) => {
            let lambda = rate.sample(rng).max(1e-9);
            format!("{:.0}", Poisson::new(lambda).unwrap().sample(rng))
        }
        (Vital, Params::Vital { mu, sd, decimals, lo, hi }) => {
            let v = Normal::new(*mu, *sd).unwrap().sample(rng).clamp(*lo, *hi);
            fixed(v, *decimals)
        }
        (Category, Params::Category { labels, weights }) => {
            labels[weighted(rng, weights)].clone()
        }
        (g, _) => unreachable!("generator {g:?} drawn without parameters"),
    }
}

/// `rows` cells for one column; `None` marks an injected null.
pub fn generate_column<R: Rng>(
    g: Generator,
    format: &str,
    rows: usize,
    null_rate: f64,
    rng: &mut R,
) -> Vec<Option<String>> {
    let params = draw_params(g, format, rng);
    (0..rows)
        .map(|_| {
            let v = value(g, format, &params, rng);
            (!rng.random_bool(null_rate)).then_some(v)
        })
        .collect()
}
