//! Valuation structures: totally ordered commutative monoids with an absorbing
//! maximum, and the maximal-difference operator that makes them fair.
//!
//! A [`Structure`] is a small value describing one concrete algebra (kind plus
//! parameters). Valuations are self-describing: each carrier has its own
//! [`Valuation`] variant, and the derived order of a variant is the order of
//! that carrier. Checked operations reject valuations outside the carrier;
//! [`Structure::plus`] and [`Structure::minus`] are the unchecked forms used on
//! problems whose tables were validated on construction.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Penalty points that trigger an automatic suspension.
pub const MAX_POINTS: u32 = 12;

pub const DEFAULT_MAX_YEARS: u32 = 10;
pub const DEFAULT_PRISON_CAP: u32 = 150;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Weight {
    Finite(u64),
    Infinite,
}

/// Driving sentence: penalty points, or a suspension of some years.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Penalty {
    Points(u32),
    Years(u32),
    Forever,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sentence {
    Years(u32),
    Life,
    Death,
}

/// Financial loss and loss of life; lives dominate money in the order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Loss {
    Finite { lives: u32, money: u32 },
    Top,
}

/// An element of some structure's carrier.
///
/// Comparisons between two valuations of the same variant follow the carrier
/// order. Comparisons across variants are meaningless; the checked API on
/// [`Structure`] rejects them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Valuation {
    Weight(Weight),
    Bounded(u32),
    Level(u32),
    Penalty(Penalty),
    Sentence(Sentence),
    Loss(Loss),
}

impl Valuation {
    pub const fn finite(w: u64) -> Self {
        Valuation::Weight(Weight::Finite(w))
    }

    pub const INFINITE: Valuation = Valuation::Weight(Weight::Infinite);

    /// Integer form for file output, when the valuation has one.
    pub fn as_integer(&self) -> Option<u64> {
        match *self {
            Valuation::Weight(Weight::Finite(w)) => Some(w),
            Valuation::Bounded(x) | Valuation::Level(x) => Some(x as u64),
            Valuation::Sentence(Sentence::Years(y)) => Some(y as u64),
            _ => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Weight(Weight::Finite(w)) => write!(f, "{w}"),
            Valuation::Weight(Weight::Infinite) => write!(f, "inf"),
            Valuation::Bounded(x) | Valuation::Level(x) => write!(f, "{x}"),
            Valuation::Penalty(Penalty::Points(p)) => write!(f, "({p},0)"),
            Valuation::Penalty(Penalty::Years(y)) => write!(f, "(0,{y})"),
            Valuation::Penalty(Penalty::Forever) => write!(f, "(0,inf)"),
            Valuation::Sentence(Sentence::Years(y)) => write!(f, "{y}"),
            Valuation::Sentence(Sentence::Life) => write!(f, "life"),
            Valuation::Sentence(Sentence::Death) => write!(f, "death"),
            Valuation::Loss(Loss::Finite { lives, money }) => write!(f, "({money},{lives})"),
            Valuation::Loss(Loss::Top) => write!(f, "top"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A concrete valuation structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Structure {
    /// ℕ ∪ {∞} under addition.
    Weighted,
    /// {0..max} under addition capped at `max`.
    BoundedSum { max: u32 },
    /// A chain of `levels` elements under `max`; two levels give classical CSPs.
    OrderedMax { levels: u32 },
    /// Penalty points up to 12, suspensions of 1..=max_years years, permanent loss.
    DrivingPenalty { max_years: u32 },
    /// Years 0..=cap (capped), life, death; two life sentences make a death sentence.
    CappedPrison { cap: u32 },
    /// Money capped at `max_loss` and lives below `max_lives`. Not fair.
    FinancialLife { max_loss: u32, max_lives: u32 },
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Structure::Weighted => write!(f, "weighted"),
            Structure::BoundedSum { max } => write!(f, "bounded-sum({max})"),
            Structure::OrderedMax { levels } => write!(f, "ordered-max({levels})"),
            Structure::DrivingPenalty { max_years } => write!(f, "driving-penalty({max_years})"),
            Structure::CappedPrison { cap } => write!(f, "capped-prison({cap})"),
            Structure::FinancialLife {
                max_loss,
                max_lives,
            } => write!(f, "financial-life({max_loss},{max_lives})"),
        }
    }
}

impl FromStr for Structure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, args) = match s.find('(') {
            Some(open) => {
                let close = s
                    .strip_suffix(')')
                    .ok_or_else(|| Error::InvalidStructure(format!("unbalanced parameters in {s:?}")))?;
                (&s[..open], &close[open + 1..])
            }
            None => (s, ""),
        };
        let params = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|p| {
                    p.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::InvalidStructure(format!("bad parameter {p:?} in {s:?}")))
                })
                .collect::<Result<Vec<_>>>()?
        };
        Structure::from_kind(kind.trim(), &params)
    }
}

impl Structure {
    pub fn weighted() -> Self {
        Structure::Weighted
    }

    pub fn bounded_sum(max: u32) -> Result<Self> {
        if max == 0 {
            return Err(Error::InvalidStructure("bounded-sum needs max ≥ 1".into()));
        }
        Ok(Structure::BoundedSum { max })
    }

    pub fn ordered_max(levels: u32) -> Result<Self> {
        if levels == 0 {
            return Err(Error::InvalidStructure("ordered-max needs at least one level".into()));
        }
        Ok(Structure::OrderedMax { levels })
    }

    pub fn driving_penalty(max_years: u32) -> Result<Self> {
        if max_years == 0 {
            return Err(Error::InvalidStructure("driving-penalty needs max_years ≥ 1".into()));
        }
        Ok(Structure::DrivingPenalty { max_years })
    }

    pub fn capped_prison(cap: u32) -> Result<Self> {
        if cap == 0 {
            return Err(Error::InvalidStructure("capped-prison needs cap ≥ 1".into()));
        }
        Ok(Structure::CappedPrison { cap })
    }

    pub fn financial_life(max_loss: u32, max_lives: u32) -> Result<Self> {
        if max_loss == 0 || max_lives < 2 {
            return Err(Error::InvalidStructure(
                "financial-life needs max_loss ≥ 1 and max_lives ≥ 2".into(),
            ));
        }
        Ok(Structure::FinancialLife {
            max_loss,
            max_lives,
        })
    }

    /// Builds a structure from its kind name and integer parameters; missing
    /// parameters take their defaults.
    pub fn from_kind(kind: &str, params: &[u32]) -> Result<Self> {
        let arity_error = |n: usize| {
            Error::InvalidStructure(format!("{kind} takes at most {n} parameter(s), got {}", params.len()))
        };
        match kind {
            "weighted" => {
                if !params.is_empty() {
                    return Err(arity_error(0));
                }
                Ok(Structure::Weighted)
            }
            "bounded-sum" => match params {
                [max] => Structure::bounded_sum(*max),
                [] => Err(Error::InvalidStructure("bounded-sum needs its maximum".into())),
                _ => Err(arity_error(1)),
            },
            "ordered-max" => match params {
                [levels] => Structure::ordered_max(*levels),
                [] => Structure::ordered_max(2),
                _ => Err(arity_error(1)),
            },
            "driving-penalty" => match params {
                [years] => Structure::driving_penalty(*years),
                [] => Structure::driving_penalty(DEFAULT_MAX_YEARS),
                _ => Err(arity_error(1)),
            },
            "capped-prison" => match params {
                [cap] => Structure::capped_prison(*cap),
                [] => Structure::capped_prison(DEFAULT_PRISON_CAP),
                _ => Err(arity_error(1)),
            },
            "financial-life" => match params {
                [loss, lives] => Structure::financial_life(*loss, *lives),
                _ => Err(Error::InvalidStructure(
                    "financial-life needs max_loss and max_lives".into(),
                )),
            },
            other => Err(Error::InvalidStructure(format!("unknown structure kind {other:?}"))),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Structure::Weighted => "weighted",
            Structure::BoundedSum { .. } => "bounded-sum",
            Structure::OrderedMax { .. } => "ordered-max",
            Structure::DrivingPenalty { .. } => "driving-penalty",
            Structure::CappedPrison { .. } => "capped-prison",
            Structure::FinancialLife { .. } => "financial-life",
        }
    }

    pub fn params(&self) -> Vec<u32> {
        match *self {
            Structure::Weighted => vec![],
            Structure::BoundedSum { max } => vec![max],
            Structure::OrderedMax { levels } => vec![levels],
            Structure::DrivingPenalty { max_years } => vec![max_years],
            Structure::CappedPrison { cap } => vec![cap],
            Structure::FinancialLife {
                max_loss,
                max_lives,
            } => vec![max_loss, max_lives],
        }
    }

    /// ⊥, the identity of ⊕.
    pub fn bottom(&self) -> Valuation {
        match self {
            Structure::Weighted => Valuation::finite(0),
            Structure::BoundedSum { .. } => Valuation::Bounded(0),
            Structure::OrderedMax { .. } => Valuation::Level(0),
            Structure::DrivingPenalty { .. } => Valuation::Penalty(Penalty::Points(0)),
            Structure::CappedPrison { .. } => Valuation::Sentence(Sentence::Years(0)),
            Structure::FinancialLife { .. } => Valuation::Loss(Loss::Finite { lives: 0, money: 0 }),
        }
    }

    /// ⊤, the absorbing maximum.
    pub fn top(&self) -> Valuation {
        match *self {
            Structure::Weighted => Valuation::INFINITE,
            Structure::BoundedSum { max } => Valuation::Bounded(max),
            Structure::OrderedMax { levels } => Valuation::Level(levels - 1),
            Structure::DrivingPenalty { .. } => Valuation::Penalty(Penalty::Forever),
            Structure::CappedPrison { .. } => Valuation::Sentence(Sentence::Death),
            Structure::FinancialLife { .. } => Valuation::Loss(Loss::Top),
        }
    }

    pub fn contains(&self, v: Valuation) -> bool {
        match (*self, v) {
            (Structure::Weighted, Valuation::Weight(_)) => true,
            (Structure::BoundedSum { max }, Valuation::Bounded(x)) => x <= max,
            (Structure::OrderedMax { levels }, Valuation::Level(x)) => x < levels,
            (Structure::DrivingPenalty { max_years }, Valuation::Penalty(p)) => match p {
                Penalty::Points(p) => p <= MAX_POINTS,
                Penalty::Years(y) => (1..=max_years).contains(&y),
                Penalty::Forever => true,
            },
            (Structure::CappedPrison { cap }, Valuation::Sentence(s)) => match s {
                Sentence::Years(y) => y <= cap,
                Sentence::Life | Sentence::Death => true,
            },
            (
                Structure::FinancialLife {
                    max_loss,
                    max_lives,
                },
                Valuation::Loss(l),
            ) => match l {
                Loss::Finite { lives, money } => lives < max_lives && money <= max_loss,
                Loss::Top => true,
            },
            _ => false,
        }
    }

    pub fn check(&self, v: Valuation) -> Result<Valuation> {
        if self.contains(v) {
            Ok(v)
        } else {
            Err(Error::ForeignValuation {
                structure: self.to_string(),
                value: v.to_string(),
            })
        }
    }

    /// Total order of the carrier.
    pub fn compare(&self, a: Valuation, b: Valuation) -> Result<Ordering> {
        self.check(a)?;
        self.check(b)?;
        Ok(a.cmp(&b))
    }

    /// α ⊕ β.
    pub fn combine(&self, a: Valuation, b: Valuation) -> Result<Valuation> {
        self.check(a)?;
        self.check(b)?;
        self.try_plus(a, b).ok_or_else(|| Error::Overflow {
            structure: self.to_string(),
        })
    }

    /// β ⊖ α, the maximal γ with γ ⊕ α = β.
    pub fn difference(&self, beta: Valuation, alpha: Valuation) -> Result<Valuation> {
        self.check(beta)?;
        self.check(alpha)?;
        if alpha > beta {
            return Err(Error::OrderViolation {
                minuend: beta.to_string(),
                subtrahend: alpha.to_string(),
            });
        }
        self.try_minus(beta, alpha).ok_or_else(|| Error::NoDifference {
            structure: self.to_string(),
            minuend: beta.to_string(),
            subtrahend: alpha.to_string(),
        })
    }

    /// α ⊕ α = α. A valuation outside the carrier is not absorbing.
    pub fn is_absorbing(&self, a: Valuation) -> bool {
        self.contains(a) && self.try_plus(a, a) == Some(a)
    }

    /// α ⊖ α: the largest absorbing valuation below α.
    pub fn max_absorbing_leq(&self, a: Valuation) -> Result<Valuation> {
        if !self.is_fair() {
            return Err(Error::Unfair {
                structure: self.to_string(),
            });
        }
        self.difference(a, a)
    }

    /// Combination of a valuation sequence (⊥ when empty).
    pub fn sum<I: IntoIterator<Item = Valuation>>(&self, values: I) -> Valuation {
        values.into_iter().fold(self.bottom(), |acc, v| self.plus(acc, v))
    }

    /// Unchecked ⊕ for valuations already known to belong to this structure.
    ///
    /// Panics on foreign operands and on unbounded-weight overflow.
    pub fn plus(&self, a: Valuation, b: Valuation) -> Valuation {
        match self.try_plus(a, b) {
            Some(v) => v,
            None => panic!("cannot combine {a} and {b} in {self}"),
        }
    }

    /// Unchecked ⊖; panics when the difference does not exist.
    pub fn minus(&self, beta: Valuation, alpha: Valuation) -> Valuation {
        match self.try_minus(beta, alpha) {
            Some(v) if alpha <= beta => v,
            _ => panic!("no difference {beta} ⊖ {alpha} in {self}"),
        }
    }

    fn try_plus(&self, a: Valuation, b: Valuation) -> Option<Valuation> {
        use Valuation as V;
        let v = match (*self, a, b) {
            (Structure::Weighted, V::Weight(x), V::Weight(y)) => match (x, y) {
                (Weight::Finite(x), Weight::Finite(y)) => V::finite(x.checked_add(y)?),
                _ => V::INFINITE,
            },
            (Structure::BoundedSum { max }, V::Bounded(x), V::Bounded(y)) => {
                V::Bounded((x as u64 + y as u64).min(max as u64) as u32)
            }
            (Structure::OrderedMax { .. }, V::Level(x), V::Level(y)) => V::Level(x.max(y)),
            (Structure::DrivingPenalty { max_years }, V::Penalty(x), V::Penalty(y)) => {
                V::Penalty(match (x, y) {
                    (Penalty::Forever, _) | (_, Penalty::Forever) => Penalty::Forever,
                    (Penalty::Points(p), Penalty::Points(q)) => Penalty::Points((p + q).min(MAX_POINTS)),
                    _ => {
                        let years = |p: Penalty| match p {
                            Penalty::Years(y) => y as u64,
                            _ => 0,
                        };
                        let total = years(x) + years(y);
                        if total > max_years as u64 {
                            Penalty::Forever
                        } else {
                            Penalty::Years(total as u32)
                        }
                    }
                })
            }
            (Structure::CappedPrison { cap }, V::Sentence(x), V::Sentence(y)) => {
                V::Sentence(match (x, y) {
                    (Sentence::Death, _) | (_, Sentence::Death) => Sentence::Death,
                    (Sentence::Life, Sentence::Life) => Sentence::Death,
                    (Sentence::Life, _) | (_, Sentence::Life) => Sentence::Life,
                    (Sentence::Years(m), Sentence::Years(n)) => {
                        Sentence::Years((m as u64 + n as u64).min(cap as u64) as u32)
                    }
                })
            }
            (
                Structure::FinancialLife {
                    max_loss,
                    max_lives,
                },
                V::Loss(x),
                V::Loss(y),
            ) => V::Loss(match (x, y) {
                (Loss::Finite { lives: h, money: f }, Loss::Finite { lives: h2, money: f2 }) => {
                    if h as u64 + h2 as u64 >= max_lives as u64 {
                        Loss::Top
                    } else {
                        Loss::Finite {
                            lives: h + h2,
                            money: (f as u64 + f2 as u64).min(max_loss as u64) as u32,
                        }
                    }
                }
                _ => Loss::Top,
            }),
            _ => return None,
        };
        Some(v)
    }

    fn try_minus(&self, beta: Valuation, alpha: Valuation) -> Option<Valuation> {
        use Valuation as V;
        let v = match (*self, beta, alpha) {
            (Structure::Weighted, V::Weight(b), V::Weight(a)) => match (b, a) {
                (Weight::Infinite, _) => V::INFINITE,
                (Weight::Finite(b), Weight::Finite(a)) => V::finite(b.checked_sub(a)?),
                (Weight::Finite(_), Weight::Infinite) => return None,
            },
            (Structure::BoundedSum { max }, V::Bounded(b), V::Bounded(a)) => {
                if b == max {
                    V::Bounded(max)
                } else {
                    V::Bounded(b.checked_sub(a)?)
                }
            }
            (Structure::OrderedMax { .. }, V::Level(b), V::Level(_)) => V::Level(b),
            (Structure::DrivingPenalty { .. }, V::Penalty(b), V::Penalty(a)) => {
                V::Penalty(match (b, a) {
                    (Penalty::Forever, _) => Penalty::Forever,
                    (Penalty::Points(MAX_POINTS), Penalty::Points(_)) => Penalty::Points(MAX_POINTS),
                    (Penalty::Points(p), Penalty::Points(q)) => Penalty::Points(p.checked_sub(q)?),
                    (Penalty::Years(y), Penalty::Points(_)) => Penalty::Years(y),
                    // Any points combine with a suspension to leave it unchanged;
                    // the largest such difference is the maximal points value.
                    (Penalty::Years(y), Penalty::Years(z)) if z == y => Penalty::Points(MAX_POINTS),
                    (Penalty::Years(y), Penalty::Years(z)) => Penalty::Years(y.checked_sub(z)?),
                    _ => return None,
                })
            }
            (Structure::CappedPrison { cap }, V::Sentence(b), V::Sentence(a)) => {
                V::Sentence(match (b, a) {
                    (Sentence::Death, _) => Sentence::Death,
                    (Sentence::Life, Sentence::Years(_)) => Sentence::Life,
                    (Sentence::Life, Sentence::Life) => Sentence::Years(cap),
                    (Sentence::Years(n), Sentence::Years(_)) if n == cap => Sentence::Years(cap),
                    (Sentence::Years(n), Sentence::Years(m)) => Sentence::Years(n.checked_sub(m)?),
                    _ => return None,
                })
            }
            (Structure::FinancialLife { .. }, V::Loss(_), V::Loss(_)) => {
                // No closed form: the maximal difference is searched in the
                // (finite) carrier and may not exist.
                let elements = self.elements()?;
                elements
                    .into_iter()
                    .rev()
                    .find(|&g| self.try_plus(g, alpha) == Some(beta))?
            }
            _ => return None,
        };
        Some(v)
    }

    pub fn is_fair(&self) -> bool {
        !matches!(self, Structure::FinancialLife { .. })
    }

    /// Whether ⊕ is idempotent on the whole carrier.
    pub fn is_idempotent(&self) -> bool {
        match *self {
            Structure::OrderedMax { .. } => true,
            Structure::BoundedSum { max } => max <= 1,
            _ => false,
        }
    }

    /// Whether α ≻ β and γ ≠ ⊤ imply α ⊕ γ ≻ β ⊕ γ.
    pub fn is_strictly_monotonic(&self) -> bool {
        match *self {
            Structure::Weighted => true,
            Structure::BoundedSum { max } => max <= 1,
            Structure::OrderedMax { levels } => levels <= 2,
            _ => false,
        }
    }

    /// All valuations in ascending order; `None` for unbounded carriers.
    pub fn elements(&self) -> Option<Vec<Valuation>> {
        let values = match *self {
            Structure::Weighted => return None,
            Structure::BoundedSum { max } => (0..=max).map(Valuation::Bounded).collect(),
            Structure::OrderedMax { levels } => (0..levels).map(Valuation::Level).collect(),
            Structure::DrivingPenalty { max_years } => (0..=MAX_POINTS)
                .map(Penalty::Points)
                .chain((1..=max_years).map(Penalty::Years))
                .chain(std::iter::once(Penalty::Forever))
                .map(Valuation::Penalty)
                .collect(),
            Structure::CappedPrison { cap } => (0..=cap)
                .map(Sentence::Years)
                .chain([Sentence::Life, Sentence::Death])
                .map(Valuation::Sentence)
                .collect(),
            Structure::FinancialLife {
                max_loss,
                max_lives,
            } => (0..max_lives)
                .flat_map(|lives| (0..=max_loss).map(move |money| Loss::Finite { lives, money }))
                .chain(std::iter::once(Loss::Top))
                .map(Valuation::Loss)
                .collect(),
        };
        Some(values)
    }

    /// Draws a valuation. Unbounded weights favour small values so that random
    /// triples still hit equalities.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Valuation {
        match self {
            Structure::Weighted => {
                if rng.gen_ratio(1, 10) {
                    Valuation::INFINITE
                } else if rng.gen_ratio(1, 10) {
                    Valuation::finite(rng.gen_range(0..=u32::MAX as u64))
                } else {
                    Valuation::finite(rng.gen_range(0..=16))
                }
            }
            _ => {
                let elements = self.elements().expect("bounded carrier");
                elements[rng.gen_range(0..elements.len())]
            }
        }
    }

    /// Parses a cost literal: `top`/`⊤`, `bot`/`⊥`, or a carrier-specific form
    /// such as `3`, `inf`, `(12,0)`, `life`.
    pub fn parse_valuation(&self, text: &str) -> Result<Valuation> {
        let t = text.trim();
        let bad = || Error::Parse {
            location: format!("cost {t:?}"),
            message: format!("not a valuation of {self}"),
        };
        match t {
            "top" | "⊤" => return Ok(self.top()),
            "bot" | "⊥" => return Ok(self.bottom()),
            _ => {}
        }
        let int = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
        let small = |s: &str| -> Result<u32> { u32::try_from(int(s)?).map_err(|_| bad()) };
        let pair = |s: &str| -> Option<(String, String)> {
            let inner = s.strip_prefix('(')?.strip_suffix(')')?;
            let (x, y) = inner.split_once(',')?;
            Some((x.trim().to_string(), y.trim().to_string()))
        };
        let v = match self {
            Structure::Weighted => match t {
                "inf" | "∞" => Valuation::INFINITE,
                _ => Valuation::finite(int(t)?),
            },
            Structure::BoundedSum { .. } => Valuation::Bounded(small(t)?),
            Structure::OrderedMax { .. } => Valuation::Level(small(t)?),
            Structure::DrivingPenalty { .. } => match pair(t) {
                Some((p, y)) => match (p.as_str(), y.as_str()) {
                    (_, "inf" | "∞") if int(&p)? == 0 => Valuation::Penalty(Penalty::Forever),
                    (_, "0") => Valuation::Penalty(Penalty::Points(small(&p)?)),
                    _ if int(&p)? == 0 => Valuation::Penalty(Penalty::Years(small(&y)?)),
                    _ => return Err(bad()),
                },
                None => Valuation::Penalty(Penalty::Points(small(t)?)),
            },
            Structure::CappedPrison { .. } => match t {
                "life" | "inf" | "∞" => Valuation::Sentence(Sentence::Life),
                "death" => Valuation::Sentence(Sentence::Death),
                _ => Valuation::Sentence(Sentence::Years(small(t)?)),
            },
            Structure::FinancialLife { .. } => match pair(t) {
                Some((f, h)) => Valuation::Loss(Loss::Finite {
                    money: small(&f)?,
                    lives: small(&h)?,
                }),
                None => Valuation::Loss(Loss::Finite {
                    money: small(t)?,
                    lives: 0,
                }),
            },
        };
        self.check(v).map_err(|_| bad())
    }
}

/// How [`verify_structure`] draws its cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    Exhaustive,
    Sampled { count: usize, seed: u64 },
}

impl fmt::Display for VerifyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyMode::Exhaustive => write!(f, "exhaustive"),
            VerifyMode::Sampled { count, seed } => write!(f, "sampled({count},seed={seed})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    Bounds,
    Commutativity,
    Associativity,
    Identity,
    Monotonicity,
    AbsorbingTop,
    Fairness,
}

impl Axiom {
    pub const ALL: [Axiom; 7] = [
        Axiom::Bounds,
        Axiom::Commutativity,
        Axiom::Associativity,
        Axiom::Identity,
        Axiom::Monotonicity,
        Axiom::AbsorbingTop,
        Axiom::Fairness,
    ];
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomCheck {
    pub axiom: Axiom,
    pub cases: u64,
    pub violations: u64,
    /// First violating tuple in scan order.
    pub witness: Option<Vec<Valuation>>,
}

impl AxiomCheck {
    fn new(axiom: Axiom) -> Self {
        AxiomCheck {
            axiom,
            cases: 0,
            violations: 0,
            witness: None,
        }
    }

    fn record(&mut self, ok: bool, witness: &[Valuation]) {
        self.cases += 1;
        if !ok {
            self.violations += 1;
            if self.witness.is_none() {
                self.witness = Some(witness.to_vec());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Outcome of a classification test (idempotence, strict monotonicity).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Property {
    pub holds: bool,
    pub witness: Option<Vec<Valuation>>,
}

impl Property {
    fn scan() -> Self {
        Property {
            holds: true,
            witness: None,
        }
    }

    fn record(&mut self, ok: bool, witness: &[Valuation]) {
        if !ok && self.holds {
            self.holds = false;
            self.witness = Some(witness.to_vec());
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub structure: String,
    pub mode: String,
    pub checks: Vec<AxiomCheck>,
    pub idempotent: Property,
    pub strictly_monotonic: Property,
}

impl AxiomReport {
    pub fn check(&self, axiom: Axiom) -> &AxiomCheck {
        self.checks
            .iter()
            .find(|c| c.axiom == axiom)
            .expect("every axiom is checked")
    }

    pub fn failed_axioms(&self) -> Vec<Axiom> {
        self.checks.iter().filter(|c| !c.passed()).map(|c| c.axiom).collect()
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(AxiomCheck::passed)
    }
}

/// Checks the valuation-structure axioms, fairness and the
/// idempotent / strictly-monotonic classification.
///
/// Exhaustive mode scans every pair and triple of a finite carrier. Fairness
/// is scanned with the minuend ascending and the subtrahend descending, so the
/// first reported witness uses the largest failing subtrahend.
pub fn verify_structure(s: &Structure, mode: VerifyMode) -> Result<AxiomReport> {
    let mut checks: Vec<AxiomCheck> = Axiom::ALL.iter().map(|&a| AxiomCheck::new(a)).collect();
    let mut idempotent = Property::scan();
    let mut strict = Property::scan();

    // try_plus is used directly so that a non-closed operator is reported
    // rather than panicking.
    let add = |a, b| s.try_plus(a, b);
    let (bot, top) = (s.bottom(), s.top());

    let triple = |checks: &mut Vec<AxiomCheck>, strict: &mut Property, a: Valuation, b: Valuation, c: Valuation| {
        let ab_c = add(a, b).and_then(|ab| add(ab, c));
        let a_bc = add(b, c).and_then(|bc| add(a, bc));
        checks[2].record(ab_c.is_some() && ab_c == a_bc, &[a, b, c]);
        if a >= b {
            let (ac, bc) = (add(a, c), add(b, c));
            checks[4].record(matches!((ac, bc), (Some(x), Some(y)) if x >= y), &[a, b, c]);
            if a > b && c != top {
                strict.record(matches!((ac, bc), (Some(x), Some(y)) if x > y), &[a, b, c]);
            }
        }
    };

    let pair = |checks: &mut Vec<AxiomCheck>, a: Valuation, b: Valuation| {
        checks[1].record(add(a, b).is_some() && add(a, b) == add(b, a), &[a, b]);
    };

    let single = |checks: &mut Vec<AxiomCheck>, idem: &mut Property, a: Valuation| {
        checks[0].record(s.contains(a) && bot <= a && a <= top, &[a]);
        checks[3].record(add(a, bot) == Some(a), &[a]);
        checks[5].record(add(a, top) == Some(top), &[a]);
        idem.record(add(a, a) == Some(a), &[a]);
    };

    // Fairness of one ordered pair, maximality tested against `candidates`.
    let fairness = |check: &mut AxiomCheck, beta: Valuation, alpha: Valuation, candidates: &[Valuation]| {
        match s.try_minus(beta, alpha) {
            None => check.record(false, &[beta, alpha]),
            Some(gamma) => {
                if add(gamma, alpha) != Some(beta) {
                    check.record(false, &[beta, alpha, gamma]);
                    return;
                }
                match candidates
                    .iter()
                    .find(|&&d| d > gamma && add(d, alpha) == Some(beta))
                {
                    Some(&d) => check.record(false, &[beta, alpha, d]),
                    None => check.record(true, &[]),
                }
            }
        }
    };

    match mode {
        VerifyMode::Exhaustive => {
            let elements = s.elements().ok_or_else(|| {
                Error::Capability(format!("exhaustive verification of unbounded {s}"))
            })?;
            for &a in &elements {
                single(&mut checks, &mut idempotent, a);
                for &b in &elements {
                    pair(&mut checks, a, b);
                    for &c in &elements {
                        triple(&mut checks, &mut strict, a, b, c);
                    }
                }
            }
            for (bi, &beta) in elements.iter().enumerate() {
                for &alpha in elements[..=bi].iter().rev() {
                    fairness(&mut checks[6], beta, alpha, &elements);
                }
            }
        }
        VerifyMode::Sampled { count, seed } => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..count {
                let (a, b, c) = (s.sample(&mut rng), s.sample(&mut rng), s.sample(&mut rng));
                single(&mut checks, &mut idempotent, a);
                pair(&mut checks, a, b);
                triple(&mut checks, &mut strict, a, b, c);
                triple(&mut checks, &mut strict, b, a, c);
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                let candidates = [c, hi, top];
                fairness(&mut checks[6], hi, lo, &candidates);
            }
        }
    }

    Ok(AxiomReport {
        structure: s.to_string(),
        mode: mode.to_string(),
        checks,
        idempotent,
        strictly_monotonic: strict,
    })
}
