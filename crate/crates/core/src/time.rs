//! Observation times, with an explicit sentinel for the jammed limit.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A point in time, either finite or the `t = ∞` limit.
///
/// Every operation maps [`Time::Infinity`] to `u = 1` before doing any
/// arithmetic, so `e^{-t}` is never evaluated at infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Time {
    Finite(f64),
    Infinity,
}

impl Time {
    /// Builds a time from a float; `+inf` maps to the sentinel.
    pub fn new(t: f64) -> Result<Self> {
        if t == f64::INFINITY {
            Ok(Time::Infinity)
        } else if t.is_finite() && t >= 0.0 {
            Ok(Time::Finite(t))
        } else {
            Err(Error::Domain(format!("time must be nonnegative, got {t}")))
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Time::Infinity)
    }

    /// Rejects negative or NaN finite times.
    pub fn check(self) -> Result<Self> {
        match self {
            Time::Finite(t) => Time::new(t),
            Time::Infinity => Ok(self),
        }
    }

    /// `u = 1 - e^{-t}`, computed without cancellation for small `t`.
    pub fn u(self) -> f64 {
        match self {
            Time::Finite(t) => -(-t).exp_m1(),
            Time::Infinity => 1.0,
        }
    }

    /// `e^{-t}`, zero at infinity.
    pub fn decay(self) -> f64 {
        match self {
            Time::Finite(t) => (-t).exp(),
            Time::Infinity => 0.0,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Time::Finite(t) => t,
            Time::Infinity => f64::INFINITY,
        }
    }

    /// Whether an event at `event_time` has happened by this time.
    #[inline]
    pub fn reached(self, event_time: f64) -> bool {
        match self {
            Time::Finite(t) => event_time <= t,
            Time::Infinity => event_time.is_finite(),
        }
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Time::Finite(t) => write!(f, "{t}"),
            Time::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Time {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" | "+infinity" => Ok(Time::Infinity),
            _ => {
                let t: f64 = s
                    .parse()
                    .map_err(|_| Error::Domain(format!("cannot parse time {s:?}")))?;
                Time::new(t)
            }
        }
    }
}

/// Parses a comma-separated list such as `0.5,1,inf`.
pub fn parse_time_list(s: &str) -> Result<Vec<Time>> {
    s.split(',')
        .filter(|part| !part.trim().is_empty())
        .map(str::parse)
        .collect()
}

impl Serialize for Time {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Time::Finite(t) => serializer.serialize_f64(*t),
            Time::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Time {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct TimeVisitor;

        impl Visitor<'_> for TimeVisitor {
            type Value = Time;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative number or \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Time, E> {
                Time::new(v).map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Time, E> {
                Time::new(v as f64).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Time, E> {
                Time::new(v as f64).map_err(E::custom)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Time, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(TimeVisitor)
    }
}
