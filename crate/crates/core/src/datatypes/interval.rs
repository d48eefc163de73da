//! Sorted, disjoint unions of rational intervals.
//!
//! Every numeric derived datatype is evaluated to an [`IntervalSet`] over the
//! rationals; discrete datatypes are handled by intersecting with the integers
//! only when emptiness or witnesses are asked for.

use alloc::vec::Vec;
use core::cmp::Ordering;

use num_rational::BigRational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Lower {
    NegInf,
    Closed(BigRational),
    Open(BigRational),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Upper {
    PosInf,
    Closed(BigRational),
    Open(BigRational),
}

fn cmp_lower(a: &Lower, b: &Lower) -> Ordering {
    match (a, b) {
        (Lower::NegInf, Lower::NegInf) => Ordering::Equal,
        (Lower::NegInf, _) => Ordering::Less,
        (_, Lower::NegInf) => Ordering::Greater,
        (Lower::Closed(x), Lower::Closed(y)) | (Lower::Open(x), Lower::Open(y)) => x.cmp(y),
        (Lower::Closed(x), Lower::Open(y)) => x.cmp(y).then(Ordering::Less),
        (Lower::Open(x), Lower::Closed(y)) => x.cmp(y).then(Ordering::Greater),
    }
}

fn cmp_upper(a: &Upper, b: &Upper) -> Ordering {
    match (a, b) {
        (Upper::PosInf, Upper::PosInf) => Ordering::Equal,
        (Upper::PosInf, _) => Ordering::Greater,
        (_, Upper::PosInf) => Ordering::Less,
        (Upper::Closed(x), Upper::Closed(y)) | (Upper::Open(x), Upper::Open(y)) => x.cmp(y),
        (Upper::Closed(x), Upper::Open(y)) => x.cmp(y).then(Ordering::Greater),
        (Upper::Open(x), Upper::Closed(y)) => x.cmp(y).then(Ordering::Less),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Interval {
    pub lo: Lower,
    pub hi: Upper,
}

impl Interval {
    pub fn full() -> Self {
        Interval { lo: Lower::NegInf, hi: Upper::PosInf }
    }

    pub fn point(v: BigRational) -> Self {
        Interval { lo: Lower::Closed(v.clone()), hi: Upper::Closed(v) }
    }

    /// Empty over the rationals.
    pub fn is_empty(&self) -> bool {
        match (&self.lo, &self.hi) {
            (Lower::NegInf, _) | (_, Upper::PosInf) => false,
            (Lower::Closed(a), Upper::Closed(b)) => a > b,
            (Lower::Closed(a), Upper::Open(b))
            | (Lower::Open(a), Upper::Closed(b))
            | (Lower::Open(a), Upper::Open(b)) => a >= b,
        }
    }

    #[cfg(test)]
    pub fn contains(&self, v: &BigRational) -> bool {
        let above = match &self.lo {
            Lower::NegInf => true,
            Lower::Closed(a) => v >= a,
            Lower::Open(a) => v > a,
        };
        let below = match &self.hi {
            Upper::PosInf => true,
            Upper::Closed(b) => v <= b,
            Upper::Open(b) => v < b,
        };
        above && below
    }

    fn intersect(&self, other: &Interval) -> Interval {
        let lo = if cmp_lower(&self.lo, &other.lo) == Ordering::Less {
            other.lo.clone()
        } else {
            self.lo.clone()
        };
        let hi = if cmp_upper(&self.hi, &other.hi) == Ordering::Greater {
            other.hi.clone()
        } else {
            self.hi.clone()
        };
        Interval { lo, hi }
    }
}

/// True when `a` (ending at `hi`) and the next interval (starting at `lo`)
/// overlap or touch without leaving a gap.
fn connects(hi: &Upper, lo: &Lower) -> bool {
    match (hi, lo) {
        (Upper::PosInf, _) | (_, Lower::NegInf) => true,
        (Upper::Closed(a), Lower::Closed(b))
        | (Upper::Closed(a), Lower::Open(b))
        | (Upper::Open(a), Lower::Closed(b)) => b <= a,
        (Upper::Open(a), Lower::Open(b)) => b < a,
    }
}

fn max_upper(a: Upper, b: Upper) -> Upper {
    if cmp_upper(&a, &b) == Ordering::Less {
        b
    } else {
        a
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub(crate) struct IntervalSet {
    items: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { items: Vec::new() }
    }

    pub fn full() -> Self {
        IntervalSet { items: alloc::vec![Interval::full()] }
    }

    pub fn from_interval(iv: Interval) -> Self {
        Self::normalized(alloc::vec![iv])
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a BigRational>) -> Self {
        Self::normalized(points.into_iter().cloned().map(Interval::point).collect())
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.items
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    #[cfg(test)]
    pub fn contains(&self, v: &BigRational) -> bool {
        self.items.iter().any(|iv| iv.contains(v))
    }

    fn normalized(mut items: Vec<Interval>) -> Self {
        items.retain(|iv| !iv.is_empty());
        items.sort_by(|a, b| cmp_lower(&a.lo, &b.lo));
        let mut out: Vec<Interval> = Vec::with_capacity(items.len());
        for iv in items {
            if let Some(last) = out.last_mut() {
                if connects(&last.hi, &iv.lo) {
                    let hi = core::mem::replace(&mut last.hi, Upper::PosInf);
                    last.hi = max_upper(hi, iv.hi);
                    continue;
                }
            }
            out.push(iv);
        }
        IntervalSet { items: out }
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut all = self.items.clone();
        all.extend(other.items.iter().cloned());
        Self::normalized(all)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        for a in &self.items {
            for b in &other.items {
                let iv = a.intersect(b);
                if !iv.is_empty() {
                    out.push(iv);
                }
            }
        }
        Self::normalized(out)
    }

    pub fn complement(&self) -> IntervalSet {
        let mut out = Vec::new();
        let mut cursor = Lower::NegInf;
        for iv in &self.items {
            let hi = match &iv.lo {
                Lower::NegInf => None,
                Lower::Closed(v) => Some(Upper::Open(v.clone())),
                Lower::Open(v) => Some(Upper::Closed(v.clone())),
            };
            if let Some(hi) = hi {
                out.push(Interval { lo: cursor.clone(), hi });
            }
            cursor = match &iv.hi {
                // Nothing follows an unbounded interval.
                Upper::PosInf => return Self::normalized(out),
                Upper::Closed(v) => Lower::Open(v.clone()),
                Upper::Open(v) => Lower::Closed(v.clone()),
            };
        }
        out.push(Interval { lo: cursor, hi: Upper::PosInf });
        Self::normalized(out)
    }

    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        self.intersect(&other.complement())
    }
}
