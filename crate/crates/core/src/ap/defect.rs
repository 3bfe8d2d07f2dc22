//! Stepanov uniform-integrability defect.
//!
//! For each unit window `[ξ, ξ + 1]` the largest possible mass of `|f|^p`
//! carried by a set of Lebesgue measure `delta_mass` is approximated by
//! taking node contributions `|f(t_k)|^p·dt` in decreasing order until the
//! accumulated node measure reaches `delta_mass` (the last node counted
//! fractionally). The defect is the supremum over grid windows.

use std::collections::BTreeSet;

use super::grid::SampledPath;
use crate::error::{Error, Result};

/// Nonnegative finite floats order like their bit patterns.
type Key = (u64, usize);

fn key(v: f64, idx: usize) -> Key {
    debug_assert!(v >= 0.0);
    (v.to_bits(), idx)
}

/// Multiset split into the `cap` largest entries and the rest.
struct TopK {
    cap: usize,
    top: BTreeSet<Key>,
    rest: BTreeSet<Key>,
}

impl TopK {
    fn new(cap: usize) -> Self {
        Self {
            cap,
            top: BTreeSet::new(),
            rest: BTreeSet::new(),
        }
    }

    fn insert(&mut self, k: Key) {
        self.top.insert(k);
        if self.top.len() > self.cap {
            let low = self.top.pop_first().expect("non-empty");
            self.rest.insert(low);
        }
    }

    fn remove(&mut self, k: &Key) {
        if self.top.remove(k) {
            if let Some(high) = self.rest.pop_last() {
                self.top.insert(high);
            }
        } else {
            self.rest.remove(k);
        }
    }

    /// Sum of the `full` largest plus `frac` of the next one.
    fn partial_sum(&self, full: usize, frac: f64) -> f64 {
        let mut it = self.top.iter().rev().map(|&(bits, _)| f64::from_bits(bits));
        let mut acc = 0.0;
        for _ in 0..full {
            match it.next() {
                Some(v) => acc += v,
                None => return acc,
            }
        }
        if frac > 0.0 {
            if let Some(v) = it.next() {
                acc += frac * v;
            }
        }
        acc
    }
}

pub fn mp_prime_defect(f: &SampledPath, p: f64, delta_mass: f64) -> Result<f64> {
    if !(delta_mass > 0.0 && delta_mass <= 1.0) {
        return Err(Error::invalid(format!("delta_mass = {delta_mass} must lie in (0, 1]")));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::invalid(format!("exponent {p} must be positive")));
    }
    let dt = f.window().dt();
    let w = (1.0 / dt).round() as usize;
    if f.len() < w + 1 {
        return Err(Error::WindowTooShort {
            required: 1.0,
            available: f.window().span(),
        });
    }
    let contrib: Vec<f64> = f
        .norms()
        .into_iter()
        .map(|v| if p == 1.0 { v * dt } else { v.powf(p) * dt })
        .collect();
    if let Some(k) = contrib.iter().position(|c| !c.is_finite()) {
        return Err(Error::NonFinite { t: f.window().node(k) });
    }
    let nodes = delta_mass / dt;
    let mut full = (nodes + 1e-9).floor() as usize;
    let mut frac = nodes - full as f64;
    if frac < 1e-9 {
        frac = 0.0;
    }
    if full > w + 1 {
        full = w + 1;
        frac = 0.0;
    }
    let mut top = TopK::new(full + 1);
    for (i, &c) in contrib.iter().take(w + 1).enumerate() {
        top.insert(key(c, i));
    }
    let mut best = top.partial_sum(full, frac);
    for start in 1..contrib.len() - w {
        top.remove(&key(contrib[start - 1], start - 1));
        let j = start + w;
        top.insert(key(contrib[j], j));
        best = best.max(top.partial_sum(full, frac));
    }
    Ok(best)
}
