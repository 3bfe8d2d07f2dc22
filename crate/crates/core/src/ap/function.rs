//! Symbolic time functions.
//!
//! A [`FunctionSpec`] is a small expression tree over time `t` and, for
//! parametric coefficients, a state vector `x`. It serializes to JSON as an
//! object tagged by `kind`:
//!
//! ```json
//! {"kind": "compose", "outer": "sin",
//!  "inner": {"kind": "compose", "outer": "recip",
//!            "inner": {"kind": "primitive", "name": "levitan_g"}}}
//! ```
//!
//! | kind         | fields                                   | value                         |
//! |--------------|------------------------------------------|-------------------------------|
//! | `constant`   | `value`                                  | `value`                       |
//! | `trig`       | `terms: [{amplitude, frequency, phase}]` | `Σ a·sin(ω t + φ)`            |
//! | `primitive`  | `name`, optional `params`                | corpus function of `t`        |
//! | `affine`     | `scale`, `offset`, `inner`               | `scale·inner + offset`        |
//! | `compose`    | `outer` (pointwise map), `inner`         | `outer(inner)`                |
//! | `sum`        | `terms`                                  | `Σ terms`                     |
//! | `product`    | `factors`                                | `Π factors`                   |
//! | `parametric` | `form`, `params`                         | state-dependent form `(t, x)` |
//! | `superpose`  | `outer`, `state`                         | `outer(t, state(t))`          |

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::corpus::primitives;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

impl TrigTerm {
    pub fn new(amplitude: f64, frequency: f64, phase: f64) -> Self {
        Self {
            amplitude,
            frequency,
            phase,
        }
    }

    #[inline]
    fn eval(&self, t: f64) -> f64 {
        self.amplitude * (self.frequency * t + self.phase).sin()
    }
}

/// Scalar maps applied pointwise by [`FunctionSpec::Compose`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointwiseMap {
    Sin,
    Cos,
    Exp,
    Abs,
    Recip,
    Square,
    Sqrt,
    Tanh,
    Neg,
}

impl PointwiseMap {
    #[inline]
    pub fn apply(self, v: f64) -> f64 {
        match self {
            PointwiseMap::Sin => v.sin(),
            PointwiseMap::Cos => v.cos(),
            PointwiseMap::Exp => v.exp(),
            PointwiseMap::Abs => v.abs(),
            PointwiseMap::Recip => 1.0 / v,
            PointwiseMap::Square => v * v,
            PointwiseMap::Sqrt => v.sqrt(),
            PointwiseMap::Tanh => v.tanh(),
            PointwiseMap::Neg => -v,
        }
    }
}

/// State-dependent building blocks. `params` are read positionally; a
/// trailing component index defaults to 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamForm {
    /// `[i]` → `x_i`
    State,
    /// `[a, b, i]` → `a·x_i + b`
    Linear,
    /// `[a, i]` → `a·tanh(x_i)`
    Tanh,
    /// `[a, i]` → `a·sin(x_i)`
    SinState,
}

impl ParamForm {
    fn index_slot(self) -> usize {
        match self {
            ParamForm::State => 0,
            ParamForm::Linear => 2,
            ParamForm::Tanh | ParamForm::SinState => 1,
        }
    }

    fn component(self, params: &[f64]) -> Result<usize> {
        let raw = params.get(self.index_slot()).copied().unwrap_or(0.0);
        if raw < 0.0 || raw.fract() != 0.0 || !raw.is_finite() {
            return Err(Error::invalid(format!(
                "state index {raw} for {self:?} is not a non-negative integer"
            )));
        }
        Ok(raw as usize)
    }

    fn coeff(params: &[f64], i: usize, default: f64) -> f64 {
        params.get(i).copied().unwrap_or(default)
    }

    fn eval(self, params: &[f64], x: &[f64]) -> Result<f64> {
        let i = self.component(params)?;
        let xi = *x.get(i).ok_or(Error::DimensionMismatch {
            expected: i + 1,
            got: x.len(),
        })?;
        Ok(match self {
            ParamForm::State => xi,
            ParamForm::Linear => Self::coeff(params, 0, 1.0) * xi + Self::coeff(params, 1, 0.0),
            ParamForm::Tanh => Self::coeff(params, 0, 1.0) * xi.tanh(),
            ParamForm::SinState => Self::coeff(params, 0, 1.0) * xi.sin(),
        })
    }

    /// Lipschitz constant in `x` of the form.
    fn lipschitz(self, params: &[f64]) -> f64 {
        match self {
            ParamForm::State => 1.0,
            ParamForm::Linear | ParamForm::Tanh | ParamForm::SinState => Self::coeff(params, 0, 1.0).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    Constant {
        value: f64,
    },
    Trig {
        terms: Vec<TrigTerm>,
    },
    Primitive {
        name: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        params: Vec<f64>,
    },
    Affine {
        scale: f64,
        offset: f64,
        inner: Box<FunctionSpec>,
    },
    Compose {
        outer: PointwiseMap,
        inner: Box<FunctionSpec>,
    },
    Sum {
        terms: Vec<FunctionSpec>,
    },
    Product {
        factors: Vec<FunctionSpec>,
    },
    Parametric {
        form: ParamForm,
        #[serde(default)]
        params: Vec<f64>,
    },
    Superpose {
        outer: Box<FunctionSpec>,
        state: Vec<FunctionSpec>,
    },
}

impl FunctionSpec {
    pub fn constant(value: f64) -> Self {
        FunctionSpec::Constant { value }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn sin() -> Self {
        Self::trig(&[(1.0, 1.0, 0.0)])
    }

    pub fn cos() -> Self {
        Self::trig(&[(1.0, 1.0, FRAC_PI_2)])
    }

    /// Trigonometric polynomial from `(amplitude, frequency, phase)` triples.
    pub fn trig(terms: &[(f64, f64, f64)]) -> Self {
        FunctionSpec::Trig {
            terms: terms.iter().map(|&(a, w, p)| TrigTerm::new(a, w, p)).collect(),
        }
    }

    pub fn primitive(name: &str) -> Self {
        FunctionSpec::Primitive {
            name: name.to_string(),
            params: Vec::new(),
        }
    }

    pub fn time() -> Self {
        Self::primitive("time")
    }

    pub fn affine(scale: f64, offset: f64, inner: FunctionSpec) -> Self {
        FunctionSpec::Affine {
            scale,
            offset,
            inner: Box::new(inner),
        }
    }

    pub fn map(outer: PointwiseMap, inner: FunctionSpec) -> Self {
        FunctionSpec::Compose {
            outer,
            inner: Box::new(inner),
        }
    }

    pub fn sum(terms: Vec<FunctionSpec>) -> Self {
        FunctionSpec::Sum { terms }
    }

    pub fn product(factors: Vec<FunctionSpec>) -> Self {
        FunctionSpec::Product { factors }
    }

    /// `x_i`
    pub fn state(i: usize) -> Self {
        FunctionSpec::Parametric {
            form: ParamForm::State,
            params: vec![i as f64],
        }
    }

    /// `a·x_i + b`
    pub fn linear(a: f64, b: f64, i: usize) -> Self {
        FunctionSpec::Parametric {
            form: ParamForm::Linear,
            params: vec![a, b, i as f64],
        }
    }

    /// Evaluate a function of time only.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.eval_state(t, &[])
    }

    /// Evaluate at time `t` and state `x`.
    pub fn eval_state(&self, t: f64, x: &[f64]) -> Result<f64> {
        let v = self.eval_raw(t, x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { t })
        }
    }

    fn eval_raw(&self, t: f64, x: &[f64]) -> Result<f64> {
        Ok(match self {
            FunctionSpec::Constant { value } => *value,
            FunctionSpec::Trig { terms } => terms.iter().map(|term| term.eval(t)).sum(),
            FunctionSpec::Primitive { name, params } => primitives::eval(name, params, t)?,
            FunctionSpec::Affine { scale, offset, inner } => scale * inner.eval_raw(t, x)? + offset,
            FunctionSpec::Compose { outer, inner } => outer.apply(inner.eval_raw(t, x)?),
            FunctionSpec::Sum { terms } => {
                let mut acc = 0.0;
                for term in terms {
                    acc += term.eval_raw(t, x)?;
                }
                acc
            }
            FunctionSpec::Product { factors } => {
                let mut acc = 1.0;
                for factor in factors {
                    acc *= factor.eval_raw(t, x)?;
                }
                acc
            }
            FunctionSpec::Parametric { form, params } => form.eval(params, x)?,
            FunctionSpec::Superpose { outer, state } => {
                let mut inner = Vec::with_capacity(state.len());
                for s in state {
                    inner.push(s.eval_raw(t, x)?);
                }
                outer.eval_raw(t, &inner)?
            }
        })
    }

    /// Number of state components this spec reads (0 for pure time functions).
    pub fn state_dim(&self) -> usize {
        match self {
            FunctionSpec::Constant { .. } | FunctionSpec::Trig { .. } | FunctionSpec::Primitive { .. } => 0,
            FunctionSpec::Affine { inner, .. } | FunctionSpec::Compose { inner, .. } => inner.state_dim(),
            FunctionSpec::Sum { terms } => terms.iter().map(Self::state_dim).max().unwrap_or(0),
            FunctionSpec::Product { factors } => factors.iter().map(Self::state_dim).max().unwrap_or(0),
            FunctionSpec::Parametric { form, params } => form.component(params).map(|i| i + 1).unwrap_or(usize::MAX),
            FunctionSpec::Superpose { state, .. } => state.iter().map(Self::state_dim).max().unwrap_or(0),
        }
    }

    /// Validate primitive names and parametric indices without evaluating.
    pub fn validate(&self) -> Result<()> {
        match self {
            FunctionSpec::Constant { .. } | FunctionSpec::Trig { .. } => Ok(()),
            FunctionSpec::Primitive { name, params } => primitives::check(name, params),
            FunctionSpec::Affine { inner, .. } | FunctionSpec::Compose { inner, .. } => inner.validate(),
            FunctionSpec::Sum { terms } => terms.iter().try_for_each(Self::validate),
            FunctionSpec::Product { factors } => factors.iter().try_for_each(Self::validate),
            FunctionSpec::Parametric { form, params } => form.component(params).map(|_| ()),
            FunctionSpec::Superpose { outer, state } => {
                outer.validate()?;
                state.iter().try_for_each(Self::validate)?;
                let need = outer.state_dim();
                if need > state.len() {
                    return Err(Error::DimensionMismatch {
                        expected: need,
                        got: state.len(),
                    });
                }
                Ok(())
            }
        }
    }

    /// True when the value does not depend on the state argument.
    pub fn is_time_only(&self) -> bool {
        self.state_dim() == 0
    }

    /// An upper bound on the Lipschitz constant in the state argument, when
    /// the tree is affine in `x` with time-only coefficients bounded by their
    /// trigonometric/constant magnitudes. `None` when no bound is derivable.
    pub fn state_lipschitz_bound(&self) -> Option<f64> {
        match self {
            FunctionSpec::Constant { .. } | FunctionSpec::Trig { .. } | FunctionSpec::Primitive { .. } => Some(0.0),
            FunctionSpec::Parametric { form, params } => Some(form.lipschitz(params)),
            FunctionSpec::Affine { scale, inner, .. } => inner.state_lipschitz_bound().map(|l| l * scale.abs()),
            FunctionSpec::Sum { terms } => terms.iter().map(Self::state_lipschitz_bound).sum(),
            FunctionSpec::Product { factors } => {
                let dependent: Vec<_> = factors.iter().filter(|f| !f.is_time_only()).collect();
                match dependent.as_slice() {
                    [] => Some(0.0),
                    [one] => {
                        let mut bound = one.state_lipschitz_bound()?;
                        for f in factors.iter().filter(|f| f.is_time_only()) {
                            bound *= f.sup_bound()?;
                        }
                        Some(bound)
                    }
                    _ => None,
                }
            }
            FunctionSpec::Compose { outer, inner } => {
                if inner.is_time_only() {
                    Some(0.0)
                } else {
                    match outer {
                        PointwiseMap::Sin
                        | PointwiseMap::Cos
                        | PointwiseMap::Tanh
                        | PointwiseMap::Abs
                        | PointwiseMap::Neg => inner.state_lipschitz_bound(),
                        _ => None,
                    }
                }
            }
            FunctionSpec::Superpose { .. } => None,
        }
    }

    /// A crude bound on `sup_t |f(t)|` for time-only trees built from
    /// constants, trigonometric terms and bounded maps.
    pub fn sup_bound(&self) -> Option<f64> {
        match self {
            FunctionSpec::Constant { value } => Some(value.abs()),
            FunctionSpec::Trig { terms } => Some(terms.iter().map(|t| t.amplitude.abs()).sum()),
            FunctionSpec::Affine { scale, offset, inner } => inner.sup_bound().map(|b| scale.abs() * b + offset.abs()),
            FunctionSpec::Compose { outer, inner } => match outer {
                PointwiseMap::Sin | PointwiseMap::Cos | PointwiseMap::Tanh => Some(1.0),
                PointwiseMap::Abs | PointwiseMap::Neg => inner.sup_bound(),
                PointwiseMap::Square => inner.sup_bound().map(|b| b * b),
                _ => None,
            },
            FunctionSpec::Sum { terms } => terms.iter().map(Self::sup_bound).sum(),
            FunctionSpec::Product { factors } => factors.iter().map(Self::sup_bound).product(),
            FunctionSpec::Primitive { name, .. } => match name.as_str() {
                "levitan_H" => Some(1.0),
                "levitan_g" => Some(4.0),
                _ => None,
            },
            FunctionSpec::Parametric { .. } | FunctionSpec::Superpose { .. } => None,
        }
    }

    /// An antiderivative in `t`, when one is known in closed form.
    pub fn antiderivative(&self) -> Option<FunctionSpec> {
        match self {
            FunctionSpec::Constant { value } => Some(Self::affine(*value, 0.0, Self::time())),
            FunctionSpec::Trig { terms } => {
                if terms.iter().any(|term| term.frequency == 0.0) {
                    return None;
                }
                // ∫ a sin(ωt + φ) = -(a/ω) cos(ωt + φ) = (a/ω) sin(ωt + φ - π/2)
                Some(FunctionSpec::Trig {
                    terms: terms
                        .iter()
                        .map(|term| {
                            TrigTerm::new(term.amplitude / term.frequency, term.frequency, term.phase - FRAC_PI_2)
                        })
                        .collect(),
                })
            }
            FunctionSpec::Primitive { name, params } => {
                primitives::antiderivative(name, params).map(|(name, params)| FunctionSpec::Primitive {
                    name: name.to_string(),
                    params,
                })
            }
            FunctionSpec::Affine { scale, offset, inner } => {
                let inner = inner.antiderivative()?;
                Some(Self::sum(vec![
                    Self::affine(*scale, 0.0, inner),
                    Self::affine(*offset, 0.0, Self::time()),
                ]))
            }
            FunctionSpec::Sum { terms } => terms
                .iter()
                .map(Self::antiderivative)
                .collect::<Option<Vec<_>>>()
                .map(Self::sum),
            _ => None,
        }
    }

    /// Exact period of a trigonometric polynomial whose frequencies are
    /// rational multiples of each other. Constant polynomials have no
    /// period and return `None`.
    pub fn period(&self) -> Option<f64> {
        let FunctionSpec::Trig { terms } = self else {
            return None;
        };
        let freqs: Vec<f64> = terms
            .iter()
            .filter(|t| t.amplitude != 0.0 && t.frequency != 0.0)
            .map(|t| t.frequency.abs())
            .collect();
        let base = *freqs.first()?;
        let ratios = freqs
            .iter()
            .map(|w| rational_approx(w / base, 1_000_000, 1e-12))
            .collect::<Option<Vec<(u64, u64)>>>()?;
        let den = ratios.iter().fold(1u64, |acc, &(_, q)| lcm(acc, q));
        let num_gcd = ratios.iter().fold(0u64, |acc, &(p, q)| gcd(acc, p * (den / q)));
        // every frequency is an integer multiple of base·num_gcd/den
        let fundamental = base * num_gcd as f64 / den as f64;
        Some(2.0 * PI / fundamental)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Continued-fraction approximation `p/q ≈ x` with `q ≤ max_den`.
fn rational_approx(x: f64, max_den: u64, tol: f64) -> Option<(u64, u64)> {
    if x <= 0.0 || !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > u32::MAX as f64 {
            return None;
        }
        let a = a as u64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if ((h1 as f64 / k1 as f64) - x).abs() <= tol * x.max(1.0) {
            return Some((h1, k1));
        }
        let frac = r - a as f64;
        if frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

/// Nemytskii superposition `t ↦ f(t, u(t))`.
pub fn compose(f_param: &FunctionSpec, u: &[FunctionSpec]) -> Result<FunctionSpec> {
    let need = f_param.state_dim();
    if need != u.len() {
        return Err(Error::DimensionMismatch {
            expected: need,
            got: u.len(),
        });
    }
    if let Some(bad) = u.iter().find(|c| !c.is_time_only()) {
        return Err(Error::DimensionMismatch {
            expected: 0,
            got: bad.state_dim(),
        });
    }
    Ok(FunctionSpec::Superpose {
        outer: Box::new(f_param.clone()),
        state: u.to_vec(),
    })
}
