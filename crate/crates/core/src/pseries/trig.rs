use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigKind {
    Cos,
    Sin,
}

impl TrigKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TrigKind::Cos => "cos",
            TrigKind::Sin => "sin",
        }
    }

    pub fn eval(self, angle: f64) -> f64 {
        match self {
            TrigKind::Cos => angle.cos(),
            TrigKind::Sin => angle.sin(),
        }
    }

    /// Derivative kind and sign: d/dx cos = -sin, d/dx sin = cos.
    pub fn derivative(self) -> (f64, TrigKind) {
        match self {
            TrigKind::Cos => (-1.0, TrigKind::Sin),
            TrigKind::Sin => (1.0, TrigKind::Cos),
        }
    }
}

impl fmt::Display for TrigKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrigKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cos" | "c" => Ok(TrigKind::Cos),
            "sin" | "s" => Ok(TrigKind::Sin),
            other => Err(format!("unknown trig kind `{other}`")),
        }
    }
}

/// Folds a wave into canonical form (first nonzero component positive).
///
/// Returns the sign to apply to the coefficient, or `None` when the term is
/// identically zero (a sine of the zero wave).
#[inline]
pub fn canonical<const N: usize>(kind: TrigKind, mut k: [i32; N]) -> Option<(f64, TrigKind, [i32; N])> {
    match k.iter().find(|&&x| x != 0) {
        None => match kind {
            TrigKind::Cos => Some((1.0, kind, k)),
            TrigKind::Sin => None,
        },
        Some(&first) if first > 0 => Some((1.0, kind, k)),
        Some(_) => {
            for x in k.iter_mut() {
                *x = -*x;
            }
            let sign = if kind == TrigKind::Sin { -1.0 } else { 1.0 };
            Some((sign, kind, k))
        }
    }
}

#[inline]
pub fn is_canonical<const N: usize>(kind: TrigKind, k: &[i32; N]) -> bool {
    match k.iter().find(|&&x| x != 0) {
        None => kind == TrigKind::Cos,
        Some(&first) => first > 0,
    }
}

/// Product-to-sum for trig(a) * trig(b): two terms (factor, kind, wave), not yet canonical.
#[inline]
pub fn product<const N: usize>(
    ka: TrigKind,
    a: &[i32; N],
    kb: TrigKind,
    b: &[i32; N],
) -> [(f64, TrigKind, [i32; N]); 2] {
    let mut sum = [0i32; N];
    let mut diff = [0i32; N];
    for i in 0..N {
        sum[i] = a[i] + b[i];
        diff[i] = a[i] - b[i];
    }
    use TrigKind::*;
    match (ka, kb) {
        (Cos, Cos) => [(0.5, Cos, diff), (0.5, Cos, sum)],
        (Sin, Sin) => [(0.5, Cos, diff), (-0.5, Cos, sum)],
        (Sin, Cos) => [(0.5, Sin, sum), (0.5, Sin, diff)],
        (Cos, Sin) => [(0.5, Sin, sum), (-0.5, Sin, diff)],
    }
}
