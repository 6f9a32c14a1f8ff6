//! Dense truncated power series in two variables (x, y).

#[derive(Clone, Debug, PartialEq)]
pub struct Biv {
    deg: usize,
    c: Vec<f64>,
}

#[inline]
fn idx(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

impl Biv {
    pub fn zero(deg: usize) -> Self {
        Self { deg, c: vec![0.0; idx(0, deg + 1)] }
    }

    pub fn constant(v: f64, deg: usize) -> Self {
        let mut s = Self::zero(deg);
        s.c[0] = v;
        s
    }

    /// a + bx·x + by·y
    pub fn linear(a: f64, bx: f64, by: f64, deg: usize) -> Self {
        let mut s = Self::constant(a, deg);
        if deg >= 1 {
            s.c[idx(1, 0)] = bx;
            s.c[idx(0, 1)] = by;
        }
        s
    }

    pub fn degree(&self) -> usize {
        self.deg
    }

    /// Coefficient of x^i y^j.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + j > self.deg {
            0.0
        } else {
            self.c[idx(i, j)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.c[idx(i, j)] = v;
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..=self.deg).flat_map(move |d| (0..=d).map(move |j| (d - j, j, self.c[idx(d - j, j)])))
    }

    pub fn add(&self, o: &Self) -> Self {
        self.axpy(1.0, o)
    }

    pub fn axpy(&self, a: f64, o: &Self) -> Self {
        let mut s = self.clone();
        for (x, y) in s.c.iter_mut().zip(&o.c) {
            *x += a * y;
        }
        s
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { deg: self.deg, c: self.c.iter().map(|v| v * a).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.deg;
        let mut out = Self::zero(n);
        for da in 0..=n {
            for ja in 0..=da {
                let a = self.c[idx(da - ja, ja)];
                if a == 0.0 {
                    continue;
                }
                for db in 0..=(n - da) {
                    for jb in 0..=db {
                        let b = o.c[idx(db - jb, jb)];
                        out.c[idx(da - ja + db - jb, ja + jb)] += a * b;
                    }
                }
            }
        }
        out
    }

    /// Σ_k coeffs[k]·T^k for T = self with zero constant term (Horner).
    pub fn compose(&self, coeffs: &[f64]) -> Self {
        debug_assert_eq!(self.c[0], 0.0);
        let mut r = Self::zero(self.deg);
        for &ck in coeffs.iter().rev() {
            r = r.mul(self);
            r.c[0] += ck;
        }
        r
    }

    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        self.iter().map(|(i, j, c)| c * x.powi(i as i32) * y.powi(j as i32)).sum()
    }
}

/// Taylor coefficients of (1 + t)^p up to order n.
pub fn binomial_series(p: f64, n: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(n + 1);
    let mut c = 1.0;
    for k in 0..=n {
        if k > 0 {
            c *= (p - (k - 1) as f64) / k as f64;
        }
        v.push(c);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_squares_back() {
        let t = Biv::linear(0.0, 0.3, -0.2, 6);
        let r = t.compose(&binomial_series(0.5, 6));
        let sq = r.mul(&r);
        let one_plus_t = t.add(&Biv::constant(1.0, 6));
        for (a, b) in sq.c.iter().zip(&one_plus_t.c) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
