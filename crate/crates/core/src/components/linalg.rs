//! Symmetric 2×2 matrices.

use std::ops::{Add, Mul, Sub};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

/// Lower-triangular Cholesky factor `[[l11, 0], [l21, l22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chol2 {
    pub l11: f64,
    pub l21: f64,
    pub l22: f64,
}

impl Sym2 {
    pub const IDENTITY: Sym2 = Sym2 { xx: 1.0, xy: 0.0, yy: 1.0 };
    pub const ZERO: Sym2 = Sym2 { xx: 0.0, xy: 0.0, yy: 0.0 };

    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Sym2 { xx, xy, yy }
    }

    pub fn outer(v: [f64; 2]) -> Self {
        Sym2::new(v[0] * v[0], v[0] * v[1], v[1] * v[1])
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn is_positive_definite(&self) -> bool {
        self.xx > 0.0 && self.det() > 0.0 && self.xx.is_finite() && self.yy.is_finite() && self.xy.is_finite()
    }

    pub fn inverse(&self) -> Result<Sym2> {
        let det = self.det();
        if !(det > 0.0) || !det.is_finite() {
            return domain(format!("matrix {self:?} is not invertible"));
        }
        Ok(Sym2::new(self.yy / det, -self.xy / det, self.xx / det))
    }

    pub fn cholesky(&self) -> Result<Chol2> {
        if !self.is_positive_definite() {
            return domain(format!("matrix {self:?} is not positive definite"));
        }
        let l11 = self.xx.sqrt();
        let l21 = self.xy / l11;
        let l22 = (self.yy - l21 * l21).sqrt();
        if !(l22 > 0.0) {
            return domain(format!("matrix {self:?} is numerically singular"));
        }
        Ok(Chol2 { l11, l21, l22 })
    }

    /// `vᵀ A v`.
    pub fn quad(&self, v: [f64; 2]) -> f64 {
        self.xx * v[0] * v[0] + 2.0 * self.xy * v[0] * v[1] + self.yy * v[1] * v[1]
    }

    pub fn scale(&self, c: f64) -> Sym2 {
        Sym2::new(self.xx * c, self.xy * c, self.yy * c)
    }
}

impl Add for Sym2 {
    type Output = Sym2;
    fn add(self, o: Sym2) -> Sym2 {
        Sym2::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }
}

impl Sub for Sym2 {
    type Output = Sym2;
    fn sub(self, o: Sym2) -> Sym2 {
        Sym2::new(self.xx - o.xx, self.xy - o.xy, self.yy - o.yy)
    }
}

impl Mul<f64> for Sym2 {
    type Output = Sym2;
    fn mul(self, c: f64) -> Sym2 {
        self.scale(c)
    }
}

impl Chol2 {
    /// `L z`.
    pub fn apply(&self, z: [f64; 2]) -> [f64; 2] {
        [self.l11 * z[0], self.l21 * z[0] + self.l22 * z[1]]
    }

    pub fn ln_det(&self) -> f64 {
        2.0 * (self.l11.ln() + self.l22.ln())
    }

    /// `L B Bᵀ Lᵀ` for a lower-triangular `B = [[b11, 0], [b21, b22]]`.
    pub fn sandwich_lower(&self, b11: f64, b21: f64, b22: f64) -> Sym2 {
        // M = L B, lower triangular
        let m11 = self.l11 * b11;
        let m21 = self.l21 * b11 + self.l22 * b21;
        let m22 = self.l22 * b22;
        Sym2::new(m11 * m11, m11 * m21, m21 * m21 + m22 * m22)
    }
}
