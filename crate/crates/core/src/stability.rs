//! Linearization of the slow-amplitude equation in quadrature coordinates
//! `(u, v) = (Re A, Im A)`.

use num_complex::Complex64;

/// Coefficients of the homogeneous part of the slow-amplitude equation
/// `dA/dt = i (delta A + eps A* + alpha |A|^2 A) - Gamma A - i sqrt(2 Gamma_0) B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowFlow {
    pub delta: f64,
    pub eps: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl SlowFlow {
    /// Jacobian `d(du/dt, dv/dt) / d(u, v)` at amplitude `a`.
    pub fn jacobian(&self, a: Complex64) -> [[f64; 2]; 2] {
        let (u, v) = (a.re, a.im);
        let z = self.delta + self.alpha * a.norm_sqr();
        let two_alpha = 2.0 * self.alpha;
        [
            [-two_alpha * u * v - self.gamma, self.eps - z - two_alpha * v * v],
            [self.eps + z + two_alpha * u * u, two_alpha * u * v - self.gamma],
        ]
    }

    pub fn eigenvalues(&self, a: Complex64) -> [Complex64; 2] {
        eigenvalues_2x2(&self.jacobian(a))
    }

    /// True when both eigenvalues have strictly negative real part.
    pub fn is_stable(&self, a: Complex64) -> bool {
        self.eigenvalues(a).iter().all(|l| l.re < 0.0)
    }
}

pub fn eigenvalues_2x2(m: &[[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let half = 0.5 * tr;
    let disc = half * half - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        // larger-magnitude root first, the other from det / root
        let big = if half >= 0.0 { half + r } else { half - r };
        let small = if big != 0.0 { det / big } else { 0.0 };
        [Complex64::new(big.max(small), 0.0), Complex64::new(big.min(small), 0.0)]
    } else {
        let im = (-disc).sqrt();
        [Complex64::new(half, im), Complex64::new(half, -im)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_solution_eigenvalues() {
        // -Gamma +- sqrt(eps^2 - delta^2)
        let flow = SlowFlow { delta: 0.6, eps: 1.0, alpha: 0.3, gamma: 1.0 };
        let ev = flow.eigenvalues(Complex64::new(0.0, 0.0));
        assert!((ev[0].re - (-0.2)).abs() < 1e-14);
        assert!((ev[1].re - (-1.8)).abs() < 1e-14);

        let flow = SlowFlow { delta: 2.0, eps: 1.0, alpha: 0.0, gamma: 0.5 };
        let ev = flow.eigenvalues(Complex64::new(0.0, 0.0));
        assert_eq!(ev[0].re, -0.5);
        assert!((ev[0].im - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn trace_is_minus_two_gamma() {
        let flow = SlowFlow { delta: -0.4, eps: 0.7, alpha: 1.3, gamma: 0.25 };
        let j = flow.jacobian(Complex64::new(0.8, -1.1));
        assert!((j[0][0] + j[1][1] + 0.5).abs() < 1e-14);
    }
}
