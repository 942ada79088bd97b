//! Classical fixed-step fourth-order Runge-Kutta on flat state vectors.

use alloc::vec::Vec;

/// Scratch buffers for repeated RK4 steps on a state of fixed length.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    stage: Vec<f64>,
}

impl Rk4 {
    pub fn new(len: usize) -> Self {
        let z = alloc::vec![0.0; len];
        Self { k1: z.clone(), k2: z.clone(), k3: z.clone(), k4: z.clone(), stage: z }
    }

    pub fn len(&self) -> usize {
        self.k1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k1.is_empty()
    }

    /// Advances `y` by one step of size `h`. `f(t, y, dydt)` writes the derivative.
    pub fn step<F>(&mut self, t: f64, h: f64, y: &mut [f64], mut f: F)
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        debug_assert_eq!(y.len(), self.len());
        let half = 0.5 * h;

        f(t, y, &mut self.k1);
        for i in 0..y.len() {
            self.stage[i] = y[i] + half * self.k1[i];
        }
        f(t + half, &self.stage, &mut self.k2);
        for i in 0..y.len() {
            self.stage[i] = y[i] + half * self.k2[i];
        }
        f(t + half, &self.stage, &mut self.k3);
        for i in 0..y.len() {
            self.stage[i] = y[i] + h * self.k3[i];
        }
        f(t + h, &self.stage, &mut self.k4);

        let sixth = h / 6.0;
        for i in 0..y.len() {
            y[i] += sixth * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// Number of fixed steps covering a span of `span` at nominal size `h`.
///
/// Values within 1e-9 relative of an integer are not rounded up, so
/// `200 / 0.001` gives 200000 steps rather than 200001.
pub fn step_count(span: f64, h: f64) -> usize {
    let ratio = span / h;
    let nearest = libm::round(ratio);
    if libm::fabs(ratio - nearest) <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        libm::ceil(ratio) as usize
    }
}
