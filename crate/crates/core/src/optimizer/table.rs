//! Monotone cubic (Fritsch–Carlson) interpolation on a uniform grid.

#[derive(Debug, Clone)]
pub(crate) struct UniformPchip {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl UniformPchip {
    pub(crate) fn new(x0: f64, h: f64, y: Vec<f64>) -> Self {
        let n = y.len();
        assert!(n >= 2, "need at least two samples");
        let delta: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let (a, b) = (delta[i - 1], delta[i]);
            if a * b > 0.0 {
                d[i] = 2.0 * a * b / (a + b);
            }
        }
        d[0] = end_slope(&delta, false);
        d[n - 1] = end_slope(&delta, true);
        Self { x0, h, y, d }
    }

    pub(crate) fn eval(&self, x: f64) -> f64 {
        let n = self.y.len();
        let pos = (x - self.x0) / self.h;
        let i = (pos.floor().max(0.0) as usize).min(n - 2);
        let s = pos - i as f64;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h10 * self.h * self.d[i] + h01 * self.y[i + 1] + h11 * self.h * self.d[i + 1]
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.y
    }
}

fn end_slope(delta: &[f64], right: bool) -> f64 {
    if delta.len() == 1 {
        return delta[0];
    }
    let (d0, d1) = if right { (delta[delta.len() - 1], delta[delta.len() - 2]) } else { (delta[0], delta[1]) };
    let d = (3.0 * d0 - d1) / 2.0;
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes_and_smooth_functions() {
        let h = 0.01;
        let y: Vec<f64> = (0..=300).map(|i| (i as f64 * h).sin()).collect();
        let p = UniformPchip::new(0.0, h, y.clone());
        for (i, v) in y.iter().enumerate() {
            assert!((p.eval(i as f64 * h) - v).abs() < 1e-15);
        }
        for k in 0..1000 {
            let x = 0.003 + k as f64 * 0.00297;
            assert!((p.eval(x) - x.sin()).abs() < 5e-6, "x={x}");
        }
    }

    #[test]
    fn stays_monotone() {
        let y = vec![0.0, 0.0, 1.0, 1.0, 1.0, 5.0];
        let p = UniformPchip::new(0.0, 1.0, y);
        let mut last = f64::NEG_INFINITY;
        for k in 0..=500 {
            let v = p.eval(k as f64 / 100.0);
            assert!(v >= last - 1e-15);
            last = v;
        }
    }
}
