//! Small numerical helpers shared across modules.

/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn csum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Trapezoid rule on a uniform grid with spacing `dx`.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    trapezoid_by(values.len(), dx, |i| values[i])
}

/// Trapezoid rule where the i-th sample is produced by `f(i)`.
pub fn trapezoid_by<F: Fn(usize) -> f64>(n: usize, dx: f64, f: F) -> f64 {
    match n {
        0 => 0.0,
        1 => 0.0,
        _ => {
            let mut acc = CompensatedSum::new();
            acc.add(0.5 * f(0));
            for i in 1..n - 1 {
                acc.add(f(i));
            }
            acc.add(0.5 * f(n - 1));
            acc.value() * dx
        }
    }
}

/// Composite Simpson weights (relative to the step) for `n` points, `n` odd.
pub fn simpson_weights(n: usize) -> Vec<f64> {
    assert!(n >= 3 && n % 2 == 1, "Simpson's rule needs an odd number of points >= 3");
    (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                1.0 / 3.0
            } else if i % 2 == 1 {
                4.0 / 3.0
            } else {
                2.0 / 3.0
            }
        })
        .collect()
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut xs = vec![1.0, 1e100, 1.0, -1e100];
        xs.extend(std::iter::repeat_n(1e-16, 10));
        let s = csum(xs);
        assert!((s - (2.0 + 1e-15)).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_is_exact_on_linear_functions() {
        let dx = 0.1;
        let v: Vec<f64> = (0..11).map(|i| 2.0 * i as f64 * dx + 1.0).collect();
        assert!((trapezoid(&v, dx) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_integrates_cubics_exactly() {
        let n = 9;
        let h = 0.25;
        let w = simpson_weights(n);
        let s: f64 = (0..n)
            .map(|i| {
                let x = i as f64 * h;
                w[i] * (x * x * x - x + 3.0)
            })
            .sum::<f64>()
            * h;
        // int_0^2 x^3 - x + 3 = 4 - 2 + 6
        assert!((s - 8.0).abs() < 1e-13);
    }

    #[test]
    fn slope_of_a_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 1.0, -1.0, -3.0];
        assert!((ls_slope(&xs, &ys) + 2.0).abs() < 1e-14);
    }
}
