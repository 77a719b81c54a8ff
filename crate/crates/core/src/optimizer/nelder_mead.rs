//! Plain Nelder–Mead on `R^n` with standard coefficients.

#[derive(Debug, Clone, Copy)]
pub(crate) struct Outcome {
    pub value: f64,
    pub iterations: usize,
}

pub(crate) struct Simplex {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Simplex {
    /// Axis-aligned simplex of edge `radius` around `start`.
    pub fn around(start: &[f64], radius: f64, f: &mut impl FnMut(&[f64]) -> f64) -> Simplex {
        let mut points = vec![start.to_vec()];
        for i in 0..start.len() {
            let mut p = start.to_vec();
            p[i] += radius;
            points.push(p);
        }
        let values = points.iter().map(|p| f(p)).collect();
        Simplex { points, values }
    }

    pub fn best(&self) -> (&[f64], f64) {
        let i = self.order()[0];
        (&self.points[i], self.values[i])
    }

    fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]).then(a.cmp(&b)));
        idx
    }

    fn spread(&self) -> f64 {
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        hi - lo
    }

    /// Runs until `budget` evaluations-worth of iterations are spent or the
    /// value spread falls below `ftol`.
    pub fn run(&mut self, f: &mut impl FnMut(&[f64]) -> f64, budget: usize, ftol: f64) -> Outcome {
        let n = self.points.len() - 1;
        let mut iterations = 0;
        while iterations < budget && self.spread() > ftol {
            iterations += 1;
            let order = self.order();
            let (best, worst, second) = (order[0], order[n], order[n - 1]);
            let mut centroid = vec![0.0; n];
            for &i in &order[..n] {
                for (c, x) in centroid.iter_mut().zip(&self.points[i]) {
                    *c += x / n as f64;
                }
            }
            let along = |t: f64, from: &[f64]| -> Vec<f64> {
                centroid.iter().zip(from).map(|(c, x)| c + t * (c - x)).collect()
            };
            let xr = along(1.0, &self.points[worst]);
            let fr = f(&xr);
            if fr < self.values[best] {
                let xe = along(2.0, &self.points[worst]);
                let fe = f(&xe);
                if fe < fr {
                    self.replace(worst, xe, fe);
                } else {
                    self.replace(worst, xr, fr);
                }
                continue;
            }
            if fr < self.values[second] {
                self.replace(worst, xr, fr);
                continue;
            }
            let (xc, fc) = if fr < self.values[worst] {
                let xc = along(0.5, &self.points[worst]);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(-0.5, &self.points[worst]);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < self.values[worst].min(fr) {
                self.replace(worst, xc, fc);
                continue;
            }
            let anchor = self.points[best].clone();
            for i in 0..=n {
                if i == best {
                    continue;
                }
                let p: Vec<f64> = anchor.iter().zip(&self.points[i]).map(|(a, x)| a + 0.5 * (x - a)).collect();
                self.values[i] = f(&p);
                self.points[i] = p;
            }
        }
        let order = self.order();
        Outcome {
            value: self.values[order[0]],
            iterations,
        }
    }

    fn replace(&mut self, i: usize, x: Vec<f64>, v: f64) {
        self.points[i] = x;
        self.values[i] = v;
    }
}
