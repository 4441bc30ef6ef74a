//! Finite-difference stencils on uniform grids.
//!
//! Weights come from Fornberg's recursion, so any even accuracy order is
//! available. Interior points use centred stencils; near the ends of a
//! non-periodic grid the stencil is shifted inward and lengthened by the
//! derivative order so the accuracy order is kept.

/// Weights for derivatives `0..=max_order` at `z` from arbitrary `nodes`.
/// Row `j` of the result holds the weights for derivative order `j`.
pub fn fornberg_weights(z: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[derive(Debug, Clone)]
struct Row {
    start: usize,
    weights: Vec<f64>,
}

/// A derivative operator of fixed order and accuracy for one grid size.
#[derive(Debug, Clone)]
pub struct Stencil {
    n: usize,
    periodic: bool,
    half: usize,
    central: Vec<f64>,
    left: Vec<Row>,
    right: Vec<Row>,
}

impl Stencil {
    /// `order` is the derivative order, `accuracy` the (even) truncation
    /// order in the spacing `h`.
    pub fn new(n: usize, h: f64, order: usize, accuracy: usize, periodic: bool) -> Self {
        debug_assert!(accuracy >= 2 && accuracy % 2 == 0 && (1..=2).contains(&order));
        let half = accuracy / 2;
        let scale = h.powi(order as i32);
        let offsets: Vec<f64> = (0..=2 * half).map(|k| k as f64 - half as f64).collect();
        let central: Vec<f64> = fornberg_weights(0.0, &offsets, order)[order]
            .iter()
            .map(|w| w / scale)
            .collect();

        let mut left = Vec::new();
        let mut right = Vec::new();
        if !periodic {
            let width = (accuracy + order).min(n);
            let nodes: Vec<f64> = (0..width).map(|k| k as f64).collect();
            for i in 0..half.min(n) {
                let w = fornberg_weights(i as f64, &nodes, order)[order]
                    .iter()
                    .map(|w| w / scale)
                    .collect();
                left.push(Row { start: 0, weights: w });
            }
            for i in n.saturating_sub(half)..n {
                let start = n - width;
                let w = fornberg_weights((i - start) as f64, &nodes, order)[order]
                    .iter()
                    .map(|w| w / scale)
                    .collect();
                right.push(Row { start, weights: w });
            }
        }
        Stencil {
            n,
            periodic,
            half,
            central,
            left,
            right,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Half-width of the interior stencil, in grid points.
    pub fn reach(&self) -> usize {
        self.half
    }

    /// Calls `f(index, weight)` for every point in the stencil of point `i`.
    pub fn for_each_tap(&self, i: usize, mut f: impl FnMut(usize, f64)) {
        let n = self.n;
        if self.periodic {
            for (k, w) in self.central.iter().enumerate() {
                let j = (i + n * (self.half + 1) + k - self.half) % n;
                f(j, *w);
            }
        } else if i < self.half {
            let row = &self.left[i];
            for (k, w) in row.weights.iter().enumerate() {
                f(row.start + k, *w);
            }
        } else if i + self.half >= n {
            let row = &self.right[i + self.half - n];
            for (k, w) in row.weights.iter().enumerate() {
                f(row.start + k, *w);
            }
        } else {
            for (k, w) in self.central.iter().enumerate() {
                f(i + k - self.half, *w);
            }
        }
    }

    pub fn apply_at(&self, values: &[f64], i: usize) -> f64 {
        let mut acc = 0.0;
        self.for_each_tap(i, |j, w| acc += w * values[j]);
        acc
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.n, "stencil built for a different grid size");
        (0..self.n).map(|i| self.apply_at(values, i)).collect()
    }
}
