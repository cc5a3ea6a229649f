//! Grid-search oracles, independent of the LP machinery.

/// Roots of `t^2 - r t + r`, larger one.
pub fn zeta2(r: f64) -> f64 {
    0.5 * (r + (r * r - 4.0 * r).sqrt())
}

fn candidates(step: f64, top: f64, exact: &[f64], min: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = (1..).map(|i| i as f64 * step).take_while(|&x| x <= top).filter(|&x| x >= min).collect();
    grid.extend_from_slice(exact);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Cheapest expected cost of an `r`-robust bid prefix on a grid, counting
/// only prefixes that cover every point and are extendable at the covering
/// bid. Returns `None` when nothing beats `ceiling`.
pub struct BidOracle {
    points: Vec<(f64, f64)>,
    r: f64,
    zeta2: f64,
    grid: Vec<f64>,
    max_len: usize,
    best: f64,
    pub nodes: u64,
}

impl BidOracle {
    pub fn new(points: &[(f64, f64)], r: f64, step: f64, max_len: usize, ceiling: f64) -> Self {
        let mut points = points.to_vec();
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let top = r * points.last().unwrap().0;
        let exact: Vec<f64> = points.iter().map(|p| p.0).collect();
        BidOracle { grid: candidates(step, top, &exact, 0.0), points, r, zeta2: zeta2(r), max_len, best: ceiling, nodes: 0 }
    }

    pub fn solve(mut self) -> (Option<f64>, u64) {
        let ceiling = self.best;
        self.dfs(0.0, 0.0, 0, 0, 0.0);
        ((self.best < ceiling).then_some(self.best), self.nodes)
    }

    fn dfs(&mut self, last: f64, total: f64, len: usize, covered: usize, acc: f64) {
        let cap = if len == 0 { self.r } else { self.r * last - total };
        let start = self.grid.partition_point(|&x| x <= last);
        for gi in start..self.grid.len() {
            let x = self.grid[gi];
            if x > cap * (1.0 + 1e-12) {
                break;
            }
            self.nodes += 1;
            let t = total + x;
            let mut c = covered;
            let mut a = acc;
            while c < self.points.len() && self.points[c].0 <= x {
                a += self.points[c].1 * t;
                c += 1;
            }
            if c == self.points.len() {
                if t / x <= self.zeta2 + 1e-12 && a < self.best {
                    self.best = a;
                }
                continue;
            }
            if len + 1 >= self.max_len {
                continue;
            }
            // Each uncovered point pays at least the sum so far plus itself,
            // and one more intermediate bid when it is out of direct reach.
            let reach = self.r * x - t;
            let lb: f64 = a + self.points[c..]
                .iter()
                .map(|&(u, p)| p * (t + u + if reach < u { x } else { 0.0 }))
                .sum::<f64>();
            if lb >= self.best {
                continue;
            }
            self.dfs(x, t, len + 1, c, a);
        }
    }
}

/// The same for search on the line: alternating excursions of magnitude
/// `x_i`, robust at `r` when `x_0 <= rho` and `x_{i+1} <= rho x_i - S_i`
/// with `rho = (r - 1) / 2`, and extendable at the end when
/// `S_n <= zeta2(rho) x_n` and `rho x_n - S_n >= x_{n-1}`.
pub struct SearchOracle {
    /// `(side, |h|, p)` with side 0 for the right half-line.
    points: Vec<(u8, f64, f64)>,
    rho: f64,
    zeta2: f64,
    grid: Vec<f64>,
    max_len: usize,
    best: f64,
    pub nodes: u64,
}

impl SearchOracle {
    pub fn new(points: &[(f64, f64)], r: f64, step: f64, max_len: usize, ceiling: f64) -> Self {
        let points: Vec<(u8, f64, f64)> = points.iter().map(|&(h, p)| (u8::from(h < 0.0), h.abs(), p)).collect();
        let rho = 0.5 * (r - 1.0);
        let top = rho * points.iter().map(|p| p.1).fold(0.0, f64::max);
        let exact: Vec<f64> = points.iter().map(|p| p.1).collect();
        SearchOracle {
            grid: candidates(step, top, &exact, 1.0),
            points,
            rho,
            zeta2: zeta2(rho),
            max_len,
            best: ceiling,
            nodes: 0,
        }
    }

    pub fn solve(mut self) -> (Option<f64>, u64) {
        let ceiling = self.best;
        for first_side in 0..2u8 {
            let mut xs = Vec::with_capacity(self.max_len);
            let mut found = vec![false; self.points.len()];
            self.dfs(first_side, &mut xs, 0.0, &mut found, 0.0);
        }
        ((self.best < ceiling).then_some(self.best), self.nodes)
    }

    fn dfs(&mut self, first_side: u8, xs: &mut Vec<f64>, total: f64, found: &mut Vec<bool>, acc: f64) {
        let n = xs.len();
        let side = (first_side + n as u8) % 2;
        let cap = if n == 0 { self.rho } else { self.rho * xs[n - 1] - total };
        let floor = if n >= 2 { xs[n - 2] } else { 0.0 };
        let start = self.grid.partition_point(|&x| x < floor);
        for gi in start..self.grid.len() {
            let x = self.grid[gi];
            if x > cap * (1.0 + 1e-12) {
                break;
            }
            self.nodes += 1;
            let mut a = acc;
            let mut newly = Vec::new();
            for (i, &(s, h, p)) in self.points.iter().enumerate() {
                if !found[i] && s == side && h <= x {
                    a += p * (2.0 * total + h);
                    newly.push(i);
                }
            }
            let t = total + x;
            newly.iter().for_each(|&i| found[i] = true);
            if found.iter().all(|&f| f) {
                let prev = if n >= 1 { xs[n - 1] } else { 0.0 };
                if t <= self.zeta2 * x * (1.0 + 1e-12) && self.rho * x - t >= prev * (1.0 - 1e-12) && a < self.best {
                    self.best = a;
                }
            } else if n + 1 < self.max_len {
                // The next excursion is on the other side and no shorter than
                // the previous one there.
                let detour = 2.0 * xs.get(n.wrapping_sub(1)).copied().unwrap_or(1.0).max(1.0);
                let lb: f64 = a + self
                    .points
                    .iter()
                    .zip(found.iter())
                    .filter(|(_, &f)| !f)
                    .map(|(&(s, h, p), _)| p * (2.0 * t + h + if s == side { detour } else { 0.0 }))
                    .sum::<f64>();
                if lb < self.best {
                    xs.push(x);
                    self.dfs(first_side, xs, t, found, a);
                    xs.pop();
                }
            }
            newly.iter().for_each(|&i| found[i] = false);
        }
    }
}
