//! Derivative-free local minimizers used to polish band extrema.

/// Outcome of a Nelder–Mead run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum2 {
    pub x: [f64; 2],
    pub value: f64,
    pub iterations: usize,
    /// Simplex diameter fell below the requested tolerance.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub initial_step: f64,
    pub xtol: f64,
    pub max_iterations: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            initial_step: 0.05,
            xtol: 1e-10,
            max_iterations: 4000,
        }
    }
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl NelderMead {
    /// Minimizes `f` starting from a right-angled simplex at `start`.
    /// The returned value is never worse than `f(start)`.
    pub fn minimize<E, F>(&self, start: [f64; 2], mut f: F) -> Result<Minimum2, E>
    where
        F: FnMut([f64; 2]) -> Result<f64, E>,
    {
        let h = self.initial_step;
        let mut pts = [start, [start[0] + h, start[1]], [start[0], start[1] + h]];
        let mut vals = [f(pts[0])?, f(pts[1])?, f(pts[2])?];
        let mut iterations = 0;
        let mut converged = false;

        loop {
            // Stable sort keeps the earlier (older) vertex first on ties.
            let mut idx = [0usize, 1, 2];
            idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
            pts = [pts[idx[0]], pts[idx[1]], pts[idx[2]]];
            vals = [vals[idx[0]], vals[idx[1]], vals[idx[2]]];

            let diameter = dist(pts[0], pts[1]).max(dist(pts[0], pts[2])).max(dist(pts[1], pts[2]));
            if diameter < self.xtol {
                converged = true;
                break;
            }
            if iterations >= self.max_iterations {
                break;
            }
            iterations += 1;

            let centroid = lerp(pts[0], pts[1], 0.5);
            let reflected = lerp(pts[2], centroid, 2.0);
            let fr = f(reflected)?;
            if fr < vals[0] {
                let expanded = lerp(pts[2], centroid, 3.0);
                let fe = f(expanded)?;
                if fe < fr {
                    pts[2] = expanded;
                    vals[2] = fe;
                } else {
                    pts[2] = reflected;
                    vals[2] = fr;
                }
                continue;
            }
            if fr < vals[1] {
                pts[2] = reflected;
                vals[2] = fr;
                continue;
            }
            let (contracted, fc) = if fr < vals[2] {
                let c = lerp(centroid, reflected, 0.5);
                (c, f(c)?)
            } else {
                let c = lerp(centroid, pts[2], 0.5);
                (c, f(c)?)
            };
            if fc < vals[2].min(fr) {
                pts[2] = contracted;
                vals[2] = fc;
                continue;
            }
            for i in 1..3 {
                pts[i] = lerp(pts[0], pts[i], 0.5);
                vals[i] = f(pts[i])?;
            }
        }
        Ok(Minimum2 {
            x: pts[0],
            value: vals[0],
            iterations,
            converged,
        })
    }
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
/// Returns `(argmin, min)`; the interval is shrunk until shorter than `tol`.
pub fn golden_section<E, F>(mut a: f64, mut b: f64, tol: f64, mut f: F) -> Result<(f64, f64), E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}
