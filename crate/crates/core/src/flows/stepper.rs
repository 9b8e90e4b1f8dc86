use crate::lax::{fixed_point, Method};
use crate::spectral::{Field, Grid, Sign};
use crate::{Error, Result, C64};

use super::spec::{FlowKind, FlowSpec, Scheme};

/// Contour points for the exponential-differencing coefficients.
const CONTOUR_POINTS: usize = 64;

/// Work counters of a [`Stepper`].
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StepCounters {
    pub steps: usize,
    pub nonlinear_evaluations: usize,
    pub fixed_point_solves: usize,
    pub fixed_point_iterations: usize,
}

struct EtdCoefficients {
    half: Vec<C64>,
    full: Vec<C64>,
    q: Vec<C64>,
    f1: Vec<C64>,
    f2: Vec<C64>,
    f3: Vec<C64>,
}

impl EtdCoefficients {
    fn new(symbol: &[C64], dt: f64) -> Self {
        let n = symbol.len();
        let mut c = Self {
            half: Vec::with_capacity(n),
            full: Vec::with_capacity(n),
            q: Vec::with_capacity(n),
            f1: Vec::with_capacity(n),
            f2: Vec::with_capacity(n),
            f3: Vec::with_capacity(n),
        };
        let roots: Vec<C64> = (0..CONTOUR_POINTS)
            .map(|m| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (m as f64 + 0.5) / CONTOUR_POINTS as f64))
            .collect();
        for &s in symbol {
            let z0 = s * dt;
            let (mut q, mut f1, mut f2, mut f3) = (C64::default(), C64::default(), C64::default(), C64::default());
            for w in &roots {
                let z = z0 + w;
                let ez = z.exp();
                let z3 = z * z * z;
                q += ((z / 2.0).exp() - 1.0) / z;
                f1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
                f2 += (2.0 + z + ez * (z - 2.0)) / z3;
                f3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
            }
            let scale = dt / CONTOUR_POINTS as f64;
            c.half.push((z0 / 2.0).exp());
            c.full.push(z0.exp());
            c.q.push(q * scale);
            c.f1.push(f1 * scale);
            c.f2.push(f2 * scale);
            c.f3.push(f3 * scale);
        }
        c
    }
}

/// Advances one flow by fixed steps.
pub struct Stepper {
    kind: FlowKind,
    scheme: Scheme,
    grid: Grid,
    sign: Sign,
    dt: f64,
    /// `exp(m dt / 2)`.
    half: Vec<C64>,
    etd: Option<EtdCoefficients>,
    /// Linear propagators for the outer and inner composition substeps.
    split: Option<(Vec<C64>, Vec<C64>)>,
    split_weights: (f64, f64),
    warm_plus: Option<Vec<C64>>,
    warm_minus: Option<Vec<C64>>,
    fp_tol: f64,
    counters: StepCounters,
}

impl Stepper {
    /// Builds a stepper with the step size `dt` (the stability gate is not checked here).
    pub fn new(spec: &FlowSpec, grid: &Grid, sign: Sign, dt: f64) -> Result<Self> {
        let symbol: Vec<C64> = grid.wavenumbers().iter().map(|&xi| spec.kind.linear_symbol(xi)).collect();
        let prop = |t: f64| -> Vec<C64> { symbol.iter().map(|m| (m * t).exp()).collect() };
        let c1 = 1.0 / (2.0 - 2f64.cbrt());
        let c0 = 1.0 - 2.0 * c1;
        let etd = (spec.scheme == Scheme::Etd4).then(|| EtdCoefficients::new(&symbol, dt));
        let split = (spec.scheme == Scheme::Splitting4).then(|| (prop(0.5 * c1 * dt), prop(0.5 * (c0 + c1) * dt)));
        Ok(Self {
            kind: spec.kind,
            scheme: spec.scheme,
            grid: grid.clone(),
            sign,
            dt,
            half: prop(0.5 * dt),
            etd,
            split,
            split_weights: (c1, c0),
            warm_plus: None,
            warm_minus: None,
            fp_tol: spec.fixed_point_tol,
            counters: StepCounters::default(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn counters(&self) -> StepCounters {
        self.counters
    }

    fn field(&self, q: &[C64]) -> Result<Field> {
        Field::new(self.grid.clone(), q.to_vec(), self.sign)
    }

    /// `gamma(k)` by the fixed point, warm-started from the previous solve at the same `k`.
    fn gamma(&mut self, q: &Field, kappa: f64, minus: bool) -> Result<(Vec<C64>, Vec<C64>)> {
        let warm = if minus { self.warm_minus.take() } else { self.warm_plus.take() };
        let opts = fixed_point::FixedPointOptions { tol: self.fp_tol, warm_start: warm, ..Default::default() };
        let t = fixed_point::solve(q, kappa, &opts)?;
        self.counters.fixed_point_solves += 1;
        if let Method::FixedPoint { iterations, .. } = t.method {
            self.counters.fixed_point_iterations += iterations;
        }
        let slot = if minus { &mut self.warm_minus } else { &mut self.warm_plus };
        *slot = Some(t.gamma.clone());
        Ok((t.gamma, t.g12))
    }

    /// `g12(k) - g12^[1](k) = -(2k - d)^{-1}[gamma(k) q]`.
    fn g12_tail(&mut self, q: &Field, kappa: f64, minus: bool) -> Result<Vec<C64>> {
        let (gamma, _) = self.gamma(q, kappa, minus)?;
        let gq = self.grid.product(&[&gamma, q.values()]);
        let t = self.grid.resolve_minus(&gq, 2.0 * kappa)?;
        Ok(t.into_iter().map(|z| -z).collect())
    }

    /// Nonlinear part `N(q)` of `q_t = m(d) q + N(q)`.
    pub fn nonlinear(&mut self, q: &[C64]) -> Result<Vec<C64>> {
        check_finite(q)?;
        self.counters.nonlinear_evaluations += 1;
        let i = C64::new(0.0, 1.0);
        let field = self.field(q)?;
        let r = field.r();
        let nls = |g: &Grid| -> Vec<C64> { g.product(&[q, q, &r]).into_iter().map(|z| -2.0 * i * z).collect() };
        let mkdv = |g: &Grid| -> Vec<C64> {
            let q1 = g.derivative(q, 1);
            g.product(&[q, &r, &q1]).into_iter().map(|z| 6.0 * z).collect()
        };
        Ok(match self.kind {
            FlowKind::Nls => nls(&self.grid),
            FlowKind::Mkdv => mkdv(&self.grid),
            FlowKind::AFlow { kappa } => {
                self.g12_tail(&field, kappa, false)?.into_iter().map(|z| i * z).collect()
            }
            FlowKind::NlsKappa { kappa } | FlowKind::NlsDiff { kappa } => {
                let a = self.g12_tail(&field, kappa, false)?;
                let b = self.g12_tail(&field, -kappa, true)?;
                let c = 4.0 * kappa.powi(3);
                let reg: Vec<C64> = a.iter().zip(&b).map(|(x, y)| -i * c * (x - y)).collect();
                if matches!(self.kind, FlowKind::NlsKappa { .. }) {
                    reg
                } else {
                    nls(&self.grid).iter().zip(&reg).map(|(x, y)| x - y).collect()
                }
            }
            FlowKind::MkdvKappa { kappa } | FlowKind::MkdvDiff { kappa } => {
                let a = self.g12_tail(&field, kappa, false)?;
                let b = self.g12_tail(&field, -kappa, true)?;
                let c = 8.0 * kappa.powi(4);
                let reg: Vec<C64> = a.iter().zip(&b).map(|(x, y)| c * (x + y)).collect();
                if matches!(self.kind, FlowKind::MkdvKappa { .. }) {
                    reg
                } else {
                    mkdv(&self.grid).iter().zip(&reg).map(|(x, y)| x - y).collect()
                }
            }
        })
    }

    /// Full vector field `m(d) q + N(q)`.
    pub fn vector_field(&mut self, q: &[C64]) -> Result<Vec<C64>> {
        if let FlowKind::AFlow { kappa } = self.kind {
            check_finite(q)?;
            self.counters.nonlinear_evaluations += 1;
            let field = self.field(q)?;
            let (_, g12) = self.gamma(&field, kappa, false)?;
            return Ok(g12.into_iter().map(|z| C64::new(0.0, 1.0) * z).collect());
        }
        let kind = self.kind;
        let lin = self.grid.apply(q, |xi| kind.linear_symbol(xi))?;
        let n = self.nonlinear(q)?;
        Ok(lin.iter().zip(&n).map(|(a, b)| a + b).collect())
    }

    /// One step of size `dt`. The `A(kappa)` flow evolves `q` and `r`
    /// independently and returns a paired field.
    pub fn step(&mut self, f: &Field) -> Result<Field> {
        self.grid.check_len(f.values().len())?;
        if let FlowKind::AFlow { .. } = self.kind {
            let n = f.values().len();
            let mut state = f.values().to_vec();
            state.extend(f.r());
            let out = self.classical_rk4(&state, self.dt, Stage::Pair)?;
            check_finite(&out)?;
            self.counters.steps += 1;
            let (q, r) = out.split_at(n);
            return Field::paired(self.grid.clone(), q.to_vec(), r.to_vec(), f.sign());
        }
        if f.is_paired() {
            return Err(Error::InvalidArgument("only the A(kappa) flow evolves an independent r".into()));
        }
        let out = match self.scheme {
            Scheme::Rk4Spectral => self.lawson(f.values())?,
            Scheme::Etd4 => self.etd4(f.values())?,
            Scheme::Splitting4 => self.splitting(f.values())?,
        };
        check_finite(&out)?;
        self.counters.steps += 1;
        f.with_values(out)
    }

    /// `(q_t, r_t) = (i g12(k), i g21(k))` for the stacked state `[q; r]`.
    fn pair_field(&mut self, state: &[C64]) -> Result<Vec<C64>> {
        let FlowKind::AFlow { kappa } = self.kind else {
            return Err(Error::FlavorMismatch { flavor: "pair".into(), flow: self.kind.name().into() });
        };
        check_finite(state)?;
        self.counters.nonlinear_evaluations += 1;
        let n = state.len() / 2;
        let field = Field::paired(self.grid.clone(), state[..n].to_vec(), state[n..].to_vec(), self.sign)?;
        let warm = self.warm_plus.take();
        let opts = fixed_point::FixedPointOptions { tol: self.fp_tol, warm_start: warm, ..Default::default() };
        let t = fixed_point::solve(&field, kappa, &opts)?;
        self.counters.fixed_point_solves += 1;
        if let Method::FixedPoint { iterations, .. } = t.method {
            self.counters.fixed_point_iterations += iterations;
        }
        self.warm_plus = Some(t.gamma);
        let i = C64::new(0.0, 1.0);
        Ok(t.g12.iter().chain(&t.g21).map(|z| i * z).collect())
    }

    fn mul(&self, m: &[C64], f: &[C64]) -> Vec<C64> {
        self.grid.apply_values(f, m)
    }

    fn classical_rk4(&mut self, q: &[C64], h: f64, stage: Stage) -> Result<Vec<C64>> {
        let eval = |s: &mut Self, v: &[C64]| match stage {
            Stage::Pair => s.pair_field(v),
            Stage::Nonlinear => s.nonlinear(v),
        };
        let k1 = eval(self, q)?;
        let a = axpy(q, 0.5 * h, &k1);
        let k2 = eval(self, &a)?;
        let b = axpy(q, 0.5 * h, &k2);
        let k3 = eval(self, &b)?;
        let c = axpy(q, h, &k3);
        let k4 = eval(self, &c)?;
        Ok((0..q.len()).map(|j| q[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])).collect())
    }

    fn lawson(&mut self, q: &[C64]) -> Result<Vec<C64>> {
        let h = self.dt;
        let half = self.half.clone();
        let k1 = self.nonlinear(q)?;
        let eq = self.mul(&half, q);
        let a = self.mul(&half, &axpy(q, 0.5 * h, &k1));
        let k2 = self.nonlinear(&a)?;
        let b = axpy(&eq, 0.5 * h, &k2);
        let k3 = self.nonlinear(&b)?;
        let c = self.mul(&half, &axpy(&eq, h, &k3));
        let k4 = self.nonlinear(&c)?;
        // E (E (q + h/6 k1) + h/3 (k2 + k3)) + h/6 k4
        let outer_a = self.mul(&half, &axpy(q, h / 6.0, &k1));
        let mid: Vec<C64> = (0..q.len()).map(|j| outer_a[j] + h / 3.0 * (k2[j] + k3[j])).collect();
        let e_mid = self.mul(&half, &mid);
        Ok((0..q.len()).map(|j| e_mid[j] + h / 6.0 * k4[j]).collect())
    }

    fn etd4(&mut self, q: &[C64]) -> Result<Vec<C64>> {
        let c = self.etd.take().expect("etd coefficients are built for the etd4 scheme");
        let result = self.etd4_with(&c, q);
        self.etd = Some(c);
        result
    }

    fn etd4_with(&mut self, c: &EtdCoefficients, q: &[C64]) -> Result<Vec<C64>> {
        let n = q.len();
        let grid = self.grid.clone();
        let nu = self.nonlinear(q)?;
        let (u_s, nu_s) = (grid.dft(q), grid.dft(&nu));
        let a_s: Vec<C64> = (0..n).map(|k| c.half[k] * u_s[k] + c.q[k] * nu_s[k]).collect();
        let na = self.nonlinear(&grid.idft(&a_s))?;
        let na_s = grid.dft(&na);
        let b_s: Vec<C64> = (0..n).map(|k| c.half[k] * u_s[k] + c.q[k] * na_s[k]).collect();
        let nb = self.nonlinear(&grid.idft(&b_s))?;
        let nb_s = grid.dft(&nb);
        let c_s: Vec<C64> = (0..n).map(|k| c.half[k] * a_s[k] + c.q[k] * (2.0 * nb_s[k] - nu_s[k])).collect();
        let nc = self.nonlinear(&grid.idft(&c_s))?;
        let nc_s = grid.dft(&nc);
        let out: Vec<C64> = (0..n)
            .map(|k| c.full[k] * u_s[k] + c.f1[k] * nu_s[k] + 2.0 * c.f2[k] * (na_s[k] + nb_s[k]) + c.f3[k] * nc_s[k])
            .collect();
        Ok(grid.idft(&out))
    }

    fn nonlinear_substep(&mut self, q: &[C64], h: f64) -> Result<Vec<C64>> {
        if self.kind == FlowKind::Nls {
            // q_t = -2i (q r) q with q r real and constant along the substep
            let r = self.field(q)?.r();
            return Ok((0..q.len()).map(|j| q[j] * C64::new(0.0, -2.0 * (q[j] * r[j]).re * h).exp()).collect());
        }
        self.classical_rk4(q, h, Stage::Nonlinear)
    }

    fn splitting(&mut self, q: &[C64]) -> Result<Vec<C64>> {
        let (outer, inner) = self.split.clone().expect("propagators are built for the splitting scheme");
        let (c1, c0) = self.split_weights;
        let h = self.dt;
        let mut v = self.mul(&outer, q);
        v = self.nonlinear_substep(&v, c1 * h)?;
        v = self.mul(&inner, &v);
        v = self.nonlinear_substep(&v, c0 * h)?;
        v = self.mul(&inner, &v);
        v = self.nonlinear_substep(&v, c1 * h)?;
        Ok(self.mul(&outer, &v))
    }
}

#[derive(Clone, Copy)]
enum Stage {
    Pair,
    Nonlinear,
}

fn axpy(a: &[C64], s: f64, b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

fn check_finite(v: &[C64]) -> Result<()> {
    if v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { time: f64::NAN, last_valid: f64::NAN })
    }
}
