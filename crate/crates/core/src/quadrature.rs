//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector-valued
//! integrands on finite, semi-infinite and infinite intervals.
//!
//! Several functionals of the same integrand (normalizer, first and second
//! moments) are integrated together so they share one set of panels. Each
//! component `k` is converged when its summed error estimate is below
//! `max(abs_tol, rel_tol · ∫|f_k|)`; using `∫|f_k|` as the scale keeps
//! components whose signed integral vanishes (a posterior mean of 0) from
//! driving refinement forever.

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1); xgk[1], xgk[3], xgk[5] and 0 are the Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Weights of the 7-point Gauss rule at xgk[1], xgk[3], xgk[5], xgk[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Hard cap on the number of panels kept alive.
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            max_panels: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integral<const K: usize> {
    pub value: [f64; K],
    pub error: [f64; K],
    /// `∫|f_k|`, the scale the relative tolerance is measured against.
    pub abs_value: [f64; K],
    pub evaluations: usize,
    pub converged: bool,
}

/// How a panel maps its reference variable `t` onto `x`.
#[derive(Debug, Clone, Copy)]
enum Map {
    Identity,
    /// `x = origin + scale · t/(1 − t)`, `t ∈ [0, 1)`.
    Upper { origin: f64, scale: f64 },
    /// `x = origin − scale · t/(1 − t)`, `t ∈ [0, 1)`.
    Lower { origin: f64, scale: f64 },
}

impl Map {
    #[inline]
    fn apply(self, t: f64) -> (f64, f64) {
        match self {
            Map::Identity => (t, 1.0),
            Map::Upper { origin, scale } => {
                let u = 1.0 - t;
                (origin + scale * t / u, scale / (u * u))
            }
            Map::Lower { origin, scale } => {
                let u = 1.0 - t;
                (origin - scale * t / u, scale / (u * u))
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Panel<const K: usize> {
    map: Map,
    lo: f64,
    hi: f64,
    value: [f64; K],
    error: [f64; K],
    abs_value: [f64; K],
    // ordering key for deterministic summation: (segment index, lo)
    segment: usize,
}

fn rule<const K: usize, F: FnMut(f64) -> [f64; K]>(
    f: &mut F,
    map: Map,
    lo: f64,
    hi: f64,
    segment: usize,
) -> Panel<K> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut kron = [0.0; K];
    let mut gauss = [0.0; K];
    let mut absk = [0.0; K];
    let mut eval = |t: f64| -> [f64; K] {
        let (x, jac) = map.apply(t);
        let mut v = f(x);
        for c in v.iter_mut() {
            *c *= jac;
            if !c.is_finite() {
                *c = 0.0;
            }
        }
        v
    };
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let pts: &[f64] = if x == 0.0 {
            &[0.0]
        } else {
            &[-1.0, 1.0]
        };
        for &sgn in pts {
            let v = eval(center + sgn * half * x);
            for k in 0..K {
                kron[k] += wk * v[k];
                absk[k] += wk * v[k].abs();
                if j % 2 == 1 {
                    gauss[k] += WG[j / 2] * v[k];
                }
            }
        }
    }
    let mut value = [0.0; K];
    let mut error = [0.0; K];
    let mut abs_value = [0.0; K];
    for k in 0..K {
        value[k] = kron[k] * half;
        error[k] = ((kron[k] - gauss[k]) * half).abs();
        abs_value[k] = absk[k] * half;
    }
    Panel {
        map,
        lo,
        hi,
        value,
        error,
        abs_value,
        segment,
    }
}

/// Integrate `f` over the union of the intervals between consecutive
/// `breakpoints`. The first and last breakpoints may be `-∞`/`+∞`; `tail_scale`
/// sets the length scale of the algebraic map used on infinite ends.
pub fn integrate<const K: usize, F>(
    mut f: F,
    breakpoints: &[f64],
    tail_scale: f64,
    tol: Tolerance,
) -> Result<Integral<K>>
where
    F: FnMut(f64) -> [f64; K],
{
    if breakpoints.len() < 2 {
        return Err(Error::Domain("integrate: need at least two breakpoints".into()));
    }
    if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Domain(format!(
            "integrate: breakpoints must be strictly increasing, got {breakpoints:?}"
        )));
    }
    if !(tail_scale > 0.0 && tail_scale.is_finite()) {
        return Err(Error::Domain("integrate: tail scale must be positive".into()));
    }

    let mut panels: Vec<Panel<K>> = Vec::new();
    for (segment, w) in breakpoints.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let map = match (a.is_finite(), b.is_finite()) {
            (true, true) => Map::Identity,
            (true, false) => Map::Upper { origin: a, scale: tail_scale },
            (false, true) => Map::Lower { origin: b, scale: tail_scale },
            (false, false) => {
                return Err(Error::Domain(
                    "integrate: split (-inf, inf) with at least one finite breakpoint".into(),
                ))
            }
        };
        let (lo, hi) = match map {
            Map::Identity => (a, b),
            _ => (0.0, 1.0),
        };
        panels.push(rule(&mut f, map, lo, hi, segment));
    }
    let mut evaluations = 15 * panels.len();

    let totals = |panels: &[Panel<K>]| {
        let mut v = [0.0; K];
        let mut e = [0.0; K];
        let mut a = [0.0; K];
        for p in panels {
            for k in 0..K {
                v[k] += p.value[k];
                e[k] += p.error[k];
                a[k] += p.abs_value[k];
            }
        }
        (v, e, a)
    };

    let mut converged = false;
    loop {
        let (_, err, absv) = totals(&panels);
        let limits: [f64; K] = std::array::from_fn(|k| tol.abs_tol.max(tol.rel_tol * absv[k]));
        if (0..K).all(|k| err[k] <= limits[k]) {
            converged = true;
            break;
        }
        if panels.len() >= tol.max_panels {
            break;
        }
        // Split the panel contributing most to the worst-violated component.
        let worst = (0..K)
            .max_by(|&i, &j| (err[i] / limits[i]).total_cmp(&(err[j] / limits[j])))
            .unwrap_or(0);
        let idx = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error[worst].total_cmp(&b.1.error[worst]))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = panels.swap_remove(idx);
        let mid = 0.5 * (p.lo + p.hi);
        if !(mid > p.lo && mid < p.hi) {
            // Interval can no longer be split in floating point.
            break;
        }
        panels.push(rule(&mut f, p.map, p.lo, mid, p.segment));
        panels.push(rule(&mut f, p.map, mid, p.hi, p.segment));
        evaluations += 30;
    }

    panels.sort_by(|a, b| a.segment.cmp(&b.segment).then(a.lo.total_cmp(&b.lo)));
    let (value, error, abs_value) = totals(&panels);
    Ok(Integral {
        value,
        error,
        abs_value,
        evaluations,
        converged,
    })
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F: FnMut(f64) -> f64>(
    mut f: F,
    breakpoints: &[f64],
    tail_scale: f64,
    tol: Tolerance,
) -> Result<Integral<1>> {
    integrate(|x| [f(x)], breakpoints, tail_scale, tol)
}
