//! Splitting-function families.
//!
//! Every family shares one contract: draw parameters from a node's points,
//! evaluate `f(x)`, and return the analytic gradient `∇f(x)`. A node routes a
//! point left when `f(x) - τ <= 0` and right otherwise.

mod nn;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

pub use nn::{Dense, Mlp};

use crate::error::{Error, Result};

/// Below this distance the unit-vector term `(x - c)/‖x - c‖` is taken as zero.
pub const RADIAL_EPS: f64 = 1e-12;

/// Default `λ` for the quadric family.
pub const DEFAULT_QUAD_LAMBDA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    /// Axis-parallel cut, `f(x) = x_i`.
    Axis,
    /// Oblique hyperplane, `f(x) = v·x`.
    Hyperplane,
    /// Hypersphere, `f(x) = ‖x - c‖²`.
    Sphere,
    /// `f(x) = ‖x - c1‖ + ‖x - c2‖`.
    Ellipse,
    /// `f(x) = ‖x - c1‖ - ‖x - c2‖`.
    Hyperbola,
    /// `f(x) = ‖x - c‖ + v·x`.
    Parabola,
    /// `f(x) = x·(A + Aᵀ)x + v·x`.
    Quadric,
    /// Random tanh network with scalar output.
    Network,
    /// `f(x1, x2) = x2 - sin(x1)`, two dimensions only.
    Sine,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 9] = [
        FamilyKind::Axis,
        FamilyKind::Hyperplane,
        FamilyKind::Sphere,
        FamilyKind::Ellipse,
        FamilyKind::Hyperbola,
        FamilyKind::Parabola,
        FamilyKind::Quadric,
        FamilyKind::Network,
        FamilyKind::Sine,
    ];

    /// Short name used in config files, model files and reports.
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Axis => "if",
            FamilyKind::Hyperplane => "eif",
            FamilyKind::Sphere => "hif",
            FamilyKind::Ellipse => "ellipse",
            FamilyKind::Hyperbola => "hyper",
            FamilyKind::Parabola => "para",
            FamilyKind::Quadric => "quad",
            FamilyKind::Network => "nn",
            FamilyKind::Sine => "sine",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        FamilyKind::ALL
            .into_iter()
            .find(|k| k.name() == lower)
            .ok_or_else(|| Error::config(format!("unknown splitting family `{s}`")))
    }
}

/// A family plus its sampling hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitFamily {
    pub kind: FamilyKind,
    /// Half-width of the uniform distribution of the quadric's linear term.
    pub quad_lambda: f64,
    /// Hidden layer widths of the network family. Empty means the default
    /// `[max(8, d), max(8, d)]`.
    pub nn_hidden_widths: Vec<usize>,
}

impl SplitFamily {
    pub fn new(kind: FamilyKind) -> Self {
        Self {
            kind,
            quad_lambda: DEFAULT_QUAD_LAMBDA,
            nn_hidden_widths: Vec::new(),
        }
    }

    pub fn quadric(lambda: f64) -> Self {
        Self {
            quad_lambda: lambda,
            ..Self::new(FamilyKind::Quadric)
        }
    }

    pub fn network(hidden_widths: Vec<usize>) -> Self {
        Self {
            nn_hidden_widths: hidden_widths,
            ..Self::new(FamilyKind::Network)
        }
    }

    /// Hidden widths actually used for a `dim`-dimensional input.
    pub fn hidden_widths_for(&self, dim: usize) -> Vec<usize> {
        if self.nn_hidden_widths.is_empty() {
            vec![dim.max(8); 2]
        } else {
            self.nn_hidden_widths.clone()
        }
    }

    /// Checks the hyperparameters against a dataset dimension.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if dim == 0 {
            return Err(Error::config("dimension must be at least 1"));
        }
        match self.kind {
            FamilyKind::Quadric if !(self.quad_lambda > 0.0 && self.quad_lambda.is_finite()) => {
                Err(Error::config(format!(
                    "quad_lambda must be a positive finite number, got {}",
                    self.quad_lambda
                )))
            }
            FamilyKind::Network if self.nn_hidden_widths.contains(&0) => {
                Err(Error::config("nn_hidden_widths entries must be positive"))
            }
            FamilyKind::Sine if dim != 2 => Err(Error::config(format!(
                "the sine family needs 2-d data, got {dim} features"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SplitFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FamilyKind::Quadric => write!(f, "quad({})", self.quad_lambda),
            _ => f.write_str(self.kind.name()),
        }
    }
}

/// Axis-aligned bounding box of a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperRectangle {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl HyperRectangle {
    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    /// Uniform point inside the box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| {
                let u: f64 = rng.random();
                // guard against rounding past the upper edge
                (lo + (hi - lo) * u).min(hi)
            })
            .collect()
    }
}

/// Coordinate-wise min/max of `points`.
pub fn compute_range<'a, I>(points: I) -> Result<HyperRectangle>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut iter = points.into_iter();
    let first = iter.next().ok_or(Error::EmptyNodeSet)?;
    let mut lower = first.to_vec();
    let mut upper = first.to_vec();
    for p in iter {
        Error::check_dim(lower.len(), p.len())?;
        for ((lo, hi), &v) in lower.iter_mut().zip(upper.iter_mut()).zip(p) {
            if v < *lo {
                *lo = v;
            }
            if v > *hi {
                *hi = v;
            }
        }
    }
    Ok(HyperRectangle { lower, upper })
}

/// Unit vector uniform on the sphere `S^{dim-1}`.
pub fn sample_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = norm(&v);
        if norm > 0.0 && norm.is_finite() {
            v.iter_mut().for_each(|c| *c /= norm);
            return v;
        }
    }
}

/// A sampled splitting function (parameters only, no threshold).
#[derive(Debug, Clone, PartialEq)]
pub enum SplitFunction {
    Axis { feature: usize, dim: usize },
    Hyperplane { normal: Vec<f64> },
    Sphere { center: Vec<f64> },
    Ellipse { focus1: Vec<f64>, focus2: Vec<f64> },
    Hyperbola { focus1: Vec<f64>, focus2: Vec<f64> },
    Parabola { focus: Vec<f64>, normal: Vec<f64> },
    /// `matrix` is `A`, row-major `dim × dim`.
    Quadric { matrix: Vec<f64>, linear: Vec<f64> },
    Network(Mlp),
    Sine,
}

impl SplitFunction {
    /// Draws parameters for `family` from the node points `points`.
    pub fn sample<'a, I, R>(family: &SplitFamily, points: I, dim: usize, rng: &mut R) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
        R: Rng + ?Sized,
    {
        let range = compute_range(points)?;
        Error::check_dim(dim, range.dim())?;
        Ok(Self::sample_in(family, &range, rng))
    }

    /// Draws parameters given an already computed node range.
    pub fn sample_in<R: Rng + ?Sized>(family: &SplitFamily, range: &HyperRectangle, rng: &mut R) -> Self {
        let dim = range.dim();
        match family.kind {
            FamilyKind::Axis => SplitFunction::Axis {
                feature: rng.random_range(0..dim),
                dim,
            },
            FamilyKind::Hyperplane => SplitFunction::Hyperplane {
                normal: sample_unit_vector(dim, rng),
            },
            FamilyKind::Sphere => SplitFunction::Sphere {
                center: range.sample(rng),
            },
            FamilyKind::Ellipse => SplitFunction::Ellipse {
                focus1: range.sample(rng),
                focus2: range.sample(rng),
            },
            FamilyKind::Hyperbola => SplitFunction::Hyperbola {
                focus1: range.sample(rng),
                focus2: range.sample(rng),
            },
            FamilyKind::Parabola => SplitFunction::Parabola {
                focus: range.sample(rng),
                normal: sample_unit_vector(dim, rng),
            },
            FamilyKind::Quadric => {
                let matrix = (0..dim * dim).map(|_| rng.sample(StandardNormal)).collect();
                let lambda = family.quad_lambda;
                let linear = (0..dim).map(|_| rng.random_range(-lambda..=lambda)).collect();
                SplitFunction::Quadric { matrix, linear }
            }
            FamilyKind::Network => {
                SplitFunction::Network(Mlp::sample(dim, &family.hidden_widths_for(dim), rng))
            }
            FamilyKind::Sine => SplitFunction::Sine,
        }
    }

    pub fn kind(&self) -> FamilyKind {
        match self {
            SplitFunction::Axis { .. } => FamilyKind::Axis,
            SplitFunction::Hyperplane { .. } => FamilyKind::Hyperplane,
            SplitFunction::Sphere { .. } => FamilyKind::Sphere,
            SplitFunction::Ellipse { .. } => FamilyKind::Ellipse,
            SplitFunction::Hyperbola { .. } => FamilyKind::Hyperbola,
            SplitFunction::Parabola { .. } => FamilyKind::Parabola,
            SplitFunction::Quadric { .. } => FamilyKind::Quadric,
            SplitFunction::Network(_) => FamilyKind::Network,
            SplitFunction::Sine => FamilyKind::Sine,
        }
    }

    /// Input dimension the function expects.
    pub fn dim(&self) -> usize {
        match self {
            SplitFunction::Axis { dim, .. } => *dim,
            SplitFunction::Hyperplane { normal } => normal.len(),
            SplitFunction::Sphere { center } => center.len(),
            SplitFunction::Ellipse { focus1, .. } | SplitFunction::Hyperbola { focus1, .. } => {
                focus1.len()
            }
            SplitFunction::Parabola { focus, .. } => focus.len(),
            SplitFunction::Quadric { linear, .. } => linear.len(),
            SplitFunction::Network(net) => net.input_dim(),
            SplitFunction::Sine => 2,
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        Error::check_dim(self.dim(), x.len())?;
        Ok(self.value(x))
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.dim(), x.len())?;
        Ok(self.grad(x))
    }

    /// `f(x)` without the dimension check.
    pub(crate) fn value(&self, x: &[f64]) -> f64 {
        match self {
            SplitFunction::Axis { feature, .. } => x[*feature],
            SplitFunction::Hyperplane { normal } => dot(normal, x),
            SplitFunction::Sphere { center } => squared_distance(x, center),
            SplitFunction::Ellipse { focus1, focus2 } => distance(x, focus1) + distance(x, focus2),
            SplitFunction::Hyperbola { focus1, focus2 } => distance(x, focus1) - distance(x, focus2),
            SplitFunction::Parabola { focus, normal } => distance(x, focus) + dot(normal, x),
            SplitFunction::Quadric { matrix, linear } => {
                let d = linear.len();
                // x·(A + Aᵀ)x = 2·xᵀAx
                let quad: f64 = (0..d)
                    .map(|i| x[i] * dot(&matrix[i * d..(i + 1) * d], x))
                    .sum();
                2.0 * quad + dot(linear, x)
            }
            SplitFunction::Network(net) => net.forward(x),
            SplitFunction::Sine => x[1] - x[0].sin(),
        }
    }

    /// `∇f(x)` without the dimension check.
    pub(crate) fn grad(&self, x: &[f64]) -> Vec<f64> {
        match self {
            SplitFunction::Axis { feature, dim } => {
                let mut g = vec![0.0; *dim];
                g[*feature] = 1.0;
                g
            }
            SplitFunction::Hyperplane { normal } => normal.clone(),
            SplitFunction::Sphere { center } => {
                x.iter().zip(center).map(|(a, c)| 2.0 * (a - c)).collect()
            }
            SplitFunction::Ellipse { focus1, focus2 } => {
                let mut g = unit_from(x, focus1);
                add_scaled(&mut g, &unit_from(x, focus2), 1.0);
                g
            }
            SplitFunction::Hyperbola { focus1, focus2 } => {
                let mut g = unit_from(x, focus1);
                add_scaled(&mut g, &unit_from(x, focus2), -1.0);
                g
            }
            SplitFunction::Parabola { focus, normal } => {
                let mut g = unit_from(x, focus);
                add_scaled(&mut g, normal, 1.0);
                g
            }
            SplitFunction::Quadric { matrix, linear } => {
                let d = linear.len();
                // 2(A + Aᵀ)x + v
                (0..d)
                    .map(|i| {
                        let row: f64 = (0..d).map(|j| matrix[i * d + j] * x[j]).sum();
                        let col: f64 = (0..d).map(|j| matrix[j * d + i] * x[j]).sum();
                        2.0 * (row + col) + linear[i]
                    })
                    .collect()
            }
            SplitFunction::Network(net) => net.input_gradient(x),
            SplitFunction::Sine => vec![-x[0].cos(), 1.0],
        }
    }

    /// Centers and foci of radial families, used to skip singular points.
    pub fn singular_points(&self) -> Vec<&[f64]> {
        match self {
            SplitFunction::Ellipse { focus1, focus2 } | SplitFunction::Hyperbola { focus1, focus2 } => {
                vec![focus1, focus2]
            }
            SplitFunction::Parabola { focus, .. } => vec![focus],
            _ => Vec::new(),
        }
    }
}

/// A splitting function together with its drawn threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitInstance {
    pub function: SplitFunction,
    pub threshold: f64,
}

impl SplitInstance {
    /// `F(x) = f(x) - τ`.
    #[inline]
    pub fn offset(&self, x: &[f64]) -> f64 {
        self.function.value(x) - self.threshold
    }

    /// True when `x` is routed to the left child.
    #[inline]
    pub fn goes_left(&self, x: &[f64]) -> bool {
        self.offset(x) <= 0.0
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

#[inline]
pub(crate) fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// `(x - c)/‖x - c‖`, or zero within `RADIAL_EPS` of `c`.
fn unit_from(x: &[f64], c: &[f64]) -> Vec<f64> {
    let r = distance(x, c);
    if r < RADIAL_EPS {
        vec![0.0; x.len()]
    } else {
        x.iter().zip(c).map(|(a, b)| (a - b) / r).collect()
    }
}

fn add_scaled(acc: &mut [f64], v: &[f64], scale: f64) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += scale * b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn range_of_singleton_and_pair() {
        let r = compute_range([&[1.0, 2.0][..]]).unwrap();
        assert_eq!(r.lower, vec![1.0, 2.0]);
        assert_eq!(r.upper, vec![1.0, 2.0]);

        let r = compute_range([&[0.0, 0.0][..], &[3.0, -1.0][..]]).unwrap();
        assert_eq!(r.lower, vec![0.0, -1.0]);
        assert_eq!(r.upper, vec![3.0, 0.0]);
    }

    #[test]
    fn range_of_uniform_cloud_is_contained() {
        let mut rng = rng(1);
        let pts: Vec<[f64; 2]> = (0..100).map(|_| [rng.random(), rng.random()]).collect();
        let r = compute_range(pts.iter().map(|p| &p[..])).unwrap();
        assert!(r.lower.iter().all(|&v| v >= 0.0));
        assert!(r.upper.iter().all(|&v| v <= 1.0));
    }

    #[test]
    fn range_errors() {
        let empty: Vec<&[f64]> = Vec::new();
        assert!(matches!(compute_range(empty), Err(Error::EmptyNodeSet)));
        assert!(matches!(
            compute_range([&[0.0, 0.0][..], &[1.0][..]]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn axis_feature_is_uniform() {
        let mut rng = rng(7);
        let range = HyperRectangle {
            lower: vec![0.0; 6],
            upper: vec![1.0; 6],
        };
        let fam = SplitFamily::new(FamilyKind::Axis);
        let mut counts = [0usize; 6];
        let draws = 100_000;
        for _ in 0..draws {
            match SplitFunction::sample_in(&fam, &range, &mut rng) {
                SplitFunction::Axis { feature, dim } => {
                    assert_eq!(dim, 6);
                    counts[feature] += 1;
                }
                other => panic!("unexpected {other:?}"),
            }
        }
        for c in counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 1.0 / 6.0).abs() < 0.02, "{freq}");
        }
    }

    #[test]
    fn hyperplane_normals_are_unit_and_centered() {
        let mut rng = rng(11);
        let draws = 100_000;
        let mut mean = [0.0; 3];
        for _ in 0..draws {
            let v = sample_unit_vector(3, &mut rng);
            assert!((norm(&v) - 1.0).abs() < 1e-9);
            for (m, c) in mean.iter_mut().zip(&v) {
                *m += c / draws as f64;
            }
        }
        assert!(mean.iter().all(|m| m.abs() < 0.02), "{mean:?}");
    }

    #[test]
    fn centers_stay_inside_the_node_range() {
        let mut rng = rng(5);
        let pts = [[0.0, 2.0], [1.0, 3.0], [0.5, 2.5]];
        for kind in [
            FamilyKind::Sphere,
            FamilyKind::Ellipse,
            FamilyKind::Hyperbola,
            FamilyKind::Parabola,
        ] {
            let fam = SplitFamily::new(kind);
            for _ in 0..1000 {
                let f = SplitFunction::sample(&fam, pts.iter().map(|p| &p[..]), 2, &mut rng).unwrap();
                let range = compute_range(pts.iter().map(|p| &p[..])).unwrap();
                for c in f.singular_points() {
                    assert!(range.contains(c));
                }
                if let SplitFunction::Sphere { center } = &f {
                    assert!(range.contains(center));
                }
            }
        }
    }

    #[test]
    fn quadric_with_zero_lambda_has_no_linear_term() {
        let mut rng = rng(2);
        let range = HyperRectangle {
            lower: vec![0.0; 4],
            upper: vec![1.0; 4],
        };
        let f = SplitFunction::sample_in(&SplitFamily::quadric(0.0), &range, &mut rng);
        match f {
            SplitFunction::Quadric { linear, .. } => assert!(linear.iter().all(|&v| v == 0.0)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn closed_form_values() {
        let sphere = SplitFunction::Sphere {
            center: vec![0.0, 0.0],
        };
        assert_eq!(sphere.evaluate(&[3.0, 4.0]).unwrap(), 25.0);
        assert_eq!(sphere.gradient(&[3.0, 4.0]).unwrap(), vec![6.0, 8.0]);

        let ellipse = SplitFunction::Ellipse {
            focus1: vec![0.0, 0.0],
            focus2: vec![2.0, 0.0],
        };
        assert_eq!(ellipse.evaluate(&[1.0, 0.0]).unwrap(), 2.0);
        let g = ellipse.gradient(&[1.0, 1.0]).unwrap();
        assert!(g[0].abs() < 1e-15);
        assert!((g[1] - 2.0_f64.sqrt()).abs() < 1e-15);

        let hyper = SplitFunction::Hyperbola {
            focus1: vec![0.0, 0.0],
            focus2: vec![2.0, 0.0],
        };
        assert_eq!(hyper.evaluate(&[1.0, 0.0]).unwrap(), 0.0);

        let quad = SplitFunction::Quadric {
            matrix: vec![1.0, 0.0, 0.0, 1.0],
            linear: vec![0.0, 0.0],
        };
        assert_eq!(quad.evaluate(&[1.0, 1.0]).unwrap(), 4.0);

        let sine = SplitFunction::Sine;
        assert_eq!(sine.evaluate(&[0.0, 0.5]).unwrap(), 0.5);
        assert_eq!(sine.gradient(&[0.0, 0.5]).unwrap(), vec![-1.0, 1.0]);
    }

    #[test]
    fn coincident_foci_are_well_defined() {
        let c = vec![1.0, -1.0];
        let ellipse = SplitFunction::Ellipse {
            focus1: c.clone(),
            focus2: c.clone(),
        };
        let hyper = SplitFunction::Hyperbola {
            focus1: c.clone(),
            focus2: c.clone(),
        };
        for x in [[0.0, 0.0], [4.0, 3.0], [1.0, -1.0]] {
            let r = distance(&x, &c);
            assert!((ellipse.evaluate(&x).unwrap() - 2.0 * r).abs() < 1e-15);
            assert_eq!(hyper.evaluate(&x).unwrap(), 0.0);
        }
    }

    #[test]
    fn gradient_at_focus_drops_radial_term() {
        let para = SplitFunction::Parabola {
            focus: vec![1.0, 2.0],
            normal: vec![0.6, 0.8],
        };
        assert_eq!(para.gradient(&[1.0, 2.0]).unwrap(), vec![0.6, 0.8]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let f = SplitFunction::Hyperplane {
            normal: vec![1.0, 0.0, 0.0],
        };
        assert!(matches!(f.evaluate(&[1.0]), Err(Error::DimensionMismatch { expected: 3, got: 1 })));
        assert!(f.gradient(&[1.0, 2.0]).is_err());
        assert!(SplitFunction::Sine.evaluate(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn family_names_round_trip() {
        for kind in FamilyKind::ALL {
            assert_eq!(kind.name().parse::<FamilyKind>().unwrap(), kind);
        }
        assert!("forest".parse::<FamilyKind>().is_err());
    }

    #[test]
    fn validation_rules() {
        assert!(SplitFamily::new(FamilyKind::Sine).validate(3).is_err());
        assert!(SplitFamily::new(FamilyKind::Sine).validate(2).is_ok());
        assert!(SplitFamily::quadric(0.0).validate(2).is_err());
        assert!(SplitFamily::quadric(100.0).validate(2).is_ok());
        assert!(SplitFamily::network(vec![4, 0]).validate(2).is_err());
        assert_eq!(SplitFamily::network(vec![]).hidden_widths_for(3), vec![8, 8]);
        assert_eq!(SplitFamily::network(vec![]).hidden_widths_for(12), vec![12, 12]);
    }
}
