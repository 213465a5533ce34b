//! Weighted one-dimensional finite-element infrastructure.
//!
//! A radially symmetric function on the unit ball of `R^N` is a function of
//! `r ∈ (0, 1]` and `∫_Ω g dx = ω_{N-1} ∫_0^1 g(r) r^(N-1) dr`. The interval
//! geometry uses unit weight and unit surface factor.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math::{powf, powi, sqrt};
use crate::problem::{clamp, mean_degeneracy_weight};

/// Gauss–Legendre nodes and weights on `[0, 1]`, exact through degree 5.
const GAUSS: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    /// Unit ball in `R^dimension`, weight `r^(dimension-1)`.
    Ball { dimension: usize },
    /// Unit interval, weight 1.
    Interval,
}

/// A quadrature point. `weight` already contains the Gauss weight, the
/// sub-interval length, the radial weight and the surface factor, so that
/// `Σ weight · g(r)` approximates `∫_Ω g dx`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadPoint {
    pub elem: usize,
    /// Local coordinate in `[0, 1]` on element `elem`.
    pub t: f64,
    pub r: f64,
    pub weight: f64,
}

#[derive(Debug)]
struct MeshData {
    nodes: Vec<f64>,
    geometry: Geometry,
    grading: f64,
    surface_factor: f64,
    quad: Vec<QuadPoint>,
}

/// Graded node set `0 = r_0 < … < r_M = 1`. Cheap to clone.
#[derive(Clone, Debug)]
pub struct RadialMesh {
    data: Arc<MeshData>,
}

/// `ω_{N-1} = 2 π^(N/2) / Γ(N/2)`, the area of the unit sphere in `R^N`.
pub fn sphere_area(dimension: usize) -> f64 {
    // Γ(N/2) by the recursion Γ(x+1) = x Γ(x) from Γ(1) = 1 or Γ(1/2) = √π.
    let half = dimension as f64 / 2.0;
    let (mut gamma, mut x) = if dimension.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (sqrt(PI), 0.5)
    };
    while x < half {
        gamma *= x;
        x += 1.0;
    }
    2.0 * powf(PI, half) / gamma
}

fn graded_nodes(elements: usize, grading: f64) -> Vec<f64> {
    if grading == 1.0 {
        return (0..=elements).map(|i| i as f64 / elements as f64).collect();
    }
    // Element i has length ℓ q^(M-1-i).
    let total: f64 = (0..elements).map(|j| powi(grading, j as i32)).sum();
    let mut nodes = Vec::with_capacity(elements + 1);
    let mut r = 0.0;
    nodes.push(0.0);
    for i in 0..elements {
        r += powi(grading, (elements - 1 - i) as i32) / total;
        nodes.push(r);
    }
    nodes[elements] = 1.0;
    nodes
}

impl RadialMesh {
    /// Geometrically graded mesh of the unit ball in `R^dimension`.
    pub fn ball(dimension: usize, elements: usize, grading: f64) -> Result<Self> {
        if dimension <= 2 {
            return Err(Error::InvalidParameter {
                name: "N",
                constraint: "N > 2",
            });
        }
        Self::graded(Geometry::Ball { dimension }, elements, grading)
    }

    /// Geometrically graded mesh of the unit interval.
    pub fn interval(elements: usize, grading: f64) -> Result<Self> {
        Self::graded(Geometry::Interval, elements, grading)
    }

    fn graded(geometry: Geometry, elements: usize, grading: f64) -> Result<Self> {
        if !(grading > 0.0 && grading <= 1.0) {
            return Err(Error::InvalidGrading(grading));
        }
        if elements < 2 {
            return Err(Error::InvalidParameter {
                name: "elements",
                constraint: "elements >= 2",
            });
        }
        Self::build(geometry, graded_nodes(elements, grading), grading)
    }

    /// Ball mesh whose grading puts at least `inner` elements inside
    /// `[0, radius]`. Uniform if that already holds.
    pub fn resolving(dimension: usize, elements: usize, radius: f64, inner: usize) -> Result<Self> {
        if inner >= elements || !(radius > 0.0 && radius < 1.0) {
            return Err(Error::InvalidParameter {
                name: "radius",
                constraint: "0 < radius < 1 and inner < elements",
            });
        }
        let fits = |q: f64| graded_nodes(elements, q)[inner] <= radius;
        if fits(1.0) {
            return Self::ball(dimension, elements, 1.0);
        }
        let (mut lo, mut hi) = (1e-3, 1.0);
        if !fits(lo) {
            return Err(Error::InvalidParameter {
                name: "elements",
                constraint: "too few elements to resolve the radius",
            });
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if fits(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Self::ball(dimension, elements, lo)
    }

    /// Mesh from explicit nodes; must start at 0, end at 1 and increase.
    pub fn from_nodes(geometry: Geometry, nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 || nodes[0] != 0.0 || nodes[nodes.len() - 1] != 1.0 {
            return Err(Error::InvalidParameter {
                name: "nodes",
                constraint: "at least two elements from 0 to 1",
            });
        }
        if let Geometry::Ball { dimension } = geometry {
            if dimension <= 2 {
                return Err(Error::InvalidParameter {
                    name: "N",
                    constraint: "N > 2",
                });
            }
        }
        Self::build(geometry, nodes, f64::NAN)
    }

    fn build(geometry: Geometry, nodes: Vec<f64>, grading: f64) -> Result<Self> {
        if let Some(e) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::DegenerateElement(e));
        }
        let surface_factor = match geometry {
            Geometry::Ball { dimension } => sphere_area(dimension),
            Geometry::Interval => 1.0,
        };
        let mut data = MeshData {
            nodes,
            geometry,
            grading,
            surface_factor,
            quad: Vec::new(),
        };
        let mut quad = Vec::with_capacity(3 * (data.nodes.len() - 1));
        for e in 0..data.nodes.len() - 1 {
            push_gauss(&data, e, data.nodes[e], data.nodes[e + 1], &mut quad);
        }
        data.quad = quad;
        Ok(RadialMesh { data: Arc::new(data) })
    }

    pub fn geometry(&self) -> Geometry {
        self.data.geometry
    }

    /// `N` for balls, 1 for the interval.
    pub fn dimension(&self) -> usize {
        match self.data.geometry {
            Geometry::Ball { dimension } => dimension,
            Geometry::Interval => 1,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.data.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.data.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.data.nodes.len() - 1
    }

    pub fn element_length(&self, e: usize) -> f64 {
        self.data.nodes[e + 1] - self.data.nodes[e]
    }

    pub fn max_element_length(&self) -> f64 {
        (0..self.num_elements())
            .map(|e| self.element_length(e))
            .fold(0.0, f64::max)
    }

    /// Grading ratio; NaN for meshes built from explicit nodes.
    pub fn grading(&self) -> f64 {
        self.data.grading
    }

    pub fn surface_factor(&self) -> f64 {
        self.data.surface_factor
    }

    /// Radial weight `w(r)`.
    pub fn weight(&self, r: f64) -> f64 {
        radial_weight(self.data.geometry, r)
    }

    /// Standard quadrature, three Gauss points per element.
    pub fn quad_points(&self) -> &[QuadPoint] {
        &self.data.quad
    }

    /// Quadrature with elements split at `breaks` (points outside `(0, 1)` and
    /// points that coincide with nodes are ignored).
    pub fn split_quad_points(&self, breaks: &[f64]) -> Vec<QuadPoint> {
        let nodes = &self.data.nodes;
        let mut inner: Vec<f64> = breaks.iter().copied().filter(|&b| b > 0.0 && b < 1.0).collect();
        inner.sort_by(f64::total_cmp);
        inner.dedup();
        let mut out = Vec::with_capacity(self.data.quad.len() + 3 * inner.len());
        let mut next = 0;
        for e in 0..self.num_elements() {
            let (a, b) = (nodes[e], nodes[e + 1]);
            while next < inner.len() && inner[next] <= a {
                next += 1;
            }
            let mut left = a;
            while next < inner.len() && inner[next] < b {
                push_gauss(&self.data, e, left, inner[next], &mut out);
                left = inner[next];
                next += 1;
            }
            push_gauss(&self.data, e, left, b, &mut out);
        }
        out
    }

    /// Quadrature adapted to the breakpoints of `field`.
    pub fn quad_points_for(&self, field: &dyn RadialField) -> Vec<QuadPoint> {
        let breaks = field.breakpoints();
        if breaks.is_empty() {
            self.data.quad.clone()
        } else {
            self.split_quad_points(&breaks)
        }
    }

    /// `∫_Ω 1 dx`.
    pub fn volume(&self) -> f64 {
        self.data.quad.iter().map(|q| q.weight).sum()
    }

    /// Element and local coordinate containing `r` (clamped to `[0, 1]`).
    pub fn locate(&self, r: f64) -> (usize, f64) {
        let nodes = &self.data.nodes;
        let m = self.num_elements();
        let r = r.clamp(0.0, 1.0);
        let e = (nodes.partition_point(|&x| x <= r).max(1) - 1).min(m - 1);
        (e, (r - nodes[e]) / (nodes[e + 1] - nodes[e]))
    }

    /// Same mesh (shared storage or identical nodes and geometry).
    pub fn same_as(&self, other: &RadialMesh) -> bool {
        Arc::ptr_eq(&self.data, &other.data)
            || (self.data.geometry == other.data.geometry && self.data.nodes == other.data.nodes)
    }

    /// `∫_Ω f` over quadrature adapted to `breaks`.
    pub fn integrate<F: Fn(&QuadPoint) -> f64>(&self, breaks: &[f64], f: F) -> f64 {
        if breaks.is_empty() {
            self.data.quad.iter().map(|q| q.weight * f(q)).sum()
        } else {
            self.split_quad_points(breaks).iter().map(|q| q.weight * f(q)).sum()
        }
    }
}

fn radial_weight(geometry: Geometry, r: f64) -> f64 {
    match geometry {
        Geometry::Ball { dimension } => powi(r, dimension as i32 - 1),
        Geometry::Interval => 1.0,
    }
}

fn push_gauss(data: &MeshData, e: usize, a: f64, b: f64, out: &mut Vec<QuadPoint>) {
    let (ra, rb) = (data.nodes[e], data.nodes[e + 1]);
    let len = b - a;
    for &(x, w) in &GAUSS {
        let r = a + len * x;
        out.push(QuadPoint {
            elem: e,
            t: (r - ra) / (rb - ra),
            r,
            weight: w * len * radial_weight(data.geometry, r) * data.surface_factor,
        });
    }
}

/// Grading ratio that keeps the first-to-last element ratio of a
/// `coarse_elements` mesh with ratio `coarse` when refining to `elements`.
pub fn refined_grading(coarse: f64, coarse_elements: usize, elements: usize) -> f64 {
    powf(coarse, coarse_elements as f64 / elements as f64)
}

/// Anything that can be evaluated at a quadrature point.
pub trait RadialField {
    fn at(&self, qp: &QuadPoint) -> f64;

    /// Points where the field is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: Fn(f64) -> f64> RadialField for F {
    fn at(&self, qp: &QuadPoint) -> f64 {
        self(qp.r)
    }
}

/// Nodal values of a continuous piecewise-linear function on a mesh.
#[derive(Clone, Debug)]
pub struct GridFunction {
    mesh: RadialMesh,
    values: Vec<f64>,
    pinned: bool,
}

impl GridFunction {
    /// `pinned` asserts the Dirichlet condition `u(1) = 0`.
    pub fn new(mesh: &RadialMesh, values: Vec<f64>, pinned: bool) -> Result<Self> {
        if values.len() != mesh.num_nodes() {
            return Err(Error::MeshMismatch);
        }
        if pinned && values[values.len() - 1] != 0.0 {
            return Err(Error::NotPinned);
        }
        Ok(GridFunction {
            mesh: mesh.clone(),
            values,
            pinned,
        })
    }

    pub fn zeros(mesh: &RadialMesh) -> Self {
        GridFunction {
            mesh: mesh.clone(),
            values: alloc::vec![0.0; mesh.num_nodes()],
            pinned: true,
        }
    }

    /// Nodal interpolant of `f`; the last value is forced to 0 if `pinned`.
    pub fn from_fn<F: Fn(f64) -> f64>(mesh: &RadialMesh, f: F, pinned: bool) -> Self {
        let mut values: Vec<f64> = mesh.nodes().iter().map(|&r| f(r)).collect();
        if pinned {
            let last = values.len() - 1;
            values[last] = 0.0;
        }
        GridFunction {
            mesh: mesh.clone(),
            values,
            pinned,
        }
    }

    pub fn mesh(&self) -> &RadialMesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_pinned(&self) -> bool {
        self.pinned
    }

    /// Value at a point of this function's mesh.
    #[inline]
    pub fn at(&self, qp: &QuadPoint) -> f64 {
        let v = &self.values;
        v[qp.elem] * (1.0 - qp.t) + v[qp.elem + 1] * qp.t
    }

    pub fn eval(&self, r: f64) -> f64 {
        let (e, t) = self.mesh.locate(r);
        self.values[e] * (1.0 - t) + self.values[e + 1] * t
    }

    /// `u'` on element `e`.
    #[inline]
    pub fn slope(&self, e: usize) -> f64 {
        (self.values[e + 1] - self.values[e]) / self.mesh.element_length(e)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Nodewise map; the result is pinned only if `f(0) == 0` keeps it so.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> GridFunction {
        let values: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        let pinned = self.pinned && values[values.len() - 1] == 0.0;
        GridFunction {
            mesh: self.mesh.clone(),
            values,
            pinned,
        }
    }

    /// `self - other` on a shared mesh.
    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        if !self.mesh.same_as(&other.mesh) {
            return Err(Error::MeshMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(GridFunction {
            mesh: self.mesh.clone(),
            values,
            pinned: self.pinned && other.pinned,
        })
    }

    /// Nodal truncation `T_k(u_i)`.
    pub fn truncated(&self, k: f64) -> GridFunction {
        self.map(|v| clamp(v, k))
    }
}

impl RadialField for GridFunction {
    fn at(&self, qp: &QuadPoint) -> f64 {
        GridFunction::at(self, qp)
    }
}

/// `‖u‖_{L^p(Ω)}`, exact quadrature of the piecewise-linear interpolant for
/// integer `p <= 5 - (N-1)`.
pub fn lp_norm(u: &GridFunction, p: f64) -> f64 {
    let s: f64 = u
        .mesh
        .quad_points()
        .iter()
        .map(|q| q.weight * powf(u.at(q).abs(), p))
        .sum();
    powf(s, 1.0 / p)
}

/// `∫_Ω |∇u| dx`.
pub fn w11_seminorm(u: &GridFunction) -> f64 {
    u.mesh
        .quad_points()
        .iter()
        .map(|q| q.weight * u.slope(q.elem).abs())
        .sum()
}

/// `∫_{|u| >= k} |g|^p dx`, the indicator resolved at quadrature points.
pub fn restricted_integral(u: &GridFunction, g: &dyn RadialField, k: f64, p: f64) -> f64 {
    restricted_weighted(u, g, k, |gv, _| powf(gv.abs(), p))
}

/// `∫_{|u| >= k} h(g, u) dx` for a pointwise integrand `h`.
pub fn restricted_weighted<H: Fn(f64, f64) -> f64>(u: &GridFunction, g: &dyn RadialField, k: f64, h: H) -> f64 {
    let mut breaks = g.breakpoints();
    breaks.retain(|b| *b > 0.0 && *b < 1.0);
    let quad = if breaks.is_empty() {
        alloc::borrow::Cow::Borrowed(u.mesh.quad_points())
    } else {
        alloc::borrow::Cow::Owned(u.mesh.split_quad_points(&breaks))
    };
    quad.iter()
        .filter_map(|q| {
            let uv = u.at(q);
            (uv.abs() >= k).then(|| q.weight * h(g.at(q), uv))
        })
        .sum()
}

/// Slope of the Kirchhoff transform `H_e(u) = ∫_0^u (1+|s|)^(-e/2) ds` on
/// element `e`, i.e. the gradient of the nodal interpolant of `H_e(u)`.
#[inline]
pub(crate) fn kirchhoff_slope(u: &GridFunction, e: usize, exponent: f64) -> f64 {
    let (a, b) = (u.values[e], u.values[e + 1]);
    mean_degeneracy_weight(a, b, 0.5 * exponent, f64::INFINITY) * u.slope(e)
}

/// `∫_Ω |∇u|² / (1 + |u|)^exponent dx`.
///
/// Evaluated as the Dirichlet energy of the nodal interpolant of
/// `H(u) = ∫_0^u (1+|s|)^(-exponent/2) ds`, which is the energy the
/// discrete scheme actually controls. `exponent = 0` gives the plain
/// Dirichlet energy; the value is even in `u`.
pub fn weighted_gradient_energy(u: &GridFunction, exponent: f64) -> f64 {
    restricted_gradient_energy(u, exponent, 0.0)
}

/// [`weighted_gradient_energy`] restricted to `{|u| >= k}`.
pub fn restricted_gradient_energy(u: &GridFunction, exponent: f64, k: f64) -> f64 {
    let m = u.mesh.num_elements();
    let mut slopes = Vec::with_capacity(m);
    for e in 0..m {
        slopes.push(kirchhoff_slope(u, e, exponent));
    }
    u.mesh
        .quad_points()
        .iter()
        .filter(|q| u.at(q).abs() >= k)
        .map(|q| q.weight * slopes[q.elem] * slopes[q.elem])
        .sum()
}

/// `‖u - exact‖_{L^p}` with `exact` evaluated at quadrature points.
pub fn lp_error<F: Fn(f64) -> f64>(u: &GridFunction, exact: F, p: f64) -> f64 {
    let s: f64 = u
        .mesh
        .quad_points()
        .iter()
        .map(|q| q.weight * powf((u.at(q) - exact(q.r)).abs(), p))
        .sum();
    powf(s, 1.0 / p)
}

/// `∫_Ω |∇u - ∇exact| dx` given the radial derivative of `exact`.
pub fn w11_error<F: Fn(f64) -> f64>(u: &GridFunction, dexact: F) -> f64 {
    u.mesh
        .quad_points()
        .iter()
        .map(|q| q.weight * (u.slope(q.elem) - dexact(q.r)).abs())
        .sum()
}
