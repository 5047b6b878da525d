//! Catalogue domains with closed-form distance-to-boundary fields.
//!
//! Points are always `[x, y]`; one-dimensional domains ignore `y`.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{HardyError, Result};

pub type Point = [f64; 2];

/// Relative slack used to accept points that sit on Γ up to rounding.
const CLOSURE_SLACK: f64 = 1e-13;
/// Two face distances closer than this are treated as an interface.
pub const INTERFACE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConvexityClass {
    C11,
    Convex,
    ConvexComplement,
    Other,
}

impl ConvexityClass {
    pub fn parse(key: &str) -> Result<Self> {
        match key.to_ascii_lowercase().as_str() {
            "c11" => Ok(Self::C11),
            "convex" => Ok(Self::Convex),
            "convex-complement" => Ok(Self::ConvexComplement),
            "other" => Ok(Self::Other),
            _ => Err(HardyError::invalid(format!("unknown domain class '{key}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Shape {
    Interval { a: f64, b: f64 },
    Disk { center: Point, radius: f64 },
    /// Strictly convex, counter-clockwise vertex list.
    ConvexPolygon { vertices: Vec<Point> },
    /// Exterior of a strictly convex, counter-clockwise polygon.
    PolygonComplement { vertices: Vec<Point> },
    /// Complement of the closed wedge `{|arg x| ≤ α/2}` with apex at the origin.
    WedgeComplement { alpha: f64 },
    /// `{y > 0}`.
    HalfPlane,
    /// Koch snowflake interior; closed-form values only.
    KochSnowflake,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Domain {
    pub key: String,
    pub shape: Shape,
    pub dim: usize,
    pub hausdorff_dim: f64,
    pub convexity_class: ConvexityClass,
    pub uniformity_note: Option<String>,
}

/// Axis-aligned truncation box for unbounded domains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct BoundingBox {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl BoundingBox {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        if !(xmin < xmax && ymin < ymax) || ![xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite()) {
            return Err(HardyError::invalid("bounding box needs finite min < max on both axes"));
        }
        Ok(BoundingBox { xmin, xmax, ymin, ymax })
    }

    pub fn square(half: f64) -> Self {
        BoundingBox { xmin: -half, xmax: half, ymin: -half, ymax: half }
    }

    pub fn contains(&self, p: Point) -> bool {
        p[0] >= self.xmin && p[0] <= self.xmax && p[1] >= self.ymin && p[1] <= self.ymax
    }

    pub fn scaled(&self, s: f64) -> Self {
        BoundingBox { xmin: self.xmin * s, xmax: self.xmax * s, ymin: self.ymin * s, ymax: self.ymax * s }
    }
}

/// Boundary feature closest to a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Feature {
    Face(usize),
    Vertex(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Membership {
    Layer(usize),
    Interface(usize, usize),
    NotInLayer,
}

/// Line `{x : normal·x = offset}`; the signed face distance is `normal·x - offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hyperplane {
    pub normal: Point,
    pub offset: f64,
}

impl Hyperplane {
    pub fn eval(&self, p: Point) -> f64 {
        dot(self.normal, p) - self.offset
    }
}

/// Equidistance line between two faces; `normal` is a unit normal of the line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interface {
    pub faces: (usize, usize),
    pub normal: Point,
    pub vertex: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FacialDecomposition {
    /// Face `j` runs from vertex `j` to vertex `j+1`; normals point inward.
    pub hyperplanes: Vec<Hyperplane>,
    /// Interfaces between consecutive faces, emanating from their shared vertex.
    pub interfaces: Vec<Interface>,
}

impl FacialDecomposition {
    pub fn face_distance(&self, j: usize, p: Point) -> f64 {
        self.hyperplanes[j].eval(p)
    }

    /// The polygon is the intersection of the half-planes `{d_j ≥ 0}`.
    pub fn in_all_half_planes(&self, p: Point) -> bool {
        self.hyperplanes.iter().all(|h| h.eval(p) >= 0.0)
    }

    /// Index of the minimizing face, lowest index on ties.
    pub fn minimizing_face(&self, p: Point) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (j, h) in self.hyperplanes.iter().enumerate() {
            let d = h.eval(p);
            if d < best.1 {
                best = (j, d);
            }
        }
        best
    }

    pub fn face_gradient(&self, j: usize) -> Point {
        self.hyperplanes[j].normal
    }
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Interior angle at each vertex of a counter-clockwise polygon.
pub fn interior_angles(vertices: &[Point]) -> Result<Vec<f64>> {
    let n = vertices.len();
    if n < 3 {
        return Err(HardyError::Geometry(format!("polygon needs at least 3 vertices, got {n}")));
    }
    (0..n)
        .map(|k| {
            let prev = vertices[(k + n - 1) % n];
            let next = vertices[(k + 1) % n];
            let a = sub(prev, vertices[k]);
            let b = sub(next, vertices[k]);
            if norm(a) == 0.0 || norm(b) == 0.0 {
                return Err(HardyError::Geometry(format!("repeated vertex at index {k}")));
            }
            let turn = cross(sub(vertices[k], prev), sub(next, vertices[k]));
            let scale = norm(a) * norm(b);
            if turn.abs() <= 1e-12 * scale {
                return Err(HardyError::Geometry(format!("collinear vertices at index {k}")));
            }
            if turn < 0.0 {
                return Err(HardyError::Geometry(format!(
                    "vertex {k} is reflex or the order is clockwise"
                )));
            }
            Ok(cross(b, a).atan2(dot(a, b)).abs())
        })
        .collect()
}

fn polygon_perimeter(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    (0..n).map(|j| norm(sub(vertices[(j + 1) % n], vertices[j]))).sum()
}

fn validate_convex(vertices: &[Point]) -> Result<()> {
    let angles = interior_angles(vertices)?;
    let total: f64 = angles.iter().sum();
    let expected = (vertices.len() as f64 - 2.0) * PI;
    if (total - expected).abs() > 1e-9 {
        return Err(HardyError::Geometry("polygon winds more than once".into()));
    }
    Ok(())
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(HardyError::invalid(format!("interval needs a < b, got ({a}, {b})")));
        }
        Ok(Domain {
            key: if (a, b) == (0.0, 1.0) { "interval".into() } else { format!("interval(a={a},b={b})") },
            shape: Shape::Interval { a, b },
            dim: 1,
            hausdorff_dim: 0.0,
            convexity_class: ConvexityClass::C11,
            uniformity_note: None,
        })
    }

    pub fn disk(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(HardyError::invalid(format!("disk radius must be positive, got {radius}")));
        }
        Ok(Domain {
            key: if center == [0.0, 0.0] && radius == 1.0 {
                "disk".into()
            } else {
                format!("disk(radius={radius})")
            },
            shape: Shape::Disk { center, radius },
            dim: 2,
            hausdorff_dim: 1.0,
            convexity_class: ConvexityClass::C11,
            uniformity_note: None,
        })
    }

    pub fn convex_polygon(key: &str, vertices: Vec<Point>) -> Result<Self> {
        validate_convex(&vertices)?;
        Ok(Domain {
            key: key.into(),
            shape: Shape::ConvexPolygon { vertices },
            dim: 2,
            hausdorff_dim: 1.0,
            convexity_class: ConvexityClass::Convex,
            uniformity_note: None,
        })
    }

    pub fn polygon_complement(key: &str, vertices: Vec<Point>) -> Result<Self> {
        validate_convex(&vertices)?;
        Ok(Domain {
            key: key.into(),
            shape: Shape::PolygonComplement { vertices },
            dim: 2,
            hausdorff_dim: 1.0,
            convexity_class: ConvexityClass::ConvexComplement,
            uniformity_note: Some("exterior domain; uniform".into()),
        })
    }

    pub fn wedge_complement(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < PI) {
            return Err(HardyError::invalid(format!("wedge angle must lie in (0, pi), got {alpha}")));
        }
        Ok(Domain {
            key: format!("wedge-complement(alpha={alpha})"),
            shape: Shape::WedgeComplement { alpha },
            dim: 2,
            hausdorff_dim: 1.0,
            convexity_class: ConvexityClass::ConvexComplement,
            uniformity_note: None,
        })
    }

    pub fn half_plane() -> Self {
        Domain {
            key: "half-plane".into(),
            shape: Shape::HalfPlane,
            dim: 2,
            hausdorff_dim: 1.0,
            convexity_class: ConvexityClass::Convex,
            uniformity_note: None,
        }
    }

    pub fn koch_snowflake() -> Self {
        Domain {
            key: "koch".into(),
            shape: Shape::KochSnowflake,
            dim: 2,
            hausdorff_dim: 4f64.ln() / 3f64.ln(),
            convexity_class: ConvexityClass::Other,
            uniformity_note: Some("uniform domain; constant not computed".into()),
        }
    }

    pub fn unit_square() -> Self {
        Self::convex_polygon("square", vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
            .expect("unit square is convex")
    }

    pub fn equilateral_triangle() -> Self {
        Self::convex_polygon("triangle", vec![[0.0, 0.0], [1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]])
            .expect("triangle is convex")
    }

    pub fn square_complement() -> Self {
        Self::polygon_complement(
            "square-complement",
            vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]],
        )
        .expect("square is convex")
    }

    /// Looks up a catalogue key such as `"disk"` or `"wedge-complement(alpha=0.5)"`.
    pub fn from_key(key: &str) -> Result<Self> {
        let (name, params) = parse_key(key)?;
        let get = |k: &str| params.iter().find(|(pk, _)| pk == k).map(|(_, v)| *v);
        let allow = |allowed: &[&str]| -> Result<()> {
            match params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
                Some((k, _)) => Err(HardyError::Config(format!("unknown parameter '{k}' for {name}"))),
                None => Ok(()),
            }
        };
        match name.as_str() {
            "interval" => {
                allow(&["a", "b"])?;
                Self::interval(get("a").unwrap_or(0.0), get("b").unwrap_or(1.0))
            }
            "disk" => {
                allow(&["radius"])?;
                Self::disk([0.0, 0.0], get("radius").unwrap_or(1.0))
            }
            "square" => {
                allow(&[])?;
                Ok(Self::unit_square())
            }
            "triangle" => {
                allow(&[])?;
                Ok(Self::equilateral_triangle())
            }
            "square-complement" => {
                allow(&[])?;
                Ok(Self::square_complement())
            }
            "wedge-complement" => {
                allow(&["alpha"])?;
                let alpha = get("alpha")
                    .ok_or_else(|| HardyError::Config("wedge-complement needs alpha=...".into()))?;
                let mut d = Self::wedge_complement(alpha)?;
                d.key = key.to_string();
                Ok(d)
            }
            "half-plane" => {
                allow(&[])?;
                Ok(Self::half_plane())
            }
            "koch" => Ok(Self::koch_snowflake()),
            _ => Err(HardyError::Config(format!("unknown domain key '{key}'"))),
        }
    }

    /// Catalogue keys with a one-line description each.
    pub fn catalogue() -> Vec<(&'static str, &'static str)> {
        vec![
            ("interval", "open interval (0,1); interval(a=..,b=..) for other endpoints"),
            ("disk", "unit disk; disk(radius=..) for other radii"),
            ("square", "unit square [0,1]^2"),
            ("triangle", "equilateral triangle with unit sides"),
            ("square-complement", "exterior of [-1,1]^2 (needs a bounding box)"),
            ("wedge-complement(alpha=..)", "complement of the wedge |arg x| <= alpha/2 (needs a bounding box)"),
            ("half-plane", "upper half-plane y > 0 (needs a bounding box)"),
            ("koch", "Koch snowflake; closed-form reference only"),
        ]
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self.shape, Shape::Interval { .. } | Shape::Disk { .. } | Shape::ConvexPolygon { .. })
    }

    pub fn kind_name(&self) -> &'static str {
        match self.shape {
            Shape::Interval { .. } => "interval",
            Shape::Disk { .. } => "disk",
            Shape::ConvexPolygon { .. } => "convex-polygon",
            Shape::PolygonComplement { .. } => "polygon-complement",
            Shape::WedgeComplement { .. } => "wedge-complement",
            Shape::HalfPlane => "half-plane",
            Shape::KochSnowflake => "koch",
        }
    }

    fn unsupported(&self, what: &str) -> HardyError {
        HardyError::UnsupportedKind { kind: self.kind_name().into(), what: what.into() }
    }

    /// Dilation about the origin by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(HardyError::invalid(format!("scale must be positive, got {s}")));
        }
        let scale_pts = |v: &[Point]| v.iter().map(|p| [p[0] * s, p[1] * s]).collect::<Vec<_>>();
        let mut out = match &self.shape {
            Shape::Interval { a, b } => Self::interval(a * s, b * s)?,
            Shape::Disk { center, radius } => Self::disk([center[0] * s, center[1] * s], radius * s)?,
            Shape::ConvexPolygon { vertices } => Self::convex_polygon(&self.key, scale_pts(vertices))?,
            Shape::PolygonComplement { vertices } => {
                Self::polygon_complement(&self.key, scale_pts(vertices))?
            }
            Shape::WedgeComplement { .. } | Shape::HalfPlane => self.clone(),
            Shape::KochSnowflake => return Err(self.unsupported("scaling")),
        };
        out.key = format!("{}*{s}", self.key);
        Ok(out)
    }

    /// Euclidean distance to Γ, positive inside Ω and zero on Γ.
    pub fn signed_distance(&self, p: Point) -> Result<f64> {
        let outside = || HardyError::DomainMembership { x: p[0], y: p[1] };
        match &self.shape {
            Shape::Interval { a, b } => {
                let d = (p[0] - a).min(b - p[0]);
                let slack = CLOSURE_SLACK * (b - a);
                if d < -slack {
                    return Err(outside());
                }
                Ok(d.max(0.0))
            }
            Shape::Disk { center, radius } => {
                let d = radius - norm(sub(p, *center));
                if d < -CLOSURE_SLACK * radius {
                    return Err(outside());
                }
                Ok(d.max(0.0))
            }
            Shape::ConvexPolygon { vertices } => {
                let fd = polygon_decomposition(vertices);
                let (_, d) = fd.minimizing_face(p);
                if d < -CLOSURE_SLACK * polygon_perimeter(vertices) {
                    return Err(outside());
                }
                Ok(d.max(0.0))
            }
            Shape::PolygonComplement { vertices } => {
                let fd = polygon_decomposition(vertices);
                let (_, inner) = fd.minimizing_face(p);
                if inner > CLOSURE_SLACK * polygon_perimeter(vertices) {
                    return Err(outside());
                }
                Ok(nearest_on_polyline(vertices, p).distance)
            }
            Shape::WedgeComplement { alpha } => {
                let theta = p[1].atan2(p[0]).abs();
                let rho = norm(p);
                if rho > 0.0 && theta < alpha / 2.0 - CLOSURE_SLACK {
                    return Err(outside());
                }
                Ok(wedge_features(*alpha, p).0)
            }
            Shape::HalfPlane => {
                if p[1] < 0.0 {
                    return Err(outside());
                }
                Ok(p[1])
            }
            Shape::KochSnowflake => Err(self.unsupported("distance evaluation")),
        }
    }

    /// Minimizing boundary feature and its distance; ties go to the lowest
    /// face index, then to the lowest vertex index.
    pub fn nearest_face(&self, p: Point) -> Result<(Feature, f64)> {
        match &self.shape {
            Shape::ConvexPolygon { vertices } => {
                let d = self.signed_distance(p)?;
                let (j, _) = polygon_decomposition(vertices).minimizing_face(p);
                Ok((Feature::Face(j), d))
            }
            Shape::PolygonComplement { vertices } => {
                let d = self.signed_distance(p)?;
                Ok((nearest_on_polyline(vertices, p).feature, d))
            }
            Shape::WedgeComplement { alpha } => {
                let d = self.signed_distance(p)?;
                Ok((wedge_features(*alpha, p).1, d))
            }
            Shape::HalfPlane => Ok((Feature::Face(0), self.signed_distance(p)?)),
            _ => Err(self.unsupported("nearest-face queries")),
        }
    }

    /// Inward unit normals and interfaces of a bounded convex polygon.
    pub fn facial_decomposition(&self) -> Result<FacialDecomposition> {
        match &self.shape {
            Shape::ConvexPolygon { vertices } => Ok(polygon_decomposition(vertices)),
            _ => Err(self.unsupported("facial decomposition")),
        }
    }

    /// Radius of the largest inscribed disk of a bounded domain.
    pub fn inradius(&self) -> Result<f64> {
        match &self.shape {
            Shape::Interval { a, b } => Ok((b - a) / 2.0),
            Shape::Disk { radius, .. } => Ok(*radius),
            Shape::ConvexPolygon { vertices } => Ok(polygon_incircle(vertices).1),
            _ => Err(self.unsupported("inradius of an unbounded domain")),
        }
    }

    pub fn facial_membership(&self, p: Point, r: f64) -> Result<Membership> {
        let Shape::ConvexPolygon { vertices } = &self.shape else {
            return Err(self.unsupported("facial membership"));
        };
        let inradius = self.inradius()?;
        if !(r > 0.0) {
            return Err(HardyError::invalid(format!("layer depth must be positive, got {r}")));
        }
        if r >= inradius {
            return Err(HardyError::LayerOverlap { r, limit: inradius });
        }
        self.signed_distance(p)?;
        let fd = polygon_decomposition(vertices);
        let mut dists: Vec<(usize, f64)> =
            fd.hyperplanes.iter().enumerate().map(|(j, h)| (j, h.eval(p))).collect();
        dists.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let (j, dj) = dists[0];
        let (k, dk) = dists[1];
        if dj >= r {
            return Ok(Membership::NotInLayer);
        }
        if (dk - dj).abs() <= INTERFACE_TOL {
            return Ok(Membership::Interface(j.min(k), j.max(k)));
        }
        Ok(Membership::Layer(j))
    }

    /// Interior angle at each vertex; for complements and wedges this is the
    /// angle of the removed convex set.
    pub fn dihedral_angles(&self) -> Result<Vec<f64>> {
        match &self.shape {
            Shape::ConvexPolygon { vertices } | Shape::PolygonComplement { vertices } => {
                interior_angles(vertices)
            }
            Shape::WedgeComplement { alpha } => Ok(vec![*alpha]),
            _ => Err(self.unsupported("dihedral angles")),
        }
    }

    /// Vertices of polygonal boundaries (the apex for wedge complements).
    pub fn vertices(&self) -> Vec<Point> {
        match &self.shape {
            Shape::ConvexPolygon { vertices } | Shape::PolygonComplement { vertices } => vertices.clone(),
            Shape::WedgeComplement { .. } => vec![[0.0, 0.0]],
            _ => Vec::new(),
        }
    }

    /// Γ as straight pieces, arcs and isolated points, clipped to `bbox` for
    /// unbounded domains.
    pub fn boundary_pieces(&self, bbox: Option<&BoundingBox>) -> Result<Vec<BoundaryPiece>> {
        let need_box = || {
            bbox.copied().ok_or_else(|| HardyError::invalid("unbounded domain needs a bounding box"))
        };
        match &self.shape {
            Shape::Interval { a, b } => Ok(vec![BoundaryPiece::Point([*a, 0.0]), BoundaryPiece::Point([*b, 0.0])]),
            Shape::Disk { center, radius } => {
                Ok(vec![BoundaryPiece::Arc { center: *center, radius: *radius, from: 0.0, to: 2.0 * PI }])
            }
            Shape::ConvexPolygon { vertices } | Shape::PolygonComplement { vertices } => {
                let n = vertices.len();
                Ok((0..n).map(|j| BoundaryPiece::Segment(vertices[j], vertices[(j + 1) % n])).collect())
            }
            Shape::WedgeComplement { alpha } => {
                let b = need_box()?;
                let reach = ray_exit(&b, [0.0, 0.0]);
                let (c, s) = ((alpha / 2.0).cos(), (alpha / 2.0).sin());
                Ok(vec![
                    BoundaryPiece::Segment([0.0, 0.0], [reach([c, s]) * c, reach([c, s]) * s]),
                    BoundaryPiece::Segment([0.0, 0.0], [reach([c, -s]) * c, -reach([c, -s]) * s]),
                ])
            }
            Shape::HalfPlane => {
                let b = need_box()?;
                Ok(vec![BoundaryPiece::Segment([b.xmin, 0.0], [b.xmax, 0.0])])
            }
            Shape::KochSnowflake => Err(self.unsupported("boundary sampling")),
        }
    }
}

fn ray_exit(b: &BoundingBox, origin: Point) -> impl Fn(Point) -> f64 + '_ {
    move |dir: Point| {
        let mut t = f64::INFINITY;
        for (o, d, lo, hi) in [(origin[0], dir[0], b.xmin, b.xmax), (origin[1], dir[1], b.ymin, b.ymax)] {
            if d > 0.0 {
                t = t.min((hi - o) / d);
            } else if d < 0.0 {
                t = t.min((lo - o) / d);
            }
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BoundaryPiece {
    Point(Point),
    Segment(Point, Point),
    Arc { center: Point, radius: f64, from: f64, to: f64 },
}

impl BoundaryPiece {
    pub fn length(&self) -> f64 {
        match *self {
            BoundaryPiece::Point(_) => 0.0,
            BoundaryPiece::Segment(a, b) => norm(sub(b, a)),
            BoundaryPiece::Arc { radius, from, to, .. } => radius * (to - from),
        }
    }

    /// Point at arclength fraction `s ∈ [0, 1]`.
    pub fn at(&self, s: f64) -> Point {
        match *self {
            BoundaryPiece::Point(p) => p,
            BoundaryPiece::Segment(a, b) => [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])],
            BoundaryPiece::Arc { center, radius, from, to } => {
                let t = from + s * (to - from);
                [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
            }
        }
    }
}

/// `n` points spread over the pieces in proportion to their length, plus
/// every isolated point piece.
pub fn sample_pieces(pieces: &[BoundaryPiece], n: usize) -> Vec<Point> {
    let total: f64 = pieces.iter().map(|p| p.length()).sum();
    let mut out = Vec::with_capacity(n + pieces.len());
    for piece in pieces {
        let len = piece.length();
        if len == 0.0 {
            out.push(piece.at(0.0));
            continue;
        }
        let m = ((n as f64) * len / total).round().max(2.0) as usize;
        let closed = matches!(piece, BoundaryPiece::Arc { from, to, .. } if (to - from - 2.0 * PI).abs() < 1e-15);
        let denom = if closed { m } else { m - 1 };
        out.extend((0..m).map(|i| piece.at(i as f64 / denom as f64)));
    }
    out
}

/// Clips each piece to the closed disk `B(z; s)`.
pub fn clip_pieces_to_ball(pieces: &[BoundaryPiece], z: Point, s: f64) -> Vec<BoundaryPiece> {
    let mut out = Vec::new();
    for piece in pieces {
        match *piece {
            BoundaryPiece::Point(p) => {
                if norm(sub(p, z)) <= s {
                    out.push(*piece);
                }
            }
            BoundaryPiece::Segment(a, b) => {
                let d = sub(b, a);
                let f = sub(a, z);
                let qa = dot(d, d);
                let qb = 2.0 * dot(f, d);
                let qc = dot(f, f) - s * s;
                let disc = qb * qb - 4.0 * qa * qc;
                if disc < 0.0 {
                    continue;
                }
                let sq = disc.sqrt();
                let t0 = ((-qb - sq) / (2.0 * qa)).max(0.0);
                let t1 = ((-qb + sq) / (2.0 * qa)).min(1.0);
                if t0 < t1 {
                    out.push(BoundaryPiece::Segment(piece.at(t0), piece.at(t1)));
                } else if t0 == t1 {
                    out.push(BoundaryPiece::Point(piece.at(t0)));
                }
            }
            BoundaryPiece::Arc { center, radius, from, to } => {
                let dist = norm(sub(center, z));
                if dist == 0.0 {
                    if radius <= s {
                        out.push(*piece);
                    }
                    continue;
                }
                // Law of cosines: arc points within s of z span ±half around the direction to z.
                let cos_half = (radius * radius + dist * dist - s * s) / (2.0 * radius * dist);
                if cos_half > 1.0 {
                    continue;
                }
                let half = cos_half.max(-1.0).acos();
                let mid = (z[1] - center[1]).atan2(z[0] - center[0]);
                for shift in [-2.0 * PI, 0.0, 2.0 * PI] {
                    let lo = (mid - half + shift).max(from);
                    let hi = (mid + half + shift).min(to);
                    if lo < hi {
                        out.push(BoundaryPiece::Arc { center, radius, from: lo, to: hi });
                    }
                }
            }
        }
    }
    out
}

fn polygon_decomposition(vertices: &[Point]) -> FacialDecomposition {
    let n = vertices.len();
    let hyperplanes: Vec<Hyperplane> = (0..n)
        .map(|j| {
            let a = vertices[j];
            let e = sub(vertices[(j + 1) % n], a);
            let len = norm(e);
            let normal = [-e[1] / len, e[0] / len];
            Hyperplane { normal, offset: dot(normal, a) }
        })
        .collect();
    let interfaces = (0..n)
        .map(|k| {
            let j = (k + n - 1) % n;
            let diff = sub(hyperplanes[j].normal, hyperplanes[k].normal);
            let len = norm(diff);
            Interface { faces: (j.min(k), j.max(k)), normal: [diff[0] / len, diff[1] / len], vertex: vertices[k] }
        })
        .collect();
    FacialDecomposition { hyperplanes, interfaces }
}

/// Incenter and inradius: the point maximizing the smallest face distance,
/// found among points equidistant from three face lines.
fn polygon_incircle(vertices: &[Point]) -> (Point, f64) {
    let fd = polygon_decomposition(vertices);
    let h = &fd.hyperplanes;
    let n = h.len();
    let mut best = ([0.0, 0.0], f64::NEG_INFINITY);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                // Solve normal_m · x - t = offset_m for m in {i, j, k}.
                let rows = [h[i], h[j], h[k]];
                let m = |r: usize| [rows[r].normal[0], rows[r].normal[1], -1.0, rows[r].offset];
                let mut a = [m(0), m(1), m(2)];
                if let Some(sol) = solve3(&mut a) {
                    let p = [sol[0], sol[1]];
                    let (_, dmin) = fd.minimizing_face(p);
                    if (dmin - sol[2]).abs() <= 1e-12 * (1.0 + sol[2].abs()) && dmin > best.1 {
                        best = (p, dmin);
                    }
                }
            }
        }
    }
    best
}

fn solve3(a: &mut [[f64; 4]; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        for row in 0..3 {
            if row != col {
                let f = a[row][col] / a[col][col];
                for c in col..4 {
                    a[row][c] -= f * a[col][c];
                }
            }
        }
    }
    Some([a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]])
}

struct PolylineHit {
    distance: f64,
    feature: Feature,
}

fn nearest_on_polyline(vertices: &[Point], p: Point) -> PolylineHit {
    let n = vertices.len();
    let mut best = f64::INFINITY;
    let mut params = Vec::with_capacity(n);
    for j in 0..n {
        let a = vertices[j];
        let e = sub(vertices[(j + 1) % n], a);
        let t = dot(sub(p, a), e) / dot(e, e);
        let tc = t.clamp(0.0, 1.0);
        let q = [a[0] + tc * e[0], a[1] + tc * e[1]];
        let d = norm(sub(p, q));
        params.push((t, d));
        best = best.min(d);
    }
    for (j, &(t, d)) in params.iter().enumerate() {
        if d == best && (0.0..=1.0).contains(&t) {
            return PolylineHit { distance: best, feature: Feature::Face(j) };
        }
    }
    let k = (0..n)
        .find(|&k| norm(sub(p, vertices[k])) == best)
        .or_else(|| {
            (0..n).min_by(|&a, &b| norm(sub(p, vertices[a])).total_cmp(&norm(sub(p, vertices[b]))))
        })
        .unwrap_or(0);
    PolylineHit { distance: best, feature: Feature::Vertex(k) }
}

/// Distance and feature for the wedge complement: face 0 is the ray at
/// angle +α/2, face 1 the ray at -α/2, vertex 0 the apex.
fn wedge_features(alpha: f64, p: Point) -> (f64, Feature) {
    let (c, s) = ((alpha / 2.0).cos(), (alpha / 2.0).sin());
    let rho = norm(p);
    let mut best = (f64::INFINITY, Feature::Vertex(0));
    for (j, e) in [[c, s], [c, -s]].into_iter().enumerate() {
        let u = dot(p, e);
        let (d, f) = if u >= 0.0 { (cross(e, p).abs(), Feature::Face(j)) } else { (rho, Feature::Vertex(0)) };
        if d < best.0 {
            best = (d, f);
        }
    }
    best
}

/// Splits `name(k=v,...)` into the name and numeric parameters; values may
/// carry a trailing `pi` factor, as in `0.5pi`.
fn parse_key(key: &str) -> Result<(String, Vec<(String, f64)>)> {
    let key = key.trim();
    let Some(open) = key.find('(') else {
        return Ok((key.to_string(), Vec::new()));
    };
    if !key.ends_with(')') {
        return Err(HardyError::Config(format!("malformed domain key '{key}'")));
    }
    let name = key[..open].trim().to_string();
    let inner = &key[open + 1..key.len() - 1];
    let mut params = Vec::new();
    for part in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| HardyError::Config(format!("expected key=value in '{part}'")))?;
        params.push((k.trim().to_string(), parse_number(v.trim())?));
    }
    Ok((name, params))
}

fn parse_number(text: &str) -> Result<f64> {
    let bad = || HardyError::Config(format!("cannot parse number '{text}'"));
    if let Some(coef) = text.strip_suffix("pi") {
        let coef = coef.trim().trim_end_matches('*');
        let c = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().map_err(|_| bad())? };
        return Ok(c * PI);
    }
    if let Some((num, den)) = text.split_once("pi/") {
        let c = if num.trim().is_empty() { 1.0 } else { num.trim().trim_end_matches('*').parse::<f64>().map_err(|_| bad())? };
        let d = den.trim().parse::<f64>().map_err(|_| bad())?;
        return Ok(c * PI / d);
    }
    text.parse::<f64>().map_err(|_| bad())
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key)
    }
}
