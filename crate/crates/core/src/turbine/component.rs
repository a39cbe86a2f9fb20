use nalgebra::{Matrix3, Vector3};

use super::transform::{keep_orthonormal, rotation_matrix, Transform};
use crate::{Error, Result};

/// One actuator point of a line, in the line's local frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LinePoint {
    /// Offset from the line's start point.
    pub offset: Vector3<f64>,
    /// Per-point orientation relative to the start frame.
    pub orientation: Matrix3<f64>,
    /// Chord length w (m).
    pub chord: f64,
    /// Element length l along the span (m).
    pub length: f64,
    /// Local twist (rad).
    pub twist: f64,
    pub polar: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSpec {
    pub points: Vec<LinePoint>,
    /// Blade pitch added to every twist (rad).
    pub pitch: f64,
}

impl LineSpec {
    /// `n` equal elements between `r_root` and `r_tip` along local +z,
    /// each point at its element centre.
    pub fn uniform(n: usize, r_root: f64, r_tip: f64, chord: f64, twist: f64, polar: &str) -> Result<Self> {
        if n < 2 || !(r_tip > r_root) {
            return Err(Error::Config(format!(
                "line needs at least 2 points and r_tip > r_root (got {n}, {r_root}, {r_tip})"
            )));
        }
        let h = (r_tip - r_root) / n as f64;
        let points = (0..n)
            .map(|k| LinePoint {
                offset: Vector3::new(0.0, 0.0, r_root + (k as f64 + 0.5) * h),
                orientation: Matrix3::identity(),
                chord,
                length: h,
                twist,
                polar: polar.to_string(),
            })
            .collect();
        let spec = Self { points, pitch: 0.0 };
        spec.validate()?;
        Ok(spec)
    }

    /// Points at the given span stations `(r, chord, twist, polar)` along
    /// local +z. Element lengths follow from the spacing of neighbouring
    /// stations.
    pub fn from_stations(stations: &[(f64, f64, f64, String)]) -> Result<Self> {
        if stations.len() < 2 {
            return Err(Error::Config("a line needs at least 2 stations".into()));
        }
        let r: Vec<f64> = stations.iter().map(|s| s.0).collect();
        if r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("line stations must have strictly increasing r".into()));
        }
        let n = r.len();
        let points = stations
            .iter()
            .enumerate()
            .map(|(k, (rk, chord, twist, polar))| {
                let length = if k == 0 {
                    r[1] - r[0]
                } else if k == n - 1 {
                    r[n - 1] - r[n - 2]
                } else {
                    0.5 * (r[k + 1] - r[k - 1])
                };
                LinePoint {
                    offset: Vector3::new(0.0, 0.0, *rk),
                    orientation: Matrix3::identity(),
                    chord: *chord,
                    length,
                    twist: *twist,
                    polar: polar.clone(),
                }
            })
            .collect();
        let spec = Self { points, pitch: 0.0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_pitch(mut self, pitch: f64) -> Self {
        self.pitch = pitch;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::Config("a line needs at least 2 points".into()));
        }
        for (k, p) in self.points.iter().enumerate() {
            if !(p.chord > 0.0 && p.length > 0.0) || !p.twist.is_finite() {
                return Err(Error::Config(format!(
                    "line point {k}: chord and element length must be positive"
                )));
            }
        }
        if !self.pitch.is_finite() {
            return Err(Error::Config("pitch must be finite".into()));
        }
        Ok(())
    }
}

/// Uniformly loaded disk in the component's local y-z plane; the rotor axis
/// is local +x.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskSpec {
    pub radius: f64,
    pub rings: usize,
    pub sectors: usize,
    /// One thrust coefficient for the whole disk or one per ring.
    pub thrust_coefficients: Vec<f64>,
}

impl DiskSpec {
    pub fn uniform(radius: f64, rings: usize, sectors: usize, thrust_coefficient: f64) -> Result<Self> {
        let spec = Self { radius, rings, sectors, thrust_coefficients: vec![thrust_coefficient] };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Config(format!("disk radius must be positive, got {}", self.radius)));
        }
        if self.rings == 0 || self.sectors == 0 {
            return Err(Error::Config("disk ring and sector counts must be at least 1".into()));
        }
        if self.thrust_coefficients.len() != 1 && self.thrust_coefficients.len() != self.rings {
            return Err(Error::Config(format!(
                "disk needs 1 or {} thrust coefficients, got {}",
                self.rings,
                self.thrust_coefficients.len()
            )));
        }
        if let Some(ct) = self.thrust_coefficients.iter().find(|c| !(**c >= 0.0 && **c < 1.0)) {
            return Err(Error::Config(format!("thrust coefficient {ct} outside [0, 1)")));
        }
        Ok(())
    }

    pub fn thrust_coefficient(&self, ring: usize) -> f64 {
        if self.thrust_coefficients.len() == 1 {
            self.thrust_coefficients[0]
        } else {
            self.thrust_coefficients[ring]
        }
    }

    pub fn ring_bounds(&self, ring: usize) -> (f64, f64) {
        let h = self.radius / self.rings as f64;
        (ring as f64 * h, (ring + 1) as f64 * h)
    }

    /// Area represented by one sample of `ring`.
    pub fn sample_area(&self, ring: usize) -> f64 {
        let (a, b) = self.ring_bounds(ring);
        std::f64::consts::PI * (b * b - a * a) / self.sectors as f64
    }

    /// Local offsets of the samples, ring-major, at the area-halving radius
    /// of each ring and mid-sector angle.
    pub fn sample_offsets(&self) -> Vec<(usize, Vector3<f64>)> {
        let mut out = Vec::with_capacity(self.rings * self.sectors);
        for ring in 0..self.rings {
            let (a, b) = self.ring_bounds(ring);
            let r = (0.5 * (a * a + b * b)).sqrt();
            for s in 0..self.sectors {
                let theta = (s as f64 + 0.5) * std::f64::consts::TAU / self.sectors as f64;
                out.push((ring, Vector3::new(0.0, r * theta.cos(), r * theta.sin())));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum Discretization {
    #[default]
    None,
    Line(LineSpec),
    Disk(DiskSpec),
}

impl Discretization {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Line(_) => "line",
            Self::Disk(_) => "disk",
        }
    }
}

/// Frame handed from a parent to its children.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixPoint {
    pub transform: Transform,
    /// World angular velocity of the frame (rad/s).
    pub omega: Vector3<f64>,
    /// World velocity of the frame origin (m/s).
    pub velocity: Vector3<f64>,
}

impl FixPoint {
    pub fn world() -> Self {
        Self { transform: Transform::identity(), omega: Vector3::zeros(), velocity: Vector3::zeros() }
    }

    /// Velocity of the rigidly attached world point `p`.
    pub fn point_velocity(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.velocity + self.omega.cross(&(p - self.transform.p))
    }
}

/// Turbine part placed relative to its parent.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub name: String,
    pub relative: Transform,
    /// Rotation rate about `rotation_axis` (rad/s).
    pub rotation_rate: f64,
    /// Unit axis in the component's relative frame.
    pub rotation_axis: Vector3<f64>,
    pub discretization: Discretization,
    pub children: Vec<Component>,
    spin: Matrix3<f64>,
    frame: FixPoint,
    points: Vec<Transform>,
}

impl Component {
    pub fn new(name: &str, relative: Transform) -> Self {
        Self {
            name: name.to_string(),
            relative,
            rotation_rate: 0.0,
            rotation_axis: Vector3::x(),
            discretization: Discretization::None,
            children: Vec::new(),
            spin: Matrix3::identity(),
            frame: FixPoint::world(),
            points: Vec::new(),
        }
    }

    pub fn with_rotation(mut self, rate: f64, axis: [f64; 3]) -> Result<Self> {
        let axis = Vector3::from(axis);
        if !(axis.norm() > 0.0) || !rate.is_finite() {
            return Err(Error::Config(format!(
                "component {}: rotation needs a non-zero axis and finite rate",
                self.name
            )));
        }
        self.rotation_rate = rate;
        self.rotation_axis = axis.normalize();
        Ok(self)
    }

    pub fn with_line(mut self, spec: LineSpec) -> Self {
        self.discretization = Discretization::Line(spec);
        self
    }

    pub fn with_disk(mut self, spec: DiskSpec) -> Self {
        self.discretization = Discretization::Disk(spec);
        self
    }

    pub fn with_child(mut self, child: Component) -> Self {
        self.children.push(child);
        self
    }

    /// Current fix point (world frame, angular and linear velocity).
    pub fn frame(&self) -> &FixPoint {
        &self.frame
    }

    /// Accumulated own rotation.
    pub fn spin(&self) -> &Matrix3<f64> {
        &self.spin
    }

    /// World transforms of the line points (empty for other kinds).
    pub fn line_points(&self) -> &[Transform] {
        &self.points
    }

    /// Advances the own rotation by `dt`, updates this node's discretization
    /// from `parent`, then recurses into the children in order.
    pub fn update_discretization_tree(&mut self, parent: &FixPoint, dt: f64) {
        if dt != 0.0 && self.rotation_rate != 0.0 {
            let r = rotation_matrix(self.rotation_axis, self.rotation_rate * dt)
                .expect("axis validated at construction");
            self.spin *= r;
            keep_orthonormal(&mut self.spin);
        }
        let transform = match &self.discretization {
            Discretization::Line(spec) => {
                let (start, points) = update_line(&parent.transform, &self.relative, spec, &self.spin);
                self.points = points;
                start
            }
            _ => update_disk(&parent.transform, &self.relative, &self.spin),
        };
        let own = parent.transform.t * self.relative.t * (self.rotation_axis * self.rotation_rate);
        self.frame = FixPoint {
            transform,
            omega: parent.omega + own,
            velocity: parent.point_velocity(&transform.p),
        };
        let frame = self.frame;
        for child in &mut self.children {
            child.update_discretization_tree(&frame, dt);
        }
    }

    /// Pre-order visit.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Component)) {
        f(self);
        for c in &self.children {
            c.visit(f);
        }
    }

    pub fn count(&self) -> usize {
        1 + self.children.iter().map(Component::count).sum::<usize>()
    }

    /// Structural signature ignoring names: discretization kind and child
    /// signatures.
    pub fn signature(&self) -> String {
        let mut kids: Vec<String> = self.children.iter().map(Component::signature).collect();
        kids.sort();
        if kids.is_empty() {
            self.discretization.kind().to_string()
        } else {
            format!("{}({})", self.discretization.kind(), kids.join(","))
        }
    }

    /// Copy of the tree with every node called `name` removed and its
    /// children attached to its parent.
    pub fn contract(&self, name: &str) -> Component {
        let mut out = self.clone();
        out.children = Vec::new();
        for c in &self.children {
            let c = c.contract(name);
            if c.name == name {
                out.children.extend(c.children);
            } else {
                out.children.push(c);
            }
        }
        out
    }
}

/// Disk (and plain component) update:
/// `T_c = T_p T_r R`, `p_c = p_p + T_p p_r`.
pub fn update_disk(parent: &Transform, relative: &Transform, r: &Matrix3<f64>) -> Transform {
    Transform { t: parent.t * relative.t * r, p: parent.p + parent.t * relative.p }
}

/// Line update: the start frame as for a disk, then every point
/// `T_i = T_start T_r,i R`, `p_i = p_start + T_start p_r,i`, with `T_r,i`
/// the point's own relative orientation.
pub fn update_line(
    parent: &Transform,
    relative: &Transform,
    spec: &LineSpec,
    r: &Matrix3<f64>,
) -> (Transform, Vec<Transform>) {
    let start = update_disk(parent, relative, r);
    let points = spec
        .points
        .iter()
        .map(|pt| Transform { t: start.t * pt.orientation * r, p: start.p + start.t * pt.offset })
        .collect();
    (start, points)
}
