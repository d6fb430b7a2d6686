use super::graph::{GraphKind, GraphPlan};
use super::schedule::ScaleSchedule;
use super::AssemblyError;
use crate::cusps::{cusp_volume, CuspModel, Truncation};
use crate::profiles::{make_decay_profile, DecayMode, ProfileFunction};

/// Relative tolerance for boundary metrics on the two sides of a glued edge.
pub const MATCHING_TOLERANCE: f64 = 1e-12;

/// Size of the boundary cross-section of a cusp truncated at `t`, for a block scaled by
/// `scale`: the conformal factor `2f(t)` times the length scale.
pub fn boundary_coefficient(profile: &ProfileFunction, t: f64, scale: f64) -> Result<f64, AssemblyError> {
    Ok(2.0 * profile.value(t)? * scale)
}

/// Depth on side `u` matching depth `t_v` on side `v` when both cusps have the same
/// exponential tail starting at `tail_knot`.
pub fn matching_truncation(scale_u: f64, scale_v: f64, t_v: f64, tail_knot: f64) -> Result<f64, AssemblyError> {
    if !(scale_u > 0.0 && scale_v > 0.0) {
        return Err(AssemblyError::Invalid(format!("scales {scale_u}, {scale_v} must be positive")));
    }
    if t_v < tail_knot {
        return Err(AssemblyError::Tail { t: t_v, knot: tail_knot });
    }
    let t_u = t_v + (scale_u / scale_v).ln();
    // a depth chosen to land on the knot can come back a few ulps short of it
    let slack = 8.0 * f64::EPSILON * tail_knot.abs().max(t_v.abs()).max(1.0);
    if t_u < tail_knot - slack {
        return Err(AssemblyError::Tail { t: t_u, knot: tail_knot });
    }
    Ok(t_u.max(tail_knot))
}

/// One boundary component of a block: a cusp starting at `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct Port {
    pub label: String,
    pub profile: ProfileFunction,
    pub start: f64,
}

impl Port {
    /// Start of the exponential tail.
    pub fn tail_knot(&self) -> f64 {
        self.profile.tail().lo.max(self.start)
    }
}

/// A block: compact core plus cusp ports, in the unscaled metric.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTemplate {
    pub ports: Vec<Port>,
    pub interior_volume: f64,
    /// Distance from the basepoint of the block to the start of each cusp.
    pub interior_radius: f64,
    pub cross_section_volume: f64,
}

impl BlockTemplate {
    /// Block with one port per edge of the graph at each vertex, each port carrying the
    /// cosh-to-exponential decay profile started at `t = −1`.
    pub fn standard(kind: GraphKind) -> Result<Self, AssemblyError> {
        let profile = make_decay_profile(-1.0, DecayMode::Exponential)?;
        const LABELS: [&str; 4] = ["A", "B", "C", "D"];
        let ports = LABELS[..kind.ports_per_block()]
            .iter()
            .map(|l| Port {
                label: (*l).to_string(),
                profile: profile.clone(),
                start: -1.0,
            })
            .collect();
        Ok(Self {
            ports,
            interior_volume: 1.0,
            interior_radius: 1.0,
            cross_section_volume: 1.0,
        })
    }

    /// Volume with every cusp left untruncated: an upper bound for any truncation.
    pub fn volume_upper(&self, n: usize) -> Result<f64, AssemblyError> {
        let mut v = self.interior_volume;
        for p in &self.ports {
            let c = CuspModel::new(n, self.cross_section_volume, p.profile.clone(), p.start, Truncation::Unbounded)?;
            v += cusp_volume(&c)?
                .value()
                .ok_or_else(|| AssemblyError::Invalid(format!("port {} has infinite volume", p.label)))?;
        }
        Ok(v)
    }

    /// Distance from the basepoint to the boundary of a port truncated at `t`, at `scale`.
    pub fn port_length(&self, port: usize, t: f64, scale: f64) -> f64 {
        scale * (self.interior_radius + t - self.ports[port].start)
    }

    /// Largest tail knot over the ports: truncation depths must not precede it.
    pub fn tail_knot(&self) -> f64 {
        self.ports.iter().map(Port::tail_knot).fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TruncationOptions {
    /// Minimum depth of outward ports; defaults to one unit past the tail knot.
    pub base_depth: Option<f64>,
    /// Deepen outward ports until every block has diameter at least 1.
    pub unit_diameter: bool,
}

/// Truncations of all blocks at one graph distance (all such blocks are alike).
#[derive(Debug, Clone, PartialEq)]
pub struct LevelPlan {
    pub level: u32,
    pub scale: f64,
    /// Depth of the port glued towards the base vertex.
    pub inner: Option<f64>,
    /// Depth of the ports glued away from the base vertex.
    pub outer: f64,
    /// Depth of the chord port (chord graph, levels ≥ 1).
    pub chord: Option<f64>,
    /// `(port label, length)` as seen from the block's basepoint, in the scaled metric.
    pub port_lengths: Vec<(String, f64)>,
    /// Lower bound on the block diameter: the two radial cusp lengths in sequence.
    pub diameter_lower: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    /// Between levels `w` and `w + 1`.
    Radial,
    /// Between `m` and `−m`, both at level `w`.
    Chord,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GluedEdge {
    pub kind: EdgeKind,
    pub from_level: u32,
    pub to_level: u32,
    pub coeff_from: f64,
    pub coeff_to: f64,
}

impl GluedEdge {
    pub fn relative_mismatch(&self) -> f64 {
        (self.coeff_from - self.coeff_to).abs() / self.coeff_from.abs().max(self.coeff_to.abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationPlan {
    pub graph: GraphPlan,
    pub levels: Vec<LevelPlan>,
    pub edges: Vec<GluedEdge>,
}

impl TruncationPlan {
    pub fn max_matching_error(&self) -> f64 {
        self.edges.iter().map(GluedEdge::relative_mismatch).fold(0.0, f64::max)
    }

    pub fn matching_holds(&self) -> bool {
        self.max_matching_error() <= MATCHING_TOLERANCE
    }

    /// `l(A) + l(B) < l(C) < 2(l(A) + l(B))` on every chord block.
    pub fn chord_constraints_hold(&self) -> bool {
        self.levels.iter().filter(|l| l.chord.is_some()).all(|l| {
            let get = |name: &str| l.port_lengths.iter().find(|(n, _)| n == name).map(|x| x.1).unwrap_or(f64::NAN);
            let ab = get("A") + get("B");
            let c = get("C");
            ab < c && c < 2.0 * ab
        })
    }
}

/// Matched truncations for the first `levels` graph distances.
///
/// Outward ports at level `w` are cut at `T_out(w)`; the inward port at level `w + 1` is
/// then forced by matching: `T_in(w+1) = T_out(w) + ln(s_{w+1}/s_w)`. Chord ports join
/// blocks of equal scale, so they match at equal depth; they are cut so that
/// `l(C) = 1.5·(l(A) + l(B))`.
pub fn plan_truncations(
    graph: &GraphPlan,
    schedule: &ScaleSchedule,
    block: &BlockTemplate,
    levels: u32,
    options: TruncationOptions,
) -> Result<TruncationPlan, AssemblyError> {
    if block.ports.len() != graph.kind.ports_per_block() {
        return Err(AssemblyError::Invalid(format!(
            "{} graph needs blocks with {} ports, got {}",
            graph.kind.name(),
            graph.kind.ports_per_block(),
            block.ports.len()
        )));
    }
    if levels == 0 {
        return Err(AssemblyError::Invalid("plan needs at least one level".into()));
    }
    let knot = block.tail_knot();
    let base = options.base_depth.unwrap_or(knot + 1.0);
    if base < knot {
        return Err(AssemblyError::Tail { t: base, knot });
    }
    let profile = &block.ports[0].profile;
    let start = block.ports[0].start;
    let chord_graph = graph.kind == GraphKind::Chord;
    let mut plans: Vec<LevelPlan> = Vec::with_capacity(levels as usize);
    let mut edges = Vec::new();
    let mut inner: Option<f64> = None;
    for w in 0..levels {
        let s = schedule.scale(w);
        let s_next = schedule.scale(w + 1);
        // the next level's inner depth must stay in the tail
        let mut outer = base.max(knot + (s / s_next).ln());
        if options.unit_diameter {
            let inner_len = inner.map_or(outer - start, |t| t - start);
            outer = outer.max(start + 1.0 / s - inner_len);
        }
        let mut lengths = Vec::new();
        let label = |i: usize| block.ports[i].label.clone();
        lengths.push((label(0), block.port_length(0, inner.unwrap_or(outer), s)));
        lengths.push((label(1), block.port_length(1, outer, s)));
        let ab = lengths[0].1 + lengths[1].1;
        let mut chord = None;
        if chord_graph {
            if w >= 1 {
                let l_c = 1.5 * ab;
                let t_c = start + l_c / s - block.interior_radius;
                if t_c < knot {
                    return Err(AssemblyError::Tail { t: t_c, knot });
                }
                chord = Some(t_c);
                lengths.push((label(2), block.port_length(2, t_c, s)));
                let coeff = boundary_coefficient(profile, t_c, s)?;
                edges.push(GluedEdge {
                    kind: EdgeKind::Chord,
                    from_level: w,
                    to_level: w,
                    coeff_from: coeff,
                    coeff_to: coeff,
                });
            }
        } else {
            for i in 2..block.ports.len() {
                lengths.push((label(i), block.port_length(i, outer, s)));
            }
        }
        let inner_len = inner.map_or(outer - start, |t| t - start);
        plans.push(LevelPlan {
            level: w,
            scale: s,
            inner,
            outer,
            chord,
            port_lengths: lengths,
            diameter_lower: s * (inner_len + outer - start),
        });
        if w + 1 < levels {
            let t_in = matching_truncation(s_next, s, outer, knot)?;
            edges.push(GluedEdge {
                kind: EdgeKind::Radial,
                from_level: w,
                to_level: w + 1,
                coeff_from: boundary_coefficient(profile, outer, s)?,
                coeff_to: boundary_coefficient(profile, t_in, s_next)?,
            });
            inner = Some(t_in);
        }
    }
    Ok(TruncationPlan {
        graph: *graph,
        levels: plans,
        edges,
    })
}
