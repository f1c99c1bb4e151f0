//! The inter-satellite-link grid and its routing queries.
//!
//! Every satellite keeps four permanent links: the previous and next slot in
//! its own plane (optical) and the same slot in the two adjacent planes
//! (radio), so the constellation forms a 2-D torus on planes × slots. Routing
//! picks, among all paths with the fewest hops, the one with the smallest
//! summed propagation distance for the positions supplied by the caller.

use crate::error::Error;
use crate::math::Vec3;
use crate::orbital::{elevation_deg, Constellation, ConstellationSpec, SatelliteId};

/// Which transmitter a hop uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkClass {
    /// Optical link along the orbital plane.
    IntraPlane,
    /// Radio link to an adjacent plane.
    InterPlane,
    /// Radio link from a satellite down to the ground station.
    Downlink,
}

/// The ISL torus of one shell. Holds only the grid dimensions; positions are
/// supplied per query so a single topology serves every timestamp.
#[derive(Debug, Clone, Copy)]
pub struct Topology {
    planes: u32,
    sats_per_plane: u32,
}

impl Topology {
    pub fn new(spec: &ConstellationSpec) -> Self {
        Topology { planes: spec.planes, sats_per_plane: spec.sats_per_plane }
    }

    pub fn planes(&self) -> u32 {
        self.planes
    }

    pub fn sats_per_plane(&self) -> u32 {
        self.sats_per_plane
    }

    pub fn len(&self) -> usize {
        self.planes as usize * self.sats_per_plane as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index_of(&self, id: SatelliteId) -> usize {
        id.plane as usize * self.sats_per_plane as usize + id.slot as usize
    }

    pub fn contains(&self, id: SatelliteId) -> bool {
        id.plane < self.planes && id.slot < self.sats_per_plane
    }

    /// The four grid neighbours: previous/next slot in the plane, same slot in
    /// the previous/next plane, with modular wraparound. Grids smaller than
    /// 3×3 would repeat neighbours and are rejected.
    pub fn neighbors(&self, id: SatelliteId) -> Result<[SatelliteId; 4], Error> {
        if self.planes < 3 || self.sats_per_plane < 3 {
            return Err(Error::Topology(format!(
                "distinct four-neighbour grid needs at least 3 planes and 3 slots (got {}x{})",
                self.planes, self.sats_per_plane
            )));
        }
        let m = self.planes;
        let n = self.sats_per_plane;
        Ok([
            SatelliteId { plane: id.plane, slot: (id.slot + n - 1) % n },
            SatelliteId { plane: id.plane, slot: (id.slot + 1) % n },
            SatelliteId { plane: (id.plane + m - 1) % m, slot: id.slot },
            SatelliteId { plane: (id.plane + 1) % m, slot: id.slot },
        ])
    }

    /// Torus graph distance (minimum hop count) between two satellites.
    pub fn hop_count(&self, a: SatelliteId, b: SatelliteId) -> u32 {
        ring_distance(a.plane, b.plane, self.planes) + ring_distance(a.slot, b.slot, self.sats_per_plane)
    }

    fn wrap_plane(&self, base: u32, dir: i64, steps: u32) -> u32 {
        wrap(base, dir, steps, self.planes)
    }

    fn wrap_slot(&self, base: u32, dir: i64, steps: u32) -> u32 {
        wrap(base, dir, steps, self.sats_per_plane)
    }
}

fn wrap(base: u32, dir: i64, steps: u32, len: u32) -> u32 {
    let shifted = base as i64 + dir * steps as i64;
    shifted.rem_euclid(len as i64) as u32
}

fn ring_distance(a: u32, b: u32, len: u32) -> u32 {
    let fwd = (b + len - a) % len;
    fwd.min(len - fwd)
}

/// Travel directions along one torus axis realizing the minimum step count.
/// Both directions are returned when the ring distance ties.
fn ring_moves(from: u32, to: u32, len: u32) -> Vec<(i64, u32)> {
    let fwd = (to + len - from) % len;
    if fwd == 0 {
        return vec![(1, 0)];
    }
    let bwd = len - fwd;
    if fwd < bwd {
        vec![(1, fwd)]
    } else if bwd < fwd {
        vec![(-1, bwd)]
    } else {
        vec![(1, fwd), (-1, bwd)]
    }
}

/// A route through the grid, optionally ending in a downlink hop.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutePath {
    /// Satellite sequence; consecutive entries are grid neighbours. A path
    /// from a satellite to itself is the single-entry sequence.
    pub nodes: Vec<SatelliteId>,
    /// Euclidean hop lengths (km), one per consecutive node pair.
    pub hop_km: Vec<f64>,
    /// Link class per hop, aligned with `hop_km`.
    pub hop_class: Vec<LinkClass>,
    /// Slant range (km) of the terminal satellite-to-ground hop, if attached.
    pub downlink_km: Option<f64>,
}

impl RoutePath {
    pub fn hop_count(&self) -> usize {
        self.hop_km.len()
    }

    /// Summed ISL distance, excluding any downlink hop.
    pub fn isl_km(&self) -> f64 {
        self.hop_km.iter().sum()
    }

    /// Summed distance including the downlink hop when present.
    pub fn total_km(&self) -> f64 {
        self.isl_km() + self.downlink_km.unwrap_or(0.0)
    }

    pub fn gateway(&self) -> SatelliteId {
        *self.nodes.last().expect("route has at least its source node")
    }
}

/// Relative tolerance for comparing summed path distances.
const DISTANCE_TIE_TOL: f64 = 1e-9;

fn distance_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= DISTANCE_TIE_TOL * (1.0 + a.abs().max(b.abs()))
}

/// Minimum-hop path with the smallest total propagation distance.
///
/// The hop count always equals the torus graph distance. Among all paths with
/// that hop count the returned one minimizes the summed Euclidean length at
/// the supplied position snapshot; exact distance ties resolve to the
/// lexicographically smallest satellite-id sequence. Runs a dynamic program
/// over the monotone lattice spanned by the shorter ring direction of each
/// axis (both directions when a ring distance ties), so cost is quadratic in
/// the hop count rather than a full graph search.
pub fn min_hop_path(
    topo: &Topology,
    positions: &[Vec3],
    src: SatelliteId,
    dst: SatelliteId,
) -> RoutePath {
    assert!(topo.contains(src) && topo.contains(dst), "satellite ids outside the grid");
    assert_eq!(positions.len(), topo.len(), "position snapshot size mismatch");
    if src == dst {
        return RoutePath {
            nodes: vec![src],
            hop_km: Vec::new(),
            hop_class: Vec::new(),
            downlink_km: None,
        };
    }

    let mut best: Option<(f64, Vec<SatelliteId>)> = None;
    for &(pdir, psteps) in &ring_moves(src.plane, dst.plane, topo.planes) {
        for &(sdir, ssteps) in &ring_moves(src.slot, dst.slot, topo.sats_per_plane) {
            let candidate = lattice_best_path(topo, positions, src, pdir, psteps, sdir, ssteps);
            best = Some(match best {
                None => candidate,
                Some(cur) => {
                    if distance_tie(candidate.0, cur.0) {
                        if candidate.1 < cur.1 {
                            candidate
                        } else {
                            cur
                        }
                    } else if candidate.0 < cur.0 {
                        candidate
                    } else {
                        cur
                    }
                }
            });
        }
    }

    let (_, nodes) = best.expect("at least one direction combination");
    let mut hop_km = Vec::with_capacity(nodes.len() - 1);
    let mut hop_class = Vec::with_capacity(nodes.len() - 1);
    for pair in nodes.windows(2) {
        hop_km.push(positions[topo.index_of(pair[0])].distance(positions[topo.index_of(pair[1])]));
        hop_class.push(if pair[0].plane == pair[1].plane {
            LinkClass::IntraPlane
        } else {
            LinkClass::InterPlane
        });
    }
    RoutePath { nodes, hop_km, hop_class, downlink_km: None }
}

/// Cost-to-go DP over the (psteps+1) × (ssteps+1) lattice, followed by a
/// forward walk that, whenever both moves stay optimal, prefers the smaller
/// next satellite id (yielding the lexicographically smallest optimal path).
fn lattice_best_path(
    topo: &Topology,
    positions: &[Vec3],
    src: SatelliteId,
    pdir: i64,
    psteps: u32,
    sdir: i64,
    ssteps: u32,
) -> (f64, Vec<SatelliteId>) {
    let rows = psteps as usize + 1;
    let cols = ssteps as usize + 1;
    let node = |i: usize, j: usize| SatelliteId {
        plane: topo.wrap_plane(src.plane, pdir, i as u32),
        slot: topo.wrap_slot(src.slot, sdir, j as u32),
    };
    let dist = |a: SatelliteId, b: SatelliteId| {
        positions[topo.index_of(a)].distance(positions[topo.index_of(b)])
    };

    // cost_to_go[i][j] = cheapest remaining distance from lattice cell (i, j)
    // to the destination cell (rows-1, cols-1).
    let mut cost = vec![0.0_f64; rows * cols];
    for i in (0..rows).rev() {
        for j in (0..cols).rev() {
            if i == rows - 1 && j == cols - 1 {
                continue;
            }
            let here = node(i, j);
            let mut c = f64::INFINITY;
            if i + 1 < rows {
                c = c.min(dist(here, node(i + 1, j)) + cost[(i + 1) * cols + j]);
            }
            if j + 1 < cols {
                c = c.min(dist(here, node(i, j + 1)) + cost[i * cols + (j + 1)]);
            }
            cost[i * cols + j] = c;
        }
    }

    let total = cost[0];
    let mut nodes = Vec::with_capacity(rows + cols - 1);
    let (mut i, mut j) = (0usize, 0usize);
    nodes.push(node(0, 0));
    while i + 1 < rows || j + 1 < cols {
        let here = node(i, j);
        let remaining = cost[i * cols + j];
        let plane_move = (i + 1 < rows).then(|| {
            let next = node(i + 1, j);
            (dist(here, next) + cost[(i + 1) * cols + j], next)
        });
        let slot_move = (j + 1 < cols).then(|| {
            let next = node(i, j + 1);
            (dist(here, next) + cost[i * cols + (j + 1)], next)
        });
        let take_plane = match (plane_move, slot_move) {
            (Some((pc, pn)), Some((sc, sn))) => {
                let p_opt = distance_tie(pc, remaining);
                let s_opt = distance_tie(sc, remaining);
                match (p_opt, s_opt) {
                    (true, true) => pn < sn,
                    (true, false) => true,
                    (false, true) => false,
                    // Guard against accumulated rounding: fall back to the
                    // cheaper continuation.
                    (false, false) => pc <= sc,
                }
            }
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => unreachable!("walk ends at the destination cell"),
        };
        if take_plane {
            i += 1;
        } else {
            j += 1;
        }
        nodes.push(node(i, j));
    }
    (total, nodes)
}

/// Cheapest way to bring a payload from `src` to the ground: the grid path to
/// whichever ground-visible satellite minimizes ISL distance plus slant range.
/// Returns `None` when no satellite clears the elevation mask.
pub fn route_to_ground(
    topo: &Topology,
    positions: &[Vec3],
    src: SatelliteId,
    ground: Vec3,
    min_elevation_deg: f64,
) -> Option<RoutePath> {
    let mut best: Option<(f64, RoutePath)> = None;
    for (index, &pos) in positions.iter().enumerate() {
        if elevation_deg(ground, pos) < min_elevation_deg {
            continue;
        }
        let gateway = SatelliteId {
            plane: index as u32 / topo.sats_per_plane(),
            slot: index as u32 % topo.sats_per_plane(),
        };
        let path = min_hop_path(topo, positions, src, gateway);
        let slant = pos.distance(ground);
        let total = path.isl_km() + slant;
        let replace = match &best {
            None => true,
            Some((cur, cur_path)) => {
                if distance_tie(total, *cur) {
                    gateway < cur_path.gateway()
                } else {
                    total < *cur
                }
            }
        };
        if replace {
            let mut path = path;
            path.downlink_km = Some(slant);
            best = Some((total, path));
        }
    }
    best.map(|(_, path)| path)
}

/// The satellite `route_to_ground` would hand the payload to, if any.
pub fn select_gateway(
    topo: &Topology,
    positions: &[Vec3],
    src: SatelliteId,
    ground: Vec3,
    min_elevation_deg: f64,
) -> Option<SatelliteId> {
    route_to_ground(topo, positions, src, ground, min_elevation_deg).map(|p| p.gateway())
}

/// Minimum and maximum Euclidean length over every ISL edge of the grid at the
/// sampled times.
pub fn adjacent_distance_bounds(
    constellation: &Constellation,
    sample_times: &[f64],
) -> Result<(f64, f64), Error> {
    edge_bounds(constellation, sample_times, false)
}

/// Minimum and maximum Euclidean distance over every satellite pair at the
/// sampled times — the spatial extent of the whole constellation rather than
/// of single links.
pub fn pairwise_distance_bounds(
    constellation: &Constellation,
    sample_times: &[f64],
) -> Result<(f64, f64), Error> {
    edge_bounds(constellation, sample_times, true)
}

fn edge_bounds(
    constellation: &Constellation,
    sample_times: &[f64],
    all_pairs: bool,
) -> Result<(f64, f64), Error> {
    if sample_times.is_empty() {
        return Err(Error::Domain("distance bounds need at least one sample time".into()));
    }
    let spec = *constellation.spec();
    let m = spec.planes as usize;
    let n = spec.sats_per_plane as usize;
    if m * n < 2 {
        return Err(Error::Topology("distance bounds need at least two satellites".into()));
    }

    let mut d_min = f64::INFINITY;
    let mut d_max: f64 = 0.0;
    let mut positions = Vec::new();
    for &t in sample_times {
        constellation.positions_into(t, &mut positions);
        if all_pairs {
            for i in 0..positions.len() {
                for j in (i + 1)..positions.len() {
                    let d = positions[i].distance(positions[j]);
                    d_min = d_min.min(d);
                    d_max = d_max.max(d);
                }
            }
        } else {
            for p in 0..m {
                for s in 0..n {
                    let here = positions[p * n + s];
                    if n >= 2 {
                        let d = here.distance(positions[p * n + (s + 1) % n]);
                        d_min = d_min.min(d);
                        d_max = d_max.max(d);
                    }
                    if m >= 2 {
                        let d = here.distance(positions[((p + 1) % m) * n + s]);
                        d_min = d_min.min(d);
                        d_max = d_max.max(d);
                    }
                }
            }
        }
    }
    if !(d_min > 0.0) {
        return Err(Error::Topology("adjacent satellites coincide; distances are degenerate".into()));
    }
    Ok((d_min, d_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::EARTH_RADIUS_KM;
    use crate::orbital::ShellType;
    use proptest::prelude::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use std::collections::VecDeque;

    fn topo(m: u32, n: u32) -> Topology {
        Topology { planes: m, sats_per_plane: n }
    }

    fn random_positions(rng: &mut ChaCha12Rng, count: usize) -> Vec<Vec3> {
        (0..count)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-1000.0..1000.0),
                    rng.random_range(-1000.0..1000.0),
                    rng.random_range(-1000.0..1000.0),
                )
            })
            .collect()
    }

    fn bfs_distance(topo: &Topology, src: SatelliteId, dst: SatelliteId) -> u32 {
        let mut seen = vec![u32::MAX; topo.len()];
        let mut queue = VecDeque::new();
        seen[topo.index_of(src)] = 0;
        queue.push_back(src);
        while let Some(id) = queue.pop_front() {
            let d = seen[topo.index_of(id)];
            if id == dst {
                return d;
            }
            for nb in topo.neighbors(id).unwrap() {
                let slot = &mut seen[topo.index_of(nb)];
                if *slot == u32::MAX {
                    *slot = d + 1;
                    queue.push_back(nb);
                }
            }
        }
        unreachable!("torus is connected");
    }

    /// Exhaustively enumerates every minimum-hop path and returns the smallest
    /// total distance.
    fn enumerate_min_hop_best(
        topo: &Topology,
        positions: &[Vec3],
        src: SatelliteId,
        dst: SatelliteId,
    ) -> (f64, usize) {
        fn recurse(
            topo: &Topology,
            positions: &[Vec3],
            at: SatelliteId,
            dst: SatelliteId,
            dist_so_far: f64,
            best: &mut f64,
            count: &mut usize,
        ) {
            if at == dst {
                *count += 1;
                if dist_so_far < *best {
                    *best = dist_so_far;
                }
                return;
            }
            let remaining = topo.hop_count(at, dst);
            for nb in topo.neighbors(at).unwrap() {
                if topo.hop_count(nb, dst) + 1 == remaining {
                    let d = positions[topo.index_of(at)].distance(positions[topo.index_of(nb)]);
                    recurse(topo, positions, nb, dst, dist_so_far + d, best, count);
                }
            }
        }
        let mut best = f64::INFINITY;
        let mut count = 0;
        recurse(topo, positions, src, dst, 0.0, &mut best, &mut count);
        (best, count)
    }

    #[test]
    fn neighbors_wrap_around() {
        let t = topo(20, 20);
        let nb = t.neighbors(SatelliteId { plane: 0, slot: 0 }).unwrap();
        assert_eq!(
            nb,
            [
                SatelliteId { plane: 0, slot: 19 },
                SatelliteId { plane: 0, slot: 1 },
                SatelliteId { plane: 19, slot: 0 },
                SatelliteId { plane: 1, slot: 0 },
            ]
        );

        let t = topo(20, 22);
        let nb = t.neighbors(SatelliteId { plane: 10, slot: 5 }).unwrap();
        assert_eq!(
            nb,
            [
                SatelliteId { plane: 10, slot: 4 },
                SatelliteId { plane: 10, slot: 6 },
                SatelliteId { plane: 9, slot: 5 },
                SatelliteId { plane: 11, slot: 5 },
            ]
        );
    }

    #[test]
    fn neighbors_reject_degenerate_grids() {
        assert!(topo(2, 5).neighbors(SatelliteId { plane: 0, slot: 0 }).is_err());
        assert!(topo(5, 2).neighbors(SatelliteId { plane: 0, slot: 0 }).is_err());
    }

    #[test]
    fn satellite_never_neighbors_itself() {
        let t = topo(3, 3);
        for p in 0..3 {
            for s in 0..3 {
                let id = SatelliteId { plane: p, slot: s };
                assert!(!t.neighbors(id).unwrap().contains(&id));
            }
        }
    }

    #[test]
    fn identity_path_is_empty() {
        let t = topo(6, 6);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let positions = random_positions(&mut rng, t.len());
        let id = SatelliteId { plane: 2, slot: 3 };
        let path = min_hop_path(&t, &positions, id, id);
        assert_eq!(path.nodes, vec![id]);
        assert_eq!(path.hop_count(), 0);
        assert_eq!(path.total_km(), 0.0);
    }

    #[test]
    fn adjacent_path_is_single_hop() {
        let t = topo(6, 6);
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let positions = random_positions(&mut rng, t.len());
        let a = SatelliteId { plane: 1, slot: 1 };
        let b = SatelliteId { plane: 1, slot: 2 };
        let path = min_hop_path(&t, &positions, a, b);
        assert_eq!(path.hop_count(), 1);
        assert_eq!(path.hop_class, vec![LinkClass::IntraPlane]);
        let expected = positions[t.index_of(a)].distance(positions[t.index_of(b)]);
        assert!((path.total_km() - expected).abs() < 1e-12);
    }

    /// On a 6×6 torus the (0,0) → (2,2) region has C(4,2) = 6 monotone paths;
    /// the returned distance must equal their enumerated minimum.
    #[test]
    fn six_by_six_diagonal_matches_enumeration() {
        let t = topo(6, 6);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let positions = random_positions(&mut rng, t.len());
        let src = SatelliteId { plane: 0, slot: 0 };
        let dst = SatelliteId { plane: 2, slot: 2 };
        let path = min_hop_path(&t, &positions, src, dst);
        assert_eq!(path.hop_count(), 4);
        let (best, count) = enumerate_min_hop_best(&t, &positions, src, dst);
        assert_eq!(count, 6);
        assert!((path.total_km() - best).abs() < 1e-9 * (1.0 + best));
    }

    #[test]
    fn path_nodes_are_consecutive_neighbors() {
        let t = topo(5, 6);
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let positions = random_positions(&mut rng, t.len());
        let path = min_hop_path(
            &t,
            &positions,
            SatelliteId { plane: 0, slot: 5 },
            SatelliteId { plane: 3, slot: 1 },
        );
        for pair in path.nodes.windows(2) {
            assert!(t.neighbors(pair[0]).unwrap().contains(&pair[1]));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn hop_count_matches_bfs(
            m in 3u32..=6,
            n in 3u32..=6,
            seed in 0u64..1000,
            src_lin in 0usize..36,
            dst_lin in 0usize..36,
        ) {
            let t = topo(m, n);
            let src_lin = src_lin % t.len();
            let dst_lin = dst_lin % t.len();
            let src = SatelliteId { plane: (src_lin / n as usize) as u32, slot: (src_lin % n as usize) as u32 };
            let dst = SatelliteId { plane: (dst_lin / n as usize) as u32, slot: (dst_lin % n as usize) as u32 };
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let positions = random_positions(&mut rng, t.len());
            let path = min_hop_path(&t, &positions, src, dst);
            prop_assert_eq!(path.hop_count() as u32, bfs_distance(&t, src, dst));
            // Symmetry of the hop count.
            let back = min_hop_path(&t, &positions, dst, src);
            prop_assert_eq!(path.hop_count(), back.hop_count());
        }

        #[test]
        fn distance_matches_exhaustive_enumeration(
            m in 3u32..=5,
            n in 3u32..=5,
            seed in 0u64..1000,
        ) {
            let t = topo(m, n);
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let positions = random_positions(&mut rng, t.len());
            let src = SatelliteId { plane: 0, slot: 0 };
            for p in 0..m {
                for s in 0..n {
                    let dst = SatelliteId { plane: p, slot: s };
                    let path = min_hop_path(&t, &positions, src, dst);
                    let (best, _) = enumerate_min_hop_best(&t, &positions, src, dst);
                    let best = if src == dst { 0.0 } else { best };
                    prop_assert!((path.total_km() - best).abs() < 1e-9 * (1.0 + best));
                }
            }
        }
    }

    fn shell(n: u32) -> Constellation {
        Constellation::build(ConstellationSpec {
            planes: 20,
            sats_per_plane: n,
            altitude_km: 550.0,
            inclination_deg: 53.0,
            shell: ShellType::Delta,
            phasing_factor: 1,
        })
        .unwrap()
    }

    #[test]
    fn intra_plane_spacing_is_the_ring_chord() {
        // 2 (R+h) sin(180°/N) at 6921 km orbit radius.
        for (n, expected) in [(20u32, 2165.4), (22u32, 1969.9)] {
            let c = shell(n);
            let chord =
                2.0 * c.radius_km() * (180.0 / n as f64).to_radians().sin();
            assert!((chord - expected).abs() < 0.1, "chord {chord} vs {expected}");
            // Constant over time for any intra-plane edge.
            let t0 = c.positions(0.0);
            let a = t0[0].distance(t0[1]);
            assert!((a - chord).abs() < 1e-6);
            for &t in &[500.0, 1234.5, 4000.0] {
                let pos = c.positions(t);
                assert!((pos[0].distance(pos[1]) - chord).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn distance_bounds_are_ordered_and_positive() {
        let c = shell(22);
        let times: Vec<f64> = (0..32).map(|k| k as f64 * c.period_s() / 32.0).collect();
        let (d_min, d_max) = adjacent_distance_bounds(&c, &times).unwrap();
        assert!(d_min > 0.0);
        assert!(d_max >= d_min);
        let (p_min, p_max) = pairwise_distance_bounds(&c, &times).unwrap();
        assert!(p_min <= d_min);
        assert!(p_max >= d_max);
        // The constellation extent approaches the orbital diameter.
        assert!(p_max > 1.9 * c.radius_km(), "extent {p_max}");
        assert!(adjacent_distance_bounds(&c, &[]).is_err());
    }

    /// Inter-plane edges of a delta shell stretch widest where the planes are
    /// farthest apart (equator crossing) and squeeze tightest near the turning
    /// latitudes.
    #[test]
    fn inter_plane_edge_extremes_sit_at_equator_and_turning_latitude() {
        let c = shell(20);
        let a = c.index_of(SatelliteId { plane: 0, slot: 0 });
        let b = c.index_of(SatelliteId { plane: 1, slot: 0 });
        let samples = 2000;
        let mut max_d = f64::NEG_INFINITY;
        let mut min_d = f64::INFINITY;
        let mut z_at_max = 0.0;
        let mut z_at_min = 0.0;
        for k in 0..samples {
            let t = k as f64 * c.period_s() / samples as f64;
            let pa = c.position_at(a, t);
            let pb = c.position_at(b, t);
            let d = pa.distance(pb);
            let mid_z = 0.5 * (pa.z + pb.z).abs();
            if d > max_d {
                max_d = d;
                z_at_max = mid_z;
            }
            if d < min_d {
                min_d = d;
                z_at_min = mid_z;
            }
        }
        let z_turn = c.radius_km() * 53.0_f64.to_radians().sin();
        assert!(z_at_max < 0.15 * z_turn, "widest at |z| = {z_at_max}");
        assert!(z_at_min > 0.85 * z_turn, "tightest at |z| = {z_at_min}");
    }

    #[test]
    fn gateway_prefers_visible_satellites() {
        // Ground station on the +x axis; satellite 0 overhead at t = 0.
        let c = shell(20);
        let t = Topology::new(c.spec());
        let positions = c.positions(0.0);
        let ground = Vec3::new(EARTH_RADIUS_KM, 0.0, 0.0);
        let src = SatelliteId { plane: 0, slot: 0 };
        let path = route_to_ground(&t, &positions, src, ground, 10.0).unwrap();
        // The satellite at the station zenith is its own best gateway.
        assert_eq!(path.gateway(), src);
        assert_eq!(path.hop_count(), 0);
        assert!((path.total_km() - 550.0).abs() < 1.0);
        assert_eq!(select_gateway(&t, &positions, src, ground, 10.0), Some(src));
    }

    /// Sampled every 10 s over a full rotation, a 20x20 shell leaves the Los
    /// Angeles station without an eligible gateway on fewer than 1% of epochs.
    #[test]
    fn gateway_almost_always_available_over_a_rotation() {
        let c = shell(20);
        let station = crate::orbital::GeodeticPoint::new(34.05, -118.24);
        let steps = (crate::constants::SIDEREAL_DAY_S / 10.0) as usize;
        let mut eligible = 0usize;
        let mut positions = Vec::new();
        for k in 0..=steps {
            let t = k as f64 * 10.0;
            let ground = crate::orbital::ground_position(&station, t);
            c.positions_into(t, &mut positions);
            if positions.iter().any(|&p| elevation_deg(ground, p) >= 10.0) {
                eligible += 1;
            }
        }
        let fraction = eligible as f64 / (steps + 1) as f64;
        assert!(fraction > 0.99, "gateway availability {fraction}");
    }

    #[test]
    fn no_gateway_without_visibility() {
        let single = Constellation::build(ConstellationSpec {
            planes: 1,
            sats_per_plane: 1,
            altitude_km: 550.0,
            inclination_deg: 0.0,
            shell: ShellType::Delta,
            phasing_factor: 0,
        })
        .unwrap();
        let t = Topology::new(single.spec());
        let positions = single.positions(0.0);
        // Station on the far side of the Earth.
        let ground = Vec3::new(-EARTH_RADIUS_KM, 0.0, 0.0);
        let id = SatelliteId { plane: 0, slot: 0 };
        assert_eq!(select_gateway(&t, &positions, id, ground, 10.0), None);
    }
}
