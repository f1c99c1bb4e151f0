//! Freshness metrics over the per-frame event ledger.
//!
//! The age of information at the ground station grows linearly from zero at
//! t = 0 and drops to `t − t_i` whenever the full result of frame `i`
//! (captured at `t_i`) finishes arriving at `t'_i`. Only delivered frames
//! reset the age. The average age is the area under that sawtooth divided by
//! the observation horizon, accumulated as the initial triangle, one
//! trapezoid per delivery interval, and a terminal piece truncated at the
//! horizon. The peak age is the value just before each reset.

use crate::constants::EARTH_RADIUS_KM;
use crate::error::Error;
use crate::math::Vec3;
use crate::orbital::{coverage_central_angle_deg, ground_position, Constellation, GeodeticPoint};

/// Why a frame did or did not refresh the ground picture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameOutcome {
    /// Every fragment survived transport and the detector succeeded.
    Delivered,
    /// At least one loss draw failed on a distribution or routing leg.
    LostComm,
    /// Transport succeeded but the detector missed the content.
    LostDetection,
}

/// Timing ledger entry for one captured frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    /// Frame number, starting at 1 for the first capture.
    pub index: usize,
    /// Capture instant t_i (s).
    pub capture_s: f64,
    /// Arrival instant of each processing satellite's share at the ground
    /// station (s), in processor order.
    pub arrivals_s: Vec<f64>,
    /// Aggregate arrival t'_i: the last of `arrivals_s`.
    pub complete_s: f64,
    pub outcome: FrameOutcome,
}

impl FrameRecord {
    pub fn delivered(&self) -> bool {
        self.outcome == FrameOutcome::Delivered
    }

    /// Network time T_i = t'_i − t_i.
    pub fn network_time_s(&self) -> f64 {
        self.complete_s - self.capture_s
    }
}

/// Aggregate view of one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct AoiSummary {
    /// Time-average age (s); `None` when nothing was delivered inside the
    /// horizon, in which case only the coverage probability is meaningful.
    pub aoi_avg_s: Option<f64>,
    /// Average peak age (s); `None` under the same condition.
    pub paoi_avg_s: Option<f64>,
    /// Fraction of sampled epochs at which the target was capturable.
    pub coverage_probability: f64,
    pub delivered: usize,
    pub lost_comm: usize,
    pub lost_detection: usize,
    pub horizon_s: f64,
}

/// Aggregate arrival of a distributed frame: the largest per-satellite arrival,
/// i.e. the instant the ground station holds the complete picture.
pub fn aggregate_arrival(per_satellite_arrivals: &[f64]) -> Result<f64, Error> {
    if per_satellite_arrivals.is_empty() {
        return Err(Error::Domain("aggregate arrival needs at least one arrival".into()));
    }
    if per_satellite_arrivals.iter().any(|a| !a.is_finite()) {
        return Err(Error::Domain("aggregate arrival needs finite arrivals".into()));
    }
    Ok(per_satellite_arrivals.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Area contribution of one delivery interval: `Y·T + Y²/2`, algebraically
/// `½(T + Y)² − ½T²` — the trapezoid swept between consecutive resets when
/// the network time holds steady.
pub fn trapezoid_area(network_time_s: f64, interframe_s: f64) -> f64 {
    debug_assert!(network_time_s >= 0.0 && interframe_s >= 0.0);
    interframe_s * network_time_s + interframe_s * interframe_s / 2.0
}

/// Delivered records completing within the horizon, ordered by completion.
fn delivered_in_horizon(records: &[FrameRecord], horizon_s: f64) -> Vec<&FrameRecord> {
    let mut v: Vec<&FrameRecord> = records
        .iter()
        .filter(|r| r.delivered() && r.complete_s <= horizon_s)
        .collect();
    v.sort_by(|a, b| a.complete_s.total_cmp(&b.complete_s));
    v
}

/// Time-average age over `[0, horizon]`.
///
/// Integrates the sawtooth exactly: the initial `½ t'₁²` triangle, a
/// trapezoid per delivery interval, and the truncated tail
/// `(τ − t'_N)·T_N + ½(τ − t'_N)²`. Each interior trapezoid is anchored at
/// the previous delivery's network time so that the sum telescopes to the
/// exact sawtooth area for any ledger; for steady traffic every piece reduces
/// to [`trapezoid_area`] of that interval. A stale result that lands after a
/// fresher one never rewinds the age.
pub fn average_aoi(records: &[FrameRecord], horizon_s: f64) -> Result<f64, Error> {
    if !(horizon_s > 0.0) {
        return Err(Error::Domain(format!("horizon must be positive (got {horizon_s})")));
    }
    let delivered = delivered_in_horizon(records, horizon_s);
    if delivered.is_empty() {
        return Err(Error::NoDeliveredFrames);
    }

    let mut area = 0.0;
    // The picture is empty until the first delivery; its age reads as time
    // since the epoch, so the first piece is the ½ t'₁² triangle.
    let mut last_capture = 0.0_f64;
    let mut prev_complete = 0.0_f64;
    for record in &delivered {
        let age_before = record.complete_s - last_capture;
        let age_at_prev = prev_complete - last_capture;
        area += 0.5 * (age_before * age_before - age_at_prev * age_at_prev);
        last_capture = last_capture.max(record.capture_s);
        prev_complete = record.complete_s;
    }
    let age_end = horizon_s - last_capture;
    let age_at_prev = prev_complete - last_capture;
    area += 0.5 * (age_end * age_end - age_at_prev * age_at_prev);

    Ok(area / horizon_s)
}

/// Average peak age: the mean of the sawtooth value immediately before each
/// reset, `(t'₁ + Σ_{i≥2} (t'_i − t_{i−1})) / N`. A stale delivery (content
/// older than what the ground already holds) causes no reset and no peak.
pub fn average_paoi(records: &[FrameRecord], horizon_s: f64) -> Result<f64, Error> {
    let delivered = delivered_in_horizon(records, horizon_s);
    let mut last_capture = 0.0_f64;
    let mut sum = 0.0;
    let mut resets = 0usize;
    for record in &delivered {
        if record.capture_s > last_capture || resets == 0 {
            sum += record.complete_s - last_capture;
            resets += 1;
            last_capture = last_capture.max(record.capture_s);
        }
    }
    if resets == 0 {
        return Err(Error::NoDeliveredFrames);
    }
    Ok(sum / resets as f64)
}

/// Independent check of the closed forms: replays the age sample-by-sample at
/// resolution `step_s` and averages the samples and the observed peaks.
/// Returns `(average age, average peak age)`; the peak average is `None` when
/// nothing was delivered. Converges to [`average_aoi`] / [`average_paoi`] as
/// the step shrinks.
pub fn discrete_age_oracle(
    records: &[FrameRecord],
    horizon_s: f64,
    step_s: f64,
) -> (f64, Option<f64>) {
    assert!(step_s > 0.0 && horizon_s > 0.0);
    let deliveries = delivered_in_horizon(records, horizon_s);

    let steps = (horizon_s / step_s).floor() as usize;
    let mut next_delivery = 0usize;
    let mut last_capture = 0.0_f64;
    let mut age_sum = 0.0;
    let mut peaks = Vec::new();
    let mut prev_age = 0.0_f64;
    for k in 0..=steps {
        let t = k as f64 * step_s;
        while next_delivery < deliveries.len() && deliveries[next_delivery].complete_s <= t {
            last_capture = last_capture.max(deliveries[next_delivery].capture_s);
            next_delivery += 1;
        }
        let age = t - last_capture;
        if age < prev_age {
            // A reset happened since the previous sample; the peak is the last
            // value seen before the drop.
            peaks.push(prev_age);
        }
        age_sum += age;
        prev_age = age;
    }
    let avg = age_sum / (steps + 1) as f64;
    let paoi = if peaks.is_empty() {
        // All resets may sit beyond the final sample; fall back on the
        // delivered count check.
        if deliveries.is_empty() {
            None
        } else {
            Some(deliveries.iter().map(|d| d.network_time_s()).sum::<f64>() / deliveries.len() as f64)
        }
    } else {
        Some(peaks.iter().sum::<f64>() / peaks.len() as f64)
    };
    (avg, paoi)
}

/// Fraction of epochs in `[0, horizon]`, sampled every `step_s`, at which at
/// least one satellite can capture the target within the off-nadir limit.
pub fn coverage_probability(
    constellation: &Constellation,
    target: &GeodeticPoint,
    beta_deg: f64,
    horizon_s: f64,
    step_s: f64,
) -> f64 {
    assert!(step_s > 0.0 && horizon_s > 0.0);
    let cos_lambda = coverage_central_angle_deg(constellation.spec().altitude_km, beta_deg)
        .to_radians()
        .cos();
    let radius = constellation.radius_km();
    let steps = (horizon_s / step_s).floor() as usize;
    let mut covered = 0usize;
    let mut hint: Option<usize> = None;
    for k in 0..=steps {
        let t = k as f64 * step_s;
        let target_unit = ground_position(target, t) * (1.0 / EARTH_RADIUS_KM);
        if covers(constellation, radius, t, target_unit, cos_lambda, &mut hint) {
            covered += 1;
        }
    }
    covered as f64 / (steps + 1) as f64
}

/// Scans for any satellite within the coverage cone, checking the previously
/// covering satellite first (captures are temporally coherent).
pub(crate) fn covers(
    constellation: &Constellation,
    radius_km: f64,
    t: f64,
    target_unit: Vec3,
    cos_lambda: f64,
    hint: &mut Option<usize>,
) -> bool {
    let threshold = cos_lambda * radius_km;
    if let Some(i) = *hint {
        if constellation.position_at(i, t).dot(target_unit) >= threshold {
            return true;
        }
    }
    for i in 0..constellation.len() {
        if constellation.position_at(i, t).dot(target_unit) >= threshold {
            *hint = Some(i);
            return true;
        }
    }
    *hint = None;
    false
}

/// Ledger export with one row per captured frame. `Y_i` is the spacing to the
/// previous capture (to the epoch for the first frame); ages are recomputed
/// from the delivered subsequence, not from this column.
pub fn ledger_to_csv(records: &[FrameRecord]) -> String {
    let mut out = String::from("i,t_i,t_prime_i,T_i,Y_i,delivered\n");
    let mut prev_capture = 0.0;
    for r in records {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6},{}\n",
            r.index,
            r.capture_s,
            r.complete_s,
            r.network_time_s(),
            r.capture_s - prev_capture,
            u8::from(r.delivered()),
        ));
        prev_capture = r.capture_s;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbital::{ConstellationSpec, ShellType};
    use proptest::prelude::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn record(index: usize, capture: f64, complete: f64, outcome: FrameOutcome) -> FrameRecord {
        FrameRecord { index, capture_s: capture, arrivals_s: vec![complete], complete_s: complete, outcome }
    }

    fn delivered(index: usize, capture: f64, complete: f64) -> FrameRecord {
        record(index, capture, complete, FrameOutcome::Delivered)
    }

    /// Random but physically consistent ledger: the next capture waits for
    /// the previous frame to clear the pipeline (so receptions arrive in
    /// order), network times are positive, and some frames are lost.
    pub(crate) fn random_ledger(rng: &mut ChaCha12Rng, horizon: f64) -> Vec<FrameRecord> {
        let mut records: Vec<FrameRecord> = Vec::new();
        let mut earliest = 0.0_f64;
        let mut index = 0;
        loop {
            let t = earliest + rng.random_range(1.0..45.0);
            if t >= horizon * 0.95 {
                break;
            }
            index += 1;
            let network = rng.random_range(2.0..30.0);
            let outcome = match rng.random_range(0..10u32) {
                0 => FrameOutcome::LostComm,
                1 => FrameOutcome::LostDetection,
                _ => FrameOutcome::Delivered,
            };
            records.push(record(index, t, t + network, outcome));
            earliest = t + network;
        }
        records
    }

    #[test]
    fn aggregate_arrival_is_the_max() {
        assert_eq!(aggregate_arrival(&[10.0, 12.0, 11.0, 15.0, 13.0]).unwrap(), 15.0);
        assert_eq!(aggregate_arrival(&[42.0]).unwrap(), 42.0);
        assert_eq!(aggregate_arrival(&[13.0, 15.0, 12.0, 11.0, 10.0]).unwrap(), 15.0);
        assert!(aggregate_arrival(&[]).is_err());
        assert!(aggregate_arrival(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn trapezoid_reference_values() {
        assert_eq!(trapezoid_area(10.0, 20.0), 400.0);
        assert_eq!(trapezoid_area(99.0, 0.0), 0.0);
    }

    proptest! {
        #[test]
        fn trapezoid_matches_square_difference(t in 0.0f64..1e4, y in 0.0f64..1e4) {
            let squares = 0.5 * (t + y) * (t + y) - 0.5 * t * t;
            let direct = trapezoid_area(t, y);
            prop_assert!((squares - direct).abs() <= 1e-9 * (1.0 + squares.abs()));
        }
    }

    #[test]
    fn single_frame_average_age() {
        let records = vec![delivered(1, 0.0, 30.0)];
        let aoi = average_aoi(&records, 100.0).unwrap();
        assert!((aoi - 50.0).abs() < 1e-12, "aoi {aoi}");
        assert_eq!(average_paoi(&records, 100.0).unwrap(), 30.0);
    }

    #[test]
    fn two_frame_average_age() {
        let records = vec![delivered(1, 0.0, 10.0), delivered(2, 50.0, 60.0)];
        let aoi = average_aoi(&records, 60.0).unwrap();
        assert!((aoi - 30.0).abs() < 1e-12, "aoi {aoi}");
        let paoi = average_paoi(&records, 60.0).unwrap();
        assert!((paoi - 35.0).abs() < 1e-12, "paoi {paoi}");
    }

    #[test]
    fn paoi_reference_example() {
        let records = vec![delivered(1, 0.0, 30.0), delivered(2, 40.0, 70.0)];
        let paoi = average_paoi(&records, 100.0).unwrap();
        assert!((paoi - 50.0).abs() < 1e-12, "paoi {paoi}");
    }

    /// Steady traffic with constant T and Y tends to AoI = T + Y/2 and
    /// PAoI = T + Y.
    #[test]
    fn periodic_steady_state_limits() {
        let (t_net, y) = (12.0, 40.0);
        let n = 5000usize;
        let records: Vec<FrameRecord> = (1..=n)
            .map(|i| delivered(i, i as f64 * y, i as f64 * y + t_net))
            .collect();
        let horizon = (n as f64 + 1.0) * y;
        let aoi = average_aoi(&records, horizon).unwrap();
        let paoi = average_paoi(&records, horizon).unwrap();
        assert!((aoi - (t_net + y / 2.0)).abs() < 0.1, "aoi {aoi}");
        assert!((paoi - (t_net + y)).abs() < 0.05, "paoi {paoi}");
        // PAoI − AoI approaches Y/2 for loss-free periodic traffic.
        assert!(((paoi - aoi) - y / 2.0).abs() < 0.12);
    }

    #[test]
    fn no_delivery_is_an_error_and_oracle_reads_half_horizon() {
        let records = vec![record(1, 10.0, 20.0, FrameOutcome::LostComm)];
        assert!(matches!(average_aoi(&records, 100.0), Err(Error::NoDeliveredFrames)));
        assert!(matches!(average_paoi(&records, 100.0), Err(Error::NoDeliveredFrames)));
        let (avg, paoi) = discrete_age_oracle(&records, 100.0, 0.01);
        assert!((avg - 50.0).abs() < 0.02, "oracle avg {avg}");
        assert!(paoi.is_none());
    }

    #[test]
    fn oracle_reproduces_reference_examples() {
        let one = vec![delivered(1, 0.0, 30.0)];
        let (avg, _) = discrete_age_oracle(&one, 100.0, 0.01);
        assert!((avg - 50.0).abs() / 50.0 < 0.005);

        let two = vec![delivered(1, 0.0, 10.0), delivered(2, 50.0, 60.0)];
        let (avg, _) = discrete_age_oracle(&two, 60.0, 0.01);
        assert!((avg - 30.0).abs() / 30.0 < 0.005);
    }

    #[test]
    fn closed_forms_match_oracle_on_random_ledgers() {
        let mut rng = ChaCha12Rng::seed_from_u64(2718);
        for case in 0..100 {
            let horizon = rng.random_range(400.0..1500.0);
            let records = random_ledger(&mut rng, horizon);
            if records.iter().filter(|r| r.delivered()).count() == 0 {
                continue;
            }
            let aoi = average_aoi(&records, horizon).unwrap();
            let paoi = average_paoi(&records, horizon).unwrap();
            let (oracle_aoi, oracle_paoi) = discrete_age_oracle(&records, horizon, 0.01);
            assert!(
                (aoi - oracle_aoi).abs() / oracle_aoi < 0.005,
                "case {case}: aoi {aoi} vs oracle {oracle_aoi}"
            );
            let oracle_paoi = oracle_paoi.unwrap();
            assert!(
                (paoi - oracle_paoi).abs() / oracle_paoi < 0.005,
                "case {case}: paoi {paoi} vs oracle {oracle_paoi}"
            );
        }
    }

    /// Fewer updates can only leave the picture staler.
    #[test]
    fn removing_a_delivery_never_decreases_average_age() {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        for _ in 0..50 {
            let horizon = 1000.0;
            let records = random_ledger(&mut rng, horizon);
            let delivered_count = records.iter().filter(|r| r.delivered()).count();
            if delivered_count < 2 {
                continue;
            }
            let full = average_aoi(&records, horizon).unwrap();
            let drop_at = rng.random_range(0..records.len());
            let mut thinned = records.clone();
            if !thinned[drop_at].delivered() {
                continue;
            }
            thinned.remove(drop_at);
            let less = average_aoi(&thinned, horizon).unwrap();
            assert!(less >= full - 1e-9, "thinned {less} < full {full}");
        }
    }

    #[test]
    fn ledger_csv_layout() {
        let records = vec![
            delivered(1, 10.0, 25.0),
            record(2, 40.0, 55.0, FrameOutcome::LostComm),
        ];
        let csv = ledger_to_csv(&records);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "i,t_i,t_prime_i,T_i,Y_i,delivered");
        assert_eq!(lines.next().unwrap(), "1,10.000000,25.000000,15.000000,10.000000,1");
        assert_eq!(lines.next().unwrap(), "2,40.000000,55.000000,15.000000,30.000000,0");
    }

    fn delta_shell(planes: u32, slots: u32) -> Constellation {
        Constellation::build(ConstellationSpec {
            planes,
            sats_per_plane: slots,
            altitude_km: 550.0,
            inclination_deg: 53.0,
            shell: ShellType::Delta,
            phasing_factor: 1,
        })
        .unwrap()
    }

    #[test]
    fn pole_is_never_covered_by_a_delta_shell() {
        let c = delta_shell(10, 10);
        let p = coverage_probability(&c, &GeodeticPoint::new(90.0, 0.0), 50.0, 20_000.0, 10.0);
        assert_eq!(p, 0.0);
    }

    /// With the camera cone horizon-capped, a wide-open off-nadir limit keeps
    /// a dense shell in permanent view of an equatorial target.
    #[test]
    fn wide_cone_saturates_coverage() {
        let c = delta_shell(20, 20);
        let p = coverage_probability(&c, &GeodeticPoint::new(0.0, 55.0), 180.0, 20_000.0, 10.0);
        assert_eq!(p, 1.0);
    }

    /// Over a full rotation the shell has no preferred longitude.
    #[test]
    fn coverage_is_longitude_invariant_over_a_rotation() {
        let c = delta_shell(8, 8);
        let horizon = crate::constants::SIDEREAL_DAY_S;
        let a = coverage_probability(&c, &GeodeticPoint::new(35.0, 0.0), 50.0, horizon, 30.0);
        let b = coverage_probability(&c, &GeodeticPoint::new(35.0, -117.5), 50.0, horizon, 30.0);
        assert!((a - b).abs() <= 0.01, "p_m {a} vs {b}");
    }
}
